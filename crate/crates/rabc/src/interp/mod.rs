//! Resource-aware big-step evaluator: the ground-truth cost oracle.

mod eval;
mod value;

pub use eval::{run_function, Interp, TraceHook, DEFAULT_FUEL, ENTRY_FRAME, OWNER_FRAME};
pub use value::{ListVal, RtPlace, RuntimeError, Store, Value, BORROW_DEPTH_CAP};
