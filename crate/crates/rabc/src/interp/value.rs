//! Runtime values and the store.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::Place;

/// A runtime place: a variable in a specific activation frame plus a
/// number of dereferences.
///
/// The dynamics use a single flat store, and every function call binds
/// the callee's parameters, locals and return variable as ordinary store
/// locations. Qualifying variables by an activation frame keeps distinct
/// activations of the same function from clobbering each other while
/// borrow values still point through caller frames.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RtPlace {
    pub frame: u32,
    pub root: String,
    pub derefs: u32,
}

impl RtPlace {
    pub fn var(frame: u32, name: impl Into<String>) -> Self {
        RtPlace {
            frame,
            root: name.into(),
            derefs: 0,
        }
    }

    pub fn from_place(frame: u32, p: &Place) -> Self {
        RtPlace {
            frame,
            root: p.root().to_string(),
            derefs: p.derefs(),
        }
    }

    fn parent(&self) -> RtPlace {
        debug_assert!(self.derefs > 0);
        RtPlace {
            frame: self.frame,
            root: self.root.clone(),
            derefs: self.derefs - 1,
        }
    }
}

impl fmt::Display for RtPlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.derefs {
            write!(f, "*")?;
        }
        write!(f, "{}@{}", self.root, self.frame)
    }
}

/// List values: `nil` or `cons(n, box(lv))`. The tail is a box value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ListVal {
    Nil,
    Cons(i64, Box<Value>),
}

/// Runtime values, including the undefined value for unused locations.
///
/// Box payloads are list values at rest, but a match on a boxed place
/// transiently writes the undefined value through the box, so the payload
/// is stored as a general value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Undef,
    Int(i64),
    BoolV(bool),
    ListV(ListVal),
    BoxV(Box<Value>),
    Borrow(RtPlace, Box<Value>),
}

impl Value {
    pub fn boxed_list(lv: ListVal) -> Value {
        Value::BoxV(Box::new(Value::ListV(lv)))
    }

    /// Build a list value of the given integers.
    pub fn list(items: &[i64]) -> Value {
        let mut lv = ListVal::Nil;
        for &n in items.iter().rev() {
            lv = ListVal::Cons(n, Box::new(Value::boxed_list(lv)));
        }
        Value::ListV(lv)
    }

    /// Length of a list value, if it is a well-shaped list.
    pub fn list_len(&self) -> Option<usize> {
        let Value::ListV(mut lv) = self.clone() else {
            return None;
        };
        let mut n = 0;
        loop {
            match lv {
                ListVal::Nil => return Some(n),
                ListVal::Cons(_, tail) => {
                    n += 1;
                    match *tail {
                        Value::BoxV(payload) => match *payload {
                            Value::ListV(next) => lv = next,
                            _ => return None,
                        },
                        _ => return None,
                    }
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undef => write!(f, "undef"),
            Value::Int(n) => write!(f, "{}", n),
            Value::BoolV(b) => write!(f, "{}", b),
            Value::ListV(lv) => {
                write!(f, "[")?;
                let mut cur = lv;
                let mut first = true;
                loop {
                    match cur {
                        ListVal::Nil => break,
                        ListVal::Cons(n, tail) => {
                            if !first {
                                write!(f, ",")?;
                            }
                            first = false;
                            write!(f, "{}", n)?;
                            match &**tail {
                                Value::BoxV(payload) => match &**payload {
                                    Value::ListV(next) => cur = next,
                                    other => {
                                        write!(f, "|{}", other)?;
                                        break;
                                    }
                                },
                                other => {
                                    write!(f, "|{}", other)?;
                                    break;
                                }
                            }
                        }
                    }
                }
                write!(f, "]")
            }
            Value::BoxV(payload) => write!(f, "box({})", payload),
            Value::Borrow(origin, payload) => write!(f, "&({}, {})", origin, payload),
        }
    }
}

/// The store: a finite map from frame-qualified variables to values.
/// Unmapped names read as the undefined value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    map: BTreeMap<(u32, String), Value>,
}

pub const BORROW_DEPTH_CAP: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("read through undefined value at {0}")]
    UndefRead(String),
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("integer overflow")]
    Overflow,
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("borrow chain exceeded depth cap (malformed input?)")]
    DepthExceeded,
    #[error("call to undefined function `{0}`")]
    UnknownFunction(String),
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn get_var(&self, frame: u32, name: &str) -> Value {
        self.map
            .get(&(frame, name.to_string()))
            .cloned()
            .unwrap_or(Value::Undef)
    }

    pub fn set_var(&mut self, frame: u32, name: &str, v: Value) {
        self.map.insert((frame, name.to_string()), v);
    }

    pub fn clear_var(&mut self, frame: u32, name: &str) {
        self.map.remove(&(frame, name.to_string()));
    }

    /// Store reading: resolve a place to its value.
    ///
    /// Reading a plain variable never fails (unused variables are the
    /// undefined value); dereferencing demands a box or borrow at each
    /// level.
    pub fn read(&self, p: &RtPlace) -> Result<Value, RuntimeError> {
        if p.derefs == 0 {
            return Ok(self.get_var(p.frame, &p.root));
        }
        let inner = self.read(&p.parent())?;
        match inner {
            Value::BoxV(payload) => Ok(*payload),
            Value::Borrow(_, payload) => Ok(*payload),
            Value::Undef => Err(RuntimeError::UndefRead(p.to_string())),
            other => Err(RuntimeError::ShapeError(format!(
                "cannot dereference {} (found {})",
                p, other
            ))),
        }
    }

    /// Store writing. Writing through a borrow updates the origin place
    /// eagerly and refreshes the borrow's cached payload.
    pub fn write(&mut self, p: &RtPlace, v: Value) -> Result<(), RuntimeError> {
        self.write_guarded(p, v, 0)
    }

    fn write_guarded(&mut self, p: &RtPlace, v: Value, depth: u32) -> Result<(), RuntimeError> {
        if depth > BORROW_DEPTH_CAP {
            return Err(RuntimeError::DepthExceeded);
        }
        if p.derefs == 0 {
            self.set_var(p.frame, &p.root, v);
            return Ok(());
        }
        let parent = p.parent();
        match self.read(&parent)? {
            Value::BoxV(_) => self.write_guarded(&parent, Value::BoxV(Box::new(v)), depth + 1),
            Value::Borrow(origin, _) => {
                self.write_guarded(&origin, v.clone(), depth + 1)?;
                self.write_guarded(&parent, Value::Borrow(origin, Box::new(v)), depth + 1)
            }
            Value::Undef => Err(RuntimeError::ShapeError(format!(
                "write through undefined value at {}",
                p
            ))),
            other => Err(RuntimeError::ShapeError(format!(
                "cannot write through {} (found {})",
                p, other
            ))),
        }
    }

    /// Iterate over all bindings of one frame.
    pub fn frame_vars(&self, frame: u32) -> impl Iterator<Item = (&str, &Value)> {
        self.map
            .range((frame, String::new())..(frame + 1, String::new()))
            .map(|((_, name), v)| (name.as_str(), v))
    }
}
