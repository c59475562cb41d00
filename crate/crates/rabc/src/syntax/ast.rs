//! Abstract syntax for the borrow calculus.

use std::fmt;

/// Source position of a node, for diagnostics.
///
/// Spans are carried on every node but compare equal to each other, so
/// derived equality on AST nodes is purely structural.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Unannotated surface types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleType {
    Int,
    Bool,
    List,
    BoxList,
    SharedRef(Box<SimpleType>),
    MutRef(Box<SimpleType>),
    Unit,
}

impl SimpleType {
    /// True if a shared reference of a mutable reference occurs anywhere
    /// in the type. Well-borrowed programs never contain such types.
    pub fn has_shared_of_mut(&self) -> bool {
        match self {
            SimpleType::SharedRef(inner) => {
                matches!(**inner, SimpleType::MutRef(_)) || inner.has_shared_of_mut()
            }
            SimpleType::MutRef(inner) => inner.has_shared_of_mut(),
            _ => false,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, SimpleType::Int | SimpleType::Bool)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Int => write!(f, "i32"),
            SimpleType::Bool => write!(f, "bool"),
            SimpleType::List => write!(f, "list"),
            SimpleType::BoxList => write!(f, "box list"),
            SimpleType::SharedRef(t) => write!(f, "& {}", t),
            SimpleType::MutRef(t) => write!(f, "&mut {}", t),
            SimpleType::Unit => write!(f, "unit"),
        }
    }
}

/// A memory location: a variable or a chain of dereferences.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Var(String),
    Deref(Box<Place>),
}

impl Place {
    pub fn var(name: impl Into<String>) -> Place {
        Place::Var(name.into())
    }

    pub fn deref(self) -> Place {
        Place::Deref(Box::new(self))
    }

    /// The variable at the root of the dereference chain.
    pub fn root(&self) -> &str {
        match self {
            Place::Var(x) => x,
            Place::Deref(p) => p.root(),
        }
    }

    /// Number of dereferences applied to the root variable.
    pub fn derefs(&self) -> u32 {
        match self {
            Place::Var(_) => 0,
            Place::Deref(p) => p.derefs() + 1,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Var(x) => write!(f, "{}", x),
            Place::Deref(p) => write!(f, "*{}", p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    EqEq,
}

impl BinOp {
    pub fn is_comparison(&self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::EqEq)
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::EqEq => "==",
        };
        write!(f, "{}", s)
    }
}

/// Resource-free expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    IntLit(i64),
    True,
    False,
    Nil,
    Boxed(Box<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    Copy(Place),
    BorrowShared(Place),
    BorrowMut(Place),
    Move(Place),
}

/// Resource-aware statements. Sequencing is represented as statement
/// lists inside blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Tick(i64),
    Return,
    Drop(Place),
    If(Place, Block, Block),
    Match {
        scrutinee: Place,
        nil_arm: Block,
        hd: String,
        tl: String,
        cons_arm: Block,
    },
    Assign(Place, Expr),
    AssignCons(Place, Expr, Expr),
    AssignCall(Place, String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub lets: Vec<LocalDecl>,
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub name: String,
    pub ty: SimpleType,
    pub span: Span,
}

/// The name of the distinguished return variable.
pub const RET: &str = "ret";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<(String, SimpleType)>,
    pub ret: SimpleType,
    pub body: Block,
    pub span: Span,
}

impl Function {
    /// Local declarations at the top of the function body.
    pub fn locals(&self) -> &[LocalDecl] {
        &self.body.lets
    }

    /// Declared type of a variable: a parameter, a local, or `ret`.
    pub fn var_type(&self, name: &str) -> Option<&SimpleType> {
        if name == RET {
            return Some(&self.ret);
        }
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .or_else(|| self.locals().iter().find(|d| d.name == name).map(|d| &d.ty))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub functions: Vec<Function>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }
}
