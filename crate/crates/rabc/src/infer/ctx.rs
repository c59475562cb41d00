//! Typing contexts and place-directed reading and writing.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::annot::{wellformed, ConstraintSet, RichType};
use crate::syntax::{Place, Span};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("{span}: {message}")]
    Shape { message: String, span: Span },
    #[error("{span}: `copy` applies only to integers and booleans")]
    CopyNonAtom { span: Span },
    #[error("{span}: cannot share a mutable borrow")]
    ShareOfMut { span: Span },
    #[error("{span}: read through a moved-out (bot) type at `{place}`")]
    BotRead { place: String, span: Span },
    #[error("{span}: call to unknown function `{name}`")]
    UnknownFunction { name: String, span: Span },
    #[error("{span}: {message}")]
    MatchBinder { message: String, span: Span },
}

impl TypeError {
    pub fn span(&self) -> Span {
        match self {
            TypeError::Shape { span, .. }
            | TypeError::CopyNonAtom { span }
            | TypeError::ShareOfMut { span }
            | TypeError::BotRead { span, .. }
            | TypeError::UnknownFunction { span, .. }
            | TypeError::MatchBinder { span, .. } => *span,
        }
    }

    pub fn shape(message: impl Into<String>, span: Span) -> Self {
        TypeError::Shape {
            message: message.into(),
            span,
        }
    }
}

/// Finite map from variable names to rich types. The domain is fixed at
/// construction: the analyzed function's parameters, locals, and `ret`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypingContext {
    map: BTreeMap<String, RichType>,
}

impl TypingContext {
    pub fn new() -> Self {
        TypingContext::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, t: RichType) {
        self.map.insert(name.into(), t);
    }

    pub fn get(&self, name: &str) -> Option<&RichType> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &RichType)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    /// Context reading: dereferencing a mutable reference reads its
    /// current component.
    pub fn read(&self, p: &Place, span: Span) -> Result<RichType, TypeError> {
        match p {
            Place::Var(x) => self.map.get(x).cloned().ok_or_else(|| {
                TypeError::shape(format!("unbound variable `{}`", x), span)
            }),
            Place::Deref(base) => {
                let parent = self.read(base, span)?;
                match parent {
                    RichType::BoxListR(a) => Ok(RichType::ListR(a)),
                    RichType::SharedR(inner) => Ok(*inner),
                    RichType::MutR(current, _) => Ok(*current),
                    RichType::Bot => Err(TypeError::BotRead {
                        place: format!("{}", p),
                        span,
                    }),
                    other => Err(TypeError::shape(
                        format!(
                            "cannot dereference `{}`: `{}` is not a box or reference",
                            p,
                            other.erase().map(|t| t.to_string()).unwrap_or_default()
                        ),
                        span,
                    )),
                }
            }
        }
    }

    /// Context writing. Writing through a mutable reference replaces its
    /// current component and emits the dropping condition for the old
    /// current; boxes and shared references rewrap structurally.
    pub fn write(
        &mut self,
        p: &Place,
        t: RichType,
        span: Span,
        prov: &str,
    ) -> Result<ConstraintSet, TypeError> {
        match p {
            Place::Var(x) => {
                if !self.map.contains_key(x) {
                    return Err(TypeError::shape(format!("unbound variable `{}`", x), span));
                }
                self.map.insert(x.clone(), t);
                Ok(vec![])
            }
            Place::Deref(base) => {
                let parent = self.read(base, span)?;
                match parent {
                    RichType::BoxListR(_) => match t {
                        RichType::ListR(a) => self.write(base, RichType::BoxListR(a), span, prov),
                        other => Err(TypeError::shape(
                            format!(
                                "only a list type can be written through a box, got `{}`",
                                other.erase().map(|t| t.to_string()).unwrap_or_default()
                            ),
                            span,
                        )),
                    },
                    RichType::SharedR(_) => self.write(base, RichType::shared(t), span, prov),
                    RichType::MutR(current, prophecy) => {
                        let mut cs = wellformed(&current, &format!("{prov}:wt-mut-drop"));
                        cs.extend(self.write(
                            base,
                            RichType::MutR(Box::new(t), prophecy),
                            span,
                            prov,
                        )?);
                        Ok(cs)
                    }
                    RichType::Bot => Err(TypeError::BotRead {
                        place: format!("{}", p),
                        span,
                    }),
                    other => Err(TypeError::shape(
                        format!(
                            "cannot write through `{}`: `{}` is not a box or reference",
                            p,
                            other.erase().map(|t| t.to_string()).unwrap_or_default()
                        ),
                        span,
                    )),
                }
            }
        }
    }
}
