//! Type syntax: exponential types `s ::= A | !s` over linear types
//! `A ::= a | s -o A | A & A | forall a. A`, the forall/bang-lazy
//! predicate, sizes, and capture-avoiding type substitution.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{fresh_name, Name};

#[derive(Clone, Debug)]
pub enum Type {
    Var(Name),
    /// `antecedent -o consequent`; the consequent must be linear.
    Imp(Box<Type>, Box<Type>),
    /// `left & right`; both components linear.
    With(Box<Type>, Box<Type>),
    /// `forall binder. body`; the body linear.
    Forall(Name, Box<Type>),
    Bang(Box<Type>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("a bang may not appear at the top of an implication consequent, a & component, or a forall body")]
    BangInLinearPosition,
}

impl Type {
    pub fn var(name: impl Into<Name>) -> Type {
        Type::Var(name.into())
    }

    /// `antecedent -o consequent`; rejects `s -o !t` (grammar constraint).
    pub fn imp(antecedent: Type, consequent: Type) -> Result<Type, TypeError> {
        if matches!(consequent, Type::Bang(_)) {
            return Err(TypeError::BangInLinearPosition);
        }
        Ok(Type::Imp(Box::new(antecedent), Box::new(consequent)))
    }

    pub fn with(left: Type, right: Type) -> Result<Type, TypeError> {
        if matches!(left, Type::Bang(_)) || matches!(right, Type::Bang(_)) {
            return Err(TypeError::BangInLinearPosition);
        }
        Ok(Type::With(Box::new(left), Box::new(right)))
    }

    pub fn forall(binder: impl Into<Name>, body: Type) -> Result<Type, TypeError> {
        if matches!(body, Type::Bang(_)) {
            return Err(TypeError::BangInLinearPosition);
        }
        Ok(Type::Forall(binder.into(), Box::new(body)))
    }

    pub fn bang(body: Type) -> Type {
        Type::Bang(Box::new(body))
    }

    pub fn bang_n(mut t: Type, n: usize) -> Type {
        for _ in 0..n {
            t = Type::bang(t);
        }
        t
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, Type::Bang(_))
    }

    pub fn is_strictly_exponential(&self) -> bool {
        matches!(self, Type::Bang(_))
    }

    /// Well-formedness per the grammar: every implication consequent, &
    /// component and forall body is linear.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Type::Var(_) => true,
            Type::Imp(a, c) => a.is_well_formed() && c.is_linear() && c.is_well_formed(),
            Type::With(l, r) => {
                l.is_linear() && r.is_linear() && l.is_well_formed() && r.is_well_formed()
            }
            Type::Forall(_, b) => b.is_linear() && b.is_well_formed(),
            Type::Bang(b) => b.is_well_formed(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) => 1,
            Type::Imp(a, c) => a.size() + c.size() + 1,
            Type::With(l, r) => l.size() + r.size() + 1,
            Type::Forall(_, b) => b.size() + 1,
            Type::Bang(b) => b.size() + 1,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_free(&self, bound: &mut Vec<Name>, acc: &mut BTreeSet<Name>) {
        match self {
            Type::Var(a) => {
                if !bound.iter().any(|b| b == a) {
                    acc.insert(a.clone());
                }
            }
            Type::Imp(l, r) | Type::With(l, r) => {
                l.collect_free(bound, acc);
                r.collect_free(bound, acc);
            }
            Type::Forall(a, b) => {
                bound.push(a.clone());
                b.collect_free(bound, acc);
                bound.pop();
            }
            Type::Bang(b) => b.collect_free(bound, acc),
        }
    }

    /// No occurrence of `!` anywhere and no negative occurrence of `forall`
    /// (polarity flips on the left of an implication).
    pub fn is_forall_bang_lazy(&self) -> bool {
        fn go(t: &Type, positive: bool) -> bool {
            match t {
                Type::Var(_) => true,
                Type::Imp(a, c) => go(a, !positive) && go(c, positive),
                Type::With(l, r) => go(l, positive) && go(r, positive),
                Type::Forall(_, b) => positive && go(b, positive),
                Type::Bang(_) => false,
            }
        }
        go(self, true)
    }

    /// Capture-avoiding substitution of `replacement` for the free type
    /// variable `var`.
    pub fn substitute(&self, var: &str, replacement: &Type) -> Type {
        let fv = replacement.free_vars();
        self.subst_rec(var, replacement, &fv)
    }

    fn subst_rec(&self, var: &str, replacement: &Type, rep_fv: &BTreeSet<Name>) -> Type {
        match self {
            Type::Var(a) => {
                if a == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Type::Imp(l, r) => Type::Imp(
                Box::new(l.subst_rec(var, replacement, rep_fv)),
                Box::new(r.subst_rec(var, replacement, rep_fv)),
            ),
            Type::With(l, r) => Type::With(
                Box::new(l.subst_rec(var, replacement, rep_fv)),
                Box::new(r.subst_rec(var, replacement, rep_fv)),
            ),
            Type::Forall(a, b) => {
                if a == var {
                    self.clone()
                } else if rep_fv.contains(a) && b.free_vars().contains(var) {
                    let mut avoid = b.free_vars();
                    avoid.extend(rep_fv.iter().cloned());
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(a, &avoid);
                    let renamed = b.substitute(a, &Type::var(fresh.clone()));
                    Type::Forall(
                        fresh,
                        Box::new(renamed.subst_rec(var, replacement, rep_fv)),
                    )
                } else {
                    Type::Forall(a.clone(), Box::new(b.subst_rec(var, replacement, rep_fv)))
                }
            }
            Type::Bang(b) => Type::Bang(Box::new(b.subst_rec(var, replacement, rep_fv))),
        }
    }

    fn canon(&self, env: &mut Vec<Name>) -> CanonType {
        match self {
            Type::Var(a) => match env.iter().rev().position(|b| b == a) {
                Some(i) => CanonType::BVar(i as u32),
                None => CanonType::FVar(a.clone()),
            },
            Type::Imp(l, r) => CanonType::Imp(Box::new(l.canon(env)), Box::new(r.canon(env))),
            Type::With(l, r) => CanonType::With(Box::new(l.canon(env)), Box::new(r.canon(env))),
            Type::Forall(a, b) => {
                env.push(a.clone());
                let c = b.canon(env);
                env.pop();
                CanonType::Forall(Box::new(c))
            }
            Type::Bang(b) => CanonType::Bang(Box::new(b.canon(env))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum CanonType {
    BVar(u32),
    FVar(Name),
    Imp(Box<CanonType>, Box<CanonType>),
    With(Box<CanonType>, Box<CanonType>),
    Forall(Box<CanonType>),
    Bang(Box<CanonType>),
}

impl PartialEq for Type {
    fn eq(&self, other: &Self) -> bool {
        self.canon(&mut Vec::new()) == other.canon(&mut Vec::new())
    }
}

impl Eq for Type {}

impl std::hash::Hash for Type {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canon(&mut Vec::new()).hash(state);
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::print_type(self))
    }
}

/// The unit `1 = forall a. a -o a`.
pub fn unit_type() -> Type {
    let a = Type::var("a");
    Type::forall("a", Type::imp(a.clone(), a).unwrap()).unwrap()
}

/// Second-order tensor `s (x) t = forall g. (s -o t -o g) -o g`
/// (`g` fresh for `s` and `t`).
pub fn tensor_type(s: &Type, t: &Type) -> Type {
    let mut avoid = s.free_vars();
    avoid.extend(t.free_vars());
    let g = fresh_name("g", &avoid);
    let gv = Type::var(g.clone());
    let inner = Type::imp(
        s.clone(),
        Type::imp(t.clone(), gv.clone()).unwrap(),
    )
    .unwrap();
    Type::forall(g, Type::imp(inner, gv).unwrap()).unwrap()
}

/// Right-nested `B^n`-style tensor of the given component types.
pub fn tensor_n(components: &[Type]) -> Type {
    assert!(!components.is_empty());
    let mut it = components.iter().rev();
    let mut acc = it.next().unwrap().clone();
    for t in it {
        acc = tensor_type(t, &acc);
    }
    acc
}

/// The boolean type `B = forall a. a -o a -o a (x) a`.
pub fn bool_type() -> Type {
    let a = Type::var("a");
    let pair = tensor_type(&a, &a);
    Type::forall(
        "a",
        Type::imp(a.clone(), Type::imp(a, pair).unwrap()).unwrap(),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lazy_predicate() {
        assert!(unit_type().is_forall_bang_lazy());
        assert!(bool_type().is_forall_bang_lazy());

        // N = forall a. !(a -o a) -o (a -o a): fails due to the bang
        let a = Type::var("a");
        let aa = Type::imp(a.clone(), a.clone()).unwrap();
        let nat = Type::forall("a", Type::imp(Type::bang(aa.clone()), aa.clone()).unwrap()).unwrap();
        assert!(!nat.is_forall_bang_lazy());

        // B -o B: fails due to the negative forall
        let bb = Type::imp(bool_type(), bool_type()).unwrap();
        assert!(!bb.is_forall_bang_lazy());
    }

    #[test]
    fn lazy_closed_under_with_and_tensor() {
        let b = bool_type();
        let unit = unit_type();
        assert!(Type::with(b.clone(), unit.clone()).unwrap().is_forall_bang_lazy());
        assert!(tensor_type(&b, &unit).is_forall_bang_lazy());
    }

    #[test]
    fn substitution() {
        let a = Type::var("a");
        let aa = Type::imp(a.clone(), a.clone()).unwrap();
        let got = aa.substitute("a", &unit_type());
        assert_eq!(got, Type::imp(unit_type(), unit_type()).unwrap());

        // bound variable untouched
        let t = Type::forall("a", a.clone()).unwrap();
        assert_eq!(t.substitute("a", &bool_type()), t);

        // capture avoidance: (forall b. a & b)<b/a> keeps the bound b distinct
        let t = Type::forall("b", Type::with(a.clone(), Type::var("b")).unwrap()).unwrap();
        let got = t.substitute("a", &Type::var("b"));
        match &got {
            Type::Forall(binder, body) => {
                assert_ne!(binder, "b");
                match &**body {
                    Type::With(l, r) => {
                        assert_eq!(**l, Type::var("b"));
                        assert_eq!(**r, Type::var(binder.clone()));
                    }
                    other => panic!("unexpected body {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(Type::var("a").size(), 1);
        assert_eq!(unit_type().size(), 4);
        assert_eq!(Type::bang(Type::var("a")).size(), 2);
        // B = forall a. a -o a -o (forall g.(a -o a -o g) -o g): 13
        assert_eq!(bool_type().size(), 13);
    }

    #[test]
    fn well_formedness() {
        // A -o !B is not a type
        assert!(Type::imp(Type::var("a"), Type::bang(Type::var("b"))).is_err());
        assert!(Type::with(Type::bang(Type::var("a")), Type::var("b")).is_err());
        assert!(Type::forall("a", Type::bang(Type::var("a"))).is_err());
        // !(s -o A) is fine
        let t = Type::bang(Type::imp(Type::bang(Type::var("a")), Type::var("b")).unwrap());
        assert!(t.is_well_formed());
    }

    #[test]
    fn alpha_equality() {
        let t1 = Type::forall("a", Type::imp(Type::var("a"), Type::var("a")).unwrap()).unwrap();
        let t2 = Type::forall("b", Type::imp(Type::var("b"), Type::var("b")).unwrap()).unwrap();
        assert_eq!(t1, t2);
    }
}
