//! Raw terms of the probabilistic linear lambda calculus, s-linearity,
//! sizes, and the two substitution operators.
//!
//! The calculus has two abstractions (linear `\x.M` and non-linear `\!x.M`),
//! an explicit dereliction `d(M)`, suspended boxes `!M`, additive pairs
//! `<M, N>` with a random projection `proj(M)`, and a guarded duplication
//! `copy^{V} N as x,y in <P, Q>`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type Name = String;

#[derive(Clone, Debug)]
pub enum Term {
    Var(Name),
    /// Linear abstraction `\x.M`; the binder must be s-linear in the body.
    Lam(Name, Box<Term>),
    /// Non-linear abstraction `\!x.M`; the binder is unconstrained.
    BangLam(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
    Bang(Box<Term>),
    /// Explicit dereliction `d(M)`.
    Der(Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Proj(Box<Term>),
    /// `copy^{bound} scrutinee as left_var, right_var in <left, right>`.
    /// `left_var` binds in `left`, `right_var` in `right`; both must be
    /// s-linear there. The `bound` slot is never reduced into.
    Copy {
        bound: Box<Term>,
        scrutinee: Box<Term>,
        left_var: Name,
        right_var: Name,
        left: Box<Term>,
        right: Box<Term>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("binder `{binder}` is not s-linear: {count} free occurrence(s), {shielded} under ! or d")]
    NotSLinear {
        binder: Name,
        count: usize,
        shielded: usize,
    },
}

// Binder admissibility: at most one free occurrence, and never inside a
// !N or d(N) subterm. Typed subjects always use their linear binders
// exactly once; vacuous binders are kept legal so that the classical
// projection booleans \x.\y.x and \x.\y.y remain raw terms.
fn binder_ok(count: usize, shielded: usize) -> bool {
    count <= 1 && shielded == 0
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    /// Linear abstraction; rejects a binder that is not s-linear in `body`.
    pub fn lam(binder: impl Into<Name>, body: Term) -> Result<Term, TermError> {
        let binder = binder.into();
        check_binder(&binder, &body)?;
        Ok(Term::Lam(binder, Box::new(body)))
    }

    pub fn bang_lam(binder: impl Into<Name>, body: Term) -> Term {
        Term::BangLam(binder.into(), Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn bang(body: Term) -> Term {
        Term::Bang(Box::new(body))
    }

    pub fn der(body: Term) -> Term {
        Term::Der(Box::new(body))
    }

    pub fn pair(left: Term, right: Term) -> Term {
        Term::Pair(Box::new(left), Box::new(right))
    }

    pub fn proj(body: Term) -> Term {
        Term::Proj(Box::new(body))
    }

    pub fn copy(
        bound: Term,
        scrutinee: Term,
        left_var: impl Into<Name>,
        right_var: impl Into<Name>,
        left: Term,
        right: Term,
    ) -> Result<Term, TermError> {
        let left_var = left_var.into();
        let right_var = right_var.into();
        check_binder(&left_var, &left)?;
        check_binder(&right_var, &right)?;
        Ok(Term::Copy {
            bound: Box::new(bound),
            scrutinee: Box::new(scrutinee),
            left_var,
            right_var,
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    /// `d^n(M)`.
    pub fn der_n(mut t: Term, n: usize) -> Term {
        for _ in 0..n {
            t = Term::der(t);
        }
        t
    }

    /// `!^n M`.
    pub fn bang_n(mut t: Term, n: usize) -> Term {
        for _ in 0..n {
            t = Term::bang(t);
        }
        t
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, b) | Term::BangLam(_, b) | Term::Bang(b) | Term::Der(b) | Term::Proj(b) => {
                b.size() + 1
            }
            Term::App(f, a) => f.size() + a.size() + 1,
            Term::Pair(l, r) => l.size() + r.size() + 1,
            Term::Copy {
                bound,
                scrutinee,
                left,
                right,
                ..
            } => bound.size() + scrutinee.size() + left.size() + right.size() + 2,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_free(&self, bound: &mut Vec<Name>, acc: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    acc.insert(x.clone());
                }
            }
            Term::Lam(x, b) | Term::BangLam(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, acc);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, acc);
                a.collect_free(bound, acc);
            }
            Term::Bang(b) | Term::Der(b) | Term::Proj(b) => b.collect_free(bound, acc),
            Term::Pair(l, r) => {
                l.collect_free(bound, acc);
                r.collect_free(bound, acc);
            }
            Term::Copy {
                bound: v,
                scrutinee,
                left_var,
                right_var,
                left,
                right,
            } => {
                v.collect_free(bound, acc);
                scrutinee.collect_free(bound, acc);
                bound.push(left_var.clone());
                left.collect_free(bound, acc);
                bound.pop();
                bound.push(right_var.clone());
                right.collect_free(bound, acc);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of free occurrences of `x`.
    pub fn count_free(&self, x: &str) -> usize {
        occ_info(self, x, false).0
    }

    /// True iff every `\x`-binder and every copy binder in the term is
    /// s-linear in its scope. `\!x`-binders are unconstrained.
    pub fn is_s_linear(&self) -> bool {
        self.check_s_linear().is_ok()
    }

    pub fn check_s_linear(&self) -> Result<(), TermError> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Lam(x, b) => {
                check_binder(x, b)?;
                b.check_s_linear()
            }
            Term::BangLam(_, b) => b.check_s_linear(),
            Term::App(f, a) => {
                f.check_s_linear()?;
                a.check_s_linear()
            }
            Term::Bang(b) | Term::Der(b) | Term::Proj(b) => b.check_s_linear(),
            Term::Pair(l, r) => {
                l.check_s_linear()?;
                r.check_s_linear()
            }
            Term::Copy {
                bound,
                scrutinee,
                left_var,
                right_var,
                left,
                right,
            } => {
                check_binder(left_var, left)?;
                check_binder(right_var, right)?;
                bound.check_s_linear()?;
                scrutinee.check_s_linear()?;
                left.check_s_linear()?;
                right.check_s_linear()
            }
        }
    }

    /// Membership in the value grammar `V ::= x | \x.V | VV | <V,V>`,
    /// normal with respect to `(\x.U)V`, and closed.
    pub fn is_value(&self) -> bool {
        self.is_closed() && value_shaped(self)
    }

    /// Capture-avoiding substitution `M[arg/x]`.
    pub fn substitute(&self, x: &str, arg: &Term) -> Term {
        let arg_fv = arg.free_vars();
        self.subst_rec(x, arg, &arg_fv)
    }

    fn subst_rec(&self, x: &str, arg: &Term, arg_fv: &BTreeSet<Name>) -> Term {
        match self {
            Term::Var(y) => {
                if y == x {
                    arg.clone()
                } else {
                    self.clone()
                }
            }
            Term::Lam(y, b) => {
                let (y2, b2) = rename_if_needed(y, b, x, arg_fv);
                if y2 == x {
                    Term::Lam(y2, b2)
                } else {
                    Term::Lam(y2, Box::new(b2.subst_rec(x, arg, arg_fv)))
                }
            }
            Term::BangLam(y, b) => {
                let (y2, b2) = rename_if_needed(y, b, x, arg_fv);
                if y2 == x {
                    Term::BangLam(y2, b2)
                } else {
                    Term::BangLam(y2, Box::new(b2.subst_rec(x, arg, arg_fv)))
                }
            }
            Term::App(f, a) => Term::App(
                Box::new(f.subst_rec(x, arg, arg_fv)),
                Box::new(a.subst_rec(x, arg, arg_fv)),
            ),
            Term::Bang(b) => Term::Bang(Box::new(b.subst_rec(x, arg, arg_fv))),
            Term::Der(b) => Term::Der(Box::new(b.subst_rec(x, arg, arg_fv))),
            Term::Proj(b) => Term::Proj(Box::new(b.subst_rec(x, arg, arg_fv))),
            Term::Pair(l, r) => Term::Pair(
                Box::new(l.subst_rec(x, arg, arg_fv)),
                Box::new(r.subst_rec(x, arg, arg_fv)),
            ),
            Term::Copy {
                bound,
                scrutinee,
                left_var,
                right_var,
                left,
                right,
            } => {
                let (lv, lt) = rename_if_needed(left_var, left, x, arg_fv);
                let (rv, rt) = rename_if_needed(right_var, right, x, arg_fv);
                let lt = if lv == x {
                    lt
                } else {
                    Box::new(lt.subst_rec(x, arg, arg_fv))
                };
                let rt = if rv == x {
                    rt
                } else {
                    Box::new(rt.subst_rec(x, arg, arg_fv))
                };
                Term::Copy {
                    bound: Box::new(bound.subst_rec(x, arg, arg_fv)),
                    scrutinee: Box::new(scrutinee.subst_rec(x, arg, arg_fv)),
                    left_var: lv,
                    right_var: rv,
                    left: lt,
                    right: rt,
                }
            }
        }
    }

    /// Surface-preserving substitution `M{arg/x}`: when `arg = !Q` and every
    /// free occurrence of `x` is the immediate child of a dereliction, one
    /// `d` and one `!` cancel and the substitution recurses; otherwise it
    /// falls back to plain substitution.
    pub fn surface_substitute(&self, x: &str, arg: &Term) -> Term {
        if let Term::Bang(q) = arg {
            let (total, der_wrapped) = der_occ_info(self, x);
            if total > 0 && total == der_wrapped {
                let stripped = strip_immediate_der(self, x);
                return stripped.surface_substitute(x, q);
            }
        }
        self.substitute(x, arg)
    }

    /// Nameless normal form deciding alpha-equivalence; usable as a map key.
    pub fn canonical_key(&self) -> Canon {
        canon_rec(self, &mut Vec::new())
    }

    /// Consistently rename the free variable `old` to `new` (plain variable
    /// renaming, not substitution of a term).
    pub fn rename_free(&self, old: &str, new: &str) -> Term {
        self.substitute(old, &Term::var(new))
    }
}

fn value_shaped(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Lam(_, b) => value_shaped(b),
        Term::App(f, a) => !matches!(**f, Term::Lam(..)) && value_shaped(f) && value_shaped(a),
        Term::Pair(l, r) => value_shaped(l) && value_shaped(r),
        _ => false,
    }
}

fn check_binder(binder: &str, body: &Term) -> Result<(), TermError> {
    let (count, shielded) = occ_info(body, binder, false);
    if binder_ok(count, shielded) {
        Ok(())
    } else {
        Err(TermError::NotSLinear {
            binder: binder.to_string(),
            count,
            shielded,
        })
    }
}

/// (total free occurrences of `x`, occurrences lying inside some `!N` or `d(N)`).
fn occ_info(t: &Term, x: &str, inside: bool) -> (usize, usize) {
    match t {
        Term::Var(y) => {
            if y == x {
                (1, inside as usize)
            } else {
                (0, 0)
            }
        }
        Term::Lam(y, b) | Term::BangLam(y, b) => {
            if y == x {
                (0, 0)
            } else {
                occ_info(b, x, inside)
            }
        }
        Term::App(f, a) => add2(occ_info(f, x, inside), occ_info(a, x, inside)),
        Term::Bang(b) | Term::Der(b) => occ_info(b, x, true),
        Term::Proj(b) => occ_info(b, x, inside),
        Term::Pair(l, r) => add2(occ_info(l, x, inside), occ_info(r, x, inside)),
        Term::Copy {
            bound,
            scrutinee,
            left_var,
            right_var,
            left,
            right,
        } => {
            let mut acc = add2(occ_info(bound, x, inside), occ_info(scrutinee, x, inside));
            if left_var != x {
                acc = add2(acc, occ_info(left, x, inside));
            }
            if right_var != x {
                acc = add2(acc, occ_info(right, x, inside));
            }
            acc
        }
    }
}

fn add2(a: (usize, usize), b: (usize, usize)) -> (usize, usize) {
    (a.0 + b.0, a.1 + b.1)
}

/// (total free occurrences of `x`, occurrences that are the immediate child
/// of a dereliction node).
fn der_occ_info(t: &Term, x: &str) -> (usize, usize) {
    match t {
        Term::Var(y) => ((y == x) as usize, 0),
        Term::Lam(y, b) | Term::BangLam(y, b) => {
            if y == x {
                (0, 0)
            } else {
                der_occ_info(b, x)
            }
        }
        Term::App(f, a) => add2(der_occ_info(f, x), der_occ_info(a, x)),
        Term::Der(b) => {
            if let Term::Var(y) = &**b {
                if y == x {
                    return (1, 1);
                }
            }
            der_occ_info(b, x)
        }
        Term::Bang(b) | Term::Proj(b) => der_occ_info(b, x),
        Term::Pair(l, r) => add2(der_occ_info(l, x), der_occ_info(r, x)),
        Term::Copy {
            bound,
            scrutinee,
            left_var,
            right_var,
            left,
            right,
        } => {
            let mut acc = add2(der_occ_info(bound, x), der_occ_info(scrutinee, x));
            if left_var != x {
                acc = add2(acc, der_occ_info(left, x));
            }
            if right_var != x {
                acc = add2(acc, der_occ_info(right, x));
            }
            acc
        }
    }
}

/// Replace every free occurrence of `d(x)` by `x`. Only sound when every
/// free occurrence of `x` is immediately derelicted.
fn strip_immediate_der(t: &Term, x: &str) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Lam(y, b) => {
            if y == x {
                t.clone()
            } else {
                Term::Lam(y.clone(), Box::new(strip_immediate_der(b, x)))
            }
        }
        Term::BangLam(y, b) => {
            if y == x {
                t.clone()
            } else {
                Term::BangLam(y.clone(), Box::new(strip_immediate_der(b, x)))
            }
        }
        Term::App(f, a) => Term::App(
            Box::new(strip_immediate_der(f, x)),
            Box::new(strip_immediate_der(a, x)),
        ),
        Term::Der(b) => {
            if let Term::Var(y) = &**b {
                if y == x {
                    return Term::var(x);
                }
            }
            Term::Der(Box::new(strip_immediate_der(b, x)))
        }
        Term::Bang(b) => Term::Bang(Box::new(strip_immediate_der(b, x))),
        Term::Proj(b) => Term::Proj(Box::new(strip_immediate_der(b, x))),
        Term::Pair(l, r) => Term::Pair(
            Box::new(strip_immediate_der(l, x)),
            Box::new(strip_immediate_der(r, x)),
        ),
        Term::Copy {
            bound,
            scrutinee,
            left_var,
            right_var,
            left,
            right,
        } => {
            let keep = |binder: &Name, body: &Term| {
                if binder == x {
                    body.clone()
                } else {
                    strip_immediate_der(body, x)
                }
            };
            Term::Copy {
                bound: Box::new(strip_immediate_der(bound, x)),
                scrutinee: Box::new(strip_immediate_der(scrutinee, x)),
                left_var: left_var.clone(),
                right_var: right_var.clone(),
                left: Box::new(keep(left_var, left)),
                right: Box::new(keep(right_var, right)),
            }
        }
    }
}

fn rename_if_needed(
    binder: &Name,
    body: &Term,
    x: &str,
    arg_fv: &BTreeSet<Name>,
) -> (Name, Box<Term>) {
    if binder != x && arg_fv.contains(binder) && body.count_free(x) > 0 {
        let mut avoid = body.free_vars();
        avoid.extend(arg_fv.iter().cloned());
        avoid.insert(x.to_string());
        let fresh = fresh_name(binder, &avoid);
        let renamed = body.rename_free(binder, &fresh);
        (fresh, Box::new(renamed))
    } else {
        (binder.clone(), Box::new(body.clone()))
    }
}

pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem: String = base.trim_end_matches('\'').to_string();
    let mut candidate = format!("{stem}'");
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Alpha-canonical nameless form. Bound variables become de Bruijn indices,
/// free variables keep their names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Canon {
    BVar(u32),
    FVar(Name),
    Lam(Box<Canon>),
    BangLam(Box<Canon>),
    App(Box<Canon>, Box<Canon>),
    Bang(Box<Canon>),
    Der(Box<Canon>),
    Pair(Box<Canon>, Box<Canon>),
    Proj(Box<Canon>),
    Copy(Box<Canon>, Box<Canon>, Box<Canon>, Box<Canon>),
}

fn canon_rec(t: &Term, env: &mut Vec<Name>) -> Canon {
    match t {
        Term::Var(x) => match env.iter().rev().position(|b| b == x) {
            Some(i) => Canon::BVar(i as u32),
            None => Canon::FVar(x.clone()),
        },
        Term::Lam(x, b) => {
            env.push(x.clone());
            let c = canon_rec(b, env);
            env.pop();
            Canon::Lam(Box::new(c))
        }
        Term::BangLam(x, b) => {
            env.push(x.clone());
            let c = canon_rec(b, env);
            env.pop();
            Canon::BangLam(Box::new(c))
        }
        Term::App(f, a) => Canon::App(Box::new(canon_rec(f, env)), Box::new(canon_rec(a, env))),
        Term::Bang(b) => Canon::Bang(Box::new(canon_rec(b, env))),
        Term::Der(b) => Canon::Der(Box::new(canon_rec(b, env))),
        Term::Pair(l, r) => Canon::Pair(Box::new(canon_rec(l, env)), Box::new(canon_rec(r, env))),
        Term::Proj(b) => Canon::Proj(Box::new(canon_rec(b, env))),
        Term::Copy {
            bound,
            scrutinee,
            left_var,
            right_var,
            left,
            right,
        } => {
            let cb = canon_rec(bound, env);
            let cs = canon_rec(scrutinee, env);
            env.push(left_var.clone());
            let cl = canon_rec(left, env);
            env.pop();
            env.push(right_var.clone());
            let cr = canon_rec(right, env);
            env.pop();
            Canon::Copy(Box::new(cb), Box::new(cs), Box::new(cl), Box::new(cr))
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_key() == other.canonical_key()
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical_key().hash(state);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::print_term(self))
    }
}
