//! Sugared terms (tensor pairs, let, unit, if-then-else) and their
//! elaboration into the kernel calculus. Tensors are the usual
//! second-order encoding, so the sugared reduction rules hold as plain
//! beta steps after elaboration.

use std::collections::BTreeSet;

use crate::syntax::{Span, SyntaxError};
use crate::term::{fresh_name, Name, Term};

#[derive(Clone, Debug)]
pub enum SugaredTerm {
    Var(Name),
    Lam(Name, Span, Box<SugaredTerm>),
    BangLam(Name, Span, Box<SugaredTerm>),
    App(Box<SugaredTerm>, Box<SugaredTerm>),
    Bang(Box<SugaredTerm>),
    Der(Box<SugaredTerm>),
    Pair(Box<SugaredTerm>, Box<SugaredTerm>),
    Proj(Box<SugaredTerm>),
    Copy {
        bound: Box<SugaredTerm>,
        scrutinee: Box<SugaredTerm>,
        left_var: (Name, Span),
        right_var: (Name, Span),
        left: Box<SugaredTerm>,
        right: Box<SugaredTerm>,
    },
    /// `M * N`, elaborated as `\f. f M N`.
    TensorPair(Box<SugaredTerm>, Box<SugaredTerm>),
    /// `let M be x1 * ... * xn in N` (binders may be `!`-marked).
    LetTensor(Box<SugaredTerm>, Vec<(Name, bool, Span)>, Box<SugaredTerm>),
    /// `let M be I in N`, elaborated as `M N`.
    LetUnit(Box<SugaredTerm>, Box<SugaredTerm>),
    /// `I`, the unit value `\x.x`.
    UnitI,
    /// `if c then M1 else M2`, elaborated through the boolean projector
    /// (the bit 0 selects the `then` branch; branches must be booleans for
    /// typability).
    IfThenElse(Box<SugaredTerm>, Box<SugaredTerm>, Box<SugaredTerm>),
}

pub fn elaborate(s: &SugaredTerm) -> Result<Term, SyntaxError> {
    match s {
        SugaredTerm::Var(x) => Ok(Term::var(x.clone())),
        SugaredTerm::Lam(x, span, body) => {
            let body = elaborate(body)?;
            Term::lam(x.clone(), body).map_err(|e| slin(x, *span, e))
        }
        SugaredTerm::BangLam(x, _, body) => Ok(Term::bang_lam(x.clone(), elaborate(body)?)),
        SugaredTerm::App(f, a) => Ok(Term::app(elaborate(f)?, elaborate(a)?)),
        SugaredTerm::Bang(b) => Ok(Term::bang(elaborate(b)?)),
        SugaredTerm::Der(b) => Ok(Term::der(elaborate(b)?)),
        SugaredTerm::Pair(l, r) => Ok(Term::pair(elaborate(l)?, elaborate(r)?)),
        SugaredTerm::Proj(b) => Ok(Term::proj(elaborate(b)?)),
        SugaredTerm::Copy {
            bound,
            scrutinee,
            left_var,
            right_var,
            left,
            right,
        } => {
            let l = elaborate(left)?;
            let r = elaborate(right)?;
            Term::copy(
                elaborate(bound)?,
                elaborate(scrutinee)?,
                left_var.0.clone(),
                right_var.0.clone(),
                l,
                r,
            )
            .map_err(|e| match &e {
                crate::term::TermError::NotSLinear { binder, .. } => {
                    let span = if binder == &left_var.0 {
                        left_var.1
                    } else {
                        right_var.1
                    };
                    slin(binder, span, e.clone())
                }
            })
        }
        SugaredTerm::TensorPair(l, r) => {
            let l = elaborate(l)?;
            let r = elaborate(r)?;
            Ok(tensor_pair_term(l, r))
        }
        SugaredTerm::LetTensor(scrutinee, binders, body) => {
            let scrutinee = elaborate(scrutinee)?;
            let body = elaborate(body)?;
            elaborate_let_tensor(scrutinee, binders, body)
        }
        SugaredTerm::LetUnit(scrutinee, body) => {
            Ok(Term::app(elaborate(scrutinee)?, elaborate(body)?))
        }
        SugaredTerm::UnitI => Ok(unit_value()),
        SugaredTerm::IfThenElse(c, t, e) => {
            let c = elaborate(c)?;
            let t = elaborate(t)?;
            let e = elaborate(e)?;
            Ok(if_term(c, t, e))
        }
    }
}

fn slin(binder: &str, span: Span, e: crate::term::TermError) -> SyntaxError {
    SyntaxError::SLinearity {
        binder: binder.to_string(),
        span,
        message: e.to_string(),
    }
}

pub fn unit_value() -> Term {
    Term::lam("x", Term::var("x")).unwrap()
}

/// `M (x) N = \f. f M N` with `f` fresh.
pub fn tensor_pair_term(l: Term, r: Term) -> Term {
    let mut avoid: BTreeSet<Name> = l.free_vars();
    avoid.extend(r.free_vars());
    let f = fresh_name("f", &avoid);
    Term::lam(
        f.clone(),
        Term::app(Term::app(Term::var(f.clone()), l), r),
    )
    .expect("fresh binder is linear")
}

fn elaborate_let_tensor(
    scrutinee: Term,
    binders: &[(Name, bool, Span)],
    body: Term,
) -> Result<Term, SyntaxError> {
    assert!(binders.len() >= 2);
    let (first, rest) = binders.split_first().unwrap();
    let inner = if rest.len() == 1 {
        bind(&rest[0], body)?
    } else {
        let mut avoid = body.free_vars();
        for (n, _, _) in binders {
            avoid.insert(n.clone());
        }
        let w = fresh_name("w", &avoid);
        let rest_term = elaborate_let_tensor(Term::var(w.clone()), rest, body)?;
        Term::lam(w, rest_term).expect("fresh binder is linear")
    };
    let outer = bind(first, inner)?;
    Ok(Term::app(scrutinee, outer))
}

fn bind(binder: &(Name, bool, Span), body: Term) -> Result<Term, SyntaxError> {
    let (x, bang, span) = binder;
    if *bang {
        Ok(Term::bang_lam(x.clone(), body))
    } else {
        Term::lam(x.clone(), body).map_err(|e| slin(x, *span, e))
    }
}

/// `if c then t else e` as `pi1 (c t e)` with the boolean-erasing
/// projector inlined: `(c t e) (\u.\v. (E_B v) u)`.
pub fn if_term(c: Term, t: Term, e: Term) -> Term {
    let selected = Term::app(Term::app(c, t), e);
    let eb = crate::encode::eraser(&crate::encode::DataShape::Bool)
        .conclusion
        .subject;
    // \u.\v. (E_B v) u
    let inner = Term::app(Term::app(eb, Term::var("v")), Term::var("u"));
    let proj1 = Term::lam("u", Term::lam("v", inner).unwrap()).unwrap();
    Term::app(selected, proj1)
}
