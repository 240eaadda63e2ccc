//! Programmatic derivation builders. Each combinator computes its
//! conclusion from the premises, so everything assembled here checks by
//! construction; `check_derivation` remains the independent referee.

use std::collections::BTreeMap;

use crate::derivation::{subst_parallel, Context, Derivation, Judgment, Payload, Rule};
use crate::term::{fresh_name, Name, Term};
use crate::types::{tensor_type, unit_type, Type};

pub fn ax(x: impl Into<Name>, ty: Type) -> Derivation {
    let x = x.into();
    assert!(ty.is_linear(), "ax assumptions are linear");
    Derivation {
        rule: Rule::Ax,
        payload: Payload::None,
        premises: vec![],
        conclusion: Judgment::new(
            Context::from([(x.clone(), ty.clone())]),
            Term::var(x),
            ty,
        ),
    }
}

/// `impIl`: discharge the linear assumption `x`.
pub fn lam(d: Derivation, x: &str) -> Derivation {
    let mut ctx = d.conclusion.context.clone();
    let a = ctx.remove(x).unwrap_or_else(|| panic!("lam: `{x}` not in context"));
    let ty = Type::imp(a, d.conclusion.ty.clone()).expect("implication");
    let subject = Term::Lam(x.to_string(), Box::new(d.conclusion.subject.clone()));
    Derivation {
        rule: Rule::ImpIl,
        payload: Payload::None,
        conclusion: Judgment::new(ctx, subject, ty),
        premises: vec![d],
    }
}

/// `impIe`: discharge the strictly exponential assumption `x`.
pub fn blam(d: Derivation, x: &str) -> Derivation {
    let mut ctx = d.conclusion.context.clone();
    let a = ctx.remove(x).unwrap_or_else(|| panic!("blam: `{x}` not in context"));
    assert!(a.is_strictly_exponential(), "blam needs a banged assumption");
    let ty = Type::imp(a, d.conclusion.ty.clone()).expect("implication");
    let subject = Term::BangLam(x.to_string(), Box::new(d.conclusion.subject.clone()));
    Derivation {
        rule: Rule::ImpIe,
        payload: Payload::None,
        conclusion: Judgment::new(ctx, subject, ty),
        premises: vec![d],
    }
}

pub fn app(f: Derivation, a: Derivation) -> Derivation {
    let (ant, cons) = match &f.conclusion.ty {
        Type::Imp(l, r) => ((**l).clone(), (**r).clone()),
        other => panic!("app: function type {other} is not an implication"),
    };
    assert_eq!(ant, a.conclusion.ty, "app: argument type mismatch");
    let mut ctx = f.conclusion.context.clone();
    for (k, v) in &a.conclusion.context {
        assert!(
            ctx.insert(k.clone(), v.clone()).is_none(),
            "app: contexts share `{k}`"
        );
    }
    let subject = Term::app(f.conclusion.subject.clone(), a.conclusion.subject.clone());
    Derivation {
        rule: Rule::ImpE,
        payload: Payload::None,
        conclusion: Judgment::new(ctx, subject, cons),
        premises: vec![f, a],
    }
}

/// Full `withI`: `copy^{v} n as x1,x2 in <m1, m2>` where `x1`/`x2` are the
/// single assumptions of `m1`/`m2`.
pub fn with_i(n: Derivation, m1: Derivation, m2: Derivation, v: Derivation) -> Derivation {
    let x1 = single_assumption(&m1, "withI first component");
    let x2 = single_assumption(&m2, "withI second component");
    let ty = Type::with(m1.conclusion.ty.clone(), m2.conclusion.ty.clone()).expect("with type");
    let subject = Term::Copy {
        bound: Box::new(v.conclusion.subject.clone()),
        scrutinee: Box::new(n.conclusion.subject.clone()),
        left_var: x1,
        right_var: x2,
        left: Box::new(m1.conclusion.subject.clone()),
        right: Box::new(m2.conclusion.subject.clone()),
    };
    Derivation {
        rule: Rule::WithI,
        payload: Payload::None,
        conclusion: Judgment::new(n.conclusion.context.clone(), subject, ty),
        premises: vec![n, m1, m2, v],
    }
}

fn single_assumption(d: &Derivation, what: &str) -> Name {
    assert_eq!(d.conclusion.context.len(), 1, "{what}: exactly one assumption");
    d.conclusion.context.keys().next().unwrap().clone()
}

/// Bare-pair special case of `withI` for closed components.
pub fn bare_pair(a: Derivation, b: Derivation) -> Derivation {
    assert!(a.conclusion.context.is_empty() && b.conclusion.context.is_empty());
    let ty = Type::with(a.conclusion.ty.clone(), b.conclusion.ty.clone()).expect("with type");
    let subject = Term::pair(a.conclusion.subject.clone(), b.conclusion.subject.clone());
    Derivation {
        rule: Rule::WithI,
        payload: Payload::None,
        conclusion: Judgment::closed(subject, ty),
        premises: vec![a, b],
    }
}

pub fn with_e(d: Derivation) -> Derivation {
    let c = match &d.conclusion.ty {
        Type::With(l, r) if l == r => (**l).clone(),
        other => panic!("withE: premise type {other} is not C & C"),
    };
    let subject = Term::proj(d.conclusion.subject.clone());
    Derivation {
        rule: Rule::WithE,
        payload: Payload::None,
        conclusion: Judgment::new(d.conclusion.context.clone(), subject, c),
        premises: vec![d],
    }
}

/// `sp`: promote the whole context, renaming each `x` to its pair target.
pub fn sp(d: Derivation, renaming: &[(&str, &str)]) -> Derivation {
    assert_eq!(
        renaming.len(),
        d.conclusion.context.len(),
        "sp transforms the entire context"
    );
    let mut ctx = Context::new();
    let mut subst = BTreeMap::new();
    for (x, y) in renaming {
        let sigma = d
            .conclusion
            .context
            .get(*x)
            .unwrap_or_else(|| panic!("sp: `{x}` not in context"));
        assert!(
            ctx.insert(y.to_string(), Type::bang(sigma.clone())).is_none(),
            "sp: duplicate target `{y}`"
        );
        subst.insert(x.to_string(), Term::der(Term::var(*y)));
    }
    let subject = Term::bang(subst_parallel(&d.conclusion.subject, &subst));
    let ty = Type::bang(d.conclusion.ty.clone());
    Derivation {
        rule: Rule::Sp,
        payload: Payload::Sp {
            renaming: renaming
                .iter()
                .map(|(x, y)| (x.to_string(), y.to_string()))
                .collect(),
        },
        conclusion: Judgment::new(ctx, subject, ty),
        premises: vec![d],
    }
}

/// `sp` keeping every context name (`x` promoted to `x` itself).
pub fn sp_same(d: Derivation) -> Derivation {
    let names: Vec<Name> = d.conclusion.context.keys().cloned().collect();
    let pairs: Vec<(&str, &str)> = names.iter().map(|n| (n.as_str(), n.as_str())).collect();
    sp(d, &pairs)
}

/// `m`: merge the named assumptions (all of one type `s`) into `var: !s`.
pub fn m_merge(d: Derivation, merged: &[&str], var: &str) -> Derivation {
    let mut ctx = d.conclusion.context.clone();
    let mut sigma: Option<Type> = None;
    let mut subst = BTreeMap::new();
    for x in merged {
        let t = ctx.remove(*x).unwrap_or_else(|| panic!("m: `{x}` not in context"));
        match &sigma {
            None => sigma = Some(t),
            Some(s) => assert_eq!(s, &t, "m: merged assumptions must share one type"),
        }
        subst.insert(x.to_string(), Term::der(Term::var(var)));
    }
    let sigma = sigma.expect("m_merge with no assumptions: use m_intro");
    assert!(!ctx.contains_key(var), "m: target `{var}` clashes");
    ctx.insert(var.to_string(), Type::bang(sigma));
    let subject = subst_parallel(&d.conclusion.subject, &subst);
    let ty = d.conclusion.ty.clone();
    Derivation {
        rule: Rule::M,
        payload: Payload::M {
            merged: merged.iter().map(|s| s.to_string()).collect(),
            var: var.to_string(),
        },
        conclusion: Judgment::new(ctx, subject, ty),
        premises: vec![d],
    }
}

/// `m` with zero merged assumptions: introduce an unused `var: !sigma`.
pub fn m_intro(d: Derivation, var: &str, sigma: Type) -> Derivation {
    let mut ctx = d.conclusion.context.clone();
    assert!(!ctx.contains_key(var), "m: target `{var}` clashes");
    ctx.insert(var.to_string(), Type::bang(sigma));
    let subject = d.conclusion.subject.clone();
    let ty = d.conclusion.ty.clone();
    Derivation {
        rule: Rule::M,
        payload: Payload::M {
            merged: vec![],
            var: var.to_string(),
        },
        conclusion: Judgment::new(ctx, subject, ty),
        premises: vec![d],
    }
}

/// Merge the single assumption `x: s` into `x: !s` (a one-step lift).
pub fn m_lift(d: Derivation, x: &str) -> Derivation {
    m_merge(d, &[x], x)
}

/// `forallI` targeting `target = forall a. A`, with the premise typed at
/// `A<witness/a>`.
pub fn forall_i(d: Derivation, target: Type, witness: &str) -> Derivation {
    let (alpha, body) = match &target {
        Type::Forall(a, b) => (a.clone(), (**b).clone()),
        other => panic!("forall_i: target {other} is not a forall"),
    };
    let inst = body.substitute(&alpha, &Type::var(witness));
    assert_eq!(inst, d.conclusion.ty, "forall_i: premise type is not the witness instance");
    Derivation {
        rule: Rule::ForallI,
        payload: Payload::ForallI {
            witness: witness.to_string(),
        },
        conclusion: Judgment::new(
            d.conclusion.context.clone(),
            d.conclusion.subject.clone(),
            target,
        ),
        premises: vec![d],
    }
}

/// `forallI` where the premise type is literally `A` with `a` free: the
/// target is `forall a. A` and the witness is `a` itself.
pub fn forall_close(d: Derivation, alpha: &str) -> Derivation {
    let target =
        Type::forall(alpha, d.conclusion.ty.clone()).expect("forall over a linear body");
    forall_i(d, target, alpha)
}

pub fn forall_e(d: Derivation, instantiation: Type) -> Derivation {
    let (alpha, body) = match &d.conclusion.ty {
        Type::Forall(a, b) => (a.clone(), (**b).clone()),
        other => panic!("forall_e: premise type {other} is not a forall"),
    };
    let ty = body.substitute(&alpha, &instantiation);
    Derivation {
        rule: Rule::ForallE,
        payload: Payload::ForallE { instantiation },
        conclusion: Judgment::new(
            d.conclusion.context.clone(),
            d.conclusion.subject.clone(),
            ty,
        ),
        premises: vec![d],
    }
}

fn avoid_set(ds: &[&Derivation]) -> std::collections::BTreeSet<Name> {
    let mut avoid = std::collections::BTreeSet::new();
    for d in ds {
        avoid.extend(d.conclusion.context.keys().cloned());
        avoid.extend(d.conclusion.subject.free_vars());
    }
    avoid
}

/// Tensor pairing: from `G1 |- M : A` and `G2 |- N : B` build
/// `G1, G2 |- \z. z M N : A (x) B`.
pub fn tensor_pair(a: Derivation, b: Derivation) -> Derivation {
    let ta = a.conclusion.ty.clone();
    let tb = b.conclusion.ty.clone();
    // the quantified variable must avoid the context types as well
    let mut tyvars: std::collections::BTreeSet<Name> = ta.free_vars();
    tyvars.extend(tb.free_vars());
    for d in [&a, &b] {
        for t in d.conclusion.context.values() {
            tyvars.extend(t.free_vars());
        }
    }
    let g = fresh_name("g", &tyvars);
    let gv = Type::var(g.clone());
    let z = fresh_name("z", &avoid_set(&[&a, &b]));
    let z_ty = Type::imp(ta, Type::imp(tb, gv.clone()).unwrap()).unwrap();
    let applied = app(app(ax(z.clone(), z_ty), a), b);
    let lammed = lam(applied, &z);
    forall_close(lammed, &g)
}

/// Right-nested n-ary tensor of the given component derivations.
pub fn tensor_n(mut parts: Vec<Derivation>) -> Derivation {
    assert!(!parts.is_empty());
    let mut acc = parts.pop().unwrap();
    while let Some(p) = parts.pop() {
        acc = tensor_pair(p, acc);
    }
    acc
}

/// Split a second-order tensor type into its components.
pub fn split_tensor_type(t: &Type) -> Option<(Type, Type)> {
    if let Type::Forall(g, body) = t {
        if let Type::Imp(inner, res) = &**body {
            if let (Type::Imp(a, rest), Type::Var(rg)) = (&**inner, &**res) {
                if let Type::Imp(b, end) = &**rest {
                    if let Type::Var(eg) = &**end {
                        if rg == g && eg == g {
                            // the components must not capture the bound variable
                            if !a.free_vars().contains(g) && !b.free_vars().contains(g) {
                                return Some(((**a).clone(), (**b).clone()));
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Tensor elimination: `let p be x (x) y in body`, built as
/// `p[C] (\x.\y. body)`. The body type must be linear.
pub fn let_tensor(p: Derivation, x: &str, y: &str, body: Derivation) -> Derivation {
    let (ta, tb) =
        split_tensor_type(&p.conclusion.ty).expect("let_tensor: scrutinee is not a tensor");
    let c = body.conclusion.ty.clone();
    assert!(c.is_linear(), "let_tensor: body type must be linear");
    assert_eq!(body.conclusion.context.get(x), Some(&ta), "binder {x} type");
    assert_eq!(body.conclusion.context.get(y), Some(&tb), "binder {y} type");
    let inner = lam_or_blam(lam_or_blam(body, y), x);
    app(forall_e(p, c), inner)
}

fn lam_or_blam(d: Derivation, x: &str) -> Derivation {
    if d.conclusion.context[x].is_strictly_exponential() {
        blam(d, x)
    } else {
        lam(d, x)
    }
}

/// Right-nested multi-binder tensor elimination
/// `let p be x1 (x) ... (x) xn in body`.
pub fn let_tensor_n(p: Derivation, binders: &[&str], body: Derivation) -> Derivation {
    assert!(binders.len() >= 2);
    if binders.len() == 2 {
        return let_tensor(p, binders[0], binders[1], body);
    }
    let mut avoid = avoid_set(&[&p, &body]);
    for b in binders {
        avoid.insert(b.to_string());
    }
    let w = fresh_name("w", &avoid);
    let (_, tb) = split_tensor_type(&p.conclusion.ty).expect("let_tensor_n: not a tensor");
    let rest = let_tensor_n(ax(w.clone(), tb), &binders[1..], body);
    let_tensor(p, binders[0], &w, rest)
}

/// Unit elimination: `let u be I in body`, built as `u[C] body`.
pub fn let_unit(u: Derivation, body: Derivation) -> Derivation {
    assert_eq!(u.conclusion.ty, unit_type(), "let_unit: scrutinee is not 1");
    let c = body.conclusion.ty.clone();
    assert!(c.is_linear(), "let_unit: body type must be linear");
    app(forall_e(u, c), body)
}

/// `I = \x.x : 1`.
pub fn unit_i() -> Derivation {
    forall_close(lam(ax("x", Type::var("a")), "x"), "a")
}

/// Identity at a given linear type: `\x.x : A -o A`.
pub fn id_at(a: Type) -> Derivation {
    lam(ax("x", a), "x")
}

/// Composition `f . g = \z. f (g z)` for `f : B -o C`, `g : A -o B`.
pub fn compose(f: Derivation, g: Derivation) -> Derivation {
    let (ga, _gb) = match &g.conclusion.ty {
        Type::Imp(a, b) => ((**a).clone(), (**b).clone()),
        other => panic!("compose: {other} is not an implication"),
    };
    let z = fresh_name("z", &avoid_set(&[&f, &g]));
    let inner = app(f, app(g, ax(z.clone(), ga)));
    lam(inner, &z)
}

/// The type `(x) of [components]` (right-nested).
pub fn tensor_ty(components: &[Type]) -> Type {
    crate::types::tensor_n(components)
}

/// `A (x) B` as a type.
pub fn tensor2_ty(a: &Type, b: &Type) -> Type {
    tensor_type(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{check_derivation, weight};
    use crate::eval::{evaluate, Strategy};
    use crate::types::bool_type;
    use num::BigUint;

    #[test]
    fn tensor_pair_checks_and_splits() {
        let i1 = unit_i();
        let i2 = unit_i();
        let p = tensor_pair(i1, i2);
        let j = check_derivation(&p).unwrap();
        let (a, b) = split_tensor_type(&j.ty).unwrap();
        assert_eq!(a, unit_type());
        assert_eq!(b, unit_type());
        assert_eq!(weight(&p, 1), BigUint::from(j.subject.size()));
    }

    #[test]
    fn let_tensor_reduces_to_body() {
        // let (I * I) be x,y in (x applied-to... ) - check typing and reduction
        let p = tensor_pair(unit_i(), unit_i());
        let body = let_unit(ax("x", unit_type()), ax("y", unit_type()));
        let d = let_tensor(p, "x", "y", body);
        let j = check_derivation(&d).unwrap();
        assert_eq!(j.ty, unit_type());
        // evaluates to I
        let r = evaluate(&j.subject, &Strategy::LeftmostOutermost, 100).unwrap();
        let i = crate::term::Term::lam("x", crate::term::Term::var("x")).unwrap();
        assert!(num::One::is_one(&r.distribution.probability_of(&i)));
    }

    #[test]
    fn sp_same_keeps_names() {
        let d = sp_same(ax("c", Type::var("a")));
        let j = check_derivation(&d).unwrap();
        assert_eq!(j.context.get("c"), Some(&Type::bang(Type::var("a"))));
        assert_eq!(
            j.subject,
            Term::bang(Term::der(Term::var("c")))
        );
    }

    #[test]
    fn with_i_and_with_e() {
        let b = bool_type();
        let n = ax("n", b.clone());
        let m1 = ax("p", b.clone());
        let m2 = ax("q", b.clone());
        let v = crate::encode::bool_term(false);
        let d = with_e(with_i(n, m1, m2, v));
        let j = check_derivation(&d).unwrap();
        assert_eq!(j.ty, b);
    }
}
