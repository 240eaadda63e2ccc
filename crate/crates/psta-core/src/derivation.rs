//! Explicit typing derivations: the ten inference rules with all side
//! conditions, a checker producing per-node diagnostics, and the
//! quantitative metrics (rank, depth, weight).

use std::collections::BTreeMap;
use std::fmt;

use num::BigUint;
use thiserror::Error;

use crate::term::{Name, Term};
use crate::types::Type;

pub type Context = BTreeMap<Name, Type>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub context: Context,
    pub subject: Term,
    pub ty: Type,
}

impl Judgment {
    pub fn new(context: Context, subject: Term, ty: Type) -> Judgment {
        Judgment {
            context,
            subject,
            ty,
        }
    }

    pub fn closed(subject: Term, ty: Type) -> Judgment {
        Judgment::new(Context::new(), subject, ty)
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, t) in &self.context {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{x}: {t}")?;
        }
        if !self.context.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "|- {} : {}", self.subject, self.ty)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Ax,
    ImpIl,
    ImpIe,
    ImpE,
    WithI,
    WithE,
    Sp,
    M,
    ForallI,
    ForallE,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::ImpIl => "impIl",
            Rule::ImpIe => "impIe",
            Rule::ImpE => "impE",
            Rule::WithI => "withI",
            Rule::WithE => "withE",
            Rule::Sp => "sp",
            Rule::M => "m",
            Rule::ForallI => "forallI",
            Rule::ForallE => "forallE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    None,
    /// `sp`: pairs (premise variable, fresh conclusion variable).
    Sp { renaming: Vec<(Name, Name)> },
    /// `m`: the merged premise assumptions and the new conclusion variable.
    M { merged: Vec<Name>, var: Name },
    /// `forallI`: the witness variable of the premise instance.
    ForallI { witness: Name },
    /// `forallE`: the (linear) instantiation type.
    ForallE { instantiation: Type },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub payload: Payload,
    pub premises: Vec<Derivation>,
    pub conclusion: Judgment,
}

#[derive(Debug, Error, Clone)]
#[error("at node {path:?} ({rule}): {message}")]
pub struct CheckError {
    pub path: Vec<usize>,
    pub rule: &'static str,
    pub message: String,
}

type CheckResult = Result<(), CheckError>;

fn fail(path: &[usize], rule: Rule, message: impl Into<String>) -> CheckResult {
    Err(CheckError {
        path: path.to_vec(),
        rule: rule.name(),
        message: message.into(),
    })
}

/// Checks every node of the derivation against its rule and side
/// conditions; returns the (validated) conclusion judgment.
pub fn check_derivation(d: &Derivation) -> Result<Judgment, CheckError> {
    let mut path = Vec::new();
    check_node(d, &mut path)?;
    Ok(d.conclusion.clone())
}

fn check_node(d: &Derivation, path: &mut Vec<usize>) -> CheckResult {
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(p, path)?;
        path.pop();
    }
    check_local(d, path)
}

fn ctx_eq(a: &Context, b: &Context) -> bool {
    a.len() == b.len() && a.iter().all(|(k, v)| b.get(k).map_or(false, |w| w == v))
}

fn check_local(d: &Derivation, path: &[usize]) -> CheckResult {
    let c = &d.conclusion;
    let rule = d.rule;
    if let Err(e) = c.subject.check_s_linear() {
        return fail(path, rule, format!("conclusion subject not in the calculus: {e}"));
    }
    if !c.ty.is_well_formed() {
        return fail(path, rule, format!("conclusion type {} is not well-formed", c.ty));
    }
    for (x, t) in &c.context {
        if !t.is_well_formed() {
            return fail(path, rule, format!("context type {x}: {t} is not well-formed"));
        }
    }
    let arity_ok = match rule {
        Rule::Ax => d.premises.is_empty(),
        Rule::WithI => d.premises.len() == 4 || d.premises.len() == 2,
        Rule::ImpE => d.premises.len() == 2,
        _ => d.premises.len() == 1,
    };
    if !arity_ok {
        return fail(
            path,
            rule,
            format!("rule-shape mismatch: wrong premise count {}", d.premises.len()),
        );
    }
    match rule {
        Rule::Ax => {
            if c.context.len() != 1 {
                return fail(path, rule, "ax needs a single assumption");
            }
            let (x, a) = c.context.iter().next().unwrap();
            if !a.is_linear() {
                return fail(path, rule, format!("ax assumption {x}: {a} must be linear"));
            }
            if c.subject != Term::var(x.clone()) {
                return fail(path, rule, "subject must be the assumption variable");
            }
            if &c.ty != a {
                return fail(path, rule, "conclusion type differs from the assumption");
            }
            Ok(())
        }
        Rule::ImpIl | Rule::ImpIe => {
            let p = &d.premises[0].conclusion;
            let removed: Vec<&Name> = p.context.keys().filter(|k| !c.context.contains_key(*k)).collect();
            if removed.len() != 1 {
                return fail(path, rule, "exactly one assumption must be discharged");
            }
            let x = removed[0].clone();
            let a = p.context[&x].clone();
            let mut rest = p.context.clone();
            rest.remove(&x);
            if !ctx_eq(&rest, &c.context) {
                return fail(path, rule, "context-split failure: remaining context differs");
            }
            match rule {
                Rule::ImpIl => {
                    if !a.is_linear() {
                        return fail(path, rule, format!("antecedent {a} must be linear for impIl"));
                    }
                    let expected = Term::Lam(x.clone(), Box::new(p.subject.clone()));
                    if c.subject != expected {
                        return fail(path, rule, "subject must be the linear abstraction of the premise subject");
                    }
                }
                Rule::ImpIe => {
                    if !a.is_strictly_exponential() {
                        return fail(
                            path,
                            rule,
                            format!("antecedent {a} must be strictly exponential for impIe"),
                        );
                    }
                    let expected = Term::BangLam(x.clone(), Box::new(p.subject.clone()));
                    if c.subject != expected {
                        return fail(path, rule, "subject must be the bang abstraction of the premise subject");
                    }
                }
                _ => unreachable!(),
            }
            match &c.ty {
                Type::Imp(ant, cons) => {
                    if **ant != a {
                        return fail(path, rule, "implication antecedent differs from the discharged assumption");
                    }
                    if **cons != p.ty {
                        return fail(path, rule, "implication consequent differs from the premise type");
                    }
                    Ok(())
                }
                other => fail(path, rule, format!("conclusion type {other} is not an implication")),
            }
        }
        Rule::ImpE => {
            let pf = &d.premises[0].conclusion;
            let pa = &d.premises[1].conclusion;
            let (ant, cons) = match &pf.ty {
                Type::Imp(a, b) => (a, b),
                other => {
                    return fail(path, rule, format!("function type {other} is not an implication"))
                }
            };
            if **ant != pa.ty {
                return fail(path, rule, "argument type differs from the implication antecedent");
            }
            if c.ty != **cons {
                return fail(path, rule, "conclusion type differs from the implication consequent");
            }
            for k in pf.context.keys() {
                if pa.context.contains_key(k) {
                    return fail(path, rule, format!("context-split failure: `{k}` in both premises"));
                }
            }
            let mut merged = pf.context.clone();
            merged.extend(pa.context.clone());
            if !ctx_eq(&merged, &c.context) {
                return fail(path, rule, "conclusion context is not the premise union");
            }
            let expected = Term::app(pf.subject.clone(), pa.subject.clone());
            if c.subject != expected {
                return fail(path, rule, "subject must be the application of the premise subjects");
            }
            Ok(())
        }
        Rule::WithI => {
            let (c1, c2) = match &c.ty {
                Type::With(l, r) => ((**l).clone(), (**r).clone()),
                other => return fail(path, rule, format!("conclusion type {other} is not a & type")),
            };
            if !c1.is_forall_bang_lazy() || !c2.is_forall_bang_lazy() {
                return fail(path, rule, "& components must be forall/bang-lazy");
            }
            if d.premises.len() == 2 {
                // special case: bare pair of closed terms
                let p1 = &d.premises[0].conclusion;
                let p2 = &d.premises[1].conclusion;
                if !p1.context.is_empty() || !p2.context.is_empty() || !c.context.is_empty() {
                    return fail(path, rule, "bare-pair withI types closed pairs only");
                }
                if p1.ty != c1 || p2.ty != c2 {
                    return fail(path, rule, "component types differ from the premises");
                }
                let expected = Term::pair(p1.subject.clone(), p2.subject.clone());
                if c.subject != expected {
                    return fail(path, rule, "subject must be the pair of the premise subjects");
                }
                return Ok(());
            }
            let pn = &d.premises[0].conclusion;
            let pm1 = &d.premises[1].conclusion;
            let pm2 = &d.premises[2].conclusion;
            let pv = &d.premises[3].conclusion;
            let c0 = pn.ty.clone();
            if !c0.is_forall_bang_lazy() {
                return fail(path, rule, format!("scrutinee type {c0} must be forall/bang-lazy"));
            }
            if !c.context.values().all(|t| t.is_forall_bang_lazy()) {
                return fail(path, rule, "context must be forall/bang-lazy");
            }
            if !ctx_eq(&pn.context, &c.context) {
                return fail(path, rule, "scrutinee premise context differs from the conclusion");
            }
            if pm1.context.len() != 1 || pm2.context.len() != 1 {
                return fail(path, rule, "each component premise has exactly one assumption");
            }
            let (x1, a1) = pm1.context.iter().next().unwrap();
            let (x2, a2) = pm2.context.iter().next().unwrap();
            if a1 != &c0 || a2 != &c0 {
                return fail(path, rule, "component assumptions must carry the scrutinee type");
            }
            if pm1.ty != c1 || pm2.ty != c2 {
                return fail(path, rule, "component types differ from the premises");
            }
            if !pv.context.is_empty() {
                return fail(path, rule, "the bound-value premise must be closed");
            }
            if pv.ty != c0 {
                return fail(path, rule, "bound-value type differs from the scrutinee type");
            }
            if !pv.subject.is_value() {
                return fail(path, rule, "the bound term is not a value");
            }
            let expected = Term::Copy {
                bound: Box::new(pv.subject.clone()),
                scrutinee: Box::new(pn.subject.clone()),
                left_var: x1.clone(),
                right_var: x2.clone(),
                left: Box::new(pm1.subject.clone()),
                right: Box::new(pm2.subject.clone()),
            };
            if c.subject != expected {
                return fail(path, rule, "subject must be the copy of the premise subjects");
            }
            Ok(())
        }
        Rule::WithE => {
            let p = &d.premises[0].conclusion;
            let (l, r) = match &p.ty {
                Type::With(l, r) => (l, r),
                other => return fail(path, rule, format!("premise type {other} is not a & type")),
            };
            if l != r {
                return fail(path, rule, "withE needs equal & components (C & C)");
            }
            if c.ty != **l {
                return fail(path, rule, "conclusion type differs from the & component");
            }
            if !c.ty.is_forall_bang_lazy() {
                return fail(path, rule, "the projected type must be forall/bang-lazy");
            }
            if !c.context.values().all(|t| t.is_forall_bang_lazy()) {
                return fail(path, rule, "context must be forall/bang-lazy");
            }
            if !ctx_eq(&p.context, &c.context) {
                return fail(path, rule, "context differs from the premise");
            }
            let expected = Term::proj(p.subject.clone());
            if c.subject != expected {
                return fail(path, rule, "subject must be proj of the premise subject");
            }
            Ok(())
        }
        Rule::Sp => {
            let p = &d.premises[0].conclusion;
            let renaming = match &d.payload {
                Payload::Sp { renaming } => renaming,
                _ => return fail(path, rule, "sp needs its renaming payload"),
            };
            if renaming.len() != p.context.len() {
                return fail(path, rule, "sp must transform the entire premise context");
            }
            let mut seen = std::collections::BTreeSet::new();
            for (x, _y) in renaming {
                if !p.context.contains_key(x) {
                    return fail(path, rule, format!("sp renames unknown assumption `{x}`"));
                }
                if !seen.insert(x.clone()) {
                    return fail(path, rule, format!("sp renames `{x}` twice"));
                }
            }
            let mut expected_ctx = Context::new();
            let mut subst = BTreeMap::new();
            for (x, y) in renaming {
                if expected_ctx
                    .insert(y.clone(), Type::bang(p.context[x].clone()))
                    .is_some()
                {
                    return fail(path, rule, format!("sp target `{y}` used twice"));
                }
                subst.insert(x.clone(), Term::der(Term::var(y.clone())));
            }
            if !ctx_eq(&expected_ctx, &c.context) {
                return fail(path, rule, "conclusion context is not the banged renaming");
            }
            let expected = Term::bang(subst_parallel(&p.subject, &subst));
            if c.subject != expected {
                return fail(
                    path,
                    rule,
                    "subject must be the bang of the premise subject with fresh derelictions",
                );
            }
            if c.ty != Type::bang(p.ty.clone()) {
                return fail(path, rule, "conclusion type must be the banged premise type");
            }
            Ok(())
        }
        Rule::M => {
            let p = &d.premises[0].conclusion;
            let (merged, var) = match &d.payload {
                Payload::M { merged, var } => (merged, var),
                _ => return fail(path, rule, "m needs its merge payload"),
            };
            let mut sigma: Option<Type> = None;
            for x in merged {
                match p.context.get(x) {
                    None => return fail(path, rule, format!("m merges unknown assumption `{x}`")),
                    Some(t) => match &sigma {
                        None => sigma = Some(t.clone()),
                        Some(s) => {
                            if s != t {
                                return fail(path, rule, "merged assumptions must share one type");
                            }
                        }
                    },
                }
            }
            let mut expected_ctx = p.context.clone();
            for x in merged {
                expected_ctx.remove(x);
            }
            if expected_ctx.contains_key(var) {
                return fail(path, rule, format!("m target `{var}` clashes with the context"));
            }
            let sigma = match sigma {
                Some(s) => s,
                // n = 0: the merged type is whatever the conclusion declares
                None => match c.context.get(var) {
                    Some(Type::Bang(inner)) => (**inner).clone(),
                    _ => {
                        return fail(
                            path,
                            rule,
                            format!("m target `{var}` must appear banged in the conclusion"),
                        )
                    }
                },
            };
            expected_ctx.insert(var.clone(), Type::bang(sigma));
            if !ctx_eq(&expected_ctx, &c.context) {
                return fail(path, rule, "conclusion context differs from the merge");
            }
            let mut subst = BTreeMap::new();
            for x in merged {
                subst.insert(x.clone(), Term::der(Term::var(var.clone())));
            }
            let expected = subst_parallel(&p.subject, &subst);
            if c.subject != expected {
                return fail(path, rule, "subject must be the premise subject with merged derelictions");
            }
            if c.ty != p.ty {
                return fail(path, rule, "m must not change the type");
            }
            Ok(())
        }
        Rule::ForallI => {
            let p = &d.premises[0].conclusion;
            let witness = match &d.payload {
                Payload::ForallI { witness } => witness,
                _ => return fail(path, rule, "forallI needs its witness payload"),
            };
            let (alpha, body) = match &c.ty {
                Type::Forall(a, b) => (a.clone(), (**b).clone()),
                other => return fail(path, rule, format!("conclusion type {other} is not a forall")),
            };
            let instantiated = body.substitute(&alpha, &Type::var(witness.clone()));
            if p.ty != instantiated {
                return fail(
                    path,
                    rule,
                    format!("premise type {} is not the witness instance {instantiated}", p.ty),
                );
            }
            for (x, t) in &c.context {
                if t.free_vars().contains(witness) {
                    return fail(
                        path,
                        rule,
                        format!("witness `{witness}` occurs free in the context entry {x}: {t}"),
                    );
                }
            }
            if c.ty.free_vars().contains(witness) {
                return fail(path, rule, format!("witness `{witness}` escapes into the conclusion type"));
            }
            if !ctx_eq(&p.context, &c.context) {
                return fail(path, rule, "context differs from the premise");
            }
            if c.subject != p.subject {
                return fail(path, rule, "forallI must not change the subject");
            }
            Ok(())
        }
        Rule::ForallE => {
            let p = &d.premises[0].conclusion;
            let inst = match &d.payload {
                Payload::ForallE { instantiation } => instantiation,
                _ => return fail(path, rule, "forallE needs its instantiation payload"),
            };
            if !inst.is_linear() {
                return fail(path, rule, format!("instantiation {inst} must be a linear type"));
            }
            if !inst.is_well_formed() {
                return fail(path, rule, format!("instantiation {inst} is not well-formed"));
            }
            let (alpha, body) = match &p.ty {
                Type::Forall(a, b) => (a.clone(), (**b).clone()),
                other => return fail(path, rule, format!("premise type {other} is not a forall")),
            };
            let expected = body.substitute(&alpha, inst);
            if c.ty != expected {
                return fail(path, rule, format!("conclusion type is not the instance {expected}"));
            }
            if !ctx_eq(&p.context, &c.context) {
                return fail(path, rule, "context differs from the premise");
            }
            if c.subject != p.subject {
                return fail(path, rule, "forallE must not change the subject");
            }
            Ok(())
        }
    }
}

/// Simultaneous capture-avoiding substitution of terms for variables.
pub fn subst_parallel(t: &Term, map: &BTreeMap<Name, Term>) -> Term {
    if map.is_empty() {
        return t.clone();
    }
    // stage through fresh temporaries to make the substitution simultaneous
    let mut avoid: std::collections::BTreeSet<Name> = t.free_vars();
    for (k, v) in map {
        avoid.insert(k.clone());
        avoid.extend(v.free_vars());
    }
    let mut staged = t.clone();
    let mut temps = Vec::new();
    for (k, v) in map {
        let tmp = crate::term::fresh_name(&format!("{k}_tmp"), &avoid);
        avoid.insert(tmp.clone());
        staged = staged.substitute(k, &Term::var(tmp.clone()));
        temps.push((tmp, v.clone()));
    }
    for (tmp, v) in temps {
        staged = staged.substitute(&tmp, &v);
    }
    staged
}

/// Quantitative measures of a derivation at a given `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub rank: u64,
    pub depth: u64,
    pub weight: BigUint,
}

/// Number of free occurrences substituted by an `sp` or `m` node. The
/// paper counts merged variables; occurrence counting coincides on every
/// derivation the paper builds and keeps `w(D,1) = |M|` an equality for
/// all derivations.
fn node_rank(d: &Derivation) -> u64 {
    match (&d.rule, &d.payload) {
        (Rule::Sp, Payload::Sp { renaming }) => renaming
            .iter()
            .map(|(x, _)| d.premises[0].conclusion.subject.count_free(x) as u64)
            .sum(),
        (Rule::M, Payload::M { merged, .. }) => merged
            .iter()
            .map(|x| d.premises[0].conclusion.subject.count_free(x) as u64)
            .sum(),
        _ => 0,
    }
}

pub fn rank(d: &Derivation) -> u64 {
    fn max_m_rank(d: &Derivation) -> u64 {
        let own = if d.rule == Rule::M { node_rank(d) } else { 0 };
        d.premises.iter().map(max_m_rank).fold(own, u64::max)
    }
    max_m_rank(d).max(1)
}

pub fn depth(d: &Derivation) -> u64 {
    let own = (d.rule == Rule::Sp) as u64;
    own + d.premises.iter().map(depth).max().unwrap_or(0)
}

pub fn weight(d: &Derivation, r: u64) -> BigUint {
    let r_big = BigUint::from(r);
    let one = BigUint::from(1u8);
    match d.rule {
        Rule::Ax => one,
        Rule::ImpIl | Rule::ImpIe | Rule::WithE => weight(&d.premises[0], r) + one,
        Rule::ImpE => weight(&d.premises[0], r) + weight(&d.premises[1], r) + one,
        Rule::WithI => {
            let sum: BigUint = d.premises.iter().map(|p| weight(p, r)).sum();
            if d.premises.len() == 2 {
                sum + one
            } else {
                sum + BigUint::from(2u8)
            }
        }
        Rule::ForallI | Rule::ForallE => weight(&d.premises[0], r),
        Rule::Sp => r_big * (weight(&d.premises[0], r) + BigUint::from(node_rank(d))) + one,
        Rule::M => weight(&d.premises[0], r) + BigUint::from(node_rank(d)),
    }
}

pub fn metrics(d: &Derivation, r: u64) -> Metrics {
    Metrics {
        rank: rank(d),
        depth: depth(d),
        weight: weight(d, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders as b;
    use crate::types::{bool_type, unit_type};

    #[test]
    fn ax_metrics() {
        let d = b::ax("x", Type::var("a"));
        check_derivation(&d).unwrap();
        let m = metrics(&d, 3);
        assert_eq!(m.rank, 1);
        assert_eq!(m.depth, 0);
        assert_eq!(m.weight, BigUint::from(1u8));
    }

    #[test]
    fn identity_at_unit() {
        let d = b::forall_i(b::lam(b::ax("x", Type::var("a")), "x"), unit_type(), "a");
        let j = check_derivation(&d).unwrap();
        assert!(j.context.is_empty());
        assert_eq!(j.ty, unit_type());
        assert_eq!(weight(&d, 1), BigUint::from(j.subject.size()));
    }

    #[test]
    fn bad_ax_rejected() {
        // ax with a strictly exponential assumption is rejected
        let d = Derivation {
            rule: Rule::Ax,
            payload: Payload::None,
            premises: vec![],
            conclusion: Judgment::new(
                Context::from([("x".to_string(), Type::bang(Type::var("a")))]),
                Term::var("x"),
                Type::bang(Type::var("a")),
            ),
        };
        assert!(check_derivation(&d).is_err());
    }

    #[test]
    fn sp_requires_derelictions() {
        // a premise x: a |- x : a promoted without inserting d(y) is rejected
        let premise = b::ax("x", Type::var("a"));
        let bogus = Derivation {
            rule: Rule::Sp,
            payload: Payload::Sp {
                renaming: vec![("x".to_string(), "y".to_string())],
            },
            premises: vec![premise.clone()],
            conclusion: Judgment::new(
                Context::from([("y".to_string(), Type::bang(Type::var("a")))]),
                Term::bang(Term::var("y")),
                Type::bang(Type::var("a")),
            ),
        };
        assert!(check_derivation(&bogus).is_err());

        let good = b::sp(premise, &[("x", "y")]);
        check_derivation(&good).unwrap();
    }

    #[test]
    fn weight_identity_on_bool() {
        let d = crate::encode::bool_term(false);
        let j = check_derivation(&d).unwrap();
        assert_eq!(j.ty, bool_type());
        assert_eq!(weight(&d, 1), BigUint::from(j.subject.size()));
    }
}
