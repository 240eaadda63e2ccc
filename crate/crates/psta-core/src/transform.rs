//! Constructive derivation transformers: peeling the structural core from
//! its forallI/forallE/m tail, weighted substitution, and one-step subject
//! reduction producing derivations for the successors.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::builders as b;
use crate::derivation::{rank, weight, CheckError, Derivation, Payload, Rule};
use crate::surface::{RedexKind, RedexSite, StepResult};
use crate::term::{Name, Term};
use crate::types::Type;

/// Globally unique fresh names for derivation-level renaming. Nested
/// substitutions freshen independently, so set-based freshness is not
/// enough; a process-wide counter is.
static GENSYM: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

fn gensym(base: &str) -> Name {
    let stem = base.split("_g").next().unwrap_or(base);
    let n = GENSYM.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    format!("{stem}_g{n}")
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("`{0}` is not in the derivation context")]
    NotInContext(Name),
    #[error("substituend type {got} differs from the assumption type {expected}")]
    TypeMismatch { expected: Type, got: Type },
    #[error("r = {r} is below the derivation rank {rank}")]
    RankTooSmall { r: u64, rank: u64 },
    #[error("non-canonical copy bound: the stored value has size {bound} but the duplicated value has size {duplicated}")]
    NonCanonicalCopyBound { bound: usize, duplicated: usize },
    #[error("site is not a redex of the subject: {0:?}")]
    BadSite(Vec<usize>),
    #[error("derivation shape mismatch: {0}")]
    Malformed(String),
    #[error("constructed subject differs from the expected substitution result")]
    SubjectMismatch,
    #[error("weight bound violated: {0}")]
    WeightBound(String),
    #[error(transparent)]
    Check(#[from] CheckError),
}

type TResult<T> = Result<T, TransformError>;

/// One record of the forallI/forallE/m tail below a structural core.
#[derive(Clone, Debug)]
pub enum PeeledStep {
    ForallI { witness: Name, target: Type },
    ForallE { instantiation: Type },
    M { merged: Vec<Name>, var: Name, sigma: Type },
}

/// Split a derivation into its innermost structural rule and the trailing
/// sequence of forallI / forallE / m steps, in application order
/// (element 0 applies to the core first).
pub fn generation_peel(d: &Derivation) -> (Derivation, Vec<PeeledStep>) {
    match (&d.rule, &d.payload) {
        (Rule::ForallI, Payload::ForallI { witness }) => {
            let (core, mut steps) = generation_peel(&d.premises[0]);
            steps.push(PeeledStep::ForallI {
                witness: witness.clone(),
                target: d.conclusion.ty.clone(),
            });
            (core, steps)
        }
        (Rule::ForallE, Payload::ForallE { instantiation }) => {
            let (core, mut steps) = generation_peel(&d.premises[0]);
            steps.push(PeeledStep::ForallE {
                instantiation: instantiation.clone(),
            });
            (core, steps)
        }
        (Rule::M, Payload::M { merged, var }) => {
            let (core, mut steps) = generation_peel(&d.premises[0]);
            let sigma = match d.conclusion.context.get(var) {
                Some(Type::Bang(inner)) => (**inner).clone(),
                _ => unreachable!("m target is banged in a checked derivation"),
            };
            steps.push(PeeledStep::M {
                merged: merged.clone(),
                var: var.clone(),
                sigma,
            });
            (core, steps)
        }
        _ => (d.clone(), vec![]),
    }
}

/// Reapply peeled steps on top of a (possibly rewritten) core. Variable
/// clashes with a grown context are resolved by freshening the introduced
/// names, rethreading renames through later steps.
pub fn reapply_steps(core: Derivation, steps: &[PeeledStep]) -> Derivation {
    let mut cur = core;
    let mut renames: BTreeMap<Name, Name> = BTreeMap::new();
    for step in steps {
        match step {
            PeeledStep::M { merged, var, sigma } => {
                let merged2: Vec<Name> = merged
                    .iter()
                    .map(|m| renames.get(m).cloned().unwrap_or_else(|| m.clone()))
                    .collect();
                let mut var2 = var.clone();
                let remaining: BTreeSet<&Name> = cur
                    .conclusion
                    .context
                    .keys()
                    .filter(|k| !merged2.contains(*k))
                    .collect();
                if remaining.contains(&var2) {
                    var2 = gensym(var);
                    renames.insert(var.clone(), var2.clone());
                }
                cur = if merged2.is_empty() {
                    b::m_intro(cur, &var2, sigma.clone())
                } else {
                    let refs: Vec<&str> = merged2.iter().map(|s| s.as_str()).collect();
                    b::m_merge(cur, &refs, &var2)
                };
            }
            PeeledStep::ForallI { witness, target } => {
                let mut witness2 = witness.clone();
                let ctx_tyvars: BTreeSet<Name> = cur
                    .conclusion
                    .context
                    .values()
                    .flat_map(|t| t.free_vars())
                    .collect();
                if ctx_tyvars.contains(&witness2) {
                    // an eigenvariable clash with assumptions brought in by
                    // substitution: rename the witness throughout the core
                    let fresh = gensym(&witness2);
                    cur = subst_type_in_derivation(&cur, &witness2, &Type::var(fresh.clone()));
                    witness2 = fresh;
                }
                cur = b::forall_i(cur, target.clone(), &witness2);
            }
            PeeledStep::ForallE { instantiation } => {
                cur = b::forall_e(cur, instantiation.clone());
            }
        }
    }
    cur
}

/// Every variable name appearing anywhere in the derivation: context names
/// of every node plus all (free or bound) term variables of every subject.
pub fn all_names(d: &Derivation) -> BTreeSet<Name> {
    fn term_names(t: &Term, acc: &mut BTreeSet<Name>) {
        match t {
            Term::Var(x) => {
                acc.insert(x.clone());
            }
            Term::Lam(x, b1) | Term::BangLam(x, b1) => {
                acc.insert(x.clone());
                term_names(b1, acc);
            }
            Term::App(f, a) => {
                term_names(f, acc);
                term_names(a, acc);
            }
            Term::Bang(b1) | Term::Der(b1) | Term::Proj(b1) => term_names(b1, acc),
            Term::Pair(l, r) => {
                term_names(l, acc);
                term_names(r, acc);
            }
            Term::Copy {
                bound,
                scrutinee,
                left_var,
                right_var,
                left,
                right,
            } => {
                acc.insert(left_var.clone());
                acc.insert(right_var.clone());
                term_names(bound, acc);
                term_names(scrutinee, acc);
                term_names(left, acc);
                term_names(right, acc);
            }
        }
    }
    fn walk(d: &Derivation, acc: &mut BTreeSet<Name>) {
        acc.extend(d.conclusion.context.keys().cloned());
        term_names(&d.conclusion.subject, acc);
        for p in &d.premises {
            walk(p, acc);
        }
    }
    let mut acc = BTreeSet::new();
    walk(d, &mut acc);
    acc
}


/// Rename an assumption visible in the root context, consistently through
/// the subtree. `new` must be fresh for the whole derivation.
pub fn rename_assumption(d: &Derivation, old: &str, new: &str) -> Derivation {
    if old == new {
        return d.clone();
    }
    assert!(
        d.conclusion.context.contains_key(old),
        "rename: `{old}` not visible"
    );
    rename_rec(d, old, new)
}

fn rename_rec(d: &Derivation, old: &str, new: &str) -> Derivation {
    let mut out = d.clone();
    let ty = out.conclusion.context.remove(old).expect("old in context");
    out.conclusion.context.insert(new.to_string(), ty);
    out.conclusion.subject = out.conclusion.subject.rename_free(old, new);
    match (&mut out.rule, &mut out.payload) {
        (Rule::Sp, Payload::Sp { renaming }) => {
            for (_, target) in renaming.iter_mut() {
                if target == old {
                    *target = new.to_string();
                }
            }
            // premises carry the pre-promotion variables, untouched
        }
        (Rule::M, Payload::M { var, .. }) if var == old => {
            *var = new.to_string();
            // the premise context holds the merged sources, untouched
        }
        _ => {
            out.premises = d
                .premises
                .iter()
                .map(|p| {
                    if p.conclusion.context.contains_key(old) {
                        rename_rec(p, old, new)
                    } else {
                        p.clone()
                    }
                })
                .collect();
        }
    }
    out
}

/// Apply a type substitution `var := replacement` throughout a derivation,
/// renaming forallI eigenvariables as needed.
pub fn subst_type_in_derivation(d: &Derivation, var: &str, replacement: &Type) -> Derivation {
    if let (Rule::ForallI, Payload::ForallI { witness }) = (&d.rule, &d.payload) {
        if witness == var {
            // `var` is this node's eigenvariable: the conclusion cannot
            // mention it, so the substitution is the identity here
            return d.clone();
        }
        if replacement.free_vars().contains(witness) {
            let fresh = gensym(witness);
            let premise =
                subst_type_in_derivation(&d.premises[0], witness, &Type::var(fresh.clone()));
            let renamed = Derivation {
                rule: Rule::ForallI,
                payload: Payload::ForallI { witness: fresh },
                premises: vec![premise],
                conclusion: d.conclusion.clone(),
            };
            return subst_type_in_derivation(&renamed, var, replacement);
        }
    }
    let mut out = d.clone();
    out.premises = d
        .premises
        .iter()
        .map(|p| subst_type_in_derivation(p, var, replacement))
        .collect();
    for t in out.conclusion.context.values_mut() {
        *t = t.substitute(var, replacement);
    }
    out.conclusion.ty = out.conclusion.ty.substitute(var, replacement);
    if let Payload::ForallE { instantiation } = &mut out.payload {
        *instantiation = instantiation.substitute(var, replacement);
    }
    out
}

/// Weighted substitution: from `d1 : G, x: s |- M : t` and `d2 : D |- N : s`
/// build a checking derivation of `G, D |- M{N/x} : t` whose weight at any
/// `r >= rank(d1)` is at most `w(d1, r) + w(d2, r)`.
pub fn weighted_substitute(
    d1: &Derivation,
    x: &str,
    d2: &Derivation,
    r: u64,
) -> TResult<Derivation> {
    let sigma = d1
        .conclusion
        .context
        .get(x)
        .ok_or_else(|| TransformError::NotInContext(x.to_string()))?;
    if &d2.conclusion.ty != sigma {
        return Err(TransformError::TypeMismatch {
            expected: sigma.clone(),
            got: d2.conclusion.ty.clone(),
        });
    }
    let rk = rank(d1);
    if r < rk {
        return Err(TransformError::RankTooSmall { r, rank: rk });
    }
    let d2 = freshen_root_context(d2, &all_names(d1));
    let result = ws(d1, x, &d2)?;
    let expected = d1
        .conclusion
        .subject
        .surface_substitute(x, &d2.conclusion.subject);
    if result.conclusion.subject != expected {
        return Err(TransformError::SubjectMismatch);
    }
    let bound = weight(d1, r) + weight(&d2, r);
    let got = weight(&result, r);
    if got > bound {
        return Err(TransformError::WeightBound(format!(
            "w(result, {r}) = {got} > {bound}"
        )));
    }
    Ok(result)
}

/// Rename root context names of `d` that clash with `caller_avoid`.
fn freshen_root_context(d: &Derivation, caller_avoid: &BTreeSet<Name>) -> Derivation {
    let mut cur = d.clone();
    let mut avoid = caller_avoid.clone();
    avoid.extend(all_names(d));
    let names: Vec<Name> = d.conclusion.context.keys().cloned().collect();
    for n in names {
        if caller_avoid.contains(&n) {
            let fresh = gensym(&n);
            avoid.insert(fresh.clone());
            cur = rename_assumption(&cur, &n, &fresh);
        }
    }
    cur
}

fn visible_names(d: &Derivation) -> BTreeSet<Name> {
    let mut s: BTreeSet<Name> = d.conclusion.context.keys().cloned().collect();
    s.extend(d.conclusion.subject.free_vars());
    s
}

fn ws(d1: &Derivation, x: &str, d2: &Derivation) -> TResult<Derivation> {
    let sigma = d1.conclusion.context[x].clone();
    // nodes that introduce the banged assumption themselves
    if sigma.is_strictly_exponential() {
        match (&d1.rule, &d1.payload) {
            (Rule::M, Payload::M { merged, var }) if var == x => {
                return ws_banged_m(d1, x, merged.clone(), d2);
            }
            (Rule::Sp, Payload::Sp { renaming }) => {
                let pair = renaming.iter().find(|(_, w)| w == x).cloned();
                match pair {
                    Some((u, _)) => return ws_banged_sp(d1, x, &u, d2),
                    None => {
                        return Err(TransformError::Malformed(
                            "sp conclusion lacks the substituted variable".into(),
                        ))
                    }
                }
            }
            _ => {}
        }
    }
    match d1.rule {
        Rule::Ax => Ok(d2.clone()),
        Rule::ImpIl | Rule::ImpIe => {
            let premise = &d1.premises[0];
            let binder = premise
                .conclusion
                .context
                .keys()
                .find(|k| !d1.conclusion.context.contains_key(*k))
                .cloned()
                .ok_or_else(|| TransformError::Malformed("no discharged binder".into()))?;
            let (premise, binder) = avoid_binder_clash(premise, &binder, d2);
            let inner = ws(&premise, x, d2)?;
            Ok(match d1.rule {
                Rule::ImpIl => b::lam(inner, &binder),
                _ => b::blam(inner, &binder),
            })
        }
        Rule::ImpE => {
            let in_fun = d1.premises[0].conclusion.context.contains_key(x);
            if in_fun {
                let f = ws(&d1.premises[0], x, d2)?;
                Ok(b::app(f, d1.premises[1].clone()))
            } else {
                let a = ws(&d1.premises[1], x, d2)?;
                Ok(b::app(d1.premises[0].clone(), a))
            }
        }
        Rule::WithE => Ok(b::with_e(ws(&d1.premises[0], x, d2)?)),
        Rule::WithI => {
            if d1.premises.len() != 4 {
                return Err(TransformError::Malformed(
                    "substitution into a closed bare pair".into(),
                ));
            }
            let n = ws(&d1.premises[0], x, d2)?;
            let m1 = &d1.premises[1];
            let m2 = &d1.premises[2];
            let x1 = m1.conclusion.context.keys().next().unwrap().clone();
            let x2 = m2.conclusion.context.keys().next().unwrap().clone();
            let (m1, _) = avoid_binder_clash(m1, &x1, d2);
            let (m2, _) = avoid_binder_clash(m2, &x2, d2);
            Ok(b::with_i(n, m1, m2, d1.premises[3].clone()))
        }
        Rule::ForallI => {
            let witness = match &d1.payload {
                Payload::ForallI { witness } => witness.clone(),
                _ => unreachable!(),
            };
            let incoming: BTreeSet<Name> = d2
                .conclusion
                .context
                .values()
                .flat_map(|t| t.free_vars())
                .collect();
            let (premise, witness) = if incoming.contains(&witness) {
                let fresh = gensym(&witness);
                (
                    subst_type_in_derivation(&d1.premises[0], &witness, &Type::var(fresh.clone())),
                    fresh,
                )
            } else {
                (d1.premises[0].clone(), witness)
            };
            let inner = ws(&premise, x, d2)?;
            Ok(b::forall_i(inner, d1.conclusion.ty.clone(), &witness))
        }
        Rule::ForallE => {
            let inst = match &d1.payload {
                Payload::ForallE { instantiation } => instantiation.clone(),
                _ => unreachable!(),
            };
            Ok(b::forall_e(ws(&d1.premises[0], x, d2)?, inst))
        }
        Rule::M => {
            let (merged, var, sigma_m) = match (&d1.payload, d1.conclusion.context.get(x)) {
                (Payload::M { merged, var }, _) => {
                    let s = match &d1.conclusion.context[var] {
                        Type::Bang(inner) => (**inner).clone(),
                        _ => unreachable!(),
                    };
                    (merged.clone(), var.clone(), s)
                }
                _ => unreachable!(),
            };
            let inner = ws(&d1.premises[0], x, d2)?;
            let step = PeeledStep::M {
                merged,
                var,
                sigma: sigma_m,
            };
            Ok(reapply_steps(inner, &[step]))
        }
        Rule::Sp => Err(TransformError::Malformed(
            "sp node reached with a non-promoted assumption".into(),
        )),
    }
}

fn avoid_binder_clash(premise: &Derivation, binder: &str, d2: &Derivation) -> (Derivation, Name) {
    let incoming = visible_names(d2);
    if incoming.contains(binder) {
        let fresh = gensym(binder);
        (rename_assumption(premise, binder, &fresh), fresh)
    } else {
        (premise.clone(), binder.to_string())
    }
}

/// Banged substitution through the `m` node that introduced `x`:
/// substitute one copy of the promoted body per merged assumption, then
/// re-merge the incoming context.
fn ws_banged_m(d1: &Derivation, x: &str, merged: Vec<Name>, d2: &Derivation) -> TResult<Derivation> {
    let (core2, suffix2) = generation_peel(d2);
    if core2.rule != Rule::Sp {
        return Err(TransformError::Malformed(format!(
            "a derivation of a banged type must end in sp (after m), found {}",
            core2.rule.name()
        )));
    }
    // rename sp-conclusion names clashing with d1's; names of d2 itself
    // must survive so the re-merge below can find them
    let mut avoid = all_names(d1);
    let (core2, suffix2) = freshen_core_names(core2, suffix2, &mut avoid);
    let sp_premise = core2.premises[0].clone();
    let renaming: Vec<(Name, Name)> = match &core2.payload {
        Payload::Sp { renaming } => renaming.clone(),
        _ => unreachable!(),
    };
    let mut cur = d1.premises[0].clone();
    let mut copy_maps: Vec<BTreeMap<Name, Name>> = Vec::new();
    for xi in &merged {
        let mut copy = sp_premise.clone();
        let mut map = BTreeMap::new();
        let names: Vec<Name> = copy.conclusion.context.keys().cloned().collect();
        for u in names {
            let fresh_u = gensym(&u);
            avoid.insert(fresh_u.clone());
            copy = rename_assumption(&copy, &u, &fresh_u);
            map.insert(u, fresh_u);
        }
        cur = ws(&cur, xi, &copy)?;
        copy_maps.push(map);
    }
    // merge the per-copy assumption instances back into the sp targets
    for (u, w) in &renaming {
        let copies: Vec<Name> = copy_maps.iter().map(|m| m[u].clone()).collect();
        let sigma_u = sp_premise.conclusion.context[u].clone();
        cur = if copies.is_empty() {
            b::m_intro(cur, w, sigma_u)
        } else {
            let refs: Vec<&str> = copies.iter().map(|s| s.as_str()).collect();
            b::m_merge(cur, &refs, w)
        };
    }
    let _ = x;
    Ok(reapply_steps(cur, &suffix2))
}

/// Banged substitution through the `sp` node whose conclusion introduced
/// `x`: substitute one level down, then promote the union context.
fn ws_banged_sp(d1: &Derivation, x: &str, source: &str, d2: &Derivation) -> TResult<Derivation> {
    let (core2, suffix2) = generation_peel(d2);
    if core2.rule != Rule::Sp {
        return Err(TransformError::Malformed(format!(
            "a derivation of a banged type must end in sp (after m), found {}",
            core2.rule.name()
        )));
    }
    let mut avoid = all_names(d1);
    let (core2, suffix2) = freshen_core_names(core2, suffix2, &mut avoid);
    let sp_premise2 = core2.premises[0].clone();
    let renaming2: Vec<(Name, Name)> = match &core2.payload {
        Payload::Sp { renaming } => renaming.clone(),
        _ => unreachable!(),
    };
    // freshen the inner premise names of d2 against d1's premise
    let mut sp_premise2 = sp_premise2;
    let mut inner_map: BTreeMap<Name, Name> = BTreeMap::new();
    let names: Vec<Name> = sp_premise2.conclusion.context.keys().cloned().collect();
    for v in names {
        if avoid.contains(&v) {
            let fresh_v = gensym(&v);
            avoid.insert(fresh_v.clone());
            sp_premise2 = rename_assumption(&sp_premise2, &v, &fresh_v);
            inner_map.insert(v, fresh_v);
        } else {
            avoid.insert(v.clone());
            inner_map.insert(v.clone(), v);
        }
    }
    let inner = ws(&d1.premises[0], source, &sp_premise2)?;
    let own_renaming: Vec<(Name, Name)> = match &d1.payload {
        Payload::Sp { renaming } => renaming.clone(),
        _ => unreachable!(),
    };
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (u, w) in &own_renaming {
        if w != x {
            pairs.push((u.clone(), w.clone()));
        }
    }
    for (v, w2) in &renaming2 {
        pairs.push((inner_map[v].clone(), w2.clone()));
    }
    let pair_refs: Vec<(&str, &str)> = pairs
        .iter()
        .map(|(a, c)| (a.as_str(), c.as_str()))
        .collect();
    let cur = b::sp(inner, &pair_refs);
    Ok(reapply_steps(cur, &suffix2))
}

/// Rename the sp-core conclusion names of a peeled derivation so they do
/// not clash with `avoid`, rewriting the suffix steps accordingly.
fn freshen_core_names(
    core: Derivation,
    suffix: Vec<PeeledStep>,
    avoid: &mut BTreeSet<Name>,
) -> (Derivation, Vec<PeeledStep>) {
    let mut core = core;
    let mut suffix = suffix;
    let names: Vec<Name> = core.conclusion.context.keys().cloned().collect();
    for w in names {
        if avoid.contains(&w) {
            let fresh = gensym(&w);
            avoid.insert(fresh.clone());
            core = rename_assumption(&core, &w, &fresh);
            for step in suffix.iter_mut() {
                if let PeeledStep::M { merged, .. } = step {
                    for m in merged.iter_mut() {
                        if m == &w {
                            *m = fresh.clone();
                        }
                    }
                }
            }
        } else {
            avoid.insert(w);
        }
    }
    (core, suffix)
}

/// Subject reduction: derivations for the successor(s) of the redex at
/// `site`, with strictly smaller weight at any `r >= rank(d)`. `proj`
/// returns two genuinely distinct derivations, the other rules return the
/// same derivation twice.
pub fn subject_reduce(
    d: &Derivation,
    site: &RedexSite,
    r: u64,
) -> TResult<(Derivation, Derivation)> {
    let sites = crate::surface::find_redexes(&d.conclusion.subject);
    if !sites.contains(site) {
        return Err(TransformError::BadSite(site.path.clone()));
    }
    let rk = rank(d);
    if r < rk {
        return Err(TransformError::RankTooSmall { r, rank: rk });
    }
    let (d1, d2) = reduce_at(d, &site.path, site.kind, r)?;
    // contract sanity: subjects, contexts, types, weights
    let expect = crate::surface::step(&d.conclusion.subject, site)
        .map_err(|_| TransformError::BadSite(site.path.clone()))?;
    let (e1, e2) = match expect {
        StepResult::One(t) => (t.clone(), t),
        StepResult::Two(a1, a2) => (a1, a2),
    };
    for (di, ei) in [(&d1, &e1), (&d2, &e2)] {
        if di.conclusion.subject != *ei {
            return Err(TransformError::SubjectMismatch);
        }
        if di.conclusion.ty != d.conclusion.ty || di.conclusion.context != d.conclusion.context {
            return Err(TransformError::Malformed(
                "successor judgment differs in context or type".into(),
            ));
        }
        let w0 = weight(d, r);
        let wi = weight(di, r);
        if wi >= w0 {
            return Err(TransformError::WeightBound(format!(
                "w({r}) did not decrease: {wi} >= {w0}"
            )));
        }
    }
    Ok((d1, d2))
}

fn reduce_at(
    d: &Derivation,
    path: &[usize],
    kind: RedexKind,
    r: u64,
) -> TResult<(Derivation, Derivation)> {
    let (core, suffix) = generation_peel(d);
    if path.is_empty() {
        let (a, b2) = contract_root(&core, kind, r)?;
        return Ok((reapply_steps(a, &suffix), reapply_steps(b2, &suffix)));
    }
    let pidx = match (&core.rule, core.premises.len(), path[0]) {
        (Rule::ImpIl | Rule::ImpIe, _, 0) => 0,
        (Rule::ImpE, _, 0) => 0,
        (Rule::ImpE, _, 1) => 1,
        (Rule::WithE, _, 0) => 0,
        (Rule::WithI, 4, 1) => 0,
        (Rule::WithI, 4, 2) => 1,
        (Rule::WithI, 4, 3) => 2,
        (Rule::WithI, 2, 0) => 0,
        (Rule::WithI, 2, 1) => 1,
        _ => return Err(TransformError::BadSite(path.to_vec())),
    };
    let (p1, p2) = reduce_at(&core.premises[pidx], &path[1..], kind, r)?;
    let r1 = rebuild_core(&core, pidx, p1)?;
    let r2 = rebuild_core(&core, pidx, p2)?;
    Ok((reapply_steps(r1, &suffix), reapply_steps(r2, &suffix)))
}

fn rebuild_core(core: &Derivation, pidx: usize, premise: Derivation) -> TResult<Derivation> {
    let mut premises = core.premises.clone();
    premises[pidx] = premise;
    Ok(match (&core.rule, core.premises.len()) {
        (Rule::ImpIl, _) | (Rule::ImpIe, _) => {
            let binder = core
                .premises[0]
                .conclusion
                .context
                .keys()
                .find(|k| !core.conclusion.context.contains_key(*k))
                .cloned()
                .ok_or_else(|| TransformError::Malformed("no discharged binder".into()))?;
            let inner = premises.remove(0);
            if core.rule == Rule::ImpIl {
                b::lam(inner, &binder)
            } else {
                b::blam(inner, &binder)
            }
        }
        (Rule::ImpE, _) => {
            let a = premises.remove(1);
            let f = premises.remove(0);
            b::app(f, a)
        }
        (Rule::WithE, _) => b::with_e(premises.remove(0)),
        (Rule::WithI, 4) => {
            let v = premises.remove(3);
            let m2 = premises.remove(2);
            let m1 = premises.remove(1);
            let n = premises.remove(0);
            b::with_i(n, m1, m2, v)
        }
        (Rule::WithI, 2) => {
            let snd = premises.remove(1);
            let fst = premises.remove(0);
            b::bare_pair(fst, snd)
        }
        _ => return Err(TransformError::Malformed("unexpected core rule".into())),
    })
}

fn contract_root(
    core: &Derivation,
    kind: RedexKind,
    r: u64,
) -> TResult<(Derivation, Derivation)> {
    match kind {
        RedexKind::Beta | RedexKind::BangBeta => {
            if core.rule != Rule::ImpE {
                return Err(TransformError::Malformed(format!(
                    "redex core is {} instead of impE",
                    core.rule.name()
                )));
            }
            let (fun_core, fun_steps) = generation_peel(&core.premises[0]);
            let expected_rule = if kind == RedexKind::Beta {
                Rule::ImpIl
            } else {
                Rule::ImpIe
            };
            if fun_core.rule != expected_rule {
                return Err(TransformError::Malformed(format!(
                    "abstraction core is {} instead of {}",
                    fun_core.rule.name(),
                    expected_rule.name()
                )));
            }
            let binder = fun_core
                .premises[0]
                .conclusion
                .context
                .keys()
                .find(|k| !fun_core.conclusion.context.contains_key(*k))
                .cloned()
                .ok_or_else(|| TransformError::Malformed("no discharged binder".into()))?;
            let body = apply_abstraction_tail(fun_core.premises[0].clone(), &fun_steps, &binder)?;
            let arg = &core.premises[1];
            let contracted = weighted_substitute(&body, &binder, arg, r.max(rank(&body)))?;
            Ok((contracted.clone(), contracted))
        }
        RedexKind::Proj => {
            if core.rule != Rule::WithE {
                return Err(TransformError::Malformed(format!(
                    "proj core is {} instead of withE",
                    core.rule.name()
                )));
            }
            let (pair_core, pair_steps) = generation_peel(&core.premises[0]);
            if pair_core.rule != Rule::WithI || pair_core.premises.len() != 2 {
                return Err(TransformError::Malformed(
                    "proj scrutinee core is not a bare pair".into(),
                ));
            }
            let left = apply_abstraction_tail(pair_core.premises[0].clone(), &pair_steps, "")?;
            let right = apply_abstraction_tail(pair_core.premises[1].clone(), &pair_steps, "")?;
            Ok((left, right))
        }
        RedexKind::Copy => {
            if core.rule != Rule::WithI || core.premises.len() != 4 {
                return Err(TransformError::Malformed(
                    "copy core is not a withI".into(),
                ));
            }
            let dn = &core.premises[0];
            if !dn.conclusion.context.is_empty() {
                return Err(TransformError::Malformed(
                    "copy scrutinee derivation must be closed at contraction time".into(),
                ));
            }
            let dv = &core.premises[3];
            let bound = dv.conclusion.subject.size();
            let duplicated = dn.conclusion.subject.size();
            if bound < duplicated {
                return Err(TransformError::NonCanonicalCopyBound { bound, duplicated });
            }
            let m1 = &core.premises[1];
            let m2 = &core.premises[2];
            let x1 = m1.conclusion.context.keys().next().unwrap().clone();
            let x2 = m2.conclusion.context.keys().next().unwrap().clone();
            let s1 = weighted_substitute(m1, &x1, dn, r.max(rank(m1)))?;
            let s2 = weighted_substitute(m2, &x2, dn, r.max(rank(m2)))?;
            let paired = b::bare_pair(s1, s2);
            Ok((paired.clone(), paired))
        }
    }
}

/// Push a peeled forallI/forallE/m tail from an abstraction (or pair) node
/// into its premise: forall pairs become net type substitutions, m steps
/// are replayed. Used by the beta and proj contractions.
fn apply_abstraction_tail(
    premise: Derivation,
    steps: &[PeeledStep],
    binder: &str,
) -> TResult<Derivation> {
    let mut pending: Vec<Name> = Vec::new();
    let mut cur = premise;
    let mut renames: BTreeMap<Name, Name> = BTreeMap::new();
    for step in steps {
        match step {
            PeeledStep::ForallI { witness, .. } => pending.push(witness.clone()),
            PeeledStep::ForallE { instantiation } => {
                let gamma = pending.pop().ok_or_else(|| {
                    TransformError::Malformed(
                        "forallE without a matching forallI over the contractum".into(),
                    )
                })?;
                cur = subst_type_in_derivation(&cur, &gamma, instantiation);
            }
            PeeledStep::M { merged, var, sigma } => {
                let merged2: Vec<Name> = merged
                    .iter()
                    .map(|m| renames.get(m).cloned().unwrap_or_else(|| m.clone()))
                    .collect();
                let mut var2 = var.clone();
                if (cur.conclusion.context.contains_key(&var2) && !merged2.contains(&var2))
                    || var2 == binder
                {
                    var2 = gensym(var);
                    renames.insert(var.clone(), var2.clone());
                }
                // the recorded sigma is stage-correct; pending substitutions
                // have already been applied to cur
                cur = if merged2.is_empty() {
                    b::m_intro(cur, &var2, sigma.clone())
                } else {
                    let refs: Vec<&str> = merged2.iter().map(|s| s.as_str()).collect();
                    b::m_merge(cur, &refs, &var2)
                };
            }
        }
    }
    if !pending.is_empty() {
        return Err(TransformError::Malformed(
            "unconsumed forallI over a contractum".into(),
        ));
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::check_derivation;
    use crate::surface::find_redexes;
    use crate::types::unit_type;

    fn id_unit() -> Derivation {
        b::forall_i(b::lam(b::ax("x", Type::var("a")), "x"), unit_type(), "a")
    }

    #[test]
    fn peel_ax_m() {
        let d = b::m_intro(b::ax("x", Type::var("a")), "z", Type::var("c"));
        let (core, steps) = generation_peel(&d);
        assert_eq!(core.rule, Rule::Ax);
        assert_eq!(steps.len(), 1);
        let rebuilt = reapply_steps(core, &steps);
        assert_eq!(rebuilt.conclusion, d.conclusion);
    }

    #[test]
    fn ws_linear_ax() {
        // d1: x: 1 |- x : 1, d2: |- \y.y : 1
        let d1 = b::ax("x", unit_type());
        let d2 = id_unit();
        let s = weighted_substitute(&d1, "x", &d2, 1).unwrap();
        check_derivation(&s).unwrap();
        assert_eq!(s.conclusion.ty, unit_type());
        assert_eq!(weight(&s, 1), weight(&d2, 1));
    }

    #[test]
    fn subject_reduce_beta() {
        // (\x.x)(\y.y) : 1 contracts to \y.y with weight 5 -> 2 at r = 1
        let fun = b::lam(b::ax("x", unit_type()), "x");
        let arg = id_unit();
        let d = b::app(fun, arg);
        check_derivation(&d).unwrap();
        let sites = find_redexes(&d.conclusion.subject);
        assert_eq!(sites.len(), 1);
        let (d1, d2) = subject_reduce(&d, &sites[0], 1).unwrap();
        check_derivation(&d1).unwrap();
        assert_eq!(d1.conclusion.subject, d2.conclusion.subject);
        assert_eq!(weight(&d, 1), num::BigUint::from(5u8));
        assert_eq!(weight(&d1, 1), num::BigUint::from(2u8));
    }

    #[test]
    fn subject_reduce_proj() {
        // proj <0, 1> : B
        let zero = crate::encode::bool_term(false);
        let one = crate::encode::bool_term(true);
        let d = b::with_e(b::bare_pair(zero.clone(), one.clone()));
        check_derivation(&d).unwrap();
        let sites = find_redexes(&d.conclusion.subject);
        let (d1, d2) = subject_reduce(&d, &sites[0], 1).unwrap();
        check_derivation(&d1).unwrap();
        check_derivation(&d2).unwrap();
        assert_eq!(d1.conclusion.subject, zero.conclusion.subject);
        assert_eq!(d2.conclusion.subject, one.conclusion.subject);
    }

    #[test]
    fn subject_reduce_bang_beta() {
        // (\!z. <d(z), d(z)> as tensor) !!... : the section-1 judgment
        let d = crate::encode::section1_judgment();
        check_derivation(&d).unwrap();
        let sites = find_redexes(&d.conclusion.subject);
        assert_eq!(sites.len(), 1);
        let r = rank(&d);
        let (d1, _) = subject_reduce(&d, &sites[0], r).unwrap();
        check_derivation(&d1).unwrap();
        assert!(weight(&d1, r) < weight(&d, r));
    }
}
