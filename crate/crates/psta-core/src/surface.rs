//! One-step surface reduction: redex discovery through surface contexts
//! (never under a `!`, never in the bound-value slot of a copy) and the
//! four reduction rules.

use thiserror::Error;

use crate::term::Term;

/// Child indices used in redex paths. For `copy` the children are
/// 0 = bound value (never a surface position), 1 = scrutinee, 2 = left
/// pair component, 3 = right pair component.
pub type Path = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RedexKind {
    Beta,
    BangBeta,
    Proj,
    Copy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedexSite {
    pub path: Path,
    pub kind: RedexKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    One(Term),
    Two(Term, Term),
}

impl StepResult {
    pub fn successors(&self) -> Vec<&Term> {
        match self {
            StepResult::One(t) => vec![t],
            StepResult::Two(a, b) => vec![a, b],
        }
    }

    pub fn into_pair(self) -> (Term, Term) {
        match self {
            StepResult::One(t) => (t.clone(), t),
            StepResult::Two(a, b) => (a, b),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("site {0:?} does not address a current redex")]
    InvalidSite(Path),
    #[error("copy at {0:?} is not ready: its scrutinee is not yet a value")]
    CopyNotReady(Path),
}

/// All surface redexes in deterministic pre-order (leftmost-outermost
/// first). Subterms under `!` and the copy bound-value slot are not
/// visited. A `copy` counts as a redex only when both its bound value and
/// its scrutinee are values; a `proj` only when applied to a literal pair.
pub fn find_redexes(term: &Term) -> Vec<RedexSite> {
    let mut sites = Vec::new();
    let mut path = Vec::new();
    visit(term, &mut path, &mut sites);
    sites
}

fn visit(term: &Term, path: &mut Path, sites: &mut Vec<RedexSite>) {
    if let Some(kind) = root_redex(term) {
        sites.push(RedexSite {
            path: path.clone(),
            kind,
        });
    }
    match term {
        Term::Var(_) | Term::Bang(_) => {}
        Term::Lam(_, b) | Term::BangLam(_, b) | Term::Der(b) | Term::Proj(b) => {
            path.push(0);
            visit(b, path, sites);
            path.pop();
        }
        Term::App(f, a) => {
            path.push(0);
            visit(f, path, sites);
            path.pop();
            path.push(1);
            visit(a, path, sites);
            path.pop();
        }
        Term::Pair(l, r) => {
            path.push(0);
            visit(l, path, sites);
            path.pop();
            path.push(1);
            visit(r, path, sites);
            path.pop();
        }
        Term::Copy {
            scrutinee,
            left,
            right,
            ..
        } => {
            path.push(1);
            visit(scrutinee, path, sites);
            path.pop();
            path.push(2);
            visit(left, path, sites);
            path.pop();
            path.push(3);
            visit(right, path, sites);
            path.pop();
        }
    }
}

fn root_redex(term: &Term) -> Option<RedexKind> {
    match term {
        Term::App(f, _) => match &**f {
            Term::Lam(..) => Some(RedexKind::Beta),
            Term::BangLam(..) => {
                if matches!(term, Term::App(_, a) if matches!(&**a, Term::Bang(_))) {
                    Some(RedexKind::BangBeta)
                } else {
                    None
                }
            }
            _ => None,
        },
        Term::Proj(b) => match &**b {
            Term::Pair(..) => Some(RedexKind::Proj),
            _ => None,
        },
        Term::Copy {
            bound, scrutinee, ..
        } => {
            if bound.is_value() && scrutinee.is_value() {
                Some(RedexKind::Copy)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Contract the redex at `site`. `beta` and `bang-beta` and `copy` yield a
/// single successor; `proj` yields two.
pub fn step(term: &Term, site: &RedexSite) -> Result<StepResult, StepError> {
    let result = step_at(term, &site.path, site.kind)?;
    debug_assert!(result.successors().iter().all(|t| t.is_s_linear()));
    Ok(result)
}

fn step_at(term: &Term, path: &[usize], kind: RedexKind) -> Result<StepResult, StepError> {
    if path.is_empty() {
        return contract_root(term, kind);
    }
    let (head, rest) = (path[0], &path[1..]);
    let rebuild_one = |t: &Term, child: Term, idx: usize| -> Term {
        replace_child(t, idx, child)
    };
    let child = child_at(term, head).ok_or_else(|| StepError::InvalidSite(path.to_vec()))?;
    if matches!(term, Term::Bang(_)) || (matches!(term, Term::Copy { .. }) && head == 0) {
        return Err(StepError::InvalidSite(path.to_vec()));
    }
    match step_at(child, rest, kind)? {
        StepResult::One(t) => Ok(StepResult::One(rebuild_one(term, t, head))),
        StepResult::Two(a, b) => Ok(StepResult::Two(
            rebuild_one(term, a, head),
            rebuild_one(term, b, head),
        )),
    }
}

fn child_at(term: &Term, idx: usize) -> Option<&Term> {
    match (term, idx) {
        (Term::Lam(_, b), 0)
        | (Term::BangLam(_, b), 0)
        | (Term::Der(b), 0)
        | (Term::Proj(b), 0)
        | (Term::Bang(b), 0) => Some(b),
        (Term::App(f, _), 0) => Some(f),
        (Term::App(_, a), 1) => Some(a),
        (Term::Pair(l, _), 0) => Some(l),
        (Term::Pair(_, r), 1) => Some(r),
        (Term::Copy { bound, .. }, 0) => Some(bound),
        (Term::Copy { scrutinee, .. }, 1) => Some(scrutinee),
        (Term::Copy { left, .. }, 2) => Some(left),
        (Term::Copy { right, .. }, 3) => Some(right),
        _ => None,
    }
}

fn replace_child(term: &Term, idx: usize, new: Term) -> Term {
    let mut t = term.clone();
    match (&mut t, idx) {
        (Term::Lam(_, b), 0)
        | (Term::BangLam(_, b), 0)
        | (Term::Der(b), 0)
        | (Term::Proj(b), 0)
        | (Term::Bang(b), 0) => **b = new,
        (Term::App(f, _), 0) => **f = new,
        (Term::App(_, a), 1) => **a = new,
        (Term::Pair(l, _), 0) => **l = new,
        (Term::Pair(_, r), 1) => **r = new,
        (Term::Copy { scrutinee, .. }, 1) => **scrutinee = new,
        (Term::Copy { left, .. }, 2) => **left = new,
        (Term::Copy { right, .. }, 3) => **right = new,
        _ => unreachable!("replace_child on validated path"),
    }
    t
}

fn contract_root(term: &Term, kind: RedexKind) -> Result<StepResult, StepError> {
    match (term, kind) {
        (Term::App(f, a), RedexKind::Beta) => {
            if let Term::Lam(x, body) = &**f {
                Ok(StepResult::One(body.substitute(x, a)))
            } else {
                Err(StepError::InvalidSite(vec![]))
            }
        }
        (Term::App(f, a), RedexKind::BangBeta) => {
            if let (Term::BangLam(x, body), Term::Bang(_)) = (&**f, &**a) {
                Ok(StepResult::One(body.surface_substitute(x, a)))
            } else {
                Err(StepError::InvalidSite(vec![]))
            }
        }
        (Term::Proj(b), RedexKind::Proj) => {
            if let Term::Pair(l, r) = &**b {
                Ok(StepResult::Two((**l).clone(), (**r).clone()))
            } else {
                Err(StepError::InvalidSite(vec![]))
            }
        }
        (
            Term::Copy {
                bound,
                scrutinee,
                left_var,
                right_var,
                left,
                right,
            },
            RedexKind::Copy,
        ) => {
            if !bound.is_value() {
                return Err(StepError::InvalidSite(vec![]));
            }
            if !scrutinee.is_value() {
                return Err(StepError::CopyNotReady(vec![]));
            }
            Ok(StepResult::One(Term::pair(
                left.substitute(left_var, scrutinee),
                right.substitute(right_var, scrutinee),
            )))
        }
        _ => Err(StepError::InvalidSite(vec![])),
    }
}

/// Surface normal form: no surface redex.
pub fn is_snf(term: &Term) -> bool {
    find_redexes(term).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    fn lam(x: &str, b: Term) -> Term {
        Term::lam(x, b).unwrap()
    }

    fn id() -> Term {
        lam("x", v("x"))
    }

    /// `coin = proj <T, F>` with `T = \x.\y.x`, `F = \x.\y.y`.
    fn coin() -> Term {
        Term::proj(Term::pair(
            lam("x", lam("y", v("x"))),
            lam("x", lam("y", v("y"))),
        ))
    }

    #[test]
    fn bang_excludes_redexes() {
        let t = Term::bang(Term::app(id(), v("y")));
        assert!(find_redexes(&t).is_empty());
        assert!(is_snf(&t));
    }

    #[test]
    fn proj_is_a_root_redex() {
        let sites = find_redexes(&coin());
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].kind, RedexKind::Proj);
        assert!(sites[0].path.is_empty());
    }

    #[test]
    fn preorder_enumeration() {
        // (\x.x)((\y.y)z): root beta first, then the argument-position beta
        let t = Term::app(id(), Term::app(lam("y", v("y")), v("z")));
        let sites = find_redexes(&t);
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].path, Vec::<usize>::new());
        assert_eq!(sites[0].kind, RedexKind::Beta);
        assert_eq!(sites[1].path, vec![1]);
    }

    #[test]
    fn proj_steps_to_both_components() {
        let sites = find_redexes(&coin());
        let got = step(&coin(), &sites[0]).unwrap();
        let t = lam("x", lam("y", v("x")));
        let f = lam("x", lam("y", v("y")));
        assert_eq!(got, StepResult::Two(t, f));
    }

    #[test]
    fn bang_beta_uses_surface_substitution() {
        // (\!x.<coin, d(x)>)!I -> <coin, I>
        let t = Term::app(
            Term::bang_lam("x", Term::pair(coin(), Term::der(v("x")))),
            Term::bang(id()),
        );
        let sites = find_redexes(&t);
        let root = sites.iter().find(|s| s.path.is_empty()).unwrap();
        assert_eq!(root.kind, RedexKind::BangBeta);
        let got = step(&t, root).unwrap();
        assert_eq!(got, StepResult::One(Term::pair(coin(), id())));
    }

    #[test]
    fn copy_rule() {
        let t = Term::copy(
            lam("z", v("z")),
            lam("y", v("y")),
            "a",
            "b",
            v("a"),
            v("b"),
        )
        .unwrap();
        let sites = find_redexes(&t);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].kind, RedexKind::Copy);
        let got = step(&t, &sites[0]).unwrap();
        assert_eq!(got, StepResult::One(Term::pair(id(), id())));
    }

    #[test]
    fn copy_waits_for_value_scrutinee() {
        // the scrutinee coin is not a value, so the copy is not yet a redex,
        // but the scrutinee position is a surface context
        let t = Term::copy(
            lam("z", v("z")),
            coin(),
            "a",
            "b",
            v("a"),
            v("b"),
        )
        .unwrap();
        let sites = find_redexes(&t);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].path, vec![1]);
        assert_eq!(sites[0].kind, RedexKind::Proj);
    }

    #[test]
    fn copy_bound_slot_not_reduced() {
        let t = Term::copy(
            Term::app(id(), id()), // reducible, but in the bound slot
            lam("y", v("y")),
            "a",
            "b",
            v("a"),
            v("b"),
        )
        .unwrap();
        // bound not a value -> copy not a redex; bound slot not a context
        assert!(find_redexes(&t).is_empty());
    }

    #[test]
    fn snf_examples() {
        let t = Term::pair(Term::bang(coin()), Term::bang(coin()));
        assert!(is_snf(&t));
        assert!(!is_snf(&coin()));
        assert!(is_snf(&id()));
        // proj of a non-pair is stuck, hence SNF
        assert!(is_snf(&Term::proj(id())));
    }

    #[test]
    fn successors_stay_s_linear() {
        let t = Term::app(
            lam("x", Term::app(v("x"), lam("w", v("w")))),
            lam("y", v("y")),
        );
        let sites = find_redexes(&t);
        for s in &sites {
            for succ in step(&t, s).unwrap().successors() {
                assert!(succ.is_s_linear());
            }
        }
    }
}
