//! Multi-step surface reduction to exact distributions, reduction
//! strategies, and the exhaustive confluence / uniformity oracles.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dist::SurfaceDistribution;
use crate::surface::{find_redexes, step, RedexSite, StepResult};
use crate::term::{Canon, Term};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    RightmostInnermost,
    Random(u64),
    SiteIndex(usize),
}

impl Strategy {
    /// All four strategy families with a fixed seed, for uniformity checks.
    pub fn all(seed: u64) -> Vec<Strategy> {
        vec![
            Strategy::LeftmostOutermost,
            Strategy::RightmostInnermost,
            Strategy::Random(seed),
            Strategy::SiteIndex(1),
        ]
    }

    fn pick(&self, sites: &[RedexSite], rng: &mut ChaCha8Rng) -> usize {
        match self {
            Strategy::LeftmostOutermost => 0,
            Strategy::RightmostInnermost => sites.len() - 1,
            Strategy::Random(_) => rng.gen_range(0..sites.len()),
            Strategy::SiteIndex(k) => k % sites.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalReport {
    pub distribution: SurfaceDistribution,
    /// `|pi|` of Definition 6: the maximal nesting of branching steps.
    pub branch_depth: u64,
    /// Total number of reduction steps performed over the whole tree.
    pub steps_total: u64,
    /// Steps consumed on the longest path (equals `branch_depth`).
    pub fuel_used: u64,
}

#[derive(Debug, Error, Clone)]
pub enum EvalError {
    #[error("fuel exhausted after {fuel} steps on a branch; frontier: {frontier}")]
    FuelExhausted { fuel: u64, frontier: Term },
}

/// Reduce `term` to its surface distribution, choosing redexes with
/// `strategy`; `proj` splits into two branches each weighted one half.
pub fn evaluate(term: &Term, strategy: &Strategy, fuel: u64) -> Result<EvalReport, EvalError> {
    let seed = match strategy {
        Strategy::Random(s) => *s,
        _ => 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (distribution, branch_depth, steps_total) = go(term.clone(), strategy, fuel, &mut rng)?;
    Ok(EvalReport {
        distribution,
        branch_depth,
        steps_total,
        fuel_used: branch_depth,
    })
}

fn go(
    term: Term,
    strategy: &Strategy,
    fuel: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(SurfaceDistribution, u64, u64), EvalError> {
    let mut current = term;
    let mut depth = 0u64;
    let mut steps = 0u64;
    // deterministic steps run in a loop; recursion only at proj splits
    loop {
        let sites = find_redexes(&current);
        if sites.is_empty() {
            return Ok((SurfaceDistribution::point(current), depth, steps));
        }
        if depth >= fuel {
            return Err(EvalError::FuelExhausted {
                fuel,
                frontier: current,
            });
        }
        let site = &sites[strategy.pick(&sites, rng)];
        match step(&current, site).expect("site from find_redexes") {
            StepResult::One(next) => {
                current = next;
                depth += 1;
                steps += 1;
            }
            StepResult::Two(a, b) => {
                let remaining = fuel - depth - 1;
                let mut rng_a = ChaCha8Rng::seed_from_u64(rng.gen());
                let mut rng_b = ChaCha8Rng::seed_from_u64(rng.gen());
                let (da, deptha, stepsa) = go(a, strategy, remaining, &mut rng_a)
                    .map_err(|e| bump_fuel(e, depth + 1))?;
                let (db, depthb, stepsb) = go(b, strategy, remaining, &mut rng_b)
                    .map_err(|e| bump_fuel(e, depth + 1))?;
                let dist = SurfaceDistribution::half_mix(da, db);
                return Ok((
                    dist,
                    depth + 1 + deptha.max(depthb),
                    steps + 1 + stepsa + stepsb,
                ));
            }
        }
    }
}

fn bump_fuel(e: EvalError, consumed: u64) -> EvalError {
    match e {
        EvalError::FuelExhausted { fuel, frontier } => EvalError::FuelExhausted {
            fuel: fuel + consumed,
            frontier,
        },
    }
}

#[derive(Clone, Debug)]
pub struct ConfluenceReport {
    pub agree: bool,
    pub distributions: Vec<SurfaceDistribution>,
}

#[derive(Debug, Error, Clone)]
pub enum ConfluenceError {
    #[error("exploration truncated ({0}); result inconclusive")]
    LimitExceeded(String),
}

/// Exhaustively explores every redex choice at every reachable state and
/// collects the set of distributions obtainable. Memoized on the
/// alpha-canonical key, bounded by `fuel` (path length) and `branch_limit`
/// (number of distinct distributions tracked per state).
pub fn confluence_oracle(
    term: &Term,
    fuel: u64,
    branch_limit: usize,
) -> Result<ConfluenceReport, ConfluenceError> {
    let mut memo: BTreeMap<Canon, BTreeSet<SerDist>> = BTreeMap::new();
    let set = explore(term, fuel, branch_limit, &mut memo)?;
    let distributions: Vec<SurfaceDistribution> = set.into_iter().map(|s| s.0).collect();
    Ok(ConfluenceReport {
        agree: distributions.len() == 1,
        distributions,
    })
}

// SurfaceDistribution with an Ord impl so sets of distributions can be
// deduplicated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
struct SerDist(SurfaceDistribution);

impl PartialOrd for SerDist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SerDist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a: Vec<_> = self.0.iter().map(|(t, p)| (t.canonical_key(), p.clone())).collect();
        let b: Vec<_> = other.0.iter().map(|(t, p)| (t.canonical_key(), p.clone())).collect();
        a.cmp(&b)
    }
}

fn explore(
    term: &Term,
    fuel: u64,
    branch_limit: usize,
    memo: &mut BTreeMap<Canon, BTreeSet<SerDist>>,
) -> Result<BTreeSet<SerDist>, ConfluenceError> {
    let key = term.canonical_key();
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let sites = find_redexes(term);
    let mut out = BTreeSet::new();
    if sites.is_empty() {
        out.insert(SerDist(SurfaceDistribution::point(term.clone())));
        memo.insert(key, out.clone());
        return Ok(out);
    }
    if fuel == 0 {
        return Err(ConfluenceError::LimitExceeded(format!(
            "fuel ran out before {term} reached a normal form"
        )));
    }
    for site in &sites {
        let (a, b) = step(term, site).expect("site from find_redexes").into_pair();
        let da = explore(&a, fuel - 1, branch_limit, memo)?;
        let db = if a == b {
            da.clone()
        } else {
            explore(&b, fuel - 1, branch_limit, memo)?
        };
        for x in &da {
            for y in &db {
                out.insert(SerDist(SurfaceDistribution::half_mix(
                    x.0.clone(),
                    y.0.clone(),
                )));
                if out.len() > branch_limit {
                    return Err(ConfluenceError::LimitExceeded(format!(
                        "more than {branch_limit} distinct distributions tracked"
                    )));
                }
            }
        }
    }
    memo.insert(key, out.clone());
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct UniformityReport {
    pub depths: Vec<u64>,
    pub equal: bool,
}

#[derive(Debug, Error)]
pub enum UniformityError {
    #[error("derivation does not check against the term: {0}")]
    BadDerivation(#[from] crate::derivation::CheckError),
    #[error("derivation subject differs from the evaluated term")]
    SubjectMismatch,
    #[error("typed term exhausted fuel under {strategy:?}; this violates typed termination: {source}")]
    TypedDivergence {
        strategy: Strategy,
        source: EvalError,
    },
}

/// Evaluates a typed term under each strategy and compares the branch
/// depths (Definition 6 sizes), which typed uniformity says must coincide.
pub fn uniformity_check(
    term: &Term,
    derivation: &crate::derivation::Derivation,
    strategies: &[Strategy],
    fuel: u64,
) -> Result<UniformityReport, UniformityError> {
    crate::derivation::check_derivation(derivation)?;
    if &derivation.conclusion.subject != term {
        return Err(UniformityError::SubjectMismatch);
    }
    let mut depths = Vec::new();
    for s in strategies {
        let report = evaluate(term, s, fuel).map_err(|e| UniformityError::TypedDivergence {
            strategy: s.clone(),
            source: e,
        })?;
        depths.push(report.branch_depth);
    }
    let equal = depths.windows(2).all(|w| w[0] == w[1]);
    Ok(UniformityReport { depths, equal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigRational, One};

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    fn lam(x: &str, b: Term) -> Term {
        Term::lam(x, b).unwrap()
    }

    fn id() -> Term {
        lam("x", v("x"))
    }

    fn t_true() -> Term {
        lam("x", lam("y", v("x")))
    }

    fn t_false() -> Term {
        lam("x", lam("y", v("y")))
    }

    fn coin() -> Term {
        Term::proj(Term::pair(t_true(), t_false()))
    }

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn coin_is_a_fair_coin() {
        let report = evaluate(&coin(), &Strategy::LeftmostOutermost, 100).unwrap();
        assert_eq!(report.distribution.len(), 2);
        assert_eq!(report.distribution.probability_of(&t_true()), half());
        assert_eq!(report.distribution.probability_of(&t_false()), half());
        assert_eq!(report.branch_depth, 1);
        report.distribution.check_invariants().unwrap();
    }

    #[test]
    fn figure_style_bang_application() {
        // (\!x.<coin, d(x)>)!I => 1/2 <T,I> + 1/2 <F,I>
        let t = Term::app(
            Term::bang_lam("x", Term::pair(coin(), Term::der(v("x")))),
            Term::bang(id()),
        );
        let report = evaluate(&t, &Strategy::LeftmostOutermost, 100).unwrap();
        assert_eq!(
            report.distribution.probability_of(&Term::pair(t_true(), id())),
            half()
        );
        assert_eq!(
            report.distribution.probability_of(&Term::pair(t_false(), id())),
            half()
        );
        assert_eq!(report.branch_depth, 2);
    }

    #[test]
    fn suspended_coin_is_not_evaluated() {
        // (\!x.<x,x>)!coin => point mass on <!coin, !coin>
        let t = Term::app(
            Term::bang_lam("x", Term::pair(v("x"), v("x"))),
            Term::bang(coin()),
        );
        let report = evaluate(&t, &Strategy::LeftmostOutermost, 100).unwrap();
        let expect = Term::pair(Term::bang(coin()), Term::bang(coin()));
        assert!(report.distribution.probability_of(&expect).is_one());
    }

    #[test]
    fn omega_exhausts_fuel() {
        // Delta = \!x. d(x) !d(x); Omega = Delta !Delta
        let delta = Term::bang_lam(
            "x",
            Term::app(Term::der(v("x")), Term::bang(Term::der(v("x")))),
        );
        let omega = Term::app(delta.clone(), Term::bang(delta));
        let err = evaluate(&omega, &Strategy::LeftmostOutermost, 10_000).unwrap_err();
        match err {
            EvalError::FuelExhausted { fuel, .. } => assert_eq!(fuel, 10_000),
        }
    }

    #[test]
    fn strategies_agree_on_figure_example() {
        let t = Term::app(
            Term::bang_lam("x", Term::pair(coin(), Term::der(v("x")))),
            Term::bang(id()),
        );
        let reports: Vec<_> = Strategy::all(7)
            .iter()
            .map(|s| evaluate(&t, s, 100).unwrap())
            .collect();
        for r in &reports[1..] {
            assert_eq!(r.distribution, reports[0].distribution);
            assert_eq!(r.branch_depth, reports[0].branch_depth);
        }
    }

    #[test]
    fn confluence_oracle_examples() {
        let r = confluence_oracle(&coin(), 100, 64).unwrap();
        assert!(r.agree);
        assert_eq!(r.distributions[0].len(), 2);

        let t = Term::app(
            Term::bang_lam("x", Term::pair(coin(), Term::der(v("x")))),
            Term::bang(id()),
        );
        let r = confluence_oracle(&t, 100, 64).unwrap();
        assert!(r.agree);

        let t = Term::app(id(), Term::app(lam("y", v("y")), lam("z", v("z"))));
        let r = confluence_oracle(&t, 100, 64).unwrap();
        assert!(r.agree);
        assert!(r.distributions[0].probability_of(&lam("z", v("z"))).is_one());
    }
}
