//! Direct probabilistic Turing machine simulation with exact output
//! distributions, plus the recognition predicates (error-bounded and
//! majority-based).
//!
//! Configurations mirror the term encoding exactly: the tape is split into
//! a left part (nearest cell first), and a right part whose head element is
//! the scanned cell. Initialization writes the input into the left part,
//! leaving the head on the first blank. The output string is read as
//! left-part (nearest first) concatenated with the right part, which
//! returns `input . 0-padding` for a machine that does nothing.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, One, Zero};
use thiserror::Error;

pub type Bits = Vec<bool>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Move {
    Left,
    Right,
}

/// `(state, read) -> (next state, written bit, move)`.
pub type TransitionTable = BTreeMap<(Bits, bool), (Bits, bool, Move)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtmSpec {
    pub state_width: usize,
    pub initial: Bits,
    pub accepting: BTreeSet<Bits>,
    pub rejecting: BTreeSet<Bits>,
    pub delta0: TransitionTable,
    pub delta1: TransitionTable,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtmError {
    #[error("state width mismatch: expected {expected} bits, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("accepting and rejecting states overlap")]
    VerdictOverlap,
    #[error("transition table {table} is not total: missing ({state}, {read})")]
    NonTotalTable {
        table: &'static str,
        state: String,
        read: u8,
    },
    #[error("tape overflow: a step would read past the {tape_len}-cell tape")]
    TapeOverflow { tape_len: usize },
    #[error("tape length {tape_len} is shorter than the input ({input_len})")]
    TapeTooShort { tape_len: usize, input_len: usize },
    #[error("a computation path is not in a final state after the step budget (state {0})")]
    UnhaltedPath(String),
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

pub fn bits_from_str(s: &str) -> Option<Bits> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

impl PtmSpec {
    /// All states mentioned anywhere in the machine.
    pub fn states(&self) -> BTreeSet<Bits> {
        let mut s: BTreeSet<Bits> = BTreeSet::new();
        s.insert(self.initial.clone());
        s.extend(self.accepting.iter().cloned());
        s.extend(self.rejecting.iter().cloned());
        for table in [&self.delta0, &self.delta1] {
            for ((q, _), (q2, _, _)) in table {
                s.insert(q.clone());
                s.insert(q2.clone());
            }
        }
        s
    }

    pub fn validate(&self) -> Result<(), PtmError> {
        for q in self.states() {
            if q.len() != self.state_width {
                return Err(PtmError::WidthMismatch {
                    expected: self.state_width,
                    found: q.len(),
                });
            }
        }
        if self.accepting.intersection(&self.rejecting).next().is_some() {
            return Err(PtmError::VerdictOverlap);
        }
        for (name, table) in [("delta0", &self.delta0), ("delta1", &self.delta1)] {
            for q in self.states() {
                for read in [false, true] {
                    if !table.contains_key(&(q.clone(), read)) {
                        return Err(PtmError::NonTotalTable {
                            table: name,
                            state: bits_to_string(&q),
                            read: read as u8,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The table extended to every state in `{0,1}^k`, with unmentioned
    /// states looping in place (write back, move right). Unreachable by
    /// construction, but the compiled term needs a total truth table.
    pub fn totalized_table(&self, table: &TransitionTable) -> TransitionTable {
        let mut out = table.clone();
        for q in all_bit_vectors(self.state_width) {
            for read in [false, true] {
                out.entry((q.clone(), read))
                    .or_insert_with(|| (q.clone(), read, Move::Right));
            }
        }
        out
    }
}

pub fn all_bit_vectors(width: usize) -> Vec<Bits> {
    let mut out = vec![vec![]];
    for _ in 0..width {
        let mut next = Vec::with_capacity(out.len() * 2);
        for v in out {
            let mut v0 = v.clone();
            v0.push(false);
            next.push(v0);
            let mut v1 = v;
            v1.push(true);
            next.push(v1);
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Config {
    left: Bits,
    right: Bits,
    state: Bits,
}

fn step_config(
    cfg: &Config,
    table: &TransitionTable,
    name: &'static str,
    tape_len: usize,
) -> Result<Config, PtmError> {
    if cfg.right.is_empty() {
        return Err(PtmError::TapeOverflow { tape_len });
    }
    let read = cfg.right[0];
    let (next, write, mv) = table.get(&(cfg.state.clone(), read)).ok_or_else(|| {
        PtmError::NonTotalTable {
            table: name,
            state: bits_to_string(&cfg.state),
            read: read as u8,
        }
    })?;
    let mut out = cfg.clone();
    out.state = next.clone();
    match mv {
        Move::Right => {
            out.left.insert(0, *write);
            out.right.remove(0);
        }
        Move::Left => {
            if cfg.left.is_empty() {
                // left edge: the head stays put, the write lands in place
                out.right[0] = *write;
            } else {
                let bl = out.left.remove(0);
                out.right[0] = *write;
                out.right.insert(0, bl);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Exact distribution of final tapes and verdicts after exactly `steps`
/// fair-coin transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDistribution {
    pub strings: BTreeMap<Bits, BigRational>,
    pub verdicts: BTreeMap<Verdict, BigRational>,
}

impl OutputDistribution {
    pub fn accept_mass(&self) -> BigRational {
        self.verdicts
            .get(&Verdict::Accept)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn reject_mass(&self) -> BigRational {
        self.verdicts
            .get(&Verdict::Reject)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total_mass(&self) -> BigRational {
        self.strings.values().cloned().sum()
    }
}

/// Runs the machine for exactly `steps` transitions on a `tape_len`-cell
/// tape, enumerating coin sequences with early merging of identical
/// configurations. Every path must end in a final (accepting or rejecting)
/// state.
pub fn ptm_run(
    spec: &PtmSpec,
    input: &[bool],
    steps: usize,
    tape_len: usize,
) -> Result<OutputDistribution, PtmError> {
    spec.validate()?;
    if tape_len < input.len() {
        return Err(PtmError::TapeTooShort {
            tape_len,
            input_len: input.len(),
        });
    }
    let init = Config {
        left: input.to_vec(),
        right: vec![false; tape_len - input.len()],
        state: spec.initial.clone(),
    };
    let half = BigRational::new(1.into(), 2.into());
    let mut dist: BTreeMap<Config, BigRational> = BTreeMap::new();
    dist.insert(init, BigRational::one());
    for _ in 0..steps {
        let mut next: BTreeMap<Config, BigRational> = BTreeMap::new();
        for (cfg, p) in &dist {
            let c0 = step_config(cfg, &spec.delta0, "delta0", tape_len)?;
            let c1 = step_config(cfg, &spec.delta1, "delta1", tape_len)?;
            *next.entry(c0).or_insert_with(BigRational::zero) += &half * p;
            *next.entry(c1).or_insert_with(BigRational::zero) += &half * p;
        }
        dist = next;
    }
    let mut strings: BTreeMap<Bits, BigRational> = BTreeMap::new();
    let mut verdicts: BTreeMap<Verdict, BigRational> = BTreeMap::new();
    for (cfg, p) in &dist {
        let verdict = if spec.accepting.contains(&cfg.state) {
            Verdict::Accept
        } else if spec.rejecting.contains(&cfg.state) {
            Verdict::Reject
        } else {
            return Err(PtmError::UnhaltedPath(bits_to_string(&cfg.state)));
        };
        let mut tape = cfg.left.clone();
        tape.extend(cfg.right.iter().copied());
        *strings.entry(tape).or_insert_with(BigRational::zero) += p.clone();
        *verdicts.entry(verdict).or_insert_with(BigRational::zero) += p.clone();
    }
    Ok(OutputDistribution { strings, verdicts })
}

/// Per-input verdict distribution, abstracted from where it came from
/// (oracle run or decoded term evaluation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerdictDistribution {
    pub accept: BigRational,
    pub reject: BigRational,
}

impl VerdictDistribution {
    pub fn new(accept: BigRational, reject: BigRational) -> VerdictDistribution {
        VerdictDistribution { accept, reject }
    }
}

/// Error-bounded recognition: members must accept with mass at least
/// `1 - eps`, non-members reject likewise. Exact rational comparison.
pub fn recognizes_with_error(
    results: &BTreeMap<Bits, VerdictDistribution>,
    membership: &BTreeMap<Bits, bool>,
    eps: &BigRational,
) -> bool {
    let threshold = BigRational::one() - eps;
    membership.iter().all(|(input, member)| {
        let d = results
            .get(input)
            .unwrap_or_else(|| panic!("no result for input {}", bits_to_string(input)));
        if *member {
            d.accept >= threshold
        } else {
            d.reject >= threshold
        }
    })
}

/// Majority recognition with ties passing both clauses.
pub fn accepts_by_majority(
    results: &BTreeMap<Bits, VerdictDistribution>,
    membership: &BTreeMap<Bits, bool>,
) -> bool {
    membership.iter().all(|(input, member)| {
        let d = results
            .get(input)
            .unwrap_or_else(|| panic!("no result for input {}", bits_to_string(input)));
        if *member {
            d.accept >= d.reject
        } else {
            d.reject >= d.accept
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i32, d: i32) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// One-state machine: both branches write their coin bit and move right.
    pub(crate) fn coin_writer() -> PtmSpec {
        let q0 = vec![false];
        let mut delta0 = TransitionTable::new();
        let mut delta1 = TransitionTable::new();
        for read in [false, true] {
            delta0.insert((q0.clone(), read), (q0.clone(), false, Move::Right));
            delta1.insert((q0.clone(), read), (q0.clone(), true, Move::Right));
        }
        PtmSpec {
            state_width: 1,
            initial: q0.clone(),
            accepting: BTreeSet::from([q0]),
            rejecting: BTreeSet::new(),
            delta0,
            delta1,
        }
    }

    #[test]
    fn deterministic_machine_is_a_point_mass() {
        let q0 = vec![false];
        let mut table = TransitionTable::new();
        for read in [false, true] {
            table.insert((q0.clone(), read), (q0.clone(), read, Move::Left));
        }
        let spec = PtmSpec {
            state_width: 1,
            initial: q0.clone(),
            accepting: BTreeSet::from([q0]),
            rejecting: BTreeSet::new(),
            delta0: table.clone(),
            delta1: table,
        };
        let out = ptm_run(&spec, &[true, false], 2, 3).unwrap();
        assert_eq!(out.strings.len(), 1);
        assert!(out.total_mass().is_one());
    }

    #[test]
    fn coin_writer_splits_evenly() {
        let spec = coin_writer();
        let out = ptm_run(&spec, &[], 1, 1).unwrap();
        assert_eq!(out.strings.len(), 2);
        assert_eq!(out.strings[&vec![false]], ratio(1, 2));
        assert_eq!(out.strings[&vec![true]], ratio(1, 2));
    }

    #[test]
    fn reconverging_paths_merge() {
        // both branches write 1 and move right regardless of the coin
        let q0 = vec![false];
        let mut table = TransitionTable::new();
        for read in [false, true] {
            table.insert((q0.clone(), read), (q0.clone(), true, Move::Right));
        }
        let spec = PtmSpec {
            state_width: 1,
            initial: q0.clone(),
            accepting: BTreeSet::from([q0]),
            rejecting: BTreeSet::new(),
            delta0: table.clone(),
            delta1: table,
        };
        let out = ptm_run(&spec, &[], 2, 2).unwrap();
        assert_eq!(out.strings.len(), 1);
        assert_eq!(out.strings[&vec![true, true]], BigRational::one());
    }

    #[test]
    fn overflow_is_an_error() {
        let spec = coin_writer();
        let err = ptm_run(&spec, &[false], 1, 1).unwrap_err();
        assert!(matches!(err, PtmError::TapeOverflow { .. }));
    }

    #[test]
    fn recognition_predicates() {
        let make = |acc: (i32, i32)| VerdictDistribution {
            accept: ratio(acc.0, acc.1),
            reject: BigRational::one() - ratio(acc.0, acc.1),
        };
        let mut results = BTreeMap::new();
        results.insert(vec![false], make((3, 4)));
        results.insert(vec![true], make((1, 4)));
        let mut membership = BTreeMap::new();
        membership.insert(vec![false], true);
        membership.insert(vec![true], false);
        assert!(recognizes_with_error(&results, &membership, &ratio(1, 4)));
        assert!(!recognizes_with_error(&results, &membership, &ratio(1, 5)));
        assert!(accepts_by_majority(&results, &membership));

        // a fair coin ties: PP boundary passes at eps = 1/2, majority passes
        let mut results = BTreeMap::new();
        results.insert(vec![false], make((1, 2)));
        let mut membership = BTreeMap::new();
        membership.insert(vec![false], true);
        assert!(recognizes_with_error(&results, &membership, &ratio(1, 2)));
        assert!(!recognizes_with_error(&results, &membership, &ratio(1, 4)));
        assert!(accepts_by_majority(&results, &membership));

        // quarter-accepting on a member fails majority
        let mut results = BTreeMap::new();
        results.insert(vec![false], make((1, 4)));
        assert!(!accepts_by_majority(&results, &membership));
    }
}
