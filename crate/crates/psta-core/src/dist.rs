//! Exact surface distributions: probability mass over alpha-classes of
//! surface normal forms, in arbitrary-precision rational arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Zero};

use crate::surface::is_snf;
use crate::term::{Canon, Term};

/// A probability distribution over surface normal forms, keyed by the
/// alpha-canonical form. Each entry keeps a representative term for
/// printing. All masses are exact rationals in (0, 1] summing to 1, and
/// every denominator is a power of two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceDistribution {
    mass: BTreeMap<Canon, (Term, BigRational)>,
}

impl SurfaceDistribution {
    pub fn point(term: Term) -> SurfaceDistribution {
        let mut mass = BTreeMap::new();
        mass.insert(term.canonical_key(), (term, BigRational::one()));
        SurfaceDistribution { mass }
    }

    /// `1/2 * a + 1/2 * b`.
    pub fn half_mix(a: SurfaceDistribution, b: SurfaceDistribution) -> SurfaceDistribution {
        let half = BigRational::new(1.into(), 2.into());
        let mut mass = BTreeMap::new();
        for (key, (term, p)) in a.mass.into_iter().chain(b.mass) {
            let entry = mass
                .entry(key)
                .or_insert_with(|| (term, BigRational::zero()));
            entry.1 += &half * p;
        }
        SurfaceDistribution { mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total_mass(&self) -> BigRational {
        self.mass.values().map(|(_, p)| p.clone()).sum()
    }

    pub fn probability_of(&self, term: &Term) -> BigRational {
        self.mass
            .get(&term.canonical_key())
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &BigRational)> {
        self.mass.values().map(|(t, p)| (t, p))
    }

    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.mass.values().map(|(t, _)| t)
    }

    /// Entries sorted by descending probability, ties broken by the printed
    /// term text.
    pub fn sorted_entries(&self) -> Vec<(&Term, &BigRational)> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.sort_by(|(t1, p1), (t2, p2)| {
            p2.cmp(p1)
                .then_with(|| crate::syntax::print_term(t1).cmp(&crate::syntax::print_term(t2)))
        });
        entries
    }

    /// Validates the stated invariants: mass exactly 1, every support
    /// element an SNF, every probability in (0,1], power-of-two denominators.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.total_mass().is_one() {
            return Err(format!("total mass {} != 1", self.total_mass()));
        }
        for (term, p) in self.iter() {
            if p <= &BigRational::zero() || p > &BigRational::one() {
                return Err(format!("probability {p} out of (0,1]"));
            }
            let denom = p.denom();
            let mut d = denom.clone();
            while (&d % 2u8).is_zero() {
                d /= 2u8;
            }
            if !d.is_one() {
                return Err(format!("denominator {denom} is not a power of two"));
            }
            if !is_snf(term) {
                return Err(format!("support element is not an SNF: {term}"));
            }
        }
        Ok(())
    }

    /// Remap every support element, merging masses of collapsed keys.
    /// Used by the encodings layer to decode distributions over encoded
    /// normal forms into distributions over plain data.
    pub fn map_support<T: Ord, F: FnMut(&Term) -> T>(&self, mut f: F) -> BTreeMap<T, BigRational> {
        let mut out: BTreeMap<T, BigRational> = BTreeMap::new();
        for (term, p) in self.iter() {
            *out.entry(f(term)).or_insert_with(BigRational::zero) += p.clone();
        }
        out
    }
}

impl fmt::Display for SurfaceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries = self.sorted_entries();
        let mut first = true;
        for (t, p) in entries {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{p}*{t}")?;
        }
        Ok(())
    }
}
