//! Random generation of closed checking derivations, used by the
//! confluence / subject-reduction / uniformity property suites. Generating
//! well-typed terms directly is undecidable territory; generating
//! derivations from correct-by-construction recipes is easy and gives the
//! property suites their typed inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builders as b;
use crate::derivation::Derivation;
use crate::encode;
use crate::types::{bool_type, unit_type};

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Cap on the subject size (recipes back off to leaves near it).
    pub max_size: usize,
    /// Cap on the number of proj sites generated.
    pub max_projs: usize,
    /// Include arithmetic recipes (bigger subjects, deep sp/m stacks).
    pub arithmetic: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_size: 30,
            max_projs: 2,
            arithmetic: false,
        }
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    projs_left: usize,
}

impl Generator {
    pub fn new(seed: u64, cfg: GenConfig) -> Generator {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            projs_left: cfg.max_projs,
            cfg,
        }
    }

    /// One closed derivation per call.
    pub fn derivation(&mut self) -> Derivation {
        self.projs_left = self.cfg.max_projs;
        let budget = self.cfg.max_size;
        if self.cfg.arithmetic && self.rng.gen_bool(0.4) {
            return self.arithmetic();
        }
        match self.rng.gen_range(0..3) {
            0 => self.bool_valued(budget),
            1 => self.unit_valued(budget),
            _ => {
                let l = self.bool_valued(budget / 2);
                let r = self.unit_valued(budget / 2);
                b::tensor_pair(l, r)
            }
        }
    }

    fn size_of(d: &Derivation) -> usize {
        d.conclusion.subject.size()
    }

    /// A closed derivation at type B.
    fn bool_valued(&mut self, budget: usize) -> Derivation {
        if budget < 14 {
            return encode::bool_term(self.rng.gen_bool(0.5));
        }
        let pick = self.rng.gen_range(0..6);
        let d = match pick {
            // (\x.x) M
            0 => {
                let inner = self.bool_valued(budget.saturating_sub(4));
                b::app(b::id_at(bool_type()), inner)
            }
            // (\!x. d(x)) !M
            1 => {
                let inner = self.bool_valued(budget.saturating_sub(6));
                let body = b::m_merge(b::ax("gx", bool_type()), &["gx"], "gb");
                b::app(b::blam(body, "gb"), b::sp(inner, &[]))
            }
            // proj <M, N>
            2 if self.projs_left > 0 => {
                self.projs_left -= 1;
                let l = self.bool_valued((budget / 2).saturating_sub(2));
                let r = self.bool_valued((budget / 2).saturating_sub(2));
                b::with_e(b::bare_pair(l, r))
            }
            // proj(copy^{0} M as x,y in <x, y>)
            3 => {
                let scrutinee = self.bool_valued(budget.saturating_sub(12));
                let m1 = b::ax("cx", bool_type());
                let m2 = b::ax("cy", bool_type());
                b::with_e(b::with_i(scrutinee, m1, m2, encode::bool_term(false)))
            }
            // let I be I in M
            4 => {
                let u = self.unit_valued((budget / 3).max(2));
                let inner = self.bool_valued(budget / 2);
                b::let_unit(u, inner)
            }
            _ => encode::bool_term(self.rng.gen_bool(0.5)),
        };
        if Self::size_of(&d) > self.cfg.max_size {
            encode::bool_term(self.rng.gen_bool(0.5))
        } else {
            d
        }
    }

    /// A closed derivation at type 1.
    fn unit_valued(&mut self, budget: usize) -> Derivation {
        if budget < 4 {
            return b::unit_i();
        }
        let pick = self.rng.gen_range(0..5);
        let d = match pick {
            0 => b::app(b::id_at(unit_type()), self.unit_valued(budget.saturating_sub(4))),
            1 => {
                let inner = self.unit_valued(budget.saturating_sub(6));
                let body = b::m_merge(b::ax("ux", unit_type()), &["ux"], "ub");
                b::app(b::blam(body, "ub"), b::sp(inner, &[]))
            }
            // E_B applied to a boolean
            2 if budget >= 24 => {
                let inner = self.bool_valued(budget.saturating_sub(12));
                b::app(encode::eraser(&encode::DataShape::Bool), inner)
            }
            3 => {
                let u1 = self.unit_valued(budget / 2);
                let u2 = self.unit_valued(budget / 2);
                b::let_unit(u1, u2)
            }
            _ => b::unit_i(),
        };
        if Self::size_of(&d) > self.cfg.max_size {
            b::unit_i()
        } else {
            d
        }
    }

    /// Arithmetic recipes: applied successor / addition / multiplication /
    /// length, with deep sp and m structure.
    fn arithmetic(&mut self) -> Derivation {
        match self.rng.gen_range(0..4) {
            0 => {
                let n = self.rng.gen_range(0..3usize);
                b::app(encode::succ_term(1), encode::numeral(n, 1))
            }
            1 => {
                let n = self.rng.gen_range(0..3usize);
                let m = self.rng.gen_range(0..3usize);
                b::app(
                    b::app(encode::add_term(1, 1), encode::numeral(n, 1)),
                    encode::numeral(m, 1),
                )
            }
            2 => {
                let n = self.rng.gen_range(0..3usize);
                let m = self.rng.gen_range(0..3usize);
                b::app(
                    b::app(encode::mult_term(1, 1), encode::numeral(n, 1)),
                    b::sp(encode::numeral(m, 1), &[]),
                )
            }
            _ => {
                let len = self.rng.gen_range(0..3usize);
                let bits: Vec<bool> = (0..len).map(|_| self.rng.gen_bool(0.5)).collect();
                b::app(encode::len_term(1), encode::string_term(&bits, 1))
            }
        }
    }
}
