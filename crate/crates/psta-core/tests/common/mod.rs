//! Shared test support: enumeration of closed normal values, a
//! value-inhabitation oracle for forall/bang-lazy types, and a random
//! generator of raw (untyped) terms with strictly linear binders.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use psta_core::term::Term;
use psta_core::types::Type;

/// Enumerate all alpha-distinct closed terms of the value grammar
/// `V ::= x | \x.V | VV | <V,V>` that are normal (no applied lambda),
/// s-linear, and of size at most `max_size`.
pub fn enumerate_closed_values(max_size: usize) -> Vec<Term> {
    // generate open value terms with binders named v0..v{d-1}
    fn gen(size: usize, depth: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if size == 0 {
            return out;
        }
        if size >= 1 {
            for i in 0..depth {
                out.push(Term::var(format!("v{i}")));
            }
        }
        if size >= 2 {
            // \v{depth}. body
            for body in gen(size - 1, depth + 1) {
                if let Ok(t) = Term::lam(format!("v{depth}"), body) {
                    out.push(t);
                }
            }
        }
        if size >= 3 {
            for lsize in 1..size - 1 {
                let rsize = size - 1 - lsize;
                for l in gen(lsize, depth) {
                    // application head must not be a lambda (normality)
                    if matches!(l, Term::Lam(..)) {
                        continue;
                    }
                    for r in gen(rsize, depth) {
                        out.push(Term::app(l.clone(), r));
                    }
                }
                for l in gen(lsize, depth) {
                    for r in gen(rsize, depth) {
                        out.push(Term::pair(l.clone(), r));
                    }
                }
            }
        }
        out
    }

    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for size in 1..=max_size {
        for t in gen(size, 0) {
            if t.size() == size && t.is_value() && t.is_s_linear() {
                let key = t.canonical_key();
                if seen.insert(key) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// Decide whether a closed normal value inhabits a closed forall/bang-lazy
/// type. Sound and complete on this fragment: lazy types have no negative
/// foralls, so spine heads always carry quantifier-free types and no
/// instantiation guessing is needed.
pub fn value_inhabits(term: &Term, ty: &Type) -> bool {
    let mut fresh = 0usize;
    check_value(term, ty, &BTreeMap::new(), &mut fresh)
}

fn check_value(
    term: &Term,
    ty: &Type,
    env: &BTreeMap<String, Type>,
    fresh: &mut usize,
) -> bool {
    match ty {
        Type::Forall(a, body) => {
            // keep the eigenvariable rigid and distinct
            let name = format!("#rigid{fresh}");
            *fresh += 1;
            let opened = body.substitute(a, &Type::var(name));
            check_value(term, &opened, env, fresh)
        }
        Type::Imp(ant, cons) => match term {
            Term::Lam(x, body) => {
                if !ant.is_linear() {
                    return false;
                }
                let mut env2 = env.clone();
                env2.insert(x.clone(), (**ant).clone());
                // the binder must actually be consumed
                body.count_free(x) == 1 && check_value(body, cons, &env2, fresh)
            }
            _ => check_neutral(term, env, fresh).map_or(false, |t| &t == ty),
        },
        Type::With(l, r) => match term {
            Term::Pair(a, b2) => {
                // the bare-pair rule types closed components only
                a.is_closed()
                    && b2.is_closed()
                    && check_value(a, l, &BTreeMap::new(), fresh)
                    && check_value(b2, r, &BTreeMap::new(), fresh)
            }
            _ => check_neutral(term, env, fresh).map_or(false, |t| &t == ty),
        },
        Type::Var(_) => check_neutral(term, env, fresh).map_or(false, |t| &t == ty),
        Type::Bang(_) => false,
    }
}

/// Synthesize the type of a neutral spine `x a1 ... ak`.
fn check_neutral(
    term: &Term,
    env: &BTreeMap<String, Type>,
    fresh: &mut usize,
) -> Option<Type> {
    match term {
        Term::Var(x) => env.get(x).cloned(),
        Term::App(f, a) => {
            let tf = check_neutral(f, env, fresh)?;
            match tf {
                Type::Imp(ant, cons) => {
                    // split: the argument may use only its own free variables
                    let used: BTreeMap<String, Type> = env
                        .iter()
                        .filter(|(k, _)| a.free_vars().contains(*k))
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    if check_value(a, &ant, &used, fresh) {
                        Some(*cons)
                    } else {
                        None
                    }
                }
                _ => None,
            }
        }
        _ => None,
    }
}

/// Random raw terms with strictly linear binders (each lambda binder used
/// exactly once), mixing all four redex kinds. Used by the single-step
/// join-property tests, which need the paper's exactly-once reading.
pub struct RawGen {
    pub rng: ChaCha8Rng,
}

impl RawGen {
    pub fn term(&mut self, budget: usize) -> Term {
        self.go(budget, &mut 0)
    }

    fn go(&mut self, budget: usize, supply: &mut usize) -> Term {
        let id = {
            *supply += 1;
            Term::lam(format!("i{supply}"), Term::var(format!("i{supply}"))).unwrap()
        };
        if budget < 6 {
            return id;
        }
        match self.rng.gen_range(0..6) {
            // beta: (\x. C[x]) N
            0 => {
                let arg = self.go(budget / 2, supply);
                *supply += 1;
                let x = format!("x{supply}");
                let body = self.linear_context(Term::var(x.clone()), budget / 3, supply);
                Term::app(Term::lam(x, body).unwrap(), arg)
            }
            // bang-beta: (\!x. C[d(x)]) !N
            1 => {
                let arg = self.go(budget / 2, supply);
                *supply += 1;
                let x = format!("b{supply}");
                let uses = self.rng.gen_range(1..=2);
                let mut body = Term::der(Term::var(x.clone()));
                for _ in 1..uses {
                    body = Term::app(body, Term::der(Term::var(x.clone())));
                }
                Term::app(Term::bang_lam(x, body), Term::bang(arg))
            }
            // proj of a pair
            2 => {
                let l = self.go(budget / 2, supply);
                let r = self.go(budget / 2, supply);
                Term::proj(Term::pair(l, r))
            }
            // copy of a value (bound at the same value: canonical)
            3 => {
                let v = self.value(budget / 3, supply);
                *supply += 1;
                let a = format!("a{supply}");
                let b2 = format!("c{supply}");
                Term::copy(
                    v.clone(),
                    v,
                    a.clone(),
                    b2.clone(),
                    Term::var(a),
                    Term::var(b2),
                )
                .unwrap()
            }
            // plain pair of smaller terms
            4 => Term::pair(self.go(budget / 2, supply), self.go(budget / 2, supply)),
            // nested application of identities
            _ => {
                let f = self.go(budget / 2, supply);
                Term::app(id, f)
            }
        }
    }

    /// A term using `hole` exactly once, outside any ! or d.
    fn linear_context(&mut self, hole: Term, budget: usize, supply: &mut usize) -> Term {
        if budget < 4 {
            return hole;
        }
        match self.rng.gen_range(0..3) {
            0 => Term::pair(hole, self.go(budget / 2, supply)),
            1 => {
                *supply += 1;
                let i = format!("i{supply}");
                Term::app(Term::lam(i.clone(), Term::var(i)).unwrap(), hole)
            }
            _ => hole,
        }
    }

    fn value(&mut self, budget: usize, supply: &mut usize) -> Term {
        *supply += 1;
        let x = format!("v{supply}");
        if budget >= 8 && self.rng.gen_bool(0.4) {
            let l = self.value(budget / 2, supply);
            let r = self.value(budget / 2, supply);
            Term::pair(l, r)
        } else {
            Term::lam(x.clone(), Term::var(x)).unwrap()
        }
    }
}
