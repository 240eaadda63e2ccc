//! Data encodings with checking derivations: booleans, indexed strings and
//! numerals, arithmetic, polynomials, erasers, truth tables, transition
//! functions, machine configurations, and the full machine-to-term
//! compiler.

use std::collections::BTreeMap;

use num::BigRational;
use thiserror::Error;

use crate::builders as b;
use crate::derivation::{rank, Derivation};
use crate::dist::SurfaceDistribution;
use crate::ptm::{all_bit_vectors, Bits, Move, PtmSpec, TransitionTable};
use crate::term::Term;
use crate::transform::weighted_substitute;
use crate::types::{bool_type, tensor_type, unit_type, Type};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("transition table is not total: missing entry for ({state}, {read})")]
    NonTotalTable { state: String, read: u8 },
    #[error("polynomial must have nonnegative coefficients and at least one of them")]
    UnsupportedPolynomial,
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("term is not a recognizable normal form: {0}")]
    DecodeFailure(String),
    #[error("weighted substitution failed during assembly: {0}")]
    Assembly(#[from] crate::transform::TransformError),
}

fn tyvar(n: &str) -> Type {
    Type::var(n)
}

fn imp(a: Type, bb: Type) -> Type {
    Type::imp(a, bb).expect("implication")
}

/// `B -o a -o a`, the list-cons type at element variable `a`.
fn cons_ty() -> Type {
    imp(bool_type(), imp(tyvar("a"), tyvar("a")))
}

fn aa() -> Type {
    imp(tyvar("a"), tyvar("a"))
}

// ---------------------------------------------------------------------
// booleans
// ---------------------------------------------------------------------

/// `0 = \x.\y. x (x) y` and `1 = \x.\y. y (x) x`, both at
/// `B = forall a. a -o a -o a (x) a`.
pub fn bool_term(bit: bool) -> Derivation {
    let a = tyvar("a");
    let (fst, snd) = if bit { ("y", "x") } else { ("x", "y") };
    let pair = b::tensor_pair(b::ax(fst, a.clone()), b::ax(snd, a));
    let inner = b::lam(b::lam(pair, "y"), "x");
    b::forall_close(inner, "a")
}

pub fn bool_value(bit: bool) -> Term {
    bool_term(bit).conclusion.subject.clone()
}

pub fn decode_bool(t: &Term) -> Option<bool> {
    for bit in [false, true] {
        if t == &bool_value(bit) {
            return Some(bit);
        }
    }
    None
}

// ---------------------------------------------------------------------
// erasable data shapes and erasers
// ---------------------------------------------------------------------

/// Shapes of erasable data: booleans, the unit, and tensors of those.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataShape {
    Bool,
    Unit,
    Tensor(Box<DataShape>, Box<DataShape>),
}

impl DataShape {
    pub fn ty(&self) -> Type {
        match self {
            DataShape::Bool => bool_type(),
            DataShape::Unit => unit_type(),
            DataShape::Tensor(l, r) => tensor_type(&l.ty(), &r.ty()),
        }
    }

    pub fn tensor(l: DataShape, r: DataShape) -> DataShape {
        DataShape::Tensor(Box::new(l), Box::new(r))
    }
}

/// Right-nested `B^n` shape.
pub fn bits_shape(n: usize) -> DataShape {
    assert!(n >= 1);
    if n == 1 {
        DataShape::Bool
    } else {
        DataShape::tensor(DataShape::Bool, bits_shape(n - 1))
    }
}

pub fn bits_ty(n: usize) -> Type {
    bits_shape(n).ty()
}

/// The eraser `E_shape : shape -o 1`. For booleans this is the
/// `\z. let z I I be x (x) y in (let y be I in x)` gadget; tensors erase
/// componentwise.
pub fn eraser(shape: &DataShape) -> Derivation {
    match shape {
        DataShape::Bool => {
            let z = b::forall_e(b::ax("z", bool_type()), unit_type());
            let applied = b::app(b::app(z, b::unit_i()), b::unit_i());
            let body = b::let_tensor(
                applied,
                "x",
                "y",
                b::let_unit(b::ax("y", unit_type()), b::ax("x", unit_type())),
            );
            b::lam(body, "z")
        }
        DataShape::Unit => b::lam(
            b::let_unit(b::ax("z", unit_type()), b::unit_i()),
            "z",
        ),
        DataShape::Tensor(l, r) => {
            let body = b::let_unit(
                b::app(eraser(l), b::ax("u", l.ty())),
                b::app(eraser(r), b::ax("v", r.ty())),
            );
            let inner = b::let_tensor(b::ax("z", shape.ty()), "u", "v", body);
            b::lam(inner, "z")
        }
    }
}

/// A tuple of boolean literals at `B^n`.
pub fn bits_term(bits: &[bool]) -> Derivation {
    assert!(!bits.is_empty());
    b::tensor_n(bits.iter().map(|&x| bool_term(x)).collect())
}

/// Selection on an erasable payload: `if c then p else q` elaborated as
/// `let (c[T] p q) be u (x) v in (let E_T v be I in u)`; the bit `0`
/// selects the `then` branch.
pub fn if_bool(c: Derivation, then_d: Derivation, else_d: Derivation, shape: &DataShape) -> Derivation {
    let t = shape.ty();
    let selected = b::app(b::app(b::forall_e(c, t.clone()), then_d), else_d);
    b::let_tensor(
        selected,
        "u",
        "v",
        b::let_unit(b::app(eraser(shape), b::ax("v", t.clone())), b::ax("u", t)),
    )
}

// ---------------------------------------------------------------------
// indexed strings
// ---------------------------------------------------------------------

/// `S_i = forall a. !^i(B -o a -o a) -o (a -o a)`.
pub fn string_ty(i: usize) -> Type {
    assert!(i >= 1);
    let inner = imp(Type::bang_n(cons_ty(), i), aa());
    Type::forall("a", inner).unwrap()
}

/// The indexed boolean string `\!c.\z. d^i(c) b1 (... (d^i(c) bn z))`.
pub fn string_term(bits: &[bool], i: usize) -> Derivation {
    assert!(i >= 1);
    let mut acc = b::ax("z", tyvar("a"));
    let cons_names: Vec<String> = (0..bits.len()).map(|j| format!("c{j}")).collect();
    for (j, &bit) in bits.iter().enumerate().rev() {
        acc = b::app(
            b::app(b::ax(cons_names[j].clone(), cons_ty()), bool_term(bit)),
            acc,
        );
    }
    if bits.is_empty() {
        acc = b::m_intro(acc, "c", Type::bang_n(cons_ty(), i - 1));
    } else {
        let refs: Vec<&str> = cons_names.iter().map(|s| s.as_str()).collect();
        acc = b::m_merge(acc, &refs, "c");
        for _ in 1..i {
            acc = b::m_lift(acc, "c");
        }
    }
    b::forall_close(b::blam(b::lam(acc, "z"), "c"), "a")
}

/// Inverse of `string_term` on surface normal forms (any index).
pub fn decode_string(t: &Term) -> Result<Bits, EncodeError> {
    let (c, body) = match t {
        Term::BangLam(c, body) => (c, body),
        _ => return Err(EncodeError::DecodeFailure("expected \\!c".into())),
    };
    let (z, mut cur) = match &**body {
        Term::Lam(z, inner) => (z, &**inner),
        _ => return Err(EncodeError::DecodeFailure("expected \\z".into())),
    };
    let mut bits = Vec::new();
    let mut depth: Option<usize> = None;
    loop {
        match cur {
            Term::Var(v) if v == z => return Ok(bits),
            Term::App(f, rest) => {
                let (head, bit) = match &**f {
                    Term::App(h, b1) => (h, b1),
                    _ => return Err(EncodeError::DecodeFailure("bad cons cell".into())),
                };
                let d = der_depth_of_var(head, c).ok_or_else(|| {
                    EncodeError::DecodeFailure("cons head is not d^i(c)".into())
                })?;
                match depth {
                    None => depth = Some(d),
                    Some(d0) if d0 == d => {}
                    _ => {
                        return Err(EncodeError::DecodeFailure(
                            "inconsistent dereliction depth".into(),
                        ))
                    }
                }
                let bitval = decode_bool(bit).ok_or_else(|| {
                    EncodeError::DecodeFailure("cell payload is not a boolean".into())
                })?;
                bits.push(bitval);
                cur = rest;
            }
            _ => return Err(EncodeError::DecodeFailure("unexpected string body".into())),
        }
    }
}

fn der_depth_of_var(t: &Term, var: &str) -> Option<usize> {
    let mut depth = 0;
    let mut cur = t;
    loop {
        match cur {
            Term::Der(inner) => {
                depth += 1;
                cur = inner;
            }
            Term::Var(v) if v == var && depth >= 1 => return Some(depth),
            _ => return None,
        }
    }
}

// ---------------------------------------------------------------------
// indexed numerals and arithmetic
// ---------------------------------------------------------------------

/// `N_i = forall a. !^i(a -o a) -o a -o a`.
pub fn nat_ty(i: usize) -> Type {
    assert!(i >= 1);
    let inner = imp(Type::bang_n(aa(), i), aa());
    Type::forall("a", inner).unwrap()
}

/// The indexed numeral `\!f.\x. d^i(f)(... (d^i(f) x))`.
pub fn numeral(n: usize, i: usize) -> Derivation {
    assert!(i >= 1);
    let mut acc = b::ax("x", tyvar("a"));
    let names: Vec<String> = (0..n).map(|j| format!("f{j}")).collect();
    for name in names.iter().rev() {
        acc = b::app(b::ax(name.clone(), aa()), acc);
    }
    if n == 0 {
        acc = b::m_intro(acc, "f", Type::bang_n(aa(), i - 1));
    } else {
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        acc = b::m_merge(acc, &refs, "f");
        for _ in 1..i {
            acc = b::m_lift(acc, "f");
        }
    }
    b::forall_close(b::blam(b::lam(acc, "x"), "f"), "a")
}

pub fn decode_numeral(t: &Term) -> Result<usize, EncodeError> {
    let (f, body) = match t {
        Term::BangLam(f, body) => (f, body),
        _ => return Err(EncodeError::DecodeFailure("expected \\!f".into())),
    };
    let (x, mut cur) = match &**body {
        Term::Lam(x, inner) => (x, &**inner),
        _ => return Err(EncodeError::DecodeFailure("expected \\x".into())),
    };
    let mut n = 0;
    loop {
        match cur {
            Term::Var(v) if v == x => return Ok(n),
            Term::App(h, rest) => {
                if der_depth_of_var(h, f).is_none() {
                    return Err(EncodeError::DecodeFailure("bad numeral head".into()));
                }
                n += 1;
                cur = rest;
            }
            _ => return Err(EncodeError::DecodeFailure("unexpected numeral body".into())),
        }
    }
}

/// `succ_i : N_i -o N_{i+1}`, the term
/// `\n.\!f.\x. d^{i+1}(f) (n !^i(d^{i+1}(f)) x)`.
pub fn succ_term(i: usize) -> Derivation {
    assert!(i >= 1);
    // head branch: f1 : !^i(a -o a) |- d^i(f1) : a -o a
    let mut head = b::ax("g", aa());
    head = b::m_merge(head, &["g"], "f1");
    for _ in 1..i {
        head = b::m_lift(head, "f1");
    }
    // iterator argument: f2 : !^i(a -o a) |- !^i(d^i(f2)) : !^i(a -o a)
    let mut arg = b::ax("f2", aa());
    for _ in 0..i {
        arg = b::sp_same(arg);
    }
    let n = b::forall_e(b::ax("n", nat_ty(i)), tyvar("a"));
    let iterated = b::app(b::app(n, arg), b::ax("x", tyvar("a")));
    let body = b::app(head, iterated);
    let merged = b::m_merge(body, &["f1", "f2"], "f");
    let closed = b::forall_close(b::blam(b::lam(merged, "x"), "f"), "a");
    b::lam(closed, "n")
}

/// `add_{i,j} : N_i -o N_j -o N_{max(i,j)+1}`.
pub fn add_term(i: usize, j: usize) -> Derivation {
    assert!(i >= 1 && j >= 1);
    let l = i.max(j);
    let mk_arg = |depth: usize, name: &str| {
        let mut d = b::ax(name, aa());
        for _ in 0..depth {
            d = b::sp_same(d);
        }
        for _ in depth..l {
            d = b::m_lift(d, name);
        }
        d
    };
    let arg_n = mk_arg(i, "g1");
    let arg_m = mk_arg(j, "g2");
    let n = b::forall_e(b::ax("n", nat_ty(i)), tyvar("a"));
    let m = b::forall_e(b::ax("m", nat_ty(j)), tyvar("a"));
    let m_it = b::app(b::app(m, arg_m), b::ax("x", tyvar("a")));
    let body = b::app(b::app(n, arg_n), m_it);
    let merged = b::m_merge(body, &["g1", "g2"], "f");
    let closed = b::forall_close(b::blam(b::lam(merged, "x"), "f"), "a");
    b::lam(b::lam(closed, "m"), "n")
}

/// `mult_{i,j} : N_i -o !^i N_j -o N_{i+j}`, the term
/// `\n.\!m.\!f. n !^i(d^i(m) (!^j d^{i+j}(f)))`.
pub fn mult_term(i: usize, j: usize) -> Derivation {
    assert!(i >= 1 && j >= 1);
    let mut f_arg = b::ax("f", aa());
    for _ in 0..j {
        f_arg = b::sp_same(f_arg);
    }
    let m_it = b::app(b::forall_e(b::ax("m", nat_ty(j)), tyvar("a")), f_arg);
    let mut lifted = m_it;
    for _ in 0..i {
        lifted = b::sp_same(lifted);
    }
    let body = b::app(b::forall_e(b::ax("n", nat_ty(i)), tyvar("a")), lifted);
    let closed = b::blam(b::forall_close(b::blam(body, "f"), "a"), "m");
    b::lam(closed, "n")
}

/// Evaluate a coefficient list (index = power) at `n`; test oracle and
/// iteration-count helper for the compiler.
pub fn eval_poly(coeffs: &[usize], n: usize) -> usize {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * n.pow(k as u32))
        .sum()
}

pub fn poly_degree(coeffs: &[usize]) -> usize {
    coeffs
        .iter()
        .rposition(|&c| c != 0)
        .unwrap_or(0)
}

/// Horner-composed polynomial: a derivation of
/// `x : !^{deg} N |- p : N_{2 deg + 1}` (for `deg = 0`, `x : N`).
/// Substituting `!^{deg} n` for `x` and evaluating yields `p(n)`.
pub fn poly_to_term(coeffs: &[usize]) -> Result<Derivation, EncodeError> {
    if coeffs.is_empty() {
        return Err(EncodeError::UnsupportedPolynomial);
    }
    let deg = poly_degree(coeffs);
    if deg == 0 {
        // consume the mandated x : N assumption by instantiating it at 1
        let x = b::forall_e(b::ax("x", nat_ty(1)), unit_type());
        let step = b::sp(b::id_at(unit_type()), &[]);
        let eaten = b::app(b::app(x, step), b::unit_i());
        return Ok(b::let_unit(eaten, numeral(coeffs[0], 1)));
    }
    // Horner: h_deg = a_deg ; h_k = a_k + x * h_{k+1}
    let mut h = numeral(coeffs[deg], 1);
    let mut idx = 1;
    for k in (0..deg).rev() {
        let xv = b::ax(format!("x{k}"), nat_ty(1));
        let prod = b::app(b::app(mult_term(1, idx), xv), b::sp_same(h));
        h = b::app(b::app(add_term(1, idx + 1), numeral(coeffs[k], 1)), prod);
        idx += 2;
    }
    // lift every x_k to !^{deg-1} N, then merge them into x : !^deg N
    let mut cur = h;
    let names: Vec<String> = (0..deg).map(|k| format!("x{k}")).collect();
    for (k, name) in names.iter().enumerate() {
        // x_k sits under k promotions already
        for _ in k..deg - 1 {
            cur = b::m_lift(cur, name);
        }
    }
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    cur = b::m_merge(cur, &refs, "x");
    Ok(cur)
}

// ---------------------------------------------------------------------
// string length
// ---------------------------------------------------------------------

/// `len_i : S_i -o N_i`: folds the string with a cons that erases the
/// boolean and counts the cell.
pub fn len_term(i: usize) -> Derivation {
    assert!(i >= 1);
    // step = \x.\y. let E_B x be I in (f0 y)  :  B -o a -o a
    let erased = b::app(eraser(&DataShape::Bool), b::ax("x", bool_type()));
    let count = b::app(b::ax("f0", aa()), b::ax("y", tyvar("a")));
    let body = b::let_unit(erased, count);
    let mut step = b::lam(b::lam(body, "y"), "x");
    for _ in 0..i {
        step = b::sp_same(step);
    }
    let s = b::forall_e(b::ax("s", string_ty(i)), tyvar("a"));
    let folded = b::app(s, step);
    let closed = b::forall_close(b::blam(folded, "f0"), "a");
    b::lam(closed, "s")
}

// ---------------------------------------------------------------------
// truth tables
// ---------------------------------------------------------------------

/// Compile a total boolean function `{0,1}^in -> {0,1}^out` into a term of
/// type `B^in -o B^out`: the table is laid out as a complete binary tree
/// of output tuples and the input bits select a path, erasing the
/// discarded subtrees.
pub fn table_term(
    table: &BTreeMap<Bits, Bits>,
    in_bits: usize,
    out_bits: usize,
) -> Result<Derivation, EncodeError> {
    assert!(in_bits >= 1 && out_bits >= 1);
    for key in all_bit_vectors(in_bits) {
        match table.get(&key) {
            Some(v) if v.len() == out_bits => {}
            Some(_) => {
                return Err(EncodeError::WidthMismatch(format!(
                    "output width for key {key:?}"
                )))
            }
            None => {
                return Err(EncodeError::NonTotalTable {
                    state: crate::ptm::bits_to_string(&key),
                    read: 0,
                })
            }
        }
    }
    fn tree(table: &BTreeMap<Bits, Bits>, prefix: &mut Bits, remaining: usize) -> Derivation {
        if remaining == 0 {
            bits_term(&table[prefix])
        } else {
            prefix.push(false);
            let left = tree(table, prefix, remaining - 1);
            prefix.pop();
            prefix.push(true);
            let right = tree(table, prefix, remaining - 1);
            prefix.pop();
            b::tensor_pair(left, right)
        }
    }
    fn tree_shape(out_bits: usize, depth: usize) -> DataShape {
        if depth == 0 {
            bits_shape(out_bits)
        } else {
            let sub = tree_shape(out_bits, depth - 1);
            DataShape::tensor(sub.clone(), sub)
        }
    }
    let mut cur = tree(table, &mut Vec::new(), in_bits);
    // select with x1 (the most significant key bit) first
    for sel in 0..in_bits {
        let level = in_bits - sel; // the tree depth before this selection
        let sub = tree_shape(out_bits, level - 1);
        let bname = format!("x{}", sel + 1);
        let l = b::ax("tl", sub.ty());
        let r = b::ax("tr", sub.ty());
        let choice = if_bool(b::ax(bname, bool_type()), l, r, &sub);
        cur = b::let_tensor(cur, "tl", "tr", choice);
    }
    let body = if in_bits == 1 {
        // the single selector variable is the input itself
        rename_free_assumption(cur, "x1", "x")
    } else {
        let binders: Vec<String> = (1..=in_bits).map(|k| format!("x{k}")).collect();
        let refs: Vec<&str> = binders.iter().map(|s| s.as_str()).collect();
        b::let_tensor_n(b::ax("x", bits_ty(in_bits)), &refs, cur)
    };
    Ok(b::lam(body, "x"))
}

fn rename_free_assumption(d: Derivation, old: &str, new: &str) -> Derivation {
    crate::transform::rename_assumption(&d, old, new)
}

// ---------------------------------------------------------------------
// transition functions
// ---------------------------------------------------------------------

/// Encode one deterministic transition table as `B^{k+1} -o B^{k+2}`.
/// Input: state bits then the read bit; output: next-state bits, written
/// bit, move bit (0 = left, 1 = right).
pub fn delta_encode(table: &TransitionTable, k: usize) -> Result<Derivation, EncodeError> {
    let mut bit_table: BTreeMap<Bits, Bits> = BTreeMap::new();
    for state in all_bit_vectors(k) {
        for read in [false, true] {
            let (next, write, mv) = table.get(&(state.clone(), read)).ok_or_else(|| {
                EncodeError::NonTotalTable {
                    state: crate::ptm::bits_to_string(&state),
                    read: read as u8,
                }
            })?;
            if next.len() != k {
                return Err(EncodeError::WidthMismatch("next state width".into()));
            }
            let mut key = state.clone();
            key.push(read);
            let mut val = next.clone();
            val.push(*write);
            val.push(matches!(mv, Move::Right));
            bit_table.insert(key, val);
        }
    }
    table_term(&bit_table, k + 1, k + 2)
}

/// The probabilistic transition function
/// `\x. proj(copy^{0^{k+1}} x as x0,x1 in <d0 x0, d1 x1>) : B^{k+1} -o B^{k+2}`.
pub fn delta_p_term(d0: Derivation, d1: Derivation, k: usize) -> Derivation {
    let in_ty = bits_ty(k + 1);
    assert_eq!(d0.conclusion.ty, imp(in_ty.clone(), bits_ty(k + 2)));
    assert_eq!(d1.conclusion.ty, d0.conclusion.ty);
    let n = b::ax("x", in_ty);
    let m1 = b::app(d0, b::ax("x0", bits_ty(k + 1)));
    let m2 = b::app(d1, b::ax("x1", bits_ty(k + 1)));
    let v = bits_term(&vec![false; k + 1]);
    b::lam(b::with_e(b::with_i(n, m1, m2, v)), "x")
}

// ---------------------------------------------------------------------
// machine configurations
// ---------------------------------------------------------------------

/// Abstract configuration contents: the left tape part (nearest cell
/// first), the right part (scanned cell first), and the state bits.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConfigSpec {
    pub left: Bits,
    pub right: Bits,
    pub state: Bits,
}

/// `PTM^k_i = forall a. !^i(B -o a -o a) -o ((a -o a) (x) (a -o a) (x) B^k)`.
pub fn ptm_ty(i: usize, k: usize) -> Type {
    let triple = crate::types::tensor_n(&[aa(), aa(), bits_ty(k)]);
    Type::forall("a", imp(Type::bang_n(cons_ty(), i), triple)).unwrap()
}

/// The intermediate decomposition type `ID^k_i`.
pub fn id_ty(i: usize, k: usize) -> Type {
    let tuple = crate::types::tensor_n(&[
        aa(),
        aa(),
        cons_ty(),
        bool_type(),
        cons_ty(),
        bool_type(),
        bits_ty(k),
    ]);
    Type::forall("a", imp(Type::bang_n(cons_ty(), i), tuple)).unwrap()
}

/// A literal configuration term (in surface normal form shape) with its
/// derivation at `PTM^k_i`.
pub fn config_term(cfg: &ConfigSpec, i: usize, k: usize) -> Derivation {
    assert!(i >= 1 && k >= 1);
    assert_eq!(cfg.state.len(), k);
    let mut cons_names: Vec<String> = Vec::new();
    let fold = |bits: &Bits, tag: &str, cons_names: &mut Vec<String>| -> Derivation {
        if bits.is_empty() {
            return b::id_at(tyvar("a"));
        }
        let mut acc = b::ax("z", tyvar("a"));
        let names: Vec<String> = (0..bits.len()).map(|j| format!("{tag}{j}")).collect();
        for (j, &bit) in bits.iter().enumerate().rev() {
            acc = b::app(
                b::app(b::ax(names[j].clone(), cons_ty()), bool_term(bit)),
                acc,
            );
        }
        cons_names.extend(names);
        b::lam(acc, "z")
    };
    let left = fold(&cfg.left, "l", &mut cons_names);
    let right = fold(&cfg.right, "r", &mut cons_names);
    let triple = b::tensor_n(vec![left, right, bits_term(&cfg.state)]);
    let mut cur = triple;
    if cons_names.is_empty() {
        cur = b::m_intro(cur, "c", Type::bang_n(cons_ty(), i - 1));
    } else {
        let refs: Vec<&str> = cons_names.iter().map(|s| s.as_str()).collect();
        cur = b::m_merge(cur, &refs, "c");
        for _ in 1..i {
            cur = b::m_lift(cur, "c");
        }
    }
    b::forall_close(b::blam(cur, "c"), "a")
}

/// Split an elaborated tensor pair `\z. z A B` into its components.
pub fn split_pair_term(t: &Term) -> Option<(Term, Term)> {
    if let Term::Lam(z, body) = t {
        if let Term::App(f, snd) = &**body {
            if let Term::App(zh, fst) = &**f {
                if matches!(&**zh, Term::Var(v) if v == z)
                    && !fst.free_vars().contains(z)
                    && !snd.free_vars().contains(z)
                {
                    return Some(((**fst).clone(), (**snd).clone()));
                }
            }
        }
    }
    None
}

/// Decode a configuration surface normal form back to its contents.
pub fn decode_config(t: &Term, k: usize) -> Result<ConfigSpec, EncodeError> {
    let (c, body) = match t {
        Term::BangLam(c, body) => (c, &**body),
        _ => return Err(EncodeError::DecodeFailure("expected \\!c config".into())),
    };
    let (left_t, rest) = split_pair_term(body)
        .ok_or_else(|| EncodeError::DecodeFailure("config is not a triple".into()))?;
    let (right_t, state_t) = split_pair_term(&rest)
        .ok_or_else(|| EncodeError::DecodeFailure("config is not a triple".into()))?;
    let left = decode_fold(&left_t, c)?;
    let right = decode_fold(&right_t, c)?;
    let state = decode_bits(&state_t, k)?;
    Ok(ConfigSpec { left, right, state })
}

fn decode_fold(t: &Term, c: &str) -> Result<Bits, EncodeError> {
    let (z, mut cur) = match t {
        Term::Lam(z, inner) => (z, &**inner),
        _ => return Err(EncodeError::DecodeFailure("fold is not an abstraction".into())),
    };
    let mut bits = Vec::new();
    loop {
        match cur {
            Term::Var(v) if v == z => return Ok(bits),
            Term::App(f, rest) => {
                let (head, bit) = match &**f {
                    Term::App(h, b1) => (h, b1),
                    _ => return Err(EncodeError::DecodeFailure("bad fold cell".into())),
                };
                if der_depth_of_var(head, c).is_none() {
                    return Err(EncodeError::DecodeFailure("fold head is not d^i(c)".into()));
                }
                bits.push(decode_bool(bit).ok_or_else(|| {
                    EncodeError::DecodeFailure("fold payload is not a boolean".into())
                })?);
                cur = rest;
            }
            _ => return Err(EncodeError::DecodeFailure("unexpected fold body".into())),
        }
    }
}

/// Decode a right-nested tuple of booleans.
pub fn decode_bits(t: &Term, n: usize) -> Result<Bits, EncodeError> {
    if n == 1 {
        return decode_bool(t)
            .map(|x| vec![x])
            .ok_or_else(|| EncodeError::DecodeFailure("not a boolean".into()));
    }
    let (fst, rest) = split_pair_term(t)
        .ok_or_else(|| EncodeError::DecodeFailure("not a boolean tuple".into()))?;
    let head = decode_bool(&fst)
        .ok_or_else(|| EncodeError::DecodeFailure("tuple head is not a boolean".into()))?;
    let mut out = vec![head];
    out.extend(decode_bits(&rest, n - 1)?);
    Ok(out)
}

// ---------------------------------------------------------------------
// decomposition / composition / transition
// ---------------------------------------------------------------------

/// The fold accumulator type `(a -o a) (x) (B -o a -o a) (x) B`.
fn beta_ty() -> Type {
    crate::types::tensor_n(&[aa(), cons_ty(), bool_type()])
}

/// The dummy cons used at fold bases and when a tape part is empty:
/// `\x. let E_B x be I in I : B -o a -o a`.
fn base_cons() -> Derivation {
    let erased = b::app(eraser(&DataShape::Bool), b::ax("x", bool_type()));
    let body = b::app(b::forall_e(erased, aa()), b::id_at(tyvar("a")));
    b::lam(body, "x")
}

/// The fold base `I (x) base_cons (x) 0 : beta`.
fn decom_base() -> Derivation {
    b::tensor_n(vec![b::id_at(tyvar("a")), base_cons(), bool_term(false)])
}

/// `decom_i : PTM^k_i -o ID^k_i`: isolates the head cells of both tape
/// parts, keeping their cons functions at hand.
pub fn decom_term(i: usize, k: usize) -> Derivation {
    // F[c] = \b.\z. let z be g (x) h (x) p in ((h p . g) (x) c (x) b)
    let reattached = b::compose(
        b::app(b::ax("h", cons_ty()), b::ax("p", bool_type())),
        b::ax("g", aa()),
    );
    let tuple = b::tensor_n(vec![reattached, b::ax("c", cons_ty()), b::ax("b", bool_type())]);
    let f_body = b::let_tensor_n(b::ax("z", beta_ty()), &["g", "h", "p"], tuple);
    let mut f = b::lam(b::lam(f_body, "z"), "b");
    for _ in 0..i {
        f = b::sp_same(f);
    }
    let m_applied = b::app(b::forall_e(b::ax("m", ptm_ty(i, k)), beta_ty()), f);
    let left_split = b::let_tensor_n(
        b::app(b::ax("l", imp(beta_ty(), beta_ty())), decom_base()),
        &["sl", "cl", "bl"],
        b::let_tensor_n(
            b::app(b::ax("r", imp(beta_ty(), beta_ty())), decom_base()),
            &["sr", "cr", "br"],
            b::tensor_n(vec![
                b::ax("sl", aa()),
                b::ax("sr", aa()),
                b::ax("cl", cons_ty()),
                b::ax("bl", bool_type()),
                b::ax("cr", cons_ty()),
                b::ax("br", bool_type()),
                b::ax("q", bits_ty(k)),
            ]),
        ),
    );
    let body = b::let_tensor_n(m_applied, &["l", "r", "q"], left_split);
    b::lam(b::forall_close(b::blam(body, "c"), "a"), "m")
}

/// The recombination payload `(a-oa) (x) (a-oa) (x) cons (x) B (x) cons`
/// at an arbitrary element type.
fn payload_ty_at(v: &str) -> Type {
    let va = tyvar(v);
    let vaa = imp(va.clone(), va.clone());
    let vcons = imp(bool_type(), vaa.clone());
    crate::types::tensor_n(&[vaa.clone(), vaa, vcons.clone(), bool_type(), vcons])
}

fn result_ty_at(v: &str, k: usize) -> Type {
    let va = tyvar(v);
    let vaa = imp(va.clone(), va);
    crate::types::tensor_n(&[vaa.clone(), vaa, bits_ty(k)])
}

/// Polymorphic recombinator type
/// `forall v. B -o B^k -o payload(v) -o result(v)`.
fn recomb_ty(k: usize) -> Type {
    let inner = imp(
        bool_type(),
        imp(bits_ty(k), imp(payload_ty_at("v"), result_ty_at("v", k))),
    );
    Type::forall("v", inner).unwrap()
}

/// Build a recombinator: given the payload pieces, produce the next
/// configuration triple. `dir` selects the head-move direction.
fn recombinator(dir: Move, k: usize) -> Derivation {
    let va = tyvar("v");
    let vaa = imp(va.clone(), va.clone());
    let vcons = imp(bool_type(), vaa.clone());
    let lfold = b::ax("l", vaa.clone());
    let rfold = b::ax("r", vaa);
    let written = b::app(b::ax("cr", vcons.clone()), b::ax("b'", bool_type()));
    let reattach = b::app(b::ax("cl", vcons), b::ax("bl", bool_type()));
    let tuple = match dir {
        Move::Right => b::tensor_n(vec![
            b::compose(written, b::compose(reattach, lfold)),
            rfold,
            b::ax("q'", bits_ty(k)),
        ]),
        Move::Left => b::tensor_n(vec![
            lfold,
            b::compose(reattach, b::compose(written, rfold)),
            b::ax("q'", bits_ty(k)),
        ]),
    };
    let destructured = b::let_tensor_n(
        b::ax("p", payload_ty_at("v")),
        &["l", "r", "cl", "bl", "cr"],
        tuple,
    );
    let inner = b::lam(b::lam(b::lam(destructured, "p"), "q'"), "b'");
    b::forall_i(inner, recomb_ty(k), "v")
}

/// Dummy payload at the unit element type, for applying (and then
/// erasing) the discarded recombinator.
fn dummy_payload(k: usize) -> Derivation {
    let ucons = {
        // \b.\u. let E_B b be I in u : B -o 1 -o 1
        let erased = b::app(eraser(&DataShape::Bool), b::ax("b", bool_type()));
        let body = b::app(b::forall_e(erased, unit_type()), b::ax("u", unit_type()));
        b::lam(b::lam(body, "u"), "b")
    };
    let ucons2 = {
        let erased = b::app(eraser(&DataShape::Bool), b::ax("b", bool_type()));
        let body = b::app(b::forall_e(erased, unit_type()), b::ax("u", unit_type()));
        b::lam(b::lam(body, "u"), "b")
    };
    let _ = k;
    b::tensor_n(vec![
        b::id_at(unit_type()),
        b::id_at(unit_type()),
        ucons,
        bool_term(false),
        ucons2,
    ])
}

/// `com_i : ID^k_i -o PTM^k_i`: runs the probabilistic transition function
/// on the scanned bit and state, then recombines the tape according to the
/// move bit (0 selects the left move).
pub fn com_term(i: usize, k: usize, delta_p: Derivation) -> Derivation {
    assert_eq!(
        delta_p.conclusion.ty,
        imp(bits_ty(k + 1), bits_ty(k + 2)),
        "delta_p type"
    );
    // d_P (q (x) br) : B^{k+2}, with the state bits first
    let dp_in = if k == 1 {
        b::tensor_pair(b::ax("q", bits_ty(1)), b::ax("br", bool_type()))
    } else {
        let qnames: Vec<String> = (1..=k).map(|x| format!("q{x}")).collect();
        let mut parts: Vec<Derivation> = qnames
            .iter()
            .map(|n| b::ax(n.clone(), bool_type()))
            .collect();
        parts.push(b::ax("br", bool_type()));
        let refs: Vec<&str> = qnames.iter().map(|s| s.as_str()).collect();
        b::let_tensor_n(b::ax("q", bits_ty(k)), &refs, b::tensor_n(parts))
    };
    let dp_out = b::app(delta_p, dp_in);
    // destructure B^{k+2} into q'1..q'k, b', mv
    let mut out_names: Vec<String> = (1..=k).map(|x| format!("s{x}")).collect();
    out_names.push("b'".to_string());
    out_names.push("mv".to_string());
    let state2 = if k == 1 {
        b::ax("s1", bool_type())
    } else {
        b::tensor_n(
            (1..=k)
                .map(|x| b::ax(format!("s{x}"), bool_type()))
                .collect(),
        )
    };
    // mv [recomb_ty] M_left M_right : C (x) C, then split and use
    let selected = b::app(
        b::app(
            b::forall_e(b::ax("mv", bool_type()), recomb_ty(k)),
            recombinator(Move::Left, k),
        ),
        recombinator(Move::Right, k),
    );
    let payload = b::tensor_n(vec![
        b::ax("l", aa()),
        b::ax("r", aa()),
        b::ax("cl", cons_ty()),
        b::ax("bl", bool_type()),
        b::ax("cr", cons_ty()),
    ]);
    let real = b::app(
        b::app(
            b::app(b::forall_e(b::ax("fsel", recomb_ty(k)), tyvar("a")), b::ax("b'", bool_type())),
            state2,
        ),
        payload,
    );
    let garbage = b::app(
        b::app(
            b::app(
                b::forall_e(b::ax("fdis", recomb_ty(k)), unit_type()),
                bool_term(false),
            ),
            bits_term(&vec![false; k]),
        ),
        dummy_payload(k),
    );
    let absorb = b::let_tensor_n(
        garbage,
        &["lg", "rg", "qg"],
        b::let_unit(
            b::app(b::ax("lg", imp(unit_type(), unit_type())), b::unit_i()),
            b::let_unit(
                b::app(b::ax("rg", imp(unit_type(), unit_type())), b::unit_i()),
                b::let_unit(
                    b::app(eraser(&bits_shape(k)), b::ax("qg", bits_ty(k))),
                    real,
                ),
            ),
        ),
    );
    let used = b::let_tensor(selected, "fsel", "fdis", absorb);
    let out_refs: Vec<&str> = out_names.iter().map(|s| s.as_str()).collect();
    let after_dp = b::let_tensor_n(dp_out, &out_refs, used);
    // destructure the ID tuple
    let mut cons_arg = b::ax("c", cons_ty());
    for _ in 0..i {
        cons_arg = b::sp_same(cons_arg);
    }
    let s_applied = b::app(b::forall_e(b::ax("s", id_ty(i, k)), tyvar("a")), cons_arg);
    let body = b::let_tensor_n(
        s_applied,
        &["l", "r", "cl", "bl", "cr", "br", "q"],
        after_dp,
    );
    b::lam(b::forall_close(b::blam(body, "c"), "a"), "s")
}

/// `tr_i = com_i . decom_i : PTM^k_i -o PTM^k_i`.
pub fn tr_term(i: usize, k: usize, delta_p: Derivation) -> Derivation {
    b::compose(com_term(i, k, delta_p), decom_term(i, k))
}

/// `init_i : N_i -o PTM^k_i`: an all-zero tape of the given length with
/// the head at the left end, in state `q0`.
pub fn init_term(i: usize, k: usize, q0: &[bool]) -> Derivation {
    assert_eq!(q0.len(), k);
    let mut cell = b::app(b::ax("c", cons_ty()), bool_term(false));
    for _ in 0..i {
        cell = b::sp_same(cell);
    }
    let folded = b::app(b::forall_e(b::ax("n", nat_ty(i)), tyvar("a")), cell);
    let eta = b::lam(b::app(folded, b::ax("z", tyvar("a"))), "z");
    let triple = b::tensor_n(vec![b::id_at(tyvar("a")), eta, bits_term(q0)]);
    b::lam(
        b::forall_close(b::blam(triple, "c"), "a"),
        "n",
    )
}

/// The write-one-bit step used by initialization: write the bit at the
/// scanned cell (erasing the blank found there) and move right.
fn write_step(i: usize, k: usize) -> Derivation {
    // T = \b.\m.\!c. let m !^i(d^i c) be 7-tuple in
    //       let E_B br be I in R b q (l,r,cl,bl,cr)
    let va = tyvar("a");
    let vaa = imp(va.clone(), va.clone());
    let vcons = imp(bool_type(), vaa.clone());
    let written = b::app(b::ax("cr", vcons.clone()), b::ax("b", bool_type()));
    let reattach = b::app(b::ax("cl", vcons), b::ax("bl", bool_type()));
    let new_left = b::compose(written, b::compose(reattach, b::ax("l", vaa.clone())));
    let triple = b::tensor_n(vec![new_left, b::ax("r", vaa), b::ax("q", bits_ty(k))]);
    let erased = b::let_unit(
        b::app(eraser(&DataShape::Bool), b::ax("br", bool_type())),
        triple,
    );
    let mut cons_arg = b::ax("c", cons_ty());
    for _ in 0..i {
        cons_arg = b::sp_same(cons_arg);
    }
    let m_applied = b::app(b::forall_e(b::ax("m", id_ty(i, k)), tyvar("a")), cons_arg);
    let body = b::let_tensor_n(m_applied, &["l", "r", "cl", "bl", "cr", "br", "q"], erased);
    let config = b::forall_close(b::blam(body, "c"), "a");
    b::lam(b::lam(config, "m"), "b")
}

/// `in_i : S -o PTM^k_i -o PTM^k_i`: writes the input string onto the
/// initial configuration's tape.
pub fn in_term(i: usize, k: usize) -> Derivation {
    let t = write_step(i, k);
    let w_inner = b::compose(b::app(t, b::ax("b", bool_type())), decom_term(i, k));
    let w = b::lam(w_inner, "b"); // B -o PTM -o PTM, closed
    let folded = b::app(
        b::app(
            b::forall_e(b::ax("s", string_ty(1)), ptm_ty(i, k)),
            b::sp(w, &[]),
        ),
        b::ax("m0", ptm_ty(i, k)),
    );
    b::lam(b::lam(folded, "m0"), "s")
}

/// `ext^S_i : PTM^k_i -o S_i`: erase the state and read the tape as the
/// left part (nearest first) followed by the right part.
pub fn ext_s_term(i: usize, k: usize) -> Derivation {
    let mut cons_arg = b::ax("c", cons_ty());
    for _ in 0..i {
        cons_arg = b::sp_same(cons_arg);
    }
    let m_applied = b::app(b::forall_e(b::ax("m", ptm_ty(i, k)), tyvar("a")), cons_arg);
    let glued = b::compose(b::ax("l", aa()), b::ax("r", aa()));
    let erased = b::let_unit(
        b::app(eraser(&bits_shape(k)), b::ax("q", bits_ty(k))),
        glued,
    );
    let body = b::let_tensor_n(m_applied, &["l", "r", "q"], erased);
    b::lam(b::forall_close(b::blam(body, "c"), "a"), "m")
}

/// `ext^B_i : PTM^k_i -o B`: erase the tape and map the final state
/// through an acceptance table (`0` answers accept).
pub fn ext_b_term(
    i: usize,
    k: usize,
    accepting: &dyn Fn(&Bits) -> bool,
) -> Result<Derivation, EncodeError> {
    let mut acc_table: BTreeMap<Bits, Bits> = BTreeMap::new();
    for q in all_bit_vectors(k) {
        // 0 = accept, per the recognition definitions
        acc_table.insert(q.clone(), vec![!accepting(&q)]);
    }
    let acc = table_term(&acc_table, k, 1)?;
    let ucons = {
        let erased = b::app(eraser(&DataShape::Bool), b::ax("b", bool_type()));
        let body = b::app(b::forall_e(erased, unit_type()), b::ax("u", unit_type()));
        b::lam(b::lam(body, "u"), "b")
    };
    let mut cons_arg = ucons;
    for _ in 0..i {
        cons_arg = b::sp(cons_arg, &[]);
    }
    let m_applied = b::app(b::forall_e(b::ax("m", ptm_ty(i, k)), unit_type()), cons_arg);
    let result = b::let_unit(
        b::app(b::ax("l", imp(unit_type(), unit_type())), b::unit_i()),
        b::let_unit(
            b::app(b::ax("r", imp(unit_type(), unit_type())), b::unit_i()),
            b::app(acc, b::ax("q", bits_ty(k))),
        ),
    );
    let body = b::let_tensor_n(m_applied, &["l", "r", "q"], result);
    Ok(b::lam(body, "m"))
}

// ---------------------------------------------------------------------
// the compiler
// ---------------------------------------------------------------------

/// What the compiled machine extracts from the final configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputMode {
    /// The tape contents, as an indexed string (Theorem-12 style).
    Tape,
    /// The final state mapped to a boolean verdict (recognition style).
    Verdict,
}

#[derive(Clone, Debug)]
pub struct CompiledPtm {
    pub derivation: Derivation,
    /// Exponent of the input: the compiled term expects `!^bang_depth s`.
    pub bang_depth: usize,
    /// Index of the output string type (tape mode).
    pub output_index: usize,
    pub time_poly: Vec<usize>,
    pub space_poly: Vec<usize>,
}

impl CompiledPtm {
    pub fn subject(&self) -> &Term {
        &self.derivation.conclusion.subject
    }

    /// The closed application `P !^m s` ready for evaluation.
    pub fn applied_to(&self, input: &[bool]) -> Term {
        let s = string_term(input, 1).conclusion.subject;
        Term::app(self.subject().clone(), Term::bang_n(s, self.bang_depth))
    }
}

/// Compile a probabilistic machine with time bound `p` and space bound `q`
/// (coefficient lists, index = power) into a closed term of type
/// `!^{max(d1,d2,1)+1} S -o S_{2 d2 + 1}` (tape mode) or `... -o B`
/// (verdict mode), with its checking derivation.
pub fn ptm_compile(
    spec: &PtmSpec,
    p: &[usize],
    q: &[usize],
    mode: OutputMode,
) -> Result<CompiledPtm, EncodeError> {
    spec.validate()
        .map_err(|e| EncodeError::WidthMismatch(e.to_string()))?;
    let k = spec.state_width;
    let d1 = poly_degree(p);
    let d2 = poly_degree(q);
    let ip = 2 * d1 + 1;
    let iq = 2 * d2 + 1;
    let big_l = d1.max(d2).max(1) + 1;

    let delta0 = delta_encode(&spec.totalized_table(&spec.delta0), k)?;
    let delta1 = delta_encode(&spec.totalized_table(&spec.delta1), k)?;
    let dp = delta_p_term(delta0, delta1, k);
    let tr = tr_term(iq, k, dp);
    let mut tr_banged = tr;
    for _ in 0..ip {
        tr_banged = b::sp(tr_banged, &[]);
    }

    let p_count = bound_argument(p, "s_p", d1)?;
    let q_count = bound_argument(q, "s_q", d2)?;

    let initd = b::app(init_term(iq, k, &spec.initial), q_count);
    let ind = b::app(
        b::app(in_term(iq, k), b::ax("s'", string_ty(1))),
        initd,
    );
    let iter = b::app(b::forall_e(p_count, ptm_ty(iq, k)), tr_banged);
    let run = b::app(iter, ind);
    let extracted = match mode {
        OutputMode::Tape => b::app(ext_s_term(iq, k), run),
        OutputMode::Verdict => {
            let accepting = spec.accepting.clone();
            b::app(
                ext_b_term(iq, k, &move |q2: &Bits| accepting.contains(q2))?,
                run,
            )
        }
    };
    // lift s', s_p, s_q to !^{L-1} S and merge them into s : !^L S
    let mut cur = extracted;
    for _ in 0..big_l - 1 {
        cur = b::m_lift(cur, "s'");
    }
    for _ in d1..big_l - 1 {
        cur = b::m_lift(cur, "s_p");
    }
    for _ in d2..big_l - 1 {
        cur = b::m_lift(cur, "s_q");
    }
    cur = b::m_merge(cur, &["s'", "s_p", "s_q"], "s");
    let derivation = b::blam(cur, "s");
    Ok(CompiledPtm {
        derivation,
        bang_depth: big_l,
        output_index: iq,
        time_poly: p.to_vec(),
        space_poly: q.to_vec(),
    })
}

/// `s_var : !^d S |- p{!^d(len_1 d^d(s_var))/x} : N_{2d+1}`, the
/// polynomial applied to the input length (composed by weighted
/// substitution, following the completeness proof).
fn bound_argument(coeffs: &[usize], s_var: &str, d: usize) -> Result<Derivation, EncodeError> {
    let poly = poly_to_term(coeffs)?;
    let mut len_applied = b::app(len_term(1), b::ax(s_var, string_ty(1)));
    for _ in 0..d {
        len_applied = b::sp_same(len_applied);
    }
    let r = rank(&poly);
    Ok(weighted_substitute(&poly, "x", &len_applied, r)?)
}

/// Decode a distribution over string normal forms into bit strings.
pub fn decode_string_distribution(
    dist: &SurfaceDistribution,
) -> Result<BTreeMap<Bits, BigRational>, EncodeError> {
    let mut out: BTreeMap<Bits, BigRational> = BTreeMap::new();
    for (term, p) in dist.iter() {
        let bits = decode_string(term)?;
        *out.entry(bits).or_insert_with(|| BigRational::new(0.into(), 1.into())) += p.clone();
    }
    Ok(out)
}

/// Decode a distribution over boolean normal forms into verdict masses
/// (`0` = accept).
pub fn decode_verdict_distribution(
    dist: &SurfaceDistribution,
) -> Result<crate::ptm::VerdictDistribution, EncodeError> {
    let mut accept = BigRational::new(0.into(), 1.into());
    let mut reject = accept.clone();
    for (term, p) in dist.iter() {
        match decode_bool(term) {
            Some(false) => accept += p.clone(),
            Some(true) => reject += p.clone(),
            None => {
                return Err(EncodeError::DecodeFailure(
                    "verdict is not a boolean normal form".into(),
                ))
            }
        }
    }
    Ok(crate::ptm::VerdictDistribution::new(accept, reject))
}

/// Decode a distribution over configuration normal forms.
pub fn decode_config_distribution(
    dist: &SurfaceDistribution,
    k: usize,
) -> Result<BTreeMap<ConfigSpec, BigRational>, EncodeError> {
    let mut out: BTreeMap<ConfigSpec, BigRational> = BTreeMap::new();
    for (term, p) in dist.iter() {
        let cfg = decode_config(term, k)?;
        *out.entry(cfg).or_insert_with(|| BigRational::new(0.into(), 1.into())) += p.clone();
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// worked judgment from the introduction
// ---------------------------------------------------------------------

/// The dereliction-annotated judgment
/// `x: !!1 |- (\!z. <d(d(z)), d(d(z))>) !(!(d(d(x)))) : 1 (x) 1`
/// (pair as its second-order tensor).
pub fn section1_judgment() -> Derivation {
    let a = unit_type();
    let w1 = b::m_merge(b::ax("a1", a.clone()), &["a1"], "w1");
    let w2 = b::m_merge(b::ax("a2", a.clone()), &["a2"], "w2");
    let pair = b::tensor_pair(w1, w2);
    let body = b::m_merge(pair, &["w1", "w2"], "z");
    let fun = b::blam(body, "z");
    let mut arg = b::ax("x", a);
    arg = b::sp_same(arg);
    arg = b::sp_same(arg);
    b::app(fun, arg)
}
