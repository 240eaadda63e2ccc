//! JSON interchange: derivations, machine specifications, distributions.
//! Semantic errors carry a JSON-path diagnostic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{Context, Derivation, Judgment, Payload, Rule};
use crate::dist::SurfaceDistribution;
use crate::ptm::{bits_from_str, bits_to_string, Move, PtmSpec, TransitionTable};
use crate::syntax::{parse_term, parse_type, print_term, print_type};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("at {path}: {message}")]
    Semantic { path: String, message: String },
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
}

fn semantic(path: &str, message: impl Into<String>) -> JsonError {
    JsonError::Semantic {
        path: path.to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------
// derivations
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct JudgmentDto {
    ctx: Vec<(String, String)>,
    term: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Serialize, Deserialize)]
struct DerivationDto {
    rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    renaming: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    merged: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    instantiation: Option<String>,
    premises: Vec<DerivationDto>,
    conclusion: JudgmentDto,
}

fn derivation_to_dto(d: &Derivation) -> DerivationDto {
    let mut dto = DerivationDto {
        rule: d.rule.name().to_string(),
        renaming: None,
        merged: None,
        var: None,
        witness: None,
        instantiation: None,
        premises: d.premises.iter().map(derivation_to_dto).collect(),
        conclusion: JudgmentDto {
            ctx: d
                .conclusion
                .context
                .iter()
                .map(|(x, t)| (x.clone(), print_type(t)))
                .collect(),
            term: print_term(&d.conclusion.subject),
            ty: print_type(&d.conclusion.ty),
        },
    };
    match &d.payload {
        Payload::None => {}
        Payload::Sp { renaming } => dto.renaming = Some(renaming.clone()),
        Payload::M { merged, var } => {
            dto.merged = Some(merged.clone());
            dto.var = Some(var.clone());
        }
        Payload::ForallI { witness } => dto.witness = Some(witness.clone()),
        Payload::ForallE { instantiation } => {
            dto.instantiation = Some(print_type(instantiation))
        }
    }
    dto
}

fn dto_to_derivation(dto: &DerivationDto, path: &str) -> Result<Derivation, JsonError> {
    let rule = match dto.rule.as_str() {
        "ax" => Rule::Ax,
        "impIl" => Rule::ImpIl,
        "impIe" => Rule::ImpIe,
        "impE" => Rule::ImpE,
        "withI" => Rule::WithI,
        "withE" => Rule::WithE,
        "sp" => Rule::Sp,
        "m" => Rule::M,
        "forallI" => Rule::ForallI,
        "forallE" => Rule::ForallE,
        other => return Err(semantic(&format!("{path}.rule"), format!("unknown rule `{other}`"))),
    };
    let payload = match rule {
        Rule::Sp => Payload::Sp {
            renaming: dto
                .renaming
                .clone()
                .ok_or_else(|| semantic(&format!("{path}.renaming"), "sp needs a renaming"))?,
        },
        Rule::M => Payload::M {
            merged: dto
                .merged
                .clone()
                .ok_or_else(|| semantic(&format!("{path}.merged"), "m needs its merged list"))?,
            var: dto
                .var
                .clone()
                .ok_or_else(|| semantic(&format!("{path}.var"), "m needs its target var"))?,
        },
        Rule::ForallI => Payload::ForallI {
            witness: dto
                .witness
                .clone()
                .ok_or_else(|| semantic(&format!("{path}.witness"), "forallI needs a witness"))?,
        },
        Rule::ForallE => Payload::ForallE {
            instantiation: parse_type(dto.instantiation.as_deref().ok_or_else(|| {
                semantic(&format!("{path}.instantiation"), "forallE needs a type")
            })?)
            .map_err(|e| semantic(&format!("{path}.instantiation"), e.to_string()))?,
        },
        _ => Payload::None,
    };
    let mut context = Context::new();
    for (i, (x, tystr)) in dto.conclusion.ctx.iter().enumerate() {
        let t = parse_type(tystr)
            .map_err(|e| semantic(&format!("{path}.conclusion.ctx[{i}]"), e.to_string()))?;
        if context.insert(x.clone(), t).is_some() {
            return Err(semantic(
                &format!("{path}.conclusion.ctx[{i}]"),
                format!("duplicate context name `{x}`"),
            ));
        }
    }
    let subject = parse_term(&dto.conclusion.term)
        .map_err(|e| semantic(&format!("{path}.conclusion.term"), e.to_string()))?;
    let ty = parse_type(&dto.conclusion.ty)
        .map_err(|e| semantic(&format!("{path}.conclusion.type"), e.to_string()))?;
    let premises = dto
        .premises
        .iter()
        .enumerate()
        .map(|(i, p)| dto_to_derivation(p, &format!("{path}.premises[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Derivation {
        rule,
        payload,
        premises,
        conclusion: Judgment::new(context, subject, ty),
    })
}

pub fn derivation_to_json(d: &Derivation) -> String {
    serde_json::to_string_pretty(&derivation_to_dto(d)).expect("serializable")
}

pub fn parse_derivation(json: &str) -> Result<Derivation, JsonError> {
    let dto: DerivationDto = serde_json::from_str(json)?;
    dto_to_derivation(&dto, "$")
}

// ---------------------------------------------------------------------
// machine specifications
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RowDto {
    state: String,
    read: u8,
    next: String,
    write: u8,
    #[serde(rename = "move")]
    mv: String,
}

#[derive(Serialize, Deserialize)]
struct PtmSpecDto {
    state_width: usize,
    initial: String,
    accepting: Vec<String>,
    rejecting: Vec<String>,
    delta0: Vec<RowDto>,
    delta1: Vec<RowDto>,
}

fn parse_bits(s: &str, path: &str) -> Result<Vec<bool>, JsonError> {
    bits_from_str(s).ok_or_else(|| semantic(path, format!("`{s}` is not a bit string")))
}

fn parse_table(rows: &[RowDto], path: &str) -> Result<TransitionTable, JsonError> {
    let mut table = TransitionTable::new();
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let state = parse_bits(&row.state, &format!("{rp}.state"))?;
        let next = parse_bits(&row.next, &format!("{rp}.next"))?;
        let read = match row.read {
            0 => false,
            1 => true,
            other => return Err(semantic(&format!("{rp}.read"), format!("bad bit {other}"))),
        };
        let write = match row.write {
            0 => false,
            1 => true,
            other => return Err(semantic(&format!("{rp}.write"), format!("bad bit {other}"))),
        };
        let mv = match row.mv.as_str() {
            "L" => Move::Left,
            "R" => Move::Right,
            other => {
                return Err(semantic(
                    &format!("{rp}.move"),
                    format!("move must be \"L\" or \"R\", found `{other}`"),
                ))
            }
        };
        if table.insert((state, read), (next, write, mv)).is_some() {
            return Err(semantic(&rp, "duplicate table row"));
        }
    }
    Ok(table)
}

pub fn parse_ptm(json: &str) -> Result<PtmSpec, JsonError> {
    let dto: PtmSpecDto = serde_json::from_str(json)?;
    let spec = PtmSpec {
        state_width: dto.state_width,
        initial: parse_bits(&dto.initial, "$.initial")?,
        accepting: dto
            .accepting
            .iter()
            .enumerate()
            .map(|(i, s)| parse_bits(s, &format!("$.accepting[{i}]")))
            .collect::<Result<BTreeSet<_>, _>>()?,
        rejecting: dto
            .rejecting
            .iter()
            .enumerate()
            .map(|(i, s)| parse_bits(s, &format!("$.rejecting[{i}]")))
            .collect::<Result<BTreeSet<_>, _>>()?,
        delta0: parse_table(&dto.delta0, "$.delta0")?,
        delta1: parse_table(&dto.delta1, "$.delta1")?,
    };
    spec.validate()
        .map_err(|e| semantic("$", e.to_string()))?;
    Ok(spec)
}

pub fn ptm_to_json(spec: &PtmSpec) -> String {
    let table_rows = |t: &TransitionTable| {
        t.iter()
            .map(|((q, r), (n, w, m))| RowDto {
                state: bits_to_string(q),
                read: *r as u8,
                next: bits_to_string(n),
                write: *w as u8,
                mv: match m {
                    Move::Left => "L".to_string(),
                    Move::Right => "R".to_string(),
                },
            })
            .collect()
    };
    let dto = PtmSpecDto {
        state_width: spec.state_width,
        initial: bits_to_string(&spec.initial),
        accepting: spec.accepting.iter().map(|q| bits_to_string(q)).collect(),
        rejecting: spec.rejecting.iter().map(|q| bits_to_string(q)).collect(),
        delta0: table_rows(&spec.delta0),
        delta1: table_rows(&spec.delta1),
    };
    serde_json::to_string_pretty(&dto).expect("serializable")
}

// ---------------------------------------------------------------------
// distributions
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DistEntryDto {
    term: String,
    prob: String,
}

/// Entries as `{"term": ..., "prob": "num/den"}`, sorted by descending
/// probability, ties broken by the term text.
pub fn format_distribution(d: &SurfaceDistribution) -> String {
    let entries: Vec<DistEntryDto> = d
        .sorted_entries()
        .into_iter()
        .map(|(t, p)| DistEntryDto {
            term: print_term(t),
            prob: format!("{}/{}", p.numer(), p.denom()),
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("serializable")
}

/// Decoded distributions (over bit strings) in the same format.
pub fn format_bits_distribution(d: &BTreeMap<Vec<bool>, num::BigRational>) -> String {
    let mut entries: Vec<DistEntryDto> = d
        .iter()
        .map(|(bits, p)| DistEntryDto {
            term: bits_to_string(bits),
            prob: format!("{}/{}", p.numer(), p.denom()),
        })
        .collect();
    entries.sort_by(|a, b| a.term.cmp(&b.term));
    serde_json::to_string_pretty(&entries).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders as b;
    use crate::derivation::check_derivation;
    use crate::types::Type;

    #[test]
    fn derivation_round_trip() {
        let d = b::forall_i(
            b::lam(b::ax("x", Type::var("a")), "x"),
            crate::types::unit_type(),
            "a",
        );
        let json = derivation_to_json(&d);
        let back = parse_derivation(&json).unwrap();
        check_derivation(&back).unwrap();
        assert_eq!(back.conclusion, d.conclusion);
    }

    #[test]
    fn ptm_round_trip() {
        let spec = PtmSpec {
            state_width: 1,
            initial: vec![false],
            accepting: BTreeSet::from([vec![false]]),
            rejecting: BTreeSet::new(),
            delta0: TransitionTable::from([
                ((vec![false], false), (vec![false], false, Move::Right)),
                ((vec![false], true), (vec![false], false, Move::Right)),
            ]),
            delta1: TransitionTable::from([
                ((vec![false], false), (vec![false], true, Move::Right)),
                ((vec![false], true), (vec![false], true, Move::Right)),
            ]),
        };
        let json = ptm_to_json(&spec);
        let back = parse_ptm(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn bad_rows_are_rejected_with_paths() {
        let json = r#"{
            "state_width": 1, "initial": "0", "accepting": ["0"], "rejecting": [],
            "delta0": [{"state": "0", "read": 0, "next": "0", "write": 0, "move": "X"}],
            "delta1": []
        }"#;
        let err = parse_ptm(json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("$.delta0[0].move"), "got: {msg}");
    }
}
