//! Line-oriented circuit language.
//!
//! ```text
//! # comment
//! RX q0 1.5707963267948966
//! SQISWAP q1 q2
//! LAYER
//! GROUP SQISWAP q0 q1 q2
//! ```
//!
//! One gate per line, `LAYER` starts a new layer, `#` runs to end of line.
//! Mnemonics are case-insensitive. Empty layers are dropped.

use std::fmt;

use super::circuit::{Circuit, Gate, Layer};
use crate::protocols::{Axis, CouplingKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownMnemonic(String),
    DuplicateQubit(usize),
    MalformedIndex(String),
    MalformedAngle(String),
    NonFiniteAngle(String),
    Arity {
        mnemonic: String,
        expected: String,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            ParseErrorKind::UnknownMnemonic(m) => write!(f, "unknown mnemonic `{m}`"),
            ParseErrorKind::DuplicateQubit(q) => write!(f, "qubit q{q} used twice in one layer"),
            ParseErrorKind::MalformedIndex(t) => {
                write!(f, "malformed qubit index `{t}` (expected q<integer>)")
            }
            ParseErrorKind::MalformedAngle(t) => write!(f, "malformed angle `{t}`"),
            ParseErrorKind::NonFiniteAngle(t) => write!(f, "angle `{t}` is not finite"),
            ParseErrorKind::Arity {
                mnemonic,
                expected,
                found,
            } => write!(f, "{mnemonic} takes {expected} operands, found {found}"),
        }
    }
}

fn qubit(token: &str) -> Result<usize, ParseErrorKind> {
    token
        .strip_prefix(['q', 'Q'])
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| ParseErrorKind::MalformedIndex(token.into()))
}

fn angle(token: &str) -> Result<f64, ParseErrorKind> {
    let v: f64 = token
        .parse()
        .map_err(|_| ParseErrorKind::MalformedAngle(token.into()))?;
    if !v.is_finite() {
        return Err(ParseErrorKind::NonFiniteAngle(token.into()));
    }
    Ok(v)
}

fn coupling(token: &str) -> Option<CouplingKind> {
    match token.to_ascii_uppercase().as_str() {
        "SWAP" => Some(CouplingKind::Swap),
        "SQISWAP" => Some(CouplingKind::SqrtISwap),
        _ => None,
    }
}

fn arity(mnemonic: &str, expected: &str, found: usize) -> ParseErrorKind {
    ParseErrorKind::Arity {
        mnemonic: mnemonic.into(),
        expected: expected.into(),
        found,
    }
}

fn gate(tokens: &[&str]) -> Result<Gate, ParseErrorKind> {
    let head = tokens[0].to_ascii_uppercase();
    let args = &tokens[1..];
    let axis = match head.as_str() {
        "RX" => Some(Axis::X),
        "RY" => Some(Axis::Y),
        "RZ" => Some(Axis::Z),
        _ => None,
    };
    if let Some(axis) = axis {
        if args.len() != 2 {
            return Err(arity(&head, "2", args.len()));
        }
        return Ok(Gate::Rotate {
            axis,
            qubit: qubit(args[0])?,
            angle: angle(args[1])?,
        });
    }
    if let Some(kind) = coupling(&head) {
        if args.len() != 2 {
            return Err(arity(&head, "2", args.len()));
        }
        let (a, b) = (qubit(args[0])?, qubit(args[1])?);
        if a == b {
            return Err(ParseErrorKind::DuplicateQubit(a));
        }
        return Ok(Gate::Pair { kind, a, b });
    }
    if head == "GROUP" {
        let Some(kind) = args.first().and_then(|t| coupling(t)) else {
            let what = args.first().map_or("GROUP".to_string(), |t| format!("GROUP {t}"));
            return Err(ParseErrorKind::UnknownMnemonic(what));
        };
        let qubits = args[1..].iter().map(|t| qubit(t)).collect::<Result<Vec<_>, _>>()?;
        if qubits.len() < 3 {
            return Err(arity(&format!("GROUP {}", kind.mnemonic()), "at least 3", qubits.len()));
        }
        return Ok(Gate::Group { kind, qubits });
    }
    Err(ParseErrorKind::UnknownMnemonic(tokens[0].into()))
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut layers = Vec::new();
    let mut current = Layer::default();
    let mut used: Vec<usize> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0].eq_ignore_ascii_case("LAYER") {
            if tokens.len() > 1 {
                return Err(ParseError {
                    line,
                    kind: arity("LAYER", "0", tokens.len() - 1),
                });
            }
            if !current.gates.is_empty() {
                layers.push(std::mem::take(&mut current));
            }
            used.clear();
            continue;
        }
        let g = gate(&tokens).map_err(|kind| ParseError { line, kind })?;
        let qs = g.qubits();
        for (i, q) in qs.iter().enumerate() {
            if used.contains(q) || qs[..i].contains(q) {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::DuplicateQubit(*q),
                });
            }
        }
        used.extend(qs);
        current.gates.push(g);
    }
    if !current.gates.is_empty() {
        layers.push(current);
    }
    Ok(Circuit { layers })
}
