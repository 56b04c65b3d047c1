//! Canonical gate matrices in the register basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{add_flip_flop, z_sign, Operator, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `exp(-i angle sigma_axis / 2)` on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub qubit: usize,
    pub axis: Axis,
    pub angle: f64,
}

/// Which flip-flop gate a coupling segment realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CouplingKind {
    Swap,
    #[serde(rename = "SQISWAP")]
    SqrtISwap,
}

impl CouplingKind {
    /// `J t` reached by the end of the segment.
    pub fn angle(self) -> f64 {
        match self {
            CouplingKind::Swap => std::f64::consts::FRAC_PI_2,
            CouplingKind::SqrtISwap => std::f64::consts::FRAC_PI_4,
        }
    }

    /// Segment length for coupling rate `j` (rad/s).
    pub fn duration(self, j: f64) -> f64 {
        self.angle() / j
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            CouplingKind::Swap => "SWAP",
            CouplingKind::SqrtISwap => "SQISWAP",
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2x2 rotation matrix; index 0 is `|+>`.
pub fn rotation(axis: Axis, angle: f64) -> Operator {
    let (co, si) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let m = match axis {
        Axis::X => [c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0)],
        Axis::Y => [c(co, 0.0), c(-si, 0.0), c(si, 0.0), c(co, 0.0)],
        Axis::Z => [c(co, -si), c(0.0, 0.0), c(0.0, 0.0), c(co, si)],
    };
    DMatrix::from_row_slice(2, 2, &m)
}

/// Lifts an operator on `qubits` (bit `k` of its index is `qubits[k]`) to
/// the full `n`-qubit register.
pub fn embed(n: usize, qubits: &[usize], op: &Operator) -> Result<Operator> {
    let k = qubits.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            actual: op.nrows(),
        });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { qubit: q, n });
    }
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let place = |s: usize| -> usize {
        qubits
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &q)| acc | (((s >> b) & 1) << q))
    };
    let spread: Vec<usize> = (0..1usize << k).map(place).collect();
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let rest = col & !mask;
        let s = qubits
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &q)| acc | (((col >> q) & 1) << b));
        for (r, &sp) in spread.iter().enumerate() {
            let v = op[(r, s)];
            if v != c(0.0, 0.0) {
                out[(rest | sp, col)] = v;
            }
        }
    }
    Ok(out)
}

/// Single-qubit rotation on qubit `q` of `n`.
pub fn embed_rotation(n: usize, r: &Rotation) -> Result<Operator> {
    embed(n, &[r.qubit], &rotation(r.axis, r.angle))
}

/// `exp(-i angle (s+ s- + s- s+))` on a pair: cos/sin mixing of `|+->`
/// and `|-+>`.
pub fn flip_flop_gate(angle: f64) -> Operator {
    let (co, si) = (angle.cos(), angle.sin());
    let mut m = DMatrix::identity(4, 4);
    m[(0b01, 0b01)] = c(co, 0.0);
    m[(0b10, 0b10)] = c(co, 0.0);
    m[(0b01, 0b10)] = c(0.0, -si);
    m[(0b10, 0b01)] = c(0.0, -si);
    m
}

/// Exact exponential of the complete-graph flip-flop Hamiltonian with unit
/// rate on `k` qubits, evaluated at `angle`.
pub fn group_gate(k: usize, angle: f64) -> Result<Operator> {
    let dim = 1usize << k;
    let mut h = DMatrix::zeros(dim, dim);
    for a in 0..k {
        for b in a + 1..k {
            add_flip_flop(&mut h, k, a, b, 1.0);
        }
    }
    Spectrum::from_operator(&h)?.propagator(angle)
}

/// Canonical unit-rate layer gate on all clusters, lifted to `n` qubits.
pub fn coupling_gate(
    n: usize,
    pairs: &[(usize, usize)],
    groups: &[Vec<usize>],
    kind: CouplingKind,
) -> Result<Operator> {
    let angle = kind.angle();
    let mut out = DMatrix::identity(1 << n, 1 << n);
    if !pairs.is_empty() {
        let pair = flip_flop_gate(angle);
        for &(i, j) in pairs {
            out = embed(n, &[i, j], &pair)? * out;
        }
    }
    for g in groups {
        out = embed(n, g, &group_gate(g.len(), angle)?)? * out;
    }
    Ok(out)
}

/// Frame operator `prod_q exp(+i phi_q sigma_z / 2)`, diagonal.
pub fn frame(phi: &[f64]) -> Operator {
    let dim = 1usize << phi.len();
    let diag: Vec<Complex64> = (0..dim)
        .map(|b| {
            let ph: f64 = phi.iter().enumerate().map(|(q, p)| p * z_sign(b, q)).sum();
            Complex64::from_polar(1.0, 0.5 * ph)
        })
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// `frame(phi)^dagger * u * frame(phi)` without forming dense products.
pub fn conjugate_by_frame(u: &Operator, phi: &[f64]) -> Operator {
    let dim = u.nrows();
    let d: Vec<Complex64> = (0..dim)
        .map(|b| {
            let ph: f64 = phi.iter().enumerate().map(|(q, p)| p * z_sign(b, q)).sum();
            Complex64::from_polar(1.0, 0.5 * ph)
        })
        .collect();
    DMatrix::from_fn(dim, dim, |r, col| d[r].conj() * u[(r, col)] * d[col])
}
