//! Two-level Hamiltonians of the coupled array, in units of `H / hbar`.
//!
//! Basis convention: bit `i` of a basis index is qubit `i` (little-endian);
//! bit value 0 is `|+_i>` (sigma_z = +1) and 1 is `|-_i>` (sigma_z = -1).

mod evolution;
mod layout;
mod state;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use evolution::{compare, evolve, propagator, rwa_gap, Spectrum};
pub use layout::{IdleQubit, ResonantLayout, NEVER_REUSED};
pub use state::{
    ground_state, mutual_information, reduced_density_matrix, von_neumann_entropy, GroundState,
    QuantumState,
};

use crate::error::{Error, Result};
use crate::physics::DerivedParams;

pub type Operator = DMatrix<Complex64>;

/// Default cap on dense simulation size.
pub const DEFAULT_MAX_QUBITS: usize = 12;
/// Hard upper bound for the `CHARGEQ_MAX_QUBITS` override.
pub const ABSOLUTE_MAX_QUBITS: usize = 14;

/// Dense simulation cap, honoring `CHARGEQ_MAX_QUBITS` (clamped to 14).
pub fn simulation_cap() -> usize {
    std::env::var("CHARGEQ_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(ABSOLUTE_MAX_QUBITS))
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

pub fn check_simulable(n: usize) -> Result<()> {
    let cap = simulation_cap();
    if n > cap {
        return Err(Error::SizeCap { n, cap });
    }
    Ok(())
}

/// Relative tolerance for "equal frequency" inside a resonant cluster.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub matrix: Operator,
    pub n_qubits: usize,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest `|H - H^dagger|` entry.
    pub fn hermitian_deviation(&self) -> f64 {
        max_hermitian_deviation(&self.matrix)
    }

    /// Total `sigma_z` operator of the register, diagonal.
    pub fn total_sigma_z(n: usize) -> Operator {
        let dim = 1usize << n;
        DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                let down = (r as u64).count_ones() as f64;
                Complex64::new(n as f64 - 2.0 * down, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

pub(crate) fn max_hermitian_deviation(m: &Operator) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// sigma_z eigenvalue of qubit `q` in basis state `b`.
#[inline]
pub(crate) fn z_sign(b: usize, q: usize) -> f64 {
    if (b >> q) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn drift(omega: &[f64]) -> Operator {
    let n = omega.len();
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let e: f64 = omega.iter().enumerate().map(|(q, w)| -0.5 * w * z_sign(b, q)).sum();
        m[(b, b)] = Complex64::new(e, 0.0);
    }
    m
}

/// Full model: `-sum omega_i/2 sz_i + sum_{i<j} J_ij sx_i sx_j`.
pub fn build_full(params: &DerivedParams) -> Result<HamiltonianMatrix> {
    let n = params.n_qubits();
    check_simulable(n)?;
    let mut m = drift(&params.omega);
    let dim = 1usize << n;
    for i in 0..n {
        for j in i + 1..n {
            let jij = params.j_couple[(i, j)];
            if jij == 0.0 {
                continue;
            }
            let mask = (1usize << i) | (1usize << j);
            for b in 0..dim {
                m[(b ^ mask, b)] += Complex64::new(jij, 0.0);
            }
        }
    }
    Ok(HamiltonianMatrix { matrix: m, n_qubits: n })
}

/// Adds `J (s+_i s-_j + s-_i s+_j)` to `m`.
pub(crate) fn add_flip_flop(m: &mut Operator, n: usize, i: usize, j: usize, rate: f64) {
    let mask = (1usize << i) | (1usize << j);
    for b in 0..(1usize << n) {
        if ((b >> i) & 1) != ((b >> j) & 1) {
            m[(b ^ mask, b)] += Complex64::new(rate, 0.0);
        }
    }
}

/// Relative spread `(max - min) / max|omega|` of the frequencies in `cluster`.
pub fn frequency_spread(omega: &[f64], cluster: &[usize]) -> f64 {
    let vals = cluster.iter().map(|&q| omega[q]);
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
        (lo.min(w), hi.max(w))
    });
    let scale = lo.abs().max(hi.abs());
    if scale == 0.0 {
        0.0
    } else {
        (hi - lo) / scale
    }
}

/// Rotating-wave model for `layout`: drift plus flip-flop terms inside
/// each pair and group only.
pub fn build_rwa(params: &DerivedParams, layout: &ResonantLayout) -> Result<HamiltonianMatrix> {
    let n = params.n_qubits();
    check_simulable(n)?;
    layout.validate(n)?;
    for cluster in layout.clusters() {
        let spread = frequency_spread(&params.omega, &cluster);
        if spread > RESONANCE_TOLERANCE {
            return Err(Error::ResonanceViolation { cluster, spread });
        }
    }
    let mut m = drift(&params.omega);
    for (i, j) in layout.coupled_pairs() {
        add_flip_flop(&mut m, n, i, j, params.j_couple[(i, j)]);
    }
    Ok(HamiltonianMatrix { matrix: m, n_qubits: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::DerivedParams;

    pub(crate) fn params(omega: Vec<f64>, j: f64) -> DerivedParams {
        let n = omega.len();
        let jm = DMatrix::from_fn(n, n, |r, c| if r == c { 0.0 } else { j });
        DerivedParams {
            d_sum: vec![1e-13; n],
            beta: 1e-14,
            e_charge: vec![1e8; n],
            e_couple: jm.map(|x| 4.0 * x / (2.0 * std::f64::consts::PI)),
            e_josephson: omega.iter().map(|w| w / (2.0 * std::f64::consts::PI)).collect(),
            ej0: vec![25e9; n],
            omega,
            j_couple: jm,
        }
    }

    fn sorted_eigs(h: &HamiltonianMatrix) -> Vec<f64> {
        let mut e = Spectrum::new(h).unwrap().eigenvalues;
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn single_qubit_drift() {
        let w = 2.0 * std::f64::consts::PI * 5e9;
        let h = build_full(&params(vec![w], 0.0)).unwrap();
        assert_eq!(h.matrix[(0, 0)].re, -w / 2.0);
        assert_eq!(h.matrix[(1, 1)].re, w / 2.0);
    }

    #[test]
    fn resonant_pair_full_spectrum() {
        let (w, j) = (3.0e10, 2.0e8);
        let h = build_full(&params(vec![w, w], j)).unwrap();
        let e = sorted_eigs(&h);
        let r = (w * w + j * j).sqrt();
        let want = [-r, -j, j, r];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_params_give_zero_matrix() {
        let h = build_full(&params(vec![0.0; 3], 0.0)).unwrap();
        assert!(h.matrix.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rwa_pair_only_couples_pair() {
        let w = 1e10;
        let p = params(vec![w, w, 2.0 * w], 1e7);
        let layout = ResonantLayout {
            pairs: vec![(0, 1)],
            groups: vec![],
            idle: vec![IdleQubit { qubit: 2, k: 1 }],
        };
        let h = build_rwa(&p, &layout).unwrap();
        // |+-+> = 0b010 <-> |-++> = 0b001
        assert_eq!(h.matrix[(0b001, 0b010)].re, 1e7);
        // no coupling touching qubit 2
        assert_eq!(h.matrix[(0b100, 0b010)].norm(), 0.0);
        assert_eq!(h.matrix[(0b110, 0b000)].norm(), 0.0);
        let off: usize = h
            .matrix
            .iter()
            .enumerate()
            .filter(|(idx, z)| idx % 8 != idx / 8 && z.norm() > 0.0)
            .count();
        // (01 <-> 10) for qubit 2 in either state, both directions
        assert_eq!(off, 4);
    }

    #[test]
    fn rwa_empty_layout_is_drift() {
        let p = params(vec![1e10, 2e10], 1e7);
        let h = build_rwa(&p, &ResonantLayout::all_idle(&[1, 1])).unwrap();
        assert_eq!(h.matrix, drift(&p.omega));
    }

    #[test]
    fn rwa_group_has_three_terms() {
        let w = 1e10;
        let p = params(vec![w; 3], 1e7);
        let layout = ResonantLayout {
            groups: vec![vec![0, 1, 2]],
            ..Default::default()
        };
        let h = build_rwa(&p, &layout).unwrap();
        for (a, b) in [(0b001, 0b010), (0b001, 0b100), (0b010, 0b100)] {
            assert_eq!(h.matrix[(a, b)].re, 1e7);
        }
    }

    #[test]
    fn rwa_rejects_detuned_cluster() {
        let p = params(vec![1e10, 1.1e10], 1e7);
        let layout = ResonantLayout {
            pairs: vec![(0, 1)],
            ..Default::default()
        };
        assert!(matches!(
            build_rwa(&p, &layout),
            Err(Error::ResonanceViolation { .. })
        ));
    }

    #[test]
    fn size_cap_enforced() {
        let p = params(vec![1e10; DEFAULT_MAX_QUBITS + 1], 0.0);
        if simulation_cap() == DEFAULT_MAX_QUBITS {
            assert!(matches!(build_full(&p), Err(Error::SizeCap { .. })));
        }
    }
}
