use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{HamiltonianMatrix, Operator, Spectrum};
use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-10;
/// Ground space counts as degenerate when the gap is below this fraction of
/// the spectral range.
const DEGENERACY_FRACTION: f64 = 1e-9;

/// Pure state of the register in the `|+>/|->` product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: DVector<Complex64>,
    pub n_qubits: usize,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Contract(format!("state length {dim} is not a power of two")));
        }
        let state = QuantumState {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes: DVector::from_vec(amplitudes),
        };
        if (state.norm() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!("state norm {} is not 1", state.norm())));
        }
        Ok(state)
    }

    /// Computational basis state; index 0 is `|++...+>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            amplitudes,
            n_qubits,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &QuantumState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Probability that qubit `q` is found in `|->`.
    pub fn excitation(&self, q: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| (b >> q) & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply(&self, u: &Operator) -> Result<QuantumState> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.ncols(),
                actual: self.dim(),
            });
        }
        Ok(QuantumState {
            amplitudes: u * &self.amplitudes,
            n_qubits: self.n_qubits,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: QuantumState,
    pub energy: f64,
    /// Distance to the next eigenvalue (0 for a one-dimensional space).
    pub gap: f64,
    /// Set when the ground space is degenerate; the returned vector is then
    /// one deterministic member of it.
    pub degenerate: bool,
}

/// Lowest eigenvector, phased so its largest amplitude is real positive.
pub fn ground_state(h: &HamiltonianMatrix) -> Result<GroundState> {
    let spec = Spectrum::new(h)?;
    let mut order: Vec<usize> = (0..spec.eigenvalues.len()).collect();
    // stable sort keeps column order as the tie-break
    order.sort_by(|&a, &b| spec.eigenvalues[a].total_cmp(&spec.eigenvalues[b]));
    let lowest = order[0];
    let energy = spec.eigenvalues[lowest];
    let top = spec.eigenvalues[*order.last().unwrap()];
    let gap = order
        .get(1)
        .map(|&i| spec.eigenvalues[i] - energy)
        .unwrap_or(0.0);
    let range = top - energy;
    let degenerate = order.len() > 1 && gap <= DEGENERACY_FRACTION * range.max(f64::MIN_POSITIVE);

    let mut v: DVector<Complex64> = spec.eigenvectors.column(lowest).into_owned();
    let mut pivot = 0;
    for (i, a) in v.iter().enumerate() {
        if a.norm() > v[pivot].norm() + 1e-12 {
            pivot = i;
        }
    }
    let phase = v[pivot].conj() / v[pivot].norm();
    v *= phase;
    v /= Complex64::new(v.norm(), 0.0);
    v[pivot] = Complex64::new(v[pivot].norm(), 0.0);

    if degenerate {
        log::warn!("ground space is degenerate (gap {gap:e}); returning one member");
    }
    Ok(GroundState {
        state: QuantumState {
            amplitudes: v,
            n_qubits: h.n_qubits,
        },
        energy,
        gap,
        degenerate,
    })
}

/// Reduced density matrix on `subset`; bit `k` of the result index is
/// `subset[k]`.
pub fn reduced_density_matrix(psi: &QuantumState, subset: &[usize]) -> Result<Operator> {
    let n = psi.n_qubits;
    check_subset(subset, n, true)?;
    let rest: Vec<usize> = (0..n).filter(|q| !subset.contains(q)).collect();
    let m = bipartite_matrix(psi, subset, &rest);
    Ok(&m * m.adjoint())
}

fn check_subset(subset: &[usize], n: usize, allow_full: bool) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidPartition("partition is empty".into()));
    }
    let mut seen = vec![false; n];
    for &q in subset {
        if q >= n {
            return Err(Error::InvalidPartition(format!("qubit {q} out of range")));
        }
        if seen[q] {
            return Err(Error::InvalidPartition(format!("qubit {q} repeated")));
        }
        seen[q] = true;
    }
    if !allow_full && subset.len() == n {
        return Err(Error::InvalidPartition("partition must be a proper subset".into()));
    }
    Ok(())
}

/// `M[a, b] = psi(a on A, b on B)`.
fn bipartite_matrix(psi: &QuantumState, a: &[usize], b: &[usize]) -> Operator {
    let mut m = DMatrix::zeros(1 << a.len(), 1 << b.len());
    for (idx, amp) in psi.amplitudes.iter().enumerate() {
        let pack = |qs: &[usize]| {
            qs.iter()
                .enumerate()
                .fold(0usize, |acc, (k, &q)| acc | (((idx >> q) & 1) << k))
        };
        m[(pack(a), pack(b))] = *amp;
    }
    m
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &Operator) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `S(A) + S(B) - S(AB)` between `partition` and its complement, in nats.
/// The joint state is pure, so `S(AB) = 0`.
pub fn mutual_information(psi: &QuantumState, partition: &[usize]) -> Result<f64> {
    let n = psi.n_qubits;
    check_subset(partition, n, false)?;
    let rest: Vec<usize> = (0..n).filter(|q| !partition.contains(q)).collect();
    let m = bipartite_matrix(psi, partition, &rest);
    let rho_a = &m * m.adjoint();
    let rho_b = (m.adjoint() * &m).transpose();
    Ok(von_neumann_entropy(&rho_a) + von_neumann_entropy(&rho_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::tests::params;
    use crate::hamiltonian::build_full;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_state_has_no_mutual_information() {
        // |+-> (x) |+-> on qubits (0,1),(2,3): index bits q1 and q3 set
        let psi = QuantumState::basis(4, 0b1010).unwrap();
        assert!(mutual_information(&psi, &[0, 1]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn bell_state_mutual_information() {
        let s = 1.0 / 2f64.sqrt();
        let psi = QuantumState::new(vec![c(0.0, 0.0), c(0.0, -s), c(s, 0.0), c(0.0, 0.0)]).unwrap();
        let mi = mutual_information(&psi, &[0]).unwrap();
        assert!((mi - 2.0 * 2f64.ln()).abs() < 1e-12, "{mi}");
    }

    #[test]
    fn invalid_partitions() {
        let psi = QuantumState::basis(2, 0).unwrap();
        assert!(mutual_information(&psi, &[]).is_err());
        assert!(mutual_information(&psi, &[0, 1]).is_err());
        assert!(mutual_information(&psi, &[2]).is_err());
        assert!(mutual_information(&psi, &[0, 0]).is_err());
    }

    #[test]
    fn uncoupled_ground_state_is_all_plus() {
        let h = build_full(&params(vec![3e10, 4e10, 5e10], 0.0)).unwrap();
        let g = ground_state(&h).unwrap();
        assert_eq!(g.state.amplitudes[0], c(1.0, 0.0));
        assert!(!g.degenerate);
    }

    #[test]
    fn pure_coupling_ground_state() {
        // omega = 0: H = J sx sx; ground energy -J, two-fold degenerate
        let j = 1e8;
        let h = build_full(&params(vec![0.0, 0.0], j)).unwrap();
        let g = ground_state(&h).unwrap();
        assert!((g.energy + j).abs() < 1e-6);
        assert!(g.degenerate);
        let hv = &h.matrix * &g.state.amplitudes;
        let resid = (hv + g.state.amplitudes.map(|a| a * j)).norm();
        assert!(resid < 1e-6 * j);
        // phase convention
        let max = g.state.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let pivot = g.state.amplitudes.iter().find(|a| (a.norm() - max).abs() < 1e-12).unwrap();
        assert!(pivot.im == 0.0 && pivot.re > 0.0);
    }

    #[test]
    fn pure_coupling_ground_state_lifted_by_small_drift() {
        // tiny omega on the pair selects the (|++> - |-->)/sqrt2 branch
        let j = 1e8;
        let h = build_full(&params(vec![1e3, 1e3], j)).unwrap();
        let g = ground_state(&h).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((g.state.amplitudes[0b00].norm() - s).abs() < 1e-4);
        assert!((g.state.amplitudes[0b11].norm() - s).abs() < 1e-4);
        assert!(g.state.amplitudes[0b01].norm() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn schmidt_symmetry(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16), cut in 1usize..4) {
            let amps: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let psi = QuantumState::new(amps.iter().map(|a| a / norm).collect()).unwrap();
            let a: Vec<usize> = (0..cut).collect();
            let b: Vec<usize> = (cut..4).collect();
            let sa = von_neumann_entropy(&reduced_density_matrix(&psi, &a).unwrap());
            let sb = von_neumann_entropy(&reduced_density_matrix(&psi, &b).unwrap());
            prop_assert!((sa - sb).abs() < 1e-9);
        }
    }
}
