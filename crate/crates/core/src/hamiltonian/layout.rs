use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An idle qubit and how many operation slots remain until it is next used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleQubit {
    pub qubit: usize,
    pub k: u32,
}

/// Future distance for a qubit that is never used again; the margin rule
/// then falls to its floor.
pub const NEVER_REUSED: u32 = u32::MAX;

/// Partition of the register into resonant pairs, resonant groups and idle
/// qubits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonantLayout {
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub groups: Vec<Vec<usize>>,
    #[serde(default)]
    pub idle: Vec<IdleQubit>,
}

impl ResonantLayout {
    /// Every qubit idle with the given future distances.
    pub fn all_idle(future: &[u32]) -> Self {
        ResonantLayout {
            pairs: Vec::new(),
            groups: Vec::new(),
            idle: future
                .iter()
                .enumerate()
                .map(|(qubit, &k)| IdleQubit { qubit, k })
                .collect(),
        }
    }

    /// Pairs first, then groups, each as a sorted-as-given index list.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        self.pairs
            .iter()
            .map(|&(i, j)| vec![i, j])
            .chain(self.groups.iter().cloned())
            .collect()
    }

    pub fn has_couplings(&self) -> bool {
        !self.pairs.is_empty() || !self.groups.is_empty()
    }

    /// All index pairs that carry a flip-flop term.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for cluster in self.clusters() {
            for a in 0..cluster.len() {
                for b in a + 1..cluster.len() {
                    out.push((cluster[a], cluster[b]));
                }
            }
        }
        out
    }

    /// Cluster index per qubit, `None` for idle qubits.
    pub fn cluster_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (c, cluster) in self.clusters().iter().enumerate() {
            for &q in cluster {
                if q < n {
                    out[q] = Some(c);
                }
            }
        }
        out
    }

    /// Checks disjointness, coverage of `0..n`, and cluster sizes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        let mut mark = |q: usize, what: &str| -> Result<()> {
            if q >= n {
                return Err(Error::InvalidLayout(format!(
                    "{what} index {q} out of range for {n} qubits"
                )));
            }
            if seen[q] {
                return Err(Error::InvalidLayout(format!("qubit {q} appears more than once")));
            }
            seen[q] = true;
            Ok(())
        };
        for &(i, j) in &self.pairs {
            mark(i, "pair")?;
            mark(j, "pair")?;
        }
        for g in &self.groups {
            if g.len() < 3 {
                return Err(Error::InvalidLayout(format!(
                    "group {g:?} has fewer than 3 qubits"
                )));
            }
            for &q in g {
                mark(q, "group")?;
            }
        }
        for idle in &self.idle {
            if idle.k == 0 {
                return Err(Error::InvalidLayout(format!(
                    "idle qubit {} has future distance 0",
                    idle.qubit
                )));
            }
            mark(idle.qubit, "idle")?;
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLayout(format!("qubit {q} is not covered")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_layout_is_valid() {
        let layout = ResonantLayout {
            pairs: vec![(0, 1)],
            groups: vec![vec![2, 3, 4]],
            idle: vec![IdleQubit { qubit: 5, k: 2 }],
        };
        layout.validate(6).unwrap();
        assert_eq!(
            layout.coupled_pairs(),
            vec![(0, 1), (2, 3), (2, 4), (3, 4)]
        );
        assert_eq!(
            layout.cluster_index(6),
            vec![Some(0), Some(0), Some(1), Some(1), Some(1), None]
        );
    }

    #[test]
    fn rejects_overlap_and_gaps() {
        let overlap = ResonantLayout {
            pairs: vec![(0, 1), (1, 2)],
            ..Default::default()
        };
        assert!(overlap.validate(3).is_err());

        let gap = ResonantLayout {
            pairs: vec![(0, 1)],
            ..Default::default()
        };
        assert!(gap.validate(3).is_err());

        let self_pair = ResonantLayout {
            pairs: vec![(0, 0)],
            ..Default::default()
        };
        assert!(self_pair.validate(1).is_err());

        let small_group = ResonantLayout {
            groups: vec![vec![0, 1]],
            ..Default::default()
        };
        assert!(small_group.validate(2).is_err());

        let zero_k = ResonantLayout::all_idle(&[1, 0]);
        assert!(zero_k.validate(2).is_err());
    }

    #[test]
    fn json_shape() {
        let layout: ResonantLayout = serde_json::from_str(
            r#"{"pairs": [[0, 1]], "groups": [[2, 3, 4]], "idle": [{"qubit": 5, "k": 3}]}"#,
        )
        .unwrap();
        assert_eq!(layout.pairs, vec![(0, 1)]);
        assert_eq!(layout.idle[0].k, 3);
    }
}
