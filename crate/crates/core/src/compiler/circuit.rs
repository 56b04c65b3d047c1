use std::fmt;

use crate::error::{Error, Result};
use crate::protocols::{Axis, CouplingKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rotate { axis: Axis, qubit: usize, angle: f64 },
    Pair { kind: CouplingKind, a: usize, b: usize },
    Group { kind: CouplingKind, qubits: Vec<usize> },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rotate { qubit, .. } => vec![*qubit],
            Gate::Pair { a, b, .. } => vec![*a, *b],
            Gate::Group { qubits, .. } => qubits.clone(),
        }
    }

    pub fn is_coupling(&self) -> bool {
        !matches!(self, Gate::Rotate { .. })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rotate { axis, qubit, angle } => write!(f, "R{axis:?} q{qubit} {angle:?}"),
            Gate::Pair { kind, a, b } => write!(f, "{} q{a} q{b}", kind.mnemonic()),
            Gate::Group { kind, qubits } => {
                write!(f, "GROUP {}", kind.mnemonic())?;
                for q in qubits {
                    write!(f, " q{q}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub layers: Vec<Layer>,
}

impl Circuit {
    /// Smallest register that holds every referenced qubit.
    pub fn width(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| &l.gates)
            .flat_map(|g| g.qubits())
            .max()
            .map_or(0, |q| q + 1)
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }

    /// Range, disjointness and angle checks against an `n`-qubit device.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (li, layer) in self.layers.iter().enumerate() {
            let mut seen = vec![false; n];
            for gate in &layer.gates {
                if let Gate::Rotate { angle, .. } = gate {
                    if !angle.is_finite() {
                        return Err(Error::InvalidLayer {
                            layer: li,
                            reason: format!("angle {angle} is not finite"),
                        });
                    }
                }
                if let Gate::Group { qubits, .. } = gate {
                    if qubits.len() < 3 {
                        return Err(Error::InvalidLayer {
                            layer: li,
                            reason: "group needs at least 3 qubits".into(),
                        });
                    }
                }
                for q in gate.qubits() {
                    if q >= n {
                        return Err(Error::QubitOutOfRange { qubit: q, n });
                    }
                    if std::mem::replace(&mut seen[q], true) {
                        return Err(Error::InvalidLayer {
                            layer: li,
                            reason: format!("qubit {q} used twice"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Canonical text form; parsing it gives back the same circuit.
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                writeln!(f, "LAYER")?;
            }
            for gate in &layer.gates {
                writeln!(f, "{gate}")?;
            }
        }
        Ok(())
    }
}
