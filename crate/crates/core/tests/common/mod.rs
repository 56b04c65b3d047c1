#![allow(dead_code)]

use chargeq::physics::{DeviceSpec, PhysicalConstants, QubitSpec};

/// Pair coupling of the symmetric test devices, `J / 2pi` in hertz.
pub const J_HZ: f64 = 5e6;

/// `n` identical qubits with total capacitance 1.55 pF whose mutual
/// capacitance is chosen so that `J / 2pi = j_hz` exactly.
pub fn symmetric_device(n: usize, j_hz: f64) -> DeviceSpec {
    let c = PhysicalConstants::SI;
    let d = 1.55e-12;
    // E_ij / h = 4 e^2 Cm / (n (D - Cm) D h) and E_ij / h = 4 J / 2pi
    let x = 4.0 * j_hz * n as f64 * d * c.h / (4.0 * c.e * c.e);
    let cm = x * d / (1.0 + x);
    let rest = (d - cm) / 5.0;
    let q = QubitSpec {
        c_junction: rest,
        c_gate: rest,
        c_mutual: cm,
        c_shunt: rest,
        c_readout: rest,
        c_drive: rest,
        ej0: 25e9,
    };
    DeviceSpec::symmetric(n, q, 0.02, 100e-6, (5e9, 50e9))
}

pub fn data(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}
