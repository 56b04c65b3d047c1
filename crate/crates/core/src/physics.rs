//! Circuit-level quantities of the capacitively coupled charge-qubit array.
//!
//! Capacitances are in farads and energies are stored as `E/h` in hertz.
//! Qubit frequencies `omega` and coupling rates `J` are angular rates in
//! radian/second; anything shown to a user is converted back to `omega / 2pi`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// CODATA 2018 exact SI values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub e: f64,
    pub h: f64,
    pub hbar: f64,
    pub k_b: f64,
    pub phi0: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        e: 1.602_176_634e-19,
        h: 6.626_070_15e-34,
        hbar: 6.626_070_15e-34 / (2.0 * PI),
        k_b: 1.380_649e-23,
        phi0: 6.626_070_15e-34 / (2.0 * 1.602_176_634e-19),
    };
}

/// Minimum `E_J / E_C` for the transmon regime.
pub const EJ_EC_MIN: f64 = 100.0;
/// Minimum `hbar omega / (k_B T)` for thermal initialisation.
pub const THERMAL_RATIO_MIN: f64 = 10.0;
/// `(C_m + C_B) / C_J` below this only warns.
pub const XMON_RATIO_MIN: f64 = 10.0;
/// The gate-charge setting every protocol runs at.
pub const DEGENERACY_POINT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpec {
    pub c_junction: f64,
    pub c_gate: f64,
    pub c_mutual: f64,
    pub c_shunt: f64,
    pub c_readout: f64,
    pub c_drive: f64,
    /// Single-junction Josephson energy as `E/h` (Hz).
    pub ej0: f64,
}

impl QubitSpec {
    /// Total capacitance attached to the island, `D_i`.
    pub fn total_capacitance(&self) -> f64 {
        self.c_junction + self.c_gate + self.c_mutual + self.c_shunt + self.c_readout + self.c_drive
    }

    pub fn xmon_ratio(&self) -> f64 {
        if self.c_junction == 0.0 {
            f64::INFINITY
        } else {
            (self.c_mutual + self.c_shunt) / self.c_junction
        }
    }

    /// Largest reachable `E_J/h`, at zero flux.
    pub fn max_josephson(&self) -> f64 {
        2.0 * self.ej0
    }

    fn check(&self, index: usize) -> Result<()> {
        let caps = [
            self.c_junction,
            self.c_gate,
            self.c_mutual,
            self.c_shunt,
            self.c_readout,
            self.c_drive,
        ];
        if caps.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidDevice(format!(
                "qubit {index}: capacitances must be finite and non-negative"
            )));
        }
        if !(self.ej0.is_finite() && self.ej0 > 0.0) {
            return Err(Error::InvalidDevice(format!("qubit {index}: ej0 must be positive")));
        }
        if self.total_capacitance() <= 0.0 {
            return Err(Error::InvalidDevice(format!("qubit {index}: total capacitance is zero")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    pub qubits: Vec<QubitSpec>,
    /// Kelvin.
    pub temperature: f64,
    /// Seconds.
    pub coherence_time: f64,
    /// Allowed `omega / 2pi` range in hertz.
    pub band_low: f64,
    pub band_high: f64,
}

impl DeviceSpec {
    /// `n` identical copies of `qubit`.
    pub fn symmetric(
        n: usize,
        qubit: QubitSpec,
        temperature: f64,
        coherence_time: f64,
        band: (f64, f64),
    ) -> Self {
        DeviceSpec {
            qubits: vec![qubit; n],
            temperature,
            coherence_time,
            band_low: band.0,
            band_high: band.1,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Band as angular frequencies.
    pub fn band_omega(&self) -> (f64, f64) {
        (2.0 * PI * self.band_low, 2.0 * PI * self.band_high)
    }

    pub fn check(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::InvalidDevice("device has no qubits".into()));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            q.check(i)?;
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidDevice("temperature must be positive".into()));
        }
        if !(self.coherence_time.is_finite() && self.coherence_time > 0.0) {
            return Err(Error::InvalidDevice("coherence time must be positive".into()));
        }
        if !(self.band_low.is_finite() && self.band_high.is_finite() && self.band_low < self.band_high)
        {
            return Err(Error::InvalidDevice("band must satisfy low < high".into()));
        }
        if self.band_low < 0.0 {
            return Err(Error::InvalidDevice("band must be non-negative".into()));
        }
        Ok(())
    }
}

/// External flux per qubit (in units of the flux quantum) and gate charge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSettings {
    pub flux: Vec<f64>,
    pub gate_charge: Vec<f64>,
}

impl ControlSettings {
    /// Every qubit at the same flux, gate charges at the degeneracy point.
    pub fn uniform(n: usize, flux: f64) -> Self {
        Self::from_flux(vec![flux; n])
    }

    pub fn from_flux(flux: Vec<f64>) -> Self {
        let n = flux.len();
        ControlSettings {
            flux,
            gate_charge: vec![DEGENERACY_POINT; n],
        }
    }

    pub fn len(&self) -> usize {
        self.flux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flux.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    /// `D_i`, farad.
    pub d_sum: Vec<f64>,
    /// `beta`, farad.
    pub beta: f64,
    /// Charging energies `E_ci / h`, Hz.
    pub e_charge: Vec<f64>,
    /// Coupling energies `E_ij / h`, Hz; symmetric with zero diagonal.
    pub e_couple: DMatrix<f64>,
    /// Effective Josephson energies `E_Ji / h` at the given fluxes, Hz.
    pub e_josephson: Vec<f64>,
    /// Single-junction energies `E_Ji^0 / h`, Hz.
    pub ej0: Vec<f64>,
    /// `omega_i = E_Ji / hbar`, rad/s.
    pub omega: Vec<f64>,
    /// `J_ij = E_ij / (4 hbar)`, rad/s.
    pub j_couple: DMatrix<f64>,
}

impl DerivedParams {
    pub fn n_qubits(&self) -> usize {
        self.omega.len()
    }

    /// Same device with qubit frequencies replaced.
    ///
    /// Frequencies above a qubit's reachable maximum are accepted here;
    /// the allocator is the place that enforces reachability.
    pub fn with_omega(&self, omega: Vec<f64>) -> Result<DerivedParams> {
        if omega.len() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                actual: omega.len(),
            });
        }
        let mut out = self.clone();
        out.e_josephson = omega.iter().map(|w| w / (2.0 * PI)).collect();
        out.omega = omega;
        Ok(out)
    }

    /// Largest reachable angular frequency per qubit, `2 E_J^0 / hbar`.
    pub fn omega_max(&self) -> Vec<f64> {
        self.ej0.iter().map(|e| 2.0 * PI * 2.0 * e).collect()
    }

    /// Largest coupling rate over the given index pairs.
    pub fn max_coupling<I>(&self, pairs: I) -> f64
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        pairs
            .into_iter()
            .map(|(i, j)| self.j_couple[(i, j)])
            .fold(0.0, f64::max)
    }
}

/// `E_J / h = 2 E_J^0 cos(pi flux)` on the canonical branch `flux in [0, 0.5]`.
pub fn josephson_energy(ej0: f64, flux: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&flux) {
        return Err(Error::FluxOutOfRange(flux));
    }
    if flux == 0.5 {
        return Ok(0.0);
    }
    Ok(2.0 * ej0 * (PI * flux).cos())
}

/// Inverse of [`josephson_energy`].
pub fn flux_for_frequency(ej0: f64, target_ej: f64) -> Result<f64> {
    let max = 2.0 * ej0;
    if !(target_ej >= 0.0 && target_ej <= max) {
        return Err(Error::EnergyOutOfRange {
            target_hz: target_ej,
            max_hz: max,
        });
    }
    Ok((target_ej / max).acos() / PI)
}

pub fn derive_params(device: &DeviceSpec, controls: &ControlSettings) -> Result<DerivedParams> {
    device.check()?;
    let n = device.n_qubits();
    if controls.flux.len() != n || controls.gate_charge.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: controls.flux.len().min(controls.gate_charge.len()),
        });
    }
    if let Some(q) = controls.gate_charge.iter().position(|&g| g != DEGENERACY_POINT) {
        return Err(Error::InvalidDevice(format!(
            "qubit {q}: gate charge must sit at the degeneracy point 1/2"
        )));
    }

    let c = PhysicalConstants::SI;
    let d_sum: Vec<f64> = device.qubits.iter().map(QubitSpec::total_capacitance).collect();
    let c_m: Vec<f64> = device.qubits.iter().map(|q| q.c_mutual).collect();
    let beta: f64 = c_m
        .iter()
        .zip(&d_sum)
        .map(|(&cm, &d)| cm * (d - cm) / d)
        .sum();
    if beta <= 0.0 {
        return Err(Error::DegenerateDevice);
    }

    let e2_over_h = c.e * c.e / c.h;
    let e_charge: Vec<f64> = c_m
        .iter()
        .zip(&d_sum)
        .map(|(&cm, &d)| 2.0 * e2_over_h * (1.0 + cm * cm / (beta * d)) / d)
        .collect();
    let e_couple = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            4.0 * e2_over_h * c_m[i] * c_m[j] / (beta * d_sum[i] * d_sum[j])
        }
    });

    let e_josephson = device
        .qubits
        .iter()
        .zip(&controls.flux)
        .map(|(q, &f)| josephson_energy(q.ej0, f))
        .collect::<Result<Vec<f64>>>()?;

    // E/hbar = 2 pi E/h
    let omega = e_josephson.iter().map(|e| 2.0 * PI * e).collect();
    let j_couple = e_couple.map(|e| 2.0 * PI * e / 4.0);

    Ok(DerivedParams {
        d_sum,
        beta,
        e_charge,
        e_couple,
        e_josephson,
        ej0: device.qubits.iter().map(|q| q.ej0).collect(),
        omega,
        j_couple,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitDiagnostics {
    pub qubit: usize,
    pub ej_over_ec: f64,
    pub ej_ec_pass: bool,
    pub thermal_ratio: f64,
    pub thermal_pass: bool,
    pub xmon_ratio: f64,
    /// Advisory only; does not affect [`DeviceReport::pass`].
    pub xmon_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceReport {
    pub qubits: Vec<QubitDiagnostics>,
    pub pass: bool,
    /// Set when the inputs could not be evaluated at all.
    pub error: Option<String>,
}

/// `hbar omega / (k_B T)` for a frequency given as `omega / 2pi` in hertz.
pub fn thermal_ratio(freq_hz: f64, temperature: f64) -> f64 {
    let c = PhysicalConstants::SI;
    c.h * freq_hz / (c.k_b * temperature)
}

/// Regime diagnostics. Never fails; malformed input yields a failing report.
pub fn validate_device(device: &DeviceSpec, controls: &ControlSettings) -> DeviceReport {
    let params = match derive_params(device, controls) {
        Ok(p) => p,
        Err(e) => {
            return DeviceReport {
                qubits: Vec::new(),
                pass: false,
                error: Some(e.to_string()),
            }
        }
    };
    let qubits: Vec<QubitDiagnostics> = device
        .qubits
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let ej_over_ec = params.e_josephson[i] / params.e_charge[i];
            let thermal = thermal_ratio(params.e_josephson[i], device.temperature);
            let xmon = q.xmon_ratio();
            QubitDiagnostics {
                qubit: i,
                ej_over_ec,
                ej_ec_pass: ej_over_ec >= EJ_EC_MIN,
                thermal_ratio: thermal,
                thermal_pass: thermal >= THERMAL_RATIO_MIN,
                xmon_ratio: xmon,
                xmon_warning: xmon < XMON_RATIO_MIN,
            }
        })
        .collect();
    let pass = qubits.iter().all(|q| q.ej_ec_pass && q.thermal_pass);
    DeviceReport {
        qubits,
        pass,
        error: None,
    }
}
