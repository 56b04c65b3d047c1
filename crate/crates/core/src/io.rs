//! File formats: device, layout and timeline inputs, and JSON reports.
//!
//! Input files use engineering units (fF, GHz, mK, us, ns). Reports round
//! every number to 12 significant digits; timeline files keep full
//! precision so they reload to identical segments.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::allocator::{AllocationResult, Certificate, CertificateKind, MarginReport};
use crate::compiler::Timeline;
use crate::error::{Error, Result};
use crate::hamiltonian::ResonantLayout;
use crate::physics::{ControlSettings, DerivedParams, DeviceSpec, QubitSpec};
use crate::protocols::{ScheduleSegment, SegmentKind, VirtualZ};

const PER_FF: f64 = 1e15;
const GHZ: f64 = 1e9;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn schema<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitFile {
    #[serde(rename = "c_junction_fF")]
    pub c_junction_ff: f64,
    #[serde(rename = "c_gate_fF")]
    pub c_gate_ff: f64,
    #[serde(rename = "c_mutual_fF")]
    pub c_mutual_ff: f64,
    #[serde(rename = "c_shunt_fF")]
    pub c_shunt_ff: f64,
    #[serde(rename = "c_readout_fF")]
    pub c_readout_ff: f64,
    #[serde(rename = "c_drive_fF")]
    pub c_drive_ff: f64,
    #[serde(rename = "ej0_GHz")]
    pub ej0_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub qubits: Vec<QubitFile>,
    #[serde(rename = "temperature_mK")]
    pub temperature_mk: f64,
    pub coherence_time_us: f64,
    #[serde(rename = "band_GHz")]
    pub band_ghz: [f64; 2],
}

impl DeviceFile {
    pub fn to_spec(&self) -> DeviceSpec {
        DeviceSpec {
            qubits: self
                .qubits
                .iter()
                .map(|q| QubitSpec {
                    c_junction: q.c_junction_ff / PER_FF,
                    c_gate: q.c_gate_ff / PER_FF,
                    c_mutual: q.c_mutual_ff / PER_FF,
                    c_shunt: q.c_shunt_ff / PER_FF,
                    c_readout: q.c_readout_ff / PER_FF,
                    c_drive: q.c_drive_ff / PER_FF,
                    ej0: q.ej0_ghz * GHZ,
                })
                .collect(),
            temperature: self.temperature_mk / 1e3,
            coherence_time: self.coherence_time_us / 1e6,
            band_low: self.band_ghz[0] * GHZ,
            band_high: self.band_ghz[1] * GHZ,
        }
    }

    pub fn from_spec(spec: &DeviceSpec) -> Self {
        DeviceFile {
            qubits: spec
                .qubits
                .iter()
                .map(|q| QubitFile {
                    c_junction_ff: q.c_junction * PER_FF,
                    c_gate_ff: q.c_gate * PER_FF,
                    c_mutual_ff: q.c_mutual * PER_FF,
                    c_shunt_ff: q.c_shunt * PER_FF,
                    c_readout_ff: q.c_readout * PER_FF,
                    c_drive_ff: q.c_drive * PER_FF,
                    ej0_ghz: q.ej0 / GHZ,
                })
                .collect(),
            temperature_mk: spec.temperature * 1e3,
            coherence_time_us: spec.coherence_time * 1e6,
            band_ghz: [spec.band_low / GHZ, spec.band_high / GHZ],
        }
    }
}

/// Parses and range-checks a device description.
pub fn parse_device(text: &str) -> Result<DeviceSpec> {
    let spec = schema::<DeviceFile>(text, "device")?.to_spec();
    spec.check()?;
    Ok(spec)
}

pub fn load_device(path: &Path) -> Result<DeviceSpec> {
    parse_device(&read_text(path)?)
}

pub fn parse_layout(text: &str) -> Result<ResonantLayout> {
    schema(text, "layout")
}

pub fn load_layout(path: &Path) -> Result<ResonantLayout> {
    parse_layout(&read_text(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub label: String,
    pub duration_ns: f64,
    pub flux_phi0: Vec<f64>,
    #[serde(default)]
    pub gate_charge: Option<Vec<f64>>,
    pub layout: ResonantLayout,
    pub kind: SegmentKind,
    #[serde(default)]
    pub virtual_z: Vec<VirtualZ>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineFile {
    pub segments: Vec<SegmentFile>,
    /// Informational; recomputed on load.
    #[serde(default)]
    pub total_duration_ns: f64,
    #[serde(default)]
    pub op_count: usize,
    #[serde(default)]
    pub ledger_rad: Vec<f64>,
}

pub fn timeline_to_json(timeline: &Timeline) -> String {
    let file = TimelineFile {
        segments: timeline
            .segments
            .iter()
            .map(|s| SegmentFile {
                label: s.label.clone(),
                duration_ns: s.duration * 1e9,
                flux_phi0: s.controls.flux.clone(),
                gate_charge: Some(s.controls.gate_charge.clone()),
                layout: s.layout.clone(),
                kind: s.kind.clone(),
                virtual_z: s.virtual_z.clone(),
            })
            .collect(),
        total_duration_ns: timeline.total_duration * 1e9,
        op_count: timeline.op_count,
        ledger_rad: timeline.ledger.theta.clone(),
    };
    serde_json::to_string_pretty(&file).expect("timeline serializes") + "\n"
}

pub fn parse_timeline(text: &str, device: &DeviceSpec) -> Result<Timeline> {
    let file: TimelineFile = schema(text, "timeline")?;
    let segments = file
        .segments
        .into_iter()
        .map(|s| {
            let n = s.flux_phi0.len();
            let gate_charge = s.gate_charge.unwrap_or_else(|| ControlSettings::uniform(n, 0.0).gate_charge);
            if gate_charge.len() != n {
                return Err(Error::Schema(format!(
                    "segment `{}`: {} gate charges for {n} fluxes",
                    s.label,
                    gate_charge.len()
                )));
            }
            if !(s.duration_ns.is_finite() && s.duration_ns >= 0.0) {
                return Err(Error::Schema(format!(
                    "segment `{}`: duration_ns must be finite and >= 0",
                    s.label
                )));
            }
            Ok(ScheduleSegment {
                controls: ControlSettings {
                    flux: s.flux_phi0,
                    gate_charge,
                },
                duration: s.duration_ns / 1e9,
                layout: s.layout,
                label: s.label,
                kind: s.kind,
                virtual_z: s.virtual_z,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Timeline::from_segments(segments, device)
}

pub fn load_timeline(path: &Path, device: &DeviceSpec) -> Result<Timeline> {
    parse_timeline(&read_text(path)?, device)
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        v => v,
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn report_json<T: Serialize>(report: &T) -> String {
    let v = serde_json::to_value(report).expect("report serializes");
    serde_json::to_string_pretty(&round_value(v)).expect("value serializes") + "\n"
}

fn to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI) / GHZ
}

fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI) / 1e6
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivedReport {
    #[serde(rename = "beta_fF")]
    pub beta_ff: f64,
    #[serde(rename = "d_sum_fF")]
    pub d_sum_ff: Vec<f64>,
    #[serde(rename = "e_charge_MHz")]
    pub e_charge_mhz: Vec<f64>,
    #[serde(rename = "e_josephson_GHz")]
    pub e_josephson_ghz: Vec<f64>,
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: Vec<f64>,
    #[serde(rename = "e_couple_MHz")]
    pub e_couple_mhz: Vec<Vec<f64>>,
    #[serde(rename = "j_couple_MHz")]
    pub j_couple_mhz: Vec<Vec<f64>>,
}

impl DerivedReport {
    pub fn new(p: &DerivedParams) -> Self {
        let n = p.n_qubits();
        let rows = |m: &nalgebra::DMatrix<f64>, scale: f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| m[(i, j)] * scale).collect()).collect()
        };
        DerivedReport {
            beta_ff: p.beta * PER_FF,
            d_sum_ff: p.d_sum.iter().map(|d| d * PER_FF).collect(),
            e_charge_mhz: p.e_charge.iter().map(|e| e / 1e6).collect(),
            e_josephson_ghz: p.e_josephson.iter().map(|e| e / GHZ).collect(),
            omega_ghz: p.omega.iter().map(|&w| to_ghz(w)).collect(),
            e_couple_mhz: rows(&p.e_couple, 1e-6),
            j_couple_mhz: rows(&p.j_couple, 1e-6 / (2.0 * PI)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub units: Vec<Vec<usize>>,
    #[serde(rename = "min_spacing_MHz")]
    pub min_spacing_mhz: f64,
    #[serde(rename = "required_span_GHz")]
    pub required_span_ghz: f64,
    #[serde(rename = "available_span_GHz")]
    pub available_span_ghz: f64,
    pub message: String,
}

impl From<&Certificate> for CertificateReport {
    fn from(c: &Certificate) -> Self {
        CertificateReport {
            kind: c.kind,
            units: c.units.clone(),
            min_spacing_mhz: to_mhz(c.min_spacing),
            required_span_ghz: to_ghz(c.required_span),
            available_span_ghz: to_ghz(c.available_span),
            message: c.describe(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AllocationReport {
    pub feasible: bool,
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: Vec<f64>,
    pub flux_phi0: Vec<f64>,
    #[serde(rename = "worst_slack_MHz")]
    pub worst_slack_mhz: Option<f64>,
    pub certificate: Option<CertificateReport>,
    pub validator_pass: Option<bool>,
}

impl AllocationReport {
    pub fn new(result: &AllocationResult, check: Option<&MarginReport>) -> Self {
        AllocationReport {
            feasible: result.feasible,
            omega_ghz: result.omega.iter().map(|&w| to_ghz(w)).collect(),
            flux_phi0: result.flux.clone(),
            worst_slack_mhz: result.worst_slack().map(to_mhz),
            certificate: result.certificate.as_ref().map(CertificateReport::from),
            validator_pass: check.map(|c| c.pass),
        }
    }
}
