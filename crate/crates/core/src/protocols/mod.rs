//! Gate protocols as timed flux settings.
//!
//! A [`ScheduleSegment`] holds one flux configuration for a fixed time.
//! Phases from free precession are not undone physically; they are tracked
//! per qubit in a [`VirtualPhaseLedger`], which also absorbs Z rotations.

mod gates;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use gates::{
    conjugate_by_frame, coupling_gate, embed, embed_rotation, flip_flop_gate, frame, group_gate,
    rotation, Axis, CouplingKind, Rotation,
};

use crate::allocator::{allocate, Band, MarginRule};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    check_simulable, IdleQubit, Operator, QuantumState, ResonantLayout, NEVER_REUSED,
};
use crate::physics::{
    derive_params, thermal_ratio, ControlSettings, DerivedParams, DeviceSpec, PhysicalConstants,
    THERMAL_RATIO_MIN,
};

/// Largest accepted relative spread `(max - min) / mean` of the coupling
/// rates inside one coupling segment.
pub const COUPLING_UNIFORMITY: f64 = 1e-2;
/// Default duration of a physical X/Y rotation.
pub const DEFAULT_SINGLE_QUBIT_TIME: f64 = 20e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SegmentKind {
    Idle,
    Init,
    Single { rotations: Vec<Rotation> },
    Swap,
    #[serde(rename = "sqiswap")]
    SqrtISwap,
}

impl SegmentKind {
    pub fn coupling(&self) -> Option<CouplingKind> {
        match self {
            SegmentKind::Swap => Some(CouplingKind::Swap),
            SegmentKind::SqrtISwap => Some(CouplingKind::SqrtISwap),
            _ => None,
        }
    }
}

impl From<CouplingKind> for SegmentKind {
    fn from(kind: CouplingKind) -> Self {
        match kind {
            CouplingKind::Swap => SegmentKind::Swap,
            CouplingKind::SqrtISwap => SegmentKind::SqrtISwap,
        }
    }
}

/// Z rotation applied to the frame at the start of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualZ {
    pub qubit: usize,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSegment {
    pub controls: ControlSettings,
    /// Seconds.
    pub duration: f64,
    pub layout: ResonantLayout,
    pub label: String,
    pub kind: SegmentKind,
    pub virtual_z: Vec<VirtualZ>,
}

impl ScheduleSegment {
    /// Zero-length segments only touch the frame.
    pub fn is_virtual(&self) -> bool {
        self.duration == 0.0
    }
}

/// Accumulated frame phase per qubit.
///
/// The logical state is `frame(theta)^dagger` applied to the physical one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualPhaseLedger {
    pub theta: Vec<f64>,
}

impl VirtualPhaseLedger {
    pub fn new(n: usize) -> Self {
        VirtualPhaseLedger {
            theta: vec![0.0; n],
        }
    }

    /// Free precession for `tau` seconds at angular frequencies `omega`.
    pub fn advance(&mut self, omega: &[f64], tau: f64) {
        for (t, w) in self.theta.iter_mut().zip(omega) {
            *t += w * tau;
        }
    }

    /// Logical `RZ(angle)` on `qubit`.
    pub fn rotate_z(&mut self, qubit: usize, angle: f64) {
        self.theta[qubit] += angle;
    }

    pub fn frame(&self) -> Operator {
        frame(&self.theta)
    }

    /// Physical propagator to logical: `frame(theta)^dagger u`.
    pub fn strip(&self, u: &Operator) -> Operator {
        self.frame().adjoint() * u
    }
}

/// Result of [`Synthesizer::prepare_initial`].
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub controls: ControlSettings,
    pub omega: Vec<f64>,
    /// `hbar omega_i / k_B T` per qubit.
    pub thermal_ratios: Vec<f64>,
    /// `|++...+>`; `None` above the dense simulation cap.
    pub expected: Option<QuantumState>,
}

/// Builds segments for one device.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    device: DeviceSpec,
    params: DerivedParams,
    rule: MarginRule,
    single_qubit_time: f64,
}

impl Synthesizer {
    pub fn new(device: &DeviceSpec) -> Result<Self> {
        device.check()?;
        let params = derive_params(device, &ControlSettings::uniform(device.n_qubits(), 0.0))?;
        Ok(Synthesizer {
            device: device.clone(),
            params,
            rule: MarginRule::default(),
            single_qubit_time: DEFAULT_SINGLE_QUBIT_TIME,
        })
    }

    pub fn with_rule(mut self, rule: MarginRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_single_qubit_time(mut self, seconds: f64) -> Self {
        self.single_qubit_time = seconds;
        self
    }

    pub fn device(&self) -> &DeviceSpec {
        &self.device
    }

    /// Circuit energies at zero flux; couplings do not depend on flux.
    pub fn params(&self) -> &DerivedParams {
        &self.params
    }

    pub fn rule(&self) -> &MarginRule {
        &self.rule
    }

    pub fn n_qubits(&self) -> usize {
        self.device.n_qubits()
    }

    fn band(&self) -> Band {
        Band::from_hz(self.device.band_low, self.device.band_high)
    }

    fn check_future(&self, future: &[u32]) -> Result<()> {
        if future.len() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                actual: future.len(),
            });
        }
        Ok(())
    }

    pub fn idle_layout(&self, future: &[u32]) -> ResonantLayout {
        ResonantLayout::all_idle(future)
    }

    /// Flux settings satisfying the margins of `layout` within `band`.
    fn place(&self, layout: &ResonantLayout, band: Band) -> Result<(ControlSettings, Vec<f64>)> {
        let result = allocate(layout, &self.params, band, &self.rule)?;
        if !result.feasible {
            let why = result
                .certificate
                .map(|c| c.describe())
                .unwrap_or_else(|| "no placement".into());
            return Err(Error::Crowding(why));
        }
        Ok((ControlSettings::from_flux(result.flux), result.omega))
    }

    /// Spreads every qubit apart at the idle margin and declares `|++...+>`.
    ///
    /// Frequencies are kept above the thermal floor `hbar omega >= 10 k_B T`.
    pub fn prepare_initial(&self) -> Result<Preparation> {
        let n = self.n_qubits();
        let c = PhysicalConstants::SI;
        let floor_hz = THERMAL_RATIO_MIN * c.k_b * self.device.temperature / c.h;
        let low = self.device.band_low.max(floor_hz);
        if low >= self.device.band_high {
            return Err(Error::PreparationInvalid(format!(
                "thermal floor {:.6} GHz at {} K is not below the band top {:.6} GHz",
                floor_hz / 1e9,
                self.device.temperature,
                self.device.band_high / 1e9
            )));
        }
        let layout = self.idle_layout(&vec![1; n]);
        let (controls, omega) = self.place(&layout, Band::from_hz(low, self.device.band_high))?;
        let thermal_ratios: Vec<f64> = omega
            .iter()
            .map(|w| thermal_ratio(w / (2.0 * PI), self.device.temperature))
            .collect();
        if let Some(q) = thermal_ratios.iter().position(|&r| r < THERMAL_RATIO_MIN) {
            return Err(Error::PreparationInvalid(format!(
                "qubit {q} has hbar omega / k_B T = {:.6} below {THERMAL_RATIO_MIN}",
                thermal_ratios[q]
            )));
        }
        let expected = check_simulable(n)
            .ok()
            .map(|_| QuantumState::basis(n, 0))
            .transpose()?;
        Ok(Preparation {
            controls,
            omega,
            thermal_ratios,
            expected,
        })
    }

    /// Zero-length marker carrying the preparation fluxes.
    pub fn init_segment(&self) -> Result<ScheduleSegment> {
        let prep = self.prepare_initial()?;
        Ok(ScheduleSegment {
            controls: prep.controls,
            duration: 0.0,
            layout: self.idle_layout(&vec![1; self.n_qubits()]),
            label: "INIT".into(),
            kind: SegmentKind::Init,
            virtual_z: Vec::new(),
        })
    }

    /// One rotation. Z is virtual and takes no time.
    pub fn single_qubit_segment(
        &self,
        qubit: usize,
        axis: Axis,
        angle: f64,
        future: &[u32],
    ) -> Result<ScheduleSegment> {
        let r = Rotation { qubit, axis, angle };
        if axis == Axis::Z {
            self.check_rotation(&r)?;
            return self.virtual_segment(vec![VirtualZ { qubit, angle }], future);
        }
        self.rotation_segment(vec![r], future)
    }

    fn check_rotation(&self, r: &Rotation) -> Result<()> {
        if r.qubit >= self.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: r.qubit,
                n: self.n_qubits(),
            });
        }
        if !r.angle.is_finite() {
            return Err(Error::Contract(format!("rotation angle {} is not finite", r.angle)));
        }
        Ok(())
    }

    /// Zero-duration segment that only moves the frame.
    pub fn virtual_segment(&self, virtual_z: Vec<VirtualZ>, future: &[u32]) -> Result<ScheduleSegment> {
        self.check_future(future)?;
        let layout = self.idle_layout(future);
        let (controls, _) = self.place(&layout, self.band())?;
        let label = virtual_z
            .iter()
            .map(|z| format!("RZ q{} {}", z.qubit, z.angle))
            .collect::<Vec<_>>()
            .join("; ");
        Ok(ScheduleSegment {
            controls,
            duration: 0.0,
            layout,
            label,
            kind: SegmentKind::Idle,
            virtual_z,
        })
    }

    /// Simultaneous X/Y rotations on distinct qubits, all idle otherwise.
    pub fn rotation_segment(&self, rotations: Vec<Rotation>, future: &[u32]) -> Result<ScheduleSegment> {
        self.check_future(future)?;
        let mut seen = vec![false; self.n_qubits()];
        for r in &rotations {
            self.check_rotation(r)?;
            if r.axis == Axis::Z {
                return Err(Error::Contract("Z rotations are virtual".into()));
            }
            if std::mem::replace(&mut seen[r.qubit], true) {
                return Err(Error::InvalidLayout(format!("qubit {} rotated twice", r.qubit)));
            }
        }
        let layout = self.idle_layout(future);
        let (controls, _) = self.place(&layout, self.band())?;
        let label = rotations
            .iter()
            .map(|r| format!("R{:?} q{} {}", r.axis, r.qubit, r.angle))
            .collect::<Vec<_>>()
            .join("; ");
        Ok(ScheduleSegment {
            controls,
            duration: self.single_qubit_time,
            layout,
            label,
            kind: SegmentKind::Single { rotations },
            virtual_z: Vec::new(),
        })
    }

    /// Mean intra-cluster coupling rate, after the uniformity check.
    pub fn common_coupling(&self, layout: &ResonantLayout) -> Result<f64> {
        let rates: Vec<(usize, usize, f64)> = layout
            .coupled_pairs()
            .into_iter()
            .map(|(i, j)| (i, j, self.params.j_couple[(i, j)]))
            .collect();
        if rates.is_empty() {
            return Err(Error::InvalidLayout("coupling segment without clusters".into()));
        }
        if let Some(&(i, j, _)) = rates.iter().find(|r| r.2 <= 0.0) {
            return Err(Error::ZeroCoupling(i, j));
        }
        let lo = rates.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
        let hi = rates.iter().map(|r| r.2).fold(0.0, f64::max);
        let mean = rates.iter().map(|r| r.2).sum::<f64>() / rates.len() as f64;
        let spread = (hi - lo) / mean;
        if spread > COUPLING_UNIFORMITY {
            return Err(Error::NonuniformCoupling {
                spread,
                tolerance: COUPLING_UNIFORMITY,
            });
        }
        Ok(mean)
    }

    /// Parallel pairs and groups, each internally resonant, for the time
    /// that `kind` needs at the common coupling rate.
    pub fn coupling_segment(
        &self,
        pairs: &[(usize, usize)],
        groups: &[Vec<usize>],
        kind: CouplingKind,
        future: &[u32],
    ) -> Result<ScheduleSegment> {
        self.check_future(future)?;
        let n = self.n_qubits();
        let mut active = vec![false; n];
        for &q in pairs.iter().flat_map(|(i, j)| [i, j]).chain(groups.iter().flatten()) {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if std::mem::replace(&mut active[q], true) {
                return Err(Error::InvalidLayout(format!("qubit {q} appears in two clusters")));
            }
        }
        let layout = ResonantLayout {
            pairs: pairs.to_vec(),
            groups: groups.to_vec(),
            idle: (0..n)
                .filter(|&q| !active[q])
                .map(|q| IdleQubit {
                    qubit: q,
                    k: future[q].max(1),
                })
                .collect(),
        };
        layout.validate(n)?;
        let j = self.common_coupling(&layout)?;
        let (controls, _) = self.place(&layout, self.band())?;
        let mut parts: Vec<String> = pairs
            .iter()
            .map(|(a, b)| format!("{} q{a} q{b}", kind.mnemonic()))
            .collect();
        parts.extend(groups.iter().map(|g| {
            let qs: Vec<String> = g.iter().map(|q| format!("q{q}")).collect();
            format!("GROUP {} {}", kind.mnemonic(), qs.join(" "))
        }));
        Ok(ScheduleSegment {
            controls,
            duration: kind.duration(j),
            layout,
            label: parts.join("; "),
            kind: kind.into(),
            virtual_z: Vec::new(),
        })
    }

    /// Future distances with every qubit reused immediately.
    pub fn immediate(&self) -> Vec<u32> {
        vec![1; self.n_qubits()]
    }

    /// Future distances with no qubit reused.
    pub fn never_reused(&self) -> Vec<u32> {
        vec![NEVER_REUSED; self.n_qubits()]
    }
}

/// Ideal physical action of `segment` at frame phases `phi` (before the
/// segment) and frequencies `omega`: free precession times the canonical
/// gate.
pub fn ideal_segment(segment: &ScheduleSegment, phi: &[f64], omega: &[f64]) -> Result<Operator> {
    let n = phi.len();
    let drift: Vec<f64> = omega.iter().map(|w| w * segment.duration).collect();
    let gate = match segment.kind.coupling() {
        Some(kind) => coupling_gate(n, &segment.layout.pairs, &segment.layout.groups, kind)?,
        None => kick(segment, phi)?,
    };
    Ok(frame(&drift) * gate)
}

/// Instantaneous part of a segment in the physical frame: the X/Y
/// rotations, taken relative to the frame `phi`. Identity otherwise.
pub fn kick(segment: &ScheduleSegment, phi: &[f64]) -> Result<Operator> {
    let n = phi.len();
    let dim = 1usize << n;
    let SegmentKind::Single { rotations } = &segment.kind else {
        return Ok(Operator::identity(dim, dim));
    };
    let mut rot = Operator::identity(dim, dim);
    for r in rotations {
        rot = embed_rotation(n, r)? * rot;
    }
    let f = frame(phi);
    Ok(&f * rot * f.adjoint())
}
