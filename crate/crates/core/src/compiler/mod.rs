//! Circuits to timelines, and timelines back to unitaries.
//!
//! Each layer becomes one [`ScheduleSegment`]. RZ gates only move the frame;
//! a layer holding nothing else compiles to a zero-length segment.

mod circuit;
pub mod parser;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use circuit::{Circuit, Gate, Layer};
pub use parser::{parse_circuit, ParseError, ParseErrorKind};

use crate::allocator::{validate_allocation, AllocationResult, Band, MarginReport, MarginRule};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_full, build_rwa, check_simulable, compare, Operator, Spectrum, NEVER_REUSED,
};
use crate::physics::{derive_params, DeviceSpec};
use crate::protocols::{
    conjugate_by_frame, coupling_gate, embed_rotation, frame, ideal_segment, kick, Axis,
    CouplingKind, Rotation, ScheduleSegment, SegmentKind, Synthesizer, VirtualPhaseLedger,
    VirtualZ,
};

/// Operation count the coherence budget is sized for.
pub const OP_GUIDELINE: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub segments: Vec<ScheduleSegment>,
    /// Seconds.
    pub total_duration: f64,
    /// Segments with non-zero duration.
    pub op_count: usize,
    /// Frame phases after the last segment.
    pub ledger: VirtualPhaseLedger,
}

impl Timeline {
    /// Recomputes totals and the ledger from the segments.
    pub fn from_segments(segments: Vec<ScheduleSegment>, device: &DeviceSpec) -> Result<Timeline> {
        let mut ledger = VirtualPhaseLedger::new(device.n_qubits());
        for seg in &segments {
            if seg.controls.len() != device.n_qubits() {
                return Err(Error::DimensionMismatch {
                    expected: device.n_qubits(),
                    actual: seg.controls.len(),
                });
            }
            for z in &seg.virtual_z {
                check_qubit(z.qubit, device.n_qubits())?;
                ledger.rotate_z(z.qubit, z.angle);
            }
            if seg.duration > 0.0 {
                let omega = derive_params(device, &seg.controls)?.omega;
                ledger.advance(&omega, seg.duration);
            }
        }
        Ok(Timeline {
            total_duration: segments.iter().map(|s| s.duration).sum(),
            op_count: segments.iter().filter(|s| !s.is_virtual()).count(),
            segments,
            ledger,
        })
    }
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::QubitOutOfRange { qubit: q, n });
    }
    Ok(())
}

/// Layers from each layer to the next one in which a qubit is coupled.
fn future_distances(circuit: &Circuit, n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); circuit.layers.len()];
    let mut next: Vec<Option<usize>> = vec![None; n];
    for (l, layer) in circuit.layers.iter().enumerate().rev() {
        out[l] = next
            .iter()
            .map(|u| u.map_or(NEVER_REUSED, |u| (u - l).max(1) as u32))
            .collect();
        for g in layer.gates.iter().filter(|g| g.is_coupling()) {
            for q in g.qubits() {
                next[q] = Some(l);
            }
        }
    }
    out
}

fn layer_error(layer: usize, e: Error) -> Error {
    match e {
        Error::Crowding(reason) => Error::LayerInfeasible { layer, reason },
        e @ Error::UnreachableFrequency { .. } => Error::LayerInfeasible {
            layer,
            reason: e.to_string(),
        },
        Error::InvalidLayout(reason) => Error::InvalidLayer { layer, reason },
        e => e,
    }
}

fn compile_layer(
    synth: &Synthesizer,
    index: usize,
    layer: &Layer,
    future: &[u32],
) -> Result<ScheduleSegment> {
    let mut virtual_z = Vec::new();
    let mut rotations = Vec::new();
    let mut pairs = Vec::new();
    let mut groups = Vec::new();
    let mut kind: Option<CouplingKind> = None;
    for gate in &layer.gates {
        match gate {
            Gate::Rotate {
                axis: Axis::Z,
                qubit,
                angle,
            } => virtual_z.push(VirtualZ {
                qubit: *qubit,
                angle: *angle,
            }),
            Gate::Rotate { axis, qubit, angle } => rotations.push(Rotation {
                qubit: *qubit,
                axis: *axis,
                angle: *angle,
            }),
            Gate::Pair { kind: k, a, b } => {
                pairs.push((*a, *b));
                kind = Some(merge_kind(index, kind, *k)?);
            }
            Gate::Group { kind: k, qubits } => {
                groups.push(qubits.clone());
                kind = Some(merge_kind(index, kind, *k)?);
            }
        }
    }
    let mut segment = match (kind, rotations.is_empty()) {
        (Some(_), false) => {
            return Err(Error::InvalidLayer {
                layer: index,
                reason: "X/Y rotations and couplings cannot share a layer".into(),
            })
        }
        (Some(kind), true) => synth.coupling_segment(&pairs, &groups, kind, future),
        (None, false) => synth.rotation_segment(rotations, future),
        (None, true) => synth.virtual_segment(Vec::new(), future),
    }
    .map_err(|e| layer_error(index, e))?;
    segment.virtual_z = virtual_z;
    let text: Vec<String> = layer.gates.iter().map(|g| g.to_string()).collect();
    segment.label = format!("L{index}: {}", text.join("; "));
    Ok(segment)
}

fn merge_kind(layer: usize, have: Option<CouplingKind>, next: CouplingKind) -> Result<CouplingKind> {
    match have {
        Some(k) if k != next => Err(Error::InvalidLayer {
            layer,
            reason: "SWAP and SQISWAP cannot share a layer".into(),
        }),
        _ => Ok(next),
    }
}

/// Compiles with the default margin rule and gate time.
pub fn compile(circuit: &Circuit, device: &DeviceSpec) -> Result<Timeline> {
    compile_with(circuit, &Synthesizer::new(device)?)
}

/// One segment per layer; fails on the first layer that cannot be placed.
pub fn compile_with(circuit: &Circuit, synth: &Synthesizer) -> Result<Timeline> {
    let n = synth.n_qubits();
    circuit.validate(n)?;
    let future = future_distances(circuit, n);
    let segments = circuit
        .layers
        .iter()
        .enumerate()
        .map(|(l, layer)| compile_layer(synth, l, layer, &future[l]))
        .collect::<Result<Vec<_>>>()?;
    log::debug!("compiled {} layers for {n} qubits", segments.len());
    Timeline::from_segments(segments, synth.device())
}

/// Re-checks every segment's fluxes against its layout's margins.
pub fn check_margins(timeline: &Timeline, device: &DeviceSpec, rule: &MarginRule) -> Result<Vec<MarginReport>> {
    let band = Band::from_hz(device.band_low, device.band_high);
    timeline
        .segments
        .iter()
        .map(|seg| {
            let params = derive_params(device, &seg.controls)?;
            let result = AllocationResult {
                omega: params.omega.clone(),
                flux: seg.controls.flux.clone(),
                slack: Vec::new(),
                feasible: true,
                certificate: None,
            };
            Ok(validate_allocation(&result, &seg.layout, &params, rule, band))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    /// Seconds.
    pub duration: f64,
    /// Seconds.
    pub coherence_time: f64,
    pub within_budget: bool,
    pub op_count: usize,
    pub op_guideline: usize,
    pub within_op_guideline: bool,
}

pub fn budget_check(timeline: &Timeline, device: &DeviceSpec) -> BudgetReport {
    BudgetReport {
        duration: timeline.total_duration,
        coherence_time: device.coherence_time,
        within_budget: timeline.total_duration <= device.coherence_time,
        op_count: timeline.op_count,
        op_guideline: OP_GUIDELINE,
        within_op_guideline: timeline.op_count <= OP_GUIDELINE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Full,
    Rwa,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentFidelity {
    pub label: String,
    pub rwa_fidelity: f64,
    pub full_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub per_segment: Vec<SegmentFidelity>,
    pub end_to_end: f64,
    pub model: Model,
    pub budget: BudgetReport,
}

/// Spectra keyed by the exact bit patterns of their inputs.
#[derive(Default)]
struct SpectrumCache {
    full: HashMap<Vec<u64>, Spectrum>,
    rwa: HashMap<(Vec<u64>, String), Spectrum>,
}

fn bits(omega: &[f64]) -> Vec<u64> {
    omega.iter().map(|w| w.to_bits()).collect()
}

/// Canonical logical action of `segment` at frame phases `phi`.
fn logical_gate(segment: &ScheduleSegment, phi: &[f64]) -> Result<Operator> {
    let n = phi.len();
    let dim = 1usize << n;
    match &segment.kind {
        SegmentKind::Idle | SegmentKind::Init => Ok(Operator::identity(dim, dim)),
        SegmentKind::Single { rotations } => rotations
            .iter()
            .try_fold(Operator::identity(dim, dim), |acc, r| Ok(embed_rotation(n, r)? * acc)),
        SegmentKind::Swap | SegmentKind::SqrtISwap => {
            let kind = segment.kind.coupling().unwrap();
            let g = coupling_gate(n, &segment.layout.pairs, &segment.layout.groups, kind)?;
            Ok(conjugate_by_frame(&g, phi))
        }
    }
}

/// Exact propagation of `timeline` under `model`, compared with the ideal
/// circuit segment by segment and end to end.
pub fn simulate_timeline(timeline: &Timeline, device: &DeviceSpec, model: Model) -> Result<FidelityReport> {
    let n = device.n_qubits();
    check_simulable(n)?;
    device.check()?;
    let dim = 1usize << n;
    let mut phi = vec![0.0; n];
    let mut u_sim = Operator::identity(dim, dim);
    let mut ideal = Operator::identity(dim, dim);
    let mut cache = SpectrumCache::default();
    let mut per_segment = Vec::with_capacity(timeline.segments.len());

    for seg in &timeline.segments {
        if !(seg.duration >= 0.0 && seg.duration.is_finite()) {
            return Err(Error::Contract(format!(
                "segment `{}` has duration {}",
                seg.label, seg.duration
            )));
        }
        let params = derive_params(device, &seg.controls)?;
        seg.layout.validate(n)?;
        for z in &seg.virtual_z {
            check_qubit(z.qubit, n)?;
            phi[z.qubit] += z.angle;
            let rz = Rotation {
                qubit: z.qubit,
                axis: Axis::Z,
                angle: z.angle,
            };
            ideal = embed_rotation(n, &rz)? * ideal;
        }
        let gate = kick(seg, &phi)?;
        let target = ideal_segment(seg, &phi, &params.omega)?;
        ideal = logical_gate(seg, &phi)? * ideal;

        let (u_rwa, u_full) = if seg.duration == 0.0 {
            (gate.clone(), gate)
        } else {
            let key = bits(&params.omega);
            let layout_key = serde_json::to_string(&seg.layout).unwrap_or_default();
            let rwa = match cache.rwa.entry((key.clone(), layout_key)) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(Spectrum::new(&build_rwa(&params, &seg.layout)?)?)
                }
            }
            .propagator(seg.duration)?;
            let full = match cache.full.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(Spectrum::new(&build_full(&params)?)?)
                }
            }
            .propagator(seg.duration)?;
            (rwa * &gate, full * &gate)
        };
        per_segment.push(SegmentFidelity {
            label: seg.label.clone(),
            rwa_fidelity: compare(&target, &u_rwa)?,
            full_fidelity: compare(&target, &u_full)?,
        });
        u_sim = match model {
            Model::Rwa => u_rwa,
            Model::Full => u_full,
        } * u_sim;
        for (p, w) in phi.iter_mut().zip(&params.omega) {
            *p += w * seg.duration;
        }
    }

    let end_to_end = compare(&(frame(&phi).adjoint() * u_sim), &ideal)?;
    Ok(FidelityReport {
        per_segment,
        end_to_end,
        model,
        budget: budget_check(timeline, device),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{PhysicalConstants, QubitSpec};
    use std::f64::consts::PI;

    fn device(n: usize) -> DeviceSpec {
        let c = PhysicalConstants::SI;
        let d = 1.55e-12;
        let x = 4.0 * 5e6 * n as f64 * d * c.h / (4.0 * c.e * c.e);
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

    fn run(text: &str, n: usize, model: Model) -> FidelityReport {
        let d = device(n);
        let t = compile(&parse_circuit(text).unwrap(), &d).unwrap();
        simulate_timeline(&t, &d, model).unwrap()
    }

    #[test]
    fn empty_circuit() {
        let d = device(2);
        let t = compile(&Circuit::default(), &d).unwrap();
        assert!(t.segments.is_empty());
        assert_eq!(t.total_duration, 0.0);
        assert!(budget_check(&t, &d).within_budget);
        let r = simulate_timeline(&t, &d, Model::Full).unwrap();
        assert!((r.end_to_end - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thousand_swaps_fill_half_the_budget() {
        let d = device(2);
        let text = vec!["SWAP q0 q1"; 1000].join("\nLAYER\n");
        let t = compile(&parse_circuit(&text).unwrap(), &d).unwrap();
        assert_eq!(t.op_count, 1000);
        assert!((t.total_duration - 50e-6).abs() < 1e-12 * 50e-6 * 1000.0);
        let b = budget_check(&t, &d);
        assert!(b.within_budget && b.within_op_guideline);

        let text = vec!["SWAP q0 q1"; 2001].join("\nLAYER\n");
        let t = compile(&parse_circuit(&text).unwrap(), &d).unwrap();
        let b = budget_check(&t, &d);
        assert!(!b.within_budget && !b.within_op_guideline);
    }

    #[test]
    fn mixed_layout_is_one_segment() {
        let d = device(5);
        let c = parse_circuit("SQISWAP q0 q1\nGROUP SQISWAP q2 q3 q4").unwrap();
        let t = compile(&c, &d).unwrap();
        assert_eq!(t.segments.len(), 1);
        assert_eq!(t.segments[0].layout.pairs, vec![(0, 1)]);
        assert_eq!(t.segments[0].layout.groups, vec![vec![2, 3, 4]]);
        assert!(check_margins(&t, &d, &MarginRule::default()).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn future_distance_follows_next_coupling() {
        let c = parse_circuit("SWAP q0 q1\nLAYER\nRX q2 1\nLAYER\nRX q0 1\nLAYER\nSWAP q2 q1").unwrap();
        let f = future_distances(&c, 4);
        assert_eq!(f[0], vec![NEVER_REUSED, 3, 3, NEVER_REUSED]);
        assert_eq!(f[2], vec![NEVER_REUSED, 1, 1, NEVER_REUSED]);
        assert_eq!(f[3], vec![NEVER_REUSED; 4]);
    }

    #[test]
    fn layer_errors() {
        let d = device(3);
        let mixed = parse_circuit("RX q0 1\nSWAP q1 q2").unwrap();
        assert!(matches!(compile(&mixed, &d), Err(Error::InvalidLayer { layer: 0, .. })));
        let kinds = parse_circuit("LAYER\nSWAP q0 q1\nLAYER\nSWAP q0 q1\nGROUP SQISWAP q2 q3 q4").unwrap();
        assert!(matches!(compile(&kinds, &device(5)), Err(Error::InvalidLayer { layer: 1, .. })));
        let range = parse_circuit("SWAP q0 q3").unwrap();
        assert!(matches!(compile(&range, &d), Err(Error::QubitOutOfRange { qubit: 3, n: 3 })));
        let mut narrow = device(4);
        narrow.band_high = 10e9;
        let crowded = parse_circuit("RX q0 1\nLAYER\nSWAP q0 q1\nSWAP q2 q3").unwrap();
        match compile(&crowded, &narrow) {
            Err(Error::LayerInfeasible { layer, .. }) => assert_eq!(layer, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rz_only_layer_is_virtual() {
        let d = device(2);
        let t = compile(&parse_circuit("RZ q0 0.3\nLAYER\nSQISWAP q0 q1").unwrap(), &d).unwrap();
        assert_eq!(t.op_count, 1);
        assert_eq!(t.segments[0].duration, 0.0);
        assert_eq!(t.segments[0].virtual_z, vec![VirtualZ { qubit: 0, angle: 0.3 }]);
    }

    #[test]
    fn single_sqiswap_rwa_is_exact() {
        let r = run("SQISWAP q0 q1", 2, Model::Rwa);
        assert!((r.end_to_end - 1.0).abs() < 1e-10, "{}", r.end_to_end);
        let f = run("SQISWAP q0 q1", 2, Model::Full);
        assert!(f.end_to_end >= 1.0 - 1e-3);
        assert!(f.per_segment[0].full_fidelity >= 1.0 - 1e-3);
    }

    #[test]
    fn two_half_swaps_equal_one_swap() {
        let d = device(2);
        let two = compile(&parse_circuit("SQISWAP q0 q1\nLAYER\nSQISWAP q0 q1").unwrap(), &d).unwrap();
        let one = compile(&parse_circuit("SWAP q0 q1").unwrap(), &d).unwrap();
        let u = |t: &Timeline| {
            let mut acc = Operator::identity(4, 4);
            for seg in &t.segments {
                let p = derive_params(&d, &seg.controls).unwrap();
                let h = build_rwa(&p, &seg.layout).unwrap();
                acc = Spectrum::new(&h).unwrap().propagator(seg.duration).unwrap() * acc;
            }
            acc
        };
        assert!((compare(&u(&two), &u(&one)).unwrap() - 1.0).abs() < 1e-9);
        let r = simulate_timeline(&two, &d, Model::Rwa).unwrap();
        assert!((r.end_to_end - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotations_and_frames() {
        let text = "RX q0 1.1\nRY q1 -0.4\nLAYER\nRZ q2 0.7\nSQISWAP q0 q1\nLAYER\nRZ q1 2\nLAYER\nRY q0 3\nLAYER\nSWAP q1 q2";
        let r = run(text, 3, Model::Rwa);
        assert!((r.end_to_end - 1.0).abs() < 1e-9, "{}", r.end_to_end);
        assert!(r.per_segment.iter().all(|s| (s.rwa_fidelity - 1.0).abs() < 1e-9));
        let f = run(text, 3, Model::Full);
        assert!(f.end_to_end > 1.0 - 5e-3, "{}", f.end_to_end);
        assert!(f.per_segment.iter().all(|s| (0.0..=1.0).contains(&s.full_fidelity)));
    }

    #[test]
    fn ratio_1e3_beats_ratio_1e2() {
        let d = device(4);
        let c = parse_circuit("SQISWAP q0 q1\nSQISWAP q2 q3\nLAYER\nRX q1 0.5\nLAYER\nSWAP q1 q2").unwrap();
        let fid = |ratio: f64| {
            let synth = Synthesizer::new(&d).unwrap().with_rule(MarginRule::with_active_ratio(ratio));
            let t = compile_with(&c, &synth).unwrap();
            simulate_timeline(&t, &d, Model::Full).unwrap().end_to_end
        };
        let (hi, lo) = (fid(1e3), fid(1e2));
        assert!(hi >= lo, "{hi} {lo}");
    }

    #[test]
    fn deterministic() {
        let d = device(4);
        let c = parse_circuit("SQISWAP q0 q1\nLAYER\nRX q3 1\nLAYER\nSWAP q2 q3").unwrap();
        assert_eq!(compile(&c, &d).unwrap(), compile(&c, &d).unwrap());
    }

    #[test]
    fn size_cap() {
        let d = device(crate::hamiltonian::simulation_cap() + 1);
        let t = compile(&Circuit::default(), &d).unwrap();
        assert!(matches!(simulate_timeline(&t, &d, Model::Rwa), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn x_pi_moves_population() {
        let r = run(&format!("RX q0 {PI}"), 1, Model::Full);
        assert!(r.end_to_end > 1.0 - 1e-9);
    }
}
