mod common;

use chargeq::allocator::MarginRule;
use chargeq::compiler::{check_margins, compile, parse_circuit, simulate_timeline, Model};
use chargeq::io::{parse_timeline, timeline_to_json};
use common::{symmetric_device, J_HZ};
use proptest::prelude::*;

fn gate_line(kind: u8, a: usize, b: usize, angle: f64) -> String {
    match kind {
        0 => format!("RX q{a} {angle}"),
        1 => format!("RY q{a} {angle}"),
        2 => format!("RZ q{a} {angle}"),
        3 => format!("SWAP q{a} q{b}"),
        _ => format!("SQISWAP q{a} q{b}"),
    }
}

/// Random 4-qubit circuits whose layers are either all rotations or all
/// couplings of one kind.
fn arb_circuit() -> impl Strategy<Value = String> {
    let layer = (0u8..5, any::<bool>(), -3.0f64..3.0).prop_map(|(kind, split, angle)| {
        if kind < 3 {
            (0..4).map(|q| gate_line(kind, q, 0, angle)).collect::<Vec<_>>().join("\n")
        } else if split {
            format!("{}\n{}", gate_line(kind, 0, 1, 0.0), gate_line(kind, 2, 3, 0.0))
        } else {
            gate_line(kind, 1, 3, 0.0)
        }
    });
    prop::collection::vec(layer, 1..5).prop_map(|layers| layers.join("\nLAYER\n"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compiled_timelines_respect_margins_and_round_trip(text in arb_circuit()) {
        let device = symmetric_device(4, J_HZ);
        let circuit = parse_circuit(&text).unwrap();
        let timeline = compile(&circuit, &device).unwrap();
        for report in check_margins(&timeline, &device, &MarginRule::default()).unwrap() {
            prop_assert!(report.pass, "{report:?}");
        }
        let back = parse_timeline(&timeline_to_json(&timeline), &device).unwrap();
        prop_assert_eq!(back.segments.len(), timeline.segments.len());
        prop_assert_eq!(back.total_duration, timeline.total_duration);
        let f = simulate_timeline(&timeline, &device, Model::Rwa).unwrap();
        prop_assert!((f.end_to_end - 1.0).abs() <= 1e-9, "{}", f.end_to_end);
    }
}

#[test]
fn full_model_tracks_rwa_on_mixed_circuit() {
    let device = symmetric_device(4, J_HZ);
    let circuit = parse_circuit(include_str!("../data/mixed_4q.circ")).unwrap();
    let timeline = compile(&circuit, &device).unwrap();
    let full = simulate_timeline(&timeline, &device, Model::Full).unwrap();
    assert!(full.end_to_end >= 1.0 - 5e-3, "{}", full.end_to_end);
    for s in &full.per_segment {
        assert!(s.full_fidelity <= 1.0 + 1e-12 && s.full_fidelity >= 1.0 - 5e-3);
    }
}
