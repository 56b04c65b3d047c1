//! Frequency allocation under detuning margins.
//!
//! Every pair or group shares one frequency; everything else must stay far
//! enough from everything else that the rotating-wave approximation removes
//! the unwanted couplings. The required detuning for a qubit that will be
//! used `k` slots from now is `max(active_ratio * J / k, floor_ratio * J)`.
//!
//! Placement is greedy and deterministic. Units (clusters first, then idle
//! qubits, each by decreasing margin, ties by lowest qubit index) are put at
//! the lowest point of the band that respects every already-placed unit.
//! When greedy placement fails, a counting bound over nested unit sets either
//! proves infeasibility or the failure is reported as greedy-only.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{ResonantLayout, RESONANCE_TOLERANCE};
use crate::physics::{flux_for_frequency, josephson_energy, DerivedParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginRule {
    pub active_ratio: f64,
    pub future_floor_ratio: f64,
}

impl Default for MarginRule {
    fn default() -> Self {
        MarginRule {
            active_ratio: 1e3,
            future_floor_ratio: 50.0,
        }
    }
}

impl MarginRule {
    pub fn with_active_ratio(active_ratio: f64) -> Self {
        MarginRule {
            active_ratio,
            ..Default::default()
        }
    }
}

/// Required detuning (rad/s) for coupling rate `j` and future distance `k`.
pub fn margin_rule(j: f64, k: u32, rule: &MarginRule) -> f64 {
    let k = k.max(1) as f64;
    (rule.active_ratio * j / k).max(rule.future_floor_ratio * j)
}

/// Allowed angular-frequency window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn from_hz(low: f64, high: f64) -> Self {
        Band {
            low: 2.0 * PI * low,
            high: 2.0 * PI * high,
        }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// The counting bound shows the listed units cannot fit.
    Proven,
    /// Greedy placement failed but the counting bound does not rule out a
    /// packing.
    GreedyFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// Qubit sets of the units that could not be fitted together.
    pub units: Vec<Vec<usize>>,
    /// Smallest pairwise separation required inside `units` (rad/s).
    pub min_spacing: f64,
    /// Span the units need (rad/s).
    pub required_span: f64,
    /// Span the band offers them (rad/s).
    pub available_span: f64,
}

impl Certificate {
    pub fn describe(&self) -> String {
        let tag = match self.kind {
            CertificateKind::Proven => "proven infeasible",
            CertificateKind::GreedyFailed => "greedy placement failed (not proven infeasible)",
        };
        format!(
            "{tag}: {} units need {:.6} GHz at spacing >= {:.6} MHz but only {:.6} GHz is available",
            self.units.len(),
            self.required_span / (2.0 * PI) / 1e9,
            self.min_spacing / (2.0 * PI) / 1e6,
            self.available_span / (2.0 * PI) / 1e9
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Angular frequency per qubit; empty when infeasible.
    pub omega: Vec<f64>,
    /// Flux per qubit in flux quanta; empty when infeasible.
    pub flux: Vec<f64>,
    /// `|omega_i - omega_j| - required` for qubits in different units.
    pub slack: Vec<Vec<Option<f64>>>,
    pub feasible: bool,
    pub certificate: Option<Certificate>,
}

impl AllocationResult {
    pub fn worst_slack(&self) -> Option<f64> {
        self.slack
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))))
    }
}

#[derive(Debug, Clone)]
struct Unit {
    qubits: Vec<usize>,
    k: u32,
    cluster: bool,
    cap: f64,
}

/// Placement guard relative to the band top, so that exact-boundary
/// placements keep non-negative slack after rounding.
const GUARD: f64 = 1e-10;

fn units_of(layout: &ResonantLayout, omega_max: &[f64]) -> Vec<Unit> {
    let cap = |qs: &[usize]| qs.iter().map(|&q| omega_max[q]).fold(f64::INFINITY, f64::min);
    let mut units: Vec<Unit> = layout
        .clusters()
        .into_iter()
        .map(|qs| Unit {
            cap: cap(&qs),
            qubits: qs,
            k: 1,
            cluster: true,
        })
        .collect();
    units.extend(layout.idle.iter().map(|idle| Unit {
        qubits: vec![idle.qubit],
        k: idle.k,
        cluster: false,
        cap: omega_max[idle.qubit],
    }));
    units
}

fn cross_coupling(params: &DerivedParams, a: &Unit, b: &Unit) -> f64 {
    params.max_coupling(
        a.qubits
            .iter()
            .flat_map(|&i| b.qubits.iter().map(move |&j| (i, j))),
    )
}

fn required(params: &DerivedParams, rule: &MarginRule, a: &Unit, b: &Unit) -> f64 {
    margin_rule(cross_coupling(params, a, b), a.k.min(b.k), rule)
}

/// Lowest `x >= band.low` respecting all placed units; `None` above `limit`.
fn lowest_position(
    band: &Band,
    placed: &[(usize, f64)],
    req: &[f64],
    guard: f64,
    limit: f64,
) -> Option<f64> {
    let mut candidates: Vec<f64> = std::iter::once(band.low)
        .chain(placed.iter().map(|&(p, x)| x + req[p] + guard))
        .filter(|&x| x >= band.low)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.into_iter().take_while(|&x| x <= limit).find(|&x| {
        placed
            .iter()
            .all(|&(p, xp)| (x - xp).abs() >= req[p] + 0.5 * guard)
    })
}

pub fn allocate(
    layout: &ResonantLayout,
    params: &DerivedParams,
    band: Band,
    rule: &MarginRule,
) -> Result<AllocationResult> {
    let n = params.n_qubits();
    layout.validate(n)?;
    if !(band.low >= 0.0 && band.low < band.high && band.high.is_finite()) {
        return Err(Error::InvalidDevice(format!(
            "empty band [{}, {}] rad/s",
            band.low, band.high
        )));
    }
    let omega_max = params.omega_max();
    let units = units_of(layout, &omega_max);
    for u in &units {
        if u.cap < band.low {
            let q = *u
                .qubits
                .iter()
                .min_by(|&&a, &&b| omega_max[a].total_cmp(&omega_max[b]))
                .unwrap();
            return Err(Error::UnreachableFrequency {
                qubit: q,
                target_ghz: band.low / (2.0 * PI) / 1e9,
                max_ghz: omega_max[q] / (2.0 * PI) / 1e9,
            });
        }
    }

    let m = units.len();
    let mut req = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let r = required(params, rule, &units[a], &units[b]);
            req[a][b] = r;
            req[b][a] = r;
        }
    }
    let own_margin: Vec<f64> = units
        .iter()
        .map(|u| {
            let outside = (0..n).filter(|q| !u.qubits.contains(q));
            let j = params.max_coupling(
                u.qubits
                    .iter()
                    .flat_map(|&i| outside.clone().map(move |o| (i, o))),
            );
            margin_rule(j, u.k, rule)
        })
        .collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let (ua, ub) = (&units[a], &units[b]);
        ub.cluster
            .cmp(&ua.cluster)
            .then(own_margin[b].total_cmp(&own_margin[a]))
            .then(ua.qubits.iter().min().cmp(&ub.qubits.iter().min()))
    });

    let guard = GUARD * band.high;
    let mut position = vec![f64::NAN; m];
    if m == 1 {
        let top = band.high.min(units[0].cap);
        position[0] = 0.5 * (band.low + top);
    } else {
        let mut placed: Vec<(usize, f64)> = Vec::with_capacity(m);
        for (rank, &u) in order.iter().enumerate() {
            let limit = band.high.min(units[u].cap);
            match lowest_position(&band, &placed, &req[u], guard, limit) {
                Some(x) => {
                    position[u] = x;
                    placed.push((u, x));
                }
                None => {
                    let cert = certificate(&units, &order, &req, &band, &placed, rank, guard);
                    log::info!("allocation infeasible: {}", cert.describe());
                    return Ok(AllocationResult {
                        omega: Vec::new(),
                        flux: Vec::new(),
                        slack: Vec::new(),
                        feasible: false,
                        certificate: Some(cert),
                    });
                }
            }
        }
    }

    let mut omega = vec![0.0; n];
    for (u, unit) in units.iter().enumerate() {
        for &q in &unit.qubits {
            omega[q] = position[u].min(omega_max[q]);
        }
    }
    let flux = omega
        .iter()
        .zip(&params.ej0)
        .map(|(&w, &ej0)| flux_for_frequency(ej0, (w / (2.0 * PI)).min(2.0 * ej0)))
        .collect::<Result<Vec<f64>>>()?;

    let mut unit_of = vec![0; n];
    for (u, unit) in units.iter().enumerate() {
        for &q in &unit.qubits {
            unit_of[q] = u;
        }
    }
    let slack = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (ui, uj) = (unit_of[i], unit_of[j]);
                    (ui != uj).then(|| {
                        let k = units[ui].k.min(units[uj].k);
                        (omega[i] - omega[j]).abs() - margin_rule(params.j_couple[(i, j)], k, rule)
                    })
                })
                .collect()
        })
        .collect();

    Ok(AllocationResult {
        omega,
        flux,
        slack,
        feasible: true,
        certificate: None,
    })
}

fn certificate(
    units: &[Unit],
    order: &[usize],
    req: &[Vec<f64>],
    band: &Band,
    placed: &[(usize, f64)],
    failed_rank: usize,
    guard: f64,
) -> Certificate {
    // counting bound over nested prefixes of the placement order
    let mut min_spacing = f64::INFINITY;
    let mut top = f64::NEG_INFINITY;
    for t in 1..order.len() {
        let u = order[t];
        for &v in &order[..t] {
            min_spacing = min_spacing.min(req[u][v]);
        }
        top = order[..=t]
            .iter()
            .map(|&v| band.high.min(units[v].cap))
            .fold(top, f64::max);
        let need = t as f64 * min_spacing;
        let available = top - band.low;
        if need > available {
            return Certificate {
                kind: CertificateKind::Proven,
                units: order[..=t].iter().map(|&v| units[v].qubits.clone()).collect(),
                min_spacing,
                required_span: need,
                available_span: available,
            };
        }
    }

    let failed = order[failed_rank];
    let open = Band {
        low: band.low,
        high: f64::INFINITY,
    };
    let wanted = lowest_position(&open, placed, &req[failed], guard, f64::INFINITY)
        .unwrap_or(f64::INFINITY);
    let mut members: Vec<Vec<usize>> = placed.iter().map(|&(p, _)| units[p].qubits.clone()).collect();
    members.push(units[failed].qubits.clone());
    Certificate {
        kind: CertificateKind::GreedyFailed,
        units: members,
        min_spacing: placed
            .iter()
            .map(|&(p, _)| req[failed][p])
            .fold(f64::INFINITY, f64::min),
        required_span: wanted - band.low,
        available_span: band.high.min(units[failed].cap) - band.low,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub qubits: (usize, usize),
    pub required: f64,
    pub actual: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub pass: bool,
    /// Smallest inter-unit slack (rad/s); `None` when no such pair exists.
    pub worst_slack: Option<f64>,
    pub worst_pair: Option<(usize, usize)>,
    pub violations: Vec<Violation>,
    /// Clusters whose members are not resonant.
    pub resonance_violations: Vec<Vec<usize>>,
    pub out_of_band: Vec<usize>,
    pub unreachable: Vec<usize>,
    /// Qubits whose flux does not reproduce the assigned frequency.
    pub flux_mismatch: Vec<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Active(usize),
    Idle(u32),
}

/// Recomputes every pairwise requirement of `layout` from scratch.
pub fn validate_allocation(
    result: &AllocationResult,
    layout: &ResonantLayout,
    params: &DerivedParams,
    rule: &MarginRule,
    band: Band,
) -> MarginReport {
    let n = params.n_qubits();
    let mut report = MarginReport {
        pass: false,
        worst_slack: None,
        worst_pair: None,
        violations: Vec::new(),
        resonance_violations: Vec::new(),
        out_of_band: Vec::new(),
        unreachable: Vec::new(),
        flux_mismatch: Vec::new(),
        error: None,
    };
    if let Err(e) = layout.validate(n) {
        report.error = Some(e.to_string());
        return report;
    }
    if result.omega.len() != n || result.flux.len() != n {
        report.error = Some(format!(
            "assignment covers {} qubits, device has {n}",
            result.omega.len()
        ));
        return report;
    }

    let mut role = vec![Role::Idle(1); n];
    for (c, cluster) in layout.clusters().iter().enumerate() {
        for &q in cluster {
            role[q] = Role::Active(c);
        }
    }
    for idle in &layout.idle {
        role[idle.qubit] = Role::Idle(idle.k);
    }

    let w = &result.omega;
    for i in 0..n {
        for j in i + 1..n {
            let jij = params.j_couple[(i, j)];
            let need = match (role[i], role[j]) {
                (Role::Active(a), Role::Active(b)) if a == b => continue,
                (Role::Active(_), Role::Active(_)) => rule.active_ratio * jij,
                (Role::Active(_), Role::Idle(k)) | (Role::Idle(k), Role::Active(_)) => {
                    margin_rule(jij, k, rule)
                }
                (Role::Idle(a), Role::Idle(b)) => margin_rule(jij, a.min(b), rule),
            };
            let actual = (w[i] - w[j]).abs();
            let slack = actual - need;
            if report.worst_slack.is_none_or(|s| slack < s) {
                report.worst_slack = Some(slack);
                report.worst_pair = Some((i, j));
            }
            if slack < 0.0 {
                report.violations.push(Violation {
                    qubits: (i, j),
                    required: need,
                    actual,
                    slack,
                });
            }
        }
    }

    for cluster in layout.clusters() {
        let lo = cluster.iter().map(|&q| w[q]).fold(f64::INFINITY, f64::min);
        let hi = cluster.iter().map(|&q| w[q]).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > RESONANCE_TOLERANCE * hi.abs() {
            report.resonance_violations.push(cluster);
        }
    }
    for q in 0..n {
        if w[q] < band.low || w[q] > band.high {
            report.out_of_band.push(q);
        }
        let reach = 2.0 * PI * 2.0 * params.ej0[q];
        if w[q] > reach {
            report.unreachable.push(q);
        }
        match josephson_energy(params.ej0[q], result.flux[q]) {
            Ok(e) if (2.0 * PI * e - w[q]).abs() <= 1e-9 * w[q].abs().max(1.0) => {}
            _ => report.flux_mismatch.push(q),
        }
    }

    report.pass = report.violations.is_empty()
        && report.resonance_violations.is_empty()
        && report.out_of_band.is_empty()
        && report.unreachable.is_empty()
        && report.flux_mismatch.is_empty();
    report
}
