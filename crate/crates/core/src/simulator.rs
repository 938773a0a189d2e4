//! Discrete-time packet traffic and the congestion order parameter.
//!
//! Each step: `R` packets appear at uniform random sources with uniform
//! random destinations and join the source's FIFO queue; then every node
//! serves up to its capability from the head of its queue, sending each
//! packet one hop along a candidate path. Packets reaching their destination
//! leave the network. Forwarded packets are committed after all nodes have
//! served, so no packet moves twice in one step.
//!
//! Fractional rates and capabilities are realised statistically: the integer
//! part is always used and one more unit is added with probability equal to
//! the fractional part, drawn afresh each step.

use std::collections::VecDeque;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::CapabilityAssignment;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::routing::ForwardingTable;
use crate::seed::{self, Rng};

pub const DEFAULT_PACKET_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub destination: NodeId,
    /// Step at which the packet was generated.
    pub created: u32,
}

/// When a packet counts as delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryMode {
    /// Removed the moment it reaches the destination, using none of the
    /// destination's capability.
    #[default]
    OnArrival,
    /// Queued at the destination and removed when served there.
    ConsumesCapacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub delivery: DeliveryMode,
    /// Runs stop once this many packets are in flight.
    pub packet_cap: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            delivery: DeliveryMode::OnArrival,
            packet_cap: DEFAULT_PACKET_CAP,
        }
    }
}

/// Queues and random stream of one simulation run.
#[derive(Debug, Clone)]
pub struct TrafficState {
    queues: Vec<VecDeque<Packet>>,
    step_index: u64,
    theta: u64,
    saturated: bool,
    rng: Rng,
    pending: Vec<(NodeId, Packet)>,
}

impl TrafficState {
    pub fn new(node_count: usize, seed: u64) -> Self {
        TrafficState {
            queues: vec![VecDeque::new(); node_count],
            step_index: 0,
            theta: 0,
            saturated: false,
            rng: seed::rng(seed),
            pending: Vec::new(),
        }
    }

    /// Packets currently queued anywhere.
    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// True once the packet cap has been exceeded.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn queue(&self, node: usize) -> &VecDeque<Packet> {
        &self.queues[node]
    }

    /// Places a packet at the tail of `node`'s queue.
    pub fn inject(&mut self, node: usize, packet: Packet) {
        self.queues[node].push_back(packet);
        self.theta += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub created: u64,
    pub delivered: u64,
}

/// A routed network with node capabilities, ready to carry traffic.
#[derive(Debug, Clone, Copy)]
pub struct Simulation<'a> {
    table: &'a ForwardingTable,
    capabilities: &'a [f64],
    options: SimOptions,
}

impl<'a> Simulation<'a> {
    pub fn new(table: &'a ForwardingTable, ca: &'a CapabilityAssignment, options: SimOptions) -> Result<Self> {
        if ca.values.len() != table.node_count() {
            return Err(Error::Input(format!(
                "capabilities cover {} nodes, routing covers {}",
                ca.values.len(),
                table.node_count()
            )));
        }
        if ca.values.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::Input("capabilities must be finite and non-negative".into()));
        }
        Ok(Simulation {
            table,
            capabilities: &ca.values,
            options,
        })
    }

    pub fn node_count(&self) -> usize {
        self.table.node_count()
    }

    pub fn options(&self) -> SimOptions {
        self.options
    }

    /// Advances `state` by one synchronous step at generation rate `rate`.
    pub fn step(&self, state: &mut TrafficState, rate: f64) -> StepStats {
        let n = self.node_count();
        debug_assert_eq!(state.queues.len(), n);
        let mut stats = StepStats::default();
        let stamp = state.step_index.min(u32::MAX as u64) as u32;

        let created = stochastic_round(rate, &mut state.rng);
        if n >= 2 {
            for _ in 0..created {
                let source = state.rng.gen_range(0..n);
                let mut destination = state.rng.gen_range(0..n - 1);
                if destination >= source {
                    destination += 1;
                }
                state.queues[source].push_back(Packet {
                    destination: destination as NodeId,
                    created: stamp,
                });
                stats.created += 1;
            }
        }

        let mut pending = std::mem::take(&mut state.pending);
        for node in 0..n {
            if state.queues[node].is_empty() {
                continue;
            }
            let service = stochastic_round(self.capabilities[node], &mut state.rng);
            for _ in 0..service {
                let Some(packet) = state.queues[node].pop_front() else {
                    break;
                };
                let dest = packet.destination as usize;
                if dest == node {
                    stats.delivered += 1;
                    continue;
                }
                let next = self.table.sample(node, dest, &mut state.rng);
                if next as usize == dest && self.options.delivery == DeliveryMode::OnArrival {
                    stats.delivered += 1;
                } else {
                    pending.push((next, packet));
                }
            }
        }
        for (node, packet) in pending.drain(..) {
            state.queues[node as usize].push_back(packet);
        }
        state.pending = pending;

        state.theta = state.theta + stats.created - stats.delivered;
        state.step_index += 1;
        if state.theta > self.options.packet_cap {
            state.saturated = true;
        }
        debug_assert_eq!(
            state.theta,
            state.queues.iter().map(|q| q.len() as u64).sum::<u64>()
        );
        stats
    }

    /// Runs from empty queues and estimates the order parameter.
    pub fn measure_eta(&self, rate: f64, config: EtaConfig, seed: u64) -> Result<OrderParameterEstimate> {
        config.validate()?;
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::Parameter(format!("generation rate must be positive, got {rate}")));
        }
        let mut state = TrafficState::new(self.node_count(), seed);
        let mut series = config.record_series.then(Vec::new);
        for _ in 0..config.warmup {
            self.step(&mut state, rate);
            if state.saturated {
                break;
            }
        }
        let mut windows = Vec::with_capacity(config.windows);
        if state.saturated {
            // Growth over the warmup stands in for the missing windows.
            let steps = state.step_index.max(1) as f64;
            windows.push(state.theta as f64 / (rate * steps));
        } else {
            if let Some(s) = series.as_mut() {
                s.push(state.theta);
            }
            'windows: for _ in 0..config.windows {
                let start = state.theta;
                let mut taken = 0;
                for _ in 0..config.delta_t {
                    self.step(&mut state, rate);
                    taken += 1;
                    if state.saturated {
                        windows.push((state.theta as f64 - start as f64) / (rate * taken as f64));
                        break 'windows;
                    }
                }
                windows.push((state.theta as f64 - start as f64) / (rate * config.delta_t as f64));
                if let Some(s) = series.as_mut() {
                    s.push(state.theta);
                }
            }
        }
        let eta = windows.iter().sum::<f64>() / windows.len() as f64;
        Ok(OrderParameterEstimate {
            eta,
            windows,
            rate,
            delta_t: config.delta_t,
            saturated: state.saturated,
            theta_series: series,
        })
    }

    /// Bisects on the generation rate for the onset of congestion.
    pub fn estimate_rc(&self, search: &RcSearch) -> Result<RcEstimate> {
        search.validate()?;
        let seeds: Vec<u64> = (0..search.seeds as u64)
            .map(|k| seed::derive(search.seed, k))
            .collect();
        let mut evaluations = Vec::new();
        let mut probe = |rate: f64| -> Result<f64> {
            let etas: Vec<f64> = seeds
                .par_iter()
                .map(|&s| self.measure_eta(rate, search.eta, s).map(|e| e.eta))
                .collect::<Result<_>>()?;
            let mean = etas.iter().sum::<f64>() / etas.len() as f64;
            evaluations.push(Probe { rate, eta: mean });
            Ok(mean)
        };

        let (mut lo, mut hi) = (search.lower, search.upper);
        let eta_hi = probe(hi)?;
        if eta_hi <= search.threshold {
            return Err(Error::Search(format!(
                "eta {eta_hi:.5} at upper bound {hi} is below threshold {}; raise the upper bound",
                search.threshold
            )));
        }
        let eta_lo = probe(lo)?;
        if eta_lo > search.threshold {
            return Err(Error::Search(format!(
                "eta {eta_lo:.5} at lower bound {lo} already exceeds threshold {}; lower the bound",
                search.threshold
            )));
        }
        let resolution = search.resolution();
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            if probe(mid)? > search.threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(RcEstimate {
            rc: 0.5 * (lo + hi),
            bracket: (lo, hi),
            seeds,
            evaluations,
        })
    }
}

fn stochastic_round(x: f64, rng: &mut Rng) -> u64 {
    let whole = x.floor();
    let frac = x - whole;
    let extra = frac > 0.0 && rng.gen::<f64>() < frac;
    whole as u64 + extra as u64
}

/// Window layout for [`Simulation::measure_eta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaConfig {
    pub warmup: usize,
    pub delta_t: usize,
    pub windows: usize,
    /// Keep `Θ` at every window boundary.
    #[serde(default)]
    pub record_series: bool,
}

impl Default for EtaConfig {
    fn default() -> Self {
        EtaConfig {
            warmup: 1000,
            delta_t: 100,
            windows: 10,
            record_series: false,
        }
    }
}

impl EtaConfig {
    fn validate(&self) -> Result<()> {
        if self.warmup == 0 || self.delta_t == 0 || self.windows == 0 {
            return Err(Error::Parameter(
                "warmup, window length and window count must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderParameterEstimate {
    /// Mean of the window samples; may be slightly negative from noise.
    pub eta: f64,
    /// `ΔΘ / (R Δt)` per window.
    pub windows: Vec<f64>,
    pub rate: f64,
    pub delta_t: usize,
    /// The run hit the packet cap; treat as congested.
    pub saturated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_series: Option<Vec<u64>>,
}

impl OrderParameterEstimate {
    pub fn is_congested(&self, threshold: f64) -> bool {
        self.saturated || self.eta.max(0.0) > threshold
    }
}

/// Bisection settings for [`Simulation::estimate_rc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcSearch {
    pub lower: f64,
    pub upper: f64,
    /// Analytic critical rate; sets the stopping width.
    pub reference: f64,
    pub threshold: f64,
    pub eta: EtaConfig,
    /// Runs averaged per decision.
    pub seeds: usize,
    pub seed: u64,
}

impl RcSearch {
    pub const DEFAULT_THRESHOLD: f64 = 0.01;

    /// Default bracket `[1, 4 R_ref]`, three seeds per decision.
    pub fn around(reference: f64, seed: u64) -> Self {
        RcSearch {
            lower: 1.0,
            upper: 4.0 * reference,
            reference,
            threshold: Self::DEFAULT_THRESHOLD,
            eta: EtaConfig::default(),
            seeds: 3,
            seed,
        }
    }

    /// Final bracket width: 2% of the reference or one packet per step.
    pub fn resolution(&self) -> f64 {
        (0.02 * self.reference).max(1.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower > 0.0 && self.upper > self.lower && self.upper.is_finite()) {
            return Err(Error::Parameter(format!(
                "search bounds [{}, {}] are not an increasing positive range",
                self.lower, self.upper
            )));
        }
        if self.seeds == 0 {
            return Err(Error::Parameter("search needs at least one seed".into()));
        }
        if self.reference.is_nan() || self.reference <= 0.0 {
            return Err(Error::Parameter("reference rate must be positive".into()));
        }
        self.eta.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub rate: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RcEstimate {
    pub rc: f64,
    pub bracket: (f64, f64),
    pub seeds: Vec<u64>,
    pub evaluations: Vec<Probe>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{assign, Scheme};
    use crate::graph::Graph;
    use crate::routing::{RoutingAlgorithm, RoutingSystem, SuccessorChoice};

    fn uniform(n: usize, c: f64) -> CapabilityAssignment {
        CapabilityAssignment {
            scheme: Scheme::Uc,
            values: vec![c; n],
            profile_routing: None,
        }
    }

    fn table(g: &Graph) -> ForwardingTable {
        let rs = RoutingSystem::build(g, RoutingAlgorithm::Spr).unwrap();
        ForwardingTable::new(&rs, SuccessorChoice::PathWeighted)
    }

    #[test]
    fn zero_rate_stays_empty() {
        let g = crate::topology::gen_ring(10).unwrap();
        let t = table(&g);
        let ca = assign(&g, None, Scheme::Uc).unwrap();
        let sim = Simulation::new(&t, &ca, SimOptions::default()).unwrap();
        let mut state = TrafficState::new(10, 1);
        for _ in 0..50 {
            sim.step(&mut state, 0.0);
            assert_eq!(state.theta(), 0);
        }
    }

    #[test]
    fn two_hop_delivery_trace() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let t = table(&g);
        let ca = uniform(3, 10.0);
        let sim = Simulation::new(&t, &ca, SimOptions::default()).unwrap();
        let mut state = TrafficState::new(3, 0);
        state.inject(0, Packet { destination: 2, created: 0 });
        let mut trace = vec![state.theta()];
        for _ in 0..2 {
            sim.step(&mut state, 0.0);
            trace.push(state.theta());
        }
        assert_eq!(trace, vec![1, 1, 0]);
        assert_eq!(state.queue(1).len(), 0);
    }

    #[test]
    fn size_mismatch_rejected() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let t = table(&g);
        let ca = uniform(4, 1.0);
        assert!(matches!(
            Simulation::new(&t, &ca, SimOptions::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn eta_config_validation() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let t = table(&g);
        let ca = uniform(2, 1.0);
        let sim = Simulation::new(&t, &ca, SimOptions::default()).unwrap();
        let bad = EtaConfig { warmup: 0, ..EtaConfig::default() };
        assert!(sim.measure_eta(1.0, bad, 0).is_err());
        assert!(sim.measure_eta(0.0, EtaConfig::default(), 0).is_err());
    }

    #[test]
    fn saturation_flags_congestion() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let t = table(&g);
        let ca = uniform(2, 0.0);
        let opts = SimOptions { packet_cap: 500, ..SimOptions::default() };
        let sim = Simulation::new(&t, &ca, opts).unwrap();
        let est = sim.measure_eta(5.0, EtaConfig::default(), 3).unwrap();
        assert!(est.saturated);
        assert!(est.is_congested(0.01));
        assert!((est.eta - 1.0).abs() < 0.05);
    }

    #[test]
    fn consuming_delivery_needs_service_at_destination() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let t = table(&g);
        let ca = uniform(2, 1.0);
        let opts = SimOptions { delivery: DeliveryMode::ConsumesCapacity, ..SimOptions::default() };
        let sim = Simulation::new(&t, &ca, opts).unwrap();
        let mut state = TrafficState::new(2, 0);
        state.inject(0, Packet { destination: 1, created: 0 });
        sim.step(&mut state, 0.0);
        assert_eq!(state.theta(), 1);
        assert_eq!(state.queue(1).len(), 1);
        sim.step(&mut state, 0.0);
        assert_eq!(state.theta(), 0);
    }

    #[test]
    fn search_rejects_bad_bracket() {
        let g = crate::topology::gen_ring(11).unwrap();
        let t = table(&g);
        let ca = assign(&g, None, Scheme::Uc).unwrap();
        let sim = Simulation::new(&t, &ca, SimOptions::default()).unwrap();
        let mut search = RcSearch::around(10.0, 1);
        search.eta = EtaConfig { warmup: 100, delta_t: 50, windows: 4, record_series: false };
        search.upper = 2.0;
        assert!(matches!(sim.estimate_rc(&search), Err(Error::Search(_))));
        search.upper = 0.5;
        assert!(matches!(sim.estimate_rc(&search), Err(Error::Parameter(_))));
    }
}
