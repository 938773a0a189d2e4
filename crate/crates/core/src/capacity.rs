//! Node-capability schemes, the analytic critical rate, and the `C_max`
//! cost proxy.
//!
//! Every scheme distributes the same total capability `2M` over the nodes.
//! A node stays uncongested while its expected arrivals
//! `R * B(i) / (N(N-1))` fit within `C(i)`, so the critical rate is the
//! minimum over nodes of `C(i) N(N-1) / B(i)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::routing::{BetweennessProfile, RoutingAlgorithm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Uniform capability.
    Uc,
    /// Proportional to degree.
    Dc,
    /// Proportional to shortest-path betweenness.
    Bc,
    /// Proportional to effective betweenness of the evaluating routing.
    Ebc,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Uc => "uc",
            Scheme::Dc => "dc",
            Scheme::Bc => "bc",
            Scheme::Ebc => "ebc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uc" => Ok(Scheme::Uc),
            "dc" => Ok(Scheme::Dc),
            "bc" => Ok(Scheme::Bc),
            "ebc" => Ok(Scheme::Ebc),
            other => Err(Error::Input(format!("unknown capability scheme {other:?}"))),
        }
    }
}

/// A (capability scheme, routing algorithm) pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Combo {
    pub scheme: Scheme,
    pub routing: RoutingAlgorithm,
}

impl Combo {
    pub const fn new(scheme: Scheme, routing: RoutingAlgorithm) -> Self {
        Combo { scheme, routing }
    }

    /// The seven pairings of the benchmark capacity table, in table order.
    pub const TABLE: [Combo; 7] = [
        Combo::new(Scheme::Uc, RoutingAlgorithm::Spr),
        Combo::new(Scheme::Uc, RoutingAlgorithm::Efr),
        Combo::new(Scheme::Dc, RoutingAlgorithm::Spr),
        Combo::new(Scheme::Dc, RoutingAlgorithm::Efr),
        Combo::new(Scheme::Bc, RoutingAlgorithm::Spr),
        Combo::new(Scheme::Bc, RoutingAlgorithm::Efr),
        Combo::new(Scheme::Ebc, RoutingAlgorithm::Efr),
    ];

    pub fn label(&self) -> String {
        format!("{}-{}", self.scheme, self.routing)
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.scheme, self.routing)
    }
}

impl FromStr for Combo {
    type Err = Error;

    /// Accepts `ebc-efr`, `ebc,efr` or `(EBC, EFR)`.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ' '))
            .collect();
        let (a, b) = cleaned
            .split_once(['-', ',', ':'])
            .ok_or_else(|| Error::Input(format!("combo {s:?} is not scheme-routing")))?;
        Ok(Combo::new(a.parse()?, b.parse()?))
    }
}

/// Per-node processing capability (packets per step).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapabilityAssignment {
    pub scheme: Scheme,
    pub values: Vec<f64>,
    /// Routing whose betweenness shaped the assignment (BC and EBC only).
    pub profile_routing: Option<RoutingAlgorithm>,
}

impl CapabilityAssignment {
    pub fn c_max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Every capability multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CapabilityAssignment {
            scheme: self.scheme,
            values: self.values.iter().map(|c| c * factor).collect(),
            profile_routing: self.profile_routing,
        }
    }
}

/// Assigns capabilities under `scheme`, normalised so they sum to `2M`.
///
/// BC needs a shortest-path profile; EBC takes the profile of the routing it
/// will be evaluated with.
pub fn assign(
    g: &Graph,
    profile: Option<&BetweennessProfile>,
    scheme: Scheme,
) -> Result<CapabilityAssignment> {
    let n = g.node_count();
    let total = 2.0 * g.edge_count() as f64;
    if g.edge_count() == 0 {
        return Err(Error::Input("capabilities need at least one edge".into()));
    }
    let proportional = |weights: &[f64]| -> Vec<f64> {
        let sum: f64 = weights.iter().sum();
        weights.iter().map(|w| total * w / sum).collect()
    };
    let need_profile = || -> Result<&BetweennessProfile> {
        let p = profile.ok_or_else(|| {
            Error::Input(format!("scheme {scheme} needs a betweenness profile"))
        })?;
        if p.node_count() != n {
            return Err(Error::Input(format!(
                "profile covers {} nodes, graph has {n}",
                p.node_count()
            )));
        }
        Ok(p)
    };
    let (values, profile_routing) = match scheme {
        Scheme::Uc => (vec![total / n as f64; n], None),
        Scheme::Dc => (g.degrees().into_iter().map(|d| d as f64).collect(), None),
        Scheme::Bc => {
            let p = need_profile()?;
            if p.algorithm != RoutingAlgorithm::Spr {
                return Err(Error::Input(
                    "betweenness scheme needs a shortest-path profile".into(),
                ));
            }
            (proportional(&p.values), Some(p.algorithm))
        }
        Scheme::Ebc => {
            let p = need_profile()?;
            (proportional(&p.values), Some(p.algorithm))
        }
    };
    Ok(CapabilityAssignment {
        scheme,
        values,
        profile_routing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignEvaluation {
    pub scheme: Scheme,
    pub routing: RoutingAlgorithm,
    pub rc_analytic: f64,
    pub c_max: f64,
    /// Lowest-id node attaining the minimum.
    pub argmin_node: usize,
}

/// Critical generation rate of capabilities `ca` under the routing that
/// produced `profile`.
///
/// EBC capabilities built from a different routing are rejected unless
/// `allow_mismatch` is set.
pub fn analytic_rc(
    profile: &BetweennessProfile,
    ca: &CapabilityAssignment,
    allow_mismatch: bool,
) -> Result<DesignEvaluation> {
    let n = profile.node_count();
    if ca.values.len() != n {
        return Err(Error::Input(format!(
            "capabilities cover {} nodes, profile has {n}",
            ca.values.len()
        )));
    }
    if ca.scheme == Scheme::Ebc && !allow_mismatch && ca.profile_routing != Some(profile.algorithm) {
        return Err(Error::Input(format!(
            "ebc capabilities from {:?} routing evaluated under {}",
            ca.profile_routing, profile.algorithm
        )));
    }
    let pairs = n as f64 * (n as f64 - 1.0);
    let (argmin_node, rc_analytic) = ca
        .values
        .iter()
        .zip(&profile.values)
        .map(|(c, b)| c * pairs / b)
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, r)| if r < best.1 { (i, r) } else { best });
    Ok(DesignEvaluation {
        scheme: ca.scheme,
        routing: profile.algorithm,
        rc_analytic,
        c_max: ca.c_max(),
        argmin_node,
    })
}

/// Shortest-path and efficient-routing profiles of one graph.
#[derive(Debug, Clone)]
pub struct Profiles {
    pub spr: BetweennessProfile,
    pub efr: BetweennessProfile,
}

impl Profiles {
    pub fn compute(g: &Graph) -> Result<Self> {
        use crate::routing::RoutingSystem;
        Ok(Profiles {
            spr: RoutingSystem::build(g, RoutingAlgorithm::Spr)?.effective_betweenness(),
            efr: RoutingSystem::build(g, RoutingAlgorithm::Efr)?.effective_betweenness(),
        })
    }

    pub fn get(&self, routing: RoutingAlgorithm) -> &BetweennessProfile {
        match routing {
            RoutingAlgorithm::Spr => &self.spr,
            RoutingAlgorithm::Efr => &self.efr,
        }
    }
}

/// Capabilities for `combo`: BC always from the shortest-path profile, EBC
/// from the combo's own routing.
pub fn assign_combo(g: &Graph, combo: Combo, profiles: &Profiles) -> Result<CapabilityAssignment> {
    let base = match combo.scheme {
        Scheme::Uc | Scheme::Dc => None,
        Scheme::Bc => Some(&profiles.spr),
        Scheme::Ebc => Some(profiles.get(combo.routing)),
    };
    assign(g, base, combo.scheme)
}

pub fn evaluate_combo(g: &Graph, combo: Combo, profiles: &Profiles) -> Result<DesignEvaluation> {
    let ca = assign_combo(g, combo, profiles)?;
    analytic_rc(profiles.get(combo.routing), &ca, false)
}

/// Closed-form value together with whether the mean degree differed from 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub value: f64,
    /// True when `2M/N != 4` and the mean degree replaced the constant 4.
    pub generalized: bool,
}

fn mean_degree_factor(g: &Graph) -> (f64, bool) {
    let k = g.mean_degree();
    (k, 2 * g.edge_count() != 4 * g.node_count())
}

fn expect_routing(profile: &BetweennessProfile, routing: RoutingAlgorithm) -> Result<()> {
    if profile.algorithm == routing {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "closed form for {routing} given a {} profile",
            profile.algorithm
        )))
    }
}

/// Closed-form critical rate for (UC, SPR), (UC, EFR), (BC, SPR) and
/// (EBC, EFR). `profile` must belong to the combo's routing.
pub fn closed_form_rc(g: &Graph, profile: &BetweennessProfile, combo: Combo) -> Result<ClosedForm> {
    let n = g.node_count() as f64;
    let (k, generalized) = mean_degree_factor(g);
    use RoutingAlgorithm::{Efr, Spr};
    let value = match (combo.scheme, combo.routing) {
        (Scheme::Uc, r) => {
            expect_routing(profile, r)?;
            k * n * (n - 1.0) / profile.b_max
        }
        (Scheme::Bc, Spr) | (Scheme::Ebc, Efr) => {
            expect_routing(profile, combo.routing)?;
            k * n / (profile.avg_path_length + 1.0)
        }
        _ => {
            return Err(Error::Input(format!("no closed-form rate for {combo}")));
        }
    };
    Ok(ClosedForm { value, generalized })
}

/// Closed-form `C_max`: `2M/N` for UC, maximum degree for DC, and
/// `k B_max / ((N-1)(L+1))` for (BC, SPR) and (EBC, EFR).
pub fn closed_form_cmax(
    g: &Graph,
    profile: Option<&BetweennessProfile>,
    combo: Combo,
) -> Result<ClosedForm> {
    let n = g.node_count() as f64;
    let (k, generalized) = mean_degree_factor(g);
    use RoutingAlgorithm::{Efr, Spr};
    let value = match (combo.scheme, combo.routing) {
        (Scheme::Uc, _) => k,
        (Scheme::Dc, _) => g.max_degree() as f64,
        (Scheme::Bc, Spr) | (Scheme::Ebc, Efr) => {
            let p = profile
                .ok_or_else(|| Error::Input(format!("closed-form C_max for {combo} needs a profile")))?;
            expect_routing(p, combo.routing)?;
            k * p.b_max / ((n - 1.0) * (p.avg_path_length + 1.0))
        }
        _ => return Err(Error::Input(format!("no closed-form C_max for {combo}"))),
    };
    Ok(ClosedForm { value, generalized })
}

/// How (BC, SPR) compares with (EBC, EFR) on one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffRatios {
    /// `R_c(BC,SPR) / R_c(EBC,EFR) = (L_efr + 1) / (L_spr + 1)`.
    pub rc_ratio: f64,
    /// `C_max(BC,SPR) / C_max(EBC,EFR) = rc_ratio * B_max / B_max_efr`.
    pub cmax_ratio: f64,
}

pub fn tradeoff_ratios(spr: &BetweennessProfile, efr: &BetweennessProfile) -> Result<TradeoffRatios> {
    expect_routing(spr, RoutingAlgorithm::Spr)?;
    expect_routing(efr, RoutingAlgorithm::Efr)?;
    if spr.node_count() != efr.node_count() {
        return Err(Error::Input("profiles come from different graphs".into()));
    }
    let rc_ratio = (efr.avg_path_length + 1.0) / (spr.avg_path_length + 1.0);
    Ok(TradeoffRatios {
        rc_ratio,
        cmax_ratio: rc_ratio * spr.b_max / efr.b_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::RoutingSystem;
    use crate::topology::{gen_ba, gen_lattice, gen_ring};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn uniform_on_regular_graph() {
        let g = gen_ring(20).unwrap();
        let ca = assign(&g, None, Scheme::Uc).unwrap();
        assert!(ca.values.iter().all(|&c| c == 4.0));
    }

    #[test]
    fn missing_profile_is_input_error() {
        let g = gen_ring(20).unwrap();
        assert!(matches!(assign(&g, None, Scheme::Bc), Err(Error::Input(_))));
        assert!(matches!(assign(&g, None, Scheme::Ebc), Err(Error::Input(_))));
        let efr = RoutingSystem::build(&g, RoutingAlgorithm::Efr).unwrap().effective_betweenness();
        assert!(assign(&g, Some(&efr), Scheme::Bc).is_err());
    }

    #[test]
    fn complete_graph_rate() {
        for n in [4, 7, 10] {
            let g = complete(n);
            let p = RoutingSystem::build(&g, RoutingAlgorithm::Spr).unwrap().effective_betweenness();
            let ca = assign(&g, None, Scheme::Uc).unwrap();
            let e = analytic_rc(&p, &ca, false).unwrap();
            let expected = (n * (n - 1) / 2) as f64;
            assert!(rel(e.rc_analytic, expected) < 1e-12, "n={n}: {}", e.rc_analytic);
        }
    }

    #[test]
    fn bc_matches_uc_on_vertex_transitive() {
        let g = gen_lattice(5, 6).unwrap();
        let p = Profiles::compute(&g).unwrap();
        let uc = assign_combo(&g, Combo::new(Scheme::Uc, RoutingAlgorithm::Spr), &p).unwrap();
        let bc = assign_combo(&g, Combo::new(Scheme::Bc, RoutingAlgorithm::Spr), &p).unwrap();
        for (a, b) in uc.values.iter().zip(&bc.values) {
            assert!(rel(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn ebc_mismatch_rejected_unless_overridden() {
        let g = gen_ba(60, 2, 3).unwrap();
        let p = Profiles::compute(&g).unwrap();
        let ca = assign(&g, Some(&p.efr), Scheme::Ebc).unwrap();
        assert!(analytic_rc(&p.spr, &ca, false).is_err());
        assert!(analytic_rc(&p.spr, &ca, true).is_ok());
        assert!(analytic_rc(&p.efr, &ca, false).is_ok());
    }

    #[test]
    fn closed_forms_agree_with_direct_evaluation() {
        let g = gen_ba(150, 2, 8).unwrap();
        let p = Profiles::compute(&g).unwrap();
        for combo in [
            Combo::new(Scheme::Uc, RoutingAlgorithm::Spr),
            Combo::new(Scheme::Uc, RoutingAlgorithm::Efr),
            Combo::new(Scheme::Bc, RoutingAlgorithm::Spr),
            Combo::new(Scheme::Ebc, RoutingAlgorithm::Efr),
        ] {
            let direct = evaluate_combo(&g, combo, &p).unwrap();
            let rc = closed_form_rc(&g, p.get(combo.routing), combo).unwrap();
            let cmax = closed_form_cmax(&g, Some(p.get(combo.routing)), combo).unwrap();
            assert!(rel(rc.value, direct.rc_analytic) < 1e-9, "{combo}");
            assert!(rel(cmax.value, direct.c_max) < 1e-9, "{combo}");
            assert!(rc.generalized);
        }
        let dc = Combo::new(Scheme::Dc, RoutingAlgorithm::Spr);
        assert_eq!(closed_form_cmax(&g, None, dc).unwrap().value, g.max_degree() as f64);
        assert!(closed_form_rc(&g, &p.spr, dc).is_err());
        assert!(closed_form_rc(&g, &p.efr, Combo::new(Scheme::Bc, RoutingAlgorithm::Spr)).is_err());
    }

    #[test]
    fn ring_ratios_are_one() {
        let g = gen_ring(41).unwrap();
        let p = Profiles::compute(&g).unwrap();
        let r = tradeoff_ratios(&p.spr, &p.efr).unwrap();
        assert!((r.rc_ratio - 1.0).abs() < 1e-12);
        assert!((r.cmax_ratio - 1.0).abs() < 1e-12);
        let bc = closed_form_rc(&g, &p.spr, Combo::new(Scheme::Bc, RoutingAlgorithm::Spr)).unwrap();
        assert!(!bc.generalized);
    }

    #[test]
    fn combo_parsing() {
        let c: Combo = "ebc-efr".parse().unwrap();
        assert_eq!(c, Combo::new(Scheme::Ebc, RoutingAlgorithm::Efr));
        assert_eq!("(UC, SPR)".parse::<Combo>().unwrap(), Combo::TABLE[0]);
        assert!("uc".parse::<Combo>().is_err());
        assert!("xx-spr".parse::<Combo>().is_err());
    }
}
