//! Instance-averaged capacity/cost tables and size-scaling fits.
//!
//! Work is spread over instances with rayon and always collected back in
//! instance order, so results do not depend on the thread count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::capacity::{evaluate_combo, Combo, Profiles};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::routing::{ForwardingTable, RoutingAlgorithm, RoutingSystem, SuccessorChoice};
use crate::seed;
use crate::simulator::{EtaConfig, RcSearch, SimOptions, Simulation};
use crate::topology::{Family, GenSpec};

/// Column order of the sweep CSV. Changing it is a schema change.
pub const CSV_COLUMNS: [&str; 13] = [
    "family",
    "n",
    "m",
    "seed",
    "scheme",
    "routing",
    "rc_analytic",
    "rc_sim",
    "c_max",
    "b_max",
    "l",
    "l_gamma",
    "note",
];

pub const HEURISTIC_NOTE: &str = "heuristic-generator";

/// Seed of instance `index` of `family` under a run seed.
pub fn instance_seed(seed: u64, family: Family, index: usize) -> u64 {
    seed::derive(seed::derive(seed, family as u64 + 1), index as u64)
}

fn with_context(err: Error, family: Family, seed: u64) -> Error {
    match err {
        Error::Generation { attempts, message } => Error::Generation {
            attempts,
            message: format!("{family} seed {seed}: {message}"),
        },
        Error::Parameter(m) => Error::Parameter(format!("{family} seed {seed}: {m}")),
        other => other,
    }
}

/// Simulation settings for the optional simulated column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Independent critical-rate searches averaged per row.
    pub runs: usize,
    /// Seeds averaged per bisection decision.
    pub seeds_per_decision: usize,
    pub threshold: f64,
    pub eta: EtaConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            runs: 10,
            seeds_per_decision: 3,
            threshold: RcSearch::DEFAULT_THRESHOLD,
            eta: EtaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableConfig {
    pub families: Vec<Family>,
    pub combos: Vec<Combo>,
    pub instances: usize,
    pub seed: u64,
    /// Node count override; `None` uses each family's benchmark size.
    pub size: Option<usize>,
    pub simulate: Option<SimConfig>,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            families: Family::ALL.to_vec(),
            combos: Combo::TABLE.to_vec(),
            instances: 10,
            seed: 7,
            size: None,
            simulate: None,
        }
    }
}

fn serialize_label<S: Serializer, T: fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// One (instance, combo) evaluation. Field order matches [`CSV_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "serialize_label")]
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    #[serde(serialize_with = "serialize_label")]
    pub scheme: crate::capacity::Scheme,
    #[serde(serialize_with = "serialize_label")]
    pub routing: RoutingAlgorithm,
    pub rc_analytic: f64,
    pub rc_sim: Option<f64>,
    pub c_max: f64,
    /// Maximum betweenness under the row's routing.
    pub b_max: f64,
    /// Hop-count average shortest path length.
    pub l: f64,
    /// Average candidate-path length under the row's routing.
    pub l_gamma: f64,
    pub note: &'static str,
}

impl SweepRow {
    pub fn combo(&self) -> Combo {
        Combo::new(self.scheme, self.routing)
    }
}

/// Per (family, combo) averages over instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRow {
    #[serde(serialize_with = "serialize_label")]
    pub family: Family,
    #[serde(serialize_with = "serialize_label")]
    pub combo: Combo,
    pub instances: usize,
    pub rc_analytic: f64,
    pub rc_sim: Option<f64>,
    pub c_max: f64,
    pub b_max: f64,
    pub l: f64,
    pub l_gamma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Averages in first-appearance order of (family, combo).
    pub fn means(&self) -> Vec<MeanRow> {
        let mut keys: Vec<(Family, Combo)> = Vec::new();
        for r in &self.rows {
            let k = (r.family, r.combo());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .filter_map(|(f, c)| self.mean(f, c))
            .collect()
    }

    pub fn mean(&self, family: Family, combo: Combo) -> Option<MeanRow> {
        let rows: Vec<&SweepRow> = self
            .rows
            .iter()
            .filter(|r| r.family == family && r.combo() == combo)
            .collect();
        if rows.is_empty() {
            return None;
        }
        let k = rows.len() as f64;
        let avg = |f: fn(&SweepRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / k;
        let rc_sim = rows
            .iter()
            .map(|r| r.rc_sim)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / k);
        Some(MeanRow {
            family,
            combo,
            instances: rows.len(),
            rc_analytic: avg(|r| r.rc_analytic),
            rc_sim,
            c_max: avg(|r| r.c_max),
            b_max: avg(|r| r.b_max),
            l: avg(|r| r.l),
            l_gamma: avg(|r| r.l_gamma),
        })
    }

    /// Writes all rows as CSV with the [`CSV_COLUMNS`] header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Generates `instances` graphs per family and evaluates every combo.
pub fn reproduce_tables(config: &TableConfig) -> Result<SweepResult> {
    if config.instances == 0 {
        return Err(Error::Parameter("need at least one instance".into()));
    }
    let mut rows = Vec::new();
    for &family in &config.families {
        let n = config.size.unwrap_or_else(|| family.benchmark_size());
        let per_instance: Vec<Vec<SweepRow>> = (0..config.instances)
            .into_par_iter()
            .map(|i| {
                let s = instance_seed(config.seed, family, i);
                evaluate_instance(family, n, s, config)
            })
            .collect::<Result<_>>()?;
        rows.extend(per_instance.into_iter().flatten());
    }
    Ok(SweepResult { rows })
}

fn evaluate_instance(family: Family, n: usize, seed: u64, config: &TableConfig) -> Result<Vec<SweepRow>> {
    let g = family
        .spec(n, seed)
        .generate()
        .map_err(|e| with_context(e, family, seed))?;
    let metrics = g.metrics()?;
    let profiles = Profiles::compute(&g)?;
    let tables = match config.simulate {
        Some(_) => Some(forwarding_tables(&g, &config.combos)?),
        None => None,
    };
    let note = if family == Family::Hot { HEURISTIC_NOTE } else { "" };
    config
        .combos
        .iter()
        .map(|&combo| {
            let eval = evaluate_combo(&g, combo, &profiles)?;
            let profile = profiles.get(combo.routing);
            let rc_sim = match (config.simulate, &tables) {
                (Some(sim), Some(tables)) => {
                    let table = tables
                        .iter()
                        .find(|t| t.algorithm() == combo.routing)
                        .expect("table built for every routing in use");
                    Some(simulated_rc(&g, combo, &profiles, table, eval.rc_analytic, sim, seed)?)
                }
                _ => None,
            };
            Ok(SweepRow {
                family,
                n: g.node_count(),
                m: g.edge_count(),
                seed,
                scheme: combo.scheme,
                routing: combo.routing,
                rc_analytic: eval.rc_analytic,
                rc_sim,
                c_max: eval.c_max,
                b_max: profile.b_max,
                l: metrics.avg_path_length,
                l_gamma: profile.avg_path_length,
                note,
            })
        })
        .collect()
}

fn forwarding_tables(g: &Graph, combos: &[Combo]) -> Result<Vec<ForwardingTable>> {
    let mut out = Vec::new();
    for algo in RoutingAlgorithm::ALL {
        if combos.iter().any(|c| c.routing == algo) {
            let rs = RoutingSystem::build(g, algo)?;
            out.push(ForwardingTable::new(&rs, SuccessorChoice::PathWeighted));
        }
    }
    Ok(out)
}

/// Mean of `sim.runs` independent bisection searches for one combo.
pub fn simulated_rc(
    g: &Graph,
    combo: Combo,
    profiles: &Profiles,
    table: &ForwardingTable,
    analytic: f64,
    sim: SimConfig,
    seed: u64,
) -> Result<f64> {
    let ca = crate::capacity::assign_combo(g, combo, profiles)?;
    let simulation = Simulation::new(table, &ca, SimOptions::default())?;
    let mut total = 0.0;
    for run in 0..sim.runs.max(1) {
        let mut search = RcSearch::around(analytic, seed::derive(seed, 1000 + run as u64));
        search.threshold = sim.threshold;
        search.eta = sim.eta;
        search.seeds = sim.seeds_per_decision;
        total += simulation.estimate_rc(&search)?.rc;
    }
    Ok(total / sim.runs.max(1) as f64)
}

/// Size-dependent quantity tracked by a scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    BMaxSpr,
    BMaxEfr,
    LSpr,
    LEfr,
    Rc(Combo),
    CMax(Combo),
    /// The node count itself; a fit sanity hook.
    Nodes,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::BMaxSpr => f.write_str("b_max_spr"),
            Quantity::BMaxEfr => f.write_str("b_max_efr"),
            Quantity::LSpr => f.write_str("l_spr"),
            Quantity::LEfr => f.write_str("l_efr"),
            Quantity::Rc(c) => write!(f, "rc:{c}"),
            Quantity::CMax(c) => write!(f, "c_max:{c}"),
            Quantity::Nodes => f.write_str("n"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Quantity {
    type Err = Error;

    /// `b_max_spr`, `b_max_efr`, `l_spr`, `l_efr`, `n`, `rc:<combo>`, `c_max:<combo>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(c) = lower.strip_prefix("rc:").or_else(|| lower.strip_prefix("rc_")) {
            return Ok(Quantity::Rc(c.parse()?));
        }
        if let Some(c) = lower.strip_prefix("c_max:").or_else(|| lower.strip_prefix("c_max_")) {
            return Ok(Quantity::CMax(c.parse()?));
        }
        Ok(match lower.as_str() {
            "b_max_spr" => Quantity::BMaxSpr,
            "b_max_efr" => Quantity::BMaxEfr,
            "l_spr" => Quantity::LSpr,
            "l_efr" => Quantity::LEfr,
            "n" => Quantity::Nodes,
            _ => return Err(Error::Input(format!("unknown quantity {s:?}"))),
        })
    }
}

impl Quantity {
    fn measure(&self, g: &Graph, profiles: &Profiles) -> Result<f64> {
        Ok(match *self {
            Quantity::BMaxSpr => profiles.spr.b_max,
            Quantity::BMaxEfr => profiles.efr.b_max,
            Quantity::LSpr => profiles.spr.avg_path_length,
            Quantity::LEfr => profiles.efr.avg_path_length,
            Quantity::Rc(c) => evaluate_combo(g, c, profiles)?.rc_analytic,
            Quantity::CMax(c) => evaluate_combo(g, c, profiles)?.c_max,
            Quantity::Nodes => g.node_count() as f64,
        })
    }
}

/// Least-squares line through `(log N, log Y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(N, mean Y)` per size.
    pub points: Vec<(f64, f64)>,
}

/// Fits `Y = e^intercept * N^exponent` by ordinary least squares in log space.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::Input("a fit needs at least two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Input("log-log fit needs positive values".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("fit needs at least two distinct sizes".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let residual: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - residual / syy).clamp(0.0, 1.0) };
    Ok(FitResult {
        exponent,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

/// Fits one quantity against network size.
pub fn scaling_sweep(
    family: Family,
    sizes: &[usize],
    quantity: Quantity,
    instances: usize,
    seed: u64,
) -> Result<FitResult> {
    scaling_sweeps(family, sizes, &[quantity], instances, seed).map(|mut v| v.remove(0))
}

/// Fits several quantities on a shared set of instances.
pub fn scaling_sweeps(
    family: Family,
    sizes: &[usize],
    quantities: &[Quantity],
    instances: usize,
    seed: u64,
) -> Result<Vec<FitResult>> {
    scaling_sweeps_with(family, |n, s| family.spec(n, s), sizes, quantities, instances, seed)
}

/// As [`scaling_sweeps`], with `spec(n, seed)` replacing the family's
/// benchmark parameters. `family` still keys the instance seeds.
pub fn scaling_sweeps_with<F>(
    family: Family,
    spec: F,
    sizes: &[usize],
    quantities: &[Quantity],
    instances: usize,
    seed: u64,
) -> Result<Vec<FitResult>>
where
    F: Fn(usize, u64) -> GenSpec + Sync,
{
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Parameter("a sweep needs at least three distinct sizes".into()));
    }
    if instances == 0 || quantities.is_empty() {
        return Err(Error::Parameter("a sweep needs instances and quantities".into()));
    }
    let mut means: Vec<Vec<(f64, f64)>> = vec![Vec::new(); quantities.len()];
    let mut completed = Vec::new();
    for &n in sizes {
        let size_seed = seed::derive(seed, n as u64);
        let per_instance: Result<Vec<Vec<f64>>> = (0..instances)
            .into_par_iter()
            .map(|i| {
                let s = instance_seed(size_seed, family, i);
                if quantities.iter().all(|q| *q == Quantity::Nodes) {
                    return Ok(vec![n as f64; quantities.len()]);
                }
                let g = spec(n, s)
                    .generate()
                    .map_err(|e| with_context(e, family, s))?;
                let profiles = Profiles::compute(&g)?;
                quantities.iter().map(|q| q.measure(&g, &profiles)).collect()
            })
            .collect();
        let per_instance = per_instance.map_err(|e| Error::PartialSweep {
            completed: completed.clone(),
            source: Box::new(e),
        })?;
        for (qi, acc) in means.iter_mut().enumerate() {
            let mean = per_instance.iter().map(|v| v[qi]).sum::<f64>() / instances as f64;
            acc.push((n as f64, mean));
        }
        completed.push(n);
    }
    means.iter().map(|pts| fit_power_law(pts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::Scheme;

    #[test]
    fn exact_power_law_fit() {
        let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n.powf(1.5)))
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(fit_power_law(&[(1.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -1.0)]).is_err());
        assert!(fit_power_law(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn node_count_self_test() {
        let fit = scaling_sweep(Family::Ba, &[400, 800, 1600, 3200], Quantity::Nodes, 2, 1).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_needs_three_sizes() {
        assert!(scaling_sweep(Family::Ba, &[100, 200, 200], Quantity::BMaxSpr, 1, 1).is_err());
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in [
            Quantity::BMaxSpr,
            Quantity::LEfr,
            Quantity::Nodes,
            Quantity::Rc(Combo::new(Scheme::Uc, RoutingAlgorithm::Spr)),
            Quantity::CMax(Combo::new(Scheme::Ebc, RoutingAlgorithm::Efr)),
        ] {
            assert_eq!(q.to_string().parse::<Quantity>().unwrap(), q);
        }
        assert!("nonsense".parse::<Quantity>().is_err());
    }

    #[test]
    fn small_table_rows_are_consistent() {
        let config = TableConfig {
            families: vec![Family::Ring, Family::Ba],
            instances: 2,
            size: Some(60),
            ..TableConfig::default()
        };
        let result = reproduce_tables(&config).unwrap();
        assert_eq!(result.rows.len(), 2 * 2 * 7);
        for row in &result.rows {
            let n = row.n as f64;
            let k = 2.0 * row.m as f64 / n;
            match (row.scheme, row.routing) {
                (Scheme::Bc, RoutingAlgorithm::Spr) => {
                    assert!(((row.rc_analytic - k * n / (row.l + 1.0)) / row.rc_analytic).abs() < 1e-9)
                }
                (Scheme::Uc, RoutingAlgorithm::Spr) => {
                    let expected = k * n * (n - 1.0) / row.b_max;
                    assert!(((row.rc_analytic - expected) / expected).abs() < 1e-9)
                }
                _ => {}
            }
        }
        let mut buf = Vec::new();
        result.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        assert_eq!(text.lines().count(), 1 + result.rows.len());
        assert_eq!(result.means().len(), 14);
    }
}
