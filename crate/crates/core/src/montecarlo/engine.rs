use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluate::CompiledScenario;
use super::sampler::{ExposureDraw, Sampler, SamplingModel};
use super::stats::{retain_largest, tail_size, Histogram, Moments, UpperTail};
use super::SimulationError;
use crate::analytic::{expected_exposures, AnalyticError};
use crate::market::{ClearedClass, ClearingScenario, Correlation, Marginal, MarketConfig, ScenarioKind};

pub const MIN_PATHS: u64 = 1_000;
/// Paths per work unit. Fixed so that partial results, and therefore the
/// merged report, do not depend on the number of workers.
pub const BLOCK_PATHS: u64 = 1_024;
/// Blocks evaluated concurrently before their results are merged.
const WAVE_BLOCKS: u64 = 32;
/// Tail means resting on fewer exceedances are flagged.
pub const MIN_TAIL_COUNT: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOptions {
    pub n_paths: u64,
    pub seed: u64,
    /// VaR / ES confidence level.
    pub level: f64,
    /// Worker cap; `None` uses the global pool. Never changes results.
    pub threads: Option<usize>,
    /// Keep `e^0 - e^n` for the first this-many paths (0 disables).
    pub histogram_paths: u64,
    pub progress: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            n_paths: 1_000_000,
            seed: 2012,
            level: 0.99,
            threads: None,
            histogram_paths: 0,
            progress: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub n_paths: u64,
    pub level: f64,
    pub antisymmetric: bool,
    pub correlation: Correlation,
    pub marginals: Vec<(String, Marginal)>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DealerRisk {
    pub ee: f64,
    pub ee_std_error: f64,
    pub var: f64,
    pub es: f64,
    /// Number of samples averaged into `es`.
    pub es_count: usize,
    pub low_confidence: bool,
    pub ee_ratio: Option<f64>,
    pub var_ratio: Option<f64>,
    pub es_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRisk {
    pub name: String,
    pub kind: ScenarioKind,
    pub cleared: Vec<ClearedClass>,
    pub dealers: Vec<DealerRisk>,
    pub total_ee: f64,
    pub total_ee_std_error: f64,
    pub total_ee_ratio: Option<f64>,
    /// Average over paths of `max_i e_i`.
    pub mean_max: f64,
    pub mean_max_std_error: f64,
    pub mean_max_ratio: Option<f64>,
    /// Closed-form expected exposures, when every marginal is Gaussian.
    pub analytic_ee: Option<Vec<f64>>,
    pub analytic_total_ee: Option<f64>,
}

/// Risk measures in millions for every dealer and scenario of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub metadata: RunMetadata,
    pub dealers: Vec<String>,
    pub scenarios: Vec<ScenarioRisk>,
    /// Distribution of `e_i^0 - e_i^n` bundled over dealers, one per
    /// non-base scenario.
    pub histograms: Vec<Histogram>,
}

impl RiskReport {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioRisk> {
        self.scenarios.iter().find(|s| s.name == name)
    }
}

/// Raw exposure reductions `e_i^0 - e_i^n`, path-major (`[path][dealer]`).
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSamples {
    pub scenarios: Vec<String>,
    pub dealers: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

struct Context {
    sampler: Sampler,
    compiled: Vec<CompiledScenario>,
    n_dealers: usize,
    n_paths: u64,
    tail_len: usize,
    base: usize,
    others: Vec<usize>,
    histogram_paths: u64,
    /// `(two_ccps, joint_ccp)` scenario indices clearing the same classes.
    dominance: Vec<(usize, usize)>,
}

struct BlockStats {
    cells: Vec<Moments>,
    totals: Vec<Moments>,
    maxima: Vec<Moments>,
    tails: Vec<Vec<f64>>,
    epsilon: Vec<Vec<f64>>,
}

impl BlockStats {
    fn new(n_cells: usize, n_scenarios: usize, n_others: usize) -> Self {
        Self {
            cells: vec![Moments::default(); n_cells],
            totals: vec![Moments::default(); n_scenarios],
            maxima: vec![Moments::default(); n_scenarios],
            tails: vec![Vec::new(); n_cells],
            epsilon: vec![Vec::new(); n_others],
        }
    }

    fn absorb(&mut self, block: BlockStats, tail_len: usize) {
        for (a, b) in self.cells.iter_mut().zip(&block.cells) {
            a.merge(b);
        }
        for (a, b) in self.totals.iter_mut().zip(&block.totals) {
            a.merge(b);
        }
        for (a, b) in self.maxima.iter_mut().zip(&block.maxima) {
            a.merge(b);
        }
        for (a, b) in self.tails.iter_mut().zip(block.tails) {
            a.extend(b);
            if a.len() > 2 * tail_len {
                retain_largest(a, tail_len);
            }
        }
        for (a, b) in self.epsilon.iter_mut().zip(block.epsilon) {
            a.extend(b);
        }
    }
}

fn same_cleared_set(a: &ClearingScenario, b: &ClearingScenario) -> bool {
    let key = |s: &ClearingScenario| {
        let mut v: Vec<(usize, u64)> = s.cleared.iter().map(|c| (c.class, c.fraction.to_bits())).collect();
        v.sort_unstable();
        v
    };
    key(a) == key(b)
}

fn run_block(ctx: &Context, block: u64) -> BlockStats {
    let n = ctx.n_dealers;
    let n_scen = ctx.compiled.len();
    let mut stats = BlockStats::new(n_scen * n, n_scen, ctx.others.len());
    let mut draw = ExposureDraw::zeros(n, ctx.sampler.n_classes());
    let mut e = vec![0.0; n_scen * n];
    let start = block * BLOCK_PATHS;
    let end = (start + BLOCK_PATHS).min(ctx.n_paths);

    for path in start..end {
        ctx.sampler.draw_path(path, &mut draw);
        for (s, scenario) in ctx.compiled.iter().enumerate() {
            for i in 0..n {
                e[s * n + i] = scenario.exposure(&draw, i);
            }
        }
        debug_assert!(e.iter().all(|v| *v >= 0.0), "negative exposure on path {path}");
        #[cfg(debug_assertions)]
        for &(two, joint) in &ctx.dominance {
            for i in 0..n {
                let (t, j) = (e[two * n + i], e[joint * n + i]);
                assert!(j <= t + 1e-12 * (1.0 + t), "joint {j} > separate {t} (path {path}, dealer {i})");
            }
        }

        for s in 0..n_scen {
            let mut total = 0.0;
            let mut max = 0.0f64;
            for i in 0..n {
                let v = e[s * n + i];
                stats.cells[s * n + i].push(v);
                stats.tails[s * n + i].push(v);
                total += v;
                max = max.max(v);
            }
            stats.totals[s].push(total);
            stats.maxima[s].push(max);
        }
        if path < ctx.histogram_paths {
            for (slot, &s) in ctx.others.iter().enumerate() {
                for i in 0..n {
                    stats.epsilon[slot].push(e[ctx.base * n + i] - e[s * n + i]);
                }
            }
        }
    }
    for tail in &mut stats.tails {
        retain_largest(tail, ctx.tail_len);
    }
    stats
}

fn ratio(value: f64, base: f64) -> Option<f64> {
    (base > 0.0).then(|| value / base)
}

/// Runs every scenario on the same sampled positions (common random numbers)
/// and returns the report. Output is bit-identical for a given
/// `(seed, n_paths)` whatever the number of workers.
pub fn simulate(
    config: &MarketConfig,
    model: &SamplingModel,
    scenarios: &[ClearingScenario],
    options: &SimulationOptions,
) -> Result<RiskReport, SimulationError> {
    simulate_detailed(config, model, scenarios, options).map(|(report, _)| report)
}

/// Like [`simulate`], also returning the raw exposure reductions kept for
/// the histograms.
pub fn simulate_detailed(
    config: &MarketConfig,
    model: &SamplingModel,
    scenarios: &[ClearingScenario],
    options: &SimulationOptions,
) -> Result<(RiskReport, EpsilonSamples), SimulationError> {
    if options.n_paths < MIN_PATHS {
        return Err(SimulationError::TooFewPaths(options.n_paths));
    }
    if !(options.level > 0.0 && options.level < 1.0) {
        return Err(SimulationError::Level(options.level));
    }
    let sampler = Sampler::new(config, model, options.seed)?;
    let n = config.n_dealers();
    let compiled = scenarios
        .iter()
        .map(|s| CompiledScenario::new(s, config.n_classes()))
        .collect::<Result<Vec<_>, _>>()?;
    let base = scenarios
        .iter()
        .position(|s| s.kind == ScenarioKind::NoCcp)
        .ok_or(SimulationError::NoBaseScenario)?;
    let others: Vec<usize> = (0..scenarios.len()).filter(|s| *s != base).collect();
    let mut dominance = Vec::new();
    for (a, sa) in scenarios.iter().enumerate() {
        for (b, sb) in scenarios.iter().enumerate() {
            if sa.kind == ScenarioKind::TwoCcps && sb.kind == ScenarioKind::JointCcp && same_cleared_set(sa, sb) {
                dominance.push((a, b));
            }
        }
    }
    let tail_len = tail_size(options.n_paths, options.level);
    let ctx = Context {
        sampler,
        compiled,
        n_dealers: n,
        n_paths: options.n_paths,
        tail_len,
        base,
        others,
        histogram_paths: options.histogram_paths.min(options.n_paths),
        dominance,
    };

    let pool = match options.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| SimulationError::ThreadPool(e.to_string()))?,
        ),
        None => None,
    };

    let n_scen = scenarios.len();
    let mut acc = BlockStats::new(n_scen * n, n_scen, ctx.others.len());
    let n_blocks = options.n_paths.div_ceil(BLOCK_PATHS);
    let mut next = 0;
    while next < n_blocks {
        let end = (next + WAVE_BLOCKS).min(n_blocks);
        let run = || {
            (next..end)
                .into_par_iter()
                .map(|b| run_block(&ctx, b))
                .collect::<Vec<_>>()
        };
        let wave = match &pool {
            Some(p) => p.install(run),
            None => run(),
        };
        for block in wave {
            acc.absorb(block, tail_len);
        }
        if options.progress {
            eprintln!(
                "simulated {} / {} paths",
                (end * BLOCK_PATHS).min(options.n_paths),
                options.n_paths
            );
        }
        next = end;
    }

    let level = options.level;
    let mut cells = Vec::with_capacity(n_scen * n);
    for (c, tail) in acc.tails.iter_mut().enumerate() {
        retain_largest(tail, tail_len);
        tail.sort_by(f64::total_cmp);
        let upper = UpperTail {
            n_total: options.n_paths,
            values: std::mem::take(tail),
        };
        let var = upper.quantile(level)?;
        let (es, es_count) = upper.expected_shortfall(level)?;
        let m = &acc.cells[c];
        cells.push(DealerRisk {
            ee: m.mean,
            ee_std_error: m.std_error(),
            var,
            es,
            es_count,
            low_confidence: es_count < MIN_TAIL_COUNT,
            ee_ratio: None,
            var_ratio: None,
            es_ratio: None,
        });
    }
    for s in 0..n_scen {
        for i in 0..n {
            let b = cells[base * n + i].clone();
            let cell = &mut cells[s * n + i];
            cell.ee_ratio = ratio(cell.ee, b.ee);
            cell.var_ratio = ratio(cell.var, b.var);
            cell.es_ratio = ratio(cell.es, b.es);
        }
    }

    let base_total = acc.totals[base].mean;
    let base_max = acc.maxima[base].mean;
    let mut chunks = cells.chunks(n);
    let scenario_risk: Vec<ScenarioRisk> = scenarios
        .iter()
        .enumerate()
        .map(|(s, sc)| ScenarioRisk {
            name: sc.name.clone(),
            kind: sc.kind,
            cleared: sc.cleared.clone(),
            dealers: chunks.next().map(|c| c.to_vec()).unwrap_or_default(),
            total_ee: acc.totals[s].mean,
            total_ee_std_error: acc.totals[s].std_error(),
            total_ee_ratio: ratio(acc.totals[s].mean, base_total),
            mean_max: acc.maxima[s].mean,
            mean_max_std_error: acc.maxima[s].std_error(),
            mean_max_ratio: ratio(acc.maxima[s].mean, base_max),
            analytic_ee: None,
            analytic_total_ee: None,
        })
        .collect();

    let histograms = if ctx.histogram_paths > 0 {
        ctx.others
            .iter()
            .zip(&acc.epsilon)
            .map(|(&s, values)| Histogram::freedman_diaconis(scenarios[s].name.clone(), values))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };

    let dealers: Vec<String> = config.dealers.iter().map(|d| d.name.clone()).collect();
    let metadata = RunMetadata {
        seed: options.seed,
        n_paths: options.n_paths,
        level,
        antisymmetric: model.antisymmetric,
        correlation: model.correlation.clone(),
        marginals: config
            .classes
            .iter()
            .zip(&model.marginals)
            .map(|(c, m)| (c.name.clone(), *m))
            .collect(),
        notes: vec![
            if model.antisymmetric {
                "positions are two sides of one trade: Y_ji = -Y_ij, each direction with its own scale".into()
            } else {
                "each ordered pair draws independent shocks".into()
            },
            "VaR: order statistic with linear interpolation at (n - 1) * level; ES: mean of samples >= VaR".into(),
        ],
    };
    let epsilon = EpsilonSamples {
        scenarios: ctx.others.iter().map(|&s| scenarios[s].name.clone()).collect(),
        dealers: dealers.clone(),
        values: acc.epsilon,
    };
    Ok((
        RiskReport {
            metadata,
            dealers,
            scenarios: scenario_risk,
            histograms,
        },
        epsilon,
    ))
}

/// Fills the closed-form expected exposures into `report` when the market
/// is all-Gaussian. Returns whether anything was attached.
pub fn attach_analytic(
    report: &mut RiskReport,
    config: &MarketConfig,
    scenarios: &[ClearingScenario],
) -> Result<bool, AnalyticError> {
    if !config.all_gaussian() {
        return Ok(false);
    }
    for (risk, scenario) in report.scenarios.iter_mut().zip(scenarios) {
        let analytic = expected_exposures(config, scenario)?;
        risk.analytic_total_ee = Some(analytic.total);
        risk.analytic_ee = Some(analytic.per_dealer);
    }
    Ok(true)
}
