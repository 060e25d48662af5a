//! Run configuration for the scenario engine.
//!
//! Flat `key = value` text, `#` starts a comment. Keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `notionals` | built-in dataset name or CSV path (relative to the config file) | `occ-2009q1` |
//! | `beta.<class>` | risk per unit notional | `0.0098` for `credit`, else `0.0039` |
//! | `rho` | cross-class correlation | `0` |
//! | `marginal.<class>` | `gaussian` or `t3` | `gaussian` |
//! | `scenario.<id>.w.<class>` | cleared fraction of `<class>` in scenario `<id>` | see below |
//! | `paths` | Monte Carlo paths | `1000000` |
//! | `seed` | RNG seed | `2012` |
//! | `mirror_dealers` | add a mirrored copy of every dealer | `true` |
//! | `out_dir` | output directory | `out` |
//! | `level` | VaR / ES level | `0.99` |
//! | `antisymmetric` | `X_ji = -X_ij` coupling | `true` |
//! | `histogram_paths` | paths kept for exposure-reduction histograms | `100000` |
//! | `threads` | worker cap | all cores |
//!
//! Scenario ids are `irs_ccp`, `cds_ccp` (one class each), `two_ccps` (one CCP
//! per class) and `joint_ccp` (one CCP for all listed classes). Defaults clear
//! 90% of `swaps` and 85% of `credit`. Setting any `scenario.<id>.*` key
//! replaces that scenario's default class list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::notionals::load_notionals;
use super::DataError;
use crate::market::{AssetClass, ClearingScenario, Dealer, Marginal, MarketConfig};
use crate::montecarlo::{SamplingModel, SimulationOptions};

pub const SCENARIO_IDS: [&str; 4] = ["irs_ccp", "cds_ccp", "two_ccps", "joint_ccp"];
pub const DEFAULT_BETA: f64 = 0.0039;
pub const DEFAULT_CREDIT_BETA: f64 = 0.0098;
pub const DEFAULT_IRS_FRACTION: f64 = 0.90;
pub const DEFAULT_CDS_FRACTION: f64 = 0.85;
/// Suffix of the mirrored dealer names.
pub const MIRROR_SUFFIX: &str = " (EU)";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub notionals: String,
    pub betas: BTreeMap<String, f64>,
    pub rho: f64,
    pub marginals: BTreeMap<String, Marginal>,
    /// Cleared `(class, w)` per scenario id.
    pub scenarios: BTreeMap<String, Vec<(String, f64)>>,
    pub paths: u64,
    pub seed: u64,
    pub mirror_dealers: bool,
    pub out_dir: PathBuf,
    pub level: f64,
    pub antisymmetric: bool,
    pub histogram_paths: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let irs = ("swaps".to_string(), DEFAULT_IRS_FRACTION);
        let cds = ("credit".to_string(), DEFAULT_CDS_FRACTION);
        let mut scenarios = BTreeMap::new();
        scenarios.insert("irs_ccp".into(), vec![irs.clone()]);
        scenarios.insert("cds_ccp".into(), vec![cds.clone()]);
        scenarios.insert("two_ccps".into(), vec![irs.clone(), cds.clone()]);
        scenarios.insert("joint_ccp".into(), vec![irs, cds]);
        Self {
            notionals: "occ-2009q1".into(),
            betas: BTreeMap::new(),
            rho: 0.0,
            marginals: BTreeMap::new(),
            scenarios,
            paths: 1_000_000,
            seed: 2012,
            mirror_dealers: true,
            out_dir: PathBuf::from("out"),
            level: 0.99,
            antisymmetric: true,
            histogram_paths: 100_000,
            threads: None,
        }
    }
}

/// Everything the engines need for one run.
#[derive(Clone, Debug)]
pub struct PreparedRun {
    pub market: MarketConfig,
    pub scenarios: Vec<ClearingScenario>,
    pub model: SamplingModel,
    pub options: SimulationOptions,
    pub notes: Vec<String>,
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, DataError> {
    value.parse().map_err(|_| DataError::Config {
        line,
        message: format!("bad value `{value}` for `{key}`"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, DataError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(DataError::Config {
            line,
            message: format!("bad boolean `{value}` for `{key}`"),
        }),
    }
}

impl RunConfig {
    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, DataError> {
        let mut cfg = RunConfig::default();
        let mut touched: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| DataError::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["notionals"] => {
                    cfg.notionals = if super::datasets::builtin_notionals(value).is_some()
                        || Path::new(value).is_absolute()
                    {
                        value.to_string()
                    } else {
                        base_dir.join(value).to_string_lossy().into_owned()
                    }
                }
                ["beta", class] => {
                    cfg.betas.insert(class.to_string(), parse_value(line, key, value)?);
                }
                ["rho"] => cfg.rho = parse_value(line, key, value)?,
                ["marginal", class] => {
                    let m: Marginal = value.parse().map_err(|message| DataError::Config { line, message })?;
                    cfg.marginals.insert(class.to_string(), m);
                }
                ["scenario", id, "w", class] => {
                    if !SCENARIO_IDS.contains(id) {
                        return Err(DataError::Config {
                            line,
                            message: format!("unknown scenario id `{id}` (expected one of {SCENARIO_IDS:?})"),
                        });
                    }
                    let entry = cfg.scenarios.entry(id.to_string()).or_default();
                    if !touched.iter().any(|t| t == id) {
                        entry.clear();
                        touched.push(id.to_string());
                    }
                    entry.retain(|(c, _)| c != class);
                    entry.push((class.to_string(), parse_value(line, key, value)?));
                }
                ["paths"] => cfg.paths = parse_value(line, key, &value.replace('_', ""))?,
                ["seed"] => cfg.seed = parse_value(line, key, value)?,
                ["mirror_dealers"] => cfg.mirror_dealers = parse_bool(line, key, value)?,
                ["out_dir"] => cfg.out_dir = base_dir.join(value),
                ["level"] => cfg.level = parse_value(line, key, value)?,
                ["antisymmetric"] => cfg.antisymmetric = parse_bool(line, key, value)?,
                ["histogram_paths"] => cfg.histogram_paths = parse_value(line, key, &value.replace('_', ""))?,
                ["threads"] => cfg.threads = Some(parse_value(line, key, value)?),
                _ => {
                    return Err(DataError::Config {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Sets `w` for `class` in every scenario that clears it.
    pub fn set_fraction(&mut self, class: &str, w: f64) -> Result<(), DataError> {
        let mut hit = false;
        for cleared in self.scenarios.values_mut() {
            for (c, v) in cleared.iter_mut() {
                if c == class {
                    *v = w;
                    hit = true;
                }
            }
        }
        if hit {
            Ok(())
        } else {
            Err(DataError::Invalid(format!("class `{class}` is not cleared in any scenario")))
        }
    }

    /// Loads the notionals and assembles market, scenarios and options.
    pub fn prepare(&self) -> Result<PreparedRun, DataError> {
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(DataError::Invalid(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        let table = load_notionals(&self.notionals)?;
        for name in self.betas.keys().chain(self.marginals.keys()) {
            if !table.classes.contains(name) {
                return Err(DataError::UnknownClass(name.clone()));
            }
        }
        let classes: Vec<AssetClass> = table
            .classes
            .iter()
            .map(|name| {
                let default = if name == "credit" { DEFAULT_CREDIT_BETA } else { DEFAULT_BETA };
                AssetClass {
                    name: name.clone(),
                    beta: self.betas.get(name).copied().unwrap_or(default),
                    marginal: self.marginals.get(name).copied().unwrap_or(Marginal::GaussianUnit),
                }
            })
            .collect();
        if let Some(c) = classes.iter().find(|c| !(c.beta > 0.0)) {
            return Err(DataError::Invalid(format!("beta.{} must be > 0", c.name)));
        }

        let mut dealers: Vec<Dealer> = table
            .rows
            .iter()
            .map(|r| Dealer::new(r.dealer.clone(), r.notionals.clone()))
            .collect();
        let mut notes = vec![format!("notionals: {}", table.source)];
        if self.mirror_dealers {
            let mirrored: Vec<Dealer> = dealers
                .iter()
                .map(|d| Dealer::new(format!("{}{MIRROR_SUFFIX}", d.name), d.notionals.clone()))
                .collect();
            dealers.extend(mirrored);
            notes.push(format!(
                "assumption: {} mirrored dealers, each a copy of one listed dealer's notionals",
                table.rows.len()
            ));
        }
        let market = MarketConfig::new(dealers, classes, self.rho);
        market.ensure_valid()?;

        let class_of = |name: &str| market.class_index(name).ok_or_else(|| DataError::UnknownClass(name.to_string()));
        let resolve = |id: &str| -> Result<Vec<(usize, f64)>, DataError> {
            let list = self.scenarios.get(id).cloned().unwrap_or_default();
            list.iter()
                .map(|(c, w)| {
                    if !(0.0..=1.0).contains(w) {
                        return Err(DataError::Invalid(format!("scenario.{id}.w.{c} = {w} outside [0, 1]")));
                    }
                    Ok((class_of(c)?, *w))
                })
                .collect()
        };
        let mut scenarios = vec![ClearingScenario::no_ccp()];
        for id in SCENARIO_IDS {
            let cleared = resolve(id)?;
            let scenario = match id {
                "irs_ccp" | "cds_ccp" => {
                    if cleared.len() != 1 {
                        return Err(DataError::Invalid(format!("scenario `{id}` must clear exactly one class")));
                    }
                    ClearingScenario::single(id, cleared[0].0, cleared[0].1)
                }
                "two_ccps" => ClearingScenario::separate(id, &cleared),
                _ => ClearingScenario::joint(id, &cleared),
            };
            scenario.validate(market.n_classes())?;
            scenarios.push(scenario);
        }

        if self.paths < crate::montecarlo::MIN_PATHS {
            return Err(DataError::Invalid(format!(
                "paths must be at least {}",
                crate::montecarlo::MIN_PATHS
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(DataError::Invalid(format!("level must lie in (0, 1), got {}", self.level)));
        }
        let mut model = SamplingModel::from_config(&market);
        model.antisymmetric = self.antisymmetric;
        let options = SimulationOptions {
            n_paths: self.paths,
            seed: self.seed,
            level: self.level,
            threads: self.threads,
            histogram_paths: self.histogram_paths,
            progress: false,
        };
        Ok(PreparedRun {
            market,
            scenarios,
            model,
            options,
            notes,
        })
    }
}
