//! Market description shared by the closed-form and Monte Carlo engines.
//!
//! A market is `N` dealers trading `K` asset classes. Dealer `i` holds a gross
//! notional `Z_i^k` in class `k` (billions USD), each class has a risk per unit
//! notional `beta_k`, and the position value of `i` against `j` in class `k` has
//! standard deviation
//!
//! ```text
//! s_ij^k = beta_k * Z_i^k * Z_j^k / sum_{h != i} Z_h^k
//! ```
//!
//! Positions across classes of the same pair are linked by a correlation
//! matrix, usually an equicorrelation with a single scalar `rho`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Notionals are ingested in billions, exposures are reported in millions.
pub const MILLIONS_PER_BILLION: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("invalid market configuration: {0}")]
    Invalid(ValidationReport),
    #[error("invalid clearing scenario `{name}`: {reason}")]
    InvalidScenario { name: String, reason: String },
    #[error("invalid homogeneous market: {0}")]
    InvalidHomogeneous(String),
    #[error("pair scale needs two distinct dealers, got i = j = {0}")]
    SameDealer(usize),
    #[error("index out of range: {0}")]
    OutOfRange(String),
}

/// Distribution of the unit-variance shock `Y_ij^k` driving a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marginal {
    GaussianUnit,
    /// Student t with 3 degrees of freedom scaled by `1/sqrt(3)`.
    StudentT3Unit,
}

impl Marginal {
    pub fn label(&self) -> &'static str {
        match self {
            Marginal::GaussianUnit => "gaussian",
            Marginal::StudentT3Unit => "t3",
        }
    }
}

impl std::str::FromStr for Marginal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Marginal::GaussianUnit),
            "t3" | "student-t3" => Ok(Marginal::StudentT3Unit),
            other => Err(format!("unknown marginal `{other}` (expected gaussian or t3)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetClass {
    pub name: String,
    /// Risk per unit notional.
    pub beta: f64,
    pub marginal: Marginal,
}

impl AssetClass {
    pub fn gaussian(name: impl Into<String>, beta: f64) -> Self {
        Self {
            name: name.into(),
            beta,
            marginal: Marginal::GaussianUnit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dealer {
    pub name: String,
    /// Gross notional per asset class, billions.
    pub notionals: Vec<f64>,
}

impl Dealer {
    pub fn new(name: impl Into<String>, notionals: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            notionals,
        }
    }
}

/// Cross-class correlation of one pair's positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Correlation {
    /// Every off-diagonal entry equals `rho`.
    Equi(f64),
    /// Full row-major `K x K` matrix.
    Matrix(Vec<f64>),
}

impl Correlation {
    pub fn get(&self, k: usize, m: usize, n_classes: usize) -> f64 {
        if k == m {
            return 1.0;
        }
        match self {
            Correlation::Equi(rho) => *rho,
            Correlation::Matrix(values) => values[k * n_classes + m],
        }
    }

    /// `sum_k sum_m rho_km a_k a_m`.
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        let n = a.len();
        match self {
            Correlation::Equi(rho) => {
                let sum: f64 = a.iter().sum();
                let sum_sq: f64 = a.iter().map(|x| x * x).sum();
                (1.0 - rho) * sum_sq + rho * sum * sum
            }
            Correlation::Matrix(_) => {
                let mut acc = 0.0;
                for k in 0..n {
                    if a[k] == 0.0 {
                        continue;
                    }
                    for m in 0..n {
                        acc += self.get(k, m, n) * a[k] * a[m];
                    }
                }
                acc
            }
        }
    }

    /// Lower Cholesky factor as a row-major `K x K` matrix, `None` if the
    /// matrix is not positive definite.
    pub fn cholesky(&self, n_classes: usize) -> Option<Vec<f64>> {
        let n = n_classes;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j, n);
                for p in 0..j {
                    sum -= l[i * n + p] * l[j * n + p];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(l)
    }
}

/// A validated-on-demand market. Engines call [`MarketConfig::ensure_valid`]
/// before doing any work.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub dealers: Vec<Dealer>,
    pub classes: Vec<AssetClass>,
    pub correlation: Correlation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    TooFewDealers(usize),
    NoClasses,
    NotionalLength { dealer: String, got: usize, expected: usize },
    NegativeNotional { dealer: String, class: String },
    NonPositiveBeta(String),
    CorrelationOutOfRange,
    CorrelationShape,
    CorrelationNotPositiveDefinite,
    ZeroCounterpartyDenominator { dealer: String, class: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewDealers(n) => write!(f, "N ≥ 2 required (got {n})"),
            Violation::NoClasses => write!(f, "K ≥ 1 required"),
            Violation::NotionalLength { dealer, got, expected } => {
                write!(f, "dealer `{dealer}` has {got} notionals, expected {expected}")
            }
            Violation::NegativeNotional { dealer, class } => {
                write!(f, "dealer `{dealer}` has a negative or non-finite notional in `{class}`")
            }
            Violation::NonPositiveBeta(class) => write!(f, "class `{class}` needs beta > 0"),
            Violation::CorrelationOutOfRange => write!(f, "rho must lie in [0, 1)"),
            Violation::CorrelationShape => {
                write!(f, "correlation matrix must be K x K, symmetric, unit diagonal")
            }
            Violation::CorrelationNotPositiveDefinite => {
                write!(f, "correlation matrix is not positive definite")
            }
            Violation::ZeroCounterpartyDenominator { dealer, class } => write!(
                f,
                "zero counterparty notional denominator for dealer `{dealer}` in `{class}`"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks every structural invariant of a market. An empty report means the
/// engines will accept the config.
pub fn validate(config: &MarketConfig) -> ValidationReport {
    let mut violations = Vec::new();
    let n = config.dealers.len();
    let k_count = config.classes.len();
    if n < 2 {
        violations.push(Violation::TooFewDealers(n));
    }
    if k_count == 0 {
        violations.push(Violation::NoClasses);
    }
    for class in &config.classes {
        if !(class.beta > 0.0 && class.beta.is_finite()) {
            violations.push(Violation::NonPositiveBeta(class.name.clone()));
        }
    }
    let mut shapes_ok = true;
    for dealer in &config.dealers {
        if dealer.notionals.len() != k_count {
            shapes_ok = false;
            violations.push(Violation::NotionalLength {
                dealer: dealer.name.clone(),
                got: dealer.notionals.len(),
                expected: k_count,
            });
            continue;
        }
        for (k, z) in dealer.notionals.iter().enumerate() {
            if !(*z >= 0.0 && z.is_finite()) {
                violations.push(Violation::NegativeNotional {
                    dealer: dealer.name.clone(),
                    class: config.classes[k].name.clone(),
                });
            }
        }
    }
    match &config.correlation {
        Correlation::Equi(rho) => {
            if !(*rho >= 0.0 && *rho < 1.0) {
                violations.push(Violation::CorrelationOutOfRange);
            }
        }
        Correlation::Matrix(values) => {
            let square = values.len() == k_count * k_count;
            let symmetric_unit = square
                && (0..k_count).all(|a| {
                    values[a * k_count + a] == 1.0
                        && (0..k_count).all(|b| {
                            let v = values[a * k_count + b];
                            v.is_finite() && v == values[b * k_count + a]
                        })
                });
            if !symmetric_unit {
                violations.push(Violation::CorrelationShape);
            } else if config.correlation.cholesky(k_count).is_none() {
                violations.push(Violation::CorrelationNotPositiveDefinite);
            }
        }
    }
    if shapes_ok {
        for k in 0..k_count {
            for (i, dealer) in config.dealers.iter().enumerate() {
                if dealer.notionals[k] > 0.0 && counterparty_total(config, i, k) <= 0.0 {
                    violations.push(Violation::ZeroCounterpartyDenominator {
                        dealer: dealer.name.clone(),
                        class: config.classes[k].name.clone(),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// `sum_{h != i} Z_h^k`.
fn counterparty_total(config: &MarketConfig, i: usize, k: usize) -> f64 {
    config
        .dealers
        .iter()
        .enumerate()
        .filter(|(h, _)| *h != i)
        .map(|(_, d)| d.notionals[k])
        .sum()
}

impl MarketConfig {
    pub fn new(dealers: Vec<Dealer>, classes: Vec<AssetClass>, rho: f64) -> Self {
        Self {
            dealers,
            classes,
            correlation: Correlation::Equi(rho),
        }
    }

    pub fn n_dealers(&self) -> usize {
        self.dealers.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn ensure_valid(&self) -> Result<(), MarketError> {
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(MarketError::Invalid(report))
        }
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn all_gaussian(&self) -> bool {
        self.classes.iter().all(|c| c.marginal == Marginal::GaussianUnit)
    }

    /// Precomputes `s_ij^k` for every ordered pair.
    pub fn scale_table(&self) -> ScaleTable {
        let n = self.n_dealers();
        let k_count = self.n_classes();
        let mut totals = vec![0.0; n * k_count];
        for i in 0..n {
            for k in 0..k_count {
                totals[i * k_count + k] = counterparty_total(self, i, k);
            }
        }
        let mut values = vec![0.0; n * n * k_count];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..k_count {
                    values[(i * n + j) * k_count + k] =
                        raw_pair_scale(self, i, j, k, totals[i * k_count + k]);
                }
            }
        }
        ScaleTable {
            n_dealers: n,
            n_classes: k_count,
            values,
        }
    }

    /// Uniformly rescales every notional.
    pub fn scaled_notionals(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for d in &mut out.dealers {
            for z in &mut d.notionals {
                *z *= factor;
            }
        }
        out
    }
}

fn raw_pair_scale(config: &MarketConfig, i: usize, j: usize, k: usize, denominator: f64) -> f64 {
    let zi = config.dealers[i].notionals[k];
    let zj = config.dealers[j].notionals[k];
    if zi == 0.0 || zj == 0.0 {
        return 0.0;
    }
    config.classes[k].beta * zi * (zj / denominator)
}

/// Standard deviation of `X_ij^k` in notional units.
pub fn pair_scale(config: &MarketConfig, i: usize, j: usize, k: usize) -> Result<f64, MarketError> {
    if i == j {
        return Err(MarketError::SameDealer(i));
    }
    let n = config.n_dealers();
    if i >= n || j >= n || k >= config.n_classes() {
        return Err(MarketError::OutOfRange(format!("dealer ({i}, {j}) class {k}")));
    }
    Ok(raw_pair_scale(config, i, j, k, counterparty_total(config, i, k)))
}

/// Dense `N x N x K` table of pair scales; the diagonal is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleTable {
    n_dealers: usize,
    n_classes: usize,
    values: Vec<f64>,
}

impl ScaleTable {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n_dealers + j) * self.n_classes + k]
    }

    /// The `K` scales of the ordered pair `(i, j)`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.n_dealers + j) * self.n_classes;
        &self.values[start..start + self.n_classes]
    }

    pub fn n_dealers(&self) -> usize {
        self.n_dealers
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.values {
            *v *= factor;
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    NoCcp,
    SingleCcp,
    TwoCcps,
    JointCcp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearedClass {
    pub class: usize,
    /// Fraction `w_k` of the class moved to the CCP.
    pub fraction: f64,
    pub ccp: usize,
}

/// Which classes are centrally cleared, at what fraction, and by which CCP.
/// Classes sharing a CCP id are netted multilaterally inside one position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearingScenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub cleared: Vec<ClearedClass>,
}

impl ClearingScenario {
    pub fn no_ccp() -> Self {
        Self {
            name: "no_ccp".into(),
            kind: ScenarioKind::NoCcp,
            cleared: Vec::new(),
        }
    }

    pub fn single(name: impl Into<String>, class: usize, fraction: f64) -> Self {
        Self {
            name: name.into(),
            kind: ScenarioKind::SingleCcp,
            cleared: vec![ClearedClass { class, fraction, ccp: 0 }],
        }
    }

    /// One CCP per listed class.
    pub fn separate(name: impl Into<String>, cleared: &[(usize, f64)]) -> Self {
        Self {
            name: name.into(),
            kind: ScenarioKind::TwoCcps,
            cleared: cleared
                .iter()
                .enumerate()
                .map(|(ccp, &(class, fraction))| ClearedClass { class, fraction, ccp })
                .collect(),
        }
    }

    /// All listed classes cleared by the same CCP.
    pub fn joint(name: impl Into<String>, cleared: &[(usize, f64)]) -> Self {
        Self {
            name: name.into(),
            kind: ScenarioKind::JointCcp,
            cleared: cleared
                .iter()
                .map(|&(class, fraction)| ClearedClass { class, fraction, ccp: 0 })
                .collect(),
        }
    }

    /// The five scenarios compared throughout: no CCP, IRS CCP, CDS CCP, one
    /// CCP for each, one CCP for both.
    pub fn standard_set(irs: (usize, f64), cds: (usize, f64)) -> Vec<Self> {
        vec![
            Self::no_ccp(),
            Self::single("irs_ccp", irs.0, irs.1),
            Self::single("cds_ccp", cds.0, cds.1),
            Self::separate("two_ccps", &[irs, cds]),
            Self::joint("joint_ccp", &[irs, cds]),
        ]
    }

    pub fn validate(&self, n_classes: usize) -> Result<(), MarketError> {
        let fail = |reason: String| MarketError::InvalidScenario {
            name: self.name.clone(),
            reason,
        };
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.cleared {
            if c.class >= n_classes {
                return Err(fail(format!("class index {} out of range", c.class)));
            }
            if !(0.0..=1.0).contains(&c.fraction) {
                return Err(fail(format!("fraction {} outside [0, 1]", c.fraction)));
            }
            if !seen.insert(c.class) {
                return Err(fail(format!("class {} cleared twice", c.class)));
            }
        }
        let ccp_ids: std::collections::BTreeSet<usize> = self.cleared.iter().map(|c| c.ccp).collect();
        match self.kind {
            ScenarioKind::NoCcp if !self.cleared.is_empty() => {
                Err(fail("no-CCP scenario must not clear any class".into()))
            }
            ScenarioKind::SingleCcp if self.cleared.len() != 1 => {
                Err(fail("single-CCP scenario clears exactly one class".into()))
            }
            ScenarioKind::TwoCcps if ccp_ids.len() != self.cleared.len() => {
                Err(fail("separate CCPs need distinct ccp ids".into()))
            }
            ScenarioKind::JointCcp if ccp_ids.len() > 1 => {
                Err(fail("joint CCP needs one shared ccp id".into()))
            }
            _ => Ok(()),
        }
    }

    /// `1 - w_k` per class.
    pub fn retained_fractions(&self, n_classes: usize) -> Vec<f64> {
        let mut retained = vec![1.0; n_classes];
        for c in &self.cleared {
            retained[c.class] = 1.0 - c.fraction;
        }
        retained
    }

    /// Cleared `(class, w)` lists grouped by CCP id, in id order.
    pub fn ccp_groups(&self) -> Vec<Vec<(usize, f64)>> {
        let mut groups: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for c in &self.cleared {
            groups.entry(c.ccp).or_default().push((c.class, c.fraction));
        }
        groups.into_values().collect()
    }
}

/// Homogeneous market: every pair of dealers has the same class exposures,
/// `X_ij^k ~ N(0, sigma_k^2)` with `sigma_k = alpha_k * CE_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousSpec {
    pub class_names: Vec<String>,
    /// Gross credit exposures, billions.
    pub credit_exposures: Vec<f64>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub cleared_class: usize,
    pub cleared_fraction: f64,
}

impl HomogeneousSpec {
    /// Fully cleared `cleared_class`, unit multipliers.
    pub fn new(class_names: Vec<String>, credit_exposures: Vec<f64>, rho: f64, cleared_class: usize) -> Self {
        let alphas = vec![1.0; credit_exposures.len()];
        Self {
            class_names,
            credit_exposures,
            alphas,
            rho,
            cleared_class,
            cleared_fraction: 1.0,
        }
    }

    pub fn with_alpha(mut self, class: usize, alpha: f64) -> Self {
        self.alphas[class] = alpha;
        self
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .zip(&self.credit_exposures)
            .map(|(a, ce)| a * ce)
            .collect()
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        let k = self.credit_exposures.len();
        let fail = |m: &str| Err(MarketError::InvalidHomogeneous(m.to_string()));
        if k == 0 {
            return fail("at least one class required");
        }
        if self.alphas.len() != k || self.class_names.len() != k {
            return fail("credit exposures, alphas and class names must have equal length");
        }
        if self.credit_exposures.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return fail("credit exposures must be > 0");
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return fail("alphas must be > 0");
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return fail("rho must lie in [0, 1)");
        }
        if self.cleared_class >= k {
            return fail("cleared class out of range");
        }
        if !(self.cleared_fraction > 0.0 && self.cleared_fraction <= 1.0) {
            return fail("cleared fraction must lie in (0, 1]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn market(notionals: &[&[f64]], betas: &[f64], rho: f64) -> MarketConfig {
        let classes = betas
            .iter()
            .enumerate()
            .map(|(k, b)| AssetClass::gaussian(format!("c{k}"), *b))
            .collect();
        let dealers = notionals
            .iter()
            .enumerate()
            .map(|(i, z)| Dealer::new(format!("d{i}"), z.to_vec()))
            .collect();
        MarketConfig::new(dealers, classes, rho)
    }

    #[test]
    fn single_dealer_is_rejected() {
        let report = validate(&market(&[&[1.0]], &[1.0], 0.0));
        assert!(report.violations.contains(&Violation::TooFewDealers(1)));
        assert!(report.to_string().contains("N ≥ 2 required"));
    }

    #[test]
    fn well_formed_market_has_empty_report() {
        let m = market(
            &[&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 1.0, 1.0], &[5.0, 5.0, 5.0, 5.0]],
            &[1.0, 1.0, 1.0, 2.0],
            0.1,
        );
        assert!(validate(&m).is_valid());
    }

    #[test]
    fn lone_holder_of_a_class_is_flagged() {
        let m = market(&[&[1.0, 3.0], &[1.0, 0.0], &[1.0, 0.0]], &[1.0, 1.0], 0.0);
        let report = validate(&m);
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("zero counterparty notional denominator"));
    }

    #[test]
    fn bad_correlations_are_flagged() {
        let mut m = market(&[&[1.0, 1.0], &[1.0, 1.0]], &[1.0, 1.0], 1.0);
        assert!(validate(&m).violations.contains(&Violation::CorrelationOutOfRange));
        m.correlation = Correlation::Matrix(vec![1.0, 0.5, 0.4, 1.0]);
        assert!(validate(&m).violations.contains(&Violation::CorrelationShape));
        m.correlation = Correlation::Matrix(vec![1.0, 0.3, 0.3, 1.0]);
        assert!(validate(&m).is_valid());
        let m3 = MarketConfig {
            correlation: Correlation::Matrix(vec![1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]),
            ..market(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]], &[1.0, 1.0, 1.0], 0.0)
        };
        assert!(validate(&m3)
            .violations
            .contains(&Violation::CorrelationNotPositiveDefinite));
    }

    #[test]
    fn pair_scale_examples() {
        let m = market(&[&[1.0], &[1.0]], &[1.0], 0.0);
        assert_eq!(pair_scale(&m, 0, 1, 0).unwrap(), 1.0);

        let m = market(&[&[10.0], &[4.0], &[6.0]], &[0.5], 0.0);
        assert!((pair_scale(&m, 0, 1, 0).unwrap() - 2.0).abs() < 1e-15);

        let m = market(&[&[10.0], &[0.0], &[6.0]], &[0.5], 0.0);
        assert_eq!(pair_scale(&m, 0, 1, 0).unwrap(), 0.0);
        assert_eq!(pair_scale(&m, 1, 0, 0).unwrap(), 0.0);

        assert!(matches!(pair_scale(&m, 1, 1, 0), Err(MarketError::SameDealer(1))));
    }

    #[test]
    fn scale_table_matches_pair_scale() {
        let m = market(&[&[3.0, 1.0], &[4.0, 0.0], &[5.0, 9.0]], &[0.2, 0.7], 0.0);
        let table = m.scale_table();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..2 {
                    let expected = if i == j { 0.0 } else { pair_scale(&m, i, j, k).unwrap() };
                    assert_eq!(table.get(i, j, k), expected);
                }
            }
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(ClearingScenario::no_ccp().validate(2).is_ok());
        assert!(ClearingScenario::single("a", 1, 0.5).validate(2).is_ok());
        assert!(ClearingScenario::single("a", 2, 0.5).validate(2).is_err());
        assert!(ClearingScenario::single("a", 0, 1.5).validate(2).is_err());
        assert!(ClearingScenario::joint("a", &[(0, 0.1), (0, 0.2)]).validate(2).is_err());
        let mut two = ClearingScenario::separate("t", &[(0, 0.9), (1, 0.85)]);
        assert!(two.validate(2).is_ok());
        assert_eq!(two.ccp_groups().len(), 2);
        two.cleared[1].ccp = 0;
        assert!(two.validate(2).is_err());
        let joint = ClearingScenario::joint("j", &[(0, 0.9), (1, 0.85)]);
        assert_eq!(joint.ccp_groups(), vec![vec![(0, 0.9), (1, 0.85)]]);
        assert_eq!(joint.retained_fractions(3)[2], 1.0);
    }

    #[test]
    fn equicorrelation_quadratic_form_matches_full_matrix() {
        let a = [0.3, 1.7, 2.2, 0.0];
        let rho = 0.25;
        let mut full = vec![rho; 16];
        for k in 0..4 {
            full[k * 4 + k] = 1.0;
        }
        let q1 = Correlation::Equi(rho).quadratic_form(&a);
        let q2 = Correlation::Matrix(full).quadratic_form(&a);
        assert!((q1 - q2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pair_scale_is_one_homogeneous(
            z in prop::collection::vec(prop::collection::vec(0.1f64..1000.0, 3), 2..6),
            c in 0.01f64..100.0,
        ) {
            let rows: Vec<&[f64]> = z.iter().map(|r| r.as_slice()).collect();
            let m = market(&rows, &[0.004, 0.004, 0.01], 0.0);
            let scaled = m.scaled_notionals(c);
            let (a, b) = (m.scale_table(), scaled.scale_table());
            for i in 0..z.len() {
                for j in 0..z.len() {
                    for k in 0..3 {
                        let expected = a.get(i, j, k) * c;
                        prop_assert!((b.get(i, j, k) - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
                    }
                }
            }
        }

        #[test]
        fn pair_weights_sum_to_one(
            z in prop::collection::vec(prop::collection::vec(0.1f64..1000.0, 2), 2..8),
        ) {
            let rows: Vec<&[f64]> = z.iter().map(|r| r.as_slice()).collect();
            let m = market(&rows, &[0.5, 2.0], 0.0);
            for i in 0..z.len() {
                for k in 0..2 {
                    let sum: f64 = (0..z.len()).filter(|j| *j != i).map(|j| pair_scale(&m, i, j, k).unwrap()).sum();
                    let expected = m.classes[k].beta * z[i][k];
                    prop_assert!((sum - expected).abs() <= 1e-12 * expected);
                }
            }
        }
    }
}
