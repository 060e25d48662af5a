//! Closed-form expected exposures for Gaussian markets and the
//! minimum-clearing-member threshold of the homogeneous model.
//!
//! For a centered Gaussian `X` with standard deviation `sigma`,
//! `E[max(X, 0)] = sigma / sqrt(2 pi)`. Every expected exposure below is a sum
//! of such terms: one per bilateral netting set and one per CCP.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{
    ClearingScenario, HomogeneousSpec, MarketConfig, MarketError, ScenarioKind, MILLIONS_PER_BILLION,
};

/// `1 / sqrt(2 pi)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("standard deviation must be >= 0, got {0}")]
    NegativeSigma(f64),
    #[error("closed forms need Gaussian marginals; class `{0}` is t-distributed (use the Monte Carlo engine)")]
    NonGaussian(String),
    #[error("dealer index {0} out of range")]
    DealerOutOfRange(usize),
    #[error("homogeneous market needs N >= 2, got {0}")]
    TooFewMembers(u64),
    #[error("clearing never reduces expected exposure for this market")]
    CcpNeverReduces,
    #[error("threshold grid must be non-empty with alpha > 0 and rho in [0, 1)")]
    InvalidGrid,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Expected positive part of a centered Gaussian.
pub fn gaussian_positive_mean(sigma: f64) -> Result<f64, AnalyticError> {
    if sigma < 0.0 || sigma.is_nan() {
        return Err(AnalyticError::NegativeSigma(sigma));
    }
    Ok(sigma * INV_SQRT_2PI)
}

fn check_gaussian(config: &MarketConfig, i: usize) -> Result<(), AnalyticError> {
    config.ensure_valid()?;
    if i >= config.n_dealers() {
        return Err(AnalyticError::DealerOutOfRange(i));
    }
    if let Some(c) = config.classes.iter().find(|c| c.marginal != crate::market::Marginal::GaussianUnit) {
        return Err(AnalyticError::NonGaussian(c.name.clone()));
    }
    Ok(())
}

/// Expected exposure of dealer `i` under `scenario`, in notional units.
///
/// The bilateral part nets the retained `(1 - w_k)` share of every class per
/// counterparty. Each CCP nets its classes across all counterparties; the
/// cleared position is Gaussian with variance
/// `sum_j Var(sum_{k in ccp} w_k X_ij^k)` since pairs are independent.
pub fn expected_exposure(
    config: &MarketConfig,
    scenario: &ClearingScenario,
    i: usize,
) -> Result<f64, AnalyticError> {
    check_gaussian(config, i)?;
    let k_count = config.n_classes();
    scenario.validate(k_count)?;
    let scales = config.scale_table();
    Ok(expected_exposure_unchecked(config, &scales, scenario, i))
}

fn expected_exposure_unchecked(
    config: &MarketConfig,
    scales: &crate::market::ScaleTable,
    scenario: &ClearingScenario,
    i: usize,
) -> f64 {
    let n = config.n_dealers();
    let k_count = config.n_classes();
    let retained = scenario.retained_fractions(k_count);
    let groups = scenario.ccp_groups();
    let corr = &config.correlation;

    let mut buf = vec![0.0; k_count];
    let mut bilateral = 0.0;
    for j in (0..n).filter(|j| *j != i) {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = retained[k] * scales.get(i, j, k);
        }
        bilateral += corr.quadratic_form(&buf).max(0.0).sqrt();
    }
    let mut total = bilateral * INV_SQRT_2PI;

    for group in &groups {
        let mut variance = 0.0;
        for j in (0..n).filter(|j| *j != i) {
            buf.iter_mut().for_each(|b| *b = 0.0);
            for &(k, w) in group {
                buf[k] = w * scales.get(i, j, k);
            }
            variance += corr.quadratic_form(&buf);
        }
        total += variance.max(0.0).sqrt() * INV_SQRT_2PI;
    }
    total
}

/// No clearing: every counterparty nets all classes bilaterally.
pub fn expected_exposure_bilateral(config: &MarketConfig, i: usize) -> Result<f64, AnalyticError> {
    expected_exposure(config, &ClearingScenario::no_ccp(), i)
}

/// One CCP clearing the fraction `w` of `class`.
pub fn expected_exposure_one_ccp(
    config: &MarketConfig,
    i: usize,
    class: usize,
    w: f64,
) -> Result<f64, AnalyticError> {
    expected_exposure(config, &ClearingScenario::single("one_ccp", class, w), i)
}

/// Two CCPs, one per class.
pub fn expected_exposure_two_ccp(
    config: &MarketConfig,
    i: usize,
    cleared: [(usize, f64); 2],
) -> Result<f64, AnalyticError> {
    expected_exposure(config, &ClearingScenario::separate("two_ccps", &cleared), i)
}

/// One CCP clearing all listed classes together.
pub fn expected_exposure_joint_ccp(
    config: &MarketConfig,
    i: usize,
    cleared: &[(usize, f64)],
) -> Result<f64, AnalyticError> {
    expected_exposure(config, &ClearingScenario::joint("joint_ccp", cleared), i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedExposureResult {
    pub scenario: String,
    pub kind: ScenarioKind,
    /// Millions USD.
    pub per_dealer: Vec<f64>,
    pub total: f64,
}

/// Closed-form expected exposures of every dealer, in millions.
pub fn expected_exposures(
    config: &MarketConfig,
    scenario: &ClearingScenario,
) -> Result<ExpectedExposureResult, AnalyticError> {
    check_gaussian(config, 0)?;
    scenario.validate(config.n_classes())?;
    let scales = config.scale_table();
    let per_dealer: Vec<f64> = (0..config.n_dealers())
        .map(|i| expected_exposure_unchecked(config, &scales, scenario, i) * MILLIONS_PER_BILLION)
        .collect();
    let total = per_dealer.iter().sum();
    Ok(ExpectedExposureResult {
        scenario: scenario.name.clone(),
        kind: scenario.kind,
        per_dealer,
        total,
    })
}

/// Expected exposure of one member of a homogeneous `n`-dealer market.
pub fn homogeneous_ee(spec: &HomogeneousSpec, n: u64, with_ccp: bool) -> Result<f64, AnalyticError> {
    spec.validate()?;
    if n < 2 {
        return Err(AnalyticError::TooFewMembers(n));
    }
    Ok(HomogeneousCurves::new(spec).ee(n, with_ccp))
}

/// Pair-level standard deviations of the homogeneous model.
struct HomogeneousCurves {
    /// Std of the fully bilateral pair position.
    bilateral: f64,
    /// Std of the pair position left after clearing.
    residual: f64,
    /// `w * sigma_c`.
    cleared: f64,
    /// `bilateral - residual`, computed without cancellation.
    gap: f64,
}

impl HomogeneousCurves {
    fn new(spec: &HomogeneousSpec) -> Self {
        let sigmas = spec.sigmas();
        let c = spec.cleared_class;
        let w = spec.cleared_fraction;
        let corr = crate::market::Correlation::Equi(spec.rho);
        let mut residual_sigmas = sigmas.clone();
        residual_sigmas[c] *= 1.0 - w;
        let bilateral = corr.quadratic_form(&sigmas).sqrt();
        let residual = corr.quadratic_form(&residual_sigmas).sqrt();
        // A^2 - B^2 = w(2 - w) sigma_c^2 + 2 rho w sigma_c sum_{k != c} sigma_k
        let others: f64 = sigmas.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, s)| s).sum();
        let sc = sigmas[c];
        let diff_sq = w * (2.0 - w) * sc * sc + 2.0 * spec.rho * w * sc * others;
        Self {
            bilateral,
            residual,
            cleared: w * sc,
            gap: diff_sq / (bilateral + residual),
        }
    }

    fn ee(&self, n: u64, with_ccp: bool) -> f64 {
        let counterparties = (n - 1) as f64;
        if with_ccp {
            counterparties * self.residual * INV_SQRT_2PI + self.cleared * counterparties.sqrt() * INV_SQRT_2PI
        } else {
            counterparties * self.bilateral * INV_SQRT_2PI
        }
    }

    fn ccp_wins(&self, n: u64) -> bool {
        self.ee(n, true) < self.ee(n, false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Smallest market size at which clearing strictly lowers expected exposure.
    pub n_star: u64,
    /// `1 + (w sigma_c / (A - B))^2`: the real-valued crossing point.
    pub crossing: f64,
    pub spec: HomogeneousSpec,
}

impl ThresholdResult {
    pub fn bilateral_ee(&self, n: u64) -> f64 {
        HomogeneousCurves::new(&self.spec).ee(n.max(2), false)
    }

    pub fn ccp_ee(&self, n: u64) -> f64 {
        HomogeneousCurves::new(&self.spec).ee(n.max(2), true)
    }
}

/// Smallest `N` for which a CCP on the cleared class beats bilateral netting.
///
/// The crossing solves `sqrt(N - 1) > w sigma_c / (A - B)`; the closed-form
/// candidate is then confirmed by an integer scan over `[2, 10 N*]`, which is
/// authoritative when the two disagree at a floating-point edge.
pub fn min_clearing_members(spec: &HomogeneousSpec) -> Result<ThresholdResult, AnalyticError> {
    spec.validate()?;
    let curves = HomogeneousCurves::new(spec);
    if !(curves.gap > 0.0) {
        return Err(AnalyticError::CcpNeverReduces);
    }
    let ratio = curves.cleared / curves.gap;
    let crossing = 1.0 + ratio * ratio;
    let candidate = (ratio * ratio).floor() as u64 + 2;

    let upper = candidate.saturating_mul(10).max(4);
    let first = (2..=upper).find(|&n| curves.ccp_wins(n));
    let n_star = match first {
        Some(n) => n,
        None => return Err(AnalyticError::CcpNeverReduces),
    };
    debug_assert!(
        (n_star..=upper).all(|n| curves.ccp_wins(n)),
        "crossing is not monotone"
    );
    Ok(ThresholdResult {
        n_star,
        crossing,
        spec: spec.clone(),
    })
}

/// Evenly spaced grid with exact endpoints.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    end
                } else {
                    start + (end - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSurface {
    pub alphas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Row-major over `alphas x rhos`.
    pub n_star: Vec<u64>,
}

impl ThresholdSurface {
    pub fn get(&self, alpha_idx: usize, rho_idx: usize) -> u64 {
        self.n_star[alpha_idx * self.rhos.len() + rho_idx]
    }

    /// `alpha,rho,n_star` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "alpha,rho,n_star")?;
        for (a, alpha) in self.alphas.iter().enumerate() {
            for (r, rho) in self.rhos.iter().enumerate() {
                writeln!(out, "{alpha},{rho},{}", self.get(a, r))?;
            }
        }
        Ok(())
    }
}

/// Threshold `N*` over a grid of cleared-class multipliers and correlations.
/// `template` supplies the credit exposures, the other multipliers and the
/// cleared class.
pub fn threshold_surface(
    template: &HomogeneousSpec,
    alphas: &[f64],
    rhos: &[f64],
) -> Result<ThresholdSurface, AnalyticError> {
    if alphas.is_empty()
        || rhos.is_empty()
        || alphas.iter().any(|a| !(*a > 0.0))
        || rhos.iter().any(|r| !(*r >= 0.0 && *r < 1.0))
    {
        return Err(AnalyticError::InvalidGrid);
    }
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|a| rhos.iter().map(move |r| (*a, *r)))
        .collect();
    let n_star = cells
        .par_iter()
        .map(|&(alpha, rho)| {
            let mut spec = template.clone();
            spec.alphas[spec.cleared_class] = alpha;
            spec.rho = rho;
            min_clearing_members(&spec).map(|t| t.n_star)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ThresholdSurface {
        alphas: alphas.to_vec(),
        rhos: rhos.to_vec(),
        n_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{AssetClass, Dealer, Marginal};
    use proptest::prelude::*;

    fn market(notionals: &[Vec<f64>], betas: &[f64], rho: f64) -> MarketConfig {
        MarketConfig::new(
            notionals
                .iter()
                .enumerate()
                .map(|(i, z)| Dealer::new(format!("d{i}"), z.clone()))
                .collect(),
            betas
                .iter()
                .enumerate()
                .map(|(k, b)| AssetClass::gaussian(format!("c{k}"), *b))
                .collect(),
            rho,
        )
    }

    fn table4(rho: f64) -> HomogeneousSpec {
        HomogeneousSpec::new(
            ["commodity", "equity", "fx", "interest_rate", "credit", "other"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            vec![457.0, 706.0, 2524.0, 17533.0, 1666.0, 1788.0],
            rho,
            4,
        )
    }

    // Simpson's rule on a smooth integrand.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    fn phi(x: f64) -> f64 {
        (-0.5 * x * x).exp() * INV_SQRT_2PI
    }

    /// E[max(s1 Y1 + s2 Y2, 0)] for unit normals with correlation rho, by
    /// nested quadrature. The inner integral starts at the kink so both
    /// integrands are smooth.
    fn pair_quadrature(s1: f64, s2: f64, rho: f64) -> f64 {
        // Y1 = Z1, Y2 = rho Z1 + sqrt(1 - rho^2) Z2
        let a = s1 + s2 * rho;
        let b = s2 * (1.0 - rho * rho).sqrt();
        let lim = 10.0;
        simpson(
            |z1| {
                let kink = if b > 0.0 { (-a * z1 / b).max(-lim) } else { -lim };
                if kink >= lim {
                    return 0.0;
                }
                phi(z1) * simpson(|z2| (a * z1 + b * z2).max(0.0) * phi(z2), kink, lim, 2000)
            },
            -lim,
            lim,
            2000,
        )
    }

    #[test]
    fn folded_gaussian_mean() {
        assert!((gaussian_positive_mean(1.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(gaussian_positive_mean(0.0).unwrap(), 0.0);
        assert!((gaussian_positive_mean(2.0).unwrap() - 0.797_884_560_802_865_4).abs() < 1e-15);
        assert!(matches!(gaussian_positive_mean(-1.0), Err(AnalyticError::NegativeSigma(_))));
    }

    #[test]
    fn bilateral_unit_pair() {
        let m = market(&[vec![1.0], vec![1.0]], &[1.0], 0.0);
        assert!((expected_exposure_bilateral(&m, 0).unwrap() - INV_SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn bilateral_matches_quadrature_oracle() {
        // N = 3, K = 2, unit notionals and betas: every pair scale is 1/2.
        let m = market(&vec![vec![1.0, 1.0]; 3], &[1.0, 1.0], 0.0);
        let oracle = 2.0 * pair_quadrature(0.5, 0.5, 0.0);
        let ee = expected_exposure_bilateral(&m, 0).unwrap();
        assert!((ee - oracle).abs() < 1e-6 * oracle, "{ee} vs {oracle}");

        // Heterogeneous, correlated.
        let m = market(&[vec![3.0, 1.0], vec![1.0, 2.0], vec![2.0, 5.0]], &[0.4, 1.3], 0.3);
        let scales = m.scale_table();
        let oracle: f64 = [1, 2]
            .iter()
            .map(|&j| pair_quadrature(scales.get(0, j, 0), scales.get(0, j, 1), 0.3))
            .sum();
        let ee = expected_exposure_bilateral(&m, 0).unwrap();
        assert!((ee - oracle).abs() < 1e-6 * oracle, "{ee} vs {oracle}");
    }

    #[test]
    fn one_ccp_examples() {
        let m = market(&vec![vec![1.0]; 3], &[1.0], 0.0);
        let full = expected_exposure_one_ccp(&m, 0, 0, 1.0).unwrap();
        assert!((full - INV_SQRT_2PI * 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((full - 0.28209).abs() < 1e-5);

        let m = market(&[vec![3.0, 1.0], vec![1.0, 2.0], vec![2.0, 5.0]], &[0.4, 1.3], 0.2);
        for i in 0..3 {
            assert_eq!(
                expected_exposure_one_ccp(&m, i, 1, 0.0).unwrap(),
                expected_exposure_bilateral(&m, i).unwrap()
            );
        }
    }

    #[test]
    fn two_and_joint_degenerate_cases() {
        let m = market(&[vec![3.0, 1.0], vec![1.0, 2.0], vec![2.0, 5.0]], &[0.4, 1.3], 0.2);
        let bil = expected_exposure_bilateral(&m, 1).unwrap();
        assert_eq!(expected_exposure_two_ccp(&m, 1, [(0, 0.0), (1, 0.0)]).unwrap(), bil);
        let one = expected_exposure_one_ccp(&m, 1, 1, 0.85).unwrap();
        let two = expected_exposure_two_ccp(&m, 1, [(0, 0.0), (1, 0.85)]).unwrap();
        assert!((one - two).abs() < 1e-15 * one);
        let joint = expected_exposure_joint_ccp(&m, 1, &[(1, 0.85)]).unwrap();
        assert!((one - joint).abs() < 1e-15 * one);
    }

    #[test]
    fn t_marginals_are_refused() {
        let mut m = market(&vec![vec![1.0, 1.0]; 3], &[1.0, 1.0], 0.0);
        m.classes[1].marginal = Marginal::StudentT3Unit;
        assert!(matches!(expected_exposure_bilateral(&m, 0), Err(AnalyticError::NonGaussian(_))));
    }

    #[test]
    fn homogeneous_single_class_gain() {
        let spec = HomogeneousSpec::new(vec!["only".into()], vec![3.0], 0.0, 0);
        for n in [2u64, 5, 17, 100] {
            let ratio = homogeneous_ee(&spec, n, true).unwrap() / homogeneous_ee(&spec, n, false).unwrap();
            assert!((ratio - 1.0 / ((n - 1) as f64).sqrt()).abs() < 1e-14);
        }
        assert!(matches!(homogeneous_ee(&spec, 1, true), Err(AnalyticError::TooFewMembers(1))));
    }

    /// First N where the CCP curve drops below the bilateral curve, by
    /// direct evaluation of both expressions.
    fn scan_threshold(sigmas: &[f64], rho: f64, c: usize) -> u64 {
        let pair_std = |s: &[f64]| {
            let mut v = 0.0;
            for k in 0..s.len() {
                for m in 0..s.len() {
                    v += if k == m { 1.0 } else { rho } * s[k] * s[m];
                }
            }
            v.sqrt()
        };
        let a = pair_std(sigmas);
        let mut rest = sigmas.to_vec();
        rest[c] = 0.0;
        let b = pair_std(&rest);
        (2u64..100_000)
            .find(|&n| {
                let m = (n - 1) as f64;
                m * b + sigmas[c] * m.sqrt() < m * a
            })
            .unwrap()
    }

    #[test]
    fn equal_classes_threshold_is_23() {
        let spec = HomogeneousSpec::new((0..6).map(|k| format!("c{k}")).collect(), vec![1.0; 6], 0.0, 5);
        assert_eq!(scan_threshold(&[1.0; 6], 0.0, 5), 23);
        // sqrt(N - 1) > 1 / (sqrt 6 - sqrt 5)
        let bound = (1.0 / (6f64.sqrt() - 5f64.sqrt())).powi(2) + 1.0;
        assert_eq!(bound.floor() as u64 + 1, 23);
        assert_eq!(min_clearing_members(&spec).unwrap().n_star, 23);
    }

    #[test]
    fn table_five_thresholds() {
        assert_eq!(min_clearing_members(&table4(0.0)).unwrap().n_star, 461);
        assert_eq!(min_clearing_members(&table4(0.0).with_alpha(4, 3.0)).unwrap().n_star, 54);
        assert_eq!(min_clearing_members(&table4(0.1).with_alpha(4, 3.0)).unwrap().n_star, 17);
        assert_eq!(min_clearing_members(&table4(0.2).with_alpha(4, 2.0)).unwrap().n_star, 11);
    }

    #[test]
    fn threshold_curves_cross_at_n_star() {
        let t = min_clearing_members(&table4(0.1).with_alpha(4, 3.0)).unwrap();
        assert!(t.ccp_ee(t.n_star) < t.bilateral_ee(t.n_star));
        assert!(t.ccp_ee(t.n_star - 1) >= t.bilateral_ee(t.n_star - 1));
        assert!(t.crossing > (t.n_star - 1) as f64 && t.crossing <= t.n_star as f64);
    }

    #[test]
    fn surface_is_monotone_with_known_corners() {
        let s = threshold_surface(&table4(0.0), &linspace(1.0, 3.0, 20), &linspace(0.0, 0.2, 20)).unwrap();
        assert_eq!(s.get(0, 0), 461);
        assert_eq!(s.get(19, 0), 54);
        for a in 0..20 {
            for r in 0..20 {
                if a + 1 < 20 {
                    assert!(s.get(a + 1, r) <= s.get(a, r));
                }
                if r + 1 < 20 {
                    assert!(s.get(a, r + 1) <= s.get(a, r));
                }
            }
        }
        let cell = threshold_surface(&table4(0.0), &[3.0], &[0.1]).unwrap();
        assert_eq!(cell.n_star, vec![17]);
        assert!(threshold_surface(&table4(0.0), &[], &[0.1]).is_err());
        assert!(threshold_surface(&table4(0.0), &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn partial_clearing_threshold_agrees_with_scan() {
        let mut spec = table4(0.1).with_alpha(4, 3.0);
        spec.cleared_fraction = 0.6;
        let t = min_clearing_members(&spec).unwrap();
        let first = (2..10_000u64)
            .find(|&n| homogeneous_ee(&spec, n, true).unwrap() < homogeneous_ee(&spec, n, false).unwrap())
            .unwrap();
        assert_eq!(t.n_star, first);
    }

    fn small_market() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, f64)> {
        (2usize..6, 1usize..4).prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(prop::collection::vec(0.5f64..100.0, k), n),
                prop::collection::vec(0.001f64..0.02, k),
                0.0f64..0.9,
            )
        })
    }

    proptest! {
        #[test]
        fn zero_fraction_equals_bilateral((z, betas, rho) in small_market()) {
            let m = market(&z, &betas, rho);
            let k = betas.len() - 1;
            for i in 0..z.len() {
                let a = expected_exposure_bilateral(&m, i).unwrap();
                let b = expected_exposure_one_ccp(&m, i, k, 0.0).unwrap();
                prop_assert!((a - b).abs() <= 1e-15 * a.max(1e-300));
            }
        }

        #[test]
        fn joint_never_exceeds_separate((z, betas, rho) in small_market(), w1 in 0.0f64..1.0, w2 in 0.0f64..1.0) {
            prop_assume!(betas.len() >= 2);
            let m = market(&z, &betas, rho);
            for i in 0..z.len() {
                let two = expected_exposure_two_ccp(&m, i, [(0, w1), (1, w2)]).unwrap();
                let joint = expected_exposure_joint_ccp(&m, i, &[(0, w1), (1, w2)]).unwrap();
                prop_assert!(joint <= two * (1.0 + 1e-12));
            }
        }

        #[test]
        fn closed_forms_are_one_homogeneous((z, betas, rho) in small_market(), c in 0.1f64..50.0) {
            let m = market(&z, &betas, rho);
            let scaled = m.scaled_notionals(c);
            let mut beta_scaled = m.clone();
            beta_scaled.classes.iter_mut().for_each(|cl| cl.beta *= c);
            let scenario = ClearingScenario::joint("j", &[(0, 0.7)]);
            for i in 0..z.len() {
                let base = expected_exposure(&m, &scenario, i).unwrap();
                for other in [&scaled, &beta_scaled] {
                    let v = expected_exposure(other, &scenario, i).unwrap();
                    prop_assert!((v - c * base).abs() <= 1e-12 * c * base);
                }
            }
        }

        #[test]
        fn threshold_invariant_under_exposure_rescaling(c in 0.001f64..1000.0, rho in 0.0f64..0.3, alpha in 1.0f64..3.0) {
            let spec = table4(rho).with_alpha(4, alpha);
            let mut scaled = spec.clone();
            scaled.credit_exposures.iter_mut().for_each(|x| *x *= c);
            prop_assert_eq!(min_clearing_members(&spec).unwrap().n_star, min_clearing_members(&scaled).unwrap().n_star);
        }
    }
}
