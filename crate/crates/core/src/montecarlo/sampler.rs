//! Copula sampling of pair positions `X_ij^k = s_ij^k * Y_ij^k`.
//!
//! Noise is counter based: the shocks of ordered pair `(i, j)` on path `p`
//! come from ChaCha8 stream `p` at a word offset fixed by `i * N + j`, so any
//! draw can be regenerated alone and results do not depend on the order in
//! which workers visit paths.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::marginals::t3_unit_from_gaussian;
use super::SimulationError;
use crate::market::{Correlation, MarketConfig, Marginal, ScaleTable, MILLIONS_PER_BILLION};

/// Words reserved per ordered pair inside a path stream.
const PAIR_WORD_SHIFT: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingModel {
    pub correlation: Correlation,
    pub marginals: Vec<Marginal>,
    /// Couple directions as two sides of one trade: `Y_ji = -Y_ij`.
    pub antisymmetric: bool,
}

impl SamplingModel {
    pub fn from_config(config: &MarketConfig) -> Self {
        Self {
            correlation: config.correlation.clone(),
            marginals: config.classes.iter().map(|c| c.marginal).collect(),
            antisymmetric: true,
        }
    }

    pub fn independent_pairs(mut self) -> Self {
        self.antisymmetric = false;
        self
    }
}

#[derive(Clone, Debug)]
pub struct NoiseSource {
    base: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent generator for `(path, key)`.
    pub fn stream(&self, path: u64, key: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(path);
        rng.set_word_pos((key as u128) << PAIR_WORD_SHIFT);
        rng
    }
}

#[derive(Clone, Debug)]
enum Factor {
    /// `Y_k = sqrt(rho) F + sqrt(1 - rho) e_k`.
    Equi { common: f64, idio: f64 },
    Cholesky(Vec<f64>),
}

/// Correlated unit-variance shocks for one pair.
#[derive(Clone, Debug)]
pub struct CopulaSampler {
    factor: Factor,
    marginals: Vec<Marginal>,
}

impl CopulaSampler {
    pub fn new(model: &SamplingModel) -> Result<Self, SimulationError> {
        let k = model.marginals.len();
        let factor = match &model.correlation {
            Correlation::Equi(rho) => {
                if !(*rho >= 0.0 && *rho < 1.0) {
                    return Err(SimulationError::Correlation(*rho));
                }
                Factor::Equi {
                    common: rho.sqrt(),
                    idio: (1.0 - rho).sqrt(),
                }
            }
            m @ Correlation::Matrix(_) => Factor::Cholesky(
                m.cholesky(k).ok_or(SimulationError::NotPositiveDefinite)?,
            ),
        };
        Ok(Self {
            factor,
            marginals: model.marginals.clone(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.marginals.len()
    }

    /// Writes `K` shocks into `out`; `scratch` must hold `K` values.
    pub fn fill<R: Rng>(&self, rng: &mut R, out: &mut [f64], scratch: &mut [f64]) {
        match &self.factor {
            Factor::Equi { common, idio } => {
                // The common factor is always consumed so that draws line up
                // across correlation levels.
                let f: f64 = rng.sample(StandardNormal);
                for y in out.iter_mut() {
                    let e: f64 = rng.sample(StandardNormal);
                    *y = common * f + idio * e;
                }
            }
            Factor::Cholesky(l) => {
                let k = out.len();
                for e in scratch.iter_mut() {
                    *e = rng.sample(StandardNormal);
                }
                for (r, y) in out.iter_mut().enumerate() {
                    *y = (0..=r).map(|c| l[r * k + c] * scratch[c]).sum();
                }
            }
        }
        for (y, m) in out.iter_mut().zip(&self.marginals) {
            if *m == Marginal::StudentT3Unit {
                *y = t3_unit_from_gaussian(*y);
            }
        }
    }
}

/// One sampled matrix `X_ij^k` over all ordered pairs, in millions.
#[derive(Clone, Debug, PartialEq)]
pub struct ExposureDraw {
    n_dealers: usize,
    n_classes: usize,
    values: Vec<f64>,
}

impl ExposureDraw {
    pub fn zeros(n_dealers: usize, n_classes: usize) -> Self {
        Self {
            n_dealers,
            n_classes,
            values: vec![0.0; n_dealers * n_dealers * n_classes],
        }
    }

    pub fn n_dealers(&self) -> usize {
        self.n_dealers
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n_dealers + j) * self.n_classes + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        self.values[(i * self.n_dealers + j) * self.n_classes + k] = value;
    }

    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.n_dealers + j) * self.n_classes;
        &self.values[start..start + self.n_classes]
    }

    #[inline]
    fn pair_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let start = (i * self.n_dealers + j) * self.n_classes;
        &mut self.values[start..start + self.n_classes]
    }
}

/// Both directions of one sampled pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDraw {
    /// `X_ij^k`.
    pub forward: Vec<f64>,
    /// `X_ji^k`.
    pub reverse: Vec<f64>,
}

/// Everything needed to regenerate any path of a run.
#[derive(Clone, Debug)]
pub struct Sampler {
    scales: ScaleTable,
    copula: CopulaSampler,
    noise: NoiseSource,
    antisymmetric: bool,
}

impl Sampler {
    pub fn new(config: &MarketConfig, model: &SamplingModel, seed: u64) -> Result<Self, SimulationError> {
        config.ensure_valid()?;
        if model.marginals.len() != config.n_classes() {
            return Err(SimulationError::ModelShape {
                model: model.marginals.len(),
                classes: config.n_classes(),
            });
        }
        Ok(Self {
            scales: config.scale_table().scaled(MILLIONS_PER_BILLION),
            copula: CopulaSampler::new(model)?,
            noise: NoiseSource::new(seed),
            antisymmetric: model.antisymmetric,
        })
    }

    pub fn n_dealers(&self) -> usize {
        self.scales.n_dealers()
    }

    pub fn n_classes(&self) -> usize {
        self.scales.n_classes()
    }

    fn key(&self, i: usize, j: usize) -> u64 {
        (i * self.n_dealers() + j) as u64
    }

    /// Samples the pair `i < j` on `path` into `forward` / `reverse`.
    pub fn sample_pair_into(
        &self,
        path: u64,
        i: usize,
        j: usize,
        forward: &mut [f64],
        reverse: &mut [f64],
        scratch: &mut [f64],
    ) {
        let mut rng = self.noise.stream(path, self.key(i, j));
        self.copula.fill(&mut rng, forward, scratch);
        if self.antisymmetric {
            for (r, y) in reverse.iter_mut().zip(forward.iter()) {
                *r = -*y;
            }
        } else {
            let mut rng = self.noise.stream(path, self.key(j, i));
            self.copula.fill(&mut rng, reverse, scratch);
        }
        for (x, s) in forward.iter_mut().zip(self.scales.pair(i, j)) {
            *x *= s;
        }
        for (x, s) in reverse.iter_mut().zip(self.scales.pair(j, i)) {
            *x *= s;
        }
    }

    /// Fills every ordered pair of `draw` for `path`.
    pub fn draw_path(&self, path: u64, draw: &mut ExposureDraw) {
        let n = self.n_dealers();
        let k = self.n_classes();
        let mut forward = vec![0.0; k];
        let mut reverse = vec![0.0; k];
        let mut scratch = vec![0.0; k];
        for i in 0..n {
            for j in (i + 1)..n {
                self.sample_pair_into(path, i, j, &mut forward, &mut reverse, &mut scratch);
                draw.pair_mut(i, j).copy_from_slice(&forward);
                draw.pair_mut(j, i).copy_from_slice(&reverse);
            }
        }
    }
}

/// Samples one canonical pair `(i, j)`, `i < j`, on `path`.
pub fn sample_pair_exposures(
    config: &MarketConfig,
    model: &SamplingModel,
    i: usize,
    j: usize,
    seed: u64,
    path: u64,
) -> Result<PairDraw, SimulationError> {
    if i >= j || j >= config.n_dealers() {
        return Err(SimulationError::PairOrder(i, j));
    }
    let sampler = Sampler::new(config, model, seed)?;
    let k = config.n_classes();
    let mut out = PairDraw {
        forward: vec![0.0; k],
        reverse: vec![0.0; k],
    };
    let mut scratch = vec![0.0; k];
    sampler.sample_pair_into(path, i, j, &mut out.forward, &mut out.reverse, &mut scratch);
    Ok(out)
}
