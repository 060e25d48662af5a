//! Realized net exposure of one dealer under a clearing scenario.
//!
//! ```text
//! e_i = sum_{j != i} max(sum_k (1 - w_k) X_ij^k, 0)
//!     + sum_{ccp} max(sum_{j != i} sum_{k in ccp} w_k X_ij^k, 0)
//! ```
//!
//! A single CCP clearing several classes nets them inside one `max`; separate
//! CCPs each get their own.

use super::sampler::ExposureDraw;
use super::SimulationError;
use crate::market::ClearingScenario;

#[inline]
fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// A scenario reduced to per-class retained fractions and CCP groups.
#[derive(Clone, Debug)]
pub struct CompiledScenario {
    retained: Vec<f64>,
    groups: Vec<Vec<(usize, f64)>>,
}

impl CompiledScenario {
    pub fn new(scenario: &ClearingScenario, n_classes: usize) -> Result<Self, SimulationError> {
        scenario.validate(n_classes)?;
        Ok(Self {
            retained: scenario.retained_fractions(n_classes),
            groups: scenario.ccp_groups(),
        })
    }

    pub fn exposure(&self, draw: &ExposureDraw, i: usize) -> f64 {
        let n = draw.n_dealers();
        let mut total = 0.0;
        for j in (0..n).filter(|j| *j != i) {
            let x = draw.pair(i, j);
            let net: f64 = x.iter().zip(&self.retained).map(|(x, r)| r * x).sum();
            total += positive_part(net);
        }
        for group in &self.groups {
            let mut cleared = 0.0;
            for j in (0..n).filter(|j| *j != i) {
                let x = draw.pair(i, j);
                for &(k, w) in group {
                    cleared += w * x[k];
                }
            }
            total += positive_part(cleared);
        }
        total
    }
}

pub fn evaluate_scenario(
    draw: &ExposureDraw,
    scenario: &ClearingScenario,
    i: usize,
) -> Result<f64, SimulationError> {
    if i >= draw.n_dealers() {
        return Err(SimulationError::DealerOutOfRange(i));
    }
    Ok(CompiledScenario::new(scenario, draw.n_classes())?.exposure(draw, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw_from(values: &[[[f64; 2]; 3]; 3]) -> ExposureDraw {
        let mut d = ExposureDraw::zeros(3, 2);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..2 {
                    d.set(i, j, k, values[i][j][k]);
                }
            }
        }
        d
    }

    #[test]
    fn zero_draw_has_zero_exposure() {
        let d = ExposureDraw::zeros(3, 2);
        let scenarios = ClearingScenario::standard_set((0, 0.9), (1, 0.85));
        for s in &scenarios {
            for i in 0..3 {
                assert_eq!(evaluate_scenario(&d, s, i).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn hand_computed_full_clearing_of_second_class() {
        // X_01 = (2, -5), X_02 = (-1, 3)
        let d = draw_from(&[
            [[0.0, 0.0], [2.0, -5.0], [-1.0, 3.0]],
            [[-2.0, 5.0], [0.0, 0.0], [4.0, 1.0]],
            [[1.0, -3.0], [-4.0, -1.0], [0.0, 0.0]],
        ]);
        let s = ClearingScenario::single("c1", 1, 1.0);
        // dealer 0: bilateral max(2,0) + max(-1,0) = 2; CCP max(-5 + 3, 0) = 0
        assert_eq!(evaluate_scenario(&d, &s, 0).unwrap(), 2.0);
        // dealer 1: bilateral max(-2,0) + max(4,0) = 4; CCP max(5 + 1, 0) = 6
        assert_eq!(evaluate_scenario(&d, &s, 1).unwrap(), 10.0);
        // dealer 2: bilateral 1 + 0; CCP max(-3 - 1, 0) = 0
        assert_eq!(evaluate_scenario(&d, &s, 2).unwrap(), 1.0);

        // bilateral netting of dealer 1: max(3, 0) + max(5, 0)
        assert_eq!(evaluate_scenario(&d, &ClearingScenario::no_ccp(), 1).unwrap(), 8.0);

        let joint = ClearingScenario::joint("j", &[(0, 1.0), (1, 1.0)]);
        let two = ClearingScenario::separate("t", &[(0, 1.0), (1, 1.0)]);
        // dealer 0: joint max(2 - 5 - 1 + 3, 0) = 0, separate max(1,0) + max(-2,0) = 1
        assert_eq!(evaluate_scenario(&d, &joint, 0).unwrap(), 0.0);
        assert_eq!(evaluate_scenario(&d, &two, 0).unwrap(), 1.0);
    }

    #[test]
    fn zero_fractions_reproduce_bilateral_bitwise() {
        let d = draw_from(&[
            [[0.0, 0.0], [0.3, -0.7], [-1.1, 3.3]],
            [[-2.2, 5.1], [0.0, 0.0], [4.4, 1.9]],
            [[1.5, -3.25], [-4.0, -1.0], [0.0, 0.0]],
        ]);
        let base = ClearingScenario::no_ccp();
        for s in ClearingScenario::standard_set((0, 0.0), (1, 0.0)) {
            for i in 0..3 {
                assert_eq!(
                    evaluate_scenario(&d, &s, i).unwrap().to_bits(),
                    evaluate_scenario(&d, &base, i).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn index_validation() {
        let d = ExposureDraw::zeros(3, 2);
        assert!(evaluate_scenario(&d, &ClearingScenario::no_ccp(), 3).is_err());
        assert!(evaluate_scenario(&d, &ClearingScenario::single("x", 2, 0.5), 0).is_err());
    }
}
