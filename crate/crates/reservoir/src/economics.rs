//! Net present value of a production profile.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconomicParams {
    /// Gas revenue, USD/m³.
    pub gas_price: f64,
    /// Oil revenue, USD/m³.
    pub oil_price: f64,
    /// Produced-water disposal cost, USD/m³.
    pub water_production_cost: f64,
    /// Water injection cost, USD/m³.
    pub water_injection_cost: f64,
    /// Fractional annual discount rate.
    pub discount_rate: f64,
    /// Discount period, days.
    pub tau: f64,
}

impl Default for EconomicParams {
    fn default() -> Self {
        Self::model1()
    }
}

impl EconomicParams {
    pub fn model1() -> Self {
        Self {
            gas_price: 0.0,
            oil_price: 500.0,
            water_production_cost: 250.0,
            water_injection_cost: 80.0,
            discount_rate: 0.0,
            tau: 365.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau > 0.0 && self.discount_rate >= 0.0 {
            Ok(())
        } else {
            Err(SimError::InvalidModel(
                "need tau > 0 and a non-negative discount rate".into(),
            ))
        }
    }

    fn discount(&self, t_end: f64) -> f64 {
        (1.0 + self.discount_rate).powf(t_end / self.tau)
    }
}

/// Field rates averaged over one control step, m³/day.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepRates {
    /// Step length, days.
    pub dt: f64,
    /// Time at the end of the step, days.
    pub t_end: f64,
    pub oil: f64,
    pub water: f64,
    pub water_injected: f64,
    pub gas: f64,
}

/// Per-well average rates per control step, m³/day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellRates {
    pub name: String,
    pub oil: Vec<f64>,
    pub water: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionProfile {
    pub steps: Vec<StepRates>,
    #[serde(default)]
    pub wells: Vec<WellRates>,
}

impl ProductionProfile {
    pub fn horizon(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).sum()
    }

    /// Cumulative (oil, water produced, water injected) volumes, m³.
    pub fn cumulative(&self) -> (f64, f64, f64) {
        self.steps.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (
                acc.0 + s.oil * s.dt,
                acc.1 + s.water * s.dt,
                acc.2 + s.water_injected * s.dt,
            )
        })
    }
}

/// Discounted phase volumes `sum dt_n q_n / (1+b)^(t_n/tau)`, m³.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiscountedVolumes {
    pub gas: f64,
    pub oil: f64,
    pub water: f64,
    pub water_injected: f64,
}

pub fn discounted_volumes(profile: &ProductionProfile, econ: &EconomicParams) -> DiscountedVolumes {
    let mut out = DiscountedVolumes::default();
    for s in &profile.steps {
        let f = s.dt / econ.discount(s.t_end);
        out.gas += f * s.gas;
        out.oil += f * s.oil;
        out.water += f * s.water;
        out.water_injected += f * s.water_injected;
    }
    out
}

/// `sum_n dt_n / (1+b)^(t_n/tau) * (r_g q_g + r_o q_o - c_wp q_wp - c_wi q_wi)`.
pub fn npv(profile: &ProductionProfile, econ: &EconomicParams) -> f64 {
    profile
        .steps
        .iter()
        .map(|s| {
            let cash = econ.gas_price * s.gas + econ.oil_price * s.oil
                - econ.water_production_cost * s.water
                - econ.water_injection_cost * s.water_injected;
            s.dt / econ.discount(s.t_end) * cash
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_step(dt: f64, t_end: f64) -> ProductionProfile {
        ProductionProfile {
            steps: vec![StepRates {
                dt,
                t_end,
                oil: 50.0,
                water: 10.0,
                water_injected: 240.0,
                gas: 0.0,
            }],
            wells: vec![],
        }
    }

    #[test]
    fn zero_rates_zero_npv() {
        let p = ProductionProfile {
            steps: vec![StepRates {
                dt: 90.0,
                t_end: 90.0,
                ..Default::default()
            }],
            wells: vec![],
        };
        assert_eq!(npv(&p, &EconomicParams::model1()), 0.0);
    }

    #[test]
    fn hand_case() {
        // 360 * (50*500 - 10*250 - 240*80)
        assert_eq!(npv(&one_step(360.0, 360.0), &EconomicParams::model1()), 1_188_000.0);
    }

    #[test]
    fn one_period_discount() {
        let econ = EconomicParams {
            discount_rate: 0.1,
            ..EconomicParams::model1()
        };
        let p = one_step(360.0, 365.0);
        let v = npv(&p, &econ);
        assert!((v - 1_188_000.0 / 1.1).abs() < 1e-6, "{v}");
    }

    #[test]
    fn linear_in_oil_price() {
        let econ = EconomicParams {
            discount_rate: 0.07,
            ..EconomicParams::model1()
        };
        let p = ProductionProfile {
            steps: (0..4)
                .map(|k| StepRates {
                    dt: 90.0,
                    t_end: 90.0 * (k + 1) as f64,
                    oil: 30.0 + k as f64,
                    water: 5.0 * k as f64,
                    water_injected: 240.0,
                    gas: 0.0,
                })
                .collect(),
            wells: vec![],
        };
        let doubled = EconomicParams {
            oil_price: 2.0 * econ.oil_price,
            ..econ.clone()
        };
        let gain = npv(&p, &doubled) - npv(&p, &econ);
        let expected = econ.oil_price * discounted_volumes(&p, &econ).oil;
        assert!((gain - expected).abs() < 1e-9 * expected.abs());
    }
}
