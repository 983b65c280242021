//! Corey relative permeabilities and the water fractional-flow closure.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FluidRock {
    /// Water viscosity, Pa·s.
    pub mu_w: f64,
    /// Oil viscosity, Pa·s.
    pub mu_o: f64,
    /// Connate water saturation.
    pub swc: f64,
    /// Residual oil saturation.
    pub sor: f64,
    pub n_w: f64,
    pub n_o: f64,
    pub krw_end: f64,
    pub kro_end: f64,
    /// Total compressibility, 1/Pa.
    pub c_t: f64,
}

impl Default for FluidRock {
    fn default() -> Self {
        Self {
            mu_w: 0.5e-3,
            mu_o: 2.0e-3,
            swc: 0.2,
            sor: 0.2,
            n_w: 2.0,
            n_o: 2.0,
            krw_end: 0.4,
            kro_end: 0.9,
            c_t: 1e-9,
        }
    }
}

impl FluidRock {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_w > 0.0
            && self.mu_o > 0.0
            && self.swc >= 0.0
            && self.sor >= 0.0
            && self.swc + self.sor < 1.0
            && self.n_w >= 1.0
            && self.n_o >= 1.0
            && self.krw_end > 0.0
            && self.kro_end > 0.0
            && self.c_t > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidModel(format!("inadmissible fluid/rock data: {self:?}")))
        }
    }

    fn movable(&self) -> f64 {
        1.0 - self.swc - self.sor
    }

    /// Normalized saturation clamped to `[0, 1]`.
    pub fn normalized(&self, sw: f64) -> f64 {
        ((sw - self.swc) / self.movable()).clamp(0.0, 1.0)
    }

    pub fn krw(&self, sw: f64) -> f64 {
        self.krw_end * corey(self.normalized(sw), self.n_w)
    }

    pub fn kro(&self, sw: f64) -> f64 {
        self.kro_end * corey(1.0 - self.normalized(sw), self.n_o)
    }

    /// Water and oil mobilities `kr / mu`, 1/(Pa·s).
    pub fn mobilities(&self, sw: f64) -> (f64, f64) {
        (self.krw(sw) / self.mu_w, self.kro(sw) / self.mu_o)
    }

    pub fn total_mobility(&self, sw: f64) -> f64 {
        let (w, o) = self.mobilities(sw);
        w + o
    }

    /// `d f_w / d S_w`, zero outside the movable range.
    pub fn fractional_flow_slope(&self, sw: f64) -> f64 {
        let s = (sw - self.swc) / self.movable();
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        let lw = self.krw_end * corey(s, self.n_w) / self.mu_w;
        let lo = self.kro_end * corey(1.0 - s, self.n_o) / self.mu_o;
        let dlw = self.krw_end * self.n_w * corey(s, self.n_w - 1.0) / self.mu_w;
        let dlo = -self.kro_end * self.n_o * corey(1.0 - s, self.n_o - 1.0) / self.mu_o;
        let total = lw + lo;
        (dlw * lo - lw * dlo) / (total * total) / self.movable()
    }
}

fn corey(s: f64, n: f64) -> f64 {
    if n == 2.0 {
        s * s
    } else if n == 1.0 {
        s
    } else {
        s.powf(n)
    }
}

/// Water fraction of the total mobile flow, `lw / (lw + lo)`, with the
/// saturation clamped to `[Swc, 1 - Sor]`.
pub fn fractional_flow(sw: f64, fluid: &FluidRock) -> f64 {
    let (w, o) = fluid.mobilities(sw);
    w / (w + o)
}
