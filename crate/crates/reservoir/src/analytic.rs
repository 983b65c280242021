//! Closed-form test functions with known optima.
//!
//! Each function is stated in its usual minimization form; [`AnalyticSpec::objective`]
//! wraps its negation for the maximizing optimizers.

use wellopt_core::{Bounds, FnObjective};

#[derive(Debug, Clone)]
pub struct AnalyticSpec {
    pub name: &'static str,
    pub bounds: Bounds,
    pub start: Vec<f64>,
    pub optimum: Vec<f64>,
    pub optimum_value: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Sphere,
    Shifted(Vec<f64>),
    Rosenbrock,
}

impl AnalyticSpec {
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Sphere => sphere(x),
            Kind::Shifted(c) => x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum(),
            Kind::Rosenbrock => rosenbrock(x),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Maximization form `-f(x)`.
    pub fn objective(&self) -> FnObjective<impl Fn(&[f64]) -> f64 + Send + Sync> {
        let spec = self.clone();
        FnObjective::new(self.bounds.clone(), move |x: &[f64]| -spec.value(x))
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

/// Sphere on `[-half_width, half_width]^dim` starting from `start`.
pub fn sphere_spec(dim: usize, half_width: f64, start: f64) -> AnalyticSpec {
    AnalyticSpec {
        name: "sphere",
        bounds: Bounds::uniform(dim, -half_width, half_width).expect("positive width"),
        start: vec![start; dim],
        optimum: vec![0.0; dim],
        optimum_value: 0.0,
        kind: Kind::Sphere,
    }
}

/// Quadratic bowl centered at `center`, bounds `[-half_width, half_width]`.
pub fn shifted_quadratic_spec(center: &[f64], half_width: f64) -> AnalyticSpec {
    AnalyticSpec {
        name: "shifted_quadratic",
        bounds: Bounds::uniform(center.len(), -half_width, half_width).expect("positive width"),
        start: vec![0.0; center.len()],
        optimum: center.to_vec(),
        optimum_value: 0.0,
        kind: Kind::Shifted(center.to_vec()),
    }
}

pub fn rosenbrock_spec(dim: usize) -> AnalyticSpec {
    AnalyticSpec {
        name: "rosenbrock",
        bounds: Bounds::uniform(dim, -2.0, 2.0).expect("positive width"),
        start: vec![-1.2; dim],
        optimum: vec![1.0; dim],
        optimum_value: 0.0,
        kind: Kind::Rosenbrock,
    }
}

/// The standard fixtures: 2-D sphere on `[-800, 800]` from `(-200, -200)`,
/// a 3-D shifted quadratic and 2-D Rosenbrock.
pub fn analytic_objectives() -> Vec<AnalyticSpec> {
    vec![
        sphere_spec(2, 800.0, -200.0),
        shifted_quadratic_spec(&[0.3, -1.7, 2.2], 5.0),
        rosenbrock_spec(2),
    ]
}
