//! Global-best particle swarm with inertia, cognitive and social terms and
//! absorbing walls: a coordinate that leaves `[0,1]` is placed on the
//! nearest bound and its velocity component is zeroed.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bounds::in_unit_box;
use crate::driver::{drive, RunOutcome, StopFn, Strategy};
use crate::error::{CoreError, Result};
use crate::log::EvaluationLog;
use crate::objective::Objective;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 100,
            inertia: 0.9,
            cognitive: 0.5,
            social: 1.25,
        }
    }
}

/// Stability region of the inertia/acceleration parameters:
/// `0 < c1 + c2 < 4` and `(c1 + c2)/2 - 1 < w < 1`.
pub fn check_stability(w: f64, c1: f64, c2: f64) -> bool {
    let c = c1 + c2;
    0.0 < c && c < 4.0 && 0.5 * c - 1.0 < w && w < 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub global_best: Vec<f64>,
    pub global_best_value: f64,
    pub config: PsoConfig,
    pub iteration: usize,
}

/// `v' = w v + c1 r1 (p - x) + c2 r2 (g - x)` and `x' = x + v'`, per
/// coordinate, before any bound handling.
pub fn velocity_update(
    x: &[f64],
    v: &[f64],
    p: &[f64],
    g: &[f64],
    r1: &[f64],
    r2: &[f64],
    cfg: &PsoConfig,
) -> (Vec<f64>, Vec<f64>) {
    let mut nv = Vec::with_capacity(x.len());
    let mut nx = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let vj = cfg.inertia * v[j]
            + cfg.cognitive * r1[j] * (p[j] - x[j])
            + cfg.social * r2[j] * (g[j] - x[j]);
        nv.push(vj);
        nx.push(x[j] + vj);
    }
    (nx, nv)
}

/// Absorbing walls on the unit box.
pub fn absorb(x: &mut [f64], v: &mut [f64]) {
    for (xj, vj) in x.iter_mut().zip(v.iter_mut()) {
        if *xj > 1.0 {
            *xj = 1.0;
            *vj = 0.0;
        } else if *xj < 0.0 {
            *xj = 0.0;
            *vj = 0.0;
        }
    }
}

/// Particle 0 sits at `x0`, the rest are uniform in the box. Velocities
/// start at zero and personal bests at the positions; values are filled in
/// by [`Swarm::record`].
pub fn init_swarm(rng: &mut Rng, config: PsoConfig, x0: &[f64]) -> Result<Swarm> {
    if config.swarm_size < 2 {
        return Err(CoreError::Usage("swarm needs at least 2 particles".into()));
    }
    if !in_unit_box(x0) {
        return Err(CoreError::Infeasible);
    }
    let d = x0.len();
    let particles = (0..config.swarm_size)
        .map(|i| {
            let position: Vec<f64> = if i == 0 {
                x0.to_vec()
            } else {
                (0..d).map(|_| rng.random::<f64>()).collect()
            };
            Particle {
                velocity: vec![0.0; d],
                best_position: position.clone(),
                best_value: f64::NEG_INFINITY,
                position,
            }
        })
        .collect();
    Ok(Swarm {
        particles,
        global_best: x0.to_vec(),
        global_best_value: f64::NEG_INFINITY,
        config,
        iteration: 0,
    })
}

impl Swarm {
    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.particles.iter().map(|p| p.position.clone()).collect()
    }

    /// Move every particle one step with fresh per-coordinate `r1`, `r2`.
    pub fn advance(&mut self, rng: &mut Rng) {
        let d = self.global_best.len();
        for particle in &mut self.particles {
            let r1: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let r2: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let (mut x, mut v) = velocity_update(
                &particle.position,
                &particle.velocity,
                &particle.best_position,
                &self.global_best,
                &r1,
                &r2,
                &self.config,
            );
            absorb(&mut x, &mut v);
            particle.position = x;
            particle.velocity = v;
        }
        self.iteration += 1;
    }

    /// Update personal and global bests with the values at the current
    /// positions.
    pub fn record(&mut self, values: &[f64]) {
        for (particle, &value) in self.particles.iter_mut().zip(values) {
            if value > particle.best_value {
                particle.best_value = value;
                particle.best_position = particle.position.clone();
            }
            if value > self.global_best_value {
                self.global_best_value = value;
                self.global_best = particle.position.clone();
            }
        }
    }
}

pub struct Pso {
    config: PsoConfig,
    x0: Vec<f64>,
    swarm: Option<Swarm>,
}

impl Pso {
    pub fn new(x0: Vec<f64>, config: PsoConfig) -> Result<Self> {
        if config.swarm_size < 2 {
            return Err(CoreError::Usage("swarm needs at least 2 particles".into()));
        }
        if !in_unit_box(&x0) {
            return Err(CoreError::Infeasible);
        }
        if !check_stability(config.inertia, config.cognitive, config.social) {
            log::warn!(
                "PSO parameters w={}, c1={}, c2={} are outside the stability region",
                config.inertia,
                config.cognitive,
                config.social
            );
        }
        Ok(Self {
            config,
            x0,
            swarm: None,
        })
    }

    pub fn swarm(&self) -> Option<&Swarm> {
        self.swarm.as_ref()
    }
}

impl Strategy for Pso {
    fn propose(&mut self, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
        match &mut self.swarm {
            None => {
                let swarm = init_swarm(rng, self.config, &self.x0)?;
                let pts = swarm.positions();
                self.swarm = Some(swarm);
                Ok(pts)
            }
            Some(swarm) => {
                swarm.advance(rng);
                Ok(swarm.positions())
            }
        }
    }

    fn observe(&mut self, values: &[f64]) -> Result<()> {
        let swarm = self
            .swarm
            .as_mut()
            .ok_or_else(|| CoreError::Usage("observe before propose".into()))?;
        swarm.record(values);
        Ok(())
    }

    fn next_batch_hint(&self) -> Option<usize> {
        Some(self.config.swarm_size)
    }
}

/// Run PSO from `x0` (objective units) until the budget is spent.
pub fn run_pso(
    objective: &dyn Objective,
    x0: &[f64],
    config: PsoConfig,
    budget: usize,
    rng: &mut Rng,
) -> Result<(RunOutcome, EvaluationLog)> {
    if budget < config.swarm_size {
        return Err(CoreError::Usage(format!(
            "budget {budget} cannot cover swarm initialization ({} particles)",
            config.swarm_size
        )));
    }
    let bounds = objective.bounds();
    if !bounds.contains(x0) {
        return Err(CoreError::Infeasible);
    }
    let mut pso = Pso::new(bounds.normalize(x0)?, config)?;
    let mut log = EvaluationLog::new(budget);
    let out = drive(&mut pso, objective, &mut log, budget, rng, None::<&mut StopFn>)?;
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Bounds;
    use crate::log::evaluate_batch;
    use crate::objective::FnObjective;
    use crate::rng::seeded;

    #[test]
    fn stability_table() {
        assert!(check_stability(0.9, 0.5, 1.25));
        assert!(!check_stability(1.2, 0.5, 1.25));
        assert!(!check_stability(0.9, 2.5, 2.5));
    }

    #[test]
    fn fixed_point_when_at_bests() {
        let cfg = PsoConfig::default();
        let x = [0.3, 0.7];
        let (nx, nv) = velocity_update(&x, &[0.0, 0.0], &x, &x, &[0.4, 0.6], &[0.2, 0.9], &cfg);
        assert_eq!(nx, x.to_vec());
        assert_eq!(nv, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_update() {
        let cfg = PsoConfig::default();
        let (nx, nv) = velocity_update(&[0.4], &[0.1], &[0.5], &[0.6], &[1.0], &[1.0], &cfg);
        // 0.9*0.1 + 0.5*0.1 + 1.25*0.2
        assert!((nv[0] - 0.39).abs() < 1e-15);
        assert!((nx[0] - 0.79).abs() < 1e-15);
    }

    #[test]
    fn absorbing_wall() {
        let mut x = vec![1.2, 0.5, -0.1];
        let mut v = vec![0.4, 0.2, -0.3];
        absorb(&mut x, &mut v);
        assert_eq!(x, vec![1.0, 0.5, 0.0]);
        assert_eq!(v, vec![0.0, 0.2, 0.0]);
    }

    #[test]
    fn init_places_first_particle_at_start() {
        let cfg = PsoConfig {
            swarm_size: 2,
            ..Default::default()
        };
        let s = init_swarm(&mut seeded(1), cfg, &[0.25, 0.5]).unwrap();
        assert_eq!(s.particles[0].position, vec![0.25, 0.5]);
        assert_eq!(s.particles[0].velocity, vec![0.0, 0.0]);

        let s100 = init_swarm(&mut seeded(3), PsoConfig::default(), &[0.5; 4]).unwrap();
        assert_eq!(s100.particles.len(), 100);
        assert!(s100.particles.iter().all(|p| in_unit_box(&p.position)));
        let again = init_swarm(&mut seeded(3), PsoConfig::default(), &[0.5; 4]).unwrap();
        assert_eq!(s100, again);
        assert!(init_swarm(&mut seeded(3), PsoConfig { swarm_size: 1, ..cfg }, &[0.5]).is_err());
    }

    #[test]
    fn feasibility_and_monotone_bests() {
        let obj = FnObjective::new(Bounds::uniform(3, 0.0, 1.0).unwrap(), |z: &[f64]| {
            z.iter().map(|v| -(v - 0.95).powi(2)).sum()
        });
        let cfg = PsoConfig {
            swarm_size: 10,
            ..Default::default()
        };
        let mut pso = Pso::new(vec![0.5; 3], cfg).unwrap();
        let mut rng = seeded(11);
        let mut log = EvaluationLog::new(500);
        let mut prev_g = f64::NEG_INFINITY;
        let mut prev_p = vec![f64::NEG_INFINITY; 10];
        for _ in 0..50 {
            let batch = pso.propose(&mut rng).unwrap();
            assert_eq!(batch.len(), 10);
            let values = evaluate_batch(&batch, &obj, &mut log).unwrap();
            pso.observe(&values).unwrap();
            let s = pso.swarm().unwrap();
            for (i, p) in s.particles.iter().enumerate() {
                assert!(in_unit_box(&p.position));
                assert!(p.best_value >= prev_p[i]);
                prev_p[i] = p.best_value;
            }
            assert!(s.global_best_value >= prev_g);
            prev_g = s.global_best_value;
            assert_eq!(Some(s.global_best_value), log.best().map(|b| b.1));
        }
    }

    proptest::proptest! {
        #[test]
        fn absorbed_coordinates_have_zero_velocity(
            xv in proptest::collection::vec((-2.0f64..3.0, -1.0f64..1.0), 1..12)
        ) {
            let mut x: Vec<f64> = xv.iter().map(|p| p.0).collect();
            let mut v: Vec<f64> = xv.iter().map(|p| p.1).collect();
            absorb(&mut x, &mut v);
            proptest::prop_assert!(in_unit_box(&x));
            for (j, (x0, v0)) in xv.iter().enumerate() {
                if (0.0..=1.0).contains(x0) {
                    proptest::prop_assert_eq!(x[j], *x0);
                    proptest::prop_assert_eq!(v[j], *v0);
                } else {
                    proptest::prop_assert_eq!(v[j], 0.0);
                    proptest::prop_assert_eq!(x[j], x0.clamp(0.0, 1.0));
                }
            }
        }
    }

    #[test]
    fn budget_below_swarm_is_error() {
        let obj = FnObjective::new(Bounds::uniform(2, 0.0, 1.0).unwrap(), |z: &[f64]| z[0]);
        let cfg = PsoConfig {
            swarm_size: 20,
            ..Default::default()
        };
        assert!(run_pso(&obj, &[0.5, 0.5], cfg, 19, &mut seeded(0)).is_err());
    }

    #[test]
    fn exactly_swarm_size_per_iteration() {
        let obj = FnObjective::new(Bounds::uniform(2, 0.0, 1.0).unwrap(), |z: &[f64]| z[0]);
        let cfg = PsoConfig {
            swarm_size: 7,
            ..Default::default()
        };
        let (_, log) = run_pso(&obj, &[0.5, 0.5], cfg, 50, &mut seeded(0)).unwrap();
        assert_eq!(log.batch_sizes(), vec![7; 7]);
    }
}
