use proptest::prelude::*;
use wellopt_core::ControlSchedule;
use wellopt_reservoir::{
    build_model1_desk, fractional_flow, npv, SimOptions, SimulationOutput, Simulator, WaterfloodCase,
};

fn desk() -> (WaterfloodCase, Simulator) {
    let case = build_model1_desk();
    let sim = Simulator::new(case.model.clone(), case.fluid.clone(), SimOptions::default()).unwrap();
    (case, sim)
}

/// Volume oracle: sum of well volumes against the compressive storage gain
/// recomputed from the final pressure field.
fn storage_gain(sim: &Simulator, out: &SimulationOutput) -> f64 {
    let c_t = sim.fluid().c_t;
    let p0 = sim.model().initial_pressure;
    out.pressure
        .iter()
        .zip(sim.pore_volume())
        .map(|(p, v)| v * c_t * (p - p0))
        .sum()
}

fn assert_rel(a: f64, b: f64, tol: f64, what: &str) {
    let scale = a.abs().max(b.abs()).max(1e-300);
    assert!((a - b).abs() <= tol * scale, "{what}: {a} vs {b}");
}

#[test]
fn cumulative_mass_balance() {
    let (case, sim) = desk();
    for rates in [[20.0; 4], [80.0, 40.0, 80.0, 40.0], [0.0, 40.0, 5.0, 0.0]] {
        let out = sim.run(&ControlSchedule::constant(&rates, 8, case.model.horizon).unwrap()).unwrap();
        let c = out.cumulative;
        let err = (c.water_injected - c.oil - c.water - storage_gain(&sim, &out)).abs();
        assert!(err <= 1e-6 * c.water_injected, "{rates:?}: error {err}");
    }
}

#[test]
fn water_balance_closes() {
    let (case, sim) = desk();
    let out = sim.run(&ControlSchedule::constant(&[60.0, 30.0, 10.0, 40.0], 4, case.model.horizon).unwrap()).unwrap();
    let c = out.cumulative;
    let gained: f64 = out
        .saturation
        .iter()
        .zip(sim.pore_volume())
        .map(|(s, v)| v * (s - case.model.initial_sw))
        .sum();
    let err = c.water_injected - c.water - gained - out.stored_water;
    assert!(err.abs() <= 1e-8 * c.water_injected, "water imbalance {err}");
}

#[test]
fn zero_producer_rates() {
    let (case, sim) = desk();
    let out = sim.run(&ControlSchedule::constant(&[0.0; 4], 4, case.model.horizon).unwrap()).unwrap();
    for step in &out.profile.steps {
        assert_eq!(step.oil, 0.0);
        assert_eq!(step.water, 0.0);
        assert_rel(step.water_injected, 240.0, 1e-12, "injection");
    }
}

#[test]
fn no_water_before_breakthrough() {
    let (case, sim) = desk();
    // One pressure step: the front cannot reach a producer in ten days.
    let mut model = case.model.clone();
    model.horizon = 10.0;
    let short = Simulator::new(model, case.fluid.clone(), SimOptions::default()).unwrap();
    let out = short.run(&ControlSchedule::constant(&[20.0; 4], 1, 10.0).unwrap()).unwrap();
    assert_eq!(out.profile.steps[0].water, 0.0);
    assert_rel(out.profile.steps[0].oil, 80.0, 1e-12, "oil rate");
    assert_eq!(fractional_flow(case.model.initial_sw, &case.fluid), 0.0);
    drop(sim);
}

#[test]
fn symmetric_producers_match() {
    let (case, sim) = desk();
    let out = sim.run(&ControlSchedule::constant(&[50.0, 30.0, 50.0, 30.0], 8, case.model.horizon).unwrap()).unwrap();
    let w = &out.profile.wells;
    for (a, b) in [(0, 2), (1, 3)] {
        for k in 0..8 {
            assert_rel(w[a].oil[k], w[b].oil[k], 1e-8, "oil");
            assert_rel(w[a].water[k], w[b].water[k], 1e-8, "water");
        }
    }
    assert!(w[0].water[7] > 0.0, "expected breakthrough at the high-permeability producers");
}

#[test]
fn saturations_stay_in_range() {
    let (case, sim) = desk();
    let f = &case.fluid;
    let out = sim.run(&ControlSchedule::constant(&[80.0, 40.0, 80.0, 40.0], 2, case.model.horizon).unwrap()).unwrap();
    for s in &out.saturation {
        assert!(*s >= f.swc - 1e-9 && *s <= 1.0 - f.sor + 1e-9, "{s}");
    }
}

#[test]
fn profile_covers_horizon() {
    let (case, sim) = desk();
    let out = sim.run(&ControlSchedule::constant(&[20.0; 4], 32, case.model.horizon).unwrap()).unwrap();
    assert_eq!(out.profile.steps.len(), 32);
    assert_rel(out.profile.horizon(), 720.0, 1e-12, "horizon");
    assert_eq!(out.profile.steps[31].t_end, 720.0);
    let (oil, water, inj) = out.profile.cumulative();
    assert_rel(oil, out.cumulative.oil, 1e-12, "oil");
    assert_rel(water, out.cumulative.water, 1e-12, "water");
    assert_rel(inj, out.cumulative.water_injected, 1e-12, "inj");
}

#[test]
fn runs_are_deterministic() {
    let (case, sim) = desk();
    let s = ControlSchedule::new(4, 2, vec![10.0, 70.0, 40.0, 0.0, 33.0, 80.0, 1.0, 12.5], case.model.horizon).unwrap();
    assert_eq!(sim.run(&s).unwrap(), sim.run(&s).unwrap());
}

#[test]
fn rejects_mismatched_schedule() {
    let (_, sim) = desk();
    assert!(sim.run(&ControlSchedule::constant(&[20.0; 3], 2, 720.0).unwrap()).is_err());
    assert!(sim.run(&ControlSchedule::constant(&[20.0; 4], 2, 700.0).unwrap()).is_err());
    assert!(sim.run(&ControlSchedule::constant(&[20.0, -1.0, 0.0, 0.0], 2, 720.0).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refinement_is_neutral(
        rates in proptest::collection::vec(0.0f64..1.0, 8),
        ns in prop_oneof![Just(2usize), Just(4usize)],
    ) {
        let (case, sim) = desk();
        let bounds = case.bounds(2).unwrap();
        let u = bounds.denormalize(&rates).unwrap();
        let coarse = ControlSchedule::new(4, 2, u, case.model.horizon).unwrap();
        let fine = coarse.split(ns).unwrap();
        let a = sim.run(&coarse).unwrap();
        let b = sim.run(&fine).unwrap();
        prop_assert_eq!(a.cumulative, b.cumulative);
        let (na, nb) = (npv(&a.profile, &case.economics), npv(&b.profile, &case.economics));
        prop_assert!((na - nb).abs() <= 1e-10 * na.abs().max(1.0));
    }
}
