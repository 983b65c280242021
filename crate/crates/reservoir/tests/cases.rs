use std::io::Write;
use std::path::{Path, PathBuf};

use wellopt_core::{ControlSchedule, Objective, ObjectiveFamily};
use wellopt_reservoir::external::{ExternalObjective, ExternalSimulator};
use wellopt_reservoir::{
    build_model1, build_model1_desk, npv, simulate, EconomicParams, SimOptions, WaterfloodCase, WaterfloodFamily,
    WaterfloodObjective,
};

fn docs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs")
}

#[test]
fn shipped_model_files_match_builders() {
    assert_eq!(WaterfloodCase::load(&docs().join("model1.json")).unwrap(), build_model1());
    assert_eq!(WaterfloodCase::load(&docs().join("model1-desk.json")).unwrap(), build_model1_desk());
}

#[test]
fn invalid_model_file_is_rejected() {
    let mut case = build_model1_desk();
    case.model.porosity = 1.5;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, case.to_json().unwrap()).unwrap();
    assert!(WaterfloodCase::load(&path).is_err());
}

#[test]
fn objective_matches_direct_simulation() {
    let case = build_model1_desk();
    let obj = WaterfloodObjective::new(&case, SimOptions::default(), 2).unwrap();
    assert_eq!(obj.dim(), 8);
    let x = [20.0, 60.0, 10.0, 30.0, 80.0, 0.0, 40.0, 5.0];
    let schedule = ControlSchedule::new(4, 2, x.to_vec(), 720.0).unwrap();
    let direct = npv(&simulate(&case.model, &case.fluid, &schedule).unwrap().profile, &case.economics);
    assert_eq!(obj.evaluate(&x).unwrap(), direct);
}

#[test]
fn family_objectives_bridge_scales() {
    let family = WaterfloodFamily::new(build_model1_desk(), SimOptions::default()).unwrap();
    assert_eq!(family.wells(), 4);
    let coarse = family.objective(2).unwrap();
    let fine = family.objective(8).unwrap();
    let x = [70.0, 10.0, 35.0, 5.0, 0.0, 80.0, 20.0, 40.0];
    let split = wellopt_core::split_values(&x, 4);
    let (a, b) = (coarse.evaluate(&x).unwrap(), fine.evaluate(&split).unwrap());
    assert!((a - b).abs() <= 1e-10 * a.abs());
}

#[cfg(unix)]
#[test]
fn external_simulator_round_trip() {
    use std::os::unix::fs::PermissionsExt;

    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("fake-sim.sh");
    let mut file = std::fs::File::create(&script).unwrap();
    writeln!(
        file,
        r#"#!/bin/sh
test -s "$1" || exit 3
cat > "$2" <<'JSON'
{{"steps": [
  {{"dt": 360.0, "t_end": 360.0, "oil": 50.0, "water": 10.0, "water_injected": 240.0, "gas": 0.0}},
  {{"dt": 360.0, "t_end": 720.0, "oil": 50.0, "water": 10.0, "water_injected": 240.0, "gas": 0.0}}
]}}
JSON"#
    )
    .unwrap();
    drop(file);
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();

    let objective = ExternalObjective {
        simulator: ExternalSimulator {
            program: script.clone(),
            args: vec![],
            work_dir: Some(dir.path().to_path_buf()),
        },
        economics: EconomicParams::model1(),
        bounds: build_model1_desk().bounds(2).unwrap(),
        wells: 4,
        horizon: 720.0,
    };
    assert_eq!(objective.evaluate(&[20.0; 8]).unwrap(), 2.0 * 1_188_000.0);
    // A profile with the wrong number of steps is refused.
    assert!(objective.evaluate(&[20.0; 4]).is_err());
}

#[cfg(unix)]
#[test]
fn external_failure_is_reported() {
    let sim = ExternalSimulator {
        program: "false".into(),
        args: vec![],
        work_dir: None,
    };
    let err = sim.run(&ControlSchedule::constant(&[1.0], 1, 10.0).unwrap()).unwrap_err();
    assert!(err.to_string().contains("exited"), "{err}");
}
