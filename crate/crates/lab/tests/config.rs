use std::path::{Path, PathBuf};

use libor_lab::config::{DriverType, ExperimentConfig, ModelKind, Overrides};
use libor_lab::LabError;
use proptest::prelude::*;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const BASE: &str = r#"
[tenor]
delta = 0.5
n = 4

[curve]
flat_rate = 0.03

[driver]
type = "brownian"
seed = 1

[vols]
flat = 0.2

[models]
list = ["lmm-exact", "lmm-frozen"]

[pricing]
strikes = [0.03]
n_paths = 100

[output]
dir = "out"
"#;

fn config_error(text: &str) -> String {
    match ExperimentConfig::parse(text).and_then(|c| c.validate()) {
        Err(LabError::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn documented_configs_load_and_validate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::load(&path).unwrap();
            cfg.validate()
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let back = ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(back, cfg);
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn defaults_fill_optional_fields() {
    let cfg = ExperimentConfig::parse(BASE).unwrap();
    assert_eq!(cfg.tenor.t0, 0.0);
    assert_eq!(cfg.driver.diffusion, 1.0);
    assert_eq!(cfg.pricing.steps_per_period, 4);
    assert!(!cfg.pricing.antithetic);
    assert_eq!(
        cfg.models.list,
        vec![ModelKind::LmmExact, ModelKind::LmmFrozen]
    );
    assert_eq!(cfg.mfm_settings().quad_order, 64);
}

#[test]
fn unknown_fields_are_reported_with_position() {
    let msg = config_error(&BASE.replace("n = 4", "n = 4\nsteps = 3"));
    assert!(msg.contains("steps") && msg.contains("line"), "{msg}");
}

#[test]
fn unknown_model_names_are_rejected() {
    let msg = config_error(&BASE.replace("\"lmm-frozen\"", "\"lmm-euler\""));
    assert!(msg.contains("lmm-euler"), "{msg}");
}

#[test]
fn cross_field_rules() {
    let jumps = BASE.replace(
        "type = \"brownian\"",
        "type = \"jump-normal\"\nintensity = 1.0\njump_mean = 0.0\njump_sd = 0.2",
    );
    ExperimentConfig::parse(&jumps).unwrap().validate().unwrap();
    let msg = config_error(&jumps.replace("\"lmm-frozen\"", "\"lmm-picard1\""));
    assert!(msg.contains("picard1"), "{msg}");
    let msg = config_error(&jumps.replace("jump_sd = 0.2", ""));
    assert!(msg.contains("driver.jump_sd"), "{msg}");
    let msg = config_error(&BASE.replace("flat_rate = 0.03", "flat_rate = 0.03\nfile = \"c.csv\""));
    assert!(msg.contains("[curve]"), "{msg}");
    let msg = config_error(&BASE.replace("flat_rate = 0.03", "file = \"no-such-curve.csv\""));
    assert!(msg.contains("does not exist"), "{msg}");
    let msg = config_error(&BASE.replace("flat = 0.2", "per_rate = [0.2, 0.2]"));
    assert!(msg.contains("vols.per_rate"), "{msg}");
    let msg = config_error(&BASE.replace("\"lmm-frozen\"", "\"affine\""));
    assert!(msg.contains("[affine]"), "{msg}");
    let msg = config_error(&BASE.replace("n_paths = 100", "n_paths = 101\nantithetic = true"));
    assert!(msg.contains("even"), "{msg}");
    let msg = config_error(&BASE.replace("delta = 0.5", "t0 = 1.0\ndelta = 0.5"));
    assert!(msg.contains("tenor.t0"), "{msg}");
}

#[test]
fn overrides_replace_file_values() {
    let mut cfg = ExperimentConfig::parse(BASE).unwrap();
    cfg.apply(&Overrides {
        seed: Some(9),
        paths: Some(50),
        out_dir: Some("elsewhere".into()),
        quad_order: Some(32),
    });
    assert_eq!(cfg.driver.seed, 9);
    assert_eq!(cfg.pricing.n_paths, 50);
    assert_eq!(cfg.output.dir, PathBuf::from("elsewhere"));
    assert_eq!(cfg.mfm_settings().quad_order, 32);
}

#[test]
fn relative_paths_resolve_against_the_config() {
    let cfg = ExperimentConfig::load(&configs().join("affine.toml")).unwrap();
    assert!(cfg.curve.file.as_ref().unwrap().exists());
    assert!(cfg.output.dir.starts_with(configs()));
}

fn arb_model_list() -> impl Strategy<Value = Vec<ModelKind>> {
    proptest::sample::subsequence(ModelKind::ALL.to_vec(), 1..=ModelKind::ALL.len())
}

proptest! {
    #[test]
    fn round_trip(
        delta in 0.05f64..2.0,
        n in 1usize..40,
        rate in -0.01f64..0.2,
        vol in 0.0f64..1.0,
        seed in any::<u64>(),
        jumps in any::<bool>(),
        intensity in 0.0f64..5.0,
        strikes in proptest::collection::vec(0.001f64..0.2, 1..6),
        n_paths in 2usize..10_000_000,
        models in arb_model_list(),
        dump in 0usize..100,
    ) {
        let mut cfg = ExperimentConfig::parse(BASE).unwrap();
        cfg.tenor.delta = delta;
        cfg.tenor.n = n;
        cfg.curve.flat_rate = Some(rate);
        cfg.vols.flat = Some(vol);
        cfg.driver.seed = seed;
        if jumps {
            cfg.driver.kind = DriverType::JumpNormal;
            cfg.driver.intensity = Some(intensity);
            cfg.driver.jump_mean = Some(-0.05);
            cfg.driver.jump_sd = Some(0.2);
        }
        cfg.pricing.strikes = strikes;
        cfg.pricing.n_paths = n_paths;
        cfg.models.list = models;
        cfg.output.dump_paths = dump;
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }
}
