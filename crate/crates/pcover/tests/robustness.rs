//! Wider random sweeps than the acceptance suite: larger instances, both
//! rounders, and the reduction pipelines, checking the hard postconditions
//! (feasibility, contract re-validation) rather than exact values.

mod common;

use common::{random_fl_line, random_mcc_line};
use pcover::fl::solve_fl;
use pcover::generators::{random_instance, RandomParams};
use pcover::mcc::solve_mcc;
use pcover::partition::validate_strengthened;
use pcover::rounding::{solve, RounderKind, RoundingConfig};

#[test]
fn pipeline_survives_larger_instances() {
    for seed in 0..60u64 {
        let n = 6 + (seed % 25) as usize; // up to 30
        let m = 4 + (seed % 21) as usize; // up to 24
        let r = (1 + (seed % 6) as usize).min(n);
        let density = 0.15 + (seed % 5) as f64 * 0.15;
        let inst = random_instance(&RandomParams::new(n, m, r, density, seed)).unwrap();

        for rounder in [RounderKind::Greedy, RounderKind::Frequency] {
            let config = RoundingConfig {
                seed,
                rounder,
                ..RoundingConfig::default()
            };
            let out = solve(&inst, &config)
                .unwrap_or_else(|e| panic!("seed {seed} {rounder:?}: {e}"));
            let report = inst.verify_cover(&out.cover).unwrap();
            assert!(report.feasible, "seed {seed} {rounder:?}");
            validate_strengthened(&inst, &out.strengthened, config.alpha)
                .unwrap_or_else(|e| panic!("seed {seed} {rounder:?}: {e}"));
        }
    }
}

#[test]
fn reductions_survive_larger_instances() {
    for seed in 0..20u64 {
        let nf = 2 + (seed % 5) as usize; // up to 6
        let nc = 6 + (seed % 7) as usize; // up to 12
        let r = (1 + (seed % 4) as usize).min(nc);
        let config = RoundingConfig {
            seed,
            ..RoundingConfig::default()
        };

        let fl = random_fl_line(1000 + seed, nf, nc, r);
        let out = solve_fl(&fl, &config).unwrap_or_else(|e| panic!("fl seed {seed}: {e}"));
        out.solution.verify(&fl).unwrap();

        let mcc = random_mcc_line(2000 + seed, nf, nc, r, 1.0 + (seed % 4) as f64 * 0.7);
        let out = solve_mcc(&mcc, &config).unwrap_or_else(|e| panic!("mcc seed {seed}: {e}"));
        assert!(!out.balls.is_empty());
    }
}

/// Extreme weight spreads exercise the doubling search and the cut cap.
#[test]
fn skewed_weights_are_handled() {
    for seed in 0..20u64 {
        let mut params = RandomParams::new(12, 10, 3, 0.35, seed);
        params.weight_range = (0.001, 500.0);
        let inst = random_instance(&params).unwrap();
        let config = RoundingConfig {
            seed,
            ..RoundingConfig::default()
        };
        let out = solve(&inst, &config).unwrap();
        assert!(inst.verify_cover(&out.cover).unwrap().feasible, "seed {seed}");
    }

    // Zero-weight sets are legal and make the cost guess start at the
    // smallest positive weight.
    let mut params = RandomParams::new(10, 8, 2, 0.4, 99);
    params.weight_range = (0.0, 2.0);
    let inst = random_instance(&params).unwrap();
    let out = solve(&inst, &RoundingConfig::default()).unwrap();
    assert!(inst.verify_cover(&out.cover).unwrap().feasible);
}

/// The empty instance (no elements, no colors) is degenerate but legal:
/// everything is vacuously feasible.
#[test]
fn empty_instance_is_vacuously_feasible() {
    use pcover::model::{Cover, Instance};
    let inst = Instance::new(0, vec![], vec![]).unwrap();
    assert!(inst.verify_cover(&Cover::empty()).unwrap().feasible);
    let out = solve(&inst, &RoundingConfig::default()).unwrap();
    assert!(out.cover.chosen.is_empty());
}
