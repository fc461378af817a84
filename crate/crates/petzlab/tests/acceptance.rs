//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured worst case. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use petzlab::channels::beta_quadrature;
use petzlab::divergences::{
    measured_grid_oracle, measured_relative_entropy, MeasOptConfig,
};
use petzlab::harness::generators::{
    random_channel_with_faithful_image, random_density_rng, random_hermitian_unit, splitmix64,
    stream,
};
use petzlab::harness::{
    run_campaign, trial_seed, CampaignConfig, CampaignSummary, QuadratureCfg,
};
use petzlab::hermlin::{
    eigh, expm_herm, op_norm, CMat, DensityMatrix, HermitianMatrix, PsdMatrix, C64,
};
use petzlab::inequalities::{check_cor1, check_cor3, check_hirschman, HoloScalarFamily};
use petzlab::standard_form::StandardVector;
use std::time::Instant;

fn campaign(suites: &[&str], dims: &[usize], trials: u64, seed: u64) -> CampaignSummary {
    let cfg = CampaignConfig {
        suites: suites.iter().map(|s| s.to_string()).collect(),
        dims: dims.to_vec(),
        trials,
        seed,
        workers: 4,
        ..CampaignConfig::default()
    };
    run_campaign(&cfg).expect("campaign runs")
}

fn assert_all_pass(summary: &CampaignSummary, label: &str) {
    for s in &summary.suites {
        assert_eq!(
            s.passes, s.trials,
            "{label}: suite {} failed {} of {} trials, worst gap {:e} at {}",
            s.suite,
            s.trials - s.passes,
            s.trials,
            s.worst_gap,
            s.worst_instance
        );
    }
}

fn worst_gap(summary: &CampaignSummary) -> f64 {
    summary
        .suites
        .iter()
        .map(|s| s.worst_gap)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn criterion_01_dpi_campaign() {
    let start = Instant::now();
    let summary = campaign(&["dpi"], &[2, 3, 4], 334, 101);
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(summary.rows, 1002);
    assert_all_pass(&summary, "criterion 1");
    assert!(elapsed <= 30.0, "dpi campaign took {elapsed:.1}s, budget 30s");
    println!(
        "ACCEPTANCE 1 PASS: dpi x{} (d in 2..4), gap >= -1e-8, worst {:.2e}, {:.1}s",
        summary.rows,
        worst_gap(&summary),
        elapsed
    );
}

#[test]
fn criterion_02_improved_dpi_and_grid_crosscheck() {
    let summary = campaign(&["improved_dpi"], &[2, 3], 250, 102);
    assert_eq!(summary.rows, 500);
    assert_all_pass(&summary, "criterion 2");
    // optimizer rhs vs the d = 2 measurement-grid oracle on the same
    // (state, recovered) pairs
    let rule = beta_quadrature(0.0, 64, 6.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut done = 0u64;
    let mut bump = 0u64;
    while done < 100 {
        let seed = trial_seed(202, "acc2-crosscheck", 2, done + 1000 * bump);
        let mut rng = stream(seed, 0x77);
        let rho = random_density_rng(&mut rng, 2, 1e-3);
        let sigma = random_density_rng(&mut rng, 2, 1e-3);
        let (ch, _) = random_channel_with_faithful_image(2, 2, 2, seed, &sigma).unwrap();
        let rho_b = ch.apply_schrodinger(&rho);
        let rec = petzlab::inequalities::recovered_state(&rho_b, &ch, &sigma, &rule).unwrap();
        if !rec.is_faithful() {
            bump += 1;
            continue;
        }
        let cfg = MeasOptConfig {
            seed: splitmix64(seed),
            ..MeasOptConfig::default()
        };
        let opt = measured_relative_entropy(&rho, &rec, &cfg).unwrap().value;
        let grid = measured_grid_oracle(&rho, &rec, 4000).unwrap();
        worst = worst.max((opt - grid).abs());
        done += 1;
    }
    assert!(worst <= 1e-4, "optimizer vs grid deviation {worst:e}");
    println!(
        "ACCEPTANCE 2 PASS: improved DPI x500 (d in 2..3) gap >= -1e-6, worst {:.2e}; d=2 grid agreement on 100 instances within {:.2e}",
        worst_gap(&summary),
        worst
    );
}

#[test]
fn criterion_03_commutative_saturation() {
    let summary = campaign(&["commutative_saturation"], &[2, 3, 4], 34, 103);
    assert!(summary.rows >= 100);
    assert_all_pass(&summary, "criterion 3");
    println!(
        "ACCEPTANCE 3 PASS: commutative saturation x{}, |gap| <= 1e-6 (worst slack {:.2e})",
        summary.rows,
        worst_gap(&summary)
    );
}

#[test]
fn criterion_04_perfect_reference_recovery() {
    let summary = campaign(&["perfect_recovery"], &[2, 3, 4], 334, 104);
    assert_eq!(summary.rows, 1002);
    assert_all_pass(&summary, "criterion 4");
    println!(
        "ACCEPTANCE 4 PASS: reference recovery x{}, trace-norm error <= 1e-8 (worst slack {:.2e})",
        summary.rows,
        worst_gap(&summary)
    );
}

#[test]
fn criterion_05_dominance_chain() {
    let summary = campaign(&["dominance_chain"], &[2, 3], 250, 105);
    assert_eq!(summary.rows, 500);
    assert_all_pass(&summary, "criterion 5");
    println!(
        "ACCEPTANCE 5 PASS: S >= S_meas >= -2 log F on 500 pairs, per-link slack >= -1e-6 (worst {:.2e})",
        worst_gap(&summary)
    );
}

#[test]
fn criterion_06_renyi_bounds() {
    let summary = campaign(&["renyi_integral", "renyi_channel"], &[2, 3], 150, 106);
    assert_eq!(summary.rows, 600);
    assert_all_pass(&summary, "criterion 6");
    println!(
        "ACCEPTANCE 6 PASS: Renyi integral + channel forms x300 each (s in {{.5,.7,.9}}), gap >= -1e-6, Jensen ordering within 1e-8 (worst {:.2e})",
        worst_gap(&summary)
    );
}

#[test]
fn criterion_07_multi_trace_suites() {
    let summary = campaign(&["cor1", "alt", "cor3"], &[2, 3], 150, 107);
    assert_eq!(summary.rows, 900);
    assert_all_pass(&summary, "criterion 7");

    // tracial specializations against direct Schatten-trace formulas
    let mut rng = stream(107, 0x7ACE);
    let d = 3usize;
    let mut worst_route = 0.0f64;
    for _ in 0..25 {
        let psi = DensityMatrix::maximally_mixed(d);
        let a: Vec<PsdMatrix> = (0..3)
            .map(|_| {
                let g = petzlab::harness::generators::random_cmat(&mut rng, d);
                let w = &g * g.adjoint();
                let lift = 0.05 * op_norm(&w).max(0.2);
                PsdMatrix::new(w + CMat::identity(d, d).scale(lift)).unwrap()
            })
            .collect();
        let (r, p) = (0.5, 2.0);
        let rep = check_cor1(&a, &psi, r, p, 48, 8.0, "acc7", 0).unwrap();
        let schatten_ln = |m: &CMat, q: f64| -> f64 {
            let gram = HermitianMatrix::new(m.adjoint() * m).unwrap();
            eigh(&gram)
                .eigenvalues
                .iter()
                .map(|&l| l.max(0.0).powf(q / 2.0))
                .sum::<f64>()
                .ln()
        };
        let prod_pow = |z: C64| -> CMat {
            let mut m = CMat::identity(d, d);
            for x in &a {
                m *= x.spectral().power(z);
            }
            m
        };
        let shift = (d as f64).ln();
        let value_tr = (schatten_ln(&prod_pow(C64::new(r, 0.0)), p / r) - shift) / p;
        let rule = beta_quadrature(r / 2.0, 48, 8.0).unwrap();
        let bound_tr =
            rule.integrate(|t| (schatten_ln(&prod_pow(C64::new(1.0, 2.0 * t)), p) - shift) / p);
        worst_route = worst_route.max((rep.gap - (bound_tr - value_tr)).abs());
    }
    assert!(worst_route <= 1e-9, "cor1 trace-route deviation {worst_route:e}");

    // Golden-Thompson for two matrices through the cor3 check
    let mut worst_gt = 0.0f64;
    for _ in 0..25 {
        let d = 2usize;
        let psi = StandardVector::new(CMat::identity(d, d).unscale((d as f64).sqrt())).unwrap();
        let h1 = random_hermitian_unit(&mut rng, d);
        let h2 = random_hermitian_unit(&mut rng, d);
        let rep = check_cor3(&[h1.clone(), h2.clone()], &psi, 48, 8.0, "acc7", 0).unwrap();
        assert!(rep.pass);
        let tr_sum = expm_herm(&HermitianMatrix::new(h1.mat() + h2.mat()).unwrap())
            .mat()
            .trace()
            .re;
        let tr_split = (expm_herm(&h1).mat() * expm_herm(&h2).mat()).trace().re;
        assert!(tr_sum <= tr_split + 1e-10, "Golden-Thompson violated");
        // both sides of the check reproduce the trace inequality up to ln d
        worst_gt = worst_gt.max((rep.rhs + (d as f64).ln() - tr_sum.ln()).abs());
        worst_gt = worst_gt.max((rep.lhs + (d as f64).ln() - tr_split.ln()).abs());
    }
    assert!(worst_gt <= 1e-9, "cor3 trace-route deviation {worst_gt:e}");
    println!(
        "ACCEPTANCE 7 PASS: cor1/alt/cor3 x300 each, gap >= -1e-6 (worst {:.2e}); tracial trace-route agreement within 1e-9 incl. Golden-Thompson",
        worst_gap(&summary)
    );
}

#[test]
fn criterion_08_interpolation() {
    // equality witness e^{cz}
    let mut worst_eq = 0.0f64;
    for theta in [0.05, 0.15, 0.25, 0.35, 0.45] {
        for c in [
            C64::new(1.0, 0.0),
            C64::new(-2.3, 1.1),
            C64::new(0.4, -3.0),
        ] {
            let rep =
                check_hirschman(&HoloScalarFamily::ExpLinear(c), theta, 64, 9.0, "acc8", 0)
                    .unwrap();
            worst_eq = worst_eq.max(rep.gap.abs());
        }
    }
    assert!(worst_eq <= 1e-9, "equality witness gap {worst_eq:e}");
    let summary = campaign(&["hirschman", "lp_interpolation"], &[2, 3], 100, 108);
    assert_eq!(summary.rows, 400);
    assert_all_pass(&summary, "criterion 8");
    println!(
        "ACCEPTANCE 8 PASS: e^(cz) witness |gap| <= 1e-9 (worst {:.2e}); hirschman + 200 interpolation families pass (worst gap {:.2e})",
        worst_eq,
        worst_gap(&summary)
    );
}

#[test]
fn criterion_09_oracle_equivalences() {
    let s_limit = campaign(&["oracle_s_limit"], &[2, 3, 4], 34, 109);
    assert!(s_limit.rows >= 100);
    assert_all_pass(&s_limit, "criterion 9 (relative entropy limit)");
    let renyi = campaign(&["oracle_renyi_routes"], &[2, 3], 50, 110);
    assert_all_pass(&renyi, "criterion 9 (renyi dual route)");
    let lp = campaign(&["oracle_lp_variational"], &[2], 60, 111);
    assert_all_pass(&lp, "criterion 9 (lp variational)");
    let series = campaign(&["oracle_series"], &[2], 50, 112);
    assert_all_pass(&series, "criterion 9 (perturbation series)");
    println!(
        "ACCEPTANCE 9 PASS: oracle equivalences — S limit 1e-6 ({} rows), Renyi routes 1e-9 ({}), Lp variational 1e-4 ({}), series order-12 1e-8 ({})",
        s_limit.rows, renyi.rows, lp.rows, series.rows
    );
}

#[test]
fn criterion_10_proof_device_bounds() {
    let summary = campaign(
        &[
            "v_contraction",
            "gamma_strip",
            "gamma_petz_bound",
            "petz_defining_identity",
        ],
        &[2, 3],
        40,
        113,
    );
    assert_eq!(summary.rows, 320);
    assert_all_pass(&summary, "criterion 10");
    println!(
        "ACCEPTANCE 10 PASS: ||V|| <= 1+1e-10, Gamma strip norm <= 1+1e-9 on 20x20 grids, Petz-bound and defining-identity residuals <= 1e-8 over 200+ draws each"
    );
}

#[test]
fn criterion_11_determinism() {
    let render = |workers: usize, tag: &str| -> String {
        let dir = std::env::temp_dir().join(format!("petzlab_acc11_{tag}_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("campaign.csv");
        let cfg = CampaignConfig {
            suites: ["dpi", "improved_dpi", "cor1", "hirschman", "oracle_series"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            dims: vec![2, 3],
            trials: 10,
            seed: 424242,
            workers,
            out: Some(path.clone()),
            quadrature: QuadratureCfg::default(),
            ..CampaignConfig::default()
        };
        run_campaign(&cfg).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        text
    };
    let a = render(1, "w1a");
    let b = render(4, "w4");
    let c = render(1, "w1b");
    assert_eq!(a.as_bytes(), b.as_bytes(), "workers 1 vs 4 differ");
    assert_eq!(a.as_bytes(), c.as_bytes(), "repeat runs differ");
    println!("ACCEPTANCE 11 PASS: byte-identical CSV across two runs and worker counts {{1, 4}}");
}

#[test]
fn intro_order_variant_is_exercised() {
    // The swapped argument order from the introduction's display is run as
    // its own suite; it is NOT expected to pass (see the theorem order for
    // the proved bound), and the campaign correctly flags its violations.
    let summary = campaign(&["improved_dpi_intro"], &[2, 3], 30, 114);
    let s = &summary.suites[0];
    assert_eq!(s.trials, 60);
    assert!(
        s.passes < s.trials,
        "expected the intro-order variant to be violated somewhere"
    );
    println!(
        "ACCEPTANCE note: intro-order variant exercised on 60 instances; {} violations detected (worst gap {:.2e}) — consistent with the swapped display being a typo",
        s.trials - s.passes,
        s.worst_gap
    );
}

#[test]
fn full_default_campaign_within_budget() {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("petzlab_default_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = CampaignConfig {
        out: Some(dir.join("default_campaign.csv")),
        ..CampaignConfig::default()
    };
    let summary = run_campaign(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    for s in &summary.suites {
        assert_eq!(s.passes, s.trials, "default campaign: {} failed", s.suite);
    }
    std::fs::remove_dir_all(&dir).ok();
    assert!(
        elapsed <= 600.0,
        "default campaign took {elapsed:.0}s, budget 600s"
    );
    println!(
        "ACCEPTANCE final PASS: full default campaign ({} rows, {} suites) in {:.1}s (budget 600s)",
        summary.rows,
        summary.suites.len(),
        elapsed
    );
}
