use sgalab_core::experiments::{pi_sweep, RegimeSetup};
use sgalab_core::ga::Population;
use sgalab_core::rng::replicate;
use sgalab_core::stats::{significantly_larger, Proportion};
use sgalab_core::tuner::{run_adaptive_ga, TunerPolicy};
use sgalab_core::LandscapeSpec;

#[test]
fn sweep_separates_the_regimes() {
    let rows = pi_sweep(128, 0.1, &[0.7, 1.5], 2.0, 600, 77).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(significantly_larger(
        &rows[0].quasispecies,
        &rows[1].quasispecies,
        0.95
    ));
    assert!(significantly_larger(
        &rows[1].disordered,
        &rows[0].disordered,
        0.95
    ));
}

#[test]
fn adaptive_control_keeps_the_master_more_often() {
    let m = 64;
    let f = LandscapeSpec::sharp_peak(m).unwrap();
    let initial = Population::sharp_peak_initial(m, &f).unwrap();
    let fixed = RegimeSetup::sharp_peak_ratio_two(0.8, m, 0.1, 2.0, 1, 0).unwrap();
    let start = (fixed.p_c, fixed.p_m);
    let h = fixed.horizon();
    let replicas = 800;
    let kept = |policy: TunerPolicy| {
        let runs = replicate(31, replicas, |_, rng| {
            let (rows, _) = run_adaptive_ga(&f, &initial, start, &policy, h, rng).unwrap();
            rows.iter().all(|r| r.n_master > 0)
        });
        Proportion::wilson(runs.iter().filter(|&&k| k).count(), replicas, 0.95)
    };
    let frozen = kept(TunerPolicy::frozen(start.0, start.1));
    let adaptive = kept(TunerPolicy::default());
    assert!(
        significantly_larger(&frozen, &adaptive, 0.95),
        "{frozen:?} vs {adaptive:?}"
    );
}
