use ddmod::experiments::*;
use ddmod::properties::Outcome;
use ddmod::{Error, SchemeId};

fn small(channel: ChannelKind, trials: usize, snr: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        channel,
        trials,
        snr_grid_db: snr.to_vec(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn parse_accepts_ranges_inf_and_comments() {
    let cfg = ExperimentConfig::parse(
        "# link setup\ntrials = 7\nsnr_grid_db = 10:2.5:25\nchannel = on-grid\nafdm_delta = 16 # other valid choice\nschemes = ofdm, zak-otfs\n",
    )
    .unwrap();
    assert_eq!(cfg.trials, 7);
    assert_eq!(cfg.snr_grid_db, vec![10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0]);
    assert_eq!(cfg.channel, ChannelKind::OnGrid);
    assert_eq!(cfg.afdm.delta(), Some(16));
    assert_eq!(cfg.schemes, vec![SchemeId::Ofdm, SchemeId::ZakOtfs]);

    let cfg = ExperimentConfig::parse("snr_grid_db = 0, inf").unwrap();
    assert_eq!(cfg.snr_grid_db, vec![0.0, f64::INFINITY]);
}

#[test]
fn parse_rejects_bad_input() {
    for text in [
        "bogus = 1",
        "trials = 0",
        "trials = many",
        "snr_grid_db = 5:1:0",
        "snr_grid_db = -inf",
        "csi_mode = psychic",
        "m",
        "pilot_index = 208",
        "n = 12\nschemes = otsm",
        "alpha = -1",
    ] {
        assert!(ExperimentConfig::parse(text).is_err(), "{text}");
    }
    assert!(matches!(
        ExperimentConfig::parse("pilot_index = 999"),
        Err(Error::PilotIndex { index: 999, dim: 208 })
    ));
}

#[test]
fn default_config_matches_simulation_setup() {
    let cfg = ExperimentConfig::default();
    assert_eq!((cfg.m, cfg.n, cfg.delta_f), (13, 16, 30e3));
    assert_eq!(cfg.vmax, 815.0);
    assert_eq!(cfg.afdm.delta(), Some(8));
    assert_eq!(cfg.snr_grid_db.len(), 11);
    assert_eq!(cfg.pilot(&cfg.frame::<f64>().unwrap()), 110);
}

#[test]
fn identity_channel_gives_unit_energy_everywhere() {
    let rows = run_energy_profile(&small(ChannelKind::Identity, 1, &[0.0])).unwrap();
    assert_eq!(rows.len(), 5 * 208);
    for r in &rows {
        assert!((r.value - 1.0).abs() < 1e-10, "{:?}", r);
    }
}

#[test]
fn csv_output_is_deterministic_per_seed() {
    let cfg = small(ChannelKind::VehA, 3, &[5.0, 15.0]);
    let render = |cfg: &ExperimentConfig| {
        let mut buf = Vec::new();
        write_rows_csv(&run_ber(cfg).unwrap(), &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = render(&cfg);
    assert_eq!(a, render(&cfg));
    assert!(a.starts_with(CSV_HEADER));
    assert_eq!(a.lines().count(), 1 + 5 * 2);
    let other = ExperimentConfig { master_seed: 2, ..cfg };
    assert_ne!(a, render(&other));
}

#[test]
fn energy_rows_are_deterministic_and_seed_dependent() {
    let cfg = ExperimentConfig::default();
    let a = run_energy_profile(&cfg).unwrap();
    assert_eq!(a, run_energy_profile(&cfg).unwrap());
    let b = run_energy_profile(&ExperimentConfig { master_seed: 9, ..cfg }).unwrap();
    assert_ne!(a, b);
}

#[test]
fn noiseless_identity_link_is_error_free() {
    let cfg = small(ChannelKind::Identity, 3, &[f64::INFINITY]);
    let perfect = run_link::<f64>(&cfg, CsiMode::Perfect).unwrap();
    assert!(perfect.ber.iter().all(|c| c.mean == 0.0));
    let estimated = run_link::<f64>(&cfg, CsiMode::Estimated).unwrap();
    for c in estimated.ber.iter().filter(|c| c.scheme != SchemeId::Ofdm) {
        assert_eq!(c.mean, 0.0, "{}", c.scheme);
    }
}

#[test]
fn on_grid_noiseless_estimation_is_exact_for_delay_doppler_schemes() {
    let cfg = small(ChannelKind::OnGrid, 4, &[f64::INFINITY]);
    let stats = run_link::<f64>(&cfg, CsiMode::Estimated).unwrap();
    for scheme in [SchemeId::Afdm, SchemeId::Oddm, SchemeId::Otsm, SchemeId::ZakOtfs] {
        assert!(stats.nmse_cell(scheme, f64::INFINITY).unwrap().mean < 1e-6, "{scheme}");
    }
    assert!(stats.nmse_cell(SchemeId::Ofdm, f64::INFINITY).unwrap().mean > 1e-2);
}

#[test]
fn ber_falls_with_snr_and_perfect_csi_is_no_worse() {
    let cfg = small(ChannelKind::VehA, 40, &[0.0, 10.0, 20.0]);
    let perfect = run_link::<f64>(&cfg, CsiMode::Perfect).unwrap();
    let estimated = run_link::<f64>(&cfg, CsiMode::Estimated).unwrap();
    for scheme in SchemeId::ALL {
        let p: Vec<f64> = cfg.snr_grid_db.iter().map(|&s| perfect.ber_cell(scheme, s).unwrap().mean).collect();
        assert!(p.windows(2).all(|w| w[1] <= w[0]), "{scheme}: {p:?}");
        for &s in &cfg.snr_grid_db {
            let (a, b) = (perfect.ber_cell(scheme, s).unwrap(), estimated.ber_cell(scheme, s).unwrap());
            assert!(a.mean <= b.mean + 3.0 * (a.std_err.powi(2) + b.std_err.powi(2)).sqrt(), "{scheme} at {s}");
        }
    }
    assert!(perfect.nmse.is_empty());
    assert_eq!(estimated.nmse.len(), 5 * 3);
}

#[test]
fn single_precision_link_runs() {
    let cfg = small(ChannelKind::VehA, 4, &[10.0, 20.0]);
    let stats = run_link::<f32>(&cfg, CsiMode::Estimated).unwrap();
    assert!(stats.ber.iter().all(|c| (0.0..=1.0).contains(&c.mean)));
    assert!(stats.nmse.iter().all(|c| c.mean.is_finite()));
}

#[test]
fn cell_stats_z_score() {
    let a = CellStats { scheme: SchemeId::Ofdm, snr_db: 0.0, mean: 0.3, std_err: 0.03, trials: 10 };
    let b = CellStats { scheme: SchemeId::Afdm, snr_db: 0.0, mean: 0.1, std_err: 0.04, trials: 10 };
    assert!((a.z_score(&b) - 4.0).abs() < 1e-12);
    assert!((b.z_score(&a) - 4.0).abs() < 1e-12);
}

#[test]
fn micro_frame_property_suite_passes_for_delay_doppler_schemes() {
    let cfg = ExperimentConfig {
        m: 1,
        n: 2,
        afdm: ddmod::AfdmParams::new(1, 0.0),
        ..ExperimentConfig::default()
    };
    let verdicts = run_property_suite(&cfg).unwrap();
    for v in verdicts.iter().filter(|v| v.scheme != Some(SchemeId::Ofdm)) {
        assert_ne!(v.outcome, Outcome::Fail, "{v}");
    }
    for row in table_one(&verdicts).iter().filter(|r| r.scheme != SchemeId::Ofdm) {
        assert!(row.non_selective && row.predictable && row.equivalent, "{row:?}");
    }
}

#[test]
fn table_csv_layout() {
    let rows = table_one(&run_property_suite(&ExperimentConfig { property_channels: 2, ..Default::default() }).unwrap());
    let mut buf = Vec::new();
    write_table_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text,
        "scheme,non_selective,predictable,equivalent\nOFDM,no,no,no\nAFDM,yes,yes,yes\nODDM,yes,yes,yes\nOTSM,yes,yes,yes\nZak-OTFS,yes,yes,yes\n"
    );
}

#[test]
fn afdm_sweep_matches_gcd_rule_on_small_frame() {
    let cfg = ExperimentConfig { m: 3, n: 8, ..Default::default() };
    for (delta, measured, predicted) in afdm_delta_sweep(&cfg, 1..=12).unwrap() {
        assert_eq!(measured, predicted, "delta {delta}");
    }
}
