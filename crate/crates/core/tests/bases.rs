mod common;

use common::*;
use ddmod::bases::{change_of_basis, read_ddmb, AfdmParams, Basis, SchemeId};
use ddmod::{FrameConfig, C};
use proptest::prelude::*;

#[test]
fn every_scheme_is_orthonormal_on_test_frames() {
    for &(m, n) in &[(13usize, 16usize), (4, 4), (3, 8), (1, 2), (2, 1)] {
        let cfg = FrameConfig::new(m, n, 1.0).unwrap();
        for scheme in SchemeId::ALL {
            if scheme == SchemeId::Otsm && !n.is_power_of_two() {
                continue;
            }
            let afdm = (scheme == SchemeId::Afdm).then(|| AfdmParams::new(3, 0.25));
            let b = Basis::generate(scheme, &cfg, afdm).unwrap();
            assert!(b.gram_matrix().identity_deviation().0 < 1e-10, "{scheme} on {m}x{n}");
        }
    }
}

#[test]
fn ocdm_and_dft_p_fdma_are_afdm_specializations() {
    let cfg = standard_frame();
    for params in [AfdmParams::ocdm(cfg.mn()), AfdmParams::dft_p_fdma(4, cfg.mn())] {
        let b = Basis::generate(SchemeId::Afdm, &cfg, Some(params)).unwrap();
        assert!(b.gram_matrix().identity_deviation().0 < 1e-10);
    }
    let ocdm = AfdmParams::ocdm(cfg.mn());
    assert_eq!(ocdm.delta(), None);
    assert!((ocdm.c1(cfg.mn()) - 1.0 / (2.0 * 208.0)).abs() < 1e-18);
}

#[test]
fn afdm_carrier_matches_closed_form() {
    let cfg = standard_frame();
    let mn = cfg.mn();
    let (delta, c2) = (8i64, 0.37);
    let b = Basis::generate(SchemeId::Afdm, &cfg, Some(AfdmParams::new(delta, c2))).unwrap();
    let c1 = delta as f64 / mn as f64;
    for i in [0usize, 5, 100, 207] {
        let col = b.carrier(i);
        for n in [0usize, 1, 77, 207] {
            let (nf, fi) = (n as f64, i as f64);
            let phase = 2.0 * std::f64::consts::PI * (c1 * nf * nf + c2 * fi * fi + nf * fi / mn as f64);
            let want = cis(phase) / (mn as f64).sqrt();
            assert!((col[n] - want).norm() < 1e-12, "i={i} n={n}");
        }
    }
}

#[test]
fn otsm_carrier_matches_walsh_hadamard_closed_form() {
    let cfg = standard_frame();
    let b = Basis::generate(SchemeId::Otsm, &cfg, None).unwrap();
    for i in [0usize, 14, 130, 207] {
        for n in 0..cfg.mn() {
            let want = if i % 13 == n % 13 {
                let sign = if ((i / 13) & (n / 13)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sign / 4.0
            } else {
                0.0
            };
            assert!((b.carrier(i)[n] - C::new(want, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn oddm_and_zak_change_of_basis_is_identity() {
    let cfg = standard_frame();
    let oddm = Basis::generate(SchemeId::Oddm, &cfg, None).unwrap();
    let zak = Basis::generate(SchemeId::ZakOtfs, &cfg, None).unwrap();
    assert!(change_of_basis(&oddm, &zak).unwrap().identity_deviation().0 < 1e-12);
    assert!(oddm.matrix().sub(zak.matrix()).unwrap().max_abs().0 < 1e-12);
}

#[test]
fn change_of_basis_links_columns() {
    let cfg = FrameConfig::new(3, 4, 1.0).unwrap();
    let a = Basis::generate(SchemeId::Ofdm, &cfg, None).unwrap();
    let b = Basis::generate(SchemeId::Afdm, &cfg, Some(AfdmParams::new(2, 0.1))).unwrap();
    let u = change_of_basis(&a, &b).unwrap();
    assert!(u.inner_gram().identity_deviation().0 < 1e-12);
    let rebuilt = a.matrix().matmul(&u).unwrap();
    assert!(rebuilt.sub(b.matrix()).unwrap().max_abs().0 < 1e-12);
}

#[test]
fn ddmb_header_layout() {
    let cfg = FrameConfig::new(2, 2, 1.0).unwrap();
    let b = Basis::generate(SchemeId::ZakOtfs, &cfg, None).unwrap();
    let mut buf = Vec::new();
    b.write_ddmb(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"DDMB");
    assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 4);
    assert!(buf[8..16].iter().all(|&v| v == 0));
    assert_eq!(buf.len(), 16 + 16 * 8);
    let back = read_ddmb(&buf[..]).unwrap();
    for n in 0..4 {
        for i in 0..4 {
            let want = b.matrix()[(n, i)];
            let got = back[(n, i)];
            assert!((got.re as f64 - want.re).abs() < 1e-7 && (got.im as f64 - want.im).abs() < 1e-7);
        }
    }
    assert!(read_ddmb(&b"XXXX"[..]).is_err());
}

#[test]
fn single_precision_bases_are_orthonormal() {
    let cfg = FrameConfig::<f32>::new(13, 16, 30e3).unwrap();
    for scheme in SchemeId::ALL {
        let afdm = (scheme == SchemeId::Afdm).then(|| AfdmParams::new(8, 0.0));
        let b = Basis::generate(scheme, &cfg, afdm).unwrap();
        assert!(b.gram_matrix().identity_deviation().0 < 1e-5, "{scheme}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn afdm_orthonormal_for_any_parameters(two_delta in -60i64..60, c2 in -10.0f64..10.0, m in 1usize..6, n in 1usize..6) {
        let cfg = FrameConfig::new(m, n, 1.0).unwrap();
        let params = AfdmParams::from_two_delta(two_delta, c2);
        let b = Basis::generate(SchemeId::Afdm, &cfg, Some(params)).unwrap();
        prop_assert!(b.gram_matrix().identity_deviation().0 < 1e-10);
    }

    #[test]
    fn residue_blocks_between_delay_doppler_bases(log_n in 0u32..4, m in 1usize..5) {
        let n = 1usize << log_n;
        let cfg = FrameConfig::new(m, n, 1.0).unwrap();
        let zak = Basis::generate(SchemeId::ZakOtfs, &cfg, None).unwrap();
        for other in [SchemeId::Otsm, SchemeId::Oddm] {
            let u = change_of_basis(&Basis::generate(other, &cfg, None).unwrap(), &zak).unwrap();
            prop_assert!(u.inner_gram().identity_deviation().0 < 1e-10);
            for i in 0..cfg.mn() {
                for j in 0..cfg.mn() {
                    if i % m != j % m {
                        prop_assert!(u[(i, j)].norm() < 1e-12);
                    }
                }
            }
        }
    }
}
