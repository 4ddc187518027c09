use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vitalbeam::detect::{cfar_2d, spherical_to_cartesian, AngleGrid, RangeAzimuthMap};
use vitalbeam::dsp::{
    butterworth_bandpass, diff_phase, fit_circle_dc, spectrum_windowed, unwrap_phase, wrap_phase, BandpassSpec,
    Window,
};
use vitalbeam::posture::fit_ellipses;
use vitalbeam::sim::{render_silhouette, BodyPose, Posture, SceneModel};

const FS: f64 = 1.0 / 0.24;

fn small_map(power: Vec<f64>) -> RangeAzimuthMap {
    RangeAzimuthMap::new(power, 24, AngleGrid::symmetric(10.0, 1.0).unwrap()).unwrap()
}

fn exp_map() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 24 * 21).prop_map(|u| u.into_iter().map(|v| -(1.0 - v).ln()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unwrap_recovers_small_steps(start in -10.0f64..10.0, steps in prop::collection::vec(-3.1f64..3.1, 1..200)) {
        let x: Vec<f64> = std::iter::once(start)
            .chain(steps.iter().scan(start, |acc, s| { *acc += s; Some(*acc) }))
            .collect();
        let wrapped: Vec<f64> = x.iter().map(|&v| wrap_phase(v)).collect();
        let u = unwrap_phase(&wrapped);
        let offset = u[0] - x[0];
        prop_assert!(((offset / (2.0 * PI)).round() * 2.0 * PI - offset).abs() < 1e-9);
        for (a, b) in u.iter().zip(&x) {
            prop_assert!((a - b - offset).abs() < 1e-9);
        }
    }

    #[test]
    fn diff_inverts_cumsum(seq in prop::collection::vec(-5.0f64..5.0, 1..100)) {
        let cum: Vec<f64> = std::iter::once(0.0)
            .chain(seq.iter().scan(0.0, |acc, s| { *acc += s; Some(*acc) }))
            .collect();
        let d = diff_phase(&cum).unwrap();
        for (a, b) in d.iter().zip(&seq) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn designed_filters_are_stable(order in 1usize..8, lo in 0.05f64..1.5, width in 0.05f64..0.5) {
        let hi = (lo + width).min(FS / 2.0 - 0.01);
        prop_assume!(hi > lo);
        let sos = butterworth_bandpass(&BandpassSpec::new(order, lo, hi, FS)).unwrap();
        prop_assert!(sos.max_pole_radius() < 1.0);
    }

    #[test]
    fn rect_spectrum_parseval(seq in prop::collection::vec(-3.0f64..3.0, 2..150), pad in 0usize..100) {
        let mean = seq.iter().sum::<f64>() / seq.len() as f64;
        let energy: f64 = seq.iter().map(|v| (v - mean).powi(2)).sum();
        prop_assume!(energy > 1e-9);
        let s = spectrum_windowed(&seq, FS, seq.len() + pad, Window::Rect).unwrap();
        let total: f64 = s.mags.iter().sum();
        prop_assert!(((total - energy) / energy).abs() < 1e-6);
    }

    #[test]
    fn circle_fit_is_exact(ci in -50.0f64..50.0, cq in -50.0f64..50.0, r in 0.01f64..20.0,
                           start in -PI..PI, span in 0.5f64..6.2, n in 8usize..64) {
        let iq: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(ci, cq) + Complex64::from_polar(r, start + span * k as f64 / (n - 1) as f64))
            .collect();
        let fit = fit_circle_dc(&iq).unwrap();
        prop_assert!(fit.residual < 1e-9);
        prop_assert!((fit.center() - Complex64::new(ci, cq)).norm() < 1e-6 * (1.0 + r));
        prop_assert!((fit.radius - r).abs() < 1e-6 * (1.0 + r));
    }

    #[test]
    fn cfar_threshold_monotone(p in exp_map(), lo in 0.0f64..15.0, extra in 0.0f64..5.0) {
        let map = small_map(p);
        let loose = cfar_2d(&map, (1, 1), (2, 2), lo).unwrap();
        let strict = cfar_2d(&map, (1, 1), (2, 2), lo + extra).unwrap();
        prop_assert!(strict.iter().all(|c| loose.contains(c)));
    }

    #[test]
    fn cfar_scale_invariant(p in exp_map(), e in -20i32..20) {
        // power-of-two factors keep every comparison exact
        let k = 2f64.powi(e);
        let base = cfar_2d(&small_map(p.clone()), (1, 1), (2, 2), 6.0).unwrap();
        let scaled = cfar_2d(&small_map(p.iter().map(|v| v * k).collect()), (1, 1), (2, 2), 6.0).unwrap();
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn spherical_round_trip(r in 0.1f64..10.0, az in -1.5f64..1.5, el in -1.5f64..1.5, h in 0.0f64..2.0) {
        let p = spherical_to_cartesian(r, az, el, h);
        let dz = p[2] - h;
        let range = (p[0] * p[0] + p[1] * p[1] + dz * dz).sqrt();
        prop_assert!((range - r).abs() < 1e-12);
        prop_assert!((p[0].atan2(p[1]) - az).abs() < 1e-12);
        prop_assert!((dz.atan2(p[0].hypot(p[1])) - el).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ellipse_coverage_is_monotone(k in 0usize..3, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pose = BodyPose::jittered(Posture::ALL[k], &mut rng, 0.2, 0.3);
        let sil = render_silhouette(&SceneModel::from_pose(&pose, 2.0, 1.06));
        let mut last = f64::INFINITY;
        for m in 1..=9 {
            let cover = fit_ellipses(&sil.points, m, 0.0).unwrap();
            prop_assert!(cover.max_residual <= last + 1e-12, "{m} ellipses: {} > {last}", cover.max_residual);
            last = cover.max_residual;
        }
    }
}
