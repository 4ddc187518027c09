//! The nine end-to-end acceptance criteria; one PASS/FAIL line each is
//! written to stderr.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vitalbeam::detect::{capon_elevation, cfar_2d, cfar_2d_naive, AngleGrid, RangeAzimuthMap, RangeCube};
use vitalbeam::dsp::{butterworth_bandpass, BandpassSpec, RangeFft, Window};
use vitalbeam::pipeline::{read_summary, run_e2e, PipelineConfig, ScenarioPreset};
use vitalbeam::posture::{
    benchmark_split, chest_from_keypoints, chest_from_point, cnn_loss, synthetic_dataset, train,
    Architecture, DatasetSpec, InputTensor, Keypoints, Mode, Network, TrainConfig, N_KEYPOINTS,
};
use vitalbeam::sim::{
    build_virtual_array, synthesize_capture, synthesize_frame, BodyPart, Noise, Oscillation, Posture,
    RadarConfig, SceneModel,
};
use vitalbeam::vitals::{compare_ra_rae, BinSeries, DcMode, VitalsConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

const FS: f64 = 1.0 / 0.24;

/// Scene with only the chest scatterer, moved to `position`.
fn chest_only(position: [f64; 3], motion: bool) -> SceneModel {
    let mut scene = SceneModel::preset(Posture::Bad);
    scene.scatterers.retain(|s| s.part == BodyPart::Chest);
    scene.scatterers[0].position = position;
    if !motion {
        scene.breathing_amplitude = 0.0;
        scene.heart_amplitude = 0.0;
        scene.rbm_amplitude = 0.01e-3;
    }
    scene
}

fn rate_recovery() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for posture in Posture::ALL {
        let preset = ScenarioPreset::new(posture);
        let cfg = PipelineConfig::from_preset(preset, 7);
        let dir = tempfile::tempdir().unwrap();
        let t = Instant::now();
        let run = run_e2e(&cfg, dir.path()).and_then(|_| read_summary(dir.path()));
        let secs = t.elapsed().as_secs_f64();
        match run {
            Ok(s) => {
                let good = s.rae.br_error_hz.abs() <= 0.021 && s.rae.hr_error_hz.abs() <= 0.021 && secs < 120.0;
                ok &= good;
                parts.push(format!(
                    "{} br {:.4}/{:.2} hr {:.4}/{:.2} in {:.0}s",
                    posture.name(),
                    s.rae.br_hz,
                    preset.breathing_hz,
                    s.rae.hr_hz,
                    preset.heart_hz,
                    secs
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{} failed: {e}", posture.name()));
            }
        }
    }
    verdict(ok, parts.join("; "))
}

fn ra_vs_rae() -> Verdict {
    let cfg = RadarConfig::default();
    let geom = build_virtual_array(&cfg).unwrap();
    let mut wins = 0;
    let mut deltas = Vec::new();
    for seed in 0..20u64 {
        let mut scene = SceneModel::preset(Posture::Bad);
        scene.rbm_seed = seed;
        let oscillation = Oscillation {
            amplitude: 0.5e-3,
            frequency: 0.9,
            phase: 0.0,
        };
        scene.add_interferer(-20.0, 0.2, oscillation).unwrap();
        let chest = chest_from_point(scene.chest().unwrap().position, scene.radar_height).unwrap();
        let cube = synthesize_capture(&cfg, &geom, &scene, 200, Noise::from_snr_db(20.0, 1000 + seed)).unwrap();
        let cmp = compare_ra_rae(&cube, &geom, 0..200, chest, &VitalsConfig::default()).unwrap();
        if cmp.delta_papr_heart_db > 0.0 {
            wins += 1;
        }
        deltas.push(cmp.delta_papr_heart_db);
    }
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    verdict(
        wins >= 18,
        format!("Δpapr_heart > 0 in {wins}/20 seeds (mean {mean:+.3} dB)"),
    )
}

fn cnn_benchmark() -> Verdict {
    let cfg = RadarConfig::default();
    let spec = DatasetSpec::default();
    let (train_refs, test_refs) = benchmark_split(50, 200, 150);
    let train_set = synthetic_dataset(&cfg, &spec, &train_refs, 11).unwrap();
    let test_set = synthetic_dataset(&cfg, &spec, &test_refs, 11).unwrap();
    let tc = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    let (net, _) = train(&Architecture::default(), &train_set, &tc).unwrap();
    let h = spec.radar_height;
    let (mut kp, mut az, mut el, mut worst) = (0.0, 0.0, 0.0, 0.0f64);
    for (x, truth) in &test_set {
        let pred = net.predict_keypoints(x).unwrap();
        // independent per-keypoint Euclidean distance
        kp += (0..N_KEYPOINTS)
            .map(|i| {
                let (a, b) = (pred.coords[i], truth.coords[i]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
            })
            .sum::<f64>()
            / N_KEYPOINTS as f64;
        let p = chest_from_keypoints(&pred, h).unwrap();
        let t = chest_from_keypoints(truth, h).unwrap();
        az += (p.azimuth - t.azimuth).abs();
        el += (p.elevation - t.elevation).abs();
        worst = worst.max((p.azimuth - t.azimuth).abs()).max((p.elevation - t.elevation).abs());
    }
    let n = test_set.len() as f64;
    let (kp, az, el) = (kp / n, az / n, el / n);
    verdict(
        kp < 0.10 && az < 3.0 && el < 3.0,
        format!(
            "mean keypoint error {:.1} cm, chest az {az:.2}° el {el:.2}° (worst {worst:.2}°) on {} test frames",
            kp * 100.0,
            test_set.len()
        ),
    )
}

fn gradient_oracle() -> Verdict {
    let mut net = Network::init(&Architecture::reduced(), 21).unwrap();
    for t in net.tensors_mut() {
        if t.len() <= 51 {
            t.iter_mut().enumerate().for_each(|(i, v)| *v = 0.04 + 0.01 * (i % 7) as f64);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let x = InputTensor {
        side: 8,
        data: (0..2 * 64).map(|_| rng.gen_range(0.0..1.0)).collect(),
    };
    let truth = Keypoints {
        coords: std::array::from_fn(|_| [rng.gen_range(-0.5..0.5), rng.gen_range(1.5..2.5), rng.gen_range(0.0..2.0)]),
    };
    let (_, grad) = net.gradients(&x, &truth, Mode::Eval).unwrap();
    let loss = |n: &Network| cnn_loss(&n.predict(&x).unwrap(), &truth).0;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for ti in 0..net.tensors().len() {
        for k in 0..net.tensors()[ti].1.len() {
            let mut plus = net.clone();
            plus.tensors_mut()[ti][k] += h;
            let mut minus = net.clone();
            minus.tensors_mut()[ti][k] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let an = grad.tensors()[ti].1[k];
            worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-6));
            count += 1;
        }
    }
    verdict(worst < 1e-4, format!("max relative error {worst:.2e} over {count} parameters"))
}

/// Reference CA-CFAR written out cell by cell.
fn reference_cfar(p: &[f64], h: usize, w: usize, guard: usize, train: usize, thr_db: f64) -> Vec<(usize, usize)> {
    let scale = 10f64.powf(thr_db / 10.0);
    let outer = (guard + train) as i64;
    let mut hits = Vec::new();
    for i in 0..h as i64 {
        for j in 0..w as i64 {
            let (mut sum, mut n) = (0.0, 0usize);
            for di in -outer..=outer {
                for dj in -outer..=outer {
                    let (r, c) = (i + di, j + dj);
                    if r < 0 || c < 0 || r >= h as i64 || c >= w as i64 {
                        continue;
                    }
                    if di.abs() <= guard as i64 && dj.abs() <= guard as i64 {
                        continue;
                    }
                    sum += p[r as usize * w + c as usize];
                    n += 1;
                }
            }
            let v = p[i as usize * w + j as usize];
            if n > 0 && v > 0.0 && v >= sum / n as f64 * scale {
                hits.push((i as usize, j as usize));
            }
        }
    }
    hits
}

fn cfar_equivalence() -> Verdict {
    let (h, w) = (64, 121);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut total = 0;
    for _ in 0..100 {
        let mut power: Vec<f64> = (0..h * w).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        for _ in 0..rng.gen_range(0..6) {
            let k = rng.gen_range(0..h * w);
            power[k] *= rng.gen_range(10.0..100.0);
        }
        let map = RangeAzimuthMap::new(power.clone(), h, AngleGrid::default()).unwrap();
        let fast = cfar_2d(&map, (8, 8), (8, 8), 10.0).unwrap();
        let reference = reference_cfar(&power, h, w, 8, 8, 10.0);
        let naive = cfar_2d_naive(&map, (8, 8), (8, 8), 10.0).unwrap();
        total += reference.len();
        if fast != reference || naive != reference {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches}/100 maps differ; {total} reference detections"),
    )
}

fn filter_correctness() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (lo, hi) in [(0.1, 0.5), (0.8, 1.7)] {
        let sos = butterworth_bandpass(&BandpassSpec::new(5, lo, hi, FS)).unwrap();
        let db = |f: f64| 20.0 * sos.magnitude(f).log10();
        let (a, b) = (db(lo), db(hi));
        let r = sos.max_pole_radius();
        ok &= (a + 3.0).abs() <= 0.1 && (b + 3.0).abs() <= 0.1 && r < 1.0;
        parts.push(format!("[{lo}, {hi}] Hz edges {a:.3}/{b:.3} dB, max |pole| {r:.4}"));
    }
    verdict(ok, parts.join("; "))
}

/// Worst |recovered − injected| offset over 100 seeds × 12 channels, and
/// the number of rejected fits, for a breathing chest at `chest`.
fn dc_offset_error(chest: [f64; 3]) -> (f64, usize) {
    let cfg = RadarConfig::default();
    let geom = build_virtual_array(&cfg).unwrap();
    let n = cfg.adc_samples_per_chirp;
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scene = chest_only(chest, true);
        scene.rbm_seed = seed;
        scene.iq_offsets = (0..cfg.n_virtual())
            .map(|_| {
                let (m, a) = (rng.gen_range(0.0..0.5), rng.gen_range(-PI..PI));
                [m * a.cos(), m * a.sin()]
            })
            .collect();
        let rest = (chest[0].powi(2) + chest[1].powi(2) + (chest[2] - scene.radar_height).powi(2)).sqrt();
        let cube = synthesize_capture(&cfg, &geom, &scene, 16, Noise::from_snr_db(20.0, 500 + seed)).unwrap();
        let bin = (rest / cfg.range_resolution()).round() as usize;
        // DFT gain of the offset tone (beat frequency of the chest's rest
        // range, fast time referenced to the window center) at `bin`
        let fb = 2.0 * cfg.chirp_slope * rest / 3.0e8;
        let c = (n as f64 - 1.0) / 2.0;
        let gain: Complex64 = (0..n)
            .map(|k| {
                let t = 2.0 * PI * fb * (k as f64 - c) / cfg.adc_sample_rate;
                Complex64::from_polar(1.0, t - 2.0 * PI * (bin * k) as f64 / n as f64)
            })
            .sum();
        let mut series = BinSeries::extract(&cube, 0..16, bin, Window::Rect).unwrap();
        for (ch, fix) in series.compensate(DcMode::Capture).iter().enumerate() {
            match &fix.fit {
                Some(f) => {
                    let o = Complex64::new(scene.iq_offsets[ch][0], scene.iq_offsets[ch][1]);
                    worst = worst.max((f.center() / gain - o).norm());
                }
                None => rejected += 1,
            }
        }
    }
    (worst, rejected)
}

fn dc_compensation() -> Verdict {
    let (worst, rejected) = dc_offset_error([0.0, 2.0, 1.06]);
    // a chest between range bins is reported only: breathing then also
    // modulates the bin amplitude and the arc stops being a circle
    let (raised, _) = dc_offset_error([0.0, 2.0, 1.27]);
    verdict(
        worst < 1e-2 && rejected == 0,
        format!(
            "2.0 m broadside: worst offset error {worst:.2e} over 100 seeds × 12 channels, {rejected} fits rejected \
             (chest 0.21 m above boresight: {raised:.2e})"
        ),
    )
}

fn geometry_oracle() -> Verdict {
    let cfg = RadarConfig::default();
    let geom = build_virtual_array(&cfg).unwrap();
    let h = 1.06;
    let cube = synthesize_capture(&cfg, &geom, &chest_only([0.0, 2.0, h], false), 1, Noise::NONE).unwrap();
    let bin = vitalbeam::vitals::select_range_bin(&cube, 0..1, Window::Rect).unwrap();
    let plan = RangeFft::new(cfg.adc_samples_per_chirp, Window::Rect);
    let el = 15f64.to_radians();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let scene = chest_only([0.0, 2.0 * el.cos(), h + 2.0 * el.sin()], false);
        let frame = synthesize_frame(&cfg, &geom, &scene, 0, Noise::from_snr_db(20.0, seed)).unwrap();
        let rc = RangeCube::from_frame(frame.as_ref(), &plan);
        let est = capon_elevation(&rc, &geom, 23, 0.0, &AngleGrid::default()).unwrap();
        worst = worst.max((est - 15.0).abs());
    }
    verdict(
        bin == 23 && worst <= 3.0,
        format!("2.0 m broadside → bin {bin}; +15° Capon worst error {worst:.1}° over 20 seeds"),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let mut cfg = PipelineConfig::from_preset(ScenarioPreset::new(Posture::Oar), 42);
    cfg.radar.chirps_per_frame = 32;
    cfg.pipeline.frames_total = 100;
    cfg.pipeline.frames_train = 30;
    cfg.pipeline.estimate_frames = 10;
    cfg.train.epochs = 3;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_e2e(&cfg, a.path()).unwrap();
    run_e2e(&cfg, b.path()).unwrap();
    let (fa, fb) = (snapshot(a.path()), snapshot(b.path()));
    let differing: Vec<_> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.clone())
        .collect();
    let same = fa.len() == fb.len() && differing.is_empty();
    verdict(
        same,
        format!("{} artifacts compared, differing: {:?}", fa.len(), differing),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("end-to-end rate recovery", rate_recovery),
        ("RA vs RAE heart PAPR direction", ra_vs_rae),
        ("CNN keypoint benchmark", cnn_benchmark),
        ("gradient oracle", gradient_oracle),
        ("CFAR oracle equivalence", cfar_equivalence),
        ("band-pass filter correctness", filter_correctness),
        ("DC compensation", dc_compensation),
        ("geometry oracle", geometry_oracle),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        // straight to stderr so the lines survive the harness's capture
        let _ = writeln!(
            std::io::stderr(),
            "[{}] {} {name}: {} ({:.1}s)",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
