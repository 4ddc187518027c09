use std::time::Instant;

use vitalbeam::detect::FrameProcessor;
use vitalbeam::sim::{build_virtual_array, synthesize_capture, Noise, Posture, RadarConfig, SceneModel};

#[test]
fn body_clouds_are_sparse_but_present() {
    let cfg = RadarConfig::default();
    let geom = build_virtual_array(&cfg).unwrap();
    for posture in Posture::ALL {
        let scene = SceneModel::preset(posture);
        let t0 = Instant::now();
        let cube = synthesize_capture(&cfg, &geom, &scene, 50, Noise::from_snr_db(20.0, 11)).unwrap();
        let t_sim = t0.elapsed();
        let proc = FrameProcessor::new(&cfg, &geom, scene.radar_height);
        let t1 = Instant::now();
        let counts: Vec<usize> = (0..50).map(|i| proc.process(cube.frame(i), i).unwrap().len()).collect();
        let t_proc = t1.elapsed();
        let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
        println!("{posture:?}: points/frame {lo}..{hi} (sim {t_sim:?}, proc {t_proc:?})");
        let cloud = proc.process(cube.frame(0), 0).unwrap();
        for p in cloud.points.iter().take(40) {
            println!("   {:.3} {:.3} {:.3} {:.3e}", p.x, p.y, p.z, p.power);
        }
        assert!(lo >= 5 && hi <= 60, "{posture:?}: {lo}..{hi}");
    }
}
