//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hge::cli::run_with;
use hge::features::{
    classify_palm_shape, classify_trajectory, estimate_frequency, extract_feature_vector, finger_spread,
    match_signature, palm_opposition, PalmShape, Spread, StageSignature, Trajectory,
};
use hge::frame_model::{parse_csv_stream, write_csv_stream};
use hge::stage_detector::{detect_stage2, Verdict};
use hge::synth::{
    generate, generate_primitive, perturb, GestureScript, OcclusionModel, PhaseKind, PhaseSpec, Perturbation,
    PrimitiveKind, PrimitiveParams,
};
use hge::{Config, Frame, HandObservation, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.try_normalize(1e-6) {
            return u;
        }
    }
}

fn random_plane(rng: &mut ChaCha8Rng) -> (Vec3, Vec3) {
    let a = random_unit(rng);
    let b = loop {
        let c = random_unit(rng);
        if let Some(b) = (c - a * a.dot(&c)).try_normalize(1e-3) {
            break b;
        }
    };
    (a, b)
}

fn opposition_math() -> Outcome {
    let cfg = Config::default();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        let theta = a.cross(&b).norm().atan2(a.dot(&b));
        // the sum of two unit vectors spans the chord of the supplement angle
        let chord = 2.0 * ((PI - theta) / 2.0).sin();
        let r = palm_opposition(&a, &b, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((r.resultant_magnitude - chord).abs());
        if r.facing != (chord < 0.4) && (chord - 0.4).abs() > 1e-9 {
            return Err(format!("facing disagrees with oracle at chord {chord}"));
        }
    }
    let elapsed = started.elapsed();
    let y = (1.0f64 - 0.04).sqrt();
    let at = palm_opposition(&Vec3::new(0.2, y, 0.0), &Vec3::new(0.2, -y, 0.0), &cfg).map_err(|e| e.to_string())?;
    let below = palm_opposition(&Vec3::new(0.199_999, (1.0f64 - 0.199_999f64.powi(2)).sqrt(), 0.0),
        &Vec3::new(0.199_999, -(1.0f64 - 0.199_999f64.powi(2)).sqrt(), 0.0), &cfg).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-9 && at.resultant_magnitude == 0.4 && !at.facing && below.facing && elapsed < Duration::from_secs(1),
        format!("max |err| {worst:.2e}, 0.4 -> facing={}, 0.399998 -> facing={}, {elapsed:.2?}", at.facing, below.facing),
    )
}

fn threshold_fidelity() -> Outcome {
    let cfg = Config::default();
    let flat = classify_palm_shape(0.3, &cfg).map_err(|e| e.to_string())?;
    let curved = classify_palm_shape(0.300001, &cfg).map_err(|e| e.to_string())?;
    let tips = |spacing: f64| -> Vec<Option<Vec3>> { (0..5).map(|k| Some(Vec3::x() * (k as f64 * spacing))).collect() };
    let open = finger_spread(&tips(17.0), &cfg).spread;
    let closed = finger_spread(&tips(16.9), &cfg).spread;
    check(
        flat == PalmShape::Flat && curved == PalmShape::Curved && open == Spread::Open && closed == Spread::Closed,
        format!("grab 0.3 -> {flat:?}, 0.300001 -> {curved:?}, 17 mm -> {open:?}, 16.9 mm -> {closed:?}"),
    )
}

fn frequency_sweep() -> Outcome {
    let cfg = Config::default();
    let started = Instant::now();
    let mut worst: (f64, f64, f64) = (0.0, 0.0, 0.0);
    for fps in [100.0, 110.0] {
        for step in 0..=14 {
            let f = 0.8 + 0.2 * step as f64;
            let params = PrimitiveParams { frequency_hz: f, fps, duration_s: 3.0, ..Default::default() };
            let (p, t) = generate_primitive(PrimitiveKind::Sinusoid1D, &params).map_err(|e| e.to_string())?;
            let est = estimate_frequency(&p, &t, &cfg)
                .map_err(|e| e.to_string())?
                .ok_or(format!("no frequency at {f} Hz"))?;
            if (est - f).abs() > worst.0 {
                worst = ((est - f).abs(), f, fps);
            }
        }
    }
    let elapsed = started.elapsed();
    check(
        worst.0 <= 0.1 && elapsed < Duration::from_secs(5),
        format!("max |err| {:.4} Hz (at {:.1} Hz, {} fps), {elapsed:.2?}", worst.0, worst.1, worst.2),
    )
}

fn trajectory_classifier() -> Outcome {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut circles = 0;
    let mut lines = 0;
    let mut noisy = 0;
    let noise = Normal::new(0.0, 2.0).unwrap();
    for i in 0..300 {
        let (axis, secondary) = random_plane(&mut rng);
        let center = Vec3::new(rng.random_range(-200.0..200.0), rng.random_range(100.0..400.0), rng.random_range(-200.0..200.0));
        let radius = match i / 100 {
            0 | 1 => rng.random_range(5.0..=200.0),
            _ => rng.random_range(50.0..=200.0),
        };
        let kind = if i / 100 == 1 { PrimitiveKind::Line } else { PrimitiveKind::Circle };
        let params = PrimitiveParams {
            frequency_hz: 1.0,
            amplitude_mm: radius,
            duration_s: 1.0,
            fps: 100.0,
            center,
            axis,
            secondary,
        };
        let (mut p, _) = generate_primitive(kind, &params).map_err(|e| e.to_string())?;
        if i / 100 == 2 {
            for q in &mut p {
                *q += Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            }
        }
        let class = classify_trajectory(&p, 1.0, &cfg).map_err(|e| e.to_string())?;
        match (i / 100, class) {
            (0, Trajectory::Circular) => circles += 1,
            (1, Trajectory::Linear) => lines += 1,
            (2, Trajectory::Circular) => noisy += 1,
            _ => {}
        }
    }
    check(
        circles == 100 && lines == 100 && noisy >= 95,
        format!("exact circles {circles}/100, lines {lines}/100, noisy circles {noisy}/100 circular"),
    )
}

fn stage2_oracle() -> Outcome {
    let cfg = Config::default();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut completed = 0;
    let mut worst_duration: f64 = 0.0;
    let mut ablations = [0usize; 5];
    let mut oracle_mismatch = 0;
    for seed in 0..50u64 {
        let hz = rng.random_range(0.8..=3.6);
        let rub_s = rng.random_range(2.0..=7.0);
        let sigma = rng.random_range(0.0..=2.0);
        let script = GestureScript::canonical(hz, rub_s).with_noise(sigma).with_seed(seed);
        let stream = generate(&script).map_err(|e| e.to_string())?;
        let report = detect_stage2(&stream.stream, &cfg).map_err(|e| e.to_string())?;
        if report.verdict == Verdict::Completed {
            completed += 1;
            let d = report.stage_duration_s.ok_or("completed without duration")?;
            worst_duration = worst_duration.max((d - rub_s).abs());
        } else {
            eprintln!("  seed {seed}: {hz:.3} Hz, {rub_s:.2} s, sigma {sigma:.2} not completed: {:?}", report.phase_timeline.last());
        }

        let mut not_facing = script.clone();
        not_facing.palms_facing = false;
        let mut no_rotation = script.clone();
        no_rotation.phases[2] = PhaseSpec::new(PhaseKind::Primitive, rub_s)
            .with_frequency(hz)
            .with_primitive(PrimitiveKind::Sinusoid1D);
        let short = GestureScript::canonical(hz, rng.random_range(1.0..=1.8)).with_noise(sigma).with_seed(seed);
        if script.expects_stage2_completion() != (report.verdict == Verdict::Completed) {
            oracle_mismatch += 1;
        }
        let variants = [
            (generate(&not_facing), Some(&not_facing)),
            (perturb(&stream, Perturbation::RemovePhaseFrames(PhaseKind::Approach), seed), None),
            (perturb(&stream, Perturbation::SuppressOcclusion, seed), None),
            (generate(&no_rotation), Some(&no_rotation)),
            (generate(&short), Some(&short)),
        ];
        for (k, (v, source)) in variants.into_iter().enumerate() {
            let v = v.map_err(|e| e.to_string())?;
            let verdict = detect_stage2(&v.stream, &cfg).map_err(|e| e.to_string())?.verdict;
            if verdict == Verdict::NotCompleted {
                ablations[k] += 1;
            }
            if source.is_some_and(|s| s.expects_stage2_completion() != (verdict == Verdict::Completed)) {
                oracle_mismatch += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    check(
        completed == 50
            && worst_duration <= 0.3
            && ablations.iter().all(|&n| n == 50)
            && oracle_mismatch == 0
            && elapsed < Duration::from_secs(30),
        format!(
            "completed {completed}/50, max |duration err| {worst_duration:.3} s, ablations not completed \
             [facing {}, approach {}, occlusion {}, rotation {}, short {}]/50, script oracle mismatches {oracle_mismatch}, {elapsed:.2?}",
            ablations[0], ablations[1], ablations[2], ablations[3], ablations[4]
        ),
    )
}

fn rub_frames(script: &GestureScript, kind: PhaseKind) -> Result<Vec<Frame>, String> {
    let ls = generate(script).map_err(|e| e.to_string())?;
    Ok(ls
        .stream
        .frames()
        .iter()
        .zip(&ls.labels)
        .filter(|(_, l)| l.kind == kind)
        .map(|(f, _)| f.clone())
        .collect())
}

fn signature_separation() -> Outcome {
    let cfg = Config::default();
    let (s2, s3) = (StageSignature::stage2(), StageSignature::stage3());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = [0usize; 2];
    let runs = 20;
    for seed in 0..runs {
        let hz2 = rng.random_range(1.0..=3.4);
        let mut stage2 = GestureScript::new(vec![PhaseSpec::new(PhaseKind::RubCircular, 3.0).with_frequency(hz2)])
            .with_noise(1.0)
            .with_seed(seed);
        stage2.occlusion_model = OcclusionModel::None;
        let hz3 = rng.random_range(1.2..=2.8);
        let stage3 = GestureScript::new(vec![PhaseSpec::new(PhaseKind::Stage3Linear, 3.0).with_frequency(hz3)])
            .with_noise(1.0)
            .with_seed(seed);
        let v2 = extract_feature_vector(&rub_frames(&stage2, PhaseKind::RubCircular)?, &cfg).map_err(|e| e.to_string())?;
        let v3 = extract_feature_vector(&rub_frames(&stage3, PhaseKind::Stage3Linear)?, &cfg).map_err(|e| e.to_string())?;
        if match_signature(&v2, &s2).matched && !match_signature(&v2, &s3).matched {
            ok[0] += 1;
        } else {
            eprintln!("  stage 2 window seed {seed}: {v2}");
        }
        if match_signature(&v3, &s3).matched && !match_signature(&v3, &s2).matched {
            ok[1] += 1;
        } else {
            eprintln!("  stage 3 window seed {seed}: {v3}");
        }
    }
    check(
        ok == [runs as usize; 2],
        format!("stage 2 windows {}/{runs}, stage 3 windows {}/{runs} match own signature only", ok[0], ok[1]),
    )
}

fn drop_robustness() -> Outcome {
    let cfg = Config::default();
    let canonical = generate(&GestureScript::canonical(2.0, 3.0)).map_err(|e| e.to_string())?;
    let mut completed = 0;
    for seed in 0..50 {
        let dropped = perturb(&canonical, Perturbation::DropFrames(0.05), seed).map_err(|e| e.to_string())?;
        if detect_stage2(&dropped.stream, &cfg).map_err(|e| e.to_string())?.verdict == Verdict::Completed {
            completed += 1;
        }
    }
    check(completed >= 45, format!("completed {completed}/50 with 5% frame drops"))
}

fn hands_close(a: &HandObservation, b: &HandObservation) -> bool {
    let near = |x: &Vec3, y: &Vec3| (x - y).amax() <= 1e-6;
    a.handedness == b.handedness
        && near(&a.palm_position, &b.palm_position)
        && near(&a.palm_normal, &b.palm_normal)
        && near(&a.palm_velocity, &b.palm_velocity)
        && (a.grab_strength - b.grab_strength).abs() <= 1e-6
        && a.fingertips.iter().zip(&b.fingertips).all(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => near(x, y),
            (None, None) => true,
            _ => false,
        })
}

fn csv_round_trip_and_exit_codes() -> Outcome {
    let script = GestureScript::canonical(2.3, 8.0).with_noise(1.7).with_seed(8);
    let stream = generate(&script).map_err(|e| e.to_string())?.stream;
    let (left, right) = write_csv_stream(&stream);
    let back = parse_csv_stream(&left, &right).map_err(|e| e.to_string())?;
    let lossless = stream.len() == 1000
        && back.len() == stream.len()
        && stream.frames().iter().zip(back.frames()).all(|(a, b)| {
            a.timestamp_ms == b.timestamp_ms
                && match (&a.left, &b.left) {
                    (Some(x), Some(y)) => hands_close(x, y),
                    (None, None) => true,
                    _ => false,
                }
                && match (&a.right, &b.right) {
                    (Some(x), Some(y)) => hands_close(x, y),
                    (None, None) => true,
                    _ => false,
                }
        });

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut codes = Vec::new();
    for (name, script) in [
        ("canonical", GestureScript::canonical(2.0, 3.0)),
        ("facing", GestureScript::new(vec![PhaseSpec::new(PhaseKind::FacingHold, 5.0)])),
    ] {
        let (l, r) = write_csv_stream(&generate(&script).map_err(|e| e.to_string())?.stream);
        let lp = dir.path().join(format!("{name}_l.csv"));
        let rp = dir.path().join(format!("{name}_r.csv"));
        std::fs::write(&lp, l).map_err(|e| e.to_string())?;
        std::fs::write(&rp, r).map_err(|e| e.to_string())?;
        let mut runs = Vec::new();
        for _ in 0..3 {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let args = ["hge", "detect", "--left", lp.to_str().unwrap(), "--right", rp.to_str().unwrap()];
            let code = run_with(args, &mut out, &mut err);
            runs.push((code, out));
        }
        if runs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{name}: detect output differs between runs"));
        }
        codes.push(runs[0].0);
    }
    check(
        lossless && codes == [0, 3],
        format!("1000-frame round trip lossless={lossless}, detect exit codes {codes:?} stable over 3 runs"),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("opposition math", opposition_math),
        ("threshold fidelity", threshold_fidelity),
        ("frequency estimator", frequency_sweep),
        ("trajectory classifier", trajectory_classifier),
        ("stage 2 end-to-end oracle", stage2_oracle),
        ("signature separation", signature_separation),
        ("frame-drop robustness", drop_robustness),
        ("csv round trip and exit codes", csv_round_trip_and_exit_codes),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
