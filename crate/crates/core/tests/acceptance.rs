//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cricshot_core::detection::{BBox, FrameAnnotations, ObjectLabel};
use cricshot_core::gate::{self, GateConfig};
use cricshot_core::geometry::{self, DeliveryType, PitchSpec, RowCalibration};
use cricshot_core::metrics::{self, ConfusionMatrix, Rate, Rounding};
use cricshot_core::scenario::{self, Scenario};
use cricshot_core::tracker::{self, BallCandidate, TrackPoint, TrackerConfig, Trajectory};
use cricshot_core::{run_segmentation, Backend, RunOptions, SegmenterConfig, SyntheticBackend};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn metric_regression() -> Outcome {
    let started = Instant::now();
    let mut details = Vec::new();
    for r in metrics::reference_counts() {
        let report = metrics::MetricsReport::new(r.counts, Rounding::Truncate);
        let (Rate::Percent(rec), Rate::Percent(prec)) = (report.recall, report.precision) else {
            return Err(format!("{}: undefined rate", r.name));
        };
        check(
            (rec - r.expected_recall).abs() <= 0.01 + 1e-9 && (prec - r.expected_precision).abs() <= 0.01 + 1e-9,
            format!(
                "{}: got {rec:.2}/{prec:.2}, want {:.2}/{:.2}",
                r.name, r.expected_recall, r.expected_precision
            ),
        )?;
        details.push(format!("{} {rec:.2}/{prec:.2}", r.name));
    }
    let secs = started.elapsed().as_secs_f64();
    check(secs < 1.0, format!("took {secs:.3} s"))?;
    Ok(format!("{} in {:.1} ms", details.join(", "), secs * 1000.0))
}

fn random_annotations(rng: &mut ChaCha8Rng, frame: u64, front: bool) -> FrameAnnotations {
    let bias: f64 = if front { 0.25 } else { -0.25 };
    let p = (rng.random_range(0.0f64..1.0) + bias).clamp(0.0, 1.0);
    let mut ann = FrameAnnotations::new(frame, p);
    for label in [ObjectLabel::Umpire, ObjectLabel::Pitch] {
        for _ in 0..rng.random_range(0..3) {
            let conf = (rng.random_range(0.0..0.6) + bias.max(0.0)).min(1.0);
            ann = ann.with(label, BBox::new(10.0, 10.0, 20.0, 30.0), conf);
        }
    }
    ann
}

fn dual_gate_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = GateConfig::default();
    let mut totals: BTreeMap<&str, ConfusionMatrix> = BTreeMap::new();
    for stream in 0..1000 {
        let n = rng.random_range(20..200);
        let mut cm: BTreeMap<&str, ConfusionMatrix> = BTreeMap::new();
        for i in 0..n {
            let label = rng.random_bool(0.5);
            let ann = random_annotations(&mut rng, i, label);
            for (name, v) in [
                ("classifier", gate::gate_classifier(&ann.score, &cfg)),
                ("umpire", gate::gate_umpire(&ann, &cfg)),
                ("pitch", gate::gate_pitch(&ann, &cfg)),
                ("either", gate::gate_either(&ann, &cfg)),
                ("dual", gate::gate_dual(&ann.score, &ann, &cfg)),
            ] {
                cm.entry(name).or_default().record(v.is_front, label);
            }
        }
        let dual = cm["dual"];
        let min_fn = cm["classifier"].fn_.min(cm["either"].fn_);
        let max_fp = ["classifier", "umpire", "pitch", "either"]
            .iter()
            .map(|k| cm[k].fp)
            .max()
            .unwrap();
        check(
            dual.fn_ <= min_fn && dual.fp >= max_fp,
            format!(
                "stream {stream}: dual fn {} fp {}, min fn {min_fn}, max fp {max_fp}",
                dual.fn_, dual.fp
            ),
        )?;
        for (k, v) in cm {
            *totals.entry(k).or_default() += v;
        }
    }
    let t = |k: &str| totals[k];
    Ok(format!(
        "1000 streams; pooled FN classifier/either/dual {}/{}/{}, FP {}/{}/{}",
        t("classifier").fn_,
        t("either").fn_,
        t("dual").fn_,
        t("classifier").fp,
        t("either").fp,
        t("dual").fp
    ))
}

fn segment(s: Arc<Scenario>) -> cricshot_core::SegmentRun {
    let backend = SyntheticBackend::new(s.clone());
    let cfg = SegmenterConfig {
        fps: s.fps(),
        ..SegmenterConfig::default()
    };
    run_segmentation(s.frames(), &backend, &cfg, RunOptions::default(), |_| {}).expect("segmentation runs")
}

fn boundary_detection() -> Outcome {
    let (mut cuts, mut frames) = (0, 0);
    for seed in 0..50 {
        let s = Arc::new(Scenario::new(scenario::random_cut_script(seed, 320, 180, 8)).map_err(|e| e.to_string())?);
        let want = s.cuts();
        let run = segment(s.clone());
        check(
            run.boundaries.len() == want.len(),
            format!("script {seed}: detected {:?}, scripted {:?}", run.boundaries, want),
        )?;
        for (got, cut) in run.boundaries.iter().zip(&want) {
            check(
                got.abs_diff(*cut) <= 1,
                format!("script {seed}: boundary {got} vs cut {cut}"),
            )?;
        }
        cuts += want.len();
        frames += s.len();
    }
    Ok(format!(
        "50 scripts, {cuts} cuts over {frames} frames, no misses or false boundaries"
    ))
}

fn replay_filtering() -> Outcome {
    let s = Arc::new(Scenario::new(scenario::liveness_script(4, 320, 180, 200)).map_err(|e| e.to_string())?);
    let want = s.expected_clips(25);
    let run = segment(s.clone());
    check(want.len() == 200, format!("corpus has {} clips", want.len()))?;
    check(
        run.clips.len() == want.len(),
        format!("emitted {} clips", run.clips.len()),
    )?;
    let mut replays = 0;
    for (c, w) in run.clips.iter().zip(&want) {
        check(
            (c.start, c.end, c.liveness) == (w.start, w.end, w.liveness),
            format!("clip {}..{} {:?}, expected {w:?}", c.start, c.end, c.liveness),
        )?;
        replays += (w.liveness == cricshot_core::Liveness::Replay) as usize;
    }
    Ok(format!(
        "200/200 clips correct ({replays} replays, {} live)",
        200 - replays
    ))
}

/// Falling-then-rising arc; returns per-frame rows and the bounce offset.
fn arc(rng: &mut ChaCha8Rng) -> (Vec<f64>, usize) {
    let down = rng.random_range(6..16);
    let up = rng.random_range(3..10);
    let step = rng.random_range(4.0..20.0);
    let r0 = rng.random_range(50.0..150.0);
    let mut rows: Vec<f64> = (0..=down).map(|i| r0 + step * i as f64).collect();
    let rb = rows[down];
    rows.extend((1..=up).map(|j| rb - 0.6 * step * j as f64));
    (rows, down)
}

fn track(rows: &[f64], col0: f64) -> Trajectory {
    let per_frame: Vec<_> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            (
                i as u64,
                vec![BallCandidate::new(i as u64, col0 + 2.0 * i as f64, r, 0.9)],
            )
        })
        .collect();
    tracker::build_trajectory(&per_frame, &TrackerConfig::default())
}

fn min_path_oracle(frames: &[Vec<BallCandidate>], max_jump: f64) -> Option<Vec<(f64, f64)>> {
    fn go(
        frames: &[Vec<BallCandidate>],
        max_jump: f64,
        path: &mut Vec<(f64, f64)>,
        cost: f64,
        best: &mut Option<(f64, Vec<(f64, f64)>)>,
    ) {
        let depth = path.len();
        if depth == frames.len() {
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, path.clone()));
            }
            return;
        }
        for c in &frames[depth] {
            let p = (c.center.col, c.center.row);
            let step = path
                .last()
                .map_or(0.0, |q: &(f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt());
            if step > max_jump {
                continue;
            }
            path.push(p);
            go(frames, max_jump, path, cost + step, best);
            path.pop();
        }
    }
    let mut best = None;
    go(frames, max_jump, &mut Vec::new(), 0.0, &mut best);
    best.map(|(_, p)| p)
}

fn ball_tracking() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let (rows, bounce) = arc(&mut rng);
        let t = track(&rows, 300.0);
        check(
            t.bounce_index() == Some(bounce),
            format!("noiseless case {case}: bounce {:?}, want {bounce}", t.bounce_index()),
        )?;
    }
    let mut worst = 0;
    for case in 0..200 {
        let (rows, bounce) = arc(&mut rng);
        let noisy: Vec<f64> = rows.iter().map(|r| r + rng.random_range(-2.0..=2.0)).collect();
        let t = track(&noisy, 300.0);
        let got = t.bounce_index().ok_or(format!("noisy case {case}: no bounce"))?;
        let err = got.abs_diff(bounce);
        worst = worst.max(err);
        check(err <= 1, format!("noisy case {case}: bounce {got}, want {bounce}"))?;
    }
    let cfg = TrackerConfig::default();
    for case in 0..100 {
        let n = rng.random_range(4..9);
        let mut ball = (rng.random_range(400.0..800.0), rng.random_range(100.0..300.0));
        let mut path = Vec::new();
        for _ in 0..n {
            path.push(ball);
            ball.0 += rng.random_range(-0.35..0.35) * cfg.max_jump_px;
            ball.1 += rng.random_range(0.0..0.5) * cfg.max_jump_px;
        }
        let mut frames = Vec::new();
        let mut decoys_all: Vec<(f64, f64)> = Vec::new();
        for (i, &p) in path.iter().enumerate() {
            let mut cands = vec![BallCandidate::new(i as u64, p.0, p.1, 0.9)];
            for _ in 0..rng.random_range(0..3) {
                // Rejection-sample a decoy well clear of the ball path and of other decoys.
                for _ in 0..1000 {
                    let d = (rng.random_range(0.0..1280.0), rng.random_range(0.0..720.0));
                    let clear =
                        |q: &(f64, f64)| ((d.0 - q.0).powi(2) + (d.1 - q.1).powi(2)).sqrt() > 1.5 * cfg.max_jump_px;
                    if path.iter().all(clear) && decoys_all.iter().all(clear) {
                        decoys_all.push(d);
                        cands.insert(
                            rng.random_range(0..=cands.len()),
                            BallCandidate::new(i as u64, d.0, d.1, rng.random_range(0.1..0.8)),
                        );
                        break;
                    }
                }
            }
            frames.push(cands);
        }
        let per_frame: Vec<_> = frames.iter().cloned().enumerate().map(|(i, c)| (i as u64, c)).collect();
        let greedy: Vec<(f64, f64)> = tracker::build_trajectory(&per_frame, &cfg)
            .points()
            .iter()
            .map(|p| (p.pos.col, p.pos.row))
            .collect();
        let oracle = min_path_oracle(&frames, cfg.max_jump_px).ok_or(format!("case {case}: oracle found no path"))?;
        check(
            greedy == oracle,
            format!("association case {case}: greedy {greedy:?} vs oracle {oracle:?}"),
        )?;
    }
    Ok(format!(
        "200 exact noiseless bounces; 200 noisy within ±{worst}; 100/100 association cases match brute force"
    ))
}

/// Rows of a tilted pitch strip rendered through a pinhole camera, mapped
/// back to metres by table lookup.
fn rendered_lookup(tilt_deg: f64, rows: usize) -> (Vec<f64>, f64) {
    let pitch = PitchSpec::default();
    let th = tilt_deg.to_radians();
    let length = pitch.crease_span_m();
    // Near (bowler) crease at depth d; the strip rises toward the batsman so
    // that the far crease sits at depth d / cos(tilt).
    let depth = length * th.sin() * th.cos() / (1.0 - th.cos());
    let image_y = |s: f64| length * s * th.cos() / (depth + length * s * th.sin());
    let far = image_y(1.0);
    let samples = 400_000;
    let mut sum = vec![0.0; rows];
    let mut count = vec![0usize; rows];
    for k in 0..samples {
        let s = (k as f64 + 0.5) / samples as f64;
        let r = ((image_y(s) / far) * rows as f64).floor() as usize;
        let r = r.min(rows - 1);
        sum[r] += s;
        count[r] += 1;
    }
    // Row 0 is the bowler crease (s = 0), the last row the batsman crease.
    let metres = (0..rows)
        .map(|r| pitch.crease_offset_m + (1.0 - sum[r] / count[r] as f64) * length)
        .collect();
    (metres, rows as f64)
}

fn scaled_ann(a: &FrameAnnotations, s: f64) -> FrameAnnotations {
    let mut out = FrameAnnotations::new(a.frame_index, a.score.front_prob);
    for d in &a.detections {
        out = out.with(d.label, d.bbox.scaled(s), d.confidence);
    }
    out
}

fn delivery_inputs(s: &Scenario) -> Option<(Trajectory, FrameAnnotations, FrameAnnotations)> {
    let backend = SyntheticBackend::new(Arc::new(Scenario::new(s.script().clone()).ok()?));
    let anns: Vec<FrameAnnotations> = (0..s.len())
        .map(|i| {
            backend
                .annotate(&cricshot_core::Frame::filled(i, 0.0, 1, 1, 0))
                .unwrap()
        })
        .collect();
    let per_frame: Vec<_> = anns
        .iter()
        .map(|a| (a.frame_index, tracker::candidates_from(a)))
        .collect();
    let traj = tracker::build_trajectory(&per_frame, &TrackerConfig::for_width(s.width()));
    let release = anns[traj.points().first()?.frame_index as usize].clone();
    let bounce = anns[traj.bounce()?.frame_index as usize].clone();
    Some((traj, release, bounce))
}

fn geometry_checks() -> Outcome {
    let pitch = PitchSpec::default();
    let mut worst_round_trip: f64 = 0.0;
    for tilt in [0.0, 10.0, 20.0, 30.0] {
        let calib = RowCalibration::from_pitch_height(600.0, 400.0, tilt);
        let near = geometry::row_to_distance(600.0, &calib, &pitch).map_err(|e| e.to_string())?;
        let far = geometry::row_to_distance(200.0, &calib, &pitch).map_err(|e| e.to_string())?;
        check(
            (near - 1.22).abs() < 1e-12 && (far - 18.90).abs() < 1e-12,
            format!("tilt {tilt}: endpoints {near} / {far}"),
        )?;
        for k in 0..=1000 {
            let d = 1.22 + 17.68 * k as f64 / 1000.0;
            let row = geometry::distance_to_row(d, &calib, &pitch).map_err(|e| e.to_string())?;
            let back = geometry::row_to_distance(row, &calib, &pitch).map_err(|e| e.to_string())?;
            worst_round_trip = worst_round_trip.max((back - d).abs());
        }
    }
    check(worst_round_trip <= 0.02, format!("round trip error {worst_round_trip}"))?;

    let corpus = scenario::delivery_corpus(214);
    let mut worst_scale: f64 = 0.0;
    let mut counts = BTreeMap::new();
    for (i, d) in corpus.iter().enumerate() {
        let s = Scenario::new(scenario::delivery_script(*d, i as u64)).map_err(|e| e.to_string())?;
        let (traj, release, bounce) = delivery_inputs(&s).ok_or(format!("delivery {i}: no bounce"))?;
        let est = geometry::classify_clip_delivery(&traj, &release, &bounce, &pitch)
            .map_err(|e| format!("delivery {i}: {e}"))?;
        *counts.entry(est.delivery).or_insert(0) += 1;
        if i < 30 {
            for scale in [0.5, 2.0, 3.0] {
                let points: Vec<TrackPoint> = traj
                    .points()
                    .iter()
                    .map(|p| TrackPoint::from((p.frame_index, p.pos.col * scale, p.pos.row * scale)))
                    .collect();
                let scaled = Trajectory::new(points).map_err(|e| e.to_string())?;
                let e2 = geometry::classify_clip_delivery(
                    &scaled,
                    &scaled_ann(&release, scale),
                    &scaled_ann(&bounce, scale),
                    &pitch,
                )
                .map_err(|e| e.to_string())?;
                worst_scale = worst_scale.max((e2.distance_m - est.distance_m).abs());
            }
        }
    }
    check(worst_scale < 1e-9, format!("scale changes distance by {worst_scale}"))?;
    let got = (
        counts.get(&DeliveryType::FullPitched).copied().unwrap_or(0),
        counts.get(&DeliveryType::GoodLength).copied().unwrap_or(0),
        counts.get(&DeliveryType::ShortPitched).copied().unwrap_or(0),
    );
    check(got == (80, 85, 49), format!("corpus classified {got:?}"))?;

    let (lookup, height) = rendered_lookup(20.0, 720);
    let calib = RowCalibration {
        batsman_crease_row: height,
        bowler_crease_row: 0.0,
        tilt_deg: 20.0,
    };
    let mut worst_render: f64 = 0.0;
    for (r, &want) in lookup.iter().enumerate() {
        let got = geometry::row_to_distance(r as f64 + 0.5, &calib, &pitch).map_err(|e| e.to_string())?;
        worst_render = worst_render.max((got - want).abs());
    }
    check(
        worst_render <= 0.02,
        format!("rendered lookup differs by {worst_render} m"),
    )?;
    Ok(format!(
        "endpoints exact; round trip ≤ {worst_round_trip:.1e} m; scale drift {worst_scale:.1e} m; \
         corpus {}/{}/{}; rendered 20° lookup within {worst_render:.1e} m",
        got.0, got.1, got.2
    ))
}

fn throughput() -> Outcome {
    // Warm caches and the thread pool.
    let warm = Arc::new(Scenario::new(scenario::random_cut_script(98, 640, 360, 2)).map_err(|e| e.to_string())?);
    segment(warm);
    let s = Arc::new(Scenario::new(scenario::random_cut_script(99, 640, 360, 16)).map_err(|e| e.to_string())?);
    let run = segment(s.clone());
    let perf = run.perf().ok_or("no frames")?;
    check(
        perf.fps >= 300.0 && perf.ms_per_frame <= 3.2,
        format!(
            "{:.1} fps, {:.3} ms/frame over {} frames",
            perf.fps, perf.ms_per_frame, perf.frames_processed
        ),
    )?;
    Ok(format!(
        "{:.0} fps, {:.3} ms/frame over {} frames of 640x360 (rendering included)",
        perf.fps, perf.ms_per_frame, perf.frames_processed
    ))
}

fn compression() -> Outcome {
    let s = Arc::new(scenario::bundled("match").map_err(|e| e.to_string())?);
    let scripted = s
        .script()
        .segments
        .iter()
        .filter(|g| g.scene.is_front())
        .map(|g| g.len())
        .sum::<u64>() as f64
        / s.len() as f64;
    let run = segment(s.clone());
    let got = run.clip_fraction();
    check(
        (scripted - 0.05).abs() < 1e-12,
        format!("script front share is {scripted}"),
    )?;
    check(
        (got - scripted).abs() <= 0.1 * scripted,
        format!("clips cover {:.3}% of frames", got * 100.0),
    )?;
    Ok(format!(
        "{} clips cover {:.2}% of {} frames (scripted 5.00%)",
        run.clips.len(),
        got * 100.0,
        run.frames
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("metric regression", metric_regression),
        ("dual-gate set algebra", dual_gate_algebra),
        ("boundary detection", boundary_detection),
        ("replay filtering", replay_filtering),
        ("ball tracking", ball_tracking),
        ("geometry", geometry_checks),
        ("throughput", throughput),
        ("compression", compression),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("[PASS] {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {} {name}: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
