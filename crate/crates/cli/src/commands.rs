use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use cricshot_core::metrics::{self, ConfusionMatrix, MetricsReport, PerfStats, Rounding};
use cricshot_core::scenario::{self, Scenario, ScenarioScript};
use cricshot_core::tracker::{self, candidates_from};
use cricshot_core::{
    classify_clip_delivery, run_segmentation, Clip, ClipTrajectory, DeliveryRecord, DeliveryType, FrameAnnotations,
    Liveness, RunOptions,
};

use crate::config::{Input, PipelineConfig};
use crate::GlobalArgs;

/// Command failure with its exit code: 1 for configuration, 2 at run time.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

type Res<T = ()> = Result<T, Failure>;

trait ConfigContext<T> {
    fn config(self) -> Res<T>;
}

impl<T, E: Into<anyhow::Error>> ConfigContext<T> for Result<T, E> {
    fn config(self) -> Res<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }
}

pub fn init_threads(threads: Option<usize>) -> Res {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Config(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().config()?;
    }
    Ok(())
}

fn load_config(g: &GlobalArgs) -> Res<PipelineConfig> {
    let mut cfg = PipelineConfig::load(g.config.as_deref()).config()?;
    cfg.apply(&g.overrides());
    Ok(cfg)
}

fn output(out: Option<&Path>) -> Res<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn require_file(path: &Path, what: &str) -> Res {
    if !path.is_file() {
        return Err(Failure::Config(anyhow!("{what} {} does not exist", path.display())));
    }
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Res<Vec<T>> {
    require_file(path, what)?;
    let reader = BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{}:{}: malformed {what} record", path.display(), i + 1))?,
        );
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(w: &mut dyn Write, item: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, item)?;
    w.write_all(b"\n")
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Also write each clip's frames as PGM images under this directory.
    #[arg(long)]
    export_frames: Option<PathBuf>,
    /// Frames annotated per batch.
    #[arg(long, default_value_t = 64)]
    batch: usize,
}

pub fn segment(g: &GlobalArgs, a: &SegmentArgs) -> Res {
    let cfg = load_config(g)?;
    let input = Input::resolve(&cfg).config()?;
    let backend = input.backend(&cfg).config()?;
    let seg_cfg = cfg.segmenter(input.fps(&cfg)).config()?;
    let mut out = output(g.out.as_deref())?;
    let mut write_err = None;
    let run = run_segmentation(
        input.frames(&cfg).config()?,
        &*backend,
        &seg_cfg,
        RunOptions {
            batch_size: a.batch.max(1),
            parallel: true,
        },
        |clip| {
            if write_err.is_none() {
                write_err = write_jsonl(&mut *out, clip).err();
            }
        },
    )
    .with_context(|| format!("{} backend run failed", backend.name()))?;
    if let Some(e) = write_err {
        return Err(anyhow::Error::from(e).context("cannot write manifest").into());
    }
    out.flush()?;
    for e in &run.backend_errors {
        eprintln!("warning: {e}; the open clip was dropped");
    }
    let live = run.clips.iter().filter(|c| c.liveness == Liveness::Live).count();
    eprintln!(
        "{} frames, {} boundaries, {} clips ({} live, {} replay or undetermined), {} backend errors",
        run.frames,
        run.boundaries.len(),
        run.clips.len(),
        live,
        run.clips.len() - live,
        run.backend_errors.len()
    );
    if let Some(dir) = &a.export_frames {
        export_frames(&input, &cfg, &run.clips, dir)?;
    }
    Ok(())
}

fn export_frames(input: &Input, cfg: &PipelineConfig, clips: &[Clip], dir: &Path) -> Res {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut next = clips.iter().peekable();
    for frame in input.frames(cfg)? {
        let frame = frame?;
        let i = frame.index();
        while next.peek().is_some_and(|c| c.end < i) {
            next.next();
        }
        let Some(clip) = next.peek().filter(|c| c.contains(i)) else {
            if next.peek().is_none() {
                break;
            }
            continue;
        };
        let sub = dir.join(format!("clip_{:04}", clip.id));
        std::fs::create_dir_all(&sub)?;
        image::save_buffer_with_format(
            sub.join(format!("{i:06}.pgm")),
            frame.luma(),
            frame.width(),
            frame.height(),
            image::ExtendedColorType::L8,
            image::ImageFormat::Pnm,
        )
        .with_context(|| format!("cannot write frame {i}"))?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct TrackArgs {
    /// Clip manifest written by `segment`.
    #[arg(long)]
    manifest: PathBuf,
}

pub fn track(g: &GlobalArgs, a: &TrackArgs) -> Res {
    let cfg = load_config(g)?;
    let clips: Vec<Clip> = read_jsonl(&a.manifest, "manifest")?;
    let input = Input::resolve(&cfg).config()?;
    let backend = input.backend(&cfg).config()?;
    let live: Vec<&Clip> = clips.iter().filter(|c| c.liveness == Liveness::Live).collect();
    let skipped = clips.len() - live.len();

    let mut per_clip: BTreeMap<u64, Vec<_>> = live.iter().map(|c| (c.id, Vec::new())).collect();
    let mut width = None;
    let last = live.iter().map(|c| c.end).max();
    for frame in input.frames(&cfg)? {
        let frame = frame?;
        let i = frame.index();
        if last.is_none_or(|l| i > l) {
            break;
        }
        width.get_or_insert(frame.width());
        for c in live.iter().filter(|c| c.contains(i)) {
            let candidates = match backend.annotate(&frame) {
                Ok(ann) => candidates_from(&ann),
                Err(e) => {
                    eprintln!("warning: {e}; treated as a frame without ball");
                    Vec::new()
                }
            };
            per_clip.get_mut(&c.id).expect("clip registered").push((i, candidates));
        }
    }
    let tracker_cfg = cfg.tracker(width.unwrap_or(1280)).config()?;
    let mut out = output(g.out.as_deref())?;
    let mut with_bounce = 0;
    for (clip, frames) in &per_clip {
        let trajectory = tracker::build_trajectory(frames, &tracker_cfg);
        with_bounce += trajectory.bounce().is_some() as usize;
        write_jsonl(
            &mut *out,
            &ClipTrajectory {
                clip: *clip,
                trajectory,
            },
        )?;
    }
    out.flush()?;
    eprintln!(
        "{} live clips tracked, {} with a bounce; {} non-live clips skipped",
        per_clip.len(),
        with_bounce,
        skipped
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Trajectories written by `track`.
    #[arg(long)]
    trajectories: PathBuf,
}

pub fn classify(g: &GlobalArgs, a: &ClassifyArgs) -> Res {
    let cfg = load_config(g)?;
    let pitch = cfg.pitch().config()?;
    let records: Vec<ClipTrajectory> = read_jsonl(&a.trajectories, "trajectory")?;
    let input = Input::resolve(&cfg).config()?;
    let backend = input.backend(&cfg).config()?;

    let needed: BTreeSet<u64> = records
        .iter()
        .filter_map(|r| {
            Some([
                r.trajectory.points().first()?.frame_index,
                r.trajectory.bounce()?.frame_index,
            ])
        })
        .flatten()
        .collect();
    let mut anns: BTreeMap<u64, Result<FrameAnnotations, String>> = BTreeMap::new();
    if let Some(&last) = needed.last() {
        for frame in input.frames(&cfg)? {
            let frame = frame?;
            let i = frame.index();
            if needed.contains(&i) {
                anns.insert(i, backend.annotate(&frame).map_err(|e| e.to_string()));
            }
            if i >= last {
                break;
            }
        }
    }

    let mut out = output(g.out.as_deref())?;
    let mut counts: BTreeMap<DeliveryType, usize> = BTreeMap::new();
    for r in &records {
        let t = &r.trajectory;
        let mut row = DeliveryRecord {
            clip: r.clip,
            bounce_frame: t.bounce().map(|b| b.frame_index),
            distance_m: None,
            delivery: None,
            zoom: None,
            status: String::new(),
        };
        row.status = match (t.points().first(), t.bounce()) {
            (None, _) => "no trajectory".into(),
            (Some(_), None) => "no bounce".into(),
            (Some(first), Some(bounce)) => {
                let fetch = |i: u64| -> Result<&FrameAnnotations, String> {
                    match anns.get(&i) {
                        Some(Ok(a)) => Ok(a),
                        Some(Err(e)) => Err(e.clone()),
                        None => Err(format!("frame {i} is not in the source")),
                    }
                };
                match fetch(first.frame_index).and_then(|rel| Ok((rel, fetch(bounce.frame_index)?))) {
                    Err(e) => e,
                    Ok((rel, bnc)) => match classify_clip_delivery(t, rel, bnc, &pitch) {
                        Ok(est) => {
                            row.distance_m = Some(est.distance_m);
                            row.delivery = Some(est.delivery);
                            row.zoom = Some(est.zoom_factor);
                            *counts.entry(est.delivery).or_default() += 1;
                            "ok".into()
                        }
                        Err(e) => e.to_string(),
                    },
                }
            }
        };
        write_jsonl(&mut *out, &row)?;
    }
    out.flush()?;
    let n = |t| counts.get(&t).copied().unwrap_or(0);
    eprintln!(
        "{} deliveries: {} full, {} good, {} short; {} unclassified",
        records.len(),
        n(DeliveryType::FullPitched),
        n(DeliveryType::GoodLength),
        n(DeliveryType::ShortPitched),
        records.len() - counts.values().sum::<usize>()
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RoundingArg {
    Truncate,
    HalfUp,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Counts as JSON ({"tp", "fp", "fn", "tn"}) or CSV with a tp,fp,fn,tn header.
    #[arg(long, conflicts_with_all = ["reference", "predictions"])]
    counts: Option<PathBuf>,
    /// Bundled reference counts: classifier, umpire, pitch, either or dual.
    #[arg(long, conflicts_with = "predictions")]
    reference: Option<String>,
    /// One 0/1 prediction per line.
    #[arg(long, requires = "labels")]
    predictions: Option<PathBuf>,
    /// One 0/1 label per line.
    #[arg(long, requires = "predictions")]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = RoundingArg::Truncate)]
    rounding: RoundingArg,
}

fn read_flags(path: &Path) -> Res<Vec<bool>> {
    require_file(path, "input")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let v = match line.trim() {
            "" => continue,
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(anyhow!("{}:{}: expected 0 or 1, found {other:?}", path.display(), i + 1).into()),
        };
        out.push(v);
    }
    Ok(out)
}

fn read_counts(path: &Path) -> Res<ConfusionMatrix> {
    require_file(path, "counts file")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return Ok(serde_json::from_str(trimmed).with_context(|| format!("{} is not a counts object", path.display()))?);
    }
    let mut lines = trimmed.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| anyhow!("{} is empty", path.display()))?
        .split(',')
        .map(str::trim)
        .collect();
    let values: Vec<&str> = lines
        .next()
        .ok_or_else(|| anyhow!("{} has no data row", path.display()))?
        .split(',')
        .map(str::trim)
        .collect();
    let field = |name: &str| -> anyhow::Result<u64> {
        let pos = header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| anyhow!("{} has no {name} column", path.display()))?;
        let v = values
            .get(pos)
            .ok_or_else(|| anyhow!("{} row is short", path.display()))?;
        v.parse().with_context(|| format!("{name} = {v:?} is not a count"))
    };
    Ok(ConfusionMatrix::new(
        field("tp")?,
        field("fp")?,
        field("fn")?,
        field("tn")?,
    ))
}

pub fn eval(g: &GlobalArgs, a: &EvalArgs) -> Res {
    let counts = if let Some(path) = &a.counts {
        read_counts(path)?
    } else if let Some(name) = &a.reference {
        metrics::reference_counts()
            .into_iter()
            .find(|r| &r.name == name)
            .map(|r| r.counts)
            .ok_or_else(|| Failure::Config(anyhow!("unknown reference {name:?}")))?
    } else if let (Some(p), Some(l)) = (&a.predictions, &a.labels) {
        let preds = read_flags(p)?;
        if preds.is_empty() {
            return Err(anyhow!("prediction file {} is empty", p.display()).into());
        }
        let labels = read_flags(l)?;
        metrics::confusion(&preds, &labels)?
    } else {
        return Err(Failure::Config(anyhow!(
            "give --counts, --reference, or --predictions with --labels"
        )));
    };
    let rounding = match a.rounding {
        RoundingArg::Truncate => Rounding::Truncate,
        RoundingArg::HalfUp => Rounding::HalfUp,
    };
    let report = MetricsReport::new(counts, rounding);
    let mut out = output(g.out.as_deref())?;
    match a.format {
        Format::Csv => writeln!(out, "{}\n{}", MetricsReport::CSV_HEADER, report.csv_row())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Frames in the generated synthetic run (ignored with --source).
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 360)]
    height: u32,
    #[arg(long, default_value_t = 64)]
    batch: usize,
}

#[derive(Serialize)]
struct Machine {
    os: &'static str,
    arch: &'static str,
    logical_cpus: usize,
    worker_threads: usize,
    frame_width: u32,
    frame_height: u32,
    backend: &'static str,
}

#[derive(Serialize)]
struct BenchReport {
    source: String,
    perf: PerfStats,
    machine: Machine,
}

fn bench_script(frames: u64, width: u32, height: u32) -> ScenarioScript {
    let shots = (frames / 40 + 1) as usize;
    let mut script = scenario::random_cut_script(0xBE7C, width, height, shots);
    script.name = "bench".into();
    script.segments.retain(|s| s.start < frames);
    if let Some(last) = script.segments.last_mut() {
        last.end = frames - 1;
    }
    script
}

pub fn bench(g: &GlobalArgs, a: &BenchArgs) -> Res {
    let mut cfg = load_config(g)?;
    if a.frames == 0 {
        return Err(Failure::Config(anyhow!("--frames must be positive")));
    }
    let (input, label) = if cfg.source.path.is_some() {
        let label = cfg.source.path.clone().unwrap_or_default();
        (Input::resolve(&cfg).config()?, label)
    } else {
        let s = Scenario::new(bench_script(a.frames, a.width, a.height)).config()?;
        cfg.backend.kind.get_or_insert_with(|| "synthetic".into());
        (Input::Scenario(Arc::new(s)), format!("synthetic {} frames", a.frames))
    };
    let backend = input.backend(&cfg).config()?;
    let seg_cfg = cfg.segmenter(input.fps(&cfg)).config()?;
    let mut dims = None;
    let frames = input.frames(&cfg)?.inspect(|f| {
        if let (None, Ok(f)) = (&dims, f) {
            dims = Some((f.width(), f.height()));
        }
    });
    let opts = RunOptions {
        batch_size: a.batch.max(1),
        parallel: true,
    };
    let run = run_segmentation(frames, &*backend, &seg_cfg, opts, |_| {})?;
    let perf = run.perf().ok_or_else(|| anyhow!("the source produced no frames"))?;
    let (w, h) = dims.unwrap_or((0, 0));
    let report = BenchReport {
        source: label,
        perf,
        machine: Machine {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            worker_threads: rayon::current_num_threads(),
            frame_width: w,
            frame_height: h,
            backend: backend.name(),
        },
    };
    let mut out = output(g.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct ScenariosArgs {
    /// Print this scenario's script instead of the list.
    #[arg(long)]
    show: Option<String>,
}

pub fn scenarios(g: &GlobalArgs, a: &ScenariosArgs) -> Res {
    let mut out = output(g.out.as_deref())?;
    if let Some(name) = &a.show {
        let script = scenario::bundled_script(name).config()?;
        writeln!(out, "{}", serde_json::to_string_pretty(&script)?)?;
    } else {
        for name in scenario::bundled_names() {
            let s = scenario::bundled(name)?;
            writeln!(out, "{name}\t{} frames\t{}", s.len(), s.script().description)?;
        }
    }
    out.flush()?;
    Ok(())
}
