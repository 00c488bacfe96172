use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use avdiar::dialogue_patterns::{build_scenes, extract_patterns, scene_stats, shot_labels, write_scenes};
use avdiar::evaluation::{align_similarity_lists, cut_frames, score_shot_cuts, score_shot_similarity, DetectionScore};
use avdiar::ingest::{
    load_embeddings, load_reference, load_shot_table, load_srt, subtitles_to_utterances, write_shot_table,
};
use avdiar::model::{Shot, Utterance};
use avdiar::pipeline::{diarize as run_diarize, write_partitions, DiarizeOptions, EpisodeInput};
use avdiar::shot_analysis::{
    analyse, histograms_from_ppm_dir, load_bh30, write_bh30, BlockHistogramFrame, HistogramGeometry, Thresholds,
};
use avdiar::synth::{generate_episode, write_corpus, GenConfig};

use crate::config::PipelineConfig;
use crate::Overrides;

/// Config file first, then flags.
pub fn resolve(o: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = match &o.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    macro_rules! take {
        ($($field:ident),*) => {$(
            if let Some(v) = &o.$field {
                cfg.$field = v.clone().into();
            }
        )*};
    }
    take!(out, srt, shots, frames, histograms, embeddings, reference);
    take!(fps, theta_cut, theta_sim, alpha, min_cover, seed);
    if o.jobs.is_some() {
        cfg.jobs = o.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .with_context(|| format!("no {what} given (flag --{what} or config key `{what}`)"))
}

fn out_dir(cfg: &PipelineConfig) -> Result<&Path> {
    let dir = required(&cfg.out, "out")?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn pool(cfg: &PipelineConfig) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.jobs {
        b = b.num_threads(n);
    }
    b.build().context("starting worker threads")
}

fn thresholds(cfg: &PipelineConfig) -> Result<Thresholds> {
    Ok(Thresholds::new(cfg.theta_cut, cfg.theta_sim)?)
}

fn load_histograms(cfg: &PipelineConfig) -> Result<Vec<BlockHistogramFrame>> {
    let geometry = HistogramGeometry::default();
    match (&cfg.frames, &cfg.histograms) {
        (Some(dir), _) => {
            histograms_from_ppm_dir(dir, &geometry).with_context(|| format!("frames in {}", dir.display()))
        }
        (None, Some(file)) => load_bh30(file).with_context(|| format!("histograms in {}", file.display())),
        (None, None) => bail!("no frames given (flag --frames or --histograms)"),
    }
}

/// Shot table from `shots`, else detected from frames or histograms.
fn load_shots(cfg: &PipelineConfig) -> Result<(Vec<Shot>, bool)> {
    if let Some(path) = &cfg.shots {
        return Ok((
            load_shot_table(path).with_context(|| format!("shots in {}", path.display()))?,
            false,
        ));
    }
    let frames = load_histograms(cfg)?;
    Ok((analyse(&frames, &thresholds(cfg)?, cfg.fps)?.shots, true))
}

fn load_utterances(cfg: &PipelineConfig) -> Result<Vec<Utterance>> {
    let path = required(&cfg.srt, "srt")?;
    let entries = load_srt(path).with_context(|| format!("subtitles in {}", path.display()))?;
    Ok(subtitles_to_utterances(&entries))
}

pub fn shots(cfg: &PipelineConfig, write_histograms: Option<&Path>) -> Result<()> {
    let frames = pool(cfg)?.install(|| load_histograms(cfg))?;
    if let Some(path) = write_histograms {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_bh30(BufWriter::new(f), &frames).with_context(|| format!("writing {}", path.display()))?;
    }
    let th = thresholds(cfg)?;
    let analysis = pool(cfg)?.install(|| analyse(&frames, &th, cfg.fps))?;
    let dir = out_dir(cfg)?;
    write(&dir.join("shots.csv"), &write_shot_table(&analysis.shots))?;
    let labels = analysis
        .shots
        .iter()
        .filter_map(|s| s.label)
        .map(|l| l.0 + 1)
        .max()
        .unwrap_or(0);
    println!(
        "{} frames, {} shots, {} labels, {} similar pairs",
        frames.len(),
        analysis.shots.len(),
        labels,
        analysis.pairs.len()
    );
    Ok(())
}

pub fn patterns(cfg: &PipelineConfig) -> Result<()> {
    let (shots, detected) = load_shots(cfg)?;
    let utterances = match &cfg.srt {
        Some(_) => load_utterances(cfg)?,
        None => Vec::new(),
    };
    let patterns = extract_patterns(&shot_labels(&shots)?);
    let scenes = build_scenes(&shots, &patterns, &utterances, cfg.min_cover)?;
    let mut text = String::new();
    for (a, b) in &patterns {
        let _ = writeln!(text, "pattern {a} {b}");
    }
    let stats = scene_stats(&scenes, &utterances);
    let _ = writeln!(
        text,
        "{} scenes, {:.2} s speech per scene, {:.1}% of speech covered",
        stats.scenes, stats.mean_speech_secs, stats.coverage_pct
    );
    print!("{text}");
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join("scenes.csv"), &write_scenes(&scenes))?;
        if detected {
            write(&dir.join("shots.csv"), &write_shot_table(&shots))?;
        }
    }
    Ok(())
}

pub fn diarize(cfg: &PipelineConfig) -> Result<()> {
    let utterances = load_utterances(cfg)?;
    let embeddings_path = required(&cfg.embeddings, "embeddings")?;
    let embeddings =
        load_embeddings(embeddings_path).with_context(|| format!("embeddings in {}", embeddings_path.display()))?;
    let reference = match &cfg.reference {
        Some(path) => {
            Some(load_reference(path, &utterances).with_context(|| format!("reference in {}", path.display()))?)
        }
        None => None,
    };
    let workers = pool(cfg)?;
    let (shots, detected) = workers.install(|| load_shots(cfg))?;
    let opts = DiarizeOptions {
        p: cfg.p,
        min_cover: cfg.min_cover,
        alpha: cfg.alpha,
    };
    let input = EpisodeInput {
        shots: &shots,
        utterances: &utterances,
        embeddings: &embeddings,
        reference: reference.as_ref(),
    };
    let mut result = workers.install(|| run_diarize(&input, &opts))?;
    result.report.retain_systems(|s| cfg.systems.contains(&s));

    let dir = out_dir(cfg)?;
    let text = result.report.to_text();
    write(&dir.join("report.txt"), &text)?;
    write(&dir.join("report.kv"), &result.report.to_kv())?;
    write(&dir.join("partitions.csv"), &write_partitions(&result.outcomes))?;
    let scenes: Vec<_> = result.outcomes.iter().map(|o| o.scene.clone()).collect();
    write(&dir.join("scenes.csv"), &write_scenes(&scenes))?;
    if detected {
        write(&dir.join("shots.csv"), &write_shot_table(&shots))?;
    }
    let traces = dir.join("traces");
    std::fs::create_dir_all(&traces).with_context(|| format!("creating {}", traces.display()))?;
    for o in &result.outcomes {
        if let Some(t) = o.trace() {
            write(&traces.join(format!("scene_{:03}.txt", o.scene.id)), &t)?;
        }
    }
    print!("{text}");
    Ok(())
}

fn detection_line(name: &str, s: &DetectionScore) -> String {
    format!(
        "{name:<10} hyp={:<5} ref={:<5} tp={:<5} precision={:.4} recall={:.4} f1={:.4}\n",
        s.hypothesised, s.expected, s.true_positives, s.precision, s.recall, s.f1
    )
}

pub fn score_shots(cfg: &PipelineConfig, hyp: &Path, reference: &Path, tolerance: usize) -> Result<()> {
    let h = load_shot_table(hyp).with_context(|| format!("shots in {}", hyp.display()))?;
    let r = load_shot_table(reference).with_context(|| format!("shots in {}", reference.display()))?;
    let cuts = score_shot_cuts(&cut_frames(&h, cfg.fps), &cut_frames(&r, cfg.fps), tolerance);
    let similarity = score_shot_similarity(
        &align_similarity_lists(&h, &r),
        &avdiar::evaluation::similarity_lists(&r),
    );
    let text = detection_line("cuts", &cuts) + &detection_line("similarity", &similarity);
    print!("{text}");
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join("shot_scores.txt"), &text)?;
    }
    Ok(())
}

fn apply_synth_key(g: &mut GenConfig, key: &str, value: &str) -> Result<()> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse()
            .ok()
            .with_context(|| format!("`synth.{key}` expects a number, got `{v}`"))
    }
    match key {
        "scenes" => g.scenes = num(key, value)?,
        "min_utterances" => g.min_utterances = num(key, value)?,
        "max_utterances" => g.max_utterances = num(key, value)?,
        "separation" => g.separation = num(key, value)?,
        "p_async" => g.p_async = num(key, value)?,
        "p_outlier" => g.p_outlier = num(key, value)?,
        "outlier_distance" => g.outlier_distance = num(key, value)?,
        "p_single_speaker" => g.p_single_speaker = num(key, value)?,
        "p_filler_speech" => g.p_filler_speech = num(key, value)?,
        "dim" => g.dim = num(key, value)?,
        "with_frames" => {
            g.with_frames = value
                .parse()
                .ok()
                .context("`synth.with_frames` expects true or false")?
        }
        _ => bail!("unknown key `synth.{key}`"),
    }
    Ok(())
}

pub fn synth(cfg: &PipelineConfig, scenes: Option<usize>, with_frames: bool, noisy: bool) -> Result<()> {
    let mut g = if noisy {
        GenConfig::noisy_regime(cfg.seed)
    } else {
        GenConfig {
            seed: cfg.seed,
            ..GenConfig::default()
        }
    };
    g.fps = cfg.fps;
    for (k, v) in &cfg.synth {
        apply_synth_key(&mut g, k, v)?;
    }
    if let Some(n) = scenes {
        g.scenes = n;
    }
    g.with_frames |= with_frames;
    let episode = generate_episode(&g)?;
    let dir = out_dir(cfg)?;
    write_corpus(&episode, dir)?;
    println!(
        "{} scenes, {} shots, {} utterances, {} frames written to {}",
        episode.scenes.len(),
        episode.shots.len(),
        episode.utterances.len(),
        if g.with_frames { episode.frame_count() } else { 0 },
        dir.display()
    );
    Ok(())
}
