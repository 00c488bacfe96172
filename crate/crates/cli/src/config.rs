//! `key = value` configuration files; command-line flags override them.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use avdiar::report::System;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub srt: Option<PathBuf>,
    pub shots: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub histograms: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub fps: f64,
    pub theta_cut: f64,
    pub theta_sim: f64,
    pub p: usize,
    pub min_cover: f64,
    pub alpha: f64,
    pub systems: BTreeSet<System>,
    pub seed: u64,
    pub jobs: Option<usize>,
    /// Generator settings as raw `synth.*` entries.
    pub synth: Vec<(String, String)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            srt: None,
            shots: None,
            frames: None,
            histograms: None,
            embeddings: None,
            reference: None,
            out: None,
            fps: 25.0,
            theta_cut: 0.5,
            theta_sim: 0.7,
            p: 2,
            min_cover: 0.5,
            alpha: 0.5,
            systems: System::ALL.into_iter().collect(),
            seed: 0,
            jobs: None,
            synth: Vec::new(),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .ok()
        .with_context(|| format!("`{key}` expects a number, got `{value}`"))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::default();
        cfg.apply_text(&text, base)
            .with_context(|| format!("in {}", path.display()))?;
        Ok(cfg)
    }

    /// Relative paths are taken from `base`.
    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", n + 1);
            };
            self.set(key.trim(), value.trim(), base)
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || Some(base.join(value));
        match key {
            "srt" => self.srt = path(),
            "shots" => self.shots = path(),
            "frames" => self.frames = path(),
            "histograms" => self.histograms = path(),
            "embeddings" => self.embeddings = path(),
            "reference" => self.reference = path(),
            "out" => self.out = path(),
            "fps" => self.fps = number(key, value)?,
            "theta_cut" => self.theta_cut = number(key, value)?,
            "theta_sim" => self.theta_sim = number(key, value)?,
            "p" => self.p = number(key, value)?,
            "min_cover" => self.min_cover = number(key, value)?,
            "alpha" => self.alpha = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "jobs" => self.jobs = Some(number(key, value)?),
            "systems" => {
                self.systems = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| System::from_name(s).with_context(|| format!("unknown system `{s}`")))
                    .collect::<Result<_>>()?;
            }
            k if k.starts_with("synth.") => self.synth.push((k["synth.".len()..].to_string(), value.to_string())),
            _ => bail!("unknown key `{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            bail!("fps must be positive, got {}", self.fps);
        }
        for (name, t) in [("theta_cut", self.theta_cut), ("theta_sim", self.theta_sim)] {
            if !(-1.0..=1.0).contains(&t) {
                bail!("{name} must lie in [-1, 1], got {t}");
            }
        }
        if !(0.0..=1.0).contains(&self.min_cover) {
            bail!("min_cover must lie in [0, 1], got {}", self.min_cover);
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            bail!("alpha must lie in [0, 1], got {}", self.alpha);
        }
        if self.p == 0 {
            bail!("p must be at least 1");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        Ok(())
    }
}
