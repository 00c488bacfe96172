//! Seeded synthetic episodes with ground truth.
//!
//! Each dialogue scene alternates the shots of two fresh labels; filler shots
//! with one-off labels separate scenes. Video errors come from utterances
//! filmed on the listener (`p_async`), audio errors from overlapping speaker
//! clusters and atypical vectors (`p_outlier`). The two sources are drawn
//! independently.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use image::{Rgb, RgbImage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::ingest::{
    serialize_srt, write_embeddings, write_reference, write_shot_table, EmbeddingTable, ReferenceMap, SubtitleEntry,
};
use crate::model::{FrameRange, Label, Modality, Partition, Shot, SpeakerId, TimeSpan, UttId, Utterance};
use crate::shot_analysis::{frame_to_ms, ms_to_frame, write_ppm};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid generator setting: {0}")]
    InvalidConfig(String),
    #[error("{what} of size {size} exceeds the limit {limit}")]
    SizeGuardExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = SynthError> = std::result::Result<T, E>;

pub const FRAME_WIDTH: u32 = 48;
pub const FRAME_HEIGHT: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub scenes: usize,
    pub min_utterances: usize,
    pub max_utterances: usize,
    /// Distance between the two speaker centers in units of the
    /// within-speaker standard deviation.
    pub separation: f64,
    /// Probability an utterance is filmed on the listener's shot.
    pub p_async: f64,
    /// Probability an utterance's vector is drawn away from both centers.
    pub p_outlier: f64,
    /// Distance of atypical vectors from the speakers' midpoint, in
    /// within-speaker standard deviations.
    pub outlier_distance: f64,
    pub p_single_speaker: f64,
    /// Probability a filler shot carries an off-scene utterance.
    pub p_filler_speech: f64,
    pub dim: usize,
    pub fps: f64,
    pub with_frames: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenes: 8,
            min_utterances: 6,
            max_utterances: 12,
            separation: 8.0,
            p_async: 0.0,
            p_outlier: 0.0,
            outlier_distance: 6.0,
            p_single_speaker: 0.0,
            p_filler_speech: 0.5,
            dim: 20,
            fps: 25.0,
            with_frames: false,
        }
    }
}

impl GenConfig {
    /// Noise levels that put audio-only and video-only DER around a quarter
    /// of the speech, with independent errors.
    pub fn noisy_regime(seed: u64) -> Self {
        Self {
            seed,
            scenes: 10,
            min_utterances: 8,
            max_utterances: 14,
            separation: 3.8,
            p_async: 0.26,
            p_outlier: 0.1,
            outlier_distance: 4.0,
            p_single_speaker: 0.1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        for (name, p) in [
            ("p_async", self.p_async),
            ("p_outlier", self.p_outlier),
            ("p_single_speaker", self.p_single_speaker),
            ("p_filler_speech", self.p_filler_speech),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return bad(format!("separation = {} must be positive", self.separation));
        }
        if !(self.outlier_distance >= 0.0 && self.outlier_distance.is_finite()) {
            return bad(format!(
                "outlier_distance = {} must be non-negative",
                self.outlier_distance
            ));
        }
        if self.min_utterances == 0 || self.min_utterances > self.max_utterances {
            return bad(format!(
                "utterance range {}..={} is empty",
                self.min_utterances, self.max_utterances
            ));
        }
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if !(self.fps >= 4.0 && self.fps.is_finite()) {
            return bad(format!("fps = {} is below 4", self.fps));
        }
        Ok(())
    }
}

/// Ground truth of one generated dialogue scene.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedScene {
    pub labels: (Label, Label),
    pub utterances: Vec<UttId>,
    pub speakers: Vec<SpeakerId>,
    /// Utterances filmed on the listener.
    pub async_utterances: Vec<UttId>,
    pub outliers: Vec<UttId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub fps: f64,
    pub shots: Vec<Shot>,
    pub utterances: Vec<Utterance>,
    pub subtitles: Vec<SubtitleEntry>,
    pub embeddings: EmbeddingTable,
    pub reference: ReferenceMap,
    pub scenes: Vec<PlantedScene>,
    pub frames: Option<Vec<RgbImage>>,
}

impl Episode {
    pub fn frame_count(&self) -> usize {
        self.shots.last().and_then(|s| s.frames).map_or(0, |f| f.last + 1)
    }

    /// Reference clustering of a planted scene, one cluster per speaker in
    /// speaker-name order.
    pub fn reference_partition(&self, scene: usize) -> Partition {
        let planted = &self.scenes[scene];
        let mut by_speaker: BTreeMap<&SpeakerId, Vec<UttId>> = BTreeMap::new();
        for id in &planted.utterances {
            by_speaker.entry(&self.reference[id]).or_default().push(*id);
        }
        Partition::new(scene, Modality::Fused, by_speaker.into_values().collect())
    }
}

struct ShotPlan {
    start_ms: i64,
    look: usize,
}

struct UttPlan {
    span: TimeSpan,
    speaker: SpeakerId,
    vector: Vec<f64>,
}

struct Builder<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    t: i64,
    shots: Vec<ShotPlan>,
    utts: Vec<UttPlan>,
    looks: usize,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian(rng, dim);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| a * x + y).collect()
}

impl Builder<'_> {
    fn new_look(&mut self) -> usize {
        self.looks += 1;
        self.looks - 1
    }

    fn cut(&mut self, at_ms: i64, look: usize) {
        self.shots.push(ShotPlan { start_ms: at_ms, look });
    }

    fn filler(&mut self) {
        let dur = self.rng.random_range(1500..=4000);
        let look = self.new_look();
        self.cut(self.t, look);
        if self.rng.random_bool(self.cfg.p_filler_speech) {
            let center = gaussian(&mut self.rng, self.cfg.dim)
                .into_iter()
                .map(|x| 10.0 * x)
                .collect::<Vec<_>>();
            let noise = gaussian(&mut self.rng, self.cfg.dim);
            self.utts.push(UttPlan {
                span: TimeSpan::new(self.t + 300, self.t + dur - 300).expect("filler is long enough"),
                speaker: "narrator".into(),
                vector: axpy(1.0, &noise, &center),
            });
        }
        self.t += dur;
    }

    fn scene(&mut self, k: usize) -> (Vec<usize>, PlantedScene) {
        let cfg = self.cfg;
        let rng = &mut self.rng;
        let names = [format!("s{k}a"), format!("s{k}b")];
        let single = rng.random_bool(cfg.p_single_speaker);
        let n = rng.random_range(cfg.min_utterances..=cfg.max_utterances);
        let speaker: Vec<usize> = (0..n).map(|i| if single { 0 } else { i % 2 }).collect();
        let filmed: Vec<usize> = speaker
            .iter()
            .map(|&s| if rng.random_bool(cfg.p_async) { 1 - s } else { s })
            .collect();

        let axis = unit(rng, cfg.dim);
        let mid: Vec<f64> = gaussian(rng, cfg.dim).into_iter().map(|x| 3.0 * x).collect();
        let centers = [
            axpy(cfg.separation / 2.0, &axis, &mid),
            axpy(-cfg.separation / 2.0, &axis, &mid),
        ];

        let looks = [self.looks, self.looks + 1];
        self.looks += 2;
        let first_utt = self.utts.len();
        let mut outliers = Vec::new();

        let rng = &mut self.rng;
        let lead = rng.random_range(1000..=2000);
        let mut cuts = vec![(self.t, looks[1 - filmed[0]]), (self.t + lead, looks[filmed[0]])];
        let mut cursor = self.t + lead + rng.random_range(150..=400);
        for i in 0..n {
            let dur = rng.random_range(1500..=2500);
            let vector = if rng.random_bool(cfg.p_outlier) {
                outliers.push(i);
                let dir = unit(rng, cfg.dim);
                axpy(1.0, &gaussian(rng, cfg.dim), &axpy(cfg.outlier_distance, &dir, &mid))
            } else {
                axpy(1.0, &gaussian(rng, cfg.dim), &centers[speaker[i]])
            };
            self.utts.push(UttPlan {
                span: TimeSpan::new(cursor, cursor + dur).expect("positive duration"),
                speaker: names[speaker[i]].clone(),
                vector,
            });
            cursor += dur;
            if i + 1 < n {
                let gap = rng.random_range(300..=900);
                if filmed[i + 1] != filmed[i] {
                    cuts.push((cursor + gap / 2, looks[filmed[i + 1]]));
                }
                cursor += gap;
            }
        }
        let trail = cursor + rng.random_range(150..=400);
        cuts.push((trail, looks[1 - filmed[n - 1]]));
        self.t = trail + rng.random_range(1000..=2000);
        for (at, look) in cuts {
            self.cut(at, look);
        }

        let planted = PlantedScene {
            labels: (Label(0), Label(0)),
            utterances: (first_utt..first_utt + n).map(|i| i as UttId).collect(),
            speakers: if single { vec![names[0].clone()] } else { names.to_vec() },
            async_utterances: (0..n)
                .filter(|&i| filmed[i] != speaker[i])
                .map(|i| (first_utt + i) as UttId)
                .collect(),
            outliers: outliers.into_iter().map(|i| (first_utt + i) as UttId).collect(),
        };
        (looks.to_vec(), planted)
    }
}

/// Deterministic for a fixed configuration.
pub fn generate_episode(cfg: &GenConfig) -> Result<Episode> {
    cfg.validate()?;
    let mut b = Builder {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        t: 0,
        shots: Vec::new(),
        utts: Vec::new(),
        looks: 0,
    };
    let mut planted = Vec::new();
    for k in 0..cfg.scenes {
        let fillers = b.rng.random_range(1..=2);
        for _ in 0..fillers {
            b.filler();
        }
        planted.push(b.scene(k));
    }
    b.filler();
    let end_frame = ms_to_frame(b.t, cfg.fps);

    // Labels numbered by first appearance.
    let mut label_of: BTreeMap<usize, Label> = BTreeMap::new();
    let starts: Vec<usize> = b.shots.iter().map(|s| ms_to_frame(s.start_ms, cfg.fps)).collect();
    let mut shots = Vec::with_capacity(b.shots.len());
    for (i, plan) in b.shots.iter().enumerate() {
        let next = label_of.len() as u32;
        let label = *label_of.entry(plan.look).or_insert(Label(next));
        let first = starts[i];
        let last = starts.get(i + 1).copied().unwrap_or(end_frame) - 1;
        shots.push(Shot {
            index: i,
            span: TimeSpan::new(frame_to_ms(first, cfg.fps), frame_to_ms(last + 1, cfg.fps)).expect("ordered cuts"),
            frames: Some(FrameRange { first, last }),
            label: Some(label),
        });
    }
    let scenes = planted
        .into_iter()
        .map(|(looks, mut p)| {
            p.labels = (label_of[&looks[0]], label_of[&looks[1]]);
            p
        })
        .collect();

    let mut utterances = Vec::with_capacity(b.utts.len());
    let mut subtitles = Vec::with_capacity(b.utts.len());
    let mut embeddings = EmbeddingTable::new(cfg.dim);
    let mut reference = ReferenceMap::new();
    for (i, u) in b.utts.into_iter().enumerate() {
        let id = i as UttId;
        let mut utt = Utterance::new(id, u.span);
        utt.ref_speaker = Some(u.speaker.clone());
        utterances.push(utt);
        subtitles.push(SubtitleEntry {
            index: i as u64 + 1,
            span: u.span,
            lines: vec![format!("line {id}")],
        });
        embeddings.insert(id, u.vector).expect("dimension is fixed");
        reference.insert(id, u.speaker);
    }

    let frames = cfg
        .with_frames
        .then(|| render_frames(&shots, label_of.len(), &mut b.rng));
    Ok(Episode {
        fps: cfg.fps,
        shots,
        utterances,
        subtitles,
        embeddings,
        reference,
        scenes,
        frames,
    })
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> Rgb<u8> {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let to8 = |x: f64| ((x + m) * 255.0).round() as u8;
    Rgb([to8(r), to8(g), to8(b)])
}

/// 32 colours falling in distinct histogram bins: 8 hues times 4
/// saturation/value pairs, each at a bin centre.
pub fn palette() -> Vec<Rgb<u8>> {
    let sv = [(0.875, 0.875), (0.875, 0.375), (0.375, 0.875), (0.625, 0.625)];
    (0..8)
        .flat_map(|h| sv.iter().map(move |&(s, v)| hsv_to_rgb(22.5 + 45.0 * h as f64, s, v)))
        .collect()
}

/// Per-label block colour layouts; any two layouts differ in at least
/// `min_diff` blocks.
fn looks(count: usize, blocks: usize, min_diff: usize, colours: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(count);
    while out.len() < count {
        let cand: Vec<usize> = (0..blocks).map(|_| rng.random_range(0..colours)).collect();
        let ok = out
            .iter()
            .all(|l| l.iter().zip(&cand).filter(|(a, b)| a != b).count() >= min_diff);
        if ok {
            out.push(cand);
        }
    }
    out
}

fn render_frames(shots: &[Shot], labels: usize, rng: &mut ChaCha8Rng) -> Vec<RgbImage> {
    let colours = palette();
    let (cols, rows) = (6u32, 5u32);
    let layouts = looks(labels, (cols * rows) as usize, 25, colours.len(), rng);
    let (bw, bh) = (FRAME_WIDTH / cols, FRAME_HEIGHT / rows);
    let marker = Rgb([250, 250, 250]);
    let mut frames = Vec::new();
    for s in shots {
        let (range, label) = (
            s.frames.expect("generated shots carry frames"),
            s.label.expect("labelled"),
        );
        let layout = &layouts[label.index()];
        for f in range.first..=range.last {
            let step = (f - range.first) as u32;
            // A small marker sliding across the frame.
            let mx = (step * 2) % (FRAME_WIDTH - 3);
            let my = (step / 3 + label.0) % (FRAME_HEIGHT - 3);
            frames.push(RgbImage::from_fn(FRAME_WIDTH, FRAME_HEIGHT, |x, y| {
                if (mx..mx + 3).contains(&x) && (my..my + 3).contains(&y) {
                    return marker;
                }
                let block = ((y / bh).min(rows - 1) * cols + (x / bw).min(cols - 1)) as usize;
                colours[layout[block]]
            }));
        }
    }
    frames
}

/// Moves `round(rate * n)` randomly chosen utterances of each cluster set to
/// another cluster. Returns the perturbed partition and the moved ids.
pub fn plant_errors(reference: &Partition, rate: f64, rng: &mut impl Rng) -> (Partition, Vec<UttId>) {
    let mut all: Vec<UttId> = reference.clusters.iter().flatten().copied().collect();
    all.sort_unstable();
    let flips = ((rate * all.len() as f64).round() as usize).min(all.len());
    all.shuffle(rng);
    let moved: BTreeSet<UttId> = all[..flips].iter().copied().collect();
    let k = reference.clusters.len().max(2);
    let mut clusters = vec![Vec::new(); k];
    for (i, c) in reference.clusters.iter().enumerate() {
        for &id in c {
            let target = if moved.contains(&id) { (i + 1) % k } else { i };
            clusters[target].push(id);
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    let p = Partition {
        clusters,
        centers: None,
        ..reference.clone()
    };
    (p, moved.into_iter().collect())
}

/// File names used by [`write_corpus`].
pub const SRT_FILE: &str = "episode.srt";
pub const SHOTS_FILE: &str = "shots.csv";
pub const EMBEDDINGS_FILE: &str = "ivectors.csv";
pub const REFERENCE_FILE: &str = "speakers.csv";
pub const FRAMES_DIR: &str = "frames";
pub const CONFIG_FILE: &str = "corpus.conf";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SynthError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes the episode in the ingest formats, plus a config naming them.
pub fn write_corpus(ep: &Episode, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SynthError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(&dir.join(SRT_FILE), &serialize_srt(&ep.subtitles))?;
    write_file(&dir.join(SHOTS_FILE), &write_shot_table(&ep.shots))?;
    write_file(&dir.join(EMBEDDINGS_FILE), &write_embeddings(&ep.embeddings))?;
    write_file(&dir.join(REFERENCE_FILE), &write_reference(&ep.reference))?;
    let mut conf = format!(
        "srt = {SRT_FILE}\nshots = {SHOTS_FILE}\nembeddings = {EMBEDDINGS_FILE}\nreference = {REFERENCE_FILE}\nfps = {}\n",
        ep.fps
    );
    if let Some(frames) = &ep.frames {
        let fdir = dir.join(FRAMES_DIR);
        std::fs::create_dir_all(&fdir).map_err(|e| SynthError::Io {
            path: fdir.display().to_string(),
            message: e.to_string(),
        })?;
        for (i, f) in frames.iter().enumerate() {
            let path = fdir.join(format!("{i:06}.ppm"));
            write_ppm(&path, f).map_err(|e| SynthError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
        conf.push_str(&format!("frames = {FRAMES_DIR}\n"));
    }
    write_file(&dir.join(CONFIG_FILE), &conf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue_patterns::{extract_patterns, shot_labels};
    use crate::ingest::{parse_embeddings, parse_reference, parse_shot_table, parse_srt, subtitles_to_utterances};
    use crate::shot_analysis::{rgb_to_hsv, HistogramGeometry};

    #[test]
    fn palette_bins_are_distinct() {
        let g = HistogramGeometry::default();
        let bins: BTreeSet<(usize, usize, usize)> = palette()
            .iter()
            .map(|c| {
                let (h, s, v) = rgb_to_hsv(c[0], c[1], c[2]);
                (
                    (h / 360.0 * g.h_bins as f64) as usize,
                    (s * g.s_bins as f64) as usize,
                    (v * g.v_bins as f64) as usize,
                )
            })
            .collect();
        assert_eq!(bins.len(), 32);
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = GenConfig {
            seed: 9,
            p_async: 0.2,
            p_outlier: 0.1,
            ..GenConfig::default()
        };
        let (a, b) = (generate_episode(&cfg).unwrap(), generate_episode(&cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(serialize_srt(&a.subtitles), serialize_srt(&b.subtitles));
        let c = generate_episode(&GenConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.utterances, c.utterances);
    }

    #[test]
    fn files_round_trip_through_ingest() {
        let ep = generate_episode(&GenConfig::noisy_regime(3)).unwrap();
        let utts = subtitles_to_utterances(&parse_srt(&serialize_srt(&ep.subtitles)).unwrap());
        let spans: Vec<_> = utts.iter().map(|u| (u.id, u.span)).collect();
        let expected: Vec<_> = ep.utterances.iter().map(|u| (u.id, u.span)).collect();
        assert_eq!(spans, expected);
        let shots = parse_shot_table(&write_shot_table(&ep.shots)).unwrap();
        assert_eq!(shots.len(), ep.shots.len());
        assert!(shots
            .iter()
            .zip(&ep.shots)
            .all(|(a, b)| a.span == b.span && a.label == b.label));
        assert_eq!(
            parse_reference(&write_reference(&ep.reference), &utts).unwrap(),
            ep.reference
        );
        let table = parse_embeddings(&write_embeddings(&ep.embeddings)).unwrap();
        for (id, v) in ep.embeddings.iter() {
            let w = table.get(id).unwrap();
            assert!(v.iter().zip(w).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn scenes_carry_their_pattern() {
        let ep = generate_episode(&GenConfig {
            p_async: 0.5,
            p_single_speaker: 0.5,
            ..GenConfig::default()
        })
        .unwrap();
        let patterns = extract_patterns(&shot_labels(&ep.shots).unwrap());
        for s in &ep.scenes {
            let (a, b) = s.labels;
            assert!(patterns.contains(&(a, b)) || patterns.contains(&(b, a)));
        }
        // Filler labels never repeat, so scenes are the only patterns.
        assert!(patterns.len() <= 2 * ep.scenes.len());
    }

    #[test]
    fn utterances_sit_inside_single_shots() {
        let ep = generate_episode(&GenConfig {
            fps: 10.0,
            p_async: 0.3,
            ..GenConfig::default()
        })
        .unwrap();
        for u in &ep.utterances {
            let touching = ep.shots.iter().filter(|s| s.span.overlap_ms(&u.span) > 0).count();
            assert_eq!(touching, 1, "utterance {}", u.id);
        }
    }

    #[test]
    fn frames_follow_shots() {
        let ep = generate_episode(&GenConfig {
            scenes: 2,
            with_frames: true,
            ..GenConfig::default()
        })
        .unwrap();
        let frames = ep.frames.as_ref().unwrap();
        assert_eq!(frames.len(), ep.frame_count());
        assert_eq!(frames[0].dimensions(), (FRAME_WIDTH, FRAME_HEIGHT));
    }

    #[test]
    fn planted_errors_move_requested_share() {
        let p = Partition::new(0, Modality::Fused, vec![(0..5).collect(), (5..10).collect()]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (q, moved) = plant_errors(&p, 0.2, &mut rng);
        assert_eq!(moved.len(), 2);
        assert!(q.is_consistent());
        assert_eq!(q.members(), p.members());
        for id in moved {
            assert_ne!(q.cluster_of(id), p.cluster_of(id));
        }
    }

    #[test]
    fn invalid_settings_rejected() {
        assert!(GenConfig {
            p_async: 1.5,
            ..GenConfig::default()
        }
        .validate()
        .is_err());
        assert!(GenConfig {
            separation: 0.0,
            ..GenConfig::default()
        }
        .validate()
        .is_err());
        assert!(GenConfig {
            min_utterances: 5,
            max_utterances: 4,
            ..GenConfig::default()
        }
        .validate()
        .is_err());
    }
}
