//! Shot cut and shot similarity detection from block HSV histograms.
//!
//! Each frame is split into a 6×5 grid; every block gets its own 3-D HSV
//! histogram (8×4×4 bins). Two frames are compared block by block with the
//! Pearson correlation of the histograms, and the 20 best-matching blocks
//! out of 30 are averaged so that local motion in a few blocks does not
//! register as a cut.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{FrameRange, Label, Shot, TimeSpan};

#[derive(Debug, Error)]
pub enum ShotError {
    #[error("image {width}x{height} is smaller than the {cols}x{rows} block grid")]
    ImageTooSmall {
        width: u32,
        height: u32,
        cols: u32,
        rows: u32,
    },
    #[error("histogram geometry mismatch: {0} vs {1} values")]
    GeometryMismatch(usize, usize),
    #[error("threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),
    #[error("frame rate must be positive, got {0}")]
    InvalidFrameRate(f64),
    #[error("no frames to analyse")]
    NoFrames,
    #[error("shot {0} has no frame range")]
    MissingFrameRange(usize),
    #[error("{0}")]
    BadHistogramFile(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = ShotError> = std::result::Result<T, E>;

/// Block grid and HSV bin layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramGeometry {
    pub cols: u32,
    pub rows: u32,
    pub h_bins: usize,
    pub s_bins: usize,
    pub v_bins: usize,
}

impl Default for HistogramGeometry {
    fn default() -> Self {
        Self {
            cols: 6,
            rows: 5,
            h_bins: 8,
            s_bins: 4,
            v_bins: 4,
        }
    }
}

impl HistogramGeometry {
    pub fn blocks(&self) -> usize {
        (self.cols * self.rows) as usize
    }

    pub fn bins(&self) -> usize {
        self.h_bins * self.s_bins * self.v_bins
    }

    fn bin_of(&self, h: f64, s: f64, v: f64) -> usize {
        let q = |x: f64, n: usize| ((x * n as f64) as usize).min(n - 1);
        let hb = q(h / 360.0, self.h_bins);
        let sb = q(s, self.s_bins);
        let vb = q(v, self.v_bins);
        (hb * self.s_bins + sb) * self.v_bins + vb
    }
}

/// Per-block normalized HSV histograms of one frame, block-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHistogramFrame {
    pub index: usize,
    pub bins: usize,
    pub values: Vec<f64>,
}

impl BlockHistogramFrame {
    pub fn blocks(&self) -> usize {
        self.values.len() / self.bins
    }

    pub fn block(&self, b: usize) -> &[f64] {
        &self.values[b * self.bins..(b + 1) * self.bins]
    }
}

/// Correlation thresholds for cut and similarity decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub theta_cut: f64,
    pub theta_sim: f64,
}

impl Thresholds {
    pub fn new(theta_cut: f64, theta_sim: f64) -> Result<Self> {
        for t in [theta_cut, theta_sim] {
            if !(-1.0..=1.0).contains(&t) {
                return Err(ShotError::InvalidThreshold(t));
            }
        }
        Ok(Self { theta_cut, theta_sim })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            theta_cut: 0.5,
            theta_sim: 0.7,
        }
    }
}

/// RGB (8-bit) to HSV with H in [0, 360) and S, V in [0, 1].
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    (h % 360.0, s, max)
}

/// Block histograms of one raster. Remainder pixels go to the last row and
/// column of blocks.
pub fn frame_histogram(index: usize, raster: &RgbImage, geometry: &HistogramGeometry) -> Result<BlockHistogramFrame> {
    let (w, h) = raster.dimensions();
    if w < geometry.cols || h < geometry.rows {
        return Err(ShotError::ImageTooSmall {
            width: w,
            height: h,
            cols: geometry.cols,
            rows: geometry.rows,
        });
    }
    let bins = geometry.bins();
    let bw = w / geometry.cols;
    let bh = h / geometry.rows;
    let mut counts = vec![0u32; geometry.blocks() * bins];
    let mut pixels = vec![0u32; geometry.blocks()];
    for (x, y, px) in raster.enumerate_pixels() {
        let col = (x / bw).min(geometry.cols - 1);
        let row = (y / bh).min(geometry.rows - 1);
        let block = (row * geometry.cols + col) as usize;
        let (hh, ss, vv) = rgb_to_hsv(px[0], px[1], px[2]);
        counts[block * bins + geometry.bin_of(hh, ss, vv)] += 1;
        pixels[block] += 1;
    }
    let values = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / pixels[i / bins] as f64)
        .collect();
    Ok(BlockHistogramFrame { index, bins, values })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        // Flat block against a different one: correlation undefined, count as 0.
        return 0.0;
    }
    (cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)
}

/// Trimmed mean of the per-block histogram correlations, in [-1, 1].
pub fn compare_frames(a: &BlockHistogramFrame, b: &BlockHistogramFrame) -> Result<f64> {
    if a.bins != b.bins || a.values.len() != b.values.len() {
        return Err(ShotError::GeometryMismatch(a.values.len(), b.values.len()));
    }
    let blocks = a.blocks();
    let mut corr: Vec<f64> = (0..blocks).map(|k| pearson(a.block(k), b.block(k))).collect();
    corr.sort_by(|x, y| y.total_cmp(x));
    // Best 20 of 30 blocks.
    let keep = (blocks * 2 / 3).max(1).min(blocks);
    Ok(corr[..keep].iter().sum::<f64>() / keep as f64)
}

/// Start time of frame `i` in milliseconds.
pub fn frame_to_ms(i: usize, fps: f64) -> i64 {
    (i as f64 * 1000.0 / fps).round() as i64
}

/// Frame index closest to time `ms`.
pub fn ms_to_frame(ms: i64, fps: f64) -> usize {
    (ms as f64 * fps / 1000.0).round().max(0.0) as usize
}

/// Splits the frame stream wherever adjacent frames correlate below
/// `theta_cut`.
pub fn detect_cuts(frames: &[BlockHistogramFrame], th: &Thresholds, fps: f64) -> Result<Vec<Shot>> {
    if frames.is_empty() {
        return Err(ShotError::NoFrames);
    }
    if fps <= 0.0 || !fps.is_finite() {
        return Err(ShotError::InvalidFrameRate(fps));
    }
    let similarities = frames
        .par_windows(2)
        .map(|w| compare_frames(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let mut starts = vec![0usize];
    starts.extend(
        similarities
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < th.theta_cut)
            .map(|(i, _)| i + 1),
    );
    let shots = starts
        .iter()
        .enumerate()
        .map(|(k, &first)| {
            let last = starts.get(k + 1).map_or(frames.len() - 1, |&n| n - 1);
            Shot {
                index: k,
                span: TimeSpan::new(frame_to_ms(first, fps), frame_to_ms(last + 1, fps)).expect("frame times increase"),
                frames: Some(FrameRange { first, last }),
                label: None,
            }
        })
        .collect();
    Ok(shots)
}

/// Every `(past, current)` shot pair whose boundary frames look alike: the
/// first frame of `current` against the last frame of `past`.
pub fn detect_similar_shots(
    shots: &[Shot],
    frames: &[BlockHistogramFrame],
    th: &Thresholds,
) -> Result<Vec<(usize, usize)>> {
    let ranges = shots
        .iter()
        .map(|s| s.frames.ok_or(ShotError::MissingFrameRange(s.index)))
        .collect::<Result<Vec<_>>>()?;
    let candidates: Vec<(usize, usize)> = (0..shots.len()).flat_map(|c| (0..c).map(move |q| (q, c))).collect();
    let keep = candidates
        .par_iter()
        .map(|&(q, c)| compare_frames(&frames[ranges[c].first], &frames[ranges[q].last]).map(|s| s >= th.theta_sim))
        .collect::<Result<Vec<_>>>()?;
    Ok(candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(pair, k)| k.then_some(pair))
        .collect())
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Labels shots with the connected components of the similarity graph,
/// numbered in order of first appearance.
pub fn assign_labels(shots: &[Shot], pairs: &[(usize, usize)]) -> Vec<Shot> {
    let mut uf = UnionFind::new(shots.len());
    for &(a, b) in pairs {
        uf.union(a, b);
    }
    let mut label_of_root = vec![None; shots.len()];
    let mut next = 0;
    shots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let root = uf.find(i);
            let label = *label_of_root[root].get_or_insert_with(|| {
                next += 1;
                Label(next - 1)
            });
            Shot {
                label: Some(label),
                ..s.clone()
            }
        })
        .collect()
}

/// Full shot stage: cuts, similar pairs and labels.
pub fn analyse(frames: &[BlockHistogramFrame], th: &Thresholds, fps: f64) -> Result<ShotAnalysis> {
    let shots = detect_cuts(frames, th, fps)?;
    let pairs = detect_similar_shots(&shots, frames, th)?;
    let shots = assign_labels(&shots, &pairs);
    Ok(ShotAnalysis { shots, pairs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotAnalysis {
    pub shots: Vec<Shot>,
    pub pairs: Vec<(usize, usize)>,
}

pub fn histograms(rasters: &[RgbImage], geometry: &HistogramGeometry) -> Result<Vec<BlockHistogramFrame>> {
    rasters
        .par_iter()
        .enumerate()
        .map(|(i, r)| frame_histogram(i, r, geometry))
        .collect()
}

// ---------------------------------------------------------------------------
// Frame inputs

fn io_err(path: &Path, e: impl std::fmt::Display) -> ShotError {
    ShotError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Sorted `(index, path)` pairs for the `<index>.ppm` files of a directory.
pub fn list_ppm_frames(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("ppm") {
            continue;
        }
        if let Some(idx) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse().ok()) {
            out.push((idx, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Reads a directory of binary PPM frames and histograms them.
pub fn histograms_from_ppm_dir(dir: &Path, geometry: &HistogramGeometry) -> Result<Vec<BlockHistogramFrame>> {
    let files = list_ppm_frames(dir)?;
    if files.is_empty() {
        return Err(ShotError::NoFrames);
    }
    files
        .par_iter()
        .enumerate()
        .map(|(i, (_, path))| {
            let img = image::open(path).map_err(|e| io_err(path, e))?.to_rgb8();
            frame_histogram(i, &img, geometry)
        })
        .collect()
}

pub fn write_ppm(path: &Path, raster: &RgbImage) -> Result<()> {
    raster
        .save_with_format(path, image::ImageFormat::Pnm)
        .map_err(|e| io_err(path, e))
}

const BH30_MAGIC: &[u8; 4] = b"BH30";

/// Packed histogram stream: `BH30`, frame count (u32 LE), bins per block
/// (u32 LE), then 30 blocks × bins little-endian f32 values per frame.
pub fn write_bh30(mut w: impl Write, frames: &[BlockHistogramFrame]) -> std::io::Result<()> {
    let bins = frames.first().map_or(0, |f| f.bins);
    w.write_all(BH30_MAGIC)?;
    w.write_all(&(frames.len() as u32).to_le_bytes())?;
    w.write_all(&(bins as u32).to_le_bytes())?;
    for f in frames {
        for v in &f.values {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_bh30(mut r: impl Read) -> Result<Vec<BlockHistogramFrame>> {
    let bad = |m: &str| ShotError::BadHistogramFile(m.to_string());
    let mut header = [0u8; 12];
    r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
    if &header[..4] != BH30_MAGIC {
        return Err(bad("missing BH30 magic"));
    }
    let count = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let bins = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    if bins == 0 {
        return Err(bad("zero bins per block"));
    }
    let per_frame = 30 * bins;
    let mut buf = vec![0u8; per_frame * 4];
    let mut frames = Vec::with_capacity(count);
    for index in 0..count {
        r.read_exact(&mut buf).map_err(|_| bad("truncated frame data"))?;
        let values = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        frames.push(BlockHistogramFrame { index, bins, values });
    }
    Ok(frames)
}

pub fn load_bh30(path: &Path) -> Result<Vec<BlockHistogramFrame>> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_bh30(std::io::BufReader::new(file))
}
