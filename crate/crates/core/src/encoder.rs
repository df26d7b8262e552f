//! Scene context encoding and unsupervised scene discovery.
//!
//! Raw feature vectors are standardized, softmax-normalized, projected into a
//! higher-dimensional space by a seeded random matrix, and sparsified with a
//! fixed random coordinate mask. K-means over the encoded vectors yields the
//! scene taxonomy; every segment then gets a pseudo-label from its nearest
//! centroid.

use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::features::{SceneFeatureVector, FEATURE_DIM};
use crate::kmeans::{kmeans_fit, nearest_centroid, KMeansConfig};

/// Encoder shape and randomness parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderParams {
    pub input_dim: usize,
    pub projected_dim: usize,
    /// Fraction of projected coordinates retained, in (0, 1].
    pub sparsity: f64,
    pub seed: u64,
    /// Ablation switch: cluster on standardized raw features instead of the
    /// projected sparse encoding.
    pub cluster_on_raw: bool,
}

impl Default for EncoderParams {
    fn default() -> Self {
        EncoderParams {
            input_dim: FEATURE_DIM,
            projected_dim: 64,
            sparsity: 0.5,
            seed: 0,
            cluster_on_raw: false,
        }
    }
}

impl EncoderParams {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.projected_dim == 0 {
            return Err(Error::InvalidWindowParams(
                "encoder dimensions must be positive".into(),
            ));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::InvalidWindowParams(format!(
                "sparsity must be in (0, 1], got {}",
                self.sparsity
            )));
        }
        Ok(())
    }
}

/// Per-component standardization statistics computed on training features.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    /// Component-wise mean and population standard deviation, floored at
    /// 1e-12 so constant components stay harmless.
    pub fn fit(rows: &[SceneFeatureVector]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; FEATURE_DIM];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r.to_array()) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; FEATURE_DIM];
        for r in rows {
            for (s, (v, m)) in vars.iter_mut().zip(r.to_array().iter().zip(&means)) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars.iter().map(|v| (v / n).sqrt().max(1e-12)).collect();
        Standardization { means, stds }
    }

    pub fn apply(&self, z: &SceneFeatureVector) -> Vec<f64> {
        z.to_array()
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Numerically stable softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// The frozen encoding pipeline: standardize, softmax, project, sparsify.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneEncoder {
    pub params: EncoderParams,
    pub stats: Standardization,
    /// Row-major projection matrix, `projected_dim x input_dim`, entries
    /// N(0, 1) / sqrt(projected_dim).
    projection: Vec<Vec<f64>>,
    /// True where the projected coordinate is zeroed out.
    zero_mask: Vec<bool>,
}

impl SceneEncoder {
    /// Builds projection and mask deterministically from the seed.
    pub fn build(params: EncoderParams, stats: Standardization) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let scale = 1.0 / (params.projected_dim as f64).sqrt();
        let projection: Vec<Vec<f64>> = (0..params.projected_dim)
            .map(|_| {
                (0..params.input_dim)
                    .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * scale)
                    .collect()
            })
            .collect();

        let n_zero = (((1.0 - params.sparsity) * params.projected_dim as f64).round() as usize)
            .min(params.projected_dim.saturating_sub(1));
        let mut indices: Vec<usize> = (0..params.projected_dim).collect();
        // Fisher-Yates prefix shuffle; the first n_zero entries get masked.
        for i in 0..n_zero {
            let j = rng.gen_range(i..indices.len());
            indices.swap(i, j);
        }
        let mut zero_mask = vec![false; params.projected_dim];
        for &i in indices.iter().take(n_zero) {
            zero_mask[i] = true;
        }

        Ok(SceneEncoder {
            params,
            stats,
            projection,
            zero_mask,
        })
    }

    /// Test hook: assemble an encoder from explicit projection and mask.
    pub fn from_parts(
        params: EncoderParams,
        stats: Standardization,
        projection: Vec<Vec<f64>>,
        zero_mask: Vec<bool>,
    ) -> Self {
        SceneEncoder {
            params,
            stats,
            projection,
            zero_mask,
        }
    }

    pub fn zero_mask(&self) -> &[bool] {
        &self.zero_mask
    }

    /// Standardized then softmax-normalized components (the pre-projection
    /// stage of the pipeline).
    pub fn normalized(&self, z: &SceneFeatureVector) -> Vec<f64> {
        softmax(&self.stats.apply(z))
    }

    /// Encodes a feature vector into the clustering space.
    pub fn encode(&self, z: &SceneFeatureVector) -> Vec<f64> {
        let standardized = self.stats.apply(z);
        if self.params.cluster_on_raw {
            return standardized;
        }
        let soft = softmax(&standardized);
        self.projection
            .iter()
            .zip(&self.zero_mask)
            .map(|(row, &masked)| {
                if masked {
                    0.0
                } else {
                    row.iter().zip(&soft).map(|(a, b)| a * b).sum()
                }
            })
            .collect()
    }
}

/// A fitted scene taxonomy: encoder plus k-means centroids in encoded space.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub encoder: SceneEncoder,
    pub inertia: f64,
    pub kmeans_tol: f64,
}

/// A cluster assignment for one segment; labels are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PseudoLabel {
    pub window_id: usize,
    pub agent_id: i64,
    pub label: usize,
}

impl ClusterModel {
    /// Fits encoder statistics and k-means on training features. Returns the
    /// model plus the 1-based training labels from the final iteration.
    pub fn fit(
        features: &[SceneFeatureVector],
        encoder_params: EncoderParams,
        kmeans_cfg: &KMeansConfig,
    ) -> Result<(Self, Vec<usize>)> {
        let stats = Standardization::fit(features);
        let encoder = SceneEncoder::build(encoder_params, stats)?;
        let encoded: Vec<Vec<f64>> = features.iter().map(|z| encoder.encode(z)).collect();
        let fit = kmeans_fit(&encoded, kmeans_cfg)?;
        let model = ClusterModel {
            k: kmeans_cfg.k,
            centroids: fit.centroids,
            encoder,
            inertia: fit.inertia,
            kmeans_tol: kmeans_cfg.tol,
        };
        let labels = fit.labels.iter().map(|&l| l + 1).collect();
        Ok((model, labels))
    }

    /// 1-based scene label for a feature vector: encode, then nearest
    /// centroid with ties to the lowest index.
    pub fn assign_label(&self, z: &SceneFeatureVector) -> usize {
        nearest_centroid(&self.encoder.encode(z), &self.centroids) + 1
    }
}

/// Per-cluster means of the raw feature components.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStatsRow {
    /// 1-based cluster id.
    pub cluster: usize,
    pub count: usize,
    /// Mean of each raw feature component; zeros for an empty cluster.
    pub means: [f64; FEATURE_DIM],
}

/// Group-by-cluster means of the raw (pre-encoding) features.
///
/// Empty clusters are still reported, with count 0.
pub fn cluster_statistics(
    labels: &[usize],
    features: &[SceneFeatureVector],
    k: usize,
) -> Result<Vec<ClusterStatsRow>> {
    if labels.len() != features.len() {
        return Err(Error::LengthMismatch(format!(
            "{} labels vs {} feature rows",
            labels.len(),
            features.len()
        )));
    }
    let mut sums = vec![[0.0; FEATURE_DIM]; k];
    let mut counts = vec![0usize; k];
    for (&label, z) in labels.iter().zip(features) {
        if label < 1 || label > k {
            return Err(Error::LengthMismatch(format!(
                "label {label} outside [1, {k}]"
            )));
        }
        counts[label - 1] += 1;
        for (s, v) in sums[label - 1].iter_mut().zip(z.to_array()) {
            *s += v;
        }
    }
    Ok((0..k)
        .map(|c| {
            let mut means = [0.0; FEATURE_DIM];
            if counts[c] > 0 {
                for (m, s) in means.iter_mut().zip(&sums[c]) {
                    *m = s / counts[c] as f64;
                }
            }
            ClusterStatsRow {
                cluster: c + 1,
                count: counts[c],
                means,
            }
        })
        .collect())
}

/// Writes cluster statistics as CSV, one row per cluster.
pub fn write_cluster_stats_csv(rows: &[ClusterStatsRow], w: &mut impl Write) -> Result<()> {
    writeln!(
        w,
        "cluster,count,{}",
        crate::features::COMPONENT_NAMES.join(",")
    )?;
    for r in rows {
        let means: Vec<String> = r.means.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{},{},{}", r.cluster, r.count, means.join(","))?;
    }
    Ok(())
}

const MODEL_HEADER: &str = "trajroute-cluster-model v1";

fn fmt_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_floats(s: &str, kind: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Artifact {
                kind: kind.into(),
                reason: format!("bad float {t:?}"),
            })
        })
        .collect()
}

impl ClusterModel {
    /// Line-oriented text artifact: header, standardization stats, one
    /// centroid per line. The projection and mask are rebuilt from the seed.
    pub fn save(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{MODEL_HEADER}")?;
        writeln!(w, "k={}", self.k)?;
        writeln!(w, "input_dim={}", self.encoder.params.input_dim)?;
        writeln!(w, "projected_dim={}", self.encoder.params.projected_dim)?;
        writeln!(w, "sparsity={:?}", self.encoder.params.sparsity)?;
        writeln!(w, "seed={}", self.encoder.params.seed)?;
        writeln!(w, "cluster_on_raw={}", self.encoder.params.cluster_on_raw)?;
        writeln!(w, "tol={:?}", self.kmeans_tol)?;
        writeln!(w, "inertia={:?}", self.inertia)?;
        writeln!(w, "means {}", fmt_floats(&self.encoder.stats.means))?;
        writeln!(w, "stds {}", fmt_floats(&self.encoder.stats.stds))?;
        for c in &self.centroids {
            writeln!(w, "centroid {}", fmt_floats(c))?;
        }
        Ok(())
    }

    pub fn load(r: &mut impl BufRead) -> Result<Self> {
        let bad = |reason: &str| Error::Artifact {
            kind: "cluster model".into(),
            reason: reason.to_string(),
        };
        let mut lines = Vec::new();
        for line in r.lines() {
            lines.push(line?);
        }
        let mut it = lines.iter();
        if it.next().map(String::as_str) != Some(MODEL_HEADER) {
            return Err(bad("missing header"));
        }
        let mut kv = std::collections::BTreeMap::new();
        let mut means = None;
        let mut stds = None;
        let mut centroids = Vec::new();
        for line in it {
            if let Some(rest) = line.strip_prefix("means ") {
                means = Some(parse_floats(rest, "cluster model")?);
            } else if let Some(rest) = line.strip_prefix("stds ") {
                stds = Some(parse_floats(rest, "cluster model")?);
            } else if let Some(rest) = line.strip_prefix("centroid ") {
                centroids.push(parse_floats(rest, "cluster model")?);
            } else if let Some((key, value)) = line.split_once('=') {
                kv.insert(key.to_string(), value.to_string());
            } else if !line.trim().is_empty() {
                return Err(bad(&format!("unrecognized line {line:?}")));
            }
        }
        let get = |key: &str| -> Result<&String> {
            kv.get(key).ok_or_else(|| bad(&format!("missing key {key}")))
        };
        let k: usize = get("k")?.parse().map_err(|_| bad("bad k"))?;
        let params = EncoderParams {
            input_dim: get("input_dim")?.parse().map_err(|_| bad("bad input_dim"))?,
            projected_dim: get("projected_dim")?.parse().map_err(|_| bad("bad projected_dim"))?,
            sparsity: get("sparsity")?.parse().map_err(|_| bad("bad sparsity"))?,
            seed: get("seed")?.parse().map_err(|_| bad("bad seed"))?,
            cluster_on_raw: get("cluster_on_raw")?.parse().map_err(|_| bad("bad cluster_on_raw"))?,
        };
        let tol: f64 = get("tol")?.parse().map_err(|_| bad("bad tol"))?;
        let inertia: f64 = get("inertia")?.parse().map_err(|_| bad("bad inertia"))?;
        let means = means.ok_or_else(|| bad("missing means"))?;
        let stds = stds.ok_or_else(|| bad("missing stds"))?;
        if centroids.len() != k {
            return Err(bad(&format!("expected {k} centroids, got {}", centroids.len())));
        }
        let encoder = SceneEncoder::build(params, Standardization { means, stds })?;
        Ok(ClusterModel {
            k,
            centroids,
            encoder,
            inertia,
            kmeans_tol: tol,
        })
    }
}
