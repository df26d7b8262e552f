//! Interpretable per-segment motion descriptors.
//!
//! Each trajectory segment is summarized by seven statistics covering motion
//! velocity (mean/variance/max speed), spatial density (neighbor count and
//! mean inter-agent distance), and interaction patterns (path curvature and
//! relative speed to the nearest neighbor). All of them are cheap, rigid-
//! invariant, and feed both the scene clustering and the routing classifier.

use crate::error::{Error, Result};
use crate::trajdata::{SceneWindow, TrajectorySegment};

/// Number of feature components.
pub const FEATURE_DIM: usize = 7;

/// Column names for feature dumps, in component order.
pub const COMPONENT_NAMES: [&str; FEATURE_DIM] = [
    "mean_speed",
    "speed_variance",
    "max_speed",
    "local_density",
    "mean_interagent_distance",
    "mean_curvature",
    "rel_speed_to_nearest",
];

/// The 7-component scene descriptor of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneFeatureVector {
    /// Mean instantaneous speed, m/s.
    pub mean_speed: f64,
    /// Variance of instantaneous speed, (m/s)^2.
    pub speed_variance: f64,
    /// Maximum instantaneous speed, m/s.
    pub max_speed: f64,
    /// Time-averaged count of other agents within the neighbor radius.
    pub local_density: f64,
    /// Mean pairwise distance to other agents over observed frames, m.
    pub mean_interagent_distance: f64,
    /// Mean discrete path curvature over interior steps, 1/m.
    pub mean_curvature: f64,
    /// Speed relative to the nearest neighbor at the last observed frame, m/s.
    pub rel_speed_to_nearest: f64,
}

impl SceneFeatureVector {
    pub fn to_array(self) -> [f64; FEATURE_DIM] {
        [
            self.mean_speed,
            self.speed_variance,
            self.max_speed,
            self.local_density,
            self.mean_interagent_distance,
            self.mean_curvature,
            self.rel_speed_to_nearest,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_DIM]) -> Self {
        SceneFeatureVector {
            mean_speed: a[0],
            speed_variance: a[1],
            max_speed: a[2],
            local_density: a[3],
            mean_interagent_distance: a[4],
            mean_curvature: a[5],
            rel_speed_to_nearest: a[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Tunables for feature extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Neighbor radius for the density count, meters.
    pub r_neighbor: f64,
    /// Steps shorter than this contribute zero curvature, meters.
    pub curvature_epsilon: f64,
    /// Seconds per frame.
    pub dt: f64,
    /// When set, speeds are raw per-frame displacements (no division by dt).
    pub per_frame_units: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            r_neighbor: 2.0,
            curvature_epsilon: 1e-6,
            dt: 0.4,
            per_frame_units: false,
        }
    }
}

impl FeatureConfig {
    fn speed_divisor(&self) -> f64 {
        if self.per_frame_units {
            1.0
        } else {
            self.dt
        }
    }

    /// Sentinel mean inter-agent distance for single-agent windows.
    pub fn single_agent_distance(&self) -> f64 {
        self.r_neighbor * 10.0
    }
}

/// Instantaneous speeds between consecutive observed points.
fn speeds(segment: &TrajectorySegment, divisor: f64) -> Vec<f64> {
    segment
        .observed
        .windows(2)
        .map(|w| (w[1] - w[0]).norm() / divisor)
        .collect()
}

/// Mean, variance, and max of the instantaneous speed sequence.
///
/// Variance divides by the number of speed samples (`t_obs - 1`).
pub fn speed_stats(segment: &TrajectorySegment, cfg: &FeatureConfig) -> Result<(f64, f64, f64)> {
    let n = segment.observed.len();
    if n < 2 {
        return Err(Error::DegenerateSegment { needed: 2, got: n });
    }
    let v = speeds(segment, cfg.speed_divisor());
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let variance = v.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / v.len() as f64;
    let max = v.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok((mean, variance, max))
}

/// Time-averaged neighbor count within `r_neighbor` and mean pairwise
/// distance to other agents, over the observed frames.
///
/// Single-agent windows get density 0 and the far-distance sentinel.
pub fn local_density(window: &SceneWindow, idx: usize, cfg: &FeatureConfig) -> (f64, f64) {
    let seg = &window.segments[idx];
    let others: Vec<&TrajectorySegment> = window
        .segments
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, s)| s)
        .collect();
    if others.is_empty() {
        return (0.0, cfg.single_agent_distance());
    }
    let t_obs = seg.observed.len();
    let mut inside = 0usize;
    let mut dist_sum = 0.0;
    for t in 0..t_obs {
        let p = seg.observed[t];
        for other in &others {
            let d = p.dist(other.observed[t]);
            if d < cfg.r_neighbor {
                inside += 1;
            }
            dist_sum += d;
        }
    }
    let density = inside as f64 / t_obs as f64;
    let mean_dist = dist_sum / (t_obs * others.len()) as f64;
    (density, mean_dist)
}

/// Mean discrete curvature over interior observed steps.
///
/// `kappa_t = |cross(x_{t+1}-x_t, x_t-x_{t-1})| / |x_{t+1}-x_t|^3`, forced to
/// zero when the forward step is shorter than the epsilon guard.
pub fn curvature_profile(segment: &TrajectorySegment, cfg: &FeatureConfig) -> Result<f64> {
    let n = segment.observed.len();
    if n < 3 {
        return Err(Error::DegenerateSegment { needed: 3, got: n });
    }
    let mut sum = 0.0;
    for t in 1..n - 1 {
        let forward = segment.observed[t + 1] - segment.observed[t];
        let backward = segment.observed[t] - segment.observed[t - 1];
        let len = forward.norm();
        if len >= cfg.curvature_epsilon {
            sum += forward.cross(backward).abs() / (len * len * len);
        }
    }
    Ok(sum / (n - 2) as f64)
}

/// Speed relative to the nearest other agent at the last observed frame,
/// using last-step finite-difference velocities. Zero for single-agent
/// windows; nearest-neighbor ties go to the earliest segment.
pub fn relative_velocity_to_nearest(window: &SceneWindow, idx: usize, cfg: &FeatureConfig) -> f64 {
    let seg = &window.segments[idx];
    let p = seg.last_observed();
    let mut nearest: Option<(f64, usize)> = None;
    for (j, other) in window.segments.iter().enumerate() {
        if j == idx {
            continue;
        }
        let d = p.dist(other.last_observed());
        if nearest.map_or(true, |(best, _)| d < best) {
            nearest = Some((d, j));
        }
    }
    match nearest {
        None => 0.0,
        Some((_, j)) => {
            let divisor = cfg.speed_divisor();
            let vi = seg.last_step() * (1.0 / divisor);
            let vj = window.segments[j].last_step() * (1.0 / divisor);
            (vi - vj).norm()
        }
    }
}

/// Assembles the full descriptor for one segment of a window.
pub fn extract(window: &SceneWindow, idx: usize, cfg: &FeatureConfig) -> Result<SceneFeatureVector> {
    let seg = &window.segments[idx];
    let (mean_speed, speed_variance, max_speed) = speed_stats(seg, cfg)?;
    let (density, mean_dist) = local_density(window, idx, cfg);
    let mean_curvature = curvature_profile(seg, cfg)?;
    let rel_speed = relative_velocity_to_nearest(window, idx, cfg);
    Ok(SceneFeatureVector {
        mean_speed,
        speed_variance,
        max_speed,
        local_density: density,
        mean_interagent_distance: mean_dist,
        mean_curvature,
        rel_speed_to_nearest: rel_speed,
    })
}

/// One descriptor per segment, in segment order.
pub fn extract_window(window: &SceneWindow, cfg: &FeatureConfig) -> Result<Vec<SceneFeatureVector>> {
    (0..window.segments.len()).map(|i| extract(window, i, cfg)).collect()
}

/// A feature vector tagged with its origin, as written to the feature dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub window_id: usize,
    pub agent_id: i64,
    pub features: SceneFeatureVector,
    /// Set when the source window had no other agents (densities use the
    /// far-distance sentinel).
    pub single_agent: bool,
}

/// Extracts every segment of every window into tagged records.
pub fn extract_all(windows: &[SceneWindow], cfg: &FeatureConfig) -> Result<Vec<FeatureRecord>> {
    let mut out = Vec::new();
    for w in windows {
        let single = w.segments.len() == 1;
        for (i, seg) in w.segments.iter().enumerate() {
            out.push(FeatureRecord {
                window_id: w.window_id,
                agent_id: seg.agent_id,
                features: extract(w, i, cfg)?,
                single_agent: single,
            });
        }
    }
    Ok(out)
}

/// Feature-matrix dump: header row naming the components, one row per
/// (window_id, agent_id).
pub fn write_features_csv(records: &[FeatureRecord], w: &mut impl std::io::Write) -> Result<()> {
    writeln!(
        w,
        "window_id,agent_id,{},single_agent",
        COMPONENT_NAMES.join(",")
    )?;
    for r in records {
        let vals: Vec<String> = r.features.to_array().iter().map(|v| format!("{v:?}")).collect();
        writeln!(
            w,
            "{},{},{},{}",
            r.window_id,
            r.agent_id,
            vals.join(","),
            u8::from(r.single_agent)
        )?;
    }
    Ok(())
}
