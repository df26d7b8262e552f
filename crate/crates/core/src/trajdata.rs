//! Trajectory log ingestion, sliding-window segmentation, and rigid/scale
//! augmentation.
//!
//! Input files are plain text with one observation per line:
//!
//! ```text
//! # frame agent x y
//! 0 1 0.0 0.0
//! 1 1 0.4 0.0
//! ```
//!
//! Frames are consecutive integer ticks; the wall-clock spacing `dt` is
//! supplied per dataset. An agent enters a window only if it is observed at
//! every frame of the window's span — gaps exclude it rather than being
//! interpolated, so no fabricated kinematics reach the feature extractor.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Point2;

/// One observation row of a trajectory log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub frame_id: i64,
    pub agent_id: i64,
    pub position: Point2,
}

/// A single agent's windowed observation plus ground-truth future.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySegment {
    pub agent_id: i64,
    pub observed: Vec<Point2>,
    pub future: Vec<Point2>,
    pub frame_start: i64,
    pub dt: f64,
}

impl TrajectorySegment {
    pub fn t_obs(&self) -> usize {
        self.observed.len()
    }

    pub fn t_pred(&self) -> usize {
        self.future.len()
    }

    /// Last observed position.
    pub fn last_observed(&self) -> Point2 {
        *self.observed.last().expect("segment has observations")
    }

    /// Last-step displacement per frame (zero for a single-point history).
    pub fn last_step(&self) -> Point2 {
        let n = self.observed.len();
        if n < 2 {
            Point2::ZERO
        } else {
            self.observed[n - 1] - self.observed[n - 2]
        }
    }
}

/// All time-aligned segments sharing one window span.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneWindow {
    pub window_id: usize,
    pub segments: Vec<TrajectorySegment>,
}

impl SceneWindow {
    pub fn t_obs(&self) -> usize {
        self.segments.first().map_or(0, TrajectorySegment::t_obs)
    }

    pub fn t_pred(&self) -> usize {
        self.segments.first().map_or(0, TrajectorySegment::t_pred)
    }

    pub fn dt(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.dt)
    }
}

/// Windowing parameters: history/horizon lengths in frames, start stride,
/// and seconds per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowParams {
    pub t_obs: usize,
    pub t_pred: usize,
    pub stride: usize,
    pub dt: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams {
            t_obs: 8,
            t_pred: 4,
            stride: 1,
            dt: 0.4,
        }
    }
}

/// Similarity transform applied to every position of a window:
/// `p ↦ scale · R(rotation) · (p − pivot) + pivot + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentParams {
    pub scale: f64,
    pub rotation: f64,
    pub translation: Point2,
    pub pivot: Point2,
}

impl AugmentParams {
    pub fn identity() -> Self {
        AugmentParams {
            scale: 1.0,
            rotation: 0.0,
            translation: Point2::ZERO,
            pivot: Point2::ZERO,
        }
    }

    /// The analytic inverse: applying `self` then `self.inverse()` is the
    /// identity map up to rounding.
    pub fn inverse(&self) -> Self {
        AugmentParams {
            scale: 1.0 / self.scale,
            rotation: -self.rotation,
            translation: -self.translation,
            pivot: self.pivot + self.translation,
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        (p - self.pivot).rotate(self.rotation) * self.scale + self.pivot + self.translation
    }

    fn is_exact_identity(&self) -> bool {
        self.scale == 1.0 && self.rotation == 0.0 && self.translation == Point2::ZERO
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidWindowParams(format!(
                "augment scale must be positive and finite, got {}",
                self.scale
            )));
        }
        if !self.rotation.is_finite()
            || !self.translation.is_finite()
            || !self.pivot.is_finite()
        {
            return Err(Error::InvalidWindowParams(
                "augment rotation/translation/pivot must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Parses a whitespace-separated "frame agent x y" log.
///
/// Lines starting with `#` and blank lines are skipped; extra trailing fields
/// are ignored. Records are returned sorted by `(frame_id, agent_id)`.
pub fn parse_dataset(path: &Path) -> Result<Vec<RawRecord>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.display().to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    parse_records(&text)
}

/// Parses log text; see [`parse_dataset`].
pub fn parse_records(text: &str) -> Result<Vec<RawRecord>> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected at least 4 fields, got {}", fields.len()),
            });
        }
        let parse_field = |name: &str, raw: &str| -> Result<f64> {
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("non-numeric {name} field: {raw:?}"),
            })
        };
        let frame = parse_field("frame", fields[0])?;
        let agent = parse_field("agent", fields[1])?;
        let x = parse_field("x", fields[2])?;
        let y = parse_field("y", fields[3])?;
        if frame.fract() != 0.0 || frame < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("frame id must be a non-negative integer, got {raw}", raw = fields[0]),
            });
        }
        if agent.fract() != 0.0 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("agent id must be an integer, got {raw}", raw = fields[1]),
            });
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                reason: "position must be finite".into(),
            });
        }
        records.push(RawRecord {
            frame_id: frame as i64,
            agent_id: agent as i64,
            position: Point2::new(x, y),
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    records.sort_by_key(|r| (r.frame_id, r.agent_id));
    Ok(records)
}

/// Writes records in the same "frame agent x y" format `parse_dataset` reads.
pub fn write_records(records: &[RawRecord], w: &mut impl Write) -> Result<()> {
    writeln!(w, "# frame agent x y")?;
    for r in records {
        writeln!(w, "{} {} {:?} {:?}", r.frame_id, r.agent_id, r.position.x, r.position.y)?;
    }
    Ok(())
}

/// Slides a window of `t_obs + t_pred` frames over the log.
///
/// A window is emitted for every start frame `min_frame + i·stride` whose full
/// span fits in the log, containing each agent observed at every frame of the
/// span. Agents with gaps are excluded; windows with no qualifying agents are
/// dropped. Window ids are sequential in emission order and segments are
/// ordered by agent id.
pub fn window_segments(records: &[RawRecord], params: &WindowParams) -> Result<Vec<SceneWindow>> {
    if params.t_obs < 3 {
        return Err(Error::InvalidWindowParams(format!(
            "t_obs must be >= 3, got {}",
            params.t_obs
        )));
    }
    if params.t_pred < 1 {
        return Err(Error::InvalidWindowParams("t_pred must be >= 1".into()));
    }
    if params.stride < 1 {
        return Err(Error::InvalidWindowParams("stride must be >= 1".into()));
    }
    if !(params.dt > 0.0 && params.dt.is_finite()) {
        return Err(Error::InvalidWindowParams(format!(
            "dt must be positive and finite, got {}",
            params.dt
        )));
    }
    if records.is_empty() {
        return Ok(Vec::new());
    }

    // agent -> frame -> position; BTreeMap keeps agent iteration order stable.
    let mut tracks: BTreeMap<i64, BTreeMap<i64, Point2>> = BTreeMap::new();
    let mut min_frame = i64::MAX;
    let mut max_frame = i64::MIN;
    for r in records {
        tracks.entry(r.agent_id).or_default().insert(r.frame_id, r.position);
        min_frame = min_frame.min(r.frame_id);
        max_frame = max_frame.max(r.frame_id);
    }

    let span = (params.t_obs + params.t_pred) as i64;
    let mut windows = Vec::new();
    let mut start = min_frame;
    while start + span - 1 <= max_frame {
        let mut segments = Vec::new();
        for (&agent_id, frames) in &tracks {
            let positions: Vec<Point2> = (start..start + span)
                .map_while(|f| frames.get(&f).copied())
                .collect();
            if positions.len() == span as usize {
                segments.push(TrajectorySegment {
                    agent_id,
                    observed: positions[..params.t_obs].to_vec(),
                    future: positions[params.t_obs..].to_vec(),
                    frame_start: start,
                    dt: params.dt,
                });
            }
        }
        if !segments.is_empty() {
            windows.push(SceneWindow {
                window_id: windows.len(),
                segments,
            });
        }
        start += params.stride as i64;
    }
    Ok(windows)
}

/// Applies a similarity transform to every position of the window.
///
/// Exact identity parameters return the input unchanged bit for bit.
pub fn augment(window: &SceneWindow, params: &AugmentParams) -> Result<SceneWindow> {
    params.validate()?;
    if params.is_exact_identity() {
        return Ok(window.clone());
    }
    let segments = window
        .segments
        .iter()
        .map(|seg| TrajectorySegment {
            agent_id: seg.agent_id,
            observed: seg.observed.iter().map(|&p| params.apply(p)).collect(),
            future: seg.future.iter().map(|&p| params.apply(p)).collect(),
            frame_start: seg.frame_start,
            dt: seg.dt,
        })
        .collect();
    Ok(SceneWindow {
        window_id: window.window_id,
        segments,
    })
}

/// Optional dump: one CSV row per (window_id, agent_id, frame, x, y),
/// observed frames followed by future frames.
pub fn write_windows_csv(windows: &[SceneWindow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "window_id,agent_id,frame,x,y")?;
    for win in windows {
        for seg in &win.segments {
            for (i, p) in seg.observed.iter().chain(seg.future.iter()).enumerate() {
                let frame = seg.frame_start + i as i64;
                writeln!(w, "{},{},{},{:?},{:?}", win.window_id, seg.agent_id, frame, p.x, p.y)?;
            }
        }
    }
    Ok(())
}
