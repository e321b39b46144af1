//! Frame snapshots, group statistics, trajectory files and the regression hash.
//!
//! Trajectory file (`schema_version` 1): JSON lines. The first line is a
//! [`TrajectoryHeader`]; each following line is one [`FrameRecord`] in tick
//! order:
//!
//! ```text
//! {"schema_version":1,"format":"marker-crowds/trajectory","scenario":"fig2_hetero","seed":7,"dt":0.03333333333333333}
//! {"tick":0,"agents":[{"id":0,"x":..,"y":..,"comfort":..,"n_markers":..,"extraversion":1.0,"profile":"E=1.0"},..],"avatar":null}
//! ```
//!
//! Metrics file: CSV with header
//! `tick,profile_label,mean_dist_to_goal,mean_intra_pairwise_dist,convex_hull_area,mean_nearest_neighbor_dist`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::avatar::Participation;
use crate::engine::SimState;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull_area, Vec2};
use crate::Scalar;

pub const TRAJECTORY_FORMAT: &str = "marker-crowds/trajectory";
pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

/// Positions are rounded to this many meters before hashing.
pub const HASH_QUANTUM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub comfort: f64,
    pub n_markers: u32,
    pub extraversion: f64,
    pub profile: String,
}

impl AgentRecord {
    pub fn position(&self) -> Vec2<f64> {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvatarRecord {
    pub x: f64,
    pub y: f64,
    pub participation: Participation,
    pub n_markers: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub tick: u64,
    pub agents: Vec<AgentRecord>,
    pub avatar: Option<AvatarRecord>,
}

impl FrameRecord {
    pub fn capture<T: Scalar>(state: &SimState<T>) -> Self {
        FrameRecord {
            tick: state.tick,
            agents: state
                .agents
                .iter()
                .map(|a| AgentRecord {
                    id: a.id,
                    x: a.position.x.as_f64(),
                    y: a.position.y.as_f64(),
                    comfort: a.comfort.as_f64(),
                    n_markers: a.assigned_markers.len() as u32,
                    extraversion: a.extraversion.as_f64(),
                    profile: a.profile_label.clone(),
                })
                .collect(),
            avatar: state.avatar.as_ref().map(|a| AvatarRecord {
                x: a.position.x.as_f64(),
                y: a.position.y.as_f64(),
                participation: a.participation,
                n_markers: a.assigned_markers.len() as u32,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub profile_label: String,
    pub mean_dist_to_goal: f64,
    pub mean_intra_pairwise_dist: f64,
    /// Zero for fewer than three agents or collinear groups.
    pub convex_hull_area: f64,
    pub mean_nearest_neighbor_dist: f64,
}

pub fn compute_group_metrics(frame: &FrameRecord, label: &str, goal: Vec2<f64>) -> Result<GroupMetrics> {
    let pts: Vec<Vec2<f64>> = frame
        .agents
        .iter()
        .filter(|a| a.profile == label)
        .map(AgentRecord::position)
        .collect();
    if pts.is_empty() {
        return Err(Error::UnknownGroup(label.to_string()));
    }
    let n = pts.len();

    let mean_dist_to_goal = pts.iter().map(|p| p.distance(goal)).sum::<f64>() / n as f64;

    let mut pair_sum = 0.0;
    let mut nearest = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = pts[i].distance(pts[j]);
            pair_sum += d;
            nearest[i] = nearest[i].min(d);
            nearest[j] = nearest[j].min(d);
        }
    }
    let (mean_pair, mean_nn) = if n < 2 {
        (0.0, 0.0)
    } else {
        let pairs = (n * (n - 1) / 2) as f64;
        (pair_sum / pairs, nearest.iter().sum::<f64>() / n as f64)
    };

    Ok(GroupMetrics {
        profile_label: label.to_string(),
        mean_dist_to_goal,
        mean_intra_pairwise_dist: mean_pair,
        convex_hull_area: convex_hull_area(&pts),
        mean_nearest_neighbor_dist: mean_nn,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub schema_version: u32,
    pub format: String,
    pub scenario: String,
    pub seed: u64,
    pub dt: f64,
}

impl TrajectoryHeader {
    pub fn new(scenario: impl Into<String>, seed: u64, dt: f64) -> Self {
        TrajectoryHeader {
            schema_version: TRAJECTORY_SCHEMA_VERSION,
            format: TRAJECTORY_FORMAT.to_string(),
            scenario: scenario.into(),
            seed,
            dt,
        }
    }
}

pub fn export_trajectories(frames: &[FrameRecord], header: &TrajectoryHeader, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer(&mut out, header).map_err(|e| io(e.into()))?;
    out.write_all(b"\n").map_err(io)?;
    for frame in frames {
        serde_json::to_writer(&mut out, frame).map_err(|e| io(e.into()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_trajectories(path: &Path) -> Result<(TrajectoryHeader, Vec<FrameRecord>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, message: String| Error::TrajectoryFormat { path: path.to_path_buf(), line, message };

    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| bad(1, "missing header line".into()))?
        .map_err(|e| Error::io(path, e))?;
    let header: TrajectoryHeader = serde_json::from_str(&first).map_err(|e| bad(1, e.to_string()))?;
    if header.schema_version != TRAJECTORY_SCHEMA_VERSION {
        return Err(bad(1, format!("unsupported schema_version {}", header.schema_version)));
    }

    let mut frames = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let frame: FrameRecord = serde_json::from_str(&line).map_err(|e| bad(i + 2, e.to_string()))?;
        frames.push(frame);
    }
    Ok((header, frames))
}

fn quantize(v: f64) -> i64 {
    (v / HASH_QUANTUM).round() as i64
}

/// SHA-256 over quantized positions, frame by frame, as lowercase hex.
///
/// The canonical string is `t<tick>` followed by `|<id>:<qx>:<qy>` per agent,
/// `|a:<qx>:<qy>` for an avatar, and `;` per frame.
pub fn state_hash(frames: &[FrameRecord]) -> String {
    let mut hasher = Sha256::new();
    for frame in frames {
        let mut s = format!("t{}", frame.tick);
        for a in &frame.agents {
            s.push_str(&format!("|{}:{}:{}", a.id, quantize(a.x), quantize(a.y)));
        }
        if let Some(av) = &frame.avatar {
            s.push_str(&format!("|a:{}:{}", quantize(av.x), quantize(av.y)));
        }
        s.push(';');
        hasher.update(s.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub tick: u64,
    #[serde(flatten)]
    pub metrics: GroupMetrics,
}

pub fn write_metrics_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    // flattened structs cannot go through csv's serde path
    w.write_record([
        "tick",
        "profile_label",
        "mean_dist_to_goal",
        "mean_intra_pairwise_dist",
        "convex_hull_area",
        "mean_nearest_neighbor_dist",
    ])
    .map_err(io)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.tick.to_string(),
            m.profile_label.clone(),
            m.mean_dist_to_goal.to_string(),
            m.mean_intra_pairwise_dist.to_string(),
            m.convex_hull_area.to_string(),
            m.mean_nearest_neighbor_dist.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
