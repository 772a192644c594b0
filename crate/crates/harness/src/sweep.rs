//! Parameter sweeps over a scenario file.

use std::path::{Path, PathBuf};
use std::thread;

use crate::audit::{audit_all, Summary};
use crate::config::{set_key, ScenarioSpec};
use crate::error::{config, Result};
use crate::runner::{run, Algorithm};
use crate::trace::Trace;

/// `KEY=V1,V2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for GridAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=V1,V2,..., got `{s}`"))?;
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if key.trim().is_empty() || values.is_empty() {
            return Err(format!("expected KEY=V1,V2,..., got `{s}`"));
        }
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

pub struct SweepPoint {
    pub assignment: Vec<(String, String)>,
    pub outcome: Result<(Trace, Summary)>,
}

/// Every combination of the axes, first axis slowest.
pub fn combinations(axes: &[GridAxis]) -> Vec<Vec<(String, String)>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push((axis.key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    out
}

/// Runs every grid point of the scenario at `path`, independent points in
/// parallel; results come back in grid order.
pub fn sweep(path: &Path, axes: &[GridAxis], algo: Option<Algorithm>) -> Result<Vec<SweepPoint>> {
    let base = crate::config::load_table(path)?;
    let dir: Option<PathBuf> = path.parent().map(Path::to_path_buf);
    let points = combinations(axes);
    let run_point = |assignment: &Vec<(String, String)>| -> Result<(Trace, Summary)> {
        let mut table = base.clone();
        for (k, v) in assignment {
            set_key(&mut table, k, v)?;
        }
        let spec = ScenarioSpec::from_value(table, dir.as_deref())?;
        let algo = algo
            .or(spec.algo)
            .ok_or_else(|| config("no algorithm given (use --algo or `algo` in the scenario)"))?;
        let trace = run(&spec, algo)?;
        let summary = audit_all(&trace);
        Ok((trace, summary))
    };
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(points.len().max(1));
    let mut results: Vec<Option<Result<(Trace, Summary)>>> = Vec::new();
    results.resize_with(points.len(), || None);
    thread::scope(|scope| {
        let chunks: Vec<_> = results
            .chunks_mut(points.len().div_ceil(workers).max(1))
            .collect();
        let mut start = 0;
        for chunk in chunks {
            let mine = &points[start..start + chunk.len()];
            start += chunk.len();
            let run_point = &run_point;
            scope.spawn(move || {
                for (slot, p) in chunk.iter_mut().zip(mine) {
                    *slot = Some(run_point(p));
                }
            });
        }
    });
    Ok(points
        .into_iter()
        .zip(results)
        .map(|(assignment, outcome)| SweepPoint {
            assignment,
            outcome: outcome.expect("every point ran"),
        })
        .collect())
}
