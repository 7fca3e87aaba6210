//! Run artifacts: CSV tables and a JSON summary, each written atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use dtamp::engine::Run;
use dtamp::solver::audit::Audit;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const TRAJECTORIES: &str = "trajectories.csv";
pub const SCHEDULES: &str = "schedules.csv";
pub const CONVERGENCE: &str = "convergence.csv";
pub const SUMMARY: &str = "summary.json";

/// Uniform sample count of the exported trajectories.
pub const TRAJECTORY_SAMPLES: usize = 101;

const POSE: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

/// Shortest text that parses back to exactly `v`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// In-memory CSV: a header row and numeric records.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_f64(*v)))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn read(path: &Path) -> Result<Table> {
        let bad = |message: String| CliError::Csv {
            path: path.to_path_buf(),
            message,
        };
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut r = csv::Reader::from_reader(file);
        let headers = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let row = record
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| bad(format!("not a number: `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { headers, rows })
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn trajectories(run: &Run, x: &[f64]) -> Result<Table> {
    let layout = run.problem.layout();
    let duration = layout.duration;
    let mut headers = vec!["time".to_string()];
    let mut splines = Vec::new();
    for (i, b) in layout.robots.iter().enumerate() {
        headers.extend((0..b.dim).map(|c| format!("{}.q{c}", layout.robot_name(i))));
        splines.push(b.to_spline(x, duration)?);
    }
    for (j, o) in layout.objects.iter().enumerate() {
        headers.extend(POSE.iter().map(|c| format!("{}.{c}", layout.object_name(j))));
        splines.push(o.spline.to_spline(x, duration)?);
    }
    let last = TRAJECTORY_SAMPLES - 1;
    let mut rows = Vec::with_capacity(TRAJECTORY_SAMPLES);
    for k in 0..TRAJECTORY_SAMPLES {
        let t = if k == last {
            duration
        } else {
            duration * k as f64 / last as f64
        };
        let mut row = vec![t];
        for s in &splines {
            row.extend(s.eval(t)?);
        }
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

/// One row per segment, one column per schedule.
pub fn schedules(run: &Run, x: &[f64]) -> Table {
    let layout = run.problem.layout();
    let names = layout.names();
    let blocks = layout.schedule_blocks();
    let mut headers: Vec<String> = vec!["segment".into(), "t_start".into(), "t_end".into()];
    headers.extend(blocks.iter().map(|b| {
        let n = &names[b.index(0)];
        n.strip_suffix(".s0").unwrap_or(n).to_string()
    }));
    let dt = layout.segment_duration();
    let rows = (0..layout.segments)
        .map(|s| {
            let t_end = if s + 1 == layout.segments {
                layout.duration
            } else {
                (s + 1) as f64 * dt
            };
            let mut row = vec![s as f64, s as f64 * dt, t_end];
            row.extend(blocks.iter().map(|b| x[b.index(s)]));
            row
        })
        .collect();
    Table { headers, rows }
}

pub fn convergence(run: &Run) -> Table {
    let history = &run.result.history;
    let families: Vec<_> = history
        .first()
        .map(|r| r.violations.iter().map(|(f, _)| *f).collect())
        .unwrap_or_default();
    let mut headers: Vec<String> = [
        "index",
        "round",
        "iteration",
        "objective",
        "gradient_norm",
        "damping",
        "step_norm",
        "accepted",
    ]
    .map(String::from)
    .to_vec();
    headers.extend(families.iter().map(|f| format!("violation.{}", f.name())));
    let rows = history
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let mut row = vec![
                k as f64,
                r.round as f64,
                r.iteration as f64,
                r.objective,
                r.gradient_norm,
                r.damping,
                r.step_norm,
                if r.accepted { 1.0 } else { 0.0 },
            ];
            row.extend(
                families
                    .iter()
                    .map(|f| r.violations.iter().find(|(g, _)| g == f).map_or(f64::NAN, |(_, v)| *v)),
            );
            row
        })
        .collect();
    Table { headers, rows }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub variables: usize,
    pub residual_rows: usize,
    pub iterations: usize,
    pub termination: &'static str,
    pub converged: bool,
    pub objective: f64,
    pub violations: BTreeMap<&'static str, f64>,
    pub audit: Audit,
}

pub fn summary(run: &Run) -> Summary {
    let problem = &run.problem.problem;
    Summary {
        variables: problem.variable_count,
        residual_rows: problem.blocks.iter().map(|b| b.samples.len() * b.term.rows()).sum(),
        iterations: run.result.iterations,
        termination: run.result.termination.name(),
        converged: run.result.termination.converged(),
        objective: run.result.objective(),
        violations: run.result.violations.iter().map(|(f, v)| (f.name(), *v)).collect(),
        audit: run.audit.clone(),
    }
}

/// Paths of the files written by [`write_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub trajectories: PathBuf,
    pub schedules: PathBuf,
    pub convergence: PathBuf,
    pub summary: PathBuf,
}

impl RunArtifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            trajectories: dir.join(TRAJECTORIES),
            schedules: dir.join(SCHEDULES),
            convergence: dir.join(CONVERGENCE),
            summary: dir.join(SUMMARY),
        }
    }
}

pub fn write_run(dir: &Path, run: &Run) -> Result<RunArtifacts> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let out = RunArtifacts::in_dir(dir);
    let x = &run.result.x;
    write_atomic(&out.trajectories, &trajectories(run, x)?.to_csv())?;
    write_atomic(&out.schedules, &schedules(run, x).to_csv())?;
    write_atomic(&out.convergence, &convergence(run).to_csv())?;
    let mut json = serde_json::to_vec_pretty(&summary(run)).expect("summary serializes");
    json.push(b'\n');
    write_atomic(&out.summary, &json)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatted_floats_parse_back_exactly() {
        for v in [
            0.0,
            -0.0,
            1.0,
            0.1,
            1e-4,
            9.99e-5,
            1e-300,
            1.234e20,
            -3.5e-12,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits(), "{v}");
        }
    }
}
