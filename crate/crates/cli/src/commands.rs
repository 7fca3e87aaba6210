use std::io::Write;
use std::path::{Path, PathBuf};

use dtamp::check::{check_jacobians, CheckOptions};
use dtamp::constraints::Family;
use dtamp::engine::{self, RunOptions};
use dtamp::scene::{presets, VariableLayout};
use dtamp::solver::{Execution, InitStrategy, ScenarioProblem};
use serde::Serialize;

use crate::artifacts::{self, write_atomic};
use crate::error::{CliError, Result};
use crate::plot;
use crate::scenario_file::{parse_scenario, to_canonical};

fn out_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

#[derive(Debug, Clone, Default)]
pub struct SolveArgs {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<InitStrategy>,
    pub sequential: bool,
}

/// Solves, writes the artifacts, and fails with `NotConverged` if the last
/// round did not converge. Artifacts are written in either case.
pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = parse_scenario(&args.scenario)?;
    let options = RunOptions {
        max_iterations: args.max_iters,
        seed: args.seed,
        initialization: args.init,
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        },
    };
    let run = engine::run(scenario, &options)?;
    let written = artifacts::write_run(&args.out, &run)?;
    let result = &run.result;
    writeln!(out, "variables {}", run.problem.problem.variable_count).map_err(out_err)?;
    writeln!(out, "iterations {}", result.iterations).map_err(out_err)?;
    writeln!(out, "objective {}", artifacts::format_f64(result.objective())).map_err(out_err)?;
    writeln!(out, "termination {}", result.termination.name()).map_err(out_err)?;
    for p in [
        &written.trajectories,
        &written.schedules,
        &written.convergence,
        &written.summary,
    ] {
        writeln!(out, "wrote {}", p.display()).map_err(out_err)?;
    }
    if result.termination.converged() {
        Ok(())
    } else {
        Err(CliError::NotConverged {
            iterations: result.iterations,
            termination: result.termination.name(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckArgs {
    pub scenario: PathBuf,
    pub tol: f64,
    pub states: usize,
    pub seed: u64,
    pub perturb: Option<Family>,
}

pub fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<()> {
    let sp = ScenarioProblem::build(parse_scenario(&args.scenario)?)?;
    let report = check_jacobians(
        &sp,
        &CheckOptions {
            states: args.states,
            seed: args.seed,
            perturb: args.perturb,
            ..CheckOptions::default()
        },
    )?;
    writeln!(
        out,
        "{:<24} {:>12}  {:<6} worst block",
        "family", "rel. error", "status"
    )
    .map_err(out_err)?;
    for f in &report.families {
        let status = if f.worst <= args.tol { "ok" } else { "FAIL" };
        writeln!(
            out,
            "{:<24} {:>12.3e}  {:<6} {}",
            f.family.name(),
            f.worst,
            status,
            f.block
        )
        .map_err(out_err)?;
    }
    let failing = report.failing(args.tol);
    if failing.is_empty() {
        writeln!(
            out,
            "all {} families within {:e} over {} states",
            report.families.len(),
            args.tol,
            report.states
        )
        .map_err(out_err)?;
        Ok(())
    } else {
        Err(CliError::CheckFailed {
            families: failing.iter().map(|f| f.name().to_string()).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityCount {
    pub name: String,
    pub kind: &'static str,
    pub variables: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCount {
    pub family: &'static str,
    pub blocks: usize,
    pub samples: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockCount {
    pub label: String,
    pub family: &'static str,
    pub samples: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoReport {
    pub variables: usize,
    pub segments: usize,
    pub entities: Vec<EntityCount>,
    pub families: Vec<FamilyCount>,
    pub blocks: Vec<BlockCount>,
}

fn entity_counts(layout: &VariableLayout) -> Vec<EntityCount> {
    let mut out = Vec::new();
    for (i, b) in layout.robots.iter().enumerate() {
        out.push(EntityCount {
            name: layout.robot_name(i).to_string(),
            kind: "robot",
            variables: b.len(),
        });
    }
    for p in &layout.pairs {
        let schedules = 1 + p.orientation.map_or(0, |g| g.len());
        out.push(EntityCount {
            name: format!("{}>{}", layout.robot_name(p.robot), layout.target_name(p.target)),
            kind: "pair",
            variables: schedules * layout.segments + 2,
        });
    }
    for (j, o) in layout.objects.iter().enumerate() {
        out.push(EntityCount {
            name: layout.object_name(j).to_string(),
            kind: "object",
            variables: o.spline.len() + o.rest.len() * layout.segments,
        });
    }
    out
}

pub fn info_report(path: &Path) -> Result<InfoReport> {
    let sp = ScenarioProblem::build(parse_scenario(path)?)?;
    let layout = sp.layout();
    let blocks: Vec<BlockCount> = sp
        .problem
        .blocks
        .iter()
        .map(|b| BlockCount {
            label: b.label.clone(),
            family: b.family.name(),
            samples: b.samples.len(),
            rows: b.samples.len() * b.term.rows(),
        })
        .collect();
    let families = Family::ALL
        .iter()
        .filter_map(|f| {
            let mine: Vec<_> = blocks.iter().filter(|b| b.family == f.name()).collect();
            (!mine.is_empty()).then(|| FamilyCount {
                family: f.name(),
                blocks: mine.len(),
                samples: mine.iter().map(|b| b.samples).sum(),
                rows: mine.iter().map(|b| b.rows).sum(),
            })
        })
        .collect();
    Ok(InfoReport {
        variables: sp.problem.variable_count,
        segments: layout.segments,
        entities: entity_counts(layout),
        families,
        blocks,
    })
}

pub fn info(path: &Path, json: bool, out: &mut dyn Write) -> Result<()> {
    let report = info_report(path)?;
    if json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| out_err(e.into()))?;
        writeln!(out).map_err(out_err)?;
        return Ok(());
    }
    writeln!(out, "variables {}", report.variables).map_err(out_err)?;
    writeln!(out, "segments {}", report.segments).map_err(out_err)?;
    for e in &report.entities {
        writeln!(out, "  {:<7} {:<24} {:>6}", e.kind, e.name, e.variables).map_err(out_err)?;
    }
    writeln!(out, "{:<24} {:>6} {:>8} {:>8}", "family", "blocks", "samples", "rows").map_err(out_err)?;
    for f in &report.families {
        writeln!(out, "{:<24} {:>6} {:>8} {:>8}", f.family, f.blocks, f.samples, f.rows).map_err(out_err)?;
    }
    Ok(())
}

pub fn plot(dir: &Path, output: &Path, out: &mut dyn Write) -> Result<()> {
    for p in plot::render(dir, output)? {
        writeln!(out, "wrote {}", p.display()).map_err(out_err)?;
    }
    Ok(())
}

/// Writes the canonical file of a built-in scenario to `output`, or prints it.
pub fn preset(name: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let scenario = presets::by_name(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    let text = to_canonical(&scenario);
    match output {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(out_err),
    }
}
