use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use frsz2::solver::{gmres_solve, GmresConfig, ResidualRecord, SolveResult};
use frsz2::sparsela::{gen_convdiff, generate_problem, read_matrix_market, scale_rows_geometric, CsrMatrix};
use serde::Serialize;

use crate::{SolveArgs, EXIT_NOT_CONVERGED};

/// One solve as written by `--record`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub matrix: String,
    pub storage_format: String,
    pub target_rrn: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub final_rrn: f64,
    /// Solver time of every repetition.
    pub wall_seconds: Vec<f64>,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub rrn: f64,
    pub explicit: bool,
}

impl From<&ResidualRecord> for HistoryEntry {
    fn from(r: &ResidualRecord) -> Self {
        Self { iteration: r.iteration, rrn: r.rrn, explicit: r.explicit }
    }
}

/// Loads or generates the operator and returns it with a display name.
pub fn load_matrix(args: &SolveArgs) -> anyhow::Result<(CsrMatrix, String)> {
    let (mut a, mut name) = match (&args.matrix, args.gen_convdiff) {
        (Some(path), _) => {
            let a = read_matrix_market(path).with_context(|| format!("loading {}", path.display()))?;
            let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            (a, name)
        }
        (None, Some((nx, ny))) => (gen_convdiff(nx, ny, args.peclet)?, format!("convdiff-{nx}x{ny}-p{}", args.peclet)),
        (None, None) => anyhow::bail!("either --matrix or --gen-convdiff is required"),
    };
    if let Some(decades) = args.scale_decades {
        a = scale_rows_geometric(&a, decades)?;
        name.push_str(&format!("-rows{decades}"));
    }
    Ok((a, name))
}

pub fn write_residuals(path: &Path, history: &[ResidualRecord]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["iteration", "rrn", "explicit"])?;
    for r in history {
        w.write_record([r.iteration.to_string(), format!("{:e}", r.rrn), u8::from(r.explicit).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn summary(name: &str, args: &SolveArgs, a: &CsrMatrix, res: &SolveResult, times: &[Duration]) -> String {
    let secs: Vec<f64> = times.iter().map(Duration::as_secs_f64).collect();
    let mean = secs.iter().sum::<f64>() / secs.len() as f64;
    let min = secs.iter().copied().fold(f64::INFINITY, f64::min);
    format!(
        "{name} n={} nnz={} format={} converged={} iterations={} restarts={} final_rrn={:e} time_min={min:.6}s time_mean={mean:.6}s runs={}",
        a.n_rows(),
        a.nnz(),
        args.format,
        res.converged,
        res.total_iterations,
        res.restarts,
        res.final_rrn,
        secs.len(),
    )
}

pub fn run(args: &SolveArgs) -> anyhow::Result<u8> {
    let (a, name) = load_matrix(args)?;
    let problem = generate_problem(&a)?;
    let cfg = GmresConfig {
        restart: args.restart,
        target_rrn: args.target_rrn,
        max_total_iterations: args.max_iters,
        eta: args.eta,
        storage_format: args.format,
    };
    let x0 = vec![0.0; a.n_rows()];
    let mut times = Vec::new();
    let mut last = None;
    for _ in 0..args.repeat {
        let res = gmres_solve(&a, &problem.b, &x0, &cfg)?;
        times.push(res.elapsed);
        last = Some(res);
    }
    let res = last.expect("at least one repetition");

    write_residuals(&args.residuals, &res.residual_history)?;
    if let Some(path) = &args.record {
        let record = RunRecord {
            matrix: name.clone(),
            storage_format: args.format.to_string(),
            target_rrn: args.target_rrn,
            converged: res.converged,
            iterations: res.total_iterations,
            restarts: res.restarts,
            final_rrn: res.final_rrn,
            wall_seconds: times.iter().map(Duration::as_secs_f64).collect(),
            history: res.residual_history.iter().map(HistoryEntry::from).collect(),
        };
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, &record)?;
        writeln!(w)?;
        w.flush()?;
    }
    println!("{}", summary(&name, args, &a, &res, &times));
    Ok(if res.converged { 0 } else { EXIT_NOT_CONVERGED })
}
