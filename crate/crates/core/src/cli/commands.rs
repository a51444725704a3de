use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::ingest::{synth_gaussian, write_matrix_market, write_vector, MtxLayout, PartitionedSystem};
use crate::report::{build_comparison, ComparisonTable, RunMode};
use crate::simnet::{run_simulated, MessageStats};
use crate::solvers::{run, IterationTrace};
use crate::spectral::{analyze, compute_x, optimal_params, predicted_params, Method, MethodParams};

use super::config::RunConfig;
use super::load::{load_system, partition, LoadedSystem};

pub struct GenRequest {
    pub n: usize,
    pub rows: usize,
    pub mean: f64,
    pub seed: u64,
    pub out: PathBuf,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes `A.mtx`, `x_star.mtx` and `manifest.json`; `b = A x*` is implied.
pub fn cmd_gen(req: &GenRequest, stdout: &mut dyn Write) -> Result<()> {
    let s = synth_gaussian(req.n, req.rows, req.mean, req.seed)?;
    ensure_dir(&req.out)?;
    let a_path = req.out.join("A.mtx");
    let x_path = req.out.join("x_star.mtx");
    let m_path = req.out.join("manifest.json");
    write_file(&a_path, &write_matrix_market(&s.a, MtxLayout::Array))?;
    write_file(&x_path, &write_vector(&s.x_star))?;
    let manifest = json!({
        "config": {
            "command": "gen",
            "n": req.n,
            "N": req.rows,
            "mean": req.mean,
            "seed": req.seed,
        },
        "generator": "xoshiro256++ (SplitMix64 seeding), Box-Muller normals; A row-major then x*",
        "files": { "matrix": "A.mtx", "solution": "x_star.mtx" },
        "rhs": "b = A x*",
    });
    write_file(&m_path, &to_json(&manifest)?)?;
    for p in [&a_path, &x_path, &m_path] {
        emit(stdout, &format!("{}\n", p.display()))?;
    }
    Ok(())
}

fn require_m(cfg: &RunConfig) -> Result<usize> {
    cfg.m.ok_or_else(|| Error::InvalidParameter("--m is required".into()))
}

pub fn cmd_analyze(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let loaded = load_system(cfg)?;
    let sys = partition(&loaded, require_m(cfg)?)?;
    let methods = cfg.methods_or(&Method::ALL)?;
    let report = analyze(&sys, &methods)?;
    let doc = json!({
        "config": cfg,
        "source": loaded.source,
        "n": report.n,
        "N": report.rows,
        "m": report.m,
        "p": report.p,
        "summary": report.summary,
        "methods": report.methods,
    });
    let text = to_json(&doc)?;
    if let Some(dir) = &cfg.out {
        ensure_dir(dir)?;
        write_file(&dir.join("analysis.json"), &text)?;
    }
    emit(stdout, &text)
}

fn summary_line(t: &IterationTrace) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
    format!(
        "method={} rounds={} converged={} final_error={} fitted_rate={} T_empirical={} T_predicted={}\n",
        t.method,
        t.rounds(),
        t.converged,
        fmt_f64(t.final_error()),
        opt(t.fitted_rate),
        opt(t.t_empirical),
        fmt_f64(t.params.t_predicted)
    )
}

fn solve_params(cfg: &RunConfig, loaded: &LoadedSystem, m: usize) -> Result<(PartitionedSystem, MethodParams)> {
    let methods = cfg.methods_or(&[Method::Apc])?;
    let [method] = methods[..] else {
        return Err(Error::InvalidParameter("solve runs exactly one --method".into()));
    };
    let sys = partition(loaded, m)?;
    let summary = compute_x(&sys)?;
    let params = match cfg.explicit_params(method)? {
        Some(p) => predicted_params(&sys, &summary, p)?,
        None => optimal_params(&sys, &summary, method)?,
    };
    Ok((sys, params))
}

pub fn cmd_solve(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let loaded = load_system(cfg)?;
    let (sys, params) = solve_params(cfg, &loaded, require_m(cfg)?)?;
    let budget = cfg.budget(params.t_predicted)?;
    let opts = cfg.run_options();
    if let Some(dir) = &cfg.out {
        ensure_dir(dir)?;
    }

    let mut log_buf: Vec<u8> = Vec::new();
    let outcome: Result<(IterationTrace, Option<MessageStats>)> = if cfg.simulate {
        let log: Option<&mut dyn Write> = if cfg.log_messages { Some(&mut log_buf) } else { None };
        run_simulated(&sys, &params, &budget, &opts, log).map(|r| (r.trace, Some(r.stats)))
    } else {
        run(&sys, &params, &budget, &opts).map(|t| (t, None))
    };
    if cfg.log_messages {
        match &cfg.out {
            Some(dir) => write_file(&dir.join("messages.jsonl"), &String::from_utf8_lossy(&log_buf))?,
            None => std::io::stderr()
                .write_all(&log_buf)
                .map_err(|e| Error::io("<stderr>", e))?,
        }
    }

    let (trace, stats, failure) = match outcome {
        Ok((t, s)) => (t, s, None),
        Err(Error::Diverged {
            method,
            iteration,
            trace,
        }) => {
            let t = (*trace).clone();
            (
                t,
                None,
                Some(Error::Diverged {
                    method,
                    iteration,
                    trace,
                }),
            )
        }
        Err(e) => return Err(e),
    };
    let csv = trace.to_csv();
    let summary = summary_line(&trace);
    match &cfg.out {
        Some(dir) => {
            write_file(&dir.join("trace.csv"), &csv)?;
            let manifest = json!({
                "config": cfg,
                "source": loaded.source,
                "params": trace.params,
                "budget": budget,
                "trace": trace,
                "messages": stats,
                "error": failure.as_ref().map(|e| e.to_string()),
            });
            write_file(&dir.join("manifest.json"), &to_json(&manifest)?)?;
            emit(stdout, &summary)?;
        }
        None => {
            emit(stdout, &csv)?;
            eprint!("{summary}");
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Skipped {
    m: usize,
    reason: String,
}

fn write_table(dir: &Path, table: &ComparisonTable) -> Result<()> {
    ensure_dir(dir)?;
    write_file(&dir.join("comparison.csv"), &table.to_csv())?;
    write_file(&dir.join("comparison.json"), &(table.to_json()? + "\n"))?;
    let traces = dir.join("traces");
    ensure_dir(&traces)?;
    for row in &table.rows {
        if let Some(t) = &row.trace {
            write_file(&traces.join(format!("{}.csv", row.method)), &t.to_csv())?;
        }
    }
    Ok(())
}

pub fn cmd_bench(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let methods = cfg.methods_or(&Method::BENCH)?;
    let loaded = load_system(cfg)?;
    let sweep: Vec<usize> = match (&cfg.m_sweep, cfg.m) {
        (Some(s), _) if !s.is_empty() => s.clone(),
        (_, Some(m)) => vec![m],
        _ => return Err(Error::InvalidParameter("bench needs --m or --m-sweep".into())),
    };
    let budget = cfg.table_budget()?;
    let mode = if cfg.simulate {
        RunMode::Simulated
    } else {
        RunMode::Sequential
    };

    let mut tables = Vec::new();
    let mut skipped = Vec::new();
    let mut first_err = None;
    for &m in &sweep {
        let sys = match partition(&loaded, m) {
            Ok(s) => s,
            Err(e @ (Error::IndivisibleRows { .. } | Error::RankDeficientBlock { .. })) => {
                skipped.push(Skipped {
                    m,
                    reason: e.to_string(),
                });
                first_err.get_or_insert(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let table = build_comparison(&sys, &methods, budget, mode)?;
        emit(
            stdout,
            &format!(
                "# m={} kappa_X={} kappa_AtA={}\n",
                m,
                fmt_f64(table.kappa_x),
                fmt_f64(table.kappa_ata)
            ),
        )?;
        emit(stdout, &table.to_csv())?;
        if let Some(dir) = &cfg.out {
            write_table(&dir.join(format!("m{m}")), &table)?;
        }
        tables.push(table);
    }
    for s in &skipped {
        eprintln!("skipped m={}: {}", s.m, s.reason);
    }
    if tables.is_empty() {
        return Err(first_err.unwrap_or_else(|| Error::InvalidParameter("no worker count to run".into())));
    }
    if let Some(dir) = &cfg.out {
        let doc = json!({
            "config": cfg,
            "source": loaded.source,
            "skipped": skipped,
            "tables": tables,
        });
        write_file(&dir.join("bench.json"), &to_json(&doc)?)?;
    }
    Ok(())
}
