use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ingest::{
    partition_rows, read_matrix_market, read_vector, row_permutation, synth_gaussian, synth_solution, PartitionedSystem,
};
use crate::linalg::DenseMatrix;

use super::config::RunConfig;

/// Environment variable naming the fixture directory.
pub const FIXTURES_ENV: &str = "APC_FIXTURES";

const MANIFEST: &str = include_str!("../../../../fixtures/manifest.json");

#[derive(Clone, Debug, Deserialize)]
pub struct FixtureEntry {
    pub name: String,
    pub file: String,
    pub rows: usize,
    pub cols: usize,
    pub supported: bool,
    pub note: String,
}

#[derive(Deserialize)]
struct Manifest {
    fixtures: Vec<FixtureEntry>,
}

/// Expected shapes of the real-world fixtures.
pub fn fixture_manifest() -> Vec<FixtureEntry> {
    serde_json::from_str::<Manifest>(MANIFEST)
        .expect("bundled fixture manifest is valid")
        .fixtures
}

pub fn fixtures_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from)
}

/// Path of fixture `name` under `$APC_FIXTURES`, with its manifest entry.
pub fn resolve_fixture(name: &str) -> Result<(PathBuf, Option<FixtureEntry>)> {
    let entry = fixture_manifest()
        .into_iter()
        .find(|f| f.name.eq_ignore_ascii_case(name));
    let dir = fixtures_dir().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "--fixture {name} needs {FIXTURES_ENV} to point at the fixture directory"
        ))
    })?;
    let file = entry.as_ref().map_or_else(|| format!("{name}.mtx"), |e| e.file.clone());
    Ok((dir.join(file), entry))
}

/// Loads a fixture and checks its shape against the manifest.
pub fn load_fixture_matrix(name: &str) -> Result<DenseMatrix> {
    let (path, entry) = resolve_fixture(name)?;
    let a = read_matrix_market(&path)?;
    if let Some(e) = entry {
        if (a.rows(), a.cols()) != (e.rows, e.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}: manifest expects {}x{}, file is {}x{}",
                path.display(),
                e.rows,
                e.cols,
                a.rows(),
                a.cols()
            )));
        }
    }
    Ok(a)
}

/// A loaded but not yet partitioned system.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub source: String,
}

fn input_path(p: &Path) -> PathBuf {
    if p.exists() || p.is_absolute() {
        return p.to_path_buf();
    }
    match fixtures_dir() {
        Some(d) if d.join(p).exists() => d.join(p),
        _ => p.to_path_buf(),
    }
}

/// Reads or synthesizes `(A, b, x*)` and applies the optional row permutation.
///
/// Without `--rhs`, `b = A x*` where `x*` comes from `--solution` or is
/// drawn with `solution_seed`.
pub fn load_system(cfg: &RunConfig) -> Result<LoadedSystem> {
    let sources = [cfg.input.is_some(), cfg.fixture.is_some(), cfg.synth.is_some()];
    match sources.iter().filter(|s| **s).count() {
        0 => {
            return Err(Error::InvalidParameter(
                "need one of --input, --fixture, --synth".into(),
            ))
        }
        1 => {}
        _ => {
            return Err(Error::InvalidParameter(
                "--input, --fixture and --synth are exclusive".into(),
            ))
        }
    }
    let mut sys = if let Some(s) = cfg.synth {
        let g = synth_gaussian(s.n, s.rows, s.mean, s.seed)?;
        LoadedSystem {
            a: g.a,
            b: g.b,
            x_star: Some(g.x_star),
            source: format!("synth:{},{},{},{}", s.n, s.rows, s.mean, s.seed),
        }
    } else {
        let (a, source) = match (&cfg.input, &cfg.fixture) {
            (Some(p), _) => {
                let p = input_path(p);
                (read_matrix_market(&p)?, p.display().to_string())
            }
            (None, Some(name)) => (load_fixture_matrix(name)?, format!("fixture:{name}")),
            _ => unreachable!(),
        };
        let x_star = match &cfg.solution {
            Some(p) => Some(read_vector(&input_path(p))?),
            None if cfg.rhs.is_none() => Some(synth_solution(a.cols(), cfg.solution_seed.unwrap_or(0))),
            None => None,
        };
        let b = match (&cfg.rhs, &x_star) {
            (Some(p), _) => read_vector(&input_path(p))?,
            (None, Some(x)) => a.mat_vec(x)?,
            (None, None) => unreachable!(),
        };
        LoadedSystem { a, b, x_star, source }
    };
    if let Some(seed) = cfg.permute_seed {
        if sys.b.len() != sys.a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} entries for {} equations",
                sys.b.len(),
                sys.a.rows()
            )));
        }
        let perm = row_permutation(sys.a.rows(), seed);
        sys.a = sys.a.permute_rows(&perm);
        sys.b = perm.iter().map(|&i| sys.b[i]).collect();
    }
    Ok(sys)
}

pub fn partition(sys: &LoadedSystem, m: usize) -> Result<PartitionedSystem> {
    partition_rows(&sys.a, &sys.b, m, sys.x_star.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::SynthSpec;

    #[test]
    fn manifest_shapes() {
        let m = fixture_manifest();
        let find = |n: &str| m.iter().find(|f| f.name == n).unwrap().clone();
        assert_eq!((find("qc324").rows, find("qc324").cols), (324, 324));
        assert_eq!((find("orsirr_1").rows, find("orsirr_1").cols), (1030, 1030));
        assert_eq!((find("ash608").rows, find("ash608").cols), (608, 188));
        assert!(!find("qc324").supported);
    }

    #[test]
    fn synth_source() {
        let cfg = RunConfig {
            synth: Some(SynthSpec {
                n: 3,
                rows: 6,
                mean: 0.0,
                seed: 1,
            }),
            ..RunConfig::default()
        };
        let s = load_system(&cfg).unwrap();
        assert_eq!((s.a.rows(), s.a.cols()), (6, 3));
        assert!(s.x_star.is_some());
    }

    #[test]
    fn permutation_keeps_consistency() {
        let cfg = RunConfig {
            synth: Some(SynthSpec {
                n: 4,
                rows: 8,
                mean: 0.0,
                seed: 2,
            }),
            permute_seed: Some(5),
            ..RunConfig::default()
        };
        let s = load_system(&cfg).unwrap();
        let ax = s.a.mat_vec(s.x_star.as_ref().unwrap()).unwrap();
        assert_eq!(ax, s.b);
    }

    #[test]
    fn missing_source() {
        assert!(matches!(
            load_system(&RunConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
    }
}
