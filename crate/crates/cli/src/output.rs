//! Deterministic CSV/JSON emission with write-then-rename.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clustersync::sim::Trajectory;
use serde::Serialize;

use crate::error::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(contents).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// `prefix` + `suffix`, e.g. `out/run` + `.trajectory.csv`.
pub fn with_suffix(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `t,E,V,x_1_1,…,x_N_n,s_1_1,…,s_m_n`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.dim;
    let nodes = traj.node_states.first().map_or(0, |v| v.len() / n);
    let targets = traj.target_states.first().map_or(0, |v| v.len() / n);
    let mut out = String::from("t,E,V");
    for i in 1..=nodes {
        for l in 1..=n {
            write!(out, ",x_{i}_{l}").unwrap();
        }
    }
    for k in 1..=targets {
        for l in 1..=n {
            write!(out, ",s_{k}_{l}").unwrap();
        }
    }
    out.push('\n');
    for idx in 0..traj.len() {
        write!(out, "{},{},{}", traj.times[idx], traj.error_index[idx], traj.lyapunov[idx]).unwrap();
        for v in traj.node_states[idx].iter().chain(&traj.target_states[idx]) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
