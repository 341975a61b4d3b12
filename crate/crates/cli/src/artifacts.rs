//! Reading and writing result files.

use std::fs;
use std::path::Path;

use pyramid_core::lp::{coupling_csv, parse_coupling_csv};
use pyramid_core::{Coupling, Grid, Profile};
use serde::Serialize;

use crate::error::CliError;

pub const WAGES: &str = "wages.csv";
pub const EPS: &str = "matching_eps.csv";
pub const LAMBDA: &str = "matching_lambda.csv";

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    write(dir, name, &text)
}

fn occupation(w: f64, m: f64, t: f64) -> &'static str {
    if w >= m && w >= t {
        "worker"
    } else if m >= t {
        "manager"
    } else {
        "teacher"
    }
}

pub fn wages_csv(profile: &Profile, grid: &Grid) -> String {
    let mut out = String::from("node,skill,v,u,v_w,v_m,v_t,occupation\n");
    for i in 0..grid.n {
        let (w, m, t) = (profile.v_w[i], profile.v_m[i], profile.v_t[i]);
        out.push_str(&format!(
            "{i},{},{},{},{w},{m},{t},{}\n",
            grid.node(i),
            profile.v[i],
            profile.u[i],
            occupation(w, m, t)
        ));
    }
    out
}

pub fn write_coupling(dir: &Path, name: &str, c: &Coupling) -> Result<(), CliError> {
    write(dir, name, &coupling_csv(c))
}

/// Columns of `wages.csv` by name.
#[derive(Debug, Clone, Default)]
pub struct WageTable {
    pub skill: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

pub fn read_wages(dir: &Path, n: usize) -> Result<WageTable, CliError> {
    let path = dir.join(WAGES);
    let mut reader = csv::Reader::from_path(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Input(format!("{}: no `{name}` column", path.display())))
    };
    let (ks, vs, us) = (col("skill")?, col("v")?, col("u")?);
    let mut t = WageTable::default();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let num = |c: usize| {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| CliError::Input(format!("{}: malformed row {:?}", path.display(), rec.position())))
        };
        t.skill.push(num(ks)?);
        t.v.push(num(vs)?);
        t.u.push(num(us)?);
    }
    if t.v.len() != n {
        return Err(CliError::Input(format!("{}: {} rows for a {n}-node grid", path.display(), t.v.len())));
    }
    Ok(t)
}

pub fn read_coupling(dir: &Path, name: &str, n: usize) -> Result<Coupling, CliError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    parse_coupling_csv(n, &text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
