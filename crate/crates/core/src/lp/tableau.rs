//! Plain-text LP exchange format and sparse coupling CSV.
//!
//! ```text
//! pyramid-lp 1
//! n <grid nodes>
//! delta <δ>
//! variables <count>
//! rows <count>
//! objective <c_0> <c_1> ...
//! row <i> rhs <b_i> : <j>:<a_ij> <j>:<a_ij> ...
//! ```
//! Numbers are written in shortest round-trip decimal form, so a
//! write/read cycle reproduces the instance bit for bit.

use std::fmt::Write as _;

use num::BigRational;

use crate::error::{Error, Result};
use crate::lp::assemble::DiscreteLP;
use crate::lp::simplex::SparseCol;
use crate::model::GridCoupling;

pub fn to_tableau_text(lp: &DiscreteLP<f64>) -> String {
    let m = lp.rhs.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (j, col) in lp.columns.iter().enumerate() {
        for (r, v) in col.rows.iter().zip(&col.vals) {
            rows[*r].push((j, *v));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "pyramid-lp 1");
    let _ = writeln!(out, "n {}", lp.n);
    let _ = writeln!(out, "delta {}", lp.delta);
    let _ = writeln!(out, "variables {}", lp.columns.len());
    let _ = writeln!(out, "rows {m}");
    out.push_str("objective");
    for c in &lp.objective {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(out, "row {i} rhs {} :", lp.rhs[i]);
        for (j, v) in row {
            let _ = write!(out, " {j}:{v}");
        }
        out.push('\n');
    }
    out
}

fn field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Tableau(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| Error::Tableau(format!("expected `{key}`, found `{line}`")))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Tableau(format!("bad {what}: `{s}`")))
}

pub fn from_tableau_text(text: &str) -> Result<DiscreteLP<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if field(lines.next(), "pyramid-lp")? != "1" {
        return Err(Error::Tableau("unsupported version".into()));
    }
    let n: usize = num(field(lines.next(), "n")?, "n")?;
    let delta: f64 = num(field(lines.next(), "delta")?, "delta")?;
    let vars: usize = num(field(lines.next(), "variables")?, "variables")?;
    let m: usize = num(field(lines.next(), "rows")?, "rows")?;
    let objective: Vec<f64> = field(lines.next(), "objective")?
        .split_whitespace()
        .map(|s| num(s, "objective coefficient"))
        .collect::<Result<_>>()?;
    if objective.len() != vars {
        return Err(Error::Tableau(format!("{} objective coefficients for {vars} variables", objective.len())));
    }
    let mut pairs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vars];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        let body = field(lines.next(), "row")?;
        let (head, entries) = body.split_once(':').ok_or_else(|| Error::Tableau(format!("row {i}: missing `:`")))?;
        let mut head = head.split_whitespace();
        let idx: usize = num(head.next().unwrap_or(""), "row index")?;
        if idx != i || head.next() != Some("rhs") {
            return Err(Error::Tableau(format!("row {i}: malformed header")));
        }
        rhs[i] = num(head.next().unwrap_or(""), "rhs")?;
        for e in entries.split_whitespace() {
            let (j, v) = e.split_once(':').ok_or_else(|| Error::Tableau(format!("row {i}: bad entry `{e}`")))?;
            let j: usize = num(j, "column index")?;
            if j >= vars {
                return Err(Error::Tableau(format!("row {i}: column {j} out of range")));
            }
            pairs[j].push((i, num(v, "coefficient")?));
        }
    }
    let columns = pairs.into_iter().map(|p| SparseCol { rows: p.iter().map(|e| e.0).collect(), vals: p.iter().map(|e| e.1).collect() }).collect();
    let seed_basis = if vars == 2 * n * n && m == 2 * n { crate::lp::assemble::seed_basis(n) } else { Vec::new() };
    Ok(DiscreteLP { n, delta, objective, columns, rhs, seed_basis })
}

/// Exact rational copy of a floating LP (every `f64` is a dyadic rational).
pub fn to_rational(lp: &DiscreteLP<f64>) -> DiscreteLP<BigRational> {
    let q = |x: f64| BigRational::from_float(x).expect("finite coefficient");
    DiscreteLP {
        n: lp.n,
        delta: q(lp.delta),
        objective: lp.objective.iter().map(|&c| q(c)).collect(),
        columns: lp
            .columns
            .iter()
            .map(|c| SparseCol { rows: c.rows.clone(), vals: c.vals.iter().map(|&v| q(v)).collect() })
            .collect(),
        rhs: lp.rhs.iter().map(|&b| q(b)).collect(),
        seed_basis: lp.seed_basis.clone(),
    }
}

/// `row,col,weight` CSV with header, entries in stored order.
pub fn coupling_csv(c: &GridCoupling<f64>) -> String {
    let mut out = String::from("row,col,weight\n");
    for &(r, k, w) in &c.entries {
        let _ = writeln!(out, "{r},{k},{w}");
    }
    out
}

pub fn parse_coupling_csv(n: usize, text: &str) -> Result<GridCoupling<f64>> {
    let mut entries = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Tableau(format!("coupling line {}: expected 3 fields", ln + 1)));
        }
        entries.push((num(parts[0], "row")?, num(parts[1], "col")?, num(parts[2], "weight")?));
    }
    GridCoupling::new(n, entries)
}
