use serde::Serialize;

use crate::error::{Error, Result};

/// Head counts at one level of the pyramid. Level 0 counts adults by
/// occupation; level `l > 0` counts the teachers of the level `l-1` groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusLevel {
    pub workers: u64,
    pub managers: u64,
    pub teachers: u64,
}

impl CensusLevel {
    pub fn total(&self) -> u64 {
        self.workers + self.managers + self.teachers
    }
}

/// How the topmost teachers share the last level that no longer divides
/// evenly into classes of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Apex {
    pub teach_workers: u64,
    pub teach_managers: u64,
    pub teach_teachers: u64,
    /// Teachers with a mixed class.
    pub mixed: u64,
    /// Students in mixed classes, by group.
    pub mixed_students: CensusLevel,
}

impl Apex {
    pub fn total(&self) -> u64 {
        self.teach_workers + self.teach_managers + self.teach_teachers + self.mixed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuruHierarchy {
    pub population: u64,
    pub n: u64,
    pub n_prime: u64,
    pub levels: Vec<CensusLevel>,
    pub apex: Apex,
    /// Levels plus the apex split.
    pub depth: usize,
}

fn admissible(n: u64, n_prime: u64, p: u64) -> bool {
    p > 0 && p % n == 0 && (p - p / n) % (n_prime + 1) == 0
}

/// Closest admissible populations strictly below and above `p`.
pub fn nearest_admissible(n: u64, n_prime: u64, p: u64) -> (Option<u64>, u64) {
    let below = (1..p).rev().find(|&q| admissible(n, n_prime, q));
    let above = (p + 1..).find(|&q| admissible(n, n_prime, q)).expect("multiples of n(n'+1) are admissible");
    (below, above)
}

/// Exact integer decomposition of `population` adults with classes of `n`
/// students and teams of `n_prime` workers per manager.
pub fn guru_census(n: u64, n_prime: u64, population: u64) -> Result<GuruHierarchy> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "N", value: n as f64, bound: "N >= 2 for a finite census" });
    }
    if n_prime < 1 {
        return Err(Error::InvalidParameter { name: "N'", value: n_prime as f64, bound: "N' >= 1" });
    }
    if !admissible(n, n_prime, population) {
        let (below, above) = nearest_admissible(n, n_prime, population);
        return Err(Error::Inadmissible { population, below, above });
    }
    let teachers = population / n;
    let managers = (population - teachers) / (n_prime + 1);
    let mut levels = vec![CensusLevel { workers: managers * n_prime, managers, teachers }];
    loop {
        let l = *levels.last().unwrap();
        if l.workers % n == 0 && l.managers % n == 0 && l.teachers % n == 0 && l.teachers > 0 {
            levels.push(CensusLevel { workers: l.workers / n, managers: l.managers / n, teachers: l.teachers / n });
        } else {
            break;
        }
    }
    let last = *levels.last().unwrap();
    let rest = CensusLevel { workers: last.workers % n, managers: last.managers % n, teachers: last.teachers % n };
    let apex = Apex {
        teach_workers: last.workers / n,
        teach_managers: last.managers / n,
        teach_teachers: last.teachers / n,
        mixed: rest.total() / n,
        mixed_students: rest,
    };
    let depth = levels.len() + 1;
    Ok(GuruHierarchy { population, n, n_prime, levels, apex, depth })
}

fn plural(count: u64, one: &str, many: &str) -> String {
    format!("{count} {}", if count == 1 { one } else { many })
}

/// "teachers of teachers of ..." prefix for level `l`.
fn role(l: usize, base: &str) -> String {
    let mut s = base.to_string();
    for _ in 0..l {
        s = format!("teachers of {s}");
    }
    s
}

impl GuruHierarchy {
    /// Nested sum, e.g. `110 = 90+9+(9+1+1)`.
    pub fn mnemonic(&self) -> String {
        let a = &self.apex;
        let mut inner = format!("{}+{}+{}", a.teach_workers, a.teach_managers + a.mixed, a.teach_teachers);
        for l in self.levels.iter().rev() {
            inner = format!("{}+{}+({inner})", l.workers, l.managers);
        }
        format!("{} = {inner}", self.population)
    }

    /// Indented text tree.
    pub fn render_tree(&self) -> String {
        let mut out = format!("{} adults (N = {}, N' = {})\n", self.population, self.n, self.n_prime);
        let mut indent = String::new();
        for (l, lv) in self.levels.iter().enumerate() {
            if l == 0 {
                out += &format!("{indent}├── {}\n", plural(lv.workers, "worker", "workers"));
                out += &format!("{indent}├── {}\n", plural(lv.managers, "manager", "managers"));
                out += &format!("{indent}└── {}\n", plural(lv.teachers, "teacher", "teachers"));
            } else {
                out += &format!("{indent}├── {} teach {}\n", lv.workers, role(l - 1, "workers"));
                out += &format!("{indent}├── {} teach {}\n", lv.managers, role(l - 1, "managers"));
                out += &format!("{indent}└── {} teach {}\n", lv.teachers, role(l - 1, "teachers"));
            }
            indent += "    ";
        }
        let l = self.levels.len() - 1;
        let a = &self.apex;
        out += &format!("{indent}├── {} teach {}\n", a.teach_workers, role(l, "workers"));
        out += &format!("{indent}├── {} teach {}\n", a.teach_managers, role(l, "managers"));
        out += &format!("{indent}├── {} teach {}\n", a.teach_teachers, role(l, "teachers"));
        let s = &a.mixed_students;
        out += &format!(
            "{indent}└── {} teach a mix of {} + {} + {}\n",
            a.mixed,
            plural(s.workers, &role(l, "worker"), &role(l, "workers")),
            plural(s.managers, &role(l, "manager"), &role(l, "managers")),
            plural(s.teachers, &role(l, "teacher"), &role(l, "teachers")),
        );
        out
    }
}
