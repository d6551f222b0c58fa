//! Memory-class access pricing, per-statement energies and the total energy
//! as a piecewise polynomial in femtojoules.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linear::{Lin, ParamConstraint};
use crate::polycount::{Combination, PiecewisePolynomial, SymbolicVolume, Volume};
use crate::par::{map_vec, Exec};
use crate::pra::Role;
use crate::tiling::{TiledKind, TiledStatement};

/// Default energy table, 45 nm figures in femtojoules.
pub const DEFAULT_TABLE: &str = include_str!("../benchmarks/energy/table1.energy");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnergyError {
    #[error("energy table line {line}: {detail}")]
    Table { line: usize, detail: String },
    #[error("energy table is missing required key `{0}`")]
    MissingClass(MemClass),
    #[error("operation `{0}` has no entry in the energy table")]
    MissingOp(String),
    #[error("cannot read energy table {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("unresolvable symbolic zero-test on d_K component `{0}`")]
    Unresolvable(String),
    #[error("duplicate statement `{0}`")]
    Duplicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MemClass {
    RD,
    FD,
    ID,
    OD,
    IOb,
    DR,
}

impl MemClass {
    pub const ALL: [MemClass; 6] = [MemClass::RD, MemClass::FD, MemClass::ID, MemClass::OD, MemClass::IOb, MemClass::DR];
}

impl fmt::Display for MemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemClass::RD => "RD",
            MemClass::FD => "FD",
            MemClass::ID => "ID",
            MemClass::OD => "OD",
            MemClass::IOb => "IOb",
            MemClass::DR => "DR",
        })
    }
}

impl FromStr for MemClass {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "RD" => MemClass::RD,
            "FD" => MemClass::FD,
            "ID" => MemClass::ID,
            "OD" => MemClass::OD,
            "IOb" | "IO" => MemClass::IOb,
            "DR" => MemClass::DR,
            _ => return Err(()),
        })
    }
}

/// Per-class and per-operation energies in integer femtojoules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyTable {
    pub classes: BTreeMap<MemClass, i64>,
    pub ops: BTreeMap<String, i64>,
}

impl EnergyTable {
    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are
    /// operation energies.
    pub fn parse(text: &str) -> Result<Self, EnergyError> {
        let mut classes = BTreeMap::new();
        let mut ops = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |detail: String| EnergyError::Table { line: i + 1, detail };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let value: i64 = v
                .parse()
                .map_err(|_| err(format!("`{v}` is not an integer femtojoule value")))?;
            if value < 0 {
                return Err(err(format!("`{k}` is negative")));
            }
            let fresh = match k.parse::<MemClass>() {
                Ok(c) => classes.insert(c, value).is_none(),
                Err(()) => ops.insert(k.to_string(), value).is_none(),
            };
            if !fresh {
                return Err(err(format!("`{k}` given twice")));
            }
        }
        for c in MemClass::ALL {
            if !classes.contains_key(&c) {
                return Err(EnergyError::MissingClass(c));
            }
        }
        ops.entry("copy".to_string()).or_insert(0);
        Ok(EnergyTable { classes, ops })
    }

    pub fn load(path: &Path) -> Result<Self, EnergyError> {
        let text = std::fs::read_to_string(path).map_err(|e| EnergyError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn class(&self, c: MemClass) -> i64 {
        self.classes[&c]
    }

    pub fn op(&self, name: &str) -> Result<i64, EnergyError> {
        self.ops.get(name).copied().ok_or_else(|| EnergyError::MissingOp(name.to_string()))
    }

    pub fn price(&self, classes: &[(MemClass, u32)]) -> i64 {
        classes.iter().map(|(c, m)| self.class(*c) * *m as i64).sum()
    }
}

impl Default for EnergyTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("shipped table parses")
    }
}

/// Classes touched by one execution, split into reads and writes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessProfile {
    pub reads: Vec<(MemClass, u32)>,
    pub writes: Vec<(MemClass, u32)>,
}

impl AccessProfile {
    /// Accesses per class, reads and writes together.
    pub fn by_class(&self) -> BTreeMap<MemClass, u32> {
        let mut out = BTreeMap::new();
        for (c, m) in self.reads.iter().chain(&self.writes) {
            *out.entry(*c).or_insert(0) += m;
        }
        out
    }
}

const INPUT_COMPOSITE: [(MemClass, u32); 3] = [(MemClass::DR, 1), (MemClass::IOb, 1), (MemClass::ID, 1)];
const OUTPUT_COMPOSITE: [(MemClass, u32); 3] = [(MemClass::DR, 1), (MemClass::IOb, 1), (MemClass::OD, 1)];

/// Memory classes of one access to a variable of `role` whose tiled
/// dependence is `(dj, dk)`.
pub fn access_classes(role: Role, dj: &[Lin], dk: &[Lin]) -> Result<Vec<(MemClass, u32)>, EnergyError> {
    match role {
        Role::Input => return Ok(INPUT_COMPOSITE.to_vec()),
        Role::Output => return Ok(OUTPUT_COMPOSITE.to_vec()),
        Role::Internal => {}
    }
    let zero = |v: &Lin| -> Result<bool, EnergyError> {
        match v.as_constant() {
            Some(c) => Ok(c == 0),
            None => Err(EnergyError::Unresolvable(v.to_string())),
        }
    };
    let mut dk_zero = true;
    for v in dk {
        if !zero(v)? {
            dk_zero = false;
        }
    }
    if !dk_zero {
        return Ok(vec![(MemClass::ID, 1)]);
    }
    let mut dj_zero = true;
    for v in dj {
        if !zero(v)? {
            dj_zero = false;
        }
    }
    Ok(vec![(if dj_zero { MemClass::RD } else { MemClass::FD }, 1)])
}

/// Accesses of one execution of a tiled statement.
pub fn profile(ts: &TiledStatement) -> Result<AccessProfile, EnergyError> {
    match ts.kind {
        TiledKind::Computational => Ok(AccessProfile {
            reads: if ts.reads > 0 {
                vec![(MemClass::RD, ts.reads as u32)]
            } else {
                Vec::new()
            },
            writes: if ts.role == Role::Output {
                OUTPUT_COMPOSITE.to_vec()
            } else {
                vec![(MemClass::RD, 1)]
            },
        }),
        TiledKind::Memory => {
            let dk: Vec<Lin> = ts.dk.iter().map(|k| Lin::constant(*k)).collect();
            Ok(AccessProfile {
                reads: access_classes(ts.role, &ts.dj, &dk)?,
                writes: vec![(MemClass::RD, 1)],
            })
        }
    }
}

/// Energy of one execution of a memory statement: source read plus a
/// register write.
pub fn statement_energy_mem(ts: &TiledStatement, table: &EnergyTable) -> Result<i64, EnergyError> {
    debug_assert_eq!(ts.kind, TiledKind::Memory);
    let p = profile(ts)?;
    Ok(table.price(&p.reads) + table.price(&p.writes))
}

/// Energy of one execution of a computational statement: register reads of
/// every argument, the operations, and the left-hand-side write.
pub fn statement_energy_comp(ts: &TiledStatement, table: &EnergyTable) -> Result<i64, EnergyError> {
    debug_assert_eq!(ts.kind, TiledKind::Computational);
    let p = profile(ts)?;
    let mut e = table.price(&p.reads) + table.price(&p.writes);
    for (op, n) in &ts.ops {
        e += table.op(op)? * *n as i64;
    }
    Ok(e)
}

pub fn statement_energy(ts: &TiledStatement, table: &EnergyTable) -> Result<i64, EnergyError> {
    match ts.kind {
        TiledKind::Computational => statement_energy_comp(ts, table),
        TiledKind::Memory => statement_energy_mem(ts, table),
    }
}

/// Symbolic volume in report form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VolumeReport {
    Symbolic { pieces: PiecewisePolynomial },
    Enumerated { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementEnergy {
    pub id: String,
    pub origin: String,
    pub kind: TiledKind,
    pub dependence: String,
    pub profile: AccessProfile,
    pub ops: BTreeMap<String, u32>,
    pub energy_per_exec_fj: i64,
    pub volume: VolumeReport,
    /// Volume times per-execution energy; absent for enumerated volumes.
    pub contribution_fj: Option<PiecewisePolynomial>,
}

/// Symbolic totals; statements listed in `enumerated` are excluded from
/// every polynomial and added at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub statements: Vec<StatementEnergy>,
    pub class_counts: BTreeMap<MemClass, PiecewisePolynomial>,
    pub op_counts: BTreeMap<String, PiecewisePolynomial>,
    pub energy_total_fj: PiecewisePolynomial,
    pub enumerated: Vec<String>,
}

/// Assembles the total energy from volumes and per-execution energies.
pub fn total_energy(
    items: &[(&TiledStatement, &Volume)],
    table: &EnergyTable,
    domain: &[ParamConstraint],
    exec: Exec,
) -> Result<EnergyReport, EnergyError> {
    let mut seen = std::collections::BTreeSet::new();
    for (ts, _) in items {
        if !seen.insert(ts.id.as_str()) {
            return Err(EnergyError::Duplicate(ts.id.clone()));
        }
    }
    let mut symbolic: Vec<(usize, &SymbolicVolume)> = Vec::new();
    let mut statements = Vec::new();
    let mut enumerated = Vec::new();
    let mut profiles = Vec::new();
    for (i, (ts, vol)) in items.iter().enumerate() {
        let e = statement_energy(ts, table)?;
        let prof = profile(ts)?;
        let (volume, contribution) = match vol {
            Volume::Symbolic(v) => {
                symbolic.push((i, v));
                let pw = v.to_piecewise(domain);
                let c = pw.scale(e);
                (VolumeReport::Symbolic { pieces: pw }, Some(c))
            }
            Volume::Enumerated { reason } => {
                enumerated.push(ts.id.clone());
                (VolumeReport::Enumerated { reason: reason.clone() }, None)
            }
        };
        profiles.push((prof.clone(), e));
        statements.push(StatementEnergy {
            id: ts.id.clone(),
            origin: ts.origin.clone(),
            kind: ts.kind,
            dependence: ts.render_dependence(),
            profile: prof,
            ops: ts.ops.clone(),
            energy_per_exec_fj: e,
            volume,
            contribution_fj: contribution,
        });
    }

    let vols: Vec<&SymbolicVolume> = symbolic.iter().map(|(_, v)| *v).collect();
    let comb = Combination::new(&vols, domain);
    let weights = |f: &dyn Fn(usize) -> i64| -> Vec<i64> { symbolic.iter().map(|(i, _)| f(*i)).collect() };

    let mut op_names: Vec<String> = items.iter().flat_map(|(ts, _)| ts.ops.keys().cloned()).collect();
    op_names.sort();
    op_names.dedup();
    let mut jobs: Vec<Vec<i64>> = MemClass::ALL
        .iter()
        .map(|c| weights(&|i| *profiles[i].0.by_class().get(c).unwrap_or(&0) as i64))
        .collect();
    jobs.extend(op_names.iter().map(|op| weights(&|i| *items[i].0.ops.get(op).unwrap_or(&0) as i64)));
    jobs.push(weights(&|i| profiles[i].1));
    let mut results = map_vec(exec, &jobs, |w| comb.weighted(w)).into_iter();
    let class_counts: BTreeMap<MemClass, PiecewisePolynomial> =
        MemClass::ALL.iter().map(|c| (*c, results.next().unwrap())).collect();
    let op_counts: BTreeMap<String, PiecewisePolynomial> = op_names.into_iter().map(|op| (op, results.next().unwrap())).collect();
    let energy_total_fj = results.next().unwrap();
    Ok(EnergyReport {
        statements,
        class_counts,
        op_counts,
        energy_total_fj,
        enumerated,
    })
}

/// Renders femtojoules as picojoules with three decimals.
pub fn format_pj(fj: i128) -> String {
    let sign = if fj < 0 { "-" } else { "" };
    let a = fj.unsigned_abs();
    format!("{sign}{}.{:03} pJ", a / 1000, a % 1000)
}
