//! Analysis pipeline and its JSON report: tiling, volumes, energies and
//! latency, plus concrete evaluation of a report at parameter bindings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::energy::{total_energy, EnergyError, EnergyReport, EnergyTable, MemClass, VolumeReport};
use crate::linear::{Bindings, Lin, ParamConstraint, UnboundParam};
use crate::mapping::MappingConfig;
use crate::par::{map_vec, Exec};
use crate::polycount::{count_concrete, volume, CountError, PiecewisePolynomial};
use crate::pra::{build_rdg, parse_pra, validate, ConstraintSystem, DiagnosticKind, ParseError, Program, Role};
use crate::schedule::{compute_iteration_schedule, global_latency, IterationSchedule, ScheduleError, ScheduleSpec};
use crate::sim::AccessCounts;
use crate::tiling::{tile_program, Assumption, TiledKind, TilingError, TilingSpec};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("unbound parameters: {}", .0.join(", "))]
    Unbound(Vec<String>),
    #[error("bindings violate assumptions: {}", .0.join("; "))]
    Violated(Vec<String>),
    #[error("tiling does not cover the iteration space at these bindings")]
    NotCovering,
    #[error("unsupported report schema {0}")]
    Schema(u32),
    #[error("report is inconsistent: {0}")]
    Inconsistent(String),
}

impl From<UnboundParam> for ReportError {
    fn from(e: UnboundParam) -> Self {
        ReportError::Unbound(vec![e.0])
    }
}

/// Condition space of a statement whose volume is counted at evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumeratedSpace {
    pub id: String,
    pub condition: ConstraintSystem,
}

/// Concrete values at one binding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concrete {
    pub bindings: Bindings,
    pub counts: AccessCounts,
    pub contribution_fj: BTreeMap<String, i128>,
    pub class_energy_fj: BTreeMap<MemClass, i128>,
    pub op_energy_fj: BTreeMap<String, i128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    /// SHA-256 of the program text.
    pub program_digest: String,
    pub parameters: Vec<String>,
    pub vars: Vec<String>,
    pub upper: Vec<Lin>,
    pub tiling: TilingSpec,
    pub schedule: Option<ScheduleSpec>,
    pub energy_table: EnergyTable,
    pub assumptions: Vec<Assumption>,
    pub warnings: Vec<String>,
    pub iteration: IterationSchedule,
    pub latency: Option<PiecewisePolynomial>,
    pub energy: EnergyReport,
    pub enumerated_spaces: Vec<EnumeratedSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concrete: Option<Concrete>,
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Warnings about a program that do not stop the analysis.
pub fn program_warnings(program: &Program) -> Vec<String> {
    let mut readers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for s in &program.statements {
        for r in s.reads() {
            if r.role == Role::Input || program.is_input(&r.name) {
                readers.entry(r.name.as_str()).or_default().push(s.label.as_str());
            }
        }
    }
    readers
        .into_iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(name, v)| {
            format!(
                "input {name} is read by {} ({} reads); each read is charged as a DRAM access",
                v.join(", "),
                v.len()
            )
        })
        .collect()
}

/// Parses, validates, tiles and analyzes a program under a mapping.
pub fn analyze(text: &str, mapping: &MappingConfig, exec: Exec) -> Result<AnalysisReport, ReportError> {
    let program = parse_pra(text)?;
    let (notes, errors): (Vec<_>, Vec<_>) = validate(&program)
        .into_iter()
        .partition(|d| d.kind == DiagnosticKind::UnusedInput);
    let errors: Vec<String> = errors.iter().map(|d| d.to_string()).collect();
    if !errors.is_empty() {
        return Err(ReportError::Invalid(errors.join("; ")));
    }
    let tiled = tile_program(&program, &mapping.tiling, &mapping.assume)?;
    let mut domain: Vec<ParamConstraint> = mapping.assume.clone();
    domain.extend(tiled.assumptions.iter().map(|a| a.constraint.clone()));

    let t = mapping.tiling.counts.clone();
    let volumes = map_vec(exec, &tiled.statements, |s| volume(&s.condition, &t, &domain));
    let volumes = volumes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let items: Vec<_> = tiled.statements.iter().zip(&volumes).collect();
    let energy = total_energy(&items, &mapping.table, &domain, exec)?;

    let mut warnings: Vec<String> = notes.iter().map(|d| d.to_string()).collect();
    warnings.extend(program_warnings(&program));
    let mut enumerated_spaces = Vec::new();
    for (s, e) in tiled.statements.iter().zip(&energy.statements) {
        if let VolumeReport::Enumerated { reason } = &e.volume {
            warnings.push(format!("{} volume is counted by enumeration at evaluation: {reason}", s.id));
            enumerated_spaces.push(EnumeratedSpace {
                id: s.id.clone(),
                condition: s.condition.clone(),
            });
        }
    }
    let rdg = build_rdg(&program);
    let w = mapping.schedule.as_ref().map(|s| s.w.clone()).unwrap_or_default();
    let iteration = compute_iteration_schedule(&rdg, &w)?;
    let latency = match &mapping.schedule {
        Some(s) => {
            warnings.push(format!(
                "initiation interval {} is reported but does not enter the latency",
                s.pi
            ));
            Some(global_latency(s, &mapping.tiling, iteration.lc)?)
        }
        None => None,
    };
    let mut parameters = program.param_names();
    for p in mapping.tiling.size_params() {
        if !parameters.contains(&p) {
            parameters.push(p);
        }
    }
    let mut assumptions = tiled.assumptions.clone();
    for c in &mapping.assume {
        assumptions.push(Assumption {
            constraint: c.clone(),
            reason: "declared in mapping".into(),
            discharged: false,
        });
    }
    Ok(AnalysisReport {
        schema: SCHEMA,
        program_digest: digest(text),
        parameters,
        vars: program.vars.clone(),
        upper: program.upper.clone(),
        tiling: mapping.tiling.clone(),
        schedule: mapping.schedule.clone(),
        energy_table: mapping.table.clone(),
        assumptions,
        warnings,
        iteration,
        latency,
        energy,
        enumerated_spaces,
        concrete: None,
    })
}

impl AnalysisReport {
    /// Concrete counts and energies at `bindings`; time depends only on the
    /// number of pieces, except for enumerated volumes.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<Concrete, ReportError> {
        if self.schema != SCHEMA {
            return Err(ReportError::Schema(self.schema));
        }
        let unbound: Vec<String> = self.parameters.iter().filter(|p| !bindings.contains_key(*p)).cloned().collect();
        if !unbound.is_empty() {
            return Err(ReportError::Unbound(unbound));
        }
        let mut violated = Vec::new();
        for a in &self.assumptions {
            if !a.constraint.holds(bindings)? {
                violated.push(format!("{} ({})", a.constraint, a.reason));
            }
        }
        if !violated.is_empty() {
            return Err(ReportError::Violated(violated));
        }
        for (l, u) in self.upper.iter().enumerate() {
            let p = self.tiling.sizes[l].eval(bindings)?;
            if p * self.tiling.counts[l] < u.eval(bindings)? {
                return Err(ReportError::NotCovering);
            }
        }

        let table = &self.energy_table;
        let mut counts = AccessCounts::default();
        let mut contribution_fj = BTreeMap::new();
        for c in MemClass::ALL {
            counts.per_class.insert(c, self.energy.class_counts[&c].eval(bindings)?);
        }
        for (op, pw) in &self.energy.op_counts {
            counts.per_op.insert(op.clone(), pw.eval(bindings)?);
        }
        counts.energy_fj = self.energy.energy_total_fj.eval(bindings)?;
        for s in &self.energy.statements {
            let v = match &s.volume {
                VolumeReport::Symbolic { pieces } => pieces.eval(bindings)?,
                VolumeReport::Enumerated { .. } => {
                    let space = self
                        .enumerated_spaces
                        .iter()
                        .find(|e| e.id == s.id)
                        .ok_or_else(|| ReportError::Inconsistent(format!("no condition space for {}", s.id)))?;
                    let v = count_concrete(&space.condition, bindings)?;
                    for (c, m) in s.profile.by_class() {
                        *counts.per_class.get_mut(&c).unwrap() += v * m as i128;
                    }
                    for (op, m) in &s.ops {
                        *counts.per_op.get_mut(op).unwrap() += v * *m as i128;
                    }
                    counts.energy_fj += v * s.energy_per_exec_fj as i128;
                    v
                }
            };
            counts.per_statement.insert(s.id.clone(), v);
            contribution_fj.insert(s.id.clone(), v * s.energy_per_exec_fj as i128);
        }
        counts.latency = self.latency.as_ref().map(|l| l.eval(bindings)).transpose()?;

        let class_energy_fj: BTreeMap<MemClass, i128> =
            counts.per_class.iter().map(|(c, n)| (*c, n * table.class(*c) as i128)).collect();
        let mut op_energy_fj = BTreeMap::new();
        for (op, n) in &counts.per_op {
            op_energy_fj.insert(op.clone(), n * table.op(op)? as i128);
        }
        let priced = class_energy_fj.values().sum::<i128>() + op_energy_fj.values().sum::<i128>();
        let summed: i128 = contribution_fj.values().sum();
        if priced != counts.energy_fj || summed != counts.energy_fj {
            return Err(ReportError::Inconsistent(format!(
                "total {} fJ, priced classes and operations {priced} fJ, summed statements {summed} fJ",
                counts.energy_fj
            )));
        }
        Ok(Concrete {
            bindings: bindings.clone(),
            counts,
            contribution_fj,
            class_energy_fj,
            op_energy_fj,
        })
    }

    /// Ids of memory statements, in report order.
    pub fn memory_statements(&self) -> impl Iterator<Item = &str> {
        self.energy
            .statements
            .iter()
            .filter(|s| s.kind == TiledKind::Memory)
            .map(|s| s.id.as_str())
    }
}
