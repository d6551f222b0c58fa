use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ast::{Program, Role};
use super::rdg::build_rdg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    OutputRead,
    InputWritten,
    LhsDependence,
    UndeclaredInput,
    UndeclaredOutput,
    UnwrittenOutput,
    UnusedInput,
    ConflictingDeclaration,
    ProjectedInternal,
    DuplicateLabel,
    UnknownIdentifier,
    ZeroDependenceCycle,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::OutputRead => "output read",
            DiagnosticKind::InputWritten => "input written",
            DiagnosticKind::LhsDependence => "left-hand side with nonzero dependence",
            DiagnosticKind::UndeclaredInput => "undeclared input",
            DiagnosticKind::UndeclaredOutput => "undeclared output",
            DiagnosticKind::UnwrittenOutput => "unwritten output",
            DiagnosticKind::UnusedInput => "unused input",
            DiagnosticKind::ConflictingDeclaration => "conflicting declaration",
            DiagnosticKind::ProjectedInternal => "projected internal variable",
            DiagnosticKind::DuplicateLabel => "duplicate label",
            DiagnosticKind::UnknownIdentifier => "unknown identifier",
            DiagnosticKind::ZeroDependenceCycle => "zero-dependence cycle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub statement: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.statement {
            Some(s) => write!(f, "{s}: {}: {}", self.kind, self.message),
            None => write!(f, "{}: {}", self.kind, self.message),
        }
    }
}

/// Checks the structural invariants of a program. Empty result means valid.
pub fn validate(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |kind, statement: Option<&str>, message: String| {
        out.push(Diagnostic {
            kind,
            statement: statement.map(str::to_string),
            message,
        })
    };
    let n = program.dim();

    let mut labels = BTreeSet::new();
    let mut written: BTreeSet<&str> = BTreeSet::new();
    let mut read: BTreeSet<&str> = BTreeSet::new();
    let known_params: BTreeSet<&str> = program.parameters.iter().map(|p| p.name.as_str()).collect();

    for d in &program.inputs {
        if program.is_output(&d.name) {
            push(
                DiagnosticKind::ConflictingDeclaration,
                None,
                format!("`{}` is declared both input and output", d.name),
            );
        }
    }

    for s in &program.statements {
        let label = Some(s.label.as_str());
        if !labels.insert(s.label.as_str()) {
            push(DiagnosticKind::DuplicateLabel, label, format!("label `{}` reused", s.label));
        }
        written.insert(&s.lhs.name);
        if program.is_input(&s.lhs.name) {
            push(
                DiagnosticKind::InputWritten,
                label,
                format!("input `{}` appears on a left-hand side", s.lhs.name),
            );
        }
        if !s.lhs.is_zero_dependence() {
            push(
                DiagnosticKind::LhsDependence,
                label,
                format!("left-hand side `{}` must be indexed at i", s.lhs.name),
            );
        }
        let mut refs = vec![&s.lhs];
        refs.extend(s.reads());
        for r in &refs {
            if program.role_of(&r.name) == Role::Internal && !r.is_full(n) {
                push(
                    DiagnosticKind::ProjectedInternal,
                    label,
                    format!("internal variable `{}` must be indexed by all {n} dimensions in order", r.name),
                );
            }
        }
        for r in s.reads() {
            read.insert(&r.name);
            if program.is_output(&r.name) {
                push(
                    DiagnosticKind::OutputRead,
                    label,
                    format!("output `{}` appears on a right-hand side", r.name),
                );
            }
        }
        for c in &s.condition.constraints {
            for v in c.expr.vars.keys() {
                if !program.vars.contains(v) {
                    push(DiagnosticKind::UnknownIdentifier, label, format!("condition uses `{v}`"));
                }
            }
            for p in c.expr.params() {
                if !known_params.contains(p.as_str()) {
                    push(DiagnosticKind::UnknownIdentifier, label, format!("condition uses `{p}`"));
                }
            }
        }
    }

    // Inferred roles must agree with the declarations.
    let mut first_reader: BTreeMap<&str, &str> = BTreeMap::new();
    for s in &program.statements {
        for r in s.reads() {
            first_reader.entry(&r.name).or_insert(&s.label);
        }
    }
    for (v, reader) in &first_reader {
        if !written.contains(v) && !program.is_input(v) {
            push(
                DiagnosticKind::UndeclaredInput,
                Some(reader),
                format!("`{v}` is read but never written and not declared input"),
            );
        }
    }
    for s in &program.statements {
        let v = s.lhs.name.as_str();
        if !read.contains(v) && !program.is_output(v) && !program.is_input(v) {
            push(
                DiagnosticKind::UndeclaredOutput,
                Some(&s.label),
                format!("`{v}` is written but never read and not declared output"),
            );
        }
    }
    for d in &program.outputs {
        if !written.contains(d.name.as_str()) {
            push(
                DiagnosticKind::UnwrittenOutput,
                None,
                format!("declared output `{}` is never written", d.name),
            );
        }
    }
    for d in &program.inputs {
        if !read.contains(d.name.as_str()) {
            push(
                DiagnosticKind::UnusedInput,
                None,
                format!("declared input `{}` is never read", d.name),
            );
        }
    }

    let rdg = build_rdg(program);
    if let Some(cycle) = rdg.zero_dependence_cycle() {
        let names: Vec<&str> = cycle.iter().map(|q| rdg.labels[*q].as_str()).collect();
        push(
            DiagnosticKind::ZeroDependenceCycle,
            Some(names[0]),
            format!("zero-dependence cycle {}", names.join(" -> ")),
        );
    }
    // dedup per statement and kind while keeping order
    let mut seen = BTreeSet::new();
    out.retain(|d| seen.insert((d.kind as u8, d.statement.clone(), d.message.clone())));
    out
}
