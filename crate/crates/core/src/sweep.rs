//! Parameter sweeps over an analysis report, one CSV row per binding.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::energy::MemClass;
use crate::linear::{ceil_div, Bindings};
use crate::par::{map_vec, Exec};
use crate::report::{AnalysisReport, Concrete};
use crate::tiling::TileSize;

/// Parameters swept together: every name takes the same value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepAxis {
    pub names: Vec<String>,
    pub values: Vec<i64>,
}

/// Parses `N0,N1=8,16,32`, `N=8:64:8` (inclusive, additive step) or
/// `N=8:128:*2` (inclusive, geometric step).
pub fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    let (names, values) = s.split_once('=').ok_or_else(|| format!("expected `names=values`, found `{s}`"))?;
    let names: Vec<String> = names.split(',').map(|n| n.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(format!("empty parameter name in `{s}`"));
    }
    let int = |v: &str| v.trim().parse::<i64>().map_err(|_| format!("`{v}` is not an integer"));
    let values = if values.contains(':') {
        let parts: Vec<&str> = values.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(format!("expected `start:end:step`, found `{values}`"));
        };
        let (start, end) = (int(start)?, int(end)?);
        let mut out = Vec::new();
        let mut v = start;
        if let Some(f) = step.trim().strip_prefix('*') {
            let f = int(f)?;
            if f < 2 || start < 1 {
                return Err("geometric steps need a factor of at least 2 and a positive start".into());
            }
            while v <= end {
                out.push(v);
                v *= f;
            }
        } else {
            let d = int(step)?;
            if d < 1 {
                return Err("step must be positive".into());
            }
            while v <= end {
                out.push(v);
                v += d;
            }
        }
        out
    } else {
        values.split(',').map(int).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(format!("no values in `{s}`"));
    }
    Ok(SweepAxis { names, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TileRule {
    /// Unbound tile sizes become `ceil(N_l / t_l)`.
    #[default]
    Ceil,
    /// Tile sizes must be bound explicitly.
    Given,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub bindings: Bindings,
    pub result: Result<Concrete, String>,
    /// Wall time of the concrete evaluation in microseconds.
    pub time_us: u128,
}

/// Binding of every sweep point, axes in order with the last varying fastest.
pub fn points(axes: &[SweepAxis], fixed: &Bindings) -> Vec<Bindings> {
    let mut out = vec![fixed.clone()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.values.len());
        for b in &out {
            for v in &axis.values {
                let mut b = b.clone();
                for n in &axis.names {
                    b.insert(n.clone(), *v);
                }
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn complete(report: &AnalysisReport, b: &Bindings, rule: TileRule) -> Result<Bindings, String> {
    let mut b = b.clone();
    if rule == TileRule::Ceil {
        for (l, size) in report.tiling.sizes.iter().enumerate() {
            if let TileSize::Param(p) = size {
                if !b.contains_key(p) {
                    let n = report.upper[l].eval(&b).map_err(|e| e.to_string())?;
                    b.insert(p.clone(), ceil_div(n, report.tiling.counts[l]).max(1));
                }
            }
        }
    }
    Ok(b)
}

pub fn run_sweep(report: &AnalysisReport, axes: &[SweepAxis], fixed: &Bindings, rule: TileRule, exec: Exec) -> Vec<SweepRow> {
    let pts: Vec<(usize, Bindings)> = points(axes, fixed).into_iter().enumerate().collect();
    map_vec(exec, &pts, |(index, b)| {
        let start = Instant::now();
        let (bindings, result) = match complete(report, b, rule) {
            Ok(full) => {
                let r = report.evaluate(&full).map_err(|e| e.to_string());
                (full, r)
            }
            Err(e) => (b.clone(), Err(e)),
        };
        SweepRow {
            index: *index,
            bindings,
            result,
            time_us: start.elapsed().as_micros(),
        }
    })
}

/// Header of the sweep CSV for a report.
pub fn csv_header(report: &AnalysisReport) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    h.extend(report.parameters.iter().cloned());
    h.push("valid".into());
    h.push("E_tot_fJ".into());
    h.extend(MemClass::ALL.iter().map(|c| format!("E_{c}_fJ")));
    h.extend(report.energy.op_counts.keys().map(|op| format!("E_{op}_fJ")));
    h.push("L".into());
    h.push("analyzer_time_us".into());
    h.push("note".into());
    h
}

pub fn write_csv<W: Write>(report: &AnalysisReport, rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(report))?;
    for row in rows {
        let mut rec = vec![row.index.to_string()];
        for p in &report.parameters {
            rec.push(row.bindings.get(p).map(|v| v.to_string()).unwrap_or_default());
        }
        match &row.result {
            Ok(c) => {
                rec.push("true".into());
                rec.push(c.counts.energy_fj.to_string());
                rec.extend(MemClass::ALL.iter().map(|k| c.class_energy_fj[k].to_string()));
                rec.extend(report.energy.op_counts.keys().map(|op| c.op_energy_fj[op].to_string()));
                rec.push(c.counts.latency.map(|l| l.to_string()).unwrap_or_default());
                rec.push(row.time_us.to_string());
                rec.push(String::new());
            }
            Err(e) => {
                rec.push("false".into());
                rec.extend(std::iter::repeat_n(String::new(), 1 + MemClass::ALL.len() + report.energy.op_counts.len() + 1));
                rec.push(row.time_us.to_string());
                rec.push(e.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
