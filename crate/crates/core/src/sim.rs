//! Exact reference counter: walks every tile and every point of the tiled
//! iteration space, fires the statements whose conditions hold and tallies
//! executions, memory-class accesses and operations.
//!
//! Nothing here goes through the symbolic machinery; the only thing taken
//! from the tiled program is the naming of memory statements.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{EnergyError, EnergyTable, MemClass};
use crate::linear::{floor_div, Bindings, Rel, UnboundParam};
use crate::par::{fold_range, Exec};
use crate::pra::{build_rdg, ConstraintSystem, Program, Role};
use crate::schedule::{compute_iteration_schedule, ScheduleError, ScheduleSpec};
use crate::tiling::{check_cover, TiledKind, TiledProgram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Unbound(#[from] UnboundParam),
    #[error("tiling does not cover the iteration space at these bindings")]
    NotCovering,
    #[error("{statement} reads {variable}{instance:?} outside the iteration space")]
    OutOfBounds {
        statement: String,
        variable: String,
        instance: Vec<i64>,
    },
    #[error("no memory statement for {origin} reference {ref_index} with displacement {gamma:?}")]
    MissingMemoryStatement {
        origin: String,
        ref_index: usize,
        gamma: Vec<i64>,
    },
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("value semantics: {0}")]
    Value(String),
    #[error("counts describe different configurations: {0}")]
    ConfigMismatch(String),
}

/// Execution, access and operation counts plus energy at one binding.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessCounts {
    pub per_statement: BTreeMap<String, i128>,
    pub per_class: BTreeMap<MemClass, i128>,
    pub per_op: BTreeMap<String, i128>,
    pub energy_fj: i128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<i128>,
}

impl AccessCounts {
    /// Energy recomputed from the class and operation tallies.
    pub fn priced(&self, table: &EnergyTable) -> Result<i128, EnergyError> {
        let mut e: i128 = 0;
        for (c, n) in &self.per_class {
            e += n * table.class(*c) as i128;
        }
        for (op, n) in &self.per_op {
            e += n * table.op(op)? as i128;
        }
        Ok(e)
    }
}

pub struct SimConfig<'a> {
    pub program: &'a Program,
    pub tiled: &'a TiledProgram,
    pub table: &'a EnergyTable,
    pub bindings: &'a Bindings,
    pub schedule: Option<&'a ScheduleSpec>,
    pub exec: Exec,
}

/// `coeffs . i + constant` compared to zero.
struct Row {
    coeffs: Vec<i64>,
    constant: i64,
    rel: Rel,
}

fn compile(cs: &ConstraintSystem, vars: &[String], b: &Bindings) -> Result<Vec<Row>, UnboundParam> {
    let mut rows = Vec::new();
    for c in &cs.constraints {
        let mut coeffs = vec![0; vars.len()];
        for (v, lin) in &c.expr.vars {
            let l = vars.iter().position(|x| x == v).expect("condition over iteration variables");
            coeffs[l] = lin.eval(b)?;
        }
        rows.push(Row {
            coeffs,
            constant: c.expr.rest.eval(b)?,
            rel: c.rel,
        });
    }
    Ok(rows)
}

fn holds(rows: &[Row], i: &[i64]) -> bool {
    rows.iter().all(|r| {
        let v = r.constant + r.coeffs.iter().zip(i).map(|(a, x)| a * x).sum::<i64>();
        match r.rel {
            Rel::Ge => v >= 0,
            Rel::Eq => v == 0,
        }
    })
}

const CLASSES: [MemClass; 6] = MemClass::ALL;

fn class_slot(c: MemClass) -> usize {
    CLASSES.iter().position(|x| *x == c).unwrap()
}

struct SimRef {
    label: String,
    variable: String,
    d: Vec<i64>,
    role: Role,
    /// `(gamma, tiled statement slot)`.
    mem: Vec<(Vec<i64>, usize)>,
    origin: String,
    ref_index: usize,
}

struct SimStatement {
    slot: usize,
    cond: Vec<Row>,
    reads: Vec<SimRef>,
    ops: Vec<(usize, u64)>,
    output: bool,
}

#[derive(Clone)]
struct Tally {
    statements: Vec<u64>,
    classes: [u64; 6],
    ops: Vec<u64>,
    error: Option<SimError>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.statements.iter_mut().zip(&other.statements) {
            *a += b;
        }
        for (a, b) in self.classes.iter_mut().zip(&other.classes) {
            *a += b;
        }
        for (a, b) in self.ops.iter_mut().zip(&other.ops) {
            *a += b;
        }
        if self.error.is_none() {
            self.error = other.error;
        }
        self
    }
}

/// Counts every execution of every tiled statement at concrete bindings.
pub fn simulate(cfg: &SimConfig) -> Result<AccessCounts, SimError> {
    let program = cfg.program;
    let b = cfg.bindings;
    let tiling = &cfg.tiled.tiling;
    if !check_cover(program, tiling, b)? {
        return Err(SimError::NotCovering);
    }
    let n = program.dim();
    let extents = program.extents(b)?;
    let sizes = tiling.concrete_sizes(b)?;
    let counts = tiling.counts.clone();

    let ids: Vec<&str> = cfg.tiled.statements.iter().map(|s| s.id.as_str()).collect();
    let slot_of = |id: &str| ids.iter().position(|x| *x == id).expect("tiled statement");
    let mut op_names: Vec<String> = program.statements.iter().flat_map(|s| s.rhs.op_counts().into_keys()).collect();
    op_names.sort();
    op_names.dedup();

    let mut stmts = Vec::new();
    for s in &program.statements {
        let mut reads = Vec::new();
        for (r, vref) in s.reads().into_iter().enumerate() {
            let mem = cfg
                .tiled
                .statements
                .iter()
                .filter(|t| t.kind == TiledKind::Memory && t.origin == s.label && t.ref_index == Some(r))
                .map(|t| (t.gamma.clone(), slot_of(&t.id)))
                .collect();
            reads.push(SimRef {
                label: s.label.clone(),
                variable: vref.name.clone(),
                d: vref.dependence.clone(),
                role: program.role_of(&vref.name),
                mem,
                origin: s.label.clone(),
                ref_index: r,
            });
        }
        stmts.push(SimStatement {
            slot: slot_of(&s.label),
            cond: compile(&s.condition, &program.vars, b)?,
            reads,
            ops: s
                .rhs
                .op_counts()
                .into_iter()
                .map(|(op, m)| (op_names.iter().position(|x| *x == op).unwrap(), m as u64))
                .collect(),
            output: program.role_of(&s.lhs.name) == Role::Output,
        });
    }

    let tiles: usize = counts.iter().map(|t| *t as usize).product();
    let init = || Tally {
        statements: vec![0; ids.len()],
        classes: [0; 6],
        ops: vec![0; op_names.len()],
        error: None,
    };
    let fold = |acc: &mut Tally, tile: usize| {
        if acc.error.is_some() {
            return;
        }
        let mut k = vec![0i64; n];
        let mut rest = tile;
        for l in (0..n).rev() {
            k[l] = (rest % counts[l] as usize) as i64;
            rest /= counts[l] as usize;
        }
        let mut j = vec![0i64; n];
        let mut i = vec![0i64; n];
        loop {
            let mut inside = true;
            for l in 0..n {
                i[l] = j[l] + sizes[l] * k[l];
                inside &= i[l] < extents[l];
            }
            if inside {
                if let Err(e) = fire(&stmts, &i, &k, &sizes, &extents, acc) {
                    acc.error = Some(e);
                    return;
                }
            }
            // odometer over the tile
            let mut l = n;
            loop {
                if l == 0 {
                    return;
                }
                l -= 1;
                j[l] += 1;
                if j[l] < sizes[l] {
                    break;
                }
                j[l] = 0;
            }
        }
    };
    let tally = fold_range(cfg.exec, tiles, init, fold, Tally::merge);
    if let Some(e) = tally.error {
        return Err(e);
    }

    let mut out = AccessCounts {
        per_statement: ids.iter().zip(&tally.statements).map(|(id, c)| (id.to_string(), *c as i128)).collect(),
        per_class: CLASSES.iter().zip(&tally.classes).map(|(c, m)| (*c, *m as i128)).collect(),
        per_op: op_names.iter().cloned().zip(tally.ops.iter().map(|m| *m as i128)).collect(),
        energy_fj: 0,
        latency: None,
    };
    out.energy_fj = out.priced(cfg.table)?;
    if let Some(sched) = cfg.schedule {
        let lc = compute_iteration_schedule(&build_rdg(program), &sched.w)?.lc as i128;
        let mut l = lc;
        for d in 0..n {
            l += sched.lambda_j[d].eval(b)? * (sizes[d] - 1) as i128;
            l += sched.lambda_k[d].eval(b)? * (counts[d] - 1) as i128;
        }
        out.latency = Some(l);
    }
    Ok(out)
}

fn fire(
    stmts: &[SimStatement],
    i: &[i64],
    k: &[i64],
    sizes: &[i64],
    extents: &[i64],
    acc: &mut Tally,
) -> Result<(), SimError> {
    let rd = class_slot(MemClass::RD);
    for s in stmts {
        if !holds(&s.cond, i) {
            continue;
        }
        acc.statements[s.slot] += 1;
        for (op, m) in &s.ops {
            acc.ops[*op] += m;
        }
        acc.classes[rd] += s.reads.len() as u64;
        if s.output {
            for c in [MemClass::DR, MemClass::IOb, MemClass::OD] {
                acc.classes[class_slot(c)] += 1;
            }
        } else {
            acc.classes[rd] += 1;
        }
        for r in &s.reads {
            let src: Vec<i64> = i.iter().zip(&r.d).map(|(x, d)| x - d).collect();
            if r.role != Role::Input && src.iter().zip(extents).any(|(x, e)| *x < 0 || x >= e) {
                return Err(SimError::OutOfBounds {
                    statement: r.label.clone(),
                    variable: r.variable.clone(),
                    instance: src,
                });
            }
            let gamma: Vec<i64> = (0..i.len()).map(|l| floor_div(src[l], sizes[l]) - k[l]).collect();
            let slot = r
                .mem
                .iter()
                .find(|(g, _)| *g == gamma)
                .map(|(_, s)| *s)
                .ok_or_else(|| SimError::MissingMemoryStatement {
                    origin: r.origin.clone(),
                    ref_index: r.ref_index,
                    gamma: gamma.clone(),
                })?;
            acc.statements[slot] += 1;
            let classes: &[MemClass] = match r.role {
                Role::Input => &[MemClass::DR, MemClass::IOb, MemClass::ID],
                Role::Output => &[MemClass::DR, MemClass::IOb, MemClass::OD],
                Role::Internal if gamma.iter().any(|g| *g != 0) => &[MemClass::ID],
                Role::Internal if r.d.iter().all(|d| *d == 0) => &[MemClass::RD],
                Role::Internal => &[MemClass::FD],
            };
            for c in classes {
                acc.classes[class_slot(*c)] += 1;
            }
            acc.classes[rd] += 1;
        }
    }
    Ok(())
}

/// Output variable instances computed with integer value semantics.
pub type Values = BTreeMap<String, BTreeMap<Vec<i64>, i64>>;

/// Runs the program on concrete inputs in lexicographic iteration order,
/// statements inside an iteration in zero-dependence order.
pub fn execute(program: &Program, bindings: &Bindings, input: &dyn Fn(&str, &[i64]) -> i64) -> Result<Values, SimError> {
    let n = program.dim();
    let extents = program.extents(bindings)?;
    let order = build_rdg(program)
        .zero_dependence_order()
        .ok_or_else(|| SimError::Value("zero-dependence cycle".into()))?;
    let conds = program
        .statements
        .iter()
        .map(|s| compile(&s.condition, &program.vars, bindings))
        .collect::<Result<Vec<_>, _>>()?;
    let mut store: HashMap<(String, Vec<i64>), i64> = HashMap::new();
    let mut outputs = Values::new();
    if extents.iter().any(|e| *e <= 0) {
        return Ok(outputs);
    }
    let mut i = vec![0i64; n];
    loop {
        for &q in &order {
            let s = &program.statements[q];
            if !holds(&conds[q], &i) {
                continue;
            }
            let v = s.rhs.eval_with(&mut |r| {
                let inst = r.instance(&i);
                if program.is_input(&r.name) {
                    return Ok(input(&r.name, &inst));
                }
                store
                    .get(&(r.name.clone(), inst.clone()))
                    .copied()
                    .ok_or_else(|| format!("{} reads undefined {}{:?}", s.label, r.name, inst))
            });
            let v = v.map_err(SimError::Value)?;
            let inst = s.lhs.instance(&i);
            if program.is_output(&s.lhs.name) {
                outputs.entry(s.lhs.name.clone()).or_default().insert(inst.clone(), v);
            }
            store.insert((s.lhs.name.clone(), inst), v);
        }
        let mut l = n;
        loop {
            if l == 0 {
                return Ok(outputs);
            }
            l -= 1;
            i[l] += 1;
            if i[l] < extents[l] {
                break;
            }
            i[l] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub key: String,
    pub analysis: i128,
    pub simulation: i128,
}

/// Every integer on which analysis and simulation disagree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub statements: Vec<Delta>,
    pub classes: Vec<Delta>,
    pub ops: Vec<Delta>,
    pub energy: Option<Delta>,
    pub latency: Option<Delta>,
}

impl Discrepancy {
    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
            && self.classes.is_empty()
            && self.ops.is_empty()
            && self.energy.is_none()
            && self.latency.is_none()
    }

    pub fn len(&self) -> usize {
        self.statements.len()
            + self.classes.len()
            + self.ops.len()
            + self.energy.is_some() as usize
            + self.latency.is_some() as usize
    }
}

fn diff_maps<K: Ord + ToString>(
    what: &str,
    a: &BTreeMap<K, i128>,
    s: &BTreeMap<K, i128>,
) -> Result<Vec<Delta>, SimError> {
    if !a.keys().eq(s.keys()) {
        let ka: Vec<String> = a.keys().map(|k| k.to_string()).collect();
        let ks: Vec<String> = s.keys().map(|k| k.to_string()).collect();
        return Err(SimError::ConfigMismatch(format!("{what} keys {ka:?} vs {ks:?}")));
    }
    Ok(a.iter()
        .zip(s.values())
        .filter(|((_, x), y)| *x != *y)
        .map(|((k, x), y)| Delta {
            key: k.to_string(),
            analysis: *x,
            simulation: *y,
        })
        .collect())
}

/// Structural diff of two count sets for the same configuration.
pub fn compare(analysis: &AccessCounts, sim: &AccessCounts) -> Result<Discrepancy, SimError> {
    let delta = |key: &str, a: i128, s: i128| {
        (a != s).then(|| Delta {
            key: key.to_string(),
            analysis: a,
            simulation: s,
        })
    };
    Ok(Discrepancy {
        statements: diff_maps("statement", &analysis.per_statement, &sim.per_statement)?,
        classes: diff_maps("class", &analysis.per_class, &sim.per_class)?,
        ops: diff_maps("operation", &analysis.per_op, &sim.per_op)?,
        energy: delta("energy_fj", analysis.energy_fj, sim.energy_fj),
        latency: match (analysis.latency, sim.latency) {
            (Some(a), Some(s)) => delta("latency", a, s),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pra::parse_pra;
    use crate::tiling::{tile_program, TileSize, TilingSpec};

    fn b(pairs: &[(&str, i64)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn run(src: &str, t: Vec<i64>, bindings: &Bindings, exec: Exec) -> Result<AccessCounts, SimError> {
        let program = parse_pra(src).unwrap();
        let sizes = (0..t.len()).map(|l| TileSize::Param(format!("p{l}"))).collect();
        let tiled = tile_program(&program, &TilingSpec::new(sizes, t), &[]).unwrap();
        let table = EnergyTable::default();
        simulate(&SimConfig {
            program: &program,
            tiled: &tiled,
            table: &table,
            bindings,
            schedule: None,
            exec,
        })
    }

    const GESUMMV: &str = include_str!("../benchmarks/gesummv.pra");

    #[test]
    fn gesummv_example_point() {
        let bb = b(&[("N0", 4), ("N1", 5), ("p0", 2), ("p1", 3)]);
        let c = run(GESUMMV, vec![2, 2], &bb, Exec::Sequential).unwrap();
        assert_eq!(c.per_statement["S7*1"], 12);
        assert_eq!(c.per_statement["S7*2"], 4);
        assert_eq!(c.per_statement["S7"], 16);
        assert_eq!(c, run(GESUMMV, vec![2, 2], &bb, Exec::Parallel).unwrap());
        assert_eq!(c.energy_fj, c.priced(&EnergyTable::default()).unwrap());
    }

    #[test]
    fn single_iteration() {
        let bb = b(&[("N0", 1), ("N1", 1), ("p0", 1), ("p1", 1)]);
        let c = run(GESUMMV, vec![1, 1], &bb, Exec::Sequential).unwrap();
        for s in ["S2", "S6", "S7", "S9", "S10"] {
            assert_eq!(c.per_statement[s], 0, "{s}");
        }
        for s in ["S1", "S3", "S4", "S5", "S8", "S11"] {
            assert_eq!(c.per_statement[s], 1, "{s}");
        }
    }

    #[test]
    fn uncovered_space_is_rejected() {
        let bb = b(&[("N0", 9), ("N1", 5), ("p0", 2), ("p1", 3)]);
        assert_eq!(run(GESUMMV, vec![2, 2], &bb, Exec::Sequential), Err(SimError::NotCovering));
    }

    #[test]
    fn out_of_bounds_read() {
        let src = "params N;\nspace (i0): 0 <= i0 < N;\ninput a[i0];\noutput y[i0];\nS1: x[i0] = a[i0];\nS2: y[i0] = x[i0-1];\n";
        let bb = b(&[("N", 4), ("p0", 2)]);
        assert!(matches!(run(src, vec![2], &bb, Exec::Sequential), Err(SimError::OutOfBounds { .. })));
    }

    #[test]
    fn gesummv_values() {
        let program = parse_pra(GESUMMV).unwrap();
        let (n0, n1) = (4i64, 5i64);
        let a = |i: i64, j: i64| (3 * i + 7 * j) % 11 - 5;
        let bm = |i: i64, j: i64| (5 * i * j + 2) % 13 - 6;
        let x = |j: i64| 2 * j - 3;
        let input = |name: &str, idx: &[i64]| match name {
            "A" => a(idx[0], idx[1]),
            "B" => bm(idx[0], idx[1]),
            "X" => x(idx[0]),
            _ => unreachable!(),
        };
        let out = execute(&program, &b(&[("N0", n0), ("N1", n1)]), &input).unwrap();
        for i in 0..n0 {
            let direct: i64 = (0..n1).map(|j| a(i, j) * x(j) + bm(i, j) * x(j)).sum();
            assert_eq!(out["Y"][&vec![i]], direct);
        }
    }

    #[test]
    fn compare_reports_each_delta() {
        let bb = b(&[("N0", 4), ("N1", 5), ("p0", 2), ("p1", 3)]);
        let c = run(GESUMMV, vec![2, 2], &bb, Exec::Sequential).unwrap();
        assert!(compare(&c, &c).unwrap().is_empty());
        let mut bumped = c.clone();
        *bumped.per_statement.get_mut("S7*1").unwrap() += 1;
        let d = compare(&bumped, &c).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.statements[0].key, "S7*1");
        let mut other = c.clone();
        other.per_statement.remove("S7*1");
        assert!(matches!(compare(&other, &c), Err(SimError::ConfigMismatch(_))));
    }
}
