//! Diagonal tiling `i = j + P k`: displacement sets, statement splitting and
//! the cover check.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linear::{feasible, implies, Bindings, Lin, ParamConstraint, UnboundParam};
use crate::pra::{
    AffineExpr, Constraint, ConstraintSystem, ParamKind, Parameter, Program, Role, Statement,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unresolvable gamma set: dimension {dim} has dependence {d} but {detail}")]
    UnresolvableGamma { dim: usize, d: i64, detail: String },
    #[error("tile count t{dim} = {value} must be a positive integer")]
    BadTileCount { dim: usize, value: i64 },
    #[error("tile size p{dim} = {value} must be a positive integer")]
    BadTileSize { dim: usize, value: i64 },
    #[error("name clash: `{0}` is both a parameter and a tiled iteration variable")]
    NameClash(String),
}

/// A tile size: a named parameter or a fixed positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TileSize {
    Fixed(i64),
    Param(String),
}

impl TileSize {
    pub fn lin(&self) -> Lin {
        match self {
            TileSize::Fixed(v) => Lin::constant(*v),
            TileSize::Param(p) => Lin::param(p.as_str()),
        }
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<i64, UnboundParam> {
        self.lin().eval(bindings)
    }
}

impl fmt::Display for TileSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TileSize::Fixed(v) => write!(f, "{v}"),
            TileSize::Param(p) => f.write_str(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSpec {
    pub sizes: Vec<TileSize>,
    pub counts: Vec<i64>,
}

impl TilingSpec {
    pub fn new(sizes: Vec<TileSize>, counts: Vec<i64>) -> Self {
        TilingSpec { sizes, counts }
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    fn check(&self, n: usize) -> Result<(), TilingError> {
        if self.sizes.len() != n || self.counts.len() != n {
            return Err(TilingError::DimensionMismatch(format!(
                "program has {n} dimensions, tiling has {} tile sizes and {} tile counts",
                self.sizes.len(),
                self.counts.len()
            )));
        }
        for (l, t) in self.counts.iter().enumerate() {
            if *t < 1 {
                return Err(TilingError::BadTileCount { dim: l, value: *t });
            }
        }
        for (l, p) in self.sizes.iter().enumerate() {
            if let TileSize::Fixed(v) = p {
                if *v < 1 {
                    return Err(TilingError::BadTileSize { dim: l, value: *v });
                }
            }
        }
        Ok(())
    }

    /// Tile-size parameter names in dimension order.
    pub fn size_params(&self) -> Vec<String> {
        self.sizes
            .iter()
            .filter_map(|s| match s {
                TileSize::Param(p) => Some(p.clone()),
                TileSize::Fixed(_) => None,
            })
            .collect()
    }

    /// Concrete tile sizes under `bindings`.
    pub fn concrete_sizes(&self, bindings: &Bindings) -> Result<Vec<i64>, UnboundParam> {
        self.sizes.iter().map(|s| s.eval(bindings)).collect()
    }
}

/// A parameter-domain assumption recorded during analysis and re-checked at
/// every concrete evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assumption {
    pub constraint: ParamConstraint,
    pub reason: String,
    /// Already implied by the declared assumptions of the mapping.
    pub discharged: bool,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.constraint, self.reason)
    }
}

/// Integer displacement vectors for dependence `d`.
///
/// Symbolic tile sizes use the closed rule `{0}` / `{0, -sign(d)}`, valid for
/// `p >= |d|`; that requirement is returned as an assumption and checked
/// against `declared`. Fixed tile sizes are enumerated exactly.
pub fn enumerate_gammas(
    d: &[i64],
    sizes: &[TileSize],
    declared: &[ParamConstraint],
) -> Result<(Vec<Vec<i64>>, Vec<Assumption>), TilingError> {
    if d.len() != sizes.len() {
        return Err(TilingError::DimensionMismatch(format!(
            "dependence has {} components, tiling has {}",
            d.len(),
            sizes.len()
        )));
    }
    let mut per_dim = Vec::with_capacity(d.len());
    let mut assumptions = Vec::new();
    for (l, (&dl, size)) in d.iter().zip(sizes).enumerate() {
        match size {
            TileSize::Fixed(p) => {
                if *p < 1 {
                    return Err(TilingError::BadTileSize { dim: l, value: *p });
                }
                per_dim.push(exact_gammas(dl, *p));
            }
            TileSize::Param(name) => {
                if dl == 0 {
                    per_dim.push(vec![0]);
                    continue;
                }
                let need = ParamConstraint::ge(Lin::param(name.as_str()) - Lin::constant(dl.abs()));
                let mut probe = declared.to_vec();
                probe.push(need.clone());
                if !feasible(&probe) {
                    return Err(TilingError::UnresolvableGamma {
                        dim: l,
                        d: dl,
                        detail: format!("the declared assumptions exclude {need}"),
                    });
                }
                assumptions.push(Assumption {
                    discharged: implies(declared, &need),
                    constraint: need,
                    reason: format!("dependence {dl} along dimension {l} spans at most one tile"),
                });
                per_dim.push(vec![0, -dl.signum()]);
            }
        }
    }
    Ok((cartesian(&per_dim), assumptions))
}

/// All integer `g` with `-p < p*g + d < p`, zero first, then by magnitude.
fn exact_gammas(d: i64, p: i64) -> Vec<i64> {
    let centre = -d.div_euclid(p);
    let mut out: Vec<i64> = (centre - 2..=centre + 2)
        .filter(|g| {
            let v = p * g + d;
            -p < v && v < p
        })
        .collect();
    out.sort_by_key(|g| (g.abs(), *g));
    out
}

fn cartesian(sets: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for set in sets {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |g| {
                    let mut v = prefix.clone();
                    v.push(*g);
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiledKind {
    Computational,
    Memory,
}

/// A statement after tiling, over variables `(j_0..j_{n-1}, k_0..k_{n-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TiledStatement {
    /// `S7` for the computational part, `S7*1`, `S7*2`, ... for memory parts.
    pub id: String,
    pub origin: String,
    pub kind: TiledKind,
    /// Written variable for computational statements, source variable for
    /// memory statements.
    pub variable: String,
    pub role: Role,
    /// Index of the source reference among the right-hand-side references.
    pub ref_index: Option<usize>,
    pub dependence: Vec<i64>,
    pub gamma: Vec<i64>,
    /// Intra-tile part of the dependence, `d + P gamma`.
    pub dj: Vec<Lin>,
    /// Inter-tile part of the dependence, `-gamma`.
    pub dk: Vec<i64>,
    /// Right-hand-side reference count (computational only).
    pub reads: usize,
    /// Operation-node counts (computational only).
    pub ops: BTreeMap<String, u32>,
    pub condition: ConstraintSystem,
}

impl TiledStatement {
    /// The 2n-dimensional tiled dependence `(d_J, d_K)`.
    pub fn tiled_dependence(&self) -> Vec<Lin> {
        self.dj
            .iter()
            .cloned()
            .chain(self.dk.iter().map(|k| Lin::constant(*k)))
            .collect()
    }

    pub fn render_dependence(&self) -> String {
        let parts: Vec<String> = self.tiled_dependence().iter().map(|l| l.to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

/// Tiled variable names for an n-dimensional program.
pub fn tiled_vars(n: usize) -> Vec<String> {
    (0..n)
        .map(|l| format!("j{l}"))
        .chain((0..n).map(|l| format!("k{l}")))
        .collect()
}

/// Shared part of every condition space: `j` in the tile, `k` in the array
/// and `j + P k` in the iteration space.
fn base_space(program: &Program, tiling: &TilingSpec) -> ConstraintSystem {
    let n = program.dim();
    let mut cs = ConstraintSystem::new(tiled_vars(n));
    for l in 0..n {
        let j = AffineExpr::var(&format!("j{l}"));
        let k = AffineExpr::var(&format!("k{l}"));
        let p = tiling.sizes[l].lin();
        cs.push(Constraint::ge(j.clone()));
        cs.push(Constraint::ge(
            AffineExpr::from_lin(p.clone() - Lin::constant(1)).minus(&j),
        ));
        cs.push(Constraint::ge(k.clone()));
        cs.push(Constraint::ge(
            AffineExpr::from_lin(Lin::constant(tiling.counts[l] - 1)).minus(&k),
        ));
        let i = original_index(l, &tiling.sizes[l]);
        cs.push(Constraint::ge(i.clone()));
        cs.push(Constraint::ge(
            AffineExpr::from_lin(program.upper[l].clone() - Lin::constant(1)).minus(&i),
        ));
    }
    cs
}

/// `j_l + p_l k_l`.
fn original_index(l: usize, size: &TileSize) -> AffineExpr {
    let mut e = AffineExpr::var(&format!("j{l}"));
    e.add_var(&format!("k{l}"), size.lin());
    e
}

fn substitute_condition(
    cond: &ConstraintSystem,
    program: &Program,
    tiling: &TilingSpec,
    into: &mut ConstraintSystem,
) {
    for c in &cond.constraints {
        let mut e = c.expr.clone();
        for (l, v) in program.vars.iter().enumerate() {
            e = e
                .substitute(v, &original_index(l, &tiling.sizes[l]))
                .expect("parsed conditions have constant coefficients");
        }
        into.push(Constraint { expr: e, rel: c.rel });
    }
}

/// Splits one statement into its computational part and one memory part per
/// right-hand-side reference and displacement.
pub fn decompose_statement(
    program: &Program,
    s: &Statement,
    tiling: &TilingSpec,
    declared: &[ParamConstraint],
) -> Result<(TiledStatement, Vec<TiledStatement>, Vec<Assumption>), TilingError> {
    let n = program.dim();
    tiling.check(n)?;
    let mut space = base_space(program, tiling);
    substitute_condition(&s.condition, program, tiling, &mut space);
    let reads = s.reads();
    let comp = TiledStatement {
        id: s.label.clone(),
        origin: s.label.clone(),
        kind: TiledKind::Computational,
        variable: s.lhs.name.clone(),
        role: program.role_of(&s.lhs.name),
        ref_index: None,
        dependence: vec![0; n],
        gamma: vec![0; n],
        dj: vec![Lin::zero(); n],
        dk: vec![0; n],
        reads: reads.len(),
        ops: s.rhs.op_counts(),
        condition: space.clone(),
    };
    let mut memory = Vec::new();
    let mut assumptions = Vec::new();
    for (r, vref) in reads.iter().enumerate() {
        let (gammas, mut a) = enumerate_gammas(&vref.dependence, &tiling.sizes, declared)?;
        assumptions.append(&mut a);
        for gamma in gammas {
            let dj: Vec<Lin> = (0..n)
                .map(|l| Lin::constant(vref.dependence[l]) + tiling.sizes[l].lin() * gamma[l])
                .collect();
            let dk: Vec<i64> = gamma.iter().map(|g| -g).collect();
            let mut cond = space.clone();
            for l in 0..n {
                // 0 <= j_l - dJ_l <= p_l - 1
                let shifted = AffineExpr::var(&format!("j{l}")).minus(&AffineExpr::from_lin(dj[l].clone()));
                cond.push(Constraint::ge(shifted.clone()));
                cond.push(Constraint::ge(
                    AffineExpr::from_lin(tiling.sizes[l].lin() - Lin::constant(1)).minus(&shifted),
                ));
            }
            memory.push(TiledStatement {
                id: format!("{}*{}", s.label, memory.len() + 1),
                origin: s.label.clone(),
                kind: TiledKind::Memory,
                variable: vref.name.clone(),
                role: program.role_of(&vref.name),
                ref_index: Some(r),
                dependence: vref.dependence.clone(),
                gamma,
                dj,
                dk,
                reads: 1,
                ops: BTreeMap::new(),
                condition: cond,
            });
        }
    }
    Ok((comp, memory, assumptions))
}

/// A tiled program: every statement's computational and memory parts.
#[derive(Debug, Clone, Serialize)]
pub struct TiledProgram {
    pub vars: Vec<String>,
    pub parameters: Vec<Parameter>,
    pub tiling: TilingSpec,
    pub statements: Vec<TiledStatement>,
    pub assumptions: Vec<Assumption>,
}

impl TiledProgram {
    pub fn statement(&self, id: &str) -> Option<&TiledStatement> {
        self.statements.iter().find(|s| s.id == id)
    }

    pub fn computational(&self) -> impl Iterator<Item = &TiledStatement> {
        self.statements.iter().filter(|s| s.kind == TiledKind::Computational)
    }

    pub fn memory(&self) -> impl Iterator<Item = &TiledStatement> {
        self.statements.iter().filter(|s| s.kind == TiledKind::Memory)
    }

    /// Memory statement of `origin` for reference `ref_index` and `gamma`.
    pub fn memory_id(&self, origin: &str, ref_index: usize, gamma: &[i64]) -> Option<&str> {
        self.statements
            .iter()
            .find(|s| {
                s.kind == TiledKind::Memory
                    && s.origin == origin
                    && s.ref_index == Some(ref_index)
                    && s.gamma == gamma
            })
            .map(|s| s.id.as_str())
    }
}

/// Tiles every statement. `declared` are parameter assumptions from the
/// mapping; tile sizes are always assumed positive.
pub fn tile_program(
    program: &Program,
    tiling: &TilingSpec,
    declared: &[ParamConstraint],
) -> Result<TiledProgram, TilingError> {
    let n = program.dim();
    tiling.check(n)?;
    let vars = tiled_vars(n);
    let mut parameters = program.parameters.clone();
    for p in tiling.size_params() {
        if !parameters.iter().any(|q| q.name == p) {
            parameters.push(Parameter {
                name: p,
                kind: ParamKind::TileSize,
            });
        }
    }
    for v in &vars {
        if parameters.iter().any(|q| &q.name == v) {
            return Err(TilingError::NameClash(v.clone()));
        }
    }
    let mut assumptions: Vec<Assumption> = Vec::new();
    for (l, size) in tiling.sizes.iter().enumerate() {
        if let TileSize::Param(p) = size {
            let c = ParamConstraint::ge(Lin::param(p.as_str()) - Lin::constant(1));
            assumptions.push(Assumption {
                discharged: implies(declared, &c),
                constraint: c,
                reason: format!("tile size along dimension {l} is positive"),
            });
        }
    }
    let mut statements = Vec::new();
    for s in &program.statements {
        let (comp, mem, mut a) = decompose_statement(program, s, tiling, declared)?;
        statements.push(comp);
        statements.extend(mem);
        assumptions.append(&mut a);
    }
    // One ledger entry per distinct constraint, keeping the strongest.
    let mut ledger: Vec<Assumption> = Vec::new();
    for a in assumptions {
        if ledger.iter().any(|b| implies(std::slice::from_ref(&b.constraint), &a.constraint)) {
            continue;
        }
        ledger.retain(|b| !implies(std::slice::from_ref(&a.constraint), &b.constraint));
        ledger.push(a);
    }
    Ok(TiledProgram {
        vars,
        parameters,
        tiling: tiling.clone(),
        statements,
        assumptions: ledger,
    })
}

/// True iff `p_l * t_l >= N_l` in every dimension.
pub fn check_cover(program: &Program, tiling: &TilingSpec, bindings: &Bindings) -> Result<bool, UnboundParam> {
    let extents = program.extents(bindings)?;
    let sizes = tiling.concrete_sizes(bindings)?;
    Ok(extents
        .iter()
        .zip(&sizes)
        .zip(&tiling.counts)
        .all(|((n, p), t)| p * t >= *n))
}
