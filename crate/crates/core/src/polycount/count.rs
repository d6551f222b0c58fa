//! Integer-point counting of tiled condition spaces.
//!
//! Symbolic counts unfold the tile coordinates `k` (their range is the fixed
//! array size) and count the remaining intervals in `j` per dimension.
//! Constraints never couple dimensions in the usual case, so each dimension
//! is unfolded and counted on its own and the volume is a product of
//! per-dimension factors.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::piecewise::{merge_all, Piece, PiecewisePolynomial};
use super::tree::{guard_tree, Ctx, Tree};
use crate::linear::{ceil_div, floor_div, simplify_guard, Bindings, Lin, ParamConstraint, Rel, UnboundParam};
use crate::poly::Poly;
use crate::pra::{AffineExpr, Constraint, ConstraintSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("fallback required: {0}")]
    FallbackRequired(String),
    #[error("non-unfoldable nonlinearity: {0}")]
    NonUnfoldable(String),
    #[error("unbounded polyhedron: variable `{0}` has no {1} bound")]
    Unbounded(String, &'static str),
    #[error("unbound parameter `{}`", .0 .0)]
    Unbound(UnboundParam),
}

impl From<UnboundParam> for CountError {
    fn from(e: UnboundParam) -> Self {
        CountError::Unbound(e)
    }
}

/// Substitutes concrete values for some variables.
fn substitute(cs: &ConstraintSystem, values: &BTreeMap<String, i64>, keep: Vec<String>) -> ConstraintSystem {
    let mut out = ConstraintSystem::new(keep);
    for c in &cs.constraints {
        let mut e = c.expr.clone();
        for (v, x) in values {
            e = e
                .substitute(v, &AffineExpr::from_lin(Lin::constant(*x)))
                .expect("constant substitution stays affine");
        }
        out.push(Constraint { expr: e, rel: c.rel });
    }
    out
}

/// Dimension index of a tiled variable `j<l>` / `k<l>`.
fn dim_of(var: &str, vars: &[String]) -> usize {
    let n = vars.len() / 2;
    vars.iter().position(|v| v == var).expect("declared variable") % n
}

fn is_k(var: &str, vars: &[String]) -> bool {
    let n = vars.len() / 2;
    vars.iter().position(|v| v == var).is_some_and(|i| i >= n)
}

fn check_unfoldable(cs: &ConstraintSystem) -> Result<(), CountError> {
    for c in &cs.constraints {
        for (v, coeff) in &c.expr.vars {
            if !coeff.is_constant() && !is_k(v, &cs.vars) {
                return Err(CountError::NonUnfoldable(format!(
                    "parametric coefficient {coeff} on `{v}` in `{c}`"
                )));
            }
        }
    }
    Ok(())
}

fn box_points(ranges: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &t in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..t).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// One system over `j` per tile-origin point `k` in `[0, t)`; systems
/// whose parameter-free constraints are contradictory are dropped.
pub fn unfold_k(cs: &ConstraintSystem, t: &[i64]) -> Result<Vec<(Vec<i64>, ConstraintSystem)>, CountError> {
    check_unfoldable(cs)?;
    let n = t.len();
    let (jvars, kvars) = cs.vars.split_at(n);
    let mut out = Vec::new();
    for k in box_points(t) {
        let values: BTreeMap<String, i64> = kvars.iter().cloned().zip(k.iter().copied()).collect();
        let sys = substitute(cs, &values, jvars.to_vec());
        if sys
            .constraints
            .iter()
            .any(|c| c.is_trivially_false())
        {
            continue;
        }
        out.push((k, sys));
    }
    Ok(out)
}

/// Interval bounds on one variable, or `None` when the variable is pinned to
/// an impossible residue.
fn var_bounds(constraints: &[&Constraint], var: &str) -> Result<Option<(Vec<Lin>, Vec<Lin>)>, CountError> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for c in constraints {
        let a = c.expr.coeff(var).as_constant().expect("unfolded coefficient");
        let rest = &c.expr.rest;
        if rest.coeffs.values().any(|x| x % a != 0) {
            return Err(CountError::FallbackRequired(format!(
                "coefficient {a} of `{var}` does not divide `{rest}`"
            )));
        }
        let scaled = |div: i64| Lin {
            coeffs: rest.coeffs.iter().map(|(k, x)| (k.clone(), -x / div)).collect(),
            constant: 0,
        };
        match c.rel {
            Rel::Ge if a > 0 => {
                // x >= ceil(-rest / a)
                let mut l = scaled(a);
                l.constant = ceil_div(-rest.constant, a);
                lower.push(l);
            }
            Rel::Ge => {
                // x <= floor(rest / -a)
                let b = -a;
                let mut u = scaled(a);
                u.constant = floor_div(rest.constant, b);
                upper.push(u);
            }
            Rel::Eq => {
                if rest.constant % a != 0 {
                    return Ok(None);
                }
                let mut e = scaled(a);
                e.constant = -rest.constant / a;
                lower.push(e.clone());
                upper.push(e);
            }
        }
    }
    Ok(Some((lower, upper)))
}

/// Drops bounds implied by another bound under `ctx`.
fn prune_bounds(ctx: &Ctx, bounds: Vec<Lin>, tighter_is_larger: bool) -> Vec<Lin> {
    let mut uniq: Vec<Lin> = Vec::new();
    for b in bounds {
        if !uniq.contains(&b) {
            uniq.push(b);
        }
    }
    let mut keep = vec![true; uniq.len()];
    for i in 0..uniq.len() {
        for j in 0..uniq.len() {
            if i == j || !keep[j] {
                continue;
            }
            // j dominates i
            let diff = if tighter_is_larger {
                uniq[j].clone() - uniq[i].clone()
            } else {
                uniq[i].clone() - uniq[j].clone()
            };
            if super::tree::decide(ctx, &diff) == Some(true) {
                keep[i] = false;
                break;
            }
        }
    }
    uniq.into_iter().zip(keep).filter(|(_, k)| *k).map(|(b, _)| b).collect()
}

/// `max` (or `min`) of affine bounds as a tree.
fn extreme(ctx: &mut Ctx, bounds: &[Lin], max: bool) -> Tree<Lin> {
    let mut t = Tree::Leaf(bounds[0].clone());
    for b in &bounds[1..] {
        t = t.bind(ctx, &mut |cur, ctx| {
            let diff = if max { cur.clone() - b.clone() } else { b.clone() - cur.clone() };
            Tree::split(ctx, diff, Tree::Leaf(cur.clone()), Tree::Leaf(b.clone()))
        });
    }
    t
}

/// Number of integers in one variable's interval, as a tree.
fn count_interval(ctx: &mut Ctx, constraints: &[&Constraint], var: &str) -> Result<Tree<Poly>, CountError> {
    let Some((lower, upper)) = var_bounds(constraints, var)? else {
        return Ok(Tree::Leaf(Poly::zero()));
    };
    if lower.is_empty() {
        return Err(CountError::Unbounded(var.to_string(), "lower"));
    }
    if upper.is_empty() {
        return Err(CountError::Unbounded(var.to_string(), "upper"));
    }
    let lower = prune_bounds(ctx, lower, true);
    let upper = prune_bounds(ctx, upper, false);
    let lo = extreme(ctx, &lower, true);
    let hi = extreme(ctx, &upper, false);
    Ok(lo.bind(ctx, &mut |l, ctx| {
        hi.bind(ctx, &mut |u, ctx| {
            let width = u.clone() - l.clone();
            Tree::split(
                ctx,
                width.clone(),
                Tree::Leaf(Poly::from(width + Lin::constant(1))),
                Tree::Leaf(Poly::zero()),
            )
        })
    }))
}

/// Parameter-only constraints as ParamConstraints.
fn param_constraint(c: &Constraint) -> ParamConstraint {
    ParamConstraint {
        lin: c.expr.rest.clone(),
        rel: c.rel,
    }
}

/// Count tree for a system in which every constraint mentions at most one
/// variable.
fn separable_tree(ctx: &mut Ctx, cs: &ConstraintSystem, vars: &[String]) -> Result<Tree<Poly>, CountError> {
    let mut guard = Vec::new();
    let mut per_var: BTreeMap<&str, Vec<&Constraint>> = BTreeMap::new();
    for c in &cs.constraints {
        match c.expr.vars.len() {
            0 => guard.push(param_constraint(c)),
            1 => per_var.entry(c.expr.vars.keys().next().unwrap()).or_default().push(c),
            _ => {
                return Err(CountError::FallbackRequired(format!("constraint `{c}` couples variables")));
            }
        }
    }
    let mut t: Tree<Poly> = guard_tree(ctx, &guard, Poly::constant(1), Poly::zero());
    for v in vars {
        let cs_v = per_var.get(v.as_str()).cloned().unwrap_or_default();
        if cs_v.is_empty() {
            return Err(CountError::Unbounded(v.clone(), "lower"));
        }
        let mut err = None;
        t = t.bind(ctx, &mut |x, ctx| {
            if x.is_zero() {
                return Tree::Leaf(Poly::zero());
            }
            match count_interval(ctx, &cs_v, v) {
                Ok(f) => f.map(&mut |y| x * y),
                Err(e) => {
                    err.get_or_insert(e);
                    Tree::Leaf(Poly::zero())
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(t)
}

/// Counts a system over `j` in which each constraint touches at most one
/// variable, as a piecewise polynomial.
pub fn count_separable(cs: &ConstraintSystem, domain: &[ParamConstraint]) -> Result<PiecewisePolynomial, CountError> {
    let mut ctx: Ctx = domain.to_vec();
    let t = separable_tree(&mut ctx, cs, &cs.vars)?;
    Ok(PiecewisePolynomial::from_tree(&t, domain))
}

/// Exact number of integer points with every parameter bound.
pub fn count_concrete(cs: &ConstraintSystem, bindings: &Bindings) -> Result<i128, CountError> {
    // Integer rows a.x + c (>= 0 or == 0) over the declared variable order.
    let vars = &cs.vars;
    let mut rows = Vec::new();
    for c in &cs.constraints {
        let mut a = vec![0i64; vars.len()];
        for (v, coeff) in &c.expr.vars {
            let idx = vars
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| CountError::Unbound(UnboundParam(v.clone())))?;
            a[idx] = coeff.eval(bindings)?;
        }
        rows.push((a, c.expr.rest.eval(bindings)?, c.rel));
    }
    // Each row is checked at the deepest variable it mentions.
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
    for (r, (a, c, rel)) in rows.iter().enumerate() {
        match a.iter().rposition(|x| *x != 0) {
            Some(last) => by_last[last].push(r),
            None => {
                let ok = match rel {
                    Rel::Ge => *c >= 0,
                    Rel::Eq => *c == 0,
                };
                if !ok {
                    return Ok(0);
                }
            }
        }
    }
    if vars.is_empty() {
        return Ok(1);
    }
    let mut point = vec![0i64; vars.len()];
    count_rec(0, &mut point, &rows, &by_last, vars)
}

fn count_rec(
    depth: usize,
    point: &mut Vec<i64>,
    rows: &[(Vec<i64>, i64, Rel)],
    by_last: &[Vec<usize>],
    vars: &[String],
) -> Result<i128, CountError> {
    let mut lo = i64::MIN;
    let mut hi = i64::MAX;
    for &r in &by_last[depth] {
        let (a, c, rel) = &rows[r];
        let rest: i64 = c + (0..depth).map(|i| a[i] * point[i]).sum::<i64>();
        let x = a[depth];
        match rel {
            Rel::Ge if x > 0 => lo = lo.max(ceil_div(-rest, x)),
            Rel::Ge => hi = hi.min(floor_div(rest, -x)),
            Rel::Eq => {
                if rest % x != 0 {
                    return Ok(0);
                }
                lo = lo.max(-rest / x);
                hi = hi.min(-rest / x);
            }
        }
    }
    if lo == i64::MIN {
        return Err(CountError::Unbounded(vars[depth].clone(), "lower"));
    }
    if hi == i64::MAX {
        return Err(CountError::Unbounded(vars[depth].clone(), "upper"));
    }
    if hi < lo {
        return Ok(0);
    }
    if depth + 1 == vars.len() {
        return Ok((hi - lo + 1) as i128);
    }
    let mut total = 0;
    for x in lo..=hi {
        point[depth] = x;
        total += count_rec(depth + 1, point, rows, by_last, vars)?;
    }
    Ok(total)
}

/// Symbolic volume as a product of independent factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicVolume {
    pub factors: Vec<Tree<Poly>>,
}

impl SymbolicVolume {
    pub fn eval(&self, bindings: &Bindings) -> Result<i128, UnboundParam> {
        let mut acc = 1i128;
        for f in &self.factors {
            acc *= f.eval(bindings)?.eval(bindings)?;
        }
        Ok(acc)
    }
}

/// Result of symbolic counting.
#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Symbolic(SymbolicVolume),
    /// Not in the separable class; evaluate with [`count_concrete`].
    Enumerated { reason: String },
}

/// Volume of a tiled condition space over `(j_0..j_{n-1}, k_0..k_{n-1})`.
///
/// Constraints are grouped into blocks of dimensions they couple; each block
/// is unfolded over its own tile coordinates and counted in `j`.
pub fn volume(cs: &ConstraintSystem, t: &[i64], domain: &[ParamConstraint]) -> Result<Volume, CountError> {
    check_unfoldable(cs)?;
    let n = t.len();
    assert_eq!(cs.vars.len(), 2 * n, "tiled system has 2n variables");
    let mut ctx: Ctx = domain.to_vec();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut guard = Vec::new();
    for c in &cs.constraints {
        let dims: BTreeSet<usize> = c.expr.vars.keys().map(|v| dim_of(v, &cs.vars)).collect();
        match dims.iter().next() {
            None => guard.push(param_constraint(c)),
            Some(&first) => {
                for &d in &dims {
                    let (a, b) = (find(&mut parent, first), find(&mut parent, d));
                    parent[b] = a;
                }
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for l in 0..n {
        let r = find(&mut parent, l);
        blocks.entry(r).or_default().push(l);
    }

    let mut factors = Vec::new();
    if !guard.is_empty() {
        factors.push(guard_tree(&mut ctx, &guard, Poly::constant(1), Poly::zero()));
    }
    for dims in blocks.values() {
        let members: Vec<&Constraint> = cs
            .constraints
            .iter()
            .filter(|c| c.expr.vars.keys().any(|v| dims.contains(&dim_of(v, &cs.vars))))
            .collect();
        let jvars: Vec<String> = dims.iter().map(|l| cs.vars[*l].clone()).collect();
        let kvars: Vec<String> = dims.iter().map(|l| cs.vars[n + l].clone()).collect();
        let ranges: Vec<i64> = dims.iter().map(|l| t[*l]).collect();
        let mut block = ConstraintSystem::new(jvars.iter().chain(&kvars).cloned().collect());
        block.constraints = members.into_iter().cloned().collect();

        let mut sum: Tree<Poly> = Tree::Leaf(Poly::zero());
        for k in box_points(&ranges) {
            let values: BTreeMap<String, i64> = kvars.iter().cloned().zip(k).collect();
            let sys = substitute(&block, &values, jvars.clone());
            if sys.constraints.iter().any(|c| c.is_trivially_false()) {
                continue;
            }
            let part = match separable_tree(&mut ctx, &sys, &jvars) {
                Ok(p) => p,
                Err(CountError::FallbackRequired(reason)) => return Ok(Volume::Enumerated { reason }),
                Err(e) => return Err(e),
            };
            sum = sum.apply2(&part, &mut ctx, &mut |a, b| a + b);
        }
        factors.push(sum);
    }
    Ok(Volume::Symbolic(SymbolicVolume { factors }))
}

/// Volume by unfolding every tile coordinate at once and summing the
/// separable counts; an independent route used for cross-checking.
pub fn volume_unfolded(cs: &ConstraintSystem, t: &[i64], domain: &[ParamConstraint]) -> Result<PiecewisePolynomial, CountError> {
    let mut ctx: Ctx = domain.to_vec();
    let mut sum: Tree<Poly> = Tree::Leaf(Poly::zero());
    for (_, sys) in unfold_k(cs, t)? {
        let part = separable_tree(&mut ctx, &sys, &sys.vars)?;
        sum = sum.apply2(&part, &mut ctx, &mut |a, b| a + b);
    }
    Ok(PiecewisePolynomial::from_tree(&sum, domain))
}

/// Weighted sums of several symbolic volumes, flattened to piecewise
/// polynomials that share one partition of parameter space.
///
/// Factors are grouped by the parameters their guards test; parameter-
/// disjoint groups are refined separately and the partition is their
/// product, so no cross-group guard ever needs checking.
pub struct Combination {
    /// Per statement, per factor: (group, index within group).
    slots: Vec<Vec<FactorSlot>>,
    /// Per group: cells as (simplified guard, factor values).
    cells: Vec<Vec<(Vec<ParamConstraint>, Vec<Poly>)>>,
}

#[derive(Clone, Copy)]
enum FactorSlot {
    Constant(usize),
    Grouped(usize, usize),
}

impl Combination {
    pub fn new(volumes: &[&SymbolicVolume], domain: &[ParamConstraint]) -> Self {
        // Union-find over parameters tested by guards or the domain.
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        fn find(p: &mut BTreeMap<String, String>, x: &str) -> String {
            let up = p.entry(x.to_string()).or_insert_with(|| x.to_string()).clone();
            if up == x {
                return up;
            }
            let r = find(p, &up);
            p.insert(x.to_string(), r.clone());
            r
        }
        let union = |params: &[String], parent: &mut BTreeMap<String, String>| {
            if let Some(first) = params.first() {
                let a = find(parent, first);
                for q in &params[1..] {
                    let b = find(parent, q);
                    if a != b {
                        parent.insert(b, a.clone());
                    }
                }
            }
        };
        for v in volumes {
            for f in &v.factors {
                union(&f.atom_params(), &mut parent);
            }
        }
        for c in domain {
            let ps: Vec<String> = c.lin.params().map(str::to_string).collect();
            union(&ps, &mut parent);
        }
        let roots: BTreeSet<String> = parent.keys().cloned().collect::<Vec<_>>().iter().map(|k| find(&mut parent, k)).collect();
        let roots: Vec<String> = roots.into_iter().collect();
        let group_of = |params: &[String], parent: &mut BTreeMap<String, String>| -> Option<usize> {
            params.first().map(|p| {
                let r = find(parent, p);
                roots.iter().position(|x| *x == r).unwrap()
            })
        };

        let mut members: Vec<Vec<&Tree<Poly>>> = vec![Vec::new(); roots.len()];
        let mut constants: Vec<&Tree<Poly>> = Vec::new();
        let mut slots = Vec::new();
        for v in volumes {
            let mut s = Vec::new();
            for f in &v.factors {
                match group_of(&f.atom_params(), &mut parent) {
                    Some(g) => {
                        members[g].push(f);
                        s.push(FactorSlot::Grouped(g, members[g].len() - 1));
                    }
                    None => {
                        constants.push(f);
                        s.push(FactorSlot::Constant(constants.len() - 1));
                    }
                }
            }
            slots.push(s);
        }
        let mut group_domain: Vec<Vec<ParamConstraint>> = vec![Vec::new(); roots.len()];
        let mut global_domain = Vec::new();
        for c in domain {
            let ps: Vec<String> = c.lin.params().map(str::to_string).collect();
            match group_of(&ps, &mut parent) {
                Some(g) => group_domain[g].push(c.clone()),
                None => global_domain.push(c.clone()),
            }
        }

        let mut cells = Vec::new();
        for (g, fs) in members.iter().enumerate() {
            let mut ctx: Ctx = global_domain.clone();
            let mut joint: Tree<Option<Vec<Poly>>> =
                guard_tree(&mut ctx, &group_domain[g], Some(Vec::new()), None);
            for f in fs {
                joint = joint.bind(&mut ctx, &mut |cell, ctx| match cell {
                    None => Tree::Leaf(None),
                    Some(vals) => f.bind(ctx, &mut |x, _| {
                        let mut v = vals.clone();
                        v.push(x.clone());
                        Tree::Leaf(Some(v))
                    }),
                });
            }
            let mut group_cells = Vec::new();
            for (path, leaf) in joint.paths() {
                let Some(vals) = leaf else { continue };
                let mut guard = group_domain[g].clone();
                guard.extend(path);
                if let Some(guard) = simplify_guard(&guard) {
                    group_cells.push((guard, vals.clone()));
                }
            }
            cells.push(group_cells);
        }
        // Constant factors live in a trivial extra group with one cell.
        let consts: Vec<Poly> = constants
            .iter()
            .map(|t| match t {
                Tree::Leaf(p) => p.clone(),
                Tree::Split { .. } => unreachable!("constant factor without atoms"),
            })
            .collect();
        let const_group = cells.len();
        cells.push(vec![(simplify_guard(&global_domain).unwrap_or_default(), consts)]);
        for s in &mut slots {
            for slot in s.iter_mut() {
                if let FactorSlot::Constant(i) = *slot {
                    *slot = FactorSlot::Grouped(const_group, i);
                }
            }
        }
        if global_domain.is_empty() || crate::linear::feasible(&global_domain) {
            Combination { slots, cells }
        } else {
            Combination {
                slots,
                cells: vec![Vec::new()],
            }
        }
    }

    /// Number of pieces in the shared partition.
    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).product()
    }

    /// Piecewise polynomial of `sum_s weights[s] * volume_s`.
    ///
    /// Equal-valued cells are merged one group at a time: two cells can only
    /// merge when they agree on every other group, so merging never has to
    /// simplify a guard across groups.
    pub fn weighted(&self, weights: &[i64]) -> PiecewisePolynomial {
        assert_eq!(weights.len(), self.slots.len());
        if self.cells.iter().any(Vec::is_empty) {
            return PiecewisePolynomial::zero();
        }
        let active: Vec<usize> = (0..weights.len()).filter(|s| weights[*s] != 0).collect();
        let groups = self.cells.len();
        // Interned per-group guards; a piece is one guard id per group.
        let mut interned: Vec<Vec<Vec<ParamConstraint>>> = self
            .cells
            .iter()
            .map(|cs| cs.iter().map(|(g, _)| g.clone()).collect())
            .collect();
        let mut pieces: Vec<(Vec<usize>, Poly)> = Vec::new();
        let mut choice = vec![0usize; groups];
        'cells: loop {
            let mut value = Poly::zero();
            for &s in &active {
                let mut term = Poly::constant(weights[s]);
                for slot in &self.slots[s] {
                    let FactorSlot::Grouped(g, i) = *slot else { unreachable!() };
                    let f = &self.cells[g][choice[g]].1[i];
                    if f.is_zero() {
                        term = Poly::zero();
                        break;
                    }
                    term = &term * f;
                }
                value = &value + &term;
            }
            if !value.is_zero() {
                pieces.push((choice.clone(), value));
            }
            let mut g = 0;
            loop {
                if g == groups {
                    break 'cells;
                }
                choice[g] += 1;
                if choice[g] < self.cells[g].len() {
                    break;
                }
                choice[g] = 0;
                g += 1;
            }
        }

        let mut changed = true;
        while changed {
            changed = false;
            for g in 0..groups {
                let mut buckets: HashMap<(Vec<usize>, &Poly), Vec<usize>> = HashMap::new();
                for (i, (ids, value)) in pieces.iter().enumerate() {
                    let mut key = ids.clone();
                    key[g] = usize::MAX;
                    buckets.entry((key, value)).or_default().push(i);
                }
                let mut keys: Vec<_> = buckets.into_iter().filter(|(_, v)| v.len() > 1).collect();
                keys.sort_by(|a, b| a.1.cmp(&b.1));
                let mut replaced: Vec<Option<Vec<(Vec<usize>, Poly)>>> = Vec::new();
                let mut drop = vec![false; pieces.len()];
                for (_, members) in keys {
                    let guards: Vec<Vec<ParamConstraint>> =
                        members.iter().map(|&i| interned[g][pieces[i].0[g]].clone()).collect();
                    let merged = merge_all(guards);
                    if merged.len() == members.len() {
                        continue;
                    }
                    changed = true;
                    let template = pieces[members[0]].clone();
                    let mut out = Vec::new();
                    for guard in merged {
                        let id = match interned[g].iter().position(|x| *x == guard) {
                            Some(id) => id,
                            None => {
                                interned[g].push(guard);
                                interned[g].len() - 1
                            }
                        };
                        let mut ids = template.0.clone();
                        ids[g] = id;
                        out.push((ids, template.1.clone()));
                    }
                    for &i in &members {
                        drop[i] = true;
                    }
                    replaced.push(Some(out));
                }
                if replaced.is_empty() {
                    continue;
                }
                let mut next: Vec<(Vec<usize>, Poly)> =
                    pieces.into_iter().zip(&drop).filter(|(_, d)| !**d).map(|(p, _)| p).collect();
                next.extend(replaced.into_iter().flatten().flatten());
                pieces = next;
            }
        }

        let mut out: Vec<Piece> = pieces
            .into_iter()
            .map(|(ids, value)| {
                let mut guard: Vec<ParamConstraint> =
                    ids.iter().enumerate().flat_map(|(g, id)| interned[g][*id].iter().cloned()).collect();
                guard.sort();
                guard.dedup();
                Piece { guard, value }
            })
            .collect();
        out.sort_by(|a, b| a.guard.cmp(&b.guard).then_with(|| a.value.to_string().cmp(&b.value.to_string())));
        PiecewisePolynomial { pieces: out }
    }
}

impl SymbolicVolume {
    pub fn to_piecewise(&self, domain: &[ParamConstraint]) -> PiecewisePolynomial {
        Combination::new(&[self], domain).weighted(&[1])
    }
}
