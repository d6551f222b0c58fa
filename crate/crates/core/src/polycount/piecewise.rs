//! Piecewise polynomials: disjoint affine parameter guards, each carrying an
//! integer polynomial, with value 0 outside every guard.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::tree::{guard_tree, Ctx, Tree};
use crate::linear::{feasible, simplify_guard, Bindings, Lin, Normalized, ParamConstraint, Rel, UnboundParam};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub guard: Vec<ParamConstraint>,
    pub value: Poly,
}

impl Piece {
    pub fn holds(&self, bindings: &Bindings) -> Result<bool, UnboundParam> {
        for c in &self.guard {
            if !c.holds(bindings)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if self.guard.is_empty() {
            return Ok(());
        }
        f.write_str(" if ")?;
        for (i, c) in self.guard.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    pub pieces: Vec<Piece>,
}

impl PiecewisePolynomial {
    pub fn zero() -> Self {
        PiecewisePolynomial::default()
    }

    /// `value` everywhere.
    pub fn from_poly(value: Poly) -> Self {
        if value.is_zero() {
            return Self::zero();
        }
        PiecewisePolynomial {
            pieces: vec![Piece { guard: Vec::new(), value }],
        }
    }

    pub fn constant(c: i64) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// Value of the piece whose guard holds, 0 if none does.
    pub fn eval(&self, bindings: &Bindings) -> Result<i128, UnboundParam> {
        for p in &self.pieces {
            if p.holds(bindings)? {
                return p.value.eval(bindings);
            }
        }
        Ok(0)
    }

    /// Number of pieces whose guard holds at `bindings` (at most 1).
    pub fn matching(&self, bindings: &Bindings) -> Result<usize, UnboundParam> {
        let mut n = 0;
        for p in &self.pieces {
            if p.holds(bindings)? {
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn params(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        for p in &self.pieces {
            for c in &p.guard {
                out.extend(c.lin.params().map(str::to_string));
            }
            out.extend(p.value.params().map(str::to_string));
        }
        out.into_iter().collect()
    }

    /// Decision-tree form (used by the pointwise operations).
    pub fn to_tree(&self, ctx: &mut Ctx) -> Tree<Poly> {
        fn go(pieces: &[Piece], ctx: &mut Ctx) -> Tree<Poly> {
            match pieces.split_first() {
                None => Tree::Leaf(Poly::zero()),
                Some((p, rest)) => {
                    let inside = guard_tree(ctx, &p.guard, true, false);
                    inside.bind(ctx, &mut |hit, ctx| {
                        if *hit {
                            Tree::Leaf(p.value.clone())
                        } else {
                            go(rest, ctx)
                        }
                    })
                }
            }
        }
        go(&self.pieces, ctx)
    }

    /// Flattens a tree into disjoint pieces; zero leaves are dropped and
    /// guards simplified. `domain` is conjoined into every guard.
    pub fn from_tree(tree: &Tree<Poly>, domain: &[ParamConstraint]) -> Self {
        let mut pieces = Vec::new();
        for (path, value) in tree.paths() {
            if value.is_zero() {
                continue;
            }
            let mut guard = domain.to_vec();
            guard.extend(path);
            if let Some(guard) = simplify_guard(&guard) {
                pieces.push(Piece {
                    guard,
                    value: value.clone(),
                });
            }
        }
        PiecewisePolynomial { pieces }.canonical()
    }

    /// Merges pieces with equal values whose guards differ in one
    /// complementary constraint, then sorts pieces deterministically.
    pub fn canonical(self) -> Self {
        let mut by_value: BTreeMap<String, (Poly, Vec<Vec<ParamConstraint>>)> = BTreeMap::new();
        for p in self.pieces {
            by_value
                .entry(p.value.to_string())
                .or_insert_with(|| (p.value.clone(), Vec::new()))
                .1
                .push(p.guard);
        }
        let mut pieces = Vec::new();
        for (_, (value, guards)) in by_value {
            for guard in merge_all(guards) {
                pieces.push(Piece {
                    guard,
                    value: value.clone(),
                });
            }
        }
        pieces.sort_by(|a, b| {
            a.guard
                .cmp(&b.guard)
                .then_with(|| a.value.to_string().cmp(&b.value.to_string()))
        });
        PiecewisePolynomial { pieces }
    }

    pub fn scale(&self, c: i64) -> Self {
        if c == 0 {
            return Self::zero();
        }
        PiecewisePolynomial {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    guard: p.guard.clone(),
                    value: p.value.scale(c),
                })
                .collect(),
        }
    }

    fn combine(&self, other: &Self, f: &mut dyn FnMut(&Poly, &Poly) -> Poly) -> Self {
        let mut ctx = Ctx::new();
        let a = self.to_tree(&mut ctx);
        let b = other.to_tree(&mut ctx);
        let t = a.apply2(&b, &mut ctx, f);
        Self::from_tree(&t, &[])
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.pieces.is_empty() {
            return self.clone();
        }
        if self.pieces.is_empty() {
            return other.clone();
        }
        self.combine(other, &mut |x, y| x + y)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, &mut |x, y| x * y)
    }

    /// True when both have the same value at every point of `points`.
    pub fn agrees_on<'a>(&self, other: &Self, points: impl IntoIterator<Item = &'a Bindings>) -> Result<bool, UnboundParam> {
        for b in points {
            if self.eval(b)? != other.eval(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for PiecewisePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return f.write_str("0");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

pub fn pw_add(a: &PiecewisePolynomial, b: &PiecewisePolynomial) -> PiecewisePolynomial {
    a.add(b)
}

pub fn pw_scale(a: &PiecewisePolynomial, c: i64) -> PiecewisePolynomial {
    a.scale(c)
}

pub fn pw_eval(a: &PiecewisePolynomial, bindings: &Bindings) -> Result<i128, UnboundParam> {
    a.eval(bindings)
}

/// Repeatedly merges pairs of guards that share all but one constraint.
/// Candidates are found through an index keyed by the guard with one
/// constraint left out.
pub(super) fn merge_all(mut guards: Vec<Vec<ParamConstraint>>) -> Vec<Vec<ParamConstraint>> {
    loop {
        let mut index: BTreeMap<Vec<ParamConstraint>, Vec<usize>> = BTreeMap::new();
        for (i, g) in guards.iter().enumerate() {
            for k in 0..g.len() {
                let mut rest = g.clone();
                rest.remove(k);
                index.entry(rest).or_default().push(i);
            }
        }
        let mut used = vec![false; guards.len()];
        let mut next = Vec::new();
        for bucket in index.values() {
            for a in 0..bucket.len() {
                for b in a + 1..bucket.len() {
                    let (i, j) = (bucket[a], bucket[b]);
                    if used[i] || used[j] {
                        continue;
                    }
                    if let Some(g) = merge_guards(&guards[i], &guards[j]) {
                        used[i] = true;
                        used[j] = true;
                        if let Some(g) = simplify_guard(&g) {
                            next.push(g);
                        }
                    }
                }
            }
        }
        if next.is_empty() && !used.iter().any(|u| *u) {
            return guards;
        }
        next.extend(guards.into_iter().zip(used).filter(|(_, u)| !u).map(|(g, _)| g));
        guards = next;
    }
}

/// Union of two conjunctions that differ in exactly one complementary
/// constraint, as a conjunction.
fn merge_guards(a: &[ParamConstraint], b: &[ParamConstraint]) -> Option<Vec<ParamConstraint>> {
    let only_a: Vec<&ParamConstraint> = a.iter().filter(|c| !b.contains(c)).collect();
    let only_b: Vec<&ParamConstraint> = b.iter().filter(|c| !a.contains(c)).collect();
    if only_a.len() != 1 || only_b.len() != 1 {
        return None;
    }
    let common: Vec<ParamConstraint> = a.iter().filter(|c| b.contains(c)).cloned().collect();
    let (x, y) = (only_a[0], only_b[0]);
    let joined = join(x, y).or_else(|| join(y, x))?;
    let mut out = common;
    if let Some(c) = joined {
        out.push(c);
    }
    Some(out)
}

/// `x || y` as a single constraint (`Some(None)` for "always"), when exact.
fn join(x: &ParamConstraint, y: &ParamConstraint) -> Option<Option<ParamConstraint>> {
    let norm = |c: ParamConstraint| match c.normalize() {
        Normalized::Constraint(c) => Some(c),
        _ => None,
    };
    match (x.rel, y.rel) {
        (Rel::Ge, Rel::Ge) => {
            // l >= 0 || -l - 1 >= 0 covers everything
            let comp = norm(ParamConstraint::ge(-x.lin.clone() - Lin::constant(1)))?;
            (comp == *y).then_some(None)
        }
        (Rel::Eq, Rel::Ge) => {
            // l == 0 || l - 1 >= 0  =>  l >= 0 (and the mirrored case)
            for s in [1, -1] {
                let l = x.lin.clone() * s;
                if norm(ParamConstraint::ge(l.clone() - Lin::constant(1))).as_ref() == Some(y) {
                    return Some(norm(ParamConstraint::ge(l)));
                }
            }
            None
        }
        _ => None,
    }
}

/// True if no two guards share a rational point. Guards that meet only at
/// non-integer points are reported as overlapping.
pub fn guards_disjoint(pw: &PiecewisePolynomial) -> bool {
    for (i, a) in pw.pieces.iter().enumerate() {
        for b in &pw.pieces[i + 1..] {
            let mut both = a.guard.clone();
            both.extend(b.guard.iter().cloned());
            if feasible(&both) {
                return false;
            }
        }
    }
    true
}
