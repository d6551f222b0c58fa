//! Affine expressions over symbolic parameters and a small integer
//! feasibility checker for conjunctions of them.
//!
//! Parameter guards in this crate are low-dimensional (usually one loop bound
//! and one tile size per dimension), so feasibility is decided with
//! Fourier-Motzkin elimination plus integer tightening of every derived row.
//! Both steps preserve all integer solutions, which makes an "infeasible"
//! answer exact. A "feasible" answer may rarely be a rational-only witness;
//! callers only ever use infeasibility to prune.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Concrete values for symbolic parameters.
pub type Bindings = BTreeMap<String, i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parameter `{0}` is not bound")]
pub struct UnboundParam(pub String);

/// `constant + Σ coeff·param` with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lin {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
}

impl Lin {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Lin {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn param(name: impl Into<String>) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.into(), 1);
        Lin {
            coeffs,
            constant: 0,
        }
    }

    pub fn term(name: impl Into<String>, coeff: i64) -> Self {
        Lin::param(name) * coeff
    }

    pub fn coeff(&self, name: &str) -> i64 {
        self.coeffs.get(name).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_constant(&self) -> Option<i64> {
        self.is_constant().then_some(self.constant)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant == 0
    }

    pub fn params(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn add_term(&mut self, name: &str, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.coeffs.entry(name.to_string()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(name);
        }
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<i64, UnboundParam> {
        let mut acc = self.constant;
        for (name, c) in &self.coeffs {
            let v = bindings
                .get(name)
                .ok_or_else(|| UnboundParam(name.clone()))?;
            acc += c * v;
        }
        Ok(acc)
    }

    /// Replaces bound parameters by their values, keeping the rest symbolic.
    pub fn partial_eval(&self, bindings: &Bindings) -> Lin {
        let mut out = Lin::constant(self.constant);
        for (name, c) in &self.coeffs {
            match bindings.get(name) {
                Some(v) => out.constant += c * v,
                None => out.add_term(name, *c),
            }
        }
        out
    }

    /// Gcd of the parameter coefficients (0 when constant).
    pub fn content(&self) -> i64 {
        self.coeffs.values().fold(0, |g, c| gcd(g, *c))
    }

    /// Exact division when every coefficient and the constant divide.
    pub fn div_exact(&self, d: i64) -> Option<Lin> {
        if d == 0 || self.constant % d != 0 || self.coeffs.values().any(|c| c % d != 0) {
            return None;
        }
        Some(Lin {
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c / d)).collect(),
            constant: self.constant / d,
        })
    }
}

impl Add for Lin {
    type Output = Lin;
    fn add(mut self, rhs: Lin) -> Lin {
        for (k, c) in &rhs.coeffs {
            self.add_term(k, *c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Add<&Lin> for &Lin {
    type Output = Lin;
    fn add(self, rhs: &Lin) -> Lin {
        self.clone() + rhs.clone()
    }
}

impl Sub for Lin {
    type Output = Lin;
    fn sub(self, rhs: Lin) -> Lin {
        self + (-rhs)
    }
}

impl Sub<&Lin> for &Lin {
    type Output = Lin;
    fn sub(self, rhs: &Lin) -> Lin {
        self.clone() - rhs.clone()
    }
}

impl Neg for Lin {
    type Output = Lin;
    fn neg(self) -> Lin {
        self * -1
    }
}

impl Mul<i64> for Lin {
    type Output = Lin;
    fn mul(self, k: i64) -> Lin {
        if k == 0 {
            return Lin::zero();
        }
        Lin {
            coeffs: self.coeffs.into_iter().map(|(n, c)| (n, c * k)).collect(),
            constant: self.constant * k,
        }
    }
}

impl From<i64> for Lin {
    fn from(c: i64) -> Self {
        Lin::constant(c)
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, c) in &self.coeffs {
            write_term(f, &mut first, *c, Some(name))?;
        }
        if self.constant != 0 || first {
            write_term(f, &mut first, self.constant, None)?;
        }
        Ok(())
    }
}

/// Writes `±c*name` in the `a - b + 2*c` style used by every renderer here.
pub(crate) fn write_term(
    f: &mut impl fmt::Write,
    first: &mut bool,
    coeff: i64,
    name: Option<&str>,
) -> fmt::Result {
    let mag = coeff.unsigned_abs();
    if *first {
        if coeff < 0 {
            f.write_str("-")?;
        }
    } else if coeff < 0 {
        f.write_str(" - ")?;
    } else {
        f.write_str(" + ")?;
    }
    *first = false;
    match name {
        Some(n) if mag == 1 => f.write_str(n),
        Some(n) => write!(f, "{mag}*{n}"),
        None => write!(f, "{mag}"),
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    /// `expr >= 0`
    #[serde(rename = ">=")]
    Ge,
    /// `expr == 0`
    #[serde(rename = "==")]
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Ge => ">=",
            Rel::Eq => "==",
        })
    }
}

/// `lin >= 0` or `lin == 0` over parameters only. Serializes as its
/// rendering, e.g. `"N0 >= 2*p0"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamConstraint {
    pub lin: Lin,
    pub rel: Rel,
}

/// Result of normalizing a single constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    True,
    False,
    Constraint(ParamConstraint),
}

impl ParamConstraint {
    pub fn ge(lin: Lin) -> Self {
        ParamConstraint { lin, rel: Rel::Ge }
    }

    pub fn eq(lin: Lin) -> Self {
        ParamConstraint { lin, rel: Rel::Eq }
    }

    /// `lhs >= rhs`
    pub fn ge_of(lhs: Lin, rhs: Lin) -> Self {
        Self::ge(lhs - rhs)
    }

    pub fn holds(&self, bindings: &Bindings) -> Result<bool, UnboundParam> {
        let v = self.lin.eval(bindings)?;
        Ok(match self.rel {
            Rel::Ge => v >= 0,
            Rel::Eq => v == 0,
        })
    }

    /// Integer complement of a `>=` constraint: `-lin - 1 >= 0`.
    /// Equalities have a disjunctive complement and are split by callers.
    pub fn negated(&self) -> Vec<ParamConstraint> {
        match self.rel {
            Rel::Ge => vec![ParamConstraint::ge(-self.lin.clone() + Lin::constant(-1))],
            Rel::Eq => vec![
                ParamConstraint::ge(self.lin.clone() + Lin::constant(-1)),
                ParamConstraint::ge(-self.lin.clone() + Lin::constant(-1)),
            ],
        }
    }

    /// Gcd-reduces the coefficients and tightens the constant.
    pub fn normalize(&self) -> Normalized {
        let g = self.lin.content();
        if g == 0 {
            let ok = match self.rel {
                Rel::Ge => self.lin.constant >= 0,
                Rel::Eq => self.lin.constant == 0,
            };
            return if ok { Normalized::True } else { Normalized::False };
        }
        let mut lin = self.lin.clone();
        match self.rel {
            Rel::Ge => {
                lin = Lin {
                    coeffs: lin.coeffs.into_iter().map(|(k, c)| (k, c / g)).collect(),
                    constant: floor_div(lin.constant, g),
                };
            }
            Rel::Eq => {
                if lin.constant % g != 0 {
                    return Normalized::False;
                }
                lin = Lin {
                    coeffs: lin.coeffs.into_iter().map(|(k, c)| (k, c / g)).collect(),
                    constant: lin.constant / g,
                };
                // sign convention: first coefficient positive
                if lin.coeffs.values().next().is_some_and(|c| *c < 0) {
                    lin = -lin;
                }
            }
        }
        Normalized::Constraint(ParamConstraint { lin, rel: self.rel })
    }
}

impl fmt::Display for ParamConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Render `a - b >= 0` as `a >= b` for readability.
        let mut lhs = Lin::constant(0);
        let mut rhs = Lin::constant(0);
        for (k, c) in &self.lin.coeffs {
            if *c > 0 {
                lhs.add_term(k, *c);
            } else {
                rhs.add_term(k, -c);
            }
        }
        if self.lin.constant > 0 && !lhs.is_zero() {
            lhs.constant = self.lin.constant;
        } else {
            rhs.constant = -self.lin.constant;
        }
        if lhs.is_zero() {
            return write!(f, "0 {} {}", self.rel, rhs);
        }
        write!(f, "{} {} {}", lhs, self.rel, rhs)
    }
}

impl Serialize for ParamConstraint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParamConstraint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let mut cs = crate::pra::parse_param_constraint(&text).map_err(serde::de::Error::custom)?;
        if cs.len() != 1 {
            return Err(serde::de::Error::custom(format!("expected one constraint, found `{text}`")));
        }
        Ok(cs.remove(0))
    }
}

/// Normalizes, deduplicates and sorts a conjunction. `None` if it is
/// trivially contradictory.
pub fn normalize_all(cs: &[ParamConstraint]) -> Option<Vec<ParamConstraint>> {
    let mut out = BTreeSet::new();
    for c in cs {
        match c.normalize() {
            Normalized::True => {}
            Normalized::False => return None,
            Normalized::Constraint(c) => {
                out.insert(c);
            }
        }
    }
    Some(out.into_iter().collect())
}

/// Decides integer feasibility of a conjunction (exact for "infeasible").
pub fn feasible(cs: &[ParamConstraint]) -> bool {
    let Some(cs) = normalize_all(cs) else {
        return false;
    };
    if cs.is_empty() {
        return true;
    }
    // Split into independent groups of parameters; the usual guard touches
    // one array dimension at a time, so groups stay tiny.
    for group in components(&cs) {
        if !fm_feasible(&group) {
            return false;
        }
    }
    true
}

/// True when every integer point of `ctx` satisfies `c`.
pub fn implies(ctx: &[ParamConstraint], c: &ParamConstraint) -> bool {
    match c.rel {
        Rel::Ge => {
            let mut probe = ctx.to_vec();
            probe.extend(c.negated());
            !feasible(&probe)
        }
        Rel::Eq => c.negated().into_iter().all(|neg| {
            let mut probe = ctx.to_vec();
            probe.push(neg);
            !feasible(&probe)
        }),
    }
}

/// Canonical form of a guard: normalized, redundant constraints removed,
/// opposite inequality pairs merged into equalities, sorted.
/// Returns `None` when the guard is infeasible.
pub fn simplify_guard(cs: &[ParamConstraint]) -> Option<Vec<ParamConstraint>> {
    let cs = normalize_all(cs)?;
    if !feasible(&cs) {
        return None;
    }
    // Merge `e >= 0 && -e >= 0` into `e == 0`.
    let mut merged: Vec<ParamConstraint> = Vec::new();
    let mut used = vec![false; cs.len()];
    for i in 0..cs.len() {
        if used[i] {
            continue;
        }
        if cs[i].rel == Rel::Ge {
            let neg = -cs[i].lin.clone();
            if let Some(j) = (i + 1..cs.len())
                .find(|&j| !used[j] && cs[j].rel == Rel::Ge && cs[j].lin == neg)
            {
                used[j] = true;
                if let Normalized::Constraint(e) = ParamConstraint::eq(cs[i].lin.clone()).normalize() {
                    merged.push(e);
                }
                continue;
            }
        }
        merged.push(cs[i].clone());
    }
    // Drop constraints implied by the rest.
    let mut i = 0;
    while i < merged.len() {
        let c = merged[i].clone();
        let rest: Vec<_> = merged
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| c.clone())
            .collect();
        if implies(&rest, &c) {
            merged.remove(i);
        } else {
            i += 1;
        }
    }
    merged.sort();
    merged.dedup();
    Some(merged)
}

fn components(cs: &[ParamConstraint]) -> Vec<Vec<ParamConstraint>> {
    let mut parent: HashMap<&str, &str> = HashMap::new();
    fn find<'a>(parent: &mut HashMap<&'a str, &'a str>, x: &'a str) -> &'a str {
        let p = *parent.entry(x).or_insert(x);
        if p == x {
            return x;
        }
        let r = find(parent, p);
        parent.insert(x, r);
        r
    }
    for c in cs {
        let mut it = c.lin.params();
        if let Some(first) = it.next() {
            let a = find(&mut parent, first);
            for other in it {
                let b = find(&mut parent, other);
                if a != b {
                    parent.insert(b, a);
                }
            }
        }
    }
    let mut groups: BTreeMap<String, Vec<ParamConstraint>> = BTreeMap::new();
    for c in cs {
        let root = c.lin.params().next().map(|p| find(&mut parent, p).to_string());
        groups.entry(root.unwrap_or_default()).or_default().push(c.clone());
    }
    groups.into_values().collect()
}

/// Row `Σ a_i x_i + c >= 0` in dense form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Row {
    a: Vec<i128>,
    c: i128,
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn floor_div128(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

impl Row {
    /// Tightened row, or `Err(())` if the row is a false constant.
    fn tighten(mut self) -> Result<Option<Row>, ()> {
        let g = self.a.iter().fold(0, |g, x| gcd128(g, *x));
        if g == 0 {
            return if self.c >= 0 { Ok(None) } else { Err(()) };
        }
        if g > 1 {
            for x in &mut self.a {
                *x /= g;
            }
            self.c = floor_div128(self.c, g);
        }
        Ok(Some(self))
    }
}

fn fm_feasible(cs: &[ParamConstraint]) -> bool {
    let vars: Vec<&str> = cs
        .iter()
        .flat_map(|c| c.lin.params())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let dense = |lin: &Lin| Row {
        a: {
            let mut a = vec![0i128; vars.len()];
            for (k, c) in &lin.coeffs {
                a[index[k.as_str()]] = *c as i128;
            }
            a
        },
        c: lin.constant as i128,
    };

    let mut eqs = Vec::new();
    let mut rows = Vec::new();
    for c in cs {
        match c.rel {
            Rel::Ge => rows.push(dense(&c.lin)),
            Rel::Eq => eqs.push(dense(&c.lin)),
        }
    }

    // Substitute equalities away first.
    while let Some(e) = eqs.pop() {
        let g = e.a.iter().fold(0, |g, x| gcd128(g, *x));
        if g == 0 {
            if e.c != 0 {
                return false;
            }
            continue;
        }
        if e.c % g != 0 {
            return false;
        }
        let pivot = e
            .a
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0)
            .min_by_key(|(_, x)| x.abs())
            .map(|(i, _)| i)
            .unwrap();
        let ap = e.a[pivot];
        let eliminate = |r: &Row| -> Row {
            let b = r.a[pivot];
            if b == 0 {
                return r.clone();
            }
            // |ap|·r − sign(ap)·b·e keeps the orientation of r.
            let s = ap.signum();
            let m = ap.abs();
            Row {
                a: r.a.iter().zip(&e.a).map(|(x, y)| m * x - s * b * y).collect(),
                c: m * r.c - s * b * e.c,
            }
        };
        for r in rows.iter_mut() {
            *r = eliminate(r);
        }
        for other in eqs.iter_mut() {
            *other = eliminate(other);
        }
    }

    let mut rows = match tidy(rows) {
        Some(r) => r,
        None => return false,
    };
    for _ in 0..vars.len() {
        if rows.is_empty() {
            return true;
        }
        // Pick the variable generating the fewest new rows.
        let Some(var) = (0..vars.len())
            .filter(|&v| rows.iter().any(|r| r.a[v] != 0))
            .min_by_key(|&v| {
                let pos = rows.iter().filter(|r| r.a[v] > 0).count();
                let neg = rows.iter().filter(|r| r.a[v] < 0).count();
                pos * neg
            })
        else {
            break;
        };
        let (pos, rest): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|r| r.a[var] > 0);
        let (neg, mut keep): (Vec<Row>, Vec<Row>) = rest.into_iter().partition(|r| r.a[var] < 0);
        for p in &pos {
            for n in &neg {
                let a = p.a[var];
                let b = -n.a[var];
                keep.push(Row {
                    a: p.a.iter().zip(&n.a).map(|(x, y)| b * x + a * y).collect(),
                    c: b * p.c + a * n.c,
                });
            }
        }
        rows = match tidy(keep) {
            Some(r) => r,
            None => return false,
        };
    }
    rows.iter().all(|r| r.c >= 0)
}

/// Tightens rows, drops trivial ones, keeps the strongest row per direction
/// and detects directly opposed pairs.
fn tidy(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut best: HashMap<Vec<i128>, i128> = HashMap::new();
    for r in rows {
        match r.tighten() {
            Err(()) => return None,
            Ok(None) => {}
            Ok(Some(r)) => {
                let e = best.entry(r.a).or_insert(r.c);
                if r.c < *e {
                    *e = r.c;
                }
            }
        }
    }
    for (a, c) in &best {
        let neg: Vec<i128> = a.iter().map(|x| -x).collect();
        if let Some(c2) = best.get(&neg) {
            if c + c2 < 0 {
                return None;
            }
        }
    }
    Some(best.into_iter().map(|(a, c)| Row { a, c }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> Lin {
        Lin::param(n)
    }

    #[test]
    fn lin_display() {
        let l = p("N0") * 2 - p("p0") + Lin::constant(-3);
        assert_eq!(l.to_string(), "2*N0 - p0 - 3");
        assert_eq!(Lin::zero().to_string(), "0");
        assert_eq!((-p("x")).to_string(), "-x");
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_div(-3, 2), -2);
        assert_eq!(floor_div(3, 2), 1);
        assert_eq!(ceil_div(-3, 2), -1);
        assert_eq!(ceil_div(3, 2), 2);
        assert_eq!(floor_div(-4, 2), -2);
    }

    #[test]
    fn normalization_tightens() {
        // 2x - 3 >= 0  ->  x - 2 >= 0
        let c = ParamConstraint::ge(p("x") * 2 + Lin::constant(-3));
        let Normalized::Constraint(n) = c.normalize() else { panic!() };
        assert_eq!(n.lin, p("x") + Lin::constant(-2));
        // 2x == 3 has no integer solution
        assert_eq!(
            ParamConstraint::eq(p("x") * 2 + Lin::constant(-3)).normalize(),
            Normalized::False
        );
    }

    #[test]
    fn feasibility_basic() {
        let x_ge_1 = ParamConstraint::ge(p("x") - Lin::constant(1));
        let x_le_0 = ParamConstraint::ge(-p("x"));
        assert!(!feasible(&[x_ge_1.clone(), x_le_0]));
        // 2p >= N, p <= 3, N >= 7 infeasible
        let cs = vec![
            ParamConstraint::ge(p("p") * 2 - p("N")),
            ParamConstraint::ge(Lin::constant(3) - p("p")),
            ParamConstraint::ge(p("N") - Lin::constant(7)),
        ];
        assert!(!feasible(&cs));
        let cs2 = vec![
            ParamConstraint::ge(p("p") * 2 - p("N")),
            ParamConstraint::ge(Lin::constant(3) - p("p")),
            ParamConstraint::ge(p("N") - Lin::constant(6)),
        ];
        assert!(feasible(&cs2));
    }

    #[test]
    fn integer_tightening_catches_parity_gaps() {
        // 1 <= 2x <= 1 has a rational but no integer solution
        let cs = vec![
            ParamConstraint::ge(p("x") * 2 - Lin::constant(1)),
            ParamConstraint::ge(Lin::constant(1) - p("x") * 2),
        ];
        assert!(!feasible(&cs));
    }

    #[test]
    fn equalities_substitute() {
        let cs = vec![
            ParamConstraint::eq(p("a") - p("b") * 2),
            ParamConstraint::ge(p("b") - Lin::constant(1)),
            ParamConstraint::ge(Lin::constant(1) - p("a")),
        ];
        assert!(!feasible(&cs));
    }

    #[test]
    fn simplify_merges_and_drops_redundant() {
        let cs = vec![
            ParamConstraint::ge(p("x") - Lin::constant(1)),
            ParamConstraint::ge(p("x")),
            ParamConstraint::ge(p("y") - p("x")),
            ParamConstraint::ge(p("x") - p("y")),
        ];
        let g = simplify_guard(&cs).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().any(|c| c.rel == Rel::Eq));
    }

    #[test]
    fn implication() {
        let ctx = vec![ParamConstraint::ge(p("p") - Lin::constant(2))];
        assert!(implies(&ctx, &ParamConstraint::ge(p("p") - Lin::constant(1))));
        assert!(!implies(&ctx, &ParamConstraint::ge(p("p") - Lin::constant(3))));
    }

    #[test]
    fn constraint_display() {
        let c = ParamConstraint::ge(p("p0") * 2 - p("N0"));
        assert_eq!(c.to_string(), "2*p0 >= N0");
        let c = ParamConstraint::ge(p("N1") - p("p1") + Lin::constant(-2));
        assert_eq!(c.to_string(), "N1 >= p1 + 2");
        let c = ParamConstraint::ge(p("p0") + Lin::constant(-1));
        assert_eq!(c.to_string(), "p0 >= 1");
    }
}
