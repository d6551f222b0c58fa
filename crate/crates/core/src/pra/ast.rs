use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linear::{floor_div, gcd, Bindings, Lin, Rel, UnboundParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    LoopBound,
    TileSize,
    TileCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub kind: ParamKind,
}

/// Affine expression over iteration variables and parameters.
///
/// A variable's coefficient is itself affine in the parameters, which is how
/// the `p_l * k_l` products introduced by tiling are represented. Parsed
/// programs only ever carry constant coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineExpr {
    pub vars: BTreeMap<String, Lin>,
    pub rest: Lin,
}

impl AffineExpr {
    pub fn var(name: &str) -> Self {
        let mut vars = BTreeMap::new();
        vars.insert(name.to_string(), Lin::constant(1));
        AffineExpr {
            vars,
            rest: Lin::zero(),
        }
    }

    pub fn from_lin(rest: Lin) -> Self {
        AffineExpr {
            vars: BTreeMap::new(),
            rest,
        }
    }

    pub fn coeff(&self, var: &str) -> Lin {
        self.vars.get(var).cloned().unwrap_or_default()
    }

    pub fn add_var(&mut self, var: &str, coeff: Lin) {
        let e = self.vars.entry(var.to_string()).or_default();
        *e = e.clone() + coeff;
        if e.is_zero() {
            self.vars.remove(var);
        }
    }

    pub fn plus(mut self, other: &AffineExpr) -> AffineExpr {
        for (v, c) in &other.vars {
            self.add_var(v, c.clone());
        }
        self.rest = self.rest + other.rest.clone();
        self
    }

    pub fn scaled(&self, k: i64) -> AffineExpr {
        let mut out = AffineExpr::from_lin(self.rest.clone() * k);
        for (v, c) in &self.vars {
            out.add_var(v, c.clone() * k);
        }
        out
    }

    pub fn minus(self, other: &AffineExpr) -> AffineExpr {
        self.plus(&other.scaled(-1))
    }

    /// Replaces `var` by `replacement`. Only valid when the coefficient of
    /// `var` is constant or `replacement` has constant coefficients and no
    /// parameters, so the result stays affine.
    pub fn substitute(&self, var: &str, replacement: &AffineExpr) -> Option<AffineExpr> {
        let Some(c) = self.vars.get(var) else {
            return Some(self.clone());
        };
        let mut out = self.clone();
        out.vars.remove(var);
        if let Some(k) = c.as_constant() {
            return Some(out.plus(&replacement.scaled(k)));
        }
        // Param coefficient times a replacement: allowed only when the
        // replacement is a pure constant.
        if replacement.vars.is_empty() {
            let k = replacement.rest.as_constant()?;
            out.rest = out.rest + c.clone() * k;
            return Some(out);
        }
        None
    }

    pub fn has_vars(&self) -> bool {
        !self.vars.is_empty()
    }

    /// Evaluates with integer values for variables and parameters.
    pub fn eval(&self, vars: &BTreeMap<String, i64>, params: &Bindings) -> Result<i64, UnboundParam> {
        let mut acc = self.rest.eval(params)?;
        for (v, c) in &self.vars {
            let x = vars.get(v).ok_or_else(|| UnboundParam(v.clone()))?;
            acc += c.eval(params)? * x;
        }
        Ok(acc)
    }

    /// Content over every integer coefficient, when all var coefficients are
    /// constant.
    fn content(&self) -> Option<i64> {
        let mut g = self.rest.content();
        for c in self.vars.values() {
            g = gcd(g, c.as_constant()?);
        }
        Some(g)
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.rest.params().map(str::to_string).collect();
        for c in self.vars.values() {
            out.extend(c.params().map(str::to_string));
        }
        out
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.vars {
            match c.as_constant() {
                Some(k) => crate::linear::write_term(f, &mut first, k, Some(v))?,
                None => {
                    let single = c.coeffs.len() == 1 && c.constant == 0;
                    let (name, k) = c.coeffs.iter().next().unwrap();
                    if single && *k == 1 {
                        crate::linear::write_term(f, &mut first, 1, Some(&format!("{name}*{v}")))?;
                    } else if single && *k == -1 {
                        crate::linear::write_term(f, &mut first, -1, Some(&format!("{name}*{v}")))?;
                    } else {
                        crate::linear::write_term(f, &mut first, 1, Some(&format!("({c})*{v}")))?;
                    }
                }
            }
        }
        for (p, c) in &self.rest.coeffs {
            crate::linear::write_term(f, &mut first, *c, Some(p))?;
        }
        if self.rest.constant != 0 || first {
            crate::linear::write_term(f, &mut first, self.rest.constant, None)?;
        }
        Ok(())
    }
}

/// `expr >= 0` or `expr == 0` over iteration variables and parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Constraint {
    pub expr: AffineExpr,
    pub rel: Rel,
}

impl Constraint {
    pub fn ge(expr: AffineExpr) -> Self {
        Constraint { expr, rel: Rel::Ge }
    }

    pub fn eq(expr: AffineExpr) -> Self {
        Constraint { expr, rel: Rel::Eq }
    }

    /// `lhs >= rhs`
    pub fn ge_of(lhs: AffineExpr, rhs: &AffineExpr) -> Self {
        Constraint::ge(lhs.minus(rhs))
    }

    /// Canonical form: gcd-reduced with the constant tightened, equalities
    /// signed so their first nonzero coefficient is positive. Constant
    /// constraints become `0 >= 0` (true) or `-1 >= 0` (false).
    pub fn normalized(&self) -> Constraint {
        let Some(g) = self.expr.content() else {
            return self.clone();
        };
        if g == 0 {
            let ok = match self.rel {
                Rel::Ge => self.expr.rest.constant >= 0,
                Rel::Eq => self.expr.rest.constant == 0,
            };
            return Constraint::ge(AffineExpr::from_lin(Lin::constant(if ok { 0 } else { -1 })));
        }
        let divide = |e: &AffineExpr, floor_const: bool| -> AffineExpr {
            let mut out = AffineExpr::default();
            for (v, c) in &e.vars {
                out.vars.insert(v.clone(), Lin::constant(c.as_constant().unwrap() / g));
            }
            out.rest = Lin {
                coeffs: e.rest.coeffs.iter().map(|(k, c)| (k.clone(), c / g)).collect(),
                constant: if floor_const {
                    floor_div(e.rest.constant, g)
                } else {
                    e.rest.constant / g
                },
            };
            out
        };
        match self.rel {
            Rel::Ge => Constraint::ge(divide(&self.expr, true)),
            Rel::Eq => {
                if self.expr.rest.constant % g != 0 {
                    return Constraint::ge(AffineExpr::from_lin(Lin::constant(-1)));
                }
                let mut e = divide(&self.expr, false);
                let lead = e
                    .vars
                    .values()
                    .filter_map(Lin::as_constant)
                    .chain(e.rest.coeffs.values().copied())
                    .next()
                    .unwrap_or(0);
                if lead < 0 {
                    e = e.scaled(-1);
                }
                Constraint::eq(e)
            }
        }
    }

    pub fn is_trivially_true(&self) -> bool {
        !self.expr.has_vars()
            && self.expr.rest.is_constant()
            && match self.rel {
                Rel::Ge => self.expr.rest.constant >= 0,
                Rel::Eq => self.expr.rest.constant == 0,
            }
    }

    pub fn is_trivially_false(&self) -> bool {
        !self.expr.has_vars()
            && self.expr.rest.is_constant()
            && match self.rel {
                Rel::Ge => self.expr.rest.constant < 0,
                Rel::Eq => self.expr.rest.constant != 0,
            }
    }

    pub fn holds(&self, vars: &BTreeMap<String, i64>, params: &Bindings) -> Result<bool, UnboundParam> {
        let v = self.expr.eval(vars, params)?;
        Ok(match self.rel {
            Rel::Ge => v >= 0,
            Rel::Eq => v == 0,
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.expr, self.rel)
    }
}

/// Conjunction of affine constraints over an ordered list of variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub vars: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(vars: Vec<String>) -> Self {
        ConstraintSystem {
            vars,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Constraint) {
        let c = c.normalized();
        if c.is_trivially_true() || self.constraints.contains(&c) {
            return;
        }
        self.constraints.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Constraint>) {
        for c in cs {
            self.push(c);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.constraints.iter().flat_map(|c| c.expr.params()).collect()
    }

    pub fn contains_point(&self, vars: &BTreeMap<String, i64>, params: &Bindings) -> Result<bool, UnboundParam> {
        for c in &self.constraints {
            if !c.holds(vars, params)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ [{}] : ", self.vars.join(", "))?;
        if self.constraints.is_empty() {
            f.write_str("true")?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(" }")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
    Internal,
}

/// One component `i_dim + offset` of a variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexTerm {
    pub dim: usize,
    pub offset: i64,
}

/// `x[i - d]`, possibly projected onto a subset of the iteration dimensions
/// (only for declared inputs and outputs).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableRef {
    pub name: String,
    pub index: Vec<IndexTerm>,
    /// Length-n dependence vector; dimensions absent from `index` are 0.
    pub dependence: Vec<i64>,
    pub role: Role,
}

impl VariableRef {
    pub fn new(name: &str, index: Vec<IndexTerm>, n: usize, role: Role) -> Self {
        let mut dependence = vec![0; n];
        for t in &index {
            dependence[t.dim] = -t.offset;
        }
        VariableRef {
            name: name.to_string(),
            index,
            dependence,
            role,
        }
    }

    pub fn is_zero_dependence(&self) -> bool {
        self.dependence.iter().all(|d| *d == 0)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.index.iter().map(|t| t.dim).collect()
    }

    pub fn is_full(&self, n: usize) -> bool {
        self.index.len() == n && self.index.iter().enumerate().all(|(l, t)| t.dim == l)
    }

    /// Instance index read at iteration `i`.
    pub fn instance(&self, i: &[i64]) -> Vec<i64> {
        self.index.iter().map(|t| i[t.dim] + t.offset).collect()
    }

    pub fn render(&self, vars: &[String]) -> String {
        let comps: Vec<String> = self
            .index
            .iter()
            .map(|t| match t.offset {
                0 => vars[t.dim].clone(),
                o if o > 0 => format!("{}+{}", vars[t.dim], o),
                o => format!("{}-{}", vars[t.dim], -o),
            })
            .collect();
        format!("{}[{}]", self.name, comps.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expr {
    Const(i64),
    Ref(VariableRef),
    Op { op: String, args: Vec<Expr> },
}

pub const OP_ADD: &str = "add";
pub const OP_SUB: &str = "sub";
pub const OP_MUL: &str = "mul";
pub const OP_COPY: &str = "copy";

impl Expr {
    pub fn op(op: &str, args: Vec<Expr>) -> Expr {
        Expr::Op {
            op: op.to_string(),
            args,
        }
    }

    /// Right-hand-side references in left-to-right order.
    pub fn refs(&self) -> Vec<&VariableRef> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a VariableRef>) {
        match self {
            Expr::Const(_) => {}
            Expr::Ref(r) => out.push(r),
            Expr::Op { args, .. } => args.iter().for_each(|a| a.collect_refs(out)),
        }
    }

    /// Operation-node counts by kind.
    pub fn op_counts(&self) -> BTreeMap<String, u32> {
        let mut out = BTreeMap::new();
        self.collect_ops(&mut out);
        out
    }

    fn collect_ops(&self, out: &mut BTreeMap<String, u32>) {
        if let Expr::Op { op, args } = self {
            *out.entry(op.clone()).or_insert(0) += 1;
            args.iter().for_each(|a| a.collect_ops(out));
        }
    }

    pub fn refs_mut(&mut self) -> Vec<&mut VariableRef> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a mut Expr, out: &mut Vec<&'a mut VariableRef>) {
            match e {
                Expr::Const(_) => {}
                Expr::Ref(r) => out.push(r),
                Expr::Op { args, .. } => args.iter_mut().for_each(|a| go(a, out)),
            }
        }
        go(self, &mut out);
        out
    }

    /// Integer value semantics; `read` resolves each reference.
    pub fn eval_with(
        &self,
        read: &mut dyn FnMut(&VariableRef) -> Result<i64, String>,
    ) -> Result<i64, String> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Ref(r) => read(r),
            Expr::Op { op, args } => {
                let vals = args
                    .iter()
                    .map(|a| a.eval_with(read))
                    .collect::<Result<Vec<_>, _>>()?;
                match (op.as_str(), vals.as_slice()) {
                    (OP_ADD, [a, b]) => Ok(a.wrapping_add(*b)),
                    (OP_SUB, [a, b]) => Ok(a.wrapping_sub(*b)),
                    (OP_MUL, [a, b]) => Ok(a.wrapping_mul(*b)),
                    (OP_COPY, [a]) => Ok(*a),
                    ("max", [a, b]) => Ok(*a.max(b)),
                    ("min", [a, b]) => Ok(*a.min(b)),
                    (other, _) => Err(format!("no value semantics for operation `{other}`/{}", vals.len())),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub label: String,
    pub lhs: VariableRef,
    pub rhs: Expr,
    /// Condition space; empty means "always".
    pub condition: ConstraintSystem,
}

impl Statement {
    pub fn reads(&self) -> Vec<&VariableRef> {
        self.rhs.refs()
    }
}

/// Declared input or output, optionally with its index pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub dims: Option<Vec<usize>>,
}

/// A parsed piecewise regular algorithm over a box iteration space
/// `0 <= i_l < upper_l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub parameters: Vec<Parameter>,
    pub vars: Vec<String>,
    pub upper: Vec<Lin>,
    pub inputs: Vec<Declaration>,
    pub outputs: Vec<Declaration>,
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn iteration_space(&self) -> ConstraintSystem {
        let mut cs = ConstraintSystem::new(self.vars.clone());
        for (v, u) in self.vars.iter().zip(&self.upper) {
            cs.push(Constraint::ge(AffineExpr::var(v)));
            cs.push(Constraint::ge(
                AffineExpr::from_lin(u.clone() - Lin::constant(1)).minus(&AffineExpr::var(v)),
            ));
        }
        cs
    }

    pub fn is_input(&self, name: &str) -> bool {
        self.inputs.iter().any(|d| d.name == name)
    }

    pub fn is_output(&self, name: &str) -> bool {
        self.outputs.iter().any(|d| d.name == name)
    }

    pub fn role_of(&self, name: &str) -> Role {
        if self.is_input(name) {
            Role::Input
        } else if self.is_output(name) {
            Role::Output
        } else {
            Role::Internal
        }
    }

    pub fn statement(&self, label: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.label == label)
    }

    pub fn param_names(&self) -> Vec<String> {
        self.parameters.iter().map(|p| p.name.clone()).collect()
    }

    /// Concrete extents `upper_l` under `bindings`.
    pub fn extents(&self, bindings: &Bindings) -> Result<Vec<i64>, UnboundParam> {
        self.upper.iter().map(|u| u.eval(bindings)).collect()
    }
}
