//! Lexer and recursive-descent parser for the PRA text format.
//!
//! ```text
//! params N0 N1;
//! space (i0, i1): 0 <= i0 < N0, 0 <= i1 < N1;
//! input X[i1];
//! output Y[i0];
//! S1: x[i0,i1] = X[i1] if i0 == 0;
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;
use crate::linear::Lin;
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, col: usize, name: String },
    #[error("{line}:{col}: non-constant dependence vector in index `{index}` (expected i - d with constant d)")]
    NonConstantDependence { line: usize, col: usize, index: String },
    #[error("{line}:{col}: dimension mismatch: {detail}")]
    DimensionMismatch { line: usize, col: usize, detail: String },
    #[error("{line}:{col}: non-affine expression")]
    NonAffine { line: usize, col: usize },
    #[error("{line}:{col}: iteration space must be a box 0 <= i < N: {detail}")]
    NotABox { line: usize, col: usize, detail: String },
    #[error("empty statement list")]
    EmptyStatementList,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "==", "<=", ">=", "&&", "<", ">", "=", ";", ":", ",", "(", ")", "[", "]", "+", "-", "*", "^",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let v = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                line,
                col,
                expected: "integer literal".into(),
                found: text.clone(),
            })?;
            out.push(Token { tok: Tok::Int(v), line, col: start_col });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            out.push(Token { tok: Tok::Ident(text), line, col: start_col });
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(ParseError::Syntax {
                line,
                col,
                expected: "token".into(),
                found: format!("`{c}`"),
            });
        };
        out.push(Token { tok: Tok::Sym(sym), line, col: start_col });
        i += sym.len();
        col += sym.len();
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// Identifier scope used to split linear forms into variables and parameters.
struct Scope {
    vars: Vec<String>,
    params: BTreeSet<String>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.err(&format!("`{sym}`")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err("identifier")),
        }
    }

    // ---- linear forms over identifiers -------------------------------

    fn linear(&mut self) -> Result<Lin, ParseError> {
        let mut acc = self.linear_term()?;
        loop {
            if self.eat("+") {
                acc = acc + self.linear_term()?;
            } else if self.eat("-") {
                acc = acc - self.linear_term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn linear_term(&mut self) -> Result<Lin, ParseError> {
        let mut acc = self.linear_factor()?;
        while self.eat("*") {
            let (line, col) = self.here();
            let rhs = self.linear_factor()?;
            acc = match (acc.as_constant(), rhs.as_constant()) {
                (Some(a), _) => rhs * a,
                (_, Some(b)) => acc * b,
                _ => return Err(ParseError::NonAffine { line, col }),
            };
        }
        Ok(acc)
    }

    fn linear_factor(&mut self) -> Result<Lin, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Lin::constant(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Lin::param(s))
            }
            Tok::Sym("-") => {
                self.bump();
                Ok(-self.linear_factor()?)
            }
            Tok::Sym("(") => {
                self.bump();
                let l = self.linear()?;
                self.expect(")")?;
                Ok(l)
            }
            _ => Err(self.err("affine expression")),
        }
    }

    /// Affine form split by scope into variables and parameters.
    fn affine(&mut self, scope: &Scope) -> Result<AffineExpr, ParseError> {
        let (line, col) = self.here();
        let lin = self.linear()?;
        split(&lin, scope, line, col)
    }

    /// `a op b (op c)*`, each link normalized to `>= 0` / `== 0`.
    fn comparison_chain(&mut self, scope: &Scope) -> Result<Vec<Constraint>, ParseError> {
        let mut lhs = self.affine(scope)?;
        let mut out = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::Sym(s @ ("==" | "<" | "<=" | ">" | ">=")) => *s,
                _ => break,
            };
            self.bump();
            let rhs = self.affine(scope)?;
            out.push(compare(&lhs, op, &rhs).normalized());
            lhs = rhs;
        }
        if out.is_empty() {
            return Err(self.err("comparison operator"));
        }
        Ok(out)
    }

    // ---- program --------------------------------------------------------

    fn program(&mut self) -> Result<Program, ParseError> {
        if !self.is_keyword("params") {
            return Err(self.err("`params`"));
        }
        self.bump();
        let mut params = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            params.push(self.ident()?);
        }
        self.expect(";")?;

        if !self.is_keyword("space") {
            return Err(self.err("`space`"));
        }
        self.bump();
        self.expect("(")?;
        let mut vars = vec![self.ident()?];
        while self.eat(",") {
            vars.push(self.ident()?);
        }
        self.expect(")")?;
        self.expect(":")?;
        let scope = Scope {
            vars: vars.clone(),
            params: params.iter().cloned().collect(),
        };
        let (bl, bc) = self.here();
        let mut bounds = self.comparison_chain(&scope)?;
        while self.eat(",") {
            bounds.extend(self.comparison_chain(&scope)?);
        }
        self.expect(";")?;
        let upper = box_bounds(&vars, &bounds).map_err(|detail| ParseError::NotABox {
            line: bl,
            col: bc,
            detail,
        })?;

        let mut program = Program {
            parameters: params
                .iter()
                .map(|p| Parameter {
                    name: p.clone(),
                    kind: ParamKind::LoopBound,
                })
                .collect(),
            vars: vars.clone(),
            upper,
            inputs: Vec::new(),
            outputs: Vec::new(),
            statements: Vec::new(),
        };
        // Index pattern per variable name, for arity consistency.
        let mut patterns: BTreeMap<String, (Vec<usize>, usize, usize)> = BTreeMap::new();

        while *self.peek() != Tok::Eof {
            if self.is_keyword("input") || self.is_keyword("output") {
                let is_input = self.is_keyword("input");
                self.bump();
                loop {
                    let (line, col) = self.here();
                    let name = self.ident()?;
                    let dims = if matches!(self.peek(), Tok::Sym("[")) {
                        let idx = self.index(&scope)?;
                        if idx.iter().any(|t| t.offset != 0) {
                            return Err(ParseError::Syntax {
                                line,
                                col,
                                expected: "plain iteration variables in declaration".into(),
                                found: format!("`{name}[...]` with offsets"),
                            });
                        }
                        let dims: Vec<usize> = idx.iter().map(|t| t.dim).collect();
                        check_pattern(&mut patterns, &name, &dims, line, col)?;
                        Some(dims)
                    } else {
                        None
                    };
                    let decl = Declaration { name, dims };
                    if is_input {
                        program.inputs.push(decl);
                    } else {
                        program.outputs.push(decl);
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")?;
                continue;
            }
            let stmt = self.statement(&scope, &mut patterns)?;
            program.statements.push(stmt);
        }

        if program.statements.is_empty() {
            return Err(ParseError::EmptyStatementList);
        }
        for s in &mut program.statements {
            let role = program_role(&program.inputs, &program.outputs, &s.lhs.name);
            s.lhs.role = role;
            for r in s.rhs.refs_mut() {
                r.role = program_role(&program.inputs, &program.outputs, &r.name);
            }
        }
        Ok(program)
    }

    fn index(&mut self, scope: &Scope) -> Result<Vec<IndexTerm>, ParseError> {
        self.expect("[")?;
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        loop {
            let (line, col) = self.here();
            let start = self.pos;
            let lin = self.linear()?;
            let text = self.toks[start..self.pos]
                .iter()
                .map(|t| match &t.tok {
                    Tok::Ident(s) => s.clone(),
                    Tok::Int(i) => i.to_string(),
                    Tok::Sym(s) => s.to_string(),
                    Tok::Eof => String::new(),
                })
                .collect::<String>();
            let e = split(&lin, scope, line, col)?;
            let bad = || ParseError::NonConstantDependence {
                line,
                col,
                index: text.clone(),
            };
            if e.vars.len() != 1 || !e.rest.is_constant() {
                return Err(bad());
            }
            let (v, c) = e.vars.iter().next().unwrap();
            if c.as_constant() != Some(1) {
                return Err(bad());
            }
            let dim = scope.vars.iter().position(|x| x == v).unwrap();
            if !seen.insert(dim) {
                return Err(ParseError::DimensionMismatch {
                    line,
                    col,
                    detail: format!("dimension `{v}` indexed twice"),
                });
            }
            out.push(IndexTerm {
                dim,
                offset: e.rest.constant,
            });
            if !self.eat(",") {
                break;
            }
        }
        self.expect("]")?;
        Ok(out)
    }

    fn var_ref(
        &mut self,
        scope: &Scope,
        patterns: &mut BTreeMap<String, (Vec<usize>, usize, usize)>,
    ) -> Result<VariableRef, ParseError> {
        let (line, col) = self.here();
        let name = self.ident()?;
        if scope.params.contains(&name) || scope.vars.contains(&name) {
            return Err(ParseError::Syntax {
                line,
                col,
                expected: "variable name".into(),
                found: format!("`{name}` (a parameter or iteration variable)"),
            });
        }
        let index = self.index(scope)?;
        if index.len() > scope.vars.len() {
            return Err(ParseError::DimensionMismatch {
                line,
                col,
                detail: format!(
                    "`{name}` has {} indices in a {}-dimensional space",
                    index.len(),
                    scope.vars.len()
                ),
            });
        }
        let dims: Vec<usize> = index.iter().map(|t| t.dim).collect();
        check_pattern(patterns, &name, &dims, line, col)?;
        Ok(VariableRef::new(&name, index, scope.vars.len(), Role::Internal))
    }

    fn statement(
        &mut self,
        scope: &Scope,
        patterns: &mut BTreeMap<String, (Vec<usize>, usize, usize)>,
    ) -> Result<Statement, ParseError> {
        let label = self.ident()?;
        self.expect(":")?;
        let lhs = self.var_ref(scope, patterns)?;
        self.expect("=")?;
        let mut rhs = self.expr(scope, patterns)?;
        if matches!(rhs, Expr::Ref(_) | Expr::Const(_)) {
            rhs = Expr::op(OP_COPY, vec![rhs]);
        }
        let mut condition = ConstraintSystem::new(scope.vars.clone());
        if self.is_keyword("if") {
            self.bump();
            condition.extend(self.comparison_chain(scope)?);
            while self.eat("&&") {
                condition.extend(self.comparison_chain(scope)?);
            }
        }
        self.expect(";")?;
        Ok(Statement {
            label,
            lhs,
            rhs,
            condition,
        })
    }

    fn expr(
        &mut self,
        scope: &Scope,
        patterns: &mut BTreeMap<String, (Vec<usize>, usize, usize)>,
    ) -> Result<Expr, ParseError> {
        let mut acc = self.term(scope, patterns)?;
        loop {
            let op = if self.eat("+") {
                OP_ADD
            } else if self.eat("-") {
                OP_SUB
            } else {
                return Ok(acc);
            };
            let rhs = self.term(scope, patterns)?;
            acc = Expr::op(op, vec![acc, rhs]);
        }
    }

    fn term(
        &mut self,
        scope: &Scope,
        patterns: &mut BTreeMap<String, (Vec<usize>, usize, usize)>,
    ) -> Result<Expr, ParseError> {
        let mut acc = self.factor(scope, patterns)?;
        while self.eat("*") {
            let rhs = self.factor(scope, patterns)?;
            acc = Expr::op(OP_MUL, vec![acc, rhs]);
        }
        Ok(acc)
    }

    fn factor(
        &mut self,
        scope: &Scope,
        patterns: &mut BTreeMap<String, (Vec<usize>, usize, usize)>,
    ) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(v) = self.bump() else { unreachable!() };
                Ok(Expr::Const(-v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr(scope, patterns)?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) if matches!(self.peek_at(1), Tok::Sym("(")) => {
                let (line, col) = self.here();
                self.bump();
                self.bump();
                let mut args = vec![self.expr(scope, patterns)?];
                while self.eat(",") {
                    args.push(self.expr(scope, patterns)?);
                }
                self.expect(")")?;
                if name == OP_COPY && args.len() != 1 {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        expected: "exactly one argument to `copy`".into(),
                        found: format!("{} arguments", args.len()),
                    });
                }
                Ok(Expr::Op { op: name, args })
            }
            Tok::Ident(_) => Ok(Expr::Ref(self.var_ref(scope, patterns)?)),
            _ => Err(self.err("expression")),
        }
    }

    // ---- polynomials ------------------------------------------------------

    fn poly(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.poly_term()?;
        loop {
            if self.eat("+") {
                acc = &acc + &self.poly_term()?;
            } else if self.eat("-") {
                acc = &acc - &self.poly_term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn poly_term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.poly_factor()?;
        while self.eat("*") {
            acc = &acc * &self.poly_factor()?;
        }
        Ok(acc)
    }

    fn poly_factor(&mut self) -> Result<Poly, ParseError> {
        if self.eat("-") {
            return Ok(-self.poly_factor()?);
        }
        let base = self.poly_atom()?;
        if !self.eat("^") {
            return Ok(base);
        }
        let e = match self.peek().clone() {
            Tok::Int(e) if (0..=64).contains(&e) => e,
            _ => return Err(self.err("integer exponent in 0..=64")),
        };
        self.bump();
        let mut out = Poly::constant(1);
        for _ in 0..e {
            out = &out * &base;
        }
        Ok(out)
    }

    fn poly_atom(&mut self) -> Result<Poly, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Poly::constant(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Poly::var(&s))
            }
            Tok::Sym("(") => {
                self.bump();
                let p = self.poly()?;
                self.expect(")")?;
                Ok(p)
            }
            _ => Err(self.err("polynomial expression")),
        }
    }
}

fn program_role(inputs: &[Declaration], outputs: &[Declaration], name: &str) -> Role {
    if inputs.iter().any(|d| d.name == name) {
        Role::Input
    } else if outputs.iter().any(|d| d.name == name) {
        Role::Output
    } else {
        Role::Internal
    }
}

fn check_pattern(
    patterns: &mut BTreeMap<String, (Vec<usize>, usize, usize)>,
    name: &str,
    dims: &[usize],
    line: usize,
    col: usize,
) -> Result<(), ParseError> {
    match patterns.get(name) {
        Some((prev, pl, pc)) if prev.as_slice() != dims => Err(ParseError::DimensionMismatch {
            line,
            col,
            detail: format!("`{name}` indexed as {dims:?} here but {prev:?} at {pl}:{pc}"),
        }),
        Some(_) => Ok(()),
        None => {
            patterns.insert(name.to_string(), (dims.to_vec(), line, col));
            Ok(())
        }
    }
}

fn split(lin: &Lin, scope: &Scope, line: usize, col: usize) -> Result<AffineExpr, ParseError> {
    let mut e = AffineExpr::from_lin(Lin::constant(lin.constant));
    for (name, c) in &lin.coeffs {
        if scope.vars.contains(name) {
            e.add_var(name, Lin::constant(*c));
        } else if scope.params.contains(name) {
            e.rest.add_term(name, *c);
        } else {
            return Err(ParseError::UnknownIdentifier {
                line,
                col,
                name: name.clone(),
            });
        }
    }
    Ok(e)
}

fn compare(lhs: &AffineExpr, op: &str, rhs: &AffineExpr) -> Constraint {
    let one = AffineExpr::from_lin(Lin::constant(1));
    match op {
        "==" => Constraint::eq(lhs.clone().minus(rhs)),
        ">=" => Constraint::ge(lhs.clone().minus(rhs)),
        "<=" => Constraint::ge(rhs.clone().minus(lhs)),
        ">" => Constraint::ge(lhs.clone().minus(rhs).minus(&one)),
        "<" => Constraint::ge(rhs.clone().minus(lhs).minus(&one)),
        _ => unreachable!("comparison operator"),
    }
}

/// Extracts `upper_l` from constraints that must form `0 <= i_l < upper_l`.
fn box_bounds(vars: &[String], bounds: &[Constraint]) -> Result<Vec<crate::linear::Lin>, String> {
    let mut lower_seen = vec![false; vars.len()];
    let mut upper: Vec<Option<Lin>> = vec![None; vars.len()];
    for c in bounds {
        if c.rel != crate::linear::Rel::Ge || c.expr.vars.len() != 1 {
            return Err(format!("unsupported bound `{c}`"));
        }
        let (v, k) = c.expr.vars.iter().next().unwrap();
        let l = vars.iter().position(|x| x == v).unwrap();
        match k.as_constant() {
            Some(1) if c.expr.rest.is_zero() => {
                if lower_seen[l] {
                    return Err(format!("duplicate lower bound for `{v}`"));
                }
                lower_seen[l] = true;
            }
            Some(1) => return Err(format!("lower bound of `{v}` must be 0")),
            Some(-1) => {
                if upper[l].is_some() {
                    return Err(format!("duplicate upper bound for `{v}`"));
                }
                upper[l] = Some(c.expr.rest.clone() + Lin::constant(1));
            }
            _ => return Err(format!("unsupported bound `{c}`")),
        }
    }
    vars.iter()
        .enumerate()
        .map(|(l, v)| {
            if !lower_seen[l] {
                return Err(format!("missing lower bound 0 <= {v}"));
            }
            upper[l].clone().ok_or_else(|| format!("missing upper bound for `{v}`"))
        })
        .collect()
}

/// Parses PRA source text.
pub fn parse_pra(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.program()
}

/// Parses a polynomial in named parameters, e.g. `p0*(p1-1)+1`.
pub fn parse_poly(src: &str) -> Result<Poly, ParseError> {
    let mut p = Parser::new(src)?;
    let out = p.poly()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("end of expression"));
    }
    Ok(out)
}

/// Parses an affine form in named parameters, e.g. `2*N0 - p0 + 1`.
pub fn parse_lin(src: &str) -> Result<Lin, ParseError> {
    let mut p = Parser::new(src)?;
    let out = p.linear()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("end of expression"));
    }
    Ok(out)
}

/// Parses a parameter constraint such as `p1 >= 2` or `2*p0 < N0`.
pub fn parse_param_constraint(src: &str) -> Result<Vec<crate::linear::ParamConstraint>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut lhs = p.linear()?;
    let mut out = Vec::new();
    loop {
        let op = match p.peek() {
            Tok::Sym(s @ ("==" | "<" | "<=" | ">" | ">=")) => *s,
            _ => break,
        };
        p.bump();
        let rhs = p.linear()?;
        use crate::linear::ParamConstraint as PC;
        out.push(match op {
            "==" => PC::eq(lhs.clone() - rhs.clone()),
            ">=" => PC::ge(lhs.clone() - rhs.clone()),
            "<=" => PC::ge(rhs.clone() - lhs.clone()),
            ">" => PC::ge(lhs.clone() - rhs.clone() - Lin::constant(1)),
            _ => PC::ge(rhs.clone() - lhs.clone() - Lin::constant(1)),
        });
        lhs = rhs;
    }
    if out.is_empty() {
        return Err(p.err("comparison operator"));
    }
    if *p.peek() != Tok::Eof {
        return Err(p.err("end of constraint"));
    }
    Ok(out)
}
