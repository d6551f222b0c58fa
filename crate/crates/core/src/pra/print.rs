//! Renders a [`Program`] back to PRA source. `parse_pra(&p.to_string())`
//! reproduces `p`.

use std::fmt;

use super::ast::*;
use crate::linear::Rel;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Op { op, args } if args.len() == 2 && (op == OP_ADD || op == OP_SUB) => 1,
        Expr::Op { op, args } if args.len() == 2 && op == OP_MUL => 2,
        _ => 3,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, vars: &[String]) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Ref(r) => f.write_str(&r.render(vars)),
        Expr::Op { op, args } if precedence(e) < 3 => {
            let sym = match op.as_str() {
                OP_ADD => "+",
                OP_SUB => "-",
                _ => "*",
            };
            let p = precedence(e);
            let (l, r) = (&args[0], &args[1]);
            if precedence(l) < p {
                f.write_str("(")?;
                write_expr(f, l, vars)?;
                f.write_str(")")?;
            } else {
                write_expr(f, l, vars)?;
            }
            write!(f, " {sym} ")?;
            if precedence(r) <= p {
                f.write_str("(")?;
                write_expr(f, r, vars)?;
                f.write_str(")")
            } else {
                write_expr(f, r, vars)
            }
        }
        Expr::Op { op, args } => {
            write!(f, "{op}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a, vars)?;
            }
            f.write_str(")")
        }
    }
}

fn write_decl(f: &mut fmt::Formatter<'_>, d: &Declaration, vars: &[String]) -> fmt::Result {
    f.write_str(&d.name)?;
    if let Some(dims) = &d.dims {
        let names: Vec<&str> = dims.iter().map(|l| vars[*l].as_str()).collect();
        write!(f, "[{}]", names.join(","))?;
    }
    Ok(())
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("params")?;
        for p in &self.parameters {
            write!(f, " {}", p.name)?;
        }
        writeln!(f, ";")?;
        write!(f, "space ({}): ", self.vars.join(", "))?;
        for (l, (v, u)) in self.vars.iter().zip(&self.upper).enumerate() {
            if l > 0 {
                f.write_str(", ")?;
            }
            write!(f, "0 <= {v} < {u}")?;
        }
        writeln!(f, ";")?;
        for (kw, decls) in [("input", &self.inputs), ("output", &self.outputs)] {
            if decls.is_empty() {
                continue;
            }
            write!(f, "{kw} ")?;
            for (i, d) in decls.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_decl(f, d, &self.vars)?;
            }
            writeln!(f, ";")?;
        }
        for s in &self.statements {
            write!(f, "{}: {} = ", s.label, s.lhs.render(&self.vars))?;
            match &s.rhs {
                Expr::Op { op, args }
                    if op == OP_COPY
                        && args.len() == 1
                        && matches!(args[0], Expr::Ref(_) | Expr::Const(_)) =>
                {
                    write_expr(f, &args[0], &self.vars)?
                }
                other => write_expr(f, other, &self.vars)?,
            }
            if !s.condition.is_empty() {
                f.write_str(" if ")?;
                for (i, c) in s.condition.constraints.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" && ")?;
                    }
                    let rel = match c.rel {
                        Rel::Ge => ">=",
                        Rel::Eq => "==",
                    };
                    write!(f, "{} {rel} 0", c.expr)?;
                }
            }
            writeln!(f, ";")?;
        }
        Ok(())
    }
}
