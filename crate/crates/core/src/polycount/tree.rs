//! Decision trees over affine parameter atoms `a >= 0`.
//!
//! Every internal node splits parameter space by one atom; traversals carry
//! the constraints of the current path and skip branches the path makes
//! infeasible, so leaves only exist for reachable regions.

use crate::linear::{feasible, Bindings, Lin, Normalized, ParamConstraint, Rel, UnboundParam};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree<T> {
    Leaf(T),
    Split {
        /// The node tests `atom >= 0`.
        atom: Lin,
        yes: Box<Tree<T>>,
        no: Box<Tree<T>>,
    },
}

/// Constraints of the current path.
pub type Ctx = Vec<ParamConstraint>;

pub fn ge(atom: Lin) -> ParamConstraint {
    ParamConstraint::ge(atom)
}

/// Integer complement of `atom >= 0`.
pub fn not_ge(atom: &Lin) -> ParamConstraint {
    ParamConstraint::ge(-atom.clone() - Lin::constant(1))
}

/// Truth value of `atom >= 0` if `ctx` decides it.
pub fn decide(ctx: &[ParamConstraint], atom: &Lin) -> Option<bool> {
    match ge(atom.clone()).normalize() {
        Normalized::True => return Some(true),
        Normalized::False => return Some(false),
        Normalized::Constraint(_) => {}
    }
    let mut probe = ctx.to_vec();
    probe.push(not_ge(atom));
    if !feasible(&probe) {
        return Some(true);
    }
    probe.pop();
    probe.push(ge(atom.clone()));
    if !feasible(&probe) {
        return Some(false);
    }
    None
}

/// Canonical atom for a `>=` constraint (gcd-reduced).
fn canonical(atom: Lin) -> Lin {
    match ge(atom.clone()).normalize() {
        Normalized::Constraint(c) => c.lin,
        _ => atom,
    }
}

impl<T: Clone + PartialEq> Tree<T> {
    pub fn leaf(x: T) -> Self {
        Tree::Leaf(x)
    }

    /// `yes` where `atom >= 0`, `no` elsewhere, simplified under `ctx`.
    pub fn split(ctx: &mut Ctx, atom: Lin, yes: Tree<T>, no: Tree<T>) -> Tree<T> {
        let atom = canonical(atom);
        match decide(ctx, &atom) {
            Some(true) => return yes.pruned(ctx),
            Some(false) => return no.pruned(ctx),
            None => {}
        }
        ctx.push(ge(atom.clone()));
        let y = yes.pruned(ctx);
        ctx.pop();
        ctx.push(not_ge(&atom));
        let n = no.pruned(ctx);
        ctx.pop();
        Self::node(atom, y, n)
    }

    fn node(atom: Lin, yes: Tree<T>, no: Tree<T>) -> Tree<T> {
        if yes == no {
            yes
        } else {
            Tree::Split {
                atom,
                yes: Box::new(yes),
                no: Box::new(no),
            }
        }
    }

    /// Substitutes every leaf `x` by `f(x)`, removing branches `ctx` rules
    /// out. `f` sees the path constraints so nested trees prune as well.
    pub fn bind<U: Clone + PartialEq>(
        &self,
        ctx: &mut Ctx,
        f: &mut dyn FnMut(&T, &mut Ctx) -> Tree<U>,
    ) -> Tree<U> {
        match self {
            Tree::Leaf(x) => f(x, ctx),
            Tree::Split { atom, yes, no } => match decide(ctx, atom) {
                Some(true) => yes.bind(ctx, f),
                Some(false) => no.bind(ctx, f),
                None => {
                    ctx.push(ge(atom.clone()));
                    let y = yes.bind(ctx, f);
                    ctx.pop();
                    ctx.push(not_ge(atom));
                    let n = no.bind(ctx, f);
                    ctx.pop();
                    Tree::node(atom.clone(), y, n)
                }
            },
        }
    }

    pub fn pruned(&self, ctx: &mut Ctx) -> Tree<T> {
        self.bind(ctx, &mut |x, _| Tree::Leaf(x.clone()))
    }

    pub fn map<U: Clone + PartialEq>(&self, f: &mut dyn FnMut(&T) -> U) -> Tree<U> {
        match self {
            Tree::Leaf(x) => Tree::Leaf(f(x)),
            Tree::Split { atom, yes, no } => Tree::node(atom.clone(), yes.map(f), no.map(f)),
        }
    }

    /// Pointwise combination of two trees.
    pub fn apply2<U: Clone + PartialEq, V: Clone + PartialEq>(
        &self,
        other: &Tree<U>,
        ctx: &mut Ctx,
        f: &mut dyn FnMut(&T, &U) -> V,
    ) -> Tree<V> {
        self.bind(ctx, &mut |x, ctx| other.bind(ctx, &mut |y, _| Tree::Leaf(f(x, y))))
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<&T, UnboundParam> {
        match self {
            Tree::Leaf(x) => Ok(x),
            Tree::Split { atom, yes, no } => {
                if atom.eval(bindings)? >= 0 {
                    yes.eval(bindings)
                } else {
                    no.eval(bindings)
                }
            }
        }
    }

    /// Root-to-leaf paths as `(constraints, leaf)`.
    pub fn paths(&self) -> Vec<(Vec<ParamConstraint>, &T)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_paths(&mut path, &mut out);
        out
    }

    fn collect_paths<'a>(&'a self, path: &mut Vec<ParamConstraint>, out: &mut Vec<(Vec<ParamConstraint>, &'a T)>) {
        match self {
            Tree::Leaf(x) => out.push((path.clone(), x)),
            Tree::Split { atom, yes, no } => {
                path.push(ge(atom.clone()));
                yes.collect_paths(path, out);
                path.pop();
                path.push(not_ge(atom));
                no.collect_paths(path, out);
                path.pop();
            }
        }
    }

    /// Parameters tested by any atom.
    pub fn atom_params(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_atom_params(&mut out);
        out.into_iter().collect()
    }

    fn collect_atom_params(&self, out: &mut std::collections::BTreeSet<String>) {
        if let Tree::Split { atom, yes, no } = self {
            out.extend(atom.params().map(str::to_string));
            yes.collect_atom_params(out);
            no.collect_atom_params(out);
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Split { yes, no, .. } => yes.leaf_count() + no.leaf_count(),
        }
    }
}

/// Tree that is `inside` on the conjunction `guard` and `outside` elsewhere.
pub fn guard_tree<T: Clone + PartialEq>(ctx: &mut Ctx, guard: &[ParamConstraint], inside: T, outside: T) -> Tree<T> {
    fn go<T: Clone + PartialEq>(ctx: &mut Ctx, atoms: &[Lin], inside: &T, outside: &T) -> Tree<T> {
        match atoms.split_first() {
            None => Tree::Leaf(inside.clone()),
            Some((a, rest)) => {
                let a = canonical(a.clone());
                match decide(ctx, &a) {
                    Some(true) => go(ctx, rest, inside, outside),
                    Some(false) => Tree::Leaf(outside.clone()),
                    None => {
                        ctx.push(ge(a.clone()));
                        let y = go(ctx, rest, inside, outside);
                        ctx.pop();
                        Tree::node(a, y, Tree::Leaf(outside.clone()))
                    }
                }
            }
        }
    }
    let mut atoms = Vec::new();
    for c in guard {
        atoms.push(c.lin.clone());
        if c.rel == Rel::Eq {
            atoms.push(-c.lin.clone());
        }
    }
    go(ctx, &atoms, &inside, &outside)
}
