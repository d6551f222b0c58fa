//! Reduced dependence graph: variable families and statement functions,
//! with one dependence-labeled edge per right-hand-side reference.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ast::{Program, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Output,
    Internal,
    Statement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RdgNode {
    pub name: String,
    pub kind: NodeKind,
}

/// A read of variable family `from` by the statement writing `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RdgEdge {
    pub from: usize,
    pub to: usize,
    pub dependence: Vec<i64>,
    /// Index of the reading statement in program order.
    pub statement: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rdg {
    pub nodes: Vec<RdgNode>,
    pub edges: Vec<RdgEdge>,
    /// Node id of each statement function, in program order.
    pub statement_nodes: Vec<usize>,
    /// Variable node written by each statement.
    pub writes: Vec<usize>,
    pub labels: Vec<String>,
}

impl Rdg {
    pub fn node(&self, name: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name && n.kind != NodeKind::Statement)
    }

    /// Incoming `(source family, dependence)` pairs of a variable family.
    pub fn predecessors(&self, var: &str) -> Vec<(&str, &[i64])> {
        let Some(id) = self.node(var) else {
            return Vec::new();
        };
        self.edges
            .iter()
            .filter(|e| e.to == id)
            .map(|e| (self.nodes[e.from].name.as_str(), e.dependence.as_slice()))
            .collect()
    }

    pub fn statement_count(&self) -> usize {
        self.statement_nodes.len()
    }

    /// Statement-level graph over zero-dependence reads: `q' -> q` when `q`
    /// reads, at distance zero, a family that `q'` writes.
    pub fn zero_dependence_successors(&self) -> Vec<Vec<usize>> {
        let n = self.statement_count();
        let mut writers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (q, v) in self.writes.iter().enumerate() {
            writers.entry(*v).or_default().push(q);
        }
        let mut succ = vec![Vec::new(); n];
        for e in &self.edges {
            if e.dependence.iter().any(|d| *d != 0) {
                continue;
            }
            for &w in writers.get(&e.from).into_iter().flatten() {
                if !succ[w].contains(&e.statement) {
                    succ[w].push(e.statement);
                }
            }
        }
        succ
    }

    /// A cycle in the zero-dependence statement graph, as statement indices.
    pub fn zero_dependence_cycle(&self) -> Option<Vec<usize>> {
        let succ = self.zero_dependence_successors();
        let n = succ.len();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(
            u: usize,
            succ: &[Vec<usize>],
            state: &mut [u8],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            state[u] = 1;
            stack.push(u);
            for &v in &succ[u] {
                if state[v] == 1 {
                    let start = stack.iter().position(|x| *x == v).unwrap();
                    return Some(stack[start..].to_vec());
                }
                if state[v] == 0 {
                    if let Some(c) = dfs(v, succ, state, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            state[u] = 2;
            None
        }
        for s in 0..n {
            if state[s] == 0 {
                if let Some(c) = dfs(s, &succ, &mut state, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Topological order of the zero-dependence statement graph.
    pub fn zero_dependence_order(&self) -> Option<Vec<usize>> {
        let succ = self.zero_dependence_successors();
        let n = succ.len();
        let mut indeg = vec![0usize; n];
        for vs in &succ {
            for &v in vs {
                indeg[v] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&q| indeg[q] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop() {
            order.push(u);
            for &v in succ[u].iter().rev() {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Number of edges on the longest zero-dependence statement chain.
    pub fn longest_zero_chain(&self) -> Option<usize> {
        let order = self.zero_dependence_order()?;
        let succ = self.zero_dependence_successors();
        let mut depth = vec![0usize; succ.len()];
        for &u in &order {
            for &v in &succ[u] {
                depth[v] = depth[v].max(depth[u] + 1);
            }
        }
        Some(depth.into_iter().max().unwrap_or(0))
    }
}

/// Builds the RDG of a validated program.
pub fn build_rdg(program: &Program) -> Rdg {
    let mut nodes = Vec::new();
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut family = |name: &str, role: Role, nodes: &mut Vec<RdgNode>| -> usize {
        *ids.entry(name.to_string()).or_insert_with(|| {
            nodes.push(RdgNode {
                name: name.to_string(),
                kind: match role {
                    Role::Input => NodeKind::Input,
                    Role::Output => NodeKind::Output,
                    Role::Internal => NodeKind::Internal,
                },
            });
            nodes.len() - 1
        })
    };
    for d in &program.inputs {
        family(&d.name, Role::Input, &mut nodes);
    }
    let mut writes = Vec::new();
    let mut pending = Vec::new();
    for (q, s) in program.statements.iter().enumerate() {
        let to = family(&s.lhs.name, program.role_of(&s.lhs.name), &mut nodes);
        writes.push(to);
        for r in s.reads() {
            let from = family(&r.name, program.role_of(&r.name), &mut nodes);
            pending.push(RdgEdge {
                from,
                to,
                dependence: r.dependence.clone(),
                statement: q,
            });
        }
    }
    for d in &program.outputs {
        family(&d.name, Role::Output, &mut nodes);
    }
    let mut statement_nodes = Vec::new();
    for s in &program.statements {
        nodes.push(RdgNode {
            name: s.label.clone(),
            kind: NodeKind::Statement,
        });
        statement_nodes.push(nodes.len() - 1);
    }
    Rdg {
        nodes,
        edges: pending,
        statement_nodes,
        writes,
        labels: program.statements.iter().map(|s| s.label.clone()).collect(),
    }
}
