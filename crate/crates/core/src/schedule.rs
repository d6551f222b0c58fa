//! Statement start offsets inside one iteration and the global latency of a
//! tiled execution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Poly;
use crate::polycount::PiecewisePolynomial;
use crate::pra::Rdg;
use crate::tiling::TilingSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("zero-dependence cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch { what: &'static str, got: usize, expected: usize },
    #[error("latency of `{0}` must be positive")]
    BadLatency(String),
    #[error("latency given for unknown statement `{0}`")]
    UnknownStatement(String),
    #[error("initiation interval must be positive")]
    BadInterval,
}

/// Linear schedule vectors, the initiation interval and statement latencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub lambda_j: Vec<Poly>,
    pub lambda_k: Vec<Poly>,
    pub pi: i64,
    /// Statement label to latency; missing labels default to 1.
    pub w: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationSchedule {
    pub tau: BTreeMap<String, i64>,
    pub lc: i64,
}

fn latency_of(w: &BTreeMap<String, i64>, label: &str) -> i64 {
    w.get(label).copied().unwrap_or(1)
}

/// Longest-path start offsets over the zero-dependence statement graph.
pub fn compute_iteration_schedule(rdg: &Rdg, w: &BTreeMap<String, i64>) -> Result<IterationSchedule, ScheduleError> {
    for (label, v) in w {
        if !rdg.labels.contains(label) {
            return Err(ScheduleError::UnknownStatement(label.clone()));
        }
        if *v <= 0 {
            return Err(ScheduleError::BadLatency(label.clone()));
        }
    }
    if let Some(cycle) = rdg.zero_dependence_cycle() {
        return Err(ScheduleError::Cycle(cycle.into_iter().map(|q| rdg.labels[q].clone()).collect()));
    }
    let order = rdg.zero_dependence_order().expect("acyclic");
    let succ = rdg.zero_dependence_successors();
    let mut tau = vec![0i64; succ.len()];
    for &u in &order {
        let finish = tau[u] + latency_of(w, &rdg.labels[u]);
        for &v in &succ[u] {
            tau[v] = tau[v].max(finish);
        }
    }
    let lc = (0..tau.len())
        .map(|q| tau[q] + latency_of(w, &rdg.labels[q]))
        .max()
        .unwrap_or(0);
    Ok(IterationSchedule {
        tau: rdg.labels.iter().cloned().zip(tau).collect(),
        lc,
    })
}

/// Global latency polynomial `lambda_J (p - 1) + lambda_K (t - 1) + L_c`.
pub fn global_latency(sched: &ScheduleSpec, tiling: &TilingSpec, lc: i64) -> Result<PiecewisePolynomial, ScheduleError> {
    let n = tiling.dim();
    for (what, got) in [("lambda_j", sched.lambda_j.len()), ("lambda_k", sched.lambda_k.len())] {
        if got != n {
            return Err(ScheduleError::DimensionMismatch { what, got, expected: n });
        }
    }
    if sched.pi <= 0 {
        return Err(ScheduleError::BadInterval);
    }
    let mut l = Poly::constant(lc);
    for d in 0..n {
        let pm1 = Poly::from(tiling.sizes[d].lin()) - Poly::constant(1);
        l = l + &sched.lambda_j[d] * &pm1;
        l = l + sched.lambda_k[d].scale(tiling.counts[d] - 1);
    }
    Ok(PiecewisePolynomial::from_poly(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::Bindings;
    use crate::pra::{build_rdg, parse_poly, parse_pra};
    use crate::tiling::TileSize;

    fn rdg_of(src: &str) -> Rdg {
        build_rdg(&parse_pra(src).unwrap())
    }

    fn b(pairs: &[(&str, i64)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn example_schedule() -> ScheduleSpec {
        ScheduleSpec {
            lambda_j: vec![parse_poly("1").unwrap(), parse_poly("p0").unwrap()],
            lambda_k: vec![parse_poly("p0").unwrap(), parse_poly("p0*(p1-1)+1").unwrap()],
            pi: 1,
            w: BTreeMap::new(),
        }
    }

    fn symbolic_tiling(t: [i64; 2]) -> TilingSpec {
        TilingSpec::new(vec![TileSize::Param("p0".into()), TileSize::Param("p1".into())], t.to_vec())
    }

    /// Longest path by enumerating every path from every statement.
    fn brute_lc(rdg: &Rdg) -> i64 {
        let succ = rdg.zero_dependence_successors();
        fn longest(u: usize, succ: &[Vec<usize>]) -> i64 {
            1 + succ[u].iter().map(|&v| longest(v, succ)).max().unwrap_or(0)
        }
        (0..succ.len()).map(|u| longest(u, &succ)).max().unwrap_or(0)
    }

    #[test]
    fn gesummv_iteration_latency() {
        let rdg = rdg_of(include_str!("../benchmarks/gesummv.pra"));
        let s = compute_iteration_schedule(&rdg, &BTreeMap::new()).unwrap();
        assert_eq!(s.lc, 4);
        assert_eq!(s.lc, brute_lc(&rdg));
        assert_eq!(s.tau["S1"], 0);
        assert_eq!(s.tau["S11"], 3);
    }

    #[test]
    fn gemm_iteration_latency() {
        let rdg = rdg_of(include_str!("../benchmarks/gemm.pra"));
        let s = compute_iteration_schedule(&rdg, &BTreeMap::new()).unwrap();
        assert_eq!(s.lc, 3);
        assert_eq!(s.lc, brute_lc(&rdg));
    }

    #[test]
    fn single_statement() {
        let rdg = rdg_of("params N;\nspace (i0): 0 <= i0 < N;\ninput a[i0];\noutput y[i0];\nS1: y[i0] = a[i0];\n");
        let s = compute_iteration_schedule(&rdg, &BTreeMap::new()).unwrap();
        assert_eq!(s.lc, 1);
        assert_eq!(s.tau["S1"], 0);
    }

    #[test]
    fn weighted_statement() {
        let rdg = rdg_of(include_str!("../benchmarks/gesummv.pra"));
        let w = BTreeMap::from([("S11".to_string(), 3)]);
        assert_eq!(compute_iteration_schedule(&rdg, &w).unwrap().lc, 6);
        let bad = BTreeMap::from([("S99".to_string(), 3)]);
        assert!(compute_iteration_schedule(&rdg, &bad).is_err());
    }

    #[test]
    fn example_latency() {
        let l = global_latency(&example_schedule(), &symbolic_tiling([2, 2]), 4).unwrap();
        assert_eq!(l.eval(&b(&[("p0", 2), ("p1", 3)])).unwrap(), 16);
        for p0 in 1..8 {
            for p1 in 1..8 {
                let expansion = (p0 * p1 - 1) + p0 + (p0 * (p1 - 1) + 1) + 4;
                assert_eq!(l.eval(&b(&[("p0", p0), ("p1", p1)])).unwrap(), expansion as i128);
            }
        }
    }

    #[test]
    fn unit_tiles_give_iteration_latency() {
        let l = global_latency(&example_schedule(), &symbolic_tiling([1, 1]), 4).unwrap();
        assert_eq!(l.eval(&b(&[("p0", 1), ("p1", 1)])).unwrap(), 4);
    }

    #[test]
    fn dimension_mismatch() {
        let mut s = example_schedule();
        s.lambda_k.pop();
        assert!(matches!(
            global_latency(&s, &symbolic_tiling([2, 2]), 4),
            Err(ScheduleError::DimensionMismatch { what: "lambda_k", .. })
        ));
    }
}
