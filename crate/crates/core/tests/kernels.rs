//! Every benchmark kernel computes what its header comment says, checked
//! against a direct evaluation of the same formula.

mod common;

use std::collections::BTreeMap;

use common::{b, program_text};
use pra_energy::pra::parse_pra;
use pra_energy::sim::{execute, Values};

/// Small deterministic input values in [-5, 5].
fn input(name: &str, idx: &[i64]) -> i64 {
    let mut h: i64 = name.bytes().map(|c| c as i64).sum();
    for (l, v) in idx.iter().enumerate() {
        h = h * 31 + (l as i64 + 3) * v;
    }
    h.rem_euclid(11) - 5
}

fn run(kernel: &str, n: &[i64]) -> Values {
    let program = parse_pra(&program_text(kernel)).unwrap();
    let names: Vec<String> = (0..n.len()).map(|l| format!("N{l}")).collect();
    let pairs: Vec<(&str, i64)> = names.iter().map(String::as_str).zip(n.iter().copied()).collect();
    execute(&program, &b(&pairs), &input).unwrap()
}

fn vector(values: &Values, name: &str) -> BTreeMap<Vec<i64>, i64> {
    values[name].clone()
}

#[test]
fn gesummv_sums_two_products() {
    let (n0, n1) = (5, 7);
    let out = run("gesummv", &[n0, n1]);
    for i in 0..n0 {
        let direct: i64 = (0..n1).map(|j| (input("A", &[i, j]) + input("B", &[i, j])) * input("X", &[j])).sum();
        assert_eq!(out["Y"][&vec![i]], direct, "Y[{i}]");
    }
    assert_eq!(out["Y"].len(), n0 as usize);
}

#[test]
fn gemm_matches_direct_product() {
    let (n0, n1, n2) = (4, 5, 6);
    let out = run("gemm", &[n0, n1, n2]);
    for i in 0..n0 {
        for j in 0..n1 {
            let direct: i64 = (0..n2).map(|k| input("A", &[i, k]) * input("B", &[k, j])).sum();
            assert_eq!(out["C"][&vec![i, j]], direct, "C[{i},{j}]");
        }
    }
    assert_eq!(out["C"].len(), (n0 * n1) as usize);
}

#[test]
fn gemm_with_unit_reduction() {
    let out = run("gemm", &[3, 2, 1]);
    for i in 0..3 {
        for j in 0..2 {
            assert_eq!(out["C"][&vec![i, j]], input("A", &[i, 0]) * input("B", &[0, j]));
        }
    }
}

#[test]
fn bicg_computes_both_products() {
    let (n0, n1) = (6, 4);
    let out = run("bicg", &[n0, n1]);
    for j in 0..n1 {
        let s: i64 = (0..n0).map(|i| input("R", &[i]) * input("A", &[i, j])).sum();
        assert_eq!(out["S"][&vec![j]], s);
    }
    for i in 0..n0 {
        let q: i64 = (0..n1).map(|j| input("A", &[i, j]) * input("P", &[j])).sum();
        assert_eq!(out["Q"][&vec![i]], q);
    }
}

#[test]
fn gemver_rank_two_update() {
    let (n0, n1) = (5, 6);
    let out = run("gemver", &[n0, n1]);
    for i in 0..n0 {
        for j in 0..n1 {
            let direct = input("A", &[i, j])
                + input("U1", &[i]) * input("V1", &[j])
                + input("U2", &[i]) * input("V2", &[j]);
            assert_eq!(out["AH"][&vec![i, j]], direct);
        }
    }
}

#[test]
fn mvt_both_directions() {
    let (n0, n1) = (4, 7);
    let out = run("mvt", &[n0, n1]);
    for i in 0..n0 {
        let x1: i64 = (0..n1).map(|j| input("A", &[i, j]) * input("Y1", &[j])).sum();
        assert_eq!(out["X1"][&vec![i]], x1);
    }
    for j in 0..n1 {
        let x2: i64 = (0..n0).map(|i| input("A", &[i, j]) * input("Y2", &[i])).sum();
        assert_eq!(out["X2"][&vec![j]], x2);
    }
}

#[test]
fn trmv_lower_triangle() {
    let n = 6;
    let out = run("trmv", &[n, n]);
    for i in 0..n {
        let y: i64 = (0..=i).map(|j| input("L", &[i, j]) * input("X", &[j])).sum();
        assert_eq!(out["Y"][&vec![i]], y);
    }
}

#[test]
fn jacobi1d_three_point_sweeps() {
    let (steps, n) = (5, 8);
    let out = vector(&run("jacobi1d", &[steps, n]), "V");
    let mut u: Vec<i64> = (0..n).map(|i| input("U", &[i])).collect();
    for _ in 1..steps {
        let prev = u.clone();
        for i in 1..(n - 1) as usize {
            u[i] = prev[i - 1] + prev[i] + prev[i + 1];
        }
    }
    for i in 0..n {
        assert_eq!(out[&vec![i]], u[i as usize], "V[{i}]");
    }
}

#[test]
fn jacobi2d_five_point_sweeps() {
    let (steps, n1, n2) = (4, 5, 6);
    let out = vector(&run("jacobi2d", &[steps, n1, n2]), "V");
    let mut u: Vec<Vec<i64>> = (0..n1).map(|i| (0..n2).map(|j| input("U", &[i, j])).collect()).collect();
    for _ in 1..steps {
        let p = u.clone();
        for i in 1..(n1 - 1) as usize {
            for j in 1..(n2 - 1) as usize {
                u[i][j] = p[i][j] + p[i - 1][j] + p[i + 1][j] + p[i][j - 1] + p[i][j + 1];
            }
        }
    }
    for i in 0..n1 {
        for j in 0..n2 {
            assert_eq!(out[&vec![i, j]], u[i as usize][j as usize], "V[{i},{j}]");
        }
    }
}
