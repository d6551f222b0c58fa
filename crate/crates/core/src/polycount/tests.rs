use super::*;
use crate::linear::{Bindings, Lin, ParamConstraint};
use crate::pra::{parse_pra, AffineExpr, Constraint, ConstraintSystem};
use crate::tiling::{tile_program, TileSize, TilingSpec, TiledProgram};

const GESUMMV: &str = include_str!("../../benchmarks/gesummv.pra");

fn bind(pairs: &[(&str, i64)]) -> Bindings {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn gesummv_tiled(t: [i64; 2]) -> TiledProgram {
    let p = parse_pra(GESUMMV).unwrap();
    let tiling = TilingSpec::new(vec![TileSize::Param("p0".into()), TileSize::Param("p1".into())], t.to_vec());
    tile_program(&p, &tiling, &[]).unwrap()
}

fn domain(tp: &TiledProgram) -> Vec<ParamConstraint> {
    tp.assumptions.iter().map(|a| a.constraint.clone()).collect()
}

fn symbolic(tp: &TiledProgram, id: &str) -> SymbolicVolume {
    let s = tp.statement(id).unwrap();
    match volume(&s.condition, &tp.tiling.counts, &domain(tp)).unwrap() {
        Volume::Symbolic(v) => v,
        Volume::Enumerated { reason } => panic!("{id}: {reason}"),
    }
}

#[test]
fn figure_configuration_volumes() {
    let tp = gesummv_tiled([2, 2]);
    let b = bind(&[("N0", 4), ("N1", 5), ("p0", 2), ("p1", 3)]);
    for (id, expect) in [("S7*1", 12), ("S7*2", 4), ("S3", 20), ("S11", 4)] {
        let v = symbolic(&tp, id);
        assert_eq!(v.eval(&b).unwrap(), expect, "{id}");
        assert_eq!(v.to_piecewise(&domain(&tp)).eval(&b).unwrap(), expect, "{id}");
        assert_eq!(count_concrete(&tp.statement(id).unwrap().condition, &b).unwrap(), expect);
    }
}

#[test]
fn inter_tile_pieces() {
    let tp = gesummv_tiled([2, 2]);
    let pw = symbolic(&tp, "S7*2").to_piecewise(&domain(&tp));
    let text = pw.to_string();
    assert!(text.contains("2*p0"), "{text}");
    assert!(guards_disjoint(&pw));
}

#[test]
fn symbolic_matches_enumeration_on_grid() {
    let tp = gesummv_tiled([2, 2]);
    let dom = domain(&tp);
    for s in &tp.statements {
        let v = symbolic(&tp, &s.id);
        let pw = v.to_piecewise(&dom);
        let unfolded = volume_unfolded(&s.condition, &tp.tiling.counts, &dom).unwrap();
        for n0 in 1..=6 {
            for n1 in 1..=6 {
                for p0 in 1..=4 {
                    for p1 in 1..=4 {
                        let b = bind(&[("N0", n0), ("N1", n1), ("p0", p0), ("p1", p1)]);
                        let c = count_concrete(&s.condition, &b).unwrap();
                        assert_eq!(v.eval(&b).unwrap(), c, "{} at {b:?}", s.id);
                        assert_eq!(pw.eval(&b).unwrap(), c, "{} flat at {b:?}\n{pw}", s.id);
                        assert_eq!(unfolded.eval(&b).unwrap(), c, "{} unfolded at {b:?}", s.id);
                    }
                }
            }
        }
    }
}

#[test]
fn unfold_k_examples() {
    let tp = gesummv_tiled([2, 2]);
    let s = &tp.statement("S7*1").unwrap().condition;
    assert_eq!(unfold_k(s, &[2, 2]).unwrap().len(), 4);
    let tp1 = gesummv_tiled([1, 1]);
    assert_eq!(unfold_k(&tp1.statement("S7*1").unwrap().condition, &[1, 1]).unwrap().len(), 1);
}

#[test]
fn box_edge_and_contradiction() {
    let mut cs = ConstraintSystem::new(vec!["j0".into()]);
    cs.push(Constraint::ge(AffineExpr::var("j0")));
    cs.push(Constraint::ge(
        AffineExpr::from_lin(Lin::param("p0") - Lin::constant(1)).minus(&AffineExpr::var("j0")),
    ));
    let pw = count_separable(&cs, &[]).unwrap();
    assert_eq!(pw.to_string(), "p0 if p0 >= 1");

    let mut empty = ConstraintSystem::new(vec!["j0".into()]);
    empty.push(Constraint::ge(AffineExpr::var("j0").minus(&AffineExpr::from_lin(Lin::constant(1)))));
    empty.push(Constraint::ge(AffineExpr::var("j0").scaled(-1)));
    assert_eq!(count_concrete(&empty, &Bindings::new()).unwrap(), 0);
}

#[test]
fn coupled_constraint_requires_fallback() {
    let mut cs = ConstraintSystem::new(vec!["j0".into(), "j1".into()]);
    cs.push(Constraint::ge(AffineExpr::var("j0").minus(&AffineExpr::var("j1"))));
    assert!(matches!(count_separable(&cs, &[]), Err(CountError::FallbackRequired(_))));
}

#[test]
fn unbounded_is_reported() {
    let mut cs = ConstraintSystem::new(vec!["j0".into()]);
    cs.push(Constraint::ge(AffineExpr::var("j0")));
    assert!(matches!(count_concrete(&cs, &Bindings::new()), Err(CountError::Unbounded(..))));
}
