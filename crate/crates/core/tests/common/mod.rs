#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use pra_energy::linear::Bindings;
use pra_energy::mapping::MappingConfig;
use pra_energy::par::Exec;
use pra_energy::pra::{parse_pra, Program};
use pra_energy::report::{analyze, AnalysisReport};
use pra_energy::sim::{simulate, AccessCounts, SimConfig, SimError};
use pra_energy::tiling::{tile_program, TiledKind, TiledProgram};

/// Kernel name and its 2x2 mapping.
pub const KERNELS: &[(&str, &str)] = &[
    ("gesummv", "gesummv-2x2"),
    ("gemm", "gemm-2x2"),
    ("bicg", "bicg-2x2"),
    ("gemver", "gemver-2x2"),
    ("mvt", "mvt-2x2"),
    ("trmv", "trmv-2x2"),
    ("jacobi1d", "jacobi1d-2x2"),
    ("jacobi2d", "jacobi2d-2x2"),
];

pub fn benchmarks() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("benchmarks")
}

pub fn program_text(kernel: &str) -> String {
    std::fs::read_to_string(benchmarks().join(format!("{kernel}.pra"))).unwrap()
}

pub fn mapping_path(name: &str) -> PathBuf {
    benchmarks().join("mappings").join(format!("{name}.toml"))
}

pub fn mapping(name: &str) -> MappingConfig {
    MappingConfig::load(&mapping_path(name)).unwrap()
}

pub fn b(pairs: &[(&str, i64)]) -> Bindings {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Parsed program, its mapping and the tiled program.
pub struct Setup {
    pub text: String,
    pub program: Program,
    pub mapping: MappingConfig,
    pub tiled: TiledProgram,
}

impl Setup {
    pub fn new(kernel: &str, mapping_name: &str) -> Self {
        let text = program_text(kernel);
        let program = parse_pra(&text).unwrap();
        let mapping = mapping(mapping_name);
        let tiled = tile_program(&program, &mapping.tiling, &mapping.assume).unwrap();
        Setup {
            text,
            program,
            mapping,
            tiled,
        }
    }

    pub fn report(&self) -> AnalysisReport {
        analyze(&self.text, &self.mapping, Exec::Parallel).unwrap()
    }

    pub fn simulate(&self, bindings: &Bindings, exec: Exec) -> Result<AccessCounts, SimError> {
        simulate(&SimConfig {
            program: &self.program,
            tiled: &self.tiled,
            table: &self.mapping.table,
            bindings,
            schedule: self.mapping.schedule.as_ref(),
            exec,
        })
    }
}

/// Bindings `N_l`, `p_l` for every `(N_l, p_l)` combination where the tiles
/// of `counts` cover the extent.
pub fn covering_grid(counts: &[i64], extents: &[Vec<i64>], sizes: &[Vec<i64>]) -> Vec<Bindings> {
    let mut per_dim: Vec<Vec<(i64, i64)>> = Vec::new();
    for (l, t) in counts.iter().enumerate() {
        let mut pairs = Vec::new();
        for &n in &extents[l] {
            for &p in &sizes[l] {
                if p * t >= n {
                    pairs.push((n, p));
                }
            }
        }
        per_dim.push(pairs);
    }
    let mut out = vec![Bindings::new()];
    for (l, pairs) in per_dim.iter().enumerate() {
        out = out
            .into_iter()
            .flat_map(|bb| {
                pairs.iter().map(move |(n, p)| {
                    let mut bb = bb.clone();
                    bb.insert(format!("N{l}"), *n);
                    bb.insert(format!("p{l}"), *p);
                    bb
                })
            })
            .collect();
    }
    out
}

/// Violations of the tiling bijection at one covering point: the map
/// `i -> (i mod p, i div p)` must be injective onto the tiled base space, keep
/// every statement's condition, and send each read to exactly one memory part.
pub fn bijection_violations(setup: &Setup, bb: &Bindings) -> Vec<String> {
    let n = setup.program.dim();
    let counts = &setup.mapping.tiling.counts;
    let extents = setup.program.extents(bb).unwrap();
    let sizes = setup.mapping.tiling.concrete_sizes(bb).unwrap();
    let tiled_vars: Vec<String> = (0..n).map(|l| format!("j{l}")).chain((0..n).map(|l| format!("k{l}"))).collect();
    let mut bad = Vec::new();
    let mut image = BTreeSet::new();
    if extents.iter().any(|e| *e <= 0) {
        return bad;
    }
    let mut i = vec![0i64; n];
    loop {
        let jk: Vec<i64> = (0..n).map(|l| i[l] % sizes[l]).chain((0..n).map(|l| i[l] / sizes[l])).collect();
        if (0..n).any(|l| jk[n + l] >= counts[l]) {
            bad.push(format!("{i:?} leaves the tile grid"));
        }
        if !image.insert(jk.clone()) {
            bad.push(format!("{jk:?} hit twice"));
        }
        let orig: BTreeMap<String, i64> = setup.program.vars.iter().cloned().zip(i.iter().copied()).collect();
        let tiled: BTreeMap<String, i64> = tiled_vars.iter().cloned().zip(jk.iter().copied()).collect();
        for s in &setup.program.statements {
            let active = s.condition.contains_point(&orig, bb).unwrap();
            let comp = setup.tiled.statement(&s.label).unwrap();
            if comp.condition.contains_point(&tiled, bb).unwrap() != active {
                bad.push(format!("{} at {i:?}", s.label));
            }
            for r in 0..s.reads().len() {
                let hits = setup
                    .tiled
                    .statements
                    .iter()
                    .filter(|t| t.kind == TiledKind::Memory && t.origin == s.label && t.ref_index == Some(r))
                    .filter(|t| t.condition.contains_point(&tiled, bb).unwrap())
                    .count();
                if hits != active as usize {
                    bad.push(format!("{} read {r} at {i:?}: {hits} memory parts", s.label));
                }
            }
        }
        let mut l = n;
        loop {
            if l == 0 {
                return bad;
            }
            l -= 1;
            i[l] += 1;
            if i[l] < extents[l] {
                break;
            }
            i[l] = 0;
        }
    }
}
