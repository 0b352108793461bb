//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::collections::HashMap;
use std::f64::consts::E;
use std::io::BufReader;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kstree::cnf::{assign_literals, cnf_stats, to_cnf, Assignment, CnfFormula};
use kstree::construction::{build_stage, make_params, Pipeline, StageParams};
use kstree::dimacs::{read_dimacs, write_dimacs};
use kstree::hypergraph::{Stage, TreeHypergraph};
use kstree::mutation::{mutation_suite, Mutation};
use kstree::verify::{
    certify_unsat_structural, check_base_profile, check_equalized_profile, check_split_profile,
    solve_brute_force, solve_dpll, SolveResult, SolveStatus, VerificationReport, WitnessFinder,
    DEFAULT_DPLL_BUDGET,
};

const SMALL_KS: [u32; 3] = [2, 4, 8];
const ALL_KS: [u32; 4] = [2, 4, 8, 16];

const SMALL_BUILD_LIMIT: Duration = Duration::from_secs(1);
const K16_BUILD_LIMIT: Duration = Duration::from_secs(5 * 60);
const BRUTE_K4_LIMIT: Duration = Duration::from_secs(30);
const PEAK_MEMORY_LIMIT_KIB: u64 = 4 * 1024 * 1024;

const WITNESS_SAMPLES: usize = 1000;
const MUTATIONS_PER_CHECKER: usize = 10;

// Golden values from the first verified run.
const K16_MAX_OCCURRENCES: u64 = 16320;
const K16_CLAUSES: usize = 2_088_960;
const K16_VARS: u32 = 2_088_959;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Context) -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)*));
        }
    };
}

struct Instance {
    params: StageParams,
    pipeline: Pipeline,
    formula: CnfFormula,
    build_time: Duration,
}

struct Context {
    instances: HashMap<u32, Instance>,
    peak_after_k16_kib: Option<u64>,
}

impl Context {
    fn build() -> Self {
        let mut instances = HashMap::new();
        let mut peak = None;
        for k in ALL_KS {
            let start = Instant::now();
            let params = make_params(k).expect("supported k");
            let pipeline = Pipeline::run(k).expect("pipeline runs");
            let lits = assign_literals(&pipeline.joined).expect("literals");
            let formula = to_cnf(&pipeline.joined, &lits).expect("cnf");
            let build_time = start.elapsed();
            if k == 16 {
                peak = peak_memory_kib();
            }
            instances.insert(
                k,
                Instance {
                    params,
                    pipeline,
                    formula,
                    build_time,
                },
            );
        }
        Context {
            instances,
            peak_after_k16_kib: peak,
        }
    }

    fn get(&self, k: u32) -> &Instance {
        &self.instances[&k]
    }
}

fn peak_memory_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Occurrences per variable, counted straight from the clause list.
fn max_occurrences(f: &CnfFormula) -> u64 {
    let mut count = vec![0u64; f.num_vars() as usize + 1];
    for c in f.clauses() {
        for l in c {
            count[l.var() as usize] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Leaves of the final tree: every base leaf carries one size-k edge per
/// augmented class i, expanded into 2^i copies.
fn expected_final_leaves(k: u32) -> u64 {
    let log_d = k - k.trailing_zeros();
    let d = 1u64 << log_d;
    let ll = 31 - log_d.leading_zeros();
    let classes = 1u32 << ll;
    d * ((1u64 << classes) - 1)
}

/// Any reported model must satisfy every clause.
fn confirm(f: &CnfFormula, r: SolveResult) -> Result<SolveResult, String> {
    if let Some(model) = &r.model {
        if let Some(i) = model.first_falsified(f) {
            return Err(format!("reported model falsifies clause {i}"));
        }
    }
    Ok(r)
}

fn killed(r: kstree::Result<VerificationReport>) -> bool {
    r.map_or(true, |r| !r.pass)
}

fn occurrence_bound(ctx: &Context) -> Outcome {
    let mut detail = Vec::new();
    for k in ALL_KS {
        let inst = ctx.get(k);
        let f = &inst.formula;
        ensure!(
            f.clauses().all(|c| c.len() == k as usize),
            "k={k}: formula is not {k}-uniform"
        );
        let bound = 4 * (1u64 << k) / k as u64;
        let occ = max_occurrences(f);
        ensure!(occ <= bound, "k={k}: {occ} occurrences > bound {bound}");
        let stats = cnf_stats(f, k);
        ensure!(
            stats.max_var_occurrences == occ,
            "k={k}: stats report {} occurrences, counted {occ}",
            stats.max_var_occurrences
        );
        let limit = if k == 16 {
            K16_BUILD_LIMIT
        } else {
            SMALL_BUILD_LIMIT
        };
        ensure!(
            inst.build_time < limit,
            "k={k}: build took {:?} (limit {limit:?})",
            inst.build_time
        );
        detail.push(format!("k={k}:{occ}/{bound} in {:.2?}", inst.build_time));
    }
    ensure!(
        max_occurrences(&ctx.get(4).formula) == 12,
        "k=4 occurrences differ from 12"
    );
    ensure!(
        max_occurrences(&ctx.get(16).formula) == K16_MAX_OCCURRENCES,
        "k=16 occurrences differ from golden {K16_MAX_OCCURRENCES}"
    );
    let peak = ctx.peak_after_k16_kib.ok_or("peak memory unavailable")?;
    ensure!(
        peak < PEAK_MEMORY_LIMIT_KIB,
        "peak memory {peak} KiB >= {PEAK_MEMORY_LIMIT_KIB} KiB"
    );
    detail.push(format!("peak {} MiB", peak / 1024));
    Ok(detail.join(", "))
}

fn oracle_unsat(ctx: &Context) -> Outcome {
    let mut detail = Vec::new();
    for k in [2, 4] {
        let f = &ctx.get(k).formula;
        let start = Instant::now();
        let brute = confirm(f, solve_brute_force(f).map_err(|e| e.to_string())?)?;
        let took = start.elapsed();
        ensure!(
            brute.status == SolveStatus::Unsat,
            "k={k}: brute force says {}",
            brute.status
        );
        ensure!(
            brute.decisions == 1u64 << f.num_vars(),
            "k={k}: brute force tried {} assignments",
            brute.decisions
        );
        if k == 4 {
            ensure!(took < BRUTE_K4_LIMIT, "k=4 brute force took {took:?}");
        }
        detail.push(format!("brute k={k} {took:.2?}"));
    }
    for k in SMALL_KS {
        let f = &ctx.get(k).formula;
        let r = confirm(f, solve_dpll(f, DEFAULT_DPLL_BUDGET))?;
        ensure!(
            r.status == SolveStatus::Unsat,
            "k={k}: dpll says {}",
            r.status
        );
        detail.push(format!("dpll k={k} {} decisions", r.decisions));
    }
    // agreement on satisfiable neighbours: drop each clause at k=4
    let f = &ctx.get(4).formula;
    for i in 0..f.num_clauses() {
        let g = f.without_clause(i);
        let b = confirm(&g, solve_brute_force(&g).map_err(|e| e.to_string())?)?;
        let d = confirm(&g, solve_dpll(&g, DEFAULT_DPLL_BUDGET))?;
        ensure!(
            b.status == d.status,
            "k=4 minus clause {i}: brute {} vs dpll {}",
            b.status,
            d.status
        );
    }
    detail.push("agree on 24 clause deletions".into());
    Ok(detail.join(", "))
}

fn certificate(ctx: &Context) -> Outcome {
    for k in ALL_KS {
        let inst = ctx.get(k);
        let r = certify_unsat_structural(&inst.pipeline.joined, &inst.params)
            .map_err(|e| e.to_string())?;
        ensure!(
            r.pass,
            "k={k}: certificate fails: {:?}",
            r.violations.first()
        );
    }
    let mut deletions = 0;
    for k in [2, 4] {
        let inst = ctx.get(k);
        let joined = &inst.pipeline.joined;
        for i in 0..joined.edges().len() {
            let mut h = joined.clone();
            h.edges_mut().remove(i);
            ensure!(
                killed(certify_unsat_structural(&h, &inst.params)),
                "k={k}: certificate survives deleting edge {i}"
            );
            deletions += 1;
        }
    }
    Ok(format!(
        "k in {{2,4,8,16}} certified, {deletions}/{deletions} deletions detected"
    ))
}

fn stage_profiles(ctx: &Context) -> Outcome {
    for k in ALL_KS {
        let inst = ctx.get(k);
        let p = &inst.params;
        let pipe = &inst.pipeline;
        for (name, r) in [
            ("base", check_base_profile(&pipe.base, p)),
            ("split", check_split_profile(&pipe.split, p)),
            ("equalized", check_equalized_profile(&pipe.equalized, p)),
        ] {
            let r = r.map_err(|e| e.to_string())?;
            ensure!(
                r.pass,
                "k={k}: {name} profile fails: {:?}",
                r.violations.first()
            );
        }
    }
    type Checker = fn(&TreeHypergraph, &StageParams) -> kstree::Result<VerificationReport>;
    let checkers: [(Stage, Checker); 3] = [
        (Stage::Base, check_base_profile),
        (Stage::Split, check_split_profile),
        (Stage::Equalized, check_equalized_profile),
    ];
    let mut total = 0;
    let mut kills = 0;
    let mut survivors = Vec::new();
    let mut categories = [false; 3];
    for (stage, check) in checkers {
        // half of each checker's share at k=4, half at k=8
        for (k, seed) in [(4, 0xACCE_0001), (8, 0xACCE_0002)] {
            let inst = ctx.get(k);
            let hg = inst.pipeline.stage(stage);
            for m in mutation_suite(hg, MUTATIONS_PER_CHECKER / 2, seed) {
                let mut h = hg.clone();
                m.apply(&mut h).map_err(|e| e.to_string())?;
                categories[match m {
                    Mutation::BumpMultiplicity { .. } | Mutation::DropMultiplicity { .. } => 0,
                    Mutation::DeleteEdge { .. } => 1,
                    Mutation::RaiseTop { .. } | Mutation::LowerTop { .. } => 2,
                }] = true;
                total += 1;
                if killed(check(&h, &inst.params)) {
                    kills += 1;
                } else {
                    survivors.push(format!("{stage} k={k} {m:?}"));
                }
            }
        }
    }
    ensure!(total == 30, "suite has {total} mutations, expected 30");
    ensure!(
        categories.iter().all(|&c| c),
        "suite misses a category (multiplicity, deletion, size): {categories:?}"
    );
    ensure!(
        survivors.is_empty(),
        "{kills}/{total} killed; survivors: {survivors:?}"
    );
    Ok(format!(
        "profiles pass for k in {{2,4,8,16}}, {kills}/{total} mutations killed"
    ))
}

fn witnesses(ctx: &Context) -> Outcome {
    for (k, seed) in SMALL_KS.into_iter().zip(1u64..) {
        let inst = ctx.get(k);
        let hg = &inst.pipeline.joined;
        let lits = assign_literals(hg).map_err(|e| e.to_string())?;
        let f = &inst.formula;
        let finder = WitnessFinder::new(hg, &lits, f).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for sample in 0..WITNESS_SAMPLES {
            let alpha = Assignment::random(f.num_vars(), &mut rng);
            let w = finder
                .find(&alpha)
                .map_err(|e| format!("k={k} sample {sample}: {e}"))?;
            let clause = f.clause(w.falsified_clause_index);
            ensure!(
                clause.iter().all(|&l| !alpha.lit_value(l)),
                "k={k} sample {sample}: clause {} not falsified",
                w.falsified_clause_index
            );
            ensure!(
                hg.tree().is_leaf(*w.branch.last().unwrap()),
                "k={k} sample {sample}: walk stopped early"
            );
        }
    }
    Ok(format!(
        "{WITNESS_SAMPLES} assignments each for k in {{2,4,8}}"
    ))
}

fn base_multiplicities(ctx: &Context) -> Outcome {
    let base = &ctx.get(4).pipeline.base;
    let tree = base.tree();
    let leaves = tree.leaves();
    ensure!(leaves.len() == 4, "k=4 base has {} leaves", leaves.len());
    for leaf in leaves {
        let branch = tree.branch_to(leaf);
        let mut found: Vec<(u32, u64)> = base
            .edges()
            .iter()
            .filter(|e| e.bottom == leaf)
            .map(|e| (tree.level(e.top), e.multiplicity))
            .collect();
        found.sort_unstable();
        // top at the root, the middle vertex, the leaf itself
        let expected = vec![(0, 1), (1, 2), (2, 4)];
        ensure!(found == expected, "branch {branch:?}: {found:?}");
        ensure!(branch.len() == 3, "branch {branch:?} has wrong length");
    }
    Ok("multiplicities 1, 2, 4 on all 4 branches".into())
}

fn size_law(ctx: &Context) -> Outcome {
    let mut detail = Vec::new();
    for k in ALL_KS {
        let f = &ctx.get(k).formula;
        let leaves = expected_final_leaves(k);
        ensure!(
            f.num_clauses() as u64 == 2 * leaves,
            "k={k}: {} clauses, expected {}",
            f.num_clauses(),
            2 * leaves
        );
        ensure!(
            f.num_clauses() == f.num_vars() as usize + 1,
            "k={k}: {} clauses for {} variables",
            f.num_clauses(),
            f.num_vars()
        );
        detail.push(format!("k={k}:{}/{}", f.num_clauses(), f.num_vars()));
    }
    let expected = [
        (2, 4, 3),
        (4, 24, 23),
        (8, 960, 959),
        (16, K16_CLAUSES, K16_VARS),
    ];
    for (k, m, n) in expected {
        let f = &ctx.get(k).formula;
        ensure!(
            (f.num_clauses(), f.num_vars()) == (m, n),
            "k={k}: {}/{} differs from {m}/{n}",
            f.num_clauses(),
            f.num_vars()
        );
    }
    Ok(detail.join(", "))
}

fn serialization(ctx: &Context) -> Outcome {
    for k in SMALL_KS {
        let f = &ctx.get(k).formula;
        let mut buf = Vec::new();
        write_dimacs(f, &mut buf).map_err(|e| e.to_string())?;
        let back = read_dimacs(BufReader::new(buf.as_slice())).map_err(|e| e.to_string())?;
        ensure!(&back == f, "k={k}: round trip changed the formula");
        if k == 4 {
            let text = String::from_utf8(buf).map_err(|e| e.to_string())?;
            let header = text.lines().next().unwrap_or_default();
            ensure!(header == "p cnf 23 24", "k=4 header is {header:?}");
        }
    }
    Ok("round trip identity for k in {2,4,8}, k=4 header \"p cnf 23 24\"".into())
}

fn render(k: u32) -> Result<[Vec<u8>; 3], String> {
    let p = make_params(k).map_err(|e| e.to_string())?;
    let hg = build_stage(&p, Stage::Joined).map_err(|e| e.to_string())?;
    let lits = assign_literals(&hg).map_err(|e| e.to_string())?;
    let f = to_cnf(&hg, &lits).map_err(|e| e.to_string())?;
    let mut cnf = Vec::new();
    write_dimacs(&f, &mut cnf).map_err(|e| e.to_string())?;
    let mut dot = Vec::new();
    hg.tree().write_dot(&mut dot).map_err(|e| e.to_string())?;
    let report = certify_unsat_structural(&hg, &p).map_err(|e| e.to_string())?;
    let json =
        serde_json::to_vec(&(cnf_stats(&f, k), hg.summary(), report)).map_err(|e| e.to_string())?;
    Ok([cnf, dot, json])
}

fn determinism(_: &Context) -> Outcome {
    for k in SMALL_KS {
        ensure!(
            render(k)? == render(k)?,
            "k={k}: outputs differ between runs"
        );
    }
    let seeded = |seed| {
        mutation_suite(
            &build_stage(&make_params(8).unwrap(), Stage::Base).unwrap(),
            20,
            seed,
        )
    };
    ensure!(seeded(5) == seeded(5), "mutation suite is not reproducible");
    Ok("CNF, DOT and JSON byte-identical for k in {2,4,8}".into())
}

fn kst_comparison(ctx: &Context) -> Outcome {
    let mut detail = Vec::new();
    for k in ALL_KS {
        let f = &ctx.get(k).formula;
        let threshold = (1u64 << k) as f64 / (E * k as f64);
        let occ = max_occurrences(f);
        ensure!(
            occ as f64 > threshold,
            "k={k}: {occ} <= KST threshold {threshold:.2}"
        );
        let stats = cnf_stats(f, k);
        ensure!(
            stats.above_kst_threshold,
            "k={k}: stats disagree on the threshold"
        );
        detail.push(format!("k={k}:{occ}>{threshold:.1}"));
    }
    Ok(detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("occurrence bound", occurrence_bound),
        ("unsatisfiability, oracle tier", oracle_unsat),
        ("unsatisfiability, certificate tier", certificate),
        ("stage profiles and mutation kill", stage_profiles),
        ("falsifying branch walk", witnesses),
        ("base multiplicity fixture", base_multiplicities),
        ("size law", size_law),
        ("DIMACS serialization", serialization),
        ("determinism", determinism),
        ("KST threshold comparison", kst_comparison),
    ];

    let ctx = Context::build();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(&ctx)))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
