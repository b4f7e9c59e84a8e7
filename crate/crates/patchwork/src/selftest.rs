//! The acceptance self-test: ten numbered end-to-end checks, each an
//! independent re-verification of a released guarantee at desk scale.
//!
//! Every criterion is a plain function returning a one-line summary on
//! success or a description of the first failure.  [`run_all`] executes the
//! criteria in order, converts panics into failures, and never aborts early,
//! so a single red criterion still produces a complete report.  The `selftest`
//! CLI subcommand and the acceptance integration test are both thin wrappers
//! around this module.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;

use crate::config::{enumerate_simple_configs, Configuration};
use crate::decompose::{
    decompose_nontrivial, decompose_product, path_decomposition, verify_nontrivial_decomposition,
    verify_path_decomposition, verify_product_decomposition, zero_subsequence, ClauseStatus,
};
use crate::extremal::{
    check_bounded_gap, ex_table_jobs, fit_periodic, verify_extremal_family, ClassSpec,
    ExtremalTable,
};
use crate::field::{Fe, Field, SUPPORTED_ORDERS};
use crate::gen;
use crate::linalg::{intersect, projective_points, span, sum, Subspace, Vector};
use crate::patch::{
    compose, contract_linked_middle, f_functional, is_linked_patch, product, split, ProductMarkers,
    RootedConfiguration,
};
use crate::ratio::{rat, rat_int, rational_abs};
use crate::structure::{
    branch_width, coloring_lambda, find_linked_bd, is_linked, kappa, max_coloring_lambda,
    tutte_linking, width, BwMode,
};

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub number: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Success summary or failure description, with the wall time appended.
    pub detail: String,
}

/// The criterion names, in order (criterion k is `CRITERIA[k - 1]`).
pub const CRITERIA: [&str; 10] = [
    "field axioms and the subspace dimension formula",
    "lambda/kappa/Tutte linking oracles",
    "exact and linked branch decompositions",
    "decomposition clause checkers",
    "patch algebra round trips, bookkeeping, additivity, contraction",
    "greedy pruning postconditions",
    "zero-sum subsequence windows",
    "periodic fit recovery on the K33 table",
    "extremal tables versus the best patch family",
    "bounded gap consistency",
];

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err(format!($($arg)+));
        }
    };
}

type Check = std::result::Result<String, String>;

/// Canonical form of a candidate patch: echelon coordinates of the core
/// multiset and of each terminal list.
type CandidateKey = (Vec<Vec<Fe>>, Vec<Fe>, Vec<Fe>);

fn ctx<T>(r: crate::Result<T>, what: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

/// Runs one criterion (1-based) with the default fixed seeds.
pub fn run_criterion(number: usize) -> CriterionOutcome {
    run_criterion_seeded(number, None)
}

/// Runs one criterion, converting panics into failures and recording the
/// wall time.  A seed replaces the fixed seeds of the randomized trials
/// (criteria 2, 4, 5, 6); the properties under test hold for every seed.
pub fn run_criterion_seeded(number: usize, seed: Option<u64>) -> CriterionOutcome {
    let name = CRITERIA
        .get(number.wrapping_sub(1))
        .copied()
        .unwrap_or("unknown");
    let body: fn(Option<u64>) -> Check = match number {
        1 => c1_fields,
        2 => c2_linking,
        3 => c3_branch_decompositions,
        4 => c4_decomposition_clauses,
        5 => c5_patch_algebra,
        6 => c6_pruning,
        7 => c7_zero_subsequence,
        8 => c8_periodic_fit,
        9 => c9_extremal_families,
        10 => c10_bounded_gap,
        _ => {
            return CriterionOutcome {
                number,
                name,
                passed: false,
                detail: format!("no criterion numbered {number} (valid: 1..=10)"),
            }
        }
    };
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| body(seed))).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "non-string panic payload".to_string());
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok(d) => (true, format!("{d} [{secs:.1}s]")),
        Err(d) => (false, format!("{d} [{secs:.1}s]")),
    };
    CriterionOutcome {
        number,
        name,
        passed,
        detail,
    }
}

/// Runs all ten criteria in order with the default fixed seeds.
pub fn run_all() -> Vec<CriterionOutcome> {
    run_all_seeded(None)
}

/// Runs all ten criteria in order, re-seeding the randomized trials.
pub fn run_all_seeded(seed: Option<u64>) -> Vec<CriterionOutcome> {
    (1..=CRITERIA.len())
        .map(|n| run_criterion_seeded(n, seed))
        .collect()
}

/// The trial seed actually used: the fixed per-site value by default, or a
/// mix of it with the caller's seed.
fn mix(seed: Option<u64>, fixed: u64) -> u64 {
    match seed {
        Some(s) => s.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ fixed,
        None => fixed,
    }
}

fn gf(order: usize) -> Field {
    Field::of_order(order as u8).expect("supported order")
}

// ---------------------------------------------------------------------------
// Criterion 1: field axioms and the subspace dimension formula
// ---------------------------------------------------------------------------

fn c1_fields(_seed: Option<u64>) -> Check {
    let mut triples = 0usize;
    for order in SUPPORTED_ORDERS {
        let f = ctx(Field::of_order(order), "field construction")?;
        let els: Vec<Fe> = f.elements().collect();
        ensure!(
            els.len() == order as usize,
            "F{order} enumerates {} elements",
            els.len()
        );
        let zero = f.zero();
        let one = f.one();
        ensure!(zero != one, "F{order}: 0 = 1");
        for &a in &els {
            ensure!(f.add(a, zero) == a, "F{order}: {a:?} + 0 != {a:?}");
            ensure!(f.mul(a, one) == a, "F{order}: {a:?} * 1 != {a:?}");
            ensure!(
                f.add(a, f.neg(a)) == zero,
                "F{order}: {a:?} + (-{a:?}) != 0"
            );
            if a == zero {
                ensure!(f.inv(a).is_err(), "F{order}: 0 has an inverse");
            } else {
                let ai = ctx(f.inv(a), "inverse")?;
                ensure!(f.mul(a, ai) == one, "F{order}: {a:?} * {a:?}^-1 != 1");
            }
            for &b in &els {
                ensure!(
                    f.add(a, b) == f.add(b, a),
                    "F{order}: addition not commutative"
                );
                ensure!(
                    f.mul(a, b) == f.mul(b, a),
                    "F{order}: multiplication not commutative"
                );
                ensure!(
                    f.add(f.sub(a, b), b) == a,
                    "F{order}: subtraction is not inverse addition"
                );
                for &c in &els {
                    ensure!(
                        f.add(f.add(a, b), c) == f.add(a, f.add(b, c)),
                        "F{order}: addition not associative"
                    );
                    ensure!(
                        f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)),
                        "F{order}: multiplication not associative"
                    );
                    ensure!(
                        f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)),
                        "F{order}: distributivity fails"
                    );
                    triples += 1;
                }
            }
        }
    }

    // dim(U + V) + dim(U ∩ V) = dim U + dim V for every pair of subspaces of
    // F_2^d, d ≤ 3, with the subspaces enumerated from scratch as the spans
    // of all vector subsets.
    let f2 = gf(2);
    let mut pairs = 0usize;
    for d in 0..=3usize {
        let all: Vec<Vector> = (0..1u32 << d)
            .map(|m| Vector::new((0..d).map(|i| Fe((m >> i & 1) as u8)).collect()))
            .collect();
        let mut seen: BTreeSet<Vec<Vector>> = BTreeSet::new();
        let mut subs: Vec<Subspace> = vec![];
        for mask in 0..1usize << all.len() {
            let chosen: Vec<Vector> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| v.clone())
                .collect();
            let s = span(&f2, d, &chosen);
            if seen.insert(s.basis().to_vec()) {
                subs.push(s);
            }
        }
        let expected = [1usize, 2, 5, 16][d];
        ensure!(
            subs.len() == expected,
            "F_2^{d} has {} subspaces, expected {expected}",
            subs.len()
        );
        for u in &subs {
            for v in &subs {
                let s = sum(&f2, u, v);
                let i = intersect(&f2, u, v);
                ensure!(
                    s.dim() + i.dim() == u.dim() + v.dim(),
                    "dimension formula fails in F_2^{d}: dim(U+V)={} dim(U∩V)={} dimU={} dimV={}",
                    s.dim(),
                    i.dim(),
                    u.dim(),
                    v.dim()
                );
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "{} field orders, {triples} operation triples, {pairs} subspace pairs",
        SUPPORTED_ORDERS.len()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 2: lambda/kappa/Tutte linking oracles
// ---------------------------------------------------------------------------

/// Brute-force κ from the raw definition plus both directions of the linking
/// equality, on one (X, Y) pair.
fn check_linking(a: &Configuration, x: &[usize], y: &[usize]) -> std::result::Result<(), String> {
    let m = a.len();
    let used: BTreeSet<usize> = x.iter().chain(y.iter()).copied().collect();
    let middle: Vec<usize> = (0..m).filter(|i| !used.contains(i)).collect();
    let mut brute = usize::MAX;
    for zmask in 0..1usize << middle.len() {
        let mut z: Vec<usize> = x.to_vec();
        z.extend(
            middle
                .iter()
                .enumerate()
                .filter(|(b, _)| zmask >> b & 1 == 1)
                .map(|(_, &i)| i),
        );
        brute = brute.min(ctx(a.lambda(&z), "lambda")?);
    }
    let k = ctx(kappa(a, x, y), "kappa")?;
    ensure!(
        k == brute,
        "kappa({x:?}, {y:?}) = {k} but the raw-definition minimum is {brute}"
    );
    let (contract, _delete) = ctx(tutte_linking(a, x, y), "tutte_linking")?;
    let achieved = ctx(coloring_lambda(a, x, y, &contract), "coloring_lambda")?;
    ensure!(
        achieved == k,
        "the linking witness achieves {achieved}, kappa = {k}"
    );
    let best = ctx(max_coloring_lambda(a, x, y), "max_coloring_lambda")?;
    ensure!(
        best == k,
        "max over 2-colorings is {best}, kappa = {k} (linking equality)"
    );
    Ok(())
}

fn c2_linking(seed: Option<u64>) -> Check {
    let f2 = gf(2);
    let configs = ctx(enumerate_simple_configs(&f2, 5, 5), "enumeration")?;
    let mut symmetry = 0usize;
    let mut pairs = 0usize;
    for a in &configs {
        let m = a.len();
        for mask in 0..1usize << m {
            let xs: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let ys: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 0).collect();
            let lx = ctx(a.lambda(&xs), "lambda")?;
            let ly = ctx(a.lambda(&ys), "lambda")?;
            ensure!(lx == ly, "lambda symmetry fails: {lx} vs {ly} on {a:?}");
            symmetry += 1;
        }
        // Every disjoint (X, Y) pair via base-3 assignment (0 = X, 1 = Y,
        // 2 = middle).
        let mut assign = vec![0u8; m];
        loop {
            let x: Vec<usize> = (0..m).filter(|&i| assign[i] == 0).collect();
            let y: Vec<usize> = (0..m).filter(|&i| assign[i] == 1).collect();
            check_linking(a, &x, &y).map_err(|e| format!("exhaustive {a:?}: {e}"))?;
            pairs += 1;
            let mut i = 0;
            while i < m {
                assign[i] += 1;
                if assign[i] < 3 {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
            if i == m {
                break;
            }
        }
    }

    let mut r = gen::rng(mix(seed, 2026));
    for trial in 0..500usize {
        let f = gf(if trial % 2 == 0 { 2 } else { 3 });
        let dim = r.gen_range(1..=4);
        let n = r.gen_range(1..=7);
        let a = gen::random_configuration(&f, dim, n, &mut r);
        let mask: usize = r.gen_range(0..1usize << n);
        let xs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let ys: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        ensure!(
            ctx(a.lambda(&xs), "lambda")? == ctx(a.lambda(&ys), "lambda")?,
            "random trial {trial}: lambda symmetry fails"
        );
        let mut x = vec![];
        let mut y = vec![];
        for i in 0..n {
            match r.gen_range(0..3u8) {
                0 => x.push(i),
                1 => y.push(i),
                _ => {}
            }
        }
        check_linking(&a, &x, &y).map_err(|e| format!("random trial {trial}: {e}"))?;
    }
    Ok(format!(
        "{} exhaustive configs, {symmetry} symmetry checks, {pairs} (X,Y) pairs, 500 random instances",
        configs.len()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 3: exact and linked branch decompositions
// ---------------------------------------------------------------------------

fn c3_branch_decompositions(_seed: Option<u64>) -> Check {
    let f2 = gf(2);
    let configs = ctx(enumerate_simple_configs(&f2, 6, 6), "enumeration")?;
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for a in &configs {
        let res = ctx(branch_width(a, BwMode::Exact), "branch_width")?;
        ensure!(
            res.exact,
            "exact search returned a non-exact result on {a:?}"
        );
        let w = ctx(width(&res.decomposition, a), "width")?;
        ensure!(
            w == res.width,
            "recomputed width {w} differs from reported {} on {a:?}",
            res.width
        );
        let linked = ctx(find_linked_bd(a), "find_linked_bd")?;
        let violation = ctx(is_linked(&linked, a), "is_linked")?;
        ensure!(
            violation.is_none(),
            "find_linked_bd output is not linked on {a:?}: {violation:?}"
        );
        let lw = ctx(width(&linked, a), "width")?;
        ensure!(
            lw == res.width,
            "linked decomposition has width {lw}, branch-width is {} on {a:?}",
            res.width
        );
        *histogram.entry(res.width).or_default() += 1;
    }
    Ok(format!(
        "{} configs; width histogram {histogram:?}; every linked decomposition optimal",
        configs.len()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 4: decomposition clause checkers
// ---------------------------------------------------------------------------

fn free_path_config(f: &Field, r: usize) -> Configuration {
    let vectors = (0..r)
        .map(|t| Vector::unit(r + 1, t).add(f, &Vector::unit(r + 1, t + 1)))
        .collect();
    Configuration::new(f.clone(), r + 1, vectors).expect("in range")
}

fn grounded_path_config(f: &Field, r: usize) -> Configuration {
    let mut vectors = vec![Vector::unit(r, 0)];
    vectors.extend((0..r - 1).map(|t| Vector::unit(r, t).add(f, &Vector::unit(r, t + 1))));
    vectors.push(Vector::unit(r, r - 1));
    Configuration::new(f.clone(), r, vectors).expect("in range")
}

fn cycle_config(f: &Field, m: usize) -> Configuration {
    let mut vectors: Vec<Vector> = (0..m - 1)
        .map(|t| Vector::unit(m, t).add(f, &Vector::unit(m, t + 1)))
        .collect();
    vectors.push(Vector::unit(m, 0).add(f, &Vector::unit(m, m - 1)));
    Configuration::new(f.clone(), m, vectors).expect("in range")
}

fn c4_decomposition_clauses(seed: Option<u64>) -> Check {
    let f2 = gf(2);
    // (a) 50 random width-2 inputs through the product recipe: every clause
    // of the independent checker must pass outright (sizes keep the kappa
    // clause inside its guard).
    let mut r = gen::rng(mix(seed, 45));
    let mut accepted = 0usize;
    let mut resamples = 0usize;
    while accepted < 50 {
        let n = r.gen_range(5..9);
        let a = gen::random_configuration(&f2, 3, n, &mut r);
        let bw = ctx(branch_width(&a, BwMode::Exact), "branch_width")?;
        if bw.width > 2 {
            resamples += 1;
            ensure!(
                resamples < 4000,
                "only {accepted} width-2 inputs found in {resamples} samples"
            );
            continue;
        }
        let d = ctx(decompose_product(&a, 2, 2, false), "decompose_product")?;
        for rep in verify_product_decomposition(&a, 2, 2, &d) {
            ensure!(
                rep.status == ClauseStatus::Pass,
                "product clause '{}' on a {n}-element input: {:?}",
                rep.clause,
                rep.status
            );
        }
        accepted += 1;
    }

    // (b) Constructed width-1 inputs through both the non-trivial and the
    // path recipe at p ∈ {1, 2}, in override mode (the strict size
    // hypotheses call for astronomically large inputs; every step still
    // verifies itself).
    let constructed: Vec<(&str, Configuration)> = vec![
        ("free path rank 12", free_path_config(&f2, 12)),
        ("free path rank 20", free_path_config(&f2, 20)),
        ("grounded path rank 12", grounded_path_config(&f2, 12)),
        ("grounded path rank 20", grounded_path_config(&f2, 20)),
        ("cycle rank 12", cycle_config(&f2, 13)),
    ];
    let mut patches_checked = 0usize;
    for (name, a) in &constructed {
        for p in [1usize, 2] {
            let d = ctx(decompose_nontrivial(a, 1, p, true), "decompose_nontrivial")
                .map_err(|e| format!("{name} p={p}: {e}"))?;
            for rep in verify_nontrivial_decomposition(a, 1, p, &d) {
                ensure!(
                    !rep.is_fail(),
                    "non-trivial clause '{}' on {name} p={p}: {:?}",
                    rep.clause,
                    rep.status
                );
            }
            let pd = ctx(path_decomposition(a, 1, p, true), "path_decomposition")
                .map_err(|e| format!("{name} p={p}: {e}"))?;
            let reports = verify_path_decomposition(a, 1, p, &pd);
            for rep in &reports {
                ensure!(
                    !rep.is_fail(),
                    "path clause '{}' on {name} p={p}: {:?}",
                    rep.clause,
                    rep.status
                );
            }
            ensure!(
                reports
                    .iter()
                    .any(|rp| rp.clause == "every factor is a linked patch"
                        && rp.status == ClauseStatus::Pass),
                "the linked-patch clause did not pass on {name} p={p}"
            );
            for h in &pd.factors {
                let witness = ctx(is_linked_patch(h), "is_linked_patch")
                    .map_err(|e| format!("{name} p={p} path factor: {e}"))?;
                ensure!(
                    witness.is_some(),
                    "emitted path factor is not a linked patch on {name} p={p}"
                );
                patches_checked += 1;
            }
        }
    }
    Ok(format!(
        "50 random product inputs ({resamples} width resamples), 5 constructed inputs \
         x 2 modes x p in {{1,2}}, {patches_checked} patches linkedness-checked"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 5: patch algebra
// ---------------------------------------------------------------------------

fn c5_patch_algebra(seed: Option<u64>) -> Check {
    // (a) 100 split/product round trips over GF(2) and GF(3).
    for (base, order) in [(101u64, 2usize), (102, 3)] {
        let f = gf(order);
        let mut r = gen::rng(mix(seed, base));
        for trial in 0..50usize {
            let h = gen::random_rooted(&f, &mut r);
            let part1: Vec<usize> = (0..h.core.len()).filter(|_| r.gen_bool(0.5)).collect();
            let (h1, h2) = ctx(split(&h, &part1, h.ambient_dim()), "split")
                .map_err(|e| format!("GF({order}) trial {trial}: {e}"))?;
            let back = ctx(product(&h1, &h2), "product")
                .map_err(|e| format!("GF({order}) trial {trial}: {e}"))?;
            let mut got = back.core.vectors.clone();
            let mut want = h.core.vectors.clone();
            got.sort();
            want.sort();
            ensure!(
                got == want && back.left == h.left && back.right == h.right,
                "GF({order}) trial {trial}: split/product does not round-trip"
            );
        }
    }

    // (b) compose dimension bookkeeping on 100 random composable pairs.
    let f2 = gf(2);
    let mut r = gen::rng(mix(seed, 103));
    for trial in 0..100usize {
        let (g, h) = gen::random_composable_pair(&f2, &mut r);
        let q = g.right.len();
        let j = ctx(compose(&g, &h), "compose").map_err(|e| format!("trial {trial}: {e}"))?;
        ensure!(
            j.span_dim() == g.span_dim() + h.span_dim() - q,
            "trial {trial}: composed dimension {} != {} + {} - {q}",
            j.span_dim(),
            g.span_dim(),
            h.span_dim()
        );
    }

    // (c) additivity of the linear-correction functional on 100 random
    // spanning compositions, at three slopes including a non-integer one.
    let deltas = [rat_int(0), rat_int(1), rat(3, 2)];
    let mut r = gen::rng(mix(seed, 104));
    for trial in 0..100usize {
        let (g, h) = gen::random_composable_pair(&f2, &mut r);
        let j = ctx(compose(&g, &h), "compose").map_err(|e| format!("trial {trial}: {e}"))?;
        for delta in deltas {
            let lhs = f_functional(&j.core, delta);
            let rhs = f_functional(&g.core, delta)
                + ctx(h.g_q(delta), "g_q").map_err(|e| format!("trial {trial}: {e}"))?;
            ensure!(
                lhs == rhs,
                "trial {trial}: f(J) = {lhs} but f(G) + g_q(H) = {rhs} at slope {delta}"
            );
        }
    }

    // (d) contract_linked_middle on 25 random product triples: the callee
    // re-verifies membership in P(H1, H3) internally; re-check the dimension
    // bookkeeping and the contracted-index provenance here.
    let mut done = 0usize;
    let mut rr = gen::rng(mix(seed, 105));
    while done < 25 {
        let f = gf(if done.is_multiple_of(2) { 2 } else { 3 });
        let r_len = rr.gen_range(3..=8usize);
        let ambient = r_len + 1;
        let i = rr.gen_range(1..r_len - 1);
        let j = rr.gen_range(i + 1..r_len);
        // Signed path edges e_t - e_{t+1}: their partial sums telescope, so
        // contracting a whole segment identifies its two endpoints over any
        // field (the unsigned version only links segments of even length
        // outside characteristic 2).
        let edge = |t: usize| {
            Vector::unit(ambient, t).add_scaled(&f, &Vector::unit(ambient, t + 1), f.neg(f.one()))
        };
        let mut core: Vec<Vector> = (0..r_len).map(edge).collect();
        let mut part1: Vec<usize> = (0..i).collect();
        let part2: Vec<usize> = (i..j).collect();
        let mut part3: Vec<usize> = (j..r_len).collect();
        // Random decorations inside the outer spans, loops allowed.
        for (lo, hi, part) in [(0usize, i, &mut part1), (j, r_len, &mut part3)] {
            if rr.gen_bool(0.5) {
                let mut coords = vec![Fe(0); ambient];
                for c in coords.iter_mut().take(hi + 1).skip(lo) {
                    *c = Fe(rr.gen_range(0..f.order() as u8));
                }
                part.push(core.len());
                core.push(Vector::new(coords));
            }
        }
        let p = ctx(
            RootedConfiguration::new(
                ctx(
                    Configuration::new(f.clone(), ambient, core),
                    "configuration",
                )?,
                vec![Vector::unit(ambient, 0)],
                vec![Vector::unit(ambient, r_len)],
            ),
            "rooted configuration",
        )?;
        let middle = ctx(
            RootedConfiguration::new(
                ctx(
                    Configuration::new(f.clone(), ambient, (i..j).map(edge).collect()),
                    "middle configuration",
                )?,
                vec![Vector::unit(ambient, i)],
                vec![Vector::unit(ambient, j)],
            ),
            "middle patch",
        )?;
        let witness = ctx(is_linked_patch(&middle), "is_linked_patch")?
            .ok_or_else(|| format!("triple {done}: the middle path segment is not linked"))?;
        let markers = ProductMarkers {
            part1: part1.clone(),
            part2: part2.clone(),
            part3: part3.clone(),
            x1: vec![Vector::unit(ambient, i)],
            x2: vec![Vector::unit(ambient, j)],
        };
        let out = ctx(
            contract_linked_middle(&p, &markers, &witness),
            "contract_linked_middle",
        )
        .map_err(|e| format!("triple {done}: {e}"))?;
        ensure!(
            out.contracted.iter().all(|idx| part2.contains(idx)),
            "triple {done}: contracted indices {:?} leave the middle part {part2:?}",
            out.contracted
        );
        ensure!(
            out.result.core.len() == part1.len() + part3.len(),
            "triple {done}: outer cores not preserved"
        );
        let drop = middle.span_dim() - 1;
        ensure!(
            out.result.span_dim() == p.span_dim() - drop,
            "triple {done}: dimension dropped by {} instead of {drop}",
            p.span_dim() - out.result.span_dim()
        );
        done += 1;
    }
    Ok(
        "100 round trips, 100 bookkeeping checks, 100 additivity compositions x 3 slopes, \
        25 contraction triples"
            .to_string(),
    )
}

// ---------------------------------------------------------------------------
// Criterion 6: greedy pruning postconditions
// ---------------------------------------------------------------------------

fn c6_pruning(seed: Option<u64>) -> Check {
    let deltas = [rat(1, 2), rat_int(1), rat(3, 2), rat_int(2)];
    let ks = [1usize, 2];
    let mut r = gen::rng(mix(seed, 106));
    let mut steps_total = 0usize;
    for trial in 0..50usize {
        let f = gf(if trial % 2 == 0 { 2 } else { 3 });
        let (a, delta, k) = if trial < 25 {
            let a = loop {
                let dim = r.gen_range(1..=4);
                let n = r.gen_range(1..=10);
                let c = gen::random_configuration(&f, dim, n, &mut r);
                if c.rank() > 0 {
                    break c;
                }
            };
            (a, deltas[trial % deltas.len()], ks[trial % ks.len()])
        } else {
            // A dense projective core with pendant coloops: contracting a
            // coloop trades one point for one rank, which violates the
            // pruning inequality whenever the density exceeds delta + 1, so
            // these inputs exercise actual greedy steps.
            let (cdim, tails) = if f.order() == 2 {
                (3usize, r.gen_range(1..=2usize))
            } else {
                (2usize, 1usize)
            };
            let ambient = cdim + tails;
            let mut vectors: Vec<Vector> = projective_points(&f, cdim)
                .into_iter()
                .map(|v| {
                    let mut coords = v.coords;
                    coords.resize(ambient, Fe(0));
                    Vector::new(coords)
                })
                .collect();
            for s in 0..tails {
                vectors.push(Vector::unit(ambient, cdim + s));
            }
            let a = ctx(
                Configuration::new(f.clone(), ambient, vectors),
                "configuration",
            )?;
            (a, rat(1, 2), ks[trial % ks.len()])
        };
        let (pruned, steps) =
            ctx(a.prune(delta, k), "prune").map_err(|e| format!("trial {trial}: {e}"))?;
        let residual = ctx(pruned.is_pruned(delta, k), "is_pruned")
            .map_err(|e| format!("trial {trial}: {e}"))?;
        ensure!(
            residual.is_none(),
            "trial {trial}: prune output still has a violation: {residual:?}"
        );
        let mut prev = ctx(a.density(), "density").map_err(|e| format!("trial {trial}: {e}"))?;
        for st in &steps {
            ensure!(st.rank_after > 0, "trial {trial}: a step reached rank zero");
            let cur = rat(st.epsilon_after as i64, st.rank_after as i64);
            ensure!(
                cur >= prev,
                "trial {trial}: density dropped from {prev} to {cur}"
            );
            prev = cur;
            steps_total += 1;
        }
    }
    ensure!(
        steps_total >= 10,
        "only {steps_total} greedy steps occurred; the density check would be vacuous"
    );
    Ok(format!(
        "50 inputs over two fields (25 random, 25 constructed), {steps_total} greedy steps, \
         density monotone"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 7: zero-sum subsequence windows
// ---------------------------------------------------------------------------

fn c7_zero_subsequence(_seed: Option<u64>) -> Check {
    let mut windows = 0usize;
    for len in 1..=8usize {
        let mut seq = vec![0i64; len];
        loop {
            for modulus in 2..=4i64 {
                let mut k = 1usize;
                while k * modulus as usize <= len {
                    let (m, l) = ctx(zero_subsequence(&seq, modulus, k), "zero_subsequence")
                        .map_err(|e| format!("{seq:?} P={modulus} k={k}: {e}"))?;
                    ensure!(
                        l >= k && m + l <= len,
                        "window ({m}, {l}) out of bounds for {seq:?}, k = {k}"
                    );
                    let s: i64 = seq[m..m + l].iter().sum();
                    ensure!(
                        s.rem_euclid(modulus) == 0,
                        "window sum {s} not divisible by {modulus} on {seq:?}"
                    );
                    // Independent minimality recheck: no shorter window
                    // anywhere and no earlier one of the same length.
                    for ll in k..=l {
                        let starts = if ll < l { len - ll + 1 } else { m };
                        for mm in 0..starts {
                            let e: i64 = seq[mm..mm + ll].iter().sum();
                            ensure!(
                                e.rem_euclid(modulus) != 0,
                                "earlier window ({mm}, {ll}) beats ({m}, {l}) on {seq:?} P={modulus}"
                            );
                        }
                    }
                    windows += 1;
                    k += 1;
                }
            }
            let mut i = 0;
            while i < len {
                seq[i] += 1;
                if seq[i] < 4 {
                    break;
                }
                seq[i] = 0;
                i += 1;
            }
            if i == len {
                break;
            }
        }
    }
    Ok(format!(
        "all sequences of length <= 8 over [0,3], moduli 2..4, {windows} windows verified minimal"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 8: periodic fit recovery on the K33 table
// ---------------------------------------------------------------------------

fn c8_periodic_fit(_seed: Option<u64>) -> Check {
    let values: Vec<i64> = vec![1, 3, 6, 10, 12, 15, 19, 21, 24, 28];
    let table: BTreeMap<usize, i64> = (2..).zip(values).collect();
    let fit = ctx(fit_periodic(&table, 3), "fit_periodic")?;
    ensure!(fit.delta == rat_int(3), "slope {} != 3", fit.delta);
    ensure!(fit.period == 3, "period {} != 3", fit.period);
    let want = [rat_int(-6), rat_int(-6), rat_int(-5)];
    ensure!(
        fit.offsets == want,
        "offsets {:?} != [-6, -6, -5]",
        fit.offsets
    );
    ensure!(fit.exact, "fit marked inexact");
    for (&n, &v) in &table {
        if n as i64 > fit.threshold {
            ensure!(
                fit.value_at(n) == rat_int(v),
                "fitted value at n={n} misses the table"
            );
        }
    }
    Ok(format!(
        "slope 3, period 3, offsets [-6, -6, -5], threshold {}, exact",
        fit.threshold
    ))
}

// ---------------------------------------------------------------------------
// Criteria 9 and 10: extremal families and the bounded gap
// ---------------------------------------------------------------------------

static WIDTH_ONE_TABLE: OnceLock<std::result::Result<ExtremalTable, String>> = OnceLock::new();

/// The shared GF(2), width-1, rank ≤ 5 extremal table (computed once; ranks
/// ≤ 4 by full sweep, rank 5 in extension mode).
fn width_one_table() -> std::result::Result<ExtremalTable, String> {
    WIDTH_ONE_TABLE
        .get_or_init(|| {
            let spec = ctx(ClassSpec::new(gf(2), 1, vec![], 5), "class spec")?;
            let jobs = std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
                .min(8);
            ctx(ex_table_jobs(&spec, 5, jobs), "ex_table")
        })
        .clone()
}

/// Coordinates of `v` with respect to the echelon basis of `sp` (valid
/// whenever `v` lies in `sp`: echelon bases have unit pivot columns).
fn echelon_coords(v: &Vector, pivots: &[usize]) -> Vec<Fe> {
    pivots.iter().map(|&p| v.coords[p]).collect()
}

fn c9_extremal_families(_seed: Option<u64>) -> Check {
    let f2 = gf(2);
    let table = width_one_table()?;
    let expected: [(usize, i64); 6] = [(0, 0), (1, 1), (2, 3), (3, 5), (4, 7), (5, 9)];
    let values = table.values();
    for (n, v) in expected {
        ensure!(
            values.get(&n) == Some(&v),
            "ex({n}) = {:?}, expected {v}",
            values.get(&n)
        );
    }
    for (&n, entry) in &table.entries {
        ensure!(
            entry.exhaustive == (n <= 4),
            "entry {n}: exhaustive flag {} (full sweep through rank 4, extension at 5)",
            entry.exhaustive
        );
    }

    // Candidate middle patches: every linked 1-patch whose core is a
    // sub-multiset of at most two witness elements, with terminals drawn
    // from the core's span, deduplicated in span coordinates.
    let mut keys: BTreeSet<CandidateKey> = BTreeSet::new();
    let mut candidates: Vec<RootedConfiguration> = vec![];
    let mut raw = 0usize;
    for entry in table.entries.values() {
        let w = &entry.witness;
        let m = w.len();
        let mut index_sets: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
        for i in 0..m {
            for j in i + 1..m {
                index_sets.push(vec![i, j]);
            }
        }
        for idx in index_sets {
            let core_vecs: Vec<Vector> = idx.iter().map(|&i| w.vectors[i].clone()).collect();
            let sp = span(&f2, w.ambient_dim, &core_vecs);
            if sp.dim() == 0 {
                continue;
            }
            let points: Vec<Vector> = sp
                .all_vectors(&f2)
                .into_iter()
                .filter(|v| !v.is_zero())
                .collect();
            for l in &points {
                for rv in &points {
                    let core = ctx(
                        Configuration::new(f2.clone(), w.ambient_dim, core_vecs.clone()),
                        "candidate core",
                    )?;
                    let h = match RootedConfiguration::new(core, vec![l.clone()], vec![rv.clone()])
                    {
                        Ok(h) => h,
                        Err(_) => continue,
                    };
                    if h.violation().is_some() {
                        continue;
                    }
                    raw += 1;
                    if ctx(is_linked_patch(&h), "is_linked_patch")?.is_none() {
                        continue;
                    }
                    let pivots = sp.pivot_columns();
                    let mut core_key: Vec<Vec<Fe>> = core_vecs
                        .iter()
                        .map(|v| echelon_coords(v, &pivots))
                        .collect();
                    core_key.sort();
                    let key = (
                        core_key,
                        echelon_coords(l, &pivots),
                        echelon_coords(rv, &pivots),
                    );
                    if keys.insert(key) {
                        candidates.push(h);
                    }
                }
            }
        }
    }
    ensure!(
        !candidates.is_empty(),
        "no linked 1-patch candidates extracted"
    );

    // Grow each candidate in the frame G1 = ({e1}, (e1), (e1)),
    // G2 = (∅, (e1), (e1)) and compare against the table.
    let e1 = Vector::unit(1, 0);
    let g1 = ctx(
        RootedConfiguration::new(
            ctx(
                Configuration::new(f2.clone(), 1, vec![e1.clone()]),
                "G1 core",
            )?,
            vec![e1.clone()],
            vec![e1.clone()],
        ),
        "G1",
    )?;
    let g2 = ctx(
        RootedConfiguration::new(
            ctx(Configuration::new(f2.clone(), 1, vec![]), "G2 core")?,
            vec![e1.clone()],
            vec![e1.clone()],
        ),
        "G2",
    )?;
    let spec = ctx(ClassSpec::new(f2.clone(), 1, vec![], 5), "class spec")?;
    let target: BTreeSet<usize> = (1..=5).collect();
    let mut best_matches = 0usize;
    let mut winner = false;
    for h in &candidates {
        let rows = ctx(
            verify_extremal_family(&spec, &g1, h, &g2, &table),
            "verify family",
        )?;
        let mut matched: BTreeSet<usize> = BTreeSet::new();
        for row in &rows {
            if row.member_in_class {
                ensure!(
                    row.family_epsilon <= row.ex_value,
                    "family member at n = {} has {} points, beating ex = {} (soundness)",
                    row.n,
                    row.family_epsilon,
                    row.ex_value
                );
                if row.equal {
                    matched.insert(row.n);
                }
            }
        }
        best_matches = best_matches.max(matched.len());
        if matched == target {
            winner = true;
        }
    }
    ensure!(
        winner,
        "no candidate family matches ex(n) on all of n = 1..=5; best covered {best_matches}"
    );
    Ok(format!(
        "table [0,1,3,5,7,9] reproduced; {} deduplicated candidates (of {raw} rooted choices); \
         a family attains ex(n) for every n = 1..=5",
        candidates.len()
    ))
}

fn c10_bounded_gap(_seed: Option<u64>) -> Check {
    let table = width_one_table()?;
    let values = table.values();
    let fit = ctx(fit_periodic(&values, 2), "fit_periodic")?;
    ensure!(fit.exact, "the width-1 fit is not exact: {fit:?}");
    let (gap, at) = ctx(check_bounded_gap(&values, fit.delta), "check_bounded_gap")?;
    let tail_gap = values
        .iter()
        .filter(|(&n, _)| n as i64 > fit.threshold)
        .map(|(&n, &v)| rational_abs(&(rat_int(v) - fit.delta * rat_int(n as i64))))
        .max()
        .ok_or("no entries beyond the fit threshold")?;
    let max_offset = fit
        .offsets
        .iter()
        .map(rational_abs)
        .max()
        .ok_or("empty offset list")?;
    ensure!(
        tail_gap == max_offset,
        "gap over the fitted tail is {tail_gap}, max offset magnitude is {max_offset}"
    );
    ensure!(
        gap >= tail_gap,
        "global gap {gap} below the tail gap {tail_gap}"
    );
    Ok(format!(
        "max |ex(n) - {}n| = {gap}, first attained at n = {at}; tail gap {tail_gap} equals \
         max |offset| (period {}, threshold {})",
        fit.delta, fit.period, fit.threshold
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_one_passes() {
        let out = run_criterion(1);
        assert!(out.passed, "{}", out.detail);
        assert_eq!(out.number, 1);
        assert_eq!(out.name, CRITERIA[0]);
    }

    #[test]
    fn criteria_seven_and_eight_pass() {
        for n in [7usize, 8] {
            let out = run_criterion(n);
            assert!(out.passed, "criterion {n}: {}", out.detail);
        }
    }

    #[test]
    fn unknown_criterion_numbers_are_rejected() {
        assert!(!run_criterion(0).passed);
        assert!(!run_criterion(11).passed);
    }

    #[test]
    fn criterion_names_are_distinct() {
        let set: std::collections::BTreeSet<&str> = CRITERIA.iter().copied().collect();
        assert_eq!(set.len(), CRITERIA.len());
    }
}
