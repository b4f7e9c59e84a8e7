//! Batch command-line front end: extremal tables, periodic fits,
//! decompositions, linkedness reports, patch families, and the self-test
//! suite.  Inputs are JSON/CSV files in the shapes defined by `patchwork::io`;
//! reports go to stdout as JSON (or plain lines for `ex` and `selftest`).
//!
//! Exit codes: 0 success, 2 malformed input, 3 search guard exceeded,
//! 4 infeasible hypothesis, 1 anything else (including a non-exact `fit`
//! and self-test failures).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use patchwork::config::Configuration;
use patchwork::decompose::{
    decompose_nontrivial, decompose_product, no_clause_failed, path_decomposition,
    verify_nontrivial_decomposition, verify_path_decomposition, verify_product_decomposition,
};
use patchwork::extremal::{ex_table_jobs, fit_periodic, grow_family, verify_extremal_family};
use patchwork::io::{
    read_table_csv, write_table_exports, ClassSpecDto, ConfigDto, DecomposeReportDto,
    FamilyMemberDto, FamilyReportDto, LinkedReportDto, PatchDto, PeriodicFitDto,
};
use patchwork::patch::RootedConfiguration;
use patchwork::selftest;
use patchwork::structure::{
    branch_width, find_linked_bd, is_linked, width, BranchDecomposition, BwMode,
};
use patchwork::{Error, Result};

#[derive(Parser)]
#[command(
    name = "patchwork",
    about = "Exact computation with matroid configurations over small finite fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the extremal table of a minor-closed class and write
    /// CSV + JSON exports with one witness file per rank.
    Ex {
        /// Class specification JSON (field, width_bound, excluded_minors, rank_cap).
        #[arg(long)]
        class: PathBuf,
        /// Largest rank to tabulate.
        #[arg(long)]
        n_max: usize,
        /// Output directory for table.csv, table.json and witness_<n>.json.
        #[arg(long)]
        out: PathBuf,
        /// Enumeration shards run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit delta*n + a_i to an `n,ex` CSV table and print the fit as JSON.
    /// Exits 0 only when the fit reproduces every table entry exactly.
    Fit {
        /// Table CSV with rows `n,ex[,witness_json_path]`.
        #[arg(long)]
        table: PathBuf,
        /// Largest period to try.
        #[arg(long)]
        p_max: usize,
    },
    /// Decompose a configuration into a bounded product of patches and print
    /// the factor report (with independent clause checks) as JSON.
    Decompose {
        /// Configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Branch-width bound the construction may assume.
        #[arg(long)]
        w: usize,
        /// Number of factors.
        #[arg(long)]
        p: usize,
        /// Which construction to run.
        #[arg(long, value_enum, default_value_t = Mode::Product)]
        mode: Mode,
        /// Attempt the construction even when the size hypothesis fails
        /// (every step still verifies itself).  PATCHWORK_GUARD_OVERRIDE=1
        /// in the environment has the same effect.
        #[arg(long)]
        override_threshold: bool,
    },
    /// Report branch-width and linkedness: validate a supplied decomposition,
    /// or search for a minimum-width linked one.
    CheckLinked {
        /// Configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Optional branch decomposition JSON to validate instead of searching.
        #[arg(long)]
        bd: Option<PathBuf>,
    },
    /// Compose the family member G1 ∘ H^L ∘ G2 and print its statistics.
    Grow {
        /// Spanning start patch JSON.
        #[arg(long)]
        g1: PathBuf,
        /// Repeated middle patch JSON.
        #[arg(long)]
        h: PathBuf,
        /// End patch JSON.
        #[arg(long)]
        g2: PathBuf,
        /// Number of H repetitions.
        #[arg(long = "L")]
        l: usize,
    },
    /// Compare the family G1 ∘ H^L ∘ G2 against the enumerated extremal
    /// table of a class, rank by rank.
    VerifyFamily {
        /// Class specification JSON.
        #[arg(long)]
        class: PathBuf,
        /// Spanning start patch JSON.
        #[arg(long)]
        g1: PathBuf,
        /// Repeated middle patch JSON.
        #[arg(long)]
        h: PathBuf,
        /// End patch JSON.
        #[arg(long)]
        g2: PathBuf,
        /// Largest rank to tabulate and compare.
        #[arg(long)]
        n_max: usize,
        /// Enumeration shards run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the acceptance suite and print one pass/fail line per criterion.
    Selftest {
        /// Re-seed the randomized trials (the default is fixed and reproducible).
        #[arg(long)]
        seed: Option<u64>,
        /// Run a single criterion (1..=10) instead of all ten.
        #[arg(long)]
        only: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    /// Product of p patches glued along a branch decomposition.
    Product,
    /// Product with a non-trivial (strictly growing) first factor.
    Nontrivial,
    /// Path of linked q-patches with matching terminals.
    Patches,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidInput(_) => 2,
                Error::GuardExceeded { .. } => 3,
                Error::Hypothesis(_) => 4,
                Error::Internal(_) => 1,
            })
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Ex {
            class,
            n_max,
            out,
            jobs,
        } => cmd_ex(&class, n_max, &out, jobs),
        Command::Fit { table, p_max } => cmd_fit(&table, p_max),
        Command::Decompose {
            config,
            w,
            p,
            mode,
            override_threshold,
        } => cmd_decompose(&config, w, p, mode, override_threshold),
        Command::CheckLinked { config, bd } => cmd_check_linked(&config, bd.as_deref()),
        Command::Grow { g1, h, g2, l } => cmd_grow(&g1, &h, &g2, l),
        Command::VerifyFamily {
            class,
            g1,
            h,
            g2,
            n_max,
            jobs,
        } => cmd_verify_family(&class, &g1, &h, &g2, n_max, jobs),
        Command::Selftest { seed, only } => cmd_selftest(seed, only),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {} ({what}): {e}", path.display())))?;
    serde_json::from_str(&body)
        .map_err(|e| Error::invalid(format!("{} is not valid {what} JSON: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::internal(format!("report serialization failed: {e}")))?;
    println!("{body}");
    Ok(())
}

fn load_config(path: &Path) -> Result<Configuration> {
    read_json::<ConfigDto>(path, "configuration")?.into_config()
}

fn load_patch(path: &Path) -> Result<RootedConfiguration> {
    read_json::<PatchDto>(path, "patch")?.into_patch()
}

fn cmd_ex(class: &Path, n_max: usize, out: &Path, jobs: usize) -> Result<u8> {
    let spec = read_json::<ClassSpecDto>(class, "class specification")?.into_spec()?;
    let table = ex_table_jobs(&spec, n_max, jobs.max(1))?;
    for (n, e) in &table.entries {
        println!(
            "n = {n}: ex = {} ({})",
            e.ex_value,
            if e.exhaustive {
                "exhaustive"
            } else {
                "extension mode"
            }
        );
    }
    let csv = write_table_exports(&table, out)?;
    println!("wrote {}", csv.display());
    Ok(0)
}

fn cmd_fit(table: &Path, p_max: usize) -> Result<u8> {
    let values = read_table_csv(table)?;
    let fit = fit_periodic(&values, p_max)?;
    print_json(&PeriodicFitDto::from_fit(&fit))?;
    if fit.exact {
        Ok(0)
    } else {
        eprintln!("no exact fit with period <= {p_max}; best residual fit shown");
        Ok(1)
    }
}

fn override_requested(flag: bool) -> bool {
    flag || std::env::var("PATCHWORK_GUARD_OVERRIDE").is_ok_and(|v| v == "1")
}

fn cmd_decompose(config: &Path, w: usize, p: usize, mode: Mode, override_flag: bool) -> Result<u8> {
    let a = load_config(config)?;
    let ov = override_requested(override_flag);
    let report = match mode {
        Mode::Product => {
            let d = decompose_product(&a, w, p, ov)?;
            let clauses = verify_product_decomposition(&a, w, p, &d);
            DecomposeReportDto::from_product("product", &d, clauses)
        }
        Mode::Nontrivial => {
            let d = decompose_nontrivial(&a, w, p, ov)?;
            let clauses = verify_nontrivial_decomposition(&a, w, p, &d);
            DecomposeReportDto::from_product("nontrivial", &d, clauses)
        }
        Mode::Patches => {
            let d = path_decomposition(&a, w, p, ov)?;
            let clauses = verify_path_decomposition(&a, w, p, &d);
            DecomposeReportDto::from_path(&d, clauses)
        }
    };
    print_json(&report)?;
    if no_clause_failed(&report.clauses) {
        Ok(0)
    } else {
        // The constructions verify themselves step by step, so a returned
        // decomposition failing its own clause checker is a bug, not bad input.
        Err(Error::internal(
            "the construction returned a decomposition its clause checker rejects",
        ))
    }
}

fn cmd_check_linked(config: &Path, bd: Option<&Path>) -> Result<u8> {
    let a = load_config(config)?;
    let report = if let Some(bd_path) = bd {
        let t = read_json::<BranchDecomposition>(bd_path, "branch decomposition")?;
        let w = width(&t, &a)?;
        let violation = is_linked(&t, &a)?;
        LinkedReportDto {
            mode: "supplied".to_string(),
            elements: a.len(),
            width: w,
            linked: Some(violation.is_none()),
            violation: violation.map(|v| {
                format!(
                    "edges {} and {}: kappa {} < min path width {}",
                    v.edge_f, v.edge_g, v.kappa, v.min_path_width
                )
            }),
            note: None,
            decomposition: t,
        }
    } else {
        match find_linked_bd(&a) {
            Ok(t) => {
                let w = width(&t, &a)?;
                LinkedReportDto {
                    mode: "exact".to_string(),
                    elements: a.len(),
                    width: w,
                    linked: Some(true),
                    violation: None,
                    note: None,
                    decomposition: t,
                }
            }
            Err(Error::GuardExceeded { what, size, limit }) => {
                let bw = branch_width(&a, BwMode::Heuristic)?;
                LinkedReportDto {
                    mode: "heuristic".to_string(),
                    elements: a.len(),
                    width: bw.width,
                    linked: None,
                    violation: None,
                    note: Some(format!(
                        "{what} is guarded ({size} > {limit}); the width shown is an \
                         upper bound and linkedness was not determined"
                    )),
                    decomposition: bw.decomposition,
                }
            }
            Err(e) => return Err(e),
        }
    };
    print_json(&report)?;
    Ok(0)
}

fn cmd_grow(g1: &Path, h: &Path, g2: &Path, l: usize) -> Result<u8> {
    let g1 = load_patch(g1)?;
    let h = load_patch(h)?;
    let g2 = load_patch(g2)?;
    let member = grow_family(&g1, &h, &g2, l)?;
    print_json(&FamilyMemberDto::from_member(&member))?;
    Ok(0)
}

fn cmd_verify_family(
    class: &Path,
    g1: &Path,
    h: &Path,
    g2: &Path,
    n_max: usize,
    jobs: usize,
) -> Result<u8> {
    let spec = read_json::<ClassSpecDto>(class, "class specification")?.into_spec()?;
    let g1 = load_patch(g1)?;
    let h = load_patch(h)?;
    let g2 = load_patch(g2)?;
    let table = ex_table_jobs(&spec, n_max, jobs.max(1))?;
    let rows = verify_extremal_family(&spec, &g1, &h, &g2, &table)?;
    print_json(&FamilyReportDto::from_rows(&rows))?;
    Ok(0)
}

fn cmd_selftest(seed: Option<u64>, only: Option<usize>) -> Result<u8> {
    let outcomes = match only {
        Some(n) => vec![selftest::run_criterion_seeded(n, seed)],
        None => selftest::run_all_seeded(seed),
    };
    let mut all_passed = true;
    for o in &outcomes {
        let verdict = if o.passed { "pass" } else { "FAIL" };
        println!(
            "criterion {:02} {verdict} — {}: {}",
            o.number, o.name, o.detail
        );
        all_passed &= o.passed;
    }
    if all_passed {
        if outcomes.len() > 1 {
            println!("all {} criteria passed", outcomes.len());
        }
        Ok(0)
    } else {
        eprintln!("self-test failures detected");
        Ok(1)
    }
}
