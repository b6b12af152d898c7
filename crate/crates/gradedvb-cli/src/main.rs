use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gradedvb::cocycles::{check_cocycle, routes_agree, Route, SnCocycle};
use gradedvb::cores::building_bundles;
use gradedvb::decomp::{
    all_orderings, build_decomposition, check_order_independence, sample_orderings, two_subsets,
    verify_decomposition, DecompositionInput,
};
use gradedvb::exec::{with_jobs, Exec};
use gradedvb::nman::{self, GradedMorphism};
use gradedvb::partitions::{check_n, cube_objects, integer_partitions, set_partitions, sgn};
use gradedvb::snvb::{compose_general, compose_sym, GeneralDecMorphism, SymModel, SymMorphism};
use gradedvb::suite::{render, run_all, SuiteConfig};
use gradedvb::{Error, OrderedPartition, Subset};

#[derive(Parser)]
#[command(name = "gradedvb", version, about = "Exact checks for split [n]-manifolds and symmetric n-fold vector bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sign of an ordered partition such as "4,5,6|1|2,3".
    Sign {
        #[arg(long)]
        partition: String,
    },
    /// List the integer partitions P(n), or the set partitions of {1..n} with their signs.
    Partitions {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sets: bool,
    },
    /// Compose two morphism files: the result is A∘B, so B is applied first.
    Compose {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
    },
    /// Verify the cocycle conditions of a cocycle file.
    VerifyCocycle {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = RouteArg::All)]
        route: RouteArg,
    },
    /// Print the objects and building bundles of the ρ-core.
    Core {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        partition: String,
        /// Building dims a_1,…,a_n; printed symbolically when absent.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Build a decomposition from Σ and the highest order core decompositions.
    Decompose {
        file: PathBuf,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
        /// Number of orderings compared when not all are checked.
        #[arg(long, default_value_t = 20)]
        orderings: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Cap on every n used by the criteria.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Worker threads; without it the suite runs on one thread.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Nman,
    Sym,
    General,
    All,
}

enum Failure {
    /// Malformed or inconsistent input: exit code 2.
    Input(String),
    /// A check ran and failed: exit code 1.
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn sign(partition: &str) -> Outcome {
    let rho = OrderedPartition::parse(partition, None)?;
    Ok(format!("{}\n", if sgn(&rho) > 0 { "+1" } else { "-1" }))
}

fn partitions(n: usize, sets: bool) -> Outcome {
    check_n(n)?;
    if n == 0 {
        return Err(Failure::Input("n must be at least 1".into()));
    }
    let mut s = String::new();
    if sets {
        for rho in set_partitions(&Subset::full(n)) {
            let _ = writeln!(s, "{rho} {}", if sgn(&rho) > 0 { "+1" } else { "-1" });
        }
    } else {
        for p in integer_partitions(n) {
            let _ = writeln!(s, "{p}");
        }
    }
    Ok(s)
}

fn first_keyword(text: &str) -> Option<&str> {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'))?.split_whitespace().next()
}

fn compose(a: &Path, b: &Path, out: Option<&Path>) -> Outcome {
    let (ta, tb) = (read(a)?, read(b)?);
    let (ka, kb) = (first_keyword(&ta), first_keyword(&tb));
    if ka != kb {
        return Err(Failure::Input(format!("cannot compose a {} file with a {} file", ka.unwrap_or("empty"), kb.unwrap_or("empty"))));
    }
    let text = match ka {
        Some("morphism") => {
            let f = GradedMorphism::from_text(&ta).map_err(|e| located(a, e))?;
            let g = GradedMorphism::from_text(&tb).map_err(|e| located(b, e))?;
            nman::compose(&f, &g)?.to_text()
        }
        Some("symmorphism") => {
            let f = SymMorphism::from_text(&ta).map_err(|e| located(a, e))?;
            let g = SymMorphism::from_text(&tb).map_err(|e| located(b, e))?;
            compose_sym(&f, &g)?.to_text()
        }
        Some("decmorphism") => {
            let f = GeneralDecMorphism::from_text(&ta).map_err(|e| located(a, e))?;
            let g = GeneralDecMorphism::from_text(&tb).map_err(|e| located(b, e))?;
            compose_general(&f, &g)?.to_text()
        }
        other => return Err(Failure::Input(format!("{}: unknown file kind {:?}", a.display(), other.unwrap_or("")))),
    };
    match out {
        Some(path) => {
            write_out(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn verify_cocycle(file: &Path, route: RouteArg) -> Outcome {
    let c = SnCocycle::from_text(&read(file)?).map_err(|e| located(file, e))?;
    let routes: Vec<Route> = match route {
        RouteArg::Nman => vec![Route::Nman],
        RouteArg::Sym => vec![Route::Sym],
        RouteArg::General => vec![Route::General],
        RouteArg::All => vec![Route::Nman, Route::Sym, Route::General],
    };
    let mut s = String::new();
    let mut ok = true;
    for r in &routes {
        let report = check_cocycle(&c, *r, Exec::Sequential)?;
        ok &= report.passed();
        let _ = writeln!(
            s,
            "{} route={r} triple_checks={} violations={}",
            if report.passed() { "PASS" } else { "FAIL" },
            report.triples_checked,
            report.violations.len()
        );
        s.push_str(&report.render(&c.cover));
    }
    if routes.len() > 1 {
        let agree = routes_agree(&c, Exec::Sequential)?;
        ok &= agree;
        let _ = writeln!(s, "{} routes agree", if agree { "PASS" } else { "FAIL" });
    }
    print!("{s}");
    if ok {
        Ok(String::new())
    } else {
        Err(Failure::Verification)
    }
}

fn core(n: usize, partition: &str, dims: Option<&str>) -> Outcome {
    check_n(n)?;
    let rho = OrderedPartition::parse(partition, Some(n))?.canonical();
    let model = match dims {
        Some(d) => {
            let dims = d
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| Failure::Input(format!("bad dimension {x:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if dims.len() != n {
                return Err(Failure::Input(format!("{} dims given for n = {n}", dims.len())));
            }
            Some(SymModel::new(dims)?)
        }
        None => None,
    };
    let mut s = String::new();
    let _ = writeln!(s, "core {rho} n={n}");
    let objs: Vec<String> = cube_objects(&rho).iter().map(|o| o.to_string()).collect();
    let _ = writeln!(s, "objects {}", objs.join(" "));
    let placeholder = SymModel::new(vec![1; n])?;
    for (set, dim) in building_bundles(&rho, model.as_ref().unwrap_or(&placeholder))? {
        match model {
            Some(_) => {
                let _ = writeln!(s, "building {set} {dim}");
            }
            None => {
                let _ = writeln!(s, "building {set} a_{}", set.len());
            }
        }
    }
    Ok(s)
}

fn decompose(file: &Path, out: Option<&Path>, count: usize, seed: u64) -> Outcome {
    let input = DecompositionInput::from_text(&read(file)?).map_err(|e| located(file, e))?;
    let n = input.sigma.model.n();
    let built = build_decomposition(&input, &two_subsets(n)).map_err(|e| match e {
        Error::Incompatible(msg) => {
            println!("FAIL compatibility: {msg}");
            Failure::Verification
        }
        other => other.into(),
    })?;
    let mut report = String::new();
    let verified = verify_decomposition(&built, &input);
    let _ = writeln!(
        report,
        "{} restrictions: {}",
        if verified.is_ok() { "PASS" } else { "FAIL" },
        verified.as_ref().map_or_else(|e| e.to_string(), |_| "Σ and every core decomposition are reproduced".into())
    );
    let orderings = if all_orderings(n).len() <= count {
        all_orderings(n)
    } else {
        sample_orderings(&mut gradedvb::random::rng(seed), n, count)
    };
    let independent = check_order_independence(&input, &orderings, Exec::Sequential)?;
    let _ = writeln!(
        report,
        "{} order independence: {} orderings give identical results",
        if independent { "PASS" } else { "FAIL" },
        orderings.len()
    );
    let text = built.trimmed().to_text();
    match out {
        Some(path) => write_out(path, &text)?,
        None => print!("{text}"),
    }
    print!("{report}");
    if verified.is_ok() && independent {
        Ok(String::new())
    } else {
        Err(Failure::Verification)
    }
}

fn selftest(n: Option<usize>, seed: u64, jobs: Option<usize>) -> Outcome {
    if let Some(n) = n {
        check_n(n)?;
    }
    let exec = match jobs {
        Some(j) if j > 1 => Exec::default(),
        _ => Exec::Sequential,
    };
    let cfg = SuiteConfig { seed, max_n: n, exec };
    let results = with_jobs(jobs, || run_all(&cfg));
    print!("{}", render(&cfg, &results));
    if results.iter().all(|r| r.passed) {
        Ok(String::new())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Sign { partition } => sign(&partition),
        Command::Partitions { n, sets } => partitions(n, sets),
        Command::Compose { a, b, out } => compose(&a, &b, out.as_deref()),
        Command::VerifyCocycle { file, route } => verify_cocycle(&file, route),
        Command::Core { n, partition, dims } => core(n, &partition, dims.as_deref()),
        Command::Decompose { file, out, orderings, seed } => decompose(&file, out.as_deref(), orderings, seed),
        Command::Selftest { n, seed, jobs } => selftest(n, seed, jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
