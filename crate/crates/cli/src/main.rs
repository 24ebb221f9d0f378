use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bracelab::brace::validate_brace;
use bracelab::check::{DEFAULT_SAMPLES, DEFAULT_SEED};
use bracelab::filtration::verify_ideal_lattice;
use bracelab::flows::{passage_product, verify_flows_roundtrip, verify_main_recovery, QPrime};
use bracelab::prelie::{build_quotient_prelie, make_section, verify_prelie_axioms, BuildParams, SectionPolicy};
use bracelab::workbench::{
    enumerate_small, gen_heisenberg, gen_ring_brace, gen_trivial, properties_report, run_suite, BraceDocument,
    PreLieDocument, Suite, SuiteOptions,
};
use bracelab::{Brace, CheckMode, Error, Report};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bracelab", version, about = "Finite braces, their filtrations and pre-Lie rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Args, Clone)]
struct CheckArgs {
    #[arg(long, value_enum, default_value = "auto")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    count: u64,
    /// Print JSON instead of one line per clause.
    #[arg(long)]
    json: bool,
}

impl CheckArgs {
    fn mode(&self) -> CheckMode {
        match self.mode {
            Mode::Auto => CheckMode::Auto { seed: self.seed, count: self.count },
            Mode::Exhaustive => CheckMode::Exhaustive,
            Mode::Sampled => CheckMode::sampled(self.seed, self.count),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Trivial,
    Ring,
    Heisenberg,
}

#[derive(Subcommand)]
enum Command {
    /// Check the brace axioms.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Descent properties 1, 1', 1'' and the Engel condition.
    Props {
        file: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Ideal lattice: p^iA, ann(p^i), E-chain, star powers.
    Filtration {
        file: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Build the quotient pre-Lie ring on A/ann(p^{2k}).
    Prelie {
        file: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        /// `canonical` or `random:SEED`.
        #[arg(long, default_value = "canonical")]
        section: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Group of flows over the passage product on p^kA.
    Flows {
        file: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        /// Write the brace of flows on p^kA as a document.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Recover ⊙ on A/ann(p^{2k}) from •.
    Recover {
        file: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Enumerate all braces on a small group.
    Enumerate {
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<u32>,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Write one document per brace into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a check bundle: axioms, properties, filtration, prelie, flows or all.
    Suite {
        file: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        depth: Option<u32>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Write a generated brace document.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        exponents: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load(path: &Path) -> Result<(BraceDocument, Brace), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let doc = BraceDocument::from_json(&text)?;
    let b = doc.to_brace()?;
    Ok((doc, b))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_reports(reports: &[Report], json: bool) -> Result<(), Failure> {
    if json {
        println!("{}", serde_json::to_string_pretty(reports).expect("reports serialize"));
    } else {
        for r in reports {
            for n in &r.notices {
                println!("{}: notice: {n}", r.name);
            }
            for c in &r.clauses {
                let mut line = format!("{}/{}: {:?} ({:?}, {})", r.name, c.clause, c.verdict, c.mode.method, c.mode.count);
                if let Some(seed) = c.mode.seed {
                    line.push_str(&format!(" seed {seed}"));
                }
                if let Some(w) = &c.witness {
                    line.push_str(&format!(" witness {:?}", w.coords()));
                    for t in &w.trace {
                        line.push_str(&format!(" [{t}]"));
                    }
                }
                for n in &c.notes {
                    line.push_str(&format!(" -- {n}"));
                }
                println!("{line}");
            }
        }
    }
    if reports.iter().all(Report::passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn parse_section(s: &str) -> Result<SectionPolicy, Failure> {
    match s.split_once(':') {
        None if s == "canonical" => Ok(SectionPolicy::Canonical),
        Some(("random", seed)) => seed
            .parse()
            .map(|seed| SectionPolicy::Random { seed })
            .map_err(|_| Failure::Usage(format!("bad section seed {seed:?}"))),
        _ => Err(Failure::Usage(format!("section must be canonical or random:SEED, got {s:?}"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file, check } => {
            let doc: BraceDocument = {
                let text = fs::read_to_string(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
                BraceDocument::from_json(&text)?
            };
            // validation failures are check results here, not input errors
            match doc.to_brace() {
                Ok(b) => print_reports(&[validate_brace(&b, &check.mode())], check.json),
                Err(Error::NotABrace { reason, witness }) => {
                    println!("axioms: Fail -- {reason} witness {witness:?}");
                    Err(Failure::Checks)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Props { file, depth, check } => {
            let (_, b) = load(&file)?;
            print_reports(&[properties_report(&b, depth, &check.mode())?], check.json)
        }
        Command::Filtration { file, check } => {
            let (_, b) = load(&file)?;
            print_reports(&[verify_ideal_lattice(&b, &check.mode())?], check.json)
        }
        Command::Prelie { file, k, section, out, check } => {
            let (_, b) = load(&file)?;
            let mode = check.mode();
            let params = BuildParams::new(b.group(), k)?;
            let s = make_section(&b, params.k, parse_section(&section)?, &mode)?;
            let qp = build_quotient_prelie(&b, &params, &s, &mode)?;
            let ring = qp.ring();
            if let Some(out) = out {
                write(&out, &PreLieDocument::from_ring(&ring)?.to_json())?;
            }
            let mut rep = verify_prelie_axioms(&ring, &mode.with_count(1_000_000));
            for n in qp.notices() {
                rep.notice(n.clone());
            }
            rep.notice(format!("k = {}, carrier {}", params.k, qp.carrier().describe()));
            print_reports(&[rep], check.json)
        }
        Command::Flows { file, k, out, check } => {
            let (_, b) = load(&file)?;
            let mode = check.mode();
            let params = BuildParams::new(b.group(), k)?;
            if let Some(out) = out {
                let pr = passage_product(&b, &params, &mode)?;
                write(&out, &BraceDocument::flows(&pr.ring)?.to_json())?;
            }
            print_reports(&[verify_flows_roundtrip(&b, &params, &mode)?], check.json)
        }
        Command::Recover { file, k, check } => {
            let (_, b) = load(&file)?;
            let mode = check.mode();
            let params = BuildParams::new(b.group(), k)?;
            let s = make_section(&b, params.k, SectionPolicy::Canonical, &mode)?;
            let qp = build_quotient_prelie(&b, &params, &s, &mode)?;
            let mut rep = verify_main_recovery(&b, &qp, &mode)?;
            for t in QPrime::new(&qp)?.describe() {
                rep.notice(format!("q' term {} · {} (residue {})", t.coefficient, t.monomial, t.residue));
            }
            print_reports(&[rep], check.json)
        }
        Command::Enumerate { p, exponents, budget, out_dir } => {
            let e = enumerate_small(p, &exponents, budget)?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
                for (i, b) in e.braces.iter().enumerate() {
                    write(&dir.join(format!("brace_{i:04}.json")), &BraceDocument::from_brace(b)?.to_json())?;
                }
            }
            println!("{} braces ({} search nodes{})", e.count, e.nodes, if e.complete { "" } else { ", budget exhausted" });
            if e.complete {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Suite { file, suite, k, depth, check } => {
            let text = fs::read_to_string(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let doc = BraceDocument::from_json(&text)?;
            let suite: Suite = suite.parse()?;
            let opts = SuiteOptions { check: check.mode(), k, depth, ..SuiteOptions::default() };
            let result = run_suite(&doc, suite, &opts)?;
            if check.json {
                println!("{}", serde_json::to_string_pretty(&result).expect("results serialize"));
                return if result.passed { Ok(()) } else { Err(Failure::Checks) };
            }
            println!("{}", result.brace);
            print_reports(&result.reports, false)
        }
        Command::Gen { kind, p, exponents, s, out } => {
            let b = match kind {
                GenKind::Trivial => gen_trivial(p, &exponents)?,
                GenKind::Ring => {
                    let [alpha] = exponents[..] else {
                        return Err(Failure::Usage("ring braces take a single exponent".into()));
                    };
                    gen_ring_brace(p, alpha, s)?
                }
                GenKind::Heisenberg => gen_heisenberg(p)?,
            };
            let text = BraceDocument::from_brace(&b)?.to_json();
            match out {
                Some(path) => write(&path, &text),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
