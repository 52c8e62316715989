use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ttc_core::axioms::{self, Axiom, AxiomVerdict};
use ttc_core::harness::{self, Theorem};
use ttc_core::io::{self, Labels};
use ttc_core::matrix::{birkhoff_decompose, decompose_within, ConstrainedDecomposition};
use ttc_core::rule::TtcRule;
use ttc_core::ttc::ttc_traced;
use ttc_core::{limits, AssignmentRule, Domain, Error, Rational};

#[derive(Parser)]
#[command(name = "ttc-verify", version, about = "Top Trading Cycles and its axioms, in exact arithmetic")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run TTC on a profile.
    Ttc {
        #[arg(long)]
        profile: PathBuf,
        /// Comma-separated endowment, agent by agent (default: the objects in file order).
        #[arg(long)]
        endowment: Option<String>,
        /// Include the round-by-round pointing graphs.
        #[arg(long)]
        trace: bool,
    },
    /// Check one axiom for a matrix, or for the TTC rule over a domain.
    Check(CheckArgs),
    /// Birkhoff decomposition, optionally restricted to an ex-post axiom's permutations.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, requires = "within")]
        profile: Option<PathBuf>,
        /// ep-ir, ep-pareto or ep-pair
        #[arg(long, requires = "profile")]
        within: Option<String>,
        #[arg(long)]
        endowment: Option<String>,
    },
    /// Generate a domain, or report the FPT/FTT conditions of one.
    Domain {
        #[arg(long, value_enum, conflicts_with = "check", requires = "n")]
        gen: Option<DomainKind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Sweep a theorem's axiom bundle for TTC over every profile of a domain.
    Verify {
        #[arg(long)]
        theorem: String,
        #[command(flatten)]
        domain: DomainSource,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Raise the size cap (same as setting TTC_VERIFY_MAX_N).
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Reproduce one of the worked examples.
    Repro {
        #[command(subcommand)]
        which: Repro,
    },
    /// Enumerate every deterministic two-agent rule and keep those satisfying
    /// top-strategy-proofness, IR and pair efficiency.
    Uniqueness {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Domain file (default: both orders of two objects).
        #[arg(long)]
        domain: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// sd-ir, sd-pareto, sd-pair, ep-ir, ep-pareto, ep-pair, sd-top-sp, sd-sp
    #[arg(long)]
    axiom: String,
    #[arg(long, conflicts_with = "rule")]
    matrix: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Check a rule instead of a matrix; only `ttc` is built in.
    #[arg(long)]
    rule: Option<String>,
    #[command(flatten)]
    domain: DomainSource,
    #[arg(long)]
    endowment: Option<String>,
}

#[derive(Args)]
struct DomainSource {
    #[arg(long, conflicts_with = "generate")]
    domain: Option<PathBuf>,
    /// Generate the domain instead of reading it.
    #[arg(long = "gen", value_enum)]
    generate: Option<DomainKind>,
    /// Number of objects for --gen.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Repro {
    Example1 {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Comma-separated values of b in [0, 1].
        #[arg(long, default_value = "0,1/4,1/2,3/4,1")]
        b: String,
    },
    Example2,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainKind {
    Unrestricted,
    MinimalFpt,
    MinimalFtt,
}

fn generate(kind: DomainKind, n: usize) -> Result<Domain, Error> {
    match kind {
        DomainKind::Unrestricted => Ok(Domain::unrestricted(n)),
        DomainKind::MinimalFpt => Domain::minimal_fpt(n),
        DomainKind::MinimalFtt => Domain::minimal_ftt(n),
    }
}

/// What a subcommand produced: a JSON document and whether it "holds".
struct Outcome {
    json: Value,
    holds: bool,
}

fn ok(json: Value) -> Outcome {
    Outcome { json, holds: true }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn endowment_list(e: &Option<String>) -> Option<Vec<String>> {
    e.as_deref().map(io::parse_name_list)
}

impl DomainSource {
    fn load(&self) -> Result<(Labels, Domain), Error> {
        match (&self.domain, self.generate) {
            (Some(path), _) => io::read_domain(&read(path)?, None),
            (None, Some(kind)) => {
                let n = self.n.ok_or_else(|| Error::Input("--gen needs --n N".into()))?;
                Ok((Labels::numeric(n), generate(kind, n)?))
            }
            (None, None) => Err(Error::Input("give --domain FILE or --gen KIND --n N".into())),
        }
    }
}

fn verdict_json(axiom: Axiom, labels: &Labels, v: &AxiomVerdict) -> Value {
    json!({
        "axiom": axiom,
        "labels": labels.names(),
        "holds": v.holds,
        "witness": v.witness,
    })
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Ttc { profile, endowment, trace } => {
            let e = endowment_list(&endowment);
            let (labels, profile) = io::read_profile(&read(&profile)?, e.as_deref())?;
            let (assignment, rounds) = ttc_traced(&profile);
            let mut out = json!({
                "labels": labels.names(),
                "profile": io::profile_json(&labels, &profile),
                "assignment": io::assignment_json(&labels, &assignment),
            });
            if trace {
                out["trace"] = serde_json::to_value(&rounds)?;
            }
            Ok(ok(out))
        }

        Command::Check(args) => check(args),

        Command::Decompose { matrix, profile, within, endowment } => {
            let text = read(&matrix)?;
            match (profile, within) {
                (Some(profile), Some(within)) => {
                    let axiom: Axiom = within.parse()?;
                    let e = endowment_list(&endowment);
                    let file = io::read_preference_file(&read(&profile)?)?;
                    let labels = file.labels(e.as_deref())?;
                    let profile = file.profile(&labels)?;
                    let m = io::read_matrix(&text, &file.objects, &labels)?;
                    let allowed = axioms::admissible_assignments(axiom, &profile)?;
                    Ok(match decompose_within(&m, &allowed)? {
                        ConstrainedDecomposition::Feasible { decomposition } => ok(json!({
                            "labels": labels.names(),
                            "within": axiom,
                            "decomposition": io::decomposition_json(&labels, &decomposition),
                        })),
                        ConstrainedDecomposition::Infeasible { certificate } => Outcome {
                            json: json!({
                                "labels": labels.names(),
                                "within": axiom,
                                "certificate": certificate,
                            }),
                            holds: false,
                        },
                    })
                }
                _ => {
                    let m = io::read_matrix_standalone(&text)?;
                    let labels = Labels::numeric(m.n());
                    let d = birkhoff_decompose(&m);
                    Ok(ok(json!({
                        "n": m.n(),
                        "decomposition": io::decomposition_json(&labels, &d),
                    })))
                }
            }
        }

        Command::Domain { gen, n, check } => match (gen, check) {
            (Some(kind), _) => {
                let n = n.expect("clap requires --n");
                let d = generate(kind, n)?;
                Ok(ok(io::domain_json(&Labels::numeric(n), &d)))
            }
            (None, Some(path)) => {
                let (labels, d) = io::read_domain(&read(&path)?, None)?;
                let name = |x: ttc_core::ObjectId| labels.name(x).to_string();
                let pair = d.missing_pair().map(|(a, b)| vec![name(a), name(b)]);
                let triple = d.missing_triple().ok().map(|t| t.map(|(a, b, c)| vec![name(a), name(b), name(c)]));
                Ok(ok(json!({
                    "n": d.n(),
                    "preferences": d.len(),
                    "fpt": pair.is_none(),
                    "missing_pair": pair,
                    "ftt": triple.as_ref().map(|t| t.is_none()),
                    "missing_triple": triple.flatten(),
                })))
            }
            (None, None) => Err(Error::Input("give --gen KIND --n N, or --check FILE".into())),
        },

        Command::Verify { theorem, domain, jobs, max_n: _ } => {
            let theorem: Theorem = theorem.parse()?;
            let (labels, domain) = domain.load()?;
            if let Err(e) = harness::check_domain_condition(&domain, theorem) {
                return Err(rename_objects(e, &labels));
            }
            let report = harness::verify_ttc_axioms(&domain, theorem, jobs)?;
            eprintln!(
                "theorem {theorem}: {} profiles in {:.2?}",
                report.profiles_checked, report.wall_time
            );
            Ok(Outcome { holds: report.holds(), json: serde_json::to_value(&report)? })
        }

        Command::Repro { which: Repro::Example1 { n, b } } => {
            let bs = io::parse_name_list(&b)
                .iter()
                .map(|s| s.parse::<Rational>().map_err(|e| Error::Input(format!("b = `{s}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let report = harness::repro_example1(n, &bs)?;
            Ok(Outcome { holds: report.all_as_expected, json: serde_json::to_value(&report)? })
        }

        Command::Repro { which: Repro::Example2 } => {
            let report = harness::repro_example2()?;
            Ok(Outcome { holds: report.assertions.all(), json: serde_json::to_value(&report)? })
        }

        Command::Uniqueness { n, domain } => {
            let domain = match domain {
                Some(path) => io::read_domain(&read(&path)?, None)?.1,
                None => Domain::unrestricted(n),
            };
            if domain.n() != n {
                return Err(Error::SizeMismatch { expected: n, found: domain.n() });
            }
            let report = harness::uniqueness_n2(&domain)?;
            Ok(Outcome { holds: report.unique_survivor_is_ttc, json: serde_json::to_value(&report)? })
        }
    }
}

fn check(args: CheckArgs) -> Result<Outcome, Error> {
    let axiom: Axiom = args.axiom.parse()?;
    if let Some(rule) = &args.rule {
        if rule != "ttc" {
            return Err(Error::Input(format!("unknown rule `{rule}`; only `ttc` is built in")));
        }
    }
    if axiom.is_rule_level() {
        if args.rule.is_none() {
            return Err(Error::Input(format!("{axiom} needs --rule ttc and a domain")));
        }
        let (labels, domain) = args.domain.load()?;
        let rule = TtcRule::new(domain.n());
        let v = match axiom {
            Axiom::SdTopSp => axioms::check_sd_top_sp(&rule, &domain)?,
            _ => axioms::check_sd_sp(&rule, &domain)?,
        };
        return Ok(Outcome { holds: v.holds, json: verdict_json(axiom, &labels, &v) });
    }

    let profile_path = args
        .profile
        .as_ref()
        .ok_or_else(|| Error::Input(format!("{axiom} needs --profile")))?;
    let e = endowment_list(&args.endowment);
    let file = io::read_preference_file(&read(profile_path)?)?;
    let labels = file.labels(e.as_deref())?;
    let profile = file.profile(&labels)?;
    let m = match (&args.matrix, &args.rule) {
        (Some(path), _) => io::read_matrix(&read(path)?, &file.objects, &labels)?,
        (None, Some(_)) => TtcRule::new(profile.n()).outcome(&profile)?,
        (None, None) => return Err(Error::Input("give --matrix FILE or --rule ttc".into())),
    };
    let v = axiom.check(&m, &profile)?;
    let mut out = verdict_json(axiom, &labels, &v);
    out["matrix"] = io::matrix_json(&labels, &m);
    Ok(Outcome { holds: v.holds, json: out })
}

/// Domain-condition errors name objects as `x3`; say the user's names instead.
fn rename_objects(e: Error, labels: &Labels) -> Error {
    let name = |s: String| {
        s.strip_prefix('x')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k < labels.n())
            .map(|k| labels.names()[k].clone())
            .unwrap_or(s)
    };
    match e {
        Error::NotFpt(a, b) => Error::NotFpt(name(a), name(b)),
        Error::NotFtt(a, b, c) => Error::NotFtt(name(a), name(b), name(c)),
        other => other,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Verify { max_n: Some(k), .. } = &cli.command {
        // Read back through `limits`, like the environment variable.
        std::env::set_var(limits::MAX_N_ENV, k.to_string());
    }
    if let Some(k) = limits::env_override() {
        eprintln!("warning: size caps overridden, n <= {k}; large runs may take very long");
    }
    let out = cli.out;
    match run(cli.command) {
        Ok(outcome) => {
            let mut text = serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize");
            text.push('\n');
            let written = match &out {
                Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if outcome.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
