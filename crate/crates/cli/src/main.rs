//! `egh`: command-line front end.
//!
//! Exit status: 0 when every certificate passes, 1 on input or usage
//! errors, 2 when a measured value exceeds a proved ceiling.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use egh_core::io;
use egh_core::quotients::{coset_space, orbit_space};
use egh_core::scenario::run_scenario;
use egh_core::smoothing::{default_embedding, greedy_net, smooth_theta, BumpSpec, NetSpec};
use egh_core::solver::{egh_distance, SearchConfig, SearchMode};
use egh_core::triples::{almost_inverse, perturb_theta, theta_as_approximation};
use egh_core::{Error, GSpace, Scalar};
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "egh", version, about = "Equivariant Gromov-Hausdorff approximations of finite metric spaces")]
struct Cli {
    /// Exact rational arithmetic instead of floats.
    #[arg(long, global = true)]
    exact: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Bound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Tent,
    Indicator,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a space file.
    Validate { space: PathBuf },
    /// Print a group (the full isometry group for a bare space) with its
    /// uniform metric and orbits.
    Group {
        input: PathBuf,
        /// Restrict to the subgroup generated by these element indices.
        #[arg(long, value_delimiter = ',')]
        generators: Option<Vec<usize>>,
    },
    /// Equivariant GH distance between two pairs.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Node budget per direction.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Score a triple and certify its θ against the group ceilings.
    CheckTriple { triple: PathBuf },
    /// Build and certify the almost-inverse of a triple.
    Invert { triple: PathBuf },
    /// Certify a replacement θ (comma-separated list or JSON file).
    CertifyTheta {
        triple: PathBuf,
        #[arg(long)]
        theta2: String,
    },
    /// Smooth θ through the default embedding of the target group.
    Smooth {
        triple: PathBuf,
        /// Defaults to 5ε.
        #[arg(long)]
        net_radius: Option<String>,
        /// Defaults to 10ε.
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, value_enum, default_value = "tent")]
        profile: Profile,
    },
    /// Orbit space, or coset space of the subgroup given by generators.
    Quotient {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        cosets: Option<Vec<usize>>,
    },
    /// Run a convergence scenario.
    Scenario {
        scenario: PathBuf,
        /// Override the file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the file's node budget.
        #[arg(long)]
        budget: Option<u64>,
        /// Also write the per-step table as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
}

struct Outcome {
    report: Value,
    /// A measured value exceeded its ceiling.
    violated: bool,
    /// The input was rejected (report still written).
    rejected: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self {
            report,
            violated: false,
            rejected: false,
        }
    }

    fn certified(report: Value, pass: bool) -> Self {
        Self {
            report,
            violated: !pass,
            rejected: false,
        }
    }
}

fn parse_scalar<S: Scalar>(text: &str) -> Result<S, Error> {
    S::from_json(&Value::String(text.to_string()))
}

fn theta_list(arg: &str) -> Result<Vec<usize>, Error> {
    let inline: Result<Vec<usize>, _> = arg.split(',').map(|s| s.trim().parse()).collect();
    if let Ok(list) = inline {
        return Ok(list);
    }
    let doc = io::read_document(Path::new(arg))?;
    let list = doc.get("theta2").or_else(|| doc.get("theta")).unwrap_or(&doc);
    serde_json::from_value(list.clone())
        .map_err(|_| Error::Parse(format!("{arg}: expected a list of element indices")))
}

fn run<S: Scalar>(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Validate { space } => {
            let doc = io::read_document(space)?;
            let report = io::validate_document::<S>(&doc)?;
            let valid = report.valid;
            Ok(Outcome {
                report: io::report("validation", &report)?,
                violated: false,
                rejected: !valid,
            })
        }
        Command::Group { input, generators } => {
            let mut g: GSpace<S> = io::load_gspace(input)?;
            if let Some(gens) = generators {
                let sub = egh_core::subgroup_closure(g.group(), gens)?;
                g = GSpace::new(g.space().clone(), sub)?;
            }
            g.group().verify_axioms()?;
            let mut doc = io::gspace_to_json(&g);
            let extra = json!({
                "kind": "group",
                "order": g.order(),
                "identity": g.group().identity(),
                "uniform_metric": io::space_to_json(g.group_metric())["dist"],
                "orbits": g.group().orbits(),
            });
            doc.as_object_mut()
                .expect("object")
                .extend(extra.as_object().expect("object").clone());
            Ok(Outcome::ok(doc))
        }
        Command::Dist { a, b, mode, budget } => {
            let a: GSpace<S> = io::load_gspace(a)?;
            let b: GSpace<S> = io::load_gspace(b)?;
            let cfg = SearchConfig {
                max_nodes: *budget,
                mode: match mode {
                    Mode::Exact => SearchMode::Exact,
                    Mode::Bound => SearchMode::UpperBound,
                },
                ..SearchConfig::default()
            };
            let cert = egh_distance(&a, &b, &cfg)?;
            Ok(Outcome::ok(io::report("distance", &cert)?))
        }
        Command::CheckTriple { triple } => {
            let tf = io::load_triple::<S>(triple)?;
            let theta = theta_as_approximation(&tf.source, &tf.target, &tf.triple)?;
            let pass = theta.all_pass();
            let body = json!({
                "order": tf.triple.order().to_json(),
                "triple": tf.triple,
                "theta": theta,
            });
            Ok(Outcome::certified(io::report("triple", &body)?, pass))
        }
        Command::Invert { triple } => {
            let tf = io::load_triple::<S>(triple)?;
            let inv = almost_inverse(&tf.source, &tf.target, &tf.triple)?;
            let pass = inv.report.all_pass();
            let mut doc = io::report("inverse", &inv)?;
            doc["inverse"] = io::triple_to_json(&tf.target, &tf.source, &inv.triple);
            Ok(Outcome::certified(doc, pass))
        }
        Command::CertifyTheta { triple, theta2 } => {
            let tf = io::load_triple::<S>(triple)?;
            let theta2 = theta_list(theta2)?;
            let cert = perturb_theta(&tf.source, &tf.target, &tf.triple, &theta2)?;
            let pass = cert.report.all_pass();
            Ok(Outcome::certified(io::report("perturbed_theta", &cert)?, pass))
        }
        Command::Smooth {
            triple,
            net_radius,
            cutoff,
            profile,
        } => {
            let tf = io::load_triple::<S>(triple)?;
            let eps = tf.triple.order();
            let radius: S = match net_radius {
                Some(r) => parse_scalar(r)?,
                None => eps.times(5),
            };
            let net = if radius > S::zero() {
                greedy_net(&tf.source, radius)?
            } else {
                NetSpec::all(&tf.source)
            };
            let cutoff = cutoff.unwrap_or_else(|| {
                if eps > S::zero() {
                    10.0 * eps.to_f64_lossy()
                } else {
                    smallest_gap(&tf.source)
                }
            });
            let bump = match profile {
                Profile::Tent => BumpSpec::tent(cutoff),
                Profile::Indicator => BumpSpec::indicator(cutoff),
            };
            let emb = default_embedding(&tf.target);
            let report = smooth_theta(&tf.source, &tf.target, &tf.triple, &emb, &net, &bump)?;
            let pass = report.within_ceiling
                && report
                    .recertification
                    .as_ref()
                    .is_none_or(|r| r.report.all_pass());
            let body = json!({
                "net": net,
                "bump": bump,
                "embedding": { "lower": emb.lower, "upper": emb.upper, "dimension": emb.dimension() },
                "smoothing": report,
            });
            Ok(Outcome::certified(io::report("smoothing", &body)?, pass))
        }
        Command::Quotient { input, cosets } => {
            let g: GSpace<S> = io::load_gspace(input)?;
            let doc = match cosets {
                None => {
                    let q = orbit_space(&g)?;
                    let body = json!({
                        "classes": q.classes,
                        "space": io::space_to_json(&q.space),
                    });
                    io::report("orbit_space", &body)?
                }
                Some(gens) => {
                    let h = g.group().closure_indices(gens)?;
                    let c = coset_space(&g, &h)?;
                    let body = json!({
                        "subgroup": h,
                        "classes": c.quotient.classes,
                        "space": io::space_to_json(&c.quotient.space),
                        "gap": c.gap.as_ref().map_or(json!("inf"), S::to_json),
                    });
                    io::report("coset_space", &body)?
                }
            };
            Ok(Outcome::ok(doc))
        }
        Command::Scenario {
            scenario,
            seed,
            budget,
            csv,
        } => {
            let mut s = io::load_scenario::<S>(scenario)?;
            if let Some(seed) = seed {
                s.seed = *seed;
            }
            if let Some(budget) = budget {
                s.budget = *budget;
            }
            let report = run_scenario(&s)?;
            if let Some(path) = csv {
                fs::write(path, report.to_csv())?;
            }
            let pass = report.certified;
            Ok(Outcome::certified(io::report("scenario", &report)?, pass))
        }
    }
}

/// Smallest positive uniform distance in the group, or 1 for a trivial
/// group: the narrowest cutoff that still sees each element itself.
fn smallest_gap<S: Scalar>(g: &GSpace<S>) -> f64 {
    let m = g.group_metric();
    (0..m.len())
        .flat_map(|a| ((a + 1)..m.len()).map(move |b| m.d(a, b).to_f64_lossy()))
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
        .unwrap_or(1.0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = std::env::var("EGH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = if cli.exact { run::<BigRational>(&cli) } else { run::<f64>(&cli) };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if outcome.rejected {
        ExitCode::from(1)
    } else if outcome.violated {
        eprintln!("error: a certified ceiling was violated");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
