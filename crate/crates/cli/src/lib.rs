//! Command dispatch for the `bnformat` binary.
//!
//! Exit status: 0 pass, 1 fail, 2 inconclusive, 3 usage or parse error.
//! Verdicts go to the output stream and diagnostics to the error stream.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use bnformat::dyadic::{inverse_tss, transform_tss};
use bnformat::lts::{check_property, derive_lts, equivalence_class, property_implies, HASSE};
use bnformat::spec_file::{parse_lts_tsv, parse_spec_file, render_tss, SpecFile};
use bnformat::stypes::{check_rule_format, legacy_eta_check};
use bnformat::{Bounds, DyadicKind, LtsError, PropertyId, Shape, Tss, Verdict};

/// Environment variable holding default bounds as `height,labels,rounds`.
pub const BOUNDS_ENV: &str = "BNFORMAT_BOUNDS";

pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bnformat", version, about = "Checks transition system specifications for bounded nondeterminism")]
struct Cli {
    /// Output format for verdicts and reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args, Debug, Clone, Copy)]
struct BoundArgs {
    /// Largest term height in the bounded universe.
    #[arg(long)]
    height: Option<usize>,
    /// Number of family indices in the bounded universe.
    #[arg(long)]
    labels: Option<u32>,
    /// Saturation round limit.
    #[arg(long)]
    rounds: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Checks the rule format for a dyadic reading and a measure.
    Check {
        file: PathBuf,
        /// Dyadic kind such as d1.id or d4.id; defaults to the kind of a dyadic file.
        #[arg(long)]
        kind: Option<DyadicKind>,
        /// Name of the measure block to use.
        #[arg(long)]
        strat: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Prints the dyadic specification for a kind.
    Transform {
        file: PathBuf,
        #[arg(long)]
        kind: DyadicKind,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Derives the bounded LTS of a specification.
    Derive {
        file: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Reports the largest branching set of every property over an LTS file.
    Props { lts: PathBuf },
    /// Prints the implication order, or the equivalence class of a property.
    Lattice {
        #[arg(long)]
        class: Option<PropertyId>,
    },
    /// Runs the η-type check with a named support map.
    Legacy {
        file: PathBuf,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        strat: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

/// Default bounds: the environment variable if set, otherwise `3,3,50`.
pub fn default_bounds(env: Option<&str>) -> anyhow::Result<Bounds> {
    match env {
        Some(s) => s.parse().map_err(|e| anyhow!("{BOUNDS_ENV}: {e}")),
        None => Ok(Bounds::default()),
    }
}

fn bounds(args: BoundArgs) -> anyhow::Result<Bounds> {
    let env = std::env::var(BOUNDS_ENV).ok();
    let mut b = default_bounds(env.as_deref())?;
    if let Some(h) = args.height {
        b.height = h;
    }
    if let Some(l) = args.labels {
        if l == 0 {
            bail!("label bound must be at least 1");
        }
        b.labels = l;
    }
    if let Some(r) = args.rounds {
        b.rounds = r;
    }
    Ok(b)
}

fn load(path: &Path) -> anyhow::Result<SpecFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_spec_file(&text).map_err(|e| anyhow!("{}:{e}", path.display()))
}

/// A triadic specification and the kind to read it with.
fn triadic(spec: &SpecFile, kind: Option<DyadicKind>) -> anyhow::Result<(Tss, DyadicKind)> {
    match (spec.tss.shape, kind) {
        (Shape::Triadic, Some(k)) => Ok((spec.tss.clone(), k)),
        (Shape::Triadic, None) => bail!("--kind is required for a triadic specification"),
        (Shape::Dyadic(d), Some(k)) if k != d => bail!("the file is a {d} specification, not {k}"),
        (Shape::Dyadic(d), _) => Ok((inverse_tss(&spec.tss)?, d)),
    }
}

fn measure<'a>(spec: &'a SpecFile, name: &str) -> anyhow::Result<&'a bnformat::strat::StratMeasure> {
    spec.measure(name).ok_or_else(|| anyhow!("no measure named `{name}`"))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => out.write_all(text.as_bytes()).context("cannot write output"),
    }
}

fn verdict(out: &mut dyn Write, format: Format, v: &Verdict) -> anyhow::Result<i32> {
    let text = match format {
        Format::Text => format!("{v}\n"),
        Format::Json => format!("{}\n", v.to_json()),
    };
    emit(out, None, &text)?;
    Ok(v.exit_code())
}

fn lattice(format: Format, class: Option<PropertyId>) -> anyhow::Result<String> {
    if let Some(p) = class {
        let cls = equivalence_class(p)?;
        return Ok(match format {
            Format::Text => cls.iter().map(|c| format!("{c}\n")).collect(),
            Format::Json => {
                let rows: Vec<Vec<String>> = cls.iter().map(|c| c.0.iter().map(|p| p.to_string()).collect()).collect();
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&serde_json::json!({ "property": p.to_string(), "class": rows }))?
                )
            }
        });
    }
    Ok(match format {
        Format::Text => {
            let mut s = String::new();
            for p in PropertyId::ALL {
                s.push_str(&format!("{p} {} [{}]\n", p.name(), p.kind()));
            }
            for (a, b) in HASSE {
                s.push_str(&format!("{a} -> {b}\n"));
            }
            s
        }
        Format::Json => {
            let props: Vec<_> = PropertyId::ALL
                .iter()
                .map(|p| serde_json::json!({ "id": p.to_string(), "name": p.name(), "kind": p.kind().to_string() }))
                .collect();
            let edges: Vec<[String; 2]> = HASSE.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
            let matrix: Vec<Vec<bool>> = PropertyId::ALL
                .iter()
                .map(|&p| PropertyId::ALL.iter().map(|&q| property_implies(p, q)).collect())
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(
                    &serde_json::json!({ "properties": props, "edges": edges, "implies": matrix })
                )?
            )
        }
    })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let format = cli.format;
    match cli.command {
        Command::Check { file, kind, strat, bounds: b } => {
            let spec = load(&file)?;
            let (tss, kind) = triadic(&spec, kind)?;
            let m = measure(&spec, &strat)?;
            let v = check_rule_format(&tss, kind, m, bounds(b)?);
            verdict(out, format, &v)
        }
        Command::Transform { file, kind, output } => {
            let spec = load(&file)?;
            let (tss, _) = triadic(&spec, Some(kind)).or_else(|_| triadic(&spec, None))?;
            let d = transform_tss(&tss, kind)?;
            emit(out, output.as_deref(), &render_tss(&d))?;
            Ok(0)
        }
        Command::Derive { file, bounds: b, output } => {
            let spec = load(&file)?;
            let lts = match derive_lts(&spec.tss, bounds(b)?) {
                Ok(l) => l,
                Err(e @ (LtsError::NotSaturated(_) | LtsError::UniverseTooLarge(..) | LtsError::TooManyOrigins(_))) => {
                    return Err(Inconclusive(e.to_string()).into());
                }
                Err(e) => return Err(e.into()),
            };
            let text = match format {
                Format::Text => lts.to_tsv(),
                Format::Json => format!("{}\n", lts.to_json()),
            };
            emit(out, output.as_deref(), &text)?;
            Ok(0)
        }
        Command::Props { lts } => {
            let text = std::fs::read_to_string(&lts).with_context(|| format!("cannot read {}", lts.display()))?;
            let lts_v = parse_lts_tsv(&text).map_err(|e| anyhow!("{}:{e}", lts.display()))?;
            let reports: Vec<_> = PropertyId::ALL.iter().map(|&p| check_property(&lts_v, p)).collect();
            let text = match format {
                Format::Text => reports
                    .iter()
                    .map(|r| {
                        let at = r.witness.as_deref().map(|w| format!(" at {w}")).unwrap_or_default();
                        format!("{} {}: max {}{at}\n", r.property, r.property.name(), r.max)
                    })
                    .collect(),
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&reports)?),
            };
            emit(out, None, &text)?;
            Ok(0)
        }
        Command::Lattice { class } => {
            emit(out, None, &lattice(format, class)?)?;
            Ok(0)
        }
        Command::Legacy { file, eta, strat, bounds: b } => {
            let spec = load(&file)?;
            let e = spec.eta(&eta).ok_or_else(|| anyhow!("no support map named `{eta}`"))?;
            let m = measure(&spec, &strat)?;
            let v = legacy_eta_check(&spec.tss, e, m, bounds(b)?);
            verdict(out, format, &v)
        }
    }
}

/// A run that stopped at a resource limit rather than an input error.
#[derive(Debug)]
struct Inconclusive(String);

impl std::fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Inconclusive {}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.is::<Inconclusive>() {
                2
            } else {
                EXIT_USAGE
            }
        }
    }
}
