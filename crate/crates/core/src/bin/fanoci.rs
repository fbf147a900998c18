use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fanoci::catalog::ambient;
use fanoci::io::{
    fan_from_json, laurent_from_json, laurent_to_json, operator_from_json, operator_to_json, period_from_json,
    period_to_json, to_canonical,
};
use fanoci::mirror::{build_mirror, valid_choices, PrzyjalkowskiChoice};
use fanoci::monodromy::{ramification, Precision};
use fanoci::periods::{bucket, fit_operator_within, period_coeffs_with_budget, PeriodError, DEFAULT_POINT_BUDGET};
use fanoci::pipeline::{classify_mirror, classify_period, scan, FailureKind, PipelineConfig, PipelineRecord};
use fanoci::search::CITriple;
use fanoci::toric::{validate_fan, ToricFano};
use fanoci::IVec;

#[derive(Parser)]
#[command(name = "fanoci", version, about = "Fano complete intersections in toric Fano manifolds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a fan (and optionally bundles), or the consistency of a records file.
    Validate {
        #[command(flatten)]
        amb: AmbientArgs,
        #[arg(long = "bundle", value_parser = parse_class)]
        bundles: Vec<IVec>,
        /// JSON Lines file of pipeline records to check instead.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Enumerate every complete intersection on an ambient and run the pipeline on each.
    Scan {
        #[command(flatten)]
        amb: AmbientArgs,
        #[command(flatten)]
        opts: PipelineArgs,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Output directory for records.jsonl and manifest.json; records go to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Laurent polynomial mirror of a complete intersection.
    Mirror {
        #[command(flatten)]
        tri: TripleArgs,
        /// Index into the list of valid choices.
        #[arg(long, default_value_t = 0)]
        choice: usize,
        /// Print the valid choices instead.
        #[arg(long)]
        list_choices: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Period sequence of a Laurent polynomial file, or of the mirror of a complete intersection.
    Period {
        #[arg(long, conflicts_with_all = ["catalog", "fan"])]
        laurent: Option<PathBuf>,
        #[command(flatten)]
        amb: AmbientArgs,
        #[arg(long = "bundle", value_parser = parse_class)]
        bundles: Vec<IVec>,
        #[arg(long, default_value_t = 40)]
        terms: usize,
        #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
        point_budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the minimal differential operator annihilating a period sequence.
    PfFit {
        period: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local monodromy ranks and ramification of an operator.
    Ramify {
        operator: PathBuf,
        #[arg(long, default_value_t = 256)]
        precision_bits: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree and Euler number of a complete intersection.
    Invariants {
        #[command(flatten)]
        tri: TripleArgs,
    },
    /// Group period files by equality of their first k coefficients.
    Bucket {
        #[arg(required = true)]
        periods: Vec<PathBuf>,
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
    /// Degree and operator-order frequency tables from a records file.
    Histogram {
        records: PathBuf,
        #[arg(long, default_value_t = 10)]
        bin_width: i64,
        /// Directory for degree.tsv and order.tsv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct AmbientArgs {
    /// Built-in ambient, e.g. P5, P1xP3, bundle-P2.
    #[arg(long, conflicts_with = "fan")]
    catalog: Option<String>,
    /// Fan file {"rays": [...], "cones": [...]}.
    #[arg(long)]
    fan: Option<PathBuf>,
}

#[derive(Args)]
struct TripleArgs {
    #[command(flatten)]
    amb: AmbientArgs,
    /// Bundle class, comma separated; repeat once per bundle.
    #[arg(long = "bundle", value_parser = parse_class, required = true)]
    bundles: Vec<IVec>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value_t = 12)]
    max_order: usize,
    #[arg(long, default_value_t = 24)]
    max_degree: usize,
    #[arg(long, default_value_t = 5)]
    holdout: usize,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, default_value_t = 40)]
    terms: usize,
    /// Also fit an operator for each record.
    #[arg(long)]
    fit: bool,
    /// Also compute monodromy (implies --fit).
    #[arg(long)]
    ramify: bool,
    #[command(flatten)]
    fit_args: FitArgs,
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
    point_budget: usize,
}

fn parse_class(s: &str) -> Result<IVec, String> {
    s.split(',').map(|x| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

struct Fail {
    code: i32,
    msg: String,
}

impl Fail {
    fn new(kind: FailureKind, e: impl std::fmt::Display) -> Self {
        Fail { code: kind.exit_code(), msg: e.to_string() }
    }

    fn validation(e: impl std::fmt::Display) -> Self {
        Fail::new(FailureKind::Validation, e)
    }
}

type Res<T = ()> = Result<T, Fail>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Fail { code: 1, msg: format!("{}: {e}", path.display()) })
}

fn write(path: &Path, text: &str) -> Res {
    fs::write(path, text).map_err(|e| Fail { code: 1, msg: format!("{}: {e}", path.display()) })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_ambient(a: &AmbientArgs) -> Res<(String, Arc<ToricFano>)> {
    match (&a.catalog, &a.fan) {
        (Some(name), _) => Ok((name.clone(), ambient(name).map_err(Fail::validation)?)),
        (None, Some(path)) => {
            let fan = fan_from_json(&read(path)?).map_err(Fail::validation)?;
            let y = validate_fan(&fan).map_err(Fail::validation)?;
            let label = path.file_stem().map_or("fan".into(), |s| s.to_string_lossy().into_owned());
            Ok((label, Arc::new(y)))
        }
        (None, None) => Err(Fail::validation("one of --catalog or --fan is required")),
    }
}

fn load_triple(t: &TripleArgs) -> Res<(String, CITriple)> {
    let (name, y) = load_ambient(&t.amb)?;
    let tri = CITriple::new(y, t.bundles.clone()).map_err(Fail::validation)?;
    Ok((name, tri))
}

fn pick_choice(t: &CITriple, index: usize) -> Res<PrzyjalkowskiChoice> {
    let all = valid_choices(t, Some(index + 1)).map_err(|e| Fail::new(classify_mirror(&e), e))?;
    all.into_iter().nth(index).ok_or_else(|| Fail::validation(format!("no valid choice with index {index}")))
}

#[derive(Serialize)]
struct AmbientSummary {
    dim: usize,
    rays: usize,
    pic_rank: usize,
    anticanonical: IVec,
    divisor_classes: Vec<IVec>,
}

#[derive(Serialize)]
struct Invariants {
    degree: i64,
    euler: i64,
}

fn run(cli: Cli) -> Res {
    match cli.cmd {
        Cmd::Validate { amb, bundles, records } => {
            if let Some(path) = records {
                let mut bad = 0;
                for (i, line) in read(&path)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                    let rec: PipelineRecord =
                        serde_json::from_str(line).map_err(|e| Fail::validation(format!("line {}: {e}", i + 1)))?;
                    if let Err(e) = rec.check() {
                        eprintln!("{}: {e}", rec.id);
                        bad += 1;
                    }
                }
                return if bad == 0 { Ok(()) } else { Err(Fail::validation(format!("{bad} inconsistent records"))) };
            }
            let (_, y) = load_ambient(&amb)?;
            if !bundles.is_empty() {
                CITriple::new(y.clone(), bundles).map_err(Fail::validation)?;
            }
            let s = AmbientSummary {
                dim: y.dim(),
                rays: y.fan.rays.len(),
                pic_rank: y.pic_rank(),
                anticanonical: y.anticanonical.clone(),
                divisor_classes: y.divisor_classes(),
            };
            print!("{}", to_canonical(&s));
            Ok(())
        }
        Cmd::Scan { amb, opts, jobs, out } => {
            let (name, y) = load_ambient(&amb)?;
            let cfg = PipelineConfig {
                terms: opts.terms,
                fit: opts.fit || opts.ramify,
                max_order: opts.fit_args.max_order,
                max_degree: opts.fit_args.max_degree,
                holdout: opts.fit_args.holdout,
                ramify: opts.ramify,
                precision: Precision::with_bits(opts.precision_bits),
                point_budget: opts.point_budget,
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Fail { code: 1, msg: e.to_string() })?;
            let (recs, manifest) = pool.install(|| scan(&name, &y, &cfg)).map_err(Fail::validation)?;
            let body: String = recs.iter().map(to_canonical).collect();
            match &out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| Fail { code: 1, msg: format!("{}: {e}", dir.display()) })?;
                    write(&dir.join("records.jsonl"), &body)?;
                    write(&dir.join("manifest.json"), &to_canonical(&manifest))?;
                }
                None => print!("{body}"),
            }
            for (id, f) in &manifest.failures {
                eprintln!("{id}: {}: {}", f.stage, f.message);
            }
            match manifest.exit_code() {
                0 => Ok(()),
                code => Err(Fail { code, msg: format!("{} of {} triples failed", manifest.failures.len(), manifest.triples) }),
            }
        }
        Cmd::Mirror { tri, choice, list_choices, out } => {
            let (_, t) = load_triple(&tri)?;
            if list_choices {
                let all = valid_choices(&t, Some(choice.max(50))).map_err(|e| Fail::new(classify_mirror(&e), e))?;
                return emit(&out, &to_canonical(&all));
            }
            let ch = pick_choice(&t, choice)?;
            let f = build_mirror(&t, &ch).map_err(|e| Fail::new(classify_mirror(&e), e))?;
            emit(&out, &laurent_to_json(&f))
        }
        Cmd::Period { laurent, amb, bundles, terms, point_budget, out } => {
            let f = match laurent {
                Some(p) => laurent_from_json(&read(&p)?).map_err(Fail::validation)?,
                None => {
                    let (_, t) = load_triple(&TripleArgs { amb, bundles })?;
                    let ch = pick_choice(&t, 0)?;
                    build_mirror(&t, &ch).map_err(|e| Fail::new(classify_mirror(&e), e))?
                }
            };
            let s = period_coeffs_with_budget(&f, terms, point_budget).map_err(|e| Fail::new(classify_period(&e), e))?;
            emit(&out, &period_to_json(&s))
        }
        Cmd::PfFit { period, fit, out } => {
            let s = period_from_json(&read(&period)?).map_err(Fail::validation)?;
            let r = fit_operator_within(&s, fit.max_order, fit.max_degree, fit.holdout)
                .map_err(|e| Fail::new(classify_period(&e), e))?;
            if r.ambiguous {
                eprintln!("warning: order {} operator is not unique (nullity {})", r.order, r.nullity);
            }
            emit(&out, &operator_to_json(&r.operator))
        }
        Cmd::Ramify { operator, precision_bits, out } => {
            let l = operator_from_json(&read(&operator)?).map_err(Fail::validation)?;
            let rep = ramification(&l, Precision::with_bits(precision_bits))
                .map_err(|e| Fail::new(FailureKind::Numerical, e))?;
            emit(&out, &to_canonical(&rep))
        }
        Cmd::Invariants { tri } => {
            let (_, t) = load_triple(&tri)?;
            let degree = t.degree().map_err(Fail::validation)?;
            let euler = t.euler().map_err(Fail::validation)?;
            print!("{}", to_canonical(&Invariants { degree, euler }));
            Ok(())
        }
        Cmd::Bucket { periods, k } => {
            let seqs = periods
                .iter()
                .map(|p| period_from_json(&read(p)?).map_err(Fail::validation))
                .collect::<Res<Vec<_>>>()?;
            let bs = bucket(&seqs, k).map_err(|e: PeriodError| Fail::new(classify_period(&e), e))?;
            #[derive(Serialize)]
            struct Named {
                id: String,
                members: Vec<String>,
            }
            let named: Vec<Named> = bs
                .into_iter()
                .map(|b| Named {
                    id: b.id,
                    members: b.members.iter().map(|&i| periods[i].display().to_string()).collect(),
                })
                .collect();
            print!("{}", to_canonical(&named));
            Ok(())
        }
        Cmd::Histogram { records, bin_width, out } => {
            if bin_width <= 0 {
                return Err(Fail::validation("--bin-width must be positive"));
            }
            let mut degrees: BTreeMap<i64, usize> = BTreeMap::new();
            let mut orders: BTreeMap<usize, usize> = BTreeMap::new();
            for (i, line) in read(&records)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let rec: PipelineRecord =
                    serde_json::from_str(line).map_err(|e| Fail::validation(format!("line {}: {e}", i + 1)))?;
                if let Some(d) = rec.degree {
                    *degrees.entry(d.div_euclid(bin_width)).or_default() += 1;
                }
                if let Some(o) = rec.operator {
                    *orders.entry(o.order).or_default() += 1;
                }
            }
            fs::create_dir_all(&out).map_err(|e| Fail { code: 1, msg: format!("{}: {e}", out.display()) })?;
            let mut deg = String::from("bin_low\tbin_high\tcount\n");
            if let (Some(&lo), Some(&hi)) = (degrees.keys().next(), degrees.keys().next_back()) {
                for b in lo..=hi {
                    let c = degrees.get(&b).copied().unwrap_or(0);
                    deg.push_str(&format!("{}\t{}\t{c}\n", b * bin_width, (b + 1) * bin_width));
                }
            }
            let mut ord = String::from("N\tcount\n");
            for (n, c) in &orders {
                ord.push_str(&format!("{n}\t{c}\n"));
            }
            write(&out.join("degree.tsv"), &deg)?;
            write(&out.join("order.tsv"), &ord)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code as u8)
        }
    }
}
