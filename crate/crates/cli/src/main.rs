use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use randassign::decompose::{birkhoff, decompose_three_agent, decompose_two_type, uniform_decomposition};
use randassign::io::{parse_instance, parse_lottery, parse_matrix, render_lottery, NamedInstance, Structured};
use randassign::oracles::{ef_decomposable, reversal_symmetric_implementable, EfDecomposability, ReversalSymmetric};
use randassign::properties::{
    equal_treatment_violation, sd_dominating_matrix, sd_ef_violation, trading_cycle, weak_sd_ef_violation,
};
use randassign::rules::{probabilistic_serial, random_priority};
use randassign::search::{run_check, SearchCheck, SearchMode, SearchOptions, SearchReport};
use randassign::{envy_matrix, matrix_of, Error, Lottery, Matrix, Precondition, Rational};

const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "randassign", version, about = "Exact random assignment: rules, decompositions and fairness checks")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Run an assignment rule on an instance
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        rule: Rule,
    },
    /// Decompose an assignment matrix into a lottery
    Decompose {
        instance: PathBuf,
        matrix: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Check a property of a matrix or lottery
    Check {
        instance: PathBuf,
        target: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
    },
    /// Print the envy matrix of a lottery
    Envy { instance: PathBuf, lottery: PathBuf },
    /// Sweep preference profiles
    Search {
        n: usize,
        #[arg(value_enum)]
        check: CheckName,
        /// One representative per relabeling class
        #[arg(long)]
        canonical: bool,
        /// Worker threads
        #[arg(long)]
        jobs: Option<usize>,
        /// Check this many random profiles instead of all
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report minimax envy per profile (ps-ef-decomposable only)
        #[arg(long)]
        minimax: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Ps,
    Rp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Birkhoff,
    ThreeAgent,
    TwoType,
    LpDecEf,
    Uniform,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Property {
    SdEf,
    WeakSdEf,
    DecEf,
    Etoe,
    SdEfficient,
    ExPostEfficient,
    EfDecomposable,
    ReversalSymmetric,
}

impl Property {
    fn name(self) -> &'static str {
        match self {
            Property::SdEf => "sd-ef",
            Property::WeakSdEf => "weak-sd-ef",
            Property::DecEf => "dec-ef",
            Property::Etoe => "etoe",
            Property::SdEfficient => "sd-efficient",
            Property::ExPostEfficient => "ex-post-efficient",
            Property::EfDecomposable => "ef-decomposable",
            Property::ReversalSymmetric => "reversal-symmetric",
        }
    }

    fn takes_lottery(self) -> bool {
        matches!(self, Property::DecEf | Property::ExPostEfficient)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckName {
    PsEfDecomposable,
    RpDecEf,
}

/// A finished command: what to print and how to exit.
struct Output {
    text: String,
    structured: Structured,
    code: u8,
}

enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
    /// Certified infeasibility, with the report to print.
    Infeasible(Output),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_instance(path: &Path) -> Result<NamedInstance> {
    parse_instance(&read(path)?).map_err(|e| located(path, e))
}

fn load_matrix(path: &Path, named: &NamedInstance) -> Result<Matrix> {
    let m: Matrix = parse_matrix(&read(path)?).map_err(|e| located(path, e))?;
    if m.n() != named.instance.n() {
        return Err(Failure::Usage(format!(
            "{}: matrix has size {}, instance has {} agents",
            path.display(),
            m.n(),
            named.instance.n()
        )));
    }
    Ok(m)
}

fn load_lottery(path: &Path, named: &NamedInstance) -> Result<Lottery<Rational>> {
    parse_lottery(&read(path)?, &named.objects).map_err(|e| located(path, e))
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::Parse { line, column, message } => {
            Failure::Usage(format!("{}:{line}:{column}: {message}", path.display()))
        }
        other => Failure::Lib(other),
    }
}

fn matrix_text(m: &Matrix) -> String {
    m.to_string()
}

fn object_list(named: &NamedInstance, objects: &[usize]) -> String {
    objects.iter().map(|&o| named.objects[o].as_str()).collect::<Vec<_>>().join(" ")
}

fn solve(named: &NamedInstance, rule: Rule) -> Result<Output> {
    let inst = &named.instance;
    Ok(match rule {
        Rule::Ps => {
            let m: Matrix = probabilistic_serial(inst);
            let mut s = Structured::new("matrix");
            s.push_matrix("row", m.rows());
            Output { text: matrix_text(&m), structured: s, code: 0 }
        }
        Rule::Rp => {
            let l: Lottery<Rational> = random_priority(inst)?;
            let mut s = Structured::new("lottery");
            s.push_lottery("entry", &l, &named.objects);
            Output { text: render_lottery(&l, &named.objects), structured: s, code: 0 }
        }
    })
}

fn farkas_summary(y: &[Rational], s: &mut Structured) -> String {
    let nonzero = y.iter().filter(|v| !num_is_zero(v)).count();
    let values: Vec<String> = y.iter().map(|v| v.to_string()).collect();
    s.push("certificate", "farkas");
    s.push("farkas.rows", y.len());
    s.push("farkas.nonzero", nonzero);
    s.push("farkas.multipliers", values.join(" "));
    format!("certificate: farkas multipliers over {} constraints ({nonzero} nonzero)\n{}\n", y.len(), values.join(" "))
}

fn num_is_zero(v: &Rational) -> bool {
    *v == Rational::from_integer(0.into())
}

fn decompose(named: &NamedInstance, m: &Matrix, method: Method) -> Result<Output> {
    let inst = &named.instance;
    let lottery = match method {
        Method::Birkhoff => birkhoff(m)?,
        Method::ThreeAgent => decompose_three_agent(inst, m)?,
        Method::TwoType => decompose_two_type(inst, m, None)?,
        Method::Uniform => {
            if *m != Matrix::uniform(m.n()) {
                return Err(Error::Precondition(Precondition::UniformMatrix).into());
            }
            uniform_decomposition(m.n())?
        }
        Method::LpDecEf => match ef_decomposable(inst, m)? {
            EfDecomposability::Decomposable(l) => l,
            EfDecomposability::NotDecomposable(y) => {
                let mut s = Structured::new("decomposition");
                s.push("method", "lp-dec-ef");
                s.push("verdict", "infeasible");
                let mut text = String::from("not EF-decomposable\n");
                text.push_str(&farkas_summary(&y, &mut s));
                return Err(Failure::Infeasible(Output { text, structured: s, code: EXIT_INFEASIBLE }));
            }
        },
    };
    assert_eq!(matrix_of(&lottery), *m, "decomposition must reconstruct its input");
    let mut s = Structured::new("lottery");
    s.push_lottery("entry", &lottery, &named.objects);
    Ok(Output { text: render_lottery(&lottery, &named.objects), structured: s, code: 0 })
}

fn verdict_output(property: Property, holds: bool, detail: String, mut s: Structured) -> Output {
    let mut fields = Structured::new("check");
    fields.push("property", property.name());
    fields.push("verdict", holds);
    for (k, v) in s.fields().iter().skip(1) {
        fields.push(k.clone(), v);
    }
    s = fields;
    let mut text = format!("{holds}\n");
    text.push_str(&detail);
    Output { text, structured: s, code: if holds { 0 } else { EXIT_FALSE } }
}

fn pair_detail(s: &mut Structured, pair: Option<(usize, usize)>, what: &str) -> String {
    match pair {
        None => String::new(),
        Some((i, k)) => {
            s.push("pair.agent", i + 1);
            s.push("pair.other", k + 1);
            format!("violating pair: ({}, {}) {what}\n", i + 1, k + 1)
        }
    }
}

fn check(named: &NamedInstance, target: &Path, property: Property) -> Result<Output> {
    let inst = &named.instance;
    let mut s = Structured::new("check");
    if property.takes_lottery() {
        let text = read(target)?;
        let lottery: Lottery<Rational> = parse_lottery(&text, &named.objects).map_err(|e| {
            if parse_matrix::<Rational>(&text).is_ok() {
                Failure::Usage(format!("{} needs a lottery file, got a matrix", property.name()))
            } else {
                located(target, e)
            }
        })?;
        return Ok(match property {
            Property::DecEf => {
                let e = envy_matrix(inst, &lottery)?;
                let half = Rational::new(1.into(), 2.into());
                let pair = e.first_above(&half);
                let mut detail = String::new();
                if let Some((i, k)) = pair {
                    s.push("pair.agent", i + 1);
                    s.push("pair.other", k + 1);
                    s.push("pair.probability", e.get(i, k));
                    detail = format!("violating pair: ({}, {}) envy probability {}\n", i + 1, k + 1, e.get(i, k));
                }
                verdict_output(property, pair.is_none(), detail, s)
            }
            _ => {
                let mut detail = String::new();
                let mut holds = true;
                for (a, _) in lottery.support() {
                    if let Some(cycle) = trading_cycle(inst, a)? {
                        holds = false;
                        let agents: Vec<String> = cycle.iter().map(|i| (i + 1).to_string()).collect();
                        s.push("assignment", object_list(named, a.as_slice()));
                        s.push("cycle", agents.join(" "));
                        detail = format!(
                            "assignment {} admits trading cycle {}\n",
                            object_list(named, a.as_slice()),
                            agents.join(" ")
                        );
                        break;
                    }
                }
                verdict_output(property, holds, detail, s)
            }
        });
    }

    let text = read(target)?;
    if text.contains(':') && parse_matrix::<Rational>(&text).is_err() {
        return Err(Failure::Usage(format!("{} needs a matrix file, got a lottery", property.name())));
    }
    let m = load_matrix(target, named)?;
    Ok(match property {
        Property::SdEf => {
            let pair = sd_ef_violation(inst, &m)?;
            let detail = pair_detail(&mut s, pair, "first row does not dominate the second");
            verdict_output(property, pair.is_none(), detail, s)
        }
        Property::WeakSdEf => {
            let pair = weak_sd_ef_violation(inst, &m)?;
            let detail = pair_detail(&mut s, pair, "second row strictly dominates the first");
            verdict_output(property, pair.is_none(), detail, s)
        }
        Property::Etoe => {
            let pair = equal_treatment_violation(inst, &m)?;
            let detail = pair_detail(&mut s, pair, "same preferences, different rows");
            verdict_output(property, pair.is_none(), detail, s)
        }
        Property::SdEfficient => {
            let dom = sd_dominating_matrix(inst, &m)?;
            let mut detail = String::new();
            if let Some(d) = &dom {
                s.push_matrix("dominating", d.rows());
                detail = format!("dominating matrix:\n{}", matrix_text(d));
            }
            verdict_output(property, dom.is_none(), detail, s)
        }
        Property::EfDecomposable => match ef_decomposable(inst, &m)? {
            EfDecomposability::Decomposable(l) => {
                s.push_lottery("witness", &l, &named.objects);
                let detail = format!("witness:\n{}", render_lottery(&l, &named.objects));
                verdict_output(property, true, detail, s)
            }
            EfDecomposability::NotDecomposable(y) => {
                let detail = farkas_summary(&y, &mut s);
                verdict_output(property, false, detail, s)
            }
        },
        Property::ReversalSymmetric => match reversal_symmetric_implementable(inst, &m)? {
            ReversalSymmetric::Implementable(w) => {
                let mut detail = String::from("order weights:\n");
                for (k, (order, weight)) in w.orders.iter().enumerate() {
                    let order: Vec<String> = order.iter().map(|i| (i + 1).to_string()).collect();
                    s.push(format!("order[{k}].agents"), order.join(" "));
                    s.push(format!("order[{k}].weight"), weight);
                    writeln!(detail, "{weight} : {}", order.join(" ")).unwrap();
                }
                verdict_output(property, true, detail, s)
            }
            ReversalSymmetric::NotImplementable(y) => {
                let detail = farkas_summary(&y, &mut s);
                verdict_output(property, false, detail, s)
            }
        },
        Property::DecEf | Property::ExPostEfficient => unreachable!("lottery properties handled above"),
    })
}

fn envy(named: &NamedInstance, lottery_path: &Path) -> Result<Output> {
    let l = load_lottery(lottery_path, named)?;
    let e = envy_matrix(&named.instance, &l)?;
    let mut s = Structured::new("envy");
    s.push_matrix("row", e.rows());
    s.push("max", e.max_entry());
    Ok(Output { text: e.to_string(), structured: s, code: 0 })
}

fn search_structured(rep: &SearchReport) -> Structured {
    let mut s = Structured::new("search");
    s.push("check", &rep.check);
    s.push("n", rep.n);
    match &rep.mode {
        SearchMode::Exhaustive => s.push("mode", "exhaustive"),
        SearchMode::Canonical => s.push("mode", "canonical"),
        SearchMode::Sampled { count, seed } => s.push("mode", "sampled").push("sample", count).push("seed", seed),
    };
    s.push("profiles", rep.profiles_examined);
    if let Some(c) = rep.canonical_classes {
        s.push("classes", c);
    }
    if let Some(r) = rep.profiles_represented {
        s.push("represented", r);
    }
    s.push("failures", rep.failures.len());
    s.push("verified", rep.verified());
    if let Some(m) = rep.max_minimax() {
        s.push("minimax.max", m);
        for (v, c) in &rep.minimax_histogram {
            s.push(format!("minimax[{v}]"), c);
        }
    }
    for (k, f) in rep.failures.iter().enumerate() {
        let prefs: Vec<String> = f
            .instance
            .preferences()
            .iter()
            .map(|p| p.iter().map(|o| o.to_string()).collect::<String>())
            .collect();
        s.push(format!("failure[{k}].profile"), prefs.join(","));
        s.push(format!("failure[{k}].property"), f.property);
        s.push(format!("failure[{k}].certificate"), &f.certificate);
    }
    s.push("wall_time", format!("{:.3}", rep.wall_time.as_secs_f64()));
    s
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Solve { instance, rule } => solve(&load_instance(instance)?, *rule),
        Command::Decompose { instance, matrix, method } => {
            let named = load_instance(instance)?;
            let m = load_matrix(matrix, &named)?;
            decompose(&named, &m, *method)
        }
        Command::Check { instance, target, property } => check(&load_instance(instance)?, target, *property),
        Command::Envy { instance, lottery } => envy(&load_instance(instance)?, lottery),
        Command::Search { n, check, canonical, jobs, sample, seed, minimax } => {
            let which = match check {
                CheckName::PsEfDecomposable => SearchCheck::PsEfDecomposable,
                CheckName::RpDecEf => SearchCheck::RpDecEf,
            };
            let opts = SearchOptions {
                canonical: *canonical,
                jobs: *jobs,
                sample: *sample,
                seed: *seed,
                minimax_summary: *minimax,
            };
            let rep = run_check(which, *n, &opts)?;
            Ok(Output {
                text: rep.to_string(),
                structured: search_structured(&rep),
                code: if rep.verified() { 0 } else { EXIT_FALSE },
            })
        }
    }
}

fn emit(out: &Output, format: Format) -> ExitCode {
    match format {
        Format::Text => print!("{}", out.text),
        Format::Structured => print!("{}", out.structured.render()),
    }
    ExitCode::from(out.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => emit(&out, cli.format),
        Err(Failure::Infeasible(out)) => emit(&out, cli.format),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Precondition(p) => {
                    if cli.format == Format::Structured {
                        let mut s = Structured::new("error");
                        s.push("precondition", p.name());
                        print!("{}", s.render());
                    }
                    ExitCode::from(EXIT_PRECONDITION)
                }
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
    }
}
