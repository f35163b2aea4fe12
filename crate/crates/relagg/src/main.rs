//! Command-line surface over JSON profile documents.
//!
//! Exit codes: 0 success / check passed, 1 check found a counterexample
//! (a replayable JSON document is written), 2 parse or configuration error.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relagg::aggregators::{AggContext, Aggregator, CandidateSpace, Rule};
use relagg::axioms::{self, Axiom, CheckOptions};
use relagg::constraints::Constraint;
use relagg::doc::{CounterexampleDoc, ProfileDocument, SpaceDoc};
use relagg::folang::{parse_formula, parse_query, Query};
use relagg::lifting::{check_lifting, LiftTarget, LiftVerdict, WinnerReading};
use relagg::model::{Permutation, Value};
use relagg::oracle::{enum_formulas, enum_profiles, queries_from, Fragment, ProfileSpace};
use relagg::preservation::check_commutes;

#[derive(Parser)]
#[command(
    name = "relagg",
    about = "Aggregate relational database instances, query them, and check \
             axioms, constraint lifting, and query commutation over finite \
             profile spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a profile document under a rule.
    Aggregate(AggregateArgs),
    /// Answer a query (`ans(x, y) :- body`) on a single-instance document.
    Query(QueryArgs),
    /// Check an axiom, a constraint lifting, or query commutation over a
    /// profile space.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Re-run the check stored in a counterexample document; exits 1 when
    /// the violation reproduces.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct AggregateArgs {
    /// Rule descriptor: union, intersection, majority, quota:<k>,
    /// quota:P=2,Q=1, distance, avg-voter, relwise-avg, dictator:<i>,
    /// oligarchy:1,3, merge, trivial-zero, trivial-top.
    #[arg(long)]
    rule: String,
    /// Tie handling for non-resolute rules.
    #[arg(long, value_enum, default_value_t = Tie::All)]
    tie: Tie,
    /// Constraint lines filtering the distance rule's candidates.
    #[arg(long = "constraint")]
    constraints: Vec<String>,
    /// Write the winners document here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Input profile document.
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    /// Emit every winner.
    All,
    /// Emit only the canonically smallest winner.
    Lex,
}

#[derive(Args)]
struct QueryArgs {
    /// The query text, e.g. `ans(x) :- exists y. P(x,y)`.
    query: String,
    /// A profile document holding exactly one instance.
    input: PathBuf,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Check one axiom for a rule over a space.
    Axiom(AxiomArgs),
    /// Check that a rule lifts a constraint or sentence over a space.
    Lifting(LiftingArgs),
    /// Compare aggregate-then-query with query-then-aggregate.
    Commute(CommuteArgs),
}

#[derive(Args)]
struct SpaceArgs {
    /// Space configuration document.
    #[arg(long)]
    space: PathBuf,
    /// Override the space's agent count.
    #[arg(long)]
    agents: Option<usize>,
    /// Write the counterexample document here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AxiomArgs {
    /// U, G, A, I, N+, N-, NP, or M.
    #[arg(long)]
    axiom: String,
    #[arg(long)]
    rule: String,
    /// Extra value transpositions (`a:b`) for permutation-neutrality; by
    /// default every transposition of the space domain is checked.
    #[arg(long = "transpose")]
    transpositions: Vec<String>,
    #[command(flatten)]
    space: SpaceArgs,
}

#[derive(Args)]
struct LiftingArgs {
    #[arg(long)]
    rule: String,
    /// A constraint line, e.g. `fd P: 1 -> 2`.
    #[arg(long)]
    constraint: Option<String>,
    /// A sentence in the formula language.
    #[arg(long)]
    formula: Option<String>,
    /// Accept profiles where some (not every) winner satisfies the target.
    #[arg(long)]
    some_winner: bool,
    #[command(flatten)]
    space: SpaceArgs,
}

#[derive(Args)]
struct CommuteArgs {
    #[arg(long)]
    rule: String,
    /// A single query to check.
    #[arg(long)]
    query: Option<String>,
    /// Or a generated sweep: exists-positive, forall-positive, cq, full.
    #[arg(long)]
    fragment: Option<String>,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    space: SpaceArgs,
}

#[derive(Args)]
struct ReplayArgs {
    /// A counterexample document produced by a failed check.
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Query(args) => cmd_query(args),
        Command::Check(check) => cmd_check(check),
        Command::Replay(args) => cmd_replay(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn read_json<T: serde::de::DeserializeOwned>(
    path: &PathBuf,
) -> Result<T, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emit_json<T: serde::Serialize>(
    value: &T,
    target: &Option<PathBuf>,
) -> Result<(), Box<dyn std::error::Error>> {
    let text = serde_json::to_string_pretty(value)?;
    match target {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_aggregate(args: AggregateArgs) -> CliResult {
    let doc: ProfileDocument = read_json(&args.input)?;
    let profile = doc.to_profile()?;
    let mut rule = Rule::parse(&args.rule)?;
    if !args.constraints.is_empty() {
        let constraints = args
            .constraints
            .iter()
            .map(|line| Constraint::parse(line, profile.schema()))
            .collect::<Result<Vec<_>, _>>()?;
        match rule {
            Rule::DistanceBased { space, .. } => {
                rule = Rule::DistanceBased { space, constraints };
            }
            _ => return Err("--constraint only applies to the distance rule".into()),
        }
    } else if let Rule::DistanceBased { .. } = rule {
        rule = Rule::DistanceBased {
            space: CandidateSpace::SubsetsOfUnion,
            constraints: Vec::new(),
        };
    }
    let outcome = rule.apply(&profile, &AggContext::default())?;
    let winners: Vec<_> = match args.tie {
        Tie::All => outcome.winners().iter().collect(),
        Tie::Lex => vec![outcome.lex_winner()],
    };
    let out = ProfileDocument::from_instances(profile.schema(), doc.consts.clone(), winners);
    emit_json(&out, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_query(args: QueryArgs) -> CliResult {
    let doc: ProfileDocument = read_json(&args.input)?;
    if doc.instances.len() != 1 {
        return Err(format!(
            "query needs a document with exactly one instance, got {}",
            doc.instances.len()
        )
        .into());
    }
    let profile = doc.to_profile()?;
    let ctx = doc.parse_ctx()?;
    let query = parse_query(&args.query, &ctx)?;
    let answers = relagg::folang::answer(profile.agent(1)?, &query)?;
    for row in answers.tuples() {
        if row.arity() == 0 {
            println!("()");
        } else {
            let cells: Vec<String> = row.values().iter().map(|v| v.to_string()).collect();
            println!("{}", cells.join(","));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn build_space(
    args: &SpaceArgs,
) -> Result<(SpaceDoc, ProfileSpace, AggContext), Box<dyn std::error::Error>> {
    let mut doc: SpaceDoc = read_json(&args.space)?;
    if let Some(agents) = args.agents {
        doc.agents = agents;
    }
    let spec = doc.to_space_spec()?;
    let space = enum_profiles(&spec)?;
    let ctx = AggContext::with_universe(doc.extras());
    Ok((doc, space, ctx))
}

fn cmd_check(check: CheckCommand) -> CliResult {
    match check {
        CheckCommand::Axiom(args) => {
            let (doc, space, ctx) = build_space(&args.space)?;
            let axiom = Axiom::parse(&args.axiom)?;
            let rule = Rule::parse(&args.rule)?;
            let spec = doc.to_space_spec()?;
            let perms = build_permutations(&spec.domain, &args.transpositions)?;
            let report = axioms::check_axiom(
                axiom,
                &rule,
                &space,
                &perms,
                &ctx,
                &CheckOptions::default(),
            )?;
            if report.passed() {
                println!("{} satisfies {} on the space", rule.label(), axiom);
                Ok(ExitCode::SUCCESS)
            } else {
                let cx = CounterexampleDoc::from_axiom_report(&report, &spec.schema, &ctx)
                    .expect("failed report carries a witness");
                emit_json(&cx, &args.space.report)?;
                Ok(ExitCode::from(1))
            }
        }
        CheckCommand::Lifting(args) => {
            let (doc, space, ctx) = build_space(&args.space)?;
            let rule = Rule::parse(&args.rule)?;
            let spec = doc.to_space_spec()?;
            let target = match (&args.constraint, &args.formula) {
                (Some(line), None) => {
                    LiftTarget::Constraint(Constraint::parse(line, &spec.schema)?)
                }
                (None, Some(text)) => {
                    let pctx = doc.parse_ctx()?;
                    LiftTarget::sentence(parse_formula(text, &pctx)?)?
                }
                _ => return Err("pass exactly one of --constraint or --formula".into()),
            };
            let reading = if args.some_winner {
                WinnerReading::SomeWinner
            } else {
                WinnerReading::EveryWinner
            };
            let report = check_lifting(&rule, &target, &space, &ctx, reading)?;
            match report.verdict {
                LiftVerdict::LiftedOnSpace => {
                    println!("{} lifts {} on the space", report.rule, report.target);
                    Ok(ExitCode::SUCCESS)
                }
                LiftVerdict::Counterexample { profile, winner } => {
                    let cx = CounterexampleDoc::from_lift_failure(
                        &report.rule,
                        &target,
                        &profile,
                        &winner,
                        &ctx,
                    );
                    emit_json(&cx, &args.space.report)?;
                    Ok(ExitCode::from(1))
                }
            }
        }
        CheckCommand::Commute(args) => {
            let (doc, space, ctx) = build_space(&args.space)?;
            let rule = Rule::parse(&args.rule)?;
            let pctx = doc.parse_ctx()?;
            let queries: Vec<Query> = match (&args.query, &args.fragment) {
                (Some(text), None) => vec![parse_query(text, &pctx)?],
                (None, Some(name)) => {
                    let fragment = parse_fragment(name)?;
                    let formulas = enum_formulas(
                        &pctx.schema,
                        fragment,
                        args.depth,
                        args.seed,
                        args.queries,
                    );
                    queries_from(&formulas, 2)
                }
                _ => return Err("pass exactly one of --query or --fragment".into()),
            };
            for query in &queries {
                for profile in space.iter() {
                    let report = check_commutes(&rule, query, &profile, &ctx)?;
                    if !report.commutes() {
                        let cx = CounterexampleDoc::from_commute_failure(
                            &report.rule,
                            &report.query,
                            &profile,
                            &report.aggregate_then_query,
                            &report.query_then_aggregate,
                            &ctx,
                        );
                        emit_json(&cx, &args.space.report)?;
                        return Ok(ExitCode::from(1));
                    }
                }
            }
            println!(
                "{} commutes with {} quer{} on the space",
                rule.label(),
                queries.len(),
                if queries.len() == 1 { "y" } else { "ies" }
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_fragment(name: &str) -> Result<Fragment, Box<dyn std::error::Error>> {
    Ok(match name {
        "exists-positive" => Fragment::PosExistential,
        "forall-positive" => Fragment::PosUniversal,
        "cq" => Fragment::ConjunctiveQuery,
        "full" => Fragment::FullFo,
        other => {
            return Err(format!(
                "unknown fragment `{other}`; expected exists-positive, forall-positive, cq, full"
            )
            .into())
        }
    })
}

/// Default permutation battery: every transposition of the domain's
/// constant tokens, plus any explicitly requested ones.
fn build_permutations(
    domain: &[Value],
    extra: &[String],
) -> Result<Vec<Permutation>, Box<dyn std::error::Error>> {
    let carrier: Vec<Value> = domain.to_vec();
    let consts: Vec<&Value> = carrier.iter().filter(|v| !v.is_null()).collect();
    let mut perms = Vec::new();
    for i in 0..consts.len() {
        for j in i + 1..consts.len() {
            perms.push(Permutation::transposition(
                consts[i].clone(),
                consts[j].clone(),
                carrier.clone(),
            )?);
        }
    }
    for spec in extra {
        let (a, b) = spec
            .split_once(':')
            .ok_or_else(|| format!("bad transposition `{spec}`; expected `a:b`"))?;
        let mut extended = carrier.clone();
        for v in [Value::c(a), Value::c(b)] {
            if !extended.contains(&v) {
                extended.push(v);
            }
        }
        perms.push(Permutation::transposition(
            Value::c(a),
            Value::c(b),
            extended,
        )?);
    }
    if perms.is_empty() {
        let all: BTreeSet<Value> = carrier.into_iter().collect();
        perms.push(Permutation::identity(all));
    }
    Ok(perms)
}

fn cmd_replay(args: ReplayArgs) -> CliResult {
    let doc: CounterexampleDoc = read_json(&args.input)?;
    if doc.replay()? {
        println!(
            "counterexample reproduces ({} check, rule {})",
            doc.check, doc.rule
        );
        Ok(ExitCode::from(1))
    } else {
        println!("counterexample does not reproduce");
        Ok(ExitCode::SUCCESS)
    }
}
