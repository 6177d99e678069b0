//! Command-line front end. Exit codes: 0 when the check passes, 1 when a
//! property or matching rule fails, 2 on usage or input errors.

use std::error::Error;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use compverify::behavior::{goal_coverage, run_matching, LabelAutomaton, MatchMode, MatchOutcome};
use compverify::colored::{simulate, ColoredSystem, SimulationMode, SystemMarking};
use compverify::model::{load_system, NamedQuery, QueryMode, System};
use compverify::petri::{
    check_b_fairness, from_pnml, incidence, p_invariants, t_invariants, to_pnml, MatrixKind, PlaceTransitionNet,
};
use compverify::pipeline::{advise, fairness_summary, run_pipeline_on, PipelineOptions, Technique};
use compverify::static_match::{check_static_semantic, check_syntactic};
use compverify::statespace::{
    colored_successors, evaluate_query, export, generate_colored, generate_ptnet, generate_reduced,
    reduce_compositional, top_level_description, top_level_nonempty, ExportFormat, StateGraph, DEFAULT_BUDGET,
};
use compverify::transform::{compose_colored, composition_to_ptnet};

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "compverify", version, about = "Composability verification of component-based simulation models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Syntactic matching of the composition's interactions.
    CheckSyntactic { composition: PathBuf },
    /// Static-semantic matching against the composition's taxonomy.
    CheckSemantic { composition: PathBuf },
    /// Label-level state-machine matching.
    MatchStatemachines {
        composition: PathBuf,
        /// Follow one seeded schedule instead of exploring all of them.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the explored configuration graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Transform a composition to a P/T net and print it as PNML.
    ToPnml {
        composition: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the transformation log to stderr.
        #[arg(long)]
        log: bool,
    },
    /// Incidence matrix and minimal P- and T-invariants of a net.
    Invariants {
        /// A composition (`.cmp`) or a PNML net.
        net: PathBuf,
        /// Directory to write the A+, A- and A matrices to as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Bounded-fairness verdict of a net.
    Fairness { net: PathBuf },
    /// Transform a composition to a colored system and print it.
    ToColored {
        composition: PathBuf,
        #[arg(long)]
        log: bool,
    },
    /// Run the colored system.
    Simulate {
        composition: PathBuf,
        /// Pick each step from the enabled bindings on stdin.
        #[arg(long, conflicts_with = "seed")]
        interactive: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Generate the state space.
    Statespace(StatespaceArgs),
    /// Evaluate a marking predicate over the state space.
    Query {
        /// A composition (colored state space) or a PNML net.
        model: PathBuf,
        #[arg(long)]
        predicate: String,
        /// reachable, never or always.
        #[arg(long, default_value = "reachable")]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Run the whole verification pipeline.
    Verify {
        composition: PathBuf,
        /// algebraic or statespace.
        #[arg(long)]
        technique: Option<String>,
        /// Print technique guidelines for this composition and exit.
        #[arg(long)]
        advise: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        reduce: bool,
        #[arg(long, requires = "output")]
        export: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the run as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct StatespaceArgs {
    /// A composition (colored state space) or a PNML net.
    model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Keep only markings with a token in some top-level place.
    #[arg(long)]
    reduce: bool,
    /// Reduce during generation instead of afterwards.
    #[arg(long, requires = "reduce")]
    on_the_fly: bool,
    /// graphml or dot.
    #[arg(long)]
    export: Option<String>,
    /// Output file for --export (stdout when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn is_pnml(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pnml"))
}

fn load(p: &Path) -> Res<System> {
    Ok(load_system(p)?)
}

fn load_net(p: &Path) -> Res<PlaceTransitionNet> {
    if is_pnml(p) {
        Ok(from_pnml(&fs::read_to_string(p)?)?)
    } else {
        Ok(composition_to_ptnet(&load(p)?)?.0)
    }
}

fn load_colored(p: &Path) -> Res<(System, ColoredSystem)> {
    let sys = load(p)?;
    let (csys, _) = compose_colored(&sys)?;
    Ok((sys, csys))
}

fn write_out(output: Option<&Path>, text: &str) -> Res<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn export_graph<M>(
    g: &StateGraph<M>,
    format: &str,
    output: Option<&Path>,
    describe: impl Fn(&M) -> String,
) -> Res<()> {
    let format: ExportFormat = format.parse()?;
    match output {
        Some(p) => export(g, format, describe, io::BufWriter::new(fs::File::create(p)?))?,
        None => export(g, format, describe, io::stdout().lock())?,
    }
    Ok(())
}

fn print_graph_summary<M>(g: &StateGraph<M>) {
    // With an export going to stdout these lines go to stderr.
    let dead = g.list_dead_markings();
    eprintln!("nodes: {}", g.node_count());
    eprintln!("arcs: {}", g.arc_count());
    eprintln!("roots: {:?}", g.roots().collect::<Vec<_>>());
    if g.budget_exceeded() {
        eprintln!("warning: budget exceeded, graph truncated; dead markings are a lower bound");
    }
    eprintln!("dead markings: {} {:?}", dead.nodes.len(), dead.nodes.iter().take(20).collect::<Vec<_>>());
}

fn statespace_cmd(a: &StatespaceArgs) -> Res<bool> {
    if is_pnml(&a.model) {
        let net = load_net(&a.model)?;
        let g = generate_ptnet(&net, a.budget);
        print_graph_summary(&g);
        if let Some(f) = &a.export {
            export_graph(&g, f, a.output.as_deref(), |m| m.to_string())?;
        }
        return Ok(true);
    }
    let (_, csys) = load_colored(&a.model)?;
    let g = if a.on_the_fly {
        let (g, rep) = generate_reduced(vec![csys.initial_marking()], a.budget, top_level_nonempty(&csys), |m| {
            colored_successors(&csys, m)
        })?;
        eprint!("{rep}");
        g
    } else {
        let g = generate_colored(&csys, a.budget)?;
        if a.reduce {
            let (r, rep) = reduce_compositional(&g, top_level_nonempty(&csys));
            eprintln!("full graph: {} nodes, {} arcs", g.node_count(), g.arc_count());
            eprint!("{rep}");
            r
        } else {
            g
        }
    };
    print_graph_summary(&g);
    if let Some(f) = &a.export {
        export_graph(&g, f, a.output.as_deref(), top_level_description(&csys))?;
    }
    Ok(true)
}

fn query_mode(s: &str) -> Res<QueryMode> {
    match s {
        "reachable" => Ok(QueryMode::Reachable),
        "never" => Ok(QueryMode::Never),
        "always" => Ok(QueryMode::Always),
        _ => Err(format!("unknown query mode `{s}` (expected reachable, never or always)").into()),
    }
}

fn query_cmd(model: &Path, predicate: &str, mode: &str, budget: usize) -> Res<bool> {
    let q = NamedQuery { name: "query".into(), mode: query_mode(mode)?, predicate: predicate.to_string() };
    let outcome = if is_pnml(model) {
        let net = load_net(model)?;
        let g = generate_ptnet(&net, budget);
        evaluate_query(&g, &q, |n| net.place_index(n))?
    } else {
        let (_, csys) = load_colored(model)?;
        let g = generate_colored(&csys, budget)?;
        let o = evaluate_query(&g, &q, |n| csys.place_index(n))?;
        if let Some(&w) = o.witnesses.first() {
            let m: &SystemMarking = &g.node(w).expect("witness").marking;
            println!("first node {w}:\n{}", m.describe(&csys));
        }
        o
    };
    println!("{outcome}");
    Ok(outcome.satisfied)
}

fn run(cli: Cli) -> Res<bool> {
    match cli.command {
        Command::CheckSyntactic { composition } => {
            let r = check_syntactic(&load(&composition)?);
            print!("{r}");
            Ok(r.passed)
        }
        Command::CheckSemantic { composition } => {
            let sys = load(&composition)?;
            let r = check_static_semantic(&sys, &sys.taxonomy);
            print!("{r}");
            Ok(r.passed)
        }
        Command::MatchStatemachines { composition, seed, dot } => {
            let sys = load(&composition)?;
            let mode = seed.map_or(MatchMode::Exhaustive, MatchMode::Seeded);
            let trace = run_matching(&sys, mode);
            print!("{trace}");
            for (m, ok) in goal_coverage(&trace, &sys) {
                println!("{m}: {}", if ok { "goal reached" } else { "goal NOT reached" });
            }
            println!("configurations: {}", trace.configurations);
            if let Some(p) = dot {
                let a = LabelAutomaton::new(&sys);
                fs::write(p, a.explore().to_dot(&a))?;
            }
            Ok(trace.outcome == MatchOutcome::AllReached)
        }
        Command::ToPnml { composition, output, log } => {
            let (net, l) = composition_to_ptnet(&load(&composition)?)?;
            if log {
                eprint!("{l}");
            }
            write_out(output.as_deref(), &to_pnml(&net))?;
            Ok(l.omissions.is_empty())
        }
        Command::Invariants { net, csv } => {
            let net = load_net(&net)?;
            let inc = incidence::<i64>(&net);
            println!("places: {}", net.places().join(" "));
            println!("incidence (rows = transitions):");
            for (t, row) in net.transitions().iter().zip(&inc.a) {
                println!("  {t}: {row:?}");
            }
            for y in p_invariants(&net).minimal_u64() {
                println!("P-invariant {y:?}");
            }
            for x in t_invariants(&net).minimal_u64() {
                println!("T-invariant {x:?}");
            }
            if let Some(dir) = csv {
                fs::create_dir_all(&dir)?;
                for (kind, name) in
                    [(MatrixKind::Plus, "a_plus.csv"), (MatrixKind::Minus, "a_minus.csv"), (MatrixKind::Incidence, "a.csv")]
                {
                    inc.write_csv(kind, fs::File::create(dir.join(name))?)?;
                }
            }
            Ok(true)
        }
        Command::Fairness { net } => {
            let v = check_b_fairness(&load_net(&net)?);
            println!("{}", fairness_summary(&v));
            Ok(v.is_fair())
        }
        Command::ToColored { composition, log } => {
            let sys = load(&composition)?;
            let (csys, l) = compose_colored(&sys)?;
            print!("{csys}");
            if log {
                eprint!("{l}");
            }
            Ok(l.omissions.is_empty())
        }
        Command::Simulate { composition, interactive, seed, max_steps } => {
            let (_, csys) = load_colored(&composition)?;
            let mode = if interactive {
                SimulationMode::Interactive { max_steps }
            } else {
                SimulationMode::Auto { seed, max_steps }
            };
            let trace = simulate(&csys, mode)?;
            print!("{}", trace.render(&csys));
            Ok(true)
        }
        Command::Statespace(a) => statespace_cmd(&a),
        Command::Query { model, predicate, mode, budget } => query_cmd(&model, &predicate, &mode, budget),
        Command::Verify { composition, technique, advise: want_advice, budget, seed, reduce, export, output, json } => {
            let sys = load(&composition)?;
            if want_advice {
                for line in advise(&sys) {
                    println!("- {line}");
                }
                if technique.is_none() {
                    return Ok(true);
                }
            }
            let technique: Technique =
                technique.ok_or("--technique is required (algebraic or statespace)")?.parse()?;
            let mut opts = PipelineOptions::new(technique);
            opts.budget = budget;
            opts.seed = seed;
            opts.reduce = reduce;
            if let (Some(f), Some(o)) = (export, output) {
                opts.export = Some((f.parse()?, o));
            }
            let r = run_pipeline_on(&sys, &opts)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{r}");
            }
            Ok(r.verified())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
