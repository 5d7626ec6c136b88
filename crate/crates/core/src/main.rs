use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use diagsync::certify::{export_lp, generate_translate_rows, solve_cover_ilp, IlpInstance, Sense};
use diagsync::feasibility::{enumerate_all, enumerate_feasible_pairs, CandidatePair, FeasibilityOptions};
use diagsync::graphs::{complement_classes, parse_class_labels, ClassKind, ClassUnionGraph};
use diagsync::group::{Elem, Group};
use diagsync::pipeline::{
    analyze, summarize_feasibility, summarize_scheme, verify_evidence, verify_report, AnalyzeConfig, Evidence,
    Report,
};
use diagsync::scheme::rational_scheme;
use diagsync::search::{
    find_clique_of_size, max_clique, max_coclique, subgroup_clique, verify_certificate, Budget, CliqueCertificate,
    DecisionCertificate, DecisionOutcome, Objective, SearchOptions,
};
use diagsync::witnesses::{
    build_spreading_witness, check_half_intersection, find_exact_factorisation, sharply_transitive_q9,
};
use diagsync::{Error, Result};

/// Synchronisation-hierarchy classification of PSL(2,q) x PSL(2,q) acting
/// diagonally on PSL(2,q).
#[derive(Parser)]
#[command(name = "diagsync", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and print the report.
    Analyze {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Node cap of the cheap first passes.
        #[arg(long, default_value_t = 1_000_000)]
        probe_nodes: u64,
        /// Keep wall-clock fields in certificates.
        #[arg(long)]
        timings: bool,
        /// Also print the human-readable table to stderr.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rational scheme: sizes, multiplicities, P and Q.
    Scheme {
        #[arg(long)]
        q: u64,
        /// Print Q as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feasible families and the putative table.
    Feasibility {
        #[arg(long)]
        q: u64,
        /// Restrict to one graph, e.g. `3,7`.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact clique or coclique search, or a size decision.
    Search {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::Clique)]
        mode: Mode,
        /// Target size for `--mode decide`.
        #[arg(long)]
        size: Option<usize>,
        /// What `--mode decide` looks for.
        #[arg(long, value_enum, default_value_t = Side::Clique)]
        objective: Side,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translate-row cover bound on cocliques of a graph.
    Certify {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<String>,
        #[arg(long, value_enum, default_value_t = BaseClique::FromSearch)]
        base_clique: BaseClique,
        #[arg(long, value_enum, default_value_t = SenseArg::Atmost)]
        sense: SenseArg,
        #[arg(long)]
        target: Option<usize>,
        /// Also write the instance in LP format.
        #[arg(long)]
        lp_out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-synchronisation and non-spreading witnesses.
    Witness {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum)]
        kind: WitnessKind,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a class-union graph.
    Graph {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<String>,
        #[arg(long, value_enum, default_value_t = GraphFormat::Descriptor)]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a report or a single certificate.
    Verify {
        file: PathBuf,
        /// Re-run exhaustive searches and cover solves.
        #[arg(long)]
        deep: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, env = "DIAGSYNC_BUDGET_SECS")]
    budget_secs: Option<u64>,
    #[arg(long, env = "DIAGSYNC_BUDGET_NODES")]
    budget_nodes: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(s) = self.budget_secs {
            b.max_time = Some(Duration::from_secs(s));
        }
        if let Some(n) = self.budget_nodes {
            b.max_nodes = Some(n);
        }
        b
    }

    fn options(&self) -> SearchOptions {
        SearchOptions { budget: self.budget(), threads: Some(self.threads), no_symmetry: false, seed: self.seed }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    Clique,
    Coclique,
    Decide,
}

#[derive(ValueEnum, Clone, Copy)]
enum Side {
    Clique,
    Coclique,
}

#[derive(ValueEnum, Clone, Copy)]
enum BaseClique {
    FromSearch,
    Sylow,
}

#[derive(ValueEnum, Clone, Copy)]
enum SenseArg {
    Atmost,
    Exact,
}

#[derive(ValueEnum, Clone, Copy)]
enum WitnessKind {
    Factorisation,
    Sharp,
    Spreading,
    HalfIntersection,
}

#[derive(ValueEnum, Clone, Copy)]
enum GraphFormat {
    Descriptor,
    Dimacs,
}

/// Process outcome: definitive answers exit 0, budget-limited ones 2.
enum Outcome {
    Definitive,
    Unknown,
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    emit(out, text.as_bytes())
}

fn graph<'g>(g: &'g Group, classes: &[String]) -> Result<ClassUnionGraph<'g>> {
    let ids = parse_class_labels(g, ClassKind::Fused, classes)?;
    ClassUnionGraph::new(g, ClassKind::Fused, &ids)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Analyze { q, budget, probe_nodes, timings, table, out } => {
            let config = AnalyzeConfig {
                budget: budget.budget(),
                probe_nodes,
                threads: Some(budget.threads),
                seed: budget.seed,
                timings,
            };
            let report = analyze(q, &config)?;
            if table {
                eprint!("{}", report.render_table());
            }
            emit(&out, report.to_json()?.as_bytes())?;
            Ok(if report.is_definitive() { Outcome::Definitive } else { Outcome::Unknown })
        }
        Command::Scheme { q, csv, out } => {
            let g = Group::new(q)?;
            let s = rational_scheme(&g)?;
            let summary = summarize_scheme(&s)?;
            if csv {
                let mut text = format!("eigenspace,{}\n", summary.labels.join(","));
                for (i, row) in summary.q.iter().enumerate() {
                    text += &format!("E{i},{}\n", row.join(","));
                }
                emit(&out, text.as_bytes())?;
            } else {
                emit_json(&out, &summary)?;
            }
            Ok(Outcome::Definitive)
        }
        Command::Feasibility { q, classes, out } => {
            let g = Group::new(q)?;
            let s = rational_scheme(&g)?;
            let opts = FeasibilityOptions::default();
            let all = match classes {
                Some(c) => {
                    let ids = parse_class_labels(&g, ClassKind::Fused, &c)?;
                    let comp = complement_classes(&g, ClassKind::Fused, &ids);
                    let pairs = enumerate_feasible_pairs(&s, &ids, opts)?;
                    vec![(CandidatePair { side: ids, complement: comp }, pairs)]
                }
                None => enumerate_all(&s, opts)?,
            };
            let (summary, table) = summarize_feasibility(&g, &s, &all)?;
            #[derive(Serialize)]
            struct Out<T, U> {
                feasibility: T,
                table: U,
            }
            emit_json(&out, &Out { feasibility: summary, table })?;
            Ok(Outcome::Definitive)
        }
        Command::Search { q, classes, mode, size, objective, budget, out } => {
            let g = Group::new(q)?;
            let gamma = graph(&g, &classes)?;
            let opts = budget.options();
            match mode {
                Mode::Clique | Mode::Coclique => {
                    let cert: CliqueCertificate = match mode {
                        Mode::Clique => max_clique(&gamma, &opts)?,
                        _ => max_coclique(&gamma, &opts)?,
                    };
                    emit_json(&out, &cert)?;
                    Ok(if cert.exhaustive { Outcome::Definitive } else { Outcome::Unknown })
                }
                Mode::Decide => {
                    let k = size.ok_or_else(|| Error::Degenerate("--mode decide needs --size".into()))?;
                    let obj = match objective {
                        Side::Clique => Objective::Clique,
                        Side::Coclique => Objective::Coclique,
                    };
                    let cert: DecisionCertificate = find_clique_of_size(&gamma, obj, k, None, &opts)?;
                    emit_json(&out, &cert)?;
                    Ok(if cert.outcome == DecisionOutcome::Unknown { Outcome::Unknown } else { Outcome::Definitive })
                }
            }
        }
        Command::Certify { q, classes, base_clique, sense, target, lp_out, budget, out } => {
            let g = Group::new(q)?;
            let gamma = graph(&g, &classes)?;
            let base: Vec<Elem> = match base_clique {
                BaseClique::Sylow => g.unipotent_subgroup(),
                BaseClique::FromSearch => {
                    let c = max_clique(&gamma, &budget.options())?;
                    if c.exhaustive {
                        c.vertices
                    } else {
                        subgroup_clique(&gamma)
                    }
                }
            };
            let sense = match sense {
                SenseArg::Atmost => Sense::AtMostOne,
                SenseArg::Exact => Sense::ExactlyOne,
            };
            let sys = generate_translate_rows(&gamma, &base)?;
            if let Some(path) = &lp_out {
                let inst = IlpInstance::from_system(&sys, g.order(), sense)?;
                let mut f = fs::File::create(path)?;
                export_lp(&inst, &mut f)?;
            }
            let certificate = solve_cover_ilp(&gamma, &sys, sense, target, &budget.options())?;
            let definitive = !matches!(certificate.status, diagsync::certify::CoverStatus::Bracket)
                || target.is_some_and(|k| certificate.upper_bound < k);
            emit_json(&out, &Evidence::Cover { base_clique: base, certificate })?;
            Ok(if definitive { Outcome::Definitive } else { Outcome::Unknown })
        }
        Command::Witness { q, kind, budget, out } => {
            let g = Group::new(q)?;
            match kind {
                WitnessKind::Factorisation => {
                    let f = find_exact_factorisation(&g, budget.budget())?;
                    let found = f.is_some();
                    emit_json(&out, &f)?;
                    Ok(if found { Outcome::Definitive } else { Outcome::Unknown })
                }
                WitnessKind::Sharp => {
                    emit_json(&out, &sharply_transitive_q9(&g)?)?;
                    Ok(Outcome::Definitive)
                }
                WitnessKind::Spreading => {
                    emit_json(&out, &build_spreading_witness(&g)?)?;
                    Ok(Outcome::Definitive)
                }
                WitnessKind::HalfIntersection => {
                    let r = check_half_intersection(&g)?;
                    let holds = r.holds;
                    emit_json(&out, &r)?;
                    if holds {
                        Ok(Outcome::Definitive)
                    } else {
                        Err(Error::WitnessFailed("half-intersection identity fails".into()))
                    }
                }
            }
        }
        Command::Graph { q, classes, format, out } => {
            let g = Group::new(q)?;
            let gamma = graph(&g, &classes)?;
            match format {
                GraphFormat::Descriptor => emit_json(&out, &gamma.descriptor())?,
                GraphFormat::Dimacs => emit(&out, &gamma.dimacs_bytes())?,
            }
            Ok(Outcome::Definitive)
        }
        Command::Verify { file, deep, budget } => {
            let text = fs::read_to_string(&file)?;
            let opts = budget.options();
            let deep = deep.then_some(&opts);
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let summary = if value.get("verdict").is_some() {
                verify_report(&Report::from_json(&text)?, deep)?
            } else if value.get("kind").is_some() {
                verify_evidence(&serde_json::from_value(value)?, deep)?
            } else if value.get("outcome").is_some() {
                let d: DecisionCertificate = serde_json::from_value(value)?;
                verify_evidence(&Evidence::Decision(d), deep)?
            } else {
                let c: CliqueCertificate = serde_json::from_value(value)?;
                let g = Group::new(c.graph.q as u64)?;
                verify_certificate(&g, &c)?;
                verify_evidence(&Evidence::MaxSearch(c), deep)?
            };
            emit_json(&None, &summary)?;
            Ok(Outcome::Definitive)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Definitive) => ExitCode::SUCCESS,
        Ok(Outcome::Unknown) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
