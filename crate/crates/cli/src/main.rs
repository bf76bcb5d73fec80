//! `ludelab`: command-line front end for the heuristic-prediction
//! workbench.  Five subcommands cover the pipeline: `validate` checks a
//! corpus, `ludemes` emits the feature matrix, `tournament` measures
//! heuristic win rates, `evaluate` cross-validates the regression suite,
//! and `cluster` embeds and explains the game landscape.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ludelab::cluster::{analyze, embedding_csv, render_explanation, TsneConfig};
use ludelab::dataset::{from_corpus, join_labels, read_csv, write_csv, DatasetError};
use ludelab::engine::{load_corpus, read_manifest, CompileError, CorpusEntry};
use ludelab::parser::LudemeTree;
use ludelab::regress::{evaluate_suite, mae_per_slot_csv, report_csv};
use ludelab::tournament::{aggregate_csv, run_tournament, GameReport, TournamentConfig};

#[derive(Parser)]
#[command(
    name = "ludelab",
    version,
    about = "Heuristic-prediction workbench for ludemic game descriptions"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = one per core).  Outputs
    /// are identical for every thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and compile every description in a corpus directory.
    Validate {
        /// Directory of .gdl descriptions.
        corpus: PathBuf,
    },
    /// Emit the games x ludemes feature matrix as CSV.
    Ludemes {
        /// Directory of .gdl descriptions.
        corpus: PathBuf,
        /// Output CSV path.
        #[arg(short, long)]
        output: PathBuf,
        /// Restrict rows to games the engine can play.
        #[arg(long)]
        playable_only: bool,
    },
    /// Run the 27-slot heuristic tournament for every playable game.
    Tournament {
        /// Directory of .gdl descriptions.
        corpus: PathBuf,
        /// Output directory for per-game JSON and aggregate.csv.
        #[arg(short, long)]
        output: PathBuf,
        /// Master seed; every match seed derives from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Search depth for every agent.
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// Evaluation games per sampled opponent combination.
        #[arg(long, default_value_t = 10)]
        games: usize,
    },
    /// Leave-one-out-cross-validate the regression suite on tournament labels.
    Evaluate {
        /// Feature matrix CSV (build it with `ludemes --playable-only`).
        #[arg(long)]
        features: PathBuf,
        /// Directory of per-game tournament JSON reports.
        #[arg(long)]
        results: PathBuf,
        /// Output directory for report.csv and mae_per_slot.csv.
        #[arg(short, long)]
        output: PathBuf,
        /// Seed for the stochastic learners.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Embed the feature matrix with t-SNE, cluster it, and explain the clusters.
    Cluster {
        /// Feature matrix CSV.
        #[arg(long)]
        features: PathBuf,
        /// Output directory for embedding.csv and explanation.txt.
        #[arg(short, long)]
        output: PathBuf,
        /// Seed for the embedding initialisation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target perplexity (clamped down when the corpus is small).
        #[arg(long, default_value_t = 30.0)]
        perplexity: f64,
        /// Gradient-descent iterations.
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        /// Gradient-descent learning rate.
        #[arg(long, default_value_t = 200.0)]
        learning_rate: f64,
        /// DBSCAN radius (default: 5% of the embedding bounding-box diagonal).
        #[arg(long)]
        eps: Option<f64>,
        /// DBSCAN core-point threshold (the point itself counts).
        #[arg(long, default_value_t = 4)]
        min_pts: usize,
        /// Explanation tree depth cap.
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
    },
}

/// A classified failure; the variant picks the process exit code.
enum Failure {
    /// Bad or inconsistent input data (exit 2).
    Data(String),
    /// A bug or an impossible condition (exit 3).
    Internal(String),
}

fn data(err: impl Display) -> Failure {
    Failure::Data(err.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let usage_ok = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if usage_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Validate { corpus } => cmd_validate(&corpus),
        Command::Ludemes {
            corpus,
            output,
            playable_only,
        } => cmd_ludemes(&corpus, &output, playable_only),
        Command::Tournament {
            corpus,
            output,
            seed,
            depth,
            games,
        } => cmd_tournament(&corpus, &output, seed, depth, games),
        Command::Evaluate {
            features,
            results,
            output,
            seed,
        } => cmd_evaluate(&features, &results, &output, seed),
        Command::Cluster {
            features,
            output,
            seed,
            perplexity,
            iterations,
            learning_rate,
            eps,
            min_pts,
            max_depth,
        } => cmd_cluster(ClusterArgs {
            features,
            output,
            seed,
            perplexity,
            iterations,
            learning_rate,
            eps,
            min_pts,
            max_depth,
        }),
    }
}

fn load(corpus: &Path) -> Result<Vec<CorpusEntry>, Failure> {
    load_corpus(corpus).map_err(data)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn make_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path)
        .map_err(|e| Failure::Data(format!("cannot create {}: {e}", path.display())))
}

/// Output file stem for a game name: lowercased, spaces to dashes.
fn slug(name: &str) -> String {
    name.to_lowercase().replace(' ', "-")
}

fn cmd_validate(corpus: &Path) -> Result<(), Failure> {
    let entries = load(corpus)?;
    check_manifest(corpus, &entries)?;
    let mut playable = 0usize;
    let mut parse_only = 0usize;
    let mut failed = 0usize;
    for entry in &entries {
        match &entry.compiled {
            Ok(spec) => {
                playable += 1;
                println!(
                    "{}: ok (n={}, {} ludemes)",
                    entry.name,
                    spec.player_count,
                    entry.ludemes().len()
                );
            }
            Err(CompileError::UnsupportedLudeme(l)) => {
                parse_only += 1;
                println!("{}: parse-only (unsupported ludeme: {l})", entry.name);
            }
            Err(other) => {
                failed += 1;
                println!("{}: error: {other}", entry.name);
            }
        }
    }
    println!(
        "{} games: {playable} playable, {parse_only} parse-only",
        entries.len()
    );
    if failed > 0 {
        Err(Failure::Data(format!(
            "{failed} description(s) failed to compile"
        )))
    } else {
        Ok(())
    }
}

/// When the corpus ships a manifest, the loaded games must match it.
fn check_manifest(corpus: &Path, entries: &[CorpusEntry]) -> Result<(), Failure> {
    let path = corpus.join("manifest.txt");
    if !path.exists() {
        return Ok(());
    }
    let manifest = read_manifest(&path).map_err(data)?;
    if manifest.len() != entries.len() {
        return Err(Failure::Data(format!(
            "manifest lists {} games but the directory holds {}",
            manifest.len(),
            entries.len()
        )));
    }
    for (entry, row) in entries.iter().zip(&manifest) {
        let file = entry
            .file
            .file_name()
            .and_then(|f| f.to_str())
            .unwrap_or_default();
        if entry.name != row.name || file != row.file {
            return Err(Failure::Data(format!(
                "manifest row `{},{},{}` does not match {file} ({})",
                row.name, row.players, row.file, entry.name
            )));
        }
        if let Some(declared) = declared_players(&entry.tree) {
            if declared != row.players {
                return Err(Failure::Data(format!(
                    "{}: manifest says {} players, description says {declared}",
                    entry.name, row.players
                )));
            }
        }
    }
    Ok(())
}

/// Player count straight from the parse tree, so parse-only games can be
/// checked against the manifest too.
fn declared_players(tree: &LudemeTree) -> Option<u8> {
    tree.args().iter().find_map(|arg| {
        if arg.head() == Some("players") {
            arg.args()
                .first()
                .and_then(|n| n.as_number())
                .filter(|n| (0.0..=255.0).contains(n) && n.fract() == 0.0)
                .map(|n| n as u8)
        } else {
            None
        }
    })
}

fn cmd_ludemes(corpus: &Path, output: &Path, playable_only: bool) -> Result<(), Failure> {
    let entries = load(corpus)?;
    let matrix = from_corpus(&entries, playable_only).map_err(data)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        make_dir(dir)?;
    }
    write_csv(&matrix, output).map_err(data)?;
    println!(
        "wrote {} ({} games x {} ludemes)",
        output.display(),
        matrix.n_games(),
        matrix.n_features()
    );
    Ok(())
}

fn cmd_tournament(
    corpus: &Path,
    output: &Path,
    seed: u64,
    depth: u32,
    games: usize,
) -> Result<(), Failure> {
    if depth == 0 {
        return Err(Failure::Data("--depth must be at least 1".into()));
    }
    if games == 0 {
        return Err(Failure::Data("--games must be at least 1".into()));
    }
    let entries = load(corpus)?;
    make_dir(output)?;
    let config = TournamentConfig {
        search_depth: depth,
        per_combination_games: games,
        ..TournamentConfig::default()
    };
    let mut reports: Vec<GameReport> = Vec::new();
    for entry in &entries {
        let Ok(spec) = &entry.compiled else {
            eprintln!("{}: skipped (parse-only)", entry.name);
            continue;
        };
        let started = Instant::now();
        let report = run_tournament(spec, seed, &config);
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?;
        let path = output.join(format!("{}.json", slug(&entry.name)));
        write_file(&path, &(json + "\n"))?;
        eprintln!(
            "{}: {} slots in {:.1}s",
            entry.name,
            report.entries.len(),
            started.elapsed().as_secs_f64()
        );
        reports.push(report);
    }
    if reports.is_empty() {
        return Err(Failure::Data("no playable games in the corpus".into()));
    }
    write_file(
        &output.join("aggregate.csv"),
        &aggregate_csv(&reports, seed, &config),
    )?;
    println!(
        "wrote {} game report(s) and aggregate.csv to {}",
        reports.len(),
        output.display()
    );
    Ok(())
}

/// Read every `*.json` tournament report in a directory, sorted by path.
fn read_reports(dir: &Path) -> Result<Vec<GameReport>, Failure> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
        let report: GameReport = serde_json::from_str(&text).map_err(|e| {
            Failure::Data(format!(
                "{} is not a tournament report: {e}",
                path.display()
            ))
        })?;
        reports.push(report);
    }
    if reports.is_empty() {
        return Err(Failure::Data(format!(
            "no .json tournament reports in {}",
            dir.display()
        )));
    }
    Ok(reports)
}

fn cmd_evaluate(features: &Path, results: &Path, output: &Path, seed: u64) -> Result<(), Failure> {
    let mut matrix = read_csv(features).map_err(data)?;
    let reports = read_reports(results)?;
    join_labels(&mut matrix, &reports).map_err(|e| match e {
        DatasetError::MissingResults(game) => Failure::Data(format!(
            "no tournament report for `{game}` (build the matrix with `ludemes --playable-only`)"
        )),
        other => data(other),
    })?;
    let suite = evaluate_suite(&matrix, seed).map_err(data)?;
    make_dir(output)?;
    write_file(
        &output.join("report.csv"),
        &report_csv(&suite, seed, matrix.n_games()),
    )?;
    write_file(
        &output.join("mae_per_slot.csv"),
        &mae_per_slot_csv(&suite, &matrix.label_names, seed),
    )?;
    for r in &suite {
        println!(
            "{}: MAE {:.2} +/- {:.2}, expected win-rate {:.2}, regret {:.2}",
            r.algorithm.name(),
            r.mae_mean,
            r.mae_stdev,
            r.expected_win_rate,
            r.regret
        );
    }
    println!(
        "wrote report.csv and mae_per_slot.csv to {}",
        output.display()
    );
    Ok(())
}

struct ClusterArgs {
    features: PathBuf,
    output: PathBuf,
    seed: u64,
    perplexity: f64,
    iterations: usize,
    learning_rate: f64,
    eps: Option<f64>,
    min_pts: usize,
    max_depth: usize,
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), Failure> {
    let matrix = read_csv(&args.features).map_err(data)?;
    let n = matrix.n_games();
    let mut perplexity = args.perplexity;
    let positive = perplexity > 0.0; // NaN is rejected too
    if !positive {
        return Err(Failure::Data("--perplexity must be positive".into()));
    }
    if perplexity >= n as f64 {
        let clamped = ((n as f64 - 1.0) / 3.0).max(2.0);
        eprintln!("perplexity {perplexity} is too large for {n} games; using {clamped:.2}");
        perplexity = clamped;
    }
    let config = TsneConfig {
        perplexity,
        iterations: args.iterations,
        learning_rate: args.learning_rate,
        seed: args.seed,
    };
    let analysis =
        analyze(&matrix, &config, args.eps, args.min_pts, args.max_depth).map_err(data)?;
    make_dir(&args.output)?;
    write_file(
        &args.output.join("embedding.csv"),
        &embedding_csv(&matrix, &analysis, args.seed),
    )?;
    let explanation = render_explanation(&analysis.explanation);
    write_file(&args.output.join("explanation.txt"), &explanation)?;
    print!("{explanation}");
    println!(
        "wrote embedding.csv and explanation.txt to {}",
        args.output.display()
    );
    Ok(())
}
