use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weathervis::config::SubsetConfig;
use weathervis::pipeline::{query_artifacts, Artifacts};
use weathervis::core::visgraph::AverageNormalization as Average;
use weathervis::{stages, ConditionArg, Error, GraphFormat, Metric, Result, RunConfig, ScaleMode};

/// Weather-weighted visibility graphs over 3D meshes.
#[derive(Parser)]
#[command(name = "weathervis", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the walkable lattice: nodes.csv and grid.json.
    Grid {
        #[command(flatten)]
        scene: SceneArgs,
    },
    /// Build the visibility graph over a node set.
    Graph {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        graph: GraphArgs,
        /// Nodes from a previous `grid` step; sampled afresh when absent.
        #[arg(long)]
        nodes: Option<PathBuf>,
    },
    /// Per-edge weights for each condition.
    Weight {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        conditions: ConditionArgs,
    },
    /// Per-node degree, S_S and S_A for each condition.
    Score {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        conditions: ConditionArgs,
    },
    /// Render score files as PPM images with JSON sidecars.
    Heatmap {
        /// grid.json from the `grid` step.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        nodes: PathBuf,
        /// Score files, one per condition.
        #[arg(long = "scores", required = true)]
        scores: Vec<PathBuf>,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long, default_value = "weathervis-out")]
        out: PathBuf,
    },
    /// Score named points against the whole grid and rank them.
    Query {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        conditions: ConditionArgs,
        /// `name=x,y[,z]` or `x,y[,z]`; repeatable.
        #[arg(long = "point", required = true)]
        points: Vec<String>,
        #[arg(long)]
        max_los: Option<f64>,
    },
    /// The full pipeline: nodes, graph, scores, heatmaps and a manifest.
    Run {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        conditions: ConditionArgs,
        #[command(flatten)]
        render: RenderArgs,
    },
}

#[derive(Args)]
struct SceneArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lattice spacing in meters.
    #[arg(long)]
    spacing: Option<f64>,
    /// `min_x,min_y,max_x,max_y`.
    #[arg(long, value_delimiter = ',', num_args = 4, allow_negative_numbers = true)]
    bounds: Option<Vec<f64>>,
    #[arg(long)]
    eye_height: Option<f64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GraphArgs {
    /// Skip pairs farther apart than this many meters.
    #[arg(long)]
    max_los: Option<f64>,
    #[arg(long, value_parser = parse_graph_format)]
    graph_format: Option<GraphFormat>,
    /// Subset target `x,y[,z]`; repeatable. Every node is a source.
    #[arg(long = "target")]
    targets: Vec<String>,
}

#[derive(Args)]
struct GraphInput {
    #[arg(long)]
    graph: PathBuf,
    /// TOML run configuration for conditions and attenuation settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConditionArgs {
    /// `kind[:rate[:wavelength_nm]]`, `fog-ha[:wavelength_nm]`, `clear` or
    /// `custom:sigma`; repeatable. Replaces the config's conditions.
    #[arg(long = "condition")]
    conditions: Vec<ConditionArg>,
    /// Divisor for S_A: visible `neighbors` or all `candidates`.
    #[arg(long, value_parser = parse_average)]
    average_over: Option<Average>,
}

#[derive(Args)]
struct RenderArgs {
    /// degree, sum or avg; repeatable. All three by default.
    #[arg(long = "metric")]
    metrics: Vec<Metric>,
    /// One color range per metric across all conditions.
    #[arg(long)]
    shared_scale: bool,
}

fn parse_graph_format(s: &str) -> std::result::Result<GraphFormat, String> {
    match s {
        "json" => Ok(GraphFormat::Json),
        "binary" => Ok(GraphFormat::Binary),
        _ => Err(format!("`{s}` is not json or binary")),
    }
}

fn parse_average(s: &str) -> std::result::Result<Average, String> {
    match s {
        "neighbors" => Ok(Average::Neighbors),
        "candidates" => Ok(Average::Candidates),
        _ => Err(format!("`{s}` is not neighbors or candidates")),
    }
}

fn parse_coordinates(s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("`{s}` is not a list of numbers")))?;
    if !(values.len() == 2 || values.len() == 3) {
        return Err(Error::Config(format!("`{s}`: expected x,y or x,y,z")));
    }
    Ok(values)
}

fn parse_point(k: usize, s: &str) -> Result<(String, Vec<f64>)> {
    let (name, coords) = match s.split_once('=') {
        Some((name, coords)) => (name.trim().to_string(), coords),
        None => (format!("p{}", k + 1), s),
    };
    let file_safe = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !file_safe {
        return Err(Error::Config(format!("point name `{name}` must be letters, digits, - or _")));
    }
    Ok((name, parse_coordinates(coords)?))
}

impl SceneArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.mesh) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(mesh)) => RunConfig::new(mesh),
            (None, None) => return Err(Error::Config("give --mesh or --config".into())),
        };
        if let (Some(_), Some(mesh)) = (&self.config, &self.mesh) {
            config.mesh = mesh.clone();
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(s) = self.spacing {
            config.grid.spacing = s;
        }
        if let Some(b) = &self.bounds {
            config.grid.bounds = Some([b[0], b[1], b[2], b[3]]);
        }
        if let Some(h) = self.eye_height {
            config.grid.eye_height = h;
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
        Ok(config)
    }
}

impl GraphArgs {
    fn apply(&self, config: &mut RunConfig) -> Result<()> {
        if self.max_los.is_some() {
            config.max_los = self.max_los;
        }
        if let Some(f) = self.graph_format {
            config.graph_format = f;
        }
        if !self.targets.is_empty() {
            let targets = self.targets.iter().map(|t| parse_coordinates(t)).collect::<Result<_>>()?;
            config.subset = Some(SubsetConfig { targets });
        }
        Ok(())
    }
}

impl GraphInput {
    fn config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::new(""),
        };
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        Ok(config)
    }
}

impl ConditionArgs {
    fn apply(&self, config: &mut RunConfig) {
        if !self.conditions.is_empty() {
            config.conditions = self.conditions.iter().map(|c| c.0).collect();
        }
        if let Some(a) = self.average_over {
            config.average = a;
        }
    }
}

impl RenderArgs {
    fn apply(&self, config: &mut RunConfig) {
        if !self.metrics.is_empty() {
            config.metrics = self.metrics.clone();
        }
        if self.shared_scale {
            config.scale = ScaleMode::Shared;
        }
    }
}

/// Prints to stdout; a closed pipe (`| head`) is not an error.
macro_rules! say {
    ($($t:tt)*) => {
        let _ = writeln!(std::io::stdout(), $($t)*);
    };
}

fn commit(artifacts: Artifacts, out: &Path) -> Result<()> {
    let files = artifacts.commit(out).map_err(|e| e.in_stage("write"))?;
    for f in files {
        say!("{}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Grid { scene } => {
            let config = scene.config()?;
            commit(stages::grid(&config)?, &config.out)
        }
        Command::Graph { scene, graph, nodes } => {
            let mut config = scene.config()?;
            graph.apply(&mut config)?;
            commit(stages::graph(&config, nodes.as_deref())?, &config.out)
        }
        Command::Weight { input, conditions } => {
            let mut config = input.config()?;
            conditions.apply(&mut config);
            commit(stages::weight(&config, &input.graph)?, &config.out)
        }
        Command::Score { input, conditions } => {
            let mut config = input.config()?;
            conditions.apply(&mut config);
            commit(stages::score(&config, &input.graph)?, &config.out)
        }
        Command::Heatmap {
            grid,
            nodes,
            scores,
            render,
            out,
        } => {
            let metrics = if render.metrics.is_empty() { Metric::ALL.to_vec() } else { render.metrics };
            let scale = if render.shared_scale { ScaleMode::Shared } else { ScaleMode::PerRun };
            let scores: Vec<&Path> = scores.iter().map(PathBuf::as_path).collect();
            commit(stages::heatmap(&grid, &nodes, &scores, &metrics, scale)?, &out)
        }
        Command::Query {
            scene,
            conditions,
            points,
            max_los,
        } => {
            let mut config = scene.config()?;
            conditions.apply(&mut config);
            if max_los.is_some() {
                config.max_los = max_los;
            }
            let points = points
                .iter()
                .enumerate()
                .map(|(k, p)| parse_point(k, p))
                .collect::<Result<Vec<_>>>()?;
            let result = weathervis::query_points(&config, &points)?;
            for c in &result.report.conditions {
                say!("{} (sigma = {} 1/m)", c.resolved.label, c.resolved.sigma);
                for e in &c.ranking {
                    say!("  {}: degree {} S_S {:.3} S_A {:.6}", e.point, e.degree, e.sum, e.avg);
                }
            }
            commit(query_artifacts(&result), &config.out)
        }
        Command::Run {
            scene,
            graph,
            conditions,
            render,
        } => {
            let mut config = scene.config()?;
            graph.apply(&mut config)?;
            conditions.apply(&mut config);
            render.apply(&mut config);
            let summary = weathervis::run_pipeline(&config)?;
            for f in &summary.files {
                say!("{}", f.display());
            }
            eprintln!(
                "{} nodes, {} edges, {} condition(s)",
                summary.nodes,
                summary.edges,
                summary.conditions.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // messages already carry their causes
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
