use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use tweetscape::synth::{self, CorpusSpec};
use tweetscape::terrain;
use tweetscape::{layout, GeoBounds, SceneFrame, ScenePoint};
use tweetscape_server::ServiceConfig;

/// Serve a tweetscape scene over HTTP, or run one of the offline tools.
#[derive(Parser, Debug)]
#[command(name = "tweetscape", version)]
struct Cli {
    #[command(flatten)]
    serve: ServeArgs,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// TOML service configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Port to listen on (overrides the config's listen port).
    #[arg(long, global = true)]
    port: Option<u16>,
    /// Corpus TSV (overrides the config).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// ASCII heightmap grid (overrides the config).
    #[arg(long, global = true)]
    heightmap: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic corpus and heightmap.
    Generate {
        #[arg(long, default_value = "fixtures")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 6_000)]
        rows: usize,
        #[arg(long, default_value_t = 20)]
        corrupt: usize,
        /// Heightmap resolution in meters per cell.
        #[arg(long, default_value_t = 2.0)]
        resolution: f64,
        #[arg(long, default_value_t = 2014)]
        seed: u64,
    },
    /// Smooth, mesh and chunk the heightmap, then write binary STL.
    ExportStl {
        #[arg(long)]
        out: PathBuf,
    },
    /// Time placement over growing corpora and print CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2014)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_config(args: &ServeArgs) -> Result<ServiceConfig> {
    let mut config = match &args.config {
        Some(path) => ServiceConfig::load(path)?,
        None => ServiceConfig::default(),
    };
    if let Some(port) = args.port {
        config.listen = SocketAddr::new(config.listen.ip(), port);
    }
    if let Some(p) = &args.dataset {
        config.dataset = p.clone();
    }
    if let Some(p) = &args.heightmap {
        config.heightmap = Some(p.clone());
    }
    Ok(config)
}

fn generate(out_dir: &Path, rows: usize, corrupt: usize, resolution: f64, seed: u64) -> Result<()> {
    if resolution.is_nan() || resolution <= 0.0 {
        bail!("resolution must be positive");
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let bounds = GeoBounds::cambridge_campus();
    let corpus = synth::generate_corpus(&CorpusSpec::new(rows, corrupt, seed));
    let tsv = out_dir.join("tweets.tsv");
    std::fs::write(&tsv, &corpus.bytes).with_context(|| format!("writing {}", tsv.display()))?;

    let frame = SceneFrame::new(bounds)?;
    let cols = (frame.width_m / resolution).floor() as usize + 1;
    let grid_rows = (frame.depth_m / resolution).floor() as usize + 1;
    let hm = synth::campus_heightmap(cols, grid_rows, resolution, seed);
    let asc = out_dir.join("campus.asc");
    terrain::save_heightmap(&hm, &asc)?;

    let toml = format!(
        "dataset = \"tweets.tsv\"\nheightmap = \"campus.asc\"\n\n[bounds]\nmin_lat = {}\nmin_lon = {}\nmax_lat = {}\nmax_lon = {}\n",
        bounds.min_lat, bounds.min_lon, bounds.max_lat, bounds.max_lon
    );
    std::fs::write(out_dir.join("tweetscape.toml"), toml)?;
    println!(
        "wrote {} ({} rows, {} corrupt), {} ({cols}x{grid_rows}) and tweetscape.toml",
        tsv.display(),
        rows,
        corpus.malformed(),
        asc.display()
    );
    Ok(())
}

fn export_stl(config: &ServiceConfig, out: &Path) -> Result<()> {
    let Some(path) = &config.heightmap else {
        bail!("export-stl needs --heightmap or a heightmap in the config");
    };
    let hm = terrain::load_heightmap(path)?;
    let smoothed = terrain::smooth(&hm, config.terrain.smooth_iterations, config.terrain.smooth_lambda)?;
    let mesh = terrain::triangulate(&smoothed, ScenePoint::ORIGIN)?;
    let chunks = terrain::chunk_mesh(&mesh, config.terrain.max_vertices)?;
    let bytes = terrain::export_stl(chunks.iter().map(|c| &c.mesh), out)?;
    println!("{} chunks, {} triangles, {bytes} bytes -> {}", chunks.len(), mesh.triangles.len(), out.display());
    Ok(())
}

fn bench(config: &ServiceConfig, n: &[usize], seed: u64, out: Option<&Path>) -> Result<()> {
    let frame = SceneFrame::new(config.bounds)?;
    let report = layout::benchmark_placement(n, &frame, &config.stack, seed)?;
    let csv = report.to_csv();
    match out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();

    match cli.command {
        Some(Command::Generate {
            out_dir,
            rows,
            corrupt,
            resolution,
            seed,
        }) => generate(&out_dir, rows, corrupt, resolution, seed),
        Some(Command::ExportStl { out }) => export_stl(&resolve_config(&cli.serve)?, &out),
        Some(Command::Bench { n, seed, out }) => bench(&resolve_config(&cli.serve)?, &n, seed, out.as_deref()),
        None => {
            let config = resolve_config(&cli.serve)?;
            let service = tweetscape_server::boot(config).await?;
            service.run_until_signal().await?;
            Ok(())
        }
    }
}
