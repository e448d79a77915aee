use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pidgraph::codes::ingest_text_regions;
use pidgraph::config::Config;
use pidgraph::eval::{evaluate, EvalParams};
use pidgraph::flow::{query_all, query_paths, FlowPath, NodeKind};
use pidgraph::overlay::{render_overlay, save_overlay};
use pidgraph::pipeline::{extract, ExtractInputs};
use pidgraph::raster::{binarize, GrayImage};
use pidgraph::result::PidGraph;
use pidgraph::symbols::{
    augment_patches, export_mask_boundaries, export_patches, ingest_symbol_detections, tile_sheet,
    Augmentation,
};
use pidgraph::synth::{finish_corpus, load_spec, write_sheet, SheetSpec};
use pidgraph::Error;
use rayon::prelude::*;

mod exit {
    pub const INPUT: u8 = 2;
    pub const SCHEMA: u8 = 3;
    pub const QUERY: u8 = 4;
    pub const RENDER: u8 = 5;
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema { .. } | Error::Validation { .. } => exit::SCHEMA,
        Error::OutletNotFound(_) => exit::QUERY,
        Error::DimensionMismatch { .. } | Error::ImageWrite { .. } => exit::RENDER,
        _ => exit::INPUT,
    }
}

#[derive(Parser)]
#[command(
    name = "pid-graph",
    version,
    about = "Digitize raster P&ID sheets into flow forests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a result graph from one or more sheet images.
    Extract(ExtractArgs),
    /// Cut a sheet (and optional symbol mask) into training patches.
    Tile(TileArgs),
    /// Generate a synthetic corpus with ground truth.
    Synth(SynthArgs),
    /// Score a predicted result against ground truth.
    Eval(EvalArgs),
    /// List root-to-inlet paths of a result's forest.
    Query(QueryArgs),
    /// Draw a result over its sheet.
    Overlay(OverlayArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; defaults to $PID_GRAPH_CONFIG, then built-in values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Output file for a single image (stdout when omitted).
    #[arg(short, long, conflicts_with = "out_dir")]
    output: Option<PathBuf>,
    /// Directory receiving `<stem>.json` per image.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Transcribed text regions from an external detector.
    #[arg(long)]
    text_json: Option<PathBuf>,
    /// Symbol detections from an external detector.
    #[arg(long)]
    symbols_json: Option<PathBuf>,
    /// Also write an overlay PNG (single image only).
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    template_dir: Option<PathBuf>,
    #[arg(long)]
    no_symbol_matching: bool,
    #[arg(long)]
    symbol_threshold: Option<f64>,
    #[arg(long)]
    junction_window: Option<usize>,
    #[arg(long)]
    tag_max_dist: Option<f64>,
    #[arg(long)]
    code_max_dist: Option<f64>,
    #[arg(long)]
    symbol_max_gap: Option<f64>,
    #[arg(long)]
    erase_margin: Option<i32>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct TileArgs {
    image: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Binary symbol mask of the same size; its boundaries become annotations.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    boundary_dilation: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    augment: Option<Vec<String>>,
    #[arg(long)]
    max_shift: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// Sheet spec JSON; defaults apply when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Seed range `start..end`, or a single count `n` meaning `0..n`.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct EvalArgs {
    pred: PathBuf,
    gt: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    #[arg(long, default_value_t = 3.0)]
    endpoint_tol: f64,
    /// Write the metrics JSON here (`-` for stdout instead of the table).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    result: PathBuf,
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    outlet: Option<usize>,
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct OverlayArgs {
    image: PathBuf,
    result: PathBuf,
    out: PathBuf,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter {
            name: "jobs",
            reason: e.to_string(),
        })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_extract(a: ExtractArgs) -> Result<(), Error> {
    let mut config = Config::resolve(a.config.config.as_deref())?;
    if let Some(d) = a.template_dir {
        config.template_dir = Some(d);
    }
    if a.no_symbol_matching {
        config.match_symbols = false;
    }
    macro_rules! set {
        ($($f:ident),*) => {$( if let Some(v) = a.$f { config.$f = v; } )*};
    }
    set!(
        symbol_threshold,
        junction_window,
        tag_max_dist,
        code_max_dist,
        symbol_max_gap,
        erase_margin
    );
    config.validate()?;

    let single = a.images.len() == 1;
    if !single
        && (a.text_json.is_some()
            || a.symbols_json.is_some()
            || a.overlay.is_some()
            || a.output.is_some())
    {
        return Err(Error::Parameter {
            name: "images",
            reason: "--text-json, --symbols-json, --overlay and --output need exactly one image"
                .into(),
        });
    }
    if !single && a.out_dir.is_none() {
        return Err(Error::Parameter {
            name: "out-dir",
            reason: "required when extracting several images".into(),
        });
    }

    let one = |path: &Path| -> Result<(GrayImage, PidGraph), Error> {
        let image = GrayImage::load(path)?;
        let bounds = Some((image.width(), image.height()));
        let inputs = ExtractInputs {
            text_regions: a
                .text_json
                .as_ref()
                .map(|p| ingest_text_regions(p, bounds))
                .transpose()?,
            symbols: a
                .symbols_json
                .as_ref()
                .map(|p| ingest_symbol_detections(p, bounds))
                .transpose()?,
        };
        let graph = extract(&image, &inputs, &config)?;
        Ok((image, graph))
    };

    if single {
        let (image, graph) = one(&a.images[0])?;
        let out = match (&a.output, &a.out_dir) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(d)) => Some(d.join(stem_json(&a.images[0]))),
            (None, None) => None,
        };
        if let Some(d) = &a.out_dir {
            std::fs::create_dir_all(d).map_err(|source| Error::Io {
                path: d.clone(),
                source,
            })?;
        }
        write_text(out.as_deref(), &graph.to_json())?;
        if let Some(o) = &a.overlay {
            save_overlay(&render_overlay(&image, &graph)?, o)?;
        }
        return Ok(());
    }

    let dir = a.out_dir.clone().expect("checked above");
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    pool(a.jobs)?.install(|| {
        a.images.par_iter().try_for_each(|p| {
            let (_, graph) = one(p)?;
            graph.save(dir.join(stem_json(p)))
        })
    })
}

fn stem_json(p: &Path) -> String {
    format!(
        "{}.json",
        p.file_stem()
            .map_or("sheet".into(), |s| s.to_string_lossy())
    )
}

fn run_tile(a: TileArgs) -> Result<(), Error> {
    let mut cfg = Config::resolve(a.config.config.as_deref())?.annotation;
    if let Some(v) = a.patch_size {
        cfg.patch_size = v;
        if a.stride.is_none() {
            cfg.stride = v;
        }
    }
    if let Some(v) = a.stride {
        cfg.stride = v;
    }
    if let Some(v) = a.boundary_dilation {
        cfg.boundary_dilation = v;
    }
    if let Some(v) = a.max_shift {
        cfg.max_shift = v;
    }
    if let Some(list) = &a.augment {
        cfg.augmentations = list
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| match s.as_str() {
                "translation" => Ok(Augmentation::Translation),
                "rotation" => Ok(Augmentation::Rotation),
                other => Err(Error::Parameter {
                    name: "augment",
                    reason: format!("unknown augmentation `{other}`"),
                }),
            })
            .collect::<Result<_, _>>()?;
    }
    cfg.validate()?;

    let image = GrayImage::load(&a.image)?;
    let boundary = match &a.mask {
        Some(p) => {
            let mask = binarize(&GrayImage::load(p)?);
            if (mask.width(), mask.height()) != (image.width(), image.height()) {
                return Err(Error::Parameter {
                    name: "mask",
                    reason: "mask and image sizes differ".into(),
                });
            }
            Some(export_mask_boundaries(&mask, &cfg)?)
        }
        None => None,
    };
    let patches = tile_sheet(&image, boundary.as_ref(), &cfg)?;
    let patches = augment_patches(&patches, &cfg, a.seed)?;
    export_patches(&a.out, &patches)?;
    println!("{} patches written to {}", patches.len(), a.out.display());
    Ok(())
}

fn parse_seeds(s: &str) -> Result<std::ops::Range<u64>, Error> {
    let bad = || Error::Parameter {
        name: "seeds",
        reason: format!("expected `start..end` or a count, got `{s}`"),
    };
    let range = match s.split_once("..") {
        Some((a, b)) => {
            a.trim().parse().map_err(|_| bad())?..b.trim().parse().map_err(|_| bad())?
        }
        None => 0..s.trim().parse().map_err(|_| bad())?,
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

fn run_synth(a: SynthArgs) -> Result<(), Error> {
    let spec = match &a.spec {
        Some(p) => load_spec(p)?,
        None => SheetSpec::default(),
    };
    spec.validate()?;
    let seeds = parse_seeds(&a.seeds)?;
    std::fs::create_dir_all(&a.out).map_err(|source| Error::Io {
        path: a.out.clone(),
        source,
    })?;
    let entries = pool(a.jobs)?.install(|| {
        seeds
            .clone()
            .into_par_iter()
            .map(|seed| write_sheet(&spec, seed, &a.out))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let manifest = finish_corpus(&spec, entries, &a.out)?;
    println!(
        "{} sheets written to {}",
        manifest.entries.len(),
        a.out.display()
    );
    Ok(())
}

fn run_eval(a: EvalArgs) -> Result<(), Error> {
    let pred = PidGraph::load(&a.pred)?;
    let gt = PidGraph::load(&a.gt)?;
    let params = EvalParams {
        iou: a.iou,
        endpoint_tol: a.endpoint_tol,
    };
    if !(a.iou > 0.0 && a.iou <= 1.0) {
        return Err(Error::Parameter {
            name: "iou",
            reason: "must lie in (0, 1]".into(),
        });
    }
    let metrics = evaluate(&pred, &gt, &params);
    let json = serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n";
    match a.json.as_deref() {
        Some(p) if p == Path::new("-") => print!("{json}"),
        Some(p) => {
            print!("{}", metrics.to_text());
            write_text(Some(p), &json)?;
        }
        None => print!("{}", metrics.to_text()),
    }
    Ok(())
}

fn format_path(p: &FlowPath) -> String {
    let mut parts = Vec::new();
    for step in &p.steps {
        let mut s = match step.node.kind {
            NodeKind::OutletRoot => format!("outlet {}", step.node.id),
            NodeKind::Line => format!("line {}", step.node.id),
            NodeKind::InletLeaf => format!("inlet {}", step.node.id),
        };
        let mut deco = Vec::new();
        if !step.codes.is_empty() {
            deco.push(format!("codes {}", join(&step.codes)));
        }
        if !step.symbols.is_empty() {
            deco.push(format!("symbols {}", join(&step.symbols)));
        }
        if !deco.is_empty() {
            s += &format!(" [{}]", deco.join("; "));
        }
        parts.push(s);
    }
    parts.join(" -> ")
}

fn join(ids: &[usize]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn run_query(a: QueryArgs) -> Result<(), Error> {
    let graph = PidGraph::load(&a.result)?;
    let forest = graph.flow_forest();
    let paths = match a.outlet {
        Some(id) => query_paths(&forest, id, &graph.associations)?,
        None => query_all(&forest, &graph.associations),
    };
    for p in &paths {
        println!("{}", format_path(p));
    }
    Ok(())
}

fn run_overlay(a: OverlayArgs) -> Result<(), Error> {
    let image = GrayImage::load(&a.image)?;
    let graph = PidGraph::load(&a.result)?;
    save_overlay(&render_overlay(&image, &graph)?, &a.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => run_extract(a),
        Command::Tile(a) => run_tile(a),
        Command::Synth(a) => run_synth(a),
        Command::Eval(a) => run_eval(a),
        Command::Query(a) => run_query(a),
        Command::Overlay(a) => run_overlay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pid-graph: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
