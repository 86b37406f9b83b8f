mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use poreid_core::enhancement::stft_enhance;
use poreid_core::evaluation::{parse_manifest, run_benchmark, write_ground_truth, BenchmarkConfig};
use poreid_core::geometry::{Point, SimilarityTransform};
use poreid_core::identification::{
    identify_minutiae, identify_with_scores, parse_score_file, rank_scores, rerank, should_apply_pores, Gallery,
    RankedCandidate,
};
use poreid_core::imaging::{load_image, save_image, GrayImage};
use poreid_core::matching::match_pores;
use poreid_core::minutiae::{match_minutiae, read_minutiae_template, read_pairs, write_minutiae_template};
use poreid_core::pores::{read_pore_template, write_pore_template, PoreExtractor, PoreTemplate};
use poreid_core::synthetic::{derive_latent, generate, LatentParams, Region, SynthParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use config::Config;

/// Sweat-pore extraction, pore matching and pore-assisted identification.
#[derive(Debug, Parser)]
#[command(name = "poreid", version)]
struct Cli {
    /// `key=value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for gallery and corpus operations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Resolution of input images, overriding their `.meta` sidecars.
    #[arg(long, global = true)]
    ppi: Option<u32>,
    /// Input images have light ridges on a dark background.
    #[arg(long, global = true)]
    invert: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the STFT-enhanced image.
    Enhance {
        #[arg(long = "in", value_name = "IMAGE")]
        input: PathBuf,
        #[arg(long, value_name = "IMAGE")]
        out: PathBuf,
    },
    /// Detect pores and write a pore template.
    Extract {
        #[arg(long = "in", value_name = "IMAGE")]
        input: PathBuf,
        #[arg(long, value_name = "TEMPLATE")]
        out: PathBuf,
        /// Binarization confidence in percent.
        #[arg(long)]
        confidence: Option<f64>,
        /// Source id written into the template; defaults to the file stem.
        #[arg(long)]
        id: Option<String>,
    },
    /// Match a latent pore template against a rolled one.
    Match(MatchArgs),
    /// Rank a gallery against a latent.
    Identify(IdentifyArgs),
    /// Re-rank an existing candidate list with pore evidence.
    Rerank(RerankArgs),
    /// Score extraction against ground truth over a manifest.
    Evaluate(EvaluateArgs),
    /// Generate synthetic prints with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long, value_name = "TEMPLATE")]
    latent: PathBuf,
    #[arg(long, value_name = "TEMPLATE")]
    rolled: PathBuf,
    #[arg(long, value_name = "TEMPLATE")]
    latent_minutiae: PathBuf,
    #[arg(long, value_name = "TEMPLATE")]
    rolled_minutiae: PathBuf,
    /// Minutia correspondences; computed by the built-in matcher if absent.
    #[arg(long, value_name = "FILE")]
    pairs: Option<PathBuf>,
    /// Match tolerance at 1000 ppi, pixels.
    #[arg(long)]
    delta: Option<f64>,
    /// Also print one `MATCH l r weight` line per pore match.
    #[arg(long)]
    audit: bool,
}

#[derive(Debug, Args)]
#[group(skip)]
struct LatentArgs {
    #[arg(long, value_name = "TEMPLATE")]
    latent_minutiae: PathBuf,
    #[arg(long, value_name = "TEMPLATE", group = "latent_source")]
    latent_pores: Option<PathBuf>,
    /// Extract latent pores from this image instead of reading a template.
    #[arg(long, value_name = "IMAGE", group = "latent_source")]
    latent_image: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PoreUse {
    /// Consult pores only when minutiae are weak.
    Auto,
    Always,
    Never,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    /// Lines of `id minutiae_path pore_path`.
    #[arg(long, value_name = "MANIFEST")]
    gallery: PathBuf,
    #[command(flatten)]
    latent: LatentArgs,
    /// External minutiae scores (`id score` lines) replacing the built-in matcher.
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pores: PoreUse,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RerankArgs {
    #[arg(long, value_name = "MANIFEST")]
    gallery: PathBuf,
    #[command(flatten)]
    latent: LatentArgs,
    /// Candidate list: a CSV written by `identify` or an `id score` file.
    #[arg(long, value_name = "FILE")]
    candidates: PathBuf,
    /// Size of the re-ranked block.
    #[arg(long)]
    top: Option<usize>,
    /// Weight of the minutiae rank in the fused rank.
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Lines of `image_path truth_path`.
    #[arg(long, value_name = "MANIFEST")]
    manifest: PathBuf,
    /// Comma-separated confidences in percent.
    #[arg(long, value_delimiter = ',')]
    confidences: Option<Vec<f64>>,
    /// Scoring radius at 1000 ppi, pixels.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Number of prints; seeds run from `--seed` upward.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    ridge_period: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    deformation: f64,
    /// Also derive a rotated, cropped, lightly distorted latent per print.
    #[arg(long)]
    latents: bool,
    /// Side of the square latent crop.
    #[arg(long, default_value_t = 300)]
    latent_size: usize,
}

/// Errors in how the program was invoked, as opposed to bad input data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(if e.downcast_ref::<Usage>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_INPUT
            })
        }
    }
}

/// The error chain joined by `: `, skipping causes whose text the previous
/// message already contains.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let s = cause.to_string();
        if !last.contains(&s) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&s);
        }
        last = s;
    }
    out
}

struct Ctx {
    config: Config,
    ppi: Option<u32>,
    invert: bool,
}

impl Ctx {
    fn image(&self, path: &Path) -> Result<GrayImage> {
        let img = load_image(path, self.ppi)?;
        Ok(if self.invert { img.inverted() } else { img })
    }

    fn extractor(&self) -> Result<PoreExtractor> {
        Ok(PoreExtractor::stft(
            self.config.enhancement.clone(),
            self.config.extraction.clone(),
        )?)
    }
}

fn run(cli: Cli) -> Result<u8> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config.set(k.trim(), v).map_err(|e| usage(format!("--set {kv}: {e}")))?;
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("configuring worker threads")?;
    }
    let mut ctx = Ctx {
        config,
        ppi: cli.ppi,
        invert: cli.invert,
    };
    match cli.command {
        Command::Enhance { input, out } => {
            let img = ctx.image(&input)?;
            save_image(&stft_enhance(&img, &ctx.config.enhancement)?, &out)?;
            Ok(0)
        }
        Command::Extract {
            input,
            out,
            confidence,
            id,
        } => {
            if let Some(c) = confidence {
                ctx.config.extraction.confidence = c;
            }
            let img = ctx.image(&input)?;
            let id = id.unwrap_or_else(|| stem(&input));
            let t = ctx.extractor()?.extract(&img, &id)?;
            write_file(&out, &write_pore_template(&t)?)?;
            Ok(0)
        }
        Command::Match(a) => cmd_match(&mut ctx, a),
        Command::Identify(a) => cmd_identify(&ctx, a),
        Command::Rerank(a) => cmd_rerank(&mut ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&mut ctx, a),
        Command::Synth(a) => cmd_synth(&ctx, a),
    }
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().replace(char::is_whitespace, "_"))
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "image".into())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_match(ctx: &mut Ctx, a: MatchArgs) -> Result<u8> {
    if let Some(d) = a.delta {
        ctx.config.matching.delta_at_1000ppi = d;
    }
    let lp = read_pore_template(&a.latent)?;
    let rp = read_pore_template(&a.rolled)?;
    let lm = read_minutiae_template(&a.latent_minutiae)?;
    let rm = read_minutiae_template(&a.rolled_minutiae)?;
    let pairs = match &a.pairs {
        Some(p) => read_pairs(p)?,
        None => match_minutiae(&lm, &rm, &ctx.config.matcher),
    };
    let r = match_pores(&lp, &rp, &pairs, &lm, &rm, &ctx.config.matching)?;
    let mut s = format!("SCORE {:.6}  MODE {}  MATCHES {}\n", r.score, r.mode, r.matches.len());
    if a.audit {
        for e in &r.matches {
            writeln!(s, "MATCH {} {} {:.6}", e.left, e.right, e.weight)?;
        }
    }
    emit(None, &s)?;
    Ok(0)
}

fn latent_templates(ctx: &Ctx, a: &LatentArgs) -> Result<(poreid_core::MinutiaeTemplate, PoreTemplate)> {
    let lm = read_minutiae_template(&a.latent_minutiae)?;
    let lp = match (&a.latent_pores, &a.latent_image) {
        (Some(p), _) => read_pore_template(p)?,
        (None, Some(img)) => ctx.extractor()?.extract(&ctx.image(img)?, &lm.source_id)?,
        (None, None) => return Err(usage("one of --latent-pores or --latent-image is required")),
    };
    Ok((lm, lp))
}

fn ranklist_csv(list: &[RankedCandidate]) -> String {
    let mut rows: Vec<&RankedCandidate> = list.iter().collect();
    rows.sort_by_key(|c| c.final_index);
    let mut s = String::from("rank,id,minutiae_score,pore_score,final_index\n");
    for (i, c) in rows.iter().enumerate() {
        let pore = c.pore_score.map(|p| format!("{p:.6}")).unwrap_or_default();
        writeln!(s, "{},{},{:.6},{},{}", i + 1, c.id, c.minutiae_score, pore, c.final_index).unwrap();
    }
    s
}

fn cmd_identify(ctx: &Ctx, a: IdentifyArgs) -> Result<u8> {
    let gallery = Gallery::load_manifest(&a.gallery)?;
    let (lm, lp) = latent_templates(ctx, &a.latent)?;
    let list = match &a.scores {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            identify_with_scores(parse_score_file(&text)?, &gallery)?
        }
        None => identify_minutiae(&lm, &gallery, &ctx.config.matcher),
    };
    let apply = !list.is_empty()
        && match a.pores {
            PoreUse::Always => true,
            PoreUse::Never => false,
            PoreUse::Auto => should_apply_pores(&lm, &list, &ctx.config.gate),
        };
    let list = if apply {
        rerank(&list, &lm, &lp, &gallery, &ctx.config.rerank_params())?
    } else {
        list
    };
    eprintln!(
        "{} candidates; pore re-ranking {}",
        list.len(),
        if apply { "applied" } else { "not applied" }
    );
    emit(a.out.as_deref(), &ranklist_csv(&list))?;
    Ok(0)
}

/// Reads either an `identify` CSV (minutiae scores column) or `id score` lines.
fn read_candidates(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.clone().find(|l| !l.trim().is_empty()).unwrap_or("");
    if !header.starts_with("rank,") {
        return Ok(parse_score_file(&text)?);
    }
    let cols: Vec<&str> = header.trim().split(',').collect();
    let id_col = cols.iter().position(|c| *c == "id");
    let score_col = cols.iter().position(|c| *c == "minutiae_score");
    let (Some(id_col), Some(score_col)) = (id_col, score_col) else {
        bail!("{}: candidate CSV needs id and minutiae_score columns", path.display());
    };
    let mut out = Vec::new();
    for (i, line) in lines.by_ref().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        let (Some(id), Some(score)) = (f.get(id_col), f.get(score_col)) else {
            bail!("{}: line {} has too few columns", path.display(), i + 1);
        };
        let score: f64 = score
            .parse()
            .with_context(|| format!("{}: line {}: invalid score {score:?}", path.display(), i + 1))?;
        out.push((id.to_string(), score));
    }
    Ok(out)
}

fn cmd_rerank(ctx: &mut Ctx, a: RerankArgs) -> Result<u8> {
    if let Some(n) = a.top {
        ctx.config.rerank_n = n;
    }
    if let Some(w) = a.weight {
        ctx.config.rerank_w = w;
    }
    if ctx.config.rerank_n == 0 || !(0.0..=1.0).contains(&ctx.config.rerank_w) {
        return Err(usage("rerank needs N >= 1 and w in [0, 1]"));
    }
    let gallery = Gallery::load_manifest(&a.gallery)?;
    let (lm, lp) = latent_templates(ctx, &a.latent)?;
    let list = rank_scores(read_candidates(&a.candidates)?);
    if list.is_empty() {
        bail!("{}: no candidates", a.candidates.display());
    }
    let fused = rerank(&list, &lm, &lp, &gallery, &ctx.config.rerank_params())?;
    emit(a.out.as_deref(), &ranklist_csv(&fused))?;
    Ok(0)
}

fn cmd_evaluate(ctx: &mut Ctx, a: EvaluateArgs) -> Result<u8> {
    if let Some(c) = a.confidences {
        ctx.config.confidences = c;
    }
    if let Some(r) = a.radius {
        ctx.config.radius_at_1000ppi = r;
    }
    let text = fs::read_to_string(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;
    let cfg = BenchmarkConfig {
        confidences: ctx.config.confidences.clone(),
        enhancement: ctx.config.enhancement.clone(),
        extraction: ctx.config.extraction.clone(),
        radius_at_1000ppi: ctx.config.radius_at_1000ppi,
        ppi_override: ctx.ppi,
    };
    let report = run_benchmark(&entries, &cfg);
    let mut s = String::from("# poreid evaluate\n");
    s.push_str(&ctx.config.echo());
    s.push_str(&report.to_csv());
    emit(a.out.as_deref(), &s)?;
    for (image, err) in &report.failures {
        eprintln!("failed: {image}: {err}");
    }
    Ok(if report.is_partial() { EXIT_PARTIAL } else { 0 })
}

fn cmd_synth(ctx: &Ctx, a: SynthArgs) -> Result<u8> {
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let base = match ctx.ppi {
        Some(p) => SynthParams::at_ppi(p),
        None => SynthParams::default(),
    };
    let mut manifest = String::new();
    for seed in a.seed..a.seed + a.count {
        let params = SynthParams {
            seed,
            width: a.width.unwrap_or(base.width),
            height: a.height.unwrap_or(base.height),
            ridge_period: a.ridge_period.unwrap_or(base.ridge_period),
            noise_level: a.noise,
            deformation_amplitude: a.deformation,
            ..base.clone()
        };
        let print = generate(&params)?;
        let name = print.truth_minutiae.source_id.clone();
        write_outputs(&a.out_dir, &name, &print, &mut manifest)?;
        if a.latents {
            let latent = derive_latent(&print, &latent_params(&params, a.latent_size, seed)?)?;
            let name = latent.truth_minutiae.source_id.clone();
            write_outputs(&a.out_dir, &name, &latent, &mut manifest)?;
        }
    }
    let path = a.out_dir.join("MANIFEST");
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    f.write_all(manifest.as_bytes())?;
    emit(None, &manifest)?;
    Ok(0)
}

fn write_outputs(dir: &Path, name: &str, s: &poreid_core::SynthOutput, manifest: &mut String) -> Result<()> {
    let img = format!("{name}.pgm");
    let truth = format!("{name}.poregt");
    save_image(&s.image, &dir.join(&img))?;
    write_file(&dir.join(&truth), &write_ground_truth(&s.truth_pores)?)?;
    write_file(&dir.join(format!("{name}.mnttpl")), &write_minutiae_template(&s.truth_minutiae)?)?;
    writeln!(manifest, "{img} {truth}")?;
    Ok(())
}

/// A rotation of up to 20 degrees about the print centre followed by a
/// square crop near the centre, with mild noise and distortion.
fn latent_params(p: &SynthParams, side: usize, seed: u64) -> Result<LatentParams> {
    let (w, h) = (p.width as f64, p.height as f64);
    let room = w.min(h) / 2.0 - side as f64 * std::f64::consts::FRAC_1_SQRT_2;
    if room < 0.0 {
        return Err(usage(format!("latent size {side} does not fit a {}x{} print", p.width, p.height)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7e);
    let theta = rng.random_range(-20f64..20.0).to_radians();
    let c = Point::new(w / 2.0, h / 2.0);
    let turned = SimilarityTransform::new(1.0, theta, 0.0, 0.0).apply(c);
    let t = SimilarityTransform::new(1.0, theta, c.x - turned.x, c.y - turned.y);
    let jitter = (room * std::f64::consts::FRAC_1_SQRT_2 * 0.8).floor();
    let mut offset = |centre: f64| {
        let d = if jitter > 0.0 { rng.random_range(-jitter..=jitter) } else { 0.0 };
        (centre - side as f64 / 2.0 + d).round().max(0.0) as usize
    };
    let crop = Region::new(offset(c.x), offset(c.y), side, side);
    Ok(LatentParams {
        transform: t,
        crop,
        noise_level: 0.05,
        deformation_amplitude: 3.0,
        seed,
    })
}
