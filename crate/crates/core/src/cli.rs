//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{stage_seed, PipelineConfig, RUN_CONFIG_FILE};
use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::mesh::{load_mesh, read_ply, MeshFormat, TriangleMesh};
use crate::pipeline::{decode, encode, SEED_EVAL};
use crate::quality::{evaluate_reconstruction, storage_report, MetricsReport, Reconstruction, StorageReport};
use crate::reconstruct::{encode_cloud_ply, run_mesher};
use crate::sh::{read_representation, serialize, write_representation, HEADER_LEN};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_GATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "sharc",
    version,
    about = "Encode meshes as spherical-harmonic reference points and decode them to oriented point clouds"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a mesh (OBJ or PLY) into a .sharc file.
    Encode {
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the per-iteration selection trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigArgs,
    },
    /// Decode a .sharc file into an oriented PLY point cloud.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Output path for the external mesher (default: <output stem>_mesh.ply).
        #[arg(long)]
        mesh_output: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigArgs,
    },
    /// Compare a reconstruction (mesh or point cloud) against the ground-truth mesh.
    Eval {
        ground_truth: PathBuf,
        reconstruction: PathBuf,
        /// .sharc file for the storage report.
        #[arg(long)]
        representation: Option<PathBuf>,
        /// Samples drawn per side [default: 100000].
        #[arg(long)]
        n_eval: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use squared nearest-neighbour distances for the Chamfer term.
        #[arg(long)]
        squared: bool,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit with status 4 if the Chamfer distance (percent) exceeds this.
        #[arg(long)]
        fail_above_cd: Option<f64>,
        /// Exit with status 4 if the bidirectional Hausdorff distance (percent) exceeds this.
        #[arg(long)]
        fail_above_hd: Option<f64>,
    },
    /// Print the header and anchors of a .sharc file.
    Info {
        input: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run encode, decode and eval over a parameter grid and write a CSV.
    Sweep {
        mesh: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated bandwidths.
        #[arg(long, default_value = "16,32,64,128")]
        bandwidths: String,
        /// Comma-separated proximity thresholds.
        #[arg(long, default_value = "0.2")]
        tau: String,
        /// Comma-separated generator-filter neighbour counts.
        #[arg(long, default_value = "3")]
        k_gen_values: String,
        #[command(flatten)]
        overrides: ConfigArgs,
    },
}

/// Settings shared by the pipeline commands. Unset flags fall back to the
/// config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML config file (same keys as the emitted run.config).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root random seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Proximity threshold in normalized units [default: 0.2].
    #[arg(long)]
    pub tau_prox: Option<f64>,
    /// Coverage weight [default: 1].
    #[arg(long)]
    pub w_cov: Option<f64>,
    /// Centrality weight [default: 1].
    #[arg(long)]
    pub w_cen: Option<f64>,
    /// Uniformity weight [default: 1].
    #[arg(long)]
    pub w_uni: Option<f64>,
    /// Cap on the number of anchors [default: unlimited].
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Rays per inside/outside vote [default: 3].
    #[arg(long)]
    pub votes: Option<usize>,
    /// Interior candidate pool size [default: 10000].
    #[arg(long)]
    pub pool_size: Option<usize>,
    /// Surface samples used for coverage [default: 4000].
    #[arg(long)]
    pub surface_samples: Option<usize>,
    /// Spherical-harmonic bandwidth [default: 64].
    #[arg(long = "L")]
    pub bandwidth: Option<usize>,
    /// Target number of fitting directions [default: 10000].
    #[arg(long)]
    pub n_fit: Option<usize>,
    /// Refinement sweeps of the coefficient fit [default: 10].
    #[arg(long)]
    pub fit_refinements: Option<usize>,
    /// Decoded directions per anchor [default: 20000].
    #[arg(long)]
    pub n_recon: Option<usize>,
    /// Generator filter: keep points whose anchor is among this many nearest [default: 3].
    #[arg(long)]
    pub k_gen: Option<usize>,
    /// Neighbours for PCA normals [default: 16].
    #[arg(long)]
    pub k_pca: Option<usize>,
    /// PCA neighbourhood radius [default: twice the mean point spacing].
    #[arg(long)]
    pub r_pca: Option<f64>,
    /// Disable the Lanczos window when decoding.
    #[arg(long)]
    pub no_lanczos: bool,
    /// External mesher command; `{input}` and `{output}` are substituted.
    #[arg(long)]
    pub mesher: Option<String>,
    /// Evaluation samples per side [default: 100000].
    #[arg(long)]
    pub n_eval: Option<usize>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let cfg = self.merge()?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn merge(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        apply!(
            seed,
            tau_prox,
            w_cov,
            w_cen,
            w_uni,
            max_points,
            votes,
            pool_size,
            surface_samples,
            bandwidth,
            n_fit,
            fit_refinements,
            n_recon,
            k_gen,
            k_pca,
            r_pca,
            mesher,
            n_eval
        );
        if self.no_lanczos {
            cfg.lanczos = false;
        }
        Ok(cfg)
    }
}

pub fn exit_code(err: &SharcError) -> i32 {
    match err.root() {
        SharcError::InvalidArgument(_) => EXIT_USAGE,
        SharcError::Io { .. }
        | SharcError::Malformed { .. }
        | SharcError::BadMagic(_)
        | SharcError::VersionMismatch { .. }
        | SharcError::Truncated { .. }
        | SharcError::NonFinite(_) => EXIT_IO,
        SharcError::EmptyMesh | SharcError::Geometry(_) => EXIT_GEOMETRY,
        SharcError::Stage { .. } => unreachable!("root strips stage tags"),
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure thread pool: {e}");
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Encode {
            mesh,
            output,
            trace,
            overrides,
        } => cmd_encode(&mesh, &output, trace.as_deref(), &overrides),
        Command::Decode {
            input,
            output,
            mesh_output,
            overrides,
        } => cmd_decode(&input, &output, mesh_output.as_deref(), &overrides),
        Command::Eval {
            ground_truth,
            reconstruction,
            representation,
            n_eval,
            seed,
            squared,
            json,
            csv,
            fail_above_cd,
            fail_above_hd,
        } => cmd_eval(&EvalArgs {
            ground_truth,
            reconstruction,
            representation,
            n_eval: n_eval.unwrap_or(crate::quality::DEFAULT_EVAL_SAMPLES),
            seed,
            squared,
            json,
            csv,
            fail_above_cd,
            fail_above_hd,
        }),
        Command::Info { input, json } => cmd_info(&input, json),
        Command::Sweep {
            mesh,
            out_dir,
            bandwidths,
            tau,
            k_gen_values,
            overrides,
        } => cmd_sweep(&mesh, &out_dir, &bandwidths, &tau, &k_gen_values, &overrides),
    }
}

fn load_input_mesh(path: &Path) -> Result<TriangleMesh> {
    let cleaned = load_mesh(path, MeshFormat::from_path(path)?).map_err(|e| e.in_stage("load"))?;
    if cleaned.removed_degenerate > 0 {
        log::warn!("removed {} degenerate triangles", cleaned.removed_degenerate);
    }
    Ok(cleaned.mesh)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| SharcError::io(path, e))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

pub fn cmd_encode(mesh_path: &Path, output: &Path, trace: Option<&Path>, overrides: &ConfigArgs) -> Result<i32> {
    let mut cfg = overrides.resolve()?;
    cfg.input = mesh_path.display().to_string();
    cfg.output = output.display().to_string();
    let bytes = std::fs::read(mesh_path).map_err(|e| SharcError::io(mesh_path, e))?;
    let mesh = load_input_mesh(mesh_path)?;
    let out = encode(&mesh, &cfg)?;
    let written = write_representation(&out.representation, output)?;
    if let Some(t) = trace {
        out.selection.write_trace(t)?;
    }
    let provenance = json!({
        "input": cfg.input,
        "mesh_sha256": sha256_hex(&bytes),
        "triangles": mesh.triangle_count(),
        "anchors": out.representation.anchors.len(),
        "selection_status": out.selection.status,
        "uncovered_samples": out.selection.uncovered,
        "candidate_pool": out.pool_size,
        "pool_acceptance_rate": out.pool_acceptance,
        "bandwidth": out.representation.bandwidth,
        "bytes": written,
        "timings_seconds": out.timings,
        "trace": trace.map(|t| t.display().to_string()),
        "config": cfg,
    });
    write_file(&with_suffix(output, ".json"), to_json(&provenance))?;
    cfg.save(&sibling(output, RUN_CONFIG_FILE))?;
    println!(
        "{} anchors ({}), {} bytes, {:.2}s (preprocess {:.2}s, selection {:.2}s, fitting {:.2}s)",
        out.representation.anchors.len(),
        out.selection.status.describe(),
        written,
        out.timings.total,
        out.timings.preprocess,
        out.timings.selection,
        out.timings.fitting
    );
    Ok(0)
}

pub fn cmd_decode(input: &Path, output: &Path, mesh_output: Option<&Path>, overrides: &ConfigArgs) -> Result<i32> {
    let mut cfg = overrides.resolve()?;
    cfg.input = input.display().to_string();
    cfg.output = output.display().to_string();
    let rep = read_representation(input)?;
    let out = decode(&rep, &cfg)?;
    let bytes = encode_cloud_ply(&out.cloud, &rep).map_err(|e| e.in_stage("decode"))?;
    write_file(output, &bytes)?;
    cfg.save(&sibling(output, RUN_CONFIG_FILE))?;
    let s = out.cloud.stats;
    println!(
        "kept {} of {} evaluated points (dropped {} non-positive radii, {} by generator filter; {} degenerate normals) in {:.2}s",
        s.kept,
        s.evaluated,
        s.dropped_radius,
        s.raw - s.kept,
        s.degenerate_normals,
        out.seconds
    );
    if !cfg.mesher.is_empty() {
        let target = match mesh_output {
            Some(p) => p.to_path_buf(),
            None => {
                let stem = output.file_stem().unwrap_or_default().to_string_lossy();
                sibling(output, &format!("{stem}_mesh.ply"))
            }
        };
        run_mesher(&cfg.mesher, output, &target).map_err(|e| e.in_stage("mesher"))?;
        println!("mesh written to {}", target.display());
    }
    Ok(0)
}

enum LoadedRecon {
    Mesh(TriangleMesh),
    Cloud(Vec<Vec3>),
}

fn load_reconstruction(path: &Path) -> Result<LoadedRecon> {
    match MeshFormat::from_path(path)? {
        MeshFormat::Ply => {
            let ply = read_ply(path)?;
            if ply.faces.is_empty() {
                Ok(LoadedRecon::Cloud(ply.vertices))
            } else {
                Ok(LoadedRecon::Mesh(TriangleMesh::new(ply.vertices, ply.faces)?.mesh))
            }
        }
        MeshFormat::Obj => Ok(LoadedRecon::Mesh(load_input_mesh(path)?)),
    }
}

pub struct EvalArgs {
    pub ground_truth: PathBuf,
    pub reconstruction: PathBuf,
    pub representation: Option<PathBuf>,
    pub n_eval: usize,
    pub seed: u64,
    pub squared: bool,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub fail_above_cd: Option<f64>,
    pub fail_above_hd: Option<f64>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<i32> {
    let gt = load_input_mesh(&args.ground_truth)?;
    let recon = load_reconstruction(&args.reconstruction)?;
    let seed = stage_seed(args.seed, SEED_EVAL);
    let metrics = match &recon {
        LoadedRecon::Mesh(m) => evaluate_reconstruction(&gt, Reconstruction::Mesh(m), args.n_eval, seed, args.squared),
        LoadedRecon::Cloud(c) => {
            evaluate_reconstruction(&gt, Reconstruction::Cloud(c), args.n_eval, seed, args.squared)
        }
    }
    .map_err(|e| e.in_stage("eval"))?;
    let storage = match &args.representation {
        Some(rep) => Some(storage_report(rep, &args.ground_truth)?),
        None => None,
    };
    let report = json!({ "metrics": metrics, "storage": storage });
    println!("{}", to_json(&report));
    if let Some(p) = &args.json {
        write_file(p, to_json(&report))?;
    }
    if let Some(p) = &args.csv {
        write_file(p, metrics_csv(&metrics, storage.as_ref()))?;
    }
    let cd_fail = args.fail_above_cd.is_some_and(|t| metrics.chamfer > t);
    let hd_fail = args.fail_above_hd.is_some_and(|t| metrics.hausdorff_bi > t);
    if cd_fail || hd_fail {
        eprintln!("metric threshold exceeded");
        return Ok(EXIT_GATE);
    }
    Ok(0)
}

fn metrics_csv(m: &MetricsReport, storage: Option<&StorageReport>) -> String {
    let (orig, rep, rho) = match storage {
        Some(s) => (
            s.original_bytes.to_string(),
            s.representation_bytes.to_string(),
            s.ratio.to_string(),
        ),
        None => Default::default(),
    };
    format!(
        "{},original_bytes,representation_bytes,rho\n{},{orig},{rep},{rho}\n",
        MetricsReport::CSV_HEADER,
        m.csv_row()
    )
}

pub fn cmd_info(input: &Path, as_json: bool) -> Result<i32> {
    let rep = read_representation(input)?;
    let bytes = serialize(&rep)?.len();
    if as_json {
        let anchors: Vec<[f32; 3]> = rep.anchors.iter().map(|a| a.position).collect();
        let value = json!({
            "version": rep.version,
            "bandwidth": rep.bandwidth,
            "anchors": rep.anchors.len(),
            "bytes": bytes,
            "header_bytes": HEADER_LEN,
            "transform": rep.transform,
            "anchor_positions": anchors,
        });
        println!("{}", to_json(&value));
        return Ok(0);
    }
    println!("format version  {}", rep.version);
    println!("bandwidth       {}", rep.bandwidth);
    println!("anchors         {}", rep.anchors.len());
    println!("bytes           {bytes} (header {HEADER_LEN})");
    println!("center          {:?}", rep.transform.center);
    println!("scale           {}", rep.transform.scale);
    for (i, a) in rep.anchors.iter().enumerate() {
        println!(
            "  anchor {i:4}  {:>10.6} {:>10.6} {:>10.6}  a00 = {:.6}",
            a.position[0], a.position[1], a.position[2], a.coeffs[0]
        );
    }
    Ok(0)
}

fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(SharcError::InvalidArgument(format!("--{name} grid is empty")));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| SharcError::InvalidArgument(format!("bad --{name} value `{s}`")))
        })
        .collect()
}

pub const SWEEP_HEADER: &str =
    "bandwidth,tau_prox,k_gen,anchors,representation_bytes,original_bytes,rho,d_cd,eps_fwd,eps_bwd,eps_bi,encode_s,decode_s,error";

pub fn cmd_sweep(
    mesh_path: &Path,
    out_dir: &Path,
    bandwidths: &str,
    taus: &str,
    k_gens: &str,
    overrides: &ConfigArgs,
) -> Result<i32> {
    let bandwidths: Vec<usize> = parse_list("bandwidths", bandwidths)?;
    let taus: Vec<f64> = parse_list("tau", taus)?;
    let k_gens: Vec<usize> = parse_list("k-gen-values", k_gens)?;
    // cells override the bandwidth and threshold, so validation happens per cell
    let base = overrides.merge()?;
    let mesh = load_input_mesh(mesh_path)?;
    let original_bytes = std::fs::metadata(mesh_path)
        .map_err(|e| SharcError::io(mesh_path, e))?
        .len();
    std::fs::create_dir_all(out_dir).map_err(|e| SharcError::io(out_dir, e))?;
    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut failures = 0;
    for &bandwidth in &bandwidths {
        for &tau in &taus {
            let mut cfg = PipelineConfig {
                bandwidth,
                tau_prox: tau,
                ..base.clone()
            };
            cfg.n_fit = cfg.n_fit.max((bandwidth + 1).pow(2));
            let encoded = cfg.validate().and_then(|_| encode(&mesh, &cfg));
            for &k_gen in &k_gens {
                cfg.k_gen = k_gen;
                let row = encoded
                    .as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|enc| sweep_cell(&mesh, enc, &cfg, out_dir, original_bytes).map_err(|e| e.to_string()));
                match row {
                    Ok(r) => {
                        let _ = writeln!(csv, "{bandwidth},{tau},{k_gen},{r},");
                    }
                    Err(e) => {
                        failures += 1;
                        log::warn!("sweep cell L={bandwidth} tau={tau} k_gen={k_gen} failed: {e}");
                        let _ = writeln!(csv, "{bandwidth},{tau},{k_gen},,,,,,,,,,,\"{}\"", e.replace('"', "'"));
                    }
                }
            }
        }
    }
    let path = out_dir.join("sweep.csv");
    write_file(&path, &csv)?;
    base.save(&out_dir.join(RUN_CONFIG_FILE))?;
    println!("wrote {} ({failures} failed cells)", path.display());
    Ok(0)
}

fn sweep_cell(
    mesh: &TriangleMesh,
    enc: &crate::pipeline::EncodeOutput,
    cfg: &PipelineConfig,
    out_dir: &Path,
    original_bytes: u64,
) -> Result<String> {
    let rep_path = out_dir.join(format!("L{}_tau{}.sharc", cfg.bandwidth, cfg.tau_prox));
    let rep_bytes = write_representation(&enc.representation, &rep_path)? as u64;
    let dec = decode(&enc.representation, cfg)?;
    let positions: Vec<Vec3> = dec
        .cloud
        .points
        .iter()
        .map(|p| enc.representation.transform.invert(&p.position))
        .collect();
    let metrics = evaluate_reconstruction(
        mesh,
        Reconstruction::Cloud(&positions),
        cfg.n_eval,
        stage_seed(cfg.seed, SEED_EVAL),
        false,
    )?;
    let storage = StorageReport::from_sizes(original_bytes, rep_bytes)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{}",
        enc.representation.anchors.len(),
        rep_bytes,
        original_bytes,
        storage.ratio,
        metrics.chamfer,
        metrics.hausdorff_fwd,
        metrics.hausdorff_bwd,
        metrics.hausdorff_bi,
        enc.timings.total,
        dec.seconds
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "bandwidth = 32\ntau_prox = 0.3\n").unwrap();
        let args = ConfigArgs {
            config: Some(path),
            tau_prox: Some(0.1),
            no_lanczos: true,
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.bandwidth, cfg.tau_prox, cfg.lanczos), (32, 0.1, false));
        assert_eq!(cfg.k_gen, 3);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&SharcError::InvalidArgument("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&SharcError::BadMagic(*b"ABCD").in_stage("decode")), EXIT_IO);
        assert_eq!(
            exit_code(&SharcError::Geometry("x".into()).in_stage("fitting")),
            EXIT_GEOMETRY
        );
        assert_eq!(run(["sharc", "encode"]), EXIT_USAGE);
        assert_eq!(run(["sharc", "--help"]), 0);
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list::<usize>("x", "16, 32").unwrap(), vec![16, 32]);
        assert!(parse_list::<usize>("x", "").is_err());
        assert!(parse_list::<f64>("x", "a").is_err());
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
