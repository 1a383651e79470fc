use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use gbs::clique::{self, NodeSelect};
use gbs::graph::{self, Graph};
use gbs::io;
use gbs::points::{self, PermanentalSampler};
use gbs::sampler::{self, SampleBatch, SamplerConfig};
use gbs::similarity::{self, Event, FeatureVector};
use gbs::vibronic;
use gbs::{svg, GbsError, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::Run;

#[derive(Args, Debug, Serialize)]
pub struct SamplerFlags {
    /// Per-mode photon cutoff.
    #[arg(long, default_value_t = 5)]
    pub cutoff: usize,
    /// Cutoff used when the tail beyond --cutoff is heavy.
    #[arg(long, default_value_t = 8)]
    pub max_cutoff: usize,
    /// Redraw samples with more photons than this.
    #[arg(long)]
    pub max_photons: Option<usize>,
}

impl SamplerFlags {
    fn config(&self) -> SamplerConfig {
        SamplerConfig { cutoff: self.cutoff, max_cutoff: self.max_cutoff, max_photons: self.max_photons, ..SamplerConfig::default() }
    }
}

fn read_graph(run: &mut Run, path: &Path) -> Result<Graph> {
    let text = run.read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => io::graph_from_edge_csv(&text),
        _ => io::graph_from_json(&text),
    }
}

fn read_batch(run: &mut Run, path: &Path) -> Result<SampleBatch> {
    io::batch_from_jsonl(&run.read(path)?)
}

// ---- sample

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    /// Graph as dense JSON or edge-list CSV.
    #[arg(long)]
    pub graph: PathBuf,
    /// Mean photon number of the encoded device.
    #[arg(long, allow_negative_numbers = true)]
    pub n_mean: f64,
    /// Number of samples.
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Threshold (click) detectors instead of photon-number resolving.
    #[arg(long)]
    pub threshold: bool,
    /// Uniform loss applied to every mode.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub loss: f64,
    #[command(flatten)]
    pub sampler: SamplerFlags,
    /// Output JSONL file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn sample(a: &SampleArgs) -> Result<Run> {
    let mut run = Run::new("sample", a, &a.out);
    let g = read_graph(&mut run, &a.graph)?;
    let batch = sampler::sample(g.kernel(), a.n_mean, a.samples, a.threshold, a.loss, a.seed, a.sampler.config())?;
    run.output(&a.out, io::batch_to_jsonl(&batch));
    Ok(run)
}

// ---- subgraph

#[derive(Args, Debug, Serialize)]
pub struct SubgraphArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Samples in JSONL form, as written by `gbs sample`.
    #[arg(long)]
    pub samples: PathBuf,
    /// Smallest subgraph size searched.
    #[arg(long)]
    pub min: usize,
    /// Largest subgraph size searched.
    #[arg(long)]
    pub max: usize,
    /// Keep only samples with at least this many photons.
    #[arg(long)]
    pub postselect_min: Option<usize>,
    /// Keep only samples with at most this many photons.
    #[arg(long)]
    pub postselect_max: Option<usize>,
    /// Results kept per size.
    #[arg(long, default_value_t = 10)]
    pub max_results: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSON file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also draw the graph with the densest subgraph of size --min.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

fn seeds(run: &mut Run, path: &Path, g: &Graph, lo: Option<usize>, hi: Option<usize>) -> Result<Vec<Vec<usize>>> {
    let mut batch = read_batch(run, path)?;
    if lo.is_some() || hi.is_some() {
        batch = sampler::postselect(&batch, lo.unwrap_or(0), hi.unwrap_or(usize::MAX))?;
    }
    sampler::to_subgraphs(&batch, g.node_count())
}

pub fn subgraph(a: &SubgraphArgs) -> Result<Run> {
    let mut run = Run::new("subgraph", a, &a.out);
    let g = read_graph(&mut run, &a.graph)?;
    let seeds = seeds(&mut run, &a.samples, &g, a.postselect_min, a.postselect_max)?;
    let result = gbs::subgraph::search(&seeds, &g, a.min, a.max, a.max_results, a.seed)?;
    run.output(&a.out, io::result_to_json("dense_subgraphs", &result));
    if let Some(path) = &a.svg {
        let best = result.best(a.min).map(|r| r.nodes.clone()).unwrap_or_default();
        run.output(path, svg::graph(&g, &best, 600.0));
    }
    Ok(run)
}

// ---- clique

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NodeSelectArg {
    Uniform,
    Degree,
}

#[derive(Args, Debug, Serialize)]
pub struct CliqueArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub postselect_min: Option<usize>,
    #[arg(long)]
    pub postselect_max: Option<usize>,
    /// Growth/swap iterations per seed.
    #[arg(long, default_value_t = 10)]
    pub max_iters: usize,
    /// How candidate nodes are chosen during growth and swaps.
    #[arg(long, value_enum, default_value_t = NodeSelectArg::Degree)]
    pub node_select: NodeSelectArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also draw the graph with the largest clique found.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn clique(a: &CliqueArgs) -> Result<Run> {
    let mut run = Run::new("clique", a, &a.out);
    let g = read_graph(&mut run, &a.graph)?;
    let seeds = seeds(&mut run, &a.samples, &g, a.postselect_min, a.postselect_max)?;
    let how = match a.node_select {
        NodeSelectArg::Uniform => NodeSelect::Uniform,
        NodeSelectArg::Degree => NodeSelect::Degree,
    };
    let cliques = clique::search(&seeds, &g, a.max_iters, how, a.seed)?;
    run.output(&a.out, io::result_to_json("cliques", &cliques));
    if let Some(path) = &a.svg {
        run.output(path, svg::graph(&g, cliques.first().map_or(&[][..], |c| &c[..]), 600.0));
    }
    Ok(run)
}

// ---- similarity

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMethod {
    /// Frequencies of events among device samples.
    Sampling,
    /// Monte Carlo estimate over event members.
    Mc,
    /// Exact sum over event members.
    Exact,
}

#[derive(Args, Debug, Serialize)]
pub struct SimilarityArgs {
    /// Graphs to featurize; repeat the flag for several.
    #[arg(long = "graph", required = true)]
    pub graphs: Vec<PathBuf>,
    /// Total photon numbers of the events, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 6])]
    pub ks: Vec<usize>,
    /// Largest per-mode count inside an event.
    #[arg(long, default_value_t = 2)]
    pub n_max: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub n_mean: f64,
    #[arg(long, value_enum, default_value_t = FeatureMethod::Mc)]
    pub method: FeatureMethod,
    /// Device samples per graph (sampling method).
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Monte Carlo draws per event (mc method).
    #[arg(long, default_value_t = 1000)]
    pub n_mc: usize,
    #[command(flatten)]
    pub sampler: SamplerFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV with raw and normalised features.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn similarity(a: &SimilarityArgs) -> Result<Run> {
    let mut run = Run::new("similarity", a, &a.out);
    let mut rows = Vec::new();
    for (i, path) in a.graphs.iter().enumerate() {
        let g = read_graph(&mut run, path)?;
        let seed = a.seed.wrapping_add(i as u64);
        let f = match a.method {
            FeatureMethod::Sampling => {
                let batch = sampler::sample(g.kernel(), a.n_mean, a.samples, false, 0.0, seed, a.sampler.config())?;
                similarity::feature_vector_sampling(&batch, &a.ks, a.n_max)?
            }
            FeatureMethod::Mc => similarity::feature_vector_mc(g.kernel(), a.n_mean, &a.ks, a.n_max, a.n_mc, seed)?,
            FeatureMethod::Exact => {
                let values = a
                    .ks
                    .iter()
                    .map(|&k| similarity::event_probability_exact(g.kernel(), a.n_mean, &Event::new(k, a.n_max, g.node_count())?))
                    .collect::<Result<Vec<f64>>>()?;
                FeatureVector { ks: a.ks.clone(), n_max: a.n_max, values, n_samples: 0 }
            }
        };
        rows.push((path.display().to_string(), f));
    }
    run.output(&a.out, io::features_to_csv(&rows));
    Ok(run)
}

// ---- points

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Permanental,
    Hafnian,
}

#[derive(Args, Debug, Serialize)]
pub struct PointsArgs {
    /// Point coordinates, one point per CSV row.
    #[arg(long)]
    pub coords: PathBuf,
    /// RBF kernel length scale.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub n_mean: f64,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Process::Permanental)]
    pub process: Process,
    /// Condition permanental samples on exactly this many points.
    #[arg(long)]
    pub fixed_size: Option<usize>,
    /// Attempts per sample when conditioning on --fixed-size.
    #[arg(long, default_value_t = 100_000)]
    pub max_attempts: usize,
    #[command(flatten)]
    pub sampler: SamplerFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSONL file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also plot the first sample over the point set.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn points(a: &PointsArgs) -> Result<Run> {
    let mut run = Run::new("points", a, &a.out);
    let space = io::points_from_csv(&run.read(&a.coords)?)?;
    let k = points::rbf_kernel(&space, a.sigma)?;
    let batch = match a.process {
        Process::Permanental => {
            let s = PermanentalSampler::new(&k, a.n_mean)?;
            match a.fixed_size {
                Some(j) => s.sample_many_fixed(a.samples, j, a.seed, a.max_attempts)?,
                None => {
                    if a.samples == 0 {
                        return Err(GbsError::Validation("n_samples must be at least 1".into()));
                    }
                    s.sample_many(a.samples, a.seed)
                }
            }
        }
        Process::Hafnian => {
            if a.fixed_size.is_some() {
                return Err(GbsError::Validation("--fixed-size applies to the permanental process only".into()));
            }
            points::hafnian_sample(&k, a.n_mean, a.samples, a.seed, a.sampler.config())?
        }
    };
    run.output(&a.out, io::batch_to_jsonl(&batch));
    if let Some(path) = &a.svg {
        let highlight = batch.samples.first().map(sampler::support).unwrap_or_default();
        run.output(path, svg::points(&space, &highlight, 600.0, 600.0));
    }
    Ok(run)
}

// ---- vibronic

#[derive(Args, Debug, Serialize)]
pub struct VibronicArgs {
    /// Molecule as JSON {w, wp, Ud, delta, T}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram bin width in cm^-1.
    #[arg(long, default_value_t = 10.0)]
    pub bin_width: f64,
    /// Lorentzian half-width in cm^-1.
    #[arg(long, default_value_t = vibronic::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Lower end of the histogram range (cm^-1).
    #[arg(long, requires = "range_hi", allow_hyphen_values = true)]
    pub range_lo: Option<f64>,
    /// Upper end of the histogram range (cm^-1).
    #[arg(long, requires = "range_lo", allow_hyphen_values = true)]
    pub range_hi: Option<f64>,
    #[command(flatten)]
    pub sampler: SamplerFlags,
    /// Spectrum CSV; an SVG plot is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// SVG path (default: --out with an .svg extension).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Also keep the raw samples as JSONL.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

pub fn vibronic(a: &VibronicArgs) -> Result<Run> {
    let mut run = Run::new("vibronic", a, &a.out);
    let input = io::vibronic_from_json(&run.read(&a.input)?)?;
    let params = vibronic::gbs_params(&input)?;
    let batch = vibronic::sample_vibronic(&params, a.samples, a.seed, a.sampler.config())?;
    let energies = vibronic::energies(&batch, &input.w, &input.wp)?;
    let range = a.range_lo.zip(a.range_hi);
    let spectrum = vibronic::spectrum(&energies, a.bin_width, a.gamma, range)?;
    run.output(&a.out, io::spectrum_to_csv(&spectrum));
    let svg_path = a.svg.clone().unwrap_or_else(|| a.out.with_extension("svg"));
    run.output(&svg_path, svg::spectrum(&spectrum, 800.0, 400.0));
    if let Some(path) = &a.samples_out {
        run.output(path, io::batch_to_jsonl(&batch));
    }
    Ok(run)
}

// ---- gen

#[derive(Subcommand, Debug, Serialize)]
pub enum GenCommand {
    /// 30-node graph: ER(20, 0.5) joined to a planted dense ER(10, 0.875).
    Planted {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON, or edge-list CSV for a .csv path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Erdos-Renyi graph.
    Er {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two Gaussian clusters over a uniform background, as CSV.
    Clusters {
        #[arg(long, default_value_t = 100)]
        per_cluster: usize,
        #[arg(long, default_value_t = 200)]
        background: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Square lattice of points, as CSV.
    Lattice {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn graph_text(g: &Graph, out: &Path) -> String {
    match out.extension().and_then(|e| e.to_str()) {
        Some("csv") => io::graph_to_edge_csv(g),
        _ => io::graph_to_json(g),
    }
}

pub fn gen(cmd: &GenCommand) -> Result<Run> {
    match cmd {
        GenCommand::Planted { seed, out, svg: svg_path } => {
            let mut run = Run::new("gen planted", cmd, out);
            let g = graph::generate_planted(*seed);
            run.output(out, graph_text(&g, out));
            if let Some(path) = svg_path {
                let planted: Vec<usize> = (20..30).collect();
                run.output(path, svg::graph(&g, &planted, 600.0));
            }
            Ok(run)
        }
        GenCommand::Er { nodes, p, seed, out } => {
            if !(0.0..=1.0).contains(p) {
                return Err(GbsError::Validation(format!("edge probability {p} outside [0, 1]")));
            }
            let mut run = Run::new("gen er", cmd, out);
            let g = graph::erdos_renyi(*nodes, *p, &mut ChaCha8Rng::seed_from_u64(*seed));
            run.output(out, graph_text(&g, out));
            Ok(run)
        }
        GenCommand::Clusters { per_cluster, background, seed, out } => {
            let mut run = Run::new("gen clusters", cmd, out);
            run.output(out, io::points_to_csv(&points::clustered_space(*seed, *per_cluster, *background)?));
            Ok(run)
        }
        GenCommand::Lattice { rows, cols, spacing, out } => {
            if !(*spacing > 0.0) || !spacing.is_finite() {
                return Err(GbsError::Validation(format!("spacing must be positive, got {spacing}")));
            }
            let mut run = Run::new("gen lattice", cmd, out);
            run.output(out, io::points_to_csv(&points::lattice(*rows, *cols, *spacing)?));
            Ok(run)
        }
    }
}
