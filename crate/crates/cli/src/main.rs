use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use imm_orbits::io::{curve_json, parse_curve, parse_section, to_json, SectionFile};
use imm_orbits::multiplicity::{delta, image_graph, level_partition, LevelPartition};
use imm_orbits::slice::{chart_phi, diagram_summary, normal_frame, tau_push, tube_profile, DiagramOptions};
use imm_orbits::{
    build_arc_cover, cover_tolerance, decide_orbit_equivalence, isotropy_group, primitive_factorization, verify_reparam,
    CurveGeneratorSpec, CurveKind, EquivalenceVerdict, LoopImmersion, ReparamMap, SeparationCertificate,
    ToleranceProfile,
};

const EXIT_DISTINCT: u8 = 3;

#[derive(Parser)]
#[command(name = "imm-orbits", version, about = "Orbits of the reparametrization action on immersed loops")]
struct Cli {
    #[command(flatten)]
    tol: TolFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolFlags {
    /// Image clustering radius (default 1e-3 x diameter).
    #[arg(long, global = true)]
    eps_image: Option<f64>,
    /// Matching and verification tolerance (default 1e-2 x diameter).
    #[arg(long, global = true)]
    eps_match: Option<f64>,
    /// Coefficient tolerance for section comparisons (default 1e-6).
    #[arg(long, global = true)]
    eps_section: Option<f64>,
}

impl TolFlags {
    fn apply(&self, base: ToleranceProfile) -> Result<ToleranceProfile> {
        let mut tol = base;
        if let Some(e) = self.eps_image {
            tol = tol.with_eps_image(e);
        }
        if let Some(e) = self.eps_match {
            tol = tol.with_eps_match(e);
        }
        if let Some(e) = self.eps_section {
            tol = tol.with_eps_section(e);
        }
        tol.check()?;
        Ok(tol)
    }

    fn for_curve(&self, c: &LoopImmersion) -> Result<ToleranceProfile> {
        self.apply(ToleranceProfile::for_curve(c))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a curve file for repeated samples, stalls and bad coordinates.
    Validate { input: Option<PathBuf> },
    /// Resample at equal chord length.
    Resample {
        input: Option<PathBuf>,
        #[arg(long)]
        m: usize,
    },
    /// Image clusters with their branch counts.
    Delta {
        input: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Level-set partition of the image by branch count.
    Partition {
        input: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Decide whether two loops differ by a reparametrization (exit 3 when distinct).
    Equiv { first: PathBuf, second: PathBuf },
    /// Isotropy group of a loop.
    Isotropy { input: Option<PathBuf> },
    /// Primitive loop of which the input is a covering.
    Primitive { input: Option<PathBuf> },
    /// Chart coordinates of a nearby loop, or the loop of a section with --push.
    Chart {
        /// Base loop (omit with --push, which reads the base named in the section file).
        base: Option<PathBuf>,
        /// Loop to express in the chart of `base`.
        curve: Option<PathBuf>,
        #[arg(long, conflicts_with = "curve")]
        push: Option<PathBuf>,
    },
    /// Split a nearby loop into a section and a reparametrization, with the reconstruction residual.
    Split { base: PathBuf, curve: PathBuf },
    /// Walls of the isotropy action on normal sections.
    Walls {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        witnesses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a sample loop.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    Circle,
    Ellipse,
    KFoldCircle,
    FigureEight,
    Rose,
    Fourier,
    TorusCoil,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 600)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Pass word for figure_eight, overriding --p/--q (e.g. AABAB).
    #[arg(long)]
    word: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    radius_upper: f64,
    #[arg(long, default_value_t = 1.0)]
    radius_lower: f64,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 3)]
    petals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
}

impl GenArgs {
    fn spec(&self) -> CurveGeneratorSpec {
        let kind = match self.kind {
            Kind::Circle => CurveKind::Circle,
            Kind::Ellipse => CurveKind::Ellipse { a: self.a, b: self.b },
            Kind::KFoldCircle => CurveKind::KFoldCircle { k: self.k },
            Kind::FigureEight => CurveKind::FigureEight {
                word: self.word.clone().unwrap_or_else(|| format!("{}{}", "A".repeat(self.p), "B".repeat(self.q))),
                radius_upper: self.radius_upper,
                radius_lower: self.radius_lower,
            },
            Kind::Rose => CurveKind::Rose { petals: self.petals },
            Kind::Fourier => CurveKind::Fourier { seed: self.seed },
            Kind::TorusCoil => CurveKind::TorusCoil { q: self.q },
        };
        CurveGeneratorSpec::new(kind, self.m).with_phase(self.phase)
    }
}

fn read_text(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading standard input")?;
            Ok(s)
        }
    }
}

fn read_unchecked(path: Option<&Path>) -> Result<LoopImmersion> {
    let text = read_text(path)?;
    parse_curve(&text).with_context(|| format!("parsing curve from {}", source_name(path)))
}

/// Reads a curve and rejects anything that is not a valid discrete immersion.
fn read_curve(path: Option<&Path>) -> Result<LoopImmersion> {
    let curve = read_unchecked(path)?;
    curve.ensure_valid().with_context(|| format!("curve from {}", source_name(path)))?;
    Ok(curve)
}

fn source_name(path: Option<&Path>) -> String {
    match path {
        Some(p) if p != Path::new("-") => p.display().to_string(),
        _ => "standard input".to_string(),
    }
}

#[derive(Serialize)]
struct ClusterRow<'a> {
    rep: &'a [f64],
    delta: usize,
    branches: &'a [(usize, usize)],
}

#[derive(Serialize)]
struct DeltaOutput<'a> {
    clusters: Vec<ClusterRow<'a>>,
    components: &'a LevelPartition,
}

#[derive(Serialize)]
struct EquivOutput<'a> {
    status: &'static str,
    reparam: Option<&'a ReparamMap>,
    certificate: Option<&'a SeparationCertificate>,
    residual: Option<f64>,
}

#[derive(Serialize)]
struct SplitOutput<'a> {
    section: SectionFile,
    f0: &'a ReparamMap,
    residual: f64,
}

struct Slice {
    frame: imm_orbits::slice::NormalBundleFrame,
    tube: imm_orbits::slice::TubeProfile,
}

fn slice_of(base: &LoopImmersion, tol: &ToleranceProfile) -> Result<Slice> {
    let cover = build_arc_cover(base, cover_tolerance(base, tol.eps_image))?;
    let frame = normal_frame(base);
    let tube = tube_profile(base, &cover)?;
    Ok(Slice { frame, tube })
}

fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(cli: Cli, out: &mut impl Write) -> Result<u8> {
    match &cli.command {
        Command::Validate { input } => {
            let curve = read_unchecked(input.as_deref())?;
            let report = curve.validate();
            writeln!(out, "{}", to_json(&report))?;
            if !report.is_valid() {
                bail!("invalid curve: {report}");
            }
        }
        Command::Resample { input, m } => {
            let curve = read_curve(input.as_deref())?;
            writeln!(out, "{}", curve_json(&curve.resample_arclength(*m)?))?;
        }
        Command::Delta { input, csv } => {
            let curve = read_curve(input.as_deref())?;
            let tol = cli.tol.for_curve(&curve)?;
            let graph = image_graph(&curve, tol.eps_image)?;
            let d = delta(&graph);
            let partition = level_partition(&graph, &d);
            if *csv {
                let coords: Vec<String> = (0..curve.dim()).map(|i| format!("x{i}")).collect();
                writeln!(out, "cluster,delta,component,{},branches", coords.join(","))?;
                for (ci, c) in graph.clusters.iter().enumerate() {
                    let rep: Vec<String> = c.rep.iter().map(|&x| csv_number(x)).collect();
                    let branches: Vec<String> = c.branches.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                    writeln!(
                        out,
                        "{ci},{},{},{},{}",
                        d.values[ci],
                        partition.component_of[ci],
                        rep.join(","),
                        branches.join(" ")
                    )?;
                }
            } else {
                let clusters = graph
                    .clusters
                    .iter()
                    .zip(&d.values)
                    .map(|(c, &delta)| ClusterRow { rep: &c.rep, delta, branches: &c.branches })
                    .collect();
                writeln!(out, "{}", to_json(&DeltaOutput { clusters, components: &partition }))?;
            }
        }
        Command::Partition { input, csv } => {
            let curve = read_curve(input.as_deref())?;
            let tol = cli.tol.for_curve(&curve)?;
            let graph = image_graph(&curve, tol.eps_image)?;
            let partition = level_partition(&graph, &delta(&graph));
            if *csv {
                writeln!(out, "component,delta,interior,clusters,samples")?;
                for (i, comp) in partition.components.iter().enumerate() {
                    let samples: usize = comp.clusters.iter().map(|&c| graph.clusters[c].members.len()).sum();
                    writeln!(out, "{i},{},{},{},{samples}", comp.value, comp.has_interior, comp.clusters.len())?;
                }
            } else {
                writeln!(out, "{}", to_json(&partition))?;
            }
        }
        Command::Equiv { first, second } => {
            let c1 = read_curve(Some(first))?;
            let c2 = read_curve(Some(second))?;
            let tol = cli.tol.apply(ToleranceProfile::for_pair(&c1, &c2))?;
            let verdict = decide_orbit_equivalence(&c1, &c2, &tol)?;
            let report = match &verdict {
                EquivalenceVerdict::Equivalent { reparam, residual } => EquivOutput {
                    status: "equivalent",
                    reparam: Some(reparam),
                    certificate: None,
                    residual: Some(*residual),
                },
                EquivalenceVerdict::Distinct { certificate } => {
                    EquivOutput { status: "distinct", reparam: None, certificate: Some(certificate), residual: None }
                }
            };
            writeln!(out, "{}", to_json(&report))?;
            if !verdict.is_equivalent() {
                return Ok(EXIT_DISTINCT);
            }
        }
        Command::Isotropy { input } => {
            let curve = read_curve(input.as_deref())?;
            let tol = cli.tol.for_curve(&curve)?;
            writeln!(out, "{}", to_json(&isotropy_group(&curve, &tol)?))?;
        }
        Command::Primitive { input } => {
            let curve = read_curve(input.as_deref())?;
            let tol = cli.tol.for_curve(&curve)?;
            let fac = primitive_factorization(&curve, &tol)?;
            writeln!(out, "{}", curve_json(&fac.primitive))?;
        }
        Command::Chart { base, curve, push } => {
            if let Some(section_path) = push {
                let file = parse_section(&read_text(Some(section_path))?)?;
                let base_path = match base {
                    Some(b) => b.clone(),
                    None => section_path.parent().unwrap_or(Path::new("")).join(&file.base),
                };
                let base = read_curve(Some(&base_path))?;
                let tol = cli.tol.for_curve(&base)?;
                let slice = slice_of(&base, &tol)?;
                let pushed = tau_push(&slice.frame, &slice.tube, &file.section()?)?;
                writeln!(out, "{}", curve_json(&pushed))?;
            } else {
                let (Some(base_path), Some(curve_path)) = (base, curve) else {
                    bail!("chart needs a base and a curve, or --push SECTION");
                };
                let base = read_curve(Some(base_path))?;
                let j = read_curve(Some(curve_path))?;
                let tol = cli.tol.for_curve(&base)?;
                let slice = slice_of(&base, &tol)?;
                let chart = chart_phi(&slice.frame, &slice.tube, &j)?;
                let file = SectionFile::new(base_path.display().to_string(), &chart.section);
                writeln!(out, "{}", to_json(&file))?;
            }
        }
        Command::Split { base, curve } => {
            let base_curve = read_curve(Some(base))?;
            let j = read_curve(Some(curve))?;
            let tol = cli.tol.for_curve(&base_curve)?;
            let slice = slice_of(&base_curve, &tol)?;
            let chart = chart_phi(&slice.frame, &slice.tube, &j)?;
            let pushed = tau_push(&slice.frame, &slice.tube, &chart.section)?;
            let residual = verify_reparam(&j, &pushed, &chart.f0);
            let report = SplitOutput {
                section: SectionFile::new(base.display().to_string(), &chart.section),
                f0: &chart.f0,
                residual,
            };
            writeln!(out, "{}", to_json(&report))?;
        }
        Command::Walls { input, witnesses, seed } => {
            let curve = read_curve(input.as_deref())?;
            let tol = cli.tol.for_curve(&curve)?;
            let frame = normal_frame(&curve);
            let opts = DiagramOptions { witnesses: *witnesses, seed: *seed, ..DiagramOptions::default() };
            writeln!(out, "{}", to_json(&diagram_summary(&frame, &tol, &opts)?))?;
        }
        Command::Gen(args) => {
            writeln!(out, "{}", curve_json(&args.spec().generate()?))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|code| {
        out.flush()?;
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        // a closed downstream pipe is not an error of ours
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
