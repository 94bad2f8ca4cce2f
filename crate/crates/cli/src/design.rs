use crate::output::OutDir;
use crate::{Mode, ModelArgs};
use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use dimdoe::criterion::{fmt_num, CriterionReport, MomentMatrix};
use dimdoe::exchange::{coordinate_exchange, Design, DesignProblem, ExchangeOptions, Objective, Space};
use dimdoe::export::{bounding_box_csv, design_csv, factor_csv, numeric_csv, pi_csv, projection_csvs, region_report, vertex_csv};
use dimdoe::pipeline::{build_setup, DesignSetup};
use dimdoe::robust::{maximin_over_w, robust_exchange, robust_problem, robust_references, DEFAULT_EMPIRICAL_ORDER};
use dimdoe::sweep::{default_grid, efficiencies_against_best, weight_sweep};
use dimdoe::uniform::{fff_select, Representative};
use std::path::PathBuf;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rep {
    Centroid,
    Nearest,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,

    #[arg(long, value_enum, default_value_t = Mode::Optimal)]
    pub mode: Mode,

    /// Number of runs.
    #[arg(long, default_value_t = 20)]
    pub n: usize,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Weight of the first response (optimal) or of the log-π efficiency (robust).
    #[arg(long)]
    pub w1: Option<f64>,

    /// Sweep the weight over a 21-point grid and keep the maximin design.
    #[arg(long)]
    pub sweep: bool,

    /// Random starts for coordinate exchange.
    #[arg(long, default_value_t = 10)]
    pub starts: usize,

    /// Sweep limit per start.
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,

    /// Candidate cloud size for uniform designs.
    #[arg(long, default_value_t = 10_000)]
    pub candidates: usize,

    /// Uniform design representative of each cluster.
    #[arg(long, value_enum, default_value_t = Rep::Centroid)]
    pub representative: Rep,

    /// Order of the empirical factor-space model in robust mode.
    #[arg(long, default_value_t = DEFAULT_EMPIRICAL_ORDER)]
    pub empirical_order: usize,

    /// Also compute per-model optimal references and report efficiencies.
    #[arg(long)]
    pub efficiency: bool,

    #[arg(long, default_value = "dimdoe-out")]
    pub out_dir: PathBuf,
}

pub fn run(args: &DesignArgs) -> anyhow::Result<()> {
    let loaded = crate::problem_path(&args.problem)?;
    let setup = build_setup(&loaded, args.model.order, args.model.orders_per_response.as_deref())?;
    let (seed, given) = args.model.resolve_seed();
    if let Some(w) = args.w1 {
        if !(0.0..=1.0).contains(&w) {
            bail!("--w1 must lie in [0, 1], got {w}");
        }
    }

    let draw = match args.mode {
        Mode::Uniform => args.model.samples.max(args.candidates),
        _ => args.model.samples,
    };
    let cloud = setup.cloud(draw, seed)?;
    let moment_cloud = dimdoe::uniform::CandidateCloud {
        points: cloud.points[..args.model.samples].to_vec(),
        ..cloud.clone()
    };
    let moments = setup.moments(&moment_cloud);
    let problem = setup.design_problem(moments.clone());
    let opts = ExchangeOptions {
        n: args.n,
        starts: args.starts,
        seed,
        max_sweeps: args.max_sweeps,
        ..Default::default()
    };

    let mut report = header(args, &setup, seed, given, &cloud, &loaded.problem.names());
    let mut out = OutDir::new(&args.out_dir);
    let design = match args.mode {
        Mode::Optimal => optimal(args, &setup, &problem, &opts, &mut report, &mut out)?,
        Mode::Uniform => uniform(args, &setup, &problem, &opts, &cloud, &mut report)?,
        Mode::Robust => robust(args, &setup, &moments, &opts, &mut report, &mut out)?,
    };

    let region = &setup.region;
    out.write("design.csv", &design_csv(region, &design))?;
    out.write("factors.csv", &factor_csv(region, &design.factors(region)))?;
    let scaled = design.scaled(region);
    out.write("pi.csv", &pi_csv(region, &scaled))?;
    for (stem, body) in projection_csvs("pi", &region.map.group_names, &scaled) {
        out.write(&format!("projections/{stem}.csv"), &body)?;
    }
    let chi = design.coords(region, Space::Chi);
    for (stem, body) in projection_csvs("factor", &region.factor_box.names, &chi) {
        out.write(&format!("projections/{stem}.csv"), &body)?;
    }
    out.write("region/vertices.csv", &vertex_csv(region))?;
    out.write("region/bounding_box.csv", &bounding_box_csv(region))?;
    out.write("region/map.txt", &region_report(region))?;
    if args.mode == Mode::Uniform {
        let names: Vec<String> = region.map.group_names.iter().map(|n| format!("scaled_{n}")).collect();
        out.write("cloud.csv", &numeric_csv(&names, &cloud.points[..args.candidates]))?;
    }
    out.write("report.txt", &report)?;
    print!("{report}");
    for p in out.written() {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn header(
    args: &DesignArgs,
    setup: &DesignSetup,
    seed: u64,
    given: bool,
    cloud: &dimdoe::uniform::CandidateCloud,
    names: &[String],
) -> String {
    let mut s = String::from("# dimdoe design report\n");
    s.push_str(&format!("seed: {seed}{}\n", if given { "" } else { " (generated)" }));
    s.push_str(&format!("mode: {:?}\n", args.mode).to_lowercase());
    s.push_str(&format!("runs: {}\n", args.n));
    s.push_str(&format!("moment samples: {}\n", args.model.samples));
    s.push_str(&format!(
        "acceptance rate: {} ({} of {} proposals)\n",
        fmt_num(cloud.acceptance_rate),
        cloud.points.len(),
        cloud.proposed
    ));
    if args.mode != Mode::Uniform {
        s.push_str(&format!("starts: {}, max sweeps: {}\n", args.starts, args.max_sweeps));
    }
    s.push_str("design groups:\n");
    for g in &setup.groups {
        s.push_str(&format!("  {} = {}\n", g.name, g.formula(names)));
    }
    s.push_str("models:\n");
    for m in &setup.models {
        let on: Vec<&str> = m
            .factor_subset
            .iter()
            .map(|&i| setup.groups[i].name.as_str())
            .collect();
        s.push_str(&format!(
            "  {}: order {} on {} ({} terms)\n",
            m.name,
            m.order,
            on.join(", "),
            m.m()
        ));
    }
    for w in &setup.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn model_weights(args: &DesignArgs, r: usize) -> anyhow::Result<Vec<f64>> {
    match (args.w1, r) {
        (_, 1) => Ok(vec![1.0]),
        (Some(w), 2) => Ok(vec![w, 1.0 - w]),
        (Some(_), _) => bail!("--w1 needs exactly two response models, found {r}"),
        (None, _) => Ok(vec![1.0 / r as f64; r]),
    }
}

/// Best trace each model reaches on its own; grid offset keeps the RNG
/// streams apart from the main search.
fn single_model_references(problem: &DesignProblem, opts: &ExchangeOptions, offset: usize) -> anyhow::Result<Vec<f64>> {
    let r = problem.blocks.len();
    (0..r)
        .map(|k| {
            let mut w = vec![0.0; r];
            w[k] = 1.0;
            let o = ExchangeOptions {
                stream_base: opts.stream_base + ((offset + k) * opts.starts) as u64,
                ..opts.clone()
            };
            Ok(coordinate_exchange(problem, &Objective::Weighted(w), &o)?.traces[k])
        })
        .collect()
}

fn criterion_block(setup: &DesignSetup, problem: &DesignProblem, design: &Design, weights: &[f64], refs: Option<&[f64]>) -> String {
    let scaled = design.scaled(&setup.region);
    let points: Vec<&[Vec<f64>]> = setup.models.iter().map(|_| scaled.as_slice()).collect();
    let moments: Vec<MomentMatrix> = problem.blocks.iter().map(|b| b.moments.clone()).collect();
    let rep = CriterionReport::new(&setup.models, &points, &moments, weights, refs);
    let names: Vec<String> = setup.models.iter().map(|m| m.name.clone()).collect();
    rep.render(&names)
}

fn optimal(
    args: &DesignArgs,
    setup: &DesignSetup,
    problem: &DesignProblem,
    opts: &ExchangeOptions,
    report: &mut String,
    out: &mut OutDir,
) -> anyhow::Result<Design> {
    let r = setup.models.len();
    if args.sweep {
        if r != 2 {
            bail!("--sweep needs exactly two response models, found {r}");
        }
        let grid = default_grid();
        let sweep = weight_sweep(problem, &grid, opts)?;
        out.write("sweep.csv", &sweep.to_csv())?;
        let best = sweep.maximin_point();
        report.push_str(&format!(
            "weight sweep: {} grid points, maximin w1 = {}, efficiencies {} / {}\n",
            grid.len(),
            fmt_num(best.w1),
            fmt_num(best.efficiencies[0]),
            fmt_num(best.efficiencies[1])
        ));
        let end = sweep.points.last().expect("non-empty grid");
        report.push_str(&format!(
            "w1 = 1 design: efficiency for {} = {}\n",
            setup.models[1].name,
            fmt_num(end.efficiencies[1])
        ));
        report.push_str(&criterion_block(
            setup,
            problem,
            &best.design,
            &[best.w1, 1.0 - best.w1],
            Some(&sweep.references),
        ));
        return Ok(best.design.clone());
    }
    let weights = model_weights(args, r)?;
    let result = coordinate_exchange(problem, &Objective::Weighted(weights.clone()), opts)
        .context("coordinate exchange")?;
    let refs = if args.efficiency {
        let mut refs = single_model_references(problem, opts, 1)?;
        for (k, t) in result.traces.iter().enumerate() {
            if t.is_finite() && *t < refs[k] {
                refs[k] = *t;
            }
        }
        Some(refs)
    } else {
        None
    };
    report.push_str(&format!("criterion: {}\n", Objective::Weighted(weights.clone()).describe()));
    report.push_str(&criterion_block(setup, problem, &result.design, &weights, refs.as_deref()));
    Ok(result.design)
}

fn uniform(
    args: &DesignArgs,
    setup: &DesignSetup,
    problem: &DesignProblem,
    opts: &ExchangeOptions,
    cloud: &dimdoe::uniform::CandidateCloud,
    report: &mut String,
) -> anyhow::Result<Design> {
    let candidates = dimdoe::uniform::CandidateCloud {
        points: cloud.points[..args.candidates].to_vec(),
        ..cloud.clone()
    };
    let rep = match args.representative {
        Rep::Centroid => Representative::Centroid,
        Rep::Nearest => Representative::NearestCandidate,
    };
    let fff = fff_select(&setup.region, &candidates, args.n, rep)?;
    let design = Design::from_factors(&setup.region, &fff.factors)?;
    report.push_str(&format!("candidates: {}, representative: {:?}\n", args.candidates, args.representative).to_lowercase());
    report.push_str(&format!(
        "max backsolve residual: {}\n",
        fmt_num(fff.residuals.iter().cloned().fold(0.0, f64::max))
    ));
    let r = setup.models.len();
    let weights = model_weights(args, r)?;
    let refs = if args.efficiency {
        Some(single_model_references(problem, opts, 0)?)
    } else {
        None
    };
    report.push_str(&criterion_block(setup, problem, &design, &weights, refs.as_deref()));
    Ok(design)
}

fn robust(
    args: &DesignArgs,
    setup: &DesignSetup,
    moments: &[MomentMatrix],
    opts: &ExchangeOptions,
    report: &mut String,
    out: &mut OutDir,
) -> anyhow::Result<Design> {
    let da = setup.models[0].clone();
    let problem = robust_problem(setup.region.clone(), da.clone(), moments[0].clone(), args.empirical_order);
    let refs = robust_references(&problem, opts)?;
    report.push_str(&format!(
        "robust blocks: {} on log-pi coordinates, full order-{} polynomial in the factors\n",
        da.name, args.empirical_order
    ));
    let (w, design, eff, references) = if args.sweep {
        let res = maximin_over_w(&problem, &default_grid(), &refs, opts)?;
        out.write("robust_sweep.csv", &res.to_csv())?;
        let p = res.maximin_point();
        (p.w, p.design.clone(), p.efficiencies, res.references)
    } else {
        let w = args.w1.unwrap_or(0.5);
        let o = ExchangeOptions {
            stream_base: opts.stream_base + 2 * opts.starts as u64,
            ..opts.clone()
        };
        let r = robust_exchange(&problem, w, refs.traces, &o)?;
        let (references, eff) = efficiencies_against_best(&[[r.traces[0], r.traces[1]]], refs.traces);
        (w, r.design, eff[0], references)
    };
    report.push_str(&format!(
        "{}w = {}: E_pi = {}, E_chi = {}, compound = {}\n",
        if args.sweep { "maximin " } else { "" },
        fmt_num(w),
        fmt_num(eff[0]),
        fmt_num(eff[1]),
        fmt_num(w * eff[0] + (1.0 - w) * eff[1])
    ));
    report.push_str(&format!(
        "reference traces: {} / {}\n",
        fmt_num(references[0]),
        fmt_num(references[1])
    ));
    Ok(design)
}
