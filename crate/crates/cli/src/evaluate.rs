use crate::ModelArgs;
use anyhow::{bail, Context};
use clap::Args;
use dimdoe::criterion::{cube_moment_matrix, efficiency_from_traces, fmt_num};
use dimdoe::exchange::{coordinate_exchange, Design, ExchangeOptions, Objective, Space};
use dimdoe::export::{numeric_csv, read_factor_csv};
use dimdoe::geometry::DEFAULT_TOL;
use dimdoe::pipeline::build_setup;
use dimdoe::poly::PolynomialModel;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct EfficiencyArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,

    /// Design CSV with one column per factor.
    pub design: PathBuf,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Reference design CSV; otherwise references are optimized afresh
    /// with the same number of runs.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    /// Random starts when optimizing references.
    #[arg(long, default_value_t = 10)]
    pub starts: usize,

    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,

    /// Also score a full polynomial of this order in the linearly scaled factors.
    #[arg(long)]
    pub empirical_order: Option<usize>,
}

fn read_design(path: &PathBuf, region: &dimdoe::geometry::PiRegion) -> anyhow::Result<Design> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = read_factor_csv(&text, &region.factor_box.names)?;
    if rows.is_empty() {
        bail!("{} holds no runs", path.display());
    }
    Ok(Design::from_factors(region, &rows).with_context(|| format!("{}", path.display()))?)
}

pub fn efficiency(args: &EfficiencyArgs) -> anyhow::Result<()> {
    let loaded = crate::problem_path(&args.problem)?;
    let setup = build_setup(&loaded, args.model.order, args.model.orders_per_response.as_deref())?;
    let (seed, given) = args.model.resolve_seed();
    let region = &setup.region;
    let design = read_design(&args.design, region)?;
    let cloud = setup.cloud(args.model.samples, seed)?;
    let mut problem = setup.design_problem(setup.moments(&cloud));
    if let Some(order) = args.empirical_order {
        let model = PolynomialModel::full("empirical", region.p(), order);
        let moments = cube_moment_matrix(&model);
        problem.blocks.push(dimdoe::exchange::Block {
            model,
            space: Space::Chi,
            moments,
        });
    }
    let traces = problem.traces(&design);
    let r = problem.blocks.len();

    let (refs, source) = match &args.reference {
        Some(p) => (problem.traces(&read_design(p, region)?), format!("reference design {}", p.display())),
        None => {
            let opts = ExchangeOptions {
                n: design.n(),
                starts: args.starts,
                seed,
                max_sweeps: args.max_sweeps,
                ..Default::default()
            };
            let refs = (0..r)
                .map(|k| {
                    let mut w = vec![0.0; r];
                    w[k] = 1.0;
                    let o = ExchangeOptions {
                        stream_base: opts.stream_base + (k * opts.starts) as u64,
                        ..opts.clone()
                    };
                    coordinate_exchange(&problem, &Objective::Weighted(w), &o).map(|res| res.traces[k])
                })
                .collect::<Result<Vec<f64>, _>>()?;
            (refs, format!("optimized references, {} runs, {} starts", design.n(), args.starts))
        }
    };

    println!("# dimdoe efficiency report");
    println!("seed: {seed}{}", if given { "" } else { " (generated)" });
    println!("moment samples: {}", args.model.samples);
    println!("runs: {}", design.n());
    println!("references: {source}");
    for (k, b) in problem.blocks.iter().enumerate() {
        let space = match b.space {
            Space::Pi => "log-pi",
            Space::Chi => "factors",
        };
        println!(
            "{} ({space}): trace {} reference {} efficiency {}",
            b.model.name,
            fmt_num(traces[k]),
            fmt_num(refs[k]),
            fmt_num(efficiency_from_traces(refs[k], traces[k]))
        );
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct BacksolveArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,

    /// CSV of π values with one column per design group, or of scaled
    /// coordinates in `scaled_<group>` columns.
    pub points: PathBuf,

    #[arg(long, default_value_t = dimdoe::pipeline::DEFAULT_ORDER)]
    pub order: usize,

    /// Write the factor settings here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Exit code 0 when every point lies in the region, 1 otherwise.
pub fn backsolve(args: &BacksolveArgs) -> anyhow::Result<u8> {
    let loaded = crate::problem_path(&args.problem)?;
    let setup = build_setup(&loaded, args.order, None)?;
    let region = &setup.region;
    let text = std::fs::read_to_string(&args.points).with_context(|| format!("reading {}", args.points.display()))?;
    let names = region.map.group_names.clone();
    let scaled: Vec<Vec<f64>> = match read_factor_csv(&text, &names) {
        Ok(pi) => pi
            .iter()
            .map(|row| {
                if row.iter().any(|x| !(*x > 0.0)) {
                    bail!("pi values must be positive");
                }
                let logpi: Vec<f64> = row.iter().map(|x| x.ln()).collect();
                Ok(region.scaling().scale(&logpi))
            })
            .collect::<anyhow::Result<_>>()?,
        Err(_) => {
            let cols: Vec<String> = names.iter().map(|n| format!("scaled_{n}")).collect();
            read_factor_csv(&text, &cols).context("points need pi or scaled_ columns for every design group")?
        }
    };

    let mut headers = region.factor_box.names.clone();
    headers.push("residual".into());
    headers.push("inside".into());
    let mut rows = Vec::with_capacity(scaled.len());
    let mut outside = 0;
    for s in &scaled {
        let b = region.backsolve_scaled(s);
        let inside = b.residual <= DEFAULT_TOL;
        if !inside {
            outside += 1;
        }
        let mut row = b.v.clone();
        row.push(b.residual);
        row.push(if inside { 1.0 } else { 0.0 });
        rows.push(row);
    }
    let body = numeric_csv(&headers, &rows);
    match &args.output {
        Some(p) => std::fs::write(p, &body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    if outside > 0 {
        eprintln!("warning: {outside} of {} points lie outside the design region", scaled.len());
        Ok(1)
    } else {
        Ok(0)
    }
}
