use crate::output::OutDir;
use clap::Args;
use dimdoe::dimension::{derive_model, DAModel};
use dimdoe::error::DimError;
use dimdoe::ipsen::{default_order, ipsen_derive};
use dimdoe::problem::LoadedProblem;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct DeriveArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,

    /// Print the stepwise elimination tableau even without an order in the file.
    #[arg(long)]
    pub tableau: bool,

    /// Also write groups.csv and tableau.csv here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Exit code 0 on success, 2 when responses were excluded, 1 when none remain.
pub fn run(args: &DeriveArgs) -> anyhow::Result<u8> {
    let loaded = crate::problem_path(&args.problem)?;
    let problem = &loaded.problem;
    let names = problem.names();
    let model = match derive_model(problem) {
        Ok(m) => m,
        Err(DimError::NoUsableResponses { excluded }) => {
            let ex: Vec<&str> = excluded.iter().map(|&i| names[i].as_str()).collect();
            eprintln!("no usable responses; excluded: {}", ex.join(", "));
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    print!("{}", render_model(&loaded, &model));

    let mut tableau_csv = None;
    if args.tableau || loaded.elimination_order.is_some() {
        let order = loaded.elimination_order.clone().unwrap_or_else(|| default_order(problem));
        match ipsen_derive(problem, &order) {
            Ok(t) => {
                println!("\nElimination tableau");
                print!("{}", t.render(problem));
                tableau_csv = Some(t.to_csv(problem));
            }
            Err(e) => log::warn!("tableau unavailable: {e}"),
        }
    }

    if let Some(dir) = &args.out_dir {
        let mut out = OutDir::new(dir);
        out.write("groups.csv", &groups_csv(&loaded, &model))?;
        if let Some(t) = tableau_csv {
            out.write("tableau.csv", &t)?;
        }
    }

    if model.excluded_responses.is_empty() {
        Ok(0)
    } else {
        for (i, why) in &model.excluded_responses {
            eprintln!("warning: response {} excluded: {why}", names[*i]);
        }
        Ok(2)
    }
}

fn render_model(loaded: &LoadedProblem, m: &DAModel) -> String {
    let problem = &loaded.problem;
    let names = problem.names();
    let mut s = String::new();
    s.push_str(&format!("problem: {}\n", problem.name));
    s.push_str(&format!(
        "dimensions: {} ({})\n",
        problem.k(),
        problem.dimensions.join(", ")
    ));
    let p = problem.explanatory_indices().len();
    s.push_str(&format!("explanatory variables: {p}, rank(B) = {}\n", m.counts.rank_b));
    s.push_str(&format!(
        "responses in span of predictors: {}\n",
        if m.theorem_path { "yes" } else { "no" }
    ));
    s.push_str(&format!(
        "counts: r1 = {}, r2 = {}, rank(C) = {}, r3 = {}\n",
        m.counts.r1, m.counts.r2, m.counts.rank_c, m.counts.r3
    ));
    if !m.excluded_responses.is_empty() {
        let ex: Vec<&str> = m.excluded_responses.iter().map(|(i, _)| names[*i].as_str()).collect();
        s.push_str(&format!("excluded responses: {}\n", ex.join(", ")));
    }
    s.push_str(&format!("predictor groups ({}):\n", m.predictor_groups.len()));
    for g in &m.predictor_groups {
        s.push_str(&format!("  {} = {}\n", g.name, g.formula(&names)));
    }
    s.push_str(&format!("response groups ({}):\n", m.response_groups.len()));
    for g in &m.response_groups {
        s.push_str(&format!("  {} = {}\n", g.name, g.formula(&names)));
    }
    s
}

fn groups_csv(loaded: &LoadedProblem, m: &DAModel) -> String {
    let names = loaded.problem.names();
    let mut s = String::from("group,kind,formula\n");
    for g in &m.predictor_groups {
        s.push_str(&format!("{},predictor,{}\n", g.name, g.formula(&names)));
    }
    for g in &m.response_groups {
        s.push_str(&format!("{},response,{}\n", g.name, g.formula(&names)));
    }
    s
}
