//! Stepwise elimination tableau: each step picks a dimension and a surviving
//! predictor whose current dimension carries it, then multiplies every other
//! surviving variable by the power of that predictor that cancels the
//! dimension. The process ends when every survivor is dimensionless.

use crate::dimension::{DAProblem, DimVector, GroupKind, PiGroup, Role};
use crate::error::DimError;
use crate::rational::Rational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    /// Quantity index of the variable this row started from.
    pub origin: usize,
    /// Exponents over all problem quantities.
    pub exponents: Vec<Rational>,
    pub dim: DimVector,
    /// False once the row has been used to eliminate a dimension.
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpsenStep {
    /// Dimensions removed by this step (more than one when several vanish at once).
    pub eliminated: Vec<usize>,
    /// Quantity index of the original variable whose current row was used.
    pub variable: usize,
    /// Exponents of the eliminating expression at the time it was used.
    pub expression: Vec<Rational>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpsenTableau {
    pub initial: Vec<TableRow>,
    pub steps: Vec<IpsenStep>,
}

impl IpsenTableau {
    pub fn final_rows(&self) -> &[TableRow] {
        self.steps.last().map_or(&self.initial, |s| &s.rows)
    }

    /// Surviving predictor rows as groups, in quantity order.
    pub fn predictor_groups(&self, problem: &DAProblem) -> Vec<PiGroup> {
        self.final_rows()
            .iter()
            .filter(|r| r.alive && problem.quantities[r.origin].role != Role::Response)
            .enumerate()
            .map(|(i, r)| PiGroup {
                name: format!("pi{}", i + 1),
                kind: GroupKind::Predictor,
                response_index: None,
                exponents: r.exponents.clone(),
            })
            .collect()
    }

    pub fn response_groups(&self, problem: &DAProblem) -> Vec<PiGroup> {
        self.final_rows()
            .iter()
            .filter(|r| problem.quantities[r.origin].role == Role::Response)
            .enumerate()
            .map(|(i, r)| PiGroup {
                name: format!("pi0_{}", i + 1),
                kind: GroupKind::Response,
                response_index: Some(r.origin),
                exponents: r.exponents.clone(),
            })
            .collect()
    }

    /// Plain-text table, one block per step.
    pub fn render(&self, problem: &DAProblem) -> String {
        let names = problem.names();
        let mut out = String::new();
        let block = |title: String, rows: &[TableRow], out: &mut String| {
            out.push_str(&title);
            out.push('\n');
            for r in rows {
                let var = if r.alive {
                    monomial(&r.exponents, &names)
                } else {
                    "--".to_string()
                };
                let dim = if r.alive {
                    r.dim.render(&problem.dimensions)
                } else {
                    "--".to_string()
                };
                out.push_str(&format!("  {:<10} {:<32} {}\n", names[r.origin], var, dim));
            }
        };
        block("Step 0: initialize".to_string(), &self.initial, &mut out);
        for (i, s) in self.steps.iter().enumerate() {
            let dims: Vec<&str> = s.eliminated.iter().map(|&d| problem.dimensions[d].as_str()).collect();
            block(
                format!(
                    "Step {}: remove {} using {}",
                    i + 1,
                    dims.join(","),
                    monomial(&s.expression, &names)
                ),
                &s.rows,
                &mut out,
            );
        }
        out
    }

    /// CSV: step,variable,expression,dimension
    pub fn to_csv(&self, problem: &DAProblem) -> String {
        let names = problem.names();
        let mut out = String::from("step,variable,expression,dimension\n");
        let mut emit = |step: usize, rows: &[TableRow]| {
            for r in rows {
                let (e, d) = if r.alive {
                    (monomial(&r.exponents, &names), r.dim.render(&problem.dimensions))
                } else {
                    ("--".to_string(), "--".to_string())
                };
                out.push_str(&format!("{step},{},{e},{d}\n", names[r.origin]));
            }
        };
        emit(0, &self.initial);
        for (i, s) in self.steps.iter().enumerate() {
            emit(i + 1, &s.rows);
        }
        out
    }
}

fn monomial(exps: &[Rational], names: &[String]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .zip(names)
        .filter(|(e, _)| !e.is_zero())
        .map(|(e, n)| {
            if e.is_one() {
                n.clone()
            } else {
                format!("{n}^{}", crate::rational::display(e))
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

/// `(dimension index, quantity index)` pairs.
pub type EliminationOrder = Vec<(usize, usize)>;

/// Default order: dimensions in declaration order; for each, the first
/// surviving predictor with a nonzero exponent, preferring the one with the
/// fewest nonzero dimension exponents.
pub fn default_order(problem: &DAProblem) -> EliminationOrder {
    let mut rows = initial_rows(problem);
    let mut order = Vec::new();
    for d in 0..problem.k() {
        let candidate = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive && problem.quantities[r.origin].role != Role::Response)
            .filter(|(_, r)| !r.dim.exponents()[d].is_zero())
            .min_by_key(|(i, r)| (r.dim.exponents().iter().filter(|e| !e.is_zero()).count(), *i))
            .map(|(i, _)| i);
        let Some(i) = candidate else { continue };
        order.push((d, rows[i].origin));
        eliminate(&mut rows, i, d);
    }
    order
}

fn initial_rows(problem: &DAProblem) -> Vec<TableRow> {
    let n = problem.quantities.len();
    problem
        .quantities
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            TableRow {
                origin: i,
                exponents: e,
                dim: q.dim.clone(),
                alive: true,
            }
        })
        .collect()
}

fn eliminate(rows: &mut [TableRow], pivot: usize, d: usize) {
    let alpha = rows[pivot].dim.exponents()[d].clone();
    let pe = rows[pivot].exponents.clone();
    let pd = rows[pivot].dim.clone();
    for (i, r) in rows.iter_mut().enumerate() {
        if i == pivot || !r.alive {
            continue;
        }
        let beta = r.dim.exponents()[d].clone();
        if beta.is_zero() {
            continue;
        }
        let s = -(beta / &alpha);
        r.exponents = r.exponents.iter().zip(&pe).map(|(a, b)| a + &s * b).collect();
        r.dim = r.dim.add_scaled(&pd, &s);
    }
    rows[pivot].alive = false;
}

/// Runs the tableau for a caller-supplied order.
pub fn ipsen_derive(problem: &DAProblem, order: &[(usize, usize)]) -> Result<IpsenTableau, DimError> {
    let initial = initial_rows(problem);
    let mut rows = initial.clone();
    let mut removed = vec![false; problem.k()];
    let mut steps = Vec::new();
    for &(d, var) in order {
        let dim_name = problem.dimensions.get(d).cloned().unwrap_or_else(|| format!("#{d}"));
        let var_name = problem.quantities.get(var).map_or_else(|| format!("#{var}"), |q| q.name.clone());
        let cannot = || DimError::CannotEliminate {
            dimension: dim_name.clone(),
            variable: var_name.clone(),
        };
        let q = problem.quantities.get(var).ok_or_else(cannot)?;
        if d >= problem.k() || q.role == Role::Response || !rows[var].alive || rows[var].dim.exponents()[d].is_zero() {
            return Err(cannot());
        }
        let expression = rows[var].exponents.clone();
        eliminate(&mut rows, var, d);
        let mut eliminated = Vec::new();
        for (dd, done) in removed.iter_mut().enumerate() {
            if *done {
                continue;
            }
            let vanished = rows.iter().filter(|r| r.alive).all(|r| r.dim.exponents()[dd].is_zero());
            if vanished {
                *done = true;
                eliminated.push(dd);
            }
        }
        steps.push(IpsenStep {
            eliminated,
            variable: var,
            expression,
            rows: rows.clone(),
        });
    }
    let leftover: Vec<String> = (0..problem.k())
        .filter(|&d| rows.iter().any(|r| r.alive && !r.dim.exponents()[d].is_zero()))
        .map(|d| problem.dimensions[d].clone())
        .collect();
    if !leftover.is_empty() {
        return Err(DimError::IncompleteElimination(leftover));
    }
    Ok(IpsenTableau { initial, steps })
}
