#![allow(dead_code)]

use dimdoe::dimension::{derive_model, DAModel, DAProblem, DimVector, Quantity};
use dimdoe::error::DimError;
use dimdoe::problem::{LoadedProblem, ProblemFile};
use dimdoe::rational::{int, Rational};
use num_traits::{One, Zero};

pub fn fixture(name: &str) -> LoadedProblem {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    ProblemFile::load(std::path::Path::new(&path)).unwrap()
}

/// Determinant by cofactor expansion along the first row.
fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut total = Rational::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][j] * laplace_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, s, &mut Vec::new(), &mut out);
    out
}

/// Rank as the order of the largest nonsingular square minor. `cols` are
/// the matrix columns.
pub fn minor_rank(cols: &[Vec<Rational>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let k = cols[0].len();
    for s in (1..=k.min(cols.len())).rev() {
        for rs in subsets(k, s) {
            for cs in subsets(cols.len(), s) {
                let m: Vec<Vec<Rational>> = rs.iter().map(|&r| cs.iter().map(|&c| cols[c][r].clone()).collect()).collect();
                if !laplace_det(&m).is_zero() {
                    return s;
                }
            }
        }
    }
    0
}

pub fn in_span(cols: &[Vec<Rational>], v: &[Rational]) -> bool {
    let mut with = cols.to_vec();
    with.push(v.to_vec());
    minor_rank(&with) == minor_rank(cols)
}

pub fn ints(cols: &[&[i64]]) -> Vec<Vec<Rational>> {
    cols.iter().map(|c| c.iter().map(|&x| int(x)).collect()).collect()
}

/// Problem with responses `Y1..` and predictors `x1..` of the given dimension columns.
pub fn problem_from(responses: &[Vec<Rational>], predictors: &[Vec<Rational>]) -> DAProblem {
    let k = responses.first().or(predictors.first()).map_or(0, |c| c.len());
    let dv = |c: &Vec<Rational>| DimVector::new(c.clone());
    let mut qs = Vec::new();
    for (j, c) in responses.iter().enumerate() {
        qs.push(Quantity::response(&format!("Y{}", j + 1), dv(c)));
    }
    for (j, c) in predictors.iter().enumerate() {
        qs.push(Quantity::predictor(&format!("x{}", j + 1), dv(c), 1.0, 2.0));
    }
    DAProblem::new("instance", (0..k).map(|i| format!("D{i}")).collect(), qs).unwrap()
}

/// Checks a derivation against the minor-rank oracle; returns a description
/// of the first violated law.
pub fn check_counting_laws(problem: &DAProblem) -> Result<(), String> {
    let a: Vec<Vec<Rational>> = problem
        .response_indices()
        .iter()
        .map(|&i| problem.quantities[i].dim.exponents().to_vec())
        .collect();
    let b: Vec<Vec<Rational>> = problem
        .explanatory_indices()
        .iter()
        .map(|&i| problem.quantities[i].dim.exponents().to_vec())
        .collect();
    let r = a.len();
    let p = b.len();
    let rank_b = minor_rank(&b);
    let outside_b: Vec<usize> = (0..r).filter(|&j| !in_span(&b, &a[j])).collect();
    let excluded: Vec<usize> = (0..r)
        .filter(|&j| {
            let mut others: Vec<Vec<Rational>> = (0..r).filter(|&i| i != j).map(|i| a[i].clone()).collect();
            others.extend(b.iter().cloned());
            !in_span(&others, &a[j])
        })
        .collect();
    let kept: Vec<usize> = (0..r).filter(|j| !excluded.contains(j)).collect();

    let ids = problem.response_indices();
    let model: DAModel = match derive_model(problem) {
        Ok(m) => m,
        Err(DimError::NoUsableResponses { excluded: ex }) => {
            let want: Vec<usize> = excluded.iter().map(|&j| ids[j]).collect();
            return if kept.is_empty() && ex == want {
                Ok(())
            } else {
                Err(format!("no usable responses reported, oracle keeps {kept:?}"))
            };
        }
        Err(e) => return Err(format!("derivation failed: {e}")),
    };
    if kept.is_empty() {
        return Err("oracle excludes every response but derivation succeeded".into());
    }
    if model.span.failing_columns != outside_b {
        return Err(format!("span failures {:?}, oracle {outside_b:?}", model.span.failing_columns));
    }
    if model.counts.rank_b != rank_b {
        return Err(format!("rank(B) {} vs {rank_b}", model.counts.rank_b));
    }
    let got_ex: Vec<usize> = model.excluded_responses.iter().map(|e| e.0).collect();
    let want_ex: Vec<usize> = if outside_b.is_empty() { vec![] } else { excluded.iter().map(|&j| ids[j]).collect() };
    if got_ex != want_ex {
        return Err(format!("excluded {got_ex:?}, oracle {want_ex:?}"));
    }
    let kept: Vec<usize> = if outside_b.is_empty() { (0..r).collect() } else { kept };

    if model.predictor_groups.len() != p - rank_b {
        return Err(format!("{} predictor groups, want {}", model.predictor_groups.len(), p - rank_b));
    }
    let mut c: Vec<Vec<Rational>> = kept.iter().map(|&j| a[j].clone()).collect();
    c.extend(b.iter().cloned());
    let nullity = kept.len() + p - minor_rank(&c);
    let r3 = nullity - (p - rank_b);
    if model.response_groups.len() != r3 || model.counts.r3 != r3 {
        return Err(format!("{} response groups (r3 = {}), want {r3}", model.response_groups.len(), model.counts.r3));
    }
    if !outside_b.is_empty() {
        let r2 = kept.iter().filter(|j| outside_b.contains(j)).count();
        let mut cc: Vec<Vec<Rational>> = kept.iter().filter(|j| outside_b.contains(j)).map(|&j| a[j].clone()).collect();
        cc.extend(b.iter().cloned());
        let want = (kept.len(), r2, minor_rank(&cc));
        let got = (model.counts.r1, model.counts.r2, model.counts.rank_c);
        if got != want {
            return Err(format!("(r1, r2, rank C) = {got:?}, want {want:?}"));
        }
    }
    let groups: Vec<_> = model.predictor_groups.iter().chain(&model.response_groups).collect();
    for g in &groups {
        if !g.is_dimensionless(problem) {
            return Err(format!("{} is not dimensionless", g.name));
        }
        if g.exponents.iter().enumerate().any(|(i, e)| !e.is_zero() && excluded_id(problem, &excluded, i)) {
            return Err(format!("{} uses an excluded response", g.name));
        }
    }
    let exps: Vec<Vec<Rational>> = groups.iter().map(|g| g.exponents.clone()).collect();
    if minor_rank(&exps) != groups.len() {
        return Err("groups are not independent".into());
    }
    if groups.len() != nullity {
        return Err(format!("{} groups for a nullity of {nullity}", groups.len()));
    }
    Ok(())
}

fn excluded_id(problem: &DAProblem, excluded: &[usize], quantity: usize) -> bool {
    let ids = problem.response_indices();
    excluded.iter().any(|&j| ids[j] == quantity)
}
