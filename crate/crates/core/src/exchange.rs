//! Coordinate exchange over the factor box.
//!
//! A design is stored in log-box coordinates `t ∈ [-1,1]^p`
//! (`log v = log_mid + log_half ⊙ t`). Each model block sees the design
//! either through the scaled log-π map or through the linear `[-1,1]^p`
//! scaling of the factors themselves. Every coordinate of every run is
//! optimized in turn by a bounded one-dimensional search; candidate values
//! are scored with a rank-two update of each block's dispersion matrix.

use crate::criterion::{dispersion, efficiency_from_traces, trace_product, MomentMatrix};
use crate::error::DesignError;
use crate::geometry::PiRegion;
use crate::poly::PolynomialModel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Coordinates a model is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Space {
    /// Scaled log-π coordinates.
    Pi,
    /// Factors linearly scaled to `[-1, 1]`.
    Chi,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub model: PolynomialModel,
    pub space: Space,
    pub moments: MomentMatrix,
}

/// A region plus the model blocks a design is judged by.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub region: PiRegion,
    pub blocks: Vec<Block>,
}

/// How per-block traces are reduced to the scalar being minimized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Objective {
    /// `Σ w_k Trace_k`.
    Weighted(Vec<f64>),
    /// `-Σ w_k ref_k / Trace_k`, the negated compound efficiency.
    Compound { weights: Vec<f64>, references: Vec<f64> },
}

impl Objective {
    pub fn weights(&self) -> &[f64] {
        match self {
            Objective::Weighted(w) => w,
            Objective::Compound { weights, .. } => weights,
        }
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.weights()[k] != 0.0
    }

    /// Value to minimize; `+∞` when an active block is singular.
    pub fn value(&self, traces: &[f64]) -> f64 {
        let mut total = 0.0;
        for (k, &t) in traces.iter().enumerate() {
            let w = self.weights()[k];
            if w == 0.0 {
                continue;
            }
            if !(t.is_finite() && t > 0.0) {
                return f64::INFINITY;
            }
            total += match self {
                Objective::Weighted(_) => w * t,
                Objective::Compound { references, .. } => -w * efficiency_from_traces(references[k], t),
            };
        }
        total
    }

    pub fn describe(&self) -> String {
        match self {
            Objective::Weighted(w) => format!("I_MV weights {w:?}"),
            Objective::Compound { weights, .. } => format!("compound efficiency weights {weights:?}"),
        }
    }
}

/// First RNG stream used for starting designs, clear of the substreams
/// rejection sampling draws from under the same seed.
pub const START_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Serialize)]
pub struct ExchangeOptions {
    pub n: usize,
    pub starts: usize,
    pub seed: u64,
    /// Start `s` draws from RNG stream `stream_base + s`.
    pub stream_base: u64,
    pub max_sweeps: usize,
    /// Stop when a sweep improves the criterion by less than this fraction.
    pub rel_tol: f64,
    /// Absolute tolerance of the line search in unit coordinates.
    pub line_tol: f64,
    /// Criterion evaluations allowed per coordinate.
    pub line_max_evals: usize,
    pub start_attempts: usize,
}

impl Default for ExchangeOptions {
    fn default() -> Self {
        ExchangeOptions {
            n: 20,
            starts: 10,
            seed: 0,
            stream_base: START_STREAM_BASE,
            max_sweeps: 100,
            rel_tol: 1e-9,
            line_tol: 1e-6,
            line_max_evals: 100,
            start_attempts: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
    pub criterion: String,
    pub weights: Vec<f64>,
    pub sweeps: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Design {
    /// Log-box coordinates of each run.
    pub t: Vec<Vec<f64>>,
    pub provenance: Option<Provenance>,
}

impl Design {
    pub fn new(t: Vec<Vec<f64>>) -> Self {
        Design { t, provenance: None }
    }

    /// Design from factor settings, which must lie in the box.
    pub fn from_factors(region: &PiRegion, v: &[Vec<f64>]) -> Result<Self, DesignError> {
        let mut t = Vec::with_capacity(v.len());
        for row in v {
            region.factor_box.check(row)?;
            t.push(region.t_from_v(row));
        }
        Ok(Design::new(t))
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn factors(&self, region: &PiRegion) -> Vec<Vec<f64>> {
        self.t.iter().map(|t| region.v_from_t(t)).collect()
    }

    pub fn scaled(&self, region: &PiRegion) -> Vec<Vec<f64>> {
        self.t.iter().map(|t| region.scaled_from_t(t)).collect()
    }

    pub fn coords(&self, region: &PiRegion, space: Space) -> Vec<Vec<f64>> {
        self.t.iter().map(|t| coords_of(region, space, t)).collect()
    }
}

pub fn coords_of(region: &PiRegion, space: Space, t: &[f64]) -> Vec<f64> {
    match space {
        Space::Pi => region.scaled_from_t(t),
        Space::Chi => (0..t.len()).map(|i| region.linear_coord(i, t[i])).collect(),
    }
}

impl DesignProblem {
    /// Trace of every block (`+∞` for singular blocks).
    pub fn traces(&self, design: &Design) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| crate::criterion::i_trace(&b.model, &design.coords(&self.region, b.space), &b.moments))
            .collect()
    }

    pub fn max_terms(&self) -> usize {
        self.blocks.iter().map(|b| b.model.m()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct ExchangeResult {
    pub design: Design,
    pub value: f64,
    /// Traces of all blocks, active or not.
    pub traces: Vec<f64>,
    /// Criterion after each accepted move of the winning start.
    pub history: Vec<f64>,
    /// Final criterion of every start.
    pub start_values: Vec<f64>,
}

/// Bounded scalar minimization: golden section with parabolic steps.
/// Returns `(x, f(x), evaluations)`.
pub fn brent_minimize(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, xatol: f64, max_evals: usize) -> (f64, f64, usize) {
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let mut evals = 1;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    while evals < max_evals {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + xatol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let r_old = e;
            e = d;
            if p.abs() < (0.5 * q * r_old).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx, evals)
}

/// Per-block search state.
#[derive(Clone)]
struct BlockState {
    k: usize,
    coords: Vec<Vec<f64>>,
    f: Vec<DVector<f64>>,
    info: DMatrix<f64>,
    d: DMatrix<f64>,
    trace: f64,
}

/// Rank-two update terms for moving one coordinate of one run, as
/// polynomials in the step `s` along the block's coordinate line.
struct Line {
    /// Block coordinates move as `x + s * dir`; `s = tc - t_ic` in log-π
    /// blocks and the change of the linear factor in factor blocks.
    s_of: Space,
    t0: f64,
    x0: f64,
    ga: Vec<f64>,
    gb: Vec<f64>,
    aaa: Vec<f64>,
    aab: Vec<f64>,
    fb: f64,
    bab: f64,
}

struct Scratch {
    dir: Vec<f64>,
    h: Vec<Vec<f64>>,
    dh: Vec<DVector<f64>>,
    adh: Vec<DVector<f64>>,
}

impl Scratch {
    fn new(dim: usize, m: usize, order: usize) -> Self {
        Scratch {
            dir: vec![0.0; dim],
            h: vec![vec![0.0; m]; order + 1],
            dh: vec![DVector::zeros(m); order + 1],
            adh: vec![DVector::zeros(m); order + 1],
        }
    }
}

/// Buffers for a move that has not been committed yet.
struct Pending {
    x: Vec<f64>,
    g: DVector<f64>,
    d: DMatrix<f64>,
    trace: f64,
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
}

struct Search<'a> {
    problem: &'a DesignProblem,
    objective: &'a Objective,
    t: Vec<Vec<f64>>,
    states: Vec<BlockState>,
    traces: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a DesignProblem, objective: &'a Objective, t: Vec<Vec<f64>>) -> Option<Self> {
        let mut states = Vec::new();
        let mut traces = vec![f64::NAN; problem.blocks.len()];
        for (k, b) in problem.blocks.iter().enumerate() {
            if !objective.is_active(k) {
                continue;
            }
            let coords: Vec<Vec<f64>> = t.iter().map(|ti| coords_of(&problem.region, b.space, ti)).collect();
            let f: Vec<DVector<f64>> = coords.iter().map(|x| DVector::from_vec(b.model.basis_eval(x))).collect();
            let m = b.model.m();
            let mut info = DMatrix::zeros(m, m);
            for fi in &f {
                info.ger(1.0, fi, fi, 1.0);
            }
            let d = dispersion(&info)?;
            let trace = trace_product(&d, &b.moments.m);
            traces[k] = trace;
            states.push(BlockState {
                k,
                coords,
                f,
                info,
                d,
                trace,
            });
        }
        Some(Search {
            problem,
            objective,
            t,
            states,
            traces,
        })
    }

    fn scratch(&self) -> Vec<Scratch> {
        self.states
            .iter()
            .map(|st| {
                let b = &self.problem.blocks[st.k];
                Scratch::new(st.coords[0].len(), b.model.m(), b.model.order)
            })
            .collect()
    }

    fn pending(&self) -> Vec<Pending> {
        self.states
            .iter()
            .map(|st| {
                let m = st.d.nrows();
                Pending {
                    x: vec![0.0; st.coords[0].len()],
                    g: DVector::zeros(m),
                    d: DMatrix::zeros(m, m),
                    trace: f64::NAN,
                }
            })
            .collect()
    }

    fn value(&self) -> f64 {
        self.objective.value(&self.traces)
    }

    /// Candidate coordinates of row `i` for block `s` with `t_ic = tc`.
    fn candidate_coords(&self, s: usize, i: usize, c: usize, tc: f64, out: &mut [f64]) {
        let st = &self.states[s];
        let block = &self.problem.blocks[st.k];
        out.copy_from_slice(&st.coords[i]);
        match block.space {
            Space::Pi => {
                let col = self.problem.region.scaled_column(c);
                let dt = tc - self.t[i][c];
                for j in 0..out.len() {
                    out[j] += col[j] * dt;
                }
            }
            Space::Chi => out[c] = self.problem.region.linear_coord(c, tc),
        }
    }

    /// Update polynomials for row `i`, coordinate `c` in every active block.
    fn lines(&self, i: usize, c: usize, scratch: &mut [Scratch]) -> Vec<Line> {
        self.states
            .iter()
            .zip(scratch.iter_mut())
            .map(|(st, sc)| {
                let block = &self.problem.blocks[st.k];
                let a_mat = &block.moments.m;
                let f = &st.f[i];
                let b = &st.d * f;
                let ab = a_mat * &b;
                match block.space {
                    Space::Pi => {
                        let col = self.problem.region.scaled_column(c);
                        sc.dir.iter_mut().zip(col.iter()).for_each(|(d, v)| *d = *v);
                    }
                    Space::Chi => {
                        sc.dir.iter_mut().for_each(|d| *d = 0.0);
                        sc.dir[c] = 1.0;
                    }
                }
                block.model.eval_line_into(&st.coords[i], &sc.dir, &mut sc.h);
                let deg = block.model.order;
                for k in 0..=deg {
                    let hk = DVector::from_column_slice(&sc.h[k]);
                    sc.dh[k].gemv(1.0, &st.d, &hk, 0.0);
                    sc.adh[k].gemv(1.0, a_mat, &sc.dh[k], 0.0);
                }
                let mut ga = vec![0.0; 2 * deg + 1];
                let mut aaa = vec![0.0; 2 * deg + 1];
                let mut gb = vec![0.0; deg + 1];
                let mut aab = vec![0.0; deg + 1];
                for k in 0..=deg {
                    let hk = &sc.h[k];
                    gb[k] = hk.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
                    aab[k] = sc.adh[k].dot(&b);
                    for l in 0..=deg {
                        ga[k + l] += hk.iter().zip(sc.dh[l].iter()).map(|(x, y)| x * y).sum::<f64>();
                        aaa[k + l] += sc.dh[k].dot(&sc.adh[l]);
                    }
                }
                Line {
                    s_of: block.space,
                    t0: self.t[i][c],
                    x0: st.coords[i].get(c).copied().unwrap_or(0.0),
                    ga,
                    gb,
                    aaa,
                    aab,
                    fb: f.dot(&b),
                    bab: b.dot(&ab),
                }
            })
            .collect()
    }

    /// Criterion with row `i`, coordinate `c` moved to `tc`.
    fn evaluate(&self, c: usize, tc: f64, lines: &[Line]) -> f64 {
        let mut traces = self.traces.clone();
        for (st, ln) in self.states.iter().zip(lines) {
            let s = match ln.s_of {
                Space::Pi => tc - ln.t0,
                Space::Chi => self.problem.region.linear_coord(c, tc) - ln.x0,
            };
            let ga = horner(&ln.ga, s);
            let gb = horner(&ln.gb, s);
            let ratio = (1.0 + ga) * (1.0 - ln.fb) + gb * gb;
            if !(ratio > 1e-10) {
                return f64::INFINITY;
            }
            let det_k = -ratio;
            let (k11, k12, k22) = (1.0 + ga, gb, ln.fb - 1.0);
            let aaa = horner(&ln.aaa, s);
            let aab = horner(&ln.aab, s);
            let tr = st.trace - (k22 * aaa - 2.0 * k12 * aab + k11 * ln.bab) / det_k;
            if !(tr.is_finite() && tr > 0.0) {
                return f64::INFINITY;
            }
            traces[st.k] = tr;
        }
        self.objective.value(&traces)
    }

    /// Moves row `i`, coordinate `c` to `tc` if that lowers the criterion
    /// below `current`, updating each dispersion matrix by the rank-two
    /// identity. Returns the new criterion value on success.
    fn apply(&mut self, i: usize, c: usize, tc: f64, current: f64, pending: &mut [Pending]) -> Option<f64> {
        let mut traces = self.traces.clone();
        for s in 0..self.states.len() {
            let k = self.states[s].k;
            let block = &self.problem.blocks[k];
            let pd = &mut pending[s];
            pd.x.resize(self.states[s].coords[i].len(), 0.0);
            let mut x = std::mem::take(&mut pd.x);
            self.candidate_coords(s, i, c, tc, &mut x);
            pd.x = x;
            let st = &self.states[s];
            block.model.eval_into(&pd.x, pd.g.as_mut_slice());
            let f = &st.f[i];
            let a = &st.d * &pd.g;
            let b = &st.d * f;
            let (ga, gb, fb) = (pd.g.dot(&a), pd.g.dot(&b), f.dot(&b));
            let (s11, s12, s22) = (1.0 + ga, gb, fb - 1.0);
            let det = s11 * s22 - s12 * s12;
            if !(-det > 1e-10) {
                return None;
            }
            pd.d.copy_from(&st.d);
            pd.d.ger(-s22 / det, &a, &a, 1.0);
            pd.d.ger(s12 / det, &a, &b, 1.0);
            pd.d.ger(s12 / det, &b, &a, 1.0);
            pd.d.ger(-s11 / det, &b, &b, 1.0);
            let tr = trace_product(&pd.d, &block.moments.m);
            if !(tr.is_finite() && tr > 0.0) {
                return None;
            }
            pd.trace = tr;
            traces[k] = tr;
        }
        let value = self.objective.value(&traces);
        if !(value < current) {
            return None;
        }
        for (st, pd) in self.states.iter_mut().zip(pending.iter_mut()) {
            let f_old = std::mem::replace(&mut st.f[i], pd.g.clone());
            st.info.ger(1.0, &pd.g, &pd.g, 1.0);
            st.info.ger(-1.0, &f_old, &f_old, 1.0);
            st.coords[i].copy_from_slice(&pd.x);
            std::mem::swap(&mut st.d, &mut pd.d);
            st.trace = pd.trace;
        }
        self.traces = traces;
        self.t[i][c] = tc;
        Some(value)
    }

    /// Recomputes information matrices from scratch to shed rounding drift.
    fn refresh(&mut self) {
        for st in &mut self.states {
            let block = &self.problem.blocks[st.k];
            let m = block.model.m();
            let mut info = DMatrix::zeros(m, m);
            for fi in &st.f {
                info.ger(1.0, fi, fi, 1.0);
            }
            if let Some(d) = dispersion(&info) {
                st.trace = trace_product(&d, &block.moments.m);
                st.info = info;
                st.d = d;
                self.traces[st.k] = st.trace;
            }
        }
    }
}

struct StartOutcome {
    t: Vec<Vec<f64>>,
    value: f64,
    history: Vec<f64>,
    sweeps: usize,
    evaluations: usize,
}

fn run_start(
    problem: &DesignProblem,
    objective: &Objective,
    opts: &ExchangeOptions,
    stream: u64,
    initial: Option<&[Vec<f64>]>,
) -> Result<StartOutcome, DesignError> {
    let p = problem.region.p();
    let n = opts.n;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut search = None;
    if let Some(t0) = initial {
        search = Search::new(problem, objective, t0.to_vec());
    }
    let mut attempts = 0;
    while search.is_none() && attempts < opts.start_attempts {
        attempts += 1;
        let t: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        search = Search::new(problem, objective, t);
    }
    let mut search = search.ok_or(DesignError::NoNonsingularStart {
        attempts,
        n,
        m: problem.max_terms(),
    })?;

    let mut scratch = search.scratch();
    let mut pending = search.pending();

    let mut current = search.value();
    let mut history = vec![current];
    let mut evaluations = 0;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        search.refresh();
        current = search.value().min(current);
        let sweep_start = current;
        for i in 0..n {
            for c in 0..p {
                let lines = search.lines(i, c, &mut scratch);
                let u0 = 0.5 * (search.t[i][c] + 1.0);
                let mut evals = 0;
                let mut best = (u0, current);
                {
                    let mut eval = |u: f64| {
                        evals += 1;
                        search.evaluate(c, 2.0 * u - 1.0, &lines)
                    };
                    for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        if (u - u0).abs() < 1e-12 {
                            continue;
                        }
                        let v = eval(u);
                        if v < best.1 {
                            best = (u, v);
                        }
                    }
                    let lo = (best.0 - 0.25).max(0.0);
                    let hi = (best.0 + 0.25).min(1.0);
                    let budget = opts.line_max_evals.saturating_sub(5).max(1);
                    let (ub, vb, _) = brent_minimize(&mut eval, lo, hi, opts.line_tol, budget);
                    if vb < best.1 {
                        best = (ub, vb);
                    }
                }
                evaluations += evals;
                let gain = current - best.1;
                if !(gain > 1e-12 * current.abs().max(1e-300)) {
                    continue;
                }
                if let Some(v) = search.apply(i, c, 2.0 * best.0 - 1.0, current, &mut pending) {
                    current = v;
                    history.push(current);
                }
            }
        }
        let rel = (sweep_start - current) / sweep_start.abs().max(1e-300);
        if rel < opts.rel_tol {
            break;
        }
    }
    search.refresh();
    Ok(StartOutcome {
        value: search.value(),
        t: search.t,
        history,
        sweeps,
        evaluations,
    })
}

/// Multi-start coordinate exchange; the best start wins, ties to the lowest index.
pub fn coordinate_exchange(
    problem: &DesignProblem,
    objective: &Objective,
    opts: &ExchangeOptions,
) -> Result<ExchangeResult, DesignError> {
    coordinate_exchange_from(problem, objective, opts, None)
}

/// As [`coordinate_exchange`], with start 0 seeded by `initial` when given.
pub fn coordinate_exchange_from(
    problem: &DesignProblem,
    objective: &Objective,
    opts: &ExchangeOptions,
    initial: Option<&[Vec<f64>]>,
) -> Result<ExchangeResult, DesignError> {
    if opts.n < problem.max_terms() {
        return Err(DesignError::TooFewRuns {
            n: opts.n,
            m: problem.max_terms(),
        });
    }
    if opts.starts == 0 {
        return Err(DesignError::Invalid("at least one start is required".into()));
    }
    let outcomes: Vec<Result<StartOutcome, DesignError>> = (0..opts.starts)
        .into_par_iter()
        .map(|s| {
            run_start(
                problem,
                objective,
                opts,
                opts.stream_base + s as u64,
                if s == 0 { initial } else { None },
            )
        })
        .collect();
    let mut best: Option<(usize, StartOutcome)> = None;
    let mut start_values = Vec::with_capacity(opts.starts);
    for (s, o) in outcomes.into_iter().enumerate() {
        let o = o?;
        start_values.push(o.value);
        if best.as_ref().is_none_or(|(_, b)| o.value < b.value) {
            best = Some((s, o));
        }
    }
    let (s, o) = best.expect("at least one start");
    let mut design = Design::new(o.t);
    design.provenance = Some(Provenance {
        seed: opts.seed,
        stream: opts.stream_base + s as u64,
        criterion: objective.describe(),
        weights: objective.weights().to_vec(),
        sweeps: o.sweeps,
        evaluations: o.evaluations,
    });
    let traces = problem.traces(&design);
    Ok(ExchangeResult {
        value: o.value,
        traces,
        design,
        history: o.history,
        start_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::cube_moment_matrix;
    use crate::geometry::{FactorBox, LogPiMap};

    fn interval_problem(order: usize) -> DesignProblem {
        let map = LogPiMap::new(DMatrix::from_element(1, 1, 1.0), DVector::zeros(1), vec!["a".into()]);
        let b = FactorBox::new(vec!["x".into()], vec![1.0], vec![std::f64::consts::E.powi(2)]).unwrap();
        let region = PiRegion::new(map, b).unwrap();
        let model = PolynomialModel::full("m", 1, order);
        let moments = cube_moment_matrix(&model);
        DesignProblem {
            region,
            blocks: vec![Block {
                model,
                space: Space::Pi,
                moments,
            }],
        }
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let (x, fx, evals) = brent_minimize(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-8, 100);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
        assert!(evals < 20);
        let (x, _, _) = brent_minimize(|x| -x, 0.0, 1.0, 1e-8, 100);
        assert!(x > 1.0 - 1e-6);
    }

    #[test]
    fn first_order_two_runs_go_to_endpoints() {
        let p = interval_problem(1);
        let opts = ExchangeOptions {
            n: 2,
            starts: 3,
            seed: 7,
            ..Default::default()
        };
        let r = coordinate_exchange(&p, &Objective::Weighted(vec![1.0]), &opts).unwrap();
        let mut s: Vec<f64> = r.design.scaled(&p.region).iter().map(|x| x[0]).collect();
        s.sort_by(f64::total_cmp);
        assert!((s[0] + 1.0).abs() < 1e-5, "{s:?}");
        assert!((s[1] - 1.0).abs() < 1e-5, "{s:?}");
        // Exhaustive grid oracle over pairs.
        let mut best = f64::INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let pts = vec![vec![-1.0 + i as f64 / 100.0], vec![-1.0 + j as f64 / 100.0]];
                best = best.min(crate::criterion::i_trace(&p.blocks[0].model, &pts, &p.blocks[0].moments));
            }
        }
        assert!(r.value <= best + 1e-9);
    }

    #[test]
    fn history_is_monotone() {
        let p = interval_problem(3);
        let opts = ExchangeOptions {
            n: 6,
            starts: 2,
            seed: 1,
            ..Default::default()
        };
        let r = coordinate_exchange(&p, &Objective::Weighted(vec![1.0]), &opts).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        let last = *r.history.last().unwrap();
        assert!((last - r.value).abs() <= 1e-12 * r.value);
        assert!(r.start_values.iter().all(|v| *v >= r.value));
    }

    #[test]
    fn too_few_runs_rejected() {
        let p = interval_problem(3);
        let opts = ExchangeOptions {
            n: 3,
            ..Default::default()
        };
        assert!(matches!(
            coordinate_exchange(&p, &Objective::Weighted(vec![1.0]), &opts),
            Err(DesignError::TooFewRuns { n: 3, m: 4 })
        ));
    }

    #[test]
    fn rank_two_update_matches_refactorization() {
        let p = interval_problem(2);
        let obj = Objective::Weighted(vec![1.0]);
        let t0 = vec![vec![-0.9], vec![0.1], vec![0.8], vec![0.3]];
        let s = Search::new(&p, &obj, t0.clone()).unwrap();
        let mut scratch = s.scratch();
        let lines = s.lines(1, 0, &mut scratch);
        let fast = s.evaluate(0, -0.4, &lines);
        let mut t1 = t0;
        t1[1][0] = -0.4;
        let exact = Search::new(&p, &obj, t1).unwrap().value();
        assert!((fast - exact).abs() < 1e-10 * exact);
    }
}
