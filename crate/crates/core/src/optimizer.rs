//! Multistart local maximization over a coefficient simplex subject to
//! linear equalities and smooth nonlinear inequality constraints.
//!
//! The solver is an augmented-Lagrangian method: linear equalities and
//! box bounds are handled *exactly* at every iterate by an active-set
//! projection (semismooth Newton on the projection dual), while the
//! nonlinear inequalities enter through a standard positive-part
//! augmented Lagrangian. Inner subproblems are solved by a spectral
//! projected-gradient (SPG) iteration with finite-difference gradients.
//! Each start is refined by deterministic vertex-directed restarts,
//! which lets dense interior starts reach sparse optima; the final
//! answer is the best feasible local optimum across all starts.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use rayon::prelude::*;

use crate::tol;

/// Initial penalty weight. Large enough that iterates track the
/// feasible surface from the first outer iteration (small values let
/// every start drift into one shared attractor before the penalty
/// binds), small enough that the inner SPG iteration stays
/// well-conditioned.
const RHO_INITIAL: f64 = 1e3;
/// Penalty growth factor and cap.
const RHO_GROWTH: f64 = 10.0;
const RHO_MAX: f64 = 1e12;
/// Outer augmented-Lagrangian iterations.
const OUTER_ITERS: usize = 16;
/// Inner SPG tolerance schedule: start loose, tighten tenfold per outer
/// round down to the floor.
const INNER_TOL_START: f64 = 1e-5;
const INNER_TOL_FLOOR: f64 = 1e-10;
/// Vertex-directed refinement: after the first local solve, re-solve
/// from `(1−f)·x + f·e_i` for every coordinate vertex and keep strict
/// improvements, for at most this many sweeps.
const HOP_ROUNDS: usize = 2;
const HOP_FRACTION: f64 = 0.5;
/// Projection solve tolerance (relative to `1 + max|b|`).
const PROJ_TOL: f64 = 1e-12;

/// Errors from the solver.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SolverError {
    /// The linear equality system has no solution.
    #[error("infeasible equalities: least-squares residual {residual:e}")]
    InfeasibleEqualities { residual: f64 },
    /// No start produced a feasible point; the best attempt is attached.
    #[error(
        "infeasible: no feasible point across {} starts (best residuals: equality {:e}, inequality {:e})",
        best.starts_run, best.max_eq_residual, best.max_ineq_residual
    )]
    Infeasible { best: OptResult },
}

/// A maximization problem over a box-bounded polytope with smooth
/// nonlinear inequality constraints (`residuals ≤ 0` feasible).
pub struct ConstrainedProblem {
    /// Number of coordinates.
    pub dim: usize,
    /// Objective to maximize.
    pub objective: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    /// Linear equalities as (weights, rhs) rows; redundant rows are
    /// allowed (the projection handles rank deficiency).
    pub lin_eq: Vec<(Vec<f64>, f64)>,
    /// Nonlinear inequality residuals, feasible iff all ≤ 0. May return
    /// an empty list.
    pub nonlin_ineq: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// Per-coordinate `[lo, hi]` bounds.
    pub bounds: Vec<(f64, f64)>,
}

/// Solver configuration; see [`SolverConfig::default`] for the pinned
/// defaults.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Multistart count.
    pub starts: usize,
    /// RNG seed for start sampling.
    pub seed: u64,
    /// Iteration cap for each inner SPG solve.
    pub max_iter: usize,
    /// Feasibility tolerance for equality and inequality residuals.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { starts: 64, seed: 1, max_iter: 300, tol: tol::CONSTRAINT }
    }
}

/// Result of a multistart run. Residuals are re-evaluated at
/// `best_point`, so they are exactly consistent with the fields.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub max_eq_residual: f64,
    pub max_ineq_residual: f64,
    pub starts_run: usize,
    pub converged_count: usize,
}

/// Pseudo-inverse of a small symmetric positive semidefinite matrix via
/// eigendecomposition, zeroing eigenvalues below `1e-12·max(λ_max, 1)`.
fn pinv_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let se = m.clone().symmetric_eigen();
    let wmax = se.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let thresh = 1e-12 * wmax.max(1.0);
    let mut scaled = se.eigenvectors.clone();
    for (j, &w) in se.eigenvalues.iter().enumerate() {
        let inv = if w > thresh { 1.0 / w } else { 0.0 };
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= inv;
        }
    }
    scaled * se.eigenvectors.transpose()
}

fn clip(z: &DVector<f64>, lo: &[f64], hi: &[f64]) -> DVector<f64> {
    DVector::from_iterator(z.len(), z.iter().enumerate().map(|(i, &v)| v.max(lo[i]).min(hi[i])))
}

/// Exact Euclidean projection of `y` onto `{x : Ax = b, lo ≤ x ≤ hi}`.
///
/// Works on the dual: the projection is `x(λ) = clip(y + Aᵀλ)` where λ
/// solves `F(λ) = A·x(λ) − b = 0`. `F` is piecewise linear, so a
/// semismooth Newton step (generalized Jacobian `A_D A_Dᵀ` on the free
/// set `D`) combined with an exact piecewise-quadratic ray search is
/// globally convergent in practice; a band-tolerant KKT polish and an
/// alternating-projection fallback guard the remaining corner cases.
pub(crate) fn project_linear(
    y: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    lo: &[f64],
    hi: &[f64],
) -> DVector<f64> {
    let m = a.nrows();
    let n = y.len();
    if m == 0 {
        return clip(y, lo, hi);
    }
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let at = a.transpose();

    // φ(λ) is the negated dual objective; x and F are the primal point
    // and equality residual induced by λ.
    let eval = |lam: &DVector<f64>| {
        let z = y + &at * lam;
        let x = clip(&z, lo, hi);
        let f = a * &x - b;
        (x, f, z)
    };

    // Exact minimizer of the dual along `lam + t·d`, `t ≥ 0`. The dual
    // is piecewise quadratic in t with breakpoints where a coordinate of
    // `y + Aᵀ(λ + t·d)` crosses a bound; slopes and curvatures are
    // analytic, so no function-value comparisons are needed. Returns
    // `None` when the dual decreases without bound (primal infeasible
    // along this direction).
    let ray_min = |lam: &DVector<f64>, d: &DVector<f64>| -> Option<f64> {
        let w = &at * d;
        let z0 = y + &at * lam;
        let mut f = a * &clip(&z0, lo, hi) - b;
        let mut ts: Vec<f64> = Vec::new();
        for i in 0..n {
            if w[i] != 0.0 {
                for bd in [lo[i], hi[i]] {
                    let ti = (bd - z0[i]) / w[i];
                    if ti > 1e-15 {
                        ts.push(ti);
                    }
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut t_cur = 0.0f64;
        let segments = ts.into_iter().map(Some).chain(std::iter::once(None));
        for t_next in segments {
            let slope = f.dot(d);
            if slope >= 0.0 {
                return Some(t_cur);
            }
            let t_mid = match t_next {
                Some(t) => 0.5 * (t_cur + t),
                None => t_cur + 1.0,
            };
            let mut curv = 0.0;
            let mut free = vec![false; n];
            for i in 0..n {
                let zi = z0[i] + t_mid * w[i];
                if zi > lo[i] && zi < hi[i] {
                    free[i] = true;
                    curv += w[i] * w[i];
                }
            }
            if curv > 0.0 {
                let t_star = t_cur - slope / curv;
                if t_next.map_or(true, |t| t_star <= t) {
                    return Some(t_star);
                }
            }
            let t = t_next?;
            for i in 0..n {
                if free[i] {
                    let step = (t - t_cur) * w[i];
                    for r in 0..m {
                        f[r] += step * a[(r, i)];
                    }
                }
            }
            t_cur = t;
        }
        Some(t_cur)
    };

    let mut lam = DVector::zeros(m);
    let (mut x, mut f, mut z) = eval(&lam);
    let mut best_nf = f.amax();
    let mut best_x = x.clone();
    let mut best_lam = lam.clone();
    for _ in 0..100 {
        let nf = f.amax();
        if nf < best_nf {
            best_nf = nf;
            best_x = x.clone();
            best_lam = lam.clone();
        }
        if nf <= PROJ_TOL * scale {
            return x;
        }
        // generalized Jacobian on the strictly free set
        let mut j = DMatrix::zeros(m, m);
        for i in 0..n {
            if z[i] > lo[i] && z[i] < hi[i] {
                for r in 0..m {
                    for s in 0..m {
                        j[(r, s)] += a[(r, i)] * a[(s, i)];
                    }
                }
            }
        }
        let mut d = -(&pinv_psd(&j) * &f);
        let newton = f.dot(&d) < -1e-16 * f.dot(&f);
        if !newton {
            d = -f.clone();
        }
        let mut t = ray_min(&lam, &d);
        if t.map_or(true, |v| v <= 0.0) && newton {
            d = -f.clone();
            t = ray_min(&lam, &d);
        }
        let Some(t) = t.filter(|&v| v > 0.0) else { break };
        lam += t * &d;
        let (nx, nf2, nz) = eval(&lam);
        x = nx;
        f = nf2;
        z = nz;
    }
    let nf = f.amax();
    if nf < best_nf {
        best_nf = nf;
        best_x = x;
        best_lam = lam;
    }
    if best_nf <= PROJ_TOL * scale {
        return best_x;
    }

    // KKT polish: solve the equality system exactly on the active set
    // identified by the best dual point, trying a few activity bands.
    let z = y + &at * &best_lam;
    for band in [None, Some(0.0), Some(1e-12), Some(1e-9), Some(1e-7)] {
        let mut free = vec![true; n];
        let mut xp = DVector::zeros(n);
        if let Some(band) = band {
            for i in 0..n {
                free[i] = z[i] > lo[i] + band && z[i] < hi[i] - band;
                if !free[i] {
                    xp[i] = if z[i] <= lo[i] + band { lo[i] } else { hi[i] };
                }
            }
        }
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        let mut rhs = b.clone();
        for i in 0..n {
            if !free[i] {
                for r in 0..m {
                    rhs[r] -= a[(r, i)] * xp[i];
                }
            }
        }
        if !idx.is_empty() {
            let af = a.select_columns(idx.iter());
            let yf = DVector::from_iterator(idx.len(), idx.iter().map(|&i| y[i]));
            let mu = pinv_psd(&(&af * af.transpose())) * (rhs - &af * &yf);
            let xf = yf + af.transpose() * mu;
            let oob = xf
                .iter()
                .enumerate()
                .any(|(k, &v)| v < lo[idx[k]] - 1e-12 || v > hi[idx[k]] + 1e-12);
            if !oob {
                for (k, &i) in idx.iter().enumerate() {
                    xp[i] = xf[k];
                }
            } else {
                continue;
            }
        }
        let xp = clip(&xp, lo, hi);
        if (a * &xp - b).amax() <= PROJ_TOL * scale {
            return xp;
        }
    }

    // Dykstra alternating-projection fallback: slow but safe.
    let g = pinv_psd(&(a * &at));
    let paff = |v: &DVector<f64>| v - &at * (&g * (a * v - b));
    let mut yk = best_x.clone();
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    let mut aff = yk.clone();
    for _ in 0..200_000 {
        aff = paff(&(&yk + &p));
        p = &yk + &p - &aff;
        let bx = clip(&(&aff + &q), lo, hi);
        q = &aff + &q - &bx;
        if (&aff - &bx).amax() < 0.5 * PROJ_TOL * scale {
            let out = clip(&aff, lo, hi);
            if (a * &out - b).amax() < best_nf {
                return out;
            }
            return best_x;
        }
        yk = bx;
    }
    let out = clip(&aff, lo, hi);
    if (a * &out - b).amax() < best_nf {
        out
    } else {
        best_x
    }
}

/// Central finite-difference gradient with step [`tol::FD_STEP`].
fn fd_grad(f: &dyn Fn(&DVector<f64>) -> f64, x: &DVector<f64>, g: &mut DVector<f64>) {
    let mut xp = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + tol::FD_STEP;
        let fp = f(&xp);
        xp[i] = xi - tol::FD_STEP;
        let fm = f(&xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * tol::FD_STEP);
    }
}

/// Spectral projected-gradient minimization of `f` over the set defined
/// by `proj`. Stationarity is measured with a unit step
/// (`‖proj(x − g) − x‖∞ ≤ inner_tol`) so a collapsed Barzilai–Borwein
/// step cannot masquerade as convergence; the line search is
/// nonmonotone over a 10-value history.
fn spg_min(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x0: DVector<f64>,
    proj: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    inner_tol: f64,
    max_iter: usize,
) -> DVector<f64> {
    let mut x = proj(&x0);
    let mut fx = f(&x);
    let mut hist = vec![fx];
    let n = x.len();
    let mut g = DVector::zeros(n);
    fd_grad(f, &x, &mut g);
    let mut t = 1.0 / g.amax().max(1e-12);
    let mut stall = 0;
    let mut gn = DVector::zeros(n);
    for _ in 0..max_iter {
        if (proj(&(&x - &g)) - &x).amax() <= inner_tol {
            break;
        }
        let d = proj(&(&x - t * &g)) - &x;
        if d.amax() <= 1e-15 {
            break;
        }
        let fref = hist.iter().rev().take(10).cloned().fold(f64::NEG_INFINITY, f64::max);
        let gd = g.dot(&d).min(0.0);
        let mut alpha = 1.0;
        let mut xn = &x + &d;
        let mut fn_ = f(&xn);
        for _ in 0..30 {
            if fn_ <= fref + 1e-4 * alpha * gd {
                break;
            }
            alpha *= 0.5;
            xn = &x + alpha * &d;
            fn_ = f(&xn);
        }
        if (fn_ - fx).abs() <= 1e-15 * (1.0 + fx.abs()) {
            stall += 1;
            if stall >= 5 {
                break;
            }
        } else {
            stall = 0;
        }
        fd_grad(f, &xn, &mut gn);
        let s = &xn - &x;
        let yv = &gn - &g;
        let sy = s.dot(&yv);
        t = if sy > 1e-16 { s.dot(&s) / sy } else { (t * 4.0).min(1e8) };
        t = t.clamp(1e-12, 1e8);
        x = xn;
        fx = fn_;
        std::mem::swap(&mut g, &mut gn);
        hist.push(fx);
    }
    x
}

struct StartOutcome {
    point: DVector<f64>,
    value: f64,
    eq_res: f64,
    ineq_res: f64,
}

struct ProblemMats<'p> {
    problem: &'p ConstrainedProblem,
    a: DMatrix<f64>,
    b: DVector<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl<'p> ProblemMats<'p> {
    fn new(problem: &'p ConstrainedProblem) -> Self {
        let m = problem.lin_eq.len();
        let n = problem.dim;
        let mut a = DMatrix::zeros(m, n);
        let mut b = DVector::zeros(m);
        for (r, (w, rhs)) in problem.lin_eq.iter().enumerate() {
            for (i, &v) in w.iter().enumerate() {
                a[(r, i)] = v;
            }
            b[r] = *rhs;
        }
        let lo: Vec<f64> = problem.bounds.iter().map(|&(l, _)| l).collect();
        let hi: Vec<f64> = problem.bounds.iter().map(|&(_, h)| h).collect();
        ProblemMats { problem, a, b, lo, hi }
    }

    fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        project_linear(y, &self.a, &self.b, &self.lo, &self.hi)
    }

    fn residuals(&self, x: &DVector<f64>) -> Vec<f64> {
        (self.problem.nonlin_ineq)(x.as_slice())
    }

    fn outcome(&self, x: DVector<f64>) -> StartOutcome {
        let eq_res = if self.b.is_empty() { 0.0 } else { (&self.a * &x - &self.b).amax() };
        let r = self.residuals(&x);
        let ineq_res = r.into_iter().fold(0.0f64, f64::max);
        let value = (self.problem.objective)(x.as_slice());
        StartOutcome { point: x, value, eq_res, ineq_res }
    }

    /// One augmented-Lagrangian solve from `x0`: equalities and bounds
    /// exact via projection, inequality multipliers updated each outer
    /// round, penalty grown when the violation stalls, then a
    /// feasibility-restoration pass if any residual still exceeds `tol`
    /// (needed when a constraint is degenerate at the optimum and no
    /// finite multiplier exists).
    fn al_solve(&self, x0: &DVector<f64>, cfg: &SolverConfig) -> StartOutcome {
        let proj = |z: &DVector<f64>| self.project(z);
        let mut x = self.project(&clip(x0, &self.lo, &self.hi));
        let m = self.residuals(&x).len();
        let mut mu = vec![0.0f64; m];
        let mut rho = RHO_INITIAL;
        let mut inner = INNER_TOL_START;
        let mut prev_viol = f64::INFINITY;
        let mut prev_obj = f64::INFINITY;
        for _ in 0..OUTER_ITERS {
            let f = |z: &DVector<f64>| {
                let mut v = -(self.problem.objective)(z.as_slice());
                if m > 0 {
                    let r = self.residuals(z);
                    for (k, rk) in r.into_iter().enumerate() {
                        let tpos = (mu[k] + rho * rk).max(0.0);
                        v += (tpos * tpos - mu[k] * mu[k]) / (2.0 * rho);
                    }
                }
                v
            };
            x = spg_min(&f, x, &proj, inner, cfg.max_iter);
            let r = self.residuals(&x);
            let viol = r.iter().cloned().fold(0.0f64, f64::max);
            for (k, rk) in r.into_iter().enumerate() {
                mu[k] = (mu[k] + rho * rk).max(0.0);
            }
            let ob = (self.problem.objective)(x.as_slice());
            if viol <= cfg.tol && inner <= 1e-9 && (ob - prev_obj).abs() <= 1e-10 * (1.0 + ob.abs())
            {
                break;
            }
            if viol > 0.25 * prev_viol {
                rho = (rho * RHO_GROWTH).min(RHO_MAX);
            }
            prev_viol = viol.max(1e-300);
            prev_obj = ob;
            inner = (inner * 0.1).max(INNER_TOL_FLOOR);
        }
        if m > 0 {
            let viol = self.residuals(&x).into_iter().fold(0.0f64, f64::max);
            if viol > cfg.tol {
                let fr = |z: &DVector<f64>| {
                    self.residuals(z).into_iter().map(|v| v.max(0.0).powi(2)).sum::<f64>()
                };
                x = spg_min(&fr, x, &proj, 1e-12, 400);
            }
        }
        self.outcome(x)
    }

    /// Local solve plus vertex-directed refinement: probe a mix of the
    /// incumbent with each coordinate vertex and keep strict
    /// improvements. Deterministic; feasible candidates also rescue an
    /// infeasible incumbent.
    fn solve_start(&self, x0: &DVector<f64>, cfg: &SolverConfig) -> StartOutcome {
        let mut best = self.al_solve(x0, cfg);
        let n = self.problem.dim;
        for _ in 0..HOP_ROUNDS {
            let mut improved = false;
            for i in 0..n {
                let mut probe = best.point.scale(1.0 - HOP_FRACTION);
                probe[i] += HOP_FRACTION;
                let cand = self.al_solve(&probe, cfg);
                let best_ok = best.eq_res <= cfg.tol && best.ineq_res <= cfg.tol;
                let cand_ok = cand.eq_res <= cfg.tol && cand.ineq_res <= cfg.tol;
                if cand_ok && (!best_ok || cand.value > best.value + 1e-10) {
                    best = cand;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        best
    }
}

/// Draws `n` start points: symmetric-Dirichlet(1) samples projected
/// onto the equality set by least squares, then clipped to [0, 1] and
/// renormalized. Deterministic given `seed`; a longer draw extends a
/// shorter one with the same seed (so best-of-N is monotone in N).
pub fn sample_starts(
    dim: usize,
    eqs: &[(Vec<f64>, f64)],
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let m = eqs.len();
    let mut a = DMatrix::zeros(m, dim);
    let mut b = DVector::zeros(m);
    for (r, (w, rhs)) in eqs.iter().enumerate() {
        for (i, &v) in w.iter().enumerate() {
            a[(r, i)] = v;
        }
        b[r] = *rhs;
    }
    let at = a.transpose();
    let g = pinv_psd(&(&a * &at));
    if m > 0 {
        // b must lie in the range of A for the system to be consistent
        let residual = (&a * (&at * (&g * &b)) - &b).amax();
        if residual > tol::CONSTRAINT {
            return Err(SolverError::InfeasibleEqualities { residual });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = Dirichlet::new(&vec![1.0; dim]).expect("valid Dirichlet parameters");
    let mut starts = Vec::with_capacity(n);
    for _ in 0..n {
        let sample = dir.sample(&mut rng);
        let mut x = DVector::from_vec(sample);
        if m > 0 {
            let corr = &at * (&g * (&a * &x - &b));
            x -= corr;
        }
        let mut s = 0.0;
        for v in x.iter_mut() {
            *v = v.clamp(0.0, 1.0);
            s += *v;
        }
        if s > 0.0 {
            x /= s;
        }
        starts.push(x.as_slice().to_vec());
    }
    Ok(starts)
}

/// Multistart maximization. Runs [`sample_starts`] starts in parallel
/// (reduction ordered by start index, so the result is deterministic),
/// each through the augmented-Lagrangian local solver with
/// vertex-directed refinement, and returns the best feasible outcome.
/// Ties in value keep the earliest start.
///
/// Errors when the equality system is inconsistent or no start reaches
/// feasibility; the latter carries the least-infeasible attempt.
pub fn maximize(problem: &ConstrainedProblem, cfg: &SolverConfig) -> Result<OptResult, SolverError> {
    let starts = sample_starts(problem.dim, &problem.lin_eq, cfg.starts, cfg.seed)?;
    let mats = ProblemMats::new(problem);
    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|s| mats.solve_start(&DVector::from_vec(s.clone()), cfg))
        .collect();
    let mut best: Option<&StartOutcome> = None;
    let mut least_bad: Option<&StartOutcome> = None;
    let mut converged = 0usize;
    for out in &outcomes {
        if out.eq_res <= cfg.tol && out.ineq_res <= cfg.tol {
            converged += 1;
            if best.map_or(true, |b| out.value > b.value) {
                best = Some(out);
            }
        } else if least_bad
            .map_or(true, |b| out.eq_res.max(out.ineq_res) < b.eq_res.max(b.ineq_res))
        {
            least_bad = Some(out);
        }
    }
    let pack = |o: &StartOutcome| OptResult {
        best_point: o.point.as_slice().to_vec(),
        best_value: o.value,
        max_eq_residual: o.eq_res,
        max_ineq_residual: o.ineq_res,
        starts_run: cfg.starts,
        converged_count: converged,
    };
    match best {
        Some(o) => Ok(pack(o)),
        None => {
            let fallback = least_bad.expect("at least one start ran");
            Err(SolverError::Infeasible { best: pack(fallback) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    /// Reference projection onto the probability simplex (sort-based,
    /// exact), for cross-checking the dual active-set projector.
    fn simplex_proj_ref(y: &[f64]) -> Vec<f64> {
        let mut u: Vec<f64> = y.to_vec();
        u.sort_by(|a, b| b.total_cmp(a));
        let mut css = 0.0;
        let mut rho = 0;
        let mut theta = 0.0;
        for (k, &v) in u.iter().enumerate() {
            css += v;
            let t = (css - 1.0) / (k + 1) as f64;
            if v - t > 0.0 {
                rho = k + 1;
                theta = t;
            }
        }
        let _ = rho;
        y.iter().map(|&v| (v - theta).max(0.0)).collect()
    }

    fn simplex_rows(dim: usize) -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::from_element(1, dim, 1.0), DVector::from_element(1, 1.0))
    }

    #[test]
    fn projection_matches_sort_based_simplex_reference() {
        let (a, b) = simplex_rows(6);
        let lo = vec![0.0; 6];
        let hi = vec![1.0; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let y = DVector::from_fn(6, |_, _| rng.gen_range(-2.0..2.0));
            let got = project_linear(&y, &a, &b, &lo, &hi);
            let want = simplex_proj_ref(y.as_slice());
            for i in 0..6 {
                assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn projection_satisfies_equalities_and_optimality() {
        // random consistent system with redundant rows
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        for _ in 0..50 {
            let mut a = DMatrix::from_fn(3, n, |_, _| rng.gen_range(-1.0..1.0));
            let dup = a.row(0) * 2.0;
            a = a.insert_row(3, 0.0);
            for i in 0..n {
                a[(3, i)] = dup[i];
            }
            let xf = DVector::from_fn(n, |_, _| rng.gen_range(0.2..0.8));
            let b = &a * &xf; // feasible by construction
            let lo = vec![0.0; n];
            let hi = vec![1.0; n];
            let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..2.0));
            let x = project_linear(&y, &a, &b, &lo, &hi);
            assert!((&a * &x - &b).amax() <= 1e-10, "projection must satisfy equalities");
            for i in 0..n {
                assert!(x[i] >= -1e-12 && x[i] <= 1.0 + 1e-12);
            }
            // variational inequality along random feasible directions:
            // moving from x toward any feasible point cannot get closer to y
            let d0 = (&x - &y).norm_squared();
            for _ in 0..20 {
                let z = {
                    let raw = DVector::from_fn(n, |_, _| rng.gen_range(0.0..1.0));
                    project_linear(&raw, &a, &b, &lo, &hi)
                };
                for eps in [1e-4, 1e-2, 0.5] {
                    let p = &x + eps * (&z - &x);
                    assert!(
                        (&p - &y).norm_squared() >= d0 - 1e-9,
                        "a feasible direction improved the projection distance"
                    );
                }
            }
        }
    }

    #[test]
    fn projection_empty_equalities_is_box_clamp() {
        let a = DMatrix::zeros(0, 4);
        let b = DVector::zeros(0);
        let y = DVector::from_vec(vec![-0.5, 0.5, 1.5, 0.25]);
        let x = project_linear(&y, &a, &b, &[0.0; 4], &[1.0; 4]);
        assert_eq!(x.as_slice(), &[0.0, 0.5, 1.0, 0.25]);
    }

    fn quadratic_problem(target: Vec<f64>) -> ConstrainedProblem {
        let dim = target.len();
        let t2 = target.clone();
        ConstrainedProblem {
            dim,
            objective: Box::new(move |c| {
                -c.iter().zip(&t2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }),
            lin_eq: vec![(vec![1.0; dim], 1.0)],
            nonlin_ineq: Box::new(|_| Vec::new()),
            bounds: vec![(0.0, 1.0); dim],
        }
    }

    #[test]
    fn recovers_interior_quadratic_optimum() {
        let target = vec![0.3, 0.25, 0.2, 0.15, 0.06, 0.04];
        let problem = quadratic_problem(target.clone());
        let cfg = SolverConfig { starts: 4, ..Default::default() };
        let res = maximize(&problem, &cfg).unwrap();
        for (got, want) in res.best_point.iter().zip(&target) {
            assert_abs_diff_eq!(*got, *want, epsilon = 1e-6);
        }
        assert!(res.best_value > -1e-10);
        assert_eq!(res.starts_run, 4);
        assert!(res.converged_count > 0);
    }

    #[test]
    fn respects_nonlinear_inequality() {
        // maximize c0 subject to c0² ≤ 0.25 on the 3-simplex → c0 = 0.5
        let problem = ConstrainedProblem {
            dim: 3,
            objective: Box::new(|c| c[0]),
            lin_eq: vec![(vec![1.0; 3], 1.0)],
            nonlin_ineq: Box::new(|c| vec![c[0] * c[0] - 0.25]),
            bounds: vec![(0.0, 1.0); 3],
        };
        let cfg = SolverConfig { starts: 4, ..Default::default() };
        let res = maximize(&problem, &cfg).unwrap();
        assert_abs_diff_eq!(res.best_value, 0.5, epsilon = 1e-6);
        assert!(res.max_ineq_residual <= 1e-8);
    }

    #[test]
    fn reports_infeasible_when_no_point_exists() {
        let problem = ConstrainedProblem {
            dim: 3,
            objective: Box::new(|c| c[0]),
            lin_eq: vec![(vec![1.0; 3], 1.0)],
            nonlin_ineq: Box::new(|_| vec![1.0]), // never satisfiable
            bounds: vec![(0.0, 1.0); 3],
        };
        let cfg = SolverConfig { starts: 2, ..Default::default() };
        match maximize(&problem, &cfg) {
            Err(SolverError::Infeasible { best }) => {
                assert!(best.max_ineq_residual > 0.5);
                assert_eq!(best.converged_count, 0);
            }
            other => panic!("expected infeasible error, got {other:?}"),
        }
    }

    #[test]
    fn sample_starts_rejects_contradictory_equalities() {
        let eqs = vec![(vec![1.0; 6], 1.0), (vec![1.0; 6], 2.0)];
        assert!(matches!(
            sample_starts(6, &eqs, 3, 42),
            Err(SolverError::InfeasibleEqualities { .. })
        ));
    }

    #[test]
    fn sample_starts_are_simplex_points_and_prefix_stable() {
        let eqs = vec![(vec![1.0; 6], 1.0)];
        let s3 = sample_starts(6, &eqs, 3, 42).unwrap();
        let s8 = sample_starts(6, &eqs, 8, 42).unwrap();
        assert_eq!(s3.len(), 3);
        for (a, b) in s3.iter().zip(&s8) {
            assert_eq!(a, b, "longer draws must extend shorter ones");
        }
        for s in &s8 {
            let sum: f64 = s.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-9);
            assert!(s.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let target = vec![0.4, 0.3, 0.2, 0.1];
        let problem = quadratic_problem(target);
        let cfg = SolverConfig { starts: 6, ..Default::default() };
        let r1 = maximize(&problem, &cfg).unwrap();
        let r2 = maximize(&problem, &cfg).unwrap();
        assert_eq!(r1, r2, "same seed and config must give bit-identical results");
    }

    #[test]
    fn best_value_monotone_in_start_count() {
        let problem = ConstrainedProblem {
            dim: 4,
            objective: Box::new(|c| c[0] - c[1]),
            lin_eq: vec![(vec![1.0; 4], 1.0)],
            nonlin_ineq: Box::new(|c| vec![c[0] * c[0] - 0.49]),
            bounds: vec![(0.0, 1.0); 4],
        };
        let small = maximize(&problem, &SolverConfig { starts: 2, ..Default::default() }).unwrap();
        let large = maximize(&problem, &SolverConfig { starts: 8, ..Default::default() }).unwrap();
        assert!(large.best_value >= small.best_value - 1e-12);
    }
}
