//! Independent brute-force sampler: lower-bound witnesses for each
//! (argument, principle, case) optimum, plus a second, independently
//! coded evaluator used to cross-check the information-causality
//! residuals.
//!
//! The sampler never trusts the optimizer: it enumerates the vertices
//! of the case's equality polytope directly, draws convex combinations
//! of them (so every candidate satisfies the equalities by
//! construction), filters candidates by the principle residuals, and
//! refines around the best survivors. Compared with rejection sampling
//! of raw simplex points this keeps the feasible yield workable even
//! for constraint sets whose feasible region has tiny volume.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::boxes::{CabelloCoeffs, HardyCoeffs, JointBox};
use crate::principles::{
    ic_residuals_unchecked, lo_cabello_residuals, lo_hardy_residuals, ml_residual,
};
use crate::scenarios::{lr_equalities, Argument, LRSelection, Principle};
use crate::tol;

/// Residual threshold below which the sampler accepts a candidate as
/// satisfying a principle.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Post-hoc equality residual above which a candidate is discarded.
const EQUALITY_TOL: f64 = 1e-6;
/// Tolerance for vertex enumeration (basis solve residual and
/// nonnegativity slack).
const VERTEX_TOL: f64 = 1e-9;
/// Pairwise tolerance for deduplicating enumerated vertices.
const VERTEX_DEDUP_TOL: f64 = 1e-8;
/// Number of best feasible points kept between refinement rounds.
const ELITE_COUNT: usize = 24;
/// Shrinking step radii of the refinement rounds.
const RADII: [f64; 5] = [1.0, 0.5, 0.25, 0.12, 0.06];

/// Outcome of one sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Best objective among feasible samples; `None` when no sample was
    /// feasible (distinct from 0, which is an achievable value).
    pub best_value: Option<f64>,
    /// Coefficient vector attaining `best_value`.
    pub best_point: Option<Vec<f64>>,
    /// Number of candidate points evaluated.
    pub samples: usize,
    /// Fraction of evaluated candidates that passed every filter.
    pub feasible_fraction: f64,
}

/// Vertices of `{x : Ax = b, x ≥ 0}` by basis enumeration. Suitable for
/// the small coefficient polytopes here (dimension ≤ 11); callers pass
/// the equality rows as (weights, rhs) pairs that include the
/// normalization row, so the upper bound `x ≤ 1` is implied.
pub fn polytope_vertices(eqs: &[(Vec<f64>, f64)], dim: usize) -> Vec<Vec<f64>> {
    let m = eqs.len();
    let a = DMatrix::from_fn(m, dim, |i, j| eqs[i].0[j]);
    let b = DVector::from_fn(m, |i, _| eqs[i].1);
    let rank = a.rank(1e-10);
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for basis in (0..dim).combinations(rank) {
        let ab = a.select_columns(basis.iter());
        if ab.rank(1e-10) < rank {
            continue;
        }
        let xb = match SVD::new(ab.clone(), true, true).solve(&b, 1e-12) {
            Ok(x) => x,
            Err(_) => continue,
        };
        if (&ab * &xb - &b).amax() > VERTEX_TOL {
            continue; // equalities inconsistent on this basis
        }
        if xb.min() < -VERTEX_TOL {
            continue;
        }
        let mut x = vec![0.0; dim];
        for (k, &j) in basis.iter().enumerate() {
            x[j] = xb[k].max(0.0);
        }
        let full = DVector::from_column_slice(&x);
        if (&a * &full - &b).amax() > VERTEX_TOL {
            continue;
        }
        let duplicate = verts
            .iter()
            .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= VERTEX_DEDUP_TOL));
        if !duplicate {
            verts.push(x);
        }
    }
    verts
}

/// One convex combination of vertices. `kind` cycles through four
/// weight laws: flat Dirichlet, two increasingly concentrated
/// Dirichlets, and a sparse random-support law that can land exactly on
/// low-dimensional faces.
fn mixture_point(verts: &[Vec<f64>], kind: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = verts.len();
    let weights = match kind {
        0 => dirichlet_weights(m, 1.0, rng),
        1 => dirichlet_weights(m, 0.3, rng),
        2 => dirichlet_weights(m, 0.08, rng),
        _ => {
            let size = rng.gen_range(1..=m.min(6));
            let support = rand::seq::index::sample(rng, m, size);
            let inner = dirichlet_weights(size, 1.0, rng);
            let mut w = vec![0.0; m];
            for (k, j) in support.into_iter().enumerate() {
                w[j] = inner[k];
            }
            w
        }
    };
    let dim = verts[0].len();
    let mut c = vec![0.0; dim];
    for (w, v) in weights.iter().zip(verts) {
        for (cj, vj) in c.iter_mut().zip(v) {
            *cj += w * vj;
        }
    }
    c
}

/// Dirichlet(α·1) weights of length `m`, falling back to uniform when
/// the concentrated sampler underflows to an all-zero draw.
fn dirichlet_weights(m: usize, alpha: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let w = Dirichlet::new_with_size(alpha, m)
        .expect("valid Dirichlet parameters")
        .sample(rng);
    if w.iter().all(|x| x.is_finite()) && w.iter().sum::<f64>() > 0.0 {
        w
    } else {
        vec![1.0 / m as f64; m]
    }
}

/// Largest principle residual at a coefficient vector (0 for the bare
/// no-signaling polytope, which adds no residuals).
fn principle_residual_max(argument: Argument, principle: Principle, c: &[f64]) -> f64 {
    let max = |values: &[f64]| values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    match (argument, principle) {
        (_, Principle::Ns) => 0.0,
        (Argument::Hna, Principle::Ic) => {
            max(&ic_residuals_unchecked(&hardy_table(c)).values)
        }
        (Argument::Cna, Principle::Ic) => {
            max(&ic_residuals_unchecked(&cabello_table(c)).values)
        }
        (Argument::Hna, Principle::Ml) => max(&ml_residual(&hardy_table(c)).values),
        (Argument::Cna, Principle::Ml) => max(&ml_residual(&cabello_table(c)).values),
        (Argument::Hna, Principle::Lo) => {
            max(&lo_hardy_residuals(&HardyCoeffs(to_arr(c))).values)
        }
        (Argument::Cna, Principle::Lo) => {
            max(&lo_cabello_residuals(&CabelloCoeffs(to_arr(c))).values)
        }
    }
}

fn hardy_table(c: &[f64]) -> JointBox<f64> {
    HardyCoeffs::<f64>(to_arr(c)).table()
}

fn cabello_table(c: &[f64]) -> JointBox<f64> {
    CabelloCoeffs::<f64>(to_arr(c)).table()
}

fn to_arr<const N: usize>(c: &[f64]) -> [f64; N] {
    c.try_into().expect("coefficient vector length matches the argument")
}

/// Draws up to `n` candidate points for one (argument, principle, case)
/// cell and returns the best feasible objective found. Half the budget
/// goes to fresh vertex mixtures; the rest refines around the best
/// survivors along segments toward fresh mixtures, other elites, and
/// raw vertices, with shrinking step radii. Deterministic given `seed`;
/// runs single-threaded so parallelism belongs at the caller (cells are
/// independent).
pub fn sample_max(
    argument: Argument,
    principle: Principle,
    lr: &LRSelection,
    n: usize,
    seed: u64,
) -> OracleResult {
    assert!(n >= 1, "sample budget must be at least 1");
    let dim = argument.dim();
    let mut eqs = vec![(vec![1.0; dim], 1.0)];
    eqs.extend(lr_equalities(argument, lr));
    let verts = polytope_vertices(&eqs, dim);
    if verts.is_empty() {
        return OracleResult {
            best_value: None,
            best_point: None,
            samples: 0,
            feasible_fraction: 0.0,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elites: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut drawn = 0usize;
    let mut feasible = 0usize;

    let absorb = |batch: Vec<Vec<f64>>,
                      elites: &mut Vec<(f64, Vec<f64>)>,
                      drawn: &mut usize,
                      feasible: &mut usize| {
        for c in batch {
            *drawn += 1;
            let eq_res = eqs
                .iter()
                .map(|(w, rhs)| {
                    (w.iter().zip(&c).map(|(wi, ci)| wi * ci).sum::<f64>() - rhs).abs()
                })
                .fold(0.0, f64::max);
            if eq_res > EQUALITY_TOL {
                continue;
            }
            if argument == Argument::Cna && CabelloCoeffs(to_arr::<11>(&c)).q1() < tol::EPS_Q {
                continue;
            }
            if principle_residual_max(argument, principle, &c) > FEASIBILITY_TOL {
                continue;
            }
            *feasible += 1;
            elites.push((argument.objective(&c), c));
        }
        elites.sort_by(|a, b| b.0.total_cmp(&a.0));
        elites.truncate(ELITE_COUNT);
    };

    let na = (n / 2).max(1);
    let batch: Vec<Vec<f64>> =
        (0..na).map(|i| mixture_point(&verts, i % 4, &mut rng)).collect();
    absorb(batch, &mut elites, &mut drawn, &mut feasible);

    let nb = (n - na.min(n)) / RADII.len();
    for &radius in &RADII {
        let batch: Vec<Vec<f64>> = if elites.is_empty() {
            (0..nb).map(|i| mixture_point(&verts, i % 4, &mut rng)).collect()
        } else {
            let third = nb / 3;
            (0..nb)
                .map(|j| {
                    let base = &elites[rng.gen_range(0..elites.len())].1;
                    let tgt: Vec<f64> = if j < third {
                        mixture_point(&verts, j % 4, &mut rng)
                    } else if j < 2 * third {
                        elites[rng.gen_range(0..elites.len())].1.clone()
                    } else {
                        verts[rng.gen_range(0..verts.len())].clone()
                    };
                    let u = rng.gen_range(0.0..radius);
                    base.iter().zip(&tgt).map(|(b, t)| b + u * (t - b)).collect()
                })
                .collect()
        };
        absorb(batch, &mut elites, &mut drawn, &mut feasible);
    }

    let (best_value, best_point) = match elites.first() {
        Some((v, p)) => (Some(*v), Some(p.clone())),
        None => (None, None),
    };
    OracleResult {
        best_value,
        best_point,
        samples: drawn,
        feasible_fraction: if drawn == 0 { 0.0 } else { feasible as f64 / drawn as f64 },
    }
}

/// The same 16 information-causality residuals as
/// [`crate::principles::ic_residuals`], computed along an independent
/// arithmetic path: with `E_xy = P(a=b|xy) − P(a≠b|xy)` each bracket
/// collapses to `(σ₀·E + σ₁·E)/2` for signs σ = ±1 fixed by the
/// direction and relabeling bits, so the residual is
/// `¼·Σ_outer(σ₀E₀ + σ₁E₁)² − 1`. Kept verbatim as a cross-check of the
/// probability-sum form; the two must agree to near machine precision.
pub fn ic_residuals_correlator(bx: &JointBox<f64>) -> [f64; 16] {
    let mut e = [[0.0; 2]; 2];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let row = bx.row(x, y);
            e[x as usize][y as usize] = row[0] + row[3] - row[1] - row[2];
        }
    }
    let mut out = [0.0; 16];
    let mut idx = 0;
    for d in 0..2u8 {
        for al in 0..2u8 {
            for be in 0..2u8 {
                for ga in 0..2u8 {
                    let mut tot = 0.0;
                    for o in 0..2u8 {
                        let mut bra = 0.0;
                        for i in 0..2u8 {
                            let (x, y) = if d == 0 { (i, o) } else { (o, i) };
                            let s = (x & y) ^ (al & x) ^ (be & y) ^ ga;
                            let sigma = 1.0 - 2.0 * f64::from(s);
                            bra += sigma * e[x as usize][y as usize];
                        }
                        tot += bra * bra;
                    }
                    out[idx] = 0.25 * tot - 1.0;
                    idx += 1;
                }
            }
        }
    }
    out
}
