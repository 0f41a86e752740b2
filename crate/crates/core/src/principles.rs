//! Physical-principle constraint families evaluated as signed residuals.
//!
//! Each evaluator returns a [`ResidualSet`]; a box (or coefficient vector)
//! is compatible with the principle iff every residual is ≤ 0. Three
//! families are implemented: information causality (IC), macroscopic
//! locality (ML), and local orthogonality (LO, one reduced inequality set
//! per argument).

use num_traits::Float;

use crate::boxes::{BoxError, CabelloCoeffs, HardyCoeffs, JointBox};
use crate::tol;

#[inline]
fn c<T: Float>(v: f64) -> T {
    T::from(v).expect("constant representable in scalar type")
}

/// A named, ordered list of signed constraint residuals. Feasibility is
/// `max(values) ≤ tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet<T> {
    /// Principle label, stable for report output.
    pub name: &'static str,
    /// Residuals in the documented order for this principle.
    pub values: Vec<T>,
}

impl<T: Float> ResidualSet<T> {
    /// Largest residual (the binding one).
    pub fn max_residual(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// True iff every residual is at most `tolerance`.
    pub fn feasible(&self, tolerance: T) -> bool {
        self.max_residual() <= tolerance
    }
}

/// Information-causality necessary conditions. The 16 residuals are
/// ordered by `index = direction·8 + α·4 + β·2 + γ` where direction 0
/// means the sender is the first party and γ flips the target bit:
///
/// `residual = Σ_outer [ Σ_inner P(a⊕b = xy⊕αx⊕βy⊕γ | xy) − 1 ]² − 1`
///
/// with (inner, outer) = (x, y) for direction 0 and (y, x) for
/// direction 1. The γ = 1 residual algebraically equals its γ = 0
/// partner (the bracket negates and is squared), so only 8 values are
/// distinct; all 16 are returned and the duplication is debug-asserted.
///
/// Errors on boxes that signal beyond [`tol::CONSTRAINT`].
pub fn ic_residuals<T: Float>(bx: &JointBox<T>) -> Result<ResidualSet<T>, BoxError> {
    let res = bx.ns_residual();
    if res > c::<T>(tol::CONSTRAINT) {
        return Err(BoxError::Signaling { residual: res.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(ic_residuals_unchecked(bx))
}

/// IC residuals without the signaling check. Mixture tables built from
/// no-signaling vertices are non-signaling identically in the weights,
/// so the solver's finite-difference probes may skip the check.
pub(crate) fn ic_residuals_unchecked<T: Float>(bx: &JointBox<T>) -> ResidualSet<T> {
    let one = T::one();
    // P(a ⊕ b = 0 | xy) indexed [x][y]
    let peq = [
        [bx.prob_equal(0, 0), bx.prob_equal(0, 1)],
        [bx.prob_equal(1, 0), bx.prob_equal(1, 1)],
    ];
    let mut values = Vec::with_capacity(16);
    for dir in 0..2u8 {
        for alpha in 0..2u8 {
            for beta in 0..2u8 {
                for gamma in 0..2u8 {
                    let mut total = T::zero();
                    for outer in 0..2u8 {
                        let mut bracket = -one;
                        for inner in 0..2u8 {
                            let (x, y) = if dir == 0 { (inner, outer) } else { (outer, inner) };
                            let s = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
                            let p0 = peq[x as usize][y as usize];
                            bracket = bracket + if s == 0 { p0 } else { one - p0 };
                        }
                        total = total + bracket * bracket;
                    }
                    values.push(total - one);
                }
            }
        }
    }
    #[cfg(debug_assertions)]
    for pair in 0..8 {
        let d = (values[2 * pair] - values[2 * pair + 1]).abs();
        debug_assert!(d <= c::<T>(1e-12), "gamma-flip residuals must coincide");
    }
    ResidualSet { name: "information causality", values }
}

/// Macroscopic-locality criterion as a single residual:
///
/// `|Σ_{x,y} (−1)^{xy} asin(D_xy)| − π` with
/// `D_xy = (C_xy − C_x C_y) / √((1−C_x²)(1−C_y²))`.
///
/// Correlators are read off the box (`C_x` on the y = 0 rows, `C_y` on
/// the x = 0 rows; any choice agrees on non-signaling boxes). Squared
/// one-party correlators are clamped to `1 −` [`tol::ML_CLAMP`] and each
/// `D_xy` into [−1, 1], which keeps the residual finite and continuous
/// at deterministic boxes.
pub fn ml_residual<T: Float>(bx: &JointBox<T>) -> ResidualSet<T> {
    let one = T::one();
    let cap = one - c::<T>(tol::ML_CLAMP);
    let cx = [bx2corr_a(bx, 0), bx2corr_a(bx, 1)];
    let cy = [bx2corr_b(bx, 0), bx2corr_b(bx, 1)];
    let mut total = T::zero();
    for x in 0..2usize {
        for y in 0..2usize {
            let dx = (cx[x] * cx[x]).min(cap);
            let dy = (cy[y] * cy[y]).min(cap);
            let den = ((one - dx) * (one - dy)).sqrt();
            let cxy = bx.correlator(x as u8, y as u8);
            let d = ((cxy - cx[x] * cy[y]) / den).max(-one).min(one);
            let term = d.asin();
            total = total + if x == 1 && y == 1 { -term } else { term };
        }
    }
    let pi = c::<T>(std::f64::consts::PI);
    ResidualSet { name: "macroscopic locality", values: vec![total.abs() - pi] }
}

#[inline]
fn bx2corr_a<T: Float>(bx: &JointBox<T>, x: u8) -> T {
    let r = bx.row(x, 0);
    r[0] + r[1] - r[2] - r[3]
}

#[inline]
fn bx2corr_b<T: Float>(bx: &JointBox<T>, y: u8) -> T {
    let r = bx.row(0, y);
    r[0] + r[2] - r[1] - r[3]
}

/// Local-orthogonality inequality set for Hardy mixtures: the reduced
/// family of 10 quadratic forms in the 8-parameter variables, evaluated
/// at [`crate::boxes::hardy_ns_params`]. Order is fixed and matches the
/// published listing.
pub fn lo_hardy_residuals<T: Float>(coeffs: &HardyCoeffs<T>) -> ResidualSet<T> {
    let p = crate::boxes::hardy_ns_params(coeffs);
    let (e1, e2, e3, f2, g2) = (p.e1, p.e2, p.e3, p.f2, p.g2);
    let one = T::one();
    let two = c::<T>(2.0);
    let values = vec![
        e3 * e3 + two * e2 * g2 - g2 * g2 - e2 * e2,
        e3 * e3 + two * e1 * g2 - e1 * e1 - g2 * g2,
        e3 * e3 + (e3 - e1) * (one - e2 - f2),
        e3 * e3 + (e3 - e2) * (one - f2 - g2),
        e2 * (e3 + f2 - e2) + (e3 - f2) * g2,
        e1 * (f2 - e3) + e3 * (e3 + g2) - f2 * g2,
        (g2 - e2) * (f2 + g2 - one) + two * e1 * e3 - e1 * e1,
        e3 * (one + f2 - g2) + e2 * (f2 + g2 - one) - f2 * f2,
        e3 * e3 + (f2 - e3) * (f2 + g2 - one) - (e1 - e2) * (e1 - e2),
        e1 * (e3 - f2 - g2) + e2 * (e1 - e3 + f2 + g2 - one) + e3,
    ];
    ResidualSet { name: "local orthogonality (Hardy)", values }
}

/// Local-orthogonality inequality set for Cabello mixtures: the reduced
/// family of 8 quadratic forms evaluated at
/// [`crate::boxes::cabello_ns_params`]. Order is fixed and matches the
/// published listing.
pub fn lo_cabello_residuals<T: Float>(coeffs: &CabelloCoeffs<T>) -> ResidualSet<T> {
    let p = crate::boxes::cabello_ns_params(coeffs);
    let (e1, e2, e3, f1, f2, g2) = (p.e1, p.e2, p.e3, p.f1, p.f2, p.g2);
    let one = T::one();
    let two = c::<T>(2.0);
    let values = vec![
        e3 * (one + e1 - f1 - g2) + (one + e2 + e3 - f1 - f2 - g2) * e2 - e1
            + (e1 + f2 + g2 - one) * g2,
        e2 * e2 + (one - f1 - g2) * e3 + (one + e1 + e3 - two * f1 - f2 - g2) * e2 - e1 * e1
            + (e3 + f1 - f2) * e1
            + (f1 + f2) * (f2 + g2)
            - (f1 + f2),
        (e2 + e3) * (e3 - f1) + two * e2 * g2 - g2 * g2,
        e2 * e2 + (e2 + two * f2 - f1) * e3 - e1 * e2 + (one - f2) * e1 - f2 * f2
            + (f2 - one) * f1,
        e2 * e2 + e3 * (one + f2 - f1 - g2) + e3 * e2 + e2 * (one - f1 - f2 - g2)
            + e1 * (g2 - f1)
            + f1 * f1
            + f2 * (f1 + g2 - one)
            - f1,
        e3 * e3 - e3 * f1 + e2 * e3 + e2 * (two - two * f1 - f2) + e1 * (one - f2 - g2)
            + f1 * f1
            + f1 * (two * g2 + f2 - two)
            + (f2 - one) * g2,
        e3 * e3 + (e2 - f1) * e3 + e2 * (one - two * f1 + g2) + f1 * (f1 + g2) - f1 - g2 * g2,
        (e2 + e1) * (e3 + e2 + one - e1 - g2) + f1 * (f1 + two * g2 - two * e2 - two),
    ];
    ResidualSet { name: "local orthogonality (Cabello)", values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{local_vertex, nonlocal_vertex};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn ic_pr_box_violates() {
        let pr: JointBox<f64> = nonlocal_vertex(0, 0, 0);
        let rs = ic_residuals(&pr).unwrap();
        assert_eq!(rs.values.len(), 16);
        // α=β=γ=0, first direction: both brackets are 1, so residual is 1.
        assert_eq!(rs.values[0], 1.0);
        assert!(!rs.feasible(0.0));
    }

    #[test]
    fn ic_uniform_box_all_minus_one() {
        let u = JointBox::from_flat([0.25f64; 16]);
        let rs = ic_residuals(&u).unwrap();
        for v in &rs.values {
            assert_abs_diff_eq!(*v, -1.0, epsilon = 1e-15);
        }
        assert!(rs.feasible(0.0));
    }

    #[test]
    fn ic_gamma_flip_pairs_coincide() {
        let bx = HardyCoeffs([0.1, 0.15, 0.2, 0.05, 0.3, 0.2]).table();
        let rs = ic_residuals(&bx).unwrap();
        for pair in 0..8 {
            assert_abs_diff_eq!(rs.values[2 * pair], rs.values[2 * pair + 1], epsilon = 1e-15);
        }
    }

    #[test]
    fn ic_rejects_signaling_box() {
        let mut flat = [0.0f64; 16];
        flat[0] = 1.0;
        flat[4] = 1.0;
        flat[8 + 3] = 1.0;
        flat[12 + 3] = 1.0;
        assert!(matches!(
            ic_residuals(&JointBox::from_flat(flat)),
            Err(BoxError::Signaling { .. })
        ));
    }

    #[test]
    fn ml_uniform_box_is_minus_pi() {
        let u = JointBox::from_flat([0.25f64; 16]);
        let rs = ml_residual(&u);
        assert_abs_diff_eq!(rs.values[0], -PI, epsilon = 1e-15);
    }

    #[test]
    fn ml_pr_box_is_plus_pi() {
        let pr: JointBox<f64> = nonlocal_vertex(0, 0, 0);
        let rs = ml_residual(&pr);
        assert_abs_diff_eq!(rs.values[0], PI, epsilon = 1e-9);
    }

    #[test]
    fn ml_isotropic_boundary() {
        // C_xy = (−1)^{xy}/√2 with unbiased marginals: exactly on the ML
        // boundary because 4·asin(1/√2) = π.
        let w = 0.5f64.sqrt();
        let mut flat = [0.0f64; 16];
        for (r, sign) in [(0usize, 1.0), (1, 1.0), (2, 1.0), (3, -1.0)] {
            let peq = 0.5 * (1.0 + sign * w);
            flat[4 * r] = peq / 2.0;
            flat[4 * r + 3] = peq / 2.0;
            flat[4 * r + 1] = (1.0 - peq) / 2.0;
            flat[4 * r + 2] = (1.0 - peq) / 2.0;
        }
        let rs = ml_residual(&JointBox::from_flat(flat));
        assert_abs_diff_eq!(rs.values[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn ml_local_vertices_feasible() {
        for i in 0..16u8 {
            let v: JointBox<f64> = local_vertex((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
            let rs = ml_residual(&v);
            assert!(
                rs.values[0] <= 1e-9,
                "local vertex {i} must satisfy the macroscopic-locality bound"
            );
        }
    }

    #[test]
    fn ic_local_vertices_feasible() {
        for i in 0..16u8 {
            let v: JointBox<f64> = local_vertex((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
            let rs = ic_residuals(&v).unwrap();
            assert!(rs.feasible(1e-12));
        }
    }

    #[test]
    fn lo_hardy_pr_weight_violates() {
        let delta6 = HardyCoeffs([0.0, 0.0, 0.0, 0.0, 0.0, 1.0f64]);
        let rs = lo_hardy_residuals(&delta6);
        assert_eq!(rs.values.len(), 10);
        // first inequality at the pure nonlocal weight: e3=e2=g2=1/2
        assert_abs_diff_eq!(rs.values[0], 0.25, epsilon = 1e-15);
        assert!(!rs.feasible(1e-9));
    }

    #[test]
    fn lo_hardy_local_weights_feasible() {
        for i in 0..5 {
            let mut v = [0.0f64; 6];
            v[i] = 1.0;
            let rs = lo_hardy_residuals(&HardyCoeffs(v));
            assert!(rs.feasible(1e-12), "local weight δ{} must satisfy LO", i + 1);
        }
    }

    #[test]
    fn lo_cabello_vertex_weights() {
        for i in 0..11 {
            let mut v = [0.0f64; 11];
            v[i] = 1.0;
            let rs = lo_cabello_residuals(&CabelloCoeffs(v));
            assert_eq!(rs.values.len(), 8);
            if i == 5 {
                // the weight carrying the objective violates every clique
                for r in &rs.values {
                    assert_abs_diff_eq!(r, &0.25, epsilon = 1e-12);
                }
            } else if i == 10 {
                // its mirror weight sits strictly inside all cliques,
                // which is what lets mixtures of the two reach the boundary
                for r in &rs.values {
                    assert_abs_diff_eq!(r, &(-0.25), epsilon = 1e-12);
                }
            } else {
                assert!(rs.feasible(1e-12), "local weight δ{} must satisfy LO", i + 1);
            }
        }
    }

    #[test]
    fn lo_exact_witness_saturates_cabello_set() {
        // c6 = √2/2, c11 = 1 − √2/2 drives every Cabello LO residual to 0.
        let s = 0.5f64.sqrt();
        let mut v = [0.0f64; 11];
        v[5] = s;
        v[10] = 1.0 - s;
        let rs = lo_cabello_residuals(&CabelloCoeffs(v));
        for r in &rs.values {
            assert_abs_diff_eq!(*r, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ml_output_relabel_invariance() {
        // flipping Alice's output on both inputs negates C_x and C_xy,
        // leaving the residual unchanged
        let bx = CabelloCoeffs([0.05, 0.1, 0.05, 0.1, 0.1, 0.2, 0.05, 0.1, 0.05, 0.1, 0.1]).table();
        let mut flipped = [[0.0f64; 4]; 4];
        for x in 0..2u8 {
            for y in 0..2u8 {
                for a in 0..2u8 {
                    for b in 0..2u8 {
                        flipped[(2 * x + y) as usize][(2 * (1 - a) + b) as usize] =
                            bx.prob(x, y, a, b);
                    }
                }
            }
        }
        let r0 = ml_residual(&bx).values[0];
        let r1 = ml_residual(&JointBox::from_rows(flipped)).values[0];
        assert_abs_diff_eq!(r0, r1, epsilon = 1e-12);
    }

    #[test]
    fn evaluators_accept_f32() {
        let pr: JointBox<f32> = nonlocal_vertex(0, 0, 0);
        let rs = ml_residual(&pr);
        assert!((rs.values[0] - std::f32::consts::PI).abs() < 1e-3);
    }
}
