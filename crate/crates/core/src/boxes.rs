//! Algebra of bipartite correlation boxes for the two-input/two-output
//! Bell scenario: extremal vertices, convex decompositions, marginals,
//! the 8-parameter form, and validity checking.
//!
//! A box is a table of conditional probabilities `P(ab|xy)` stored as a
//! 4×4 matrix. The row/column convention is fixed throughout the crate:
//! rows are the input pairs `(xy) = 00, 01, 10, 11` and columns are the
//! outcome pairs `(ab) = 00, 01, 10, 11`, both in that order.

use num_traits::Float;

use crate::tol;

/// Fixed ordering of the probability table: rows are input pairs
/// `(xy) = 00, 01, 10, 11`, columns are outcome pairs `(ab)` in the same
/// binary order. All flat 16-entry layouts are row-major in this order.
pub const TABLE_ORDER: &str = "rows (xy) = 00,01,10,11; cols (ab) = 00,01,10,11";

#[inline]
fn c<T: Float>(v: f64) -> T {
    T::from(v).expect("constant representable in scalar type")
}

/// Errors from box construction and conversion.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoxError {
    /// Coefficient vector does not sum to 1 within tolerance.
    #[error("coefficients off the simplex: sum deviates from 1 by {deviation:e}")]
    OffSimplex { deviation: f64 },
    /// A coefficient is more negative than the clipping tolerance.
    #[error("coefficient {index} is negative: {value:e}")]
    NegativeCoefficient { index: usize, value: f64 },
    /// The box signals: a marginal depends on the remote input.
    #[error("signaling box: no-signaling residual {residual:e}")]
    Signaling { residual: f64 },
    /// 8-parameter form violates its positivity band.
    #[error("parameters outside the positivity band: violation {violation:e}")]
    InfeasibleParams { violation: f64 },
}

/// Conditional probability table `P(ab|xy)` for two parties with binary
/// inputs and outputs. See [`TABLE_ORDER`] for the index convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointBox<T> {
    p: [[T; 4]; 4],
}

impl<T: Float> JointBox<T> {
    /// Builds a box from the 4×4 table (no validation; see [`check_box`]).
    pub fn from_rows(p: [[T; 4]; 4]) -> Self {
        JointBox { p }
    }

    /// Builds a box from 16 row-major entries in the fixed order.
    pub fn from_flat(v: [T; 16]) -> Self {
        let mut p = [[T::zero(); 4]; 4];
        for (i, e) in v.into_iter().enumerate() {
            p[i / 4][i % 4] = e;
        }
        JointBox { p }
    }

    /// The 16 entries, row-major in the fixed order.
    pub fn as_flat(&self) -> [T; 16] {
        let mut v = [T::zero(); 16];
        for r in 0..4 {
            for col in 0..4 {
                v[4 * r + col] = self.p[r][col];
            }
        }
        v
    }

    /// `P(ab|xy)` for the given bits.
    #[inline]
    pub fn prob(&self, x: u8, y: u8, a: u8, b: u8) -> T {
        debug_assert!(x <= 1 && y <= 1 && a <= 1 && b <= 1);
        self.p[(2 * x + y) as usize][(2 * a + b) as usize]
    }

    /// Row `xy` of the table.
    #[inline]
    pub fn row(&self, x: u8, y: u8) -> [T; 4] {
        self.p[(2 * x + y) as usize]
    }

    /// `P(a ⊕ b = 0 | xy)`: probability the outputs agree.
    #[inline]
    pub fn prob_equal(&self, x: u8, y: u8) -> T {
        let r = self.row(x, y);
        r[0] + r[3]
    }

    /// Full two-party correlator `C_xy = P(a=b|xy) − P(a≠b|xy)`.
    #[inline]
    pub fn correlator(&self, x: u8, y: u8) -> T {
        let r = self.row(x, y);
        r[0] + r[3] - r[1] - r[2]
    }

    /// Largest no-signaling residual: how much any one-party marginal
    /// changes with the remote input.
    pub fn ns_residual(&self) -> T {
        let mut worst = T::zero();
        for i in 0..2u8 {
            for o in 0..2u8 {
                // Alice's marginal P(a=o|x=i) under Bob's two inputs
                let m0 = self.prob(i, 0, o, 0) + self.prob(i, 0, o, 1);
                let m1 = self.prob(i, 1, o, 0) + self.prob(i, 1, o, 1);
                worst = worst.max((m0 - m1).abs());
                // Bob's marginal P(b=o|y=i) under Alice's two inputs
                let n0 = self.prob(0, i, 0, o) + self.prob(0, i, 1, o);
                let n1 = self.prob(1, i, 0, o) + self.prob(1, i, 1, o);
                worst = worst.max((n0 - n1).abs());
            }
        }
        worst
    }
}

/// Deterministic local vertex: `a = αx ⊕ β`, `b = γy ⊕ δ` with
/// probability 1. All four arguments are bits.
pub fn local_vertex<T: Float>(alpha: u8, beta: u8, gamma: u8, delta: u8) -> JointBox<T> {
    assert!(alpha <= 1 && beta <= 1 && gamma <= 1 && delta <= 1, "arguments must be bits");
    let mut p = [[T::zero(); 4]; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let a = (alpha & x) ^ beta;
            let b = (gamma & y) ^ delta;
            p[(2 * x + y) as usize][(2 * a + b) as usize] = T::one();
        }
    }
    JointBox { p }
}

/// Extremal nonlocal vertex: outputs uniform with `a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ`.
/// The `(0,0,0)` vertex is the PR box.
pub fn nonlocal_vertex<T: Float>(alpha: u8, beta: u8, gamma: u8) -> JointBox<T> {
    assert!(alpha <= 1 && beta <= 1 && gamma <= 1, "arguments must be bits");
    let half = c::<T>(0.5);
    let mut p = [[T::zero(); 4]; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let s = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
            for a in 0..2u8 {
                let b = a ^ s;
                p[(2 * x + y) as usize][(2 * a + b) as usize] = half;
            }
        }
    }
    JointBox { p }
}

fn simplex_check(coeffs: &[f64]) -> Result<(), BoxError> {
    for (i, &v) in coeffs.iter().enumerate() {
        if v < -tol::SIMPLEX_NEG {
            return Err(BoxError::NegativeCoefficient { index: i, value: v });
        }
    }
    let sum: f64 = coeffs.iter().sum();
    if (sum - 1.0).abs() > tol::SIMPLEX_SUM {
        return Err(BoxError::OffSimplex { deviation: sum - 1.0 });
    }
    Ok(())
}

/// Convex weights over the five local vertices and one nonlocal vertex of
/// the Hardy decomposition. `c[i]` is the paper-order coefficient
/// `c_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyCoeffs<T>(pub [T; 6]);

/// Convex weights over the nine local and two nonlocal vertices of the
/// Cabello decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CabelloCoeffs<T>(pub [T; 11]);

impl<T: Float> HardyCoeffs<T> {
    /// Validates simplex membership: nonnegative within clipping
    /// tolerance, sum within [`tol::SIMPLEX_SUM`] of 1.
    pub fn validate(&self) -> Result<(), BoxError> {
        let v: Vec<f64> = self.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        simplex_check(&v)
    }

    /// The mixture's probability table. Does not validate, so the solver
    /// can evaluate finite-difference probes that sit slightly off the
    /// simplex; use [`hardy_box`] for the checked path.
    pub fn table(&self) -> JointBox<T> {
        let [c1, c2, c3, c4, c5, c6] = self.0;
        let h = c::<T>(0.5);
        let z = T::zero();
        JointBox::from_rows([
            [c3 + h * c6, c4, z, c1 + c2 + c5 + h * c6],
            [c3 + c4 + h * c6, z, c2, c1 + c5 + h * c6],
            [h * c6, c5, c3, c1 + c2 + c4 + h * c6],
            [z, c5 + h * c6, c2 + c3 + c4 + h * c6, c1],
        ])
    }
}

impl<T: Float> CabelloCoeffs<T> {
    /// Validates simplex membership (same rules as the Hardy weights).
    pub fn validate(&self) -> Result<(), BoxError> {
        let v: Vec<f64> = self.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        simplex_check(&v)
    }

    /// The mixture's probability table (unvalidated; see
    /// [`HardyCoeffs::table`] for why).
    pub fn table(&self) -> JointBox<T> {
        let [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11] = self.0;
        let h = c::<T>(0.5);
        let z = T::zero();
        let m = h * (c6 + c11);
        JointBox::from_rows([
            [c3 + c8 + c10 + m, c4 + c7 + c9, z, c1 + c2 + c5 + m],
            [
                c3 + c4 + h * c6,
                c7 + c8 + c9 + c10 + h * c11,
                c2 + h * c11,
                c1 + c5 + h * c6,
            ],
            [
                c8 + h * c6,
                c5 + c7 + h * c11,
                c3 + c10 + h * c11,
                c1 + c2 + c4 + c9 + h * c6,
            ],
            [z, c5 + c7 + c8 + m, c2 + c3 + c4 + m, c1 + c9 + c10],
        ])
    }

    /// `q1 = P(01|01)`, the probability subtracted in the objective.
    pub fn q1(&self) -> T {
        let v = &self.0;
        v[6] + v[7] + v[8] + v[9] + c::<T>(0.5) * v[10]
    }
}

/// Mixture box for Hardy weights. The result carries the three forced
/// zeros `P(10|00) = P(01|01) = P(00|11) = 0` exactly, and the success
/// probability is `P(00|10) = c6/2`.
pub fn hardy_box<T: Float>(coeffs: &HardyCoeffs<T>) -> Result<JointBox<T>, BoxError> {
    coeffs.validate()?;
    Ok(coeffs.table())
}

/// Mixture box for Cabello weights. Carries the two forced zeros
/// `P(10|00) = P(00|11) = 0` exactly; the objective is
/// `q4 − q1 = (c6−c11)/2 − (c7+c9+c10)` with `q4 = P(00|10)`.
pub fn cabello_box<T: Float>(coeffs: &CabelloCoeffs<T>) -> Result<JointBox<T>, BoxError> {
    coeffs.validate()?;
    Ok(coeffs.table())
}

/// One-party conditional marginals of a no-signaling box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginals<T> {
    /// `pa[x][a] = P(a|x)` for Alice.
    pub pa: [[T; 2]; 2],
    /// `pb[y][b] = P(b|y)` for Bob.
    pub pb: [[T; 2]; 2],
}

/// Computes both parties' marginals. Errors if the box signals by more
/// than [`tol::CONSTRAINT`], since marginals are then ill-defined.
pub fn marginals<T: Float>(bx: &JointBox<T>) -> Result<Marginals<T>, BoxError> {
    let res = bx.ns_residual();
    if res > c::<T>(tol::CONSTRAINT) {
        return Err(BoxError::Signaling { residual: res.to_f64().unwrap_or(f64::NAN) });
    }
    let mut pa = [[T::zero(); 2]; 2];
    let mut pb = [[T::zero(); 2]; 2];
    for i in 0..2u8 {
        for o in 0..2u8 {
            pa[i as usize][o as usize] = bx.prob(i, 0, o, 0) + bx.prob(i, 0, o, 1);
            pb[i as usize][o as usize] = bx.prob(0, i, 0, o) + bx.prob(0, i, 1, o);
        }
    }
    Ok(Marginals { pa, pb })
}

/// Structured validity report: largest violation of each box axiom.
/// Report-style rather than a boolean so callers can print residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport<T> {
    /// How far any entry strays outside `[0, 1]`.
    pub max_positivity_violation: T,
    /// Largest deviation of a row sum from 1.
    pub max_normalization_residual: T,
    /// Largest marginal change under the remote input.
    pub max_ns_residual: T,
}

impl<T: Float> ValidityReport<T> {
    /// True iff every residual is at most `tolerance`.
    pub fn is_valid(&self, tolerance: T) -> bool {
        self.max_positivity_violation <= tolerance
            && self.max_normalization_residual <= tolerance
            && self.max_ns_residual <= tolerance
    }
}

/// Checks positivity, normalization, and no-signaling, reporting the
/// worst violation of each.
pub fn check_box<T: Float>(bx: &JointBox<T>) -> ValidityReport<T> {
    let mut pos = T::zero();
    let mut norm = T::zero();
    for x in 0..2u8 {
        for y in 0..2u8 {
            let r = bx.row(x, y);
            let mut sum = T::zero();
            for e in r {
                pos = pos.max(-e).max(e - T::one());
                sum = sum + e;
            }
            norm = norm.max((sum - T::one()).abs());
        }
    }
    ValidityReport {
        max_positivity_violation: pos,
        max_normalization_residual: norm,
        max_ns_residual: bx.ns_residual(),
    }
}

/// The 8 independent parameters of a no-signaling box: `e` values are
/// `P(00|xy)` per input pair, `f` values are Alice's `P(a=0|x)`, `g`
/// values are Bob's `P(b=0|y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NSParams<T> {
    pub e1: T,
    pub e2: T,
    pub e3: T,
    pub e4: T,
    pub f1: T,
    pub f2: T,
    pub g1: T,
    pub g2: T,
}

impl<T: Float> NSParams<T> {
    /// Row pairing of the parameter form: `(e, f_x, g_y)` per input pair
    /// `(xy)` in table order.
    fn rows(&self) -> [(T, T, T); 4] {
        [
            (self.e1, self.f1, self.g1),
            (self.e2, self.f1, self.g2),
            (self.e3, self.f2, self.g1),
            (self.e4, self.f2, self.g2),
        ]
    }

    /// Largest violation of the positivity band
    /// `max{0, f+g−1} ≤ e ≤ min{f, g}` across the four rows, including
    /// `f, g ∈ [0,1]`. Zero means every induced table entry is a
    /// probability.
    pub fn band_violation(&self) -> T {
        let mut worst = T::zero();
        for (e, f, g) in self.rows() {
            for v in [f, g] {
                worst = worst.max(-v).max(v - T::one());
            }
            let lo = T::zero().max(f + g - T::one());
            let hi = f.min(g);
            worst = worst.max(lo - e).max(e - hi);
        }
        worst
    }
}

/// Reads the 8-parameter form off a no-signaling box. Errors on boxes
/// that signal beyond [`tol::CONSTRAINT`].
pub fn to_ns_params<T: Float>(bx: &JointBox<T>) -> Result<NSParams<T>, BoxError> {
    let m = marginals(bx)?;
    Ok(NSParams {
        e1: bx.prob(0, 0, 0, 0),
        e2: bx.prob(0, 1, 0, 0),
        e3: bx.prob(1, 0, 0, 0),
        e4: bx.prob(1, 1, 0, 0),
        f1: m.pa[0][0],
        f2: m.pa[1][0],
        g1: m.pb[0][0],
        g2: m.pb[1][0],
    })
}

/// Expands the 8-parameter form into a full table. Errors when the
/// parameters violate their positivity band by more than
/// [`tol::SIMPLEX_SUM`]; smaller violations are absorbed by clamping.
pub fn from_ns_params<T: Float>(p: &NSParams<T>) -> Result<JointBox<T>, BoxError> {
    let viol = p.band_violation();
    if viol > c::<T>(tol::SIMPLEX_SUM) {
        return Err(BoxError::InfeasibleParams { violation: viol.to_f64().unwrap_or(f64::NAN) });
    }
    let one = T::one();
    let clamp = |v: T| v.max(T::zero()).min(one);
    let mut rows = [[T::zero(); 4]; 4];
    for (i, (e, f, g)) in p.rows().into_iter().enumerate() {
        rows[i] = [clamp(e), clamp(f - e), clamp(g - e), clamp(one + e - f - g)];
    }
    Ok(JointBox::from_rows(rows))
}

/// The 8-parameter form of a Hardy mixture, written directly in the
/// weights (no table construction). Agrees with
/// `to_ns_params(hardy_box(c))` on the simplex.
pub fn hardy_ns_params<T: Float>(coeffs: &HardyCoeffs<T>) -> NSParams<T> {
    let [_, c2, c3, c4, c5, c6] = coeffs.0;
    let h = c::<T>(0.5);
    let e1 = c3 + h * c6;
    let e2 = c3 + c4 + h * c6;
    let e3 = h * c6;
    NSParams {
        e1,
        e2,
        e3,
        e4: T::zero(),
        f1: e2,
        f2: c5 + h * c6,
        g1: e1,
        g2: c2 + e2,
    }
}

/// The 8-parameter form of a Cabello mixture, written directly in the
/// weights. Agrees with `to_ns_params(cabello_box(c))` on the simplex.
pub fn cabello_ns_params<T: Float>(coeffs: &CabelloCoeffs<T>) -> NSParams<T> {
    let [_, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11] = coeffs.0;
    let h = c::<T>(0.5);
    let e1 = c3 + c8 + c10 + h * (c6 + c11);
    let e2 = c3 + c4 + h * c6;
    let e3 = c8 + h * c6;
    NSParams {
        e1,
        e2,
        e3,
        e4: T::zero(),
        f1: e1 + c4 + c7 + c9,
        f2: e3 + c5 + c7 + h * c11,
        g1: e1,
        g2: e2 + c2 + h * c11,
    }
}

/// Least-squares inversion of a mixture family: recovers weights from a
/// box when the box lies in the family's span. `table_of_unit(i)` must
/// return the extreme table of the i-th unit weight.
fn fit_family<const N: usize>(
    bx: &JointBox<f64>,
    table_of_unit: impl Fn(usize) -> JointBox<f64>,
) -> Option<[f64; N]> {
    use nalgebra::{DMatrix, DVector, SVD};
    let a = DMatrix::from_fn(16, N, |r, i| table_of_unit(i).as_flat()[r]);
    let b = DVector::from_column_slice(&bx.as_flat());
    let w = SVD::new(a.clone(), true, true).solve(&b, 1e-14).ok()?;
    if (&a * &w - &b).amax() > tol::SIMPLEX_SUM {
        return None; // box lies outside the family's span
    }
    let mut out = [0.0; N];
    for (o, wi) in out.iter_mut().zip(w.iter()) {
        *o = *wi;
    }
    Some(out)
}

/// Recovers the Hardy weights of a box, or `None` when the box does not
/// carry the Hardy zero pattern (residual above [`tol::SIMPLEX_SUM`]) or
/// the recovered weights are not a valid mixture.
pub fn fit_hardy(bx: &JointBox<f64>) -> Option<HardyCoeffs<f64>> {
    let w = fit_family::<6>(bx, |i| {
        let mut v = [0.0; 6];
        v[i] = 1.0;
        HardyCoeffs(v).table()
    })?;
    let coeffs = HardyCoeffs(w);
    coeffs.validate().ok()?;
    Some(coeffs)
}

/// Recovers Cabello weights for a box, with the same membership contract
/// as [`fit_hardy`]. Unlike the Hardy family, the weight→box map has a
/// nullspace (eleven weights, rank seven), so the least-squares fit is
/// repaired to the nearest valid mixture; every quantity derived from the
/// weights (the table, `q1`, consistency residuals) is independent of
/// which preimage is chosen.
pub fn fit_cabello(bx: &JointBox<f64>) -> Option<CabelloCoeffs<f64>> {
    use nalgebra::{DMatrix, DVector};
    let a = DMatrix::from_fn(16, 11, |r, i| {
        let mut v = [0.0; 11];
        v[i] = 1.0;
        CabelloCoeffs(v).table().as_flat()[r]
    });
    let b = DVector::from_column_slice(&bx.as_flat());
    let svd = a.clone().svd(true, true);
    let w0 = svd.solve(&b, 1e-14).ok()?;
    if (&a * &w0 - &b).amax() > tol::SIMPLEX_SUM {
        return None; // box lies outside the family's span
    }
    // Project the minimum-norm fit onto `{w ≥ 0, Aw = b}` over a
    // full-row-rank reduction of the equalities (weights are bounded by
    // the unit box because the equalities force them to sum to one).
    let (u, s, vt) = (svd.u.as_ref()?, &svd.singular_values, svd.v_t.as_ref()?);
    let rank = s.iter().filter(|&&x| x > 1e-9).count();
    let a_red = DMatrix::from_fn(rank, 11, |r, c| s[r] * vt[(r, c)]);
    let b_red = DVector::from_fn(rank, |r, _| u.column(r).dot(&b));
    let w = crate::optimizer::project_linear(&w0, &a_red, &b_red, &[0.0; 11], &[1.0; 11]);
    if (&a * &w - &b).amax() > tol::SIMPLEX_SUM {
        return None; // no valid mixture reproduces the box
    }
    let mut out = [0.0; 11];
    for (o, wi) in out.iter_mut().zip(w.iter()) {
        *o = *wi;
    }
    let coeffs = CabelloCoeffs(out);
    coeffs.validate().ok()?;
    Some(coeffs)
}
