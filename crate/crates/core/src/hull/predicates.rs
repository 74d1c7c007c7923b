//! Exact orientation of five points in `E⁴`.
//!
//! `orient(p₀, …, p₄)` is the sign of `det[p₁−p₀; p₂−p₀; p₃−p₀; p₄−p₀]`,
//! which equals (up to a fixed global sign) the 5×5 homogeneous determinant
//! and is therefore alternating in all five points. A floating-point
//! evaluation is accepted when it clears a forward error bound; otherwise the
//! determinant is recomputed exactly on the dyadic integers underlying the
//! input doubles.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Relative forward error bound on the cofactor expansion, in units of the
/// permanent (the same expansion on absolute values). About 90 ulps.
pub const FILTER_BOUND: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of_f64(v: f64) -> Self {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// Cofactor vector of three difference rows and its permanent counterpart.
///
/// `det[d₁; d₂; d₃; x] = normal · x`; `magnitude · |x|` bounds the terms.
#[derive(Debug, Clone, Copy)]
pub struct FacetPlane {
    pub origin: [f64; 4],
    pub normal: [f64; 4],
    pub magnitude: [f64; 4],
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn perm3(m: &[[f64; 3]; 3]) -> f64 {
    let a = |r: usize, c: usize| m[r][c].abs();
    a(0, 0) * (a(1, 1) * a(2, 2) + a(1, 2) * a(2, 1))
        + a(0, 1) * (a(1, 0) * a(2, 2) + a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) + a(1, 1) * a(2, 0))
}

fn minor(d: &[[f64; 4]; 3], skip: usize) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        let mut k = 0;
        for j in 0..4 {
            if j != skip {
                m[r][k] = d[r][j];
                k += 1;
            }
        }
    }
    m
}

impl FacetPlane {
    pub fn new(v: [&[f64; 4]; 4]) -> Self {
        let origin = *v[0];
        let mut d = [[0.0; 4]; 3];
        for i in 0..3 {
            for j in 0..4 {
                d[i][j] = v[i + 1][j] - origin[j];
            }
        }
        let mut normal = [0.0; 4];
        let mut magnitude = [0.0; 4];
        for j in 0..4 {
            let m = minor(&d, j);
            let s = if j % 2 == 0 { -1.0 } else { 1.0 };
            normal[j] = s * det3(&m);
            magnitude[j] = perm3(&m);
        }
        Self { origin, normal, magnitude }
    }

    /// Filtered sign of `orient(v₀, v₁, v₂, v₃, q)`; `None` when inconclusive.
    #[inline]
    pub fn side_filtered(&self, q: &[f64; 4]) -> Option<Sign> {
        let mut det = 0.0;
        let mut perm = 0.0;
        for j in 0..4 {
            let dq = q[j] - self.origin[j];
            det += dq * self.normal[j];
            perm += dq.abs() * self.magnitude[j];
        }
        if det.abs() > FILTER_BOUND * perm {
            Some(Sign::of_f64(det))
        } else {
            None
        }
    }
}

/// Orientation of five points, exact.
pub fn orient(p: [&[f64; 4]; 5]) -> Sign {
    let plane = FacetPlane::new([p[0], p[1], p[2], p[3]]);
    match plane.side_filtered(p[4]) {
        Some(s) => s,
        None => orient_exact(p),
    }
}

/// Splits a finite double into `(mantissa, exponent)` with `x = m · 2^e`.
fn decompose(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1i64 << 52), exp - 1075) };
    (sign * m, e)
}

/// Exact orientation on arbitrary-precision integers.
pub fn orient_exact(p: [&[f64; 4]; 5]) -> Sign {
    let parts: Vec<(i64, i32)> = p.iter().flat_map(|q| q.iter().map(|&x| decompose(x))).collect();
    let emin = parts.iter().filter(|(m, _)| *m != 0).map(|(_, e)| *e).min().unwrap_or(0);
    let ints: Vec<BigInt> = parts
        .iter()
        .map(|&(m, e)| if m == 0 { BigInt::zero() } else { BigInt::from(m) << ((e - emin) as usize) })
        .collect();
    let at = |i: usize, j: usize| &ints[4 * i + j];
    let mut rows: Vec<Vec<BigInt>> = (1..5).map(|i| (0..4).map(|j| at(i, j) - at(0, j)).collect()).collect();
    let det = bareiss_det(&mut rows);
    if det.is_zero() {
        Sign::Zero
    } else if det.is_positive() {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(m: &mut [Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E: [[f64; 4]; 5] =
        [[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

    #[test]
    fn unit_simplex_is_positive() {
        let p = [&E[0], &E[1], &E[2], &E[3], &E[4]];
        assert_eq!(orient(p), Sign::Positive);
        assert_eq!(orient_exact(p), Sign::Positive);
        let swapped = [&E[1], &E[0], &E[2], &E[3], &E[4]];
        assert_eq!(orient(swapped), Sign::Negative);
    }

    #[test]
    fn coplanar_is_zero() {
        let q = [0.25, 0.25, 0.25, 0.0];
        let p = [&E[0], &E[1], &E[2], &E[3], &q];
        assert_eq!(orient(p), Sign::Zero);
    }

    #[test]
    fn near_degenerate_resolved_exactly() {
        let v = [
            [0.375, -1.125, 0.75, 0.25],
            [1.25, 0.5, -0.625, 0.875],
            [-0.75, 0.5, 1.625, -0.375],
            [0.125, 0.875, -1.25, 1.5],
        ];
        // exact midpoint of an edge: on the hyperplane
        let mid: [f64; 4] = std::array::from_fn(|j| (v[1][j] + v[2][j]) * 0.5);
        let plane = FacetPlane::new([&v[0], &v[1], &v[2], &v[3]]);
        assert!(plane.side_filtered(&mid).is_none());
        assert_eq!(orient([&v[0], &v[1], &v[2], &v[3], &mid]), Sign::Zero);
        let mut up = mid;
        up[3] = f64::from_bits(mid[3].to_bits() + 1);
        let mut down = mid;
        down[3] = f64::from_bits(mid[3].to_bits() - 1);
        let s_up = orient([&v[0], &v[1], &v[2], &v[3], &up]);
        assert_ne!(s_up, Sign::Zero);
        assert_eq!(orient([&v[0], &v[1], &v[2], &v[3], &down]), s_up.flip());
    }

    #[test]
    fn decompose_round_trips() {
        for x in [1.0, -3.5, 1e-300, 5e-324, 123456.789, -0.1] {
            let (m, e) = decompose(x);
            assert_eq!(m as f64 * 2f64.powi(e), x);
        }
    }

    fn arb_pt() -> impl Strategy<Value = [f64; 4]> {
        proptest::array::uniform4(-2.0f64..2.0)
    }

    proptest! {
        #[test]
        fn filter_agrees_with_exact(p in proptest::array::uniform5(arb_pt())) {
            let r = [&p[0], &p[1], &p[2], &p[3], &p[4]];
            prop_assert_eq!(orient(r), orient_exact(r));
        }

        #[test]
        fn alternating_under_transposition(p in proptest::array::uniform5(arb_pt()), i in 0usize..5, j in 0usize..5) {
            prop_assume!(i != j);
            let mut q = p;
            q.swap(i, j);
            let a = orient([&p[0], &p[1], &p[2], &p[3], &p[4]]);
            let b = orient([&q[0], &q[1], &q[2], &q[3], &q[4]]);
            prop_assert_eq!(a, b.flip());
        }
    }
}
