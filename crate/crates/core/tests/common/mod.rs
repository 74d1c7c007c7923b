//! Oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments)]

use clifford_hull::torus::{embed, TorusPoint};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn det_sign(rows: Vec<Vec<BigRational>>) -> i32 {
    let mut m = rows;
    let n = m.len();
    let mut sign = 1;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else { return 0 };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let factor = &m[i][k] / &m[k][k];
            for j in k..n {
                let v = &m[k][j] * &factor;
                m[i][j] -= v;
            }
        }
    }
    let mut det = BigRational::from_integer(BigInt::from(sign));
    for k in 0..n {
        det *= &m[k][k];
    }
    if det.is_zero() {
        0
    } else if det.is_positive() {
        1
    } else {
        -1
    }
}

pub fn det4(m: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for c in 0..4 {
        let minor: Vec<Vec<f64>> =
            m[1..].iter().map(|row| (0..4).filter(|&j| j != c).map(|j| row[j]).collect()).collect();
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let s = if c % 2 == 0 { 1.0 } else { -1.0 };
        total += s * m[0][c] * d3;
    }
    total
}

/// All quadruples with every other point strictly on one side.
pub fn brute_force(pts: &[[f64; 4]]) -> Vec<[u32; 4]> {
    let q: Vec<Vec<BigRational>> =
        pts.iter().map(|p| p.iter().map(|&x| BigRational::from_float(x).unwrap()).collect()).collect();
    let n = pts.len();
    let side = |f: [usize; 4], r: usize| {
        // plain float determinant, trusted only far from zero
        let d: Vec<Vec<f64>> =
            [f[1], f[2], f[3], r].iter().map(|&i| (0..4).map(|j| pts[i][j] - pts[f[0]][j]).collect()).collect();
        let approx = det4(&d);
        if approx.abs() > 1e-6 {
            return if approx > 0.0 { 1 } else { -1 };
        }
        let rows = [f[1], f[2], f[3], r].iter().map(|&i| (0..4).map(|j| &q[i][j] - &q[f[0]][j]).collect()).collect();
        det_sign(rows)
    };
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let f = [a, b, c, d];
                    let mut seen = 0;
                    let mut ok = true;
                    for r in (0..n).filter(|r| !f.contains(r)) {
                        let s = side(f, r);
                        if s == 0 || (seen != 0 && s != seen) {
                            ok = false;
                            break;
                        }
                        seen = s;
                    }
                    if ok {
                        out.push([a as u32, b as u32, c as u32, d as u32]);
                    }
                }
            }
        }
    }
    out
}

pub fn torus_points(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = TorusPoint::new(rng.random_range(-3.2..3.2), rng.random_range(-3.2..3.2));
            embed(t).0
        })
        .collect()
}

pub fn ball_points(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect()
}

pub fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫∫ α²β²` over `{α, β < 1/100, αβ < τ}` by nested quadrature, the outer
/// integral split where the inner upper limit stops being `1/100`.
pub fn nested_alpha_beta(tau: f64) -> f64 {
    let c: f64 = 0.01;
    let inner = |alpha: f64| {
        let top = c.min(tau / alpha);
        alpha * alpha * adaptive(|b| b * b, 0.0, top, 1e-14 * top.powi(3))
    };
    let knee = tau / c;
    let scale = tau.powi(3);
    adaptive(inner, 0.0, knee, 1e-14 * scale) + adaptive(inner, knee, c, 1e-14 * scale)
}
