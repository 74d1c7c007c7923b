//! Analytic geometry of the Clifford torus `T² ⊂ E⁴`.
//!
//! A torus point `(φ, ψ)` embeds as `(cos φ, sin φ, cos ψ, sin ψ)`, so the
//! whole torus lies on the 3-sphere of radius √2 and carries the flat metric
//! of `(−π, π]²` with total area `4π²`.
//!
//! A hyperplane `a₁ξ₁ + a₂ξ₂ + b₁ξ₃ + b₂ξ₄ = c` with `c ≥ 0` cuts the torus
//! along `a′cos(φ−φ₀) + b′cos(ψ−ψ₀) = c`, where `a′ = |(a₁, a₂)|`,
//! `b′ = |(b₁, b₂)|` and `φ₀, ψ₀` are the phases of `(a₁, a₂)` and `(b₁, b₂)`.
//! The half-angle identity turns the smaller side into the cap
//!
//! ```text
//! a² sin²((φ−φ₀)/2) + b² sin²((ψ−ψ₀)/2) ≤ 1,
//! a = √(2a′/(a′+b′−c)),  b = √(2b′/(a′+b′−c)).
//! ```

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

/// Total flat area of the torus.
pub const TORUS_AREA: f64 = 4.0 * PI * PI;

/// Area of a half torus; the largest possible cap.
pub const HALF_TORUS_AREA: f64 = 2.0 * PI * PI;

/// Relative tolerance of [`cap_measure`].
pub const CAP_MEASURE_RTOL: f64 = 1e-10;

/// Scale-free affine-independence threshold for [`hyperplane_through`].
pub const AFFINE_RANK_TOL: f64 = 1e-10;

/// Offsets at or below this (for a unit normal) are snapped to `c = 0`.
pub const TIE_OFFSET_TOL: f64 = 1e-12;

/// Slack on the cap inequality so boundary points test as inside.
pub const CAP_BOUNDARY_SLACK: f64 = 1e-12;

/// Reduces an angle to `(−π, π]`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Intrinsic torus coordinates, both angles in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    phi: f64,
    psi: f64,
}

impl TorusPoint {
    pub fn new(phi: f64, psi: f64) -> Self {
        Self { phi: normalize_angle(phi), psi: normalize_angle(psi) }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn embed(&self) -> Point4 {
        embed(*self)
    }
}

/// A point of `E⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point4(pub [f64; 4]);

impl Point4 {
    pub fn coords(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn dot(&self, v: &[f64; 4]) -> f64 {
        self.0.iter().zip(v).map(|(x, y)| x * y).sum()
    }
}

/// `(φ, ψ) ↦ (cos φ, sin φ, cos ψ, sin ψ)`.
pub fn embed(p: TorusPoint) -> Point4 {
    let (s1, c1) = p.phi.sin_cos();
    let (s2, c2) = p.psi.sin_cos();
    Point4([c1, s1, c2, s2])
}

/// A hyperplane `a₁ξ₁ + a₂ξ₂ + b₁ξ₃ + b₂ξ₄ = c` with unit normal and `c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    c: f64,
}

impl Hyperplane {
    /// Normalizes to a unit normal and `c ≥ 0`. When `c` is zero (within
    /// [`TIE_OFFSET_TOL`]) the first non-negligible normal component is made
    /// positive, so the choice of side is deterministic.
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64, c: f64) -> Result<Self, GeometryError> {
        let norm = (a1 * a1 + a2 * a2 + b1 * b1 + b2 * b2).sqrt();
        if !(norm > 0.0) || !norm.is_finite() || !c.is_finite() {
            return Err(GeometryError::DegenerateNormal);
        }
        let mut n = [a1 / norm, a2 / norm, b1 / norm, b2 / norm];
        let mut c = c / norm;
        if c.abs() <= TIE_OFFSET_TOL {
            c = 0.0;
            let lead = n.iter().copied().find(|x| x.abs() > TIE_OFFSET_TOL).unwrap_or(1.0);
            if lead < 0.0 {
                n.iter_mut().for_each(|x| *x = -*x);
            }
        } else if c < 0.0 {
            c = -c;
            n.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(Self { a1: n[0], a2: n[1], b1: n[2], b2: n[3], c })
    }

    pub fn normal(&self) -> [f64; 4] {
        [self.a1, self.a2, self.b1, self.b2]
    }

    pub fn offset(&self) -> f64 {
        self.c
    }

    /// `normal · ξ − c`.
    pub fn eval(&self, p: &Point4) -> f64 {
        p.dot(&self.normal()) - self.c
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cofactor vector `n` of three row vectors: `det[d₁; d₂; d₃; x] = n · x`.
pub(crate) fn cofactor_normal(d: &[[f64; 4]; 3]) -> [f64; 4] {
    let minor = |skip: usize| {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in d.iter().enumerate() {
            let mut k = 0;
            for (j, v) in row.iter().enumerate() {
                if j != skip {
                    m[r][k] = *v;
                    k += 1;
                }
            }
        }
        det3(m)
    };
    [-minor(0), minor(1), -minor(2), minor(3)]
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The hyperplane through four embedded torus points.
pub fn hyperplane_through(pts: [TorusPoint; 4]) -> Result<Hyperplane, GeometryError> {
    let e = pts.map(embed);
    let mut d = [[0.0; 4]; 3];
    for i in 0..3 {
        for j in 0..4 {
            d[i][j] = e[i + 1].0[j] - e[0].0[j];
        }
    }
    let n = cofactor_normal(&d);
    let volume = norm4(&n);
    let scale = d.iter().map(norm4).product::<f64>();
    if !(volume > AFFINE_RANK_TOL * scale) {
        return Err(GeometryError::AffinelyDependent);
    }
    let unit = n.map(|x| x / volume);
    let c = e.iter().map(|p| p.dot(&unit)).sum::<f64>() / 4.0;
    Hyperplane::new(unit[0], unit[1], unit[2], unit[3], c)
}

/// Cap `a² sin²((φ−φ₀)/2) + b² sin²((ψ−ψ₀)/2) ≤ 1` with `a² + b² ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub a: f64,
    pub b: f64,
    pub phi0: f64,
    pub psi0: f64,
}

impl Cap {
    /// Validated constructor; angles are normalized.
    pub fn new(a: f64, b: f64, phi0: f64, psi0: f64) -> Result<Self, GeometryError> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(GeometryError::InvalidCap(format!("a = {a}, b = {b} must be finite and >= 0")));
        }
        if a * a + b * b < 2.0 - 1e-9 {
            return Err(GeometryError::InvalidCap(format!(
                "a^2 + b^2 = {} < 2: the region would exceed half the torus",
                a * a + b * b
            )));
        }
        Ok(Self { a, b, phi0: normalize_angle(phi0), psi0: normalize_angle(psi0) })
    }

    /// Left-hand side of the cap inequality at `p`.
    pub fn level(&self, p: TorusPoint) -> f64 {
        let s = ((p.phi - self.phi0) * 0.5).sin();
        let t = ((p.psi - self.psi0) * 0.5).sin();
        self.a * self.a * s * s + self.b * self.b * t * t
    }
}

fn phase(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        0.0
    } else {
        normalize_angle(y.atan2(x))
    }
}

/// The smaller-area cap cut off by a normalized hyperplane.
pub fn cap_from_hyperplane(h: &Hyperplane) -> Result<Cap, GeometryError> {
    let ap = h.a1.hypot(h.a2);
    let bp = h.b1.hypot(h.b2);
    let denom = ap + bp - h.c;
    if !(denom > 0.0) {
        return Err(GeometryError::EmptyBoundary { c: h.c, limit: ap + bp });
    }
    Ok(Cap {
        a: (2.0 * ap / denom).sqrt(),
        b: (2.0 * bp / denom).sqrt(),
        phi0: phase(h.a1, h.a2),
        psi0: phase(h.b1, h.b2),
    })
}

/// The cap whose boundary passes through the four given points.
pub fn cap_from_points(pts: [TorusPoint; 4]) -> Result<Cap, GeometryError> {
    cap_from_hyperplane(&hyperplane_through(pts)?)
}

pub fn cap_contains(cap: &Cap, p: TorusPoint) -> bool {
    cap.level(p) <= 1.0 + CAP_BOUNDARY_SLACK
}

/// Half-width `w` of the strip `|x| ≤ w` cut out by `k² sin²(x/2) ≤ 1`.
fn strip_half_width(k: f64) -> f64 {
    if k <= 1.0 {
        PI
    } else {
        2.0 * (1.0 / k).asin()
    }
}

/// Flat area of a cap.
///
/// By the four-fold symmetry the area is `4 ∫₀^φmax w(φ) dφ`, where
/// `w(φ) = 2 asin(min(1, √(1 − a² sin²(φ/2)) / b))` is the ψ half-extent.
/// For `a > 1` the substitution `sin(φ/2) = sin(u)/a` removes the square-root
/// endpoint behaviour; the kink where `w` saturates at `π` is a breakpoint.
pub fn cap_measure(cap: &Cap) -> f64 {
    let (a, b) = (cap.a, cap.b);
    if b == 0.0 {
        return 2.0 * TAU * strip_half_width(a);
    }
    if a == 0.0 {
        return 2.0 * TAU * strip_half_width(b);
    }
    let tol = Tolerance::relative(CAP_MEASURE_RTOL);
    let half_extent = |r: f64| 2.0 * (r / b).min(1.0).asin();
    let integral = if a > 1.0 {
        let mut pts = vec![0.0];
        if b < 1.0 {
            pts.push(b.acos());
        }
        pts.push(PI / 2.0);
        let a2 = a * a;
        integrate_with_breakpoints(
            |u: f64| {
                let (s, c) = u.sin_cos();
                half_extent(c) * 2.0 * c / (a2 - s * s).sqrt()
            },
            &pts,
            tol,
        )
    } else {
        let mut pts = vec![0.0];
        if b < 1.0 {
            let s = (1.0 - b * b).sqrt() / a;
            if s < 1.0 {
                pts.push(2.0 * s.asin());
            }
        }
        pts.push(PI);
        integrate_with_breakpoints(
            |phi: f64| {
                let s = (phi * 0.5).sin();
                half_extent((1.0 - a * a * s * s).max(0.0).sqrt())
            },
            &pts,
            tol,
        )
    };
    (4.0 * integral.value).min(HALF_TORUS_AREA)
}

/// `(a + 1)(b + 1)·G`; bounded within `[8, 16π²]` for every cap.
pub fn cap_bound_statistic(cap: &Cap) -> f64 {
    (cap.a + 1.0) * (cap.b + 1.0) * cap_measure(cap)
}

/// Lower and upper constants of the cap bound statistic.
pub const CAP_BOUND_LOW: f64 = 8.0;
pub const CAP_BOUND_HIGH: f64 = 16.0 * PI * PI;
