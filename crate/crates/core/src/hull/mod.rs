//! Convex hulls of finite point sets in `E⁴`.
//!
//! Randomized incremental construction with conflict lists. Every
//! orientation test is exact, so the facet complex is the true hull for any
//! input in general position; an exactly zero determinant is reported as a
//! [`HullError::DegeneratePredicateTie`] rather than perturbed away.
//!
//! Facets are stored as oriented vertex 4-tuples `[v₀, v₁, v₂, v₃]` with
//! `orient(v₀, v₁, v₂, v₃, q) < 0` for every point `q` inside the hull.

pub mod predicates;

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::HullError;
use crate::torus::Point4;
use predicates::{orient, orient_exact, FacetPlane, Sign};

const NONE: u32 = u32::MAX;
const SHUFFLE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Face numbers `(f₀, f₁, f₂, f₃)` of a 4-polytope.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FVector {
    pub f0: u64,
    pub f1: u64,
    pub f2: u64,
    pub f3: u64,
}

impl FVector {
    pub const fn new(f0: u64, f1: u64, f2: u64, f3: u64) -> Self {
        Self { f0, f1, f2, f3 }
    }

    /// Conventional f-vector of the hull of `n ≤ 4` points.
    pub fn degenerate(n: usize) -> Self {
        match n {
            0 => Self::new(0, 0, 0, 0),
            1 => Self::new(1, 0, 0, 0),
            2 => Self::new(2, 1, 0, 0),
            3 => Self::new(3, 3, 1, 0),
            4 => Self::new(4, 6, 4, 2),
            _ => panic!("no degenerate convention for {n} points"),
        }
    }
}

/// Whether the hull is a full-dimensional polytope or a convention marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullKind {
    Full,
    /// Fewer than five input points.
    Degenerate(usize),
}

/// Simplicial facet complex of a convex hull in `E⁴`.
#[derive(Debug, Clone)]
pub struct HullComplex {
    kind: HullKind,
    points: Vec<[f64; 4]>,
    vertices: Vec<u32>,
    facets: Vec<[u32; 4]>,
    /// `adjacency[f][i]` shares the ridge of `f` opposite vertex `i`.
    adjacency: Vec<[u32; 4]>,
}

impl HullComplex {
    pub fn kind(&self) -> HullKind {
        self.kind
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, HullKind::Degenerate(_))
    }

    /// Input points, in input order.
    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    /// Sorted indices of the input points that are hull vertices.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn facets(&self) -> &[[u32; 4]] {
        &self.facets
    }

    pub fn adjacency(&self) -> &[[u32; 4]] {
        &self.adjacency
    }

    /// Facets as sorted vertex tuples, sorted; independent of orientation
    /// and construction order.
    pub fn facet_sets(&self) -> Vec<[u32; 4]> {
        let mut out: Vec<[u32; 4]> = self
            .facets
            .iter()
            .map(|f| {
                let mut s = *f;
                s.sort_unstable();
                s
            })
            .collect();
        out.sort_unstable();
        out
    }
}

struct Facet {
    verts: [u32; 4],
    nbr: [u32; 4],
    plane: FacetPlane,
    outside: Vec<u32>,
    alive: bool,
    stamp: u32,
}

struct Builder<'a> {
    pts: &'a [[f64; 4]],
    facets: Vec<Facet>,
    free: Vec<u32>,
    /// Conflict facet of each unprocessed point outside the current hull.
    conflict: Vec<u32>,
    stamp: u32,
}

fn tie(what: &str, verts: &[u32], q: u32) -> HullError {
    HullError::DegeneratePredicateTie(format!("{what}: point {q} on hyperplane of {verts:?}"))
}

impl<'a> Builder<'a> {
    fn side(&self, f: u32, q: u32) -> Sign {
        let pts = self.pts;
        let facet = &self.facets[f as usize];
        match facet.plane.side_filtered(&pts[q as usize]) {
            Some(s) => s,
            None => {
                let v = facet.verts.map(|i| &pts[i as usize]);
                orient_exact([v[0], v[1], v[2], v[3], &pts[q as usize]])
            }
        }
    }

    fn alloc(&mut self, verts: [u32; 4]) -> u32 {
        let pts = self.pts;
        let v = verts.map(|i| &pts[i as usize]);
        let facet =
            Facet { verts, nbr: [NONE; 4], plane: FacetPlane::new(v), outside: Vec::new(), alive: true, stamp: 0 };
        match self.free.pop() {
            Some(id) => {
                let old = std::mem::replace(&mut self.facets[id as usize], facet);
                // keep the allocation of the outside list
                let mut buf = old.outside;
                buf.clear();
                self.facets[id as usize].outside = buf;
                id
            }
            None => {
                self.facets.push(facet);
                (self.facets.len() - 1) as u32
            }
        }
    }

    /// Assigns `q` to the first facet of `candidates` it lies strictly
    /// outside of; `q` is inside the hull if there is none.
    fn assign(&mut self, q: u32, candidates: &[u32]) -> Result<(), HullError> {
        for &f in candidates {
            match self.side(f, q) {
                Sign::Positive => {
                    self.conflict[q as usize] = f;
                    self.facets[f as usize].outside.push(q);
                    return Ok(());
                }
                Sign::Zero => return Err(tie("conflict assignment", &self.facets[f as usize].verts, q)),
                Sign::Negative => {}
            }
        }
        self.conflict[q as usize] = NONE;
        Ok(())
    }

    fn insert(&mut self, p: u32, start: u32) -> Result<(), HullError> {
        self.stamp = self.stamp.wrapping_add(1);
        let stamp = self.stamp;
        // visible region by flood fill from the conflict facet
        let mut visible = vec![start];
        self.facets[start as usize].stamp = stamp;
        let mut horizon: Vec<(u32, usize)> = Vec::new();
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for i in 0..4 {
                let g = self.facets[f as usize].nbr[i];
                if self.facets[g as usize].stamp == stamp {
                    continue;
                }
                match self.side(g, p) {
                    Sign::Positive => {
                        self.facets[g as usize].stamp = stamp;
                        visible.push(g);
                    }
                    Sign::Negative => horizon.push((f, i)),
                    Sign::Zero => return Err(tie("visibility", &self.facets[g as usize].verts, p)),
                }
            }
        }

        let mut created = Vec::with_capacity(horizon.len());
        let mut origin = Vec::with_capacity(horizon.len());
        let mut pending: HashMap<(u32, u32), (u32, usize)> = HashMap::with_capacity(horizon.len() * 2);
        for &(f, i) in &horizon {
            let old = &self.facets[f as usize];
            let outer = old.nbr[i];
            let mut verts = old.verts;
            verts[i] = p;
            let g = self.alloc(verts);
            self.facets[g as usize].nbr[i] = outer;
            let slot = self.facets[outer as usize].nbr.iter().position(|&x| x == f).expect("ridge link");
            self.facets[outer as usize].nbr[slot] = g;
            for j in 0..4 {
                if j == i {
                    continue;
                }
                let mut rest = [0u32; 2];
                let mut r = 0;
                for (m, &v) in verts.iter().enumerate() {
                    if m != i && m != j {
                        rest[r] = v;
                        r += 1;
                    }
                }
                let key = (rest[0].min(rest[1]), rest[0].max(rest[1]));
                match pending.remove(&key) {
                    Some((h, hj)) => {
                        self.facets[g as usize].nbr[j] = h;
                        self.facets[h as usize].nbr[hj] = g;
                    }
                    None => {
                        pending.insert(key, (g, j));
                    }
                }
            }
            created.push(g);
            origin.push(f);
        }
        debug_assert!(pending.is_empty(), "unmatched ridges around the horizon");

        // orphaned conflicts go to the new facets, those born of their old
        // conflict facet first
        let mut orphans: Vec<(u32, u32)> = Vec::new();
        for &f in &visible {
            let facet = &mut self.facets[f as usize];
            facet.alive = false;
            for q in facet.outside.drain(..) {
                if q != p {
                    orphans.push((q, f));
                }
            }
        }
        let mut order = Vec::with_capacity(created.len());
        for (q, f) in orphans {
            order.clear();
            order.extend(created.iter().zip(&origin).filter(|(_, &o)| o == f).map(|(&g, _)| g));
            order.extend(created.iter().zip(&origin).filter(|(_, &o)| o != f).map(|(&g, _)| g));
            let cand = std::mem::take(&mut order);
            let res = self.assign(q, &cand);
            order = cand;
            res?;
        }
        for &f in &visible {
            self.free.push(f);
        }
        Ok(())
    }
}

fn sub(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|j| a[j] - b[j])
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared norm of the component of `d` orthogonal to the orthonormal `basis`.
fn residual_sq(basis: &[[f64; 4]], d: &[f64; 4]) -> ([f64; 4], f64) {
    let mut r = *d;
    for e in basis {
        let c = dot(&r, e);
        for j in 0..4 {
            r[j] -= c * e[j];
        }
    }
    (r, dot(&r, &r))
}

/// Five affinely independent points, chosen greedily for volume and then
/// certified by the exact predicate.
fn initial_simplex(pts: &[[f64; 4]], order: &[u32]) -> Result<[u32; 5], HullError> {
    let o = order[0];
    let mut chosen = vec![o];
    let mut basis: Vec<[f64; 4]> = Vec::new();
    for _ in 0..3 {
        let mut best = (0.0, NONE, [0.0; 4]);
        for &q in order {
            let (r, n2) = residual_sq(&basis, &sub(&pts[q as usize], &pts[o as usize]));
            if n2 > best.0 {
                best = (n2, q, r);
            }
        }
        if best.1 == NONE {
            return Err(HullError::DegeneratePredicateTie("input points do not span E⁴".into()));
        }
        let norm = best.0.sqrt();
        basis.push(best.2.map(|x| x / norm));
        chosen.push(best.1);
    }
    let v = [chosen[0], chosen[1], chosen[2], chosen[3]].map(|i| &pts[i as usize]);
    let plane = FacetPlane::new(v);
    let mut ranked: Vec<(f64, u32)> = order
        .iter()
        .map(|&q| {
            let d = sub(&pts[q as usize], v[0]);
            (dot(&d, &plane.normal).abs(), q)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, q) in &ranked {
        if orient([v[0], v[1], v[2], v[3], &pts[q as usize]]) != Sign::Zero {
            return Ok([chosen[0], chosen[1], chosen[2], chosen[3], q]);
        }
    }
    Err(HullError::DegeneratePredicateTie("input points lie in a hyperplane".into()))
}

/// Convex hull of `points`.
///
/// Fewer than five points yield a degenerate marker complex. Five or more
/// points must span `E⁴`.
pub fn build_hull(points: &[Point4]) -> Result<HullComplex, HullError> {
    let pts: Vec<[f64; 4]> = points.iter().map(|p| p.0).collect();
    build_hull_raw(pts)
}

/// As [`build_hull`], on raw coordinates.
pub fn build_hull_raw(pts: Vec<[f64; 4]>) -> Result<HullComplex, HullError> {
    let n = pts.len();
    if n < 5 {
        return Ok(HullComplex {
            kind: HullKind::Degenerate(n),
            vertices: (0..n as u32).collect(),
            points: pts,
            facets: Vec::new(),
            adjacency: Vec::new(),
        });
    }
    assert!(n < NONE as usize, "too many points");
    if pts.iter().flatten().any(|x| !x.is_finite()) {
        return Err(HullError::DegeneratePredicateTie("non-finite coordinate".into()));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED ^ n as u64));
    let simplex = initial_simplex(&pts, &order)?;

    let mut b =
        Builder { pts: &pts, facets: Vec::with_capacity(16 * n), free: Vec::new(), conflict: vec![NONE; n], stamp: 0 };
    // simplex facets: drop vertex k, orient so that vertex k is inside
    for k in 0..5 {
        let mut verts = [0u32; 4];
        let mut m = 0;
        for (j, &v) in simplex.iter().enumerate() {
            if j != k {
                verts[m] = v;
                m += 1;
            }
        }
        let w = verts.map(|i| &pts[i as usize]);
        if orient([w[0], w[1], w[2], w[3], &pts[simplex[k] as usize]]) == Sign::Positive {
            verts.swap(0, 1);
        }
        b.alloc(verts);
    }
    // facets are 0..5; facet k omits simplex vertex k
    for f in 0..5u32 {
        for i in 0..4 {
            let v = b.facets[f as usize].verts[i];
            let k = simplex.iter().position(|&s| s == v).unwrap() as u32;
            b.facets[f as usize].nbr[i] = k;
        }
    }
    let init: Vec<u32> = (0..5).collect();
    let in_simplex: HashSet<u32> = simplex.iter().copied().collect();
    for &q in &order {
        if !in_simplex.contains(&q) {
            b.assign(q, &init)?;
        }
    }
    for &q in &order {
        let f = b.conflict[q as usize];
        if f == NONE {
            continue;
        }
        b.conflict[q as usize] = NONE;
        b.insert(q, f)?;
    }

    // compact
    let mut id = vec![NONE; b.facets.len()];
    let mut facets = Vec::new();
    for (i, f) in b.facets.iter().enumerate() {
        if f.alive {
            id[i] = facets.len() as u32;
            facets.push(f.verts);
        }
    }
    let adjacency = b.facets.iter().filter(|f| f.alive).map(|f| f.nbr.map(|g| id[g as usize])).collect();
    let mut vertices: Vec<u32> = facets.iter().flatten().copied().collect();
    vertices.sort_unstable();
    vertices.dedup();
    Ok(HullComplex { kind: HullKind::Full, points: pts, vertices, facets, adjacency })
}

/// Face numbers of a hull complex, with the conventions for `n ≤ 4` points.
pub fn f_vector(h: &HullComplex) -> FVector {
    match h.kind {
        HullKind::Degenerate(n) => FVector::degenerate(n),
        HullKind::Full => {
            let mut edges = HashSet::with_capacity(3 * h.facets.len());
            for f in &h.facets {
                for i in 0..4 {
                    for j in i + 1..4 {
                        edges.insert((f[i].min(f[j]), f[i].max(f[j])));
                    }
                }
            }
            let mut ridges = HashSet::with_capacity(2 * h.facets.len());
            for f in &h.facets {
                let mut s = *f;
                s.sort_unstable();
                for i in 0..4 {
                    let mut r = [0u32; 3];
                    let mut m = 0;
                    for (j, &v) in s.iter().enumerate() {
                        if j != i {
                            r[m] = v;
                            m += 1;
                        }
                    }
                    ridges.insert(r);
                }
            }
            FVector::new(h.vertices.len() as u64, edges.len() as u64, ridges.len() as u64, h.facets.len() as u64)
        }
    }
}

/// Mean vertex valence `2f₁/f₀`, zero for the empty polytope.
pub fn mean_valence(f: &FVector) -> f64 {
    if f.f0 == 0 {
        0.0
    } else {
        2.0 * f.f1 as f64 / f.f0 as f64
    }
}

/// Euler and Dehn–Sommerville residuals plus structural checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DehnSommervilleReport {
    /// `f₀ − f₁ + f₂ − f₃`
    pub euler_residual: i64,
    /// `f₁ − f₀ − f₃`
    pub r1_residual: i64,
    /// `f₂ − 2f₃`
    pub r2_residual: i64,
    pub degenerate: bool,
    /// Ridges not shared by exactly two mutually linked facets.
    pub ridge_defects: u64,
    /// Facet pairs across a ridge that fail the local convexity test.
    pub orientation_defects: u64,
}

impl DehnSommervilleReport {
    /// All residuals and defect counts vanish.
    pub fn is_clean(&self) -> bool {
        self.euler_residual == 0
            && self.r1_residual == 0
            && self.r2_residual == 0
            && self.ridge_defects == 0
            && self.orientation_defects == 0
    }
}

/// Checks `f` against the Dehn–Sommerville relations and re-verifies the
/// ridge pairing and orientation of `h`.
///
/// Local convexity at every ridge of a closed, consistently oriented complex
/// implies global convexity, so the orientation check is linear in `f₃`.
pub fn validate(h: &HullComplex, f: &FVector) -> DehnSommervilleReport {
    let (f0, f1, f2, f3) = (f.f0 as i64, f.f1 as i64, f.f2 as i64, f.f3 as i64);
    let mut ridge_defects = 0;
    let mut orientation_defects = 0;
    if h.kind == HullKind::Full {
        let mut ridge_count: HashMap<[u32; 3], u32> = HashMap::with_capacity(2 * h.facets.len());
        for fv in &h.facets {
            let mut s = *fv;
            s.sort_unstable();
            for i in 0..4 {
                let mut r = [0u32; 3];
                let mut m = 0;
                for (j, &v) in s.iter().enumerate() {
                    if j != i {
                        r[m] = v;
                        m += 1;
                    }
                }
                *ridge_count.entry(r).or_default() += 1;
            }
        }
        ridge_defects += ridge_count.values().filter(|&&c| c != 2).count() as u64;
        for (fi, fv) in h.facets.iter().enumerate() {
            let v = fv.map(|i| &h.points[i as usize]);
            for i in 0..4 {
                let g = h.adjacency[fi][i];
                let Some(gv) = h.facets.get(g as usize) else {
                    ridge_defects += 1;
                    continue;
                };
                let shared = fv.iter().enumerate().all(|(j, x)| j == i || gv.contains(x));
                let back = h.adjacency[g as usize].contains(&(fi as u32));
                if !shared || !back {
                    ridge_defects += 1;
                    continue;
                }
                let apex = gv.iter().find(|x| !fv.contains(x)).copied().unwrap_or(fv[i]);
                if orient([v[0], v[1], v[2], v[3], &h.points[apex as usize]]) != Sign::Negative {
                    orientation_defects += 1;
                }
            }
        }
    }
    DehnSommervilleReport {
        euler_residual: f0 - f1 + f2 - f3,
        r1_residual: f1 - f0 - f3,
        r2_residual: f2 - 2 * f3,
        degenerate: h.is_degenerate(),
        ridge_defects,
        orientation_defects,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{embed, TorusPoint};

    fn torus(coords: &[(f64, f64)]) -> Vec<Point4> {
        coords.iter().map(|&(p, q)| embed(TorusPoint::new(p, q))).collect()
    }

    #[test]
    fn simplex_on_torus() {
        let pts = torus(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (1.0, 1.0), (-1.0, -2.0)]);
        let h = build_hull(&pts).unwrap();
        assert_eq!(h.facets().len(), 5);
        let f = f_vector(&h);
        assert_eq!(f, FVector::new(5, 10, 10, 5));
        assert_eq!(mean_valence(&f), 4.0);
        let r = validate(&h, &f);
        assert!(r.is_clean() && !r.degenerate, "{r:?}");
    }

    #[test]
    fn rectangle_quintuple_is_flat() {
        // product rectangles embed as parallelograms
        let pts = torus(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0), (1.0, 1.0)]);
        assert!(matches!(build_hull(&pts), Err(HullError::DegeneratePredicateTie(_))));
    }

    #[test]
    fn degenerate_conventions() {
        for (n, expect) in [
            (0, FVector::new(0, 0, 0, 0)),
            (1, FVector::new(1, 0, 0, 0)),
            (2, FVector::new(2, 1, 0, 0)),
            (3, FVector::new(3, 3, 1, 0)),
            (4, FVector::new(4, 6, 4, 2)),
        ] {
            let pts = torus(&[(0.1, 0.2), (1.3, -0.4), (-2.0, 2.5), (0.7, 3.0)][..n]);
            let h = build_hull(&pts).unwrap();
            assert_eq!(h.kind(), HullKind::Degenerate(n));
            let f = f_vector(&h);
            assert_eq!(f, expect);
            let r = validate(&h, &f);
            assert!(r.degenerate);
        }
        let four = validate(
            &build_hull(&torus(&[(0.1, 0.2), (1.3, -0.4), (-2.0, 2.5), (0.7, 3.0)])).unwrap(),
            &FVector::degenerate(4),
        );
        assert_eq!(four.euler_residual, 0);
        assert_eq!(mean_valence(&FVector::default()), 0.0);
    }

    #[test]
    fn interior_points_are_not_vertices() {
        let mut pts: Vec<[f64; 4]> = vec![[0.0; 4]];
        for j in 0..4 {
            let mut e = [0.0; 4];
            e[j] = 1.0;
            pts.push(e);
        }
        pts.push([0.1, 0.2, 0.1, 0.05]);
        pts.push([2.0, 2.0, 2.0, 2.0]);
        let h = build_hull_raw(pts).unwrap();
        assert_eq!(h.vertices(), &[0, 1, 2, 3, 4, 6]);
        let f = f_vector(&h);
        assert!(validate(&h, &f).is_clean());
    }

    #[test]
    fn duplicate_point_is_a_tie() {
        let mut pts = torus(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (1.0, 1.0), (-1.0, -2.0), (0.5, 2.5)]);
        pts.push(pts[5]);
        assert!(matches!(build_hull(&pts), Err(HullError::DegeneratePredicateTie(_))));
    }

    #[test]
    fn valence_identity_on_random_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        let coords: Vec<(f64, f64)> =
            (0..400).map(|_| (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
        let h = build_hull(&torus(&coords)).unwrap();
        let f = f_vector(&h);
        assert_eq!(f.f0, 400);
        assert!(validate(&h, &f).is_clean());
        let lhs = mean_valence(&f);
        let rhs = 2.0 * f.f3 as f64 / f.f0 as f64 + 2.0;
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
