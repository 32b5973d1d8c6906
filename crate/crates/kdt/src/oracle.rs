//! Independent brute-force references used by tests and `validate --oracle`.
//!
//! Everything here is deliberately separate from the production code paths:
//! predicate signs are re-derived from scratch with a naive floating-point
//! filter backed by arbitrary-precision rational arithmetic, and the
//! Delaunay construction is an exhaustive O(n⁴) search over vertex triples.
//! The only shared code is the `Point` container itself.

use crate::error::{Error, Result};
use crate::geometry::{Point, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

/// Brute force is O(n⁴); anything larger than this is refused.
pub const ORACLE_MAX_POINTS: usize = 128;

// Static forward-error bounds for the naive determinant evaluations, from
// Shewchuk's filter derivation (ε = 2⁻⁵³). When |det| exceeds the bound the
// floating-point sign is certain; otherwise we fall back to rationals.
const EPS: f64 = f64::EPSILON / 2.0;
const ORIENT_BOUND: f64 = (3.0 + 16.0 * EPS) * EPS;
const INCIRCLE_BOUND: f64 = (10.0 + 96.0 * EPS) * EPS;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn sign_of_rational(r: &BigRational) -> Sign {
    if r.is_zero() {
        Sign::Zero
    } else if r.numer() > &BigInt::from(0) {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// Exact sign of the 2×2 orientation determinant
/// `| ax−cx  ay−cy ; bx−cx  by−cy |`.
pub fn exact_orient2d(a: Point, b: Point, c: Point) -> Sign {
    let detleft = (a.x - c.x) * (b.y - c.y);
    let detright = (a.y - c.y) * (b.x - c.x);
    let det = detleft - detright;
    let bound = ORIENT_BOUND * (detleft.abs() + detright.abs());
    if det > bound {
        return Sign::Positive;
    }
    if det < -bound {
        return Sign::Negative;
    }
    let acx = rat(a.x) - rat(c.x);
    let acy = rat(a.y) - rat(c.y);
    let bcx = rat(b.x) - rat(c.x);
    let bcy = rat(b.y) - rat(c.y);
    sign_of_rational(&(acx * bcy - acy * bcx))
}

/// Exact sign of the lifted 3×3 in-circle determinant; positive means `p`
/// is strictly inside the circle through `a`, `b`, `c` when the triple is
/// counter-clockwise.
pub fn exact_in_circle(a: Point, b: Point, c: Point, p: Point) -> Sign {
    let adx = a.x - p.x;
    let ady = a.y - p.y;
    let bdx = b.x - p.x;
    let bdy = b.y - p.y;
    let cdx = c.x - p.x;
    let cdy = c.y - p.y;

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;
    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;
    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    let permanent = alift * (bdxcdy.abs() + cdxbdy.abs())
        + blift * (cdxady.abs() + adxcdy.abs())
        + clift * (adxbdy.abs() + bdxady.abs());
    let bound = INCIRCLE_BOUND * permanent;
    if det > bound {
        return Sign::Positive;
    }
    if det < -bound {
        return Sign::Negative;
    }

    let adx = rat(a.x) - rat(p.x);
    let ady = rat(a.y) - rat(p.y);
    let bdx = rat(b.x) - rat(p.x);
    let bdy = rat(b.y) - rat(p.y);
    let cdx = rat(c.x) - rat(p.x);
    let cdy = rat(c.y) - rat(p.y);
    let alift = &adx * &adx + &ady * &ady;
    let blift = &bdx * &bdx + &bdy * &bdy;
    let clift = &cdx * &cdx + &cdy * &cdy;
    let det = alift * (&bdx * &cdy - &cdx * &bdy) + blift * (&cdx * &ady - &adx * &cdy)
        + clift * (&adx * &bdy - &bdx * &ady);
    sign_of_rational(&det)
}

/// The triangles of a brute-force Delaunay construction, stored as
/// ascending vertex-index triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTriangleSet {
    triples: BTreeSet<[usize; 3]>,
}

impl OracleTriangleSet {
    pub fn triples(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.triples.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, mut t: [usize; 3]) -> bool {
        t.sort_unstable();
        self.triples.contains(&t)
    }

    /// The undirected edge set induced by the triangles, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for t in &self.triples {
            edges.insert((t[0], t[1]));
            edges.insert((t[0], t[2]));
            edges.insert((t[1], t[2]));
        }
        edges.into_iter().collect()
    }
}

/// Exhaustive Delaunay construction: every triple whose circumcircle
/// strictly contains no other point, evaluated with exact arithmetic.
///
/// Degenerate configurations (a cocircular quad that makes the
/// triangulation ambiguous, or collinear points on the hull) are reported
/// as errors rather than silently resolved; at that point callers either
/// skip the instance or compare through canonicalized edge sets instead.
pub fn brute_force_delaunay(points: &[Point]) -> Result<OracleTriangleSet> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { need: 3, got: n });
    }
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge {
            cap: ORACLE_MAX_POINTS,
            got: n,
        });
    }
    for p in points {
        p.check_finite()?;
    }

    check_hull_degeneracy(points)?;

    let mut triples = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = match exact_orient2d(points[i], points[j], points[k]) {
                    Sign::Zero => continue,
                    Sign::Positive => (points[i], points[j], points[k]),
                    Sign::Negative => (points[i], points[k], points[j]),
                };
                let mut empty = true;
                let mut cocircular = None;
                for (m, &q) in points.iter().enumerate() {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    match exact_in_circle(a, b, c, q) {
                        Sign::Positive => {
                            empty = false;
                            break;
                        }
                        Sign::Zero => cocircular = Some(m),
                        Sign::Negative => {}
                    }
                }
                if empty {
                    if let Some(m) = cocircular {
                        return Err(Error::DegenerateConfiguration(format!(
                            "points {i}, {j}, {k}, {m} are cocircular"
                        )));
                    }
                    triples.insert([i, j, k]);
                }
            }
        }
    }
    Ok(OracleTriangleSet { triples })
}

/// Strict convex hull indices in counter-clockwise order (exact signs).
pub fn convex_hull_indices(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i]
            .x
            .partial_cmp(&points[j].x)
            .unwrap()
            .then(points[i].y.partial_cmp(&points[j].y).unwrap())
    });
    let build = |order: &[usize]| {
        let mut chain: Vec<usize> = Vec::new();
        for &i in order {
            while chain.len() >= 2 {
                let a = chain[chain.len() - 2];
                let b = chain[chain.len() - 1];
                if exact_orient2d(points[a], points[b], points[i]) != Sign::Positive {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(i);
        }
        chain
    };
    let lower = build(&idx);
    let rev: Vec<usize> = idx.iter().rev().copied().collect();
    let upper = build(&rev);
    let mut hull = lower;
    hull.pop();
    hull.extend(upper.iter().take(upper.len().saturating_sub(1)));
    hull
}

fn check_hull_degeneracy(points: &[Point]) -> Result<()> {
    let hull = convex_hull_indices(points);
    if hull.len() < 3 {
        return Err(Error::CollinearInput);
    }
    // A point on the open interior of a hull edge means collinear points
    // on the hull boundary.
    for w in 0..hull.len() {
        let a = points[hull[w]];
        let b = points[hull[(w + 1) % hull.len()]];
        for (m, &q) in points.iter().enumerate() {
            if m == hull[w] || m == hull[(w + 1) % hull.len()] {
                continue;
            }
            if exact_orient2d(a, b, q) == Sign::Zero && within_open_box(a, b, q) {
                return Err(Error::DegenerateConfiguration(format!(
                    "point {m} lies on the hull edge between {} and {}",
                    hull[w],
                    hull[(w + 1) % hull.len()]
                )));
            }
        }
    }
    Ok(())
}

fn within_open_box(a: Point, b: Point, q: Point) -> bool {
    if a.x != b.x {
        q.x > a.x.min(b.x) && q.x < a.x.max(b.x)
    } else {
        q.y > a.y.min(b.y) && q.y < a.y.max(b.y)
    }
}

/// Exact area of the convex hull, for the tiling cross-check.
pub fn hull_area_rational(points: &[Point]) -> BigRational {
    let hull = convex_hull_indices(points);
    polygon_area_rational(points, &hull)
}

fn polygon_area_rational(points: &[Point], cycle: &[usize]) -> BigRational {
    let mut twice: BigRational = BigRational::zero();
    for w in 0..cycle.len() {
        let p = points[cycle[w]];
        let q = points[cycle[(w + 1) % cycle.len()]];
        twice += rat(p.x) * rat(q.y) - rat(q.x) * rat(p.y);
    }
    twice / BigRational::from_integer(BigInt::from(2))
}

/// Exact total area of a triangle set, for the tiling cross-check.
pub fn triangles_area_rational(points: &[Point], set: &OracleTriangleSet) -> BigRational {
    let mut total = BigRational::zero();
    for t in set.triples() {
        total += polygon_area_rational(points, &t).abs();
    }
    total
}
