//! Exact-sign geometric predicates and scalar geometry utilities.
//!
//! Orientation and in-circle queries go through adaptive-precision
//! floating-point expansions (the `robust` crate), so a zero really means
//! "exactly on the line / circle" and never "too close to tell". Every
//! triangulation decision in this crate rests on these two signs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in the plane. Coordinates are finite by system invariant;
/// all ingestion paths reject NaN and infinities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Exact bit-level identity, usable as a hash/set key.
    pub fn bits(&self) -> (u64, u64) {
        (self.x.to_bits(), self.y.to_bits())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteCoordinate {
                x: self.x,
                y: self.y,
            })
        }
    }
}

/// Exact sign of a predicate determinant.
///
/// Zero is detected exactly, never by epsilon comparison. Domain aliases:
/// `CCW`/`CW`/`COLLINEAR` for orientation, `INSIDE`/`OUTSIDE`/`ON_CIRCLE`
/// for the circumcircle test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub const CCW: Sign = Sign::Positive;
    pub const CW: Sign = Sign::Negative;
    pub const COLLINEAR: Sign = Sign::Zero;
    pub const INSIDE: Sign = Sign::Positive;
    pub const OUTSIDE: Sign = Sign::Negative;
    pub const ON_CIRCLE: Sign = Sign::Zero;

    pub fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn reversed(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }
}

fn coord(p: Point) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Sign of the signed area of triangle `abc`: Positive iff `abc` is
/// counter-clockwise, Zero iff collinear. Exact even when the naive
/// floating-point determinant underflows.
pub fn orient2d(a: Point, b: Point, c: Point) -> Result<Sign> {
    a.check_finite()?;
    b.check_finite()?;
    c.check_finite()?;
    Ok(orient2d_sign(a, b, c))
}

pub(crate) fn orient2d_sign(a: Point, b: Point, c: Point) -> Sign {
    debug_assert!(a.is_finite() && b.is_finite() && c.is_finite());
    Sign::of(robust::orient2d(coord(a), coord(b), coord(c)))
}

/// Position of `p` relative to the circumcircle of the counter-clockwise
/// triangle `abc`: Positive iff strictly inside, Zero iff cocircular.
///
/// Callers normalize orientation; collinear `abc` is a degenerate-triangle
/// error, clockwise `abc` a not-counter-clockwise error.
pub fn in_circle(a: Point, b: Point, c: Point, p: Point) -> Result<Sign> {
    a.check_finite()?;
    b.check_finite()?;
    c.check_finite()?;
    p.check_finite()?;
    match orient2d_sign(a, b, c) {
        Sign::Zero => Err(Error::DegenerateTriangle),
        Sign::Negative => Err(Error::NotCounterClockwise),
        Sign::Positive => Ok(in_circle_sign(a, b, c, p)),
    }
}

pub(crate) fn in_circle_sign(a: Point, b: Point, c: Point, p: Point) -> Sign {
    debug_assert!(orient2d_sign(a, b, c) == Sign::Positive);
    Sign::of(robust::incircle(coord(a), coord(b), coord(c), coord(p)))
}

/// `(px − qx)² + (py − qy)²`. Distances are compared squared throughout;
/// square roots are taken only at reporting boundaries.
pub fn squared_distance(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    dx * dx + dy * dy
}

pub fn distance(p: Point, q: Point) -> f64 {
    squared_distance(p, q).sqrt()
}

/// Maximum pairwise Euclidean distance, by brute force over all pairs.
/// A single point has diameter 0; an empty collection is an error.
pub fn diameter(points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut max_sq = 0.0f64;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            let d = squared_distance(p, q);
            if d > max_sq {
                max_sq = d;
            }
        }
    }
    Ok(max_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn orient2d_unit_right_triangle_is_ccw() {
        let s = orient2d(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)).unwrap();
        assert_eq!(s, Sign::CCW);
    }

    #[test]
    fn orient2d_points_on_diagonal_are_collinear() {
        let s = orient2d(pt(0.0, 0.0), pt(1.0, 1.0), pt(2.0, 2.0)).unwrap();
        assert_eq!(s, Sign::COLLINEAR);
    }

    #[test]
    fn orient2d_mirrored_triangle_is_cw() {
        let s = orient2d(pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0)).unwrap();
        assert_eq!(s, Sign::CW);
    }

    #[test]
    fn orient2d_rejects_non_finite() {
        let err = orient2d(pt(f64::NAN, 0.0), pt(1.0, 0.0), pt(0.0, 1.0));
        assert!(matches!(err, Err(Error::NonFiniteCoordinate { .. })));
    }

    #[test]
    fn in_circle_interior_point() {
        // Circumcircle of the unit right triangle has center (0.5, 0.5),
        // r² = 0.5; (0.25, 0.25) is at squared distance 0.125.
        let s = in_circle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(0.25, 0.25)).unwrap();
        assert_eq!(s, Sign::INSIDE);
    }

    #[test]
    fn in_circle_antipode_is_on_circle() {
        let s = in_circle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0)).unwrap();
        assert_eq!(s, Sign::ON_CIRCLE);
    }

    #[test]
    fn in_circle_far_point_is_outside() {
        let s = in_circle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(2.0, 2.0)).unwrap();
        assert_eq!(s, Sign::OUTSIDE);
    }

    #[test]
    fn in_circle_rejects_collinear_triangle() {
        let err = in_circle(pt(0.0, 0.0), pt(1.0, 1.0), pt(2.0, 2.0), pt(0.0, 1.0));
        assert!(matches!(err, Err(Error::DegenerateTriangle)));
    }

    #[test]
    fn in_circle_rejects_clockwise_triangle() {
        let err = in_circle(pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0), pt(0.5, 0.5));
        assert!(matches!(err, Err(Error::NotCounterClockwise)));
    }

    #[test]
    fn squared_distance_345() {
        assert_eq!(squared_distance(pt(0.0, 0.0), pt(3.0, 4.0)), 25.0);
    }

    #[test]
    fn squared_distance_identity_is_zero() {
        assert_eq!(squared_distance(pt(1.0, 1.0), pt(1.0, 1.0)), 0.0);
    }

    #[test]
    fn squared_distance_symmetric_pair() {
        assert_eq!(squared_distance(pt(-1.0, 0.0), pt(1.0, 0.0)), 4.0);
    }

    #[test]
    fn diameter_single_pair() {
        assert_eq!(diameter(&[pt(0.0, 0.0), pt(3.0, 4.0)]).unwrap(), 5.0);
    }

    #[test]
    fn diameter_singleton_is_zero() {
        assert_eq!(diameter(&[pt(0.0, 0.0)]).unwrap(), 0.0);
    }

    #[test]
    fn diameter_unit_square_is_sqrt2() {
        // Expected value frozen from the all-pairs scan: the largest of the
        // six pairwise distances is the diagonal, √2.
        let pts = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(distance(pts[i], pts[j]));
            }
        }
        assert_eq!(best, 2.0f64.sqrt());
        assert_eq!(diameter(&pts).unwrap(), best);
    }

    #[test]
    fn diameter_empty_is_error() {
        assert!(matches!(diameter(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn near_degenerate_cases_agree_with_rational_oracle() {
        // Points on a line, perturbed by a few ulps. 2000 cases here; the
        // full 10⁵-case sweep runs in the acceptance suite.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let t: f64 = rng.gen_range(-1.0..1.0);
            let mut a = pt(t, t);
            let mut b = pt(rng.gen_range(-1.0..1.0), 0.0);
            b.y = b.x;
            let mut c = pt(rng.gen_range(-1.0..1.0), 0.0);
            c.y = c.x;
            for p in [&mut a, &mut b, &mut c] {
                for _ in 0..rng.gen_range(0..3) {
                    p.y = if rng.gen() {
                        f64::from_bits(p.y.to_bits().wrapping_add(1))
                    } else {
                        f64::from_bits(p.y.to_bits().wrapping_sub(1))
                    };
                }
            }
            assert_eq!(orient2d_sign(a, b, c), oracle::exact_orient2d(a, b, c));
            if orient2d_sign(a, b, c) == Sign::Positive {
                let p = pt(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                assert_eq!(
                    in_circle_sign(a, b, c, p),
                    oracle::exact_in_circle(a, b, c, p)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn orient2d_antisymmetry(ax in -1e3..1e3f64, ay in -1e3..1e3f64,
                                 bx in -1e3..1e3f64, by in -1e3..1e3f64,
                                 cx in -1e3..1e3f64, cy in -1e3..1e3f64) {
            let (a, b, c) = (pt(ax, ay), pt(bx, by), pt(cx, cy));
            prop_assert_eq!(orient2d_sign(a, b, c), orient2d_sign(a, c, b).reversed());
        }

        #[test]
        fn in_circle_cyclic_rotation_invariance(ax in -1e3..1e3f64, ay in -1e3..1e3f64,
                                                bx in -1e3..1e3f64, by in -1e3..1e3f64,
                                                cx in -1e3..1e3f64, cy in -1e3..1e3f64,
                                                px in -1e3..1e3f64, py in -1e3..1e3f64) {
            let (a, b, c, p) = (pt(ax, ay), pt(bx, by), pt(cx, cy), pt(px, py));
            if orient2d_sign(a, b, c) == Sign::Positive {
                let s = in_circle_sign(a, b, c, p);
                prop_assert_eq!(s, in_circle_sign(b, c, a, p));
                prop_assert_eq!(s, in_circle_sign(c, a, b, p));
            }
        }

        #[test]
        fn squared_distance_symmetry(px in -1e6..1e6f64, py in -1e6..1e6f64,
                                     qx in -1e6..1e6f64, qy in -1e6..1e6f64) {
            let (p, q) = (pt(px, py), pt(qx, qy));
            prop_assert_eq!(squared_distance(p, q), squared_distance(q, p));
        }
    }
}
