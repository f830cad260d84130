//! Lower Newton polygons of polynomials whose coefficient valuations may
//! be censored.
//!
//! The polygon is built only from exact valuations. A censored coefficient
//! is admissible when its guaranteed lower bound keeps it on or above the
//! hull; if the hull would have to pass below a point we only know from
//! above, the polygon is indeterminate and says so rather than guessing.

use alloc::vec::Vec;
use core::fmt;

use crate::censored::Rat;
use crate::valued::CensoredVal;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolygonError {
    /// No coefficients at all.
    Empty,
    /// The leading coefficient must have an exact valuation.
    LeadingCensored,
    /// A censored coefficient sits before the first exact one, so even the
    /// order at z = 0 is unknown.
    CensoredZOrder { index: usize },
    /// A censored coefficient's lower bound lies strictly below the hull
    /// through the exact points; the true polygon could differ.
    CensoredBelowHull { index: usize },
}

impl fmt::Display for PolygonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonError::Empty => write!(f, "no coefficients"),
            PolygonError::LeadingCensored => {
                write!(f, "leading coefficient valuation is censored")
            }
            PolygonError::CensoredZOrder { index } => {
                write!(f, "coefficient {} censored before the first exact nonzero", index)
            }
            PolygonError::CensoredBelowHull { index } => {
                write!(f, "censored coefficient {} could fall below the hull", index)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub slope: Rat,
    /// Horizontal length: number of roots (with multiplicity) of valuation
    /// `-slope`.
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    segments: Vec<Segment>,
    source_degree: u64,
    z_order: u64,
}

impl NewtonPolygon {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn source_degree(&self) -> u64 {
        self.source_degree
    }

    /// Multiplicity of the root z = 0.
    pub fn z_order(&self) -> u64 {
        self.z_order
    }

    /// Roots of strictly positive valuation, counted with multiplicity and
    /// including z = 0.
    pub fn positive_mass(&self) -> u64 {
        self.z_order
            + self
                .segments
                .iter()
                .filter(|s| s.slope < Rat::new(0, 1))
                .map(|s| s.len)
                .sum::<u64>()
    }

    /// Number of roots of exactly this valuation (z = 0 not included).
    pub fn mass_at(&self, v: Rat) -> u64 {
        self.segments
            .iter()
            .filter(|s| s.slope == -v)
            .map(|s| s.len)
            .sum()
    }

    /// (valuation, multiplicity) pairs over the finite positive valuations,
    /// in decreasing valuation order; z = 0 not included.
    pub fn positive_vals(&self) -> Vec<(Rat, u64)> {
        self.segments
            .iter()
            .filter(|s| s.slope < Rat::new(0, 1))
            .map(|s| (-s.slope, s.len))
            .collect()
    }
}

/// Lower polygon of the polynomial whose coefficient of z^i has the i-th
/// given valuation.
pub fn newton_polygon(vals: &[CensoredVal]) -> Result<NewtonPolygon, PolygonError> {
    // trim exact zeros at the top: they do not belong to the polynomial
    let mut top = vals.len();
    while top > 0 && vals[top - 1] == CensoredVal::InfiniteZero {
        top -= 1;
    }
    if top == 0 {
        return Err(PolygonError::Empty);
    }
    let vals = &vals[..top];
    let deg = vals.len() - 1;
    if !vals[deg].is_exact() {
        return Err(PolygonError::LeadingCensored);
    }

    let mut z_order = None;
    for (i, v) in vals.iter().enumerate() {
        match v {
            CensoredVal::InfiniteZero => continue,
            CensoredVal::AtLeast(_) => return Err(PolygonError::CensoredZOrder { index: i }),
            CensoredVal::Exact(_) => {
                z_order = Some(i);
                break;
            }
        }
    }
    let z_order = z_order.expect("leading coefficient is exact");

    // lower hull over the exact points, collinear points merged
    let pts: Vec<(i64, i64)> = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.exact_value().map(|e| (i as i64, e)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) as i128 * (pt.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (pt.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    // every censored bound must stay on or above the hull
    for (i, v) in vals.iter().enumerate() {
        if let CensoredVal::AtLeast(bound) = v {
            let x = i as i64;
            let seg = hull.windows(2).find(|w| w[0].0 <= x && x <= w[1].0);
            if let Some(w) = seg {
                // hull height at x, compared as exact rationals
                let lhs = (*bound as i128 - w[0].1 as i128) * (w[1].0 - w[0].0) as i128;
                let rhs = (w[1].1 - w[0].1) as i128 * (x - w[0].0) as i128;
                if lhs < rhs {
                    return Err(PolygonError::CensoredBelowHull { index: i });
                }
            }
        }
    }

    let segments = hull
        .windows(2)
        .map(|w| Segment {
            slope: Rat::new(w[1].1 - w[0].1, w[1].0 - w[0].0),
            len: (w[1].0 - w[0].0) as u64,
        })
        .collect();

    Ok(NewtonPolygon {
        segments,
        source_degree: deg as u64,
        z_order: z_order as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ex(v: i64) -> CensoredVal {
        CensoredVal::Exact(v)
    }

    #[test]
    fn two_segment_polygon() {
        // points (0,3), (1,1), (3,0): the middle point dips below the
        // chord, so it is a vertex
        let vals = vec![ex(3), ex(1), CensoredVal::InfiniteZero, ex(0)];
        let p = newton_polygon(&vals).unwrap();
        assert_eq!(p.z_order(), 0);
        assert_eq!(p.source_degree(), 3);
        assert_eq!(
            p.segments(),
            &[
                Segment { slope: Rat::new(-2, 1), len: 1 },
                Segment { slope: Rat::new(-1, 2), len: 2 },
            ][..]
        );
        assert_eq!(p.positive_mass(), 3);
        assert_eq!(p.mass_at(Rat::new(2, 1)), 1);
        assert_eq!(p.mass_at(Rat::new(1, 2)), 2);
    }

    #[test]
    fn point_above_chord_is_not_a_vertex() {
        // (2,1) sits above the chord from (0,2) to (3,0)
        let vals = vec![ex(2), CensoredVal::InfiniteZero, ex(1), ex(0)];
        let p = newton_polygon(&vals).unwrap();
        assert_eq!(
            p.segments(),
            &[Segment { slope: Rat::new(-2, 3), len: 3 }][..]
        );
    }

    #[test]
    fn z_order_counts_leading_zero_run() {
        let vals = vec![CensoredVal::InfiniteZero, ex(1), ex(0), ex(0)];
        let p = newton_polygon(&vals).unwrap();
        assert_eq!(p.z_order(), 1);
        assert_eq!(p.positive_mass(), 2);
        assert_eq!(p.positive_vals(), vec![(Rat::new(1, 1), 1)]);
    }

    #[test]
    fn collinear_points_merge() {
        let vals = vec![ex(3), ex(2), ex(1), ex(0)];
        let p = newton_polygon(&vals).unwrap();
        assert_eq!(p.segments().len(), 1);
        assert_eq!(p.segments()[0], Segment { slope: Rat::new(-1, 1), len: 3 });
    }

    #[test]
    fn censored_above_hull_is_tolerated() {
        // strictly above
        let vals = vec![ex(2), CensoredVal::AtLeast(5), ex(0)];
        let p = newton_polygon(&vals).unwrap();
        assert_eq!(p.segments().len(), 1);
        assert_eq!(p.segments()[0].slope, Rat::new(-1, 1));
        // exactly on the hull: height at 1 is 1
        let vals = vec![ex(2), CensoredVal::AtLeast(1), ex(0)];
        assert!(newton_polygon(&vals).is_ok());
    }

    #[test]
    fn censored_below_hull_is_rejected() {
        let vals = vec![ex(2), CensoredVal::AtLeast(0), ex(0)];
        assert_eq!(
            newton_polygon(&vals),
            Err(PolygonError::CensoredBelowHull { index: 1 })
        );
    }

    #[test]
    fn censored_leading_or_low_end_is_rejected() {
        let vals = vec![ex(0), CensoredVal::AtLeast(3)];
        assert_eq!(newton_polygon(&vals), Err(PolygonError::LeadingCensored));
        let vals = vec![CensoredVal::AtLeast(3), ex(0), ex(0)];
        assert_eq!(
            newton_polygon(&vals),
            Err(PolygonError::CensoredZOrder { index: 0 })
        );
        assert_eq!(
            newton_polygon(&[CensoredVal::InfiniteZero]),
            Err(PolygonError::Empty)
        );
    }

    #[test]
    fn constant_polynomial_has_empty_polygon() {
        let p = newton_polygon(&[ex(0)]).unwrap();
        assert!(p.segments().is_empty());
        assert_eq!(p.positive_mass(), 0);
    }
}
