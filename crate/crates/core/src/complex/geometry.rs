use nalgebra::DMatrix;

use super::{MetricComplex, Simplex};
use crate::error::{Error, Result};

/// Relative slack applied to edge-length bounds, so that lengths such as
/// `sqrt(2)` compare equal to a bound given as `sqrt(2)`.
const LENGTH_SLACK: f64 = 1e-12;

/// Outcome of a bounded-geometry check.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryReport {
    pub max_vertex_degree: usize,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
    pub passes: bool,
    pub violations: Vec<(Simplex, String)>,
}

impl MetricComplex {
    /// Checks connectivity, the vertex-degree bound `max_degree` and that
    /// every edge length lies in `[1/scale, scale]`.
    pub fn validate_bounded_geometry(&self, scale: f64, max_degree: usize) -> GeometryReport {
        let mut violations = Vec::new();
        let (lo, hi) = (1.0 / scale, scale);
        let mut min_len = f64::INFINITY;
        let mut max_len = 0.0f64;
        for e in self.simplices(1) {
            let len = self.edge_length(e[0], e[1]);
            min_len = min_len.min(len);
            max_len = max_len.max(len);
            if len < lo * (1.0 - LENGTH_SLACK) || len > hi * (1.0 + LENGTH_SLACK) {
                violations.push((
                    Simplex::from_sorted(e),
                    format!("edge length {len} outside [{lo}, {hi}]"),
                ));
            }
        }
        let mut max_deg = 0;
        for (p, &id) in self.ids.iter().enumerate() {
            let deg = self.coface_indices(0, p).len();
            max_deg = max_deg.max(deg);
            if deg > max_degree {
                violations.push((
                    Simplex::from_sorted(&[id]),
                    format!("vertex degree {deg} exceeds {max_degree}"),
                ));
            }
        }
        let labels = self.component_labels();
        if let Some(p) = labels.iter().position(|&l| l != 0) {
            violations.push((
                Simplex::from_sorted(&[self.ids[p]]),
                "complex is disconnected".to_string(),
            ));
        }
        GeometryReport {
            max_vertex_degree: max_deg,
            min_edge_length: min_len,
            max_edge_length: max_len,
            passes: violations.is_empty(),
            violations,
        }
    }
}

/// Volume of the simplex spanned by `pts` from the Gram determinant of its
/// edge vectors. A single point has volume 1.
pub fn simplex_volume(pts: &[&[f64]]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let d = pts[0].len();
    let edges = DMatrix::from_fn(d, k, |r, c| pts[c + 1][r] - pts[0][r]);
    let gram = edges.transpose() * &edges;
    let det = gram.determinant().max(0.0);
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    det.sqrt() / fact
}

/// Degree-indexed exponent sequence `p_0, ..., p_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiSequence {
    exponents: Vec<f64>,
    n: usize,
}

impl PiSequence {
    /// Validates `1 < p_i < inf` and `1/p_{i+1} - 1/p_i <= 1/n`.
    pub fn new(exponents: Vec<f64>, n: usize) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::BadExponent("empty exponent sequence".into()));
        }
        if let Some(p) = exponents.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return Err(Error::BadExponent(format!("exponent {p} not in (1, inf)")));
        }
        if n > 0 {
            for (i, w) in exponents.windows(2).enumerate() {
                if 1.0 / w[1] - 1.0 / w[0] > 1.0 / n as f64 + 1e-15 {
                    return Err(Error::BadExponent(format!(
                        "1/p_{} - 1/p_{} exceeds 1/{n}",
                        i + 1,
                        i
                    )));
                }
            }
        }
        Ok(PiSequence { exponents, n })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p_k`, if defined.
    pub fn p(&self, k: usize) -> Option<f64> {
        self.exponents.get(k).copied()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.exponents.windows(2).all(|w| w[0] >= w[1])
    }

    /// True when `p_k < p_{k+1}`.
    pub fn increases_at(&self, k: usize) -> bool {
        matches!((self.p(k), self.p(k + 1)), (Some(a), Some(b)) if a < b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MetricComplex {
        MetricComplex::build(
            vec![(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0]), (2, vec![0.5, 3f64.sqrt() / 2.0])],
            &[vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn equilateral_triangle_passes() {
        let r = triangle().validate_bounded_geometry(1.0, 6);
        assert!(r.passes, "{:?}", r.violations);
        assert_eq!(r.max_vertex_degree, 2);
    }

    #[test]
    fn long_edge_flagged() {
        let k = MetricComplex::build(vec![(0, vec![0.0]), (1, vec![3.0])], &[vec![0, 1]]).unwrap();
        let r = k.validate_bounded_geometry(2.0, 6);
        assert!(!r.passes);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].1.contains("edge length"));
    }

    #[test]
    fn high_degree_flagged() {
        let mut verts = vec![(0, vec![0.0, 0.0])];
        let mut tops = Vec::new();
        for i in 0..7 {
            let a = 2.0 * std::f64::consts::PI * i as f64 / 7.0;
            verts.push((i + 1, vec![a.cos(), a.sin()]));
            tops.push(vec![0, i + 1]);
        }
        let k = MetricComplex::build(verts, &tops).unwrap();
        let r = k.validate_bounded_geometry(1.0, 6);
        assert!(!r.passes);
        assert!(r.violations.iter().any(|(s, why)| s.vertices() == [0] && why.contains("degree 7")));
    }

    #[test]
    fn disconnected_flagged() {
        let k = MetricComplex::build(vec![(0, vec![0.0]), (1, vec![1.0]), (2, vec![5.0])], &[vec![0, 1]])
            .unwrap();
        let r = k.validate_bounded_geometry(1.0, 6);
        assert!(r.violations.iter().any(|(_, why)| why.contains("disconnected")));
    }

    #[test]
    fn pi_sequence_rules() {
        assert!(PiSequence::new(vec![2.0, 4.0], 1).is_ok());
        assert!(PiSequence::new(vec![1.0, 4.0], 1).is_err());
        // 1/2 - 1/8 = 3/8 > 1/3
        assert!(PiSequence::new(vec![8.0, 2.0], 3).is_err());
        let pi = PiSequence::new(vec![2.0, 4.0], 1).unwrap();
        assert!(pi.increases_at(0) && !pi.is_nonincreasing());
    }

    #[test]
    fn volumes() {
        let s = 3f64.sqrt() / 4.0;
        assert!((triangle().volume(&[0, 1, 2]) - s).abs() < 1e-15);
        assert_eq!(triangle().volume(&[1]), 1.0);
    }
}
