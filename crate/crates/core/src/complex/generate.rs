//! Generators for the complexes used in tests and verification runs.

use super::MetricComplex;
use crate::error::{Error, Result};

/// Desk-scale truncation of an infinite bounded-geometry complex.
///
/// `n = 1` is a path of `m` unit edges on vertices `0..=m`. `n = 2` is a strip
/// of `2m` unit right triangles with bottom vertices `2i` at `(i, 0)` and top
/// vertices `2i + 1` at `(i, 1)`.
pub fn ray_complex(n: usize, m: usize) -> Result<MetricComplex> {
    match n {
        1 => {
            let verts = (0..=m).map(|i| (i, vec![i as f64]));
            let tops: Vec<Vec<usize>> = (0..m).map(|i| vec![i, i + 1]).collect();
            MetricComplex::build(verts, &tops)
        }
        2 => {
            let verts = (0..=m).flat_map(|i| [(2 * i, vec![i as f64, 0.0]), (2 * i + 1, vec![i as f64, 1.0])]);
            let tops: Vec<Vec<usize>> = (0..m)
                .flat_map(|i| [vec![2 * i, 2 * i + 1, 2 * i + 2], vec![2 * i + 1, 2 * i + 2, 2 * i + 3]])
                .collect();
            MetricComplex::build(verts, &tops)
        }
        _ => Err(Error::BadDimension(format!("ray complexes exist for n in {{1, 2}}, got {n}"))),
    }
}

/// Regular `k`-simplex with unit edges: vertex `i` at `e_i / sqrt(2)` in `R^{k+1}`.
pub fn regular_simplex(k: usize) -> MetricComplex {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let verts = (0..=k).map(|i| {
        let mut c = vec![0.0; k + 1];
        c[i] = s;
        (i, c)
    });
    MetricComplex::build(verts, &[(0..=k).collect()]).expect("valid simplex")
}

/// Standard `k`-simplex: the origin and the unit vectors of `R^k`.
pub fn standard_simplex(k: usize) -> MetricComplex {
    let verts = (0..=k).map(|i| {
        let mut c = vec![0.0; k];
        if i > 0 {
            c[i - 1] = 1.0;
        }
        (i, c)
    });
    MetricComplex::build(verts, &[(0..=k).collect()]).expect("valid simplex")
}

/// Boundary of the standard `k`-simplex (a triangulated `(k-1)`-sphere).
pub fn simplex_boundary(k: usize) -> MetricComplex {
    assert!(k >= 1, "the boundary of a point is empty");
    let full = standard_simplex(k);
    full.skeleton(k - 1).expect("k - 1 <= k")
}

/// Boundary of the unit cube `[0,1]^n` for `n` in `{1, 2}`.
///
/// `n = 1`: the two endpoints. `n = 2`: the four sides, vertices numbered
/// counter-clockwise from the origin.
pub fn cube_boundary(n: usize) -> Result<MetricComplex> {
    match n {
        1 => MetricComplex::build(vec![(0, vec![0.0]), (1, vec![1.0])], &[vec![0], vec![1]]),
        2 => MetricComplex::build(
            vec![
                (0, vec![0.0, 0.0]),
                (1, vec![1.0, 0.0]),
                (2, vec![1.0, 1.0]),
                (3, vec![0.0, 1.0]),
            ],
            &[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        ),
        _ => Err(Error::BadDimension(format!("cube boundaries exist for n in {{1, 2}}, got {n}"))),
    }
}

/// Cone over `k`. The complex is lifted into one more ambient dimension and
/// the apex, with id `max id + 1`, sits one unit above the vertex centroid.
pub fn cone(k: &MetricComplex) -> MetricComplex {
    let d = k.ambient_dim();
    let apex = k.vertex_ids().last().map_or(0, |v| v + 1);
    let mut centroid = vec![0.0; d + 1];
    let mut verts = Vec::with_capacity(k.num_vertices() + 1);
    for &id in k.vertex_ids() {
        let mut c = k.coords_unchecked(id).to_vec();
        c.push(0.0);
        for (a, b) in centroid.iter_mut().zip(&c) {
            *a += b;
        }
        verts.push((id, c));
    }
    let nv = k.num_vertices().max(1) as f64;
    centroid.iter_mut().for_each(|a| *a /= nv);
    centroid[d] = 1.0;
    verts.push((apex, centroid));
    let tops: Vec<Vec<usize>> = k
        .maximal_simplices()
        .iter()
        .map(|s| {
            let mut v = s.vertices().to_vec();
            v.push(apex);
            v
        })
        .collect();
    let tops = if tops.is_empty() { vec![vec![apex]] } else { tops };
    MetricComplex::build(verts, &tops).expect("valid cone")
}
