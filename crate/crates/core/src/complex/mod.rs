//! Finite metric simplicial complexes.
//!
//! A [`MetricComplex`] stores an embedded vertex table and, per dimension, a
//! lexicographically sorted table of simplex keys. Keys are strictly
//! increasing vertex-id tuples; the orientation of a simplex is the one
//! induced by that ascending order. The coface relation is kept as a
//! compressed index table so that large truncated complexes (paths with a
//! million edges) stay cheap.

mod generate;
mod geometry;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use generate::{
    cone, cube_boundary, ray_complex, regular_simplex, simplex_boundary, standard_simplex,
};
pub use geometry::{simplex_volume, GeometryReport, PiSequence};

/// A simplex key: strictly increasing vertex ids.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(SmallVec<[usize; 4]>);

impl Simplex {
    /// Builds a key from ids in any order. Repeated ids are rejected.
    pub fn new<I: IntoIterator<Item = usize>>(ids: I) -> Result<Self> {
        let mut v: SmallVec<[usize; 4]> = ids.into_iter().collect();
        let original = v.to_vec();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateSimplex(original));
        }
        Ok(Simplex(v))
    }

    /// Wraps ids that are already strictly increasing.
    pub(crate) fn from_sorted(ids: &[usize]) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Simplex(SmallVec::from_slice(ids))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// The facet obtained by dropping the vertex in position `i`.
    pub fn facet(&self, i: usize) -> Simplex {
        let mut v = self.0.clone();
        v.remove(i);
        Simplex(v)
    }

    /// True when every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().join(","))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Layer {
    width: usize,
    flat: Vec<usize>,
    coface_offsets: Vec<usize>,
    cofaces: Vec<usize>,
}

impl Layer {
    fn len(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.flat.len() / self.width
        }
    }

    fn get(&self, i: usize) -> &[usize] {
        &self.flat[i * self.width..(i + 1) * self.width]
    }

    fn find(&self, key: &[usize]) -> Option<usize> {
        if key.len() != self.width {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

/// Finite simplicial complex with embedded vertex coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricComplex {
    ambient: usize,
    ids: Vec<usize>,
    coords: Vec<f64>,
    layers: Vec<Layer>,
}

impl MetricComplex {
    /// Builds the face closure of `top_simplices` over the given vertex table.
    ///
    /// Every vertex of the table is a 0-simplex, whether or not a listed
    /// simplex uses it.
    pub fn build<V, C>(vertices: V, top_simplices: &[Vec<usize>]) -> Result<Self>
    where
        V: IntoIterator<Item = (usize, C)>,
        C: Into<Vec<f64>>,
    {
        let mut table: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut ambient = None;
        for (id, c) in vertices {
            let c = c.into();
            match ambient {
                None => ambient = Some(c.len()),
                Some(d) if d != c.len() => {
                    return Err(Error::CoordinateMismatch { id, expected: d, got: c.len() })
                }
                _ => {}
            }
            if table.insert(id, c).is_some() {
                return Err(Error::DuplicateVertex(id));
            }
        }
        let ambient = ambient.unwrap_or(0);

        let mut keys: Vec<Simplex> = Vec::with_capacity(top_simplices.len());
        for t in top_simplices {
            let s = Simplex::new(t.iter().copied())?;
            if let Some(&missing) = s.vertices().iter().find(|v| !table.contains_key(v)) {
                return Err(Error::MissingVertex(missing));
            }
            keys.push(s);
        }

        let ids: Vec<usize> = table.keys().copied().collect();
        let coords: Vec<f64> = table.into_values().flatten().collect();
        Self::from_keys(ambient, ids, coords, keys)
    }

    /// Closure of `keys` over a validated vertex table.
    fn from_keys(ambient: usize, ids: Vec<usize>, coords: Vec<f64>, keys: Vec<Simplex>) -> Result<Self> {
        let top = keys.iter().map(Simplex::dim).max().unwrap_or(0);
        let mut per_dim: Vec<Vec<SmallVec<[usize; 4]>>> = vec![Vec::new(); top + 1];
        for s in &keys {
            let v = s.vertices();
            let m = v.len();
            if m <= 1 {
                continue;
            }
            // all faces of dimension >= 1
            for mask in 1u32..(1u32 << m) {
                let c = mask.count_ones() as usize;
                if c < 2 {
                    continue;
                }
                let face: SmallVec<[usize; 4]> =
                    (0..m).filter(|i| mask & (1 << i) != 0).map(|i| v[i]).collect();
                per_dim[c - 1].push(face);
            }
        }
        let mut layers = Vec::with_capacity(top + 1);
        layers.push(Layer { width: 1, flat: ids.clone(), ..Default::default() });
        for faces in per_dim.into_iter().skip(1) {
            let mut faces = faces;
            faces.sort_unstable();
            faces.dedup();
            let width = faces.first().map_or(0, |f| f.len());
            let flat = faces.into_iter().flatten().collect();
            layers.push(Layer { width, flat, ..Default::default() });
        }
        while layers.len() > 1 && layers.last().map_or(false, |l| l.len() == 0) {
            layers.pop();
        }
        let mut complex = MetricComplex { ambient, ids, coords, layers };
        complex.rebuild_cofaces();
        Ok(complex)
    }

    fn rebuild_cofaces(&mut self) {
        let n = self.layers.len();
        for k in 0..n {
            let count = self.layers[k].len();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            if k + 1 < n {
                let up = &self.layers[k + 1];
                let mut facet = Vec::with_capacity(up.width);
                for j in 0..up.len() {
                    let s = up.get(j);
                    for i in 0..s.len() {
                        facet.clear();
                        facet.extend(s.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &v)| v));
                        let f = self.layers[k].find(&facet).expect("face closure violated");
                        pairs.push((f, j));
                    }
                }
            }
            pairs.sort_unstable();
            let mut offsets = vec![0usize; count + 1];
            for &(f, _) in &pairs {
                offsets[f + 1] += 1;
            }
            for i in 0..count {
                offsets[i + 1] += offsets[i];
            }
            let layer = &mut self.layers[k];
            layer.cofaces = pairs.into_iter().map(|(_, j)| j).collect();
            layer.coface_offsets = offsets;
        }
    }

    /// Top dimension. The empty complex reports 0.
    pub fn dim(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn vertex_ids(&self) -> &[usize] {
        &self.ids
    }

    /// Number of `k`-simplices (0 above the top dimension).
    pub fn count(&self, k: usize) -> usize {
        self.layers.get(k).map_or(0, Layer::len)
    }

    pub fn total_count(&self) -> usize {
        (0..self.layers.len()).map(|k| self.count(k)).sum()
    }

    /// Vertex ids of the `i`-th `k`-simplex in canonical order.
    pub fn simplex_at(&self, k: usize, i: usize) -> &[usize] {
        self.layers[k].get(i)
    }

    /// Iterates over the `k`-simplices in canonical (lexicographic) order.
    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &[usize]> + '_ {
        let n = self.count(k);
        (0..n).map(move |i| self.layers[k].get(i))
    }

    /// Canonical index of a key within its dimension.
    pub fn index_of(&self, key: &[usize]) -> Option<usize> {
        if key.is_empty() {
            return None;
        }
        self.layers.get(key.len() - 1)?.find(key)
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index_of(s.vertices()).is_some()
    }

    /// Indices (in dimension `k + 1`) of the cofaces of the `i`-th `k`-simplex.
    pub fn coface_indices(&self, k: usize, i: usize) -> &[usize] {
        let l = &self.layers[k];
        if l.coface_offsets.is_empty() {
            return &[];
        }
        &l.cofaces[l.coface_offsets[i]..l.coface_offsets[i + 1]]
    }

    /// Coface keys of a simplex.
    pub fn cofaces(&self, s: &Simplex) -> Result<Vec<Simplex>> {
        let k = s.dim();
        let i = self.index_of(s.vertices()).ok_or_else(|| Error::MissingSimplex(s.clone()))?;
        Ok(self
            .coface_indices(k, i)
            .iter()
            .map(|&j| Simplex::from_sorted(self.simplex_at(k + 1, j)))
            .collect())
    }

    pub fn vertex_position(&self, id: usize) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn coords(&self, id: usize) -> Result<&[f64]> {
        let p = self.vertex_position(id).ok_or(Error::MissingVertex(id))?;
        Ok(&self.coords[p * self.ambient..(p + 1) * self.ambient])
    }

    pub(crate) fn coords_unchecked(&self, id: usize) -> &[f64] {
        let p = self.vertex_position(id).expect("vertex present");
        &self.coords[p * self.ambient..(p + 1) * self.ambient]
    }

    /// Simplices with no cofaces, all dimensions, in dimension-major canonical order.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut out = Vec::new();
        for k in 0..self.layers.len() {
            for i in 0..self.count(k) {
                if self.coface_indices(k, i).is_empty() {
                    out.push(Simplex::from_sorted(self.simplex_at(k, i)));
                }
            }
        }
        out
    }

    /// Maximal simplices containing `s` (including `s` itself when maximal).
    pub fn maximal_cofaces(&self, s: &[usize]) -> Vec<Simplex> {
        let Some(i0) = self.index_of(s) else { return Vec::new() };
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(s.len() - 1, i0)]);
        while let Some((k, i)) = queue.pop_front() {
            let up = self.coface_indices(k, i);
            if up.is_empty() {
                out.push(Simplex::from_sorted(self.simplex_at(k, i)));
            }
            for &j in up {
                if seen.insert((k + 1, j)) {
                    queue.push_back((k + 1, j));
                }
            }
        }
        out.sort();
        out
    }

    /// Alternating simplex count.
    pub fn euler_characteristic(&self) -> i64 {
        (0..self.layers.len())
            .map(|k| if k % 2 == 0 { self.count(k) as i64 } else { -(self.count(k) as i64) })
            .sum()
    }

    /// The `m`-skeleton: all simplices of dimension at most `m`.
    pub fn skeleton(&self, m: usize) -> Result<MetricComplex> {
        if m > self.dim() {
            return Err(Error::BadDimension(format!(
                "skeleton dimension {m} exceeds complex dimension {}",
                self.dim()
            )));
        }
        let mut out = self.clone();
        out.layers.truncate(m + 1);
        let last = out.layers.last_mut().expect("at least one layer");
        last.cofaces.clear();
        last.coface_offsets = vec![0; last.len() + 1];
        Ok(out)
    }

    /// Closed star of a vertex.
    pub fn star(&self, v: usize) -> Result<MetricComplex> {
        if self.vertex_position(v).is_none() {
            return Err(Error::MissingVertex(v));
        }
        let tops = self.maximal_cofaces(&[v]);
        let used: BTreeSet<usize> = tops.iter().flat_map(|s| s.vertices().iter().copied()).collect();
        let verts: Vec<(usize, Vec<f64>)> =
            used.iter().map(|&id| (id, self.coords_unchecked(id).to_vec())).collect();
        let tops: Vec<Vec<usize>> = tops.iter().map(|s| s.vertices().to_vec()).collect();
        MetricComplex::build(verts, &tops)
    }

    /// True when every simplex of `sub` is a simplex of `self` with the same vertex coordinates.
    pub fn has_subcomplex(&self, sub: &MetricComplex) -> bool {
        if sub.is_empty() {
            return true;
        }
        if sub.ambient != self.ambient || sub.dim() > self.dim() {
            return false;
        }
        let same_coords = sub
            .ids
            .iter()
            .all(|&id| self.coords(id).map_or(false, |c| c == sub.coords_unchecked(id)));
        same_coords
            && (0..=sub.dim()).all(|k| sub.simplices(k).all(|s| self.index_of(s).is_some()))
    }

    /// Arithmetic barycenter of a simplex.
    pub fn barycenter(&self, s: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.ambient];
        for &v in s {
            for (a, b) in c.iter_mut().zip(self.coords_unchecked(v)) {
                *a += b;
            }
        }
        let n = s.len() as f64;
        c.iter_mut().for_each(|a| *a /= n);
        c
    }

    /// First barycentric subdivision.
    pub fn barycentric_subdivide(&self) -> MetricComplex {
        self.barycentric_subdivision().0
    }

    /// First barycentric subdivision together with the map from each original
    /// simplex to the id of its barycenter vertex.
    ///
    /// New vertex ids enumerate the original simplices in dimension-major
    /// canonical order, starting at 0.
    pub fn barycentric_subdivision(&self) -> (MetricComplex, SubdivisionMap) {
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut total = 0;
        for k in 0..self.layers.len() {
            offsets.push(total);
            total += self.count(k);
        }
        let mut coords = Vec::with_capacity(total * self.ambient);
        for k in 0..self.layers.len() {
            for s in self.simplices(k) {
                coords.extend(self.barycenter(s));
            }
        }
        let ids: Vec<usize> = (0..total).collect();
        let mut keys = Vec::new();
        for k in 0..self.layers.len() {
            for i in 0..self.count(k) {
                if !self.coface_indices(k, i).is_empty() {
                    continue;
                }
                let s = self.simplex_at(k, i);
                for perm in s.iter().copied().permutations(s.len()) {
                    let mut prefix: SmallVec<[usize; 4]> = SmallVec::new();
                    let mut flag: SmallVec<[usize; 4]> = SmallVec::new();
                    for v in perm {
                        let pos = prefix.partition_point(|&x| x < v);
                        prefix.insert(pos, v);
                        let d = prefix.len() - 1;
                        let idx = self.layers[d].find(&prefix).expect("face present");
                        flag.push(offsets[d] + idx);
                    }
                    flag.sort_unstable();
                    keys.push(Simplex(flag));
                }
            }
        }
        let complex = Self::from_keys(self.ambient, ids, coords, keys).expect("valid subdivision");
        (complex, SubdivisionMap { offsets })
    }

    /// Number of edges incident to a vertex.
    pub fn vertex_degree(&self, v: usize) -> Result<usize> {
        let p = self.vertex_position(v).ok_or(Error::MissingVertex(v))?;
        Ok(self.coface_indices(0, p).len())
    }

    /// Euclidean length of an edge.
    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.coords_unchecked(a), self.coords_unchecked(b));
        x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    }

    /// Volume of a simplex from its Gram determinant (1 for a vertex).
    pub fn volume(&self, s: &[usize]) -> f64 {
        let pts: Vec<&[f64]> = s.iter().map(|&v| self.coords_unchecked(v)).collect();
        simplex_volume(&pts)
    }

    /// Connected components of the edge graph, as vertex-position labels.
    pub(crate) fn component_labels(&self) -> Vec<usize> {
        let n = self.ids.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut stack = vec![start];
            while let Some(p) = stack.pop() {
                for &e in self.coface_indices(0, p) {
                    for &w in self.simplex_at(1, e) {
                        let q = self.vertex_position(w).expect("vertex");
                        if label[q] == usize::MAX {
                            label[q] = next;
                            stack.push(q);
                        }
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// Locates barycenter vertices of a subdivision.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdivisionMap {
    offsets: Vec<usize>,
}

impl SubdivisionMap {
    /// Id of the barycenter vertex of `s` in the subdivided complex.
    pub fn barycenter_id(&self, original: &MetricComplex, s: &[usize]) -> Option<usize> {
        let i = original.index_of(s)?;
        Some(self.offsets[s.len() - 1] + i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Vec<(usize, Vec<f64>)> {
        vec![
            (0, vec![0.0, 0.0]),
            (1, vec![1.0, 0.0]),
            (2, vec![0.5, 3f64.sqrt() / 2.0]),
        ]
    }

    #[test]
    fn closure_of_edges() {
        let k = MetricComplex::build(unit_triangle(), &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!((k.count(0), k.count(1), k.count(2)), (3, 3, 0));
        assert_eq!(k.dim(), 1);
    }

    #[test]
    fn closure_of_triangle() {
        let k = MetricComplex::build(unit_triangle(), &[vec![0, 1, 2]]).unwrap();
        assert_eq!((k.count(0), k.count(1), k.count(2)), (3, 3, 1));
        assert_eq!(k.cofaces(&Simplex::new([0, 1]).unwrap()).unwrap(), vec![Simplex::new([0, 1, 2]).unwrap()]);
    }

    #[test]
    fn degenerate_and_missing() {
        assert_eq!(
            MetricComplex::build(unit_triangle(), &[vec![0, 0, 1]]).unwrap_err(),
            Error::DegenerateSimplex(vec![0, 0, 1])
        );
        assert_eq!(
            MetricComplex::build(unit_triangle(), &[vec![0, 7]]).unwrap_err(),
            Error::MissingVertex(7)
        );
        let bad = vec![(0, vec![0.0]), (1, vec![0.0, 1.0])];
        assert!(matches!(
            MetricComplex::build(bad, &[vec![0, 1]]),
            Err(Error::CoordinateMismatch { .. })
        ));
    }

    #[test]
    fn skeletons() {
        let tri = MetricComplex::build(unit_triangle(), &[vec![0, 1, 2]]).unwrap();
        let s1 = tri.skeleton(1).unwrap();
        assert_eq!((s1.count(1), s1.count(2), s1.dim()), (3, 0, 1));
        assert_eq!(tri.skeleton(2).unwrap(), tri);
        let tet = standard_simplex(3);
        let s0 = tet.skeleton(0).unwrap();
        assert_eq!((s0.count(0), s0.count(1)), (4, 0));
        assert!(matches!(tri.skeleton(3), Err(Error::BadDimension(_))));
    }

    #[test]
    fn stars() {
        // hexagonal fan around vertex 0
        let mut verts = vec![(0, vec![0.0, 0.0])];
        for i in 0..6 {
            let a = std::f64::consts::PI / 3.0 * i as f64;
            verts.push((i + 1, vec![a.cos(), a.sin()]));
        }
        let tops: Vec<Vec<usize>> = (0..6).map(|i| vec![0, i + 1, (i + 1) % 6 + 1]).collect();
        let fan = MetricComplex::build(verts, &tops).unwrap();
        assert_eq!(fan.star(0).unwrap(), fan);

        let iso = MetricComplex::build(vec![(0, vec![0.0]), (1, vec![1.0]), (5, vec![3.0])], &[vec![0, 1]]).unwrap();
        let st = iso.star(5).unwrap();
        assert_eq!((st.count(0), st.count(1)), (1, 0));

        let path = ray_complex(1, 2).unwrap();
        let st = path.star(0).unwrap();
        assert_eq!(st.vertex_ids(), &[0, 1]);
        assert_eq!(st.count(1), 1);
        assert_eq!(path.star(9).unwrap_err(), Error::MissingVertex(9));
    }

    #[test]
    fn subdivision_counts() {
        let edge = MetricComplex::build(vec![(0, vec![0.0]), (1, vec![1.0])], &[vec![0, 1]]).unwrap();
        let sd = edge.barycentric_subdivide();
        assert_eq!((sd.count(0), sd.count(1)), (3, 2));
        let tri = MetricComplex::build(unit_triangle(), &[vec![0, 1, 2]]).unwrap();
        let (sd, map) = tri.barycentric_subdivision();
        assert_eq!(sd.count(2), 6);
        let b = map.barycenter_id(&tri, &[0, 1, 2]).unwrap();
        let c = sd.coords(b).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn euler_characteristic_of_simplex_is_one() {
        for k in 0..4 {
            assert_eq!(standard_simplex(k).euler_characteristic(), 1);
        }
    }
}
