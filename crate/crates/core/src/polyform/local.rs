use std::collections::BTreeMap;

use itertools::Itertools;
use smallvec::SmallVec;

use super::poly::Poly;
use crate::error::{Error, Result};

/// Strictly increasing set of reduced differential indices.
pub type DiffSet = SmallVec<[usize; 4]>;

/// A polynomial `k`-form on one `m`-simplex, written in the reduced
/// barycentric coordinates `s_1..s_m` (with `t_0 = 1 - sum s_i` eliminated).
/// Variable and differential indices are zero-based: index `i` stands for
/// `s_{i+1}`. This representation is unique, so equality is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalForm {
    dim: usize,
    degree: usize,
    terms: BTreeMap<DiffSet, Poly>,
}

/// One term `coeff * t^exps dt_{diffs}` in the full barycentric variables
/// `t_0..t_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaryTerm {
    pub coeff: f64,
    pub exps: Vec<u32>,
    pub diffs: Vec<usize>,
}

impl BaryTerm {
    pub fn new(coeff: f64, exps: Vec<u32>, diffs: Vec<usize>) -> Self {
        BaryTerm { coeff, exps, diffs }
    }
}

/// `t_j` on an `m`-simplex as a polynomial in the reduced variables.
pub fn bary_poly(m: usize, j: usize) -> Poly {
    if j == 0 {
        Poly::affine(1.0, &vec![-1.0; m])
    } else {
        Poly::var(m, j - 1)
    }
}

/// Sign of the permutation that sorts `a ++ b`; zero if they intersect.
fn merge_sign(a: &[usize], b: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return 0.0;
            }
            if x > y {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 { 1.0 } else { -1.0 }
}

fn merged(a: &[usize], b: &[usize]) -> DiffSet {
    let mut v: DiffSet = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

impl LocalForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        LocalForm { dim, degree, terms: BTreeMap::new() }
    }

    /// The 0-form `f`.
    pub fn function(f: Poly) -> Self {
        let mut out = Self::zero(f.nvars(), 0);
        out.add_term(DiffSet::new(), f);
        out
    }

    /// `ds_i` (zero-based reduced index).
    pub fn ds(dim: usize, i: usize) -> Self {
        let mut out = Self::zero(dim, 1);
        out.add_term(SmallVec::from_slice(&[i]), Poly::constant(dim, 1.0));
        out
    }

    /// `dt_j` in full barycentric indexing, `j in 0..=dim`.
    pub fn dt(dim: usize, j: usize) -> Self {
        Self::function(bary_poly(dim, j)).d()
    }

    /// Builds a form from terms in the full variables `t_0..t_m`.
    pub fn from_barycentric(dim: usize, degree: usize, terms: &[BaryTerm]) -> Result<Self> {
        if degree > dim {
            return Err(Error::BadDegree(format!("{degree}-form on a {dim}-simplex")));
        }
        let vars: Vec<Poly> = (0..=dim).map(|j| bary_poly(dim, j)).collect();
        let mut out = Self::zero(dim, degree);
        for t in terms {
            if t.exps.len() != dim + 1 {
                return Err(Error::BadDimension(format!(
                    "monomial has {} exponents, expected {}",
                    t.exps.len(),
                    dim + 1
                )));
            }
            if t.diffs.len() != degree
                || t.diffs.windows(2).any(|w| w[0] >= w[1])
                || t.diffs.iter().any(|&j| j > dim)
            {
                return Err(Error::BadDegree(format!(
                    "differential index set {:?} is not an increasing {degree}-subset of 0..={dim}",
                    t.diffs
                )));
            }
            let mut f = Poly::constant(dim, t.coeff);
            for (j, &a) in t.exps.iter().enumerate() {
                if a > 0 {
                    f = f.mul(&vars[j].pow(a));
                }
            }
            let mut term = Self::function(f);
            for &j in &t.diffs {
                term = term.wedge(&Self::dt(dim, j))?;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Terms expressed in the full variables with `t_0` absent (exponent and
    /// differential index 0 never appear).
    pub fn to_barycentric(&self) -> Vec<BaryTerm> {
        let mut out = Vec::new();
        for (j, f) in &self.terms {
            for (e, c) in f.terms() {
                let mut exps = vec![0];
                exps.extend_from_slice(e);
                out.push(BaryTerm::new(c, exps, j.iter().map(|i| i + 1).collect()));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Poly)> + '_ {
        self.terms.iter().map(|(j, f)| (j.as_slice(), f))
    }

    /// Coefficient of `ds_J`.
    pub fn coefficient(&self, j: &[usize]) -> Option<&Poly> {
        self.terms.get(j)
    }

    pub fn add_term(&mut self, j: DiffSet, f: Poly) {
        debug_assert_eq!(j.len(), self.degree);
        if f.is_zero() {
            return;
        }
        let entry = self.terms.entry(j.clone()).or_insert_with(|| Poly::zero(self.dim));
        entry.add_assign(&f);
        if entry.is_zero() {
            self.terms.remove(&j);
        }
    }

    pub fn add(&self, other: &LocalForm) -> LocalForm {
        debug_assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        let mut out = self.clone();
        for (j, f) in &other.terms {
            out.add_term(j.clone(), f.clone());
        }
        out
    }

    pub fn scale(&self, c: f64) -> LocalForm {
        let mut out = Self::zero(self.dim, self.degree);
        for (j, f) in &self.terms {
            out.add_term(j.clone(), f.scale(c));
        }
        out
    }

    /// `f * self` for a function `f`.
    pub fn mul_poly(&self, f: &Poly) -> LocalForm {
        let mut out = Self::zero(self.dim, self.degree);
        for (j, g) in &self.terms {
            out.add_term(j.clone(), g.mul(f));
        }
        out
    }

    pub fn wedge(&self, other: &LocalForm) -> Result<LocalForm> {
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::BadDimension(format!(
                "wedge of degrees {} and {} exceeds dimension {}",
                self.degree, other.degree, self.dim
            )));
        }
        let mut out = Self::zero(self.dim, degree);
        for (a, f) in &self.terms {
            for (b, g) in &other.terms {
                let s = merge_sign(a, b);
                if s != 0.0 {
                    out.add_term(merged(a, b), f.mul(g).scale(s));
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative. On a top-degree form the result is the (empty)
    /// zero form of degree `dim + 1`.
    pub fn d(&self) -> LocalForm {
        let mut out = Self::zero(self.dim, self.degree + 1);
        for (j, f) in &self.terms {
            for i in 0..self.dim {
                if j.contains(&i) {
                    continue;
                }
                let g = f.derivative(i);
                if g.is_zero() {
                    continue;
                }
                let s = merge_sign(&[i], j);
                out.add_term(merged(&[i], j), g.scale(s));
            }
        }
        out
    }

    /// Pullback along the polynomial map sending old variable `i` to
    /// `images[i]`, a polynomial in `new_dim` variables.
    pub fn pullback(&self, images: &[Poly], new_dim: usize) -> LocalForm {
        debug_assert_eq!(images.len(), self.dim);
        let diffs: Vec<LocalForm> = images.iter().map(|q| Self::function(q.clone()).d()).collect();
        let mut out = Self::zero(new_dim, self.degree);
        if self.degree > new_dim {
            return out;
        }
        for (j, f) in &self.terms {
            let mut term = Self::function(f.substitute(images, new_dim));
            for &i in j {
                term = term.wedge(&diffs[i]).expect("degree checked");
            }
            out = out.add(&term);
        }
        out
    }

    /// Pullback along the simplicial map that sends vertex `p` of a
    /// `new_dim`-simplex to vertex `map[p]` of this one.
    pub fn pullback_simplicial(&self, new_dim: usize, map: &[usize]) -> LocalForm {
        debug_assert_eq!(map.len(), new_dim + 1);
        let images: Vec<Poly> = (1..=self.dim)
            .map(|j| {
                let mut q = Poly::zero(new_dim);
                for (p, &b) in map.iter().enumerate() {
                    if b == j {
                        q.add_assign(&bary_poly(new_dim, p));
                    }
                }
                q
            })
            .collect();
        self.pullback(&images, new_dim)
    }

    /// Coefficients at a point, ordered as [`basis_sets`].
    pub fn eval_coeffs(&self, s: &[f64]) -> Vec<f64> {
        basis_sets(self.dim, self.degree)
            .iter()
            .map(|j| self.terms.get(j.as_slice()).map_or(0.0, |f| f.eval(s)))
            .collect()
    }

    /// Largest total degree among the coefficient polynomials.
    pub fn poly_degree(&self) -> u32 {
        self.terms.values().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, f| m.max(f.max_abs_coeff()))
    }

    /// Integral over the reference simplex with the orientation of
    /// `ds_1 ^ ... ^ ds_m`; zero unless the degree is the dimension.
    pub fn reference_integral(&self) -> f64 {
        if self.degree != self.dim {
            return 0.0;
        }
        let top: DiffSet = (0..self.dim).collect();
        self.terms.get(&top).map_or(0.0, Poly::reference_integral)
    }
}

/// Canonical list of the increasing `k`-subsets of `0..m`.
pub fn basis_sets(m: usize, k: usize) -> Vec<DiffSet> {
    (0..m).combinations(k).map(|c| c.into_iter().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_of_coordinate() {
        // d t_1 on a triangle is ds_1
        let w = LocalForm::function(bary_poly(2, 1)).d();
        assert_eq!(w, LocalForm::ds(2, 0));
        // d t_0 = -ds_1 - ds_2
        let w0 = LocalForm::dt(2, 0);
        assert_eq!(w0, LocalForm::ds(2, 0).add(&LocalForm::ds(2, 1)).scale(-1.0));
    }

    #[test]
    fn wedge_rules() {
        let a = LocalForm::ds(3, 0);
        let b = LocalForm::ds(3, 1);
        assert!(a.wedge(&a).unwrap().is_zero());
        assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(-1.0));
        let top = a.wedge(&b).unwrap().wedge(&LocalForm::ds(3, 2)).unwrap();
        assert!(matches!(top.wedge(&a), Err(Error::BadDimension(_))));
    }

    #[test]
    fn edge_whitney_form_is_dt1() {
        // t_0 dt_1 - t_1 dt_0 on an edge with t_0 = 1 - t_1 is dt_1, and d of it is 0
        let w = LocalForm::from_barycentric(
            1,
            1,
            &[BaryTerm::new(1.0, vec![1, 0], vec![1]), BaryTerm::new(-1.0, vec![0, 1], vec![0])],
        )
        .unwrap();
        assert_eq!(w, LocalForm::ds(1, 0));
        assert!(w.d().is_zero());
    }

    #[test]
    fn barycentric_validation() {
        assert!(LocalForm::from_barycentric(2, 1, &[BaryTerm::new(1.0, vec![1, 0], vec![1])]).is_err());
        assert!(LocalForm::from_barycentric(2, 2, &[BaryTerm::new(1.0, vec![0, 0, 0], vec![2, 1])]).is_err());
        assert!(LocalForm::from_barycentric(1, 2, &[]).is_err());
    }

    #[test]
    fn simplicial_pullback_trace() {
        // dt_1 on a triangle, traced to the edge [v0, v1]: dt_1 there
        let w = LocalForm::dt(2, 1);
        assert_eq!(w.pullback_simplicial(1, &[0, 1]), LocalForm::ds(1, 0));
        // traced to [v0, v2]: t_1 vanishes
        assert!(w.pullback_simplicial(1, &[0, 2]).is_zero());
    }

    #[test]
    fn round_trip_barycentric() {
        let w = LocalForm::from_barycentric(2, 1, &[BaryTerm::new(2.0, vec![1, 1, 0], vec![0])]).unwrap();
        let back = LocalForm::from_barycentric(2, 1, &w.to_barycentric()).unwrap();
        assert_eq!(w, back);
    }
}
