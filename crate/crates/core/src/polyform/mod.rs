//! Piecewise polynomial differential forms on metric complexes.
//!
//! A [`PolyForm`] carries one [`LocalForm`] per maximal simplex of its
//! complex, in the barycentric coordinates of that simplex. Missing pieces are
//! zero. Adjacent pieces must have equal traces on shared faces.

mod local;
mod norms;
mod poly;
mod prism;

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;

use crate::complex::{MetricComplex, Simplex};
use crate::error::{Error, Result};

pub use local::{bary_poly, basis_sets, BaryTerm, DiffSet, LocalForm};
pub use norms::{FormNormReport, Quadrature, DEFAULT_LATTICE};
pub use poly::{Exps, Poly};
pub use prism::{prism_complex, prism_extend};

/// Relative tolerance of the face-continuity check.
pub const CONTINUITY_TOL: f64 = 1e-9;

/// A piecewise polynomial `k`-form.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm {
    degree: usize,
    pieces: BTreeMap<Simplex, LocalForm>,
}

/// Position of each vertex of `face` inside `outer` (both ascending).
fn positions(face: &[usize], outer: &[usize]) -> Option<Vec<usize>> {
    face.iter().map(|v| outer.binary_search(v).ok()).collect()
}

fn check_carrier(k: &MetricComplex, t: &Simplex) -> Result<()> {
    let i = k
        .index_of(t.vertices())
        .ok_or_else(|| Error::MissingSimplex(t.clone()))?;
    if !k.coface_indices(t.dim(), i).is_empty() {
        return Err(Error::BadSubcomplex(format!("{t} is not a maximal simplex")));
    }
    Ok(())
}

impl PolyForm {
    pub fn zero(degree: usize) -> Self {
        PolyForm { degree, pieces: BTreeMap::new() }
    }

    /// Assembles a form from per-simplex pieces. Every carrier must be a
    /// maximal simplex of `k` and the pieces must agree on shared faces.
    pub fn from_pieces<I>(k: &MetricComplex, degree: usize, pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Simplex, LocalForm)>,
    {
        let mut out = Self::zero(degree);
        for (t, w) in pieces {
            check_carrier(k, &t)?;
            if w.dim() != t.dim() {
                return Err(Error::BadDimension(format!("piece of dimension {} on {t}", w.dim())));
            }
            if w.degree() != degree {
                return Err(Error::BadDegree(format!("piece of degree {} in a {degree}-form", w.degree())));
            }
            let slot = out.pieces.entry(t).or_insert_with(|| LocalForm::zero(w.dim(), degree));
            *slot = slot.add(&w);
        }
        out.pieces.retain(|_, w| !w.is_zero());
        out.check_continuity(k, CONTINUITY_TOL)?;
        Ok(out)
    }

    /// Builds a form from blocks of barycentric terms.
    pub fn from_barycentric(k: &MetricComplex, degree: usize, blocks: &[(Simplex, Vec<BaryTerm>)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(blocks.len());
        for (t, terms) in blocks {
            pieces.push((t.clone(), LocalForm::from_barycentric(t.dim(), degree, terms)?));
        }
        Self::from_pieces(k, degree, pieces)
    }

    /// Restricts the global form `sum_J f_J(x) dx_J`, with polynomials in the
    /// ambient coordinates, to every maximal simplex of `k`.
    pub fn from_ambient(k: &MetricComplex, degree: usize, terms: &[(Poly, Vec<usize>)]) -> Result<Self> {
        let n = k.ambient_dim();
        let mut global = LocalForm::zero(n, degree);
        for (f, dx) in terms {
            if f.nvars() != n || dx.len() != degree || dx.iter().any(|&i| i >= n) {
                return Err(Error::BadDimension(format!("term {dx:?} does not fit R^{n}")));
            }
            let mut term = LocalForm::function(f.clone());
            for &i in dx {
                term = term.wedge(&LocalForm::ds(n, i))?;
            }
            global = global.add(&term);
        }
        let mut pieces = Vec::new();
        for t in k.maximal_simplices() {
            let m = t.dim();
            let v = t.vertices();
            let x0 = k.coords_unchecked(v[0]);
            let images: Vec<Poly> = (0..n)
                .map(|r| {
                    let lin: Vec<f64> = (1..=m).map(|i| k.coords_unchecked(v[i])[r] - x0[r]).collect();
                    Poly::affine(x0[r], &lin)
                })
                .collect();
            pieces.push((t, global.pullback(&images, m)));
        }
        Self::from_pieces(k, degree, pieces)
    }

    /// A random global polynomial form of total degree `poly_degree`,
    /// restricted to `k`. With `integer` set the coefficients are small
    /// integers, so on complexes with integer coordinates all arithmetic is exact.
    pub fn random<R: Rng>(k: &MetricComplex, degree: usize, poly_degree: u32, integer: bool, rng: &mut R) -> Result<Self> {
        let n = k.ambient_dim();
        let mut terms = Vec::new();
        for dx in (0..n).combinations(degree) {
            let mut f = Poly::zero(n);
            let mut e = vec![0u32; n];
            loop {
                if e.iter().sum::<u32>() <= poly_degree && rng.gen_bool(0.6) {
                    let c = if integer {
                        f64::from(rng.gen_range(-3i32..=3))
                    } else {
                        rng.gen_range(-1.0..1.0)
                    };
                    f.add_term(&e, c);
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    e[i] += 1;
                    if e[i] <= poly_degree {
                        break;
                    }
                    e[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
            terms.push((f, dx));
        }
        Self::from_ambient(k, degree, &terms)
    }

    /// Assembles pieces known to be continuous.
    pub(crate) fn from_pieces_unchecked(degree: usize, pieces: BTreeMap<Simplex, LocalForm>) -> Self {
        let pieces = pieces.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        PolyForm { degree, pieces }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Simplex, &LocalForm)> + '_ {
        self.pieces.iter()
    }

    pub fn piece(&self, t: &Simplex) -> Option<&LocalForm> {
        self.pieces.get(t)
    }

    /// Piece on `t`, or the zero form when absent.
    pub(crate) fn piece_or_zero(&self, t: &Simplex) -> LocalForm {
        self.pieces
            .get(t)
            .cloned()
            .unwrap_or_else(|| LocalForm::zero(t.dim(), self.degree))
    }

    fn map_pieces<F: Fn(&LocalForm) -> LocalForm>(&self, degree: usize, f: F) -> PolyForm {
        let pieces = self
            .pieces
            .iter()
            .map(|(t, w)| (t.clone(), f(w)))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        PolyForm { degree, pieces }
    }

    pub fn scale(&self, c: f64) -> PolyForm {
        self.map_pieces(self.degree, |w| w.scale(c))
    }

    pub fn add(&self, other: &PolyForm) -> Result<PolyForm> {
        if self.degree != other.degree {
            return Err(Error::BadDegree(format!("adding degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        for (t, w) in &other.pieces {
            let sum = match out.pieces.get(t) {
                Some(v) => v.add(w),
                None => w.clone(),
            };
            if sum.is_zero() {
                out.pieces.remove(t);
            } else {
                out.pieces.insert(t.clone(), sum);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyForm) -> Result<PolyForm> {
        self.add(&other.scale(-1.0))
    }

    /// Exterior derivative, piece by piece.
    pub fn d(&self) -> PolyForm {
        self.map_pieces(self.degree + 1, LocalForm::d)
    }

    /// Wedge product. Pieces present in only one factor contribute zero.
    pub fn wedge(&self, other: &PolyForm) -> Result<PolyForm> {
        let degree = self.degree + other.degree;
        let mut pieces = BTreeMap::new();
        for (t, a) in &self.pieces {
            if degree > t.dim() {
                return Err(Error::BadDimension(format!(
                    "wedge of degrees {} and {} on the {}-simplex {t}",
                    self.degree,
                    other.degree,
                    t.dim()
                )));
            }
            if let Some(b) = other.pieces.get(t) {
                let w = a.wedge(b)?;
                if !w.is_zero() {
                    pieces.insert(t.clone(), w);
                }
            }
        }
        Ok(PolyForm { degree, pieces })
    }

    /// Tangential trace onto a simplex `face` of `k` (ascending ids), taken
    /// from its first maximal coface.
    pub fn trace(&self, k: &MetricComplex, face: &[usize]) -> Result<LocalForm> {
        let s = Simplex::new(face.iter().copied())?;
        let tops = k.maximal_cofaces(s.vertices());
        let t = tops.first().ok_or_else(|| Error::MissingSimplex(s.clone()))?;
        Ok(self.trace_from(t, s.vertices()))
    }

    fn trace_from(&self, t: &Simplex, face: &[usize]) -> LocalForm {
        let m = face.len() - 1;
        match self.pieces.get(t) {
            None => LocalForm::zero(m, self.degree),
            Some(w) => {
                let map = positions(face, t.vertices()).expect("face of carrier");
                w.pullback_simplicial(m, &map)
            }
        }
    }

    /// Checks that pieces on maximal simplices sharing a face have traces
    /// agreeing there up to `tol` relative to the largest coefficient.
    pub fn check_continuity(&self, k: &MetricComplex, tol: f64) -> Result<()> {
        let scale = self.pieces.values().map(LocalForm::max_abs_coeff).fold(1.0, f64::max);
        let mut seen: BTreeMap<Vec<usize>, LocalForm> = BTreeMap::new();
        for t in k.maximal_simplices() {
            let v = t.vertices();
            if t.dim() < self.degree {
                continue;
            }
            for size in self.degree + 1..=v.len() {
                for face in v.iter().copied().combinations(size) {
                    if face.len() == v.len() {
                        continue;
                    }
                    let tr = self.trace_from(&t, &face);
                    match seen.get(&face) {
                        None => {
                            seen.insert(face, tr);
                        }
                        Some(prev) => {
                            let mismatch = prev.add(&tr.scale(-1.0)).max_abs_coeff();
                            if mismatch > tol * scale {
                                return Err(Error::Discontinuous { face: Simplex::from_sorted(&face), mismatch });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Restriction to a subcomplex `s` of `k`.
    pub fn restrict(&self, k: &MetricComplex, s: &MetricComplex) -> Result<PolyForm> {
        if !k.has_subcomplex(s) {
            return Err(Error::BadSubcomplex("not a subcomplex of the carrier".into()));
        }
        let mut pieces = BTreeMap::new();
        for f in s.maximal_simplices() {
            if f.dim() < self.degree {
                continue;
            }
            let tops = k.maximal_cofaces(f.vertices());
            let w = self.trace_from(&tops[0], f.vertices());
            if !w.is_zero() {
                pieces.insert(f, w);
            }
        }
        Ok(PolyForm { degree: self.degree, pieces })
    }

    /// Oriented integral over `tau`, given as vertex ids in any order; the
    /// orientation is that order. This is the parametric integral with the
    /// ordered vertices as affine frame.
    pub fn integrate_oriented(&self, k: &MetricComplex, tau: &[usize]) -> Result<f64> {
        if tau.is_empty() || tau.len() - 1 != self.degree {
            return Err(Error::BadDimension(format!(
                "integrating a {}-form over {} vertices",
                self.degree,
                tau.len()
            )));
        }
        let s = Simplex::new(tau.iter().copied())?;
        if !k.contains(&s) {
            return Err(Error::MissingSimplex(s));
        }
        let inversions = tau.iter().tuple_combinations().filter(|(a, b)| a > b).count();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * self.trace(k, s.vertices())?.reference_integral())
    }

    /// Integral over `tau` in the volume-weighted convention
    /// `int_tau t^a dt_1 ^ ... ^ dt_m = vol(tau) m! prod a_i! / (m + sum a_i)!`,
    /// i.e. `m! vol(tau)` times [`PolyForm::integrate_oriented`].
    pub fn integrate(&self, k: &MetricComplex, tau: &[usize]) -> Result<f64> {
        let oriented = self.integrate_oriented(k, tau)?;
        let m = tau.len() - 1;
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        Ok(oriented * fact * k.volume(Simplex::new(tau.iter().copied())?.vertices()))
    }
}
