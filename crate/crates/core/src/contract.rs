//! Dense cochain complexes, their cohomology and contracting homotopies.
//!
//! `contract` runs the descending induction `h^n = eta^n`,
//! `alpha^{i-1} = 1 - h^i D_{i-1}`, `h^{i-1} = eta^{i-1} alpha^{i-1}` with
//! `eta^i` the pseudo-inverse of `D_{i-1}`.

use nalgebra::DMatrix;

use crate::complex::MetricComplex;
use crate::error::{Error, Result};

/// Largest complex `assemble` accepts, counted in simplices.
pub const MAX_SIMPLICES: usize = 2000;
/// Relative singular value cutoff for ranks and pseudo-inverses.
pub const RANK_TOL: f64 = 1e-10;
/// Tolerance for the homotopy identity and the closure of `alpha`.
pub const CONTRACT_TOL: f64 = 1e-8;

/// `0 -> A^0 -> A^1 -> ... -> A^n -> 0` with `maps[i] = D_i : A^i -> A^{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixComplex {
    dims: Vec<usize>,
    maps: Vec<DMatrix<f64>>,
    augmented: bool,
}

impl MatrixComplex {
    /// Checks that `maps[i]` is `dims[i+1] x dims[i]`.
    pub fn new(dims: Vec<usize>, maps: Vec<DMatrix<f64>>) -> Result<Self> {
        if dims.is_empty() {
            if maps.is_empty() {
                return Ok(MatrixComplex { dims, maps, augmented: false });
            }
            return Err(Error::BadDimension("maps given for an empty complex".into()));
        }
        if maps.len() + 1 != dims.len() {
            return Err(Error::BadDimension(format!("{} spaces need {} maps, got {}", dims.len(), dims.len() - 1, maps.len())));
        }
        for (i, d) in maps.iter().enumerate() {
            if d.shape() != (dims[i + 1], dims[i]) {
                return Err(Error::BadDimension(format!(
                    "D_{i} is {:?}, expected ({}, {})",
                    d.shape(),
                    dims[i + 1],
                    dims[i]
                )));
            }
        }
        Ok(MatrixComplex { dims, maps, augmented: false })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[DMatrix<f64>] {
        &self.maps
    }

    /// `D_i`, or `None` past the top degree.
    pub fn map(&self, i: usize) -> Option<&DMatrix<f64>> {
        self.maps.get(i)
    }

    /// Number of degrees.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// True when degree 0 is the augmentation space `R`.
    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    /// `0 -> R -> A^0 -> ...` with `1 -> (1, ..., 1)`. Degrees shift up by one.
    pub fn augment(&self) -> MatrixComplex {
        let mut dims = vec![1];
        dims.extend(&self.dims);
        let mut maps = Vec::with_capacity(self.maps.len() + 1);
        if let Some(&d0) = self.dims.first() {
            maps.push(DMatrix::from_element(d0, 1, 1.0));
        }
        maps.extend(self.maps.iter().cloned());
        MatrixComplex { dims, maps, augmented: true }
    }

    /// `max |D_{i+1} D_i|` over degrees and entries.
    pub fn composition_residual(&self) -> f64 {
        self.maps.windows(2).map(|w| max_abs(&(&w[1] * &w[0]))).fold(0.0, f64::max)
    }

    /// `D_{i-1}` as a matrix, zero when `i = 0`.
    fn incoming(&self, i: usize) -> DMatrix<f64> {
        if i == 0 {
            DMatrix::zeros(self.dims[0], 0)
        } else {
            self.maps[i - 1].clone()
        }
    }

    /// `D_i`, zero at the top degree.
    fn outgoing(&self, i: usize) -> DMatrix<f64> {
        self.maps.get(i).cloned().unwrap_or_else(|| DMatrix::zeros(0, self.dims[i]))
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Coboundary matrices of `K` in the canonical simplex order.
pub fn assemble(k: &MetricComplex) -> Result<MatrixComplex> {
    let total = k.total_count();
    if total > MAX_SIMPLICES {
        return Err(Error::TooLarge(format!("{total} simplices, limit {MAX_SIMPLICES}")));
    }
    if k.is_empty() {
        return MatrixComplex::new(Vec::new(), Vec::new());
    }
    let top = k.dim();
    let dims: Vec<usize> = (0..=top).map(|i| k.count(i)).collect();
    let mut maps = Vec::with_capacity(top);
    for i in 0..top {
        let mut d = DMatrix::zeros(dims[i + 1], dims[i]);
        for (row, tau) in k.simplices(i + 1).enumerate() {
            for j in 0..tau.len() {
                let face: Vec<usize> = tau.iter().enumerate().filter(|(q, _)| *q != j).map(|(_, &v)| v).collect();
                let col = k.index_of(&face).expect("faces are present");
                d[(row, col)] = if j % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
        maps.push(d);
    }
    MatrixComplex::new(dims, maps)
}

/// Thin SVD `(U, sigma, V)` computed by faer; nalgebra's iteration can stall
/// on rank-deficient input.
fn thin_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f.thin_svd().expect("svd converges");
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    (
        DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        (0..k).map(|i| s[i]).collect(),
        DMatrix::from_fn(m.ncols(), k, |i, j| v[(i, j)]),
    )
}

fn singular_cutoff(s: &[f64]) -> f64 {
    RANK_TOL * s.iter().fold(0.0f64, |a, x| a.max(*x))
}

/// Numerical rank with cutoff `RANK_TOL * sigma_max`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (_, s, _) = thin_svd(m);
    let cut = singular_cutoff(&s);
    s.iter().filter(|x| **x > cut && **x > 0.0).count()
}

/// Moore-Penrose inverse with the same cutoff.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let (u, s, v) = thin_svd(m);
    let cut = singular_cutoff(&s);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (j, &sj) in s.iter().enumerate() {
        if sj > cut && sj > 0.0 {
            out += v.column(j) * u.column(j).transpose() / sj;
        }
    }
    out
}

/// `dim ker D_i - rank D_{i-1}` per degree.
pub fn cohomology_dims(m: &MatrixComplex) -> Vec<usize> {
    let ranks: Vec<usize> = m.maps.iter().map(rank).collect();
    (0..m.len())
        .map(|i| {
            let out = ranks.get(i).copied().unwrap_or(0);
            let inc = if i == 0 { 0 } else { ranks[i - 1] };
            m.dims[i] - out - inc
        })
        .collect()
}

/// Orthonormal basis of `ker m` as columns.
fn kernel_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    // the kernel projector 1 - m^+ m has eigenvalues 0 and 1 only
    let p = DMatrix::identity(n, n) - pseudo_inverse(m) * m;
    let p = (&p + p.transpose()) * 0.5;
    let eig = p.symmetric_eigen();
    let cols: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > 0.5).collect();
    DMatrix::from_fn(n, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])])
}

/// `h^i : A^i -> A^{i-1}` for every degree; `h^0` has no rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction {
    h: Vec<DMatrix<f64>>,
    lowest: usize,
}

impl Contraction {
    /// The zero homotopy, claimed in every degree.
    pub fn zero(m: &MatrixComplex) -> Self {
        let h = (0..m.len())
            .map(|i| DMatrix::zeros(if i == 0 { 0 } else { m.dims[i - 1] }, m.dims[i]))
            .collect();
        Contraction { h, lowest: 0 }
    }

    /// Wraps given matrices; the identity is claimed from degree `lowest` on.
    pub fn from_matrices(h: Vec<DMatrix<f64>>, lowest: usize) -> Self {
        Contraction { h, lowest }
    }

    pub fn h(&self, i: usize) -> Option<&DMatrix<f64>> {
        self.h.get(i)
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.h
    }

    /// First degree where `D h + h D = 1` is claimed.
    pub fn lowest(&self) -> usize {
        self.lowest
    }
}

/// One step of the induction at degree `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionStep {
    pub degree: usize,
    /// `max |D_i alpha^i|`
    pub alpha_closure: f64,
    /// spectral norm of `D_{i-1} h^i - alpha^i`
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionFailure {
    /// First degree, going down, where `D_{i-1} eta = 1` has no solution on `Z^i`.
    pub degree: usize,
    pub residual: f64,
    /// Every degree whose cycles are not all boundaries.
    pub obstructed: Vec<usize>,
    pub steps: Vec<ContractionStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ContractOutcome {
    Contracted { contraction: Contraction, steps: Vec<ContractionStep> },
    Failed(ContractionFailure),
}

impl ContractOutcome {
    pub fn contraction(&self) -> Option<&Contraction> {
        match self {
            ContractOutcome::Contracted { contraction, .. } => Some(contraction),
            ContractOutcome::Failed(_) => None,
        }
    }
}

/// Spectral norm of `(D_{i-1} D_{i-1}^+ - 1)` on `ker D_i`: zero exactly when
/// every cycle in degree `i` is a boundary.
fn obstruction(m: &MatrixComplex, i: usize) -> f64 {
    let z = kernel_basis(&m.outgoing(i));
    if z.ncols() == 0 {
        return 0.0;
    }
    let d = m.incoming(i);
    let r = &d * pseudo_inverse(&d) * &z - &z;
    spectral_norm(&r)
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    thin_svd(m).1.iter().fold(0.0, |a, x| a.max(*x))
}

/// Descending induction for a contracting homotopy. Unaugmented complexes
/// are contracted in degrees `>= 1` only (`h^0 = 0`).
pub fn contract(m: &MatrixComplex) -> ContractOutcome {
    let len = m.len();
    let lowest = usize::from(!m.augmented);
    let mut h: Vec<DMatrix<f64>> = Contraction::zero(m).h;
    let mut steps = Vec::new();
    if len == 0 {
        return ContractOutcome::Contracted { contraction: Contraction { h, lowest: 0 }, steps };
    }
    for i in (lowest..len).rev() {
        // alpha^i = 1 - h^{i+1} D_i
        let mut alpha = DMatrix::identity(m.dims[i], m.dims[i]);
        if i + 1 < len {
            alpha -= &h[i + 1] * &m.maps[i];
        }
        let alpha_closure = max_abs(&(m.outgoing(i) * &alpha));
        let d = m.incoming(i);
        let hi = pseudo_inverse(&d) * &alpha;
        let residual = spectral_norm(&(&d * &hi - &alpha));
        steps.push(ContractionStep { degree: i, alpha_closure, residual });
        if residual > CONTRACT_TOL || alpha_closure > CONTRACT_TOL {
            let obstructed = (0..len).filter(|&j| obstruction(m, j) > CONTRACT_TOL).collect();
            return ContractOutcome::Failed(ContractionFailure { degree: i, residual, obstructed, steps });
        }
        if i > 0 {
            h[i] = hi;
        }
    }
    // an unaugmented complex may still be exact in degree 0
    let mut lowest = lowest;
    if lowest == 1 {
        let mut alpha = DMatrix::identity(m.dims[0], m.dims[0]);
        if len > 1 {
            alpha -= &h[1] * &m.maps[0];
        }
        if max_abs(&alpha) <= CONTRACT_TOL {
            lowest = 0;
        }
    }
    ContractOutcome::Contracted { contraction: Contraction { h, lowest }, steps }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    /// `max |D_{i-1} h^i + h^{i+1} D_i - 1|` per degree
    pub per_degree: Vec<f64>,
    /// maximum over the degrees the contraction claims
    pub max_residual: f64,
    pub passes: bool,
}

/// Entrywise residual of the homotopy identity in every degree.
pub fn verify_contraction(m: &MatrixComplex, h: &Contraction, tol: f64) -> Result<ContractionReport> {
    if h.h.len() != m.len() {
        return Err(Error::BadDimension(format!("{} homotopy maps for {} degrees", h.h.len(), m.len())));
    }
    let mut per_degree = Vec::with_capacity(m.len());
    for i in 0..m.len() {
        let expect = (if i == 0 { 0 } else { m.dims[i - 1] }, m.dims[i]);
        if h.h[i].shape() != expect {
            return Err(Error::BadDimension(format!("h^{i} is {:?}, expected {:?}", h.h[i].shape(), expect)));
        }
        let mut r = -DMatrix::identity(m.dims[i], m.dims[i]);
        if i > 0 {
            r += &m.maps[i - 1] * &h.h[i];
        }
        if i + 1 < m.len() {
            r += &h.h[i + 1] * &m.maps[i];
        }
        per_degree.push(max_abs(&r));
    }
    let max_residual = per_degree.iter().skip(h.lowest).fold(0.0f64, |a, x| a.max(*x));
    Ok(ContractionReport { per_degree, max_residual, passes: max_residual <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{regular_simplex, simplex_boundary, standard_simplex};

    #[test]
    fn single_edge() {
        let m = assemble(&standard_simplex(1)).unwrap();
        assert_eq!(m.dims(), &[2, 1]);
        assert_eq!(m.map(0).unwrap(), &DMatrix::from_row_slice(1, 2, &[-1.0, 1.0]));
    }

    #[test]
    fn composition_vanishes() {
        let m = assemble(&regular_simplex(3)).unwrap();
        assert_eq!(m.composition_residual(), 0.0);
        assert_eq!(m.dims(), &[4, 6, 4, 1]);
    }

    #[test]
    fn betti_numbers() {
        assert_eq!(cohomology_dims(&assemble(&simplex_boundary(2)).unwrap()), vec![1, 1]);
        assert_eq!(cohomology_dims(&assemble(&simplex_boundary(3)).unwrap()), vec![1, 0, 1]);
        assert_eq!(cohomology_dims(&assemble(&regular_simplex(3)).unwrap()), vec![1, 0, 0, 0]);
        assert_eq!(cohomology_dims(&assemble(&regular_simplex(2)).unwrap().augment()), vec![0, 0, 0, 0]);
    }

    #[test]
    fn identity_complex() {
        let plain = MatrixComplex::new(vec![1, 1], vec![DMatrix::identity(1, 1)]).unwrap();
        let h = Contraction::from_matrices(vec![DMatrix::zeros(0, 1), DMatrix::identity(1, 1)], 0);
        let rep = verify_contraction(&plain, &h, 0.0).unwrap();
        assert_eq!(rep.per_degree, vec![0.0, 0.0]);
        match contract(&plain) {
            ContractOutcome::Contracted { contraction, .. } => {
                assert_eq!(contraction.h(1).unwrap()[(0, 0)], 1.0);
                assert_eq!(contraction.lowest(), 0);
                assert!(verify_contraction(&plain, &contraction, 0.0).unwrap().passes);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn triangle_augmented() {
        let m = assemble(&regular_simplex(2)).unwrap().augment();
        let out = contract(&m);
        let ContractOutcome::Contracted { contraction, steps } = &out else { panic!("{out:?}") };
        assert!(steps.iter().all(|s| s.alpha_closure <= 1e-8));
        let rep = verify_contraction(&m, contraction, 1e-10).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert_eq!(contraction.lowest(), 0);
    }

    #[test]
    fn circle_fails_at_one() {
        let m = assemble(&simplex_boundary(2)).unwrap();
        match contract(&m) {
            ContractOutcome::Failed(f) => {
                assert_eq!(f.degree, 1);
                assert!((f.residual - 1.0).abs() < 1e-10, "{}", f.residual);
                assert_eq!(f.obstructed, vec![0, 1]);
            }
            other => panic!("{other:?}"),
        }
        match contract(&m.augment()) {
            ContractOutcome::Failed(f) => assert_eq!(f.obstructed, vec![2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_homotopy() {
        let m = assemble(&regular_simplex(2)).unwrap();
        let rep = verify_contraction(&m, &Contraction::zero(&m), 1e-8).unwrap();
        assert_eq!(rep.max_residual, 1.0);
        let empty = MatrixComplex::new(vec![], vec![]).unwrap();
        assert!(verify_contraction(&empty, &Contraction::zero(&empty), 0.0).unwrap().passes);
    }

    #[test]
    fn too_large() {
        let k = crate::complex::ray_complex(1, 1500).unwrap();
        assert!(matches!(assemble(&k), Err(Error::TooLarge(_))));
    }
}
