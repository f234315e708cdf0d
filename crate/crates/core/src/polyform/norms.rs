use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::local::{basis_sets, LocalForm};
use super::{check_carrier, PolyForm};
use crate::cochain::check_exponent;
use crate::complex::{MetricComplex, PiSequence, Simplex};
use crate::error::{Error, Result};
use crate::quadrature::SimplexRule;

/// Default lattice resolution of [`PolyForm::sup_norm`].
pub const DEFAULT_LATTICE: usize = 8;

/// Largest number of nodes the adaptive rule may use on one simplex.
const MAX_NODES: usize = 1 << 21;
const ADAPTIVE_RTOL: f64 = 1e-12;

/// Quadrature choice for `L_p` norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Exact rule for even integer `p`, refinement until successive values
    /// agree to 1e-12 otherwise.
    #[default]
    Auto,
    /// Collapsed Gauss rule with this many points per axis.
    Points(usize),
}

/// Norms of one form.
#[derive(Clone, Debug, PartialEq)]
pub struct FormNormReport {
    pub lp: f64,
    pub sup_per_simplex: BTreeMap<Simplex, f64>,
    pub sl_pi: f64,
    pub omega_pi: f64,
}

/// Pointwise inner products of the basis `k`-covectors `ds_J` on a simplex:
/// `det` of the `(J, J')` block of the inverse edge Gram matrix, which is the
/// Gram matrix of the barycentric gradients.
pub(crate) fn covector_gram(k: &MetricComplex, t: &Simplex, degree: usize) -> DMatrix<f64> {
    let v = t.vertices();
    let m = t.dim();
    let sets = basis_sets(m, degree);
    if degree == 0 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let x0 = k.coords_unchecked(v[0]);
    let d = x0.len();
    let edges = DMatrix::from_fn(d, m, |r, c| k.coords_unchecked(v[c + 1])[r] - x0[r]);
    let ginv = (edges.transpose() * &edges).try_inverse().expect("nondegenerate simplex");
    DMatrix::from_fn(sets.len(), sets.len(), |a, b| {
        DMatrix::from_fn(degree, degree, |i, j| ginv[(sets[a][i], sets[b][j])]).determinant()
    })
}

fn pointwise(w: &LocalForm, gram: &DMatrix<f64>, s: &[f64]) -> f64 {
    let f = w.eval_coeffs(s);
    let mut acc = 0.0;
    for (a, fa) in f.iter().enumerate() {
        for (b, fb) in f.iter().enumerate() {
            acc += fa * gram[(a, b)] * fb;
        }
    }
    acc.max(0.0).sqrt()
}

/// `m! vol(t)`: the Jacobian of the barycentric chart.
fn chart_jacobian(k: &MetricComplex, t: &Simplex) -> f64 {
    let fact: f64 = (1..=t.dim()).map(|i| i as f64).product();
    fact * k.volume(t.vertices())
}

fn integral_of_power(w: &LocalForm, gram: &DMatrix<f64>, p: f64, quad: Quadrature) -> f64 {
    let m = w.dim();
    let eval = |n: usize| SimplexRule::collapsed(m, n).integrate(|s| pointwise(w, gram, s).powf(p));
    let deg = w.poly_degree() as usize;
    match quad {
        Quadrature::Points(n) => eval(n),
        Quadrature::Auto => {
            let even = p.fract() == 0.0 && (p as u64) % 2 == 0;
            let exact_degree = p.ceil() as usize * deg;
            let mut n = (exact_degree + m) / 2 + 1;
            let mut prev = eval(n);
            if even || m == 0 {
                return prev;
            }
            loop {
                n *= 2;
                if n.pow(m as u32) > MAX_NODES {
                    return prev;
                }
                let next = eval(n);
                if (next - prev).abs() <= ADAPTIVE_RTOL * next.abs() {
                    return next;
                }
                prev = next;
            }
        }
    }
}

fn exponent(pi: &PiSequence, k: usize) -> Result<f64> {
    pi.p(k)
        .ok_or_else(|| Error::BadExponent(format!("exponent sequence has no p_{k}")))
}

impl PolyForm {
    /// `(sum_T int_T |w|^p dx)^{1/p}` with the default quadrature.
    pub fn lp_norm(&self, k: &MetricComplex, p: f64) -> Result<f64> {
        self.lp_norm_with(k, p, Quadrature::Auto)
    }

    pub fn lp_norm_with(&self, k: &MetricComplex, p: f64, quad: Quadrature) -> Result<f64> {
        check_exponent(p)?;
        let mut total = 0.0;
        for (t, w) in &self.pieces {
            let gram = covector_gram(k, t, self.degree);
            total += chart_jacobian(k, t) * integral_of_power(w, &gram, p, quad);
        }
        Ok(total.powf(1.0 / p))
    }

    /// Largest `|w|` over the barycentric lattice with `r` steps per axis on
    /// the maximal simplex `t`. This is a lower bound for the true supremum.
    pub fn sup_norm(&self, k: &MetricComplex, t: &Simplex, r: usize) -> Result<f64> {
        check_carrier(k, t)?;
        let Some(w) = self.pieces.get(t) else { return Ok(0.0) };
        let gram = covector_gram(k, t, self.degree);
        let m = t.dim();
        let r = r.max(1);
        let mut a = vec![0usize; m];
        let mut best = 0.0f64;
        let mut s = vec![0.0; m];
        loop {
            for (si, &ai) in s.iter_mut().zip(&a) {
                *si = ai as f64 / r as f64;
            }
            best = best.max(pointwise(w, &gram, &s));
            // next lattice point with sum a_i <= r
            let mut i = m;
            loop {
                if i == 0 {
                    return Ok(best);
                }
                i -= 1;
                a[i] += 1;
                if a.iter().sum::<usize>() <= r {
                    break;
                }
                a[i] = 0;
            }
        }
    }

    /// `(sum_T sup_T |w|^{p_k})^{1/p_k} + (sum_T sup_T |dw|^{p_{k+1}})^{1/p_{k+1}}`
    /// over the maximal simplices, at lattice resolution [`DEFAULT_LATTICE`].
    pub fn sl_pi_norm(&self, k: &MetricComplex, pi: &PiSequence) -> Result<f64> {
        let deg = self.degree;
        let first = sup_sum(self, k, exponent(pi, deg)?)?;
        let dw = self.d();
        if dw.is_zero() {
            return Ok(first);
        }
        Ok(first + sup_sum(&dw, k, exponent(pi, deg + 1)?)?)
    }

    /// `||w||_{p_k} + ||dw||_{p_{k+1}}`.
    pub fn omega_pi_norm(&self, k: &MetricComplex, pi: &PiSequence) -> Result<f64> {
        let deg = self.degree;
        let first = self.lp_norm(k, exponent(pi, deg)?)?;
        let dw = self.d();
        if dw.is_zero() {
            return Ok(first);
        }
        Ok(first + dw.lp_norm(k, exponent(pi, deg + 1)?)?)
    }

    pub fn norm_report(&self, k: &MetricComplex, pi: &PiSequence) -> Result<FormNormReport> {
        let mut sup_per_simplex = BTreeMap::new();
        for t in k.maximal_simplices() {
            let v = self.sup_norm(k, &t, DEFAULT_LATTICE)?;
            sup_per_simplex.insert(t, v);
        }
        Ok(FormNormReport {
            lp: self.lp_norm(k, exponent(pi, self.degree)?)?,
            sup_per_simplex,
            sl_pi: self.sl_pi_norm(k, pi)?,
            omega_pi: self.omega_pi_norm(k, pi)?,
        })
    }
}

fn sup_sum(w: &PolyForm, k: &MetricComplex, p: f64) -> Result<f64> {
    let mut acc = 0.0;
    for t in w.pieces.keys() {
        acc += w.sup_norm(k, t, DEFAULT_LATTICE)?.powf(p);
    }
    Ok(acc.powf(1.0 / p))
}
