//! Sparse simplicial cochains, the coboundary and counting-measure norms.

use std::collections::BTreeMap;
use std::fmt;

use crate::complex::{MetricComplex, PiSequence, Simplex};
use crate::error::{Error, Result};

/// A real-valued function on the `k`-simplices of a complex. Absent entries
/// are zero and explicit zeros are never stored.
#[derive(Clone)]
pub struct Cochain<'a> {
    complex: &'a MetricComplex,
    degree: usize,
    values: BTreeMap<usize, f64>,
}

impl<'a> Cochain<'a> {
    pub fn zero(complex: &'a MetricComplex, degree: usize) -> Self {
        Cochain { complex, degree, values: BTreeMap::new() }
    }

    /// Builds a cochain from `(key, value)` pairs; later pairs overwrite earlier ones.
    pub fn from_values<I, K>(complex: &'a MetricComplex, degree: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<[usize]>,
    {
        let mut c = Self::zero(complex, degree);
        for (key, v) in entries {
            c.set(key.as_ref(), v)?;
        }
        Ok(c)
    }

    /// Characteristic cochain of a simplex.
    pub fn indicator(complex: &'a MetricComplex, sigma: &Simplex) -> Result<Self> {
        Self::from_values(complex, sigma.dim(), [(sigma.vertices(), 1.0)])
    }

    /// Sets the value on `key` (given in ascending order).
    pub fn set(&mut self, key: &[usize], value: f64) -> Result<()> {
        let missing = || Error::MissingSimplex(Simplex::new(key.iter().copied()).unwrap_or_else(|_| Simplex::from_sorted(&[])));
        if key.len() != self.degree + 1 {
            return Err(missing());
        }
        let i = self.complex.index_of(key).ok_or_else(missing)?;
        self.set_index(i, value);
        Ok(())
    }

    pub(crate) fn set_index(&mut self, i: usize, value: f64) {
        if value == 0.0 {
            self.values.remove(&i);
        } else {
            self.values.insert(i, value);
        }
    }

    pub fn complex(&self) -> &'a MetricComplex {
        self.complex
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Value at a key; 0 for absent or foreign keys.
    pub fn get(&self, key: &[usize]) -> f64 {
        if key.len() != self.degree + 1 {
            return 0.0;
        }
        self.complex
            .index_of(key)
            .and_then(|i| self.values.get(&i).copied())
            .unwrap_or(0.0)
    }

    pub fn get_index(&self, i: usize) -> f64 {
        self.values.get(&i).copied().unwrap_or(0.0)
    }

    /// Number of stored (nonzero) entries.
    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries as `(key, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&'a [usize], f64)> + '_ {
        let k = self.degree;
        let complex = self.complex;
        self.values.iter().map(move |(&i, &v)| (complex.simplex_at(k, i), v))
    }

    pub(crate) fn iter_indexed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&i, &v)| (i, v))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.complex, self.degree);
        for (i, v) in self.iter_indexed() {
            out.set_index(i, v * factor);
        }
        out
    }

    /// Sum of two cochains of equal degree on the same complex.
    pub fn add(&self, other: &Cochain<'_>) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (i, v) in other.iter_indexed() {
            let s = out.get_index(i) + v;
            out.set_index(i, s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Cochain<'_>) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn check_compatible(&self, other: &Cochain<'_>) -> Result<()> {
        if !std::ptr::eq(self.complex, other.complex) && self.complex != other.complex {
            return Err(Error::BadDimension("cochains live on different complexes".into()));
        }
        if self.degree != other.degree {
            return Err(Error::BadDimension(format!(
                "degree {} vs degree {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// `(dc)(tau) = sum_i (-1)^i c(tau without its i-th vertex)`, vertices ascending.
    pub fn coboundary(&self) -> Cochain<'a> {
        let k = self.degree;
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        if k + 1 <= self.complex.dim() {
            for (i, v) in self.iter_indexed() {
                let sigma = self.complex.simplex_at(k, i);
                for &j in self.complex.coface_indices(k, i) {
                    let tau = self.complex.simplex_at(k + 1, j);
                    let pos = missing_position(sigma, tau);
                    let signed = if pos % 2 == 0 { v } else { -v };
                    *acc.entry(j).or_insert(0.0) += signed;
                }
            }
        }
        acc.retain(|_, v| *v != 0.0);
        Cochain { complex: self.complex, degree: k + 1, values: acc }
    }

    /// Counting-measure `l_p` norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        let s: f64 = self.values.values().map(|v| v.abs().powf(p)).sum();
        Ok(s.powf(1.0 / p))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `||c||_{p_k} + ||dc||_{p_{k+1}}`; the second term is absent in top degree.
    pub fn pi_norm(&self, pi: &PiSequence) -> Result<f64> {
        let k = self.degree;
        let pk = pi
            .p(k)
            .ok_or_else(|| Error::BadExponent(format!("exponent sequence has no p_{k}")))?;
        let base = self.lp_norm(pk)?;
        let dc = self.coboundary();
        if dc.values.is_empty() {
            return Ok(base);
        }
        let pk1 = pi
            .p(k + 1)
            .ok_or_else(|| Error::BadExponent(format!("exponent sequence has no p_{}", k + 1)))?;
        Ok(base + dc.lp_norm(pk1)?)
    }
}

/// Position in `tau` of the single vertex not in `sigma`.
pub(crate) fn missing_position(sigma: &[usize], tau: &[usize]) -> usize {
    tau.iter()
        .zip(sigma.iter().map(Some).chain(std::iter::once(None)))
        .position(|(t, s)| s != Some(t))
        .unwrap_or(tau.len() - 1)
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::BadExponent(format!("p = {p} is not in [1, inf)")))
    }
}

impl PartialEq for Cochain<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree
            && (std::ptr::eq(self.complex, other.complex) || self.complex == other.complex)
            && self.values == other.values
    }
}

impl fmt::Debug for Cochain<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.iter().map(|(k, v)| (Simplex::from_sorted(k), v)))
            .finish()
    }
}
