use std::collections::BTreeMap;

use smallvec::SmallVec;

use crate::quadrature::monomial_integral;

/// Exponent vector of a monomial.
pub type Exps = SmallVec<[u32; 4]>;

/// Sparse real polynomial in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exps, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], c);
        p
    }

    /// `coeff * prod x_i^{exps[i]}`.
    pub fn monomial(coeff: f64, exps: &[u32]) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coeff);
        p
    }

    /// The variable `x_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(1.0, &e)
    }

    /// `c + sum_i lin[i] x_i`.
    pub fn affine(c: f64, lin: &[f64]) -> Self {
        let n = lin.len();
        let mut p = Self::constant(n, c);
        for (i, &a) in lin.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(&e, a);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Adds `c` to the coefficient of `exps`, dropping it if it cancels.
    pub fn add_term(&mut self, exps: &[u32], c: f64) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        let key: Exps = SmallVec::from_slice(exps);
        let v = self.terms.entry(key.clone()).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (e, &c) in &other.terms {
            self.add_term(e, c);
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> Poly {
        if f == 0.0 {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), c * f)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        let mut e = vec![0u32; self.nvars];
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                for i in 0..self.nvars {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(&e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(&f, c * f64::from(e[i]));
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Composition `p(images[0], ..., images[n-1])`.
    pub fn substitute(&self, images: &[Poly], new_nvars: usize) -> Poly {
        debug_assert_eq!(images.len(), self.nvars);
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|q| vec![Poly::constant(new_nvars, 1.0), q.clone()]).collect();
        let mut out = Poly::zero(new_nvars);
        for (e, &c) in &self.terms {
            let mut term = Poly::constant(new_nvars, c);
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&images[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][k as usize]);
            }
            out.add_assign(&term);
        }
        out
    }

    /// Integral over the reference simplex `{x_i >= 0, sum x_i <= 1}`.
    pub fn reference_integral(&self) -> f64 {
        self.terms.iter().map(|(e, &c)| c * monomial_integral(e)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = x.add(&y).pow(2);
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.eval(&[1.0, 2.0]), 9.0);
        assert_eq!(p.derivative(0), x.scale(2.0).add(&y.scale(2.0)));
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn substitution_and_integral() {
        // x -> 1 - y on one variable
        let p = Poly::monomial(1.0, &[2]);
        let q = p.substitute(&[Poly::affine(1.0, &[-1.0])], 1);
        assert_eq!(q.eval(&[0.25]), 0.5625);
        // int_0^1 (1-y)^2 dy = 1/3
        assert!((q.reference_integral() - 1.0 / 3.0).abs() < 1e-16);
    }
}
