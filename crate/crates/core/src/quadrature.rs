//! Gauss rules on intervals and collapsed (Duffy) tensor rules on simplices.

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[0, 1]`, ordered by increasing node.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    let rule = GaussLegendre::new(n).expect("degree >= 2");
    let mut pts: Vec<(f64, f64)> = rule
        .nodes()
        .zip(rule.weights())
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// `int_a^b f` with an `n`-point Gauss-Legendre rule.
pub fn integrate_interval<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    gauss_legendre_unit(n)
        .iter()
        .map(|&(x, w)| w * f(a + (b - a) * x))
        .sum::<f64>()
        * (b - a)
}

/// A rule on the reference simplex `{s_i >= 0, sum s_i <= 1}` in reduced
/// coordinates; weights sum to `1 / m!`.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Collapsed Gauss-Legendre rule with `n` points per axis. Exact for
    /// polynomials of total degree at most `2n - m`.
    pub fn collapsed(dim: usize, n: usize) -> Self {
        if dim == 0 {
            return SimplexRule { dim, points: vec![vec![]], weights: vec![1.0] };
        }
        let gl = gauss_legendre_unit(n);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            // s_j = u_j * prod_{i<j} (1 - u_i); the Jacobian is the product of
            // those prefactors
            let mut s = Vec::with_capacity(dim);
            let mut rest = 1.0;
            let mut w = 1.0;
            for &i in &idx {
                let (u, wu) = gl[i];
                s.push(rest * u);
                w *= wu * rest;
                rest *= 1.0 - u;
            }
            points.push(s);
            weights.push(w);
            let mut d = dim;
            loop {
                if d == 0 {
                    return SimplexRule { dim, points, weights };
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < gl.len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Rule exact for total degree `degree`.
    pub fn exact_for(dim: usize, degree: usize) -> Self {
        Self::collapsed(dim, (degree + dim) / 2 + 1)
    }

    /// Integral of `f` over the reference simplex.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// `prod a_i! / (m + sum a_i)!`: the integral of `s^a` over the reference `m`-simplex.
pub fn monomial_integral(exponents: &[u32]) -> f64 {
    let m = exponents.len() as u32;
    let total: u32 = exponents.iter().sum();
    // multiply numerator factors and divide by denominator factors in an
    // interleaved order to stay in range
    let mut num: Vec<f64> = exponents.iter().flat_map(|&a| (1..=a).map(f64::from)).collect();
    let den: Vec<f64> = (1..=m + total).map(f64::from).collect();
    num.sort_by(|a, b| b.total_cmp(a));
    let mut v = 1.0;
    let mut ni = num.into_iter();
    for d in den.into_iter().rev() {
        v /= d;
        if let Some(n) = ni.next() {
            v *= n;
        }
    }
    for n in ni {
        v *= n;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_reference_volume() {
        for (m, fact) in [(1usize, 1.0), (2, 2.0), (3, 6.0)] {
            let r = SimplexRule::collapsed(m, 5);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0 / fact).abs() < 1e-15, "m={m}: {s}");
        }
    }

    #[test]
    fn collapsed_rule_is_exact_on_monomials() {
        // int_T s1^2 s2 = 2! 1! / 5! = 1/60
        let r = SimplexRule::exact_for(2, 3);
        let v = r.integrate(|s| s[0] * s[0] * s[1]);
        assert!((v - 1.0 / 60.0).abs() < 1e-16);
        assert!((monomial_integral(&[2, 1]) - 1.0 / 60.0).abs() < 1e-17);
        let r3 = SimplexRule::exact_for(3, 4);
        let v = r3.integrate(|s| s[0] * s[1] * s[2] * s[2]);
        assert!((v - monomial_integral(&[1, 1, 2])).abs() < 1e-16);
    }

    #[test]
    fn interval_rule() {
        let v = integrate_interval(4, 0.0, 2.0, |x| x.powi(3));
        assert!((v - 4.0).abs() < 1e-14);
    }
}
