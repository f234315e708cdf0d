//! The de Rham map, Whitney forms and the checks tying them together.
//!
//! Two pairings of forms with simplices are available. [`Pairing::Oriented`]
//! is the parametric integral, which commutes with the coboundary.
//! [`Pairing::Metric`] weights it by `k! vol(sigma)`, so that on a regular
//! unit simplex `int_sigma dt_1 ^ ... ^ dt_k` is the simplex volume.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cochain::Cochain;
use crate::complex::{MetricComplex, Simplex};
use crate::error::{Error, Result};
use crate::polyform::{bary_poly, LocalForm, PolyForm};

/// How a `k`-form is paired with a `k`-simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Integral in the affine chart given by the ordered vertices.
    #[default]
    Oriented,
    /// `k! vol(sigma)` times the oriented integral.
    Metric,
}

impl PolyForm {
    /// Pairing of this form with `tau`.
    pub fn pair(&self, k: &MetricComplex, tau: &[usize], pairing: Pairing) -> Result<f64> {
        match pairing {
            Pairing::Oriented => self.integrate_oriented(k, tau),
            Pairing::Metric => self.integrate(k, tau),
        }
    }
}

/// Outcome of a split or Stokes verification.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitReport {
    pub max_identity_error: f64,
    pub max_stokes_error: f64,
    pub sample_count: usize,
    /// Largest `||I w||_2 / ||w||_{L_2}` seen, with `w` the normalized Whitney form.
    pub derham_ratio: f64,
    /// Largest `||W c||_{L_2} / ||c||_2` seen.
    pub whitney_ratio: f64,
}

/// `k! sum_i (-1)^i t_{s_i} dt_{s_0} ^ .. ^ dt_{s_i}^ .. ^ dt_{s_k}` in the
/// coordinates of `top`, with `s` the positions of the vertices of `sigma`.
fn whitney_local(top: &Simplex, sigma: &[usize]) -> LocalForm {
    let m = top.dim();
    let k = sigma.len() - 1;
    let pos: Vec<usize> = sigma
        .iter()
        .map(|v| top.vertices().binary_search(v).expect("face of top"))
        .collect();
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let mut out = LocalForm::zero(m, k);
    for i in 0..=k {
        let mut term = LocalForm::function(bary_poly(m, pos[i]));
        for (j, &p) in pos.iter().enumerate() {
            if j != i {
                term = term.wedge(&LocalForm::dt(m, p)).expect("k <= m");
            }
        }
        let sign = if i % 2 == 0 { fact } else { -fact };
        out = out.add(&term.scale(sign));
    }
    out
}

fn whitney_with<F: Fn(&[usize]) -> f64>(c: &Cochain<'_>, weight: F) -> PolyForm {
    let k = c.complex();
    let deg = c.degree();
    let mut pieces: BTreeMap<Simplex, LocalForm> = BTreeMap::new();
    for (sigma, v) in c.iter() {
        let v = v * weight(sigma);
        for top in k.maximal_cofaces(sigma) {
            let w = whitney_local(&top, sigma).scale(v);
            let slot = pieces.entry(top.clone()).or_insert_with(|| LocalForm::zero(top.dim(), deg));
            *slot = slot.add(&w);
        }
    }
    PolyForm::from_pieces_unchecked(deg, pieces)
}

/// Whitney form of a cochain, extended linearly from the characteristic cochains.
pub fn whitney(c: &Cochain<'_>) -> PolyForm {
    whitney_with(c, |_| 1.0)
}

/// Pairing of `W(chi_sigma)` with `sigma`, computed from its trace on `sigma`.
pub fn whitney_self_pairing(k: &MetricComplex, sigma: &[usize], pairing: Pairing) -> f64 {
    let oriented = whitney_local(&Simplex::from_sorted(sigma), sigma).reference_integral();
    match pairing {
        Pairing::Oriented => oriented,
        Pairing::Metric => {
            let m = sigma.len() - 1;
            let fact: f64 = (1..=m).map(|i| i as f64).product();
            oriented * fact * k.volume(sigma)
        }
    }
}

/// `W(chi_sigma)` rescaled on every simplex by the inverse of its own
/// pairing, so that `I(W~ c) = c` for the chosen pairing. On regular unit
/// simplices under [`Pairing::Metric`] the factor is `sqrt(2^k) / sqrt(k+1)`.
pub fn whitney_normalized(c: &Cochain<'_>, pairing: Pairing) -> PolyForm {
    let k = c.complex();
    whitney_with(c, |sigma| 1.0 / whitney_self_pairing(k, sigma, pairing))
}

/// `sigma -> <w, sigma>` over all `k`-simplices of `k`.
pub fn derham_map<'a>(w: &PolyForm, k: &'a MetricComplex, degree: usize, pairing: Pairing) -> Result<Cochain<'a>> {
    if w.degree() != degree {
        return Err(Error::BadDegree(format!("form of degree {} paired in degree {degree}", w.degree())));
    }
    let mut out = Cochain::zero(k, degree);
    if degree > k.dim() || k.is_empty() {
        return Ok(out);
    }
    // trace each piece onto its own faces; a face shared by several pieces
    // gets the same value from each by continuity
    let mut done = vec![false; k.count(degree)];
    for (top, piece) in w.pieces() {
        if top.dim() < degree {
            continue;
        }
        for face in itertools::Itertools::combinations(top.vertices().iter().copied(), degree + 1) {
            let i = k.index_of(&face).expect("face of a simplex of k");
            if done[i] {
                continue;
            }
            done[i] = true;
            let map: Vec<usize> = face
                .iter()
                .map(|v| top.vertices().binary_search(v).expect("face"))
                .collect();
            let oriented = piece.pullback_simplicial(degree, &map).reference_integral();
            let value = match pairing {
                Pairing::Oriented => oriented,
                Pairing::Metric => {
                    let fact: f64 = (1..=degree).map(|i| i as f64).product();
                    oriented * fact * k.volume(&face)
                }
            };
            out.set_index(i, value);
        }
    }
    Ok(out)
}

/// Random cochain supported on at most `max_support` simplices, with values
/// uniform in `[-1, 1]`.
pub fn random_sparse_cochain<'a, R: Rng>(k: &'a MetricComplex, degree: usize, max_support: usize, rng: &mut R) -> Cochain<'a> {
    let mut c = Cochain::zero(k, degree);
    let n = if degree <= k.dim() { k.count(degree) } else { 0 };
    if n == 0 {
        return c;
    }
    let size = rng.gen_range(1..=max_support.min(n).max(1));
    for i in sample(rng, n, size) {
        c.set_index(i, rng.gen_range(-1.0..=1.0));
    }
    c
}

/// Checks `I(W~ c) = c` on `samples` random sparse cochains of degree `degree`.
pub fn verify_split(k: &MetricComplex, degree: usize, samples: usize, pairing: Pairing, seed: u64) -> Result<SplitReport> {
    let mut report = SplitReport::default();
    if k.is_empty() || degree > k.dim() {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let c = random_sparse_cochain(k, degree, 8, &mut rng);
        let w = whitney_normalized(&c, pairing);
        let back = derham_map(&w, k, degree, pairing)?;
        let err = back.sub(&c)?.max_abs();
        report.max_identity_error = report.max_identity_error.max(err);
        let c2 = c.lp_norm(2.0)?;
        let w2 = w.lp_norm(k, 2.0)?;
        if w2 > 0.0 {
            report.derham_ratio = report.derham_ratio.max(back.lp_norm(2.0)? / w2);
        }
        if c2 > 0.0 {
            report.whitney_ratio = report.whitney_ratio.max(whitney(&c).lp_norm(k, 2.0)? / c2);
        }
        report.sample_count += 1;
    }
    Ok(report)
}

/// Largest entry of `I(dw) - delta(I w)` under the oriented pairing.
pub fn verify_stokes(w: &PolyForm, k: &MetricComplex) -> Result<SplitReport> {
    let deg = w.degree();
    if deg >= k.dim() {
        return Err(Error::BadDimension(format!("{deg}-form on a {}-dimensional complex", k.dim())));
    }
    let lhs = derham_map(&w.d(), k, deg + 1, Pairing::Oriented)?;
    let rhs = derham_map(w, k, deg, Pairing::Oriented)?.coboundary();
    Ok(SplitReport {
        max_stokes_error: lhs.sub(&rhs)?.max_abs(),
        sample_count: 1,
        ..SplitReport::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ray_complex, regular_simplex, standard_simplex};
    use crate::polyform::BaryTerm;

    fn s(ids: &[usize]) -> Simplex {
        Simplex::new(ids.iter().copied()).unwrap()
    }

    #[test]
    fn edge_whitney_form() {
        let k = regular_simplex(1);
        let w = whitney(&Cochain::indicator(&k, &s(&[0, 1])).unwrap());
        let expect = PolyForm::from_barycentric(
            &k,
            1,
            &[(s(&[0, 1]), vec![BaryTerm::new(1.0, vec![1, 0], vec![1]), BaryTerm::new(-1.0, vec![0, 1], vec![0])])],
        )
        .unwrap();
        assert_eq!(w, expect);
    }

    #[test]
    fn vertex_whitney_form_is_hat() {
        let k = ray_complex(2, 1).unwrap();
        let w = whitney(&Cochain::indicator(&k, &s(&[1])).unwrap());
        let hat = PolyForm::from_barycentric(
            &k,
            0,
            &[
                (s(&[0, 1, 2]), vec![BaryTerm::new(1.0, vec![0, 1, 0], vec![])]),
                (s(&[1, 2, 3]), vec![BaryTerm::new(1.0, vec![1, 0, 0], vec![])]),
            ],
        )
        .unwrap();
        assert_eq!(w, hat);
        assert!(w.check_continuity(&k, 1e-12).is_ok());
    }

    #[test]
    fn whitney_is_linear() {
        let k = ray_complex(2, 2).unwrap();
        let a = Cochain::indicator(&k, &s(&[1, 2])).unwrap();
        let b = Cochain::indicator(&k, &s(&[2, 3])).unwrap();
        let lhs = whitney(&a.scale(2.0).add(&b).unwrap());
        let rhs = whitney(&a).scale(2.0).add(&whitney(&b)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn regular_simplex_constants() {
        for (kdim, expect) in [(1usize, 1.0), (2, 3f64.sqrt() / 2.0), (3, std::f64::consts::FRAC_1_SQRT_2)] {
            let k = regular_simplex(kdim);
            let top: Vec<usize> = (0..=kdim).collect();
            let w = whitney(&Cochain::indicator(&k, &s(&top)).unwrap());
            let v = w.integrate(&k, &top).unwrap();
            assert!((v - expect).abs() < 1e-12, "k={kdim}: {v}");
            assert!((w.integrate_oriented(&k, &top).unwrap() - 1.0).abs() < 1e-14);
            let norm = whitney_normalized(&Cochain::indicator(&k, &s(&top)).unwrap(), Pairing::Metric);
            let factor = norm.integrate(&k, &top).unwrap() / v;
            assert!((factor - 1.0 / expect).abs() < 1e-12);
        }
        // the k = 2 factor is 2 / sqrt(3)
        assert!((1.0 / (3f64.sqrt() / 2.0) - 2.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn whitney_support_is_one_simplex() {
        let k = regular_simplex(2);
        let c = Cochain::indicator(&k, &s(&[0, 2])).unwrap();
        for pairing in [Pairing::Oriented, Pairing::Metric] {
            let i = derham_map(&whitney(&c), &k, 1, pairing).unwrap();
            assert_eq!(i.support_len(), 1);
            assert!(i.get(&[0, 2]) != 0.0);
        }
        let zero = derham_map(&PolyForm::zero(1), &k, 1, Pairing::Metric).unwrap();
        assert_eq!(zero.support_len(), 0);
    }

    #[test]
    fn split_and_stokes() {
        let k = ray_complex(2, 3).unwrap();
        for deg in 0..=2 {
            for pairing in [Pairing::Oriented, Pairing::Metric] {
                let r = verify_split(&k, deg, 10, pairing, 7).unwrap();
                assert_eq!(r.sample_count, 10);
                assert!(r.max_identity_error <= 1e-10, "{deg} {pairing:?}: {r:?}");
            }
        }
        let hat = whitney(&Cochain::indicator(&k, &s(&[2])).unwrap());
        assert!(verify_stokes(&hat, &k).unwrap().max_stokes_error <= 1e-10);
        let empty = MetricComplex::build(Vec::<(usize, Vec<f64>)>::new(), &[]).unwrap();
        assert_eq!(verify_split(&empty, 0, 5, Pairing::Metric, 1).unwrap().sample_count, 0);
    }

    #[test]
    fn stokes_on_random_forms() {
        let k = standard_simplex(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for deg in 0..3 {
            let w = PolyForm::random(&k, deg, 3, false, &mut rng).unwrap();
            let r = verify_stokes(&w, &k).unwrap();
            assert!(r.max_stokes_error <= 1e-10);
        }
    }
}
