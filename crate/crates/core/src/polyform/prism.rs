use super::local::bary_poly;
use super::poly::Poly;
use super::PolyForm;
use crate::complex::{cube_boundary, MetricComplex, Simplex};
use crate::error::{Error, Result};

/// The triangulated prism `K x [0, 1]` over a complex of dimension at most 1.
///
/// Vertex `b` of `K` becomes `2b` at height 0 and `2b + 1` at height 1. A
/// vertex becomes the vertical edge `[2b, 2b+1]`; an edge `[a, b]` becomes the
/// triangles `[2a, 2b, 2b+1]` and `[2a, 2a+1, 2b+1]`.
pub fn prism_complex(base: &MetricComplex) -> Result<MetricComplex> {
    if base.dim() > 1 {
        return Err(Error::BadDimension("prisms are built over complexes of dimension <= 1".into()));
    }
    let mut verts = Vec::new();
    for &id in base.vertex_ids() {
        for h in [0.0, 1.0] {
            let mut c = base.coords(id)?.to_vec();
            c.push(h);
            verts.push((2 * id + h as usize, c));
        }
    }
    let mut tops = Vec::new();
    for s in base.maximal_simplices() {
        match *s.vertices() {
            [a] => tops.push(vec![2 * a, 2 * a + 1]),
            [a, b] => {
                tops.push(vec![2 * a, 2 * b, 2 * b + 1]);
                tops.push(vec![2 * a, 2 * a + 1, 2 * b + 1]);
            }
            _ => unreachable!("dimension checked"),
        }
    }
    MetricComplex::build(verts, &tops)
}

/// `(1 - t) w` on the prism over the triangulated boundary of `[0,1]^n`,
/// `n` in `{1, 2}`. Returns the prism complex and the extended form.
pub fn prism_extend(w: &PolyForm, base: &MetricComplex, n: usize) -> Result<(MetricComplex, PolyForm)> {
    let cube = cube_boundary(n).map_err(|_| Error::BadCarrier(format!("no cube boundary in dimension {n}")))?;
    if *base != cube {
        return Err(Error::BadCarrier("the carrier is not the triangulated cube boundary".into()));
    }
    let prism = prism_complex(base)?;
    let mut pieces = Vec::new();
    for p in prism.maximal_simplices() {
        let pv = p.vertices();
        let base_ids: Vec<usize> = pv.iter().map(|v| v / 2).collect();
        let b = Simplex::new(base_ids.iter().copied().collect::<std::collections::BTreeSet<_>>())?;
        let tops = base.maximal_cofaces(b.vertices());
        let carrier = &tops[0];
        let local = w.piece_or_zero(carrier);
        let map: Vec<usize> = base_ids
            .iter()
            .map(|id| carrier.vertices().binary_search(id).expect("vertex of carrier"))
            .collect();
        let m = p.dim();
        let pulled = local.pullback_simplicial(m, &map);
        let mut height = Poly::zero(m);
        for (q, &v) in pv.iter().enumerate() {
            if v % 2 == 1 {
                height.add_assign(&bary_poly(m, q));
            }
        }
        let factor = Poly::constant(m, 1.0).sub(&height);
        pieces.push((p, pulled.mul_poly(&factor)));
    }
    let ext = PolyForm::from_pieces(&prism, w.degree(), pieces)?;
    Ok((prism, ext))
}

/// Pieces of a form on the bottom or top face of a prism, relabelled to the
/// base ids.
#[cfg(test)]
pub(crate) fn level(ext: &PolyForm, prism: &MetricComplex, base: &MetricComplex, top: bool) -> PolyForm {
    let shift = usize::from(top);
    let verts: Vec<(usize, Vec<f64>)> = base
        .vertex_ids()
        .iter()
        .map(|&id| (2 * id + shift, prism.coords(2 * id + shift).unwrap().to_vec()))
        .collect();
    let tops: Vec<Vec<usize>> = base
        .maximal_simplices()
        .iter()
        .map(|s| s.vertices().iter().map(|v| 2 * v + shift).collect())
        .collect();
    let slice = MetricComplex::build(verts, &tops).unwrap();
    let r = ext.restrict(prism, &slice).unwrap();
    let pieces: Vec<(Simplex, super::LocalForm)> = r
        .pieces()
        .map(|(s, w)| (Simplex::new(s.vertices().iter().map(|v| v / 2)).unwrap(), w.clone()))
        .collect();
    PolyForm::from_pieces(base, ext.degree(), pieces).unwrap()
}

#[cfg(test)]
mod tests {
    use super::super::BaryTerm;
    use super::*;
    use crate::complex::PiSequence;

    fn constant_on(base: &MetricComplex, c: f64) -> PolyForm {
        let blocks: Vec<(Simplex, Vec<BaryTerm>)> = base
            .maximal_simplices()
            .into_iter()
            .map(|s| {
                let e = vec![0; s.dim() + 1];
                (s, vec![BaryTerm::new(c, e, vec![])])
            })
            .collect();
        PolyForm::from_barycentric(base, 0, &blocks).unwrap()
    }

    #[test]
    fn constant_extension_l2() {
        for n in [1, 2] {
            let base = cube_boundary(n).unwrap();
            let w = constant_on(&base, 1.0);
            let (prism, ext) = prism_extend(&w, &base, n).unwrap();
            let a = w.lp_norm(&base, 2.0).unwrap().powi(2);
            let b = ext.lp_norm(&prism, 2.0).unwrap().powi(2);
            assert!((b - a / 3.0).abs() < 1e-13, "n={n}: {b} vs {a}/3");
            assert_eq!(level(&ext, &prism, &base, false), w);
            assert!(level(&ext, &prism, &base, true).is_zero());
        }
    }

    #[test]
    fn one_form_extension() {
        // x dy + dx traced onto the sides of the unit square
        let base = cube_boundary(2).unwrap();
        let x = Poly::var(2, 0);
        let w = PolyForm::from_ambient(&base, 1, &[(x.clone(), vec![1]), (Poly::constant(2, 1.0), vec![0])]).unwrap();
        let (prism, ext) = prism_extend(&w, &base, 2).unwrap();
        assert_eq!(level(&ext, &prism, &base, false), w);
        assert!(level(&ext, &prism, &base, true).is_zero());
        let pi = PiSequence::new(vec![2.0, 2.0, 2.0], 2).unwrap();
        let lhs = ext.omega_pi_norm(&prism, &pi).unwrap();
        let rhs = w.omega_pi_norm(&base, &pi).unwrap();
        assert!(lhs <= 2.0 * rhs, "{lhs} > 2 * {rhs}");
    }

    #[test]
    fn wrong_carrier() {
        let k = crate::complex::regular_simplex(1);
        let w = constant_on(&k, 1.0);
        assert!(matches!(prism_extend(&w, &k, 1), Err(Error::BadCarrier(_))));
        assert!(matches!(prism_extend(&w, &k, 3), Err(Error::BadCarrier(_))));
    }
}
