use proptest::prelude::*;
use sobolev_dr::complex::{cone, regular_simplex, simplex_boundary};
use sobolev_dr::contract::{assemble, cohomology_dims, contract, verify_contraction, ContractOutcome, MatrixComplex};
use sobolev_dr::MetricComplex;

/// Rank over the rationals by fraction-free elimination.
fn exact_rank(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> i128) -> usize {
    let mut a: Vec<Vec<i128>> = (0..rows).map(|r| (0..cols).map(|c| entry(r, c)).collect()).collect();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                a[r][j] = (a[rank][c] * a[r][j] - a[r][c] * a[rank][j]) / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn exact_betti(m: &MatrixComplex) -> Vec<usize> {
    let ranks: Vec<usize> = m
        .maps()
        .iter()
        .map(|d| exact_rank(d.nrows(), d.ncols(), |r, c| d[(r, c)] as i128))
        .collect();
    (0..m.len())
        .map(|i| m.dims()[i] - ranks.get(i).copied().unwrap_or(0) - if i == 0 { 0 } else { ranks[i - 1] })
        .collect()
}

/// Complex spanned by the chosen triangles of the complete 2-complex on six
/// vertices placed generically in R^3.
fn from_triangles(mask: &[bool]) -> Option<MetricComplex> {
    let all: Vec<Vec<usize>> = (0..6)
        .flat_map(|a| (a + 1..6).flat_map(move |b| (b + 1..6).map(move |c| vec![a, b, c])))
        .collect();
    let tops: Vec<Vec<usize>> = all.into_iter().zip(mask).filter(|(_, m)| **m).map(|(t, _)| t).collect();
    if tops.is_empty() {
        return None;
    }
    let verts = (0..6).map(|i| {
        let t = i as f64;
        (i, vec![t.cos(), (1.7 * t).sin(), 0.3 * t * t])
    });
    let k = MetricComplex::build(verts, &tops).ok()?;
    (k.total_count() <= 50).then_some(k)
}

fn contracts(m: &MatrixComplex) -> bool {
    match contract(m) {
        ContractOutcome::Contracted { contraction, steps } => {
            assert!(steps.iter().all(|s| s.alpha_closure <= 1e-8));
            verify_contraction(m, &contraction, 1e-8).unwrap().passes
        }
        ContractOutcome::Failed(_) => false,
    }
}

#[test]
fn spheres_and_cones() {
    for (k, betti) in [(simplex_boundary(2), vec![1, 1]), (simplex_boundary(3), vec![1, 0, 1])] {
        let m = assemble(&k).unwrap();
        assert_eq!(cohomology_dims(&m), betti);
        assert_eq!(exact_betti(&m), betti);
        match contract(&m) {
            ContractOutcome::Failed(f) => {
                let expected: Vec<usize> = (0..betti.len()).filter(|&i| betti[i] > 0).collect();
                assert_eq!(f.obstructed, expected);
                assert_eq!(f.degree, *expected.last().unwrap());
            }
            other => panic!("{other:?}"),
        }
        let c = assemble(&cone(&k)).unwrap();
        assert!(contracts(&c.augment()));
    }
    for d in 1..=3 {
        assert!(contracts(&assemble(&regular_simplex(d)).unwrap().augment()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranks_match_exact_oracle(mask in proptest::collection::vec(proptest::bool::weighted(0.3), 20)) {
        if let Some(k) = from_triangles(&mask) {
            let m = assemble(&k).unwrap();
            let betti = cohomology_dims(&m);
            prop_assert_eq!(&betti, &exact_betti(&m));
            let acyclic = betti[0] == 1 && betti[1..].iter().all(|b| *b == 0);
            prop_assert_eq!(contracts(&m.augment()), acyclic);
        }
    }
}
