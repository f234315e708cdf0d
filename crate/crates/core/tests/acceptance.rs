//! Acceptance suite. Runs every criterion in sequence, prints one line per
//! criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sobolev_dr::cochain::Cochain;
use sobolev_dr::complex::{cone, cube_boundary, ray_complex, regular_simplex, simplex_boundary, standard_simplex};
use sobolev_dr::contract::{assemble, cohomology_dims, contract, verify_contraction, ContractOutcome, MatrixComplex};
use sobolev_dr::derham::{verify_split, verify_stokes, whitney, Pairing};
use sobolev_dr::mollify::{
    homotopy_convergence, observed_orders, regularize, verify_homotopy, verify_support_control, GridForm,
    MollifierConfig,
};
use sobolev_dr::nontrivial::verify_nontriviality;
use sobolev_dr::polyform::{prism_extend, BaryTerm, PolyForm};
use sobolev_dr::{MetricComplex, PiSequence, Simplex};

/// Result of one criterion: pass flag and a short measurement summary.
struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { ok: true, notes: Vec::new() }
    }

    fn expect(&mut self, ok: bool, note: impl Into<String>) {
        let note = note.into();
        if !ok {
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
        self.ok &= ok;
    }
}

fn s(v: &[usize]) -> Simplex {
    Simplex::new(v.iter().copied()).unwrap()
}

fn whitney_constant() -> Check {
    let mut c = Check::new();
    let mut worst_w = 0.0f64;
    let mut worst_v = 0.0f64;
    for k in 1..=3usize {
        let kc = regular_simplex(k);
        let top: Vec<usize> = (0..=k).collect();
        let w = whitney(&Cochain::indicator(&kc, &s(&top)).unwrap());
        let expect = ((k + 1) as f64).sqrt() / 2f64.powf(k as f64 / 2.0);
        worst_w = worst_w.max((w.integrate(&kc, &top).unwrap() - expect).abs());
        let dt = PolyForm::from_barycentric(&kc, k, &[(s(&top), vec![BaryTerm::new(1.0, vec![0; k + 1], (1..=k).collect())])])
            .unwrap();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        worst_v = worst_v.max((dt.integrate(&kc, &top).unwrap() - expect / fact).abs());
    }
    c.expect(worst_w <= 1e-12, format!("whitney err {worst_w:.1e}"));
    c.expect(worst_v <= 1e-12, format!("volume err {worst_v:.1e}"));
    c
}

fn split_identity() -> Check {
    let mut c = Check::new();
    let hosts = [
        regular_simplex(3).barycentric_subdivide(),
        ray_complex(2, 12).unwrap().barycentric_subdivide(),
        cone(&simplex_boundary(2)).barycentric_subdivide(),
    ];
    let mut worst = 0.0f64;
    let mut samples = 0;
    let mut largest = 0;
    for (i, k) in hosts.iter().enumerate() {
        largest = largest.max(k.total_count());
        for deg in 0..=k.dim() {
            for pairing in [Pairing::Oriented, Pairing::Metric] {
                let r = verify_split(k, deg, 100, pairing, 1000 + i as u64).unwrap();
                worst = worst.max(r.max_identity_error);
                samples += r.sample_count;
            }
        }
    }
    c.expect(largest <= 500, format!("largest complex {largest} simplices"));
    c.expect(worst <= 1e-10, format!("max |I W~ c - c| {worst:.1e} over {samples} cochains"));
    c
}

fn chain_identities() -> Check {
    let mut c = Check::new();
    let k = regular_simplex(3).barycentric_subdivide();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nonzero = 0;
    for deg in 0..k.dim() {
        for _ in 0..20 {
            let entries: Vec<(Vec<usize>, f64)> =
                k.simplices(deg).map(|t| t.to_vec()).collect::<Vec<_>>().into_iter().map(|t| (t, rng.gen_range(-1.0..1.0))).collect();
            let x = Cochain::from_values(&k, deg, entries).unwrap();
            nonzero += x.coboundary().coboundary().support_len();
        }
    }
    c.expect(nonzero == 0, format!("dd entries {nonzero}"));
    // with integer data on integer coordinates every coefficient is exact,
    // so dd must vanish identically
    let exact = standard_simplex(3);
    let mut dd_terms = 0;
    for deg in 0..3 {
        for _ in 0..20 {
            let w = PolyForm::random(&exact, deg, 3, true, &mut rng).unwrap();
            dd_terms += usize::from(!w.d().d().is_zero());
        }
    }
    c.expect(dd_terms == 0, format!("nonzero d(dw) {dd_terms}"));
    let mut stokes = 0.0f64;
    let mut roundoff = 0.0f64;
    let mut forms = 0;
    for deg in 0..k.dim() {
        for _ in 0..34 {
            let w = PolyForm::random(&k, deg, 3, false, &mut rng).unwrap();
            roundoff = w.d().d().pieces().map(|(_, l)| l.max_abs_coeff()).fold(roundoff, f64::max);
            stokes = stokes.max(verify_stokes(&w, &k).unwrap().max_stokes_error);
            forms += 1;
        }
    }
    c.expect(roundoff <= 1e-14, format!("float d(dw) {roundoff:.1e}"));
    c.expect(forms >= 100 && stokes <= 1e-10, format!("stokes err {stokes:.1e} over {forms} forms"));
    c
}

fn mollifier_homotopy() -> Check {
    let mut c = Check::new();
    let cfg = MollifierConfig::new(0.1).unwrap();
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let cubic: fn(&[f64]) -> Vec<f64> = |x| vec![x[0].powi(3) - x[0]];
    let quad: fn(&[f64]) -> Vec<f64> = |x| vec![x[0] * x[0] + 1.0];
    for (name, deg, f) in [("x^3-x", 0, cubic), ("(x^2+1)dx", 1, quad)] {
        let runs = homotopy_convergence(1, deg, f, &cfg, &hs).unwrap();
        let finest = runs[2].1;
        let orders = observed_orders(&runs);
        let overall = (runs[0].1 / runs[2].1).log2() / 2.0;
        c.expect(finest <= 1e-3, format!("{name} {finest:.1e}"));
        c.expect((1.7..=2.5).contains(&overall), format!("order {overall:.2} ({:.2}, {:.2})", orders[0], orders[1]));
    }
    let w = GridForm::sample(2, 1.0 / 128.0, 1, |x| vec![x[0] * x[1], x[0] * x[0]]).unwrap();
    let r2 = verify_homotopy(&w, &cfg, 1e-2).unwrap();
    c.expect(r2.passes, format!("2d {:.1e}", r2.residual));
    let one = GridForm::sample(2, 1.0 / 32.0, 0, |_| vec![1.0]).unwrap();
    let defect = regularize(&one, &cfg).sub(&one).unwrap().max_abs();
    c.expect(defect <= 1e-14, format!("|R1 - 1| {defect:.1e}"));
    let id = MollifierConfig::new(0.0).unwrap();
    let w = GridForm::sample(2, 1.0 / 32.0, 1, |x| vec![x[1].sin(), x[0] * x[1]]).unwrap();
    c.expect(regularize(&w, &id) == w, "eps=0 exact");
    c
}

fn support_control() -> Check {
    let mut c = Check::new();
    let center = [0.1, -0.05];
    let r = 0.5;
    let f = move |x: &[f64]| {
        let d2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
        vec![if d2 < r * r { 0.0 } else { (d2 - r * r).powi(3) + x[0] }]
    };
    let w = GridForm::sample(2, 1.0 / 48.0, 0, f).unwrap();
    let mut deltas = Vec::new();
    let mut worst = 0.0f64;
    for eps in [0.2, 0.1, 0.05] {
        let rep = verify_support_control(&w, &MollifierConfig::new(eps).unwrap(), &center, r).unwrap();
        c.ok &= rep.passes && rep.checked_radius > 0.0;
        worst = worst.max(rep.max_abs);
        deltas.push(rep.delta);
    }
    let w1 = GridForm::sample(1, 1.0 / 256.0, 1, |x| vec![if x[0].abs() < 0.4 { 0.0 } else { x[0].abs() - 0.4 }]).unwrap();
    let rep = verify_support_control(&w1, &MollifierConfig::new(0.1).unwrap(), &[0.0], 0.4).unwrap();
    c.ok &= rep.passes;
    worst = worst.max(rep.max_abs);
    let decreasing = deltas.windows(2).all(|d| d[1] < d[0]);
    c.expect(worst <= 1e-12, format!("max |Rw| on shrunk disc {worst:.1e}"));
    c.expect(decreasing, format!("delta {:.3} {:.3} {:.3}", deltas[0], deltas[1], deltas[2]));
    c
}

fn counterexample() -> Check {
    let mut c = Check::new();
    let pi = PiSequence::new(vec![2.0, 4.0], 1).unwrap();
    let rep = verify_nontriviality(&pi, 1.0, &[1_000, 1_000_000]).unwrap();
    let kernel = rep.truncations.iter().map(|t| t.kernel.max_form.max(t.kernel.max_dform)).fold(0.0, f64::max);
    c.expect(kernel <= 1e-10 && rep.truncations.iter().all(|t| t.kernel_ok), format!("kernel {kernel:.1e}"));
    let last = rep.truncations.last().unwrap();
    let upper = last.form_upper.point(1000).unwrap();
    let tail = upper.tail_bound.unwrap();
    // the bound is exactly 0.3 at m = 1000
    c.expect(tail <= 0.3 * (1.0 + 1e-12) && last.cauchy_ok, format!("tail@1e3 {tail:.3}"));
    let lower = last.dform_lower.point(1000).unwrap().sum;
    let ratios: Vec<f64> = [1_000, 10_000, 100_000, 1_000_000].iter().map(|&m| last.dform_lower.growth_ratio(m).unwrap()).collect();
    let growth = ratios.iter().all(|r| (0.9..=1.1).contains(r));
    c.expect(lower > 25.0 && last.divergence_ok, format!("S@1e3 {lower:.2}"));
    c.expect(growth, format!("S/3m^(1/3) {:.3}..{:.3}", ratios[0], ratios[3]));
    c.expect(rep.truncations.iter().all(|t| t.gap_ok), format!("K' gap dev {:.1e}", last.image_deviation));
    c.expect(rep.control.all_converge, "(4,2) converges");
    c.ok &= rep.passes;
    c
}

/// Rank over the rationals by fraction-free elimination.
fn exact_rank(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> i128) -> usize {
    let mut a: Vec<Vec<i128>> = (0..rows).map(|r| (0..cols).map(|c| entry(r, c)).collect()).collect();
    let (mut rank, mut prev) = (0, 1i128);
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][col] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for j in col + 1..cols {
                a[r][j] = (a[rank][col] * a[r][j] - a[r][col] * a[rank][j]) / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn exact_betti(m: &MatrixComplex) -> Vec<usize> {
    let ranks: Vec<usize> = m.maps().iter().map(|d| exact_rank(d.nrows(), d.ncols(), |r, c| d[(r, c)] as i128)).collect();
    (0..m.len())
        .map(|i| m.dims()[i] - ranks.get(i).copied().unwrap_or(0) - if i == 0 { 0 } else { ranks[i - 1] })
        .collect()
}

fn contraction() -> Check {
    let mut c = Check::new();
    let mut acyclic: Vec<MetricComplex> = (1..=3).map(regular_simplex).collect();
    acyclic.push(cone(&simplex_boundary(2)));
    acyclic.push(cone(&simplex_boundary(3)));
    acyclic.push(cone(&cube_boundary(2).unwrap()));
    let (mut identity, mut closure) = (0.0f64, 0.0f64);
    let mut contracted = 0;
    for k in &acyclic {
        let m = assemble(k).unwrap().augment();
        if let ContractOutcome::Contracted { contraction, steps } = contract(&m) {
            closure = steps.iter().map(|s| s.alpha_closure).fold(closure, f64::max);
            let rep = verify_contraction(&m, &contraction, 1e-8).unwrap();
            identity = identity.max(rep.max_residual);
            contracted += usize::from(rep.passes);
        }
    }
    c.expect(contracted == acyclic.len(), format!("{contracted}/{} contracted", acyclic.len()));
    c.expect(identity <= 1e-8 && closure <= 1e-8, format!("1-dh-hd {identity:.1e}, D alpha {closure:.1e}"));
    for (k, betti) in [(simplex_boundary(2), vec![1, 1]), (simplex_boundary(3), vec![1, 0, 1])] {
        let m = assemble(&k).unwrap();
        let dims = cohomology_dims(&m);
        let expected: Vec<usize> = (0..dims.len()).filter(|&i| dims[i] > 0).collect();
        let obstructed = match contract(&m) {
            ContractOutcome::Failed(f) => f.obstructed,
            ContractOutcome::Contracted { .. } => Vec::new(),
        };
        c.expect(dims == betti && exact_betti(&m) == betti && obstructed == expected, format!("sphere {dims:?} fails at {obstructed:?}"));
    }
    // random subcomplexes of the 2-skeleton on six points
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let tris: Vec<Vec<usize>> = (0..6)
        .flat_map(|a| (a + 1..6).flat_map(move |b| (b + 1..6).map(move |c| vec![a, b, c])))
        .collect();
    let mut agree = 0;
    let mut tried = 0;
    while tried < 40 {
        let tops: Vec<Vec<usize>> = tris.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
        let verts = (0..6).map(|i| (i, vec![(i as f64).cos(), (1.7 * i as f64).sin(), 0.3 * (i * i) as f64]));
        let Ok(k) = MetricComplex::build(verts, &tops) else { continue };
        if tops.is_empty() || k.total_count() > 50 {
            continue;
        }
        tried += 1;
        let m = assemble(&k).unwrap();
        let dims = cohomology_dims(&m);
        let acyc = dims[0] == 1 && dims[1..].iter().all(|b| *b == 0);
        let contracts = matches!(contract(&m.augment()), ContractOutcome::Contracted { .. });
        agree += usize::from(dims == exact_betti(&m) && contracts == acyc);
    }
    c.expect(agree == tried, format!("oracle agrees {agree}/{tried}"));
    c
}

fn hoelder_and_prism() -> Check {
    let mut c = Check::new();
    let carriers = [regular_simplex(2).barycentric_subdivide(), regular_simplex(3), cube_boundary(2).unwrap()];
    let pairs = [(4.0, 2.0), (6.0, 2.0), (6.0, 4.0), (2.0, 2.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut count, mut violation) = (0, f64::NEG_INFINITY);
    for u in &carriers {
        let mes: f64 = u.maximal_simplices().iter().map(|t| u.volume(t.vertices())).sum();
        for _ in 0..9 {
            let g = PolyForm::random(u, 0, 2, false, &mut rng).unwrap();
            for &(pk, pk1) in &pairs {
                let lhs = g.lp_norm(u, pk1).unwrap();
                let rhs = mes.powf(1.0 / pk1 - 1.0 / pk) * g.lp_norm(u, pk).unwrap();
                violation = violation.max(lhs - rhs);
                count += 1;
            }
        }
    }
    c.expect(count >= 100 && violation <= 1e-8, format!("{count} densities, max excess {violation:.1e}"));
    let mut ratio = 0.0f64;
    for n in [1usize, 2] {
        let base = cube_boundary(n).unwrap();
        for deg in 0..n {
            for exps in [vec![2.0; 3], vec![4.0; 3], vec![6.0, 4.0, 4.0]] {
                let pi = PiSequence::new(exps[..n + 1].to_vec(), n).unwrap();
                for _ in 0..4 {
                    let w = PolyForm::random(&base, deg, 2, false, &mut rng).unwrap();
                    let (prism, ext) = prism_extend(&w, &base, n).unwrap();
                    ratio = ratio.max(ext.omega_pi_norm(&prism, &pi).unwrap() / w.omega_pi_norm(&base, &pi).unwrap());
                }
            }
        }
    }
    c.expect(ratio <= 2.0, format!("prism ratio {ratio:.3}"));
    c
}

fn main() -> ExitCode {
    type Criterion = (&'static str, f64, fn() -> Check);
    let criteria: [Criterion; 8] = [
        ("whitney constant", 1.0, whitney_constant),
        ("split identity", 10.0, split_identity),
        ("chain identities", 10.0, chain_identities),
        ("mollifier homotopy", 60.0, mollifier_homotopy),
        ("support control", 30.0, support_control),
        ("counterexample", 120.0, counterexample),
        ("contraction", 10.0, contraction),
        ("hoelder and prism", 10.0, hoelder_and_prism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let check = run();
        let secs = t.elapsed().as_secs_f64();
        let ok = check.ok && secs < *limit;
        failed += usize::from(!ok);
        println!(
            "[{}] {} {name}: {} ({secs:.2} s, limit {limit} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            check.notes.join(", ")
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
