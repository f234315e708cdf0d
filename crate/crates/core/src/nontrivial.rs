//! The weighted bump family on a truncated ray or strip, its norms and its
//! de Rham images on `K` and on the barycentric subdivision `K'`.
//!
//! Bump `i` is `w_i Psi((x - b_i) / r) sum_{|I| = k} dx_I` with
//! `w_i = i^{-1/(p_{k+1} - eps)}`, centred at the barycenter `b_i` of the
//! `i`-th top simplex. Its de Rham image vanishes on `K`, while on `K'` the
//! coboundary part lies in `l_{p_{k+1}}` but not in `l_{p_k}`.

use crate::cochain::Cochain;
use crate::complex::{ray_complex, MetricComplex, PiSequence, SubdivisionMap};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;

/// `exp(1 / (|x|^2 - 1))` inside the unit ball, 0 outside.
pub fn bump_profile(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|a| a * a).sum();
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 / (r2 - 1.0)).exp()
    }
}

/// Gradient of the profile.
fn profile_gradient(y: &[f64; 2], n: usize) -> [f64; 2] {
    let r2: f64 = y[..n].iter().map(|a| a * a).sum();
    if r2 >= 1.0 {
        return [0.0; 2];
    }
    let q = r2 - 1.0;
    let f = -2.0 * (1.0 / q).exp() / (q * q);
    [f * y[0], if n > 1 { f * y[1] } else { 0.0 }]
}

/// Radial derivative `Psi'(s)` of the profile, `0 <= s`.
fn radial_derivative(s: f64) -> f64 {
    profile_gradient(&[s, 0.0], 1)[0]
}

/// Composite Gauss-Legendre over `[a, b]`.
fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let gl = gauss_legendre_unit(10);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(u, w) in &gl {
            sum += w * h * f(lo + u * h);
        }
    }
    sum
}

const PANELS: usize = 32;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// One member of the family.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    /// Vertex ids of the top simplex of `K` carrying the bump.
    pub simplex: Vec<usize>,
    pub center: [f64; 2],
    pub radius: f64,
    pub weight: f64,
}

impl Bump {
    fn local(&self, x: &[f64], n: usize) -> [f64; 2] {
        let mut y = [0.0; 2];
        for a in 0..n {
            y[a] = (x[a] - self.center[a]) / self.radius;
        }
        y
    }

    /// Coefficient `g` of `sum dx_I` at `x`.
    pub fn coefficient(&self, x: &[f64]) -> f64 {
        let n = x.len();
        self.weight * bump_profile(&self.local(x, n)[..n])
    }

    /// Coefficient of `d omega_i` on `dx` (n = 1) or `dx_1 ^ dx_2` (n = 2).
    pub fn d_coefficient(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let g = profile_gradient(&self.local(x, n), n);
        let s = self.weight / self.radius;
        if n == 1 {
            s * g[0]
        } else {
            s * (g[0] - g[1])
        }
    }
}

/// The family `omega_1, ..., omega_M` on `ray_complex(k + 1, M)`.
#[derive(Clone, Debug)]
pub struct BumpFamily {
    k: usize,
    pi: PiSequence,
    eps: f64,
    host: MetricComplex,
    subdivision: MetricComplex,
    map: SubdivisionMap,
    bumps: Vec<Bump>,
}

/// Checks `p_k < p_{k+1}` and `0 < eps < p_{k+1} - p_k`; returns both exponents.
fn counterexample_exponents(k: usize, pi: &PiSequence, eps: f64) -> Result<(f64, f64)> {
    let (lo, hi) = match (pi.p(k), pi.p(k + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::BadDegree(format!("pi has no exponents p_{k}, p_{}", k + 1))),
    };
    if !pi.increases_at(k) {
        return Err(Error::NotACounterexample(format!("p_{k} = {lo} is not below p_{} = {hi}", k + 1)));
    }
    if !(eps > 0.0 && eps < hi - lo) {
        return Err(Error::BadEpsilon { eps, upper: hi - lo });
    }
    Ok((lo, hi))
}

/// Builds the family of `m` bumps in degree `k` (`k` in `{0, 1}`) on
/// `ray_complex(k + 1, m)`.
pub fn build_family(k: usize, pi: &PiSequence, eps: f64, m: usize) -> Result<BumpFamily> {
    if k > 1 {
        return Err(Error::BadDegree(format!("bump families exist for k in {{0, 1}}, got {k}")));
    }
    let (_, hi) = counterexample_exponents(k, pi, eps)?;
    if m == 0 {
        return Err(Error::BadDimension("the family needs at least one bump".into()));
    }
    let n = k + 1;
    let host = ray_complex(n, m)?;
    let (subdivision, map) = host.barycentric_subdivision();
    let q = 1.0 / (hi - eps);
    let bumps = (1..=m)
        .map(|i| {
            let simplex = if n == 1 { vec![i - 1, i] } else { vec![2 * i - 2, 2 * i - 1, 2 * i] };
            let pts: Vec<&[f64]> = simplex.iter().map(|&v| host.coords(v).expect("vertex")).collect();
            let c = host.barycenter(&simplex);
            let radius = facet_distance(&c, &pts);
            let mut center = [0.0; 2];
            center[..n].copy_from_slice(&c);
            Bump { simplex, center, radius, weight: (i as f64).powf(-q) }
        })
        .collect();
    Ok(BumpFamily { k, pi: pi.clone(), eps, host, subdivision, map, bumps })
}

/// Distance from an interior point to the nearest facet hyperplane of a
/// segment or triangle.
fn facet_distance(c: &[f64], pts: &[&[f64]]) -> f64 {
    if pts.len() == 2 {
        return pts.iter().map(|p| (p[0] - c[0]).abs()).fold(f64::INFINITY, f64::min);
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let (a, b) = (pts[(i + 1) % 3], pts[(i + 2) % 3]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let cross = dx * (c[1] - a[1]) - dy * (c[0] - a[0]);
        best = best.min(cross.abs() / dx.hypot(dy));
    }
    best
}

impl BumpFamily {
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.k + 1
    }

    pub fn pi(&self) -> &PiSequence {
        &self.pi
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }

    pub fn host(&self) -> &MetricComplex {
        &self.host
    }

    pub fn subdivision(&self) -> &MetricComplex {
        &self.subdivision
    }

    pub fn subdivision_map(&self) -> &SubdivisionMap {
        &self.map
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// `w_i`, one-based.
    pub fn weight(&self, i: usize) -> f64 {
        self.bumps[i - 1].weight
    }

    /// `1 / (p_{k+1} - eps)`.
    pub fn weight_exponent(&self) -> f64 {
        1.0 / (self.pi.p(self.k + 1).expect("checked") - self.eps)
    }

    /// `sup |omega_i| = sqrt(binom(n, k)) w_i / e`.
    pub fn sup_norm(&self, i: usize) -> f64 {
        binomial(self.n(), self.k).sqrt() * self.weight(i) * (-1.0f64).exp()
    }

    /// Value of the `sum dx_I` coefficient of `sum_i omega_i` at `x`.
    pub fn coefficient(&self, x: &[f64]) -> f64 {
        self.bumps.iter().map(|b| b.coefficient(x)).sum()
    }

    /// True when every bump's closed support lies in the closed top simplex
    /// carrying it, so supports of different bumps meet in no open set.
    pub fn supports_disjoint(&self) -> bool {
        self.bumps.iter().all(|b| {
            let pts: Vec<&[f64]> = b.simplex.iter().map(|&v| self.host.coords(v).expect("vertex")).collect();
            let c = &b.center[..self.n()];
            facet_distance(c, &pts) >= b.radius * (1.0 - 1e-12)
        }) && self.bumps.windows(2).all(|w| w[0].simplex != w[1].simplex)
    }

    /// `int_B |omega_1 / w_1|^p`, the per-bump factor of the form norm.
    fn form_constant(&self, p: f64) -> f64 {
        let b = &self.bumps[0];
        let scale = binomial(self.n(), self.k).powf(p / 2.0) * b.radius.powi(self.n() as i32);
        let radial = |s: f64| bump_profile(&[s]).powf(p);
        scale
            * if self.n() == 1 {
                2.0 * composite(0.0, 1.0, PANELS, radial)
            } else {
                2.0 * std::f64::consts::PI * composite(0.0, 1.0, PANELS, |s| s * radial(s))
            }
    }

    /// `int |d omega_1 / w_1|^p`.
    fn dform_constant(&self, p: f64) -> f64 {
        let b = &self.bumps[0];
        let r = b.radius;
        let radial = |s: f64| radial_derivative(s).abs().powf(p);
        if self.n() == 1 {
            r.powf(1.0 - p) * 2.0 * composite(0.0, 1.0, PANELS, radial)
        } else {
            // |d_1 Psi - d_2 Psi| = |Psi'(s)| |cos t - sin t| = sqrt(2) |Psi'(s)| |cos(t + pi/4)|
            let half_pi = std::f64::consts::FRAC_PI_2;
            let angular = 2f64.powf(p / 2.0) * 4.0 * composite(0.0, half_pi, 4 * PANELS, |t| t.cos().powf(p));
            r.powf(2.0 - p) * angular * composite(0.0, 1.0, PANELS, |s| s * radial(s))
        }
    }
}

/// Which norm of the family a series describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `L_p` norm of `sum omega_i`.
    Form,
    /// `L_p` norm of `sum d omega_i`.
    DForm,
    /// `l_p` norm of the sequence `sup |omega_i|`.
    Sup,
    /// `l_p` norm of the de Rham image of `sum d omega_i` on `K'`.
    Cochain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converges,
    Diverges,
}

/// `S_m = sum_{i <= m} i^{-a}` with its integral-test bracket.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoint {
    pub m: usize,
    pub sum: f64,
    /// `int_1^{m+1} x^{-a} dx`
    pub lower: f64,
    /// `1 + int_1^m x^{-a} dx`
    pub upper: f64,
    /// `m^{1-a} / (a - 1)` when `a > 1`
    pub tail_bound: Option<f64>,
}

impl SeriesPoint {
    pub fn bracketed(&self) -> bool {
        let slack = 1e-12 * self.sum.abs().max(1.0);
        self.lower <= self.sum + slack && self.sum <= self.upper + slack
    }
}

/// Convergence diagnostics of `sum_i c i^{-a}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesVerdict {
    pub exponent: f64,
    pub verdict: Verdict,
    /// `c`: the `p`-th power of the norm is `c * sum_i i^{-a}`.
    pub constant: f64,
    pub partial_sums: Vec<SeriesPoint>,
    /// Tail bound at the last recorded `m` when the series converges.
    pub tail_bound: Option<f64>,
}

impl SeriesVerdict {
    pub fn point(&self, m: usize) -> Option<&SeriesPoint> {
        self.partial_sums.iter().find(|p| p.m == m)
    }

    /// `S_m / (m^{1-a} / (1-a))` for `a < 1`, `S_m / ln m` for `a = 1`.
    pub fn growth_ratio(&self, m: usize) -> Option<f64> {
        let p = self.point(m)?;
        let a = self.exponent;
        let mf = m as f64;
        if a < 1.0 {
            Some(p.sum * (1.0 - a) / mf.powf(1.0 - a))
        } else if a == 1.0 {
            Some(p.sum / mf.ln())
        } else {
            None
        }
    }

    /// Every recorded partial sum sits inside its integral-test bracket.
    pub fn bracketed(&self) -> bool {
        self.partial_sums.iter().all(SeriesPoint::bracketed)
    }

    /// `(c S_m)^{1/p}` at the last recorded `m`.
    pub fn norm_estimate(&self, p: f64) -> f64 {
        let s = self.partial_sums.last().map_or(0.0, |q| q.sum);
        (self.constant * s).powf(1.0 / p)
    }
}

/// `10, 100, ...` up to `m`, followed by `m` itself.
pub fn checkpoints(m: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut c = 10;
    while c < m {
        out.push(c);
        c = c.saturating_mul(10);
    }
    if m > 0 {
        out.push(m);
    }
    out
}

fn integral_power(a: f64, x: f64) -> f64 {
    // int_1^x t^{-a} dt
    if a == 1.0 {
        x.ln()
    } else {
        (x.powf(1.0 - a) - 1.0) / (1.0 - a)
    }
}

/// Partial sums of `sum i^{-a}` at the given (increasing) checkpoints.
pub fn series_verdict(a: f64, constant: f64, ms: &[usize]) -> SeriesVerdict {
    let mut partial_sums = Vec::with_capacity(ms.len());
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut i = 0usize;
    for &m in ms {
        while i < m {
            i += 1;
            // Neumaier summation
            let t = (i as f64).powf(-a);
            let s = sum + t;
            comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
            sum = s;
        }
        let mf = m as f64;
        partial_sums.push(SeriesPoint {
            m,
            sum: sum + comp,
            lower: integral_power(a, mf + 1.0),
            upper: 1.0 + integral_power(a, mf),
            tail_bound: (a > 1.0).then(|| mf.powf(1.0 - a) / (a - 1.0)),
        });
    }
    let verdict = if a > 1.0 { Verdict::Converges } else { Verdict::Diverges };
    let tail_bound = partial_sums.last().and_then(|p| p.tail_bound);
    SeriesVerdict { exponent: a, verdict, constant, partial_sums, tail_bound }
}

/// Series for the `p`-norm of the family, sampled at `10, 100, ..., M`.
pub fn family_norm_series(fam: &BumpFamily, p: f64, which: NormKind) -> Result<SeriesVerdict> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::BadExponent(format!("p = {p} must be at least 1")));
    }
    let a = p * fam.weight_exponent();
    let constant = match which {
        NormKind::Form => fam.form_constant(p),
        NormKind::DForm => fam.dform_constant(p),
        NormKind::Sup => (fam.sup_norm(1) / fam.weight(1)).powf(p),
        NormKind::Cochain => reference_image(fam).iter().map(|(_, c)| c.abs().powf(p)).sum(),
    };
    Ok(series_verdict(a, constant, &checkpoints(fam.len())))
}

/// `int_a^b g'(x) dx` along the segment in one dimension, by quadrature.
fn segment_d_integral(b: &Bump, xa: f64, xb: f64) -> f64 {
    composite(xa, xb, PANELS, |x| b.d_coefficient(&[x]))
}

/// `int_[a, b] g (dx_1 + dx_2)` in two dimensions.
fn segment_line_integral(b: &Bump, pa: &[f64], pb: &[f64]) -> f64 {
    let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
    (dx + dy) * composite(0.0, 1.0, PANELS, |t| b.coefficient(&[pa[0] + t * dx, pa[1] + t * dy]))
}

/// `int f dA` over the part of the bump disc between the angles `t0 < t1`,
/// in polar coordinates about the centre.
fn sector_integral(b: &Bump, t0: f64, t1: f64) -> f64 {
    let c = b.center;
    composite(t0, t1, 4, |t| {
        let (sn, cs) = t.sin_cos();
        composite(0.0, b.radius, PANELS, |s| s * b.d_coefficient(&[c[0] + s * cs, c[1] + s * sn]))
    })
}

/// Oriented `int_tau d omega_i` over a triangle that either has the bump
/// centre as a vertex or contains the whole disc. In the first case the
/// opposite side lies on a facet of the carrier, so the disc meets the
/// triangle in a sector.
fn triangle_d_integral(b: &Bump, pts: &[&[f64]]) -> f64 {
    let e1 = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
    let e2 = [pts[2][0] - pts[0][0], pts[2][1] - pts[0][1]];
    let sign = (e1[0] * e2[1] - e1[1] * e2[0]).signum();
    let c = b.center;
    let apex = pts.iter().position(|p| (p[0] - c[0]).abs() < 1e-12 && (p[1] - c[1]).abs() < 1e-12);
    let unsigned = match apex {
        None => {
            debug_assert!(facet_distance(&c, pts) >= b.radius * (1.0 - 1e-12));
            sector_integral(b, 0.0, 2.0 * std::f64::consts::PI)
        }
        Some(j) => {
            let others: Vec<&[f64]> = (0..3).filter(|&q| q != j).map(|q| pts[q]).collect();
            let ang = |p: &[f64]| (p[1] - c[1]).atan2(p[0] - c[0]);
            let (ta, tb) = (ang(others[0]), ang(others[1]));
            let mut d = tb - ta;
            if d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            } else if d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            let (lo, hi) = if d >= 0.0 { (ta, ta + d) } else { (ta + d, ta) };
            sector_integral(b, lo, hi)
        }
    };
    sign * unsigned
}

/// Oriented integral of `d omega_i` over a top simplex given by coordinates
/// in canonical vertex order.
fn d_integral(b: &Bump, pts: &[&[f64]]) -> f64 {
    if pts.len() == 2 {
        segment_d_integral(b, pts[0][0], pts[1][0])
    } else {
        triangle_d_integral(b, pts)
    }
}

/// Oriented integral of `omega_i` over a `k`-simplex.
fn form_integral(b: &Bump, pts: &[&[f64]]) -> f64 {
    if pts.len() == 1 {
        b.coefficient(pts[0])
    } else {
        segment_line_integral(b, pts[0], pts[1])
    }
}

/// Result of integrating the family over the simplices of `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub bumps_checked: usize,
    /// `max |int_s omega_i|` over bumps and `k`-simplices
    pub max_form: f64,
    /// `max |int_s d omega_i|` over bumps and `(k+1)`-simplices
    pub max_dform: f64,
    /// the same maxima for `sum_i omega_i`
    pub max_sum_form: f64,
    pub max_sum_dform: f64,
    pub passes: bool,
}

pub const KERNEL_TOL: f64 = 1e-10;

/// Integrates each `omega_i` over the `k`-faces of its carrier and `d omega_i`
/// over the carrier. All other simplices of `K` lie outside the closed support.
pub fn derham_kernel_check(fam: &BumpFamily) -> KernelReport {
    let k = fam.k;
    let host = &fam.host;
    let mut sum_form = vec![0.0; host.count(k)];
    let mut sum_dform = vec![0.0; host.count(k + 1)];
    let (mut max_form, mut max_dform) = (0.0f64, 0.0f64);
    for b in &fam.bumps {
        let pts: Vec<&[f64]> = b.simplex.iter().map(|&v| host.coords(v).expect("vertex")).collect();
        let top = d_integral(b, &pts);
        max_dform = max_dform.max(top.abs());
        sum_dform[host.index_of(&b.simplex).expect("carrier")] += top;
        for skip in 0..b.simplex.len() {
            let face: Vec<usize> = b.simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &v)| v).collect();
            let fpts: Vec<&[f64]> = face.iter().map(|&v| host.coords(v).expect("vertex")).collect();
            let val = form_integral(b, &fpts);
            max_form = max_form.max(val.abs());
            sum_form[host.index_of(&face).expect("face")] += val;
        }
    }
    let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (max_sum_form, max_sum_dform) = (amax(&sum_form), amax(&sum_dform));
    KernelReport {
        bumps_checked: fam.len(),
        max_form,
        max_dform,
        max_sum_form,
        max_sum_dform,
        passes: [max_form, max_dform, max_sum_form, max_sum_dform].iter().all(|v| *v <= KERNEL_TOL),
    }
}

/// The `(k+1)`-simplices of `K'` inside the carrier of bump `i`, as sorted
/// vertex ids of `K'` with their ambient orientation sign (+1 when the
/// canonical order runs left to right, or counterclockwise).
fn subdivided_cells(fam: &BumpFamily, b: &Bump) -> Vec<(Vec<usize>, f64)> {
    use itertools::Itertools;
    let host = &fam.host;
    let sub = &fam.subdivision;
    let mut cells = Vec::new();
    for perm in b.simplex.iter().copied().permutations(b.simplex.len()) {
        let mut ids = Vec::with_capacity(perm.len());
        for j in 1..=perm.len() {
            let mut face: Vec<usize> = perm[..j].to_vec();
            face.sort_unstable();
            ids.push(fam.map.barycenter_id(host, &face).expect("face of carrier"));
        }
        ids.sort_unstable();
        let pts: Vec<&[f64]> = ids.iter().map(|&v| sub.coords(v).expect("vertex")).collect();
        let sign = if pts.len() == 2 {
            (pts[1][0] - pts[0][0]).signum()
        } else {
            let e1 = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
            let e2 = [pts[2][0] - pts[0][0], pts[2][1] - pts[0][1]];
            (e1[0] * e2[1] - e1[1] * e2[0]).signum()
        };
        cells.push((ids, sign));
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0));
    cells
}

/// Unit-weight image of `d omega_1` on its cells in `K'`, canonical orientation.
fn reference_image(fam: &BumpFamily) -> Vec<(Vec<usize>, f64)> {
    let b = &fam.bumps[0];
    let unit = Bump { weight: 1.0, ..b.clone() };
    subdivided_cells(fam, b)
        .into_iter()
        .map(|(ids, _)| {
            let pts: Vec<&[f64]> = ids.iter().map(|&v| fam.subdivision.coords(v).expect("vertex")).collect();
            let v = d_integral(&unit, &pts);
            (ids, v)
        })
        .collect()
}

/// De Rham image of `sum_i d omega_i` on `K'` and its membership diagnostics.
#[derive(Clone)]
pub struct SubdivisionImage<'a> {
    pub cochain: Cochain<'a>,
    /// Values of the first bump's cells for unit weight, canonical orientation.
    pub reference: Vec<f64>,
    /// The same values re-oriented left to right (or counterclockwise).
    pub ambient_reference: Vec<f64>,
    /// `max_i max_cells |c - reference * w_i|`
    pub max_deviation: f64,
    /// Largest relative gap between `sum_{i <= m} sum_cells |c|^p` and
    /// `constant * S_m` over the checkpoints of both series.
    pub max_series_mismatch: f64,
    /// `l_{p_{k+1}}` series of the cochain
    pub upper: SeriesVerdict,
    /// `l_{p_k}` series of the cochain
    pub lower: SeriesVerdict,
    pub passes: bool,
}

/// Integrates each `d omega_i` over the `(k+1)`-simplices of `K'`.
pub fn subdivision_image(fam: &BumpFamily) -> Result<SubdivisionImage<'_>> {
    let reference_cells = reference_image(fam);
    let first_cells = subdivided_cells(fam, &fam.bumps[0]);
    let reference: Vec<f64> = reference_cells.iter().map(|(_, v)| *v).collect();
    let ambient_reference: Vec<f64> = reference.iter().zip(&first_cells).map(|(v, (_, s))| v * s).collect();
    let (lo, hi) = (fam.pi.p(fam.k).expect("checked"), fam.pi.p(fam.k + 1).expect("checked"));
    let upper = family_norm_series(fam, hi, NormKind::Cochain)?;
    let lower = family_norm_series(fam, lo, NormKind::Cochain)?;

    let mut entries = Vec::with_capacity(fam.len() * reference.len());
    let mut max_deviation = 0.0f64;
    let checks = [(hi, &upper), (lo, &lower)];
    let mut running = [0.0f64; 2];
    let mut max_series_mismatch = 0.0f64;
    let mut next = 0;
    let marks = checkpoints(fam.len());
    for (i, b) in fam.bumps.iter().enumerate() {
        for ((ids, _), r) in subdivided_cells(fam, b).into_iter().zip(&reference) {
            let pts: Vec<&[f64]> = ids.iter().map(|&v| fam.subdivision.coords(v).expect("vertex")).collect();
            let v = d_integral(b, &pts);
            max_deviation = max_deviation.max((v - r * b.weight).abs());
            for (acc, (p, _)) in running.iter_mut().zip(&checks) {
                *acc += v.abs().powf(*p);
            }
            entries.push((ids, v));
        }
        if next < marks.len() && marks[next] == i + 1 {
            for (acc, (_, s)) in running.iter().zip(&checks) {
                let expected = s.constant * s.partial_sums[next].sum;
                max_series_mismatch = max_series_mismatch.max((acc - expected).abs() / expected.abs());
            }
            next += 1;
        }
    }
    let cochain = Cochain::from_values(&fam.subdivision, fam.k + 1, entries)?;
    let passes = max_deviation <= 1e-12 * reference.iter().fold(1.0f64, |m, v| m.max(v.abs()))
        && max_series_mismatch <= 1e-9
        && upper.verdict == Verdict::Converges
        && lower.verdict == Verdict::Diverges
        && upper.bracketed()
        && lower.bracketed();
    Ok(SubdivisionImage { cochain, reference, ambient_reference, max_deviation, max_series_mismatch, upper, lower, passes })
}

/// Numeric content of the obstruction for one truncation length.
#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub m: usize,
    pub kernel: KernelReport,
    /// `p_{k+1}` series of `omega` and of `d omega`
    pub form_upper: SeriesVerdict,
    pub dform_upper: SeriesVerdict,
    /// `p_k` series of `d omega`
    pub dform_lower: SeriesVerdict,
    /// `l_{p_{k+1}}` and `l_{p_k}` series of the `K'` image
    pub image_upper: SeriesVerdict,
    pub image_lower: SeriesVerdict,
    pub image_deviation: f64,
    pub kernel_ok: bool,
    pub cauchy_ok: bool,
    pub divergence_ok: bool,
    pub gap_ok: bool,
}

/// The family rebuilt with the two exponents swapped: both series converge.
#[derive(Clone, Debug)]
pub struct SwappedControl {
    pub pi: PiSequence,
    pub series: Vec<SeriesVerdict>,
    pub all_converge: bool,
}

#[derive(Clone, Debug)]
pub struct NontrivialityReport {
    pub k: usize,
    pub eps: f64,
    pub truncations: Vec<TruncationReport>,
    pub control: SwappedControl,
    pub passes: bool,
}

/// Cauchy certificate: the series converges and its integral-test tail
/// bound decreases across the checkpoints.
fn cauchy(s: &SeriesVerdict) -> bool {
    s.verdict == Verdict::Converges
        && s.bracketed()
        && s.partial_sums.windows(2).all(|w| w[1].tail_bound < w[0].tail_bound)
}

/// Divergence certificate: `a <= 1`, the bracket holds and the partial sums
/// keep growing.
fn divergent(s: &SeriesVerdict) -> bool {
    s.verdict == Verdict::Diverges && s.bracketed() && s.partial_sums.windows(2).all(|w| w[1].sum > w[0].sum)
}

/// Degree of the first increase of `pi`.
fn first_increase(pi: &PiSequence) -> Option<usize> {
    (0..pi.exponents().len().saturating_sub(1)).find(|&k| pi.increases_at(k))
}

/// Series of the weights `i^{-1/(p'_{k+1} - eps)}` measured in `p'_k` and
/// `p'_{k+1}`, where `p'` swaps `p_k` and `p_{k+1}`.
pub fn swapped_control(pi: &PiSequence, k: usize, eps: f64, m: usize) -> Result<SwappedControl> {
    let mut ex = pi.exponents().to_vec();
    if k + 1 >= ex.len() {
        return Err(Error::BadDegree(format!("pi has no exponent p_{}", k + 1)));
    }
    ex.swap(k, k + 1);
    let swapped = PiSequence::new(ex, pi.n())?;
    let (lo, hi) = (swapped.p(k).expect("present"), swapped.p(k + 1).expect("present"));
    if !(eps > 0.0 && eps < hi) {
        return Err(Error::BadEpsilon { eps, upper: hi });
    }
    let q = 1.0 / (hi - eps);
    let ms = checkpoints(m);
    let series: Vec<SeriesVerdict> = [lo, hi].iter().map(|p| series_verdict(p * q, 1.0, &ms)).collect();
    let all_converge = series.iter().all(cauchy);
    Ok(SwappedControl { pi: swapped, series, all_converge })
}

/// Runs every check on the family for each truncation length in `ms`, plus
/// the swapped control at the largest length.
pub fn verify_nontriviality(pi: &PiSequence, eps: f64, ms: &[usize]) -> Result<NontrivialityReport> {
    let k = first_increase(pi)
        .ok_or_else(|| Error::NotACounterexample("the exponent sequence never increases".into()))?;
    if pi.n() != k + 1 {
        return Err(Error::BadDimension(format!(
            "the family lives in dimension k + 1 = {}, but pi is for n = {}",
            k + 1,
            pi.n()
        )));
    }
    counterexample_exponents(k, pi, eps)?;
    let (lo, hi) = (pi.p(k).expect("present"), pi.p(k + 1).expect("present"));
    let mut truncations = Vec::new();
    for &m in ms {
        let fam = build_family(k, pi, eps, m)?;
        let kernel = derham_kernel_check(&fam);
        let form_upper = family_norm_series(&fam, hi, NormKind::Form)?;
        let dform_upper = family_norm_series(&fam, hi, NormKind::DForm)?;
        let dform_lower = family_norm_series(&fam, lo, NormKind::DForm)?;
        let image = subdivision_image(&fam)?;
        let kernel_ok = kernel.passes && fam.supports_disjoint();
        let cauchy_ok = cauchy(&form_upper) && cauchy(&dform_upper);
        let divergence_ok = divergent(&dform_lower);
        let gap_ok = image.passes;
        truncations.push(TruncationReport {
            m,
            kernel,
            form_upper,
            dform_upper,
            dform_lower,
            image_upper: image.upper.clone(),
            image_lower: image.lower.clone(),
            image_deviation: image.max_deviation,
            kernel_ok,
            cauchy_ok,
            divergence_ok,
            gap_ok,
        });
    }
    let control = swapped_control(pi, k, eps, ms.iter().copied().max().unwrap_or(10))?;
    let passes = control.all_converge
        && truncations.iter().all(|t| t.kernel_ok && t.cauchy_ok && t.divergence_ok && t.gap_ok);
    Ok(NontrivialityReport { k, eps, truncations, control, passes })
}
