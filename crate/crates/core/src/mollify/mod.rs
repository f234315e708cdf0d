//! Regularization of sampled forms on the unit ball.
//!
//! `R w = sum_q tau_q s_{eps v_q}^* w` averages pullbacks along the family
//! `s_v = h o (+v) o h^{-1}` with a discrete bump kernel `tau`. The cone
//! operator `S` and `A = (R - 1) S` satisfy `dA + Ad = R - 1`, which is
//! checked on the grid.

mod diffeo;
mod grid;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;

pub use diffeo::{ball_diffeo, from_ball, to_ball};
pub use grid::{GridForm, Interpolation};

use diffeo::{norm2, shift_n};

/// Kernel and scale of the regularization.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifierConfig {
    epsilon: f64,
    kernel_grid: usize,
    profile_power: f64,
    interpolation: Interpolation,
}

impl MollifierConfig {
    /// Profile `exp(-1 / (1 - |v|^2))` with a 21-node midpoint rule per axis.
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_kernel(epsilon, 21, 1.0)
    }

    /// Profile `exp(-1 / (1 - |v|^2)^power)`. Even node counts are raised
    /// by one so that `v = 0` is a node.
    pub fn with_kernel(epsilon: f64, kernel_grid: usize, profile_power: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::BadEpsilon { eps: epsilon, upper: 1.0 });
        }
        if !(profile_power > 0.0) {
            return Err(Error::BadExponent(format!("profile power {profile_power} must be positive")));
        }
        let kernel_grid = kernel_grid.max(1) | 1;
        Ok(MollifierConfig { epsilon, kernel_grid, profile_power, interpolation: Interpolation::default() })
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kernel_grid(&self) -> usize {
        self.kernel_grid
    }

    /// Kernel nodes `v` in `(-1, 1)^n` with their weights. The weights are
    /// invariant under `v -> -v` and sum to exactly 1 when added in order.
    pub fn kernel(&self, n: usize) -> Vec<(Vec<f64>, f64)> {
        let g = self.kernel_grid;
        let c = (g / 2) as isize;
        let step = 2.0 / g as f64;
        let axis: Vec<f64> = (0..g as isize).map(|i| (i - c) as f64 * step).collect();
        let mut nodes: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut center = None;
        let total = g.pow(n as u32);
        for flat in 0..total {
            let v: Vec<f64> = (0..n)
                .map(|a| axis[(flat / g.pow((n - 1 - a) as u32)) % g])
                .collect();
            let r2 = norm2(&v);
            let w = if r2 < 1.0 { (-1.0 / (1.0 - r2).powf(self.profile_power)).exp() } else { 0.0 };
            if v.iter().all(|a| *a == 0.0) {
                center = Some((v, w));
            } else if w > 0.0 {
                nodes.push((v, w));
            }
        }
        let (cv, cw) = center.expect("odd grid has a center");
        let sum: f64 = nodes.iter().map(|(_, w)| w).sum::<f64>() + cw;
        let mut acc = 0.0;
        for (_, w) in &mut nodes {
            *w /= sum;
            acc += *w;
        }
        nodes.push((cv, 1.0 - acc));
        nodes
    }
}

fn det_block(jac: &[[f64; 2]; 2], rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => jac[rows[0]][cols[0]],
        _ => jac[rows[0]][cols[0]] * jac[rows[1]][cols[1]] - jac[rows[0]][cols[1]] * jac[rows[1]][cols[0]],
    }
}

/// Largest displacement `|s_{eps v} x - x|` over unmasked nodes and kernel nodes.
pub fn max_displacement(grid: &GridForm, cfg: &MollifierConfig) -> f64 {
    if cfg.epsilon == 0.0 {
        return 0.0;
    }
    let kernel = scaled_kernel(cfg, grid.n());
    let mut m = 0.0f64;
    for idx in 0..grid.len() {
        if !grid.is_active(idx) {
            continue;
        }
        let x = grid.node_array(idx);
        for (v, _) in &kernel {
            let (y, _) = shift_n(grid.n(), v, &x);
            let d2: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            m = m.max(d2.sqrt());
        }
    }
    m
}

/// Kernel nodes multiplied by `eps`, in fixed-size arrays.
fn scaled_kernel(cfg: &MollifierConfig, n: usize) -> Vec<([f64; 2], f64)> {
    cfg.kernel(n)
        .into_iter()
        .map(|(v, w)| {
            let mut a = [0.0; 2];
            for (x, y) in a.iter_mut().zip(&v) {
                *x = cfg.epsilon * y;
            }
            (a, w)
        })
        .collect()
}

/// `R w`. Computed as `w + sum_q tau_q (s_q^* w - w)`, so constants and
/// `eps = 0` are reproduced exactly.
pub fn regularize(w: &GridForm, cfg: &MollifierConfig) -> GridForm {
    if cfg.epsilon == 0.0 {
        return w.clone();
    }
    let n = w.n();
    let kernel = scaled_kernel(cfg, n);
    let sets = w.component_sets();
    let ncomp = sets.len();
    let mut out = w.clone();
    
    let mut at_y = [0.0; 2];
    for idx in 0..w.len() {
        if !w.is_active(idx) {
            continue;
        }
        let x = w.node_array(idx);
        let mut acc = [0.0; 2];
        for (v, tau) in &kernel {
            let (y, jac) = shift_n(n, v, &x);
            w.interpolate_all(&y[..n], cfg.interpolation, &mut at_y[..ncomp]);
            for (i, si) in sets.iter().enumerate() {
                let pulled: f64 = sets
                    .iter()
                    .enumerate()
                    .map(|(j, sj)| at_y[j] * det_block(&jac, sj, si))
                    .sum();
                acc[i] += tau * (pulled - w.components()[i][idx]);
            }
        }
        for (i, a) in acc.iter().take(ncomp).enumerate() {
            out.components_mut()[i][idx] = w.components()[i][idx] + a;
        }
    }
    out
}

/// Cone operator `(S w)(x) = int_0^1 t^{k-1} i_x w(tx) dt`, by composite
/// Gauss rules along each ray with panels of about one cell.
pub fn cone_s(w: &GridForm) -> Result<GridForm> {
    cone_s_with(w, Interpolation::default())
}

pub fn cone_s_with(w: &GridForm, kind: Interpolation) -> Result<GridForm> {
    let k = w.degree();
    if k == 0 {
        return Err(Error::BadDegree("the cone operator needs k >= 1".into()));
    }
    let n = w.n();
    let h = w.spacing();
    let mut out = w.like(k - 1);
    let src = w.component_sets();
    let dst = out.component_sets();
    let gl = gauss_legendre_unit(3);
    // i_x dx_J = sum_r (-1)^r x_{J_r} dx_{J \ J_r}: for each source component,
    // the target component, the contracted axis and the sign
    let mut contractions = Vec::new();
    for (js, set) in src.iter().enumerate() {
        for r in 0..set.len() {
            let rest: Vec<usize> = set.iter().enumerate().filter(|(j, _)| *j != r).map(|(_, &a)| a).collect();
            let jd = dst.iter().position(|s| s.as_slice() == rest.as_slice()).expect("subset");
            contractions.push((js, jd, set[r], if r % 2 == 0 { 1.0 } else { -1.0 }));
        }
    }
    for idx in 0..w.len() {
        if !w.is_active(idx) {
            continue;
        }
        let x = w.node_array(idx);
        let reach: f64 = x[..n].iter().map(|a| a.abs()).sum::<f64>() / h;
        let panels = ((reach - 1e-9).ceil() as usize).max(1);
        // integrals of t^{k-1} w_J(tx) for every source component
        let mut integrals = vec![0.0; src.len()];
        let mut p = [0.0; 2];
        let mut vals = [0.0; 2];
        for panel in 0..panels {
            let (a, b) = (panel as f64 / panels as f64, (panel + 1) as f64 / panels as f64);
            for &(u, wu) in &gl {
                let t = a + (b - a) * u;
                for (pa, xa) in p.iter_mut().zip(&x) {
                    *pa = t * xa;
                }
                let weight = wu * (b - a) * t.powi(k as i32 - 1);
                w.interpolate_all(&p[..n], kind, &mut vals[..src.len()]);
                for (acc, v) in integrals.iter_mut().zip(&vals) {
                    *acc += weight * v;
                }
            }
        }
        for &(js, jd, axis, sign) in &contractions {
            out.components_mut()[jd][idx] += sign * x[axis] * integrals[js];
        }
    }
    Ok(out)
}

/// `A w = (R - 1) S w`.
pub fn homotopy_a(w: &GridForm, cfg: &MollifierConfig) -> Result<GridForm> {
    let s = cone_s_with(w, cfg.interpolation)?;
    regularize(&s, cfg).sub(&s)
}

/// Residual of `dA + Ad = R - 1` on one form.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyReport {
    pub residual: f64,
    pub tolerance: f64,
    pub passes: bool,
    /// Nodes are checked where `|x| < 1 - collar`.
    pub collar: f64,
    pub nodes_checked: usize,
}

/// Max-norm of `d(Aw) + A(dw) - (Rw - w)` away from the rim. Terms that do
/// not exist (`dA` for 0-forms, `Ad` for top forms) are omitted.
pub fn verify_homotopy(w: &GridForm, cfg: &MollifierConfig, tol: f64) -> Result<HomotopyReport> {
    let k = w.degree();
    let n = w.n();
    let rw = regularize(w, cfg);
    let mut lhs = rw.sub(w)?.scale(-1.0);
    if k >= 1 {
        lhs = lhs.add(&homotopy_a(w, cfg)?.d()?)?;
    }
    if k < n {
        lhs = lhs.add(&homotopy_a(&w.d()?, cfg)?)?;
    }
    let collar = cfg.epsilon() + 2.0 * w.spacing();
    let limit = (1.0 - collar).max(0.0);
    let inside = |x: &[f64]| norm2(x).sqrt() < limit;
    let residual = lhs.max_abs_where(inside);
    let nodes_checked = (0..w.len()).filter(|&i| w.is_active(i) && inside(&w.node(i))).count();
    Ok(HomotopyReport { residual, tolerance: tol, passes: residual <= tol, collar, nodes_checked })
}

/// Homotopy residuals of the form sampled by `f` at each spacing in `hs`.
pub fn homotopy_convergence<F>(n: usize, degree: usize, f: F, cfg: &MollifierConfig, hs: &[f64]) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    hs.iter()
        .map(|&h| {
            let w = GridForm::sample(n, h, degree, &f)?;
            Ok((h, verify_homotopy(&w, cfg, f64::INFINITY)?.residual))
        })
        .collect()
}

/// Observed orders `log(r_i / r_{i+1}) / log(h_i / h_{i+1})` between consecutive runs.
pub fn observed_orders(runs: &[(f64, f64)]) -> Vec<f64> {
    runs.windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}

/// Outcome of a support-control check.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportReport {
    /// Largest kernel displacement.
    pub delta: f64,
    /// Radius of the checked disc: `r - delta` less the interpolation reach.
    pub checked_radius: f64,
    /// Largest `|w|` on the original disc (0 when the hypothesis holds).
    pub input_max: f64,
    /// Largest `|R w|` on the checked disc.
    pub max_abs: f64,
    pub passes: bool,
}

/// Tolerance for `R w` on the shrunk disc.
pub const SUPPORT_TOL: f64 = 1e-12;

/// For `w` vanishing on `{|x - center| < r}`, checks that `R w` vanishes on
/// the disc shrunk by the kernel displacement and the interpolation reach.
pub fn verify_support_control(w: &GridForm, cfg: &MollifierConfig, center: &[f64], r: f64) -> Result<SupportReport> {
    if center.len() != w.n() {
        return Err(Error::BadDimension("center does not match the grid dimension".into()));
    }
    let dist = |x: &[f64]| x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let delta = max_displacement(w, cfg);
    // the interpolation stencil spans one cell (multilinear) or two (cubic)
    let cells = match cfg.interpolation {
        Interpolation::Cubic => 2.0,
        Interpolation::Multilinear => 1.0,
    };
    let reach = if cfg.epsilon() == 0.0 { 0.0 } else { cells * (w.n() as f64).sqrt() * w.spacing() };
    let checked_radius = r - delta - reach;
    let input_max = w.max_abs_where(|x| dist(x) < r);
    let rw = regularize(w, cfg);
    let max_abs = rw.max_abs_where(|x| dist(x) < checked_radius);
    Ok(SupportReport { delta, checked_radius, input_max, max_abs, passes: input_max == 0.0 && max_abs <= SUPPORT_TOL })
}

impl GridForm {
    pub fn scale(&self, c: f64) -> GridForm {
        let zero = self.like(self.degree());
        zero.axpy(c, self).expect("same grid")
    }
}
