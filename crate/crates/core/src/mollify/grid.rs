use crate::error::{Error, Result};
use crate::polyform::{basis_sets, DiffSet};

/// A differential form sampled on the regular grid over `[-1, 1]^n`,
/// `n` in `{1, 2}`. Nodes with `|x| >= 1` are masked and hold 0.
///
/// Node `(i_0, .., i_{n-1})` sits at `x_a = -1 + i_a h` and is stored at the
/// row-major offset with the first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridForm {
    n: usize,
    h: f64,
    degree: usize,
    side: usize,
    components: Vec<Vec<f64>>,
    active: Vec<bool>,
}

/// Interpolation used to evaluate a grid form between nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Tensor-product cubic convolution (Catmull-Rom), which is C^1 and
    /// reproduces quadratics; cells whose 4^n stencil leaves the unmasked
    /// region fall back to multilinear.
    #[default]
    Cubic,
    /// Tensor-product linear interpolation.
    Multilinear,
}

/// Catmull-Rom weights for offsets -1, 0, 1, 2 at fraction `u`.
fn cubic_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        0.5 * (-u3 + 2.0 * u2 - u),
        0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
        0.5 * (-3.0 * u3 + 4.0 * u2 + u),
        0.5 * (u3 - u2),
    ]
}

impl GridForm {
    /// Zero form. `2 / h` must be an integer.
    pub fn zero(n: usize, h: f64, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::BadDimension(format!("grid forms live in R^1 or R^2, got n = {n}")));
        }
        if degree > n {
            return Err(Error::BadDegree(format!("{degree}-form in R^{n}")));
        }
        let cells = 2.0 / h;
        if !(h > 0.0) || (cells - cells.round()).abs() > 1e-9 || cells.round() < 2.0 {
            return Err(Error::BadDimension(format!("spacing {h} does not divide [-1, 1]")));
        }
        let side = cells.round() as usize + 1;
        let len = side.pow(n as u32);
        let ncomp = basis_sets(n, degree).len();
        let mut g = GridForm { n, h, degree, side, components: vec![vec![0.0; len]; ncomp], active: Vec::new() };
        g.active = (0..len)
            .map(|idx| {
                let m = g.multi_index(idx);
                (0..n).map(|a| g.coord(m[a]).powi(2)).sum::<f64>() < 1.0
            })
            .collect();
        Ok(g)
    }

    /// Samples `f`, which returns the components in canonical order, at the
    /// unmasked nodes.
    pub fn sample<F: Fn(&[f64]) -> Vec<f64>>(n: usize, h: f64, degree: usize, f: F) -> Result<Self> {
        let mut g = Self::zero(n, h, degree)?;
        let ncomp = g.components.len();
        for idx in 0..g.len() {
            if !g.is_active(idx) {
                continue;
            }
            let vals = f(&g.node(idx));
            if vals.len() != ncomp {
                return Err(Error::BadDimension(format!("sampler returned {} components, expected {ncomp}", vals.len())));
            }
            for (c, v) in vals.into_iter().enumerate() {
                g.components[c][idx] = v;
            }
        }
        Ok(g)
    }

    /// Builds a form from raw component arrays; masked entries are zeroed.
    pub fn from_components(n: usize, h: f64, degree: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        let mut g = Self::zero(n, h, degree)?;
        if components.len() != g.components.len() || components.iter().any(|c| c.len() != g.len()) {
            return Err(Error::BadDimension("component arrays do not match the grid".into()));
        }
        g.components = components;
        for idx in 0..g.len() {
            if !g.is_active(idx) {
                for c in &mut g.components {
                    c[idx] = 0.0;
                }
            }
        }
        Ok(g)
    }

    pub(crate) fn like(&self, degree: usize) -> GridForm {
        GridForm::zero(self.n, self.h, degree).expect("same grid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Nodes per axis.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Total number of nodes, masked ones included.
    pub fn len(&self) -> usize {
        self.side.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis subsets labelling the components.
    pub fn component_sets(&self) -> Vec<DiffSet> {
        basis_sets(self.n, self.degree)
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.components
    }

    pub(crate) fn coord(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.h
    }

    pub(crate) fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.n == 1 {
            [idx, 0]
        } else {
            [idx / self.side, idx % self.side]
        }
    }

    pub(crate) fn flat(&self, m: [usize; 2]) -> usize {
        if self.n == 1 {
            m[0]
        } else {
            m[0] * self.side + m[1]
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let m = self.multi_index(idx);
        (0..self.n).map(|a| self.coord(m[a])).collect()
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.active[idx]
    }

    /// Node coordinates without allocating; unused entries are 0.
    pub(crate) fn node_array(&self, idx: usize) -> [f64; 2] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 2];
        for a in 0..self.n {
            x[a] = self.coord(m[a]);
        }
        x
    }

    fn active_multi(&self, m: [isize; 2]) -> Option<usize> {
        let s = self.side as isize;
        if (0..self.n).any(|a| m[a] < 0 || m[a] >= s) {
            return None;
        }
        let idx = self.flat([m[0] as usize, m[1] as usize]);
        self.is_active(idx).then_some(idx)
    }

    /// Cell containing `p` and the fractional position inside it.
    fn locate(&self, p: &[f64]) -> ([usize; 2], [f64; 2]) {
        let cells = self.side - 1;
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for a in 0..self.n {
            let u = (p[a] + 1.0) / self.h;
            let i = (u.floor().max(0.0) as usize).min(cells - 1);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        (base, frac)
    }

    /// Value of component `c` at `p` (inside the ball). Constants are
    /// reproduced exactly by every scheme.
    pub fn interpolate(&self, c: usize, p: &[f64], kind: Interpolation) -> f64 {
        let (base, frac) = self.locate(p);
        match kind {
            Interpolation::Cubic => self
                .cubic(c, base, frac)
                .unwrap_or_else(|| self.linear(c, base, frac)),
            Interpolation::Multilinear => self.linear(c, base, frac),
        }
    }

    /// Several components at one point, sharing the stencil lookup.
    pub(crate) fn interpolate_all(&self, p: &[f64], kind: Interpolation, out: &mut [f64]) {
        let (base, frac) = self.locate(p);
        if kind == Interpolation::Cubic && self.cubic_stencil_ok(base) {
            let wx = cubic_weights(frac[0]);
            let wy = cubic_weights(frac[1]);
            for (c, o) in out.iter_mut().enumerate() {
                *o = self.cubic_unchecked(c, base, &wx, &wy);
            }
            return;
        }
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.linear(c, base, frac);
        }
    }

    fn cubic_stencil_ok(&self, base: [usize; 2]) -> bool {
        for a in 0..self.n {
            if base[a] == 0 || base[a] + 2 >= self.side {
                return false;
            }
        }
        // the stencil square lies in the (convex) ball iff its corners do
        let (lo0, hi0) = (base[0] - 1, base[0] + 2);
        if self.n == 1 {
            return self.active[lo0] && self.active[hi0];
        }
        let (lo1, hi1) = (base[1] - 1, base[1] + 2);
        [[lo0, lo1], [lo0, hi1], [hi0, lo1], [hi0, hi1]]
            .iter()
            .all(|&m| self.active[self.flat(m)])
    }

    fn cubic(&self, c: usize, base: [usize; 2], frac: [f64; 2]) -> Option<f64> {
        if !self.cubic_stencil_ok(base) {
            return None;
        }
        Some(self.cubic_unchecked(c, base, &cubic_weights(frac[0]), &cubic_weights(frac[1])))
    }

    fn cubic_unchecked(&self, c: usize, base: [usize; 2], wx: &[f64; 4], wy: &[f64; 4]) -> f64 {
        let vals = &self.components[c];
        if self.n == 1 {
            let r = vals[base[0]];
            let mut acc = 0.0;
            for (o, w) in wx.iter().enumerate() {
                acc += w * (vals[base[0] + o - 1] - r);
            }
            return r + acc;
        }
        let r = vals[self.flat(base)];
        let mut acc = 0.0;
        for (oi, w0) in wx.iter().enumerate() {
            let row = (base[0] + oi - 1) * self.side;
            let mut inner = 0.0;
            for (oj, w1) in wy.iter().enumerate() {
                inner += w1 * (vals[row + base[1] + oj - 1] - r);
            }
            acc += w0 * inner;
        }
        r + acc
    }

    fn linear(&self, c: usize, base: [usize; 2], frac: [f64; 2]) -> f64 {
        let vals = &self.components[c];
        if self.n == 1 {
            let (i0, i1) = (base[0], base[0] + 1);
            if self.is_active(i0) && self.is_active(i1) {
                return vals[i0] + frac[0] * (vals[i1] - vals[i0]);
            }
        } else {
            let f = |i: usize, j: usize| self.flat([base[0] + i, base[1] + j]);
            let corners = [f(0, 0), f(0, 1), f(1, 0), f(1, 1)];
            if corners.iter().all(|&k| self.is_active(k)) {
                let l0 = vals[corners[0]] + frac[1] * (vals[corners[1]] - vals[corners[0]]);
                let l1 = vals[corners[2]] + frac[1] * (vals[corners[3]] - vals[corners[2]]);
                return l0 + frac[0] * (l1 - l0);
            }
        }
        self.masked_interpolate(c, base, frac)
    }

    fn masked_interpolate(&self, c: usize, base: [usize; 2], frac: [f64; 2]) -> f64 {
        let vals = &self.components[c];
        let mut reference = None;
        let mut wsum = 0.0;
        let mut acc = 0.0;
        for corner in 0..(1usize << self.n) {
            let mut m = [0usize; 2];
            let mut w = 1.0;
            for a in 0..self.n {
                let bit = (corner >> (self.n - 1 - a)) & 1;
                m[a] = base[a] + bit;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            let idx = self.flat(m);
            if !self.is_active(idx) {
                continue;
            }
            let r = *reference.get_or_insert(vals[idx]);
            wsum += w;
            acc += w * (vals[idx] - r);
        }
        match reference {
            Some(r) if wsum > 0.0 => r + acc / wsum,
            Some(r) => r,
            None => self.nearest_active(c, base),
        }
    }

    fn nearest_active(&self, c: usize, base: [usize; 2]) -> f64 {
        for radius in 1..=self.side as isize {
            let mut best: Option<(isize, usize)> = None;
            let range = -radius..=radius + 1;
            for di in range.clone() {
                for dj in if self.n == 2 { range.clone() } else { 0..=0 } {
                    let m = [base[0] as isize + di, base[1] as isize + dj];
                    if let Some(idx) = self.active_multi(m) {
                        let d = di * di + dj * dj;
                        if best.map_or(true, |(bd, _)| d < bd) {
                            best = Some((d, idx));
                        }
                    }
                }
            }
            if let Some((_, idx)) = best {
                return self.components[c][idx];
            }
        }
        0.0
    }

    /// Partial derivative of component `c` along `axis` at node `idx`:
    /// central where both neighbours are unmasked, second-order one-sided
    /// otherwise, first-order as a last resort.
    fn partial(&self, c: usize, axis: usize, idx: usize) -> f64 {
        let vals = &self.components[c];
        let m = self.multi_index(idx);
        let step = |k: isize| {
            let mut mm = [m[0] as isize, m[1] as isize];
            mm[axis] += k;
            self.active_multi(mm)
        };
        let h = self.h;
        match (step(-1), step(1)) {
            (Some(a), Some(b)) => (vals[b] - vals[a]) / (2.0 * h),
            (None, Some(b)) => match step(2) {
                Some(b2) => (-3.0 * vals[idx] + 4.0 * vals[b] - vals[b2]) / (2.0 * h),
                None => (vals[b] - vals[idx]) / h,
            },
            (Some(a), None) => match step(-2) {
                Some(a2) => (3.0 * vals[idx] - 4.0 * vals[a] + vals[a2]) / (2.0 * h),
                None => (vals[idx] - vals[a]) / h,
            },
            (None, None) => 0.0,
        }
    }

    /// Finite-difference exterior derivative.
    pub fn d(&self) -> Result<GridForm> {
        if self.degree >= self.n {
            return Err(Error::BadDegree(format!("d of a {}-form in R^{}", self.degree, self.n)));
        }
        let mut out = self.like(self.degree + 1);
        let src_sets = self.component_sets();
        let dst_sets = out.component_sets();
        for (ci, set) in dst_sets.iter().enumerate() {
            // (d w)_I = sum_r (-1)^r d_{I_r} w_{I \ I_r}
            let terms: Vec<(usize, usize, f64)> = (0..set.len())
                .map(|r| {
                    let rest: DiffSet = set.iter().enumerate().filter(|(j, _)| *j != r).map(|(_, &a)| a).collect();
                    let src = src_sets.iter().position(|s| *s == rest).expect("subset");
                    (set[r], src, if r % 2 == 0 { 1.0 } else { -1.0 })
                })
                .collect();
            for idx in 0..self.len() {
                if !self.is_active(idx) {
                    continue;
                }
                let v: f64 = terms.iter().map(|&(axis, src, s)| s * self.partial(src, axis, idx)).sum();
                out.components[ci][idx] = v;
            }
        }
        Ok(out)
    }

    /// Entrywise `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridForm) -> Result<GridForm> {
        if self.n != other.n || self.side != other.side || self.degree != other.degree {
            return Err(Error::BadDimension("grid forms on different grids or degrees".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.components.iter_mut().zip(&other.components) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GridForm) -> Result<GridForm> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &GridForm) -> Result<GridForm> {
        self.axpy(1.0, other)
    }

    /// Largest absolute entry over nodes `x` with `keep(x)`.
    pub fn max_abs_where<F: Fn(&[f64]) -> bool>(&self, keep: F) -> f64 {
        let mut m = 0.0f64;
        for idx in 0..self.len() {
            if !self.is_active(idx) || !keep(&self.node(idx)) {
                continue;
            }
            for c in &self.components {
                m = m.max(c[idx].abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_where(|_| true)
    }
}
