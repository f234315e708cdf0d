use crate::error::{Error, Result};

/// `h(y) = y / sqrt(1 + |y|^2)`, a diffeomorphism `R^n -> B_1`.
pub fn to_ball(y: &[f64]) -> Vec<f64> {
    let s = (1.0 + norm2(y)).sqrt();
    y.iter().map(|a| a / s).collect()
}

/// `h^{-1}(z) = z / sqrt(1 - |z|^2)` for `|z| < 1`.
pub fn from_ball(z: &[f64]) -> Vec<f64> {
    let s = (1.0 - norm2(z)).sqrt();
    z.iter().map(|a| a / s).collect()
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum()
}

/// `s_v(x) = h(h^{-1}(x) + v)` on the open ball, the identity on its boundary.
pub fn ball_diffeo(v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let r2 = norm2(x);
    if r2 > 1.0 {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    if r2 == 1.0 || v.iter().all(|a| *a == 0.0) {
        return Ok(x.to_vec());
    }
    Ok(shift(v, x).0)
}

/// `s_v(x)` and its Jacobian (`J[a][b] = d s_a / d x_b`) for `|x| < 1`.
/// Only the first `n` entries are used.
pub(crate) fn shift_n(n: usize, v: &[f64; 2], x: &[f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let r2: f64 = x[..n].iter().map(|a| a * a).sum();
    let q = 1.0 - r2;
    let sq = q.sqrt();
    let mut z = [0.0; 2];
    for a in 0..n {
        z[a] = x[a] / sq + v[a];
    }
    let p = 1.0 + z[..n].iter().map(|a| a * a).sum::<f64>();
    let sp = p.sqrt();
    let mut out = [0.0; 2];
    for a in 0..n {
        out[a] = z[a] / sp;
    }
    // Dh(z) = (I p - z z^T) / p^{3/2}, Dh^{-1}(x) = (I q + x x^T) / q^{3/2}
    let (cp, cq) = (1.0 / (p * sp), 1.0 / (q * sq));
    let mut dh = [[0.0; 2]; 2];
    let mut dhi = [[0.0; 2]; 2];
    for a in 0..n {
        for b in 0..n {
            let id = if a == b { 1.0 } else { 0.0 };
            dh[a][b] = (id * p - z[a] * z[b]) * cp;
            dhi[a][b] = (id * q + x[a] * x[b]) * cq;
        }
    }
    let mut jac = [[0.0; 2]; 2];
    for a in 0..n {
        for b in 0..n {
            jac[a][b] = (0..n).map(|c| dh[a][c] * dhi[c][b]).sum();
        }
    }
    (out, jac)
}

pub(crate) fn shift(v: &[f64], x: &[f64]) -> (Vec<f64>, [[f64; 2]; 2]) {
    let n = x.len();
    let mut va = [0.0; 2];
    let mut xa = [0.0; 2];
    va[..n].copy_from_slice(v);
    xa[..n].copy_from_slice(x);
    let (y, jac) = shift_n(n, &va, &xa);
    (y[..n].to_vec(), jac)
}
