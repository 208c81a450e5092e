//! Duality maps of finite-dimensional `ℓ_p` spaces, `p ∈ [2, ∞)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PNormSpace {
    dim: usize,
    p: f64,
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `sign(v)·(|v|/scale)^e`, zero at zero.
fn signed_pow(v: f64, scale: f64, e: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * (v.abs() / scale).powf(e)
    }
}

impl PNormSpace {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::invalid(format!("exponent must lie in [2, ∞), got {p}")));
        }
        Ok(PNormSpace { dim, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p' = p/(p − 1)`.
    pub fn dual_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        x.ensure_dim(self.dim)?;
        Ok(lp_norm(x.as_slice(), self.p))
    }

    /// `ℓ_{p'}` norm of dual coordinates.
    pub fn dual_norm(&self, g: &Vector) -> Result<f64> {
        g.ensure_dim(self.dim)?;
        Ok(lp_norm(g.as_slice(), self.dual_exponent()))
    }

    /// `J_p(x) = ∇(‖x‖_p^p / p)`, componentwise `sign(x_k)|x_k|^{p−1}`.
    pub fn jp(&self, x: &Vector) -> Result<Vector> {
        x.ensure_dim(self.dim)?;
        if self.p == 2.0 {
            return Ok(x.clone());
        }
        let e = self.p - 1.0;
        Ok(Vector::raw(x.as_slice().iter().map(|&v| signed_pow(v, 1.0, e)).collect()))
    }

    /// Gradient of `‖·‖_p` at `x ≠ 0`: `J_p(x)/‖x‖^{p−1}`.
    pub fn norm_gradient(&self, x: &Vector) -> Result<Vector> {
        let n = self.norm(x)?;
        if n == 0.0 {
            return Err(Error::invalid("the norm is not differentiable at the origin"));
        }
        let e = self.p - 1.0;
        Ok(Vector::raw(x.as_slice().iter().map(|&v| signed_pow(v, n, e)).collect()))
    }

    /// `‖x‖_p^p / p`.
    pub fn potential(&self, x: &Vector) -> Result<f64> {
        x.ensure_dim(self.dim)?;
        Ok(x.as_slice().iter().map(|v| v.abs().powf(self.p)).sum::<f64>() / self.p)
    }

    fn sample_unit_ball(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            if lp_norm(&x, self.p) <= 1.0 {
                return x;
            }
        }
    }

    /// `max ‖J_p(x) − J_p(y)‖_{p'}` over `samples` random pairs of the unit
    /// ball with `‖x − y‖_p ≤ δ`.
    pub fn continuity_modulus(&self, delta: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut taken = 0;
        while taken < samples {
            let x = self.sample_unit_ball(&mut rng);
            let w: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let wn = lp_norm(&w, self.p);
            if wn == 0.0 {
                continue;
            }
            let s = delta * rng.random_range(0.0..=1.0) / wn;
            let y: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + s * b).collect();
            if lp_norm(&y, self.p) > 1.0 {
                continue;
            }
            let jx = self.jp(&Vector::raw(x)).expect("dimension matches");
            let jy = self.jp(&Vector::raw(y)).expect("dimension matches");
            worst = worst.max(lp_norm((&jx - &jy).as_slice(), self.dual_exponent()));
            taken += 1;
        }
        worst
    }
}
