//! Closed-form spherically symmetric slices.

use super::{RadialPoint, RadialProfile};

/// Time-symmetric Schwarzschild slice in area-radius offset `r = rho - 2M`.
#[derive(Debug, Clone)]
pub struct SchwarzschildStatic {
    pub mass: f64,
}

impl RadialProfile for SchwarzschildStatic {
    fn eval(&self, r: f64) -> RadialPoint {
        let m = self.mass;
        let rho = 2.0 * m + r;
        RadialPoint {
            ginv: r / rho,
            ginv_r: 2.0 * m / (rho * rho),
            rho,
            rho_r: 1.0,
            rho_rr: 0.0,
            ka: 0.0,
            ka_r: 0.0,
            kb: 0.0,
            kb_r: 0.0,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Flat Painlevé–Gullstrand slice of Schwarzschild: `g` is Euclidean and
/// `k` is the extrinsic curvature produced by the infalling shift
/// `sqrt(2M/rho)`. The raw coordinate starts at `rho_inner`, which may lie
/// inside the horizon.
#[derive(Debug, Clone)]
pub struct PainleveGullstrand {
    pub mass: f64,
    pub rho_inner: f64,
}

impl RadialProfile for PainleveGullstrand {
    fn eval(&self, r: f64) -> RadialPoint {
        let rho = self.rho_inner + r;
        let w = (2.0 * self.mass / (rho * rho * rho)).sqrt();
        let w_r = -1.5 * w / rho;
        RadialPoint {
            ginv: 1.0,
            ginv_r: 0.0,
            rho,
            rho_r: 1.0,
            rho_rr: 0.0,
            ka: -0.5 * w,
            ka_r: -0.5 * w_r,
            kb: w,
            kb_r: w_r,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Conformally flat time-symmetric data `u^4 (dx^2 + x^2 dOmega^2)` with
/// `u = 1 + M/(2x) + eps / sqrt(1 + x^2)`. The bump term is superharmonic, so
/// the energy density is nonnegative for `eps >= 0`. The raw coordinate is
/// `x - x_inner`.
#[derive(Debug, Clone)]
pub struct BumpedConformal {
    pub mass: f64,
    pub eps: f64,
    pub x_inner: f64,
}

impl BumpedConformal {
    /// `(u, u_x, u_xx)` at isotropic radius `x`.
    pub fn conformal_factor(&self, x: f64) -> (f64, f64, f64) {
        let (m, e) = (self.mass, self.eps);
        let q = 1.0 + x * x;
        let sq = q.sqrt();
        let u = 1.0 + m / (2.0 * x) + e / sq;
        let u_x = -m / (2.0 * x * x) - e * x / (q * sq);
        let u_xx = m / (x * x * x) - e / (q * sq) + 3.0 * e * x * x / (q * q * sq);
        (u, u_x, u_xx)
    }
}

impl RadialProfile for BumpedConformal {
    fn eval(&self, r: f64) -> RadialPoint {
        let x = self.x_inner + r;
        let (u, u_x, u_xx) = self.conformal_factor(x);
        let u2 = u * u;
        RadialPoint {
            ginv: 1.0 / (u2 * u2),
            ginv_r: -4.0 * u_x / (u2 * u2 * u),
            rho: u2 * x,
            rho_r: 2.0 * u * u_x * x + u2,
            rho_rr: 2.0 * u_x * u_x * x + 2.0 * u * u_xx * x + 4.0 * u * u_x,
            ka: 0.0,
            ka_r: 0.0,
            kb: 0.0,
            kb_r: 0.0,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Euclidean space outside a coordinate sphere of radius `r0`; no horizon.
#[derive(Debug, Clone)]
pub struct Flat {
    pub r0: f64,
}

impl RadialProfile for Flat {
    fn eval(&self, r: f64) -> RadialPoint {
        RadialPoint {
            ginv: 1.0,
            ginv_r: 0.0,
            rho: self.r0 + r,
            rho_r: 1.0,
            rho_rr: 0.0,
            ka: 0.0,
            ka_r: 0.0,
            kb: 0.0,
            kb_r: 0.0,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}
