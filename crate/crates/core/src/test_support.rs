//! Test-only profiles and brute-force geometric oracles.

use crate::initial_data::{InitialData, RadialPoint, RadialProfile};

/// Smooth data with nonzero `k`, no horizon, and asymptotically flat tails.
/// With `balanced` set, `ka = -2 kb + a (1 + r)^-4`, so `tr k` decays one
/// power faster than `k`.
#[derive(Debug, Clone)]
pub struct WavyProfile {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub balanced: bool,
}

impl Default for WavyProfile {
    fn default() -> Self {
        WavyProfile {
            c: 0.3,
            a: 0.4,
            b: -0.3,
            balanced: false,
        }
    }
}

impl RadialProfile for WavyProfile {
    fn eval(&self, r: f64) -> RadialPoint {
        let (s, c2) = (r.sin(), r.cos());
        let sq = s * s;
        let sq_r = 2.0 * s * c2;
        let sq_rr = 2.0 * (2.0 * r).cos();
        let q = 1.0 + r;
        let p = q.powi(-3);
        let p_r = -3.0 * q.powi(-4);
        let p_rr = 12.0 * q.powi(-5);
        let g11 = 1.0 + 0.5 * (-r).exp();
        let g11_r = -0.5 * (-r).exp();
        let mut pt = RadialPoint {
            ginv: 1.0 / g11,
            ginv_r: -g11_r / (g11 * g11),
            rho: r + 1.0 + self.c * sq * p,
            rho_r: 1.0 + self.c * (sq_r * p + sq * p_r),
            rho_rr: self.c * (sq_rr * p + 2.0 * sq_r * p_r + sq * p_rr),
            ka: self.a * p,
            ka_r: self.a * p_r,
            kb: self.b * c2 * p,
            kb_r: self.b * (-s * p + c2 * p_r),
        };
        if self.balanced {
            let p4 = q.powi(-4);
            pt.ka = -2.0 * pt.kb + self.a * p4;
            pt.ka_r = -2.0 * pt.kb_r - 4.0 * self.a * p4 / q;
        }
        pt
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Flat metric with `kb` exceeding `rho_r / rho` on an interval around
/// `r = 3`, so `theta_minus` has two roots.
#[derive(Debug, Clone)]
pub struct TwoHorizonProfile;

impl RadialProfile for TwoHorizonProfile {
    fn eval(&self, r: f64) -> RadialPoint {
        let rho = 1.0 + r;
        let g = (-(r - 3.0) * (r - 3.0)).exp();
        let g_r = -2.0 * (r - 3.0) * g;
        RadialPoint {
            ginv: 1.0,
            ginv_r: 0.0,
            rho,
            rho_r: 1.0,
            rho_rr: 0.0,
            ka: 0.0,
            ka_r: 0.0,
            kb: (0.5 + g) / rho,
            kb_r: -(0.5 + g) / (rho * rho) + g_r / rho,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

const THETA: f64 = 1.1;

fn metric(d: &InitialData, x: [f64; 3]) -> [f64; 3] {
    let p = d.eval(x[0]).unwrap();
    let s = x[1].sin();
    [p.g11(), p.rho * p.rho, p.rho * p.rho * s * s]
}

fn shifted(x: [f64; 3], axis: usize, h: f64) -> [f64; 3] {
    let mut y = x;
    y[axis] += h;
    y
}

/// `gamma[a][b][c] = Gamma^a_{bc}` from central differences of the metric.
fn christoffel(d: &InitialData, x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let h = 1e-4;
    let g = metric(d, x);
    let mut dg = [[0.0; 3]; 3]; // dg[c][i] = d_c g_ii
    for c in 0..3 {
        let gp = metric(d, shifted(x, c, h));
        let gm = metric(d, shifted(x, c, -h));
        for i in 0..3 {
            dg[c][i] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                if a == c {
                    s += dg[b][a];
                }
                if a == b {
                    s += dg[c][a];
                }
                if b == c {
                    s -= dg[a][b];
                }
                gamma[a][b][c] = 0.5 * s / g[a];
            }
        }
    }
    gamma
}

/// Ricci scalar of the 3-metric at radius `r` by brute-force Christoffel
/// symbols and nested central differences.
pub fn ricci_scalar_fd(d: &InitialData, r: f64) -> f64 {
    let x = [r, THETA, 0.0];
    let h = 1e-3;
    let g = metric(d, x);
    let gam = christoffel(d, x);
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3]; // dgam[e][a][b][c] = d_e Gamma^a_bc
    for e in 0..3 {
        let gp = christoffel(d, shifted(x, e, h));
        let gm = christoffel(d, shifted(x, e, -h));
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    dgam[e][a][b][c] = (gp[a][b][c] - gm[a][b][c]) / (2.0 * h);
                }
            }
        }
    }
    let mut scalar = 0.0;
    for b in 0..3 {
        let mut ric = 0.0;
        for a in 0..3 {
            ric += dgam[a][a][b][b] - dgam[b][a][a][b];
            for e in 0..3 {
                ric += gam[a][a][e] * gam[e][b][b] - gam[a][b][e] * gam[e][a][b];
            }
        }
        scalar += ric / g[b];
    }
    scalar
}

/// `nabla^j (k_rj - tr(k) g_rj)` by brute-force covariant differentiation.
pub fn radial_momentum_fd(d: &InitialData, r: f64) -> f64 {
    let x = [r, THETA, 0.0];
    let tensor = |x: [f64; 3]| {
        let p = d.eval(x[0]).unwrap();
        let g = metric(d, x);
        let tr = p.ka + 2.0 * p.kb;
        [g[0] * (p.ka - tr), g[1] * (p.kb - tr), g[2] * (p.kb - tr)]
    };
    let h = 1e-4;
    let g = metric(d, x);
    let t = tensor(x);
    let dt_rr = (tensor(shifted(x, 0, h))[0] - tensor(shifted(x, 0, -h))[0]) / (2.0 * h);
    let gam = christoffel(d, x);
    let mut div = dt_rr / g[0];
    for j in 0..3 {
        div -= (gam[j][j][0] * t[j] + gam[0][j][j] * t[0]) / g[j];
    }
    div
}

/// Time reversal `k -> -k` of another profile; swaps past and future horizons.
#[derive(Debug)]
pub struct Reversed(pub std::sync::Arc<dyn RadialProfile>);

impl RadialProfile for Reversed {
    fn eval(&self, r: f64) -> RadialPoint {
        let mut p = self.0.eval(r);
        p.ka = -p.ka;
        p.ka_r = -p.ka_r;
        p.kb = -p.kb;
        p.kb_r = -p.kb_r;
        p
    }

    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }
}

pub fn builtin(family: &str, params: &[(&str, f64)]) -> InitialData {
    crate::initial_data::DataDescriptor::builtin(family, params)
        .build()
        .unwrap()
}
