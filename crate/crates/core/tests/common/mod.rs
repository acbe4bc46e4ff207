#![allow(dead_code)]

use std::sync::Arc;

use jang_penrose_core::initial_data::families::PainleveGullstrand;
use jang_penrose_core::initial_data::{
    find_outermost_horizon, DataDescriptor, InitialData, RadialPoint, RadialProfile,
};
use jang_penrose_core::jang_solver::SolverConfig;

pub fn builtin(family: &str, params: &[(&str, f64)]) -> InitialData {
    DataDescriptor::builtin(family, params).build().unwrap()
}

pub fn tight() -> SolverConfig {
    SolverConfig {
        rtol: 1e-12,
        atol: 1e-14,
        ..Default::default()
    }
}

/// Smooth data with nonzero `k` and no horizon. With `balanced`,
/// `ka = -2 kb + a (1 + r)^-4` so `tr k` decays one power faster than `k`.
#[derive(Debug, Clone)]
pub struct Wavy {
    pub balanced: bool,
}

impl RadialProfile for Wavy {
    fn eval(&self, r: f64) -> RadialPoint {
        let (c, a, b) = (0.3, 0.4, -0.3);
        let (s, co) = (r.sin(), r.cos());
        let q = 1.0 + r;
        let p = q.powi(-3);
        let p_r = -3.0 * q.powi(-4);
        let p_rr = 12.0 * q.powi(-5);
        let (sq, sq_r, sq_rr) = (s * s, 2.0 * s * co, 2.0 * (2.0 * r).cos());
        let g11 = 1.0 + 0.5 * (-r).exp();
        let g11_r = -0.5 * (-r).exp();
        let mut pt = RadialPoint {
            ginv: 1.0 / g11,
            ginv_r: -g11_r / (g11 * g11),
            rho: r + 1.0 + c * sq * p,
            rho_r: 1.0 + c * (sq_r * p + sq * p_r),
            rho_rr: c * (sq_rr * p + 2.0 * sq_r * p_r + sq * p_rr),
            ka: a * p,
            ka_r: a * p_r,
            kb: b * co * p,
            kb_r: b * (-s * p + co * p_r),
        };
        if self.balanced {
            let p4 = q.powi(-4);
            pt.ka = -2.0 * pt.kb + a * p4;
            pt.ka_r = -2.0 * pt.kb_r - 4.0 * a * p4 / q;
        }
        pt
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

pub fn wavy(balanced: bool) -> InitialData {
    InitialData::from_profile(Arc::new(Wavy { balanced }), 1.0, "wavy")
}

/// Flat metric with `kb > rho_r / rho` around `r = 3`: an interior trapped
/// region, so the inner sphere is not the outermost horizon.
#[derive(Debug, Clone)]
pub struct TwoHorizon;

impl RadialProfile for TwoHorizon {
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

/// `k -> -k`.
#[derive(Debug)]
pub struct Reversed(pub Arc<dyn RadialProfile>);

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

/// Time-reversed Painleve-Gullstrand slice, cut at its future horizon.
pub fn reversed_pg() -> InitialData {
    let raw = InitialData::from_profile(
        Arc::new(Reversed(Arc::new(PainleveGullstrand {
            mass: 1.0,
            rho_inner: 1.0,
        }))),
        1.0,
        "reversed-pg",
    );
    let h = find_outermost_horizon(&raw).unwrap().unwrap();
    raw.truncated_at(h.r)
}

pub fn sup(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
