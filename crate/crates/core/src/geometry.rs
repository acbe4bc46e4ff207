//! Geometry of the Jang surface `gbar = ds^2 + rho^2 dOmega^2`: Hawking
//! mass, scalar curvature, sphere areas and mean curvatures, and the ADM
//! mass read off the Hawking-mass tail.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::polyfit;
use crate::grid::{d_dxi_2, norms};
use crate::initial_data::{DataError, InitialData};
use crate::jang_solver::JangSolution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("ds/dr degenerate at node {index} (r = {r})")]
    DegenerateArclength { index: usize, r: f64 },
    #[error("mass tail reaches r = {r_max}, extrapolation needs r >= {need}")]
    InsufficientTail { r_max: f64, need: f64 },
    #[error("ADM extrapolation did not converge: {value} +- {uncertainty}")]
    NonConvergentTail { value: f64, uncertainty: f64 },
}

/// `m = rho (1 - rho_s^2) / 2`.
pub fn hawking_mass(rho: f64, rho_s: f64) -> f64 {
    0.5 * rho * (1.0 - rho_s * rho_s)
}

/// Scalar curvature of `ds^2 + rho(s)^2 dOmega^2`.
pub fn rbar_formula(rho: f64, rho_s: f64, rho_ss: f64) -> f64 {
    2.0 / (rho * rho) * (1.0 - 2.0 * rho * rho_ss - rho_s * rho_s)
}

/// Node profiles on the solver grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryProfile {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_s: Vec<f64>,
    pub rho_ss: Vec<f64>,
    /// Pointwise Hawking mass.
    pub m: Vec<f64>,
    /// `m(0) + int_0^s m_s ds` with `m_s = phi rho^2 Rbar / 4`.
    pub m_int: Vec<f64>,
    pub rbar: Vec<f64>,
    pub area: Vec<f64>,
    pub hbar: Vec<f64>,
    /// `ds/dxi` in the grid coordinate.
    pub ds_dxi: Vec<f64>,
}

/// `ds/dxi = sqrt(g11) (dr/dxi) / sqrt(1 - v^2)`. At node 0 `dr/dxi = 0`,
/// so this is 0 unless `g11` or `1 / (1 - v^2)` diverges there, in which
/// case a one-sided difference of `s` supplies the finite limit.
pub fn ds_dxi(data: &InitialData, sol: &JangSolution) -> Result<Vec<f64>, GeometryError> {
    let grid = &sol.grid;
    let jac = grid.jacobian();
    let n = grid.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        let p = data.eval(grid.nodes()[i])?;
        let d = jac[i] / (p.sqrt_ginv() * sol.gap[i].sqrt());
        if !(d.is_finite() && d > 0.0) {
            return Err(GeometryError::DegenerateArclength {
                index: i,
                r: grid.nodes()[i],
            });
        }
        out[i] = d;
    }
    let h = grid.h();
    let p0 = data.eval(grid.r_min())?;
    out[0] = if sol.gap[0] > 0.0 && p0.ginv > 0.0 {
        0.0
    } else {
        (-3.0 * sol.s[0] + 4.0 * sol.s[1] - sol.s[2]) / (2.0 * h)
    };
    if !(out[0].is_finite() && out[0] >= 0.0) {
        return Err(GeometryError::DegenerateArclength {
            index: 0,
            r: grid.r_min(),
        });
    }
    Ok(out)
}

/// `rho_ss = (d phi / dxi) / (ds / dxi)`, second order. Where `ds/dxi`
/// vanishes (node 0 of a regular start) the `s`-path value is used.
pub fn rho_ss_r_path(s: &[f64], phi: &[f64], ds: &[f64], h: f64) -> Vec<f64> {
    let mut out: Vec<f64> = d_dxi_2(phi, h).iter().zip(ds).map(|(a, b)| a / b).collect();
    if !(ds[0] > 0.0) {
        out[0] = rho_ss_s_path(&s[..3], &phi[..3])[0];
    }
    out
}

/// `rho_ss` by second-order differences directly on the nonuniform `s` nodes.
pub fn rho_ss_s_path(s: &[f64], phi: &[f64]) -> Vec<f64> {
    let n = s.len();
    let three = |i0: usize, at: usize| {
        // derivative at s[at] of the parabola through nodes i0, i0+1, i0+2
        let (x0, x1, x2) = (s[i0], s[i0 + 1], s[i0 + 2]);
        let x = s[at];
        let l0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        l0 * phi[i0] + l1 * phi[i0 + 1] + l2 * phi[i0 + 2]
    };
    (0..n)
        .map(|i| match i {
            0 => three(0, 0),
            _ if i == n - 1 => three(n - 3, n - 1),
            _ => three(i - 1, i),
        })
        .collect()
}

pub fn geometry_profile(
    data: &InitialData,
    sol: &JangSolution,
) -> Result<GeometryProfile, GeometryError> {
    let grid = &sol.grid;
    let n = grid.len();
    let ds = ds_dxi(data, sol)?;
    let mut rho = Vec::with_capacity(n);
    for &r in grid.nodes() {
        rho.push(data.eval(r)?.rho);
    }
    let rho_ss = rho_ss_r_path(&sol.s, &sol.phi, &ds, grid.h());
    let m: Vec<f64> = rho
        .iter()
        .zip(&sol.phi)
        .map(|(&p, &f)| hawking_mass(p, f))
        .collect();
    let rbar: Vec<f64> = (0..n)
        .map(|i| rbar_formula(rho[i], sol.phi[i], rho_ss[i]))
        .collect();
    // m_s ds/dxi, then trapezoid in xi
    let dm: Vec<f64> = (0..n)
        .map(|i| 0.25 * sol.phi[i] * rho[i] * rho[i] * rbar[i] * ds[i])
        .collect();
    let mut m_int = vec![m[0]; n];
    for i in 1..n {
        m_int[i] = m_int[i - 1] + 0.5 * grid.h() * (dm[i - 1] + dm[i]);
    }
    Ok(GeometryProfile {
        r: grid.nodes().to_vec(),
        s: sol.s.clone(),
        area: rho.iter().map(|p| 4.0 * PI * p * p).collect(),
        hbar: rho.iter().zip(&sol.phi).map(|(p, f)| 2.0 * f / p).collect(),
        rho_s: sol.phi.clone(),
        rho,
        rho_ss,
        m,
        m_int,
        rbar,
        ds_dxi: ds,
    })
}

/// `2 dm/ds - phi rho^2 Rbar / 2` at the nodes of `range` (which should
/// exclude node 0); returns `(sup, rms)`.
pub fn mass_derivative_check(
    profile: &GeometryProfile,
    h: f64,
    range: std::ops::Range<usize>,
) -> (f64, f64) {
    let dm = d_dxi_2(&profile.m, h);
    let res: Vec<f64> = (0..profile.m.len())
        .map(|i| {
            let rho = profile.rho[i];
            if profile.ds_dxi[i] == 0.0 {
                return 0.0;
            }
            2.0 * dm[i] / profile.ds_dxi[i] - 0.5 * profile.rho_s[i] * rho * rho * profile.rbar[i]
        })
        .collect();
    norms(&res, range)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmEstimate {
    pub value: f64,
    pub uncertainty: f64,
    /// Constant term of the fit at each polynomial degree 1, 2, 3.
    pub by_degree: Vec<f64>,
}

/// Extrapolates the Hawking mass to `rho = infinity` by least-squares
/// polynomials in `1/rho` (degrees 1 to 3) over the outer decade of the
/// profile. The estimate is the highest-degree constant term; the
/// uncertainty is the spread of the constant terms across degrees, and must
/// stay within 1% of the mass (or of `1e-6` mass scales for a massless tail).
pub fn adm_mass(profile: &GeometryProfile, mass_scale: f64) -> Result<AdmEstimate, GeometryError> {
    let n = profile.r.len();
    let (lo, hi) = (profile.r[0], profile.r[n - 1]);
    let need = lo + 1e3 * mass_scale;
    if hi < need {
        return Err(GeometryError::InsufficientTail { r_max: hi, need });
    }
    let cut = lo + 0.1 * (hi - lo);
    let start = profile.r.partition_point(|&r| r < cut);
    let ts: Vec<f64> = profile.rho[start..].iter().map(|p| 1.0 / p).collect();
    let ys = &profile.m[start..];
    let mut by_degree = Vec::new();
    for deg in 1..=3 {
        match polyfit(&ts, ys, deg) {
            Some(c) => by_degree.push(c[0]),
            None => {
                return Err(GeometryError::NonConvergentTail {
                    value: f64::NAN,
                    uncertainty: f64::INFINITY,
                })
            }
        }
    }
    let value = by_degree[by_degree.len() - 1];
    let uncertainty = by_degree
        .iter()
        .fold(0.0f64, |m, c| m.max((c - value).abs()));
    if !(uncertainty <= 0.01 * value.abs().max(1e-6 * mass_scale)) {
        return Err(GeometryError::NonConvergentTail { value, uncertainty });
    }
    Ok(AdmEstimate {
        value,
        uncertainty,
        by_degree,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::initial_data::scalar_curvature_g;
    use crate::jang_solver::{solve, Boundary, SolverConfig};
    use crate::test_support::{builtin, WavyProfile};

    fn cfg(cells: usize) -> SolverConfig {
        SolverConfig {
            cells,
            ..Default::default()
        }
    }

    #[test]
    fn hawking_mass_examples() {
        assert_eq!(hawking_mass(2.0, 0.0), 1.0);
        assert!((hawking_mass(4.0, (1.0f64 - 2.0 / 4.0).sqrt()) - 1.0).abs() < 1e-15);
        assert_eq!(hawking_mass(3.7, 1.0), 0.0);
    }

    #[test]
    fn rbar_examples() {
        assert_eq!(rbar_formula(5.0, 1.0, 0.0), 0.0);
        for rho in [2.0f64, 3.0, 10.0, 1e4] {
            let rs = (1.0f64 - 2.0 / rho).sqrt();
            assert!(rbar_formula(rho, rs, 1.0 / (rho * rho)).abs() < 1e-15);
        }
    }

    #[test]
    fn static_profile_is_exactly_schwarzschild() {
        let d = builtin("schwarzschild-static", &[]);
        let sol = solve(&d, Boundary::Alpha(0.0), &cfg(2000)).unwrap();
        let g = geometry_profile(&d, &sol).unwrap();
        assert!(g.m.iter().all(|m| (m - 1.0).abs() <= 1e-12));
        assert_eq!(g.hbar[0], 0.0);
        for i in 0..g.r.len() {
            assert_eq!(g.area[i], 4.0 * PI * g.rho[i] * g.rho[i]);
        }
        let adm = adm_mass(&g, 1.0).unwrap();
        assert!(
            (adm.value - 1.0).abs() < 1e-6 && adm.uncertainty < 1e-6,
            "{adm:?}"
        );
    }

    #[test]
    fn horizon_start_has_minimal_inner_sphere() {
        let d = builtin("painleve-gullstrand", &[]);
        let sol = solve(&d, Boundary::PastHorizon, &cfg(2000)).unwrap();
        let g = geometry_profile(&d, &sol).unwrap();
        assert_eq!(g.hbar[0], 0.0);
        assert!((g.m[0] - (g.area[0] / (16.0 * PI)).sqrt()).abs() < 1e-14);
        assert!(g.m.iter().all(|m| (m - 1.0).abs() < 1e-8));
        assert!(g.m_int.iter().all(|m| (m - 1.0).abs() < 1e-3));
        let adm = adm_mass(&g, 1.0).unwrap();
        assert!((adm.value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bumped_rbar_matches_data_curvature_at_second_order() {
        let d = builtin("bumped-conformal", &[("M", 1.0), ("eps", 0.01)]);
        let err = |cells: usize| {
            let sol = solve(&d, Boundary::Alpha(0.0), &cfg(cells)).unwrap();
            assert!(sol.v.iter().all(|v| *v == 0.0));
            let g = geometry_profile(&d, &sol).unwrap();
            // common window r in [0.05, 50]
            g.r.iter()
                .zip(&g.rbar)
                .filter(|(r, _)| **r >= 0.05 && **r <= 50.0)
                .map(|(r, rb)| (rb - scalar_curvature_g(&d, *r).unwrap()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1000), err(2000));
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.3, "order {order} ({e1}, {e2})");
    }

    #[test]
    fn rho_ss_paths_agree_at_second_order() {
        let d = builtin("bumped-conformal", &[("M", 1.0), ("eps", 0.01)]);
        let gap = |cells: usize| {
            let sol = solve(&d, Boundary::Alpha(0.0), &cfg(cells)).unwrap();
            let g = geometry_profile(&d, &sol).unwrap();
            let sp = rho_ss_s_path(&g.s, &g.rho_s);
            let lo = sol.grid.first_index_at_or_above(0.05);
            let hi = sol.grid.first_index_at_or_above(50.0);
            (lo..hi)
                .map(|i| (sp[i] - g.rho_ss[i]).abs())
                .fold(0.0, f64::max)
        };
        let order = (gap(1000) / gap(2000)).log2();
        assert!(order > 1.8, "{order}");
    }

    #[test]
    fn mass_derivative_identity_converges() {
        let d = builtin("bumped-conformal", &[("M", 1.0), ("eps", 0.01)]);
        let res = |cells: usize| {
            let sol = solve(&d, Boundary::Alpha(0.0), &cfg(cells)).unwrap();
            let g = geometry_profile(&d, &sol).unwrap();
            let lo = sol.grid.first_index_at_or_above(0.05);
            mass_derivative_check(&g, sol.grid.h(), lo..g.r.len() - 1).0
        };
        let order = (res(1000) / res(2000)).log2();
        assert!(order > 1.8, "{order}");
    }

    #[test]
    fn bumped_adm_mass_is_m_plus_two_eps() {
        let d = builtin("bumped-conformal", &[("M", 1.0), ("eps", 0.01)]);
        let sol = solve(&d, Boundary::Alpha(0.0), &cfg(2000)).unwrap();
        let g = geometry_profile(&d, &sol).unwrap();
        let adm = adm_mass(&g, 1.0).unwrap();
        assert!(
            (adm.value - 1.02).abs() <= adm.uncertainty.max(1e-9),
            "{adm:?}"
        );
    }

    #[test]
    fn time_symmetric_nonnegative_curvature_gives_monotone_mass() {
        let d = builtin("bumped-conformal", &[("M", 1.0), ("eps", 0.05)]);
        let sol = solve(&d, Boundary::Alpha(0.0), &cfg(1000)).unwrap();
        let g = geometry_profile(&d, &sol).unwrap();
        assert!(g.m.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn short_or_wild_tails_are_rejected() {
        let d = builtin("flat", &[]);
        let c = SolverConfig {
            r_max: Some(100.0),
            ..cfg(256)
        };
        let sol = solve(&d, Boundary::Alpha(0.0), &c).unwrap();
        let g = geometry_profile(&d, &sol).unwrap();
        assert!(matches!(
            adm_mass(&g, 1.0),
            Err(GeometryError::InsufficientTail { .. })
        ));
        let w = InitialData::from_profile(Arc::new(WavyProfile::default()), 1.0, "wavy");
        let sol = solve(&w, Boundary::Alpha(0.0), &cfg(1000)).unwrap();
        let mut g = geometry_profile(&w, &sol).unwrap();
        for (i, m) in g.m.iter_mut().enumerate() {
            *m = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        assert!(matches!(
            adm_mass(&g, 1.0),
            Err(GeometryError::NonConvergentTail { .. })
        ));
    }
}
