//! CSV profile output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::observed_orders;
use crate::geometry::GeometryProfile;
use crate::jang_solver::JangSolution;
use crate::verifier::{Level, Norms};

#[derive(Debug, Error)]
#[error("cannot write {path}: {message}")]
pub struct EmitError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub file: String,
    pub kind: String,
    pub rows: usize,
}

/// What is available to write; absent parts are skipped.
#[derive(Default)]
pub struct Profiles<'a> {
    pub solution: Option<&'a JangSolution>,
    pub geometry: Option<&'a GeometryProfile>,
    /// Refinement levels, coarsest first.
    pub levels: &'a [Level],
}

pub fn emit_profiles(dir: &Path, profiles: &Profiles) -> Result<Vec<ManifestEntry>, EmitError> {
    fs::create_dir_all(dir).map_err(|e| EmitError {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut manifest = Vec::new();
    if let Some(sol) = profiles.solution {
        let rows =
            (0..sol.v.len()).map(|i| vec![sol.r()[i], sol.v[i], sol.v_r[i], sol.s[i], sol.phi[i]]);
        manifest.push(write_csv(
            dir,
            "solution.csv",
            "solution",
            &["r", "v", "v_r", "s", "phi"],
            rows,
        )?);
    }
    if let Some(g) = profiles.geometry {
        let rows = (0..g.r.len()).map(|i| {
            vec![
                g.r[i], g.s[i], g.rho[i], g.rho_s[i], g.m[i], g.rbar[i], g.area[i], g.hbar[i],
            ]
        });
        let header = ["r", "s", "rho", "rho_s", "m", "Rbar", "area", "Hbar"];
        manifest.push(write_csv(dir, "geometry.csv", "geometry", &header, rows)?);
    }
    for l in profiles.levels {
        let (r, res, b) = (l.solution.r(), &l.identity.profile, &l.terms.boundary);
        let start = l.window_start();
        // outside the window the identity is not evaluated
        let rows =
            (0..r.len()).map(|i| vec![r[i], if i >= start { res[i] } else { f64::NAN }, b[i]]);
        let name = format!("residual_{}.csv", l.cells());
        manifest.push(write_csv(
            dir,
            &name,
            "residual",
            &["r", "identity_residual", "boundary_integrand"],
            rows,
        )?);
    }
    if !profiles.levels.is_empty() {
        manifest.push(write_orders(dir, profiles.levels)?);
    }
    Ok(manifest)
}

fn write_orders(dir: &Path, levels: &[Level]) -> Result<ManifestEntry, EmitError> {
    let quantities: [(&str, fn(&Level) -> Norms); 4] = [
        ("identity_residual", |l| Norms {
            sup: l.identity.sup,
            l2: l.identity.l2,
        }),
        ("hawking_mass_integral", |l| l.mass_integral),
        ("mass_derivative", |l| l.mass_derivative),
        ("q_routes", |l| l.q_routes),
    ];
    let path = dir.join("orders.csv");
    let err = |e: csv::Error| EmitError {
        path: path.clone(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    w.write_record(["quantity", "cells", "sup", "l2", "order"])
        .map_err(err)?;
    let mut rows = 0;
    for (name, get) in quantities {
        let norms: Vec<Norms> = levels.iter().map(get).collect();
        let sups: Vec<f64> = norms.iter().map(|n| n.sup).collect();
        let orders = observed_orders(&sups);
        for (k, (l, n)) in levels.iter().zip(&norms).enumerate() {
            let order = if k == 0 {
                String::new()
            } else {
                orders[k - 1].to_string()
            };
            w.write_record([
                name.to_string(),
                l.cells().to_string(),
                n.sup.to_string(),
                n.l2.to_string(),
                order,
            ])
            .map_err(err)?;
            rows += 1;
        }
    }
    w.flush().map_err(|e| EmitError {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(ManifestEntry {
        file: "orders.csv".into(),
        kind: "orders".into(),
        rows,
    })
}

fn write_csv(
    dir: &Path,
    name: &str,
    kind: &str,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<ManifestEntry, EmitError> {
    let path = dir.join(name);
    let err = |e: csv::Error| EmitError {
        path: path.clone(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    let mut count = 0;
    for row in rows {
        w.serialize(row).map_err(err)?;
        count += 1;
    }
    w.flush().map_err(|e| EmitError {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(ManifestEntry {
        file: name.into(),
        kind: kind.into(),
        rows: count,
    })
}
