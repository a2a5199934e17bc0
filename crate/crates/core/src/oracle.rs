//! Finite-difference reference pipeline.
//!
//! Central differences with Richardson extrapolation, computed from plain
//! function values only. Nothing here touches jet derivatives, so it can be
//! used to cross-check the jet-based geometry.

use nalgebra::{Matrix2, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::surfaces::SurfaceSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("stencil of half-width {reach:e} around ({u}, {v}) leaves the domain")]
    StencilOutOfDomain { u: f64, v: f64, reach: f64 },
    #[error("derivative order {0} exceeds the configured cap {1}")]
    OrderTooHigh(usize, usize),
    #[error("at least two Richardson levels are required, got {0}")]
    TooFewLevels(usize),
    #[error("surface evaluation failed: {0}")]
    Evaluation(#[from] GeometryError),
    #[error("degenerate tangent plane at ({0}, {1})")]
    Degenerate(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdConfig {
    /// Coarsest step; level `i` uses `step / 2^i`.
    pub step: f64,
    pub levels: usize,
    pub max_order: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-3,
            levels: 3,
            max_order: 4,
        }
    }
}

impl FdConfig {
    /// Step set to `rel_step` times the narrower domain width.
    pub fn for_surface(surface: &SurfaceSpec, rel_step: f64) -> Self {
        let [(u0, u1), (v0, v1)] = surface.domain();
        FdConfig {
            step: rel_step * (u1 - u0).min(v1 - v0),
            ..FdConfig::default()
        }
    }
}

/// Extrapolated value and the magnitude of the last Richardson correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdEstimate {
    pub value: f64,
    pub error: f64,
}

/// Second-order-accurate central stencil for the `p`-th derivative:
/// (offset in steps, weight). The truncation error is a series in even powers of h.
fn stencil(p: usize) -> &'static [(i32, f64)] {
    match p {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("derivative order cap is 4"),
    }
}

/// Stencil half-width in steps.
pub fn reach(p: usize) -> usize {
    match p {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    }
}

/// Richardson tableau on a sequence of estimates at steps h, h/2, h/4, ...
/// whose errors expand in even powers of h.
pub fn richardson(estimates: &[f64]) -> FdEstimate {
    let n = estimates.len();
    let mut prev: Vec<f64> = estimates.to_vec();
    let mut last_correction = f64::INFINITY;
    for j in 1..n {
        let factor = 4f64.powi(j as i32) - 1.0;
        let next: Vec<f64> = (j..n)
            .map(|i| {
                let a = prev[i - j + 1];
                let b = prev[i - j];
                a + (a - b) / factor
            })
            .collect();
        last_correction = (next[next.len() - 1] - prev[prev.len() - 1]).abs();
        prev = next;
    }
    FdEstimate {
        value: prev[prev.len() - 1],
        error: if n == 1 { f64::NAN } else { last_correction },
    }
}

/// Mixed partial `d^(a+b) f / du^a dv^b` of a scalar function of two variables.
pub fn fd_mixed_partial(
    f: &dyn Fn(f64, f64) -> f64,
    point: [f64; 2],
    a: usize,
    b: usize,
    cfg: &FdConfig,
) -> Result<FdEstimate, OracleError> {
    if a + b > cfg.max_order || a > 4 || b > 4 {
        return Err(OracleError::OrderTooHigh(a + b, cfg.max_order));
    }
    if cfg.levels < 2 {
        return Err(OracleError::TooFewLevels(cfg.levels));
    }
    let estimates: Vec<f64> = (0..cfg.levels)
        .map(|level| {
            let h = cfg.step / 2f64.powi(level as i32);
            let mut s = 0.0;
            for &(i, wi) in stencil(a) {
                for &(j, wj) in stencil(b) {
                    s += wi * wj * f(point[0] + i as f64 * h, point[1] + j as f64 * h);
                }
            }
            s / h.powi((a + b) as i32)
        })
        .collect();
    Ok(richardson(&estimates))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdEntry {
    pub a: usize,
    pub b: usize,
    pub value: [f64; 3],
    pub error: [f64; 3],
}

/// All mixed partials of the position vector up to some total order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdPartials {
    pub point: [f64; 2],
    pub entries: Vec<FdEntry>,
}

impl FdPartials {
    pub fn get(&self, a: usize, b: usize) -> Option<[f64; 3]> {
        self.entries
            .iter()
            .find(|e| e.a == a && e.b == b)
            .map(|e| e.value)
    }

    fn vec(&self, a: usize, b: usize) -> Vector3<f64> {
        Vector3::from(self.get(a, b).expect("partial was computed"))
    }
}

fn check_stencil(
    surface: &SurfaceSpec,
    point: [f64; 2],
    max_order: usize,
    cfg: &FdConfig,
) -> Result<(), OracleError> {
    let r = reach(max_order.min(4)) as f64 * cfg.step;
    let [(u0, u1), (v0, v1)] = surface.domain();
    let [u, v] = point;
    if u - r <= u0 || u + r >= u1 || v - r <= v0 || v + r >= v1 {
        return Err(OracleError::StencilOutOfDomain { u, v, reach: r });
    }
    Ok(())
}

pub fn fd_partials(
    surface: &SurfaceSpec,
    point: [f64; 2],
    max_order: usize,
    cfg: &FdConfig,
) -> Result<FdPartials, OracleError> {
    if max_order > cfg.max_order {
        return Err(OracleError::OrderTooHigh(max_order, cfg.max_order));
    }
    check_stencil(surface, point, max_order, cfg)?;
    // Position samples go through order-0 evaluation: values only.
    let position = |u: f64, v: f64| -> Result<[f64; 3], GeometryError> {
        let x = surface.evaluate(u, v, 0)?;
        Ok([x[0].value(), x[1].value(), x[2].value()])
    };
    // Surface the first evaluation error instead of poisoning the estimates.
    position(point[0], point[1])?;
    let mut entries = Vec::new();
    for d in 0..=max_order {
        for b in 0..=d {
            let a = d - b;
            let mut value = [0.0; 3];
            let mut error = [0.0; 3];
            for c in 0..3 {
                let f = |u: f64, v: f64| position(u, v).map(|x| x[c]).unwrap_or(f64::NAN);
                let est = fd_mixed_partial(&f, point, a, b, cfg)?;
                value[c] = est.value;
                error[c] = est.error;
            }
            entries.push(FdEntry { a, b, value, error });
        }
    }
    Ok(FdPartials { point, entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdCurvatures {
    pub mean: f64,
    pub gauss: f64,
    pub first: [[f64; 2]; 2],
    pub second: [[f64; 2]; 2],
    pub third: [[f64; 2]; 2],
    pub normal: [f64; 3],
}

fn to_rows(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Forms and curvatures from finite-difference partials. The third form is
/// obtained as `III = 2H II - K I`, not from derivatives of the normal.
pub fn fd_curvatures(
    surface: &SurfaceSpec,
    point: [f64; 2],
    cfg: &FdConfig,
) -> Result<FdCurvatures, OracleError> {
    let p = fd_partials(surface, point, 2, cfg)?;
    let xu = p.vec(1, 0);
    let xv = p.vec(0, 1);
    let second = [[p.vec(2, 0), p.vec(1, 1)], [p.vec(1, 1), p.vec(0, 2)]];
    let cross = xu.cross(&xv);
    let norm = cross.norm();
    if norm < 1e-10 {
        return Err(OracleError::Degenerate(point[0], point[1]));
    }
    let n = cross / norm;
    let g = Matrix2::new(xu.dot(&xu), xu.dot(&xv), xv.dot(&xu), xv.dot(&xv));
    let b = Matrix2::from_fn(|i, j| n.dot(&second[i][j]));
    let gauss = b.determinant() / g.determinant();
    let g_inv = g
        .try_inverse()
        .ok_or(OracleError::Degenerate(point[0], point[1]))?;
    let mean = 0.5 * (g_inv * b).trace();
    let e = b * (2.0 * mean) - g * gauss;
    Ok(FdCurvatures {
        mean,
        gauss,
        first: to_rows(&g),
        second: to_rows(&b),
        third: to_rows(&e),
        normal: [n.x, n.y, n.z],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossRow {
    pub point: [f64; 2],
    pub quantity: &'static str,
    pub jet: f64,
    pub fd: f64,
    /// `|jet - fd| / max(1, |jet|)`
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReport {
    pub schema_version: u32,
    pub surface: String,
    pub step: f64,
    pub levels: usize,
    pub tolerance: f64,
    pub rows: Vec<CrossRow>,
    pub max_rel_error: f64,
    pub pass: bool,
}

const FORM_ENTRIES: [(&str, usize, usize); 3] = [("11", 0, 0), ("12", 0, 1), ("22", 1, 1)];

/// Compares jet-based H, K, g, b, e and n with the finite-difference pipeline.
pub fn cross_validate(
    surface: &SurfaceSpec,
    points: &[[f64; 2]],
    cfg: &FdConfig,
    tolerance: f64,
) -> Result<CrossReport, OracleError> {
    let mut rows = Vec::new();
    for &pt in points {
        let fd = fd_curvatures(surface, pt, cfg)?;
        let jet = crate::geometry::frame(surface, pt, 0)?;
        let mut push = |quantity: &'static str, j: f64, f: f64| {
            rows.push(CrossRow {
                point: pt,
                quantity,
                jet: j,
                fd: f,
                rel_error: (j - f).abs() / j.abs().max(1.0),
            })
        };
        push("H", jet.mean.value(), fd.mean);
        push("K", jet.gauss.value(), fd.gauss);
        let names = [
            ["g11", "g12", "g22"],
            ["b11", "b12", "b22"],
            ["e11", "e12", "e22"],
        ];
        for (f, (form, fdv)) in [
            (&jet.first, fd.first),
            (&jet.second, fd.second),
            (&jet.third, fd.third),
        ]
        .into_iter()
        .enumerate()
        {
            let vals = form.values();
            for (k, &(_, i, j)) in FORM_ENTRIES.iter().enumerate() {
                push(names[f][k], vals[i][j], fdv[i][j]);
            }
        }
        let n = crate::geometry::value_vec(&jet.n);
        for (c, name) in ["n1", "n2", "n3"].into_iter().enumerate() {
            push(name, n[c], fd.normal[c]);
        }
    }
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(CrossReport {
        schema_version: 1,
        surface: surface.label().to_string(),
        step: cfg.step,
        levels: cfg.levels,
        tolerance,
        pass: max_rel_error < tolerance && !rows.is_empty(),
        rows,
        max_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{catalog_get, SurfaceParams};

    #[test]
    fn richardson_removes_even_error_terms() {
        // D(h) = 1 + h^2 + h^4 exactly
        let est: Vec<f64> = (0..3)
            .map(|i| {
                let h = 0.5 / 2f64.powi(i);
                1.0 + h * h + h.powi(4)
            })
            .collect();
        let r = richardson(&est);
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plane_has_no_curvature_partials() {
        let plane = catalog_get("monge", &SurfaceParams::parse("zero").unwrap()).unwrap();
        let p = fd_partials(&plane, [0.1, -0.2], 4, &FdConfig::for_surface(&plane, 0.1)).unwrap();
        for e in &p.entries {
            if e.a + e.b >= 2 {
                assert!(e.value.iter().all(|c| c.abs() < 1e-10), "{e:?}");
            }
        }
    }

    #[test]
    fn sphere_tangents_orthonormal_at_equator() {
        let s = catalog_get("sphere", &SurfaceParams::parse("r=1").unwrap()).unwrap();
        let pt = [std::f64::consts::FRAC_PI_2, 0.0];
        for rel in [1e-3, 3e-3] {
            let p = fd_partials(&s, pt, 1, &FdConfig::for_surface(&s, rel)).unwrap();
            let xu = p.vec(1, 0);
            let xv = p.vec(0, 1);
            assert!(xu.dot(&xv).abs() < 1e-10);
            assert!((xu.norm() - 1.0).abs() < 1e-10);
            assert!((xv.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn error_estimates_shrink_with_levels() {
        let f = |x: f64, y: f64| (x * y).sin() + x.exp();
        let mut prev = f64::INFINITY;
        for levels in 2..=4 {
            let cfg = FdConfig {
                step: 0.2,
                levels,
                max_order: 4,
            };
            let e = fd_mixed_partial(&f, [0.3, 0.4], 1, 1, &cfg).unwrap();
            assert!(e.error < prev);
            prev = e.error;
        }
    }

    #[test]
    fn stencil_outside_domain_is_rejected() {
        let s = catalog_get("sphere", &SurfaceParams::parse("r=1").unwrap()).unwrap();
        let cfg = FdConfig {
            step: 0.05,
            ..FdConfig::default()
        };
        let err = fd_partials(&s, [0.12, 0.0], 2, &cfg).unwrap_err();
        assert!(matches!(err, OracleError::StencilOutOfDomain { .. }));
    }

    #[test]
    fn sphere_curvatures() {
        for r in [0.5, 1.0, 2.0] {
            let s = catalog_get("sphere", &SurfaceParams::from_values(&[("r", r)])).unwrap();
            let c = fd_curvatures(&s, [1.0, 0.4], &FdConfig::for_surface(&s, 1e-3)).unwrap();
            assert!((c.mean - 1.0 / r).abs() < 1e-6, "H = {}", c.mean);
            assert!((c.gauss - 1.0 / (r * r)).abs() < 1e-6, "K = {}", c.gauss);
        }
    }

    #[test]
    fn minimal_surfaces_have_vanishing_mean_curvature() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for name in ["catenoid", "enneper", "helicoid"] {
            let s = catalog_get(name, &SurfaceParams::default()).unwrap();
            let cfg = FdConfig::for_surface(&s, 1e-3);
            let [(u0, u1), (v0, v1)] = s.domain();
            for _ in 0..20 {
                let pt = [
                    rng.gen_range(u0 + 0.05 * (u1 - u0)..u1 - 0.05 * (u1 - u0)),
                    rng.gen_range(v0 + 0.05 * (v1 - v0)..v1 - 0.05 * (v1 - v0)),
                ];
                let c = fd_curvatures(&s, pt, &cfg).unwrap();
                assert!(c.mean.abs() < 1e-6, "{name} H = {} at {pt:?}", c.mean);
            }
        }
    }

    #[test]
    fn cross_validation_on_torus() {
        let s = crate::surfaces::parse_selector("torus").unwrap();
        let pts = crate::chentype::random_samples(&s, 5, 11);
        let r = cross_validate(&s, &pts, &FdConfig::for_surface(&s, 1e-3), 1e-5).unwrap();
        assert_eq!(r.rows.len(), 5 * 14);
        assert!(r.pass, "max rel error {}", r.max_rel_error);
    }
}
