//! Finite-type probe.
//!
//! A field `f` (position or Gauss map) is of finite J-type `k` when its
//! iterates satisfy `Δ^k f + a_{k-1} Δ^{k-1} f + ... + a_0 f = d` for a monic
//! polynomial with distinct roots. The probe gathers Krylov vectors
//! `[f, Δf, ..., Δ^k f]` at random samples and fits `(a, d)` by least squares
//! for increasing `k`, accepting the first degree whose residual is noise.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::geometry::{
    frame_with, krylov_frame_order, krylov_from_frame, Field, FormKind, GeometryConfig,
};
use crate::surfaces::{Expected, ExpectedOutcome, SurfaceSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("need at least {needed} admissible samples, got {usable}{}", .reason.as_ref().map(|r| format!(" (first rejection: {r})")).unwrap_or_default())]
    TooFewSamples {
        usable: usize,
        needed: usize,
        reason: Option<String>,
    },
    #[error("invalid probe configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub k_max: usize,
    pub eps_type: f64,
    pub eps_root: f64,
    /// Fits whose scaled design matrix is worse conditioned than this are
    /// not trusted.
    pub cond_max: f64,
    pub geometry: GeometryConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            k_max: 3,
            eps_type: 1e-7,
            eps_root: 1e-6,
            cond_max: 1e10,
            geometry: GeometryConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Typed(usize),
    NotTypeLe(usize),
    Indeterminate(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Typed(k) => write!(f, "TYPED({k})"),
            Verdict::NotTypeLe(k) => write!(f, "NOT_TYPE_LE({k})"),
            Verdict::Indeterminate(r) => write!(f, "INDETERMINATE({r})"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeProbeResult {
    pub schema_version: u32,
    pub surface: String,
    pub form: FormKind,
    pub field: Field,
    /// Accepted degree; also set when the fit was accepted but the roots make
    /// the verdict indeterminate.
    pub degree: Option<usize>,
    /// Monic coefficients `[a_0, ..., a_{k-1}]`.
    pub poly: Vec<f64>,
    /// Roots as `[re, im]`, sorted by real part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub center: Option<[f64; 3]>,
    pub residual: Option<f64>,
    pub null_type: bool,
    pub verdict: Verdict,
    pub residuals_by_degree: Vec<f64>,
    pub condition_numbers: Vec<f64>,
    pub samples_used: usize,
    pub samples_skipped: usize,
}

impl TypeProbeResult {
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e[0]).collect()
    }

    /// Fit residual at degree `k`, if that degree was tried.
    pub fn residual_at(&self, k: usize) -> Option<f64> {
        self.residuals_by_degree.get(k.checked_sub(1)?).copied()
    }
}

/// Uniform samples from the domain shrunk by 5% on each side.
pub fn random_samples(surface: &SurfaceSpec, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [(u0, u1), (v0, v1)] = surface.domain();
    let (mu, mv) = (0.05 * (u1 - u0), 0.05 * (v1 - v0));
    (0..n)
        .map(|_| {
            [
                rng.gen_range(u0 + mu..u1 - mu),
                rng.gen_range(v0 + mv..v1 - mv),
            ]
        })
        .collect()
}

struct Fit {
    coeffs: Vec<f64>,
    d: [f64; 3],
    residual: f64,
    condition: f64,
}

/// Least-squares fit of `Σ_{j<k} a_j V_j - d = -V_k` over all samples.
/// `V_0` is centered on its sample mean; `d` is shifted back afterwards.
fn fit_degree(krylov: &[Vec<[f64; 3]>], k: usize) -> Fit {
    let n = krylov.len();
    let mut mean = [0.0; 3];
    for s in krylov {
        for c in 0..3 {
            mean[c] += s[0][c] / n as f64;
        }
    }
    let column =
        |s: &Vec<[f64; 3]>, j: usize, c: usize| if j == 0 { s[0][c] - mean[c] } else { s[j][c] };

    let rows = 3 * n;
    let cols = k + 3;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    let mut scale: f64 = 0.0;
    for (si, s) in krylov.iter().enumerate() {
        for c in 0..3 {
            let r = 3 * si + c;
            for j in 0..k {
                a[(r, j)] = column(s, j, c);
            }
            a[(r, k + c)] = -1.0;
            b[r] = -s[k][c];
            for j in 0..=k {
                scale = scale.max(column(s, j, c).abs());
            }
        }
    }

    let norms: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, nj) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / nj);
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let y = svd
        .solve(&b, smax * f64::EPSILON * rows as f64)
        .expect("u and v were computed");
    let x: Vec<f64> = y.iter().zip(&norms).map(|(yi, nj)| yi / nj).collect();
    let resid = &a * DVector::from_column_slice(&x) - &b;
    let residual = resid.amax() / scale.max(f64::MIN_POSITIVE);

    let coeffs = x[..k].to_vec();
    let a0 = coeffs[0];
    let d = std::array::from_fn(|c| x[k + c] + a0 * mean[c]);
    Fit {
        coeffs,
        d,
        residual,
        condition,
    }
}

/// Roots of `t^k + a_{k-1} t^{k-1} + ... + a_0`, sorted by real part.
pub fn monic_roots(poly: &[f64]) -> Vec<[f64; 2]> {
    let k = poly.len();
    let mut roots: Vec<[f64; 2]> = if k == 1 {
        vec![[-poly[0], 0.0]]
    } else {
        let mut companion = DMatrix::<f64>::zeros(k, k);
        for i in 1..k {
            companion[(i, i - 1)] = 1.0;
        }
        for (i, a) in poly.iter().enumerate() {
            companion[(i, k - 1)] = -a;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .map(|z| [z.re, z.im])
            .collect()
    };
    roots.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    roots
}

pub fn probe(
    surface: &SurfaceSpec,
    form: FormKind,
    field: Field,
    samples: &[[f64; 2]],
    cfg: &ProbeConfig,
) -> Result<TypeProbeResult, ProbeError> {
    if cfg.k_max == 0 {
        return Err(ProbeError::BadConfig("k_max must be at least 1".into()));
    }
    let order = krylov_frame_order(cfg.k_max);
    let gathered: Vec<Result<Vec<[f64; 3]>, String>> = samples
        .par_iter()
        .map(|&pt| {
            frame_with(surface, pt, order, &cfg.geometry)
                .and_then(|f| krylov_from_frame(form, &f, field, cfg.k_max))
                .map_err(|e| format!("{}: {e}", e.kind()))
        })
        .collect();
    let skipped = gathered.iter().filter(|g| g.is_err()).count();
    let first_reason = gathered.iter().find_map(|g| g.as_ref().err().cloned());
    let krylov: Vec<Vec<[f64; 3]>> = gathered.into_iter().filter_map(Result::ok).collect();
    let needed = cfg.k_max + 2;
    if krylov.len() < needed {
        return Err(ProbeError::TooFewSamples {
            usable: krylov.len(),
            needed,
            reason: first_reason,
        });
    }

    let mut result = TypeProbeResult {
        schema_version: SCHEMA_VERSION,
        surface: surface.label().to_string(),
        form,
        field,
        degree: None,
        poly: Vec::new(),
        eigenvalues: Vec::new(),
        center: None,
        residual: None,
        null_type: false,
        verdict: Verdict::NotTypeLe(cfg.k_max),
        residuals_by_degree: Vec::new(),
        condition_numbers: Vec::new(),
        samples_used: krylov.len(),
        samples_skipped: skipped,
    };

    for k in 1..=cfg.k_max {
        let fit = fit_degree(&krylov, k);
        result.residuals_by_degree.push(fit.residual);
        result.condition_numbers.push(fit.condition);
        if fit.residual >= cfg.eps_type {
            continue;
        }
        result.degree = Some(k);
        result.residual = Some(fit.residual);
        result.eigenvalues = monic_roots(&fit.coeffs);
        result.null_type = result
            .eigenvalues
            .iter()
            .any(|e| e[0].hypot(e[1]) < cfg.eps_root);
        let a0 = fit.coeffs[0];
        if a0.abs() > cfg.eps_root {
            result.center = Some(fit.d.map(|d| d / a0));
        }
        result.poly = fit.coeffs;
        result.verdict = if fit.condition > cfg.cond_max {
            Verdict::Indeterminate(format!(
                "condition number {:.3e} at degree {k}",
                fit.condition
            ))
        } else if let Some(e) = result
            .eigenvalues
            .iter()
            .find(|e| e[1].abs() > cfg.eps_root)
        {
            Verdict::Indeterminate(format!("complex eigenvalue {:.6e}{:+.6e}i", e[0], e[1]))
        } else if result
            .eigenvalues
            .windows(2)
            .any(|w| (w[1][0] - w[0][0]).abs() < cfg.eps_root)
        {
            Verdict::Indeterminate("repeated eigenvalue".into())
        } else {
            Verdict::Typed(k)
        };
        return Ok(result);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub form: FormKind,
    pub field: Field,
    pub expected: ExpectedOutcome,
    pub verdict: Verdict,
    pub agrees: bool,
}

/// Tolerance on eigenvalues when comparing with catalog expectations.
pub const EIGENVALUE_TOL: f64 = 1e-6;

/// Whether a probe result matches an expected outcome.
pub fn agrees_with(result: &TypeProbeResult, expected: &ExpectedOutcome) -> bool {
    match (expected, &result.verdict) {
        (
            ExpectedOutcome::Typed {
                degree,
                eigenvalues,
            },
            Verdict::Typed(k),
        ) => {
            let found = result.real_eigenvalues();
            let mut want = eigenvalues.clone();
            want.sort_by(f64::total_cmp);
            k == degree
                && found
                    .iter()
                    .zip(&want)
                    .all(|(a, b)| (a - b).abs() < EIGENVALUE_TOL)
        }
        (ExpectedOutcome::TypedEither { degrees }, Verdict::Typed(k)) => degrees.contains(k),
        (ExpectedOutcome::NotTyped { up_to }, Verdict::Typed(k)) => k > up_to,
        (ExpectedOutcome::NotTyped { up_to }, Verdict::NotTypeLe(k)) => k >= up_to,
        _ => false,
    }
}

/// Compares a probe result with the catalog expectation for its form and field.
pub fn classify_expected(result: &TypeProbeResult, expected: &Expected) -> Option<Agreement> {
    let e = expected.find(result.form, result.field)?;
    Some(Agreement {
        form: result.form,
        field: result.field,
        expected: e.clone(),
        verdict: result.verdict.clone(),
        agrees: agrees_with(result, e),
    })
}
