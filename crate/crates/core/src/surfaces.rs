//! Parametric surface catalog and surface combinators.
//!
//! Every surface evaluates its position vector as three [`Jet2`] values at a
//! parameter point. Orientation is fixed by parameter order: the unit normal
//! is `x_u × x_v / |x_u × x_v|`, and the sphere is parametrized so that this
//! normal points inward, `n = -(x - c) / r`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{self, Field, FormKind, GeometryConfig, GeometryError, Vec3J};
use crate::jets::{Dir, Jet2};

/// Default admissibility tolerance for parallel offsets.
pub const DEFAULT_EPS_PAR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("unknown surface `{0}`")]
    UnknownSurface(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(
        "offset rho = {rho} is inadmissible at ({u}, {v}): 1 - 2 rho H + rho^2 K = {factor:e}"
    )]
    InadmissibleOffset {
        rho: f64,
        u: f64,
        v: f64,
        factor: f64,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Evaluator = Arc<dyn Fn([f64; 2], usize) -> Result<Vec3J, GeometryError> + Send + Sync>;

/// What the surface is known to be, used to check probe outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectedOutcome {
    /// Finite type of exactly this degree with these eigenvalues.
    Typed {
        degree: usize,
        eigenvalues: Vec<f64>,
    },
    /// Finite type of one of two degrees (parallel of a type-k surface).
    TypedEither { degrees: [usize; 2] },
    /// Not of finite type at any degree up to `up_to`.
    NotTyped { up_to: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedType {
    pub form: FormKind,
    pub field: Field,
    pub outcome: ExpectedOutcome,
}

impl ExpectedType {
    fn typed(form: FormKind, field: Field, eigenvalues: Vec<f64>) -> Self {
        ExpectedType {
            form,
            field,
            outcome: ExpectedOutcome::Typed {
                degree: eigenvalues.len(),
                eigenvalues,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereInfo {
    pub radius: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Expected {
    pub is_minimal: bool,
    pub sphere: Option<SphereInfo>,
    pub h_over_k: Option<f64>,
    pub types: Vec<ExpectedType>,
}

impl Expected {
    pub fn find(&self, form: FormKind, field: Field) -> Option<&ExpectedOutcome> {
        self.types
            .iter()
            .find(|t| t.form == form && t.field == field)
            .map(|t| &t.outcome)
    }

    fn sphere(radius: f64, center: [f64; 3]) -> Self {
        Expected {
            is_minimal: false,
            sphere: Some(SphereInfo { radius, center }),
            h_over_k: Some(radius),
            types: vec![
                ExpectedType::typed(FormKind::II, Field::Position, vec![2.0 / radius]),
                ExpectedType::typed(FormKind::II, Field::Normal, vec![2.0 / radius]),
                ExpectedType::typed(FormKind::III, Field::Position, vec![2.0]),
                ExpectedType::typed(FormKind::III, Field::Normal, vec![2.0]),
            ],
        }
    }

    fn minimal() -> Self {
        Expected {
            is_minimal: true,
            sphere: None,
            h_over_k: Some(0.0),
            types: vec![
                ExpectedType::typed(FormKind::III, Field::Position, vec![0.0]),
                ExpectedType::typed(FormKind::III, Field::Normal, vec![2.0]),
            ],
        }
    }
}

/// A base surface and the directed offset of its parallel surface.
#[derive(Debug, Clone)]
pub struct ParallelSpec {
    pub base: Arc<SurfaceSpec>,
    pub rho: f64,
}

#[derive(Clone)]
pub struct SurfaceSpec {
    name: String,
    label: String,
    params: Vec<(String, f64)>,
    domain: [(f64, f64); 2],
    evaluator: Evaluator,
    expected: Expected,
    parallel: Option<ParallelSpec>,
}

impl fmt::Debug for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceSpec")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("expected", &self.expected)
            .finish_non_exhaustive()
    }
}

impl SurfaceSpec {
    pub fn new(
        name: impl Into<String>,
        domain: [(f64, f64); 2],
        evaluator: impl Fn([f64; 2], usize) -> Result<Vec3J, GeometryError> + Send + Sync + 'static,
    ) -> Self {
        let name = name.into();
        SurfaceSpec {
            label: name.clone(),
            name,
            params: Vec::new(),
            domain,
            evaluator: Arc::new(evaluator),
            expected: Expected::default(),
            parallel: None,
        }
    }

    pub fn with_params(mut self, params: Vec<(String, f64)>) -> Self {
        self.params = params;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_expected(mut self, expected: Expected) -> Self {
        self.expected = expected;
        self
    }

    pub fn with_domain(mut self, domain: [(f64, f64); 2]) -> Self {
        self.domain = domain;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Selector string that reproduces this surface.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn domain(&self) -> [(f64, f64); 2] {
        self.domain
    }

    pub fn expected(&self) -> &Expected {
        &self.expected
    }

    pub fn parallel(&self) -> Option<&ParallelSpec> {
        self.parallel.as_ref()
    }

    pub fn contains(&self, point: [f64; 2]) -> bool {
        let [(u0, u1), (v0, v1)] = self.domain;
        (u0..=u1).contains(&point[0]) && (v0..=v1).contains(&point[1])
    }

    /// Position jets of the requested order at `(u, v)`.
    pub fn evaluate(&self, u: f64, v: f64, order: usize) -> Result<Vec3J, GeometryError> {
        let x = (self.evaluator)([u, v], order)?;
        debug_assert!(x.iter().all(|c| c.order() == order && c.base() == [u, v]));
        Ok(x)
    }

    /// Cell-centred `nu × nv` grid over the domain.
    pub fn grid(&self, nu: usize, nv: usize) -> Vec<[f64; 2]> {
        grid_points(self.domain, nu, nv)
    }
}

pub fn grid_points(domain: [(f64, f64); 2], nu: usize, nv: usize) -> Vec<[f64; 2]> {
    let [(u0, u1), (v0, v1)] = domain;
    let mut pts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            pts.push([
                u0 + (i as f64 + 0.5) * (u1 - u0) / nu as f64,
                v0 + (j as f64 + 0.5) * (v1 - v0) / nv as f64,
            ]);
        }
    }
    pts
}

/// Parsed `key=value` pairs and bare flags from a selector argument list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurfaceParams {
    pub values: Vec<(String, f64)>,
    pub flags: Vec<String>,
}

impl SurfaceParams {
    pub fn parse(args: &str) -> Result<Self, SurfaceError> {
        let mut out = SurfaceParams::default();
        for arg in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            match arg.split_once('=') {
                Some((k, v)) => {
                    let value: f64 = v.trim().parse().map_err(|_| {
                        SurfaceError::BadParameter(format!("`{arg}` is not key=real"))
                    })?;
                    out.values.push((k.trim().to_string(), value));
                }
                None => out.flags.push(arg.to_string()),
            }
        }
        Ok(out)
    }

    pub fn from_values(values: &[(&str, f64)]) -> Self {
        SurfaceParams {
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            flags: Vec::new(),
        }
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.values
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    fn check_keys(
        &self,
        surface: &str,
        allowed: &[&str],
        flags: &[&str],
    ) -> Result<(), SurfaceError> {
        if let Some((k, _)) = self
            .values
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            return Err(SurfaceError::BadParameter(format!(
                "{surface} has no parameter `{k}`"
            )));
        }
        if let Some(f) = self.flags.iter().find(|f| !flags.contains(&f.as_str())) {
            return Err(SurfaceError::BadParameter(format!(
                "{surface} has no variant `{f}`"
            )));
        }
        if self.flags.len() > 1 {
            return Err(SurfaceError::BadParameter(format!(
                "{surface} takes at most one variant"
            )));
        }
        Ok(())
    }
}

/// Documented parameter of a catalog entry.
#[derive(Debug, Clone, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub default: f64,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: Vec<ParamSchema>,
    pub variants: Vec<&'static str>,
    pub domain: [(f64, f64); 2],
    pub expected: Expected,
}

struct CatalogDef {
    name: &'static str,
    params: &'static [(&'static str, f64, &'static str)],
    variants: &'static [&'static str],
}

const CATALOG: &[CatalogDef] = &[
    CatalogDef {
        name: "sphere",
        params: &[
            ("r", 1.0, "r > 0"),
            ("cx", 0.0, "center x"),
            ("cy", 0.0, "center y"),
            ("cz", 0.0, "center z"),
        ],
        variants: &[],
    },
    CatalogDef {
        name: "catenoid",
        params: &[("a", 1.0, "a > 0")],
        variants: &[],
    },
    CatalogDef {
        name: "helicoid",
        params: &[("a", 1.0, "a > 0")],
        variants: &[],
    },
    CatalogDef {
        name: "enneper",
        params: &[],
        variants: &[],
    },
    CatalogDef {
        name: "torus",
        params: &[("R", 2.0, "R > r"), ("r", 0.5, "0 < r < R")],
        variants: &["outer", "inner"],
    },
    CatalogDef {
        name: "monge",
        params: &[],
        variants: &["zero", "paraboloid", "saddle"],
    },
];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|d| d.name).collect()
}

/// Catalog entries instantiated with default parameters.
pub fn catalog_listing() -> Vec<CatalogEntry> {
    CATALOG
        .iter()
        .map(|def| {
            let spec =
                catalog_get(def.name, &SurfaceParams::default()).expect("defaults are valid");
            CatalogEntry {
                name: def.name,
                params: def
                    .params
                    .iter()
                    .map(|&(name, default, constraint)| ParamSchema {
                        name,
                        default,
                        constraint,
                    })
                    .collect(),
                variants: def.variants.to_vec(),
                domain: spec.domain(),
                expected: spec.expected().clone(),
            }
        })
        .collect()
}

fn uv(point: [f64; 2], order: usize) -> (Jet2, Jet2) {
    (
        Jet2::variable(Dir::U, point, order),
        Jet2::variable(Dir::V, point, order),
    )
}

fn format_label(name: &str, values: &[(String, f64)], flag: Option<&str>) -> String {
    let mut args: Vec<String> = values.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if let Some(f) = flag {
        args.push(f.to_string());
    }
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}:{}", args.join(","))
    }
}

pub fn catalog_get(name: &str, params: &SurfaceParams) -> Result<SurfaceSpec, SurfaceError> {
    let def = CATALOG
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| SurfaceError::UnknownSurface(name.to_string()))?;
    let allowed: Vec<&str> = def.params.iter().map(|p| p.0).collect();
    params.check_keys(name, &allowed, def.variants)?;
    let values: Vec<(String, f64)> = def
        .params
        .iter()
        .map(|&(k, default, _)| (k.to_string(), params.get(k).unwrap_or(default)))
        .collect();
    let p = |k: &str| {
        values
            .iter()
            .find(|(n, _)| n == k)
            .map(|(_, v)| *v)
            .unwrap()
    };
    let flag = params.flags.first().map(String::as_str);

    let spec = match name {
        "sphere" => sphere(p("r"), [p("cx"), p("cy"), p("cz")])?,
        "catenoid" => catenoid(p("a"))?,
        "helicoid" => helicoid(p("a"))?,
        "enneper" => enneper(),
        "torus" => torus(p("R"), p("r"), flag != Some("inner"))?,
        "monge" => match flag {
            None | Some("zero") => monge("monge:zero", |u, _v| Ok(Jet2::zero(u.base(), u.order()))),
            Some("paraboloid") => monge("monge:paraboloid", |u, v| Ok(u * u + v * v)),
            _ => monge("monge:saddle", |u, v| Ok(u * u - v * v)),
        },
        _ => unreachable!(),
    };
    let label = if name == "monge" {
        spec.label().to_string()
    } else {
        format_label(name, &values, flag)
    };
    Ok(spec.with_params(values).with_label(label))
}

/// Sphere of radius `r` about `center`, `u` the polar angle and `v` the azimuth.
/// Parametrized as `c + r (sin u sin v, sin u cos v, cos u)` so the normal points inward.
pub fn sphere(r: f64, center: [f64; 3]) -> Result<SurfaceSpec, SurfaceError> {
    if r.is_nan() || r <= 0.0 {
        return Err(SurfaceError::BadParameter(format!(
            "sphere radius must be positive, got {r}"
        )));
    }
    let delta = 0.1;
    Ok(
        SurfaceSpec::new("sphere", [(delta, PI - delta), (-PI, PI)], move |pt, m| {
            let (u, v) = uv(pt, m);
            let (su, cu) = (u.sin(), u.cos());
            let (sv, cv) = (v.sin(), v.cos());
            Ok([
                (&su * &sv * r).add_scalar(center[0]),
                (&su * &cv * r).add_scalar(center[1]),
                (cu * r).add_scalar(center[2]),
            ])
        })
        .with_expected(Expected::sphere(r, center)),
    )
}

pub fn catenoid(a: f64) -> Result<SurfaceSpec, SurfaceError> {
    if a.is_nan() || a <= 0.0 {
        return Err(SurfaceError::BadParameter(format!(
            "catenoid a must be positive, got {a}"
        )));
    }
    Ok(
        SurfaceSpec::new("catenoid", [(-PI, PI), (-a, a)], move |pt, m| {
            let (u, v) = uv(pt, m);
            let ch = (v.clone() * (1.0 / a)).cosh() * a;
            Ok([&ch * &u.cos(), &ch * &u.sin(), v])
        })
        .with_expected(Expected::minimal()),
    )
}

pub fn helicoid(a: f64) -> Result<SurfaceSpec, SurfaceError> {
    if a.is_nan() || a <= 0.0 {
        return Err(SurfaceError::BadParameter(format!(
            "helicoid a must be positive, got {a}"
        )));
    }
    Ok(SurfaceSpec::new(
        "helicoid",
        [(-PI, PI), (-1.5 * a, 1.5 * a)],
        move |pt, m| {
            let (u, v) = uv(pt, m);
            Ok([&v * &u.cos(), &v * &u.sin(), u * a])
        },
    )
    .with_expected(Expected::minimal()))
}

/// Enneper's surface on a patch away from the origin, where parallels with
/// offsets up to 0.5 stay admissible.
pub fn enneper() -> SurfaceSpec {
    SurfaceSpec::new("enneper", [(0.6, 1.4), (0.6, 1.4)], |pt, m| {
        let (u, v) = uv(pt, m);
        let u2 = &u * &u;
        let v2 = &v * &v;
        Ok([
            &u - &(&u * &(u2.clone() * (1.0 / 3.0) - &v2)),
            &v - &(&v * &(v2.clone() * (1.0 / 3.0) - &u2)),
            &u2 - &v2,
        ])
    })
    .with_expected(Expected::minimal())
}

/// Torus with tube angle `u` and axial angle `v`; `outer` selects the band
/// `|u| < 1.2` (K > 0), otherwise the inner band around `u = π` (K < 0).
pub fn torus(big_r: f64, r: f64, outer: bool) -> Result<SurfaceSpec, SurfaceError> {
    if !(r > 0.0 && big_r > r) {
        return Err(SurfaceError::BadParameter(format!(
            "torus needs R > r > 0, got R={big_r}, r={r}"
        )));
    }
    let band = if outer {
        (-1.2, 1.2)
    } else {
        (PI / 2.0 + 0.3, 3.0 * PI / 2.0 - 0.3)
    };
    let mut expected = Expected {
        types: vec![ExpectedType::typed(FormKind::III, Field::Normal, vec![2.0])],
        ..Expected::default()
    };
    expected.types.push(ExpectedType {
        form: FormKind::III,
        field: Field::Position,
        outcome: ExpectedOutcome::NotTyped { up_to: 1 },
    });
    if outer {
        for field in [Field::Position, Field::Normal] {
            expected.types.push(ExpectedType {
                form: FormKind::II,
                field,
                outcome: ExpectedOutcome::NotTyped { up_to: 1 },
            });
        }
    }
    Ok(SurfaceSpec::new("torus", [band, (-PI, PI)], move |pt, m| {
        let (u, v) = uv(pt, m);
        let ring = (u.cos() * r).add_scalar(big_r);
        Ok([&ring * &v.cos(), &ring * &v.sin(), u.sin() * r])
    })
    .with_expected(expected))
}

/// Graph patch `x = (u, v, h(u, v))` over `(-1, 1)²`; no expected metadata.
pub fn make_monge(
    label: &str,
    h: impl Fn(&Jet2, &Jet2) -> Result<Jet2, GeometryError> + Send + Sync + 'static,
) -> SurfaceSpec {
    monge(label, h)
}

fn monge(
    label: &str,
    h: impl Fn(&Jet2, &Jet2) -> Result<Jet2, GeometryError> + Send + Sync + 'static,
) -> SurfaceSpec {
    SurfaceSpec::new("monge", [(-1.0, 1.0), (-1.0, 1.0)], move |pt, m| {
        let (u, v) = uv(pt, m);
        let z = h(&u, &v)?;
        Ok([u, v, z])
    })
    .with_label(label)
}

fn parallel_expected(base: &SurfaceSpec, rho: f64) -> Expected {
    let be = base.expected();
    let h_over_k = be.h_over_k.map(|q| q - rho);
    if let Some(s) = be.sphere {
        let radius = s.radius - rho;
        if radius > 0.0 {
            return Expected::sphere(radius, s.center);
        }
        return Expected {
            h_over_k,
            types: vec![
                ExpectedType::typed(FormKind::III, Field::Position, vec![2.0]),
                ExpectedType::typed(FormKind::III, Field::Normal, vec![2.0]),
            ],
            ..Expected::default()
        };
    }
    let mut types = vec![ExpectedType::typed(FormKind::III, Field::Normal, vec![2.0])];
    if be.is_minimal {
        types.push(ExpectedType::typed(
            FormKind::III,
            Field::Position,
            vec![0.0, 2.0],
        ));
    } else if let Some(ExpectedOutcome::Typed { degree, .. }) =
        be.find(FormKind::III, Field::Position)
    {
        types.push(ExpectedType {
            form: FormKind::III,
            field: Field::Position,
            outcome: ExpectedOutcome::TypedEither {
                degrees: [*degree, degree + 1],
            },
        });
    }
    Expected {
        is_minimal: false,
        sphere: None,
        h_over_k,
        types,
    }
}

/// Parallel surface `x + rho n`, checked for admissibility on a 9×9 grid.
pub fn make_parallel(base: &SurfaceSpec, rho: f64) -> Result<SurfaceSpec, SurfaceError> {
    make_parallel_with(base, rho, DEFAULT_EPS_PAR, &GeometryConfig::default())
}

pub fn make_parallel_with(
    base: &SurfaceSpec,
    rho: f64,
    eps_par: f64,
    cfg: &GeometryConfig,
) -> Result<SurfaceSpec, SurfaceError> {
    if rho == 0.0 || !rho.is_finite() {
        return Err(SurfaceError::BadParameter(format!(
            "parallel offset must be nonzero, got {rho}"
        )));
    }
    for pt in base.grid(9, 9) {
        let f = geometry::frame_with(base, pt, 0, cfg)?;
        f.require(FormKind::III)?;
        let (h, k) = (f.mean.value(), f.gauss.value());
        let factor = 1.0 - 2.0 * rho * h + rho * rho * k;
        if factor.abs() <= eps_par {
            return Err(SurfaceError::InadmissibleOffset {
                rho,
                u: pt[0],
                v: pt[1],
                factor,
            });
        }
    }
    let inner = base.clone();
    let eps_regular = cfg.eps_regular;
    let spec = SurfaceSpec::new("parallel", base.domain(), move |pt, m| {
        let x = inner.evaluate(pt[0], pt[1], m + 1)?;
        let xd = [
            geometry::derive_vec(&x, Dir::U)?,
            geometry::derive_vec(&x, Dir::V)?,
        ];
        let n = geometry::unit_normal(&xd, eps_regular, pt)?;
        Ok(std::array::from_fn(|c| x[c].at_most(m) + n[c].scale(rho)))
    })
    .with_label(format!("parallel:{}:rho={rho}", base.label()))
    .with_params(vec![("rho".to_string(), rho)])
    .with_expected(parallel_expected(base, rho));
    Ok(SurfaceSpec {
        parallel: Some(ParallelSpec {
            base: Arc::new(base.clone()),
            rho,
        }),
        ..spec
    })
}

/// `x ↦ R x + t` for a proper rotation `R` (row-major).
pub fn rigid_motion(
    base: &SurfaceSpec,
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
) -> Result<SurfaceSpec, SurfaceError> {
    let det = rotation[0][0] * (rotation[1][1] * rotation[2][2] - rotation[1][2] * rotation[2][1])
        - rotation[0][1] * (rotation[1][0] * rotation[2][2] - rotation[1][2] * rotation[2][0])
        + rotation[0][2] * (rotation[1][0] * rotation[2][1] - rotation[1][1] * rotation[2][0]);
    let mut orthogonal = true;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| rotation[i][k] * rotation[j][k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            orthogonal &= (dot - want).abs() < 1e-12;
        }
    }
    if !orthogonal || (det - 1.0).abs() > 1e-12 {
        return Err(SurfaceError::BadParameter(
            "rotation must be proper orthogonal".into(),
        ));
    }
    let inner = base.clone();
    let mut expected = base.expected().clone();
    if let Some(s) = expected.sphere.as_mut() {
        let c = s.center;
        s.center = std::array::from_fn(|i| {
            (0..3).map(|k| rotation[i][k] * c[k]).sum::<f64>() + translation[i]
        });
    }
    let is_translation = rotation == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let label = if is_translation {
        format!(
            "translate:{}:dx={},dy={},dz={}",
            base.label(),
            translation[0],
            translation[1],
            translation[2]
        )
    } else {
        format!("rigid:{}", base.label())
    };
    Ok(
        SurfaceSpec::new(base.name().to_string(), base.domain(), move |pt, m| {
            let x = inner.evaluate(pt[0], pt[1], m)?;
            Ok(std::array::from_fn(|i| {
                let mut acc = Jet2::constant(translation[i], pt, m);
                for (k, xk) in x.iter().enumerate() {
                    acc = acc + xk.scale(rotation[i][k]);
                }
                acc
            }))
        })
        .with_label(label)
        .with_params(base.params().to_vec())
        .with_expected(expected),
    )
}

pub fn translated(base: &SurfaceSpec, t: [f64; 3]) -> Result<SurfaceSpec, SurfaceError> {
    rigid_motion(base, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], t)
}

/// Parses a surface selector:
///
/// ```text
/// selector := "parallel:" selector ":rho=" real
///           | "translate:" selector ":" "dx=" real "," "dy=" real "," "dz=" real
///           | name [ ":" arg { "," arg } ]
/// arg      := key "=" real | variant
/// ```
pub fn parse_selector(selector: &str) -> Result<SurfaceSpec, SurfaceError> {
    let selector = selector.trim();
    for prefix in ["parallel:", "translate:"] {
        if let Some(rest) = selector.strip_prefix(prefix) {
            let (inner, args) = rest.rsplit_once(':').ok_or_else(|| {
                SurfaceError::BadParameter(format!("`{selector}` lacks {prefix} arguments"))
            })?;
            let args = SurfaceParams::parse(args)?;
            let base = parse_selector(inner)?;
            return if prefix == "parallel:" {
                args.check_keys("parallel", &["rho"], &[])?;
                let rho = args.get("rho").ok_or_else(|| {
                    SurfaceError::BadParameter("parallel needs rho=<offset>".into())
                })?;
                make_parallel(&base, rho)
            } else {
                args.check_keys("translate", &["dx", "dy", "dz"], &[])?;
                let t = [
                    args.get("dx").unwrap_or(0.0),
                    args.get("dy").unwrap_or(0.0),
                    args.get("dz").unwrap_or(0.0),
                ];
                translated(&base, t)
            };
        }
    }
    let (name, args) = selector.split_once(':').unwrap_or((selector, ""));
    catalog_get(name, &SurfaceParams::parse(args)?)
}
