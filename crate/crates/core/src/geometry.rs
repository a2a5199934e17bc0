//! Pointwise surface geometry in jet arithmetic.
//!
//! [`frame`] evaluates the position vector of a surface as jets and derives
//! the unit normal, the three fundamental forms
//!
//! ```text
//! g_ij = <x_/i, x_/j>,   b_ij = <n, x_/ij>,   e_ij = <n_/i, n_/j>
//! ```
//!
//! together with `H`, `K` and the Christoffel symbols of all three forms.
//! The Beltrami operators act on jets built over the same base point:
//!
//! ```text
//! ∇^J(φ, ψ) = a^ij φ_/i ψ_/j
//! Δ^J φ     = -a^ij (φ_/ij - C_ij^k φ_/k)
//! ```
//!
//! where `a` is `g`, `b` or `e` and `C` the matching Christoffel family.
//! With this sign convention `Δ^I = -(∂²_x + ∂²_y)` on the flat plane.
//!
//! Jets of different orders are combined by truncating to the lower order;
//! a result is valid up to the smallest order of its inputs.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{Dir, Jet2, JetError, DEFAULT_EPS_DIV};
use crate::surfaces::SurfaceSpec;

pub type Vec3J = [Jet2; 3];

/// Index order documented at each producer.
pub type Rank3 = [[[Jet2; 2]; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("irregular parametrization at ({u}, {v}): |x_u × x_v| = {norm:e}")]
    IrregularPoint { u: f64, v: f64, norm: f64 },
    #[error("jet order {available} is below the required {needed}")]
    OrderExhausted { needed: usize, available: usize },
    #[error("parabolic point at ({u}, {v}): K = {gauss:e}")]
    ParabolicPoint { u: f64, v: f64, gauss: f64 },
    #[error("non-elliptic point at ({u}, {v}): K = {gauss:e}")]
    NonEllipticPoint { u: f64, v: f64, gauss: f64 },
    #[error("point ({u}, {v}) lies outside the surface domain")]
    OutsideDomain { u: f64, v: f64 },
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl GeometryError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            GeometryError::IrregularPoint { .. } => "IrregularPoint",
            GeometryError::OrderExhausted { .. } => "OrderExhausted",
            GeometryError::ParabolicPoint { .. } => "ParabolicPoint",
            GeometryError::NonEllipticPoint { .. } => "NonEllipticPoint",
            GeometryError::OutsideDomain { .. } => "OutsideDomain",
            GeometryError::Jet(_) => "JetError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormKind {
    I,
    II,
    III,
}

impl FormKind {
    pub const ALL: [FormKind; 3] = [FormKind::I, FormKind::II, FormKind::III];
}

impl std::fmt::Display for FormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FormKind::I => "I",
            FormKind::II => "II",
            FormKind::III => "III",
        })
    }
}

impl std::str::FromStr for FormKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "I" | "1" => Ok(FormKind::I),
            "II" | "2" => Ok(FormKind::II),
            "III" | "3" => Ok(FormKind::III),
            _ => Err(format!("unknown form `{s}` (expected I, II or III)")),
        }
    }
}

/// Vector field on which iterated Laplacians act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Position,
    Normal,
}

impl std::str::FromStr for Field {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "position" | "x" => Ok(Field::Position),
            "normal" | "n" => Ok(Field::Normal),
            _ => Err(format!("unknown field `{s}` (expected position or normal)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryConfig {
    /// Gate on |K| (III) and K (II).
    pub eps_k: f64,
    pub eps_div: f64,
    /// Minimum |x_u × x_v|.
    pub eps_regular: f64,
    /// Accept II as an indefinite metric wherever K < 0 but b is
    /// nondegenerate. Off by default: II then needs K > 0.
    pub indefinite_second_form: bool,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            eps_k: 1e-9,
            eps_div: DEFAULT_EPS_DIV,
            eps_regular: 1e-10,
            indefinite_second_form: false,
        }
    }
}

// Order-reconciling helpers: results are valid to the lower input order.

fn lift(a: &Jet2, m: usize) -> Cow<'_, Jet2> {
    if a.order() == m {
        Cow::Borrowed(a)
    } else {
        Cow::Owned(a.at_most(m))
    }
}

pub(crate) fn jmul(a: &Jet2, b: &Jet2) -> Jet2 {
    let m = a.order().min(b.order());
    &*lift(a, m) * &*lift(b, m)
}

pub(crate) fn jadd(a: &Jet2, b: &Jet2) -> Jet2 {
    let m = a.order().min(b.order());
    &*lift(a, m) + &*lift(b, m)
}

pub(crate) fn jsub(a: &Jet2, b: &Jet2) -> Jet2 {
    let m = a.order().min(b.order());
    &*lift(a, m) - &*lift(b, m)
}

pub(crate) fn jsum(terms: impl IntoIterator<Item = Jet2>) -> Jet2 {
    terms
        .into_iter()
        .reduce(|acc, t| jadd(&acc, &t))
        .expect("non-empty sum")
}

pub fn dot(a: &Vec3J, b: &Vec3J) -> Jet2 {
    jsum((0..3).map(|c| jmul(&a[c], &b[c])))
}

pub fn cross(a: &Vec3J, b: &Vec3J) -> Vec3J {
    [
        jsub(&jmul(&a[1], &b[2]), &jmul(&a[2], &b[1])),
        jsub(&jmul(&a[2], &b[0]), &jmul(&a[0], &b[2])),
        jsub(&jmul(&a[0], &b[1]), &jmul(&a[1], &b[0])),
    ]
}

/// `s * v` componentwise for a scalar jet `s`.
pub fn scale_vec(s: &Jet2, v: &Vec3J) -> Vec3J {
    std::array::from_fn(|c| jmul(s, &v[c]))
}

pub fn add_vec(a: &Vec3J, b: &Vec3J) -> Vec3J {
    std::array::from_fn(|c| jadd(&a[c], &b[c]))
}

pub fn sub_vec(a: &Vec3J, b: &Vec3J) -> Vec3J {
    std::array::from_fn(|c| jsub(&a[c], &b[c]))
}

pub fn derive_vec(v: &Vec3J, dir: Dir) -> Result<Vec3J, JetError> {
    Ok([v[0].derive(dir)?, v[1].derive(dir)?, v[2].derive(dir)?])
}

pub fn value_vec(v: &Vec3J) -> [f64; 3] {
    [v[0].value(), v[1].value(), v[2].value()]
}

/// `x_u × x_v / |x_u × x_v|`, at the order of the tangent jets.
pub fn unit_normal(
    xd: &[Vec3J; 2],
    eps_regular: f64,
    point: [f64; 2],
) -> Result<Vec3J, GeometryError> {
    let normal = cross(&xd[0], &xd[1]);
    let sq = dot(&normal, &normal);
    let norm = sq.value().max(0.0).sqrt();
    if norm < eps_regular {
        return Err(GeometryError::IrregularPoint {
            u: point[0],
            v: point[1],
            norm,
        });
    }
    let inv = sq.sqrt()?.recip()?;
    Ok(scale_vec(&inv, &normal))
}

/// Symmetric 2×2 tensor of jets with determinant and optional inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SymForm2 {
    /// `a_11, a_12, a_22`
    pub components: [Jet2; 3],
    pub det: Jet2,
    /// `a^11, a^12, a^22`
    pub inverse: Option<[Jet2; 3]>,
}

#[inline]
fn sym_index(i: usize, j: usize) -> usize {
    i + j
}

impl SymForm2 {
    pub fn new(a11: Jet2, a12: Jet2, a22: Jet2) -> Self {
        let det = jsub(&jmul(&a11, &a22), &jmul(&a12, &a12));
        SymForm2 {
            components: [a11, a12, a22],
            det,
            inverse: None,
        }
    }

    pub fn inverted(mut self, eps_div: f64) -> Result<Self, JetError> {
        let r = self.det.recip_with(eps_div)?;
        let [a11, a12, a22] = &self.components;
        self.inverse = Some([jmul(&r, a22), -jmul(&r, a12), jmul(&r, a11)]);
        Ok(self)
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet2 {
        &self.components[sym_index(i, j)]
    }

    pub fn inv(&self, i: usize, j: usize) -> Option<&Jet2> {
        self.inverse.as_ref().map(|a| &a[sym_index(i, j)])
    }

    pub fn order(&self) -> usize {
        self.components.iter().map(Jet2::order).min().unwrap_or(0)
    }

    pub fn values(&self) -> [[f64; 2]; 2] {
        [
            [self.get(0, 0).value(), self.get(0, 1).value()],
            [self.get(1, 0).value(), self.get(1, 1).value()],
        ]
    }

    pub fn inverse_values(&self) -> Option<[[f64; 2]; 2]> {
        self.inverse.as_ref()?;
        let g = |i, j| self.inv(i, j).unwrap().value();
        Some([[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]])
    }
}

/// Christoffel symbols of the second kind, `C_ij^k = ½ a^km (-a_ij/m + a_im/j + a_jm/i)`,
/// stored as `c[i][j][k]`.
fn christoffel(form: &SymForm2) -> Result<Rank3, GeometryError> {
    let inv = form
        .inverse
        .as_ref()
        .expect("christoffel symbols need an inverted form");
    // d[m][i][j] = a_ij/m
    let d: Vec<[Jet2; 3]> = Dir::BOTH
        .iter()
        .map(|&dir| -> Result<[Jet2; 3], JetError> {
            Ok([
                form.components[0].derive(dir)?,
                form.components[1].derive(dir)?,
                form.components[2].derive(dir)?,
            ])
        })
        .collect::<Result<_, _>>()?;
    let da = |m: usize, i: usize, j: usize| &d[m][sym_index(i, j)];
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let terms = (0..2).map(|m| {
                    let first_kind = jadd(&jsub(da(j, i, m), da(m, i, j)), da(i, j, m));
                    jmul(&inv[sym_index(k, m)], &first_kind)
                });
                jsum(terms).scale(0.5)
            })
        })
    }))
}

/// All pointwise geometry at one parameter point.
///
/// Every field is valid at least to `order`; most are stored at a higher
/// order (`x` at `order + 3`, `n` at `order + 2`, `b`/`e` at `order + 1`).
#[derive(Debug, Clone)]
pub struct FrameData {
    pub point: [f64; 2],
    pub order: usize,
    pub config: GeometryConfig,
    pub x: Vec3J,
    /// `x_d[i] = x_/i`
    pub x_d: [Vec3J; 2],
    pub n: Vec3J,
    /// `n_d[i] = n_/i`
    pub n_d: [Vec3J; 2],
    pub first: SymForm2,
    pub second: SymForm2,
    pub third: SymForm2,
    pub mean: Jet2,
    pub gauss: Jet2,
    /// Γ (first form), `[i][j][k]`
    pub gamma: Rank3,
    /// Π (second form); absent at parabolic points.
    pub pi: Option<Rank3>,
    /// A (third form); absent at parabolic points.
    pub a: Option<Rank3>,
}

pub fn frame(
    surface: &SurfaceSpec,
    point: [f64; 2],
    order: usize,
) -> Result<FrameData, GeometryError> {
    frame_with(surface, point, order, &GeometryConfig::default())
}

pub fn frame_with(
    surface: &SurfaceSpec,
    point: [f64; 2],
    order: usize,
    cfg: &GeometryConfig,
) -> Result<FrameData, GeometryError> {
    if !surface.contains(point) {
        return Err(GeometryError::OutsideDomain {
            u: point[0],
            v: point[1],
        });
    }
    let top = order + 3;
    let x = surface.evaluate(point[0], point[1], top)?;
    let x_d = [derive_vec(&x, Dir::U)?, derive_vec(&x, Dir::V)?];
    let x_uu = derive_vec(&x_d[0], Dir::U)?;
    let x_uv = derive_vec(&x_d[0], Dir::V)?;
    let x_vv = derive_vec(&x_d[1], Dir::V)?;

    let first = SymForm2::new(
        dot(&x_d[0], &x_d[0]),
        dot(&x_d[0], &x_d[1]),
        dot(&x_d[1], &x_d[1]),
    )
    .inverted(cfg.eps_div)?;
    let n = unit_normal(&x_d, cfg.eps_regular, point)?;
    let n_d = [derive_vec(&n, Dir::U)?, derive_vec(&n, Dir::V)?];
    let second = SymForm2::new(dot(&n, &x_uu), dot(&n, &x_uv), dot(&n, &x_vv));
    let third = SymForm2::new(
        dot(&n_d[0], &n_d[0]),
        dot(&n_d[0], &n_d[1]),
        dot(&n_d[1], &n_d[1]),
    );

    let gauss = jmul(&second.det, &first.det.recip_with(cfg.eps_div)?);
    let trace = jsum((0..2).flat_map(|i| {
        let first = &first;
        let second = &second;
        (0..2).map(move |j| jmul(first.inv(i, j).unwrap(), second.get(i, j)))
    }));
    let mean = trace.scale(0.5);

    let gamma = christoffel(&first)?;
    let (second, third, pi, a) = if gauss.value().abs() > cfg.eps_k {
        let second = second.inverted(cfg.eps_div)?;
        let third = third.inverted(cfg.eps_div)?;
        let pi = christoffel(&second)?;
        let a = christoffel(&third)?;
        (second, third, Some(pi), Some(a))
    } else {
        (second, third, None, None)
    };

    Ok(FrameData {
        point,
        order,
        config: *cfg,
        x,
        x_d,
        n,
        n_d,
        first,
        second,
        third,
        mean,
        gauss,
        gamma,
        pi,
        a,
    })
}

impl FrameData {
    /// Checks that the form `J` may be used as a metric here.
    pub fn require(&self, form: FormKind) -> Result<(), GeometryError> {
        let k = self.gauss.value();
        let [u, v] = self.point;
        match form {
            FormKind::I => Ok(()),
            _ if k.abs() <= self.config.eps_k => {
                Err(GeometryError::ParabolicPoint { u, v, gauss: k })
            }
            FormKind::II if k <= self.config.eps_k && !self.config.indefinite_second_form => {
                Err(GeometryError::NonEllipticPoint { u, v, gauss: k })
            }
            _ => Ok(()),
        }
    }

    pub fn form(&self, form: FormKind) -> &SymForm2 {
        match form {
            FormKind::I => &self.first,
            FormKind::II => &self.second,
            FormKind::III => &self.third,
        }
    }

    /// Christoffel symbols of the form, `[i][j][k]`.
    pub fn christoffel(&self, form: FormKind) -> Result<&Rank3, GeometryError> {
        self.require(form)?;
        Ok(match form {
            FormKind::I => &self.gamma,
            FormKind::II => self.pi.as_ref().expect("present when admissible"),
            FormKind::III => self.a.as_ref().expect("present when admissible"),
        })
    }

    /// Inverse tensor `a^ij` of the form.
    pub fn inverse(&self, form: FormKind) -> Result<&[Jet2; 3], GeometryError> {
        self.require(form)?;
        Ok(self
            .form(form)
            .inverse
            .as_ref()
            .expect("present when admissible"))
    }

    /// Second derivatives of the position vector, `x_/ij`.
    pub fn x_dd(&self, i: usize, j: usize) -> Result<Vec3J, GeometryError> {
        Ok(derive_vec(&self.x_d[i], Dir::from_index(j))?)
    }

    /// Second derivatives of the normal, `n_/ij`.
    pub fn n_dd(&self, i: usize, j: usize) -> Result<Vec3J, GeometryError> {
        Ok(derive_vec(&self.n_d[i], Dir::from_index(j))?)
    }

    /// Coordinate jet `u` or `v` at the top order of this frame.
    pub fn coordinate(&self, dir: Dir) -> Jet2 {
        Jet2::variable(dir, self.point, self.x[0].order())
    }

    /// `(κ1, κ2)` at the base point, `κ1 >= κ2`.
    pub fn principal_curvatures(&self) -> (f64, f64) {
        let h = self.mean.value();
        let k = self.gauss.value();
        let disc = (h * h - k).max(0.0).sqrt();
        (h + disc, h - disc)
    }

    /// Contracted Christoffel symbols `C_ij^j` for `i = 1, 2`.
    pub fn christoffel_trace(&self, form: FormKind) -> Result<[f64; 2], GeometryError> {
        let c = self.christoffel(form)?;
        Ok(std::array::from_fn(|i| {
            (0..2).map(|j| c[i][j][j].value()).sum()
        }))
    }
}

fn gradient(f: &Jet2) -> Result<[Jet2; 2], GeometryError> {
    if f.order() == 0 {
        return Err(GeometryError::OrderExhausted {
            needed: 1,
            available: 0,
        });
    }
    Ok([f.derive(Dir::U)?, f.derive(Dir::V)?])
}

/// First Beltrami parameter `∇^J(φ, ψ) = a^ij φ_/i ψ_/j`.
pub fn beltrami1(
    form: FormKind,
    frame: &FrameData,
    phi: &Jet2,
    psi: &Jet2,
) -> Result<Jet2, GeometryError> {
    let inv = frame.inverse(form)?;
    let dp = gradient(phi)?;
    let dq = gradient(psi)?;
    Ok(jsum((0..2).flat_map(|i| {
        let (dp, dq) = (&dp, &dq);
        (0..2).map(move |j| jmul(&inv[sym_index(i, j)], &jmul(&dp[i], &dq[j])))
    })))
}

/// `∇^J(φ, v)` applied to each component of `v`.
pub fn beltrami1_vec(
    form: FormKind,
    frame: &FrameData,
    phi: &Jet2,
    v: &Vec3J,
) -> Result<Vec3J, GeometryError> {
    Ok([
        beltrami1(form, frame, phi, &v[0])?,
        beltrami1(form, frame, phi, &v[1])?,
        beltrami1(form, frame, phi, &v[2])?,
    ])
}

/// Second Beltrami parameter `Δ^J f = -a^ij (f_/ij - C_ij^k f_/k)`; two orders are consumed.
pub fn laplacian(form: FormKind, frame: &FrameData, f: &Jet2) -> Result<Jet2, GeometryError> {
    if f.order() < 2 {
        return Err(GeometryError::OrderExhausted {
            needed: 2,
            available: f.order(),
        });
    }
    let inv = frame.inverse(form)?;
    let c = frame.christoffel(form)?;
    let df = gradient(f)?;
    let hess = [
        [df[0].derive(Dir::U)?, df[0].derive(Dir::V)?],
        [df[1].derive(Dir::U)?, df[1].derive(Dir::V)?],
    ];
    let mut terms = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let conn = jadd(&jmul(&c[i][j][0], &df[0]), &jmul(&c[i][j][1], &df[1]));
            let covariant = jsub(&hess[i][j], &conn);
            terms.push(jmul(&inv[sym_index(i, j)], &covariant));
        }
    }
    Ok(-jsum(terms))
}

pub fn laplacian_vec(form: FormKind, frame: &FrameData, v: &Vec3J) -> Result<Vec3J, GeometryError> {
    Ok([
        laplacian(form, frame, &v[0])?,
        laplacian(form, frame, &v[1])?,
        laplacian(form, frame, &v[2])?,
    ])
}

/// Covariant derivative of a symmetric covariant 2-tensor with respect to the
/// connection of `form`: `d[k][i][j] = ∇_k t_ij = t_ij/k - C_ik^m t_mj - C_jk^m t_im`.
pub fn covariant_d_form(
    form: FormKind,
    frame: &FrameData,
    target: &SymForm2,
) -> Result<Rank3, GeometryError> {
    let c = frame.christoffel(form)?;
    let dt: Vec<Vec<Jet2>> = Dir::BOTH
        .iter()
        .map(|&dir| {
            target
                .components
                .iter()
                .map(|t| t.derive(dir))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let t = |i: usize, j: usize| target.get(i, j);
    Ok(std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = dt[k][sym_index(i, j)].clone();
                for m in 0..2 {
                    acc = jsub(&acc, &jmul(&c[i][k][m], t(m, j)));
                    acc = jsub(&acc, &jmul(&c[j][k][m], t(i, m)));
                }
                acc
            })
        })
    }))
}

/// Covariant derivative of a symmetric contravariant 2-tensor:
/// `d[j][i][k] = ∇_j t^ik = t^ik/j + C_jm^i t^mk + C_jm^k t^im`.
pub fn covariant_d_contravariant(
    form: FormKind,
    frame: &FrameData,
    target: &[Jet2; 3],
) -> Result<Rank3, GeometryError> {
    let c = frame.christoffel(form)?;
    let dt: Vec<Vec<Jet2>> = Dir::BOTH
        .iter()
        .map(|&dir| {
            target
                .iter()
                .map(|t| t.derive(dir))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let t = |i: usize, k: usize| &target[sym_index(i, k)];
    Ok(std::array::from_fn(|j| {
        std::array::from_fn(|i| {
            std::array::from_fn(|k| {
                let mut acc = dt[j][sym_index(i, k)].clone();
                for m in 0..2 {
                    acc = jadd(&acc, &jmul(&c[j][m][i], t(m, k)));
                    acc = jadd(&acc, &jmul(&c[j][m][k], t(i, m)));
                }
                acc
            })
        })
    }))
}

/// Difference tensors `T = Γ - Π` and `T̃ = A - Π`, both `[i][j][k]`.
pub fn t_tensors(frame: &FrameData) -> Result<(Rank3, Rank3), GeometryError> {
    frame.require(FormKind::III)?;
    let pi = frame.pi.as_ref().expect("present when non-parabolic");
    let a = frame.a.as_ref().expect("present when non-parabolic");
    let t = std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| jsub(&frame.gamma[i][j][k], &pi[i][j][k])))
    });
    let tt = std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| jsub(&a[i][j][k], &pi[i][j][k])))
    });
    Ok((t, tt))
}

/// Frame order needed for `k` applications of a Laplacian to the position vector.
pub fn krylov_frame_order(k: usize) -> usize {
    (2 * k).saturating_sub(2)
}

/// Krylov values `[f, Δf, ..., Δ^k f]` of a frame's position or normal field.
pub fn krylov_from_frame(
    form: FormKind,
    frame: &FrameData,
    field: Field,
    k: usize,
) -> Result<Vec<[f64; 3]>, GeometryError> {
    frame.require(form)?;
    let mut f = match field {
        Field::Position => frame.x.clone(),
        Field::Normal => frame.n.clone(),
    };
    if f[0].order() < 2 * k {
        return Err(GeometryError::OrderExhausted {
            needed: 2 * k,
            available: f[0].order(),
        });
    }
    let mut out = Vec::with_capacity(k + 1);
    out.push(value_vec(&f));
    for _ in 0..k {
        f = laplacian_vec(form, frame, &f)?;
        out.push(value_vec(&f));
    }
    Ok(out)
}

/// `[f, Δ^J f, ..., (Δ^J)^k f]` at a point for `f = x` or `f = n`.
pub fn iterated_laplacian(
    form: FormKind,
    surface: &SurfaceSpec,
    point: [f64; 2],
    field: Field,
    k: usize,
    cfg: &GeometryConfig,
) -> Result<Vec<[f64; 3]>, GeometryError> {
    let frame = frame_with(surface, point, krylov_frame_order(k), cfg)?;
    krylov_from_frame(form, &frame, field, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::parse_selector;

    fn sel(s: &str) -> SurfaceSpec {
        parse_selector(s).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn unit_sphere_curvatures() {
        let s = sel("sphere:r=1");
        let f = frame(&s, [1.1, 0.3], 2).unwrap();
        assert!(close(f.mean.value(), 1.0, 1e-13));
        assert!(close(f.gauss.value(), 1.0, 1e-13));
    }

    #[test]
    fn unit_sphere_third_form_equals_first() {
        let s = sel("sphere:r=1");
        let f = frame(&s, [0.7, -2.0], 2).unwrap();
        for (e, g) in f.third.components.iter().zip(&f.first.components) {
            let m = e.order().min(g.order());
            for (a, b) in e.at_most(m).coeffs().iter().zip(g.at_most(m).coeffs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn torus_outer_equator() {
        // principal curvatures 1/r = 2 and 1/(R + r) = 0.4, inward normal
        let s = sel("torus:R=2,r=0.5");
        let f = frame(&s, [0.0, 0.0], 1).unwrap();
        assert!(
            close(f.gauss.value(), 0.8, 1e-13),
            "K = {}",
            f.gauss.value()
        );
        assert!(close(f.mean.value(), 1.2, 1e-13), "H = {}", f.mean.value());
    }

    #[test]
    fn paraboloid_and_saddle_at_origin() {
        let p = frame(&sel("monge:paraboloid"), [0.0, 0.0], 1).unwrap();
        assert!(close(p.gauss.value(), 4.0, 1e-14));
        assert!(close(p.mean.value(), 2.0, 1e-14));
        let s = frame(&sel("monge:saddle"), [0.0, 0.0], 1).unwrap();
        assert!(close(s.gauss.value(), -4.0, 1e-14));
        let phi = s.coordinate(Dir::U);
        assert!(matches!(
            beltrami1(FormKind::II, &s, &phi, &phi),
            Err(GeometryError::NonEllipticPoint { .. })
        ));
        assert!(beltrami1(FormKind::III, &s, &phi, &phi).is_ok());
    }

    #[test]
    fn plane_rejects_second_and_third_forms() {
        let f = frame(&sel("monge:zero"), [0.2, 0.1], 2).unwrap();
        let phi = f.coordinate(Dir::U);
        for form in [FormKind::II, FormKind::III] {
            assert!(matches!(
                laplacian(form, &f, &phi),
                Err(GeometryError::ParabolicPoint { .. })
            ));
        }
        let lap = laplacian_vec(FormKind::I, &f, &f.x).unwrap();
        assert!(lap.iter().all(|c| c.max_abs() == 0.0));
    }

    #[test]
    fn frame_invariants_on_catenoid() {
        let f = frame(&sel("catenoid"), [0.4, 0.3], 3).unwrap();
        let nn = dot(&f.n, &f.n);
        assert!((nn.value() - 1.0).abs() < 1e-12);
        assert!(nn.coeffs()[1..].iter().all(|c| c.abs() < 1e-10));
        for i in 0..2 {
            assert!(dot(&f.n, &f.x_d[i]).max_abs() < 1e-12);
        }
        // K g = b for determinants
        let lhs = jmul(&f.gauss, &f.first.det);
        let diff = jsub(&lhs, &f.second.det);
        assert!(diff.max_abs() < 1e-11);
        // matrix · inverse = identity
        for form in FormKind::ALL {
            let s = f.form(form);
            let inv = s.inverse.as_ref().unwrap();
            for i in 0..2 {
                for k in 0..2 {
                    let p = jsum((0..2).map(|j| jmul(s.get(i, j), &inv[sym_index(j, k)])));
                    let want = if i == k { 1.0 } else { 0.0 };
                    assert!((p.value() - want).abs() < 1e-11);
                    assert!(p.coeffs()[1..].iter().all(|c| c.abs() < 1e-11));
                }
            }
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let f = frame(&sel("sphere"), [1.0, 1.0], 2).unwrap();
        let one = Jet2::constant(1.0, f.point, 4);
        let psi = f.coordinate(Dir::V);
        for form in FormKind::ALL {
            assert_eq!(beltrami1(form, &f, &one, &psi).unwrap().max_abs(), 0.0);
            assert_eq!(laplacian(form, &f, &one).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn beltrami1_of_coordinates_is_inverse_metric() {
        let f = frame(&sel("helicoid"), [0.5, 0.8], 2).unwrap();
        let u = f.coordinate(Dir::U);
        let got = beltrami1(FormKind::I, &f, &u, &u).unwrap();
        assert!((got.value() - f.first.inv(0, 0).unwrap().value()).abs() < 1e-15);
    }

    #[test]
    fn metric_compatibility() {
        let f = frame(&sel("enneper"), [0.9, 1.1], 2).unwrap();
        let dg = covariant_d_form(FormKind::I, &f, &f.first).unwrap();
        let de = covariant_d_form(FormKind::III, &f, &f.third).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(dg[k][i][j].max_abs() < 1e-10);
                    assert!(de[k][i][j].max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sphere_difference_tensor_vanishes() {
        let f = frame(&sel("sphere:r=2"), [1.3, 0.2], 2).unwrap();
        let (t, _) = t_tensors(&f).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(t[i][j][k].max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn iterated_laplacians_on_sphere_and_catenoid() {
        let cfg = GeometryConfig::default();
        let s = sel("sphere:r=1");
        let seq =
            iterated_laplacian(FormKind::III, &s, [1.0, 0.5], Field::Position, 2, &cfg).unwrap();
        for c in 0..3 {
            assert!((seq[1][c] - 2.0 * seq[0][c]).abs() < 1e-12);
            assert!((seq[2][c] - 4.0 * seq[0][c]).abs() < 1e-11);
        }
        let cat = sel("catenoid");
        let seq =
            iterated_laplacian(FormKind::III, &cat, [1.0, 0.5], Field::Position, 1, &cfg).unwrap();
        assert!(seq[1].iter().all(|c| c.abs() < 1e-12));
        for name in ["catenoid", "helicoid", "enneper", "torus"] {
            let surf = sel(name);
            let pt = surf.grid(3, 3)[4];
            let seq = iterated_laplacian(FormKind::III, &surf, pt, Field::Normal, 2, &cfg).unwrap();
            for c in 0..3 {
                assert!((seq[1][c] - 2.0 * seq[0][c]).abs() < 1e-11, "{name}");
                assert!((seq[2][c] - 4.0 * seq[0][c]).abs() < 1e-10, "{name}");
            }
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        assert!(matches!(
            frame(&sel("sphere"), [0.0, 0.0], 1),
            Err(GeometryError::OutsideDomain { .. })
        ));
    }
}
