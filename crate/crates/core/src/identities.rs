//! Residual checks for the Beltrami-operator identities.
//!
//! Each registered check evaluates both sides of an identity with jet
//! arithmetic and compares their values at every sample of a grid. The
//! residual at a sample is the largest difference over all components and
//! indices, divided by `max(1, largest participating term)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{
    self, beltrami1_vec, covariant_d_contravariant, covariant_d_form, frame_with, jadd, jmul, jsub,
    jsum, laplacian, laplacian_vec, scale_vec, sub_vec, t_tensors, FormKind, FrameData,
    GeometryConfig, GeometryError, Rank3, Vec3J,
};
use crate::jets::{Dir, Jet2};
use crate::surfaces::{make_parallel, SphereInfo, SurfaceSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Pointwise condition a check needs before it can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// First fundamental form only.
    Any,
    /// Uses inverses of the second or third form: K ≠ 0.
    NonParabolic,
    /// Uses the second form as a metric: K > 0, or K ≠ 0 when the geometry
    /// config admits an indefinite second form.
    Elliptic,
}

impl Gate {
    fn admit(self, frame: &FrameData) -> Result<(), GeometryError> {
        match self {
            Gate::Any => Ok(()),
            Gate::NonParabolic => frame.require(FormKind::III),
            Gate::Elliptic => frame.require(FormKind::II),
        }
    }
}

/// Surfaces a check is defined on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    All,
    /// Needs sphere metadata (radius and center).
    Sphere,
    /// Compares the surface with a parallel partner.
    ParallelPair,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub id: &'static str,
    pub description: &'static str,
    /// Forms whose operators or inverses appear in the check.
    pub forms: &'static [FormKind],
    pub gate: Gate,
    pub scope: Scope,
}

use FormKind::{I, II, III};

const fn check(
    id: &'static str,
    description: &'static str,
    forms: &'static [FormKind],
    gate: Gate,
    scope: Scope,
) -> IdentityCheck {
    IdentityCheck {
        id,
        description,
        forms,
        gate,
        scope,
    }
}

pub static REGISTRY: [IdentityCheck; 27] = [
    check("ID01", "Δ^I x = -2H n", &[I], Gate::Any, Scope::All),
    check(
        "ID02",
        "∇^I(φ, x) + ∇^II(φ, n) = 0",
        &[I, II],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID03",
        "∇^II(φ, x) + ∇^III(φ, n) = 0",
        &[II, III],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID04",
        "n_/j = -e_jk b^km x_/m = -b_jk g^km x_/m",
        &[I, III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID05",
        "Δ^II x = ½ b^ij b^km ∇^I_k b_ij x_/m - b^ij b_ij n",
        &[I, II],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID06",
        "∇^I_k b_ij = ∇^I_i b_jk (Codazzi)",
        &[I],
        Gate::Any,
        Scope::All,
    ),
    check(
        "ID07",
        "Δ^II x = ½ b^ij b^mk ∇^I_i b_jk x_/m - 2n",
        &[I, II],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID08",
        "T_ij^k = Γ_ij^k - Π_ij^k = -½ b^km ∇^I_m b_ij",
        &[I],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID09",
        "Γ_ij^j = g_/i / 2g,  Π_ij^j = b_/i / 2b",
        &[I],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID10",
        "K_/k / K = b_/k / b - g_/k / g = 2(Π_kj^j - Γ_kj^j) = -2 T_kj^j = b^ij ∇^I_i b_kj",
        &[I],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID11",
        "Δ^II x = -(1/2K) ∇^III(K, n) - 2n",
        &[II, III],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID12",
        "Δ^III x = e^ij b^km ∇^I_m b_ij x_/k - e^ij b_ij n",
        &[I, III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID13",
        "Δ^III x = ∇^III(2H/K, n) - (2H/K) n",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID14",
        "T̃_ij^k = A_ij^k - Π_ij^k = -½ b^km ∇^III_m b_ij",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID15",
        "T_ij^k + T̃_ij^k = 0",
        &[I, III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID16",
        "∇^III_j e^ik = 0 (Ricci)",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID17",
        "2H/K = e^ik b_ik",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID18",
        "(2H/K)_/m = e^ik ∇^III_m b_ik",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID19",
        "e^ij b^km ∇^I_m b_ij x_/k = -b^km (2H/K)_/m x_/k = -∇^II(2H/K, x)",
        &[I, II, III],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID20",
        "Δ^I n = 2∇^I(H, x) + 2(2H² - K) n",
        &[I],
        Gate::Any,
        Scope::All,
    ),
    check(
        "ID21",
        "Δ^II n = b^km T_mj^j n_/k + 2H n",
        &[I, II],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID22",
        "Δ^II n = (1/2K) ∇^I(K, x) + 2H n",
        &[I, II],
        Gate::Elliptic,
        Scope::All,
    ),
    check(
        "ID23",
        "∇^III_k n_/i = -e_ik n",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID24",
        "Δ^III n = 2n",
        &[III],
        Gate::NonParabolic,
        Scope::All,
    ),
    check(
        "ID25",
        "<x - c, n> = -2/λ with λ = 2/r (sphere)",
        &[I],
        Gate::Any,
        Scope::Sphere,
    ),
    check(
        "ID26",
        "H*/K* = H/K - ρ (parallel pair)",
        &[III],
        Gate::NonParabolic,
        Scope::ParallelPair,
    ),
    check(
        "ID27",
        "e*_ij = e_ij and Δ^III* φ = Δ^III φ (parallel pair)",
        &[III],
        Gate::NonParabolic,
        Scope::ParallelPair,
    ),
];

pub fn lookup(id: &str) -> Option<&'static IdentityCheck> {
    REGISTRY.iter().find(|c| c.id.eq_ignore_ascii_case(id))
}

/// Scalar functions φ used in the φ-universal checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestScalar {
    U,
    V,
    /// u² + v²
    ParamRadius,
    /// ⟨x, x⟩
    PositionSquared,
}

impl TestScalar {
    pub const ALL: [TestScalar; 4] = [
        TestScalar::U,
        TestScalar::V,
        TestScalar::ParamRadius,
        TestScalar::PositionSquared,
    ];

    /// Jet of the scalar; `x·x` uses the given frame's position.
    pub fn jet(self, frame: &FrameData) -> Jet2 {
        let u = frame.coordinate(Dir::U);
        let v = frame.coordinate(Dir::V);
        match self {
            TestScalar::U => u,
            TestScalar::V => v,
            TestScalar::ParamRadius => &u * &u + &v * &v,
            TestScalar::PositionSquared => geometry::dot(&frame.x, &frame.x),
        }
    }
}

#[derive(Debug, Default)]
struct Residual {
    diff: f64,
    scale: f64,
}

impl Residual {
    fn eq(&mut self, lhs: &Jet2, rhs: &Jet2) {
        let (a, b) = (lhs.value(), rhs.value());
        let d = (a - b).abs();
        // NaN must not be absorbed by max()
        self.diff = if d.is_nan() {
            f64::NAN
        } else {
            self.diff.max(d)
        };
        self.scale = self.scale.max(a.abs()).max(b.abs());
    }

    fn eq_vec(&mut self, lhs: &Vec3J, rhs: &Vec3J) {
        for c in 0..3 {
            self.eq(&lhs[c], &rhs[c]);
        }
    }

    fn eq_rank3(&mut self, lhs: &Rank3, rhs: &Rank3) {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    self.eq(&lhs[i][j][k], &rhs[i][j][k]);
                }
            }
        }
    }

    fn finish(self) -> f64 {
        self.diff / self.scale.max(1.0)
    }
}

/// A surface frame together with the frame of a parallel partner.
struct ParallelPair {
    base: FrameData,
    parallel: FrameData,
    rho: f64,
}

struct SampleContext<'a> {
    frame: &'a FrameData,
    scalars: &'a [TestScalar],
    sphere: Option<SphereInfo>,
    pair: Option<Result<ParallelPair, String>>,
}

fn sym(a: &[Jet2; 3], i: usize, j: usize) -> &Jet2 {
    &a[i + j]
}

/// `b^ij`, available wherever K ≠ 0 even if II is not a metric there.
fn b_inverse(f: &FrameData) -> Result<&[Jet2; 3], GeometryError> {
    f.require(III)?;
    Ok(f.second
        .inverse
        .as_ref()
        .expect("inverted when non-parabolic"))
}

/// `Σ_m w[m] v_m` for a pair of vector fields.
fn combine(w: &[Jet2; 2], v: &[Vec3J; 2]) -> Vec3J {
    geometry::add_vec(&scale_vec(&w[0], &v[0]), &scale_vec(&w[1], &v[1]))
}

/// `Σ_{i,j} s^ij t_ij` for symmetric inverse `s` and arbitrary `t(i, j)`.
fn contract(s: &[Jet2; 3], t: impl Fn(usize, usize) -> Jet2) -> Jet2 {
    jsum(
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| jmul(sym(s, i, j), &t(i, j))),
    )
}

fn two_h_over_k(f: &FrameData) -> Result<Jet2, GeometryError> {
    Ok(jmul(
        &f.mean.scale(2.0),
        &f.gauss.recip_with(f.config.eps_div)?,
    ))
}

fn evaluate(id: &str, ctx: &SampleContext) -> Result<f64, GeometryError> {
    let f = ctx.frame;
    let mut r = Residual::default();
    match id {
        "ID01" => {
            let lhs = laplacian_vec(I, f, &f.x)?;
            let rhs = scale_vec(&f.mean.scale(-2.0), &f.n);
            r.eq_vec(&lhs, &rhs);
        }
        "ID02" | "ID03" => {
            let (fx, fn_) = if id == "ID02" { (I, II) } else { (II, III) };
            for s in ctx.scalars {
                let phi = s.jet(f);
                let lhs = beltrami1_vec(fx, f, &phi, &f.x)?;
                let rhs = beltrami1_vec(fn_, f, &phi, &f.n)?;
                r.eq_vec(&lhs, &rhs.map(|c| -c));
            }
        }
        "ID04" => {
            let bi = b_inverse(f)?;
            let gi = f.inverse(I)?;
            for j in 0..2 {
                // w[m] = Σ_k a_jk c^km
                let via = |a: &geometry::SymForm2, c: &[Jet2; 3]| -> [Jet2; 2] {
                    std::array::from_fn(|m| jsum((0..2).map(|k| jmul(a.get(j, k), sym(c, k, m)))))
                };
                let w3 = via(&f.third, bi);
                let w2 = via(&f.second, gi);
                r.eq_vec(&f.n_d[j], &combine(&w3, &f.x_d).map(|c| -c));
                r.eq_vec(&f.n_d[j], &combine(&w2, &f.x_d).map(|c| -c));
            }
        }
        "ID05" | "ID07" => {
            let bi = f.inverse(II)?;
            let db = covariant_d_form(I, f, &f.second)?;
            let lhs = laplacian_vec(II, f, &f.x)?;
            // w[m] = ½ Σ b^ij b^km ∇_k b_ij  (ID05) or ½ Σ b^ij b^mk ∇_i b_jk (ID07)
            let w: [Jet2; 2] = std::array::from_fn(|m| {
                jsum((0..2).map(|k| {
                    let inner = contract(bi, |i, j| {
                        if id == "ID05" {
                            db[k][i][j].clone()
                        } else {
                            db[i][j][k].clone()
                        }
                    });
                    jmul(sym(bi, k, m), &inner)
                }))
                .scale(0.5)
            });
            let normal_coeff = if id == "ID05" {
                contract(bi, |i, j| f.second.get(i, j).clone())
            } else {
                Jet2::constant(2.0, f.point, f.order)
            };
            let rhs = sub_vec(&combine(&w, &f.x_d), &scale_vec(&normal_coeff, &f.n));
            r.eq_vec(&lhs, &rhs);
        }
        "ID06" => {
            let db = covariant_d_form(I, f, &f.second)?;
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        r.eq(&db[k][i][j], &db[i][j][k]);
                    }
                }
            }
        }
        "ID08" => {
            let (t, _) = t_tensors(f)?;
            let bi = b_inverse(f)?;
            let db = covariant_d_form(I, f, &f.second)?;
            let rhs: Rank3 = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    std::array::from_fn(|k| {
                        jsum((0..2).map(|m| jmul(sym(bi, k, m), &db[m][i][j]))).scale(-0.5)
                    })
                })
            });
            r.eq_rank3(&t, &rhs);
        }
        "ID09" => {
            f.require(III)?;
            let pi = f.pi.as_ref().expect("non-parabolic");
            for (c, form) in [(&f.gamma, &f.first), (pi, &f.second)] {
                let inv_det = form.det.recip_with(f.config.eps_div)?;
                for i in 0..2 {
                    let trace = jadd(&c[i][0][0], &c[i][1][1]);
                    let rhs = jmul(&form.det.derive(Dir::from_index(i))?, &inv_det).scale(0.5);
                    r.eq(&trace, &rhs);
                }
            }
        }
        "ID10" => {
            let (t, _) = t_tensors(f)?;
            let pi = f.pi.as_ref().expect("non-parabolic");
            let bi = b_inverse(f)?;
            let db = covariant_d_form(I, f, &f.second)?;
            let eps = f.config.eps_div;
            let inv_k = f.gauss.recip_with(eps)?;
            let inv_b = f.second.det.recip_with(eps)?;
            let inv_g = f.first.det.recip_with(eps)?;
            for k in 0..2 {
                let dir = Dir::from_index(k);
                let lhs = jmul(&f.gauss.derive(dir)?, &inv_k);
                let dets = jsub(
                    &jmul(&f.second.det.derive(dir)?, &inv_b),
                    &jmul(&f.first.det.derive(dir)?, &inv_g),
                );
                let traces = jsub(
                    &jadd(&pi[k][0][0], &pi[k][1][1]),
                    &jadd(&f.gamma[k][0][0], &f.gamma[k][1][1]),
                )
                .scale(2.0);
                let t_trace = jadd(&t[k][0][0], &t[k][1][1]).scale(-2.0);
                let codazzi = contract(bi, |i, j| db[i][k][j].clone());
                for rhs in [&dets, &traces, &t_trace, &codazzi] {
                    r.eq(&lhs, rhs);
                }
            }
        }
        "ID11" => {
            let lhs = laplacian_vec(II, f, &f.x)?;
            let grad = beltrami1_vec(III, f, &f.gauss, &f.n)?;
            let coeff = f.gauss.recip_with(f.config.eps_div)?.scale(-0.5);
            let rhs = sub_vec(
                &scale_vec(&coeff, &grad),
                &f.n.clone().map(|c| c.scale(2.0)),
            );
            r.eq_vec(&lhs, &rhs);
        }
        "ID12" => {
            let lhs = laplacian_vec(III, f, &f.x)?;
            let ei = f.inverse(III)?;
            let bi = b_inverse(f)?;
            let db = covariant_d_form(I, f, &f.second)?;
            let w: [Jet2; 2] = std::array::from_fn(|k| {
                jsum((0..2).map(|m| jmul(sym(bi, k, m), &contract(ei, |i, j| db[m][i][j].clone()))))
            });
            let normal_coeff = contract(ei, |i, j| f.second.get(i, j).clone());
            let rhs = sub_vec(&combine(&w, &f.x_d), &scale_vec(&normal_coeff, &f.n));
            r.eq_vec(&lhs, &rhs);
        }
        "ID13" => {
            let lhs = laplacian_vec(III, f, &f.x)?;
            let q = two_h_over_k(f)?;
            let rhs = sub_vec(&beltrami1_vec(III, f, &q, &f.n)?, &scale_vec(&q, &f.n));
            r.eq_vec(&lhs, &rhs);
        }
        "ID14" => {
            let (_, tt) = t_tensors(f)?;
            let bi = b_inverse(f)?;
            let db3 = covariant_d_form(III, f, &f.second)?;
            let rhs: Rank3 = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    std::array::from_fn(|k| {
                        jsum((0..2).map(|m| jmul(sym(bi, k, m), &db3[m][i][j]))).scale(-0.5)
                    })
                })
            });
            r.eq_rank3(&tt, &rhs);
        }
        "ID15" => {
            let (t, tt) = t_tensors(f)?;
            let neg: Rank3 = tt.map(|a| a.map(|b| b.map(|c| -c)));
            r.eq_rank3(&t, &neg);
        }
        "ID16" => {
            let ei = f.inverse(III)?;
            let nabla = covariant_d_contravariant(III, f, ei)?;
            for j in 0..2 {
                for i in 0..2 {
                    for k in 0..2 {
                        let partial = sym(ei, i, k).derive(Dir::from_index(j))?;
                        // ∇ = partial + connection terms; the identity says they cancel
                        r.eq(&partial, &jsub(&partial, &nabla[j][i][k]));
                    }
                }
            }
        }
        "ID17" => {
            let ei = f.inverse(III)?;
            let rhs = contract(ei, |i, k| f.second.get(i, k).clone());
            r.eq(&two_h_over_k(f)?, &rhs);
        }
        "ID18" => {
            let ei = f.inverse(III)?;
            let q = two_h_over_k(f)?;
            let db3 = covariant_d_form(III, f, &f.second)?;
            for m in 0..2 {
                let rhs = contract(ei, |i, k| db3[m][i][k].clone());
                r.eq(&q.derive(Dir::from_index(m))?, &rhs);
            }
        }
        "ID19" => {
            let bi = f.inverse(II)?;
            let ei = f.inverse(III)?;
            let db = covariant_d_form(I, f, &f.second)?;
            let q = two_h_over_k(f)?;
            let w: [Jet2; 2] = std::array::from_fn(|k| {
                jsum((0..2).map(|m| jmul(sym(bi, k, m), &contract(ei, |i, j| db[m][i][j].clone()))))
            });
            let lhs = combine(&w, &f.x_d);
            let dq = [q.derive(Dir::U)?, q.derive(Dir::V)?];
            let wq: [Jet2; 2] =
                std::array::from_fn(|k| -jsum((0..2).map(|m| jmul(sym(bi, k, m), &dq[m]))));
            r.eq_vec(&lhs, &combine(&wq, &f.x_d));
            let grad = beltrami1_vec(II, f, &q, &f.x)?;
            r.eq_vec(&lhs, &grad.map(|c| -c));
        }
        "ID20" => {
            let lhs = laplacian_vec(I, f, &f.n)?;
            let grad = beltrami1_vec(I, f, &f.mean, &f.x)?.map(|c| c.scale(2.0));
            let coeff = jsub(&jmul(&f.mean, &f.mean).scale(2.0), &f.gauss).scale(2.0);
            r.eq_vec(&lhs, &geometry::add_vec(&grad, &scale_vec(&coeff, &f.n)));
        }
        "ID21" | "ID22" => {
            let lhs = laplacian_vec(II, f, &f.n)?;
            let two_h_n = scale_vec(&f.mean.scale(2.0), &f.n);
            let first = if id == "ID21" {
                let (t, _) = t_tensors(f)?;
                let bi = f.inverse(II)?;
                let w: [Jet2; 2] = std::array::from_fn(|k| {
                    jsum((0..2).map(|m| jmul(sym(bi, k, m), &jadd(&t[m][0][0], &t[m][1][1]))))
                });
                combine(&w, &f.n_d)
            } else {
                let coeff = f.gauss.recip_with(f.config.eps_div)?.scale(0.5);
                scale_vec(&coeff, &beltrami1_vec(I, f, &f.gauss, &f.x)?)
            };
            r.eq_vec(&lhs, &geometry::add_vec(&first, &two_h_n));
        }
        "ID23" => {
            let a = f.christoffel(III)?;
            for k in 0..2 {
                for i in 0..2 {
                    let n_ik = f.n_dd(i, k)?;
                    let lhs = sub_vec(
                        &n_ik,
                        &combine(&[a[i][k][0].clone(), a[i][k][1].clone()], &f.n_d),
                    );
                    let rhs = scale_vec(&-f.third.get(i, k), &f.n);
                    r.eq_vec(&lhs, &rhs);
                }
            }
        }
        "ID24" => {
            let lhs = laplacian_vec(III, f, &f.n)?;
            r.eq_vec(&lhs, &f.n.clone().map(|c| c.scale(2.0)));
        }
        "ID25" => {
            let s = ctx.sphere.expect("scope checked by caller");
            let lambda = 2.0 / s.radius;
            let rel: Vec3J = std::array::from_fn(|c| f.x[c].add_scalar(-s.center[c]));
            let lhs = geometry::dot(&rel, &f.n);
            r.eq(&lhs, &Jet2::constant(-2.0 / lambda, f.point, lhs.order()));
        }
        "ID26" | "ID27" => {
            let pair = match ctx.pair.as_ref() {
                Some(Ok(p)) => p,
                _ => unreachable!("partner failures are reported before evaluation"),
            };
            let (b, p) = (&pair.base, &pair.parallel);
            b.require(III)?;
            p.require(III)?;
            if id == "ID26" {
                let eps = b.config.eps_div;
                let lhs = jmul(&p.mean, &p.gauss.recip_with(eps)?);
                let rhs = jmul(&b.mean, &b.gauss.recip_with(eps)?).add_scalar(-pair.rho);
                r.eq(&lhs, &rhs);
            } else {
                for (x, y) in p.third.components.iter().zip(&b.third.components) {
                    r.eq(x, y);
                }
                for s in ctx.scalars {
                    let phi = s.jet(b);
                    r.eq(&laplacian(III, p, &phi)?, &laplacian(III, b, &phi)?);
                }
            }
        }
        other => unreachable!("unregistered check {other}"),
    }
    Ok(r.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    pub domain: [(f64, f64); 2],
}

impl GridSpec {
    pub fn over(surface: &SurfaceSpec, nu: usize, nv: usize) -> Self {
        GridSpec {
            nu,
            nv,
            domain: surface.domain(),
        }
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        crate::surfaces::grid_points(self.domain, self.nu, self.nv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityConfig {
    /// Frame jet order; residuals compare jets up to this order.
    pub order: usize,
    pub eps_id: f64,
    /// Subset of check ids; all when `None`.
    pub checks: Option<Vec<String>>,
    pub scalars: Vec<TestScalar>,
    pub geometry: GeometryConfig,
    /// Offset of the synthesized parallel partner for non-parallel surfaces;
    /// chosen from the largest principal curvature on the grid when `None`.
    pub parallel_offset: Option<f64>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            order: 5,
            eps_id: 1e-8,
            checks: None,
            scalars: TestScalar::ALL.to_vec(),
            geometry: GeometryConfig::default(),
            parallel_offset: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIP")]
    Skip,
    #[serde(rename = "N/A")]
    NotApplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
            Verdict::NotApplicable => "N/A",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub id: &'static str,
    pub description: &'static str,
    pub gate: Gate,
    pub max_residual: Option<f64>,
    pub argmax: Option<[f64; 2]>,
    pub verdict: Verdict,
    pub evaluated: usize,
    pub skipped: usize,
    /// First skip reason, if any sample was skipped.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub schema_version: u32,
    pub surface: String,
    pub grid: GridSpec,
    pub order: usize,
    pub eps_id: f64,
    pub test_scalars: Vec<TestScalar>,
    pub parallel_offset: Option<f64>,
    pub checks: Vec<CheckRow>,
    pub summary: Summary,
}

impl IdentityReport {
    pub fn row(&self, id: &str) -> Option<&CheckRow> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

type SampleOutcome = Vec<Result<f64, String>>;

fn selected(cfg: &IdentityConfig) -> Vec<&'static IdentityCheck> {
    REGISTRY
        .iter()
        .filter(|c| match &cfg.checks {
            None => true,
            Some(ids) => ids.iter().any(|i| i.eq_ignore_ascii_case(c.id)),
        })
        .collect()
}

/// Largest |κ| over the frames that could be computed.
fn max_principal_curvature(frames: &[Result<FrameData, GeometryError>]) -> Option<f64> {
    frames
        .iter()
        .filter_map(|f| f.as_ref().ok())
        .map(|f| {
            let (k1, k2) = f.principal_curvatures();
            k1.abs().max(k2.abs())
        })
        .fold(None, |acc: Option<f64>, k| {
            Some(acc.map_or(k, |a| a.max(k)))
        })
}

pub fn run_identities(
    surface: &SurfaceSpec,
    grid: &GridSpec,
    cfg: &IdentityConfig,
) -> IdentityReport {
    let checks = selected(cfg);
    let points = grid.points();
    let frames: Vec<Result<FrameData, GeometryError>> = points
        .par_iter()
        .map(|&pt| frame_with(surface, pt, cfg.order, &cfg.geometry))
        .collect();

    let needs_pair = checks.iter().any(|c| c.scope == Scope::ParallelPair);
    // (partner surface, base-is-partner?, rho)
    let partner: Option<Result<(SurfaceSpec, bool, f64), String>> = if !needs_pair {
        None
    } else if let Some(p) = surface.parallel() {
        Some(Ok(((*p.base).clone(), true, p.rho)))
    } else {
        let rho = cfg.parallel_offset.or_else(|| {
            max_principal_curvature(&frames)
                .filter(|k| *k > 0.0)
                .map(|k| 0.25 / k)
        });
        Some(match rho {
            None => Err("no curved sample to size a parallel offset".to_string()),
            Some(rho) => make_parallel(surface, rho)
                .map(|p| (p, false, rho))
                .map_err(|e| e.to_string()),
        })
    };
    let parallel_offset = match &partner {
        Some(Ok((_, _, rho))) => Some(*rho),
        _ => None,
    };
    let sphere = surface.expected().sphere;

    let outcomes: Vec<SampleOutcome> = points
        .par_iter()
        .zip(frames.par_iter())
        .map(|(&pt, frame)| {
            let frame = match frame {
                Ok(f) => f,
                Err(e) => return vec![Err(format!("{}: {e}", e.kind())); checks.len()],
            };
            let pair = partner.as_ref().map(|p| -> Result<ParallelPair, String> {
                let (other, other_is_base, rho) = p.as_ref().map_err(Clone::clone)?;
                let other_frame = frame_with(other, pt, cfg.order, &cfg.geometry)
                    .map_err(|e| format!("{}: {e}", e.kind()))?;
                Ok(if *other_is_base {
                    ParallelPair {
                        base: other_frame,
                        parallel: frame.clone(),
                        rho: *rho,
                    }
                } else {
                    ParallelPair {
                        base: frame.clone(),
                        parallel: other_frame,
                        rho: *rho,
                    }
                })
            });
            let ctx = SampleContext {
                frame,
                scalars: &cfg.scalars,
                sphere,
                pair,
            };
            checks
                .iter()
                .map(|c| {
                    if c.scope == Scope::Sphere && ctx.sphere.is_none() {
                        return Err("surface is not a sphere".into());
                    }
                    if c.scope == Scope::ParallelPair {
                        if let Some(Err(reason)) = &ctx.pair {
                            return Err(reason.clone());
                        }
                    }
                    c.gate
                        .admit(frame)
                        .and_then(|_| evaluate(c.id, &ctx))
                        .map_err(|e| format!("{}: {e}", e.kind()))
                })
                .collect()
        })
        .collect();

    let rows: Vec<CheckRow> = checks
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut row = CheckRow {
                id: c.id,
                description: c.description,
                gate: c.gate,
                max_residual: None,
                argmax: None,
                verdict: Verdict::Skip,
                evaluated: 0,
                skipped: 0,
                reason: None,
            };
            if c.scope == Scope::Sphere && sphere.is_none() {
                row.verdict = Verdict::NotApplicable;
                row.reason = Some("surface is not a sphere".into());
                return row;
            }
            for (pt, outcome) in points.iter().zip(&outcomes) {
                match &outcome[ci] {
                    Ok(res) => {
                        row.evaluated += 1;
                        let worse = match row.max_residual {
                            None => true,
                            Some(m) => *res > m || res.is_nan() && !m.is_nan(),
                        };
                        if worse {
                            row.max_residual = Some(*res);
                            row.argmax = Some(*pt);
                        }
                    }
                    Err(reason) => {
                        row.skipped += 1;
                        row.reason.get_or_insert_with(|| reason.clone());
                    }
                }
            }
            if let Some(m) = row.max_residual {
                row.verdict = if m < cfg.eps_id {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
            }
            row
        })
        .collect();

    let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
    let summary = Summary {
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        skipped: count(Verdict::Skip),
        not_applicable: count(Verdict::NotApplicable),
    };
    IdentityReport {
        schema_version: SCHEMA_VERSION,
        surface: surface.label().to_string(),
        grid: *grid,
        order: cfg.order,
        eps_id: cfg.eps_id,
        test_scalars: cfg.scalars.clone(),
        parallel_offset,
        checks: rows,
        summary,
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    surface: &'a str,
    id: &'a str,
    max_residual: Option<f64>,
    argmax_u: Option<f64>,
    argmax_v: Option<f64>,
    verdict: String,
}

/// One row per check and surface.
pub fn write_csv<W: std::io::Write>(reports: &[IdentityReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for c in &r.checks {
            w.serialize(CsvRow {
                surface: &r.surface,
                id: c.id,
                max_residual: c.max_residual,
                argmax_u: c.argmax.map(|p| p[0]),
                argmax_v: c.argmax.map(|p| p[1]),
                verdict: c.verdict.to_string(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
