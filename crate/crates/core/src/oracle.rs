//! Perturbation oracle: estimates condition numbers from evaluations of
//! the model alone, without any derivative formula.
//!
//! Every estimate is a central difference
//! `J = (X(ψ+Δ) − X(ψ−Δ)) / 2ε` with `Δ_k = ε·δ_k·|ψ_k|`, `|δ_k| ≤ 1`,
//! maximized over a set of directions `δ`. Both evaluations must pass the
//! rank guard: the perturbed numerical rank (measured against the base
//! tolerance) must equal the base rank and `‖M†‖₂‖ΔM‖₂ < 1`.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::framework::LsProblem;
use crate::linalg::{dagger, pinv, singular_values, vec_max_norm, Matrix, PinvBundle};
use crate::model::MatrixModel;

/// Largest parameter count for exhaustive vertex enumeration.
pub const MAX_VERTEX_PARAMS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// All `2^(p−1)` sign patterns (the other half are negations).
    SignVertices,
    /// `trials` directions drawn uniformly from the box `[−1, 1]^p`.
    MonteCarlo,
    /// Sign vertices at the two smallest ladder steps, combined by one
    /// Richardson step. Falls back to `trials` random vertices when
    /// `p > MAX_VERTEX_PARAMS`.
    Extrapolated,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::SignVertices => "sign_vertices",
            Mode::MonteCarlo => "monte_carlo",
            Mode::Extrapolated => "extrapolated",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbSpec {
    /// Relative perturbation size for the non-extrapolated modes.
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Decreasing steps; the last two are used by [`Mode::Extrapolated`].
    pub eps_ladder: Vec<f64>,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            trials: 1000,
            seed: 0,
            mode: Mode::SignVertices,
            eps_ladder: vec![1e-3, 1e-4, 1e-5],
        }
    }
}

impl PerturbSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument("epsilon must be finite and nonnegative"));
        }
        if self.mode == Mode::Extrapolated {
            if self.eps_ladder.len() < 2 {
                return Err(Error::InvalidArgument("extrapolation needs at least two ladder steps"));
            }
            let ok = self.eps_ladder.windows(2).all(|w| w[1] < w[0])
                && self.eps_ladder.iter().all(|e| *e > 0.0 && e.is_finite());
            if !ok {
                return Err(Error::InvalidArgument("ladder must be positive and decreasing"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleEstimate {
    pub mixed_lb: f64,
    pub componentwise_lb: f64,
    /// Directions with at least one evaluation failing the rank guard.
    pub rejected: usize,
    pub accepted: usize,
    /// `Δψ` (at the smallest step used) attaining `mixed_lb`.
    pub achiever: Option<Vec<f64>>,
    /// Every direction was rejected.
    pub inconclusive: bool,
}

/// Why a perturbed matrix lies outside the rank-preserving set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// Parameters left the model's domain.
    Domain,
    RankChange { base: usize, perturbed: usize },
    /// `‖M†‖₂‖ΔM‖₂ ≥ 1`
    TooLarge,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    Accepted(Vec<f64>),
    Rejected { delta: Vec<f64>, reason: Rejection },
}

/// Base point shared by every evaluation of one estimate.
struct Base<'a, M: ?Sized> {
    model: &'a M,
    psi: &'a [f64],
    bundle: PinvBundle,
    pinv_norm2: f64,
}

impl<'a, M: MatrixModel + ?Sized> Base<'a, M> {
    fn new(model: &'a M, psi: &'a [f64], rank_tol: Option<f64>) -> Result<Self> {
        model.check_domain(psi)?;
        let bundle = pinv(&model.eval(psi)?, rank_tol)?;
        let pinv_norm2 = bundle.pinv_norm2();
        Ok(Self {
            model,
            psi,
            bundle,
            pinv_norm2,
        })
    }

    /// Pseudoinverse at `ψ + Δ`, or why it is rejected.
    fn eval(&self, delta: &[f64]) -> core::result::Result<PinvBundle, Rejection> {
        let q: Vec<f64> = self.psi.iter().zip(delta).map(|(a, b)| a + b).collect();
        if self.model.check_domain(&q).is_err() {
            return Err(Rejection::Domain);
        }
        let m = self.model.eval(&q).map_err(|_| Rejection::Domain)?;
        let dm = m.sub(&self.bundle.m).map_err(|_| Rejection::Domain)?;
        if self.pinv_norm2 * dm.frobenius_norm() >= 1.0 {
            let s = singular_values(&dm).map_err(|_| Rejection::Domain)?;
            if self.pinv_norm2 * s.first().copied().unwrap_or(0.0) >= 1.0 {
                return Err(Rejection::TooLarge);
            }
        }
        let b = pinv(&m, Some(self.bundle.tol_used)).map_err(|_| Rejection::Domain)?;
        if b.rank != self.bundle.rank {
            return Err(Rejection::RankChange {
                base: self.bundle.rank,
                perturbed: b.rank,
            });
        }
        Ok(b)
    }

    fn delta(&self, dir: &[f64], eps: f64) -> Vec<f64> {
        dir.iter().zip(self.psi).map(|(d, p)| eps * d * p.abs()).collect()
    }

    /// `(X(ψ+Δ), X(ψ−Δ))` pinv pair, or `None` when either is rejected.
    fn pair(&self, dir: &[f64], eps: f64) -> Option<(Matrix, Matrix)> {
        let d = self.delta(dir, eps);
        let plus = self.eval(&d).ok()?;
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        let minus = self.eval(&neg).ok()?;
        Some((plus.pinv, minus.pinv))
    }
}

fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits mapped to [0, 1), then to [−1, 1).
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

fn random_sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.next_u64() >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Draws one box-uniform `Δψ` with `|Δψ_k| ≤ ε|ψ_k|` and applies the rank
/// guard to `ψ + Δψ`.
pub fn sample_perturbation<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    spec: &PerturbSpec,
    rank_tol: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<Sample> {
    spec.validate()?;
    let base = Base::new(model, psi, rank_tol)?;
    let dir: Vec<f64> = (0..psi.len()).map(|_| uniform_pm1(rng)).collect();
    let delta = base.delta(&dir, spec.epsilon);
    Ok(match base.eval(&delta) {
        Ok(_) => Sample::Accepted(delta),
        Err(reason) => Sample::Rejected { delta, reason },
    })
}

/// Direction source for one estimate.
enum Directions {
    Vertices { p: usize, next: u64, end: u64 },
    Random { p: usize, left: usize, box_uniform: bool, rng: ChaCha8Rng },
}

impl Directions {
    fn new(p: usize, spec: &PerturbSpec) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(spec.seed);
        Ok(match spec.mode {
            Mode::MonteCarlo => Directions::Random {
                p,
                left: spec.trials,
                box_uniform: true,
                rng,
            },
            Mode::SignVertices if p > MAX_VERTEX_PARAMS => {
                return Err(Error::InvalidArgument(
                    "sign-vertex enumeration is limited to 20 parameters",
                ))
            }
            Mode::Extrapolated if p > MAX_VERTEX_PARAMS => Directions::Random {
                p,
                left: spec.trials,
                box_uniform: false,
                rng,
            },
            _ => Directions::Vertices {
                p,
                next: 0,
                end: if p == 0 { 1 } else { 1u64 << (p - 1) },
            },
        })
    }
}

impl Iterator for Directions {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        match self {
            Directions::Vertices { p, next, end } => {
                if *next >= *end {
                    return None;
                }
                let bits = *next;
                *next += 1;
                // Pattern bit k flips parameter k+1; parameter 0 stays positive.
                Some(
                    (0..*p)
                        .map(|k| {
                            if k > 0 && (bits >> (k - 1)) & 1 == 1 {
                                -1.0
                            } else {
                                1.0
                            }
                        })
                        .collect(),
                )
            }
            Directions::Random {
                p,
                left,
                box_uniform,
                rng,
            } => {
                if *left == 0 {
                    return None;
                }
                *left -= 1;
                Some(
                    (0..*p)
                        .map(|_| {
                            if *box_uniform {
                                uniform_pm1(rng)
                            } else {
                                random_sign(rng)
                            }
                        })
                        .collect(),
                )
            }
        }
    }
}

/// Steps used per direction and the Richardson weights combining them.
fn steps(spec: &PerturbSpec) -> (Vec<f64>, Option<f64>) {
    match spec.mode {
        Mode::Extrapolated => {
            let n = spec.eps_ladder.len();
            let (e1, e2) = (spec.eps_ladder[n - 2], spec.eps_ladder[n - 1]);
            let rho = e1 / e2;
            (vec![e1, e2], Some(rho * rho))
        }
        _ => (vec![spec.epsilon], None),
    }
}

/// `(ρ²·G(ε₂) − G(ε₁)) / (ρ² − 1)`
fn richardson(g1: &[f64], g2: &[f64], rho2: f64) -> Vec<f64> {
    g1.iter()
        .zip(g2)
        .map(|(a, b)| (rho2 * b - a) / (rho2 - 1.0))
        .collect()
}

fn central(plus: &[f64], minus: &[f64], eps: f64) -> Vec<f64> {
    plus.iter()
        .zip(minus)
        .map(|(a, b)| (a - b) / (2.0 * eps))
        .collect()
}

struct Best {
    mixed: f64,
    cw: f64,
    achiever: Option<Vec<f64>>,
    accepted: usize,
    rejected: usize,
}

impl Best {
    fn new() -> Self {
        Self {
            mixed: 0.0,
            cw: 0.0,
            achiever: None,
            accepted: 0,
            rejected: 0,
        }
    }

    fn offer(&mut self, mixed: f64, cw: f64, delta: Vec<f64>) {
        self.accepted += 1;
        if mixed > self.mixed || self.achiever.is_none() {
            self.mixed = self.mixed.max(mixed);
            self.achiever = Some(delta);
        }
        self.cw = self.cw.max(cw);
    }

    fn finish(self) -> OracleEstimate {
        OracleEstimate {
            mixed_lb: self.mixed,
            componentwise_lb: self.cw,
            rejected: self.rejected,
            accepted: self.accepted,
            achiever: self.achiever,
            inconclusive: self.accepted == 0,
        }
    }
}

/// Lower estimates of the mixed and componentwise condition numbers of `M†`.
pub fn estimate_pinv_cn<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    spec: &PerturbSpec,
    rank_tol: Option<f64>,
) -> Result<OracleEstimate> {
    spec.validate()?;
    let base = Base::new(model, psi, rank_tol)?;
    let p0 = &base.bundle.pinv;
    let denom = p0.max_norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("M is zero, so M† vanishes"));
    }
    let (eps, rho2) = steps(spec);
    let mut best = Best::new();
    for dir in Directions::new(psi.len(), spec)? {
        let mut js = Vec::with_capacity(eps.len());
        for &e in &eps {
            if e == 0.0 {
                js.push(vec![0.0; p0.as_slice().len()]);
                continue;
            }
            match base.pair(&dir, e) {
                Some((xp, xm)) => js.push(central(xp.as_slice(), xm.as_slice(), e)),
                None => break,
            }
        }
        if js.len() < eps.len() {
            best.rejected += 1;
            continue;
        }
        let j = match rho2 {
            Some(r) => richardson(&js[0], &js[1], r),
            None => js.pop().unwrap_or_default(),
        };
        let mixed = vec_max_norm(&j) / denom;
        let cw = j
            .iter()
            .zip(p0.as_slice())
            .fold(0.0_f64, |a, (ji, pi)| a.max((ji * dagger(*pi)).abs()));
        best.offer(mixed, cw, base.delta(&dir, *eps.last().unwrap_or(&0.0)));
    }
    Ok(best.finish())
}

/// Lower estimates of the condition numbers of `x = M†b` under joint
/// perturbation of `ψ` and `b`. For each output entry the `b` direction is
/// chosen to align with the `ψ` contribution, so only `ψ` is searched.
pub fn estimate_ls_cn<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    b: &[f64],
    spec: &PerturbSpec,
    rank_tol: Option<f64>,
) -> Result<OracleEstimate> {
    spec.validate()?;
    let base = Base::new(model, psi, rank_tol)?;
    let prob = LsProblem::new(&base.bundle.m, b, Some(base.bundle.tol_used))?;
    let x = &prob.x;
    let denom = vec_max_norm(x);
    if denom == 0.0 {
        return Err(Error::Degenerate("x = M†b is zero"));
    }
    let babs: Vec<f64> = b.iter().map(|v| v.abs()).collect();
    let (eps, rho2) = steps(spec);
    let mut best = Best::new();
    for dir in Directions::new(psi.len(), spec)? {
        // Per step: (J, c) with J the ψ-derivative of x and c = |X̄||b|.
        let mut parts: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(eps.len());
        for &e in &eps {
            if e == 0.0 {
                let c = base.bundle.pinv.abs().matvec(&babs);
                parts.push((vec![0.0; x.len()], c));
                continue;
            }
            match base.pair(&dir, e) {
                Some((xp, xm)) => {
                    let j = central(&xp.matvec(b), &xm.matvec(b), e);
                    let mean = xp.add(&xm).map(|s| s.scale(0.5));
                    let Ok(mean) = mean else { break };
                    parts.push((j, mean.abs().matvec(&babs)));
                }
                None => break,
            }
        }
        if parts.len() < eps.len() {
            best.rejected += 1;
            continue;
        }
        let (j, c) = match rho2 {
            Some(r) => (
                richardson(&parts[0].0, &parts[1].0, r),
                richardson(&parts[0].1, &parts[1].1, r),
            ),
            None => parts.pop().unwrap_or_default(),
        };
        let v: Vec<f64> = j.iter().zip(&c).map(|(a, b)| a.abs() + b).collect();
        let mixed = vec_max_norm(&v) / denom;
        let cw = v
            .iter()
            .zip(x)
            .fold(0.0_f64, |a, (vi, xi)| a.max((vi * dagger(*xi)).abs()));
        best.offer(mixed, cw, base.delta(&dir, *eps.last().unwrap_or(&0.0)));
    }
    Ok(best.finish())
}

/// Finite-difference check of a model's derivative descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    /// Worst per-parameter error over checked parameters.
    pub max_rel_error: f64,
    /// `max|fd − an| / max(‖an‖max, 1e−12)` per parameter; `None` if skipped.
    pub per_param: Vec<Option<f64>>,
    /// Domain violations persisted after three step reductions.
    pub skipped_domain: Vec<usize>,
    /// Premultiplied descriptor at `ψ_k = 0`, which carries no derivative.
    pub skipped_zero: Vec<usize>,
}

/// Step `h = scale·max(1, |ψ_k|)`; the usual scale is `1e−6`.
pub fn fd_check<M: MatrixModel + ?Sized>(model: &M, psi: &[f64], scale: f64) -> Result<FdReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument("step scale must be positive"));
    }
    model.check_domain(psi)?;
    let (rows, cols) = model.shape();
    let derivs = model.derivatives(psi)?;
    let mut per_param = Vec::with_capacity(psi.len());
    let mut skipped_domain = Vec::new();
    let mut skipped_zero = Vec::new();
    let mut worst = 0.0_f64;
    let mut q = psi.to_vec();
    for (k, d) in derivs.iter().enumerate() {
        let mut an = d.to_dense(rows, cols);
        if d.premultiplied {
            if psi[k] == 0.0 {
                skipped_zero.push(k);
                per_param.push(None);
                continue;
            }
            an = an.scale(1.0 / psi[k]);
        }
        let mut h = scale * psi[k].abs().max(1.0);
        let mut fd = None;
        for _ in 0..4 {
            q[k] = psi[k] + h;
            let plus = model.check_domain(&q).and_then(|_| model.eval(&q));
            q[k] = psi[k] - h;
            let minus = model.check_domain(&q).and_then(|_| model.eval(&q));
            q[k] = psi[k];
            if let (Ok(a), Ok(b)) = (plus, minus) {
                // Use the steps actually represented in floating point.
                let width = (psi[k] + h) - (psi[k] - h);
                fd = Some(a.sub(&b)?.scale(1.0 / width));
                break;
            }
            h *= 0.1;
        }
        let Some(fd) = fd else {
            skipped_domain.push(k);
            per_param.push(None);
            continue;
        };
        let err = fd.sub(&an)?.max_norm() / an.max_norm().max(1e-12);
        worst = worst.max(err);
        per_param.push(Some(err));
    }
    Ok(FdReport {
        max_rel_error: worst,
        per_param,
        skipped_domain,
        skipped_zero,
    })
}
