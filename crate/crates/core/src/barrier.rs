//! Barrier functions `Φⁱ = ∂_{zᵢ}P / P` of the two multivariate polynomials
//! behind the root bounds, above-roots certificates and numerical checks of
//! the barrier inequalities. Everything here is `f64`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hyperbolic::HyperbolicInstance;
use crate::mixedchar::{ag_operator_form, kls_operator_form, KlsInstance, SrInstance};
use crate::seeded;
use crate::unipoly::{real_roots, DEFAULT_TOL};

/// Slack on every inequality checked here.
pub const CHAIN_TOL: f64 = 1e-8;

/// The polynomial whose barrier is taken.
///
/// `Kls`: `P(x, z) = h(xe + Σ zⱼτⱼvⱼ)²`.
/// `Ag`: `Q(x, z) = h(xe + Σ zⱼvⱼ)·g_μ(x·1 + z)`.
#[derive(Clone, Copy, Debug)]
pub enum BarrierInstance<'a> {
    Kls(&'a KlsInstance<f64>),
    Ag(&'a SrInstance<f64>),
}

/// Evaluation point `(x, z)` with the shift parameter `t` it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierPoint {
    pub x: f64,
    pub z: Vec<f64>,
    pub t: f64,
}

fn taus(inst: &KlsInstance<f64>) -> Vec<f64> {
    inst.variances().iter().map(|v| v.max(0.0).sqrt()).collect()
}

impl BarrierPoint {
    /// `α = 2t = 4`, `z = −δ` with `δᵢ = t·τᵢ·tr_h[vᵢ]`.
    pub fn kls(inst: &KlsInstance<f64>) -> Self {
        let t = 2.0;
        let z = taus(inst).iter().zip(inst.traces()).map(|(tau, tr)| -t * tau * tr).collect();
        Self { x: 2.0 * t, z, t }
    }

    /// `α = 2t = √(4ε + 2ε²)` with `ε = ε₁ + ε₂`, `z = −t·1`.
    pub fn ag(inst: &SrInstance<f64>) -> Self {
        let eps = inst.eps1() + inst.eps2();
        let alpha = (4.0 * eps + 2.0 * eps * eps).sqrt();
        let t = alpha / 2.0;
        Self { x: alpha, z: vec![-t; inst.n()], t }
    }

    pub fn construction(inst: BarrierInstance<'_>) -> Self {
        match inst {
            BarrierInstance::Kls(k) => Self::kls(k),
            BarrierInstance::Ag(a) => Self::ag(a),
        }
    }
}

impl<'a> BarrierInstance<'a> {
    fn n(&self) -> usize {
        match self {
            Self::Kls(k) => k.n(),
            Self::Ag(a) => a.n(),
        }
    }

    fn h(&self) -> &HyperbolicInstance<f64> {
        match self {
            Self::Kls(k) => k.h(),
            Self::Ag(a) => a.h(),
        }
    }

    /// Scaled direction of `zᵢ` in the argument of `h`.
    fn direction(&self, i: usize) -> Vec<f64> {
        match self {
            Self::Kls(k) => {
                let tau = k.variances()[i].max(0.0).sqrt();
                k.vectors()[i].iter().map(|c| c * tau).collect()
            }
            Self::Ag(a) => a.vectors()[i].clone(),
        }
    }

    /// `w = xe + Σ zⱼ·(direction j)`.
    fn w(&self, x: f64, z: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = self.h().e().iter().map(|c| c * x).collect();
        for (j, zj) in z.iter().enumerate() {
            for (a, b) in w.iter_mut().zip(self.direction(j)) {
                *a += zj * b;
            }
        }
        w
    }

    fn check_point(&self, pt: &BarrierPoint) -> Result<()> {
        if pt.z.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: pt.z.len() });
        }
        Ok(())
    }

    /// `∂_{zᵢ} h(w)` and `∂_{zᵢ}∂_{zⱼ} h(w)`.
    fn dh(&self, w: &[f64], i: usize) -> Result<f64> {
        Ok(self.h().restrict_line(w, &self.direction(i))?.coeff(1))
    }

    fn d2h(&self, w: &[f64], i: usize, j: usize) -> Result<f64> {
        if i == j {
            // rank-one directions: h is affine along each of them
            return Ok(0.0);
        }
        let (a, b) = (self.direction(i), self.direction(j));
        self.h().iterated_directional_derivative(&[&a, &b], w)
    }

    /// `g_μ(y)`, `∂ᵢg_μ(y)` and `∂ᵢ∂ⱼg_μ(y)` for the selection family.
    fn g_terms(a: &SrInstance<f64>, y: &[f64], i: usize, j: usize) -> (f64, f64, f64) {
        let (mut g, mut gi, mut gij) = (0.0, 0.0, 0.0);
        for &(set, p) in a.mu().support() {
            let prod = |skip: u64| -> f64 {
                (0..a.n()).filter(|&k| set >> k & 1 == 1 && skip >> k & 1 == 0).map(|k| y[k]).product()
            };
            g += p * prod(0);
            if set >> i & 1 == 1 {
                gi += p * prod(1 << i);
                if i != j && set >> j & 1 == 1 {
                    gij += p * prod(1 << i | 1 << j);
                }
            }
        }
        (g, gi, gij)
    }

    /// `P(x, z)`.
    pub fn eval(&self, x: f64, z: &[f64]) -> Result<f64> {
        let hw = self.h().eval(&self.w(x, z))?;
        Ok(match self {
            Self::Kls(_) => hw * hw,
            Self::Ag(a) => {
                let y: Vec<f64> = z.iter().map(|zi| x + zi).collect();
                hw * Self::g_terms(a, &y, 0, 0).0
            }
        })
    }

    /// `Φⁱ` without the above-roots check.
    fn phi_raw(&self, i: usize, x: f64, z: &[f64]) -> Result<f64> {
        let w = self.w(x, z);
        let hw = self.h().eval(&w)?;
        let dh = self.dh(&w, i)?;
        Ok(match self {
            Self::Kls(_) => 2.0 * dh / hw,
            Self::Ag(a) => {
                let y: Vec<f64> = z.iter().map(|zi| x + zi).collect();
                let (g, gi, _) = Self::g_terms(a, &y, i, i);
                dh / hw + gi / g
            }
        })
    }

    /// Smallest hyperbolic eigenvalue of `w` (and, for the selection family,
    /// the smallest `x + zᵢ`).
    fn structural_margin(&self, pt: &BarrierPoint) -> Result<f64> {
        let w = self.w(pt.x, &pt.z);
        let lam = self.h().spectrum(&w, DEFAULT_TOL)?.eigenvalues.min();
        Ok(match self {
            Self::Kls(_) => lam,
            Self::Ag(_) => pt.z.iter().map(|zi| pt.x + zi).fold(lam, f64::min),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AboveVerdict {
    pub above: bool,
    /// Smallest eigenvalue of the argument of `h` (and of `x·1 + z` for the
    /// selection family); positive exactly when the point is above the roots.
    pub margin: f64,
    pub probes: usize,
    pub probe_failures: usize,
}

/// Structural test (`w` strictly inside the cone, and `x·1 + z > 0` for the
/// selection family) plus `probes` positivity probes `P(pt + r) > 0` with
/// `r ∈ [0, 4]^{n+1}`.
pub fn above_roots(inst: BarrierInstance<'_>, pt: &BarrierPoint, probes: usize, seed: u64) -> Result<AboveVerdict> {
    inst.check_point(pt)?;
    let margin = inst.structural_margin(pt)?;
    let mut rng = seeded::named(seed, "probes", 0);
    let mut failures = 0;
    for _ in 0..probes {
        let rx = rng.gen_range(0.0..4.0);
        let z: Vec<f64> = pt.z.iter().map(|zi| zi + rng.gen_range(0.0..4.0)).collect();
        if !(inst.eval(pt.x + rx, &z)? > 0.0) {
            failures += 1;
        }
    }
    Ok(AboveVerdict { above: margin > 0.0 && failures == 0, margin, probes, probe_failures: failures })
}

/// `Φⁱ(pt)`, computed from directional derivatives.
pub fn phi(inst: BarrierInstance<'_>, i: usize, pt: &BarrierPoint) -> Result<f64> {
    inst.check_point(pt)?;
    if i >= inst.n() {
        return Err(Error::IndexOutOfRange { index: i, nvars: inst.n() });
    }
    let margin = inst.structural_margin(pt)?;
    if margin <= 0.0 {
        return Err(Error::NotAboveRoots(format!("margin {margin:e} at x = {}", pt.x)));
    }
    inst.phi_raw(i, pt.x, &pt.z)
}

/// One line of a bound-chain report.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundStep {
    pub step: String,
    pub quantity: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl BoundStep {
    fn le(step: impl Into<String>, quantity: f64, bound: f64) -> Self {
        Self { step: step.into(), quantity, bound, margin: bound - quantity, pass: quantity <= bound + CHAIN_TOL }
    }

    fn lt(step: impl Into<String>, quantity: f64, bound: f64) -> Self {
        Self { step: step.into(), quantity, bound, margin: bound - quantity, pass: quantity < bound }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub steps: Vec<BoundStep>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.pass)
    }

    pub fn failures(&self) -> Vec<&BoundStep> {
        self.steps.iter().filter(|s| !s.pass).collect()
    }
}

/// Numerically checks every inequality of the barrier argument at the
/// construction point: the per-coordinate bound on `Φⁱ`, the two conditions
/// that let `(1 − ½∂²ᵢ)` keep the point above the roots, and the final root
/// bound of the univariate operator form.
///
/// The signed-sum instance must satisfy `‖Σ τᵢ² tr_h[vᵢ] vᵢ‖_h ≤ 1`
/// (see [`KlsInstance::normalized`]); otherwise `ChainViolated("precondition")`.
pub fn verify_bound_chain(inst: BarrierInstance<'_>) -> Result<BoundReport> {
    let pt = BarrierPoint::construction(inst);
    let mut steps = Vec::new();
    let above = above_roots(inst, &pt, 0, 0)?;
    match inst {
        BarrierInstance::Kls(k) => {
            if k.sigma2() > 1.0 + 1e-9 {
                return Err(Error::ChainViolated {
                    step: "precondition".into(),
                    detail: format!("‖Σ τᵢ² tr_h[vᵢ] vᵢ‖_h = {} exceeds 1", k.sigma2()),
                });
            }
            let (alpha, t) = (pt.x, pt.t);
            steps.push(BoundStep::lt("above-roots", -above.margin, 0.0));
            let tau = taus(k);
            for i in 0..k.n() {
                let s = tau[i] * k.traces()[i];
                if s <= 0.0 {
                    // τᵢ = 0 or vᵢ = 0: the operator on zᵢ is the identity
                    continue;
                }
                let p = phi(inst, i, &pt)?;
                steps.push(BoundStep::le(format!("phi[{i}]"), p, 2.0 * s / (alpha - t)));
                steps.push(BoundStep::lt(format!("cond1[{i}]"), p, 2f64.sqrt()));
                steps.push(BoundStep::le(format!("cond2[{i}]"), p / (t * s) + 0.5 * p * p, 1.0));
            }
            let op = kls_operator_form(k)?;
            steps.push(BoundStep::le("operator-root", real_roots(&op, DEFAULT_TOL)?.max(), 4.0));
        }
        BarrierInstance::Ag(a) => {
            let defect = a.family().sum_defect();
            if defect > 1e-9 {
                return Err(Error::ChainViolated {
                    step: "precondition".into(),
                    detail: format!("Σ vᵢ differs from e by {defect:e}"),
                });
            }
            let eps = a.eps1() + a.eps2();
            let (alpha, t) = (pt.x, pt.t);
            steps.push(BoundStep::lt("above-roots", -above.margin, 0.0));
            for i in 0..a.n() {
                let p = phi(inst, i, &pt)?;
                steps.push(BoundStep::le(format!("phi[{i}]"), p, eps / (alpha - t)));
                steps.push(BoundStep::lt(format!("cond1[{i}]"), p, 2f64.sqrt()));
                steps.push(BoundStep::le(format!("cond2[{i}]"), p / t + 0.5 * p * p, 1.0));
            }
            let op = ag_operator_form(a)?;
            steps.push(BoundStep::le("operator-root", real_roots(&op, DEFAULT_TOL)?.max(), alpha));
            let q = a.node_poly(&[])?;
            steps.push(BoundStep::le("mixed-root", real_roots(&q, DEFAULT_TOL)?.max(), 4.0 * eps + 2.0 * eps * eps));
        }
    }
    Ok(BoundReport { steps })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignVerdict {
    /// `(−1)ᵏ ∂ᵏΦⁱ/∂zⱼᵏ` for `k = 0, 1, 2` by central differences.
    pub signed: [f64; 3],
    pub tol: f64,
    pub pass: bool,
}

/// Central finite differences of `Φⁱ` along `zⱼ`; each signed derivative must
/// be at least `−(1e−6·|Φⁱ| + 1e−10)`. The point must stay above the roots
/// for steps of `3·h_step`.
pub fn phi_sign_checks(
    inst: BarrierInstance<'_>,
    i: usize,
    j: usize,
    pt: &BarrierPoint,
    h_step: f64,
) -> Result<SignVerdict> {
    let base = phi(inst, i, pt)?;
    if j >= inst.n() {
        return Err(Error::IndexOutOfRange { index: j, nvars: inst.n() });
    }
    let mut probe = pt.clone();
    probe.z[j] -= 3.0 * h_step;
    let margin = inst.structural_margin(&probe)?;
    if margin <= 0.0 {
        return Err(Error::InsufficientMargin(format!(
            "moving z[{j}] by {} leaves the region above the roots",
            3.0 * h_step
        )));
    }
    let at = |dz: f64| {
        let mut z = pt.z.clone();
        z[j] += dz;
        inst.phi_raw(i, pt.x, &z)
    };
    let (plus, minus) = (at(h_step)?, at(-h_step)?);
    let d1 = (plus - minus) / (2.0 * h_step);
    let d2 = (plus - 2.0 * base + minus) / (h_step * h_step);
    let signed = [base, -d1, d2];
    let tol = 1e-6 * base.abs() + 1e-10;
    Ok(SignVerdict { signed, tol, pass: signed.iter().all(|v| *v >= -tol) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCheck {
    /// `Φʲ_P(pt)`.
    pub before: f64,
    /// `Φʲ` of `(1 − ½∂²ᵢ)P` at `pt + δᵢ1ᵢ`.
    pub after: f64,
    /// Whether the second barrier condition holds for `i` at `pt`.
    pub applies: bool,
    pub pass: bool,
}

/// Compares `Φʲ` before and after applying `(1 − ½∂²_{zᵢ})` and moving
/// `zᵢ` up by `δᵢ` (`t·τᵢ·tr_h[vᵢ]` or `t`). Only meaningful when the second
/// barrier condition holds, which `applies` reports.
pub fn barrier_shift_check(inst: BarrierInstance<'_>, i: usize, j: usize, pt: &BarrierPoint) -> Result<ShiftCheck> {
    let before = phi(inst, j, pt)?;
    let phi_i = phi(inst, i, pt)?;
    let delta = match inst {
        BarrierInstance::Kls(k) => pt.t * k.variances()[i].max(0.0).sqrt() * k.traces()[i],
        BarrierInstance::Ag(_) => pt.t,
    };
    let applies = delta > 0.0 && phi_i / delta + 0.5 * phi_i * phi_i <= 1.0 + CHAIN_TOL;
    let mut z = pt.z.clone();
    z[i] += delta;
    let w = inst.w(pt.x, &z);
    let hw = inst.h().eval(&w)?;
    let (dhi, dhj, dhij) = (inst.dh(&w, i)?, inst.dh(&w, j)?, inst.d2h(&w, i, j)?);
    let after = match inst {
        BarrierInstance::Kls(_) => {
            // P̃ = h² − (∂ᵢh)²
            let p = hw * hw - dhi * dhi;
            let dp = 2.0 * hw * dhj - 2.0 * dhi * dhij;
            dp / p
        }
        BarrierInstance::Ag(a) => {
            // Q̃ = hg − ∂ᵢh·∂ᵢg
            let y: Vec<f64> = z.iter().map(|zi| pt.x + zi).collect();
            let (g, gi, gij) = BarrierInstance::g_terms(a, &y, i, j);
            let (_, gj, _) = BarrierInstance::g_terms(a, &y, j, j);
            let p = hw * g - dhi * gi;
            let dp = dhj * g + hw * gj - dhij * gi - dhi * gij;
            dp / p
        }
    };
    Ok(ShiftCheck { before, after, applies, pass: !applies || after <= before + CHAIN_TOL })
}
