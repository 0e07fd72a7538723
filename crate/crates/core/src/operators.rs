//! Monotone vector fields `A(x, xi)`, the model catalog, theta-regularization
//! and the coercivity/monotonicity verification sweeps.

use crate::error::{OrliczError, Result};
use crate::nfunction::{dot2, norm2, Catalog, NFunction, SpatialProfile};
use crate::report::{DiagnosticsReport, Table, Verdict};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Evaluation rule of a model operator. Most members have the radial form
/// `A(x, xi) = g(x, |xi|) xi`; the last three exist for negative tests.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum OperatorRule {
    /// `|xi|^{p-2} xi`.
    PowerP { p: f64 },
    /// `alpha(x) |xi|^{p(x)-2} xi`.
    VariablePowerPx { p: SpatialProfile, alpha: SpatialProfile },
    /// Component-wise `alpha_i(x) |xi_i|^{p_i(x)-2} xi_i`.
    AnisotropicPowers {
        p: [SpatialProfile; 2],
        alpha: [SpatialProfile; 2],
    },
    /// `|xi|^{p-2} xi + a(x) |xi|^{q-2} xi`.
    DoublePhase { p: f64, q: f64, a: SpatialProfile },
    /// `c * xi` (linear; `c = 1` is the heat equation).
    Linear { c: f64 },
    /// `0`: fails coercivity — negative-test entry.
    Zero,
    /// `-xi`: fails monotonicity — negative-test entry.
    NegIdentity,
    /// `(xi_2, -xi_1)`: monotone pairing 0 but no coercivity — negative test.
    Rotation,
    /// `(xi_2, -xi_1) + xi`: monotone but not a gradient.
    RotationPlusIdentity,
}

/// A vector field with its governing modular function and coercivity
/// constant; the `(A, M, c_A)` triple the well-posedness assumptions couple.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub rule: OperatorRule,
    pub governing_m: NFunction,
    pub c_a: f64,
    pub label: String,
}

/// Smoothed radius used inside Jacobians only; residual evaluations use the
/// exact radius.
fn smooth_norm(xi: [f64; 2], eps: f64) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1] + eps * eps).sqrt()
}

impl VectorField {
    pub fn eval(&self, x: [f64; 2], xi: [f64; 2]) -> [f64; 2] {
        let s = norm2(xi);
        match &self.rule {
            OperatorRule::PowerP { p } => {
                if s == 0.0 {
                    [0.0; 2]
                } else {
                    let g = s.powf(p - 2.0);
                    [g * xi[0], g * xi[1]]
                }
            }
            OperatorRule::VariablePowerPx { p, alpha } => {
                if s == 0.0 {
                    [0.0; 2]
                } else {
                    let g = alpha.eval(x) * s.powf(p.eval(x) - 2.0);
                    [g * xi[0], g * xi[1]]
                }
            }
            OperatorRule::AnisotropicPowers { p, alpha } => {
                let mut out = [0.0; 2];
                for i in 0..2 {
                    let a = xi[i].abs();
                    if a > 0.0 {
                        out[i] = alpha[i].eval(x) * a.powf(p[i].eval(x) - 2.0) * xi[i];
                    }
                }
                out
            }
            OperatorRule::DoublePhase { p, q, a } => {
                if s == 0.0 {
                    [0.0; 2]
                } else {
                    let g = s.powf(p - 2.0) + a.eval(x) * s.powf(q - 2.0);
                    [g * xi[0], g * xi[1]]
                }
            }
            OperatorRule::Linear { c } => [c * xi[0], c * xi[1]],
            OperatorRule::Zero => [0.0; 2],
            OperatorRule::NegIdentity => [-xi[0], -xi[1]],
            OperatorRule::Rotation => [xi[1], -xi[0]],
            OperatorRule::RotationPlusIdentity => [xi[1] + xi[0], -xi[0] + xi[1]],
        }
    }

    /// Jacobian `dA/dxi` with the radius smoothed by `eps` (solver use; pass
    /// `eps = 0` for the exact Jacobian away from the origin).
    pub fn jacobian(&self, x: [f64; 2], xi: [f64; 2], eps: f64) -> [[f64; 2]; 2] {
        // Radial forms g(x,s) xi have J = g I + (g'(s)/s) xi xi^T.
        let radial = |g: f64, dg: f64, s: f64| -> [[f64; 2]; 2] {
            let k = dg / s;
            [
                [g + k * xi[0] * xi[0], k * xi[0] * xi[1]],
                [k * xi[0] * xi[1], g + k * xi[1] * xi[1]],
            ]
        };
        let s = smooth_norm(xi, eps.max(1e-300));
        match &self.rule {
            OperatorRule::PowerP { p } => {
                let g = s.powf(p - 2.0);
                radial(g, (p - 2.0) * s.powf(p - 3.0), s)
            }
            OperatorRule::VariablePowerPx { p, alpha } => {
                let (px, ax) = (p.eval(x), alpha.eval(x));
                let g = ax * s.powf(px - 2.0);
                radial(g, ax * (px - 2.0) * s.powf(px - 3.0), s)
            }
            OperatorRule::AnisotropicPowers { p, alpha } => {
                let mut j = [[0.0; 2]; 2];
                for i in 0..2 {
                    let (pi, ai) = (p[i].eval(x), alpha[i].eval(x));
                    let a = (xi[i] * xi[i] + eps * eps).sqrt();
                    j[i][i] = ai * (pi - 1.0) * a.powf(pi - 2.0);
                }
                j
            }
            OperatorRule::DoublePhase { p, q, a } => {
                let ax = a.eval(x);
                let g = s.powf(p - 2.0) + ax * s.powf(q - 2.0);
                let dg = (p - 2.0) * s.powf(p - 3.0) + ax * (q - 2.0) * s.powf(q - 3.0);
                radial(g, dg, s)
            }
            OperatorRule::Linear { c } => [[*c, 0.0], [0.0, *c]],
            OperatorRule::Zero => [[0.0; 2]; 2],
            OperatorRule::NegIdentity => [[-1.0, 0.0], [0.0, -1.0]],
            OperatorRule::Rotation => [[0.0, 1.0], [-1.0, 0.0]],
            OperatorRule::RotationPlusIdentity => [[1.0, 1.0], [-1.0, 1.0]],
        }
    }
}

/// Builds a model operator together with its matched modular function.
pub fn make_model_operator(dim: usize, rule: OperatorRule) -> Result<VectorField> {
    let check_p = |p: f64| -> Result<()> {
        if p <= 1.0 || !p.is_finite() {
            Err(OrliczError::BadParameters(format!(
                "exponent p = {p} outside (1, infinity)"
            )))
        } else {
            Ok(())
        }
    };
    let check_profile = |f: &SpatialProfile, what: &str, lo: f64| -> Result<()> {
        // Conservative range probe along the first axis.
        for i in 0..=100 {
            let x = [i as f64 / 100.0, 0.0];
            let v = f.eval(x);
            if !v.is_finite() || v <= lo {
                return Err(OrliczError::BadParameters(format!(
                    "{what} = {v} at x1 = {} outside ({lo}, infinity)",
                    x[0]
                )));
            }
        }
        Ok(())
    };
    let (m, c_a, label) = match &rule {
        OperatorRule::PowerP { p } => {
            check_p(*p)?;
            (
                NFunction::new(dim, Catalog::PowerP { p: *p, scale: 1.0 / p }),
                1.0,
                format!("p-laplacian(p={p})"),
            )
        }
        OperatorRule::Linear { c } => {
            if *c <= 0.0 {
                return Err(OrliczError::BadParameters(format!(
                    "linear coefficient c = {c} must be positive"
                )));
            }
            (
                NFunction::new(dim, Catalog::PowerP { p: 2.0, scale: 0.5 }),
                (2.0 * c / (1.0 + c * c)).min(1.0),
                format!("linear(c={c})"),
            )
        }
        OperatorRule::VariablePowerPx { p, alpha } => {
            check_profile(p, "p(x)", 1.0)?;
            check_profile(alpha, "alpha(x)", 0.0)?;
            (
                NFunction::new(dim, Catalog::VariablePowerPx { p: p.clone(), scale_by_p: true }),
                0.5,
                "px-laplacian".to_string(),
            )
        }
        OperatorRule::AnisotropicPowers { p, alpha } => {
            for f in p {
                check_profile(f, "p_i(x)", 1.0)?;
            }
            for f in alpha {
                check_profile(f, "alpha_i(x)", 0.0)?;
            }
            (
                NFunction::new(
                    2,
                    Catalog::AnisotropicPowers { p: p.clone(), alpha: alpha.clone() },
                ),
                0.5,
                "anisotropic".to_string(),
            )
        }
        OperatorRule::DoublePhase { p, q, a } => {
            check_p(*p)?;
            check_p(*q)?;
            check_profile(a, "a(x)", -f64::MIN_POSITIVE)?;
            (
                NFunction::new(dim, Catalog::DoublePhase { p: *p, q: *q, a: a.clone() }),
                0.5,
                format!("double-phase(p={p},q={q})"),
            )
        }
        OperatorRule::Zero | OperatorRule::NegIdentity | OperatorRule::Rotation
        | OperatorRule::RotationPlusIdentity => (
            NFunction::new(dim, Catalog::PowerP { p: 2.0, scale: 0.5 }),
            1.0,
            format!("{rule:?}"),
        ),
    };
    Ok(VectorField { rule, governing_m: m, c_a, label })
}

/// The scalar profile `m_bar` of the regularizing gradient term, with closed
/// forms for its derivative and conjugate so the Fenchel-Young equality can
/// be tested exactly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    /// `s^q / q`.
    Power { q: f64 },
    /// `e^s - s - 1`.
    Exponential,
}

impl Regularizer {
    pub fn value(&self, s: f64) -> f64 {
        let s = s.abs();
        match self {
            Regularizer::Power { q } => s.powf(*q) / q,
            Regularizer::Exponential => s.exp() - s - 1.0,
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let s = s.abs();
        match self {
            Regularizer::Power { q } => s.powf(q - 1.0),
            Regularizer::Exponential => s.exp() - 1.0,
        }
    }

    /// Conjugate `m_bar*` in closed form.
    pub fn conjugate(&self, eta: f64) -> f64 {
        let eta = eta.abs();
        match self {
            Regularizer::Power { q } => {
                let qc = q / (q - 1.0);
                eta.powf(qc) / qc
            }
            Regularizer::Exponential => (1.0 + eta) * (1.0 + eta).ln() - eta,
        }
    }

    /// `grad m(xi) = xi * m_bar'(|xi|) / |xi|`, zero at the origin.
    pub fn grad(&self, xi: [f64; 2]) -> [f64; 2] {
        let s = norm2(xi);
        if s == 0.0 {
            return [0.0; 2];
        }
        let g = self.deriv(s) / s;
        [g * xi[0], g * xi[1]]
    }

    /// Hessian of `m(xi) = m_bar(|xi|)` with smoothed radius:
    /// `(m'/s) I + ((m'' s - m')/s^3) xi xi^T`.
    pub fn hessian(&self, xi: [f64; 2], eps: f64) -> [[f64; 2]; 2] {
        let s = smooth_norm(xi, eps.max(1e-300));
        let g = self.deriv(s) / s;
        let k = match self {
            Regularizer::Power { q } => (q - 2.0) * s.powf(q - 4.0),
            Regularizer::Exponential => (s.exp() * s - (s.exp() - 1.0)) / (s * s * s),
        };
        [
            [g + k * xi[0] * xi[0], k * xi[0] * xi[1]],
            [k * xi[0] * xi[1], g + k * xi[1] * xi[1]],
        ]
    }

    /// Default regularizer for a governing modular function: a power with
    /// exponent two above the fitted top growth, or the exponential profile
    /// for exponential catalog entries.
    pub fn default_for(m: &NFunction, x_samples: &[[f64; 2]]) -> Regularizer {
        if matches!(m.catalog, Catalog::Exponential) {
            return Regularizer::Exponential;
        }
        let grid = m.sample.radial_grid();
        let top = grid[grid.len() - 1];
        let hi = m.sup_profile(x_samples, top);
        let lo = m.sup_profile(x_samples, top / 10.0);
        let growth = if lo > 0.0 { (hi / lo).log10() } else { 2.0 };
        Regularizer::Power { q: growth.max(1.0).ceil() + 2.0 }
    }
}

/// `A_theta(x, xi) = A(x, xi) + theta * grad m(xi)`.
#[derive(Debug, Clone)]
pub struct RegularizedField {
    pub base: VectorField,
    pub reg: Regularizer,
    pub theta: f64,
}

impl RegularizedField {
    pub fn eval(&self, x: [f64; 2], xi: [f64; 2]) -> [f64; 2] {
        let a = self.base.eval(x, xi);
        let g = self.reg.grad(xi);
        [a[0] + self.theta * g[0], a[1] + self.theta * g[1]]
    }

    pub fn jacobian(&self, x: [f64; 2], xi: [f64; 2], eps: f64) -> [[f64; 2]; 2] {
        let ja = self.base.jacobian(x, xi, eps);
        let jm = self.reg.hessian(xi, eps);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = ja[i][j] + self.theta * jm[i][j];
            }
        }
        out
    }
}

/// Builds the regularized operator after verifying that the regularizer
/// grows essentially more rapidly than the governing modular function.
pub fn regularize_operator(
    a: &VectorField,
    reg: Regularizer,
    theta: f64,
    x_samples: &[[f64; 2]],
) -> Result<RegularizedField> {
    let sweep = crate::nfunction::grows_essentially_more_rapidly(
        |s| reg.value(s),
        &a.governing_m,
        x_samples,
        1e-2,
    );
    if sweep.verdict != Verdict::Pass {
        let tail = sweep.get_metric("ratio_at_top").unwrap_or(f64::INFINITY);
        return Err(OrliczError::GrowthMismatch(tail));
    }
    Ok(RegularizedField { base: a.clone(), reg, theta })
}

/// Coercivity sweep: reports the largest `c in (0, 1]` with
/// `A(x,xi) . xi >= c (M(x,xi) + M*(x, A(x,xi)))` over the sampled set, and
/// the margin at that constant.
pub fn check_coercivity_a2(a: &VectorField, x_samples: &[[f64; 2]]) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new("check_coercivity_a2");
    let m = &a.governing_m;
    let grid = m.sample.radial_grid();
    // Subsample radii for speed (conjugate evaluations dominate) and keep
    // |A(x, xi)| ~ M'(|xi|) inside the validated conjugate range by staying a
    // decade below the sampling cap.
    let cap = m.sample.xi_max / 10.0;
    let radii: Vec<f64> = grid.iter().copied().step_by(8).filter(|&s| s <= cap).collect();
    let dirs: Vec<(f64, f64)> = if m.dim == 1 {
        vec![(1.0, 0.0)]
    } else {
        (0..8)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 4.0;
                (t.cos(), t.sin())
            })
            .collect()
    };
    let mut c_fit = f64::INFINITY;
    let mut worst = (0.0, 0.0); // (radius, ratio)
    for &x in x_samples {
        for &s in &radii {
            for &d in &dirs {
                let xi = [s * d.0, s * d.1];
                let axi = a.eval(x, xi);
                let pairing = dot2(axi, xi);
                let mv = m.eval(x, xi);
                let conj = m.conjugate_value(x, axi).map_err(|e| match e {
                    OrliczError::GridTooCoarse { eta, xi_max } => {
                        OrliczError::ConjugateRangeExceeded(eta, xi_max)
                    }
                    other => other,
                })?;
                let den = mv + conj;
                if den > 1e-14 {
                    let ratio = pairing / den;
                    if ratio < c_fit {
                        c_fit = ratio;
                        worst = (s, ratio);
                    }
                }
            }
        }
    }
    let c_fit = c_fit.min(1.0);
    rep.metric("c_a_fitted", c_fit);
    rep.metric("worst_radius", worst.0);
    rep.metric("declared_c_a", a.c_a);
    rep.note("fitted c_A = min over samples of (A.xi)/(M + M* o A), clipped to (0, 1]");
    rep.verdict = if c_fit.is_finite() && c_fit > 1e-6 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(rep)
}

/// Monotonicity sweep over random `(x, xi, eta)` triples; pass when the
/// minimum pairing is above `-1e-12`.
pub fn check_monotonicity_a3(a: &VectorField, n_pairs: usize, seed: u64) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("check_monotonicity_a3");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_pairing = f64::INFINITY;
    for _ in 0..n_pairs {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let xi = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let eta = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let (axi, aeta) = (a.eval(x, xi), a.eval(x, eta));
        let p = (axi[0] - aeta[0]) * (xi[0] - eta[0]) + (axi[1] - aeta[1]) * (xi[1] - eta[1]);
        min_pairing = min_pairing.min(p);
    }
    rep.metric("min_pairing", min_pairing);
    rep.metric("pairs", n_pairs as f64);
    rep.tolerance("pairing_floor", -1e-12);
    rep.verdict = if min_pairing >= -1e-12 { Verdict::Pass } else { Verdict::Fail };
    rep
}

/// Conjugate-domination bound: `M*(x, A(x,eta)) <= (2/c) M(x, (2/c) eta)`
/// with the fitted coercivity constant, swept over bounded samples.
pub fn check_conjugate_domination(
    a: &VectorField,
    x_samples: &[[f64; 2]],
    c_a: f64,
    s_max: f64,
) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new("check_conjugate_domination");
    let m = &a.governing_m;
    let two_over_c = 2.0 / c_a;
    let mut worst_slack = f64::NEG_INFINITY;
    let mut table = Table::new("bound", &["s", "lhs", "rhs"]);
    let n = 24;
    for i in 1..=n {
        let s = s_max * i as f64 / n as f64;
        for &x in x_samples {
            let eta = [s, 0.0];
            let lhs = m.conjugate_value(x, a.eval(x, eta)).map_err(|e| match e {
                OrliczError::GridTooCoarse { eta, xi_max } => {
                    OrliczError::ConjugateRangeExceeded(eta, xi_max)
                }
                other => other,
            })?;
            let rhs = two_over_c * m.eval(x, [two_over_c * s, 0.0]);
            worst_slack = worst_slack.max(lhs - rhs);
            if x == x_samples[0] {
                table.push(vec![s, lhs, rhs]);
            }
        }
    }
    rep.metric("worst_slack", worst_slack);
    rep.tolerance("slack_tol", 1e-9);
    rep.tables.push(table);
    rep.verdict = if worst_slack <= 1e-9 { Verdict::Pass } else { Verdict::Fail };
    Ok(rep)
}

/// Fenchel-Young equality for the regularizer:
/// `grad m(xi) . xi = m_bar(|xi|) + m_bar*(|grad m(xi)|)` on a radius sweep.
pub fn check_fenchel_young_equality(reg: &Regularizer, radii: &[f64]) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("check_fenchel_young_equality");
    let mut worst = 0.0f64;
    for &s in radii {
        let xi = [s, 0.0];
        let g = reg.grad(xi);
        let lhs = dot2(g, xi);
        let rhs = reg.value(s) + reg.conjugate(norm2(g));
        let rel = (lhs - rhs).abs() / (1.0 + lhs.abs());
        worst = worst.max(rel);
    }
    rep.metric("worst_relative_gap", worst);
    rep.tolerance("rel_tol", 1e-6);
    rep.verdict = if worst <= 1e-6 { Verdict::Pass } else { Verdict::Fail };
    rep
}
