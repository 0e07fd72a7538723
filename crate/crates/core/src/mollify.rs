//! Truncations, cutoff families, exponential-in-time regularization and the
//! scaled spatial mollifier.

use crate::error::{OrliczError, Result};
use crate::grid::{GridFunction, SpatialField};
use crate::modular::modular_scalar;
use crate::nfunction::NFunction;
use crate::report::{DiagnosticsReport, Table, Verdict};

/// Symmetric truncation: clamp to `[-k, k]`.
pub fn truncate(v: f64, k: f64) -> f64 {
    debug_assert!(k > 0.0);
    v.clamp(-k, k)
}

/// Asymmetric truncation: clamp to `[-k, l]`.
pub fn truncate_asym(v: f64, k: f64, l: f64) -> f64 {
    debug_assert!(k > 0.0 && l > 0.0);
    v.clamp(-k, l)
}

/// `G_l = T_{l+1} - T_l`: the unit band of `v` between levels `l` and `l+1`.
pub fn band(v: f64, l: f64) -> f64 {
    truncate(v, l + 1.0) - truncate(v, l)
}

pub fn truncate_field(f: &SpatialField, k: f64) -> SpatialField {
    SpatialField {
        grid: f.grid,
        values: f.values.iter().map(|&v| truncate(v, k)).collect(),
    }
}

pub fn truncate_levels(g: &GridFunction, k: f64) -> GridFunction {
    GridFunction {
        space: g.space,
        time: g.time,
        levels: g.levels.iter().map(|lv| truncate_field(lv, k)).collect(),
    }
}

/// `C^infinity` step from 0 to 1 over `[0, 1]`, exactly 0 below and 1 above.
fn smooth_step(u: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (f(u), f(1.0 - u));
    a / (a + b)
}

/// Cumulative distribution of the standard normalized bump kernel on
/// `[-1, 1]`, tabulated once per cutoff.
#[derive(Debug, Clone)]
struct BumpCdf {
    values: Vec<f64>,
}

impl BumpCdf {
    fn build(n: usize) -> Self {
        let kernel = |t: f64| {
            if t.abs() < 1.0 {
                (1.0 / (t * t - 1.0)).exp()
            } else {
                0.0
            }
        };
        let mut values = vec![0.0; n + 1];
        let h = 2.0 / n as f64;
        for i in 1..=n {
            let (a, b) = (-1.0 + (i - 1) as f64 * h, -1.0 + i as f64 * h);
            let mid = 0.5 * (a + b);
            // Simpson on the cell.
            values[i] = values[i - 1] + h / 6.0 * (kernel(a) + 4.0 * kernel(mid) + kernel(b));
        }
        let total = values[n];
        for v in &mut values {
            *v /= total;
        }
        BumpCdf { values }
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let n = self.values.len() - 1;
        let u = (t + 1.0) / 2.0 * n as f64;
        let i = (u.floor() as usize).min(n - 1);
        let frac = u - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// The cutoff families: the unit plateau `psi_l`, the mollified time window
/// `theta^{tau,r}`, the terminal fade `phi_r`, and the level band `G_l`.
#[derive(Debug, Clone)]
pub struct Cutoff {
    kind: CutoffKind,
}

#[derive(Debug, Clone)]
enum CutoffKind {
    /// 1 on `[-l, l]`, 0 outside `[-l-1, l+1]`, linear between.
    PsiL { l: f64 },
    /// Convolution of the indicator of `[0, tau)` with the bump kernel of
    /// radius `r`: support `[-r, tau + r)`, plateau 1 on `[r, tau - r]`.
    ThetaTauR { tau: f64, r: f64, cdf: BumpCdf },
    /// Smooth nonincreasing: 1 on `[0, t_end - 2r]`, 0 on `[t_end - r, t_end]`.
    PhiR { r: f64, t_end: f64 },
    /// `G_l(s) = T_{l+1}(s) - T_l(s)`.
    GL { l: f64 },
}

impl Cutoff {
    pub fn psi(l: f64) -> Self {
        Cutoff { kind: CutoffKind::PsiL { l } }
    }

    /// Builds `theta^{tau,r}`; requires `tau + r < t_end` so the support stays
    /// compactly inside `[0, t_end)`.
    pub fn theta(tau: f64, r: f64, t_end: f64) -> Result<Self> {
        if tau + r >= t_end || r <= 0.0 || tau <= 0.0 {
            return Err(OrliczError::BadSupport(tau + r, t_end));
        }
        Ok(Cutoff { kind: CutoffKind::ThetaTauR { tau, r, cdf: BumpCdf::build(1024) } })
    }

    pub fn phi(r: f64, t_end: f64) -> Result<Self> {
        if r <= 0.0 || 2.0 * r >= t_end {
            return Err(OrliczError::BadSupport(2.0 * r, t_end));
        }
        Ok(Cutoff { kind: CutoffKind::PhiR { r, t_end } })
    }

    pub fn band_of(l: f64) -> Self {
        Cutoff { kind: CutoffKind::GL { l } }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            CutoffKind::PsiL { l } => ((l + 1.0 - s.abs()).max(0.0)).min(1.0),
            CutoffKind::ThetaTauR { tau, r, cdf } => cdf.eval(s / r) - cdf.eval((s - tau) / r),
            CutoffKind::PhiR { r, t_end } => 1.0 - smooth_step((s - (t_end - 2.0 * r)) / r),
            CutoffKind::GL { l } => band(s, *l),
        }
    }
}

/// Exponential-in-time averaging of scalar samples on a uniform time grid.
/// `samples[k]` is the value on `((k-1) dt, k dt]` (with `samples[0]` the
/// value at `t = 0`); history for `t <= 0` is the constant `history`. The
/// recursion uses the exact per-step decay factor, so constant inputs are
/// reproduced exactly and positivity is preserved.
pub fn time_regularize_scalar(samples: &[f64], history: f64, mu: f64, dt: f64) -> Vec<f64> {
    let decay = (-mu * dt).exp();
    let mut out = Vec::with_capacity(samples.len());
    let mut cur = history;
    out.push(cur);
    for &g in &samples[1..] {
        cur = decay * cur + (1.0 - decay) * g;
        out.push(cur);
    }
    out
}

/// Space-time version of [`time_regularize_scalar`] applied nodewise to the
/// levels of a grid function, with history level `history`.
pub fn time_regularize(g: &GridFunction, history: &[f64], mu: f64) -> GridFunction {
    let dt = g.time.dt();
    let decay = (-mu * dt).exp();
    let mut levels = Vec::with_capacity(g.levels.len());
    let mut cur = SpatialField { grid: g.space, values: history.to_vec() };
    levels.push(cur.clone());
    for lv in &g.levels[1..] {
        for (c, &v) in cur.values.iter_mut().zip(&lv.values) {
            *c = decay * *c + (1.0 - decay) * v;
        }
        levels.push(cur.clone());
    }
    GridFunction { space: g.space, time: g.time, levels }
}

/// Residual of the averaging identity `d/dt g_mu + mu (g_mu - g) = 0` by
/// backward differences; sup norm over the grid.
pub fn time_regularize_ode_residual(samples: &[f64], regularized: &[f64], mu: f64, dt: f64) -> f64 {
    let mut worst = 0.0f64;
    for k in 1..samples.len() {
        let ddt = (regularized[k] - regularized[k - 1]) / dt;
        worst = worst.max((ddt + mu * (regularized[k] - samples[k])).abs());
    }
    worst
}

/// Scaled mollification `S_delta xi (x) = int rho_delta(x - y) xi(kappa(y - c) + c) dy`
/// with `kappa = 1 - delta / R`, `R` the inradius and `c` the center of the
/// box. The squeeze pulls the support strictly inside before smearing, so
/// interior-supported inputs stay supported in the domain.
pub fn mollify_space(xi: &SpatialField, delta: f64) -> Result<SpatialField> {
    let grid = xi.grid;
    let domain = grid.domain;
    let r_ball = domain.inradius();
    if delta >= r_ball / 4.0 || delta <= 0.0 {
        return Err(OrliczError::DeltaTooLarge(delta, r_ball / 4.0));
    }
    let kappa = 1.0 - delta / r_ball;
    let center = domain.center();
    let kernel = |d2: f64| {
        let t2 = d2 / (delta * delta);
        if t2 < 1.0 {
            (1.0 / (t2 - 1.0)).exp()
        } else {
            0.0
        }
    };
    // Bilinear sampling of the squeezed field.
    let squeezed = |y: [f64; 2]| -> f64 {
        let p = [
            center[0] + kappa * (y[0] - center[0]),
            center[1] + kappa * (y[1] - center[1]),
        ];
        sample_bilinear(xi, p)
    };
    let mut out = SpatialField::zeros(grid);
    for i in 0..grid.num_nodes() {
        let x = grid.node_pos(i);
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for j in 0..grid.num_nodes() {
            let y = grid.node_pos(j);
            let dx = x[0] - y[0];
            let dy = x[1] - y[1];
            let w = kernel(dx * dx + dy * dy) * grid.node_mass(j);
            if w > 0.0 {
                acc += w * squeezed(y);
                wsum += w;
            }
        }
        out.values[i] = if wsum > 0.0 { acc / wsum } else { 0.0 };
    }
    Ok(out)
}

fn sample_bilinear(f: &SpatialField, p: [f64; 2]) -> f64 {
    let g = f.grid;
    if g.dim() == 1 {
        let u = (p[0] / g.dx()).clamp(0.0, g.cells[0] as f64);
        let i = (u.floor() as usize).min(g.cells[0] - 1);
        let t = u - i as f64;
        f.values[i] * (1.0 - t) + f.values[i + 1] * t
    } else {
        let nx = g.nodes_per_axis()[0];
        let u = (p[0] / g.dx()).clamp(0.0, g.cells[0] as f64);
        let v = (p[1] / g.dy()).clamp(0.0, g.cells[1] as f64);
        let i = (u.floor() as usize).min(g.cells[0] - 1);
        let j = (v.floor() as usize).min(g.cells[1] - 1);
        let (s, t) = (u - i as f64, v - j as f64);
        let n00 = j * nx + i;
        f.values[n00] * (1.0 - s) * (1.0 - t)
            + f.values[n00 + 1] * s * (1.0 - t)
            + f.values[n00 + nx] * (1.0 - s) * t
            + f.values[n00 + nx + 1] * s * t
    }
}

/// Modular-ratio sweep for the mollifier: reports
/// `C_delta = modular(M, S_delta xi) / modular(M, xi)` over a delta list and
/// passes when the ratios stay within a factor 4 band (no blow-up as
/// `delta -> 0`).
pub fn mollifier_modular_sweep(
    m: &NFunction,
    xi: &SpatialField,
    delta_list: &[f64],
) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new("mollifier_modular_sweep");
    let base = modular_scalar(m, xi);
    let mut table = Table::new("ratio", &["delta", "C"]);
    let mut ratios = Vec::new();
    for &d in delta_list {
        let s = mollify_space(xi, d)?;
        let c = modular_scalar(m, &s) / base.max(1e-300);
        table.push(vec![d, c]);
        ratios.push(c);
    }
    let cmax = ratios.iter().cloned().fold(0.0f64, f64::max);
    let cmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.metric("C_max", cmax);
    rep.metric("C_min", cmin);
    rep.tables.push(table);
    rep.verdict = if cmax.is_finite() && cmax <= 4.0 * cmin.max(1e-12) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(rep)
}

/// Approximation trend: for a fixed smooth `phi`, the gradient modular
/// `modular(M, (grad S_delta T_l phi - grad phi) / lambda)` must decrease as
/// `delta -> 0` (then `l -> infinity`) for some dyadic `lambda`.
pub fn approximation_trend(
    m: &NFunction,
    phi: &SpatialField,
    delta_list: &[f64],
    l_list: &[f64],
) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new("approximation_trend");
    let grad_phi = phi.gradient();
    let mut table = Table::new("trend", &["l", "delta", "lambda", "rho"]);
    let mut best_first = f64::INFINITY;
    let mut best_last = f64::INFINITY;
    for &l in l_list {
        let tl = truncate_field(phi, l);
        for (di, &d) in delta_list.iter().enumerate() {
            let sm = mollify_space(&tl, d)?;
            let gs = sm.gradient();
            let mut best = f64::INFINITY;
            let mut best_lambda = 1.0;
            for k in 0..=6 {
                let lambda = 2f64.powi(k);
                let diff = crate::grid::CellField {
                    grid: gs.grid,
                    values: gs
                        .values
                        .iter()
                        .zip(&grad_phi.values)
                        .map(|(a, b)| [(a[0] - b[0]) / lambda, (a[1] - b[1]) / lambda])
                        .collect(),
                };
                let rho = crate::modular::modular(m, &diff);
                if rho < best {
                    best = rho;
                    best_lambda = lambda;
                }
            }
            table.push(vec![l, d, best_lambda, best]);
            if di == 0 {
                best_first = best_first.min(best);
            }
            if di + 1 == delta_list.len() {
                best_last = best_last.min(best);
            }
        }
    }
    rep.metric("rho_at_coarsest_delta", best_first);
    rep.metric("rho_at_finest_delta", best_last);
    rep.tables.push(table);
    rep.note("trend test: the best dyadic-lambda modular must decrease as delta shrinks");
    rep.verdict = if best_last <= best_first { Verdict::Pass } else { Verdict::Fail };
    Ok(rep)
}
