//! Implicit-Euler marching for `du/dt - div A_theta(x, grad u) = f` with zero
//! Dirichlet data, plus the two-parameter continuation (`theta` descending,
//! truncation level `n` ascending) with Cauchy-trend bookkeeping.
//!
//! Each step solves the monotone system
//! `u - dt div_h A_theta(x, grad_h u) = u_prev + dt rhs`
//! by damped Newton on the mass-scaled nodal residual, with a relaxed
//! fixed-point fallback. The gradient/divergence pair is an exact adjoint, so
//! the discrete energy identity holds up to the nonlinear-solve tolerance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OrliczError, Result};
use crate::grid::{CellField, GridFunction, SpaceGrid, SpatialField, TimeGrid};
use crate::modular::modular;
use crate::mollify::{truncate_field, truncate_levels};
use crate::nfunction::x_lattice;
use crate::operators::{regularize_operator, RegularizedField, Regularizer, VectorField};
use crate::report::Table;

/// Smoothing used inside Newton Jacobians only; residuals use exact radii.
const JACOBIAN_EPS: f64 = 1e-12;
const MAX_NEWTON_ITERS: usize = 60;

/// The full problem data: operator triple, source, initial state and the
/// time grid. The space grid is carried by the fields.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub a: VectorField,
    pub reg: Regularizer,
    pub f: SpatialField,
    pub u0: SpatialField,
    pub time: TimeGrid,
}

impl ProblemSpec {
    pub fn new(a: VectorField, f: SpatialField, u0: SpatialField, time: TimeGrid) -> Result<Self> {
        if f.grid != u0.grid {
            return Err(OrliczError::Config(
                "source and initial fields live on different grids".into(),
            ));
        }
        if f.values.iter().chain(&u0.values).any(|v| !v.is_finite()) {
            return Err(OrliczError::Config("non-finite problem data".into()));
        }
        if time.steps == 0 || !(time.t_end > 0.0) {
            return Err(OrliczError::Config("empty time grid".into()));
        }
        let reg = Regularizer::default_for(&a.governing_m, &x_lattice(&f.grid.domain, 4));
        Ok(ProblemSpec { a, reg, f, u0, time })
    }

    pub fn grid(&self) -> SpaceGrid {
        self.f.grid
    }

    pub fn regularized(&self, theta: f64) -> Result<RegularizedField> {
        regularize_operator(&self.a, self.reg, theta, &x_lattice(&self.grid().domain, 4))
    }
}

/// Per-run record: Newton iteration counts and final residuals per time step.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub theta: f64,
    pub n: f64,
    pub newton_iters: Vec<usize>,
    pub step_residuals: Vec<f64>,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.step_residuals.iter().fold(0.0f64, |a, r| a.max(*r))
    }
}

/// Mass-scaled nodal residual of the implicit step; boundary rows are the
/// identity (values pinned to 0).
fn step_residual(
    a: &RegularizedField,
    u: &SpatialField,
    u_prev: &SpatialField,
    dt: f64,
    rhs: &SpatialField,
) -> Vec<f64> {
    let g = u.grid;
    let grad = u.gradient();
    let mut flux = CellField::zeros(g);
    for c in 0..g.num_cells() {
        flux.values[c] = a.eval(g.cell_center(c), grad.values[c]);
    }
    let adj = flux.grad_adjoint();
    let mut r = vec![0.0; g.num_nodes()];
    for i in 0..g.num_nodes() {
        r[i] = if g.is_boundary(i) {
            u.values[i]
        } else {
            u.values[i] - u_prev.values[i] - dt * rhs.values[i] + dt * adj[i] / g.node_mass(i)
        };
    }
    r
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Sparse row-major Jacobian with boundary identity rows.
struct SparseJac {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseJac {
    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            y[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
        y
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.rows[i]
                    .iter()
                    .find(|&&(j, _)| j == i)
                    .map(|&(_, v)| v)
                    .unwrap_or(1.0)
            })
            .collect()
    }
}

/// Assembles `J = I + (dt / mass) G^T V J_A G` with smoothed-radius operator
/// Jacobians.
fn assemble_jacobian(a: &RegularizedField, u: &SpatialField, dt: f64) -> SparseJac {
    let g = u.grid;
    let n = g.num_nodes();
    let grad = u.gradient();
    let vol = g.cell_volume();
    let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    if g.dim() == 1 {
        let dx = g.dx();
        for c in 0..g.cells[0] {
            let ja = a.jacobian(g.cell_center(c), grad.values[c], JACOBIAN_EPS);
            // 1-D gradient stencil is (u_{c+1} - u_c)/dx in the x slot only.
            let k = dt * vol * ja[0][0] / (dx * dx);
            let nodes = [c, c + 1];
            let w = [-1.0, 1.0];
            for (ai, &ni) in nodes.iter().enumerate() {
                for (bi, &nj) in nodes.iter().enumerate() {
                    *maps[ni].entry(nj).or_insert(0.0) += k * w[ai] * w[bi];
                }
            }
        }
    } else {
        let (dx, dy) = (g.dx(), g.dy());
        let nx = g.nodes_per_axis()[0];
        for cj in 0..g.cells[1] {
            for ci in 0..g.cells[0] {
                let c = cj * g.cells[0] + ci;
                let ja = a.jacobian(g.cell_center(c), grad.values[c], JACOBIAN_EPS);
                let n00 = cj * nx + ci;
                let nodes = [n00, n00 + 1, n00 + nx, n00 + nx + 1];
                let gx = [-1.0, 1.0, -1.0, 1.0].map(|w| w / (2.0 * dx));
                let gy = [-1.0, -1.0, 1.0, 1.0].map(|w| w / (2.0 * dy));
                for (ai, &ni) in nodes.iter().enumerate() {
                    for (bi, &nj) in nodes.iter().enumerate() {
                        let k = gx[ai] * (ja[0][0] * gx[bi] + ja[0][1] * gy[bi])
                            + gy[ai] * (ja[1][0] * gx[bi] + ja[1][1] * gy[bi]);
                        *maps[ni].entry(nj).or_insert(0.0) += dt * vol * k;
                    }
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        if g.is_boundary(i) {
            rows.push(vec![(i, 1.0)]);
        } else {
            let mass = g.node_mass(i);
            let mut row: Vec<(usize, f64)> = maps[i]
                .iter()
                .map(|(&j, &v)| (j, v / mass))
                .collect();
            match row.iter_mut().find(|(j, _)| *j == i) {
                Some(e) => e.1 += 1.0,
                None => row.push((i, 1.0)),
            }
            row.sort_by_key(|&(j, _)| j);
            rows.push(row);
        }
    }
    SparseJac { n, rows }
}

/// Direct tridiagonal solve (Thomas algorithm) for the 1-D stencil.
fn solve_tridiagonal(j: &SparseJac, b: &[f64]) -> Option<Vec<f64>> {
    let n = j.n;
    let (mut sub, mut diag, mut sup_) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, row) in j.rows.iter().enumerate() {
        for &(c, v) in row {
            if c + 1 == i {
                sub[i] = v;
            } else if c == i {
                diag[i] = v;
            } else if c == i + 1 {
                sup_[i] = v;
            } else {
                return None; // not tridiagonal
            }
        }
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return None;
    }
    c[0] = sup_[0] / diag[0];
    d[0] = b[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 {
            return None;
        }
        c[i] = sup_[i] / denom;
        d[i] = (b[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Some(x)
}

/// Jacobi-preconditioned BiCGStab for the 2-D stencil.
fn solve_bicgstab(a: &SparseJac, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n;
    let diag = a.diag();
    if diag.iter().any(|&d| d == 0.0) {
        return None;
    }
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(x, d)| x / d).collect() };
    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = b.to_vec();
    let r0 = r.clone();
    let bnorm = sup(b).max(1e-300);
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for _ in 0..(20 * n + 100) {
        let rho_new: f64 = r0.iter().zip(&r).map(|(a, b)| a * b).sum();
        if rho_new.abs() < 1e-300 {
            return None;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let ph = precond(&p);
        v = a.matvec(&ph);
        let denom: f64 = r0.iter().zip(&v).map(|(a, b)| a * b).sum();
        if denom.abs() < 1e-300 {
            return None;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        if sup(&s) <= 1e-14 * bnorm {
            for i in 0..n {
                x[i] += alpha * ph[i];
            }
            return Some(x);
        }
        let sh = precond(&s);
        let t = a.matvec(&sh);
        let tt: f64 = t.iter().map(|v| v * v).sum();
        if tt == 0.0 {
            return None;
        }
        omega = t.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / tt;
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
        }
        r = s.iter().zip(&t).map(|(s, t)| s - omega * t).collect();
        if sup(&r) <= 1e-14 * bnorm {
            return Some(x);
        }
    }
    None
}

fn solve_linear(j: &SparseJac, b: &[f64], dim: usize) -> Option<Vec<f64>> {
    if dim == 1 {
        solve_tridiagonal(j, b).or_else(|| solve_bicgstab(j, b))
    } else {
        solve_bicgstab(j, b)
    }
}

fn newton_step(
    a: &RegularizedField,
    guess: &SpatialField,
    u_prev: &SpatialField,
    dt: f64,
    rhs: &SpatialField,
    tol: f64,
    step: usize,
) -> Result<(SpatialField, usize, f64)> {
    let g = guess.grid;
    let mut u = guess.clone();
    for i in 0..g.num_nodes() {
        if g.is_boundary(i) {
            u.values[i] = 0.0;
        }
    }
    let mut r = step_residual(a, &u, u_prev, dt, rhs);
    let mut merit = sup(&r);
    for it in 0..MAX_NEWTON_ITERS {
        if merit <= tol {
            return Ok((u, it, merit));
        }
        let jac = assemble_jacobian(a, &u, dt);
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dir = solve_linear(&jac, &neg_r, g.dim());
        let mut accepted = false;
        if let Some(d) = dir {
            let mut lambda = 1.0;
            for _ in 0..30 {
                let mut trial = u.clone();
                for i in 0..g.num_nodes() {
                    trial.values[i] += lambda * d[i];
                }
                let rt = step_residual(a, &trial, u_prev, dt, rhs);
                let mt = sup(&rt);
                if mt <= (1.0 - 1e-4 * lambda) * merit {
                    u = trial;
                    r = rt;
                    merit = mt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            // Relaxed fixed-point fallback on the scaled residual.
            for i in 0..g.num_nodes() {
                u.values[i] -= 0.5 * r[i];
            }
            r = step_residual(a, &u, u_prev, dt, rhs);
            merit = sup(&r);
        }
    }
    if merit <= tol {
        return Ok((u, MAX_NEWTON_ITERS, merit));
    }
    Err(OrliczError::NoConvergence { step, residual: merit, iterations: MAX_NEWTON_ITERS })
}

/// One implicit Euler step: returns `u` with
/// `u - dt div_h A_theta(x, grad_h u) = u_prev + dt rhs` and residual
/// sup-norm at most `tol`.
pub fn solve_implicit_step(
    a_theta: &RegularizedField,
    u_prev: &SpatialField,
    dt: f64,
    rhs: &SpatialField,
    tol: f64,
) -> Result<SpatialField> {
    assert!(tol > 0.0, "tolerance must be positive");
    newton_step(a_theta, u_prev, u_prev, dt, rhs, tol, 0).map(|(u, _, _)| u)
}

/// Strict-monotonicity spot check: solves the same step from two random
/// initial guesses and returns the sup-norm of the disagreement (uniqueness
/// bounds it by a small multiple of `tol`).
pub fn uniqueness_spot_check(
    a_theta: &RegularizedField,
    u_prev: &SpatialField,
    dt: f64,
    rhs: &SpatialField,
    tol: f64,
    seed: u64,
) -> Result<f64> {
    let g = u_prev.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_guess = || {
        let mut f = SpatialField::zeros(g);
        for i in 0..g.num_nodes() {
            if !g.is_boundary(i) {
                f.values[i] = rng.gen_range(-0.5..0.5);
            }
        }
        f
    };
    let g1 = random_guess();
    let g2 = random_guess();
    let (u1, _, _) = newton_step(a_theta, &g1, u_prev, dt, rhs, tol, 0)?;
    let (u2, _, _) = newton_step(a_theta, &g2, u_prev, dt, rhs, tol, 0)?;
    Ok(u1
        .values
        .iter()
        .zip(&u2.values)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
}

/// Implicit-Euler march with truncated data `T_n(f)`, `T_n(u0)`. An optional
/// warm-start solution provides per-step initial Newton iterates (used by the
/// theta-continuation).
pub fn solve_parabolic_with_guess(
    spec: &ProblemSpec,
    theta: f64,
    n: f64,
    tol: f64,
    warm: Option<&GridFunction>,
) -> Result<(GridFunction, SolveReport)> {
    let a_theta = spec.regularized(theta)?;
    let g = spec.grid();
    let dt = spec.time.dt();
    let f_n = truncate_field(&spec.f, n);
    let mut u0_n = truncate_field(&spec.u0, n);
    for i in 0..g.num_nodes() {
        if g.is_boundary(i) {
            u0_n.values[i] = 0.0;
        }
    }
    let mut levels = Vec::with_capacity(spec.time.steps + 1);
    let mut iters = Vec::new();
    let mut residuals = Vec::new();
    levels.push(u0_n.clone());
    let mut u_prev = u0_n;
    for step in 1..=spec.time.steps {
        let guess = warm.map(|w| &w.levels[step]).unwrap_or(&u_prev);
        let (u, it, res) = newton_step(&a_theta, guess, &u_prev, dt, &f_n, tol, step)?;
        iters.push(it);
        residuals.push(res);
        levels.push(u.clone());
        u_prev = u;
    }
    let solution = GridFunction { space: g, time: spec.time, levels };
    let report = SolveReport { theta, n, newton_iters: iters, step_residuals: residuals };
    Ok((solution, report))
}

pub fn solve_parabolic(
    spec: &ProblemSpec,
    theta: f64,
    n: f64,
    tol: f64,
) -> Result<(GridFunction, SolveReport)> {
    solve_parabolic_with_guess(spec, theta, n, tol, None)
}

/// Continuation record: per-`n` consecutive L1 distances along the theta
/// list, truncation-level L1 distances along the `n` list, and the gradient
/// modular of each truncation against its analytic bound.
#[derive(Debug, Clone)]
pub struct StaircaseReport {
    /// One row per `n`: the L1 distances between consecutive theta solutions.
    pub theta_distances: Vec<(f64, Vec<f64>)>,
    /// One row per `k`: L1 distances of `T_k(u_n)` between consecutive `n`.
    pub truncation_distances: Vec<(f64, Vec<f64>)>,
    /// Columns `n, k, modular, bound, slack`.
    pub modular_bounds: Table,
    /// `w2(k) = k (|f|_{L1(Omega_T)} + |u0|_{L1}/2)` per `k`.
    pub w2: Vec<(f64, f64)>,
    /// Largest relative excess of the gradient modular over its bound.
    pub max_slack: f64,
}

pub fn staircase(
    spec: &ProblemSpec,
    theta_list: &[f64],
    n_list: &[f64],
    k_list: &[f64],
    tol: f64,
) -> Result<StaircaseReport> {
    if theta_list.is_empty() || n_list.is_empty() {
        return Err(OrliczError::BadParameters("empty continuation list".into()));
    }
    if !theta_list.windows(2).all(|w| w[1] < w[0]) {
        return Err(OrliczError::BadParameters(
            "theta list must be strictly decreasing".into(),
        ));
    }
    let dt = spec.time.dt();
    let w2_of = |k: f64| {
        k * (spec.time.t_end * spec.f.l1_norm() + 0.5 * spec.u0.l1_norm())
    };
    let mut theta_distances = Vec::new();
    let mut final_solutions: Vec<(f64, GridFunction)> = Vec::new();
    for &n in n_list {
        let mut prev: Option<GridFunction> = None;
        let mut dists = Vec::new();
        for &theta in theta_list {
            let (u, _) = solve_parabolic_with_guess(spec, theta, n, tol, prev.as_ref())?;
            if let Some(p) = &prev {
                dists.push(p.l1_distance(&u));
            }
            prev = Some(u);
        }
        theta_distances.push((n, dists));
        final_solutions.push((n, prev.expect("nonempty theta list")));
    }
    let mut truncation_distances = Vec::new();
    for &k in k_list {
        let mut dists = Vec::new();
        for w in final_solutions.windows(2) {
            let a = truncate_levels(&w[0].1, k);
            let b = truncate_levels(&w[1].1, k);
            dists.push(a.l1_distance(&b));
        }
        truncation_distances.push((k, dists));
    }
    let mut modular_bounds = Table::new("modular_bounds", &["n", "k", "modular", "bound", "slack"]);
    let mut w2 = Vec::new();
    let mut max_slack = f64::NEG_INFINITY;
    for &k in k_list {
        w2.push((k, w2_of(k)));
    }
    for (n, u) in &final_solutions {
        for &k in k_list {
            let tk = truncate_levels(u, k);
            let rho: f64 = tk.levels[1..]
                .iter()
                .map(|lv| dt * modular(&spec.a.governing_m, &lv.gradient()))
                .sum();
            let bound = (2.0 / spec.a.c_a) * w2_of(k);
            let slack = rho / bound.max(1e-300) - 1.0;
            max_slack = max_slack.max(slack);
            modular_bounds.push(vec![*n, k, rho, bound, slack]);
        }
    }
    Ok(StaircaseReport { theta_distances, truncation_distances, modular_bounds, w2, max_slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_model_operator, OperatorRule};
    use crate::nfunction::SpatialProfile;
    use proptest::prelude::*;
    use rand::Rng;

    fn heat_operator() -> VectorField {
        make_model_operator(1, OperatorRule::Linear { c: 1.0 }).unwrap()
    }

    fn regularized(a: &VectorField, theta: f64) -> RegularizedField {
        regularize_operator(
            a,
            Regularizer::default_for(&a.governing_m, &x_lattice(&crate::grid::Domain::line(1.0), 4)),
            theta,
            &x_lattice(&crate::grid::Domain::line(1.0), 4),
        )
        .unwrap()
    }

    #[test]
    fn zero_data_gives_exact_zero() {
        let g = SpaceGrid::line(1.0, 32);
        let a = regularized(&heat_operator(), 0.1);
        let u = solve_implicit_step(&a, &SpatialField::zeros(g), 0.01, &SpatialField::zeros(g), 1e-10)
            .unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_step_with_unit_source_is_flat_inside() {
        let g = SpaceGrid::line(1.0, 128);
        let a = regularized(&heat_operator(), 0.0);
        let dt = 1e-4;
        let rhs = SpatialField::sample(g, |_| 1.0);
        let u = solve_implicit_step(&a, &SpatialField::zeros(g), dt, &rhs, 1e-12).unwrap();
        // Away from the sqrt(dt)-wide boundary layer, u = dt up to O(dt^2).
        for i in 0..g.num_nodes() {
            let x = g.node_pos(i)[0];
            if (0.2..=0.8).contains(&x) {
                assert!((u.values[i] - dt).abs() <= 10.0 * dt * dt, "x = {x}: {}", u.values[i]);
            }
        }
    }

    #[test]
    fn heat_equation_matches_separated_solution() {
        let g = SpaceGrid::line(1.0, 64);
        let time = TimeGrid { t_end: 0.25, steps: 256 };
        let u0 = SpatialField::from_fn(g, |x| (std::f64::consts::PI * x[0]).sin());
        let spec = ProblemSpec::new(heat_operator(), SpatialField::zeros(g), u0, time).unwrap();
        let (u, rep) = solve_parabolic(&spec, 0.0, 10.0, 1e-10).unwrap();
        let pi = std::f64::consts::PI;
        let mut worst = 0.0f64;
        for (k, lv) in u.levels.iter().enumerate() {
            let t = k as f64 * time.dt();
            for i in 0..g.num_nodes() {
                let exact = (-pi * pi * t).exp() * (pi * g.node_pos(i)[0]).sin();
                let exact = if g.is_boundary(i) { 0.0 } else { exact };
                worst = worst.max((lv.values[i] - exact).abs());
            }
        }
        assert!(worst <= 5e-3, "L-inf error {worst}");
        assert!(rep.max_residual() <= 1e-10);
    }

    #[test]
    fn p3_steady_state_recovers_manufactured_profile() {
        // -d/dx(|u'|u') = 2 pi^3 |cos(pi x)| sin(pi x) has solution sin(pi x);
        // marching the parabolic flow to a long time reaches it within O(dx).
        let a = make_model_operator(1, OperatorRule::PowerP { p: 3.0 }).unwrap();
        let pi = std::f64::consts::PI;
        let err_at = |nx: usize| -> f64 {
            let g = SpaceGrid::line(1.0, nx);
            let f = SpatialField::sample(g, |x| {
                2.0 * pi.powi(3) * (pi * x[0]).cos().abs() * (pi * x[0]).sin()
            });
            let time = TimeGrid { t_end: 4.0, steps: 200 };
            let spec = ProblemSpec::new(a.clone(), f, SpatialField::zeros(g), time).unwrap();
            let (u, _) = solve_parabolic(&spec, 0.0, 1e3, 1e-9).unwrap();
            let last = u.levels.last().unwrap();
            let mut worst = 0.0f64;
            for i in 0..g.num_nodes() {
                let exact = if g.is_boundary(i) { 0.0 } else { (pi * g.node_pos(i)[0]).sin() };
                worst = worst.max((last.values[i] - exact).abs());
            }
            worst
        };
        let (e64, e128) = (err_at(64), err_at(128));
        assert!(e64 <= 0.08, "error at nx=64: {e64}");
        assert!(e128 <= 0.75 * e64, "no first-order trend: {e64} vs {e128}");
    }

    #[test]
    fn uniqueness_spot_check_for_degenerate_exponent() {
        let a = make_model_operator(1, OperatorRule::PowerP { p: 1.5 }).unwrap();
        let areg = regularized(&a, 0.05);
        let g = SpaceGrid::line(1.0, 48);
        let u_prev = SpatialField::from_fn(g, |x| (2.0 * std::f64::consts::PI * x[0]).sin());
        let rhs = SpatialField::sample(g, |x| if x[0] < 0.5 { 1.0 } else { -0.5 });
        let tol = 1e-10;
        let diff = uniqueness_spot_check(&areg, &u_prev, 0.02, &rhs, tol, 7).unwrap();
        assert!(diff <= 10.0 * tol, "solutions disagree by {diff}");
    }

    #[test]
    fn unreachable_tolerance_reports_no_convergence() {
        let g = SpaceGrid::line(1.0, 16);
        let a = regularized(&heat_operator(), 0.0);
        let rhs = SpatialField::sample(g, |_| 1.0);
        let err = newton_step(&a, &SpatialField::zeros(g), &SpatialField::zeros(g), 0.1, &rhs, 1e-300, 3)
            .unwrap_err();
        match err {
            OrliczError::NoConvergence { step, residual, iterations } => {
                assert_eq!(step, 3);
                assert_eq!(iterations, MAX_NEWTON_ITERS);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn heat_2d_matches_double_sine_mode() {
        let a = make_model_operator(2, OperatorRule::Linear { c: 1.0 }).unwrap();
        let g = SpaceGrid::rect(1.0, 1.0, 24, 24);
        let pi = std::f64::consts::PI;
        let u0 = SpatialField::from_fn(g, |x| (pi * x[0]).sin() * (pi * x[1]).sin());
        let time = TimeGrid { t_end: 0.05, steps: 50 };
        let spec = ProblemSpec::new(a, SpatialField::zeros(g), u0, time).unwrap();
        let (u, _) = solve_parabolic(&spec, 0.0, 10.0, 1e-10).unwrap();
        let last = u.levels.last().unwrap();
        let decay = (-2.0 * pi * pi * time.t_end).exp();
        let mut worst = 0.0f64;
        for i in 0..g.num_nodes() {
            let p = g.node_pos(i);
            let exact = if g.is_boundary(i) {
                0.0
            } else {
                decay * (pi * p[0]).sin() * (pi * p[1]).sin()
            };
            worst = worst.max((last.values[i] - exact).abs());
        }
        assert!(worst <= 2e-2, "L-inf error {worst}");
    }

    #[test]
    fn staircase_theta_distances_shrink_and_truncation_is_exact() {
        let g = SpaceGrid::line(1.0, 32);
        let time = TimeGrid { t_end: 0.1, steps: 32 };
        let u0 = SpatialField::from_fn(g, |x| (std::f64::consts::PI * x[0]).sin());
        let f = SpatialField::sample(g, |x| 0.5 + x[0]);
        let spec = ProblemSpec::new(heat_operator(), f, u0, time).unwrap();
        let theta_list = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];
        // Source is bounded by 1.5, so n >= 2 leaves the data untouched.
        let n_list = [2.0, 4.0, 8.0];
        let k_list = [0.5, 1.0];
        let rep = staircase(&spec, &theta_list, &n_list, &k_list, 1e-11).unwrap();
        for (_, dists) in &rep.theta_distances {
            for w in dists.windows(2) {
                assert!(w[1] < w[0], "theta distances not decreasing: {dists:?}");
            }
        }
        for (_, dists) in &rep.truncation_distances {
            assert!(dists.iter().all(|&d| d == 0.0), "{dists:?}");
        }
        assert!(rep.max_slack <= 0.0, "gradient modular exceeds bound: {}", rep.max_slack);
    }

    #[test]
    fn staircase_with_variable_exponent_respects_modular_bound() {
        let rule = OperatorRule::VariablePowerPx {
            p: SpatialProfile::Sine { base: 2.0, amp: 0.3, freq: 1.0 },
            alpha: SpatialProfile::Constant { value: 1.0 },
        };
        let a = make_model_operator(1, rule).unwrap();
        let g = SpaceGrid::line(1.0, 32);
        let time = TimeGrid { t_end: 0.1, steps: 20 };
        let u0 = SpatialField::from_fn(g, |x| x[0] * (1.0 - x[0]) * 4.0);
        let f = SpatialField::sample(g, |_| 1.0);
        let spec = ProblemSpec::new(a, f, u0, time).unwrap();
        let rep = staircase(&spec, &[0.5, 0.25], &[5.0], &[1.0, 2.0], 1e-10).unwrap();
        assert!(rep.max_slack <= 0.0, "slack {}", rep.max_slack);
    }

    #[test]
    fn rejects_bad_lists() {
        let g = SpaceGrid::line(1.0, 8);
        let time = TimeGrid { t_end: 0.1, steps: 4 };
        let spec =
            ProblemSpec::new(heat_operator(), SpatialField::zeros(g), SpatialField::zeros(g), time)
                .unwrap();
        assert!(staircase(&spec, &[], &[1.0], &[1.0], 1e-10).is_err());
        assert!(staircase(&spec, &[0.5, 0.5], &[1.0], &[1.0], 1e-10).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn step_with_no_source_contracts_sup_norm(seed in 0u64..1000) {
            let g = SpaceGrid::line(1.0, 24);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut u_prev = SpatialField::zeros(g);
            for i in 0..g.num_nodes() {
                if !g.is_boundary(i) {
                    u_prev.values[i] = rng.gen_range(-1.0..1.0);
                }
            }
            let a = regularized(&heat_operator(), 0.1);
            let u = solve_implicit_step(&a, &u_prev, 0.05, &SpatialField::zeros(g), 1e-11).unwrap();
            prop_assert!(u.sup_norm() <= u_prev.sup_norm() + 1e-9);
        }
    }
}
