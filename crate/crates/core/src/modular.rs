//! Modulars, Luxemburg norms and the modular-convergence / uniform-
//! integrability diagnostics over discrete fields.

use crate::error::{OrliczError, Result};
use crate::grid::{CellField, SpatialField};
use crate::nfunction::NFunction;
use crate::report::{DiagnosticsReport, Table, Verdict};

/// Modular of a cell-wise vector field: midpoint-rule quadrature of
/// `M(x, xi(x))` over the box.
pub fn modular(m: &NFunction, xi: &CellField) -> f64 {
    let vol = xi.grid.cell_volume();
    xi.values
        .iter()
        .enumerate()
        .map(|(c, &v)| vol * m.eval(xi.grid.cell_center(c), v))
        .sum()
}

/// Modular of a scalar nodal field, treating the value as the first vector
/// component (used for data fields and superlevel bookkeeping).
pub fn modular_scalar(m: &NFunction, f: &SpatialField) -> f64 {
    f.values
        .iter()
        .enumerate()
        .map(|(i, &v)| f.grid.node_mass(i) * m.eval(f.grid.node_pos(i), [v, 0.0]))
        .sum()
}

/// Space-time modular: `sum_t dt * modular(slice_t)`.
pub fn modular_time(m: &NFunction, slices: &[CellField], dt: f64) -> f64 {
    slices.iter().map(|s| dt * modular(m, s)).sum()
}

fn scaled(xi: &CellField, inv_lambda: f64) -> CellField {
    CellField {
        grid: xi.grid,
        values: xi.values.iter().map(|v| [v[0] * inv_lambda, v[1] * inv_lambda]).collect(),
    }
}

/// Luxemburg norm `inf { lambda > 0 : modular(xi / lambda) <= 1 }` by
/// bisection on `[1e-12, 1e12]` to relative tolerance 1e-10.
pub fn luxemburg_norm(m: &NFunction, xi: &CellField) -> Result<f64> {
    if xi.values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0) {
        return Ok(0.0);
    }
    let rho = |lambda: f64| modular(m, &scaled(xi, 1.0 / lambda));
    let (mut lo, mut hi) = (1e-12f64, 1e12f64);
    if rho(hi) > 1.0 {
        return Err(OrliczError::Unbounded(lo, hi));
    }
    if rho(lo) <= 1.0 {
        return Ok(lo);
    }
    // rho is nonincreasing in lambda: keep rho(lo) > 1 >= rho(hi).
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if rho(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Ordered family of cell fields on a shared grid with a shared modular
/// function; the object the modular-convergence test consumes.
#[derive(Debug, Clone)]
pub struct FieldSequence {
    pub fields: Vec<CellField>,
}

impl FieldSequence {
    pub fn new(fields: Vec<CellField>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(OrliczError::Config("empty field sequence".into()));
        };
        if fields.iter().any(|f| f.grid != first.grid) {
            return Err(OrliczError::Config("field sequence mixes grids".into()));
        }
        Ok(FieldSequence { fields })
    }
}

/// Modular convergence sweep: for dyadic `lambda` in `{1, 2, ..., 64}`,
/// tracks `modular(M, (xi_i - target)/lambda)` along the sequence and passes
/// at the smallest `lambda` whose tail either falls below 1e-8 absolute or
/// decays to below 1% of its initial value.
pub fn modular_convergence_test(
    m: &NFunction,
    seq: &FieldSequence,
    target: &CellField,
) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("modular_convergence_test");
    let diff = |f: &CellField, lambda: f64| -> CellField {
        CellField {
            grid: f.grid,
            values: f
                .values
                .iter()
                .zip(&target.values)
                .map(|(a, b)| [(a[0] - b[0]) / lambda, (a[1] - b[1]) / lambda])
                .collect(),
        }
    };
    let mut table = Table::new("lambda_sweep", &["lambda", "rho_first", "rho_last"]);
    let mut witness: Option<f64> = None;
    for k in 0..=6 {
        let lambda = 2f64.powi(k);
        let rhos: Vec<f64> = seq.fields.iter().map(|f| modular(m, &diff(f, lambda))).collect();
        let first = rhos[0];
        let last = *rhos.last().unwrap();
        table.push(vec![lambda, first, last]);
        if witness.is_none() && last <= (1e-2 * first).max(1e-8) {
            witness = Some(lambda);
        }
    }
    rep.tables.push(table);
    rep.metric("lambda_witness", witness.unwrap_or(f64::INFINITY));
    rep.note("tail criterion: rho_last <= max(1e-8, 1e-2 * rho_first) for some dyadic lambda");
    rep.verdict = if witness.is_some() { Verdict::Pass } else { Verdict::Fail };
    rep
}

/// Uniform-integrability index: for each `R`, the supremum over the family of
/// `int_{|f| >= R} |f|`. When the family has uniformly bounded modulars the
/// index must decay with `R`; the verdict encodes that trend.
pub fn uniform_integrability_index(fields: &[SpatialField], r_list: &[f64]) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("uniform_integrability_index");
    let mut table = Table::new("index", &["R", "sup_tail_mass"]);
    let mut indices = Vec::new();
    for &r in r_list {
        let mut sup = 0.0f64;
        for f in fields {
            let tail: f64 = f
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() >= r)
                .map(|(i, v)| f.grid.node_mass(i) * v.abs())
                .sum();
            sup = sup.max(tail);
        }
        table.push(vec![r, sup]);
        indices.push(sup);
    }
    rep.tables.push(table);
    let first = *indices.first().unwrap_or(&0.0);
    let last = *indices.last().unwrap_or(&0.0);
    rep.metric("index_at_smallest_R", first);
    rep.metric("index_at_largest_R", last);
    rep.note("trend test: pass when the index at the largest R is below max(1e-8, 0.5 * index at the smallest R)");
    rep.verdict = if last <= (0.5 * first).max(1e-8) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep
}
