//! Convex envelopes of sampled functions: lower hull of the graph in 1-D,
//! a double discrete Legendre transform in 2-D.

use crate::error::{OrliczError, Result};
use crate::scalar::lower_convex_envelope;

/// Lower convex envelope of `(xs, ys)` returned on the same abscissae.
/// Exact on the samples: convex inputs are fixed points.
pub fn convex_envelope_1d(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    lower_convex_envelope(xs, ys)
}

/// Function sampled on a tensor grid; `values[j * xs.len() + i] = f(xs[i], ys[j])`.
#[derive(Debug, Clone)]
pub struct Sampled2d {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

/// Convex envelope on a 2-D tensor grid via the second discrete conjugate.
///
/// The dual set contains the central-difference gradient at every knot, so
/// `f** <= f` holds pointwise by construction and smooth convex inputs are
/// reproduced up to the finite-difference subgradient error. Dimensions above
/// 2 are rejected.
pub fn convex_envelope_2d(f: &Sampled2d) -> Result<Vec<f64>> {
    let (nx, ny) = (f.xs.len(), f.ys.len());
    if nx * ny != f.values.len() {
        return Err(OrliczError::Config("tensor sample shape mismatch".into()));
    }
    // Dual slopes: numeric gradients at all knots.
    let mut duals: Vec<[f64; 2]> = Vec::with_capacity(nx * ny);
    let at = |i: usize, j: usize| f.values[j * nx + i];
    for j in 0..ny {
        for i in 0..nx {
            let gx = if i == 0 {
                (at(1, j) - at(0, j)) / (f.xs[1] - f.xs[0])
            } else if i == nx - 1 {
                (at(i, j) - at(i - 1, j)) / (f.xs[i] - f.xs[i - 1])
            } else {
                (at(i + 1, j) - at(i - 1, j)) / (f.xs[i + 1] - f.xs[i - 1])
            };
            let gy = if j == 0 {
                (at(i, 1) - at(i, 0)) / (f.ys[1] - f.ys[0])
            } else if j == ny - 1 {
                (at(i, j) - at(i, j - 1)) / (f.ys[j] - f.ys[j - 1])
            } else {
                (at(i, j + 1) - at(i, j - 1)) / (f.ys[j + 1] - f.ys[j - 1])
            };
            duals.push([gx, gy]);
        }
    }
    // First conjugate on the dual set.
    let mut conj = vec![f64::NEG_INFINITY; duals.len()];
    for (k, d) in duals.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for j in 0..ny {
            for i in 0..nx {
                let v = f.xs[i] * d[0] + f.ys[j] * d[1] - at(i, j);
                if v > best {
                    best = v;
                }
            }
        }
        conj[k] = best;
    }
    // Second conjugate back on the primal knots.
    let mut out = vec![f64::NEG_INFINITY; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let mut best = f64::NEG_INFINITY;
            for (k, d) in duals.iter().enumerate() {
                let v = f.xs[i] * d[0] + f.ys[j] * d[1] - conj[k];
                if v > best {
                    best = v;
                }
            }
            out[j * nx + i] = best;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_1d_convex_fixed_point() {
        let xs: Vec<f64> = (0..200).map(|i| -2.0 + i as f64 * 0.02).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_eq!(convex_envelope_1d(&xs, &ys), ys);
    }

    #[test]
    fn envelope_1d_idempotent() {
        let xs: Vec<f64> = (0..=300).map(|i| i as f64 * 0.02).collect();
        let ys: Vec<f64> = xs.iter().map(|&s| s * s * (2.0 + (5.0 * s).sin())).collect();
        let once = convex_envelope_1d(&xs, &ys);
        let twice = convex_envelope_1d(&xs, &once);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        for (e, y) in once.iter().zip(&ys) {
            assert!(*e <= y + 1e-12);
        }
    }

    #[test]
    fn envelope_2d_minorizes_and_is_convex() {
        let xs: Vec<f64> = (0..33).map(|i| -1.6 + 0.1 * i as f64).collect();
        let ys = xs.clone();
        let mut vals = Vec::new();
        for &y in &ys {
            for &x in &xs {
                // Nonconvex double well in x plus convex in y.
                vals.push((x * x - 1.0).powi(2) + y * y);
            }
        }
        let f = Sampled2d { xs: xs.clone(), ys: ys.clone(), values: vals.clone() };
        let env = convex_envelope_2d(&f).unwrap();
        for (e, v) in env.iter().zip(&vals) {
            assert!(*e <= v + 1e-12);
        }
        // Midpoint convexity along grid lines.
        let nx = xs.len();
        for j in 0..ys.len() {
            for i in 1..nx - 1 {
                let (a, b, c) = (env[j * nx + i - 1], env[j * nx + i], env[j * nx + i + 1]);
                assert!(b <= 0.5 * (a + c) + 1e-10);
            }
        }
        // The double well floor is bridged near x = 0.
        let mid = env[(ys.len() / 2) * nx + nx / 2];
        assert!(mid < 0.6, "envelope at origin = {mid}");
    }
}
