//! Dense BFGS minimiser with a backtracking Armijo line search.
//!
//! The MLDS problem has six free parameters, so the inverse Hessian is
//! kept as a full matrix.

pub(crate) struct Options {
    pub max_iterations: usize,
    pub value_tolerance: f64,
    pub grad_tolerance: f64,
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
/// Largest move of any coordinate in one iteration. Keeps early steps, taken
/// before the curvature estimate is meaningful, from leaping onto flat
/// asymptotes such as `ln σ → ∞`.
const MAX_COORD_STEP: f64 = 1.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn identity(n: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { scale } else { 0.0 }).collect())
        .collect()
}

/// Minimises `objective`, which returns the value and gradient at a point.
/// Non-finite values are treated as infeasible and rejected by the line
/// search.
pub(crate) fn minimize<F>(mut objective: F, x0: Vec<f64>, opts: &Options) -> Outcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = objective(&x);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Outcome {
            x,
            value: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    }
    let mut h = identity(n, 1.0);
    let mut scaled = false;

    for iter in 1..=opts.max_iterations {
        if inf_norm(&g) < opts.grad_tolerance {
            return Outcome {
                x,
                value: f,
                iterations: iter - 1,
                converged: true,
            };
        }

        let mut p: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            // lost positive definiteness; fall back to steepest descent
            h = identity(n, 1.0);
            scaled = false;
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let longest = inf_norm(&p);
        if longest > MAX_COORD_STEP {
            let shrink = MAX_COORD_STEP / longest;
            p.iter_mut().for_each(|v| *v *= shrink);
            slope *= shrink;
        }

        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + step * pi).collect();
            let (f_new, g_new) = objective(&trial);
            if f_new.is_finite()
                && g_new.iter().all(|v| v.is_finite())
                && f_new <= f + ARMIJO_C1 * step * slope
            {
                break Some((trial, f_new, g_new));
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };

        let Some((x_new, f_new, g_new)) = accepted else {
            // no further decrease is representable
            let converged = inf_norm(&g) < 1e-4 * (1.0 + f.abs());
            return Outcome {
                x,
                value: f,
                iterations: iter,
                converged,
            };
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let change = (f - f_new).abs();
        x = x_new;
        f = f_new;
        g = g_new;

        if change < opts.value_tolerance {
            return Outcome {
                x,
                value: f,
                iterations: iter,
                converged: true,
            };
        }

        let ys = dot(&y, &s);
        if ys > 1e-12 {
            if !scaled {
                h = identity(n, ys / dot(&y, &y));
                scaled = true;
            }
            let rho = 1.0 / ys;
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            for r in 0..n {
                for c in 0..n {
                    h[r][c] += (1.0 + rho * yhy) * rho * s[r] * s[c]
                        - rho * (hy[r] * s[c] + s[r] * hy[c]);
                }
            }
        }
    }

    Outcome {
        x,
        value: f,
        iterations: opts.max_iterations,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x| {
                let (a, b) = (x[0], x[1]);
                let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ];
                (f, g)
            },
            vec![-1.2, 1.0],
            &Options {
                max_iterations: 500,
                value_tolerance: 1e-14,
                grad_tolerance: 1e-10,
            },
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_in_few_steps() {
        let out = minimize(
            |x| {
                let f = 3.0 * x[0] * x[0] + 0.5 * x[1] * x[1] + x[0] * x[1];
                (f, vec![6.0 * x[0] + x[1], x[1] + x[0]])
            },
            vec![4.0, -3.0],
            &Options {
                max_iterations: 100,
                value_tolerance: 0.0,
                grad_tolerance: 1e-10,
            },
        );
        assert!(out.converged);
        assert!(out.iterations < 20);
        assert!(out.value.abs() < 1e-15);
    }

    #[test]
    fn infeasible_start_reports_divergence() {
        let out = minimize(
            |_| (f64::NAN, vec![0.0]),
            vec![0.0],
            &Options {
                max_iterations: 10,
                value_tolerance: 1e-8,
                grad_tolerance: 1e-8,
            },
        );
        assert!(!out.converged);
        assert!(out.value.is_infinite());
    }
}
