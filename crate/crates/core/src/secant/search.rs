//! Derivative-free minimisation of the secant residual over `zeta`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{secant_residual, SecantConfiguration};
use crate::error::{Error, Result};
use crate::kummer::SecondOrderBasis;
use crate::point::ComplexPoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_iterations: usize,
    /// Target residual; also the simplex-collapse threshold.
    pub tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    pub eps: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_iterations: 500,
            tolerance: 1e-9,
            initial_step: 1e-2,
            eps: crate::theta::DEFAULT_EPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

/// Nelder–Mead with standard coefficients (1, 2, 1/2, 1/2).
///
/// Stops when the best value is at most `target`, or when the simplex has
/// collapsed (value spread and diameter both below `collapse`); the simplex is
/// rebuilt around the best vertex once on collapse before giving up.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iterations: usize,
    target: f64,
    collapse: f64,
) -> Result<SimplexOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let build = |centre: &[f64], step: f64, f: &mut F| -> Result<Vec<(Vec<f64>, f64)>> {
        let mut s = vec![(centre.to_vec(), f(centre)?)];
        for i in 0..n {
            let mut x = centre.to_vec();
            x[i] += step;
            let v = f(&x)?;
            s.push((x, v));
        }
        Ok(s)
    };
    let mut trace = Vec::new();
    if max_iterations == 0 {
        let value = f(x0)?;
        return Ok(SimplexOutcome {
            x: x0.to_vec(),
            value,
            iterations: 0,
            converged: value <= target,
            trace,
        });
    }
    let mut simplex = build(x0, step, &mut f)?;
    let mut restarted = false;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= target {
            converged = true;
            break;
        }
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| dist(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if spread <= collapse * simplex[0].1.max(collapse) && diameter <= collapse.sqrt() * step {
            if restarted {
                converged = true;
                break;
            }
            restarted = true;
            let best = simplex[0].0.clone();
            simplex = build(&best, step * 1e-2, &mut f)?;
            continue;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|k| centroid[k] + t * (simplex[n].0[k] - centroid[k]))
                .collect()
        };
        let xr = toward(-1.0);
        let fr = f(&xr)?;
        if fr < simplex[0].1 {
            let xe = toward(-2.0);
            let fe = f(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = toward(-0.5);
                let fc = f(&xc)?;
                (xc, fc)
            } else {
                let xc = toward(0.5);
                let fc = f(&xc)?;
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..n).map(|k| best[k] + 0.5 * (v.0[k] - best[k])).collect();
                    let fx = f(&x)?;
                    *v = (x, fx);
                }
            }
        }
        let best = simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        trace.push(best);
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !converged && simplex[0].1 <= target {
        converged = true;
    }
    let (x, value) = simplex.swap_remove(0);
    Ok(SimplexOutcome {
        x,
        value,
        iterations,
        converged,
        trace,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn zeta_from(x: &[f64]) -> ComplexPoint {
    let g = x.len() / 2;
    ComplexPoint::new((0..g).map(|i| Complex64::new(x[i], x[g + i])).collect()).expect("finite")
}

/// Minimises `secant_residual` over the `2g` real coordinates of `zeta`,
/// starting from `zeta_seed`. A local minimum above the tolerance is still a
/// successful search; running out of iterations is not.
pub fn secant_search(
    basis: &SecondOrderBasis,
    m: usize,
    points: &[ComplexPoint],
    zeta_seed: &ComplexPoint,
    options: &SearchOptions,
) -> Result<SecantConfiguration> {
    let template = SecantConfiguration::new(m, points.to_vec(), zeta_seed.clone())?;
    template.validate(basis)?;
    if !(options.tolerance > 0.0) || !(options.initial_step > 0.0) {
        return Err(Error::InvalidArgument(
            "search tolerance and step must be positive".into(),
        ));
    }
    let x0: Vec<f64> = zeta_seed.re().into_iter().chain(zeta_seed.im()).collect();
    let objective = |x: &[f64]| -> Result<f64> {
        let mut cfg = template.clone();
        cfg.zeta = zeta_from(x);
        secant_residual(basis, &mut cfg, options.eps)
    };
    let out = nelder_mead(
        objective,
        &x0,
        options.initial_step,
        options.max_iterations,
        options.tolerance,
        options.tolerance,
    )?;
    let mut best = template;
    best.zeta = zeta_from(&out.x);
    best.residual = Some(out.value);
    if options.max_iterations == 0 || out.converged {
        return Ok(best);
    }
    Err(Error::SearchNotConverged {
        best: Box::new(best),
        iterations: out.iterations,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let out = nelder_mead(f, &[-1.2, 1.0], 0.1, 5000, 1e-14, 1e-16).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn abs_value_kink() {
        let f = |x: &[f64]| Ok((x[0] - 0.3).abs() + (x[1] + 0.2).abs());
        let out = nelder_mead(f, &[0.0, 0.0], 0.05, 2000, 1e-10, 1e-12).unwrap();
        assert!(out.value <= 1e-10, "{}", out.value);
    }

    #[test]
    fn zero_iterations_evaluate_seed_only() {
        let mut calls = 0;
        let out = nelder_mead(
            |x: &[f64]| {
                calls += 1;
                Ok(x[0] * x[0])
            },
            &[2.0],
            0.1,
            0,
            1e-9,
            1e-9,
        )
        .unwrap();
        assert_eq!(out.value, 4.0);
        assert_eq!(calls, 1);
    }

    #[test]
    fn trace_is_non_increasing() {
        let f = |x: &[f64]| Ok(x.iter().map(|v| v * v).sum::<f64>());
        let out = nelder_mead(f, &[1.0, -2.0, 0.5], 0.3, 200, 1e-30, 1e-30).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
