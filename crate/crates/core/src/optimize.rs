//! Nelder-Mead simplex minimization.

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iters: usize,
    /// Stop when the spread of simplex values is within `tol_f * (1 + |f_best|)` ...
    pub tol_f: f64,
    /// ... and every vertex lies within `tol_x` of the best one (max-norm).
    pub tol_x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of the given step sizes.
///
/// Non-finite objective values are treated as `+inf`, so infeasible points are simply rejected.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], cfg: &NelderMeadConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    assert_eq!(steps.len(), d, "one step size per coordinate");
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    if d == 0 {
        let v = eval(x0);
        return Minimum {
            x: vec![],
            f: v,
            iterations: 0,
            evaluations: 1,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=d).collect();

    while iterations < cfg.max_iters {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[d];
        let second = order[d - 1];

        let spread = values[worst] - values[best];
        let f_ok = values[best].is_finite() && spread <= cfg.tol_f * (1.0 + values[best].abs());
        let x_ok = simplex.iter().all(|v| {
            v.iter()
                .zip(&simplex[best])
                .all(|(a, b)| (a - b).abs() <= cfg.tol_x)
        });
        if f_ok && x_ok {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; d];
        for &i in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / d as f64;
            }
        }
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = toward(-alpha);
        let fr = eval(&xr);
        if fr < values[best] {
            let xe = toward(-gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = toward(-rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = toward(rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + sigma * (*x - a);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=d)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        f: values[best],
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NelderMeadConfig {
        NelderMeadConfig {
            max_iters: 20_000,
            tol_f: 1e-14,
            tol_x: 1e-9,
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &cfg());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-7 && (m.x[1] - 1.0).abs() < 1e-7, "{:?}", m.x);
    }

    #[test]
    fn quadratic_in_four_dimensions() {
        let target = [0.3, -2.0, 5.0, 0.01];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .enumerate()
                .map(|(i, (a, b))| (i as f64 + 1.0) * (a - b).powi(2))
                .sum::<f64>()
        };
        let m = nelder_mead(f, &[0.0; 4], &[1.0; 4], &cfg());
        assert!(m.converged);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) };
        let m = nelder_mead(f, &[2.0], &[1.0], &cfg());
        assert!((m.x[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let c = NelderMeadConfig { max_iters: 5, ..cfg() };
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &c);
        assert!(!m.converged);
        assert_eq!(m.iterations, 5);
    }
}
