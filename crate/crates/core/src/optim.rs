//! Derivative-free minimization with Newton polishing and finite-difference
//! curvature.
//!
//! Objectives are minimized on an unconstrained working scale; callers map
//! bounded parameters through log/logit transforms. Non-finite objective
//! values are treated as +inf, which lets a simplex back away from infeasible
//! regions.

use crate::numeric::invert;
use crate::rng::Philox4x32;

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 4000, f_tol: 1e-11, x_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();
    let mut evals = n + 1;
    let mut converged = false;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_spread = (values[n] - values[0]).abs();
        let x_spread = simplex[1..].iter().flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs())).fold(0.0f64, f64::max);
        if values[0].is_finite()
            && f_spread <= opts.f_tol * (1.0 + values[0].abs())
            && x_spread <= opts.x_tol * (1.0 + simplex[0].iter().fold(0.0f64, |m, v| m.max(v.abs())))
        {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect() };

        let reflected = along(-1.0);
        let fr = sanitize(f(&reflected));
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = sanitize(f(&expanded));
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5);
            let fc = sanitize(f(&c));
            (c, fc)
        } else {
            let c = along(0.5);
            let fc = sanitize(f(&c));
            (c, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best.iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
            values[i] = sanitize(f(&simplex[i]));
        }
        evals += n;
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("simplex is non-empty");
    Minimum { x: simplex[best].clone(), value: values[best], evals, converged }
}

/// Nelder–Mead from `x0` followed by `restarts` further runs started from
/// the incumbent jittered by up to one `step` per coordinate. The jitter
/// draws come from `seed`, so the whole search is deterministic.
pub fn minimize_with_restarts<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: &[f64],
    restarts: usize,
    seed: u64,
    opts: &NelderMeadOptions,
) -> Minimum {
    let mut rng = Philox4x32::with_stream(seed, 0x006f_7074_696d);
    let mut best = nelder_mead(f, x0, step, opts);
    let mut evals = best.evals;
    for _ in 0..restarts {
        let start: Vec<f64> = best.x.iter().zip(step).map(|(x, s)| x + s * (2.0 * rng.uniform() - 1.0)).collect();
        let m = nelder_mead(f, &start, step, opts);
        evals += m.evals;
        if m.value < best.value {
            best = Minimum { converged: m.converged, ..m };
        }
    }
    best.evals = evals;
    best
}

pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h[i];
            xm[i] -= h[i];
            (f(&xp) - f(&xm)) / (2.0 * h[i])
        })
        .collect()
}

/// Central finite-difference Hessian.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    let eval = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut y = x.to_vec();
        y[di] += si * h[di];
        y[dj] += sj * h[dj];
        f(&y)
    };
    for i in 0..n {
        hess[i][i] = (eval(i, 1.0, i, 0.0) - 2.0 * f0 + eval(i, -1.0, i, 0.0)) / (h[i] * h[i]);
        for j in 0..i {
            let v = (eval(i, 1.0, j, 1.0) - eval(i, 1.0, j, -1.0) - eval(i, -1.0, j, 1.0) + eval(i, -1.0, j, -1.0)) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Damped Newton iterations on finite-difference derivatives, accepted only
/// while they lower `f`. Used after a simplex search to drive the gradient to
/// the noise floor of the objective.
pub fn newton_polish<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: &[f64], max_iter: usize) -> Vec<f64> {
    let mut x = x.to_vec();
    let mut fx = f(&x);
    for _ in 0..max_iter {
        let g = fd_gradient(f, &x, h);
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        let hess = fd_hessian(f, &x, h);
        let Some(inv) = invert(&hess) else { break };
        // only take Newton directions from a locally convex model
        let step: Vec<f64> = inv.iter().map(|row| -row.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()).collect();
        let descent: f64 = step.iter().zip(&g).map(|(s, gi)| s * gi).sum();
        if !(descent < 0.0) {
            break;
        }
        // below function-value resolution the quadratic model is trusted outright
        let tiny = step.iter().zip(&x).all(|(s, xi)| s.abs() <= 1e-7 * (1.0 + xi.abs()));
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let fc = f(&cand);
            if fc.is_finite() && (fc <= fx || (tiny && t == 1.0)) {
                moved = fc < fx || cand != x;
                x = cand;
                fx = fc;
                break;
            }
            t *= 0.5;
        }
        if !moved || step.iter().zip(&x).all(|(s, xi)| (t * s).abs() <= 1e-13 * (1.0 + xi.abs())) {
            break;
        }
    }
    x
}
