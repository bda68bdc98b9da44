//! Locally weighted scatterplot smoothing (Cleveland's lowess).

/// Lowess fit evaluated at each input abscissa, returned in ascending-`x`
/// order together with the sorted `x`. `span` is the fraction of points in
/// each local neighbourhood; `robust_iters` bisquare reweighting passes
/// follow the initial fit (3 reproduces the classical default).
pub fn lowess(x: &[f64], y: &[f64], span: f64, robust_iters: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    if n < 3 {
        return (xs, ys);
    }
    let k = ((span * n as f64).ceil() as usize).clamp(2, n);
    let mut robustness = vec![1.0; n];
    let mut fitted = vec![0.0; n];

    for pass in 0..=robust_iters {
        for i in 0..n {
            // k nearest neighbours form a contiguous window in sorted order
            let (mut lo, mut hi) = (i, i);
            while hi - lo + 1 < k {
                if lo == 0 {
                    hi += 1;
                } else if hi == n - 1 || xs[i] - xs[lo - 1] <= xs[hi + 1] - xs[i] {
                    lo -= 1;
                } else {
                    hi += 1;
                }
            }
            let radius = (xs[i] - xs[lo]).max(xs[hi] - xs[i]);
            let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for j in lo..=hi {
                let w = if radius > 0.0 {
                    let d = ((xs[j] - xs[i]).abs() / (radius * 1.000_000_1)).min(1.0);
                    (1.0 - d.powi(3)).powi(3)
                } else {
                    1.0
                } * robustness[j];
                sw += w;
                swx += w * xs[j];
                swy += w * ys[j];
                swxx += w * xs[j] * xs[j];
                swxy += w * xs[j] * ys[j];
            }
            fitted[i] = if sw <= 0.0 {
                ys[i]
            } else {
                let mx = swx / sw;
                let my = swy / sw;
                let var = swxx / sw - mx * mx;
                if var > 1e-12 * (1.0 + mx * mx) {
                    let slope = (swxy / sw - mx * my) / var;
                    my + slope * (xs[i] - mx)
                } else {
                    my
                }
            };
        }
        if pass == robust_iters {
            break;
        }
        let mut abs_res: Vec<f64> = ys.iter().zip(&fitted).map(|(a, b)| (a - b).abs()).collect();
        let resid = abs_res.clone();
        abs_res.sort_by(f64::total_cmp);
        let med = if n % 2 == 1 { abs_res[n / 2] } else { 0.5 * (abs_res[n / 2 - 1] + abs_res[n / 2]) };
        let scale = 6.0 * med;
        if scale <= 0.0 {
            break;
        }
        for (r, w) in resid.iter().zip(robustness.iter_mut()) {
            let u = r / scale;
            *w = if u < 1.0 { (1.0 - u * u).powi(2) } else { 0.0 };
        }
    }
    (xs, fitted)
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
