//! Penalized B-spline smoothing for noisy time tracks.
//!
//! The fit minimizes `Σᵢ (s(tᵢ) − yᵢ)² + λ·∫ s″(t)² dt` over splines of the
//! configured order on a uniform knot grid, with `λ` chosen by the
//! discrepancy principle: the largest `λ` whose residual sum of squares does
//! not exceed `n·σ²`. The normal equations are banded (bandwidth = order)
//! and solved by a banded Cholesky factorization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bisection steps over `log₁₀ λ` for the discrepancy-principle search.
pub const LAMBDA_BISECTIONS: usize = 60;
pub const LOG_LAMBDA_LO: f64 = -18.0;
pub const LOG_LAMBDA_HI: f64 = 12.0;

/// Fitted smoothing spline on a uniform extended knot grid.
///
/// `knots` is the full strictly increasing knot array including `order`
/// ghost knots beyond each end of the data range; the spline is meaningful
/// on `[knots[order], knots[len−1−order]]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplineModel {
    pub knots: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub order: usize,
    pub lambda_reg: f64,
}

impl SplineModel {
    /// Domain on which the spline is fully supported.
    pub fn domain(&self) -> (f64, f64) {
        (
            self.knots[self.order],
            self.knots[self.knots.len() - 1 - self.order],
        )
    }

    /// Spline value at `t` (clamped to the domain).
    pub fn evaluate(&self, t: f64) -> f64 {
        self.eval_der(t, 0)
    }

    /// First derivative at `t` (clamped to the domain).
    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_der(t, 1)
    }

    fn eval_der(&self, t: f64, der: usize) -> f64 {
        let (lo, hi) = self.domain();
        let x = t.clamp(lo, hi);
        let span = find_span(&self.knots, self.order, x);
        let table = basis_with_derivatives(&self.knots, self.order, span, x);
        let row = &table[der];
        let first = span - self.order;
        let mut acc = 0.0;
        for (offset, b) in row.iter().enumerate() {
            acc += self.coefficients[first + offset] * b;
        }
        acc
    }
}

/// Index `i` with `knots[i] <= x < knots[i+1]`, clamped to spans that carry
/// a full set of basis functions.
fn find_span(knots: &[f64], order: usize, x: f64) -> usize {
    let hi_span = knots.len() - 2 - order;
    let mut i = match knots.partition_point(|&k| k <= x) {
        0 => 0,
        p => p - 1,
    };
    i = i.clamp(order, hi_span);
    i
}

/// Values of the non-vanishing degree-`d` basis functions at `x` in `span`,
/// by the de Boor recursion. Entry `j` is basis `span − d + j`.
fn basis_values(knots: &[f64], span: usize, d: usize, x: f64) -> Vec<f64> {
    let mut n = vec![0.0; d + 1];
    n[0] = 1.0;
    let mut left = vec![0.0; d + 1];
    let mut right = vec![0.0; d + 1];
    for r in 1..=d {
        left[r] = x - knots[span + 1 - r];
        right[r] = knots[span + r] - x;
        let mut saved = 0.0;
        for j in 0..r {
            let denom = right[j + 1] + left[r - j];
            let temp = n[j] / denom;
            n[j] = saved + right[j + 1] * temp;
            saved = left[r - j] * temp;
        }
        n[r] = saved;
    }
    n
}

/// Values, first and second derivatives of the `order+1` non-vanishing
/// basis functions at `x`. Row `r` holds the `r`-th derivative; entry `j`
/// in each row is basis `span − order + j`.
fn basis_with_derivatives(knots: &[f64], order: usize, span: usize, x: f64) -> [Vec<f64>; 3] {
    let p = order;
    let vals = basis_values(knots, span, p, x);

    // Helper: derivative of the degree-d basis family from degree-(d−1)
    // values. `lower[j]` is basis `span − (d−1) + j` of degree d−1.
    let raise = |lower: &[f64], d: usize| -> Vec<f64> {
        let mut out = vec![0.0; d + 1];
        // Basis index i = span − d + j; B'_{i,d} uses degree-(d−1) bases
        // i and i+1, which sit at positions j−1 and j in `lower`.
        for (j, o) in out.iter_mut().enumerate() {
            let i = span - d + j;
            let mut acc = 0.0;
            if j >= 1 {
                acc += lower[j - 1] / (knots[i + d] - knots[i]);
            }
            if j < d {
                acc -= lower[j] / (knots[i + d + 1] - knots[i + 1]);
            }
            *o = d as f64 * acc;
        }
        out
    };

    let d1 = if p >= 1 {
        raise(&basis_values(knots, span, p - 1, x), p)
    } else {
        vec![0.0; p + 1]
    };
    let d2 = if p >= 2 {
        let lower2 = basis_values(knots, span, p - 2, x);
        let d1_lower = raise_lower(&lower2, knots, span, p - 1);
        raise(&d1_lower, p)
    } else {
        vec![0.0; p + 1]
    };
    [vals, d1, d2]
}

/// First derivative of the degree-`d` basis family from degree-(d−1)
/// values (free-standing version of the closure in
/// [`basis_with_derivatives`] for the second-derivative chain).
fn raise_lower(lower: &[f64], knots: &[f64], span: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let i = span - d + j;
        let mut acc = 0.0;
        if j >= 1 {
            acc += lower[j - 1] / (knots[i + d] - knots[i]);
        }
        if j < d {
            acc -= lower[j] / (knots[i + d + 1] - knots[i + 1]);
        }
        *o = d as f64 * acc;
    }
    out
}

/// Symmetric positive-definite banded matrix in lower-band storage:
/// `band[i][d] = A[i][i−d]` for `d = 0..=min(i, bw)`.
struct BandedSpd {
    n: usize,
    bw: usize,
    band: Vec<Vec<f64>>,
}

impl BandedSpd {
    fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            band: (0..n).map(|i| vec![0.0; bw.min(i) + 1]).collect(),
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        // Symmetric: store lower triangle only.
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(r - c <= self.bw);
        self.band[r][r - c] += v;
    }

    /// In-place Cholesky `A = L·Lᵀ`; fails on non-positive pivots.
    fn cholesky(mut self) -> Result<BandedSpd> {
        for i in 0..self.n {
            let start = i.saturating_sub(self.bw);
            for j in start..i {
                let mut sum = self.band[i][i - j];
                let kstart = start.max(j.saturating_sub(self.bw));
                for k in kstart..j {
                    sum -= self.band[i][i - k] * self.band[j][j - k];
                }
                self.band[i][i - j] = sum / self.band[j][0];
            }
            let mut diag = self.band[i][0];
            for k in start..i {
                let l = self.band[i][i - k];
                diag -= l * l;
            }
            if !(diag > 0.0) {
                return Err(Error::precondition(
                    "spline normal equations are not positive definite \
                     (samples too sparse for the knot grid)",
                ));
            }
            self.band[i][0] = diag.sqrt();
        }
        Ok(self)
    }

    /// Solves `L·Lᵀ x = b` given the factor from [`Self::cholesky`].
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for i in 0..self.n {
            let start = i.saturating_sub(self.bw);
            let mut sum = y[i];
            for k in start..i {
                sum -= self.band[i][i - k] * y[k];
            }
            y[i] = sum / self.band[i][0];
        }
        let mut x = y;
        for i in (0..self.n).rev() {
            let mut sum = x[i];
            let end = (i + self.bw).min(self.n - 1);
            for k in i + 1..=end {
                sum -= self.band[k][k - i] * x[k];
            }
            x[i] = sum / self.band[i][0];
        }
        x
    }
}

/// Precomputed fit ingredients shared across λ evaluations.
struct FitWorkspace<'a> {
    values: &'a [f64],
    knots: Vec<f64>,
    order: usize,
    nbasis: usize,
    /// Per-sample (first basis index, basis values).
    sample_rows: Vec<(usize, Vec<f64>)>,
    /// Curvature penalty `Ω` in dense-band form (symmetric, bandwidth = order).
    omega: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl<'a> FitWorkspace<'a> {
    fn new(times: &'a [f64], values: &'a [f64], knot_spacing: f64, order: usize) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::precondition("times/values length mismatch"));
        }
        if times.len() < order + 2 {
            return Err(Error::precondition(format!(
                "spline fit needs at least {} samples, got {}",
                order + 2,
                times.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::precondition("sample times must be strictly increasing"));
        }
        if !(knot_spacing > 0.0) {
            return Err(Error::precondition("knot spacing must be positive"));
        }
        if !(2..=5).contains(&order) {
            return Err(Error::precondition("spline order must be in 2..=5"));
        }
        let t0 = times[0];
        let t1 = times[times.len() - 1];
        let span = t1 - t0;
        if !(span > 0.0) {
            return Err(Error::precondition("degenerate time range"));
        }
        let intervals = ((span / knot_spacing).ceil() as usize).max(1);
        let h = span / intervals as f64;
        let knots: Vec<f64> = (0..intervals + 2 * order + 1)
            .map(|j| t0 + (j as f64 - order as f64) * h)
            .collect();
        let nbasis = knots.len() - order - 1;

        let sample_rows: Vec<(usize, Vec<f64>)> = times
            .iter()
            .map(|&t| {
                let s = find_span(&knots, order, t);
                (s - order, basis_values(&knots, s, order, t))
            })
            .collect();

        // Penalty Ω_{ij} = ∫ B″_i B″_j over the data range, assembled per
        // knot interval with 3-point Gauss (exact: the integrand is a
        // polynomial of degree ≤ 2·(order−2) ≤ 4 there... degree 2(p−2)).
        let gauss = [
            (-(0.6f64).sqrt(), 5.0 / 9.0),
            (0.0, 8.0 / 9.0),
            ((0.6f64).sqrt(), 5.0 / 9.0),
        ];
        let mut omega = vec![vec![0.0; order + 1]; nbasis];
        for interval in order..order + intervals {
            let (a, b) = (knots[interval], knots[interval + 1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for &(xi, wi) in &gauss {
                let x = mid + half * xi;
                let w = wi * half;
                let span_idx = find_span(&knots, order, x);
                let table = basis_with_derivatives(&knots, order, span_idx, x);
                let first = span_idx - order;
                for r in 0..=order {
                    for c in 0..=r {
                        // omega[i][d] holds Ω[i][i−d].
                        omega[first + r][r - c] += w * table[2][r] * table[2][c];
                    }
                }
            }
        }

        let mut rhs = vec![0.0; nbasis];
        for ((first, row), &y) in sample_rows.iter().zip(values) {
            for (offset, b) in row.iter().enumerate() {
                rhs[first + offset] += b * y;
            }
        }

        Ok(FitWorkspace {
            values,
            knots,
            order,
            nbasis,
            sample_rows,
            omega,
            rhs,
        })
    }

    /// Solves the penalized normal equations at the given `lambda`.
    fn solve_at(&self, lambda: f64) -> Result<Vec<f64>> {
        let mut a = BandedSpd::zeros(self.nbasis, self.order);
        for (first, row) in &self.sample_rows {
            for (ro, rb) in row.iter().enumerate() {
                for (co, cb) in row.iter().enumerate().take(ro + 1) {
                    a.add(first + ro, first + co, rb * cb);
                }
            }
        }
        if lambda > 0.0 {
            for i in 0..self.nbasis {
                for d in 0..self.omega[i].len().min(i + 1) {
                    a.add(i, i - d, lambda * self.omega[i][d]);
                }
            }
        }
        let factor = a.cholesky()?;
        Ok(factor.solve(&self.rhs))
    }

    fn rss(&self, coeffs: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((first, row), &y) in self.sample_rows.iter().zip(self.values) {
            let mut s = 0.0;
            for (offset, b) in row.iter().enumerate() {
                s += coeffs[first + offset] * b;
            }
            acc += (s - y) * (s - y);
        }
        acc
    }

    fn model(&self, coeffs: Vec<f64>, lambda: f64) -> SplineModel {
        SplineModel {
            knots: self.knots.clone(),
            coefficients: coeffs,
            order: self.order,
            lambda_reg: lambda,
        }
    }
}

/// Fits a smoothing spline with the discrepancy-principle smoothing weight:
/// the largest `λ` such that the residual sum of squares stays within
/// `n·σ²`, found by 60 bisections over `log₁₀ λ ∈ [−18, 12]`.
///
/// `sigma = 0` requests the plain least-squares fit (`λ = 0`).
pub fn fit_smoothing_spline(
    times: &[f64],
    values: &[f64],
    knot_spacing: f64,
    order: usize,
    sigma: f64,
) -> Result<SplineModel> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::precondition("sigma must be finite and >= 0"));
    }
    let ws = FitWorkspace::new(times, values, knot_spacing, order)?;
    if sigma == 0.0 {
        let coeffs = ws.solve_at(0.0)?;
        return Ok(ws.model(coeffs, 0.0));
    }
    let target = times.len() as f64 * sigma * sigma;

    // Establish the bracket. If even the stiffest fit stays within the
    // budget, take it; if even the loosest fit overshoots, fall back to the
    // unpenalized fit (the data cannot be matched that closely).
    let rss_at = |log_lambda: f64| -> Result<f64> {
        Ok(ws.rss(&ws.solve_at(10f64.powf(log_lambda))?))
    };
    if rss_at(LOG_LAMBDA_HI)? <= target {
        let lambda = 10f64.powf(LOG_LAMBDA_HI);
        let coeffs = ws.solve_at(lambda)?;
        return Ok(ws.model(coeffs, lambda));
    }
    if rss_at(LOG_LAMBDA_LO)? > target {
        let coeffs = ws.solve_at(0.0)?;
        return Ok(ws.model(coeffs, 0.0));
    }
    let (mut lo, mut hi) = (LOG_LAMBDA_LO, LOG_LAMBDA_HI);
    for _ in 0..LAMBDA_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if rss_at(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 10f64.powf(lo);
    let coeffs = ws.solve_at(lambda)?;
    Ok(ws.model(coeffs, lambda))
}

/// Smoothing-spline estimate of the derivative of a noisy time series at
/// the sample times (cubic spline, knot spacing twice the median step).
pub fn regularized_derivative(times: &[f64], values: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if times.len() < 5 {
        return Err(Error::precondition(
            "regularized derivative needs at least 5 samples",
        ));
    }
    let median_dt = median_step(times)?;
    let model = fit_smoothing_spline(times, values, 2.0 * median_dt, 3, sigma)?;
    Ok(times.iter().map(|&t| model.derivative(t)).collect())
}

/// Median spacing of a sample-time vector (must be positive).
pub(crate) fn median_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::precondition("need at least 2 sample times"));
    }
    let mut steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_dt = steps[steps.len() / 2];
    if !(median_dt > 0.0) {
        return Err(Error::precondition("sample times must be strictly increasing"));
    }
    Ok(median_dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn uniform_times(n: usize, t0: f64, dt: f64) -> Vec<f64> {
        (0..n).map(|i| t0 + i as f64 * dt).collect()
    }

    fn unit_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    }

    #[test]
    fn noiseless_cubic_derivative_is_exact() {
        let times = uniform_times(100, 0.0, 0.05);
        let f = |t: f64| t * t * t - 2.0 * t * t + t - 0.3;
        let df = |t: f64| 3.0 * t * t - 4.0 * t + 1.0;
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let d = regularized_derivative(&times, &values, 0.0).unwrap();
        for (t, est) in times.iter().zip(&d) {
            assert!(
                (est - df(*t)).abs() <= 1e-8,
                "cubic derivative error {} at t={t}",
                (est - df(*t)).abs()
            );
        }
    }

    #[test]
    fn spline_reproduces_noiseless_values() {
        let times = uniform_times(200, 0.0, 0.05);
        let f = |t: f64| (-(t - 5.0) * (t - 5.0) / 2.0).exp();
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let model = fit_smoothing_spline(&times, &values, 0.1, 3, 0.0).unwrap();
        for (&t, &y) in times.iter().zip(&values) {
            assert!((model.evaluate(t) - y).abs() <= 1e-6);
        }
        // Invariants: strictly increasing knots, consistent coefficient count.
        assert!(model.knots.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(
            model.coefficients.len(),
            model.knots.len() - model.order - 1
        );
    }

    #[test]
    fn noisy_sine_derivative_beats_forward_differences() {
        let n = 200;
        let dt = 0.05;
        let sigma = 1e-2;
        let times = uniform_times(n, 0.0, dt);
        let noise = unit_noise(n, 7);
        let values: Vec<f64> = times
            .iter()
            .zip(&noise)
            .map(|(&t, &z)| t.sin() + sigma * z)
            .collect();

        let d = regularized_derivative(&times, &values, sigma).unwrap();
        // Interior comparison: forward differences at i use i and i+1.
        let mut max_spline: f64 = 0.0;
        let mut max_naive: f64 = 0.0;
        for i in 0..n - 1 {
            let t = times[i];
            max_spline = max_spline.max((d[i] - t.cos()).abs());
            let fwd = (values[i + 1] - values[i]) / dt;
            max_naive = max_naive.max((fwd - t.cos()).abs());
        }
        assert!(
            max_spline * 5.0 <= max_naive,
            "spline {max_spline} not 5x better than naive {max_naive}"
        );
    }

    #[test]
    fn derivative_error_decreases_with_noise_level() {
        let n = 200;
        let times = uniform_times(n, 0.0, 0.05);
        let noise = unit_noise(n, 11);
        let mut prev = f64::INFINITY;
        for sigma in [1e-1, 1e-2, 1e-3] {
            let values: Vec<f64> = times
                .iter()
                .zip(&noise)
                .map(|(&t, &z)| t.sin() + sigma * z)
                .collect();
            let d = regularized_derivative(&times, &values, sigma).unwrap();
            let err = times
                .iter()
                .zip(&d)
                .map(|(&t, &e)| (e - t.cos()).abs())
                .fold(0.0f64, f64::max);
            assert!(
                err < prev,
                "derivative error should fall with sigma: {err} !< {prev}"
            );
            prev = err;
        }
    }

    #[test]
    fn discrepancy_principle_hits_the_residual_budget() {
        let n = 300;
        let sigma = 5e-2;
        let times = uniform_times(n, 0.0, 0.02);
        let noise = unit_noise(n, 23);
        let values: Vec<f64> = times
            .iter()
            .zip(&noise)
            .map(|(&t, &z)| (2.0 * t).sin() + sigma * z)
            .collect();
        let model = fit_smoothing_spline(&times, &values, 0.08, 3, sigma).unwrap();
        let rss: f64 = times
            .iter()
            .zip(&values)
            .map(|(&t, &y)| (model.evaluate(t) - y).powi(2))
            .sum();
        let target = n as f64 * sigma * sigma;
        assert!(rss <= target * (1.0 + 1e-9), "rss {rss} exceeds budget {target}");
        // Largest-lambda property: noticeably more smoothing overshoots.
        let stiffer = {
            let ws = FitWorkspace::new(&times, &values, 0.08, 3).unwrap();
            let c = ws.solve_at(model.lambda_reg * 10.0).unwrap();
            ws.rss(&c)
        };
        assert!(stiffer > target);
    }

    #[test]
    fn penalty_matches_analytic_curvature_integral() {
        // Fit a cubic exactly, then compare cᵀΩc with ∫(s″)² dt.
        let times = uniform_times(120, 0.0, 0.05);
        let (a, b) = (0.7, -0.4);
        let values: Vec<f64> = times
            .iter()
            .map(|&t| a * t * t * t + b * t * t + 0.3 * t - 1.0)
            .collect();
        let ws = FitWorkspace::new(&times, &values, 0.25, 3, ).unwrap();
        let coeffs = ws.solve_at(0.0).unwrap();
        let mut quad = 0.0;
        for i in 0..ws.nbasis {
            for d in 0..ws.omega[i].len().min(i + 1) {
                let v = coeffs[i] * ws.omega[i][d] * coeffs[i - d];
                quad += if d == 0 { v } else { 2.0 * v };
            }
        }
        // ∫₀ᵀ (6at + 2b)² dt.
        let t1 = *times.last().unwrap();
        let exact = 12.0 * a * a * t1.powi(3) + 12.0 * a * b * t1 * t1 + 4.0 * b * b * t1;
        assert!(
            (quad - exact).abs() <= 1e-6 * exact.abs(),
            "penalty {quad} vs analytic {exact}"
        );
    }

    #[test]
    fn banded_cholesky_matches_dense_solver() {
        // Deterministic SPD band system: A = BᵀB + I with B banded.
        let n = 12;
        let bw = 3;
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) <= bw {
                    let v = 1.0 / (1.0 + (i + 2 * j) as f64);
                    dense[i][j] += v;
                    dense[j][i] += v;
                }
            }
        }
        // Make it SPD: A ← AᵀA + I.
        let mut spd = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = if i == j { 1.0 } else { 0.0 };
                for k in 0..n {
                    acc += dense[k][i] * dense[k][j];
                }
                spd[i][j] = acc;
            }
        }
        // Zero out entries beyond the band to keep it banded SPD
        // (diagonally dominant enough after the +I shift).
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > bw {
                    spd[i][j] = 0.0;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();

        let mut banded = BandedSpd::zeros(n, bw);
        for i in 0..n {
            for j in 0..=i {
                if i - j <= bw && spd[i][j] != 0.0 {
                    banded.add(i, j, spd[i][j]);
                }
            }
        }
        let x = banded.cholesky().unwrap().solve(&b);

        // Dense Gaussian elimination oracle.
        let mut aug: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = spd[i].clone();
                row.push(b[i]);
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| aug[r][col].abs().partial_cmp(&aug[s][col].abs()).unwrap())
                .unwrap();
            aug.swap(col, pivot);
            for r in col + 1..n {
                let f = aug[r][col] / aug[col][col];
                for c in col..=n {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
        let mut oracle = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = aug[i][n];
            for j in i + 1..n {
                acc -= aug[i][j] * oracle[j];
            }
            oracle[i] = acc / aug[i][i];
        }

        for (xi, oi) in x.iter().zip(&oracle) {
            assert!((xi - oi).abs() <= 1e-10, "banded {xi} vs dense {oi}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let times = uniform_times(4, 0.0, 0.1);
        let values = vec![0.0; 4];
        assert!(regularized_derivative(&times, &values, 0.0).is_err());

        let times = vec![0.0, 0.1, 0.1, 0.2, 0.3];
        let values = vec![0.0; 5];
        assert!(regularized_derivative(&times, &values, 0.0).is_err());

        let times = uniform_times(10, 0.0, 0.1);
        let values = vec![0.0; 10];
        assert!(fit_smoothing_spline(&times, &values, 0.2, 3, -1.0).is_err());
        assert!(fit_smoothing_spline(&times, &values, 0.0, 3, 0.0).is_err());
    }
}
