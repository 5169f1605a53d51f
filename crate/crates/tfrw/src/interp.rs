//! Natural cubic spline interpolation for complex samples on a strictly
//! increasing abscissa. Evaluation outside the sampled range returns zero
//! (compact-support convention used by the resampling paths).

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<Complex64>,
    /// Second derivatives at the knots (natural boundary conditions).
    m: Vec<Complex64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[Complex64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2);
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));
        let n = xs.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives.
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            let mut rhs = vec![Complex64::new(0.0, 0.0); n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                sub[i] = h0 / 6.0;
                diag[i] = (h0 + h1) / 3.0;
                sup[i] = h1 / 6.0;
                rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
            }
            // Thomas algorithm over the interior band.
            for i in 2..n - 1 {
                let f = sub[i] / diag[i - 1];
                diag[i] -= f * sup[i - 1];
                rhs[i] = rhs[i] - rhs[i - 1] * f;
            }
            m[n - 2] = rhs[n - 2] / diag[n - 2];
            for i in (1..n - 2).rev() {
                m[i] = (rhs[i] - m[i + 1] * sup[i]) / diag[i];
            }
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let i = match self
            .xs
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (self.xs[i + 1] - x) / h;
        let u = (x - self.xs[i]) / h;
        self.ys[i] * t + self.ys[i + 1] * u
            + ((t * t * t - t) * self.m[i] + (u * u * u - u) * self.m[i + 1]) * (h * h / 6.0)
    }
}

/// Real-valued convenience wrapper.
#[derive(Debug, Clone)]
pub struct CubicSplineReal(CubicSpline);

impl CubicSplineReal {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let cys: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y, 0.0)).collect();
        Self(CubicSpline::new(xs, &cys))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.eval(x).re
    }
}
