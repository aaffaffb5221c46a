//! Natural cubic spline interpolation.
//!
//! Fits an interpolating cubic through knots with strictly increasing x,
//! zero second derivative at both ends, and linear extension beyond the
//! end knots using the end slopes. Evaluation at a knot's exact x returns
//! the knot's y unchanged.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots; ends are zero.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    /// Fits the spline. Needs at least two knots with strictly increasing,
    /// finite x and finite y. With exactly two knots the result is the
    /// straight line through them.
    pub fn fit(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::TooFewExtrema {
                context: format!("spline needs at least 2 knots, got {}", knots.len()),
            });
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("spline knot {i} = ({x}, {y})"),
                });
            }
            if i > 0 && x <= knots[i - 1].0 {
                return Err(Error::InvalidInput(format!(
                    "spline knots must have strictly increasing x: knot {i} has x = {x} after {}",
                    knots[i - 1].0
                )));
            }
        }

        let n = knots.len();
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives, natural ends.
            let rows = n - 2;
            let mut diag = vec![0.0; rows];
            let mut rhs = vec![0.0; rows];
            let mut sub = vec![0.0; rows];
            let mut sup = vec![0.0; rows];
            for i in 0..rows {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                sub[i] = h0;
                diag[i] = 2.0 * (h0 + h1);
                sup[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            // Thomas algorithm.
            for i in 1..rows {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[rows] = rhs[rows - 1] / diag[rows - 1];
            for i in (0..rows - 1).rev() {
                m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(NaturalCubicSpline { xs, ys, m })
    }

    /// Evaluates the spline. Exactly at a knot x the knot y is returned;
    /// outside the knot span the end segments extend linearly. Non-finite
    /// x evaluates to NaN.
    pub fn eval(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NAN;
        }
        let n = self.xs.len();
        match self
            .xs
            .binary_search_by(|probe| probe.partial_cmp(&x).expect("finite knot x"))
        {
            Ok(i) => self.ys[i],
            Err(0) => {
                let h = self.xs[1] - self.xs[0];
                let slope = (self.ys[1] - self.ys[0]) / h - h * self.m[1] / 6.0;
                self.ys[0] + slope * (x - self.xs[0])
            }
            Err(i) if i == n => {
                let h = self.xs[n - 1] - self.xs[n - 2];
                let slope = (self.ys[n - 1] - self.ys[n - 2]) / h + h * self.m[n - 2] / 6.0;
                self.ys[n - 1] + slope * (x - self.xs[n - 1])
            }
            Err(i) => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.ys[i - 1], self.ys[i]);
                let (m0, m1) = (self.m[i - 1], self.m[i]);
                let h = x1 - x0;
                let a = x1 - x;
                let b = x - x0;
                m0 * a * a * a / (6.0 * h)
                    + m1 * b * b * b / (6.0 * h)
                    + (y0 / h - m0 * h / 6.0) * a
                    + (y1 / h - m1 * h / 6.0) * b
            }
        }
    }

    /// Knot x positions.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }
}
