//! Uniform radial grids on [0, r_max] and radially symmetric fields on R^3.
//!
//! A field stores samples at the interior nodes r_i = i*dr, i = 1..n, with the
//! implicit boundary values u(0) finite and u(r_max) = 0. All integrals over
//! R^3 reduce to the half-line with weight 4*pi*r^2; the composite trapezoid
//! rule on [0, r_max] then collapses to `dr * sum_i w(r_i)` because both
//! endpoint contributions vanish (r^2 = 0 at the origin, u = 0 at r_max).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform radial grid: n interior nodes r_i = i * dr, dr = r_max / (n + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
}

impl RadialGrid {
    pub const MIN_NODES: usize = 16;

    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::invalid("r_max", format!("must be positive, got {r_max}")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::invalid(
                "n",
                format!("need at least {} interior nodes, got {n}", Self::MIN_NODES),
            ));
        }
        Ok(RadialGrid { r_max, n })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / (self.n + 1) as f64
    }

    /// Node radius r_i = i * dr for i = 1..=n (1-based, matching the math).
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.n);
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let dr = self.spacing();
        (1..=self.n).map(move |i| i as f64 * dr)
    }

    /// Quadrature weight of node i for integrals over R^3: 4*pi*r_i^2*dr.
    pub fn weight(&self, i: usize) -> f64 {
        let r = self.node(i);
        4.0 * PI * r * r * self.spacing()
    }
}

/// Radially symmetric real field sampled on a [`RadialGrid`].
///
/// Fields on different grids must never be combined arithmetically; all
/// binary operations check grid identity.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", grid.n(), values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "field samples must be finite"));
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        RadialField {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples r -> amplitude * exp(-r^2 / (2 width^2)).
    pub fn gaussian(grid: Arc<RadialGrid>, width: f64, amplitude: f64) -> Self {
        let values = grid
            .nodes()
            .map(|r| amplitude * (-r * r / (2.0 * width * width)).exp())
            .collect();
        RadialField { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn assert_same_grid(&self, other: &RadialField) {
        assert!(
            self.same_grid(other),
            "fields on different grids must not be combined"
        );
    }

    /// Extrapolated value at the origin: the quadratic through the first
    /// three nodes evaluated at r = 0 (uniform spacing gives 3u1 - 3u2 + u3).
    pub fn value_at_origin(&self) -> f64 {
        3.0 * self.values[0] - 3.0 * self.values[1] + self.values[2]
    }

    /// Cubic (4-point Lagrange) interpolation at radius r, zero beyond r_max.
    ///
    /// The stencil runs over the augmented node set {0, r_1, .., r_n, r_max}
    /// with u(0) from [`Self::value_at_origin`] and u(r_max) = 0.
    pub fn interpolate(&self, r: f64) -> f64 {
        let n = self.grid.n();
        let dr = self.grid.spacing();
        if r > self.grid.r_max() || r < 0.0 {
            return 0.0;
        }
        // augmented index coordinate: node j (0..=n+1) sits at j*dr
        let x = r / dr;
        // anchor the 4-point stencil [j0, j0+3] inside 0..=n+1
        let cell = x.floor() as isize;
        let j0 = (cell - 1).clamp(0, (n + 1) as isize - 3) as usize;
        let value_at = |j: usize| -> f64 {
            if j == 0 {
                self.value_at_origin()
            } else if j == n + 1 {
                0.0
            } else {
                self.values[j - 1]
            }
        };
        let mut acc = 0.0;
        for k in 0..4 {
            let j = j0 + k;
            let mut lk = 1.0;
            for m in 0..4 {
                if m != k {
                    let jm = j0 + m;
                    lk *= (x - jm as f64) / (j as f64 - jm as f64);
                }
            }
            acc += lk * value_at(j);
        }
        acc
    }

    pub fn scale(&self, k: f64) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| k * v).collect(),
        }
    }

    pub fn axpy(&self, alpha: f64, other: &RadialField) -> RadialField {
        self.assert_same_grid(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        RadialField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// L^2(R^3) inner product by the weighted trapezoid rule.
    pub fn inner(&self, other: &RadialField) -> f64 {
        self.assert_same_grid(other);
        let dr = self.grid.spacing();
        let mut acc = 0.0;
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let r = (i + 1) as f64 * dr;
            acc += r * r * a * b;
        }
        4.0 * PI * dr * acc
    }
}

/// The four integrals through which every functional of the problem factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// ||(-Delta)^{s/2} u||_2^2
    pub seminorm_sq: f64,
    /// ||u||_2^2
    pub mass_sq: f64,
    /// ||u||_q^q
    pub lq: f64,
    /// ||u||_p^p
    pub lp: f64,
}

impl Moments {
    pub const ZERO: Moments = Moments {
        seminorm_sq: 0.0,
        mass_sq: 0.0,
        lq: 0.0,
        lp: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("seminorm_sq", self.seminorm_sq),
            ("mass_sq", self.mass_sq),
            ("lq", self.lq),
            ("lp", self.lp),
        ];
        for (name, v) in entries {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "moments",
                    reason: format!("{name} must be finite and nonnegative, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// ||u||_2^2 = int of |u|^2 over R^3 by the weighted trapezoid rule.
pub fn mass_norm_sq(u: &RadialField) -> f64 {
    let dr = u.grid().spacing();
    let mut acc = 0.0;
    for (i, v) in u.values().iter().enumerate() {
        let r = (i + 1) as f64 * dr;
        acc += r * r * v * v;
    }
    4.0 * PI * dr * acc
}

/// int of |u|^alpha over R^3 by the same quadrature. Rejects alpha <= 0.
pub fn lp_norm(u: &RadialField, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let dr = u.grid().spacing();
    let mut acc = 0.0;
    if alpha == 2.0 {
        return Ok(mass_norm_sq(u));
    }
    for (i, v) in u.values().iter().enumerate() {
        let r = (i + 1) as f64 * dr;
        acc += r * r * v.abs().powf(alpha);
    }
    Ok(4.0 * PI * dr * acc)
}
