//! Worst-case demand distributions under the maximum-entropy principle.
//!
//! Spatially the entropy maximiser subject to a mean and covariance on the
//! square `[0,a]^2` is an exponential of a quadratic,
//! `f(x,y) = exp(nu - 1 + lambda^T z + z^T Q z)`; the multipliers are found
//! by Newton iteration on the moment equations, with every integral taken
//! by tensor-product Gauss-Legendre quadrature. Temporally the maximiser
//! subject to a mean slot index is the binomial distribution over slots.
//!
//! The worst-case tour-length and satisfiability variants combine the two:
//! the spatial constraint replaces `sqrt(|R|)` by the factor `F`, the
//! temporal constraint replaces the slot-count terms by `f1`/`f2` built
//! from the binomial pmf.

use alloc::vec::Vec;
use core::fmt;

use crate::approx::{beta_lookup, ApproxError};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum MaxEntError {
    NotSymmetric,
    NotPositiveDefinite,
    MeanOutsideDomain,
    InfeasibleMoments,
    NoConvergence { residual: f64 },
    PointOutsideDomain,
    BadQuadratureOrder,
    BinomialRange,
    BadProbability,
    ModeNotInteger,
    ModeOutOfRange,
    NoSlots,
    Approx(ApproxError),
}

impl fmt::Display for MaxEntError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxEntError::NotSymmetric => write!(f, "covariance matrix is not symmetric"),
            MaxEntError::NotPositiveDefinite => {
                write!(f, "covariance matrix is not positive definite")
            }
            MaxEntError::MeanOutsideDomain => write!(f, "mean lies outside the square"),
            MaxEntError::InfeasibleMoments => {
                write!(f, "moments are not achievable by a density on the square")
            }
            MaxEntError::NoConvergence { residual } => {
                write!(f, "moment matching did not converge (residual {residual:e})")
            }
            MaxEntError::PointOutsideDomain => write!(f, "evaluation point outside the square"),
            MaxEntError::BadQuadratureOrder => write!(f, "quadrature order must be at least 2"),
            MaxEntError::BinomialRange => write!(f, "binomial index out of range"),
            MaxEntError::BadProbability => write!(f, "probability outside [0, 1]"),
            MaxEntError::ModeNotInteger => write!(f, "mean slot index must be an integer"),
            MaxEntError::ModeOutOfRange => write!(f, "mean slot index outside [1, m]"),
            MaxEntError::NoSlots => write!(f, "slot count must be at least 1"),
            MaxEntError::Approx(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MaxEntError {}

impl From<ApproxError> for MaxEntError {
    fn from(e: ApproxError) -> Self {
        MaxEntError::Approx(e)
    }
}

/// Target mean and covariance of the spatial demand density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMoments {
    mu: [f64; 2],
    /// Row-major symmetric matrix `[[s11, s12], [s12, s22]]`.
    sigma: [[f64; 2]; 2],
}

impl SpatialMoments {
    pub fn new(mu: [f64; 2], sigma: [[f64; 2]; 2]) -> Result<Self, MaxEntError> {
        let scale = sigma[0][0].abs().max(sigma[1][1].abs()).max(1.0);
        if (sigma[0][1] - sigma[1][0]).abs() > 1e-12 * scale {
            return Err(MaxEntError::NotSymmetric);
        }
        let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
        if !(sigma[0][0] > 0.0 && det > 0.0) {
            return Err(MaxEntError::NotPositiveDefinite);
        }
        Ok(SpatialMoments { mu, sigma })
    }

    /// Moments of the uniform density on `[0,a]^2`.
    pub fn uniform(side: f64) -> Self {
        let v = side * side / 12.0;
        SpatialMoments { mu: [side / 2.0, side / 2.0], sigma: [[v, 0.0], [0.0, v]] }
    }

    pub fn mu(&self) -> [f64; 2] {
        self.mu
    }

    pub fn sigma(&self) -> [[f64; 2]; 2] {
        self.sigma
    }
}

/// Multipliers of the max-entropy density on `[0,a]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MEDensityParams {
    pub nu: f64,
    pub lambda: [f64; 2],
    /// Symmetric quadratic coefficient matrix.
    pub q: [[f64; 2]; 2],
    pub side: f64,
}

impl MEDensityParams {
    /// Parameters of the uniform density `1/a^2`.
    pub fn uniform(side: f64) -> Self {
        MEDensityParams {
            nu: 1.0 - math::ln(side * side),
            lambda: [0.0, 0.0],
            q: [[0.0, 0.0], [0.0, 0.0]],
            side,
        }
    }

    fn exponent(&self, x: f64, y: f64) -> f64 {
        self.nu - 1.0
            + self.lambda[0] * x
            + self.lambda[1] * y
            + self.q[0][0] * x * x
            + 2.0 * self.q[0][1] * x * y
            + self.q[1][1] * y * y
    }
}

/// Density value at a point of the square.
pub fn density_eval(params: &MEDensityParams, x: f64, y: f64) -> Result<f64, MaxEntError> {
    if !(0.0..=params.side).contains(&x) || !(0.0..=params.side).contains(&y) {
        return Err(MaxEntError::PointOutsideDomain);
    }
    Ok(math::exp(params.exponent(x, y)))
}

/// Solver knobs: quadrature order per axis, residual tolerance (sup-norm
/// over the six moment equations in original units) and iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct MaxEntConfig {
    pub quad_order: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        MaxEntConfig { quad_order: 40, tol: 1e-8, max_iter: 200 }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton refinement of
/// Chebyshev initial guesses.
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; order];
    let mut weights = alloc::vec![0.0; order];
    let half = order.div_ceil(2);
    for i in 0..half {
        let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product quadrature grid on `[0, side]^2`.
struct SquareGrid {
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl SquareGrid {
    fn new(side: f64, order: usize) -> Result<Self, MaxEntError> {
        if order < 2 {
            return Err(MaxEntError::BadQuadratureOrder);
        }
        let (nodes, ws) = gauss_legendre(order);
        let coords = nodes.iter().map(|&t| 0.5 * side * (t + 1.0)).collect();
        let weights = ws.iter().map(|&w| 0.5 * side * w).collect();
        Ok(SquareGrid { coords, weights })
    }

    fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut sum = 0.0;
        for (i, &x) in self.coords.iter().enumerate() {
            let mut row = 0.0;
            for (j, &y) in self.coords.iter().enumerate() {
                row += self.weights[j] * f(x, y);
            }
            sum += self.weights[i] * row;
        }
        sum
    }

    /// All monomial moments `x^i y^j` with `i + j <= 4` of `exp(exponent)`.
    fn moments(&self, params: &MEDensityParams) -> [[f64; 5]; 5] {
        let mut out = [[0.0f64; 5]; 5];
        for (ix, &x) in self.coords.iter().enumerate() {
            for (iy, &y) in self.coords.iter().enumerate() {
                let w = self.weights[ix] * self.weights[iy];
                let f = math::exp(params.exponent(x, y));
                let mut xp = [1.0; 5];
                let mut yp = [1.0; 5];
                for k in 1..5 {
                    xp[k] = xp[k - 1] * x;
                    yp[k] = yp[k - 1] * y;
                }
                for i in 0..5 {
                    for j in 0..5 - i {
                        out[i][j] += w * f * xp[i] * yp[j];
                    }
                }
            }
        }
        out
    }
}

fn residuals(mom: &[[f64; 5]; 5], target: &SpatialMoments) -> [f64; 6] {
    let [mx, my] = target.mu;
    let s = target.sigma;
    [
        mom[0][0] - 1.0,
        mom[1][0] - mx,
        mom[0][1] - my,
        mom[2][0] - (s[0][0] + mx * mx),
        mom[1][1] - (s[0][1] + mx * my),
        mom[0][2] - (s[1][1] + my * my),
    ]
}

fn sup_norm(r: &[f64; 6]) -> f64 {
    r.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Jacobian of the residuals with respect to `(nu, l1, l2, q11, q12, q22)`:
/// every entry is itself a monomial moment of the current density.
fn jacobian(mom: &[[f64; 5]; 5]) -> [[f64; 6]; 6] {
    // residual rows are the moments of (1, x, y, x^2, xy, y^2)
    let rows = [(0usize, 0usize), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    let mut j = [[0.0f64; 6]; 6];
    for (r, &(i, k)) in rows.iter().enumerate() {
        j[r][0] = mom[i][k];
        j[r][1] = mom[i + 1][k];
        j[r][2] = mom[i][k + 1];
        j[r][3] = mom[i + 2][k];
        j[r][4] = 2.0 * mom[i + 1][k + 1];
        j[r][5] = mom[i][k + 2];
    }
    j
}

/// Gaussian elimination with partial pivoting; `None` on a vanishing pivot.
#[allow(clippy::needless_range_loop)]
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for col in 0..6 {
        let mut pivot = col;
        for row in col + 1..6 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..6 {
            let factor = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0f64; 6];
    for col in (0..6).rev() {
        let mut acc = b[col];
        for k in col + 1..6 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}

fn apply_step(params: &MEDensityParams, delta: &[f64; 6], scale: f64) -> MEDensityParams {
    MEDensityParams {
        nu: params.nu + scale * delta[0],
        lambda: [
            params.lambda[0] + scale * delta[1],
            params.lambda[1] + scale * delta[2],
        ],
        q: {
            let q01 = params.q[0][1] + scale * delta[4];
            [
                [params.q[0][0] + scale * delta[3], q01],
                [q01, params.q[1][1] + scale * delta[5]],
            ]
        },
        side: params.side,
    }
}

/// Finds the multipliers whose density reproduces the target moments, by
/// damped Newton iteration started from the uniform density. A step that
/// does not decrease the residual sup-norm is halved; a failed linear solve
/// falls back to a diagonally inflated system.
pub fn solve_spatial_me(
    moments: &SpatialMoments,
    side: f64,
    cfg: &MaxEntConfig,
) -> Result<MEDensityParams, MaxEntError> {
    let [mx, my] = moments.mu;
    if !(0.0..=side).contains(&mx) || !(0.0..=side).contains(&my) {
        return Err(MaxEntError::MeanOutsideDomain);
    }
    // necessary bound for a distribution supported on [0, side]
    let s = moments.sigma;
    if s[0][0] >= mx * (side - mx) || s[1][1] >= my * (side - my) {
        return Err(MaxEntError::InfeasibleMoments);
    }

    let grid = SquareGrid::new(side, cfg.quad_order)?;
    let mut params = MEDensityParams::uniform(side);
    let mut res = residuals(&grid.moments(&params), moments);
    let mut norm = sup_norm(&res);

    for _ in 0..cfg.max_iter {
        if norm < cfg.tol {
            return Ok(params);
        }
        let mom = grid.moments(&params);
        let jac = jacobian(&mom);
        let rhs = [-res[0], -res[1], -res[2], -res[3], -res[4], -res[5]];

        let mut delta = solve6(jac, rhs);
        if delta.is_none() {
            // inflate the diagonal until the system becomes solvable
            let mut bump = 1e-10;
            while delta.is_none() && bump < 1e6 {
                let mut damped = jac;
                for (i, row) in damped.iter_mut().enumerate() {
                    row[i] += bump * (1.0 + row[i].abs());
                }
                delta = solve6(damped, rhs);
                bump *= 100.0;
            }
        }
        let delta = delta.ok_or(MaxEntError::NoConvergence { residual: norm })?;

        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..40 {
            let trial = apply_step(&params, &delta, scale);
            let trial_res = residuals(&grid.moments(&trial), moments);
            let trial_norm = sup_norm(&trial_res);
            if trial_norm.is_finite() && trial_norm < norm {
                params = trial;
                res = trial_res;
                norm = trial_norm;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(MaxEntError::NoConvergence { residual: norm });
        }
    }
    if norm < cfg.tol {
        Ok(params)
    } else {
        Err(MaxEntError::NoConvergence { residual: norm })
    }
}

/// The spatial worst-case factor `F`: the integral of the square root of
/// the density over the square. Equals `sqrt(|R|)` for the uniform density.
pub fn spatial_factor_f(params: &MEDensityParams, quad_order: usize) -> Result<f64, MaxEntError> {
    let grid = SquareGrid::new(params.side, quad_order)?;
    Ok(grid.integrate(|x, y| math::exp(0.5 * params.exponent(x, y))))
}

/// Binomial probability mass, with the `0^0 = 1` convention at `p` of 0 or 1.
pub fn binomial_pmf(k: usize, m: usize, p: f64) -> Result<f64, MaxEntError> {
    if k > m {
        return Err(MaxEntError::BinomialRange);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(MaxEntError::BadProbability);
    }
    let mut choose = 1.0f64;
    for i in 1..=k.min(m - k) {
        choose = choose * (m - k.min(m - k) + i) as f64 / i as f64;
    }
    Ok(choose * math::pow_conv(p, k as f64) * math::pow_conv(1.0 - p, (m - k) as f64))
}

fn integer_mode(mu_g: f64, m: usize) -> Result<usize, MaxEntError> {
    if !mu_g.is_finite() || mu_g != libm::floor(mu_g) {
        return Err(MaxEntError::ModeNotInteger);
    }
    if !(1.0..=m as f64).contains(&mu_g) {
        return Err(MaxEntError::ModeOutOfRange);
    }
    Ok(mu_g as usize)
}

/// Satisfiability factor under the temporal constraint: `m^2` times the
/// binomial pmf at the mean slot index.
pub fn f1(mu_g: f64, m: usize) -> Result<f64, MaxEntError> {
    let k = integer_mode(mu_g, m)?;
    Ok((m * m) as f64 * binomial_pmf(k, m, mu_g / m as f64)?)
}

/// Approximation factor under the temporal constraint: the sum over slots
/// of the square roots of the binomial pmf. Bounded above by `sqrt(m)`.
pub fn f2(mu_g: f64, m: usize) -> Result<f64, MaxEntError> {
    let _ = integer_mode(mu_g, m)?;
    let p = mu_g / m as f64;
    let mut sum = 0.0;
    for k in 1..=m {
        sum += math::sqrt(binomial_pmf(k, m, p)?);
    }
    Ok(sum)
}

/// Temporal worst-case constraint: mean slot index over `m` equal slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalMe {
    pub m: usize,
    pub mu_g: f64,
}

impl TemporalMe {
    pub fn new(mu_g: f64, m: usize) -> Result<Self, MaxEntError> {
        if m == 0 {
            return Err(MaxEntError::NoSlots);
        }
        if !(0.0..=m as f64).contains(&mu_g) {
            return Err(MaxEntError::ModeOutOfRange);
        }
        Ok(TemporalMe { m, mu_g })
    }

    /// Success probability of the slot-assignment binomial.
    pub fn p_b(&self) -> f64 {
        self.mu_g / self.m as f64
    }
}

/// Worst-case identical-slot tour length under optional spatial and
/// temporal moment constraints:
/// `beta * sqrt(n) * (f2 or sqrt(m)) * (F or sqrt(|R|))`.
pub fn wc_mits_length(
    n: usize,
    m: usize,
    area: f64,
    spatial: Option<&SpatialMoments>,
    temporal_mu_g: Option<f64>,
    cfg: &MaxEntConfig,
) -> Result<f64, MaxEntError> {
    if m == 0 {
        return Err(MaxEntError::NoSlots);
    }
    let beta = beta_lookup(n)?;
    let f_factor = match spatial {
        Some(mom) => {
            let params = solve_spatial_me(mom, math::sqrt(area), cfg)?;
            spatial_factor_f(&params, cfg.quad_order)?
        }
        None => math::sqrt(area),
    };
    let t_factor = match temporal_mu_g {
        Some(mu_g) => f2(mu_g, m)?,
        None => math::sqrt(m as f64),
    };
    Ok(beta * math::sqrt(n as f64) * t_factor * f_factor)
}

/// Two sides of the worst-case average feasibility condition
/// `load <= threshold`, with `load` either `n*m` or `n*f1` and `threshold`
/// `h^2 / (beta * F)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcSatisfiability {
    pub feasible: bool,
    pub load: f64,
    pub threshold: f64,
}

pub fn wc_satisfiability(
    n: usize,
    m: usize,
    area: f64,
    horizon: f64,
    spatial: Option<&SpatialMoments>,
    temporal_mu_g: Option<f64>,
    cfg: &MaxEntConfig,
) -> Result<WcSatisfiability, MaxEntError> {
    if m == 0 {
        return Err(MaxEntError::NoSlots);
    }
    let beta = beta_lookup(n)?;
    let f_factor = match spatial {
        Some(mom) => {
            let params = solve_spatial_me(mom, math::sqrt(area), cfg)?;
            spatial_factor_f(&params, cfg.quad_order)?
        }
        None => math::sqrt(area),
    };
    let load = match temporal_mu_g {
        Some(mu_g) => n as f64 * f1(mu_g, m)?,
        None => (n * m) as f64,
    };
    let ratio = horizon / (beta * f_factor);
    let threshold = ratio * ratio;
    Ok(WcSatisfiability { feasible: load <= threshold, load, threshold })
}
