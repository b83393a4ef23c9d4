//! Discounted CRRA utility along piecewise adjustment paths.
//!
//! Discounting always uses absolute time: after a rate change at `t1` the
//! factor applied is `exp(-rho_new * t)`, with no clock reset.

use serde::{Deserialize, Serialize};

use crate::econ::AdjustmentPath;
use crate::error::{Error, Result};

/// Instantaneous CRRA utility; `ln c` at `theta == 1`.
pub fn instantaneous_utility(c: f64, theta: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain(
            "instantaneous_utility",
            format!("consumption must be positive, got {c}"),
        ));
    }
    Ok(Crra::new(theta).eval(c))
}

/// Discount rate equivalent to a per-year discount factor, `ln(1 / phi)`.
pub fn rho_from_phi(phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::domain(
            "rho_from_phi",
            format!("phi must lie in (0, 1), got {phi}"),
        ));
    }
    Ok((1.0 / phi).ln())
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Crra {
    theta: f64,
    one_minus: f64,
}

impl Crra {
    pub(crate) fn new(theta: f64) -> Self {
        Self {
            theta,
            one_minus: 1.0 - theta,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, c: f64) -> f64 {
        if self.theta == 1.0 {
            c.ln()
        } else if self.one_minus == 0.5 {
            c.sqrt() / 0.5
        } else {
            (self.one_minus * c.ln()).exp() / self.one_minus
        }
    }
}

/// Running total of discounted utility for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityAccumulator {
    pub total: f64,
    /// Absolute time up to which `total` has been integrated.
    pub t_last: f64,
}

impl UtilityAccumulator {
    pub fn new(initial: f64, t0: f64) -> Self {
        Self {
            total: initial,
            t_last: t0,
        }
    }

    /// Adds one trapezoid whose endpoint integrands are already discounted.
    #[inline]
    pub(crate) fn add_trapezoid(&mut self, f_from: f64, f_to: f64, t_to: f64) {
        self.total += 0.5 * (t_to - self.t_last) * (f_from + f_to);
        self.t_last = t_to;
    }
}

/// Trapezoidal increment of `exp(-rho t) u(c(t))` over `[t_from, t_to]`.
///
/// `c_from` and `c_to` are the consumption values at the segment ends.
pub fn accumulate(
    acc: UtilityAccumulator,
    rho: f64,
    c_from: f64,
    c_to: f64,
    t_from: f64,
    t_to: f64,
    theta: f64,
) -> Result<UtilityAccumulator> {
    if t_from != acc.t_last {
        return Err(Error::Contract(format!(
            "segment starts at {t_from} but accumulator is at {}",
            acc.t_last
        )));
    }
    if t_to < t_from {
        return Err(Error::Contract(format!(
            "time moved backwards: {t_from} -> {t_to}"
        )));
    }
    if t_to == t_from {
        return Ok(acc);
    }
    let f_from = (-rho * t_from).exp() * instantaneous_utility(c_from, theta)?;
    let f_to = (-rho * t_to).exp() * instantaneous_utility(c_to, theta)?;
    let mut out = acc;
    out.add_trapezoid(f_from, f_to, t_to);
    if !out.total.is_finite() {
        return Err(Error::Contract(format!(
            "utility total became {}",
            out.total
        )));
    }
    Ok(out)
}

/// Discounted integrand `exp(-rho t) u(c(t))` at `t` on `path`.
#[inline]
pub(crate) fn integrand(path: &AdjustmentPath, rho: f64, t: f64, crra: &Crra) -> f64 {
    let c = path.consumption_at_decay(path.decay(t));
    (-rho * t).exp() * crra.eval(c)
}

/// Walks a path on a fixed grid, advancing `exp(mu tau)` and `exp(-rho t)`
/// multiplicatively. Exact values are recomputed every `REFRESH` steps.
pub(crate) struct GridWalker<'a> {
    path: &'a AdjustmentPath,
    rho: f64,
    crra: Crra,
    t0: f64,
    dt: f64,
    n: u64,
    decay: f64,
    disc: f64,
    step_decay: f64,
    step_disc: f64,
}

const REFRESH: u64 = 1024;

impl<'a> GridWalker<'a> {
    pub(crate) fn new(path: &'a AdjustmentPath, rho: f64, crra: Crra, t0: f64, dt: f64) -> Self {
        Self {
            path,
            rho,
            crra,
            t0,
            dt,
            n: 0,
            decay: path.decay(t0),
            disc: (-rho * t0).exp(),
            step_decay: (path.mu * dt).exp(),
            step_disc: (-rho * dt).exp(),
        }
    }

    #[inline]
    pub(crate) fn decay(&self) -> f64 {
        self.decay
    }

    /// Moves one grid step forward and returns `(t, c, integrand)` there.
    #[inline]
    pub(crate) fn advance(&mut self) -> (f64, f64, f64) {
        self.n += 1;
        let t = self.t0 + self.n as f64 * self.dt;
        if self.n.is_multiple_of(REFRESH) {
            self.decay = self.path.decay(t);
            self.disc = (-self.rho * t).exp();
        } else {
            self.decay *= self.step_decay;
            self.disc *= self.step_disc;
        }
        let c = self.path.consumption_at_decay(self.decay);
        (t, c, self.disc * self.crra.eval(c))
    }
}

/// Utility from `t_max` to infinity with the discount rate frozen at `rho`.
///
/// Consumption keeps following `path`; once it is within `1e-9` relative of
/// the target the remainder is added in closed form.
pub fn tail_utility(
    path: &AdjustmentPath,
    rho: f64,
    t_max: f64,
    theta: f64,
    dt: f64,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain(
            "tail_utility",
            format!("rho must be positive, got {rho}"),
        ));
    }
    if t_max < path.t_anchor {
        return Err(Error::domain(
            "tail_utility",
            format!("t_max = {t_max} precedes the path anchor {}", path.t_anchor),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::domain(
            "tail_utility",
            format!("dt must be positive, got {dt}"),
        ));
    }
    let crra = Crra::new(theta);
    let converged = |c: f64| (c - path.c_target).abs() < 1e-9 * path.c_target;

    let mut total = 0.0;
    let mut t_switch = t_max;
    let c0 = path.consumption_at_decay(path.decay(t_max));
    if !converged(c0) {
        let mut f_prev = integrand(path, rho, t_max, &crra);
        let mut walker = GridWalker::new(path, rho, crra, t_max, dt);
        loop {
            let (t, c, f) = walker.advance();
            total += 0.5 * dt * (f_prev + f);
            f_prev = f;
            if converged(c) {
                t_switch = t;
                break;
            }
        }
    }
    total += (-rho * t_switch).exp() * crra.eval(path.c_target) / rho;
    Ok(total)
}
