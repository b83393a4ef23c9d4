//! Closed-form Ramsey-Cass-Koopmans dynamics with Cobb-Douglas production
//! `f(k) = k^alpha` and no labour or knowledge growth.
//!
//! Everything here is a pure function of its inputs. The saddle point, the
//! stable eigenvalue of the linearized system, and the consumption jump onto
//! the stable arm after a discount-rate change are all computed analytically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `x^y` for strictly positive `x`, evaluated as `exp(y ln x)`.
#[inline]
pub(crate) fn pow_pos(x: f64, y: f64) -> f64 {
    (y * x.ln()).exp()
}

fn require_positive(what: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            what,
            format!("{name} must be positive and finite, got {v}"),
        ))
    }
}

/// Production and preference constants shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconomyParams {
    /// Capital share in `k^alpha`.
    pub alpha: f64,
    /// Depreciation rate per year.
    pub delta: f64,
    /// Relative risk aversion.
    pub theta: f64,
    /// Labour growth; only zero is supported.
    pub lambda: f64,
    /// Knowledge growth; only zero is supported.
    pub kappa: f64,
}

impl Default for EconomyParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            delta: 0.1,
            theta: 0.5,
            lambda: 0.0,
            kappa: 0.0,
        }
    }
}

impl EconomyParams {
    /// Validated constructor. Growth rates are pinned to zero.
    pub fn new(alpha: f64, delta: f64, theta: f64) -> Result<Self> {
        let params = Self {
            alpha,
            delta,
            theta,
            lambda: 0.0,
            kappa: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Every violated constraint, keyed by field name.
    pub fn violations(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(("alpha", "must satisfy 0 < alpha < 1"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            out.push(("delta", "must be finite and >= 0"));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            out.push(("theta", "must be finite and > 0"));
        }
        if self.lambda != 0.0 {
            out.push(("lambda", "labour growth must be 0"));
        }
        if self.kappa != 0.0 {
            out.push(("kappa", "knowledge growth must be 0"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(
                v.into_iter()
                    .map(|(key, constraint)| crate::error::Violation {
                        key: format!("econ.{key}"),
                        constraint: constraint.to_string(),
                    })
                    .collect(),
            ))
        }
    }
}

/// Saddle point of the capital/consumption system for one discount rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub k_star: f64,
    pub c_star: f64,
}

/// Time derivatives `(dk/dt, dc/dt)` at `(k, c)`.
///
/// `rho` may be zero here (the vector field is defined for it), only `k` and
/// `c` must be positive.
pub fn rhs(k: f64, c: f64, rho: f64, params: &EconomyParams) -> Result<(f64, f64)> {
    require_positive("rhs", "k", k)?;
    require_positive("rhs", "c", c)?;
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::domain("rhs", format!("rho must be >= 0, got {rho}")));
    }
    let a = params.alpha;
    let k_pow = pow_pos(k, a);
    let dk = k_pow - c - params.delta * k;
    let marginal = a * pow_pos(k, a - 1.0);
    let dc = c * (marginal - params.delta - rho) / params.theta;
    Ok((dk, dc))
}

pub fn saddle_point(rho: f64, params: &EconomyParams) -> Result<SteadyState> {
    require_positive("saddle_point", "rho", rho)?;
    let a = params.alpha;
    let k_star = pow_pos((params.delta + rho) / a, 1.0 / (a - 1.0));
    let c_star = pow_pos(k_star, a) - params.delta * k_star;
    Ok(SteadyState { k_star, c_star })
}

/// Second derivative of the production function, `alpha (alpha - 1) k^(alpha - 2)`.
pub fn curvature(k_star: f64, params: &EconomyParams) -> Result<f64> {
    require_positive("curvature", "k", k_star)?;
    let a = params.alpha;
    Ok(a * (a - 1.0) * pow_pos(k_star, a - 2.0))
}

/// Negative root of `mu^2 - rho mu + f''(k*) c* / theta = 0`.
///
/// The constant term is negative because `f'' < 0`, so the discriminant is
/// always larger than `rho^2` and this root is strictly negative.
pub fn stable_eigenvalue(rho_new: f64, target: &SteadyState, params: &EconomyParams) -> f64 {
    let f2 =
        curvature(target.k_star, params).expect("steady state capital is positive by construction");
    let q = f2 * target.c_star / params.theta;
    let disc = rho_new * rho_new - 4.0 * q;
    (rho_new - disc.sqrt()) / 2.0
}

/// Time origin of the exponential in `k* + exp(mu t)(k_A - k*)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathClock {
    /// `t` is absolute simulation time. Capital is continuous only for a
    /// change at `t = 0`; later changes start partway along the new path.
    #[default]
    Absolute,
    /// `t` is measured from the last rate change, so the path starts exactly
    /// at the anchor and capital is continuous across changes.
    SinceChange,
}

/// A linearized trajectory converging to a saddle point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentPath {
    pub k_target: f64,
    pub c_target: f64,
    pub k_anchor: f64,
    pub c_anchor: f64,
    /// Stable eigenvalue, per year.
    pub mu: f64,
    /// Absolute time of the last rate change.
    pub t_anchor: f64,
    pub clock: PathClock,
}

impl AdjustmentPath {
    /// The path that sits at `state` forever.
    pub fn at_rest(state: SteadyState, mu: f64, t_anchor: f64) -> Self {
        Self {
            k_target: state.k_star,
            c_target: state.c_star,
            k_anchor: state.k_star,
            c_anchor: state.c_star,
            mu,
            t_anchor,
            clock: PathClock::SinceChange,
        }
    }

    /// Time from which the exponential runs.
    pub fn origin(&self) -> f64 {
        match self.clock {
            PathClock::Absolute => 0.0,
            PathClock::SinceChange => self.t_anchor,
        }
    }

    /// Slope `dc/dk` of the linear stable arm through the target.
    pub fn arm_slope(&self, params: &EconomyParams) -> f64 {
        let f2 = curvature(self.k_target, params).expect("target capital is positive");
        f2 * self.c_target / (params.theta * self.mu)
    }

    /// `e^(mu (t - origin))`, without the domain check.
    #[inline]
    pub(crate) fn decay(&self, t: f64) -> f64 {
        (self.mu * (t - self.origin())).exp()
    }

    #[inline]
    pub(crate) fn at_decay(&self, decay: f64) -> (f64, f64) {
        (
            self.k_target + decay * (self.k_anchor - self.k_target),
            self.c_target + decay * (self.c_anchor - self.c_target),
        )
    }

    #[inline]
    pub(crate) fn consumption_at_decay(&self, decay: f64) -> f64 {
        self.c_target + decay * (self.c_anchor - self.c_target)
    }
}

/// Re-anchors an agent on the stable arm of the saddle for `rho_new`.
///
/// Capital stays at `current_k`; consumption jumps onto the linear stable arm
/// through the new saddle point. The path runs on [`PathClock::SinceChange`].
pub fn retarget_path(
    current_k: f64,
    rho_new: f64,
    t_now: f64,
    params: &EconomyParams,
) -> Result<AdjustmentPath> {
    retarget_path_on(current_k, rho_new, t_now, params, PathClock::SinceChange)
}

/// [`retarget_path`] with an explicit path clock.
pub fn retarget_path_on(
    current_k: f64,
    rho_new: f64,
    t_now: f64,
    params: &EconomyParams,
    clock: PathClock,
) -> Result<AdjustmentPath> {
    require_positive("retarget_path", "current_k", current_k)?;
    require_positive("retarget_path", "rho_new", rho_new)?;
    let target = saddle_point(rho_new, params)?;
    let mu = stable_eigenvalue(rho_new, &target, params);
    let f2 = curvature(target.k_star, params)?;
    let slope = f2 * target.c_star / (params.theta * mu);
    let c_anchor = target.c_star + slope * (current_k - target.k_star);
    if !(c_anchor > 0.0) {
        return Err(Error::ModelValidity(format!(
            "consumption jump to {c_anchor} (k = {current_k}, rho_new = {rho_new})"
        )));
    }
    Ok(AdjustmentPath {
        k_target: target.k_star,
        c_target: target.c_star,
        k_anchor: current_k,
        c_anchor,
        mu,
        t_anchor: t_now,
        clock,
    })
}

/// `(k, c)` on `path` at absolute time `t >= t_anchor`.
pub fn path_eval(path: &AdjustmentPath, t: f64) -> Result<(f64, f64)> {
    if t < path.t_anchor || t.is_nan() {
        return Err(Error::domain(
            "path_eval",
            format!("t = {t} precedes the path anchor {}", path.t_anchor),
        ));
    }
    Ok(path.at_decay(path.decay(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn standard() -> EconomyParams {
        EconomyParams::new(0.5, 0.1, 0.5).unwrap()
    }

    #[test]
    fn rejects_growth_and_bad_exponents() {
        let mut p = standard();
        p.lambda = 0.01;
        p.alpha = 1.0;
        match p.validate() {
            Err(Error::Config(v)) => {
                let keys: Vec<_> = v.iter().map(|v| v.key.as_str()).collect();
                assert_eq!(keys, ["econ.alpha", "econ.lambda"]);
            }
            other => panic!("expected config error, got {other:?}"),
        }
        assert!(EconomyParams::new(0.5, -0.1, 0.5).is_err());
        assert!(EconomyParams::new(0.5, 0.1, 0.0).is_err());
    }

    #[test]
    fn rhs_examples() {
        let p = standard();
        let (dk, dc) = rhs(2.396_265_659_596_085, 1.308_361_050_139_462_7, 0.223, &p).unwrap();
        assert!(dk.abs() < 1e-12 && dc.abs() < 1e-12, "{dk} {dc}");

        let unit = EconomyParams {
            delta: 0.0,
            theta: 1.0,
            ..p
        };
        let (dk, dc) = rhs(1.0, 1.0, 0.0, &unit).unwrap();
        assert!(dk.abs() < 1e-15);
        assert!((dc - 0.5).abs() < 1e-15);

        // k^a = 2, f'(k) = 0.25
        let (dk, dc) = rhs(4.0, 1.0, 0.1, &p).unwrap();
        assert!((dk - 0.6).abs() < 1e-14);
        assert!((dc - 0.1).abs() < 1e-14);

        assert!(rhs(0.0, 1.0, 0.1, &p).is_err());
        assert!(rhs(1.0, -1.0, 0.1, &p).is_err());
    }

    #[test]
    fn saddle_examples() {
        let p = standard();
        let s = saddle_point(0.223, &p).unwrap();
        assert_eq!(format!("{:.2} {:.2}", s.k_star, s.c_star), "2.40 1.31");
        assert!((s.k_star - 2.396_265_659_596_085).abs() < 1e-12);

        let s = saddle_point(0.5, &EconomyParams { delta: 0.0, ..p }).unwrap();
        assert!((s.k_star - 1.0).abs() < 1e-14 && (s.c_star - 1.0).abs() < 1e-14);

        let s = saddle_point(0.2, &p).unwrap();
        assert!((s.k_star - 25.0 / 9.0).abs() < 1e-13);
        assert!((s.c_star - 25.0 / 18.0).abs() < 1e-13);

        assert!(saddle_point(0.0, &p).is_err());
        assert!(saddle_point(-0.1, &p).is_err());
    }

    #[test]
    fn saddle_matches_bisection_root() {
        // f'(k) = delta + rho solved by bisection, independent of the closed form.
        let p = standard();
        let rho = 0.2;
        let (mut lo, mut hi) = (1e-3_f64, 100.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.alpha * mid.powf(p.alpha - 1.0) > p.delta + rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = saddle_point(rho, &p).unwrap();
        assert!((s.k_star - lo).abs() < 1e-12);
    }

    #[test]
    fn curvature_examples() {
        let p = standard();
        assert!((curvature(25.0 / 9.0, &p).unwrap() + 0.054).abs() < 1e-15);
        assert!((curvature(1.0, &p).unwrap() + 0.25).abs() < 1e-15);
        assert!((curvature(2.3963, &p).unwrap() + 0.067_39).abs() < 1e-5);
        assert!(curvature(0.0, &p).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let p = standard();
        let s = saddle_point(0.2, &p).unwrap();
        let mu = stable_eigenvalue(0.2, &s, &p);
        assert!((mu + 0.3).abs() < 1e-12, "{mu}");

        // 50-digit evaluation of the quadratic root gives -0.323 here.
        let s = saddle_point(0.223, &p).unwrap();
        let mu = stable_eigenvalue(0.223, &s, &p);
        assert!((mu + 0.323).abs() < 1e-12, "{mu}");
        let f2 = curvature(s.k_star, &p).unwrap();
        assert!((mu * (mu - 0.223) + f2 * s.c_star / p.theta).abs() < 1e-12);
    }

    #[test]
    fn retarget_example() {
        let p = standard();
        let k_old = saddle_point(0.223, &p).unwrap().k_star;
        let path = retarget_path(k_old, 0.2, 3.0, &p).unwrap();
        assert!((path.arm_slope(&p) - 0.5).abs() < 1e-12);
        assert!((path.c_anchor - 1.198_132_829_798_042_7).abs() < 1e-12);
        assert_eq!(path.k_anchor, k_old);
        assert_eq!(path.t_anchor, 3.0);

        let (k, c) = path_eval(&path, 4.0).unwrap();
        assert!((k - 2.495_146_649_217_903).abs() < 1e-12);
        assert!((c - 1.247_573_324_608_951_6).abs() < 1e-12);
    }

    #[test]
    fn retarget_at_target_is_constant() {
        let p = standard();
        let s = saddle_point(0.31, &p).unwrap();
        let path = retarget_path(s.k_star, 0.31, 0.0, &p).unwrap();
        assert!((path.c_anchor - s.c_star).abs() < 1e-14);
        for t in [0.0, 0.5, 7.0] {
            let (k, c) = path_eval(&path, t).unwrap();
            assert!((k - s.k_star).abs() < 1e-14 && (c - s.c_star).abs() < 1e-14);
        }
    }

    #[test]
    fn retarget_rejects_negative_consumption() {
        // With theta = 0.25 the linear arm crosses c = 0 at k of about 0.66.
        let p = EconomyParams::new(0.5, 0.1, 0.25).unwrap();
        let err = retarget_path(0.1, 0.2, 0.0, &p).unwrap_err();
        assert!(matches!(err, Error::ModelValidity(_)), "{err}");
    }

    #[test]
    fn path_eval_limits_and_domain() {
        let p = standard();
        let path = retarget_path(2.0, 0.2, 1.0, &p).unwrap();
        assert_eq!(
            path_eval(&path, 1.0).unwrap(),
            (path.k_anchor, path.c_anchor)
        );
        let far = 1.0 + 60.0 / path.mu.abs();
        let (k, c) = path_eval(&path, far).unwrap();
        assert!((k - path.k_target).abs() < 1e-9 && (c - path.c_target).abs() < 1e-9);
        assert!(path_eval(&path, 0.5).is_err());
    }

    #[test]
    fn absolute_clock_starts_partway() {
        let p = standard();
        let k_old = saddle_point(0.223, &p).unwrap().k_star;
        let local = retarget_path(k_old, 0.2, 2.0, &p).unwrap();
        let abs = retarget_path_on(k_old, 0.2, 2.0, &p, PathClock::Absolute).unwrap();
        assert_eq!(abs.c_anchor, local.c_anchor);
        // At the change the absolute path already sits where the local one
        // is after two years.
        let (k, c) = path_eval(&abs, 2.0).unwrap();
        let (k2, c2) = path_eval(&local, 4.0).unwrap();
        assert!((k - k2).abs() < 1e-12 && (c - c2).abs() < 1e-12);
        // A change at t = 0 is identical under both clocks.
        let a0 = retarget_path_on(k_old, 0.2, 0.0, &p, PathClock::Absolute).unwrap();
        let l0 = retarget_path(k_old, 0.2, 0.0, &p).unwrap();
        assert_eq!(path_eval(&a0, 1.5).unwrap(), path_eval(&l0, 1.5).unwrap());
    }

    #[test]
    fn saddle_monotone_and_capital_more_sensitive() {
        let p = standard();
        let h = 1e-3;
        let mut rho = 0.15;
        while rho < 0.3 {
            let a = saddle_point(rho, &p).unwrap();
            let b = saddle_point(rho + h, &p).unwrap();
            assert!(b.k_star < a.k_star && b.c_star < a.c_star);
            assert!((b.k_star - a.k_star).abs() > (b.c_star - a.c_star).abs());
            rho += h;
        }
    }

    proptest! {
        #[test]
        fn saddle_is_a_fixed_point(rho in 0.05f64..=1.0) {
            let p = standard();
            let s = saddle_point(rho, &p).unwrap();
            let (dk, dc) = rhs(s.k_star, s.c_star, rho, &p).unwrap();
            prop_assert!(dk.abs() < 1e-10 && dc.abs() < 1e-10);
        }

        #[test]
        fn eigenvalue_solves_characteristic_equation(
            rho in 0.05f64..=1.0, alpha in 0.1f64..0.9, delta in 0.0f64..0.3, theta in 0.2f64..3.0,
        ) {
            let p = EconomyParams::new(alpha, delta, theta).unwrap();
            let s = saddle_point(rho, &p).unwrap();
            let mu = stable_eigenvalue(rho, &s, &p);
            let q = curvature(s.k_star, &p).unwrap() * s.c_star / theta;
            prop_assert!(mu < 0.0);
            prop_assert!((mu * mu - rho * mu + q).abs() < 1e-10);
        }

        #[test]
        fn anchor_lies_on_stable_arm(k in 1.5f64..4.0, rho in 0.15f64..0.3) {
            let p = standard();
            let path = retarget_path(k, rho, 0.0, &p).unwrap();
            let slope = path.arm_slope(&p);
            prop_assert!(slope > 0.0);
            let lhs = path.c_anchor - path.c_target;
            let rhs = slope * (path.k_anchor - path.k_target);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
