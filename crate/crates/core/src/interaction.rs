//! Pairwise discount-rate update from capital comparison, consumption
//! comparison and a shared normative rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Lower bound applied to every updated discount rate.
pub const RHO_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    /// Every event uses `eps_k`, `eps_c` and `eps_rho` together.
    Fixed,
    /// Each event flips a fair coin between a capital-only set (`eps_c = 0`)
    /// and a consumption-only set (`eps_k = 0`). `eps_rho` applies to both.
    Mixed,
}

/// Which parameter set an event actually used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChosenSet {
    Fixed,
    Capital,
    Consumption,
}

impl ChosenSet {
    pub fn as_str(self) -> &'static str {
        match self {
            ChosenSet::Fixed => "fixed",
            ChosenSet::Capital => "capital",
            ChosenSet::Consumption => "consumption",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionParams {
    pub eps_k: f64,
    pub eps_c: f64,
    pub eps_rho: f64,
    pub beta_k: f64,
    pub beta_c: f64,
    pub rho_norm: f64,
    pub mode: InteractionMode,
}

impl Default for InteractionParams {
    fn default() -> Self {
        Self {
            eps_k: 0.0,
            eps_c: 0.0,
            eps_rho: 0.0,
            beta_k: 1.1,
            beta_c: 1.1,
            rho_norm: 0.2,
            mode: InteractionMode::Fixed,
        }
    }
}

impl InteractionParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |key: &str, constraint: &str| {
            out.push(Violation {
                key: format!("interaction.{key}"),
                constraint: constraint.to_string(),
            })
        };
        for (key, v) in [
            ("eps_k", self.eps_k),
            ("eps_c", self.eps_c),
            ("eps_rho", self.eps_rho),
        ] {
            if !(0.0..=1.0).contains(&v) {
                push(key, "must lie in [0, 1]");
            }
        }
        for (key, v) in [("beta_k", self.beta_k), ("beta_c", self.beta_c)] {
            if !(v >= 1.0 && v.is_finite()) {
                push(key, "must be finite and >= 1");
            }
        }
        if !(self.rho_norm > 0.0 && self.rho_norm.is_finite()) {
            push("rho_norm", "must be finite and > 0");
        }
        out
    }

    /// The effective parameters for one event.
    pub fn resolve(&self, chosen: ChosenSet) -> InteractionParams {
        match chosen {
            ChosenSet::Fixed => *self,
            ChosenSet::Capital => InteractionParams {
                eps_c: 0.0,
                ..*self
            },
            ChosenSet::Consumption => InteractionParams {
                eps_k: 0.0,
                ..*self
            },
        }
    }
}

/// One side of an interaction: an agent's state just before the event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Party {
    pub rho: f64,
    pub k: f64,
    pub c: f64,
}

/// Result of an interaction for both parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub rho_i: f64,
    pub rho_j: f64,
    /// Whether the floor clamped either result.
    pub clamped_i: bool,
    pub clamped_j: bool,
}

fn factor(me: &Party, other: &Party, p: &InteractionParams) -> f64 {
    1.0 - p.eps_k * (p.beta_k * other.k - me.k) / me.k
        + p.eps_c * (p.beta_c * other.c - me.c) / me.c
        + p.eps_rho * (p.rho_norm - me.rho) / me.rho
}

fn check(party: &Party, who: &str) -> Result<()> {
    for (name, v) in [("rho", party.rho), ("k", party.k), ("c", party.c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(
                "interact",
                format!("{name}_{who} must be positive, got {v}"),
            ));
        }
    }
    Ok(())
}

/// Updates both discount rates from the same pre-event snapshot.
pub fn interact(i: &Party, j: &Party, params: &InteractionParams) -> Result<Outcome> {
    check(i, "i")?;
    check(j, "j")?;
    let raw_i = i.rho * factor(i, j, params);
    let raw_j = j.rho * factor(j, i, params);
    Ok(Outcome {
        rho_i: raw_i.max(RHO_MIN),
        rho_j: raw_j.max(RHO_MIN),
        clamped_i: raw_i < RHO_MIN,
        clamped_j: raw_j < RHO_MIN,
    })
}
