//! Scenario documents (TOML), built-in presets and parameter sweeps.
//!
//! A scenario document looks like
//!
//! ```toml
//! name = "fig2"
//! n_seeds = 10
//! base_seed = 1
//!
//! [schedule]
//! n_agents = 1000
//! dt = 0.00011415525114155251   # 1 / 8760
//! t_p = 0.0027397260273972603   # 1 / 365
//! t_max = 10.0
//! path_clock = "absolute"
//!
//! [initial]
//! rho0 = 0.223
//! u0 = 0.0
//!
//! [econ]
//! alpha = 0.5
//! delta = 0.1
//! theta = 0.5
//!
//! [interaction]
//! eps_k = 0.1
//! mode = "fixed"
//!
//! [output]
//! sample_agents = [0, 1, 2]
//! sample_stride = 24
//! ```
//!
//! Every key is optional; missing keys take the defaults of the reference
//! parameterization. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::econ::EconomyParams;
use crate::engine::{Initial, Sampling, Schedule, SimConfig};
use crate::error::{Error, Result, Violation};
use crate::interaction::{InteractionMode, InteractionParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub n_seeds: u32,
    pub base_seed: u64,
    pub schedule: Schedule,
    pub initial: Initial,
    pub econ: EconomyParams,
    pub interaction: InteractionParams,
    pub output: Sampling,
}

impl Default for Scenario {
    fn default() -> Self {
        let c = SimConfig::default();
        Self {
            name: "custom".into(),
            n_seeds: 1,
            base_seed: 1,
            schedule: c.schedule,
            initial: c.initial,
            econ: c.econ,
            interaction: c.interaction,
            output: c.output,
        }
    }
}

impl Scenario {
    /// Seeds `base_seed, base_seed + 1, ...`.
    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        let base = self.base_seed;
        (0..u64::from(self.n_seeds)).map(move |s| base.wrapping_add(s))
    }

    pub fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            schedule: self.schedule.clone(),
            initial: self.initial.clone(),
            econ: self.econ,
            interaction: self.interaction,
            output: self.output.clone(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = self.sim_config(self.base_seed).violations();
        if self.n_seeds == 0 {
            v.push(Violation {
                key: "n_seeds".into(),
                constraint: "must be >= 1".into(),
            });
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            v.push(Violation {
                key: "name".into(),
                constraint: "must be non-empty and contain no path separators".into(),
            });
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    fn with_eps(name: &str, eps_k: f64, eps_c: f64, eps_rho: f64) -> Self {
        let mut s = Scenario {
            name: name.to_string(),
            n_seeds: if eps_k == 0.0 && eps_c == 0.0 && eps_rho == 0.0 {
                1
            } else {
                PRESET_SEEDS
            },
            ..Default::default()
        };
        s.interaction.eps_k = eps_k;
        s.interaction.eps_c = eps_c;
        s.interaction.eps_rho = eps_rho;
        s
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario always serializes")
    }
}

pub const PRESET_NAMES: [&str; 6] = ["baseline", "fig2", "fig4", "fig6-grid", "fig9e", "fig9g"];

/// Seeds per stochastic preset; the no-interaction baseline is deterministic.
pub const PRESET_SEEDS: u32 = 10;

/// One-line descriptions for `presets`.
pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "baseline" => "no interaction (all eps = 0)",
        "fig2" => "capital comparison: eps_k = 0.1",
        "fig4" => "consumption comparison: eps_c = 0.1",
        "fig6-grid" => "12 cells: eps_k or eps_c in {0.1, 0.2, 0.3}, eps_rho in {0, 0.1}",
        "fig9e" => "mixed: each event is eps_k = 0.3 or eps_c = 0.3 by coin flip",
        "fig9g" => "fig9e with eps_rho = 0.1",
        _ => return None,
    })
}

fn grid_cell_name(eps_k: f64, eps_c: f64, eps_rho: f64) -> String {
    let channel = if eps_k > 0.0 {
        format!("eps_k={eps_k}")
    } else {
        format!("eps_c={eps_c}")
    };
    format!("fig6__{channel},eps_rho={eps_rho}")
}

/// The twelve cells: eps_k sweep, eps_c sweep, each with and without the norm.
pub fn fig6_grid() -> Vec<Scenario> {
    let mut out = Vec::with_capacity(12);
    for eps_rho in [0.0, 0.1] {
        for eps in [0.1, 0.2, 0.3] {
            out.push(Scenario::with_eps(
                &grid_cell_name(eps, 0.0, eps_rho),
                eps,
                0.0,
                eps_rho,
            ));
        }
        for eps in [0.1, 0.2, 0.3] {
            out.push(Scenario::with_eps(
                &grid_cell_name(0.0, eps, eps_rho),
                0.0,
                eps,
                eps_rho,
            ));
        }
    }
    out
}

/// Resolves a built-in preset to its scenario list.
pub fn preset(name: &str) -> Result<Vec<Scenario>> {
    let mixed = |name: &str, eps_rho: f64| {
        let mut s = Scenario::with_eps(name, 0.3, 0.3, eps_rho);
        s.interaction.mode = InteractionMode::Mixed;
        s
    };
    Ok(match name {
        "baseline" => vec![Scenario::with_eps("baseline", 0.0, 0.0, 0.0)],
        "fig2" => vec![Scenario::with_eps("fig2", 0.1, 0.0, 0.0)],
        "fig4" => vec![Scenario::with_eps("fig4", 0.0, 0.1, 0.0)],
        "fig6-grid" => fig6_grid(),
        "fig9e" => vec![mixed("fig9e", 0.0)],
        "fig9g" => vec![mixed("fig9g", 0.1)],
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(existing) if existing.is_table() && v.is_table() => merge(existing, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn from_value(value: toml::Value) -> Result<Scenario> {
    let scenario: Scenario = value
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.message().to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

fn parse_table(text: &str) -> Result<toml::Value> {
    text.parse::<toml::Table>()
        .map(toml::Value::Table)
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a scenario document on top of the default parameterization.
pub fn parse_config(text: &str) -> Result<Scenario> {
    parse_config_over(text, &Scenario::default())
}

/// Parses a scenario document whose keys override `base`.
pub fn parse_config_over(text: &str, base: &Scenario) -> Result<Scenario> {
    let mut value = toml::Value::try_from(base).expect("scenario always serializes");
    merge(&mut value, parse_table(text)?);
    from_value(value)
}

/// Parses a `key=v1,v2,...` sweep axis. Values are TOML literals.
pub fn parse_axis(spec: &str) -> Result<(String, Vec<toml::Value>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("sweep axis `{spec}` must look like key=v1,v2")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Parse(format!(
            "sweep axis `{spec}` has an empty key"
        )));
    }
    let values = values
        .split(',')
        .map(|v| {
            let v = v.trim();
            format!("x = {v}")
                .parse::<toml::Table>()
                .map(|mut t| t.remove("x").expect("just inserted"))
                .or_else(|_| Ok(toml::Value::String(v.to_string())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((key.to_string(), values))
}

fn set_dotted(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Parse(format!("`{key}` does not name a scenario field")))?;
        node = table
            .get_mut(*part)
            .ok_or_else(|| Error::Parse(format!("unknown section `{part}` in `{key}`")))?;
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Parse(format!("`{key}` does not name a scenario field")))?;
    let last = parts[parts.len() - 1];
    if !table.contains_key(last) {
        return Err(Error::Parse(format!("unknown key `{key}`")));
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn render(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Cartesian product of sweep axes applied to `base`, one scenario per cell.
pub fn expand_sweep(base: &Scenario, axes: &[(String, Vec<toml::Value>)]) -> Result<Vec<Scenario>> {
    let root = toml::Value::try_from(base).expect("scenario always serializes");
    let mut cells = vec![(root, Vec::<String>::new())];
    for (key, values) in axes {
        let mut next = Vec::with_capacity(cells.len() * values.len());
        for (value, label) in &cells {
            for v in values {
                let mut value = value.clone();
                set_dotted(&mut value, key, v.clone())?;
                let mut label = label.clone();
                let short = key.rsplit('.').next().unwrap_or(key);
                label.push(format!("{short}={}", render(v)));
                next.push((value, label));
            }
        }
        cells = next;
    }
    cells
        .into_iter()
        .map(|(mut value, label)| {
            if !label.is_empty() {
                let name = format!("{}__{}", base.name, label.join(","));
                set_dotted(&mut value, "name", toml::Value::String(name))?;
            }
            from_value(value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::PathClock;

    #[test]
    fn empty_document_gets_defaults() {
        let s = parse_config("").unwrap();
        assert_eq!(s.schedule.n_agents, 1000);
        assert_eq!(s.schedule.dt, 1.0 / 8760.0);
        assert_eq!(s.schedule.t_p, 1.0 / 365.0);
        assert_eq!(s.schedule.t_max, 10.0);
        assert_eq!(s.schedule.path_clock, PathClock::Absolute);
        assert_eq!((s.initial.rho0, s.initial.u0), (0.223, 0.0));
        assert_eq!((s.econ.alpha, s.econ.delta, s.econ.theta), (0.5, 0.1, 0.5));
        let i = s.interaction;
        assert_eq!((i.rho_norm, i.beta_k, i.beta_c), (0.2, 1.1, 1.1));
        assert_eq!((i.eps_k, i.eps_c, i.eps_rho), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_document_over_fig2() {
        let base = &preset("fig2").unwrap()[0];
        let s = parse_config_over("", base).unwrap();
        assert_eq!(
            (
                s.interaction.eps_k,
                s.interaction.eps_c,
                s.interaction.eps_rho
            ),
            (0.1, 0.0, 0.0)
        );
        assert_eq!(s.interaction.beta_k, 1.1);
        assert_eq!(s.name, "fig2");
    }

    #[test]
    fn overlay_keeps_untouched_keys() {
        let base = &preset("fig4").unwrap()[0];
        let s = parse_config_over("[interaction]\neps_rho = 0.1\n", base).unwrap();
        assert_eq!((s.interaction.eps_c, s.interaction.eps_rho), (0.1, 0.1));
    }

    #[test]
    fn t_p_must_be_a_multiple_of_dt() {
        let err = parse_config("[schedule]\nt_p = 0.0001\n").unwrap_err();
        let Error::Config(v) = err else {
            panic!("{err}")
        };
        assert_eq!(v[0].key, "schedule.t_p");
        assert!(v[0].constraint.contains("multiple"));
    }

    #[test]
    fn unknown_keys_and_growth_are_rejected() {
        let err = parse_config("[econ]\ngamma = 1.0\n").unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("gamma")),
            "{err}"
        );
        let err = parse_config("[econ]\nkappa = 0.02\n").unwrap_err();
        assert!(err.to_string().contains("econ.kappa"), "{err}");
        assert!(parse_config("not toml at all = = =").is_err());
    }

    #[test]
    fn every_violation_is_reported() {
        let err =
            parse_config("[interaction]\neps_k = 2.0\nbeta_c = 0.5\n[schedule]\nn_agents = 1\n")
                .unwrap_err();
        let Error::Config(v) = err else {
            panic!("{err}")
        };
        let keys: Vec<_> = v.iter().map(|v| v.key.as_str()).collect();
        assert_eq!(
            keys,
            [
                "schedule.n_agents",
                "interaction.eps_k",
                "interaction.beta_c",
                "output.sample_agents"
            ]
        );
    }

    #[test]
    fn fig6_grid_is_the_twelve_cases() {
        let grid = preset("fig6-grid").unwrap();
        assert_eq!(grid.len(), 12);
        let cells: Vec<_> = grid
            .iter()
            .map(|s| {
                (
                    s.interaction.eps_k,
                    s.interaction.eps_c,
                    s.interaction.eps_rho,
                )
            })
            .collect();
        for eps_rho in [0.0, 0.1] {
            for e in [0.1, 0.2, 0.3] {
                assert!(cells.contains(&(e, 0.0, eps_rho)));
                assert!(cells.contains(&(0.0, e, eps_rho)));
            }
        }
        let mut names: Vec<_> = grid.iter().map(|s| s.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 12);
    }

    #[test]
    fn mixed_presets() {
        let e = &preset("fig9e").unwrap()[0];
        assert_eq!(e.interaction.mode, InteractionMode::Mixed);
        assert_eq!(
            (
                e.interaction.eps_k,
                e.interaction.eps_c,
                e.interaction.eps_rho
            ),
            (0.3, 0.3, 0.0)
        );
        let g = &preset("fig9g").unwrap()[0];
        assert_eq!(g.interaction.eps_rho, 0.1);
        assert!(matches!(preset("fig99"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn round_trip_every_preset() {
        for name in PRESET_NAMES {
            for s in preset(name).unwrap() {
                assert_eq!(parse_config(&s.to_toml()).unwrap(), s, "{name}");
            }
        }
    }

    #[test]
    fn sweep_expands_cartesian_product() {
        let base = &preset("fig4").unwrap()[0];
        let axes = vec![
            parse_axis("interaction.eps_c=0.1,0.2").unwrap(),
            parse_axis("interaction.eps_rho=0,0.1").unwrap(),
        ];
        let cells = expand_sweep(base, &axes).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[3].interaction.eps_c, 0.2);
        assert_eq!(cells[3].interaction.eps_rho, 0.1);
        assert_eq!(cells[3].name, "fig4__eps_c=0.2,eps_rho=0.1");
    }

    #[test]
    fn sweep_rejects_bad_keys_and_values() {
        let base = Scenario::default();
        let axis = parse_axis("interaction.eps_q=0.1").unwrap();
        assert!(expand_sweep(&base, &[axis]).is_err());
        let axis = parse_axis("interaction.eps_k=1.5").unwrap();
        assert!(matches!(
            expand_sweep(&base, &[axis]),
            Err(Error::Config(_))
        ));
        let axis = parse_axis("schedule.path_clock=since_change").unwrap();
        let cells = expand_sweep(&base, &[axis]).unwrap();
        assert_eq!(cells[0].schedule.path_clock, PathClock::SinceChange);
        assert!(parse_axis("no-equals").is_err());
    }
}
