//! The simulation loop.
//!
//! Time advances on an integer step grid `t = step * dt`. Every
//! `t_p / dt` steps one uniformly random pair interacts, both partners'
//! discount rates change, and their adjustment paths are re-anchored at their
//! current capital. Between events every agent integrates its discounted
//! utility independently, which is where the parallelism lives. All random
//! draws happen on the serial event path, so serial and parallel execution
//! give bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::econ::{
    path_eval, retarget_path_on, saddle_point, stable_eigenvalue, AdjustmentPath, EconomyParams,
    PathClock,
};
use crate::error::{Error, Result, Violation};
use crate::interaction::{interact, ChosenSet, InteractionMode, InteractionParams, Party};
use crate::utility::{integrand, tail_utility, Crra, GridWalker, UtilityAccumulator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub n_agents: usize,
    /// Step length in years.
    pub dt: f64,
    /// Interaction period in years; an integer multiple of `dt`.
    pub t_p: f64,
    /// Horizon in years.
    pub t_max: f64,
    /// Time origin of every adjustment path.
    pub path_clock: PathClock,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            n_agents: 1000,
            dt: 1.0 / 8760.0,
            t_p: 1.0 / 365.0,
            t_max: 10.0,
            path_clock: PathClock::Absolute,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Initial {
    pub rho0: f64,
    pub u0: f64,
}

impl Default for Initial {
    fn default() -> Self {
        Self {
            rho0: 0.223,
            u0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    /// Agents whose trajectories are recorded.
    pub sample_agents: Vec<usize>,
    /// Steps between recorded samples.
    pub sample_stride: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            sample_agents: (0..10).collect(),
            sample_stride: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub schedule: Schedule,
    pub initial: Initial,
    pub econ: EconomyParams,
    pub interaction: InteractionParams,
    pub output: Sampling,
    /// Set per run from the scenario's seed list.
    #[serde(skip)]
    pub seed: u64,
}

/// Integer ratio `a / b` if it is within `1e-9` relative of one.
fn integer_ratio(a: f64, b: f64) -> Option<u64> {
    let r = a / b;
    let rounded = r.round();
    (rounded >= 1.0 && (r - rounded).abs() <= 1e-9 * rounded).then_some(rounded as u64)
}

impl SimConfig {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |key: &str, constraint: String| {
            out.push(Violation {
                key: key.to_string(),
                constraint,
            })
        };
        let s = &self.schedule;
        if s.n_agents < 2 {
            push("schedule.n_agents", "must be >= 2".into());
        }
        let dt_ok = s.dt > 0.0 && s.dt.is_finite();
        if !dt_ok {
            push("schedule.dt", "must be finite and > 0".into());
        }
        if !(s.t_p > 0.0 && s.t_p.is_finite()) {
            push("schedule.t_p", "must be finite and > 0".into());
        } else if dt_ok && integer_ratio(s.t_p, s.dt).is_none() {
            push(
                "schedule.t_p",
                "must be an integer multiple of schedule.dt".into(),
            );
        }
        if !(s.t_max > 0.0 && s.t_max.is_finite()) {
            push("schedule.t_max", "must be finite and > 0".into());
        }
        if !(self.initial.rho0 > 0.0 && self.initial.rho0.is_finite()) {
            push("initial.rho0", "must be finite and > 0".into());
        }
        if !self.initial.u0.is_finite() {
            push("initial.u0", "must be finite".into());
        }
        for (key, constraint) in self.econ.violations() {
            push(&format!("econ.{key}"), constraint.into());
        }
        out.extend(self.interaction.violations());
        let mut push = |key: &str, constraint: String| {
            out.push(Violation {
                key: key.to_string(),
                constraint,
            })
        };
        if self.output.sample_stride == 0 {
            push("output.sample_stride", "must be >= 1".into());
        }
        if let Some(bad) = self.output.sample_agents.iter().find(|&&a| a >= s.n_agents) {
            push(
                "output.sample_agents",
                format!("agent id {bad} is out of range for {} agents", s.n_agents),
            );
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn steps_per_event(&self) -> u64 {
        integer_ratio(self.schedule.t_p, self.schedule.dt).expect("validated")
    }

    /// `ceil(t_max / dt)`, tolerant of representation error in the ratio.
    pub fn total_steps(&self) -> u64 {
        let r = self.schedule.t_max / self.schedule.dt;
        let rounded = r.round();
        if (r - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded as u64
        } else {
            r.ceil() as u64
        }
    }

    /// `floor(t_max / t_p)` in step arithmetic.
    pub fn total_events(&self) -> u64 {
        self.total_steps() / self.steps_per_event()
    }
}

/// Serial or data-parallel agent updates. Results are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub step: u64,
    pub t: f64,
    pub agent: usize,
    pub rho: f64,
    pub k: f64,
    pub c: f64,
    /// Utility integrated from 0 to `t`.
    pub utility: f64,
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub rho: f64,
    pub path: AdjustmentPath,
    pub utility: UtilityAccumulator,
    pub n_interactions: u32,
    /// Step index matching `utility.t_last`.
    step_last: u64,
    /// Discounted integrand at `utility.t_last`, on the path in force then.
    f_last: f64,
    samples: Option<Vec<Sample>>,
}

impl AgentState {
    pub fn step_last(&self) -> u64 {
        self.step_last
    }

    fn record(&mut self, step: u64, t: f64, decay: f64) {
        if let Some(buf) = self.samples.as_mut() {
            let (k, c) = self.path.at_decay(decay);
            buf.push(Sample {
                step,
                t,
                agent: self.id,
                rho: self.rho,
                k,
                c,
                utility: self.utility.total,
            });
        }
    }

    /// Integrates utility forward to step `to`.
    fn advance_to(&mut self, to: u64, dt: f64, stride: u64, crra: Crra) {
        if to <= self.step_last {
            return;
        }
        let t0 = self.step_last as f64 * dt;
        let path = self.path;
        let mut walker = GridWalker::new(&path, self.rho, crra, t0, dt);
        let mut f_prev = self.f_last;
        let mut total = self.utility.total;
        let mut step = self.step_last;
        let sampled = self.samples.is_some();
        while step < to {
            step += 1;
            let (_, _, f) = walker.advance();
            total += 0.5 * dt * (f_prev + f);
            f_prev = f;
            if sampled && step.is_multiple_of(stride) {
                let decay = walker.decay();
                self.utility.total = total;
                self.record(step, step as f64 * dt, decay);
            }
        }
        self.utility.total = total;
        self.utility.t_last = to as f64 * dt;
        self.step_last = to;
        self.f_last = f_prev;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub step: u64,
    pub t: f64,
    pub i: usize,
    pub j: usize,
    pub rho_i_old: f64,
    pub rho_i_new: f64,
    pub rho_j_old: f64,
    pub rho_j_new: f64,
    pub mode: ChosenSet,
}

/// Mutable simulation state.
#[derive(Debug, Clone)]
pub struct Population {
    config: SimConfig,
    agents: Vec<AgentState>,
    rng: ChaCha8Rng,
    step: u64,
    events: Vec<EventRecord>,
    floor_hits: u64,
    steps_per_event: u64,
    crra: Crra,
    execution: Execution,
}

#[cfg(feature = "parallel")]
fn for_each_agent<F>(agents: &mut [AgentState], execution: Execution, f: F)
where
    F: Fn(&mut AgentState) + Sync + Send,
{
    use rayon::prelude::*;
    match execution {
        Execution::Parallel => agents.par_iter_mut().for_each(f),
        Execution::Serial => agents.iter_mut().for_each(f),
    }
}

#[cfg(not(feature = "parallel"))]
fn for_each_agent<F>(agents: &mut [AgentState], _execution: Execution, f: F)
where
    F: Fn(&mut AgentState),
{
    agents.iter_mut().for_each(f)
}

#[cfg(feature = "parallel")]
fn map_agents<T, F>(agents: &[AgentState], execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&AgentState) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match execution {
        Execution::Parallel => agents.par_iter().map(f).collect(),
        Execution::Serial => agents.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_agents<T, F>(agents: &[AgentState], _execution: Execution, f: F) -> Vec<T>
where
    F: Fn(&AgentState) -> T,
{
    agents.iter().map(f).collect()
}

impl Population {
    /// Builds `n_agents` identical agents at the saddle point for `rho0`.
    pub fn init(config: &SimConfig) -> Result<Self> {
        Self::init_with(config, Execution::default())
    }

    pub fn init_with(config: &SimConfig, execution: Execution) -> Result<Self> {
        config.validate()?;
        let econ = config.econ;
        let rho0 = config.initial.rho0;
        let state = saddle_point(rho0, &econ)?;
        let mu = stable_eigenvalue(rho0, &state, &econ);
        let path = AdjustmentPath::at_rest(state, mu, 0.0);
        let crra = Crra::new(econ.theta);
        let f0 = integrand(&path, rho0, 0.0, &crra);
        let mut agents: Vec<AgentState> = (0..config.schedule.n_agents)
            .map(|id| AgentState {
                id,
                rho: rho0,
                path,
                utility: UtilityAccumulator::new(config.initial.u0, 0.0),
                n_interactions: 0,
                step_last: 0,
                f_last: f0,
                samples: None,
            })
            .collect();
        for &id in &config.output.sample_agents {
            let agent = &mut agents[id];
            if agent.samples.is_none() {
                agent.samples = Some(Vec::new());
                agent.record(0, 0.0, 1.0);
            }
        }
        Ok(Self {
            config: config.clone(),
            agents,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            step: 0,
            events: Vec::new(),
            floor_hits: 0,
            steps_per_event: config.steps_per_event(),
            crra,
            execution,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn current_step(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.schedule.dt
    }

    /// Times the floor on the discount rate was applied.
    pub fn floor_hits(&self) -> u64 {
        self.floor_hits
    }

    /// `(k, c)` of agent `id` at the current time.
    pub fn state_of(&self, id: usize) -> (f64, f64) {
        path_eval(&self.agents[id].path, self.time()).expect("paths never start in the future")
    }

    /// Advances exactly one step. `step_index` must be the next step.
    pub fn step(&mut self, step_index: u64) -> Result<()> {
        if step_index != self.step + 1 {
            return Err(Error::Contract(format!(
                "expected step {}, got {step_index}",
                self.step + 1
            )));
        }
        if step_index.is_multiple_of(self.steps_per_event) {
            self.fire_event(step_index)?;
        }
        self.advance_all(step_index);
        Ok(())
    }

    fn advance_all(&mut self, to: u64) {
        let dt = self.config.schedule.dt;
        let stride = self.config.output.sample_stride;
        let crra = self.crra;
        for_each_agent(&mut self.agents, self.execution, |a| {
            a.advance_to(to, dt, stride, crra)
        });
        self.step = to;
    }

    /// Draws a pair, updates both rates and re-anchors both paths at `step`.
    ///
    /// Draw order: `i` uniform in `[0, n)`, then `j` uniform in `[0, n - 1)`
    /// shifted past `i`, then one fair coin in mixed mode.
    fn fire_event(&mut self, step: u64) -> Result<()> {
        let n = self.agents.len();
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let base = self.config.interaction;
        let chosen = match base.mode {
            InteractionMode::Fixed => ChosenSet::Fixed,
            InteractionMode::Mixed => {
                if self.rng.gen_bool(0.5) {
                    ChosenSet::Capital
                } else {
                    ChosenSet::Consumption
                }
            }
        };
        let params = base.resolve(chosen);
        let t = step as f64 * self.config.schedule.dt;
        let econ = self.config.econ;

        let party = |a: &AgentState| -> Party {
            let (k, c) = path_eval(&a.path, t).expect("paths never start in the future");
            Party { rho: a.rho, k, c }
        };
        let pi = party(&self.agents[i]);
        let pj = party(&self.agents[j]);
        let out = interact(&pi, &pj, &params).map_err(|e| Error::Agent {
            agent: i,
            step,
            source: Box::new(e),
        })?;
        self.floor_hits += u64::from(out.clamped_i) + u64::from(out.clamped_j);

        let clock = self.config.schedule.path_clock;
        let retarget = |id: usize, k: f64, rho: f64, econ: &EconomyParams| {
            retarget_path_on(k, rho, t, econ, clock).map_err(|e| Error::Agent {
                agent: id,
                step,
                source: Box::new(e),
            })
        };
        let path_i = retarget(i, pi.k, out.rho_i, &econ)?;
        let path_j = retarget(j, pj.k, out.rho_j, &econ)?;
        for (id, rho, path) in [(i, out.rho_i, path_i), (j, out.rho_j, path_j)] {
            let a = &mut self.agents[id];
            a.rho = rho;
            a.path = path;
            a.n_interactions += 1;
        }
        self.events.push(EventRecord {
            step,
            t,
            i,
            j,
            rho_i_old: pi.rho,
            rho_i_new: out.rho_i,
            rho_j_old: pj.rho,
            rho_j_new: out.rho_j,
            mode: chosen,
        });
        Ok(())
    }

    /// Runs every remaining step. Agents advance in blocks between events.
    pub fn run_to_end(&mut self) -> Result<()> {
        let total = self.config.total_steps();
        let spe = self.steps_per_event;
        while self.step < total {
            let next_event = (self.step / spe + 1) * spe;
            if next_event <= total {
                self.advance_all(next_event - 1);
                self.fire_event(next_event)?;
                let block_end = (next_event + spe - 1).min(total);
                self.advance_all(block_end);
            } else {
                self.advance_all(total);
            }
        }
        Ok(())
    }

    /// Final per-agent values with the infinite-horizon tail added.
    pub fn finish(self) -> Result<RunResult> {
        let t_max = self.time();
        let theta = self.config.econ.theta;
        let dt = self.config.schedule.dt;
        let tails = map_agents(&self.agents, self.execution, |a| {
            tail_utility(&a.path, a.rho, t_max, theta, dt)
        });
        let mut agents = Vec::with_capacity(self.agents.len());
        let mut timeseries = Vec::new();
        for (a, tail) in self.agents.into_iter().zip(tails) {
            let (k, c) = path_eval(&a.path, t_max)?;
            agents.push(AgentFinal {
                id: a.id,
                rho: a.rho,
                k,
                c,
                utility: a.utility.total + tail?,
                n_interactions: a.n_interactions,
            });
            if let Some(s) = a.samples {
                timeseries.extend(s);
            }
        }
        timeseries.sort_by_key(|s| (s.step, s.agent));
        Ok(RunResult {
            seed: self.config.seed,
            config: self.config,
            t_max,
            agents,
            events: self.events,
            timeseries,
            floor_hits: self.floor_hits,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentFinal {
    pub id: usize,
    pub rho: f64,
    pub k: f64,
    pub c: f64,
    /// Lifetime utility over the infinite horizon.
    pub utility: f64,
    pub n_interactions: u32,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub config: SimConfig,
    pub t_max: f64,
    pub agents: Vec<AgentFinal>,
    pub events: Vec<EventRecord>,
    pub timeseries: Vec<Sample>,
    pub floor_hits: u64,
}

impl RunResult {
    pub fn column(&self, f: impl Fn(&AgentFinal) -> f64) -> Vec<f64> {
        self.agents.iter().map(f).collect()
    }
}

pub fn run(config: &SimConfig) -> Result<RunResult> {
    run_with(config, Execution::default())
}

pub fn run_with(config: &SimConfig, execution: Execution) -> Result<RunResult> {
    let mut pop = Population::init_with(config, execution)?;
    pop.run_to_end()?;
    pop.finish()
}
