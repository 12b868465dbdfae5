//! Length-constrained gradient descent with an embeddedness guard.

use std::fmt::Write as _;
use std::path::Path;

use log::{debug, info};
use serde::Serialize;

use crate::energy::EnergyParams;
use crate::error::{MengerError, Result};
use crate::geometry::{min_segment_distance, resample_arclength, ClosedCurve, Point};
use crate::io::curve_to_json;
use crate::variation::{
    energy_unordered, projected_gradient_unchecked, GradientField, ProjectedGradient,
};

/// Smallest step tried before giving up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConfig {
    pub params: EnergyParams,
    pub max_steps: usize,
    /// First trial step and cap for later ones.
    pub initial_step: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Resample to equal edges every this many accepted steps; 0 disables.
    pub resample_every: usize,
    /// Trial curves closer than this times the mean edge are rejected.
    pub guard_distance_factor: f64,
    pub residual_tol: f64,
    /// Snapshot every this many accepted steps; 0 keeps only the ends.
    pub snapshot_every: usize,
}

impl FlowConfig {
    pub fn new(params: EnergyParams) -> Self {
        Self {
            params,
            max_steps: 2000,
            initial_step: 1e-2,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            resample_every: 10,
            guard_distance_factor: 0.25,
            residual_tol: 1e-3,
            snapshot_every: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(MengerError::BadParams(format!("flow config: {what}")));
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return bad("initial_step must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.guard_distance_factor.is_finite() && self.guard_distance_factor > 0.0) {
            return bad("guard_distance_factor must be positive");
        }
        if !(self.residual_tol.is_finite() && self.residual_tol > 0.0) {
            return bad("residual_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub curve: ClosedCurve,
    /// Accepted steps so far.
    pub step_index: usize,
    pub energy: f64,
    pub residual: f64,
    pub lambda: f64,
    pub guard_trips: usize,
    /// Trial step for the next iteration.
    pub step_size: f64,
    /// Step accepted last, 0 before the first one.
    pub last_step: f64,
    pub target_length: f64,
    pub converged: bool,
    gradient: ProjectedGradient,
}

impl FlowState {
    /// Starts a flow at `curve`, which must be embedded and arc-length.
    pub fn new(curve: ClosedCurve, config: &FlowConfig) -> Result<Self> {
        config.validate()?;
        curve.require_arclength()?;
        let gradient = projected_gradient_unchecked(&curve, &config.params)?;
        if min_segment_distance(&curve) <= 0.0 {
            return Err(MengerError::InvalidCurve("curve is not embedded".into()));
        }
        Ok(Self {
            target_length: curve.length(),
            curve,
            step_index: 0,
            energy: gradient.energy,
            residual: gradient.residual,
            lambda: gradient.lambda,
            guard_trips: 0,
            step_size: config.initial_step,
            last_step: 0.0,
            converged: gradient.residual < config.residual_tol,
            gradient,
        })
    }

    pub fn gradient(&self) -> &ProjectedGradient {
        &self.gradient
    }

    fn refresh(&mut self, curve: ClosedCurve, params: &EnergyParams) -> Result<()> {
        let gradient = projected_gradient_unchecked(&curve, params)?;
        self.curve = curve;
        self.energy = gradient.energy;
        self.residual = gradient.residual;
        self.lambda = gradient.lambda;
        self.gradient = gradient;
        Ok(())
    }
}

enum Trial {
    Accepted(ClosedCurve, f64),
    Guard,
    Insufficient,
}

fn try_step(
    state: &FlowState,
    config: &FlowConfig,
    dir: &[Point],
    tau: f64,
    slope: f64,
) -> Result<Trial> {
    let moved = state
        .curve
        .displaced(dir, -tau)
        .and_then(|c| c.with_length(state.target_length));
    let trial = match moved {
        Ok(c) => c,
        Err(MengerError::SelfIntersection(..)) => return Ok(Trial::Insufficient),
        Err(e) => return Err(e),
    };
    let energy = match energy_unordered(&trial, &config.params) {
        Ok(e) => e,
        Err(MengerError::SelfIntersection(..)) => return Ok(Trial::Insufficient),
        Err(e) => return Err(e),
    };
    let bound = state.energy - config.armijo_c * tau * slope;
    if energy.is_nan() || energy > bound {
        return Ok(Trial::Insufficient);
    }
    if min_segment_distance(&trial) < config.guard_distance_factor * trial.mean_edge_length() {
        return Ok(Trial::Guard);
    }
    Ok(Trial::Accepted(trial, energy))
}

/// The field with its component along the vertex tangent removed, so
/// that steps do not slide vertices along the curve.
fn normal_part(curve: &ClosedCurve, field: &GradientField) -> GradientField {
    let t = curve.unit_tangents();
    let n = t.len();
    GradientField::new(
        field
            .vectors
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let tv = t[(i + n - 1) % n] + t[i];
                let norm = tv.norm();
                if norm == 0.0 {
                    *g
                } else {
                    let tv = tv / norm;
                    g - tv * g.dot(&tv)
                }
            })
            .collect(),
    )
}

/// One Armijo step along the normal part of the negative projected gradient.
///
/// A converged state is returned unchanged. A trial passing the decrease
/// test but failing the distance guard counts as a guard trip and halves
/// the step; failed decrease tests multiply it by `backtrack_factor`.
pub fn flow_step(mut state: FlowState, config: &FlowConfig) -> Result<FlowState> {
    if state.residual < config.residual_tol {
        state.converged = true;
        return Ok(state);
    }
    let dir = normal_part(&state.curve, &state.gradient.field);
    let slope = dir.pairing(&state.gradient.field);
    let mut tau = state.step_size;
    let mut backtracks = 0;
    let (curve, energy) = loop {
        if tau < MIN_STEP {
            return Err(MengerError::StepFailure {
                tau,
                backtracks,
                energy: state.energy,
            });
        }
        match try_step(&state, config, &dir.vectors, tau, slope)? {
            Trial::Accepted(c, e) => break (c, e),
            Trial::Guard => {
                state.guard_trips += 1;
                tau *= 0.5;
            }
            Trial::Insufficient => tau *= config.backtrack_factor,
        }
        backtracks += 1;
    };
    state.step_index += 1;
    state.last_step = tau;
    state.step_size = (2.0 * tau).min(config.initial_step);

    let mut curve = curve;
    if config.resample_every > 0 && state.step_index.is_multiple_of(config.resample_every) {
        let resampled = resample_arclength(&curve, curve.len())
            .and_then(|c| c.with_length(state.target_length));
        if let Ok(r) = resampled {
            match energy_unordered(&r, &config.params) {
                Ok(er) if er <= energy => {
                    debug!(
                        "resample at step {}: energy {energy:.12e} -> {er:.12e}",
                        state.step_index
                    );
                    curve = r;
                }
                Ok(er) => debug!(
                    "resample at step {} skipped: energy would rise by {:.3e}",
                    state.step_index,
                    er - energy
                ),
                Err(_) => debug!("resample at step {} skipped: degenerate", state.step_index),
            }
        }
    }
    state.refresh(curve, &config.params)?;
    state.converged = state.residual < config.residual_tol;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryRow {
    pub step: usize,
    pub energy: f64,
    pub residual: f64,
    pub lambda: f64,
    pub step_size: f64,
    pub min_dist: f64,
}

impl HistoryRow {
    fn of(state: &FlowState) -> Self {
        Self {
            step: state.step_index,
            energy: state.energy,
            residual: state.residual,
            lambda: state.lambda,
            step_size: state.last_step,
            min_dist: min_segment_distance(&state.curve),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowOutcome {
    Converged,
    MaxSteps,
    Failed(MengerError),
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub state: FlowState,
    pub history: Vec<HistoryRow>,
    /// `(accepted step, curve)` pairs.
    pub snapshots: Vec<(usize, ClosedCurve)>,
    pub outcome: FlowOutcome,
}

/// Runs `flow_step` until the residual drops below tolerance or
/// `max_steps` is reached. A curve without equal edges is resampled first.
///
/// A step failure ends the run with `FlowOutcome::Failed`, keeping the
/// history gathered so far.
pub fn run_flow(curve: ClosedCurve, config: &FlowConfig) -> Result<FlowRun> {
    config.validate()?;
    let curve = if curve.is_arclength() {
        curve
    } else {
        let r = resample_arclength(&curve, curve.len())?;
        r.with_length(curve.length())?
    };
    let mut state = FlowState::new(curve, config)?;
    let mut history = vec![HistoryRow::of(&state)];
    let mut snapshots = vec![(0, state.curve.clone())];
    let mut outcome = FlowOutcome::MaxSteps;
    loop {
        if state.converged {
            outcome = FlowOutcome::Converged;
            break;
        }
        if state.step_index >= config.max_steps {
            break;
        }
        match flow_step(state.clone(), config) {
            Ok(next) => state = next,
            Err(e) => {
                outcome = FlowOutcome::Failed(e);
                break;
            }
        }
        history.push(HistoryRow::of(&state));
        if config.snapshot_every > 0 && state.step_index.is_multiple_of(config.snapshot_every) {
            snapshots.push((state.step_index, state.curve.clone()));
        }
    }
    if snapshots.last().map(|s| s.0) != Some(state.step_index) {
        snapshots.push((state.step_index, state.curve.clone()));
    }
    info!(
        "flow finished after {} steps: energy {:.6e}, residual {:.3e}, {:?}",
        state.step_index, state.energy, state.residual, outcome
    );
    Ok(FlowRun {
        state,
        history,
        snapshots,
        outcome,
    })
}

pub const HISTORY_HEADER: &str = "step,energy,residual,lambda,step_size,min_dist";

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.step, r.energy, r.residual, r.lambda, r.step_size, r.min_dist
        );
    }
    out
}

/// Writes `history.csv` and `snap_<k>.json` into `dir`.
pub fn write_run(run: &FlowRun, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("history.csv"), history_csv(&run.history))?;
    for (k, c) in &run.snapshots {
        std::fs::write(dir.join(format!("snap_{k}.json")), curve_to_json(c))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_preset, Preset};

    fn perturbed(n: usize) -> ClosedCurve {
        make_preset(&Preset::PerturbedCircle { eps: 0.05, seed: 7 }, n, 2).unwrap()
    }

    fn config() -> FlowConfig {
        FlowConfig::new(EnergyParams::new(2.5, 2.0).unwrap())
    }

    #[test]
    fn first_step_decreases_energy_and_keeps_length() {
        let cfg = config();
        let s0 = FlowState::new(perturbed(32), &cfg).unwrap();
        let s1 = flow_step(s0.clone(), &cfg).unwrap();
        assert_eq!(s1.step_index, 1);
        assert!(s1.energy < s0.energy);
        assert!(s1.residual < s0.residual);
        assert!((s1.curve.length() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn huge_step_still_descends() {
        let mut cfg = config();
        cfg.initial_step = 1e6;
        let s0 = FlowState::new(perturbed(24), &cfg).unwrap();
        match flow_step(s0.clone(), &cfg) {
            Ok(s1) => assert!(s1.energy < s0.energy && s1.last_step < 1e6),
            Err(e) => assert!(matches!(e, MengerError::StepFailure { .. })),
        }
    }

    #[test]
    fn converged_state_is_unchanged() {
        let mut cfg = config();
        cfg.residual_tol = 1e9;
        let s0 = FlowState::new(perturbed(24), &cfg).unwrap();
        assert!(s0.converged);
        let s1 = flow_step(s0.clone(), &cfg).unwrap();
        assert_eq!(s1.curve, s0.curve);
        assert_eq!(s1.step_index, 0);
    }

    #[test]
    fn zero_steps_returns_input() {
        let mut cfg = config();
        cfg.max_steps = 0;
        let c = perturbed(24);
        let run = run_flow(c.clone(), &cfg).unwrap();
        assert_eq!(run.state.curve, c);
        assert_eq!(run.history.len(), 1);
        assert_eq!(run.outcome, FlowOutcome::MaxSteps);
    }

    #[test]
    fn run_is_monotone_and_deterministic() {
        let mut cfg = config();
        cfg.max_steps = 15;
        cfg.resample_every = 5;
        cfg.snapshot_every = 5;
        let a = run_flow(perturbed(24), &cfg).unwrap();
        let b = run_flow(perturbed(24), &cfg).unwrap();
        assert!(a.history.windows(2).all(|w| w[1].energy < w[0].energy));
        assert!(a.history.iter().all(|r| r.min_dist > 0.0));
        assert_eq!(a.history, b.history);
        assert_eq!(a.snapshots.len(), 4);
        for ((ka, ca), (kb, cb)) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(ka, kb);
            assert_eq!(ca, cb);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = config();
        cfg.armijo_c = 1.5;
        assert!(run_flow(perturbed(24), &cfg).is_err());
    }

    #[test]
    fn writes_history_and_snapshots() {
        let mut cfg = config();
        cfg.max_steps = 3;
        cfg.snapshot_every = 2;
        let run = run_flow(perturbed(16), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run(&run, dir.path()).unwrap();
        let hist = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
        assert!(hist.starts_with(HISTORY_HEADER));
        assert_eq!(hist.lines().count(), run.history.len() + 1);
        for (k, _) in &run.snapshots {
            let s = std::fs::read_to_string(dir.path().join(format!("snap_{k}.json"))).unwrap();
            crate::io::curve_from_json(&s).unwrap();
        }
    }
}
