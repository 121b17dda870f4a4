//! Fixed-step RK4 integration with first-peak detection and finite-time
//! extinction landing.
//!
//! The run starts with the logistic rejection rate. When `I'` changes sign
//! from positive to non-positive across a step, the crossing is refined on
//! a cubic Hermite interpolant of `I'`, the state is re-advanced exactly to
//! the crossing and the rejection rate switches permanently to `C* I^p`.
//!
//! For `p < 0` the power law stiffens as `I -> 0`. Grid steps are split so
//! that `I` declines by at most [`MAX_RELATIVE_DECLINE`] per internal step.
//! Once `I` drops below [`LANDING_GUARD`], or a step would push it through
//! zero, the remaining descent follows the closed form of `I' = -C* I^(p+1)`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, TrendError};
use crate::model::{
    adopter_acceleration, adoption_rate, c_star, rejection_rate, rhs, sigmoid_rejection_rate,
    ModelParams, Phase, State,
};
use crate::scalar::Scalar;

/// Below this adopter fraction a `p < 0` run switches to the closed-form landing.
pub const LANDING_GUARD: f64 = 1e-6;

/// For `p < 0` after the peak, a step may change `I` by at most this
/// fraction of its current value; longer grid steps are split internally.
pub const MAX_RELATIVE_DECLINE: f64 = 0.01;

/// Slack used when flagging states outside `[0, 1]`.
pub const UNIT_INTERVAL_SLACK: f64 = 1e-12;

const MAX_BISECTIONS: usize = 200;

/// Time horizon and step control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub t_end: T,
    pub dt: T,
    /// Adopter fraction treated as "vanished" when reporting lifetimes.
    pub extinction_threshold: T,
    /// Time tolerance of the bisection that refines `t*`.
    pub refinement_tol: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(t_end: T, dt: T) -> Self {
        GridSpec {
            t_end,
            dt,
            extinction_threshold: T::lit(1e-9),
            refinement_tol: T::lit(1e-10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.t_end,
            self.dt,
            self.extinction_threshold,
            self.refinement_tol,
        ]
        .iter()
        .all(|x| x.is_finite() && *x > T::zero());
        if !all_positive {
            return Err(TrendError::InvalidGrid(
                "t_end, dt and both tolerances must be finite and > 0".into(),
            ));
        }
        if self.dt >= self.t_end {
            return Err(TrendError::InvalidGrid(format!(
                "dt = {} must be smaller than t_end = {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let ratio = (self.t_end / self.dt).to_f64_lossy();
        let n = ratio.round();
        if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
            n as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn time_at(&self, k: usize) -> T {
        if k >= self.steps() {
            self.t_end
        } else {
            T::from_usize(k).expect("step index representable") * self.dt
        }
    }
}

/// Diagnostic conditions observed during a run. They are reported, not raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RunFlag {
    NoPeakDetected,
    NegativeDeltaObserved,
    StateLeftUnitInterval,
    /// `I` went extinct while the recurrence rate is not identically zero.
    RecurrenceAfterExtinction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog<T> {
    pub t_star: Option<T>,
    pub c_star: Option<T>,
    /// `I(t*)`.
    pub i_star: Option<T>,
    pub t_extinct: Option<T>,
    pub flags: BTreeSet<RunFlag>,
}

impl<T> Default for EventLog<T> {
    fn default() -> Self {
        EventLog {
            t_star: None,
            c_star: None,
            i_star: None,
            t_extinct: None,
            flags: BTreeSet::new(),
        }
    }
}

/// Recorded solution: one row per grid point plus one per event.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
    pub alphas: Vec<T>,
    pub betas: Vec<T>,
    pub phases: Vec<Phase<T>>,
    pub events: EventLog<T>,
    pub grid: GridSpec<T>,
}

impl<T: Scalar> Trajectory<T> {
    fn with_grid(grid: GridSpec<T>) -> Self {
        let cap = grid.steps() + 4;
        Trajectory {
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            alphas: Vec::with_capacity(cap),
            betas: Vec::with_capacity(cap),
            phases: Vec::with_capacity(cap),
            events: EventLog::default(),
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn adopters(&self) -> impl Iterator<Item = T> + '_ {
        self.states.iter().map(|s| s.i)
    }

    pub fn max_conservation_error(&self) -> T {
        self.states
            .iter()
            .map(|s| (s.total() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    /// Smallest compartment value recorded strictly before extinction.
    pub fn min_component_before_extinction(&self) -> T {
        let cutoff = self.events.t_extinct.unwrap_or(T::infinity());
        self.times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t < cutoff)
            .map(|(_, s)| s.min_component())
            .fold(T::infinity(), T::min)
    }

    /// Index, time and value of the global maximum of `I`.
    pub fn peak(&self) -> Option<(usize, T, T)> {
        let mut best: Option<(usize, T, T)> = None;
        for (k, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            if best.is_none_or(|(_, _, v)| s.i > v) {
                best = Some((k, *t, s.i));
            }
        }
        best
    }

    /// First recorded time at or after `after` where `I < level`.
    pub fn first_time_below(&self, level: T, after: T) -> Option<T> {
        self.times
            .iter()
            .zip(&self.states)
            .find(|(t, s)| **t >= after && s.i < level)
            .map(|(t, _)| *t)
    }

    /// First time `I` falls to the grid's extinction threshold.
    pub fn vanishing_time(&self) -> Option<T> {
        let level = self.grid.extinction_threshold;
        self.times
            .iter()
            .zip(&self.states)
            .find(|(_, s)| s.i <= level)
            .map(|(t, _)| *t)
    }

    fn record(
        &mut self,
        t: T,
        y: State<T>,
        phase: Phase<T>,
        params: &ModelParams<T>,
    ) -> Result<()> {
        let beta = match phase {
            Phase::Extinct { .. } => T::zero(),
            _ => rejection_rate(y.i, &phase, params)?,
        };
        if params.recurrence.at(t) < T::zero() {
            self.events.flags.insert(RunFlag::NegativeDeltaObserved);
        }
        if !y.within_unit_interval(T::lit(UNIT_INTERVAL_SLACK)) {
            self.events.flags.insert(RunFlag::StateLeftUnitInterval);
        }
        self.times.push(t);
        self.states.push(y);
        self.alphas.push(adoption_rate(y.i, params));
        self.betas.push(beta);
        self.phases.push(phase);
        Ok(())
    }
}

/// One classical fourth-order Runge–Kutta step of size `h`.
pub fn step_rk4<T: Scalar>(
    t: T,
    state: &State<T>,
    phase: &Phase<T>,
    params: &ModelParams<T>,
    h: T,
) -> Result<State<T>> {
    let half = h / T::lit(2.0);
    let k1 = rhs(t, state, phase, params)?;
    let k2 = rhs(t + half, &(*state + k1 * half), phase, params)?;
    let k3 = rhs(t + half, &(*state + k2 * half), phase, params)?;
    let k4 = rhs(t + h, &(*state + k3 * h), phase, params)?;
    let incr = (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * (h / T::lit(6.0));
    Ok(*state + incr)
}

/// A step across which `I'` went from positive to non-positive.
///
/// `d*` are values of `I'`, `a*` values of `I''` at the step ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionBracket<T> {
    pub t0: T,
    pub t1: T,
    pub d0: T,
    pub d1: T,
    pub a0: T,
    pub a1: T,
}

impl<T: Scalar> TransitionBracket<T> {
    /// Cubic Hermite interpolant of `I'` on the bracket.
    pub fn interpolate(&self, t: T) -> T {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * self.d0 + h10 * h * self.a0 + h01 * self.d1 + h11 * h * self.a1
    }
}

/// Refines the first zero of `I'` inside a bracket by bisection on the
/// cubic Hermite interpolant, to within `tol` in time.
pub fn detect_transition<T: Scalar>(bracket: &TransitionBracket<T>, tol: T) -> T {
    if bracket.d1 == T::zero() {
        return bracket.t1;
    }
    let (mut lo, mut hi) = (bracket.t0, bracket.t1);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if bracket.interpolate(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) / T::lit(2.0)
}

/// Landing time of `I' = -C* I^(p+1)` started from `I(t0) = i0`, for `p < 0`.
pub fn land_extinction<T: Scalar>(t0: T, i0: T, c_star: T, p: T) -> Result<T> {
    if !(p < T::zero()) {
        return Err(TrendError::Domain(format!(
            "finite-time extinction needs p < 0, got {p}"
        )));
    }
    if !(c_star > T::zero()) || i0 < T::zero() {
        return Err(TrendError::Domain(format!(
            "landing needs C* > 0 and I >= 0, got C* = {c_star}, I = {i0}"
        )));
    }
    Ok(t0 + i0.powf(-p) / (-p * c_star))
}

/// Closed form of `I' = -C* I^(p+1)` for `p < 0`, clamped at zero.
fn landing_profile<T: Scalar>(t0: T, i0: T, c_star: T, p: T, t: T) -> T {
    let base = i0.powf(-p) + p * c_star * (t - t0);
    if base <= T::zero() {
        T::zero()
    } else {
        base.powf(-T::one() / p)
    }
}

/// Integrates from `init` at `t = 0`, starting in the pre-transition phase.
pub fn integrate<T: Scalar>(
    params: &ModelParams<T>,
    init: State<T>,
    grid: GridSpec<T>,
) -> Result<Trajectory<T>> {
    integrate_from(params, init, Phase::PreTransition, grid)
}

/// Integrates from `init` at `t = 0` in an arbitrary starting phase.
///
/// Starting in [`Phase::PostTransition`] skips peak detection; this is how
/// the decoupled power-law problem `I' = -C* I^(p+1)` is posed (with `S = 0`).
pub fn integrate_from<T: Scalar>(
    params: &ModelParams<T>,
    init: State<T>,
    phase: Phase<T>,
    grid: GridSpec<T>,
) -> Result<Trajectory<T>> {
    params.validate()?;
    grid.validate()?;
    validate_initial(&init)?;
    if let Phase::PostTransition { c_star, .. } = phase {
        if !(c_star > T::zero()) {
            return Err(TrendError::InvalidParameter {
                name: "c_star",
                reason: format!("must be > 0, got {c_star}"),
            });
        }
    }

    let mut run = Run {
        params,
        grid,
        phase,
        t: T::zero(),
        y: init,
        armed: false,
        traj: Trajectory::with_grid(grid),
    };
    if let Phase::PostTransition { t_star, c_star } = phase {
        run.traj.events.t_star = Some(t_star);
        run.traj.events.c_star = Some(c_star);
    }
    // a run whose I starts out non-increasing never gets a finite t*
    run.armed = matches!(phase, Phase::PreTransition)
        && rhs(T::zero(), &init, &phase, params)?.i > T::zero();
    run.traj.record(T::zero(), init, phase, params)?;

    for k in 1..=grid.steps() {
        let t_next = grid.time_at(k);
        run.advance_to(t_next)?;
        run.traj.record(t_next, run.y, run.phase, params)?;
    }

    let events = &mut run.traj.events;
    if events.t_star.is_none() {
        events.flags.insert(RunFlag::NoPeakDetected);
    }
    if events.t_extinct.is_some() && !params.recurrence.is_identically_zero() {
        events.flags.insert(RunFlag::RecurrenceAfterExtinction);
    }
    Ok(run.traj)
}

fn validate_initial<T: Scalar>(init: &State<T>) -> Result<()> {
    if !init.is_finite() || init.min_component() < T::zero() {
        return Err(TrendError::InvalidInitialState(format!(
            "components must be finite and >= 0, got {init:?}"
        )));
    }
    let tol = T::lit(16.0) * T::epsilon();
    if (init.total() - T::one()).abs() > tol {
        return Err(TrendError::InvalidInitialState(format!(
            "S + I + R must equal 1, got {}",
            init.total()
        )));
    }
    Ok(())
}

struct Run<'a, T> {
    params: &'a ModelParams<T>,
    grid: GridSpec<T>,
    phase: Phase<T>,
    t: T,
    y: State<T>,
    armed: bool,
    traj: Trajectory<T>,
}

impl<T: Scalar> Run<'_, T> {
    fn advance_to(&mut self, t_next: T) -> Result<()> {
        while self.t < t_next {
            match self.phase {
                Phase::PreTransition => self.pre_step(t_next)?,
                Phase::PostTransition { c_star, .. } => self.post_step(t_next, c_star)?,
                Phase::Extinct { .. } => {
                    let mut y =
                        step_rk4(self.t, &self.y, &self.phase, self.params, t_next - self.t)?;
                    y.i = T::zero();
                    self.y = y;
                    self.t = t_next;
                }
            }
        }
        Ok(())
    }

    fn pre_step(&mut self, t_next: T) -> Result<()> {
        let params = self.params;
        let phase = Phase::PreTransition;
        let h = t_next - self.t;
        let y1 = step_rk4(self.t, &self.y, &phase, params, h)?;
        if !self.armed {
            self.t = t_next;
            self.y = y1;
            return Ok(());
        }
        let d0 = rhs(self.t, &self.y, &phase, params)?.i;
        let d1 = rhs(t_next, &y1, &phase, params)?.i;
        if !(d0 > T::zero() && d1 <= T::zero()) {
            self.t = t_next;
            self.y = y1;
            return Ok(());
        }

        let bracket = TransitionBracket {
            t0: self.t,
            t1: t_next,
            d0,
            d1,
            a0: adopter_acceleration(self.t, &self.y, &phase, params)?,
            a1: adopter_acceleration(t_next, &y1, &phase, params)?,
        };
        let t_star = detect_transition(&bracket, self.grid.refinement_tol);
        let y_star = if t_star >= t_next {
            y1
        } else {
            step_rk4(self.t, &self.y, &phase, params, t_star - self.t)?
        };
        let beta_star = sigmoid_rejection_rate(y_star.i, params);
        let c = c_star(y_star.i, beta_star, params.p)?;

        self.armed = false;
        self.phase = Phase::PostTransition { t_star, c_star: c };
        let events = &mut self.traj.events;
        events.t_star = Some(t_star);
        events.c_star = Some(c);
        events.i_star = Some(y_star.i);
        if t_star < t_next {
            self.traj.record(t_star, y_star, self.phase, params)?;
            self.t = t_star;
            self.y = y_star;
        } else {
            self.t = t_next;
            self.y = y1;
        }
        Ok(())
    }

    fn post_step(&mut self, t_next: T, c_star: T) -> Result<()> {
        let params = self.params;
        let p = params.p;
        if p < T::zero() && self.y.i < T::lit(LANDING_GUARD) {
            return self.land(t_next, c_star);
        }
        let mut h = t_next - self.t;
        if p < T::zero() {
            let decline = -rhs(self.t, &self.y, &self.phase, params)?.i;
            if decline > T::zero() {
                h = h.min(T::lit(MAX_RELATIVE_DECLINE) * self.y.i / decline);
            }
        }
        let t1 = if h < t_next - self.t {
            self.t + h
        } else {
            t_next
        };
        match step_rk4(self.t, &self.y, &self.phase, params, h) {
            Ok(y1) if y1.is_finite() && y1.i > T::zero() => {
                self.t = t1;
                self.y = y1;
                Ok(())
            }
            Ok(_) | Err(TrendError::Domain(_)) if p < T::zero() => self.land(t_next, c_star),
            Ok(y1) => Err(TrendError::Domain(format!(
                "step from t = {} produced I = {}",
                self.t, y1.i
            ))),
            Err(e) => Err(e),
        }
    }

    /// Follows the frozen dominant balance `I' = -C* I^(p+1)`; the adopters
    /// that leave move to `R`, `S` is held fixed.
    fn land(&mut self, t_next: T, c_star: T) -> Result<()> {
        let p = self.params.p;
        let (t0, y0) = (self.t, self.y);
        let t_ext = land_extinction(t0, y0.i, c_star, p)?;
        if t_ext > t_next {
            let i = landing_profile(t0, y0.i, c_star, p, t_next);
            self.y = State::new(y0.s, i, y0.r + (y0.i - i));
            self.t = t_next;
            return Ok(());
        }
        let landed = State::new(y0.s, T::zero(), y0.r + y0.i);
        self.phase = Phase::Extinct { t_extinct: t_ext };
        self.traj.events.t_extinct = Some(t_ext);
        if t_ext < t_next && t_ext > t0 {
            self.traj.record(t_ext, landed, self.phase, self.params)?;
        }
        self.y = landed;
        self.t = if t_ext > t0 { t_ext } else { t0 };
        if self.t == t0 {
            // zero-length landing: finish the step in the extinct phase
            let mut y = step_rk4(t0, &landed, &self.phase, self.params, t_next - t0)?;
            y.i = T::zero();
            self.y = y;
            self.t = t_next;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RecurrenceSpec;
    use approx::assert_relative_eq;

    fn sec41(p: f64) -> ModelParams<f64> {
        ModelParams {
            m1: 20.0,
            m2: 0.2,
            m3: 0.5,
            m4: 2.0,
            l_alpha: 0.0,
            l_beta: 0.0,
            p,
            recurrence: RecurrenceSpec::none(),
        }
    }

    fn init41() -> State<f64> {
        State::new(0.98, 0.02, 0.0)
    }

    #[test]
    fn grid_steps_and_times() {
        let g = GridSpec::new(50.0, 1e-3);
        assert_eq!(g.steps(), 50_000);
        assert_eq!(g.time_at(50_000), 50.0);
        let g = GridSpec::new(1.05, 0.1);
        assert_eq!(g.steps(), 11);
        assert_eq!(g.time_at(11), 1.05);
        assert!(GridSpec::new(1.0, 2.0).validate().is_err());
        assert!(GridSpec::new(1.0, -0.1).validate().is_err());
    }

    #[test]
    fn rk4_leaves_fixed_point_unchanged() {
        let y = State::new(0.4, 0.0, 0.6);
        let y1 = step_rk4(0.0, &y, &Phase::PreTransition, &sec41(0.0), 0.01).unwrap();
        assert_eq!(y, y1);
    }

    #[test]
    fn rk4_local_error_is_fifth_order() {
        // With S = 0 and p = 0 after the switch, I' = -C* I: pure exponential decay.
        let params = sec41(0.0);
        let phase = Phase::PostTransition {
            t_star: 0.0,
            c_star: 1.0,
        };
        let y = State::new(0.0, 1.0, 0.0);
        let err = |h: f64| {
            let y1 = step_rk4(0.0, &y, &phase, &params, h).unwrap();
            (y1.i - (-h).exp()).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        // local error ~ h^5 / 120
        assert!(e1 < 0.1f64.powi(5) / 100.0);
        let ratio = e1 / e2;
        assert!((28.0..36.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_toy_classic_matches_closed_form() {
        // I' = -I^1.5  =>  I^-0.5 = I0^-0.5 + t/2
        let params = sec41(0.5);
        let phase = Phase::PostTransition {
            t_star: 0.0,
            c_star: 1.0,
        };
        let mut y = State::new(0.0, 0.8, 0.2);
        let h = 1e-3;
        for k in 0..1000 {
            y = step_rk4(k as f64 * h, &y, &phase, &params, h).unwrap();
        }
        let exact = (0.8f64.powf(-0.5) + 0.5).powi(-2);
        assert!((y.i - exact).abs() < 1e-8);
    }

    #[test]
    fn linear_crossing_is_refined_to_midpoint() {
        let bracket = TransitionBracket {
            t0: 1.0,
            t1: 1.001,
            d0: 0.1,
            d1: -0.1,
            a0: -200.0,
            a1: -200.0,
        };
        let t: f64 = detect_transition(&bracket, 1e-10);
        assert!((t - 1.0005).abs() <= 1e-10, "t = {t}");
    }

    #[test]
    fn hermite_interpolant_reproduces_cubic() {
        // f(t) = 1 - t^3, f' = -3t^2
        let f = |t: f64| 1.0 - t * t * t;
        let bracket = TransitionBracket {
            t0: 0.5,
            t1: 1.5,
            d0: f(0.5),
            d1: f(1.5),
            a0: -0.75,
            a1: -6.75,
        };
        for t in [0.6, 0.9, 1.2, 1.4] {
            assert_relative_eq!(bracket.interpolate(t), f(t), epsilon = 1e-14);
        }
        assert!((detect_transition(&bracket, 1e-12) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn land_extinction_closed_forms() {
        assert_relative_eq!(
            land_extinction(0.0, 0.8, 1.0, -1.0).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            land_extinction(0.0, 0.8, 1.0, -2.0).unwrap(),
            0.32,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            land_extinction(0.0, 0.8, 1.0, -0.5).unwrap(),
            2.0 * 0.8f64.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            land_extinction(3.0, 0.8, 2.0, -1.0).unwrap(),
            3.4,
            epsilon = 1e-15
        );
        assert!(land_extinction(0.0, 0.8, 1.0, 0.0).is_err());
        assert!(land_extinction(0.0, 0.8, 1.0, 0.5).is_err());
    }

    #[test]
    fn zero_adopters_give_constant_trajectory() {
        let init = State::new(0.7, 0.0, 0.3);
        let traj = integrate(&sec41(0.0), init, GridSpec::new(2.0, 0.01)).unwrap();
        assert!(traj.states.iter().all(|s| *s == init));
        assert!(traj.events.t_star.is_none());
        assert!(traj.events.flags.contains(&RunFlag::NoPeakDetected));
    }

    #[test]
    fn decreasing_start_keeps_sigmoid_branch() {
        // m1 S(0) small: I'(0) < 0, so t* = infinity
        let params = ModelParams {
            m1: 0.1,
            ..sec41(-1.0)
        };
        let traj = integrate(&params, init41(), GridSpec::new(5.0, 1e-2)).unwrap();
        assert!(traj.events.t_star.is_none());
        assert!(traj.phases.iter().all(|p| *p == Phase::PreTransition));
    }

    #[test]
    fn rejects_bad_initial_data() {
        let g = GridSpec::new(1.0, 0.1);
        assert!(integrate(&sec41(0.0), State::new(0.5, 0.2, 0.2), g).is_err());
        assert!(integrate(&sec41(0.0), State::new(1.1, -0.1, 0.0), g).is_err());
    }

    #[test]
    fn sec41_fashion_single_peak() {
        let traj = integrate(&sec41(0.0), init41(), GridSpec::new(10.0, 1e-3)).unwrap();
        let t_star = traj.events.t_star.unwrap();
        assert!(t_star > 0.0 && t_star < 10.0);
        assert!(traj.events.t_extinct.is_none());
        assert!(traj.max_conservation_error() <= 1e-10);
        let (_, t_peak, i_peak) = traj.peak().unwrap();
        assert!((t_peak - t_star).abs() < 1e-3);
        assert_relative_eq!(i_peak, traj.events.i_star.unwrap(), max_relative = 1e-6);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fad_run_lands_and_stays_extinct() {
        let traj = integrate(&sec41(-1.5), init41(), GridSpec::new(20.0, 1e-3)).unwrap();
        let t_ext = traj.events.t_extinct.expect("finite extinction");
        assert!(traj.events.t_star.unwrap() < t_ext);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            if *t >= t_ext {
                assert_eq!(s.i, 0.0);
            }
        }
        assert!(traj.max_conservation_error() <= 1e-10);
    }

    #[test]
    fn deterministic_runs() {
        let a = integrate(&sec41(-0.5), init41(), GridSpec::new(10.0, 1e-3)).unwrap();
        let b = integrate(&sec41(-0.5), init41(), GridSpec::new(10.0, 1e-3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_halving_ratio() {
        // on a smooth pre-peak window the error ratio is bounded by 16
        let end = |dt: f64| {
            let g = GridSpec::new(0.2, dt);
            integrate(&sec41(0.0), init41(), g)
                .unwrap()
                .states
                .last()
                .unwrap()
                .i
        };
        let (a, b, c) = (end(4e-3), end(2e-3), end(1e-3));
        let (d1, d2) = ((a - b).abs(), (b - c).abs());
        assert!(d1 <= 16.0 * d2 * 1.05, "d1 {d1} d2 {d2}");
        assert!(d1 >= 12.0 * d2, "d1 {d1} d2 {d2}");
    }

    #[test]
    fn runs_in_f32() {
        let params = ModelParams::<f32> {
            m1: 20.0,
            m2: 0.2,
            m3: 0.5,
            m4: 2.0,
            l_alpha: 0.0,
            l_beta: 0.0,
            p: 0.0,
            recurrence: RecurrenceSpec::none(),
        };
        let traj = integrate(
            &params,
            State::new(0.98, 0.02, 0.0),
            GridSpec::new(5.0f32, 1e-3),
        )
        .unwrap();
        assert!(traj.events.t_star.is_some());
        assert!(traj.max_conservation_error() < 1e-5);
    }
}
