//! Classification, decay envelopes and summary statistics of trajectories.
//!
//! With no recurrence and zero delays, and with `m1 S(0) > 2 m3`, the adopter
//! fraction after its first peak at `t*` is bracketed by closed-form curves:
//!
//! * Classic (`p > 0`), for `t > t*`:
//!   `(A + p C* (t - t*))^(-1/p) <= I(t) <= (A - (A - C*/m1)(1 - e^(-p m1 (t - t*))))^(-1/p)`
//!   with `A = I(t*)^(-p)`.
//! * Fashion (`p = 0`): `I(t*) e^(-C* (t - t*)) <= I(t)` for `t > t*`, and
//!   `I(t) <= max(I(t*), I(t2)) e^(-λ (t - t2))` for `t > t2`, where
//!   `λ = C* - α(I(t2)) S(t2) > 0`.
//! * Fad (`p < 0`), after the time `τ` where `m1 I <= (C*/2) I^(p+1)` starts to hold:
//!   `I^(-p)` lies between `I(τ)^(-p) + p C* (t - τ)` and `I(τ)^(-p) + (p C*/2)(t - τ)`,
//!   so the extinction time lies in `[τ + I(τ)^|p| / (C* |p|), τ + 2 I(τ)^|p| / (C* |p|)]`.

use std::fmt;

use serde::Serialize;

use crate::error::{Result, TrendError};
use crate::integrator::Trajectory;
use crate::model::{adoption_rate, ModelParams, RecurrenceSpec};
use crate::scalar::Scalar;

/// Default prominence for [`count_peaks`]: one percent of the population.
pub const DEFAULT_PROMINENCE: f64 = 0.01;

/// Minimum number of samples accepted by [`fit_decay`].
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrendClass {
    Fad,
    FastFashion,
    Fashion,
    Classic,
    Periodic,
}

impl TrendClass {
    pub fn name(&self) -> &'static str {
        match self {
            TrendClass::Fad => "Fad",
            TrendClass::FastFashion => "FastFashion",
            TrendClass::Fashion => "Fashion",
            TrendClass::Classic => "Classic",
            TrendClass::Periodic => "Periodic",
        }
    }
}

impl fmt::Display for TrendClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies a trend by its rejection exponent and recurrence rate.
pub fn classify<T: Scalar>(p: T, recurrence: &RecurrenceSpec<T>) -> Result<TrendClass> {
    if !p.is_finite() {
        return Err(TrendError::InvalidParameter {
            name: "p",
            reason: format!("must be finite, got {p}"),
        });
    }
    let recurring = !recurrence.is_identically_zero();
    if recurring {
        return if p >= T::zero() {
            Ok(TrendClass::Periodic)
        } else {
            Err(TrendError::OutsideTaxonomy {
                p: p.to_f64_lossy(),
            })
        };
    }
    Ok(if p <= -T::one() {
        TrendClass::Fad
    } else if p < T::zero() {
        TrendClass::FastFashion
    } else if p == T::zero() {
        TrendClass::Fashion
    } else {
        TrendClass::Classic
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Classic,
    Fashion,
    Fad,
}

/// Why the decay envelope does not apply to a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Inapplicable {
    NonZeroRecurrence,
    NonZeroDelays,
    PeakConditionFails { m1_s0: f64, two_m3: f64 },
    NoTransition,
    TauNotFound { threshold: f64 },
    LambdaNotPositive { lambda: f64 },
}

impl fmt::Display for Inapplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inapplicable::NonZeroRecurrence => write!(f, "recurrence rate is not identically zero"),
            Inapplicable::NonZeroDelays => write!(f, "adoption/rejection delays are not both zero"),
            Inapplicable::PeakConditionFails { m1_s0, two_m3 } => {
                write!(f, "m1*S(0) = {m1_s0} does not exceed 2*m3 = {two_m3}")
            }
            Inapplicable::NoTransition => write!(f, "no finite transition time t* was detected"),
            Inapplicable::TauNotFound { threshold } => {
                write!(f, "I never fell below the tau threshold {threshold}")
            }
            Inapplicable::LambdaNotPositive { lambda } => {
                write!(f, "decay rate lambda = {lambda} is not positive")
            }
        }
    }
}

/// Constants entering the bound curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants<T> {
    pub p: T,
    pub m1: T,
    pub c_star: T,
    /// `I(t*)`.
    pub a_star: T,
    /// `p C*`.
    pub b: T,
    /// `C* / m1`.
    pub c: T,
    /// `max(I(t*), I(t2))`; Fashion only.
    pub a_two: Option<T>,
    /// `C* - α(I(t2)) S(t2)`; Fashion only.
    pub lambda: Option<T>,
    /// `I(τ)`; Fad only.
    pub a_tau: Option<T>,
}

/// Regime-specific lower/upper curves for `I(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEnvelope<T> {
    pub regime: Regime,
    pub t_star: T,
    pub t2: Option<T>,
    pub tau: Option<T>,
    /// Right end of the validity interval (extinction time for Fad runs).
    pub valid_until: Option<T>,
    pub constants: EnvelopeConstants<T>,
}

impl<T: Scalar> BoundEnvelope<T> {
    /// Classic envelope anchored at `(t*, I(t*))`.
    pub fn classic(t_star: T, a_star: T, c_star: T, m1: T, p: T) -> Self {
        BoundEnvelope {
            regime: Regime::Classic,
            t_star,
            t2: None,
            tau: None,
            valid_until: None,
            constants: EnvelopeConstants {
                p,
                m1,
                c_star,
                a_star,
                b: p * c_star,
                c: c_star / m1,
                a_two: None,
                lambda: None,
                a_tau: None,
            },
        }
    }

    /// Fashion envelope: lower anchored at `t*`, upper at `t2`.
    pub fn fashion(t_star: T, a_star: T, c_star: T, m1: T, t2: T, a_two: T, lambda: T) -> Self {
        BoundEnvelope {
            regime: Regime::Fashion,
            t_star,
            t2: Some(t2),
            tau: None,
            valid_until: None,
            constants: EnvelopeConstants {
                p: T::zero(),
                m1,
                c_star,
                a_star,
                b: T::zero(),
                c: c_star / m1,
                a_two: Some(a_two),
                lambda: Some(lambda),
                a_tau: None,
            },
        }
    }

    /// Fad envelope anchored at `(τ, I(τ))`.
    pub fn fad(t_star: T, a_star: T, c_star: T, m1: T, p: T, tau: T, a_tau: T) -> Self {
        BoundEnvelope {
            regime: Regime::Fad,
            t_star,
            t2: None,
            tau: Some(tau),
            valid_until: None,
            constants: EnvelopeConstants {
                p,
                m1,
                c_star,
                a_star,
                b: p * c_star,
                c: c_star / m1,
                a_two: None,
                lambda: None,
                a_tau: Some(a_tau),
            },
        }
    }

    fn lower_start(&self) -> T {
        match self.regime {
            Regime::Fad => self.tau.unwrap_or(self.t_star),
            _ => self.t_star,
        }
    }

    fn upper_start(&self) -> T {
        match self.regime {
            Regime::Fashion => self.t2.unwrap_or(self.t_star),
            Regime::Fad => self.tau.unwrap_or(self.t_star),
            Regime::Classic => self.t_star,
        }
    }

    fn in_range(&self, t: T, start: T) -> bool {
        t > start && self.valid_until.is_none_or(|end| t <= end)
    }

    /// Lower bound at `t`, or `None` outside its validity interval.
    pub fn lower(&self, t: T) -> Option<T> {
        if !self.in_range(t, self.lower_start()) {
            return None;
        }
        Some(self.lower_unchecked(t))
    }

    /// Upper bound at `t`, or `None` outside its validity interval.
    pub fn upper(&self, t: T) -> Option<T> {
        if !self.in_range(t, self.upper_start()) {
            return None;
        }
        Some(self.upper_unchecked(t))
    }

    /// Lower curve evaluated without the validity check.
    pub fn lower_unchecked(&self, t: T) -> T {
        let k = &self.constants;
        match self.regime {
            Regime::Classic => {
                (k.a_star.powf(-k.p) + k.b * (t - self.t_star)).powf(-T::one() / k.p)
            }
            Regime::Fashion => k.a_star * (-k.c_star * (t - self.t_star)).exp(),
            Regime::Fad => {
                let a = k.a_tau.unwrap_or(k.a_star);
                let tau = self.tau.unwrap_or(self.t_star);
                fad_curve(a, k.b, k.p, t - tau)
            }
        }
    }

    /// Upper curve evaluated without the validity check.
    pub fn upper_unchecked(&self, t: T) -> T {
        let k = &self.constants;
        match self.regime {
            Regime::Classic => {
                let anchor = k.a_star.powf(-k.p);
                let relax = T::one() - (-k.p * k.m1 * (t - self.t_star)).exp();
                (anchor - (anchor - k.c) * relax).powf(-T::one() / k.p)
            }
            Regime::Fashion => {
                let a2 = k.a_two.unwrap_or(k.a_star);
                let lambda = k.lambda.unwrap_or(T::zero());
                let t2 = self.t2.unwrap_or(self.t_star);
                a2 * (-lambda * (t - t2)).exp()
            }
            Regime::Fad => {
                let a = k.a_tau.unwrap_or(k.a_star);
                let tau = self.tau.unwrap_or(self.t_star);
                fad_curve(a, k.b / T::lit(2.0), k.p, t - tau)
            }
        }
    }

    /// Interval that must contain the extinction time (Fad only).
    pub fn extinction_bracket(&self) -> Option<(T, T)> {
        if self.regime != Regime::Fad {
            return None;
        }
        let k = &self.constants;
        let a = k.a_tau?;
        let tau = self.tau?;
        let span = a.powf(-k.p) / (k.c_star * (-k.p));
        Some((tau + span, tau + T::lit(2.0) * span))
    }
}

/// `max(0, a^(-p) + slope s)^(-1/p)` for `p < 0`.
fn fad_curve<T: Scalar>(a: T, slope: T, p: T, s: T) -> T {
    let base = a.powf(-p) + slope * s;
    if base <= T::zero() {
        T::zero()
    } else {
        base.powf(-T::one() / p)
    }
}

/// Threshold `(C* / (2 m1))^(-1/p)` below which `m1 I <= (C*/2) I^(p+1)`.
pub fn tau_threshold<T: Scalar>(c_star: T, m1: T, p: T) -> T {
    (c_star / (T::lit(2.0) * m1)).powf(-T::one() / p)
}

/// First recorded index at or after `t*` where `I` is at or below the
/// [`tau_threshold`].
fn tau_index<T: Scalar>(traj: &Trajectory<T>, params: &ModelParams<T>) -> Result<usize> {
    if !(params.p < T::zero()) {
        return Err(TrendError::Domain(format!(
            "tau is defined for p < 0 only, got p = {}",
            params.p
        )));
    }
    let (t_star, c_star) = match (traj.events.t_star, traj.events.c_star) {
        (Some(t), Some(c)) => (t, c),
        _ => {
            return Err(TrendError::Domain(
                "tau needs a finite transition time".into(),
            ))
        }
    };
    let threshold = tau_threshold(c_star, params.m1, params.p);
    traj.times
        .iter()
        .zip(&traj.states)
        .position(|(t, s)| *t >= t_star && s.i <= threshold)
        .ok_or(TrendError::ThresholdNotReached {
            threshold: threshold.to_f64_lossy(),
        })
}

/// Time `τ >= t*` after which the adoption term is dominated by half the
/// rejection term (`p < 0` runs).
pub fn find_tau<T: Scalar>(traj: &Trajectory<T>, params: &ModelParams<T>) -> Result<T> {
    tau_index(traj, params).map(|k| traj.times[k])
}

fn preconditions<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
) -> std::result::Result<(usize, T, T), Inapplicable> {
    if !params.recurrence.is_identically_zero() {
        return Err(Inapplicable::NonZeroRecurrence);
    }
    if !params.has_zero_delays() {
        return Err(Inapplicable::NonZeroDelays);
    }
    let s0 = traj.states.first().map_or(T::zero(), |s| s.s);
    if !params.guarantees_finite_peak(s0) {
        return Err(Inapplicable::PeakConditionFails {
            m1_s0: (params.m1 * s0).to_f64_lossy(),
            two_m3: (T::lit(2.0) * params.m3).to_f64_lossy(),
        });
    }
    let (t_star, c_star) = match (traj.events.t_star, traj.events.c_star) {
        (Some(t), Some(c)) => (t, c),
        _ => return Err(Inapplicable::NoTransition),
    };
    let k_star = traj
        .times
        .iter()
        .position(|t| *t == t_star)
        .ok_or(Inapplicable::NoTransition)?;
    Ok((k_star, t_star, c_star))
}

/// Index of the Fashion anchor `t2`: first recorded time at or after
/// `t* + 1`, or `t* + 10 dt` when the horizon is too short.
fn t2_index<T: Scalar>(traj: &Trajectory<T>, t_star: T) -> Option<usize> {
    let find = |target: T| traj.times.iter().position(|t| *t >= target);
    let preferred = t_star + T::one();
    if preferred <= traj.grid.t_end {
        if let Some(k) = find(preferred) {
            return Some(k);
        }
    }
    find(t_star + T::lit(10.0) * traj.grid.dt)
}

/// Builds the decay envelope for a finished run.
pub fn compute_envelope<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
) -> std::result::Result<BoundEnvelope<T>, Inapplicable> {
    let (k_star, t_star, c_star) = preconditions(traj, params)?;
    let a_star = traj.states[k_star].i;
    let p = params.p;
    if p > T::zero() {
        return Ok(BoundEnvelope::classic(t_star, a_star, c_star, params.m1, p));
    }
    if p == T::zero() {
        let k2 =
            t2_index(traj, t_star).ok_or(Inapplicable::LambdaNotPositive { lambda: f64::NAN })?;
        let y2 = traj.states[k2];
        let lambda = c_star - adoption_rate(y2.i, params) * y2.s;
        if !(lambda > T::zero()) {
            return Err(Inapplicable::LambdaNotPositive {
                lambda: lambda.to_f64_lossy(),
            });
        }
        let a_two = a_star.max(y2.i);
        return Ok(BoundEnvelope::fashion(
            t_star,
            a_star,
            c_star,
            params.m1,
            traj.times[k2],
            a_two,
            lambda,
        ));
    }
    let k_tau = tau_index(traj, params).map_err(|_| Inapplicable::TauNotFound {
        threshold: tau_threshold(c_star, params.m1, p).to_f64_lossy(),
    })?;
    let mut env = BoundEnvelope::fad(
        t_star,
        a_star,
        c_star,
        params.m1,
        p,
        traj.times[k_tau],
        traj.states[k_tau].i,
    );
    env.valid_until = traj.events.t_extinct;
    Ok(env)
}

/// Outcome of checking a trajectory against its envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport<T> {
    pub applicable: bool,
    pub reason: Option<String>,
    pub regime: Option<Regime>,
    pub tol: T,
    pub samples_checked: usize,
    pub max_lower_violation: T,
    pub max_upper_violation: T,
    pub first_violation_time: Option<T>,
    pub extinction_bracket: Option<(T, T)>,
    pub t_extinct: Option<T>,
    /// `Some(false)` when a Fad run's extinction time misses the bracket.
    pub extinction_in_bracket: Option<bool>,
    pub constants: Option<EnvelopeConstants<T>>,
    /// Which form of the bounds was checked, where it differs from the usual statement.
    pub bound_form: Option<&'static str>,
}

impl<T: Scalar> EnvelopeReport<T> {
    pub fn inapplicable(reason: &Inapplicable, tol: T) -> Self {
        EnvelopeReport {
            applicable: false,
            reason: Some(reason.to_string()),
            regime: None,
            tol,
            samples_checked: 0,
            max_lower_violation: T::zero(),
            max_upper_violation: T::zero(),
            first_violation_time: None,
            extinction_bracket: None,
            t_extinct: None,
            extinction_in_bracket: None,
            constants: None,
            bound_form: None,
        }
    }

    /// Applicable, no violation beyond tolerance, and extinction (if any) bracketed.
    pub fn passed(&self) -> bool {
        self.applicable
            && self.max_lower_violation == T::zero()
            && self.max_upper_violation == T::zero()
            && self.extinction_in_bracket != Some(false)
    }
}

/// Measures how far `I(t)` leaves `[lower - tol, upper + tol]` on the
/// validity intervals.
pub fn check_envelope<T: Scalar>(
    traj: &Trajectory<T>,
    env: &BoundEnvelope<T>,
    tol: T,
) -> EnvelopeReport<T> {
    let mut report = EnvelopeReport {
        applicable: true,
        reason: None,
        regime: Some(env.regime),
        tol,
        samples_checked: 0,
        max_lower_violation: T::zero(),
        max_upper_violation: T::zero(),
        first_violation_time: None,
        extinction_bracket: env.extinction_bracket(),
        t_extinct: traj.events.t_extinct,
        extinction_in_bracket: None,
        constants: Some(env.constants),
        bound_form: match env.regime {
            Regime::Classic => Some("both bounds anchored at I(t*)^(-p)"),
            Regime::Fashion => Some("upper bound decays at lambda = C* - alpha(I(t2)) S(t2) > 0"),
            Regime::Fad => None,
        },
    };
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        let lower = env.lower(t);
        let upper = env.upper(t);
        if lower.is_none() && upper.is_none() {
            continue;
        }
        report.samples_checked += 1;
        let mut violated = false;
        if let Some(lo) = lower {
            let gap = (lo - tol) - s.i;
            if gap > T::zero() {
                report.max_lower_violation = report.max_lower_violation.max(gap);
                violated = true;
            }
        }
        if let Some(hi) = upper {
            let gap = s.i - (hi + tol);
            if gap > T::zero() {
                report.max_upper_violation = report.max_upper_violation.max(gap);
                violated = true;
            }
        }
        if violated && report.first_violation_time.is_none() {
            report.first_violation_time = Some(t);
        }
    }
    if let Some((lo, hi)) = report.extinction_bracket {
        report.extinction_in_bracket = Some(match traj.events.t_extinct {
            Some(te) => te >= lo && te <= hi,
            // no extinction yet is only consistent if the horizon ends before the bracket closes
            None => traj.grid.t_end < hi,
        });
    }
    report
}

/// Computes the envelope and checks the run against it in one go.
pub fn verify<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    tol: T,
) -> EnvelopeReport<T> {
    match compute_envelope(traj, params) {
        Ok(env) => check_envelope(traj, &env, tol),
        Err(why) => EnvelopeReport::inapplicable(&why, tol),
    }
}

/// Least-squares line through a transformed decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual of the fit.
    pub residual: T,
    /// Max minus min of the transformed samples.
    pub range: T,
    pub samples: usize,
}

/// Fits the post-peak decay of `I` on `window`.
///
/// `p = 0` fits `ln I` against `t`; otherwise `I^(-p)` against `t`, which is
/// linear in the pure power-law decay.
pub fn fit_decay<T: Scalar>(traj: &Trajectory<T>, p: T, window: (T, T)) -> Result<DecayFit<T>> {
    let (t0, t1) = window;
    let points: Vec<(T, T)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, s)| **t >= t0 && **t <= t1 && s.i > T::zero())
        .map(|(t, s)| {
            let y = if p == T::zero() {
                s.i.ln()
            } else {
                s.i.powf(-p)
            };
            (*t, y)
        })
        .collect();
    fit_line(&points)
}

pub(crate) fn fit_line<T: Scalar>(points: &[(T, T)]) -> Result<DecayFit<T>> {
    if points.len() < MIN_FIT_SAMPLES {
        return Err(TrendError::TooFewSamples {
            found: points.len(),
            required: MIN_FIT_SAMPLES,
        });
    }
    let n = T::from_usize(points.len()).expect("sample count representable");
    let mean_t = points.iter().fold(T::zero(), |a, (t, _)| a + *t) / n;
    let mean_y = points.iter().fold(T::zero(), |a, (_, y)| a + *y) / n;
    let (mut stt, mut sty) = (T::zero(), T::zero());
    for &(t, y) in points {
        let dt = t - mean_t;
        stt = stt + dt * dt;
        sty = sty + dt * (y - mean_y);
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let sse = points.iter().fold(T::zero(), |a, &(t, y)| {
        let r = y - (intercept + slope * t);
        a + r * r
    });
    let (lo, hi) = points
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    Ok(DecayFit {
        slope,
        intercept,
        residual: (sse / n).sqrt(),
        range: hi - lo,
        samples: points.len(),
    })
}

/// Default decay window: from the Fashion anchor `t2` to the last sample
/// before `I` vanishes or lands.
pub fn decay_window<T: Scalar>(traj: &Trajectory<T>) -> Option<(T, T)> {
    let t_star = traj.events.t_star?;
    let start = traj.times[t2_index(traj, t_star)?];
    let end = traj
        .events
        .t_extinct
        .or_else(|| traj.vanishing_time())
        .unwrap_or(traj.grid.t_end);
    let last = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, s)| **t < end && s.i > T::zero())
        .map(|(t, _)| *t)
        .last()
        .unwrap_or(end);
    (last > start).then_some((start, last))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakCount<T> {
    pub count: usize,
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub prominences: Vec<T>,
}

/// Counts strict local maxima of `I` whose prominence is at least `min_prominence`.
///
/// Prominence is the height of the peak above the higher of the two lowest
/// points separating it from higher ground (or the series ends).
pub fn count_peaks<T: Scalar>(traj: &Trajectory<T>, min_prominence: T) -> PeakCount<T> {
    let values: Vec<T> = traj.adopters().collect();
    let mut out = PeakCount {
        count: 0,
        times: Vec::new(),
        values: Vec::new(),
        prominences: Vec::new(),
    };
    let n = values.len();
    if n < 3 {
        return out;
    }
    for k in 1..n - 1 {
        let v = values[k];
        if !(v > values[k - 1]) {
            continue;
        }
        // plateau: a run of equal values followed by a drop still counts once
        let mut j = k;
        while j + 1 < n && values[j + 1] == v {
            j += 1;
        }
        if j + 1 >= n || !(values[j + 1] < v) {
            continue;
        }
        let mut left_min = v;
        for &x in values[..k].iter().rev() {
            if x > v {
                break;
            }
            left_min = left_min.min(x);
        }
        let mut right_min = v;
        for &x in &values[j + 1..] {
            if x > v {
                break;
            }
            right_min = right_min.min(x);
        }
        let prominence = v - left_min.max(right_min);
        if prominence >= min_prominence {
            out.count += 1;
            out.times.push(traj.times[k]);
            out.values.push(v);
            out.prominences.push(prominence);
        }
    }
    out
}

/// Time at which `I` first falls below `fraction` of its global peak after
/// that peak, or `None` if it never does within the horizon.
pub fn lifetime<T: Scalar>(traj: &Trajectory<T>, fraction: T) -> Option<T> {
    let (_, t_peak, peak) = traj.peak()?;
    traj.first_time_below(fraction * peak, t_peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{EventLog, GridSpec};
    use crate::model::{Phase, State};
    use approx::assert_relative_eq;

    fn synthetic(times: &[f64], f: impl Fn(f64) -> f64) -> Trajectory<f64> {
        let states: Vec<State<f64>> = times
            .iter()
            .map(|&t| State::new(0.0, f(t), 1.0 - f(t)))
            .collect();
        Trajectory {
            times: times.to_vec(),
            alphas: vec![0.0; times.len()],
            betas: vec![0.0; times.len()],
            phases: vec![Phase::PreTransition; times.len()],
            states,
            events: EventLog::default(),
            grid: GridSpec::new(*times.last().unwrap(), times[1] - times[0]),
        }
    }

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn classification_table() {
        let none = RecurrenceSpec::none();
        assert_eq!(classify(-2.0, &none).unwrap(), TrendClass::Fad);
        assert_eq!(classify(-1.0, &none).unwrap(), TrendClass::Fad);
        assert_eq!(classify(-0.999, &none).unwrap(), TrendClass::FastFashion);
        assert_eq!(classify(-0.5, &none).unwrap(), TrendClass::FastFashion);
        assert_eq!(classify(0.0, &none).unwrap(), TrendClass::Fashion);
        assert_eq!(classify(0.5, &none).unwrap(), TrendClass::Classic);
        assert_eq!(classify(6.0, &none).unwrap(), TrendClass::Classic);
        let recur = RecurrenceSpec::Constant(0.4);
        assert_eq!(classify(0.0, &recur).unwrap(), TrendClass::Periodic);
        assert_eq!(classify(2.0, &recur).unwrap(), TrendClass::Periodic);
        assert!(matches!(
            classify(-0.5, &recur),
            Err(TrendError::OutsideTaxonomy { .. })
        ));
    }

    #[test]
    fn fashion_instance_curves() {
        // L(t) = 0.5 e^(-t/2), U(t) = 0.5 e^(-0.1 (t - 0.1))
        let env = BoundEnvelope::fashion(0.0, 0.5, 0.5, 1.0, 0.1, 0.5, 0.1);
        for t in [0.2f64, 1.0, 3.7, 10.0] {
            assert_relative_eq!(
                env.lower(t).unwrap(),
                0.5 * (-t / 2.0).exp(),
                max_relative = 1e-15
            );
            assert_relative_eq!(
                env.upper(t).unwrap(),
                0.5 * (-0.1 * (t - 0.1)).exp(),
                max_relative = 1e-15
            );
        }
        assert!(env.upper(0.05).is_none());
        assert!(env.lower(0.05).is_some());
    }

    #[test]
    fn fad_instance_curves() {
        // p = -1: U(t) = 1/2 - t/4, L(t) = 1/2 - t/2
        let env = BoundEnvelope::fad(0.0, 0.5, 0.5, 1.0, -1.0, 0.0, 0.5);
        for t in [0.1, 0.5, 0.9] {
            assert_relative_eq!(env.upper(t).unwrap(), 0.5 - t / 4.0, epsilon = 1e-15);
            assert_relative_eq!(env.lower(t).unwrap(), 0.5 - t / 2.0, epsilon = 1e-15);
        }
        assert_eq!(env.lower(1.5).unwrap(), 0.0);
        let (lo, hi) = env.extinction_bracket().unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-15);
        assert_relative_eq!(hi, 2.0, epsilon = 1e-15);

        // p = -2: U(t) = (1/4 - t/2)^(1/2), L(t) = (1/4 - t)^(1/2)
        let env = BoundEnvelope::fad(0.0, 0.5, 0.5, 1.0, -2.0, 0.0, 0.5);
        for t in [0.05f64, 0.2] {
            assert_relative_eq!(
                env.upper(t).unwrap(),
                (0.25 - t / 2.0).sqrt(),
                epsilon = 1e-15
            );
            assert_relative_eq!(env.lower(t).unwrap(), (0.25 - t).sqrt(), epsilon = 1e-15);
        }

        // p = -1/2 with I(τ) = 2, C* = 1: U = (√2 - t/4)^2, L = (√2 - t/2)^2
        let env = BoundEnvelope::fad(0.0, 2.0, 1.0, 1.0, -0.5, 0.0, 2.0);
        let r2 = 2f64.sqrt();
        assert_relative_eq!(
            env.upper(1.0).unwrap(),
            (r2 - 0.25).powi(2),
            epsilon = 1e-14
        );
        assert_relative_eq!(env.lower(1.0).unwrap(), (r2 - 0.5).powi(2), epsilon = 1e-14);
    }

    #[test]
    fn classic_instance_curves() {
        // U = (√2 - (√2 - 1)(1 - e^(-t/4)))^(-2), L = (t/4 + √2)^(-2):
        // I(t*) = 1/2, p = 1/2, C* = 1/2, m1 = 1/2
        let env = BoundEnvelope::classic(0.0, 0.5, 0.5, 0.5, 0.5);
        let r2 = 2f64.sqrt();
        for t in [0.3f64, 2.0, 9.0] {
            let u = (r2 - (r2 - 1.0) * (1.0 - (-t / 4.0).exp())).powi(-2);
            let l = (t / 4.0 + r2).powi(-2);
            assert_relative_eq!(env.upper(t).unwrap(), u, max_relative = 1e-14);
            assert_relative_eq!(env.lower(t).unwrap(), l, max_relative = 1e-14);
        }
    }

    #[test]
    fn bounds_meet_at_the_anchor() {
        let env = BoundEnvelope::fashion(2.0, 0.8, 0.4, 20.0, 2.0, 0.8, 0.3);
        let t = 2.0 + 1e-9;
        assert_relative_eq!(env.lower(t).unwrap(), 0.8, max_relative = 1e-8);
        assert_relative_eq!(env.upper(t).unwrap(), 0.8, max_relative = 1e-8);
        let env = BoundEnvelope::classic(2.0, 0.8, 0.4, 20.0, 0.5);
        assert_relative_eq!(env.lower(t).unwrap(), 0.8, max_relative = 1e-7);
        assert_relative_eq!(env.upper(t).unwrap(), 0.8, max_relative = 1e-7);
    }

    #[test]
    fn trajectory_on_lower_bound_has_no_violations() {
        let env = BoundEnvelope::fashion(0.0, 0.5, 0.5, 1.0, 0.1, 0.5, 0.1);
        let traj = synthetic(&grid(200, 0.05), |t| 0.5 * (-t / 2.0).exp());
        let report = check_envelope(&traj, &env, 1e-12);
        assert!(report.passed());
        assert_eq!(report.samples_checked, 199);

        let bad = synthetic(&grid(200, 0.05), |t| 0.5 * (-t).exp());
        let report = check_envelope(&bad, &env, 1e-6);
        assert!(!report.passed());
        assert!(report.max_lower_violation > 0.0);
        assert_eq!(report.first_violation_time, Some(0.05));
    }

    #[test]
    fn tau_threshold_of_unit_ratio() {
        assert_eq!(tau_threshold(2.0 * 3.0, 3.0, -0.5), 1.0);
        assert_eq!(tau_threshold(2.0 * 7.0, 7.0, -2.0), 1.0);
    }

    #[test]
    fn exact_exponential_fit() {
        let traj = synthetic(&grid(100, 0.1), |t| (-0.3 * t).exp());
        let fit = fit_decay(&traj, 0.0, (0.0, 10.0)).unwrap();
        assert_relative_eq!(fit.slope, -0.3, max_relative = 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn exact_power_fit() {
        // I^(-1/2) = 1 + 0.2 t
        let traj = synthetic(&grid(100, 0.1), |t| (1.0 + 0.2 * t).powi(-2));
        let fit = fit_decay(&traj, 0.5, (0.0, 10.0)).unwrap();
        assert_relative_eq!(fit.slope, 0.2, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn fit_needs_eight_samples() {
        let traj = synthetic(&grid(100, 0.1), |t| (-t).exp());
        assert!(matches!(
            fit_decay(&traj, 0.0, (0.0, 0.65)),
            Err(TrendError::TooFewSamples { found: 7, .. })
        ));
        assert!(fit_decay(&traj, 0.0, (0.0, 0.705)).is_ok());
    }

    #[test]
    fn peak_counting() {
        let mono = synthetic(&grid(100, 0.1), |t| (-t).exp());
        assert_eq!(count_peaks(&mono, 0.01).count, 0);

        let two = synthetic(&grid(1000, 0.01), |t| 0.3 + 0.2 * (t * 1.5).sin());
        // maxima at t = π/3 + 4πk/3 inside [0, 10)
        let pc = count_peaks(&two, 0.01);
        assert_eq!(pc.count, 3);
        assert_relative_eq!(pc.prominences[0], 0.2, max_relative = 1e-3);

        // a wiggle smaller than the prominence threshold is ignored
        let wiggle = synthetic(&grid(1000, 0.01), |t| {
            (-(t - 3.0).powi(2)).exp() * 0.5 + 0.001 * (t * 20.0).sin()
        });
        assert_eq!(count_peaks(&wiggle, 0.01).count, 1);
    }

    #[test]
    fn lifetime_after_peak() {
        let traj = synthetic(&grid(1000, 0.01), |t| t * (-t).exp());
        // peak at t = 1, value e^-1; falls below 10% of it later
        let life = lifetime(&traj, 0.1).unwrap();
        assert!(life > 1.0);
        assert!(life * (-life).exp() < 0.1 * (-1f64).exp());
        let flat = synthetic(&grid(10, 0.1), |_| 0.5);
        assert_eq!(lifetime(&flat, 0.1), None);
    }
}
