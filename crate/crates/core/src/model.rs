//! Trend-cycle compartments, rate functions and the rescaled right-hand side.
//!
//! The population is split into potential adopters `S`, current adopters `I`
//! and rejecters `R`, all stored as fractions of the total population:
//!
//! ```text
//! S' = -α(I) I S + δ(t) R
//! I' =  α(I) I S - β(I) I
//! R' =  β(I) I   - δ(t) R
//! ```
//!
//! `α` is a logistic adoption rate. `β` is a logistic rejection rate until the
//! first peak of `I` at `t*`, after which it becomes the power law
//! `C* I^p`, with `C*` chosen so that `β` is continuous across `t*`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrendError};
use crate::scalar::Scalar;

/// Rate at which rejecters re-enter the pool of potential adopters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecurrenceSpec<T> {
    Constant(T),
    /// `base + amplitude * sin(angular_frequency * t + phase)`. May go negative.
    Sinusoid {
        base: T,
        amplitude: T,
        angular_frequency: T,
        phase: T,
    },
}

impl<T: Scalar> RecurrenceSpec<T> {
    pub fn none() -> Self {
        RecurrenceSpec::Constant(T::zero())
    }

    pub fn at(&self, t: T) -> T {
        match *self {
            RecurrenceSpec::Constant(v) => v,
            RecurrenceSpec::Sinusoid {
                base,
                amplitude,
                angular_frequency,
                phase,
            } => base + amplitude * (angular_frequency * t + phase).sin(),
        }
    }

    /// True when `δ(t) = 0` for every `t`.
    pub fn is_identically_zero(&self) -> bool {
        match *self {
            RecurrenceSpec::Constant(v) => v == T::zero(),
            RecurrenceSpec::Sinusoid {
                base,
                amplitude,
                angular_frequency,
                phase,
            } => {
                if amplitude == T::zero() {
                    base == T::zero()
                } else if angular_frequency == T::zero() {
                    base + amplitude * phase.sin() == T::zero()
                } else {
                    false
                }
            }
        }
    }

    /// True when the rate can take negative values somewhere.
    pub fn can_be_negative(&self) -> bool {
        match *self {
            RecurrenceSpec::Constant(v) => v < T::zero(),
            RecurrenceSpec::Sinusoid {
                base,
                amplitude,
                angular_frequency,
                phase,
            } => {
                if angular_frequency == T::zero() {
                    base + amplitude * phase.sin() < T::zero()
                } else {
                    base - amplitude.abs() < T::zero()
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RecurrenceSpec::Constant(v) => {
                if !v.is_finite() || v < T::zero() {
                    return Err(TrendError::InvalidParameter {
                        name: "delta",
                        reason: format!(
                            "constant recurrence rate must be finite and >= 0, got {v}"
                        ),
                    });
                }
            }
            RecurrenceSpec::Sinusoid {
                base,
                amplitude,
                angular_frequency,
                phase,
            } => {
                if [base, amplitude, angular_frequency, phase]
                    .iter()
                    .any(|x| !x.is_finite())
                {
                    return Err(TrendError::InvalidParameter {
                        name: "delta",
                        reason: "sinusoid coefficients must be finite".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Evaluates the recurrence rate `δ(t)`.
pub fn recurrence_at<T: Scalar>(t: T, spec: &RecurrenceSpec<T>) -> T {
    spec.at(t)
}

/// Constants of the adoption and rejection rate functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Adoption intensity.
    pub m1: T,
    /// Adoption sharpness.
    pub m2: T,
    /// Rejection intensity.
    pub m3: T,
    /// Rejection sharpness.
    pub m4: T,
    /// Adoption delay.
    pub l_alpha: T,
    /// Rejection delay.
    pub l_beta: T,
    /// Exponent of the post-peak rejection power law.
    pub p: T,
    pub recurrence: RecurrenceSpec<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("m3", self.m3),
            ("m4", self.m4),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(TrendError::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        for (name, v) in [
            ("l_alpha", self.l_alpha),
            ("l_beta", self.l_beta),
            ("p", self.p),
        ] {
            if !v.is_finite() {
                return Err(TrendError::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        self.recurrence.validate()
    }

    /// `m1 S(0) > 2 m3`: the sufficient condition for a finite first peak.
    pub fn guarantees_finite_peak(&self, s0: T) -> bool {
        self.m1 * s0 > T::lit(2.0) * self.m3
    }

    pub fn has_zero_delays(&self) -> bool {
        self.l_alpha == T::zero() && self.l_beta == T::zero()
    }
}

/// Fractions of potential adopters, adopters and rejecters.
///
/// Also used for time derivatives of the same three quantities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T> {
    pub s: T,
    pub i: T,
    pub r: T,
}

impl<T: Scalar> State<T> {
    pub fn new(s: T, i: T, r: T) -> Self {
        State { s, i, r }
    }

    pub fn total(&self) -> T {
        self.s + self.i + self.r
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.i.is_finite() && self.r.is_finite()
    }

    /// True when every component lies in `[-slack, 1 + slack]`.
    pub fn within_unit_interval(&self, slack: T) -> bool {
        let lo = -slack;
        let hi = T::one() + slack;
        [self.s, self.i, self.r].iter().all(|&x| x >= lo && x <= hi)
    }

    pub fn min_component(&self) -> T {
        self.s.min(self.i).min(self.r)
    }
}

impl<T: Scalar> Add for State<T> {
    type Output = State<T>;
    fn add(self, o: Self) -> Self {
        State::new(self.s + o.s, self.i + o.i, self.r + o.r)
    }
}

impl<T: Scalar> Sub for State<T> {
    type Output = State<T>;
    fn sub(self, o: Self) -> Self {
        State::new(self.s - o.s, self.i - o.i, self.r - o.r)
    }
}

impl<T: Scalar> Mul<T> for State<T> {
    type Output = State<T>;
    fn mul(self, k: T) -> Self {
        State::new(self.s * k, self.i * k, self.r * k)
    }
}

/// Lifecycle of the rejection rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase<T> {
    /// Before the first peak: `β` is the logistic rejection rate.
    PreTransition,
    /// After the first peak at `t_star`: `β = c_star I^p`.
    PostTransition { t_star: T, c_star: T },
    /// `I` reached zero at `t_extinct` (only for `p < 0`); `β = 0`, `I` pinned to 0.
    Extinct { t_extinct: T },
}

impl<T: Scalar> Phase<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::PreTransition => "pre",
            Phase::PostTransition { .. } => "post",
            Phase::Extinct { .. } => "extinct",
        }
    }
}

fn logistic<T: Scalar>(height: T, sharpness: T, x: T, center: T) -> T {
    height / (T::one() + (-sharpness * (x - center)).exp())
}

/// Adoption rate `α(I) = m1 / (1 + exp(-m2 (I - l_alpha)))`.
pub fn adoption_rate<T: Scalar>(i: T, params: &ModelParams<T>) -> T {
    logistic(params.m1, params.m2, i, params.l_alpha)
}

/// Logistic rejection rate used up to the first peak.
pub fn sigmoid_rejection_rate<T: Scalar>(i: T, params: &ModelParams<T>) -> T {
    logistic(params.m3, params.m4, i, params.l_beta)
}

/// Rejection rate `β(I)` for the given phase.
///
/// Fails when the power law would raise `I <= 0` to a negative exponent.
pub fn rejection_rate<T: Scalar>(i: T, phase: &Phase<T>, params: &ModelParams<T>) -> Result<T> {
    match *phase {
        Phase::PreTransition => Ok(sigmoid_rejection_rate(i, params)),
        Phase::PostTransition { c_star, .. } => power_law(c_star, i, params.p),
        Phase::Extinct { .. } => Ok(T::zero()),
    }
}

fn power_law<T: Scalar>(c_star: T, i: T, p: T) -> Result<T> {
    if p == T::zero() {
        return Ok(c_star);
    }
    if i < T::zero() || (i == T::zero() && p < T::zero()) || !i.is_finite() {
        return Err(TrendError::Domain(format!(
            "power-law rejection rate undefined at I = {i} with p = {p}"
        )));
    }
    Ok(c_star * i.powf(p))
}

/// Continuity constant `C* = β(t*) I(t*)^(-p)`.
pub fn c_star<T: Scalar>(i_star: T, beta_star: T, p: T) -> Result<T> {
    if !(i_star > T::zero()) {
        return Err(TrendError::Domain(format!(
            "C* needs I(t*) > 0, got {i_star}"
        )));
    }
    if !(beta_star > T::zero()) {
        return Err(TrendError::Domain(format!(
            "C* needs beta(t*) > 0, got {beta_star}"
        )));
    }
    Ok(beta_star * i_star.powf(-p))
}

/// Right-hand side of the rescaled system. The three components sum to zero.
pub fn rhs<T: Scalar>(
    t: T,
    state: &State<T>,
    phase: &Phase<T>,
    params: &ModelParams<T>,
) -> Result<State<T>> {
    let alpha = adoption_rate(state.i, params);
    let beta = rejection_rate(state.i, phase, params)?;
    let delta = params.recurrence.at(t);
    let adopting = alpha * state.i * state.s;
    let rejecting = beta * state.i;
    let returning = delta * state.r;
    Ok(State::new(
        -adopting + returning,
        adopting - rejecting,
        rejecting - returning,
    ))
}

/// Second time derivative of `I`, evaluated analytically from the chain rule.
///
/// Used to build the cubic Hermite interpolant of `I'` when refining `t*`.
pub fn adopter_acceleration<T: Scalar>(
    t: T,
    state: &State<T>,
    phase: &Phase<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    let d = rhs(t, state, phase, params)?;
    let i = state.i;
    let alpha = adoption_rate(i, params);
    let dalpha_di = params.m2 * alpha * (T::one() - alpha / params.m1);
    let (beta, dbeta_di) = match *phase {
        Phase::PreTransition => {
            let b = sigmoid_rejection_rate(i, params);
            (b, params.m4 * b * (T::one() - b / params.m3))
        }
        Phase::PostTransition { c_star, .. } => {
            let b = power_law(c_star, i, params.p)?;
            let db = if params.p == T::zero() {
                T::zero()
            } else {
                params.p * b / i
            };
            (b, db)
        }
        Phase::Extinct { .. } => (T::zero(), T::zero()),
    };
    // I' = g I with g = α S - β
    let g = alpha * state.s - beta;
    let dg = dalpha_di * d.i * state.s + alpha * d.s - dbeta_di * d.i;
    Ok(dg * i + g * d.i)
}
