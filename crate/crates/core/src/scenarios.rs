//! Built-in parameter sets and closed-form oracles.

use crate::analysis::{classify, TrendClass};
use crate::error::{Result, TrendError};
use crate::integrator::GridSpec;
use crate::model::{ModelParams, Phase, RecurrenceSpec, State};
use crate::scalar::Scalar;

/// A named, fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<T> {
    pub name: String,
    pub params: ModelParams<T>,
    /// Normalized initial fractions.
    pub init: State<T>,
    pub grid: GridSpec<T>,
    pub expected_class: TrendClass,
    /// Population used only to de/normalize head-counts for I/O.
    pub population: T,
}

/// Names accepted by [`builtin`], in registry order.
pub const SCENARIO_NAMES: [&str; 10] = [
    "sec41_p0.5",
    "sec41_p0",
    "sec41_p-0.5",
    "sec41_p-1.5",
    "sec42_fad",
    "sec42_fastfashion",
    "sec42_fashion",
    "sec42_classic",
    "sec43_const",
    "sec43_sinusoid",
];

struct Row {
    m: [f64; 4],
    l_alpha: f64,
    p: f64,
    recurrence: Recur,
}

enum Recur {
    None,
    Const(f64),
    Wave,
}

fn row(name: &str) -> Option<Row> {
    let sec41 = |p| Row {
        m: [20.0, 0.2, 0.5, 2.0],
        l_alpha: 0.0,
        p,
        recurrence: Recur::None,
    };
    let sec42 = |m, p| Row {
        m,
        l_alpha: 0.0,
        p,
        recurrence: Recur::None,
    };
    let sec43 = |recurrence| Row {
        m: [50.0, 8.0, 4.0, 0.5],
        l_alpha: 0.3,
        p: 0.0,
        recurrence,
    };
    Some(match name {
        "sec41_p0.5" | "sec41_p+0.5" => sec41(0.5),
        "sec41_p0" => sec41(0.0),
        "sec41_p-0.5" => sec41(-0.5),
        "sec41_p-1.5" => sec41(-1.5),
        "sec42_fad" => sec42([3.0, 0.2, 1.0, 4.0], -2.0),
        "sec42_fastfashion" => sec42([2.0, 0.03, 0.6, 1.5], -0.5),
        "sec42_fashion" => sec42([2.0, 0.05, 0.5, 2.0], 0.0),
        "sec42_classic" => sec42([1.2, 0.03, 0.2, 0.5], 6.0),
        "sec43_const" => sec43(Recur::Const(0.4)),
        "sec43_sinusoid" => sec43(Recur::Wave),
        _ => return None,
    })
}

/// Looks up a registered scenario.
pub fn builtin<T: Scalar>(name: &str) -> Result<ScenarioSpec<T>> {
    let unknown = || TrendError::UnknownScenario {
        name: name.to_string(),
        known: SCENARIO_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let row = row(name).ok_or_else(unknown)?;
    let canonical = if name == "sec41_p+0.5" {
        "sec41_p0.5"
    } else {
        name
    };
    let lit = T::lit;
    let recurrence = match row.recurrence {
        Recur::None => RecurrenceSpec::none(),
        Recur::Const(v) => RecurrenceSpec::Constant(lit(v)),
        Recur::Wave => RecurrenceSpec::Sinusoid {
            base: lit(0.4),
            amplitude: lit(0.5),
            angular_frequency: T::FRAC_PI_2(),
            phase: lit(-1.0),
        },
    };
    let params = ModelParams {
        m1: lit(row.m[0]),
        m2: lit(row.m[1]),
        m3: lit(row.m[2]),
        m4: lit(row.m[3]),
        l_alpha: lit(row.l_alpha),
        l_beta: T::zero(),
        p: lit(row.p),
        recurrence,
    };
    let (init, population, t_end) = if canonical.starts_with("sec42") {
        // head-counts S = 98, I = 2 in a population of 100
        (
            normalize(lit(98.0), lit(2.0), T::zero(), lit(100.0))?,
            lit(100.0),
            50.0,
        )
    } else if canonical.starts_with("sec43") {
        (State::new(lit(0.98), lit(0.02), T::zero()), T::one(), 30.0)
    } else {
        (State::new(lit(0.98), lit(0.02), T::zero()), T::one(), 50.0)
    };
    let expected_class = classify(params.p, &params.recurrence)?;
    Ok(ScenarioSpec {
        name: canonical.to_string(),
        params,
        init,
        grid: GridSpec::new(lit(t_end), lit(1e-3)),
        expected_class,
        population,
    })
}

/// Every registered scenario.
pub fn all<T: Scalar>() -> Vec<ScenarioSpec<T>> {
    SCENARIO_NAMES
        .iter()
        .map(|n| builtin(n).expect("registered scenario"))
        .collect()
}

/// Converts head-counts to fractions of `population`.
pub fn normalize<T: Scalar>(s: T, i: T, r: T, population: T) -> Result<State<T>> {
    if !(population > T::zero()) || !population.is_finite() {
        return Err(TrendError::Normalize(format!(
            "population must be finite and > 0, got {population}"
        )));
    }
    if [s, i, r].iter().any(|x| !x.is_finite() || *x < T::zero()) {
        return Err(TrendError::Normalize(format!(
            "head-counts must be finite and >= 0, got ({s}, {i}, {r})"
        )));
    }
    let total = s + i + r;
    if ((total - population) / population).abs() > T::lit(1e-9) {
        return Err(TrendError::Normalize(format!(
            "head-counts sum to {total}, not the population {population}"
        )));
    }
    Ok(State::new(s / population, i / population, r / population))
}

/// Closed form of `I' = -I^(p+1)`, `I(0) = i0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawSolution<T> {
    pub value: T,
    /// Finite for `p < 0` only.
    pub extinction_time: Option<T>,
}

/// Exact solution of the decoupled decay `I' = -I^(p+1)` at time `t`.
pub fn toy_power_law<T: Scalar>(p: T, i0: T, t: T) -> PowerLawSolution<T> {
    if p == T::zero() {
        return PowerLawSolution {
            value: i0 * (-t).exp(),
            extinction_time: None,
        };
    }
    let extinction_time = (p < T::zero()).then(|| i0.powf(-p) / (-p));
    let base = i0.powf(-p) + p * t;
    let value = if base <= T::zero() {
        T::zero()
    } else {
        base.powf(-T::one() / p)
    };
    PowerLawSolution {
        value,
        extinction_time,
    }
}

/// Poses `I' = -I^(p+1)` inside the full model: no potential adopters,
/// no recurrence, post-transition from `t = 0` with `C* = 1`.
pub fn toy_problem<T: Scalar>(p: T, i0: T) -> (ModelParams<T>, State<T>, Phase<T>) {
    let params = ModelParams {
        m1: T::one(),
        m2: T::one(),
        m3: T::one(),
        m4: T::one(),
        l_alpha: T::zero(),
        l_beta: T::zero(),
        p,
        recurrence: RecurrenceSpec::none(),
    };
    let init = State::new(T::zero(), i0, T::one() - i0);
    let phase = Phase::PostTransition {
        t_star: T::zero(),
        c_star: T::one(),
    };
    (params, init, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sec41_p0_parameters() {
        let s: ScenarioSpec<f64> = builtin("sec41_p0").unwrap();
        let k = s.params;
        assert_eq!((k.m1, k.m2, k.m3, k.m4), (20.0, 0.2, 0.5, 2.0));
        assert_eq!((k.l_alpha, k.l_beta, k.p), (0.0, 0.0, 0.0));
        assert!(k.recurrence.is_identically_zero());
        assert_eq!(s.init, State::new(0.98, 0.02, 0.0));
        assert_eq!(s.expected_class, TrendClass::Fashion);
    }

    #[test]
    fn sec42_fad_parameters() {
        let s: ScenarioSpec<f64> = builtin("sec42_fad").unwrap();
        let k = s.params;
        assert_eq!((k.m1, k.m2, k.m3, k.m4, k.p), (3.0, 0.2, 1.0, 4.0, -2.0));
        assert_eq!(s.init, State::new(0.98, 0.02, 0.0));
        assert_eq!(s.population, 100.0);
        assert_eq!(s.expected_class, TrendClass::Fad);
    }

    #[test]
    fn sec43_sinusoid_recurrence() {
        let s: ScenarioSpec<f64> = builtin("sec43_sinusoid").unwrap();
        assert_eq!(s.params.l_alpha, 0.3);
        for t in [0.0, 1.3, 7.9] {
            let want = 0.4 + 0.5 * (std::f64::consts::PI / 2.0 * t - 1.0).sin();
            assert_relative_eq!(s.params.recurrence.at(t), want, epsilon = 1e-15);
        }
        assert_eq!(s.expected_class, TrendClass::Periodic);
        assert_eq!(s.grid.t_end, 30.0);
    }

    #[test]
    fn registry_is_consistent() {
        for s in all::<f64>() {
            assert_eq!(
                s.expected_class,
                classify(s.params.p, &s.params.recurrence).unwrap()
            );
            assert!((s.init.total() - 1.0).abs() < 1e-15);
            assert!(s.params.validate().is_ok());
        }
        let plus: ScenarioSpec<f64> = builtin("sec41_p+0.5").unwrap();
        assert_eq!(plus.name, "sec41_p0.5");
        for name in ["sec41_p0.5", "sec41_p0", "sec41_p-0.5", "sec41_p-1.5"] {
            let s: ScenarioSpec<f64> = builtin(name).unwrap();
            assert_relative_eq!(s.params.m1 * s.init.s, 19.6, epsilon = 1e-12);
            assert!(s.params.guarantees_finite_peak(s.init.s));
        }
    }

    #[test]
    fn unknown_scenario_lists_names() {
        let err = builtin::<f64>("sec99").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sec41_p0") && msg.contains("sec43_sinusoid"));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize(98.0, 2.0, 0.0, 100.0).unwrap(),
            State::new(0.98, 0.02, 0.0)
        );
        assert_eq!(
            normalize(0.0, 7.0, 0.0, 7.0).unwrap(),
            State::new(0.0, 1.0, 0.0)
        );
        assert_eq!(
            normalize(1.0, 1.0, 2.0, 4.0).unwrap(),
            State::new(0.25, 0.25, 0.5)
        );
        assert!(normalize(1.0, 1.0, 2.0, 0.0).is_err());
        assert!(normalize(1.0, 1.0, 2.0, 5.0).is_err());
        assert!(normalize(-1.0, 3.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn toy_closed_forms() {
        let lin = toy_power_law(-1.0, 0.8, 0.3);
        assert_relative_eq!(lin.value, 0.5, epsilon = 1e-15);
        assert_relative_eq!(lin.extinction_time.unwrap(), 0.8, epsilon = 1e-15);
        assert_relative_eq!(toy_power_law(0.0, 0.8, 1.0).value, 0.8 * (-1f64).exp());
        assert!(toy_power_law(0.0, 0.8, 1.0).extinction_time.is_none());
        assert_relative_eq!(
            toy_power_law(-2.0, 0.8, 0.0).extinction_time.unwrap(),
            0.32,
            epsilon = 1e-15
        );
        assert_eq!(toy_power_law(-2.0, 0.8, 0.5).value, 0.0);
        assert!(toy_power_law(0.5, 0.8, 100.0).extinction_time.is_none());
    }

    #[test]
    fn toy_closed_form_satisfies_its_equation() {
        let h = 1e-5;
        for p in [0.5f64, 0.0, -0.5, -1.0, -2.0] {
            for t in [0.05, 0.1, 0.2, 0.25] {
                let f = |t: f64| toy_power_law(p, 0.8, t).value;
                let fd = (f(t + h) - f(t - h)) / (2.0 * h);
                let exact = -f(t).powf(p + 1.0);
                assert!((fd - exact).abs() < 1e-6, "p {p} t {t}: {fd} vs {exact}");
            }
        }
    }
}
