//! Step-size and regularization sequences `(gamma_n, alpha_n)`, indexed from
//! `n = 1`, and machine-checkable versions of the convergence hypotheses.
//!
//! For power laws `gamma_n = A / n^g`, `alpha_n = B / n^a` every asymptotic
//! clause reduces to exponent arithmetic and is decided exactly. Tabulated
//! schedules only admit finite-horizon necessary checks; their asymptotic
//! clauses are reported as [`Verdict::Undecidable`].

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Horizon of the finite-index scan in the step-bound clause of the
/// Tikhonov-gradient baseline theorem.
pub const XU_FINITE_SCAN: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    PowerLaw {
        a: f64,
        gamma_exp: f64,
        b: f64,
        alpha_exp: f64,
    },
    Constant {
        gamma: f64,
        b: f64,
        alpha_exp: f64,
    },
    Tabulated {
        gammas: Vec<f64>,
        alphas: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub gamma: f64,
    pub alpha: f64,
}

impl Schedule {
    pub fn new(kind: ScheduleKind) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("schedule.{name}"), format!("must be positive, got {v}")))
            }
        };
        match &kind {
            ScheduleKind::PowerLaw {
                a,
                gamma_exp,
                b,
                alpha_exp,
            } => {
                positive("A", *a)?;
                positive("B", *b)?;
                positive("alpha_exp", *alpha_exp)?;
                if !(gamma_exp.is_finite() && *gamma_exp >= 0.0) {
                    return Err(Error::invalid(
                        "schedule.gamma_exp",
                        format!("must be nonnegative, got {gamma_exp}"),
                    ));
                }
            }
            ScheduleKind::Constant {
                gamma,
                b,
                alpha_exp,
            } => {
                positive("gamma", *gamma)?;
                positive("B", *b)?;
                positive("alpha_exp", *alpha_exp)?;
            }
            ScheduleKind::Tabulated { gammas, alphas } => {
                if gammas.is_empty() || gammas.len() != alphas.len() {
                    return Err(Error::invalid(
                        "schedule.gammas",
                        format!(
                            "gammas and alphas must be nonempty and of equal length ({} vs {})",
                            gammas.len(),
                            alphas.len()
                        ),
                    ));
                }
                if let Some(i) = gammas.iter().position(|g| !(g.is_finite() && *g > 0.0)) {
                    return Err(Error::invalid(
                        "schedule.gammas",
                        format!("entry {} must be positive, got {}", i + 1, gammas[i]),
                    ));
                }
                if let Some(i) = alphas.iter().position(|a| !(a.is_finite() && *a >= 0.0)) {
                    return Err(Error::invalid(
                        "schedule.alphas",
                        format!("entry {} must be nonnegative, got {}", i + 1, alphas[i]),
                    ));
                }
            }
        }
        Ok(Schedule { kind })
    }

    pub fn power_law(a: f64, gamma_exp: f64, b: f64, alpha_exp: f64) -> Result<Self> {
        Self::new(ScheduleKind::PowerLaw {
            a,
            gamma_exp,
            b,
            alpha_exp,
        })
    }

    pub fn constant(gamma: f64, b: f64, alpha_exp: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant {
            gamma,
            b,
            alpha_exp,
        })
    }

    pub fn tabulated(gammas: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        Self::new(ScheduleKind::Tabulated { gammas, alphas })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Number of available terms; `None` for infinite schedules.
    pub fn len(&self) -> Option<u64> {
        match &self.kind {
            ScheduleKind::Tabulated { gammas, .. } => Some(gammas.len() as u64),
            _ => None,
        }
    }

    /// `(A, g, B, a)` for schedules of power-law shape.
    fn exponents(&self) -> Option<(f64, f64, f64, f64)> {
        match self.kind {
            ScheduleKind::PowerLaw {
                a,
                gamma_exp,
                b,
                alpha_exp,
            } => Some((a, gamma_exp, b, alpha_exp)),
            ScheduleKind::Constant {
                gamma,
                b,
                alpha_exp,
            } => Some((gamma, 0.0, b, alpha_exp)),
            ScheduleKind::Tabulated { .. } => None,
        }
    }

    pub fn step_at(&self, n: u64) -> Result<Step> {
        if n == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                valid: "n >= 1".into(),
            });
        }
        match &self.kind {
            ScheduleKind::Tabulated { gammas, alphas } => {
                let i = (n - 1) as usize;
                if i >= gammas.len() {
                    return Err(Error::IndexOutOfRange {
                        index: n,
                        valid: format!("1..={}", gammas.len()),
                    });
                }
                Ok(Step {
                    gamma: gammas[i],
                    alpha: alphas[i],
                })
            }
            _ => {
                let (a, g, b, alpha_exp) = self.exponents().expect("power-law shape");
                let nf = n as f64;
                Ok(Step {
                    gamma: if g == 0.0 { a } else { a / nf.powf(g) },
                    alpha: b / nf.powf(alpha_exp),
                })
            }
        }
    }

    fn horizon_limit(&self, horizon: u64) -> u64 {
        self.len().map_or(horizon, |len| horizon.min(len))
    }

    /// True iff `alpha_{n+1} <= alpha_n` for every `n < horizon` (clipped to the
    /// table length for tabulated schedules).
    pub fn is_alpha_decreasing(&self, horizon: u64) -> Result<bool> {
        if horizon < 2 {
            return Err(Error::invalid("horizon", "must be at least 2"));
        }
        if self.exponents().is_some() {
            return Ok(true);
        }
        Ok(self.first_alpha_increase(horizon).is_none())
    }

    fn first_alpha_increase(&self, horizon: u64) -> Option<u64> {
        let end = self.horizon_limit(horizon);
        let mut prev = self.step_at(1).ok()?.alpha;
        for n in 2..=end {
            let alpha = self.step_at(n).ok()?.alpha;
            if alpha > prev {
                return Some(n - 1);
            }
            prev = alpha;
        }
        None
    }

    /// `min_{n <= horizon} (1/gamma_n - L_n / 2)` with `L_n = L_f + alpha_n L_phi`.
    pub fn nu_margin(&self, l_f: f64, l_phi: f64, horizon: u64) -> Result<f64> {
        if horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        let end = self.horizon_limit(horizon);
        let mut margin = f64::INFINITY;
        for n in 1..=end {
            let s = self.step_at(n)?;
            margin = margin.min(nu_at(s, l_f, l_phi));
        }
        Ok(margin)
    }

    /// First index `n <= horizon` with a positive margin `1/gamma_n - L_n/2`.
    pub fn first_positive_nu(&self, l_f: f64, l_phi: f64, horizon: u64) -> Option<u64> {
        let end = self.horizon_limit(horizon);
        (1..=end).find(|&n| self.step_at(n).is_ok_and(|s| nu_at(s, l_f, l_phi) > 0.0))
    }

    /// Decide which convergence hypotheses the schedule satisfies for a
    /// gradient Lipschitz constant `l_f`.
    pub fn classify(&self, l_f: f64) -> ConditionReport {
        match self.exponents() {
            Some((a, g, b, alpha_exp)) => classify_power_law(self, a, g, b, alpha_exp, l_f),
            None => classify_tabulated(self, l_f),
        }
    }
}

pub(crate) fn nu_at(s: Step, l_f: f64, l_phi: f64) -> f64 {
    1.0 / s.gamma - (l_f + s.alpha * l_phi) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    No,
    /// Asymptotic property that finite data cannot decide.
    Undecidable,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Undecidable,
        }
    }

    fn not(self) -> Verdict {
        match self {
            Verdict::Yes => Verdict::No,
            Verdict::No => Verdict::Yes,
            Verdict::Undecidable => Verdict::Undecidable,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Undecidable => "undecidable-finite-data",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub verdict: Verdict,
    pub witness: String,
}

/// Which sets of hypotheses a schedule satisfies.
///
/// - `satisfies_c2`: `0 < liminf gamma_n <= limsup gamma_n < 2/L`.
/// - `satisfies_thm2_strong`: `0 < limsup gamma_n < 2/L`, `alpha_n` decreasing
///   to zero, and `sum gamma_n alpha_n = inf` (selection of the regularizer's
///   minimizer over the solution set, given a strongly convex regularizer).
/// - `satisfies_thm2_weak`: same step hypotheses with `sum gamma_n = inf` and
///   `sum gamma_n alpha_n < inf` (convergence to some minimizer).
/// - `satisfies_xu_th0`: the four clauses of the earlier Tikhonov-gradient
///   result, including `gamma_n <= alpha_n / (L + alpha_n)^2` for all `n`.
/// - `xu_exponent_regime`: the power-law region `0 < a < g < 1`, `2a + g < 1`
///   where that earlier result applies asymptotically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub satisfies_c2: Verdict,
    pub satisfies_thm2_strong: Verdict,
    pub satisfies_thm2_weak: Verdict,
    pub satisfies_xu_th0: Verdict,
    pub xu_exponent_regime: Verdict,
    pub clauses: Vec<Clause>,
}

impl ConditionReport {
    pub fn witnesses(&self) -> Vec<String> {
        self.clauses
            .iter()
            .filter(|c| c.verdict != Verdict::Yes)
            .map(|c| format!("{}: {}", c.name, c.witness))
            .collect()
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<34} {:<24} witness", "clause", "satisfied")?;
        for c in &self.clauses {
            writeln!(f, "{:<34} {:<24} {}", c.name, c.verdict.to_string(), c.witness)?;
        }
        writeln!(f)?;
        writeln!(f, "{:<34} {}", "C2 (gradient projection)", self.satisfies_c2)?;
        writeln!(f, "{:<34} {}", "thm2 strong (selection)", self.satisfies_thm2_strong)?;
        writeln!(f, "{:<34} {}", "thm2 weak (some minimizer)", self.satisfies_thm2_weak)?;
        writeln!(f, "{:<34} {}", "xu th0", self.satisfies_xu_th0)?;
        write!(f, "{:<34} {}", "xu exponent regime", self.xu_exponent_regime)
    }
}

fn clause(name: &'static str, verdict: Verdict, witness: impl Into<String>) -> Clause {
    Clause {
        name,
        verdict,
        witness: witness.into(),
    }
}

fn two_over_l(l_f: f64) -> f64 {
    if l_f > 0.0 {
        2.0 / l_f
    } else {
        f64::INFINITY
    }
}

fn classify_power_law(s: &Schedule, a: f64, g: f64, b: f64, alpha_exp: f64, l_f: f64) -> ConditionReport {
    let bound = two_over_l(l_f);
    let limsup = if g == 0.0 { a } else { 0.0 };

    let limsup_pos = clause(
        "limsup_gamma_positive",
        Verdict::from_bool(g == 0.0),
        if g == 0.0 {
            format!("limsup gamma_n = A = {a}")
        } else {
            format!("gamma_n = A/n^{g} -> 0")
        },
    );
    let liminf_pos = clause(
        "liminf_gamma_positive",
        limsup_pos.verdict,
        limsup_pos.witness.replace("limsup", "liminf"),
    );
    let below = clause(
        "limsup_gamma_below_2_over_L",
        Verdict::from_bool(limsup < bound),
        format!("limsup gamma_n = {limsup} vs 2/L = {bound}"),
    );
    let alpha_to_zero = clause(
        "alpha_decreasing_to_zero",
        Verdict::from_bool(alpha_exp > 0.0),
        format!("alpha_n = B/n^{alpha_exp}"),
    );
    let sum_gamma = clause(
        "sum_gamma_diverges",
        Verdict::from_bool(g <= 1.0),
        format!("p-series exponent g = {g}"),
    );
    let sum_ga = clause(
        "sum_gamma_alpha_diverges",
        Verdict::from_bool(g + alpha_exp <= 1.0),
        format!("p-series exponent g + a = {}", g + alpha_exp),
    );

    // gamma_n <= alpha_n / (L + alpha_n)^2: asymptotically needs g > a, or
    // g == a with A L^2 < B; then scan the first indices.
    let asymptotic = g > alpha_exp || (g == alpha_exp && a * l_f * l_f < b);
    let xu_step = if !asymptotic {
        clause(
            "xu_step_bound",
            Verdict::No,
            format!("gamma_n / alpha_n does not vanish fast enough (g = {g}, a = {alpha_exp})"),
        )
    } else {
        let violation = (1..=XU_FINITE_SCAN).find(|&n| {
            let st = s.step_at(n).expect("infinite schedule");
            st.gamma > st.alpha / (l_f + st.alpha).powi(2)
        });
        match violation {
            Some(n) => clause(
                "xu_step_bound",
                Verdict::No,
                format!("gamma_n > alpha_n/(L+alpha_n)^2 at n = {n}"),
            ),
            None => clause(
                "xu_step_bound",
                Verdict::Yes,
                format!("holds asymptotically and for n <= {XU_FINITE_SCAN}"),
            ),
        }
    };
    let xu_variation = clause(
        "xu_variation",
        Verdict::from_bool((g == 0.0 || 2.0 * alpha_exp + g < 1.0) && alpha_exp + g < 1.0),
        format!("needs (g = 0 or 2a + g < 1) and a + g < 1; 2a + g = {}", 2.0 * alpha_exp + g),
    );

    let c2 = liminf_pos.verdict.and(below.verdict);
    let hyp = limsup_pos
        .verdict
        .and(below.verdict)
        .and(alpha_to_zero.verdict);
    let strong = hyp.and(sum_ga.verdict);
    let weak = hyp.and(sum_gamma.verdict).and(sum_ga.verdict.not());
    let xu = xu_step
        .verdict
        .and(alpha_to_zero.verdict)
        .and(sum_ga.verdict)
        .and(xu_variation.verdict);
    let regime = Verdict::from_bool(
        0.0 < alpha_exp && alpha_exp < g && g < 1.0 && 2.0 * alpha_exp + g < 1.0,
    );

    ConditionReport {
        satisfies_c2: c2,
        satisfies_thm2_strong: strong,
        satisfies_thm2_weak: weak,
        satisfies_xu_th0: xu,
        xu_exponent_regime: regime,
        clauses: vec![
            liminf_pos,
            limsup_pos,
            below,
            alpha_to_zero,
            sum_gamma,
            sum_ga,
            xu_step,
            xu_variation,
        ],
    }
}

fn classify_tabulated(s: &Schedule, l_f: f64) -> ConditionReport {
    let len = s.len().expect("tabulated");
    let undecidable = |name, what: &str| {
        clause(
            name,
            Verdict::Undecidable,
            format!("{what} is asymptotic; only {len} terms given"),
        )
    };

    let alpha_clause = match s.first_alpha_increase(len) {
        Some(n) => clause(
            "alpha_decreasing_to_zero",
            Verdict::No,
            format!("alpha_{} > alpha_{n}", n + 1),
        ),
        None => {
            let first = s.step_at(1).expect("nonempty").alpha;
            let last = s.step_at(len).expect("nonempty").alpha;
            let witness = if last >= first {
                format!("nonincreasing over {len} terms but does not converge to zero over finite data")
            } else {
                format!("nonincreasing over {len} terms; convergence to zero undecidable")
            };
            clause("alpha_decreasing_to_zero", Verdict::Undecidable, witness)
        }
    };

    let xu_violation = (1..=len).find(|&n| {
        let st = s.step_at(n).expect("in range");
        st.gamma > st.alpha / (l_f + st.alpha).powi(2)
    });
    let xu_step = match xu_violation {
        Some(n) => clause(
            "xu_step_bound",
            Verdict::No,
            format!("gamma_n > alpha_n/(L+alpha_n)^2 at n = {n}"),
        ),
        None => clause(
            "xu_step_bound",
            Verdict::Undecidable,
            format!("holds for all {len} terms; later terms unknown"),
        ),
    };

    let thm2 = if alpha_clause.verdict == Verdict::No {
        Verdict::No
    } else {
        Verdict::Undecidable
    };
    let xu = if xu_step.verdict == Verdict::No {
        Verdict::No
    } else {
        Verdict::Undecidable
    };

    ConditionReport {
        satisfies_c2: Verdict::Undecidable,
        satisfies_thm2_strong: thm2,
        satisfies_thm2_weak: thm2,
        satisfies_xu_th0: xu,
        xu_exponent_regime: Verdict::Undecidable,
        clauses: vec![
            undecidable("liminf_gamma_positive", "liminf gamma_n"),
            undecidable("limsup_gamma_positive", "limsup gamma_n"),
            undecidable("limsup_gamma_below_2_over_L", "limsup gamma_n"),
            alpha_clause,
            undecidable("sum_gamma_diverges", "divergence of sum gamma_n"),
            undecidable("sum_gamma_alpha_diverges", "divergence of sum gamma_n alpha_n"),
            xu_step,
            undecidable("xu_variation", "the variation ratio limit"),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_at_examples() {
        let s = Schedule::power_law(1.0, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(s.step_at(4).unwrap(), Step { gamma: 1.0, alpha: 0.5 });
        let s = Schedule::power_law(2.0, 1.0, 3.0, 1.0).unwrap();
        assert_eq!(s.step_at(2).unwrap(), Step { gamma: 1.0, alpha: 1.5 });
        let s = Schedule::constant(0.1, 1.0, 0.3).unwrap();
        assert_eq!(s.step_at(1).unwrap(), Step { gamma: 0.1, alpha: 1.0 });
    }

    #[test]
    fn step_at_rejects_zero_and_out_of_range() {
        let s = Schedule::constant(0.1, 1.0, 0.3).unwrap();
        assert!(s.step_at(0).is_err());
        let t = Schedule::tabulated(vec![1.0, 1.0], vec![1.0, 0.5]).unwrap();
        assert!(t.step_at(2).is_ok());
        assert!(matches!(t.step_at(3), Err(Error::IndexOutOfRange { index: 3, .. })));
    }

    #[test]
    fn invalid_schedules_rejected() {
        assert!(Schedule::power_law(0.0, 0.0, 1.0, 0.5).is_err());
        assert!(Schedule::power_law(1.0, -0.1, 1.0, 0.5).is_err());
        assert!(Schedule::power_law(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(Schedule::tabulated(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(Schedule::tabulated(vec![0.0], vec![1.0]).is_err());
        assert!(Schedule::tabulated(vec![1.0], vec![-1.0]).is_err());
    }

    #[test]
    fn constant_step_power_law_is_strong_but_not_xu() {
        // L = 1, A = 0.5 * 2/L
        let r = Schedule::power_law(1.0, 0.0, 1.0, 0.5).unwrap().classify(1.0);
        assert_eq!(r.satisfies_thm2_strong, Verdict::Yes);
        assert_eq!(r.satisfies_thm2_weak, Verdict::No);
        assert_eq!(r.satisfies_xu_th0, Verdict::No);
        assert_eq!(r.satisfies_c2, Verdict::Yes);
        assert_eq!(r.clause("xu_step_bound").unwrap().verdict, Verdict::No);
    }

    #[test]
    fn vanishing_steps_are_in_xu_regime_only() {
        let r = Schedule::power_law(1.0, 0.4, 1.0, 0.2).unwrap().classify(1.0);
        assert_eq!(r.xu_exponent_regime, Verdict::Yes);
        assert_eq!(r.satisfies_thm2_strong, Verdict::No);
        assert_eq!(r.clause("limsup_gamma_positive").unwrap().verdict, Verdict::No);
        // gamma_1 = 1 > 1/(1+1)^2 at n = 1
        assert_eq!(r.satisfies_xu_th0, Verdict::No);
        assert!(r.clause("xu_step_bound").unwrap().witness.contains("n = 1"));
    }

    #[test]
    fn xu_holds_with_small_constants() {
        // gamma_n = 0.01 n^-0.4, alpha_n = n^-0.2, L = 1: gamma_1 = 0.01 <= 1/4.
        let r = Schedule::power_law(0.01, 0.4, 1.0, 0.2).unwrap().classify(1.0);
        assert_eq!(r.satisfies_xu_th0, Verdict::Yes);
    }

    #[test]
    fn summable_product_is_weak() {
        let r = Schedule::power_law(0.1, 0.0, 1.0, 1.5).unwrap().classify(1.0);
        assert_eq!(r.satisfies_thm2_weak, Verdict::Yes);
        assert_eq!(r.satisfies_thm2_strong, Verdict::No);
    }

    #[test]
    fn step_too_large_fails_everything() {
        let r = Schedule::constant(1.5, 1.0, 0.5).unwrap().classify(2.0);
        assert_eq!(r.satisfies_c2, Verdict::No);
        assert_eq!(r.satisfies_thm2_strong, Verdict::No);
        assert_eq!(r.satisfies_thm2_weak, Verdict::No);
    }

    #[test]
    fn alpha_monotonicity() {
        let s = Schedule::power_law(1.0, 0.0, 1.0, 0.5).unwrap();
        assert!(s.is_alpha_decreasing(100_000).unwrap());
        let t = Schedule::tabulated(vec![1.0; 3], vec![1.0, 0.5, 0.7]).unwrap();
        assert!(!t.is_alpha_decreasing(3).unwrap());
        let flat = Schedule::tabulated(vec![1.0; 3], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(flat.is_alpha_decreasing(3).unwrap());
        let r = flat.classify(1.0);
        let c = r.clause("alpha_decreasing_to_zero").unwrap();
        assert_eq!(c.verdict, Verdict::Undecidable);
        assert!(c.witness.contains("does not converge to zero"));
        assert!(s.is_alpha_decreasing(1).is_err());
    }

    #[test]
    fn tabulated_classification() {
        let t = Schedule::tabulated(vec![0.5; 3], vec![1.0, 0.5, 0.7]).unwrap();
        let r = t.classify(2.0);
        assert_eq!(r.satisfies_c2, Verdict::Undecidable);
        assert_eq!(r.satisfies_thm2_strong, Verdict::No);
        assert_eq!(r.satisfies_xu_th0, Verdict::No);
        let ok = Schedule::tabulated(vec![0.01; 3], vec![1.0, 0.5, 0.25]).unwrap();
        let r = ok.classify(1.0);
        assert_eq!(r.satisfies_thm2_strong, Verdict::Undecidable);
        assert_eq!(r.satisfies_xu_th0, Verdict::Undecidable);
    }

    #[test]
    fn nu_margin_examples() {
        let s = Schedule::constant(1.0, 1.0, 0.5).unwrap();
        assert_eq!(s.nu_margin(1.0, 0.0, 10).unwrap(), 0.5);
        let s = Schedule::constant(1.9999, 1.0, 0.5).unwrap();
        let m = s.nu_margin(1.0, 0.0, 10).unwrap();
        assert!((m - (1.0 / 1.9999 - 0.5)).abs() < 1e-15 && m > 0.0);
        let s = Schedule::constant(1.0, 2.0, 0.5).unwrap();
        assert_eq!(s.nu_margin(1.0, 1.0, 10).unwrap(), -0.5);
        // alpha_n = 2 n^-0.5 < 1 once n > 4
        assert_eq!(s.first_positive_nu(1.0, 1.0, 100), Some(5));
    }
}
