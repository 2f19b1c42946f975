//! Numerical checkers for the two real-sequence lemmas.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack when comparing a trajectory against its explicit bound.
pub const LEMMA5_BOUND_TOL: f64 = 1e-9;

/// Nonnegative sequence generators, evaluated at integer indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SequenceKind {
    Zero,
    Constant(f64),
    /// `scale * n^(-exponent)`
    Power { scale: f64, exponent: f64 },
    /// `scale / ln(n + 2)`
    InverseLog { scale: f64 },
    /// `scale * ratio^n`
    Geometric { scale: f64, ratio: f64 },
}

impl SequenceKind {
    pub fn at(&self, n: u64) -> f64 {
        let x = n as f64;
        match *self {
            SequenceKind::Zero => 0.0,
            SequenceKind::Constant(c) => c,
            SequenceKind::Power { scale, exponent } => scale * x.powf(-exponent),
            SequenceKind::InverseLog { scale } => scale / (x + 2.0).ln(),
            SequenceKind::Geometric { scale, ratio } => scale * ratio.powf(x),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let ok = match *self {
            SequenceKind::Zero => true,
            SequenceKind::Constant(c) => c >= 0.0 && c.is_finite(),
            SequenceKind::Power { scale, exponent } => {
                scale >= 0.0 && scale.is_finite() && exponent >= 0.0 && exponent.is_finite()
            }
            SequenceKind::InverseLog { scale } => scale >= 0.0 && scale.is_finite(),
            SequenceKind::Geometric { scale, ratio } => {
                scale >= 0.0 && scale.is_finite() && (0.0..=1.0).contains(&ratio)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(field, format!("parameters out of range: {self}")))
        }
    }

    /// Whether the series of the sequence diverges.
    pub fn sum_diverges(&self) -> bool {
        match *self {
            SequenceKind::Zero => false,
            SequenceKind::Constant(c) => c > 0.0,
            SequenceKind::Power { scale, exponent } => scale > 0.0 && exponent <= 1.0,
            SequenceKind::InverseLog { scale } => scale > 0.0,
            SequenceKind::Geometric { scale, ratio } => scale > 0.0 && ratio == 1.0,
        }
    }

    pub fn tends_to_zero(&self) -> bool {
        match *self {
            SequenceKind::Zero | SequenceKind::InverseLog { .. } => true,
            SequenceKind::Constant(c) => c == 0.0,
            SequenceKind::Power { scale, exponent } => scale == 0.0 || exponent > 0.0,
            SequenceKind::Geometric { scale, ratio } => scale == 0.0 || ratio < 1.0,
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SequenceKind::Zero => write!(f, "0"),
            SequenceKind::Constant(c) => write!(f, "{c}"),
            SequenceKind::Power { scale, exponent } => write!(f, "{scale}*n^-{exponent}"),
            SequenceKind::InverseLog { scale } => write!(f, "{scale}/ln(n+2)"),
            SequenceKind::Geometric { scale, ratio } => write!(f, "{scale}*{ratio}^n"),
        }
    }
}

/// `u_{n+1} <= (1 - eps_n) u_n + r_n eps_n + delta_n` from `u_{first} = u0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaFiveInstance {
    pub eps: SequenceKind,
    pub r: SequenceKind,
    pub delta: SequenceKind,
    pub u0: f64,
    /// Index of `u0`; at least 1 so power laws are defined.
    pub first_index: u64,
    /// Drives the contraction factors of sub-equality trajectories.
    pub seed: u64,
}

/// Which of the lemma's hypotheses the generators satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaFiveHypotheses {
    pub eps_sum_diverges: bool,
    pub r_tends_to_zero: bool,
    pub delta_summable: bool,
}

impl LemmaFiveInstance {
    pub fn new(eps: SequenceKind, r: SequenceKind, delta: SequenceKind, u0: f64) -> Result<Self> {
        let inst = LemmaFiveInstance {
            eps,
            r,
            delta,
            u0,
            first_index: 1,
            seed: 0,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn starting_at(mut self, first_index: u64) -> Result<Self> {
        self.first_index = first_index;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        self.eps.validate("eps")?;
        self.r.validate("r")?;
        self.delta.validate("delta")?;
        if !(self.u0 >= 0.0 && self.u0.is_finite()) {
            return Err(Error::invalid("u0", "must be nonnegative and finite"));
        }
        if self.first_index == 0 {
            return Err(Error::invalid("first_index", "must be at least 1"));
        }
        // Every generator is nonincreasing, so the first term is the largest.
        let e = self.eps.at(self.first_index);
        if e > 1.0 {
            return Err(Error::invalid("eps", format!("eps_{} = {e} exceeds 1", self.first_index)));
        }
        Ok(())
    }

    pub fn hypotheses(&self) -> LemmaFiveHypotheses {
        LemmaFiveHypotheses {
            eps_sum_diverges: self.eps.sum_diverges(),
            r_tends_to_zero: self.r.tends_to_zero(),
            delta_summable: !self.delta.sum_diverges(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaFiveReport {
    /// `u` at index `first_index + horizon`.
    pub final_u: f64,
    /// Largest `u` over the last tenth of the indices.
    pub tail_max: f64,
    /// Largest `u_n - bound_n`, relative to `1 + bound_n`; nonpositive when
    /// the explicit bound holds everywhere.
    pub max_bound_excess: f64,
    pub bound_respected: bool,
    /// `tail_max / sup r~` over the same tail, where `r~` is `r` plus the
    /// remaining `delta` mass; `None` when that supremum vanishes.
    pub empirical_constant: Option<f64>,
    /// `tail_max <= e * sup r~` over the tail.
    pub within_factor_e: bool,
    pub hypotheses: LemmaFiveHypotheses,
}

/// `u_first, ..., u_{first + horizon}`. With `saturate` the recursion holds
/// with equality; otherwise each right-hand side is scaled by a seeded
/// factor in `[0.5, 1]`.
pub fn lemma5_trajectory(inst: &LemmaFiveInstance, horizon: u64, saturate: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    let mut u = Vec::with_capacity(horizon as usize + 1);
    let mut cur = inst.u0;
    u.push(cur);
    for n in inst.first_index..inst.first_index + horizon {
        let e = inst.eps.at(n);
        let rhs = (1.0 - e) * cur + inst.r.at(n) * e + inst.delta.at(n);
        cur = if saturate { rhs } else { rhs * rng.random_range(0.5..=1.0) };
        u.push(cur);
    }
    u
}

/// The bound obtained by absorbing the remaining `delta` mass into `u` and
/// `r` and unrolling `u_{n+1} <= exp(-eps_n) u_n + eps_n r_n`:
/// `S_first = u0 + T_first`, `S_{n+1} = exp(-eps_n) S_n + eps_n (r_n + T_n)`,
/// `bound_n = S_n - T_n` with `T_n` the sum of `delta_k` over `n <= k < first + horizon`.
pub fn lemma5_bound(inst: &LemmaFiveInstance, horizon: u64) -> Vec<f64> {
    let h = horizon as usize;
    let first = inst.first_index;
    let mut tails = vec![0.0; h + 1];
    for i in (0..h).rev() {
        tails[i] = tails[i + 1] + inst.delta.at(first + i as u64);
    }
    let mut bound = Vec::with_capacity(h + 1);
    let mut s = inst.u0 + tails[0];
    bound.push(s - tails[0]);
    for i in 0..h {
        let n = first + i as u64;
        let e = inst.eps.at(n);
        s = (-e).exp() * s + e * (inst.r.at(n) + tails[i]);
        bound.push(s - tails[i + 1]);
    }
    bound
}

pub fn lemma5_simulate(inst: &LemmaFiveInstance, horizon: u64, saturate: bool) -> Result<LemmaFiveReport> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    let u = lemma5_trajectory(inst, horizon, saturate);
    let bound = lemma5_bound(inst, horizon);
    let max_bound_excess = u
        .iter()
        .zip(&bound)
        .map(|(u, b)| (u - b) / (1.0 + b.abs()))
        .fold(f64::NEG_INFINITY, f64::max);

    let h = horizon as usize;
    let tail_start = h - h.div_ceil(10);
    let tail_max = u[tail_start..].iter().copied().fold(0.0, f64::max);
    let mut remaining: f64 = (tail_start..h)
        .map(|i| inst.delta.at(inst.first_index + i as u64))
        .sum();
    let mut r_sup = 0.0f64;
    for i in tail_start..=h {
        let n = inst.first_index + i as u64;
        r_sup = r_sup.max(inst.r.at(n) + remaining);
        if i < h {
            remaining -= inst.delta.at(n);
        }
    }
    Ok(LemmaFiveReport {
        final_u: u[h],
        tail_max,
        max_bound_excess,
        bound_respected: max_bound_excess <= LEMMA5_BOUND_TOL,
        empirical_constant: (r_sup > 0.0).then(|| tail_max / r_sup),
        within_factor_e: tail_max <= std::f64::consts::E * r_sup,
        hypotheses: inst.hypotheses(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaThreeReport {
    /// `x_n + sum_{k >= n} delta_k` never increases.
    pub auxiliary_nonincreasing: bool,
    pub limit_estimate: f64,
    /// `delta` mass beyond the last term of `x`.
    pub error_bound: f64,
    pub converges: bool,
}

/// Checks `x_{n+1} <= x_n + delta_n` for a nonnegative sequence with
/// `x_seq[0] = x_1` and `delta_seq[0] = delta_1`, then inspects the
/// auxiliary sequence over the finite horizon. `delta_seq` may extend past
/// `x_seq`; the extra terms form the error bound.
pub fn lemma3_check(x_seq: &[f64], delta_seq: &[f64]) -> Result<LemmaThreeReport> {
    if x_seq.is_empty() {
        return Err(Error::invalid("x_seq", "must not be empty"));
    }
    if delta_seq.len() + 1 < x_seq.len() {
        return Err(Error::invalid(
            "delta_seq",
            format!("needs at least {} terms, got {}", x_seq.len() - 1, delta_seq.len()),
        ));
    }
    if let Some(i) = x_seq.iter().position(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(Error::invalid("x_seq", format!("term {} must be nonnegative and finite", i + 1)));
    }
    if let Some(i) = delta_seq.iter().position(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid("delta_seq", format!("term {} must be nonnegative and finite", i + 1)));
    }
    for (i, w) in x_seq.windows(2).enumerate() {
        let slack = 1e-12 * (1.0 + w[0].abs());
        if w[1] > w[0] + delta_seq[i] + slack {
            return Err(Error::HypothesisViolation {
                index: i + 1,
                detail: format!("x_{} = {} > x_{} + delta_{} = {}", i + 2, w[1], i + 1, i + 1, w[0] + delta_seq[i]),
            });
        }
    }
    let mut tail: f64 = delta_seq.iter().sum();
    let mut aux = Vec::with_capacity(x_seq.len());
    for (i, x) in x_seq.iter().enumerate() {
        aux.push(x + tail);
        if i < delta_seq.len() {
            tail -= delta_seq[i];
        }
    }
    let auxiliary_nonincreasing = aux
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
    let error_bound = delta_seq[x_seq.len() - 1..].iter().sum();
    Ok(LemmaThreeReport {
        auxiliary_nonincreasing,
        limit_estimate: *x_seq.last().expect("nonempty"),
        error_bound,
        converges: auxiliary_nonincreasing,
    })
}
