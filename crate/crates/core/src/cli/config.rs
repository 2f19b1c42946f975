//! Experiment configuration files.
//!
//! A config is a TOML document:
//!
//! ```toml
//! mode = "GGP"              # GP or GGP
//! seed = 7
//! log_every = 1             # omit for geometric thinning
//! output_dir = "out"
//! starts = [[4.0, 0.0], [0.0, 4.0]]
//! random_starts = 3         # extra starts drawn from the set with `seed`
//!
//! [objective]
//! kind = "least_squares"    # quadratic (a, b, c) | least_squares (m, y) | huberized_norm (dim, delta)
//! m = [[1.0, 1.0]]
//! y = [2.0]
//! # shift = [..]            # optional: evaluate at x - shift
//!
//! [set]
//! kind = "box"              # box (lower, upper) | ball (center, radius) | simplex (dim, scale)
//! lower = [0.0, 0.0]        # | halfspace (normal, offset) | hyperplane (normal, offset) | whole_space (dim)
//! upper = [10.0, 10.0]
//!
//! [regularizer]
//! kind = "half_squared_norm"  # half_squared_norm | half_squared_distance (center) | quadratic (a, b, c)
//!
//! [schedule]
//! kind = "power_law"        # power_law (A, gamma_exp, B, alpha_exp) | constant (gamma, B, alpha_exp)
//! A = 0.5                   # | tabulated (gammas, alphas)
//! gamma_exp = 0.0
//! B = 1.0
//! alpha_exp = 0.5
//!
//! [stop]
//! max_iterations = 100000
//! step_tolerance = 0.0
//! wall_clock_seconds = 60.0
//!
//! [verify]
//! f_gap_max = 1e-4
//! dist_to_target_max = 1e-2
//! dist_to_set_max = 1e-2
//! spread_max = 1e-2
//! audit_iterations = 10000
//! oracle_fallback = false
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, SetKind, Vector};
use crate::linalg::Matrix;
use crate::objectives::{ObjectiveKind, Regularizer, SmoothObjective};
use crate::schedules::{Schedule, ScheduleKind};
use crate::solver::{LogSchedule, Mode, ProblemInstance, StopRule};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyThresholds {
    pub f_gap_max: f64,
    pub dist_to_target_max: f64,
    pub dist_to_set_max: f64,
    pub spread_max: f64,
    /// Length of the densely logged run the audits inspect.
    pub audit_iterations: u64,
    /// Use the long-run numerical oracle when no exact one applies.
    pub oracle_fallback: bool,
}

impl Default for VerifyThresholds {
    fn default() -> Self {
        VerifyThresholds {
            f_gap_max: 1e-4,
            dist_to_target_max: 1e-2,
            dist_to_set_max: 1e-2,
            spread_max: 1e-2,
            audit_iterations: 10_000,
            oracle_fallback: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    /// `None` means geometric thinning.
    pub log_every: Option<u64>,
    pub output_dir: PathBuf,
    pub starts: Vec<Vector>,
    pub random_starts: usize,
    pub objective: SmoothObjective,
    pub set: Option<ConvexSet>,
    pub regularizer: Option<Regularizer>,
    pub schedule: Schedule,
    pub stop: StopRule,
    pub verify: VerifyThresholds,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        raw.build()
    }

    pub fn logging(&self) -> LogSchedule {
        self.log_every.map_or(LogSchedule::Geometric, LogSchedule::Every)
    }

    pub fn require_set(&self) -> Result<&ConvexSet> {
        self.set.as_ref().ok_or_else(|| Error::invalid("set", "section is required"))
    }

    /// Listed starts followed by `random_starts` points sampled from the set.
    pub fn all_starts(&self) -> Result<Vec<Vector>> {
        let set = self.require_set()?;
        let mut starts = self.starts.clone();
        if self.random_starts > 0 {
            starts.extend(set.support_sample(self.seed, self.random_starts)?);
        }
        if starts.is_empty() {
            return Err(Error::invalid("starts", "need at least one start (or random_starts > 0)"));
        }
        Ok(starts)
    }

    pub fn problem(&self, start: Vector) -> Result<ProblemInstance> {
        ProblemInstance::new(
            self.objective.clone(),
            self.require_set()?.clone(),
            self.regularizer.clone(),
            self.schedule.clone(),
            start,
        )
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    seed: Option<u64>,
    log_every: Option<u64>,
    output_dir: Option<PathBuf>,
    starts: Option<Vec<Vec<f64>>>,
    random_starts: Option<usize>,
    objective: Option<RawObjective>,
    set: Option<RawSet>,
    regularizer: Option<RawRegularizer>,
    schedule: Option<RawSchedule>,
    stop: Option<RawStop>,
    verify: Option<RawVerify>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObjective {
    kind: String,
    a: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    c: Option<f64>,
    m: Option<Vec<Vec<f64>>>,
    y: Option<Vec<f64>>,
    dim: Option<usize>,
    delta: Option<f64>,
    shift: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    kind: String,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    center: Option<Vec<f64>>,
    radius: Option<f64>,
    dim: Option<usize>,
    scale: Option<f64>,
    normal: Option<Vec<f64>>,
    offset: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegularizer {
    kind: String,
    center: Option<Vec<f64>>,
    a: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    c: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    kind: String,
    #[serde(rename = "A")]
    a: Option<f64>,
    gamma_exp: Option<f64>,
    #[serde(rename = "B")]
    b: Option<f64>,
    alpha_exp: Option<f64>,
    gamma: Option<f64>,
    gammas: Option<Vec<f64>>,
    alphas: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStop {
    max_iterations: Option<u64>,
    step_tolerance: Option<f64>,
    wall_clock_seconds: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    f_gap_max: Option<f64>,
    dist_to_target_max: Option<f64>,
    dist_to_set_max: Option<f64>,
    spread_max: Option<f64>,
    audit_iterations: Option<u64>,
    oracle_fallback: Option<bool>,
}

fn req<T>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(field, "is required"))
}

fn vector(values: Vec<f64>, field: &str) -> Result<Vector> {
    Vector::new(values).map_err(|e| Error::invalid(field, e.to_string()))
}

fn matrix(rows: Vec<Vec<f64>>, field: &str) -> Result<Matrix> {
    Matrix::from_rows(rows).map_err(|e| Error::invalid(field, e.to_string()))
}

fn expect_dim(found: usize, expected: usize, field: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("dimension {found} does not match the set dimension {expected}")))
    }
}

impl RawConfig {
    fn build(self) -> Result<ExperimentConfig> {
        let set = self.set.map(RawSet::build).transpose()?;
        let objective = req(self.objective, "objective")?.build()?;
        let regularizer = self.regularizer.map(|r| r.build(objective.dim())).transpose()?;
        let schedule = req(self.schedule, "schedule")?.build()?;
        let mode = match self.mode.as_deref().map(str::to_ascii_uppercase).as_deref() {
            None | Some("GGP") => Mode::Ggp,
            Some("GP") => Mode::Gp,
            Some(other) => return Err(Error::invalid("mode", format!("expected GP or GGP, got {other:?}"))),
        };
        if mode == Mode::Ggp && regularizer.is_none() {
            return Err(Error::invalid("regularizer", "section is required in GGP mode"));
        }
        if self.log_every == Some(0) {
            return Err(Error::invalid("log_every", "must be at least 1"));
        }
        let starts = self
            .starts
            .unwrap_or_default()
            .into_iter()
            .enumerate()
            .map(|(i, s)| vector(s, &format!("starts[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(set) = &set {
            let d = set.dim();
            expect_dim(objective.dim(), d, "objective")?;
            if let Some(phi) = &regularizer {
                expect_dim(phi.dim(), d, "regularizer")?;
            }
            for (i, s) in starts.iter().enumerate() {
                expect_dim(s.dim(), d, &format!("starts[{i}]"))?;
            }
        }
        let stop = self.stop.map_or(Ok(StopRule::iterations(1000)), RawStop::build)?;
        let verify = self.verify.map_or(Ok(VerifyThresholds::default()), RawVerify::build)?;
        Ok(ExperimentConfig {
            mode,
            seed: self.seed.unwrap_or(0),
            log_every: self.log_every,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            starts,
            random_starts: self.random_starts.unwrap_or(0),
            objective,
            set,
            regularizer,
            schedule,
            stop,
            verify,
        })
    }
}

impl RawObjective {
    fn build(self) -> Result<SmoothObjective> {
        let base = match self.kind.as_str() {
            "quadratic" => {
                let a = matrix(req(self.a, "objective.a")?, "objective.a")?;
                let b = vector(req(self.b, "objective.b")?, "objective.b")?;
                SmoothObjective::new(ObjectiveKind::Quadratic {
                    a,
                    b,
                    c: self.c.unwrap_or(0.0),
                })?
            }
            "least_squares" => {
                let m = matrix(req(self.m, "objective.m")?, "objective.m")?;
                let y = vector(req(self.y, "objective.y")?, "objective.y")?;
                if m.rows() != y.dim() {
                    return Err(Error::invalid("objective.y", format!("needs {} entries, one per row of m", m.rows())));
                }
                SmoothObjective::least_squares(m, y)?
            }
            "huberized_norm" => SmoothObjective::huberized_norm(
                req(self.dim, "objective.dim")?,
                req(self.delta, "objective.delta")?,
            )?,
            other => {
                return Err(Error::invalid(
                    "objective.kind",
                    format!("unknown kind {other:?} (quadratic, least_squares, huberized_norm)"),
                ))
            }
        };
        match self.shift {
            Some(shift) => {
                let shift = vector(shift, "objective.shift")?;
                expect_dim(shift.dim(), base.dim(), "objective.shift")?;
                SmoothObjective::translated(base, shift)
            }
            None => Ok(base),
        }
    }
}

impl RawSet {
    fn build(self) -> Result<ConvexSet> {
        let kind = match self.kind.as_str() {
            "box" => SetKind::Box {
                lower: vector(req(self.lower, "set.lower")?, "set.lower")?,
                upper: vector(req(self.upper, "set.upper")?, "set.upper")?,
            },
            "ball" => SetKind::Ball {
                center: vector(req(self.center, "set.center")?, "set.center")?,
                radius: req(self.radius, "set.radius")?,
            },
            "simplex" => SetKind::Simplex {
                dim: req(self.dim, "set.dim")?,
                scale: self.scale.unwrap_or(1.0),
            },
            "halfspace" => SetKind::Halfspace {
                normal: vector(req(self.normal, "set.normal")?, "set.normal")?,
                offset: req(self.offset, "set.offset")?,
            },
            "hyperplane" => SetKind::AffineHyperplane {
                normal: vector(req(self.normal, "set.normal")?, "set.normal")?,
                offset: req(self.offset, "set.offset")?,
            },
            "whole_space" => SetKind::WholeSpace {
                dim: req(self.dim, "set.dim")?,
            },
            other => {
                return Err(Error::invalid(
                    "set.kind",
                    format!("unknown kind {other:?} (box, ball, simplex, halfspace, hyperplane, whole_space)"),
                ))
            }
        };
        ConvexSet::new(kind)
    }
}

impl RawRegularizer {
    fn build(self, dim: usize) -> Result<Regularizer> {
        match self.kind.as_str() {
            "half_squared_norm" => {
                if self.center.is_some() {
                    return Err(Error::invalid("regularizer.center", "not used by half_squared_norm"));
                }
                Ok(Regularizer::half_squared_norm(dim))
            }
            "half_squared_distance" => Ok(Regularizer::half_squared_distance(vector(
                req(self.center, "regularizer.center")?,
                "regularizer.center",
            )?)),
            "quadratic" => {
                let a = matrix(req(self.a, "regularizer.a")?, "regularizer.a")?;
                let b = vector(req(self.b, "regularizer.b")?, "regularizer.b")?;
                let f = SmoothObjective::new(ObjectiveKind::Quadratic {
                    a,
                    b,
                    c: self.c.unwrap_or(0.0),
                })
                .map_err(|e| Error::invalid("regularizer", e.to_string()))?;
                Regularizer::new(f).map_err(|e| Error::invalid("regularizer.a", e.to_string()))
            }
            other => Err(Error::invalid(
                "regularizer.kind",
                format!("unknown kind {other:?} (half_squared_norm, half_squared_distance, quadratic)"),
            )),
        }
    }
}

impl RawSchedule {
    fn build(self) -> Result<Schedule> {
        let kind = match self.kind.as_str() {
            "power_law" => ScheduleKind::PowerLaw {
                a: req(self.a, "schedule.A")?,
                gamma_exp: self.gamma_exp.unwrap_or(0.0),
                b: req(self.b, "schedule.B")?,
                alpha_exp: req(self.alpha_exp, "schedule.alpha_exp")?,
            },
            "constant" => ScheduleKind::Constant {
                gamma: req(self.gamma, "schedule.gamma")?,
                b: req(self.b, "schedule.B")?,
                alpha_exp: req(self.alpha_exp, "schedule.alpha_exp")?,
            },
            "tabulated" => ScheduleKind::Tabulated {
                gammas: req(self.gammas, "schedule.gammas")?,
                alphas: req(self.alphas, "schedule.alphas")?,
            },
            other => {
                return Err(Error::invalid(
                    "schedule.kind",
                    format!("unknown kind {other:?} (power_law, constant, tabulated)"),
                ))
            }
        };
        Schedule::new(kind)
    }
}

impl RawStop {
    fn build(self) -> Result<StopRule> {
        let wall_clock_limit = match self.wall_clock_seconds {
            None => None,
            Some(s) if s > 0.0 && s.is_finite() => Some(Duration::from_secs_f64(s)),
            Some(s) => return Err(Error::invalid("stop.wall_clock_seconds", format!("must be positive, got {s}"))),
        };
        let stop = StopRule {
            max_iterations: self.max_iterations.unwrap_or(1000),
            step_tolerance: self.step_tolerance.unwrap_or(0.0),
            wall_clock_limit,
        };
        if stop.max_iterations == 0 {
            return Err(Error::invalid("stop.max_iterations", "must be at least 1"));
        }
        if !(stop.step_tolerance >= 0.0) {
            return Err(Error::invalid("stop.step_tolerance", "must be nonnegative"));
        }
        Ok(stop)
    }
}

impl RawVerify {
    fn build(self) -> Result<VerifyThresholds> {
        let d = VerifyThresholds::default();
        let positive = |v: Option<f64>, default: f64, field: &str| -> Result<f64> {
            match v {
                None => Ok(default),
                Some(v) if v > 0.0 => Ok(v),
                Some(v) => Err(Error::invalid(field, format!("must be positive, got {v}"))),
            }
        };
        let audit_iterations = self.audit_iterations.unwrap_or(d.audit_iterations);
        if audit_iterations < 2 {
            return Err(Error::invalid("verify.audit_iterations", "must be at least 2"));
        }
        Ok(VerifyThresholds {
            f_gap_max: positive(self.f_gap_max, d.f_gap_max, "verify.f_gap_max")?,
            dist_to_target_max: positive(self.dist_to_target_max, d.dist_to_target_max, "verify.dist_to_target_max")?,
            dist_to_set_max: positive(self.dist_to_set_max, d.dist_to_set_max, "verify.dist_to_set_max")?,
            spread_max: positive(self.spread_max, d.spread_max, "verify.spread_max")?,
            audit_iterations,
            oracle_fallback: self.oracle_fallback.unwrap_or(false),
        })
    }
}
