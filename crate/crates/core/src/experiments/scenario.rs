use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::ExperimentError;
use crate::dynamics::{default_dt, NonlinearForm, Nonlinearity};
use crate::graph::{build_complete, build_hypercube, build_paley, Graph, GraphError};

/// Graph family plus its size parameter, written `complete:N`, `paley:q` or `hypercube:n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    Complete(usize),
    Paley(u64),
    Hypercube(u32),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, GraphError> {
        match *self {
            Self::Complete(n) => build_complete(n),
            Self::Paley(q) => build_paley(q),
            Self::Hypercube(n) => build_hypercube(n),
        }
    }

    /// Vertex count, without building the graph.
    pub fn n_vertices(&self) -> usize {
        match *self {
            Self::Complete(n) => n,
            Self::Paley(q) => q as usize,
            Self::Hypercube(n) => 1usize.checked_shl(n).unwrap_or(usize::MAX),
        }
    }

    /// Same family with a different size parameter.
    pub fn with_size(&self, size: u64) -> Self {
        match self {
            Self::Complete(_) => Self::Complete(size as usize),
            Self::Paley(_) => Self::Paley(size),
            Self::Hypercube(_) => Self::Hypercube(size.min(u32::MAX as u64) as u32),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExperimentError::Parse(format!("graph spec `{s}`: expected complete:N, paley:q or hypercube:n"));
        let (family, size) = s.split_once(':').ok_or_else(bad)?;
        let size = size.trim();
        match family.trim().to_ascii_lowercase().as_str() {
            "complete" => size.parse().map(Self::Complete).map_err(|_| bad()),
            "paley" => size.parse().map(Self::Paley).map_err(|_| bad()),
            "hypercube" => size.parse().map(Self::Hypercube).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Complete(n) => write!(f, "complete:{n}"),
            Self::Paley(q) => write!(f, "paley:{q}"),
            Self::Hypercube(n) => write!(f, "hypercube:{n}"),
        }
    }
}

/// Parses `linear|cubic|cubicquintic|power:q|loglinear`.
pub fn parse_form(s: &str) -> Result<NonlinearForm, ExperimentError> {
    let lower = s.trim().to_ascii_lowercase();
    match lower.as_str() {
        "linear" => Ok(NonlinearForm::Linear),
        "cubic" => Ok(NonlinearForm::Cubic),
        "cubicquintic" | "cubic-quintic" | "cubic_quintic" => Ok(NonlinearForm::CubicQuintic),
        "loglinear" => Ok(NonlinearForm::Loglinear),
        _ => match lower.strip_prefix("power:") {
            Some(q) => q
                .parse()
                .map(NonlinearForm::Power)
                .map_err(|_| ExperimentError::Parse(format!("power exponent `{q}`"))),
            None => Err(ExperimentError::Parse(format!(
                "nonlinearity `{s}`: expected linear, cubic, cubicquintic, power:q or loglinear"
            ))),
        },
    }
}

pub fn form_name(form: NonlinearForm) -> String {
    match form {
        NonlinearForm::Linear => "linear".into(),
        NonlinearForm::Cubic => "cubic".into(),
        NonlinearForm::CubicQuintic => "cubicquintic".into(),
        NonlinearForm::Power(q) => format!("power:{q}"),
        NonlinearForm::Loglinear => "loglinear".into(),
    }
}

/// Strength `g`, either absolute or as a function of the vertex count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GRule {
    Value(f64),
    NMinus1,
    /// `sqrt(N) / ln N`
    SqrtNOverLogN,
}

impl GRule {
    pub fn eval(&self, n_vertices: usize) -> f64 {
        let n = n_vertices as f64;
        match *self {
            Self::Value(g) => g,
            Self::NMinus1 => n - 1.0,
            Self::SqrtNOverLogN => n.sqrt() / n.ln(),
        }
    }
}

impl FromStr for GRule {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t {
            "N-1" | "N_minus_1" | "n-1" => Ok(Self::NMinus1),
            "sqrtN/logN" | "sqrtN_over_logN" | "sqrtN/lnN" => Ok(Self::SqrtNOverLogN),
            _ => {
                let inner = t.strip_prefix("const(").and_then(|r| r.strip_suffix(')')).unwrap_or(t);
                inner
                    .parse()
                    .map(Self::Value)
                    .map_err(|_| ExperimentError::Parse(format!("g rule `{s}`: expected a number, N-1 or sqrtN/logN")))
            }
        }
    }
}

impl fmt::Display for GRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Value(g) => write!(f, "{g}"),
            Self::NMinus1 => f.write_str("N-1"),
            Self::SqrtNOverLogN => f.write_str("sqrtN/logN"),
        }
    }
}

/// Hopping-rate choice: the linear critical rate held fixed, the feedback law
/// built on it, or an explicit constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    Auto,
    Feedback,
    Fixed(f64),
}

impl FromStr for GammaRule {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "feedback" => Ok(Self::Feedback),
            t => t
                .parse()
                .map(Self::Fixed)
                .map_err(|_| ExperimentError::Parse(format!("gamma `{s}`: expected auto, feedback or a number"))),
        }
    }
}

impl fmt::Display for GammaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Feedback => f.write_str("feedback"),
            Self::Fixed(g) => write!(f, "{g}"),
        }
    }
}

/// Rows beyond which the default record stride starts thinning the output.
pub const TARGET_ROWS: usize = 200_000;

/// A single simulation from `|s>` with the marked vertex `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: GraphSpec,
    pub form: NonlinearForm,
    pub g: GRule,
    pub gamma: GammaRule,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub stride: Option<usize>,
    pub out: Option<PathBuf>,
    pub full_oracle: bool,
}

impl Scenario {
    pub fn new(graph: GraphSpec, form: NonlinearForm, g: GRule, gamma: GammaRule) -> Self {
        Self {
            graph,
            form,
            g,
            gamma,
            t_max: None,
            dt: None,
            stride: None,
            out: None,
            full_oracle: false,
        }
    }

    pub fn linear(graph: GraphSpec) -> Self {
        Self::new(graph, NonlinearForm::Linear, GRule::Value(0.0), GammaRule::Auto)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, ExperimentError> {
        if self.form == NonlinearForm::Linear {
            return Ok(Nonlinearity::linear());
        }
        Ok(Nonlinearity::new(self.form, self.g.eval(self.graph.n_vertices()))?)
    }

    /// `2 pi sqrt(N)` for linear or fixed-rate runs; `max(10, 4 pi sqrt(N) / (1 + g/N))`
    /// for nonlinear feedback runs.
    pub fn default_t_max(&self, nl: &Nonlinearity) -> f64 {
        let n = self.graph.n_vertices() as f64;
        let base = std::f64::consts::PI * n.sqrt();
        if nl.is_linear() || self.gamma != GammaRule::Feedback {
            2.0 * base
        } else {
            (4.0 * base / (1.0 + nl.g / n)).max(10.0)
        }
    }

    pub fn resolved_t_max(&self, nl: &Nonlinearity) -> f64 {
        self.t_max.unwrap_or_else(|| self.default_t_max(nl))
    }

    pub fn resolved_dt(&self, nl: &Nonlinearity) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(self.graph.n_vertices(), nl))
    }

    /// Explicit stride, or the smallest stride keeping the output near [`TARGET_ROWS`] rows.
    pub fn resolved_stride(&self, t_max: f64, dt: f64) -> usize {
        self.stride
            .unwrap_or_else(|| ((t_max / dt) / TARGET_ROWS as f64).ceil().max(1.0) as usize)
            .max(1)
    }
}
