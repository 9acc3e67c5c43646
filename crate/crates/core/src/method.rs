//! Declarative description of a scoring method.
//!
//! A [`ScoreSpec`] is a base score combined with an aggregator (for
//! label-wise bases) plus the hyperparameters the method needs. Its textual
//! form is `base[:aggregator][@key=value,...]`, for example
//! `energy:sum`, `odin_prob:max@temperature=1000,epsilon=0.0014` or
//! `lof@k=20`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Scores that are computed per label and then aggregated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelBase {
    Logit,
    SigmoidProb,
    OdinProb,
    Energy,
    Mahalanobis,
}

/// Scores defined on the whole example; no aggregator applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GlobalMethod {
    Msp,
    Lof,
    IForest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aggregator {
    Max,
    Sum,
    TopK(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Labelwise {
        base: LabelBase,
        aggregator: Aggregator,
    },
    Global(GlobalMethod),
}

/// Hyperparameters; each method reads only the ones it needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyper {
    /// ODIN temperature.
    pub temperature: f64,
    /// Input perturbation magnitude (ODIN, Mahalanobis).
    pub epsilon: f64,
    /// LOF neighbor count.
    pub neighbors: usize,
    /// Isolation forest size.
    pub trees: usize,
    /// Isolation forest subsample; `None` means `min(256, n_fit)`.
    pub subsample: Option<usize>,
    /// Mahalanobis ridge; `None` means `1e-6 * trace / d`.
    pub reg: Option<f64>,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            temperature: 1.0,
            epsilon: 0.0,
            neighbors: 20,
            trees: 100,
            subsample: None,
            reg: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreSpec {
    pub method: Method,
    pub hyper: Hyper,
}

impl ScoreSpec {
    pub fn labelwise(base: LabelBase, aggregator: Aggregator) -> Self {
        ScoreSpec {
            method: Method::Labelwise { base, aggregator },
            hyper: Hyper::default(),
        }
    }

    pub fn global(method: GlobalMethod) -> Self {
        ScoreSpec {
            method: Method::Global(method),
            hyper: Hyper::default(),
        }
    }

    pub fn with_hyper(mut self, hyper: Hyper) -> Self {
        self.hyper = hyper;
        self
    }

    /// JointEnergy: summed label-wise energy.
    pub fn joint_energy() -> Self {
        Self::labelwise(LabelBase::Energy, Aggregator::Sum)
    }

    /// Base score name, as used in reports.
    pub fn method_name(&self) -> &'static str {
        match self.method {
            Method::Labelwise { base, .. } => base.name(),
            Method::Global(g) => g.name(),
        }
    }

    /// Aggregator name, `none` for global methods.
    pub fn aggregation_name(&self) -> String {
        match self.method {
            Method::Labelwise { aggregator, .. } => aggregator.to_string(),
            Method::Global(_) => "none".to_string(),
        }
    }

    /// Sort key giving the fixed report order: method name, then aggregator.
    pub fn report_order(&self) -> (&'static str, Option<Aggregator>) {
        match self.method {
            Method::Labelwise { aggregator, .. } => (self.method_name(), Some(aggregator)),
            Method::Global(_) => (self.method_name(), None),
        }
    }
}

impl LabelBase {
    pub const ALL: [LabelBase; 5] = [
        LabelBase::Logit,
        LabelBase::SigmoidProb,
        LabelBase::OdinProb,
        LabelBase::Energy,
        LabelBase::Mahalanobis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LabelBase::Logit => "logit",
            LabelBase::SigmoidProb => "sigmoid_prob",
            LabelBase::OdinProb => "odin_prob",
            LabelBase::Energy => "energy",
            LabelBase::Mahalanobis => "mahalanobis",
        }
    }
}

impl GlobalMethod {
    pub const ALL: [GlobalMethod; 3] = [GlobalMethod::Msp, GlobalMethod::Lof, GlobalMethod::IForest];

    pub fn name(self) -> &'static str {
        match self {
            GlobalMethod::Msp => "msp",
            GlobalMethod::Lof => "lof",
            GlobalMethod::IForest => "iforest",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::Max => f.write_str("max"),
            Aggregator::Sum => f.write_str("sum"),
            Aggregator::TopK(k) => write!(f, "topk-{k}"),
        }
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregator::Max),
            "sum" => Ok(Aggregator::Sum),
            _ => {
                let k = s
                    .strip_prefix("topk-")
                    .or_else(|| s.strip_prefix("topk="))
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown aggregator `{s}`")))?;
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("bad top-k count `{k}`")))?;
                if k == 0 {
                    return Err(Error::InvalidK { k, max: usize::MAX });
                }
                Ok(Aggregator::TopK(k))
            }
        }
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method_name())?;
        if let Method::Labelwise { aggregator, .. } = self.method {
            write!(f, ":{aggregator}")?;
        }
        let d = Hyper::default();
        let h = &self.hyper;
        let mut params = Vec::new();
        if h.temperature != d.temperature {
            params.push(format!("temperature={}", h.temperature));
        }
        if h.epsilon != d.epsilon {
            params.push(format!("epsilon={}", h.epsilon));
        }
        if h.neighbors != d.neighbors {
            params.push(format!("k={}", h.neighbors));
        }
        if h.trees != d.trees {
            params.push(format!("trees={}", h.trees));
        }
        if let Some(s) = h.subsample {
            params.push(format!("subsample={s}"));
        }
        if let Some(r) = h.reg {
            params.push(format!("reg={r}"));
        }
        if h.seed != d.seed {
            params.push(format!("seed={}", h.seed));
        }
        if !params.is_empty() {
            write!(f, "@{}", params.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for ScoreSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, params) = match s.split_once('@') {
            Some((h, p)) => (h, Some(p)),
            None => (s, None),
        };
        let (base, agg) = match head.split_once(':') {
            Some((b, a)) => (b, Some(a)),
            None => (head, None),
        };
        let base = match base {
            "joint_energy" | "jointenergy" => "energy",
            "max_logit" | "maxlogit" => "logit",
            "prob" => "sigmoid_prob",
            "odin" => "odin_prob",
            other => other,
        };
        let method = if let Some(g) = GlobalMethod::ALL.into_iter().find(|g| g.name() == base) {
            if agg.is_some() {
                return Err(Error::InvalidSpec(format!(
                    "`{base}` is not label-wise and takes no aggregator"
                )));
            }
            Method::Global(g)
        } else if let Some(b) = LabelBase::ALL.into_iter().find(|b| b.name() == base) {
            let aggregator = match agg {
                Some(a) => a.parse()?,
                None if head == "joint_energy" || head == "jointenergy" => Aggregator::Sum,
                None => Aggregator::Max,
            };
            Method::Labelwise { base: b, aggregator }
        } else {
            return Err(Error::InvalidSpec(format!("unknown method `{base}`")));
        };

        let mut hyper = Hyper::default();
        for kv in params.into_iter().flat_map(|p| p.split(',')).filter(|p| !p.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got `{kv}`")))?;
            let bad = || Error::InvalidSpec(format!("bad value for `{key}`: `{value}`"));
            match key {
                "temperature" | "T" => hyper.temperature = value.parse().map_err(|_| bad())?,
                "epsilon" | "eps" => hyper.epsilon = value.parse().map_err(|_| bad())?,
                "k" | "neighbors" => hyper.neighbors = value.parse().map_err(|_| bad())?,
                "trees" => hyper.trees = value.parse().map_err(|_| bad())?,
                "subsample" => hyper.subsample = Some(value.parse().map_err(|_| bad())?),
                "reg" => hyper.reg = Some(value.parse().map_err(|_| bad())?),
                "seed" => hyper.seed = value.parse().map_err(|_| bad())?,
                _ => return Err(Error::InvalidSpec(format!("unknown parameter `{key}`"))),
            }
        }
        if !(hyper.temperature > 0.0 && hyper.temperature.is_finite()) {
            return Err(Error::InvalidSpec("temperature must be positive".into()));
        }
        if !(hyper.epsilon >= 0.0 && hyper.epsilon.is_finite()) {
            return Err(Error::InvalidSpec("epsilon must be nonnegative".into()));
        }
        Ok(ScoreSpec { method, hyper })
    }
}
