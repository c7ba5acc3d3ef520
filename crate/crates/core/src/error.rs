use crate::poset::Power;
use crate::rational::Exponent;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("power set is empty")]
    EmptySet,
    #[error("power {power} exceeds the cap {cap}")]
    PowerTooLarge { power: Power, cap: u32 },
    #[error("power {0} has a zero coefficient")]
    ZeroCoefficient(Power),
    #[error("power {0} listed twice")]
    DuplicatePower(Power),
    #[error("slope must be finite and positive, got {0}")]
    BadSlope(Exponent),
    #[error("slope set is missing pivot slope {0}")]
    SlopeSetTooSmall(Exponent),
    #[error("region {region} is not defined for a slope set of size {n}")]
    BadRegion { region: usize, n: usize },
    #[error("unstable scale: {0}")]
    UnstableScale(String),
    #[error("sign error: {0}")]
    Sign(String),
    #[error("time scale ε^{got} matches no visible scale (drift-visible ε^{drift}, diffusion-visible ε^{diffusion})")]
    WrongTimeScale { got: Exponent, drift: Exponent, diffusion: Exponent },
    #[error("diffusion is negative near the origin at (x, λ) = ({x:e}, {lam:e})")]
    NegativeDiffusion { x: f64, lam: f64 },
    #[error("strong stochasticity fails: pivot {0} of the drift is not dominated by the diffusion")]
    NotStronglyStochastic(Power),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("no simple positive root on the level set at slope {0}")]
    NoPositiveSimpleRoot(Exponent),
    #[error("diffusion vanishes on the equilibrium branch")]
    ZeroDiffusionAtBranch,
    #[error("branch index {index} out of range 1..={n}")]
    BranchIndex { index: usize, n: usize },
    #[error("1/a is not small against the branch: {0}")]
    BranchValidity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no bifurcation kind matches")]
    NotABifurcation,
    #[error("negative rate {rate} for jump {delta} at x = {x}")]
    NegativeRate { delta: i64, x: f64, rate: f64 },
    #[error("drift and diffusion both vanish identically")]
    Degenerate,
    #[error("state cap of {0} steps reached")]
    StateCap(u64),
    #[error("time {t} beyond ensemble horizon {horizon}")]
    Horizon { t: f64, horizon: f64 },
    #[error("need at least {need} replicas, got {got}")]
    TooFewReplicas { need: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable snake_case tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySet => "empty_set",
            Error::PowerTooLarge { .. } => "power_too_large",
            Error::ZeroCoefficient(..) => "zero_coefficient",
            Error::DuplicatePower(..) => "duplicate_power",
            Error::BadSlope(..) => "bad_slope",
            Error::SlopeSetTooSmall(..) => "slope_set_too_small",
            Error::BadRegion { .. } => "bad_region",
            Error::UnstableScale(..) => "unstable_scale",
            Error::Sign(..) => "sign",
            Error::WrongTimeScale { .. } => "wrong_time_scale",
            Error::NegativeDiffusion { .. } => "negative_diffusion",
            Error::NotStronglyStochastic(..) => "not_strongly_stochastic",
            Error::Hypothesis(..) => "hypothesis",
            Error::NoPositiveSimpleRoot(..) => "no_positive_simple_root",
            Error::ZeroDiffusionAtBranch => "zero_diffusion_at_branch",
            Error::BranchIndex { .. } => "branch_index",
            Error::BranchValidity(..) => "branch_validity",
            Error::Domain(..) => "domain",
            Error::NotABifurcation => "not_a_bifurcation",
            Error::NegativeRate { .. } => "negative_rate",
            Error::Degenerate => "degenerate",
            Error::StateCap(..) => "state_cap",
            Error::Horizon { .. } => "horizon",
            Error::TooFewReplicas { .. } => "too_few_replicas",
            Error::Invalid(..) => "invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
