//! Model parameters and their domain checks.
//!
//! Field names follow the symbols used throughout the documentation
//! (`g_U`, `a_F`, `K_F`, ...) in serialized form so that config files and
//! manifests read the same way as the model equations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `r_M + r_D = 1`.
const COMPOSITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Undergraduate completion probability per year.
    #[serde(rename = "g_U")]
    pub g_u: f64,
    /// Undergraduate exit probability per year.
    #[serde(rename = "a_U")]
    pub a_u: f64,
    /// Graduate completion probability per year.
    #[serde(rename = "g_G")]
    pub g_g: f64,
    /// Graduate exit probability per year.
    #[serde(rename = "a_G")]
    pub a_g: f64,
    /// Fraction of graduate completers entering postdoctoral positions.
    #[serde(rename = "p_GP")]
    pub p_gp: f64,
    /// Fraction of graduate completers entering faculty positions directly.
    #[serde(rename = "p_GF")]
    pub p_gf: f64,
    /// Postdoc exit probability per year.
    #[serde(rename = "a_P")]
    pub a_p: f64,
    /// Faculty exit probability per year.
    #[serde(rename = "a_F")]
    pub a_f: f64,
    /// Ceiling of the undergraduate-to-graduate transition.
    #[serde(rename = "p_UG_max")]
    pub p_ug_max: f64,
    /// Graduate capacity scale (persons).
    #[serde(rename = "K_G")]
    pub k_g: f64,
    /// Ceiling of the postdoc-to-faculty transition intensity.
    #[serde(rename = "p_PF_max")]
    pub p_pf_max: f64,
    /// Faculty capacity scale (persons).
    #[serde(rename = "K_F")]
    pub k_f: f64,
    /// Competition strength for faculty positions.
    #[serde(rename = "alpha_F")]
    pub alpha_f: f64,
    /// Master's share of graduate completions.
    #[serde(rename = "r_M")]
    pub r_m: f64,
    /// Doctoral share of graduate completions.
    #[serde(rename = "r_D")]
    pub r_d: f64,
}

impl ModelParams {
    /// National baseline calibration.
    ///
    /// `p_UG_max` has no published baseline; 0.5 is used.
    pub const BASELINE: ModelParams = ModelParams {
        g_u: 0.14,
        a_u: 0.12,
        g_g: 0.17,
        a_g: 0.08,
        p_gp: 0.45,
        p_gf: 0.08,
        a_p: 0.25,
        a_f: 0.03,
        p_ug_max: 0.5,
        k_g: 25_000.0,
        p_pf_max: 0.18,
        k_f: 4_000.0,
        alpha_f: 1.0,
        r_m: 0.80,
        r_d: 0.20,
    };

    /// Checks domain invariants: probabilities in [0, 1], positive
    /// capacities, nonnegative competition, placement fractions summing to at
    /// most one and a degree composition summing to one.
    ///
    /// This is a well-formedness check only; the positivity and boundedness
    /// conditions live in [`crate::feasibility::feasibility_check`].
    pub fn validate(&self) -> Result<()> {
        for name in ParamName::ALL {
            let value = self.get(name);
            if !value.is_finite() {
                return Err(invalid(name.as_str(), value, "must be finite"));
            }
            match name.domain() {
                Domain::Probability if !(0.0..=1.0).contains(&value) => {
                    return Err(invalid(name.as_str(), value, "must lie in [0, 1]"));
                }
                Domain::Positive if value <= 0.0 => {
                    return Err(invalid(name.as_str(), value, "must be > 0"));
                }
                Domain::NonNegative if value < 0.0 => {
                    return Err(invalid(name.as_str(), value, "must be >= 0"));
                }
                _ => {}
            }
        }
        if self.p_gp + self.p_gf > 1.0 {
            return Err(invalid(
                "p_GP + p_GF",
                self.p_gp + self.p_gf,
                "placement fractions must sum to at most 1",
            ));
        }
        if (self.r_m + self.r_d - 1.0).abs() > COMPOSITION_TOL {
            return Err(invalid(
                "r_M + r_D",
                self.r_m + self.r_d,
                "degree composition must sum to 1",
            ));
        }
        Ok(())
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::GU => self.g_u,
            ParamName::AU => self.a_u,
            ParamName::GG => self.g_g,
            ParamName::AG => self.a_g,
            ParamName::PGP => self.p_gp,
            ParamName::PGF => self.p_gf,
            ParamName::AP => self.a_p,
            ParamName::AF => self.a_f,
            ParamName::PUGMax => self.p_ug_max,
            ParamName::KG => self.k_g,
            ParamName::PPFMax => self.p_pf_max,
            ParamName::KF => self.k_f,
            ParamName::AlphaF => self.alpha_f,
            ParamName::RM => self.r_m,
            ParamName::RD => self.r_d,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        let slot = match name {
            ParamName::GU => &mut self.g_u,
            ParamName::AU => &mut self.a_u,
            ParamName::GG => &mut self.g_g,
            ParamName::AG => &mut self.a_g,
            ParamName::PGP => &mut self.p_gp,
            ParamName::PGF => &mut self.p_gf,
            ParamName::AP => &mut self.a_p,
            ParamName::AF => &mut self.a_f,
            ParamName::PUGMax => &mut self.p_ug_max,
            ParamName::KG => &mut self.k_g,
            ParamName::PPFMax => &mut self.p_pf_max,
            ParamName::KF => &mut self.k_f,
            ParamName::AlphaF => &mut self.alpha_f,
            ParamName::RM => &mut self.r_m,
            ParamName::RD => &mut self.r_d,
        };
        *slot = value;
    }

    /// Returns a copy with one field replaced.
    pub fn with(mut self, name: ParamName, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Sets the degree composition from a master's share.
    pub fn with_composition(mut self, r_m: f64) -> Self {
        self.r_m = r_m;
        self.r_d = 1.0 - r_m;
        self
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::BASELINE
    }
}

fn invalid(name: &str, value: f64, reason: &str) -> Error {
    Error::InvalidParam {
        name: name.to_string(),
        value,
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    Probability,
    Positive,
    NonNegative,
}

/// Identifier of a single model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamName {
    GU,
    AU,
    GG,
    AG,
    PGP,
    PGF,
    AP,
    AF,
    PUGMax,
    KG,
    PPFMax,
    KF,
    AlphaF,
    RM,
    RD,
}

impl ParamName {
    pub const ALL: [ParamName; 15] = [
        ParamName::GU,
        ParamName::AU,
        ParamName::GG,
        ParamName::AG,
        ParamName::PGP,
        ParamName::PGF,
        ParamName::AP,
        ParamName::AF,
        ParamName::PUGMax,
        ParamName::KG,
        ParamName::PPFMax,
        ParamName::KF,
        ParamName::AlphaF,
        ParamName::RM,
        ParamName::RD,
    ];

    /// Parameters that enter the downstream dynamics and may be perturbed in
    /// sensitivity analyses. Completion probabilities only rescale the
    /// reconstructed upstream stocks and are excluded.
    pub const SWEEP_ELIGIBLE: [ParamName; 7] = [
        ParamName::AlphaF,
        ParamName::AP,
        ParamName::AF,
        ParamName::PPFMax,
        ParamName::KF,
        ParamName::PGF,
        ParamName::PGP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::GU => "g_U",
            ParamName::AU => "a_U",
            ParamName::GG => "g_G",
            ParamName::AG => "a_G",
            ParamName::PGP => "p_GP",
            ParamName::PGF => "p_GF",
            ParamName::AP => "a_P",
            ParamName::AF => "a_F",
            ParamName::PUGMax => "p_UG_max",
            ParamName::KG => "K_G",
            ParamName::PPFMax => "p_PF_max",
            ParamName::KF => "K_F",
            ParamName::AlphaF => "alpha_F",
            ParamName::RM => "r_M",
            ParamName::RD => "r_D",
        }
    }

    pub fn is_sweep_eligible(self) -> bool {
        Self::SWEEP_ELIGIBLE.contains(&self)
    }

    /// Parses a name and checks it may be swept.
    pub fn parse_sweepable(s: &str) -> Result<Self> {
        let name: ParamName = s.parse()?;
        if name.is_sweep_eligible() {
            Ok(name)
        } else {
            Err(Error::NotSweepEligible(s.to_string()))
        }
    }

    pub(crate) fn domain(self) -> Domain {
        match self {
            ParamName::KG | ParamName::KF => Domain::Positive,
            ParamName::AlphaF => Domain::NonNegative,
            _ => Domain::Probability,
        }
    }

    /// Upper bound of the admissible domain, if any.
    pub fn upper_bound(self) -> Option<f64> {
        match self.domain() {
            Domain::Probability => Some(1.0),
            _ => None,
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}
