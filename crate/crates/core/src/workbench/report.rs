//! The moment report and its JSON form. Floating values are written as
//! decimal strings with 17 significant digits, which read back bit for bit.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numerics::ComplexValue;
use crate::{Error, Result};

/// f64 as a 17-significant-digit decimal string.
pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_decimal<E: serde::de::Error>(s: &str) -> std::result::Result<f64, E> {
    s.parse().map_err(|_| E::custom(format!("bad decimal {s:?}")))
}

mod real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&decimal(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        parse_decimal(&String::deserialize(d)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexText {
    re: String,
    im: String,
}

impl From<&ComplexValue> for ComplexText {
    fn from(z: &ComplexValue) -> Self {
        Self {
            re: decimal(z.re),
            im: decimal(z.im),
        }
    }
}

mod complex_opt {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<ComplexValue>, s: S) -> std::result::Result<S::Ok, S::Error> {
        z.as_ref().map(ComplexText::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ComplexValue>, D::Error> {
        match Option::<ComplexText>::deserialize(d)? {
            None => Ok(None),
            Some(t) => Ok(Some(ComplexValue::new(parse_decimal(&t.re)?, parse_decimal(&t.im)?))),
        }
    }
}

mod real_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        x.map(decimal).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_decimal(&s))
            .transpose()
    }
}

/// Scale checks and side conditions printed next to the terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// main_term/(T³M²).
    #[serde(with = "real_opt")]
    pub main_over_t3m2: Option<f64>,
    /// Relative change of main_term when the lattice step is doubled.
    #[serde(with = "real_opt")]
    pub main_step_residual: Option<f64>,
    /// (diagonal + mirror diagonal)/(λ_f(p)p^{−3/2}·main_term); near 1 when V ≈ 1.
    #[serde(with = "complex_opt")]
    pub structural_ratio: Option<ComplexValue>,
    /// |eis_min_term|/(T^{1.2}M²).
    #[serde(with = "real_opt")]
    pub eis_min_over_t12m2: Option<f64>,
    /// Lattice orbits within 10⁻³ of a pole of ζ(1 + 3ν_j).
    pub eis_min_pole_proximity: Option<usize>,
    #[serde(with = "real_opt")]
    pub eis_max_tail_bound: Option<f64>,
    /// p^{3 + 7/16}: the size T must dominate for the diagonal to be the main term.
    #[serde(with = "real")]
    pub main_condition_threshold: f64,
    pub main_condition_holds: bool,
}

/// Everything a `moment-report` run produces, in a fixed field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// False when a component failed; `error` then says which.
    pub complete: bool,
    pub error: Option<String>,
    pub config_hash: String,
    /// Canonical `key = value` text of the run's config.
    pub config: String,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: String,
    pub lattice_orbits: usize,
    #[serde(with = "real")]
    pub lambda_f_p: f64,
    /// λ_f(p)/p^{3/2}.
    #[serde(with = "real")]
    pub twist: f64,
    #[serde(with = "complex_opt")]
    pub main_term: Option<ComplexValue>,
    #[serde(with = "complex_opt")]
    pub diagonal_term: Option<ComplexValue>,
    #[serde(with = "complex_opt")]
    pub diagonal_tilde_term: Option<ComplexValue>,
    #[serde(with = "complex_opt")]
    pub eis_min_term: Option<ComplexValue>,
    #[serde(with = "complex_opt")]
    pub eis_max_term: Option<ComplexValue>,
    pub eis_max_disclaimer: Option<String>,
    pub diagnostics: Diagnostics,
    /// What the report leaves out.
    pub omitted: String,
}

/// The cuspidal side is not computed; recorded in every report.
pub const OMITTED: &str = "The cuspidal spectral sum over GL(3) Hecke-Maass forms is not computed: \
    it needs the forms' eigenvalues and the normalizer built from the Petersson norm, neither of which is available. \
    The report gives the geometric main and diagonal terms and the Eisenstein contributions.";

impl MomentReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Consistency(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// The JSON with the timestamp blanked, for determinism comparisons.
    pub fn without_timestamp(&self) -> Result<String> {
        let mut r = self.clone();
        r.timestamp.clear();
        r.to_json()
    }
}
