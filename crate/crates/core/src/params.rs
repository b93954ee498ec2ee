//! Physical and dimensionless parameter sets, the single-ε split, and the
//! parameter-file loaders.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Laboratory parameters of the vesicle reaction, SI units (M, s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// External urea concentration (M).
    #[serde(rename = "S_ext")]
    pub s_ext: f64,
    /// External proton concentration (M).
    #[serde(rename = "H_ext")]
    pub h_ext: f64,
    /// Maximum reaction speed (M/s).
    pub v_max: f64,
    /// Michaelis-Menten constant (M).
    #[serde(rename = "k_M")]
    pub k_m: f64,
    /// Enzyme constant, low pH (M).
    #[serde(rename = "k_E1")]
    pub k_e1: f64,
    /// Enzyme constant, high pH (M).
    #[serde(rename = "k_E2")]
    pub k_e2: f64,
    /// Ammonia protonation rate (1/(M s)).
    pub k2: f64,
    /// Ammonium deprotonation rate (1/s).
    pub k2r: f64,
    /// Proton transport rate (1/s).
    #[serde(rename = "k_H")]
    pub k_h: f64,
    /// Urea transport rate (1/s).
    #[serde(rename = "k_S")]
    pub k_s: f64,
    /// Ammonia outflow rate (1/s).
    pub k: f64,
    /// Ammonium outflow rate (1/s).
    pub k_plus: f64,
}

const PHYSICAL_KEYS: [&str; 12] = [
    "S_ext", "H_ext", "v_max", "k_M", "k_E1", "k_E2", "k2", "k2r", "k_H", "k_S", "k", "k_plus",
];

impl PhysicalParams {
    /// The laboratory values of the urea-urease vesicle system.
    pub fn table1() -> Self {
        Self {
            s_ext: 3.8e-4,
            h_ext: 1.3e-4,
            v_max: 1.85e-4,
            k_m: 3e-3,
            k_e1: 5e-6,
            k_e2: 2e-9,
            k2: 4.3e10,
            k2r: 2.4e1,
            k_h: 9e-3,
            k_s: 1.4e-3,
            k: 1.4e-3,
            k_plus: 1.4e-3,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 12] {
        [
            ("S_ext", self.s_ext),
            ("H_ext", self.h_ext),
            ("v_max", self.v_max),
            ("k_M", self.k_m),
            ("k_E1", self.k_e1),
            ("k_E2", self.k_e2),
            ("k2", self.k2),
            ("k2r", self.k2r),
            ("k_H", self.k_h),
            ("k_S", self.k_s),
            ("k", self.k),
            ("k_plus", self.k_plus),
        ]
    }

    fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "S_ext" => &mut self.s_ext,
            "H_ext" => &mut self.h_ext,
            "v_max" => &mut self.v_max,
            "k_M" => &mut self.k_m,
            "k_E1" => &mut self.k_e1,
            "k_E2" => &mut self.k_e2,
            "k2" => &mut self.k2,
            "k2r" => &mut self.k2r,
            "k_H" => &mut self.k_h,
            "k_S" => &mut self.k_s,
            "k" => &mut self.k,
            "k_plus" => &mut self.k_plus,
            _ => return None,
        })
    }

    /// Checks that every field is finite and strictly positive.
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in self.fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive {
                    name: name.to_string(),
                    value,
                });
            }
        }
        Ok(())
    }

    /// Effective protonation equilibrium constant k' = k2/(k2r + k_plus), in 1/M.
    pub fn k_prime(&self) -> f64 {
        self.k2 / (self.k2r + self.k_plus)
    }

    /// First-order catalytic rate k_max = v_max/k_M, in 1/s.
    pub fn k_max(&self) -> f64 {
        self.v_max / self.k_m
    }

    /// Reduces to the seven dimensionless groups, from unrounded values.
    pub fn derive_dimensionless(&self) -> Result<DimlessParams, ParamError> {
        self.validate()?;
        let k_max = self.k_max();
        let alpha = self.h_ext / (2.0 * self.s_ext);
        let dp = DimlessParams {
            k_s: self.k_s / k_max,
            k_h: self.k_h / k_max,
            k: self.k / k_max,
            alpha,
            beta: (self.k_e2 / self.k_e1).sqrt(),
            eps1: (self.k_e1 * self.k_e2).sqrt() / self.h_ext,
            eps2: alpha / (self.k_prime() * self.h_ext),
        };
        dp.validate()?;
        Ok(dp)
    }

    /// Parses the flat `name = value` format. Blank lines and `#` comments
    /// are ignored; every key must be known and appear exactly once.
    pub fn from_key_value(text: &str) -> Result<Self, ParamError> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ParamError::Syntax {
                line: lineno + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            if !PHYSICAL_KEYS.contains(&key) {
                return Err(ParamError::UnknownKey(key.to_string()));
            }
            let value: f64 = value.trim().parse().map_err(|_| ParamError::Syntax {
                line: lineno + 1,
                text: raw.to_string(),
            })?;
            if seen.insert(key.to_string(), value).is_some() {
                return Err(ParamError::DuplicateKey(key.to_string()));
            }
        }
        let mut params = Self::table1();
        for key in PHYSICAL_KEYS {
            let value = seen
                .get(key)
                .ok_or_else(|| ParamError::MissingKey(key.to_string()))?;
            *params.field_mut(key).expect("known key") = *value;
        }
        params.validate()?;
        Ok(params)
    }

    /// Parses the JSON form (an object with the same twelve keys).
    pub fn from_json(text: &str) -> Result<Self, ParamError> {
        let params: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            match msg.strip_prefix("unknown field `") {
                Some(rest) => {
                    ParamError::UnknownKey(rest.split('`').next().unwrap_or("").to_string())
                }
                None => ParamError::Json(msg),
            }
        })?;
        params.validate()?;
        Ok(params)
    }

    /// Loads a parameter file, picking the JSON loader when the content starts with `{`.
    pub fn load(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParamError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_key_value(&text)
        }
    }

    /// Renders the key-value form, 17 significant digits per value.
    pub fn to_key_value(&self) -> String {
        self.fields()
            .iter()
            .map(|(name, value)| format!("{name} = {value:.16e}\n"))
            .collect()
    }

    /// Sets one field by name, as used by command-line overrides.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let slot = self
            .field_mut(name)
            .ok_or_else(|| ParamError::UnknownKey(name.to_string()))?;
        *slot = value;
        self.validate()
    }
}

/// The dimensionless groups of the two-variable model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimlessParams {
    #[serde(rename = "K_s")]
    pub k_s: f64,
    #[serde(rename = "K_h")]
    pub k_h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl DimlessParams {
    /// Two-digit rounded groups as tabulated for the laboratory system.
    ///
    /// These reproduce the fixed point only to about two digits; prefer
    /// [`PhysicalParams::derive_dimensionless`] unless the rounded set is
    /// explicitly requested.
    pub fn table2_rounded() -> Self {
        Self {
            k_s: 0.023,
            k_h: 0.15,
            k: 0.023,
            alpha: 0.17,
            beta: 0.02,
            eps1: 7.7e-4,
            eps2: 7.3e-7,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("K_s", self.k_s),
            ("K_h", self.k_h),
            ("K", self.k),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive {
                    name: name.to_string(),
                    value,
                });
            }
        }
        Ok(())
    }

    /// Whether the positive equilibrium exists (alpha K_h > K_s).
    pub fn admissible(&self) -> bool {
        self.alpha * self.k_h > self.k_s
    }

    /// Equilibrium acid level h_* = 1 - K_s/(alpha K_h). Independent of eps1, eps2.
    pub fn h_star(&self) -> f64 {
        1.0 - self.k_s / (self.alpha * self.k_h)
    }

    /// The parameter set of the eps-split system at the split's eps:
    /// eps1 = C eps, eps2 = eps^2 / A.
    pub fn with_split(&self, split: &EpsSplit) -> Self {
        Self {
            eps1: split.eps1(),
            eps2: split.eps2(),
            ..*self
        }
    }

    /// Computes C and A such that eps1 = C eps_ref and eps2 = eps_ref^2 / A.
    pub fn derive_eps_split(&self, eps_ref: f64) -> Result<EpsSplit, ParamError> {
        if !(eps_ref.is_finite() && eps_ref > 0.0) {
            return Err(ParamError::NonPositive {
                name: "eps".into(),
                value: eps_ref,
            });
        }
        self.validate()?;
        Ok(EpsSplit {
            eps: eps_ref,
            c: self.eps1 / eps_ref,
            a: eps_ref * eps_ref / self.eps2,
        })
    }
}

impl fmt::Display for DimlessParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "K_s={:.6} K_h={:.6} K={:.6} alpha={:.6} beta={:.6} eps1={:.6e} eps2={:.6e}",
            self.k_s, self.k_h, self.k, self.alpha, self.beta, self.eps1, self.eps2
        )
    }
}

/// Default reference value of the single small parameter.
pub const DEFAULT_EPS_REF: f64 = 1e-3;

/// Coupling of the two small parameters to one: eps1 = C eps, eps2 = eps^2 / A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSplit {
    pub eps: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl EpsSplit {
    pub fn eps1(&self) -> f64 {
        self.c * self.eps
    }

    pub fn eps2(&self) -> f64 {
        self.eps * self.eps / self.a
    }

    /// Same constants C, A at a different eps.
    pub fn at(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }

    /// Positive root of v_eps(h) = 0, the seam of the chart-A case split.
    pub fn h_plus(&self, dp: &DimlessParams) -> f64 {
        let eps = self.eps;
        let aak = dp.alpha * self.a * dp.k;
        let ekh = eps * dp.k_h;
        eps * (-ekh + (ekh * ekh + 4.0 * aak * dp.k_h).sqrt()) / (2.0 * aak)
    }
}
