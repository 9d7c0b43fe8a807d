//! JSON configuration: geometry, variant, flags and link compliances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{CALIBRATED_D, CALIBRATED_L, CALIBRATED_R};
use crate::compliance::ComplianceMatrix6;
use crate::data;
use crate::error::{Error, Result};
use crate::orthoglide::{Flags, LinkCompliances, OrthoglideGeometry, OrthoglideModel, Variant};
use crate::parallelogram::Regularization;

pub const CONFIG_SCHEMA: &str = "pkstiff.config/1";

fn default_schema() -> String {
    CONFIG_SCHEMA.to_string()
}

/// On-disk configuration. Matrices are row-major and checked only in
/// [`Config::checks`] / [`Config::model`], so a malformed file can still be
/// loaded and reported on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(rename = "L")]
    pub l: f64,
    pub r: f64,
    pub d: f64,
    pub variant: Variant,
    #[serde(default)]
    pub flags: Flags,
    pub k_ctr: f64,
    pub act: [[f64; 6]; 6],
    pub foot: [[f64; 6]; 6],
    pub bar: [[f64; 6]; 6],
    pub axis: [[f64; 6]; 6],
    #[serde(default)]
    pub regularization: Regularization,
}

/// Outcome of one named configuration check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub error: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }
}

impl Config {
    /// Calibrated prototype geometry with the identified link compliances.
    pub fn prototype() -> Self {
        Self {
            schema: default_schema(),
            l: CALIBRATED_L,
            r: CALIBRATED_R,
            d: CALIBRATED_D,
            variant: Variant::Prpar,
            flags: Flags::default(),
            k_ctr: data::K_CTR,
            act: data::ACT,
            foot: data::FOOT,
            bar: data::BAR,
            axis: data::AXIS,
            regularization: Regularization::default(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(Error::Data(format!(
                "unsupported config schema '{}', expected '{CONFIG_SCHEMA}'",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    fn geometry(&self) -> Result<OrthoglideGeometry> {
        OrthoglideGeometry::new(self.l, self.r, self.d, self.variant, self.flags)
    }

    fn links(&self) -> Result<LinkCompliances> {
        if !(self.k_ctr.is_finite() && self.k_ctr > 0.0) {
            return Err(Error::Data(format!(
                "k_ctr must be positive, got {}",
                self.k_ctr
            )));
        }
        let m = |name: &str, rows: &[[f64; 6]; 6]| {
            ComplianceMatrix6::from_rows(rows).map_err(|e| Error::Data(format!("{name}: {e}")))
        };
        Ok(LinkCompliances {
            k_ctr: self.k_ctr,
            act: m("act", &self.act)?,
            foot: m("foot", &self.foot)?,
            bar: m("bar", &self.bar)?,
            axis: m("axis", &self.axis)?,
        })
    }

    /// Individual checks: geometry, each matrix, regularization.
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let mut push = |name: &str, r: Result<()>| {
            out.push(Check {
                name: name.to_string(),
                error: r.err().map(|e| e.to_string()),
            })
        };
        push("geometry", self.geometry().map(|_| ()));
        push(
            "k_ctr",
            if self.k_ctr.is_finite() && self.k_ctr > 0.0 {
                Ok(())
            } else {
                Err(Error::Data(format!(
                    "k_ctr must be positive, got {}",
                    self.k_ctr
                )))
            },
        );
        for (name, rows) in [
            ("act", &self.act),
            ("foot", &self.foot),
            ("bar", &self.bar),
            ("axis", &self.axis),
        ] {
            push(
                &format!("{name} symmetric psd"),
                ComplianceMatrix6::from_rows(rows).map(|_| ()),
            );
        }
        push(
            "regularization",
            match self.regularization {
                Regularization::Fictitious { kappa } if !(kappa.is_finite() && kappa > 0.0) => {
                    Err(Error::Input(format!(
                        "fictitious stiffness must be positive, got {kappa}"
                    )))
                }
                _ => Ok(()),
            },
        );
        out
    }

    pub fn model(&self) -> Result<OrthoglideModel> {
        let geometry = self.geometry()?;
        let links = self.links()?;
        if let Some(c) = self.checks().into_iter().find(|c| !c.passed()) {
            return Err(Error::Data(format!(
                "{}: {}",
                c.name,
                c.error.unwrap_or_default()
            )));
        }
        Ok(OrthoglideModel::new(geometry, links).with_regularization(self.regularization))
    }
}
