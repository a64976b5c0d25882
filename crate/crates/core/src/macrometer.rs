//! Macroscopicity bookkeeping: extensive difference, degree of entanglement
//! and a catalog of superposition experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value with a unit label. Units are compared literally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: impl Into<String>) -> Self {
        Self { value, unit: unit.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentalStatus {
    Achieved,
    Proposed,
}

impl ExperimentalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Achieved => "achieved",
            Self::Proposed => "proposed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroscopicityRecord {
    pub name: String,
    pub s_ext: f64,
    pub s_ent: f64,
    pub product: f64,
    pub status: ExperimentalStatus,
    /// Quantity and reference unit behind `s_ext`, plus any range or formula.
    pub notes: String,
}

impl MacroscopicityRecord {
    pub fn new(name: impl Into<String>, s_ext: f64, s_ent: f64, status: ExperimentalStatus, notes: impl Into<String>) -> Result<Self> {
        if !(s_ext > 0.0 && s_ext.is_finite()) || !(s_ent > 0.0 && s_ent.is_finite()) {
            return Err(Error::Argument("s_ext and s_ent must be positive and finite".into()));
        }
        Ok(Self { name: name.into(), s_ext, s_ent, product: s_ext * s_ent, status, notes: notes.into() })
    }

    pub fn log10_product(&self) -> f64 {
        self.product.log10()
    }
}

/// Extensive difference in units of a microscopic reference.
pub fn s_ext(extensive_difference: &Quantity, reference: &Quantity) -> Result<f64> {
    if extensive_difference.unit != reference.unit {
        return Err(Error::UnitMismatch(format!("{} vs {}", extensive_difference.unit, reference.unit)));
    }
    if !(reference.value > 0.0) {
        return Err(Error::Argument("reference must be positive".into()));
    }
    Ok(extensive_difference.value / reference.value)
}

/// Degree of entanglement, estimated by the number of constituents.
pub fn s_ent(constituent_count: f64) -> Result<f64> {
    if !(constituent_count >= 1.0 && constituent_count.is_finite()) {
        return Err(Error::Argument("constituent count must be at least 1".into()));
    }
    Ok(constituent_count)
}

pub fn builtin_catalog() -> Vec<MacroscopicityRecord> {
    use ExperimentalStatus::*;
    let rec = |name: &str, e: f64, n: f64, status, notes: &str| MacroscopicityRecord::new(name, e, n, status, notes).expect("positive catalog values");
    vec![
        rec("SQUID", 1e10, 1e9, Achieved, "magnetic moment difference in units of mu_B; s_ent counts Cooper pairs"),
        rec("C70", 1e6, 1e3, Achieved, "path separation 1 mm over molecule size 1 nm; s_ent = 3 x 6 x 70"),
        rec("BEC", 1e7, 1e9, Proposed, "atom number difference; s_ent = 100 N for Rb-87 at N = 1e7"),
        rec("neuron", 1e2, 3e7, Proposed, "membrane thickness 10 nm over ion size 0.1 nm; range 1e2 to 1e3; s_ent counts Na ions"),
    ]
}

pub fn catalog_to_csv(records: &[MacroscopicityRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numeric(format!("csv: {e}")))
}

pub fn catalog_from_csv(text: &str) -> Result<Vec<MacroscopicityRecord>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::Argument(format!("csv: {e}"))))
        .collect()
}
