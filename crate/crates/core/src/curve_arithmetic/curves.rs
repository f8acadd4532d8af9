use serde::{Deserialize, Serialize};

use super::{CurveError, Result};

/// Weierstrass model `y² + a1 xy + a3 y = x³ + a2 x² + a4 x + a6` with its
/// conductor and root number. The model is assumed minimal at every prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCurveData {
    pub label: String,
    pub ainvs: [i64; 5],
    pub conductor: u64,
    pub root_number: i8,
}

impl EllipticCurveData {
    pub fn new(label: &str, ainvs: [i64; 5], conductor: u64, root_number: i64) -> Result<Self> {
        if root_number != 1 && root_number != -1 {
            return Err(CurveError::InvalidRootNumber { label: label.into(), value: root_number });
        }
        if conductor == 0 {
            return Err(CurveError::InvalidConductor { label: label.into() });
        }
        let curve = Self { label: label.into(), ainvs, conductor, root_number: root_number as i8 };
        if curve.discriminant() == 0 {
            return Err(CurveError::Singular { label: label.into() });
        }
        Ok(curve)
    }

    fn a(&self) -> [i128; 5] {
        self.ainvs.map(i128::from)
    }

    pub fn b2(&self) -> i128 {
        let [a1, a2, ..] = self.a();
        a1 * a1 + 4 * a2
    }

    pub fn b4(&self) -> i128 {
        let [a1, _, a3, a4, _] = self.a();
        2 * a4 + a1 * a3
    }

    pub fn b6(&self) -> i128 {
        let [_, _, a3, _, a6] = self.a();
        a3 * a3 + 4 * a6
    }

    pub fn b8(&self) -> i128 {
        let [a1, a2, a3, a4, a6] = self.a();
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    pub fn c4(&self) -> i128 {
        let b2 = self.b2();
        b2 * b2 - 24 * self.b4()
    }

    pub fn c6(&self) -> i128 {
        let (b2, b4, b6) = (self.b2(), self.b4(), self.b6());
        -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
    }

    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    pub fn has_good_reduction(&self, p: u64) -> bool {
        self.conductor % p != 0
    }
}

/// The curves of conductor 11, 19 and 32 (`y² = x³ − x`).
pub fn builtin_curves() -> Vec<EllipticCurveData> {
    vec![
        EllipticCurveData::new("E11", [0, -1, 1, -10, -20], 11, 1).expect("valid builtin"),
        EllipticCurveData::new("E19", [0, 1, 1, -9, -15], 19, 1).expect("valid builtin"),
        EllipticCurveData::new("E32", [0, 0, 0, -1, 0], 32, 1).expect("valid builtin"),
    ]
}

/// A registry row; the root number may be left for the caller to infer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveEntry {
    pub label: String,
    pub ainvs: [i64; 5],
    pub conductor: u64,
    #[serde(default)]
    pub root_number: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRegistry {
    #[serde(default, rename = "curve")]
    pub entries: Vec<CurveEntry>,
}

fn normalize(label: &str) -> String {
    label.chars().filter(|c| *c != '_').collect::<String>().to_ascii_uppercase()
}

impl CurveRegistry {
    pub fn builtin() -> Self {
        let entries = builtin_curves()
            .into_iter()
            .map(|c| CurveEntry {
                label: c.label,
                ainvs: c.ainvs,
                conductor: c.conductor,
                root_number: Some(c.root_number.into()),
            })
            .collect();
        Self { entries }
    }

    /// Parses `[[curve]]` tables with `label`, `ainvs`, `conductor` and an
    /// optional `root_number`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let registry: Self = toml::from_str(text).map_err(|e| CurveError::Registry(e.to_string()))?;
        for entry in &registry.entries {
            EllipticCurveData::new(&entry.label, entry.ainvs, entry.conductor, entry.root_number.unwrap_or(1))?;
        }
        Ok(registry)
    }

    /// Adds `other`'s entries, replacing any with the same label.
    pub fn merge(&mut self, other: CurveRegistry) {
        for entry in other.entries {
            let key = normalize(&entry.label);
            self.entries.retain(|e| normalize(&e.label) != key);
            self.entries.push(entry);
        }
    }

    /// Case- and underscore-insensitive lookup (`e_11` finds `E11`).
    pub fn find(&self, label: &str) -> Result<&CurveEntry> {
        let key = normalize(label);
        self.entries.iter().find(|e| normalize(&e.label) == key).ok_or_else(|| CurveError::UnknownCurve(label.into()))
    }
}

impl CurveEntry {
    /// The curve with the given root number, or the stored one.
    pub fn to_curve(&self, root_number: Option<i64>) -> Result<EllipticCurveData> {
        let w = root_number
            .or(self.root_number)
            .ok_or_else(|| CurveError::Registry(format!("curve {} has no root number", self.label)))?;
        EllipticCurveData::new(&self.label, self.ainvs, self.conductor, w)
    }
}
