//! Bundled regression data: the reference rotation-angle sets for all four
//! design families.

use serde::{Deserialize, Serialize};

use crate::jones::Angle;
use crate::sequences::{build_sequence, Family, SequenceError, SequenceSpec, Target};

pub const TABLE1_JSON: &str = include_str!("../data/table1.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    pub family: Family,
    pub n: usize,
    pub target: Target,
    pub angles_deg: Vec<f64>,
}

impl TableRow {
    pub fn to_sequence(&self) -> Result<SequenceSpec<f64>, SequenceError> {
        let angles: Vec<Angle<f64>> =
            self.angles_deg.iter().map(|&d| Angle::from_degrees(d)).collect();
        let mut seq = build_sequence(self.family, &angles)?;
        seq.target = self.target;
        Ok(seq)
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.family, self.n)
    }
}

/// All bundled angle-set rows, in bundled order.
pub fn table1() -> Vec<TableRow> {
    serde_json::from_str(TABLE1_JSON).expect("bundled table1.json is valid")
}
