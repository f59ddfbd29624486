use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::device::{DeviceSnapshot, Triplet};
use crate::{Error, Result};

/// Simultaneously characterized error rates of one triplet. The isolated
/// rates are filled in by characterization runs and are optional in files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkRates {
    pub cx_sim_error: f64,
    pub sq_sim_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cx_iso_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sq_iso_error: Option<f64>,
}

impl CrosstalkRates {
    pub fn new(cx_sim_error: f64, sq_sim_error: f64) -> Self {
        Self {
            cx_sim_error,
            sq_sim_error,
            cx_iso_error: None,
            sq_iso_error: None,
        }
    }

    fn check(&self, at: &Triplet) -> Result<()> {
        let all = [
            Some(self.cx_sim_error),
            Some(self.sq_sim_error),
            self.cx_iso_error,
            self.sq_iso_error,
        ];
        if all.iter().flatten().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invariant(
                format!("table entry {at}"),
                "rates must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    pair: [usize; 2],
    spectator: usize,
    #[serde(flatten)]
    rates: CrosstalkRates,
}

/// Characterized rates per triplet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrosstalkTable {
    pub entries: BTreeMap<Triplet, CrosstalkRates>,
}

impl CrosstalkTable {
    pub fn insert(&mut self, triplet: Triplet, rates: CrosstalkRates) -> Result<()> {
        rates.check(&triplet)?;
        self.entries.insert(triplet, rates);
        Ok(())
    }

    pub fn get(&self, triplet: &Triplet) -> Option<&CrosstalkRates> {
        self.entries.get(triplet)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<TableRow> =
            serde_json::from_str(text).map_err(|e| Error::parse("crosstalk table", e))?;
        let mut table = Self::default();
        for row in rows {
            let t = Triplet::new(row.pair[0], row.pair[1], row.spectator);
            if table.entries.contains_key(&t) {
                return Err(Error::invariant(
                    "crosstalk table",
                    format!("duplicate entry {t}"),
                ));
            }
            table.insert(t, row.rates)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<TableRow> = self
            .entries
            .iter()
            .map(|(t, r)| TableRow {
                pair: [t.drive, t.target],
                spectator: t.spectator,
                rates: *r,
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("table serializes")
    }

    /// Every key must be a valid triplet of `snapshot`.
    pub fn validate(&self, snapshot: &DeviceSnapshot) -> Result<()> {
        self.entries.keys().try_for_each(|t| t.validate(snapshot))
    }
}

#[derive(Serialize, Deserialize)]
struct InjectionRow {
    pair: [usize; 2],
    spectator: usize,
    weight: f64,
}

/// Ground-truth correlated depolarizing weights, applied on (drive, target,
/// spectator) whenever the pair's CX fires while the spectator is active.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrosstalkInjection {
    pub weights: BTreeMap<Triplet, f64>,
}

impl CrosstalkInjection {
    pub fn insert(&mut self, triplet: Triplet, weight: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invariant(
                format!("injection {triplet}"),
                "weight must lie in [0, 1]",
            ));
        }
        self.weights.insert(triplet, weight);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.weights.values().all(|&w| w == 0.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<InjectionRow> =
            serde_json::from_str(text).map_err(|e| Error::parse("injection", e))?;
        let mut inj = Self::default();
        for row in rows {
            let t = Triplet::new(row.pair[0], row.pair[1], row.spectator);
            if inj.weights.contains_key(&t) {
                return Err(Error::invariant(
                    "injection",
                    format!("duplicate entry {t}"),
                ));
            }
            inj.insert(t, row.weight)?;
        }
        Ok(inj)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<InjectionRow> = self
            .weights
            .iter()
            .map(|(t, &weight)| InjectionRow {
                pair: [t.drive, t.target],
                spectator: t.spectator,
                weight,
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("injection serializes")
    }

    pub fn validate(&self, snapshot: &DeviceSnapshot) -> Result<()> {
        self.weights.keys().try_for_each(|t| t.validate(snapshot))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let text = r#"[{"pair":[0,1],"spectator":2,"cx_sim_error":0.05,"sq_sim_error":0.01}]"#;
        let table = CrosstalkTable::from_json(text).unwrap();
        let rates = table.get(&Triplet::new(0, 1, 2)).unwrap();
        assert_eq!(*rates, CrosstalkRates::new(0.05, 0.01));
        assert_eq!(CrosstalkTable::from_json(&table.to_json()).unwrap(), table);
    }

    #[test]
    fn table_rejects_bad_rates_and_duplicates() {
        assert!(CrosstalkTable::from_json(
            r#"[{"pair":[0,1],"spectator":2,"cx_sim_error":1.5,"sq_sim_error":0}]"#
        )
        .is_err());
        let dup = r#"[{"pair":[0,1],"spectator":2,"cx_sim_error":0.1,"sq_sim_error":0},
                      {"pair":[0,1],"spectator":2,"cx_sim_error":0.2,"sq_sim_error":0}]"#;
        assert!(CrosstalkTable::from_json(dup).is_err());
        assert!(CrosstalkTable::from_json("{").is_err());
    }

    #[test]
    fn injection_round_trip() {
        let inj = CrosstalkInjection::from_json(crate::fixtures::EHNINGEN_INJECTION_JSON).unwrap();
        assert_eq!(inj.weights.len(), 3);
        inj.validate(&crate::fixtures::ehningen()).unwrap();
        assert_eq!(CrosstalkInjection::from_json(&inj.to_json()).unwrap(), inj);
        assert!(
            CrosstalkInjection::from_json(r#"[{"pair":[0,1],"spectator":2,"weight":-0.1}]"#)
                .is_err()
        );
    }
}
