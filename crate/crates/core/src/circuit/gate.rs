use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    SX,
    /// Virtual Z rotation by θ radians.
    RZ(f64),
    /// `qubits = [control, target]`.
    CX,
    Barrier,
    /// Explicit idling for the given number of nanoseconds.
    Delay(f64),
    Measure,
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "SDG",
            Gate::SX => "SX",
            Gate::RZ(_) => "RZ",
            Gate::CX => "CX",
            Gate::Barrier => "BARRIER",
            Gate::Delay(_) => "DELAY",
            Gate::Measure => "MEASURE",
        }
    }

    /// Fixed arity, or `None` for barriers.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Gate::CX => Some(2),
            Gate::Barrier => None,
            _ => Some(1),
        }
    }

    /// Gates with a unitary action on the state.
    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::Barrier | Gate::Delay(_) | Gate::Measure)
    }

    pub fn is_single_qubit_unitary(&self) -> bool {
        self.is_unitary() && !matches!(self, Gate::CX)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::RZ(t) => write!(f, "RZ({t})"),
            Gate::Delay(d) => write!(f, "DELAY({d})"),
            g => f.write_str(g.name()),
        }
    }
}

/// A gate applied to concrete qubits.
///
/// `frame` marks zero-duration, noiseless Pauli frame insertions made by
/// randomized compiling; they never count towards qubit activity.
#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub gate: Gate,
    pub qubits: Vec<usize>,
    pub frame: bool,
}

impl Instruction {
    pub fn new(gate: Gate, qubits: impl Into<Vec<usize>>) -> Self {
        Self {
            gate,
            qubits: qubits.into(),
            frame: false,
        }
    }

    pub fn frame(gate: Gate, qubit: usize) -> Self {
        Self {
            gate,
            qubits: vec![qubit],
            frame: true,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct InstructionJson {
    gate: String,
    qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    frame: bool,
}

impl Serialize for Instruction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (theta_rad, duration_ns) = match self.gate {
            Gate::RZ(t) => (Some(t), None),
            Gate::Delay(d) => (None, Some(d)),
            _ => (None, None),
        };
        InstructionJson {
            gate: self.gate.name().to_string(),
            qubits: self.qubits.clone(),
            theta_rad,
            duration_ns,
            frame: self.frame,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Instruction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = InstructionJson::deserialize(d)?;
        let gate = match raw.gate.to_ascii_uppercase().as_str() {
            "I" | "ID" => Gate::I,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "SDG" => Gate::Sdg,
            "SX" => Gate::SX,
            "RZ" => Gate::RZ(
                raw.theta_rad
                    .ok_or_else(|| D::Error::missing_field("theta_rad"))?,
            ),
            "CX" | "CNOT" => Gate::CX,
            "BARRIER" => Gate::Barrier,
            "DELAY" => Gate::Delay(
                raw.duration_ns
                    .ok_or_else(|| D::Error::missing_field("duration_ns"))?,
            ),
            "MEASURE" => Gate::Measure,
            other => return Err(D::Error::custom(format!("unknown gate {other:?}"))),
        };
        Ok(Instruction {
            gate,
            qubits: raw.qubits,
            frame: raw.frame,
        })
    }
}

/// An ordered list of instructions on `num_qubits` qubits.
///
/// Every mutation is validated: indices are in range, arities match,
/// parameters are finite, and nothing follows a qubit's measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    #[serde(skip)]
    measured: BTreeSet<usize>,
}

#[derive(Deserialize)]
struct CircuitJson {
    num_qubits: usize,
    instructions: Vec<Instruction>,
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CircuitJson::deserialize(d)?;
        Circuit::from_instructions(raw.num_qubits, raw.instructions)
            .map_err(serde::de::Error::custom)
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            instructions: Vec::new(),
            measured: BTreeSet::new(),
        }
    }

    pub fn from_instructions(num_qubits: usize, instructions: Vec<Instruction>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for inst in instructions {
            c.push(inst)?;
        }
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("circuit JSON", e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, inst: Instruction) -> Result<&mut Self> {
        let field = || format!("instructions[{}]", self.instructions.len());
        match inst.gate.arity() {
            Some(k) if inst.qubits.len() != k => {
                return Err(Error::invariant(
                    field(),
                    format!(
                        "{} takes {k} qubit(s), got {}",
                        inst.gate.name(),
                        inst.qubits.len()
                    ),
                ))
            }
            None if inst.qubits.is_empty() => {
                return Err(Error::invariant(field(), "barrier without qubits"))
            }
            _ => {}
        }
        match inst.gate {
            Gate::RZ(t) if !t.is_finite() => {
                return Err(Error::invariant(field(), "rotation angle must be finite"))
            }
            Gate::Delay(d) if !(d.is_finite() && d >= 0.0) => {
                return Err(Error::invariant(field(), "delay must be finite and >= 0"))
            }
            _ => {}
        }
        if inst.frame && !matches!(inst.gate, Gate::I | Gate::X | Gate::Y | Gate::Z) {
            return Err(Error::invariant(
                field(),
                "frame insertions must be Pauli gates",
            ));
        }
        let mut distinct = BTreeSet::new();
        for &q in &inst.qubits {
            if q >= self.num_qubits {
                return Err(Error::invariant(
                    field(),
                    format!("qubit {q} out of range for {} qubits", self.num_qubits),
                ));
            }
            if !distinct.insert(q) {
                return Err(Error::invariant(field(), format!("qubit {q} repeated")));
            }
            if self.measured.contains(&q) {
                return Err(Error::invariant(
                    field(),
                    format!("qubit {q} already measured"),
                ));
            }
        }
        if inst.gate == Gate::Measure {
            self.measured.insert(inst.qubits[0]);
        }
        self.instructions.push(inst);
        Ok(self)
    }

    /// Appends a gate; panics on invalid input. For builders whose inputs
    /// are known to be valid.
    pub fn add(&mut self, gate: Gate, qubits: &[usize]) -> &mut Self {
        self.push(Instruction::new(gate, qubits))
            .expect("valid instruction");
        self
    }

    pub fn measure_all(&mut self) -> &mut Self {
        for q in 0..self.num_qubits {
            if !self.measured.contains(&q) {
                self.add(Gate::Measure, &[q]);
            }
        }
        self
    }

    /// Measured qubits in the order of their MEASURE instructions. Bit `i`
    /// of an outcome refers to `measured_qubits()[i]`.
    pub fn measured_qubits(&self) -> Vec<usize> {
        self.instructions
            .iter()
            .filter(|i| i.gate == Gate::Measure)
            .map(|i| i.qubits[0])
            .collect()
    }

    /// Qubits touched by anything other than a barrier, sorted.
    pub fn used_qubits(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .instructions
            .iter()
            .filter(|i| i.gate != Gate::Barrier)
            .flat_map(|i| i.qubits.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Copy with every MEASURE removed.
    pub fn without_measurements(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits);
        c.instructions = self
            .instructions
            .iter()
            .filter(|i| i.gate != Gate::Measure)
            .cloned()
            .collect();
        c
    }

    /// Relabels qubits through `map` (logical index → physical id) onto a
    /// register of `num_qubits`.
    pub fn remap(&self, map: &[usize], num_qubits: usize) -> Result<Circuit> {
        let mut c = Circuit::new(num_qubits);
        for inst in &self.instructions {
            let qubits = inst
                .qubits
                .iter()
                .map(|&q| {
                    map.get(q).copied().ok_or_else(|| {
                        Error::LayoutMismatch(format!("logical qubit {q} has no placement"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            c.push(Instruction {
                gate: inst.gate,
                qubits,
                frame: inst.frame,
            })?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_instructions() {
        let mut c = Circuit::new(2);
        assert!(c.push(Instruction::new(Gate::CX, [0])).is_err());
        assert!(c.push(Instruction::new(Gate::X, [2])).is_err());
        assert!(c.push(Instruction::new(Gate::CX, [1, 1])).is_err());
        assert!(c.push(Instruction::new(Gate::RZ(f64::NAN), [0])).is_err());
        assert!(c.push(Instruction::new(Gate::Delay(-1.0), [0])).is_err());
        assert!(c
            .push(Instruction::new(Gate::Barrier, Vec::<usize>::new()))
            .is_err());
        assert!(c
            .push(Instruction {
                gate: Gate::H,
                qubits: vec![0],
                frame: true
            })
            .is_err());
        c.add(Gate::Measure, &[0]);
        assert!(c.push(Instruction::new(Gate::X, [0])).is_err());
        assert!(c.push(Instruction::new(Gate::Measure, [0])).is_err());
        c.add(Gate::X, &[1]);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"num_qubits":2,"instructions":[{"gate":"h","qubits":[0]},
            {"gate":"RZ","qubits":[1],"theta_rad":0.5},{"gate":"delay","qubits":[1],"duration_ns":100},
            {"gate":"cx","qubits":[0,1]},{"gate":"X","qubits":[0],"frame":true},
            {"gate":"barrier","qubits":[0,1]},{"gate":"measure","qubits":[1]}]}"#;
        let c = Circuit::from_json(text).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(c.instructions()[1].gate, Gate::RZ(0.5));
        assert!(c.instructions()[4].frame);
        assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.measured_qubits(), vec![1]);
    }

    #[test]
    fn json_errors() {
        assert!(Circuit::from_json(
            r#"{"num_qubits":1,"instructions":[{"gate":"rz","qubits":[0]}]}"#
        )
        .is_err());
        assert!(Circuit::from_json(
            r#"{"num_qubits":1,"instructions":[{"gate":"u3","qubits":[0]}]}"#
        )
        .is_err());
        assert!(Circuit::from_json(
            r#"{"num_qubits":1,"instructions":[{"gate":"x","qubits":[3]}]}"#
        )
        .is_err());
    }

    #[test]
    fn remap_places_logical_qubits() {
        let mut c = Circuit::new(2);
        c.add(Gate::H, &[0]).add(Gate::CX, &[0, 1]).measure_all();
        let p = c.remap(&[5, 3], 6).unwrap();
        assert_eq!(p.instructions()[1].qubits, vec![5, 3]);
        assert_eq!(p.measured_qubits(), vec![5, 3]);
        assert!(c.remap(&[5], 6).is_err());
    }
}
