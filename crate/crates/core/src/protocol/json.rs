use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AliceEncoder, OneWayQmaProtocol, RegisterSizes};
use crate::error::{Error, Result};
use crate::qcore::circuit::{Gate, UnitaryCircuit};
use crate::qcore::linalg;

pub const PROTOCOL_SCHEMA: &str = "qmacc-protocol/1";
const REGISTER_ORDER: [&str; 4] = ["bob_input", "advice", "witness", "ancilla"];

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RegisterEntry {
    name: String,
    qubits: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum AliceEntry {
    Basis,
    /// Keys are Alice inputs in decimal.
    Table { states: BTreeMap<String, Vec<[f64; 2]>> },
}

/// Serialized protocol description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolFile {
    schema: String,
    registers: Vec<RegisterEntry>,
    alice: AliceEntry,
    gates: Vec<Gate>,
    accept: usize,
}

impl From<&OneWayQmaProtocol> for ProtocolFile {
    fn from(p: &OneWayQmaProtocol) -> Self {
        let s = p.sizes();
        let counts = [s.bob_input, s.advice, s.witness, s.ancilla];
        let registers = REGISTER_ORDER
            .iter()
            .zip(counts)
            .filter(|(_, q)| *q > 0)
            .map(|(name, qubits)| RegisterEntry { name: name.to_string(), qubits })
            .collect();
        let alice = match p.alice() {
            AliceEncoder::Basis => AliceEntry::Basis,
            AliceEncoder::Table(t) => AliceEntry::Table {
                states: t.iter().map(|(x, v)| (x.to_string(), linalg::vector_to_pairs(v))).collect(),
            },
            enc @ AliceEncoder::Power(..) => AliceEntry::Table {
                states: enc
                    .domain(s.advice)
                    .into_iter()
                    .filter_map(|x| p.encode(x).ok().map(|v| (x.to_string(), linalg::vector_to_pairs(&v))))
                    .collect(),
            },
        };
        ProtocolFile {
            schema: PROTOCOL_SCHEMA.into(),
            registers,
            alice,
            gates: p.circuit().gates().to_vec(),
            accept: p.accept_qubit(),
        }
    }
}

impl ProtocolFile {
    pub fn into_protocol(self) -> Result<OneWayQmaProtocol> {
        if self.schema != PROTOCOL_SCHEMA {
            return Err(Error::Format(format!("unsupported schema {}", self.schema)));
        }
        let mut counts = [0usize; 4];
        let mut last = None;
        for r in &self.registers {
            let k = REGISTER_ORDER
                .iter()
                .position(|n| *n == r.name)
                .ok_or_else(|| Error::UnknownRegister(r.name.clone()))?;
            if last.is_some_and(|l| l >= k) {
                return Err(Error::Format("registers must appear once, in canonical order".into()));
            }
            last = Some(k);
            counts[k] = r.qubits;
        }
        let sizes = RegisterSizes { bob_input: counts[0], advice: counts[1], witness: counts[2], ancilla: counts[3] };
        let alice = match self.alice {
            AliceEntry::Basis => AliceEncoder::Basis,
            AliceEntry::Table { states } => {
                let mut t = BTreeMap::new();
                for (k, v) in states {
                    let x: u64 = k.parse().map_err(|_| Error::Format(format!("bad Alice input key {k}")))?;
                    t.insert(x, linalg::vector_from_pairs(&v));
                }
                AliceEncoder::Table(t)
            }
        };
        let circuit = UnitaryCircuit::from_gates(sizes.total(), self.gates)?;
        OneWayQmaProtocol::new(sizes, alice, circuit, self.accept)
    }
}

impl OneWayQmaProtocol {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProtocolFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ProtocolFile>(s)?.into_protocol()
    }
}
