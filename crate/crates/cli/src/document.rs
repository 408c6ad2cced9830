//! JSON form of a [`CsrExpansion`].
//!
//! Rationals are strings (`"p"` or `"p/q"`), node indices are 1-based and
//! matrices are lists of `[i, j, "w"]` triplets.

use maxplus_csr::rational::ParseRationalError;
use maxplus_csr::{Circuit, CsrExpansion, CsrTerm, Matrix, Rational};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub type Triplet = (usize, usize, String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionDocument {
    pub n: usize,
    pub threshold: u64,
    pub terms: Vec<TermDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acyclic_source: Option<Vec<Triplet>>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub group: usize,
    pub rate: String,
    pub circuit: Vec<usize>,
    pub circuit_weight: String,
    pub support: Vec<Vec<usize>>,
    pub period: usize,
    pub c: Vec<Triplet>,
    pub s: Vec<Triplet>,
    pub r: Vec<Triplet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Hex SHA-256 of the input matrix file.
    pub input_sha256: String,
}

impl Provenance {
    pub fn for_input(bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> DocumentError {
    DocumentError::Invalid(msg.into())
}

fn triplets(m: &Matrix) -> Vec<Triplet> {
    m.entries().map(|(i, j, w)| (i + 1, j + 1, w.to_string())).collect()
}

fn rational(field: &str, s: &str) -> Result<Rational, DocumentError> {
    s.parse()
        .map_err(|e: ParseRationalError| invalid(format!("{field}: {e}")))
}

fn matrix(field: &str, rows: usize, cols: usize, entries: &[Triplet]) -> Result<Matrix, DocumentError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut parsed = Vec::with_capacity(entries.len());
    for (i, j, w) in entries {
        if !(1..=rows).contains(i) || !(1..=cols).contains(j) {
            return Err(invalid(format!("{field}: entry ({i}, {j}) outside {rows}x{cols}")));
        }
        if !seen.insert((*i, *j)) {
            return Err(invalid(format!("{field}: duplicate entry ({i}, {j})")));
        }
        parsed.push((i - 1, j - 1, rational(field, w)?));
    }
    Matrix::from_entries(rows, cols, parsed).map_err(|e| invalid(format!("{field}: {e}")))
}

impl TermDocument {
    fn from_term(t: &CsrTerm) -> Self {
        TermDocument {
            group: t.group,
            rate: t.rate.to_string(),
            circuit: t.circuit.nodes().iter().map(|v| v + 1).collect(),
            circuit_weight: t.circuit.weight().to_string(),
            support: t
                .support
                .iter()
                .map(|class| class.iter().map(|v| v + 1).collect())
                .collect(),
            period: t.period(),
            c: triplets(&t.c),
            s: triplets(&t.s),
            r: triplets(&t.r),
        }
    }

    fn to_term(&self, n: usize) -> Result<CsrTerm, DocumentError> {
        let ctx = format!("term {}", self.group);
        let l = self.period;
        if l == 0 {
            return Err(invalid(format!("{ctx}: period must be positive")));
        }
        if self.support.len() != l {
            return Err(invalid(format!("{ctx}: {} support classes for period {l}", self.support.len())));
        }
        let in_range = |v: &usize| (1..=n).contains(v);
        let mut nodes: Vec<usize> = self.circuit.clone();
        if nodes.is_empty() || !nodes.iter().all(in_range) {
            return Err(invalid(format!("{ctx}: circuit nodes must be in 1..={n}")));
        }
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() != self.circuit.len() {
            return Err(invalid(format!("{ctx}: circuit repeats a node")));
        }
        if !self.support.iter().flatten().all(in_range) {
            return Err(invalid(format!("{ctx}: support nodes must be in 1..={n}")));
        }
        let circuit = Circuit::from_parts(
            self.circuit.iter().map(|v| v - 1).collect(),
            rational(&format!("{ctx} circuit_weight"), &self.circuit_weight)?,
        );
        Ok(CsrTerm {
            group: self.group,
            rate: rational(&format!("{ctx} rate"), &self.rate)?,
            circuit,
            support: self
                .support
                .iter()
                .map(|class| class.iter().map(|v| v - 1).collect())
                .collect(),
            c: matrix(&format!("{ctx} c"), n, l, &self.c)?,
            s: matrix(&format!("{ctx} s"), l, l, &self.s)?,
            r: matrix(&format!("{ctx} r"), l, n, &self.r)?,
        })
    }
}

impl ExpansionDocument {
    pub fn from_expansion(x: &CsrExpansion, provenance: Provenance) -> Self {
        ExpansionDocument {
            n: x.n,
            threshold: x.threshold,
            terms: x.terms.iter().map(TermDocument::from_term).collect(),
            acyclic_source: x.acyclic_source.as_ref().map(triplets),
            provenance,
        }
    }

    pub fn to_expansion(&self) -> Result<CsrExpansion, DocumentError> {
        let n = self.n;
        let terms = self
            .terms
            .iter()
            .map(|t| t.to_term(n))
            .collect::<Result<Vec<_>, _>>()?;
        let acyclic_source = self
            .acyclic_source
            .as_ref()
            .map(|e| matrix("acyclic_source", n, n, e))
            .transpose()?;
        Ok(CsrExpansion {
            n,
            terms,
            threshold: self.threshold,
            acyclic_source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }
}
