//! Three-valued membership verdicts with checkable witnesses.

use serde::{Deserialize, Serialize};

use super::herm::{c, CVector, HermElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    In,
    Out,
    Unknown,
}

/// A complex vector as `[re, im]` pairs.
pub type ComplexList = Vec<[f64; 2]>;

pub fn to_list(v: &CVector) -> ComplexList {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_list(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|z| c(z[0], z[1])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Full spectrum, ascending.
    Spectrum { eigenvalues: Vec<f64> },
    /// Unit vector `v` with `v* M v = value`.
    Eigenvector { value: f64, vector: ComplexList },
    /// Unit product vector `v_1 ⊗ … ⊗ v_k` with `(⊗v)* M (⊗v) = value`.
    ProductVectors { value: f64, factors: Vec<ComplexList> },
    /// `M = P + Σ_S Q_S^{Γ_S}` with every part psd up to `min_eig`.
    Decomposition {
        residual: f64,
        min_eig: f64,
        transposed: Vec<Vec<usize>>,
    },
    /// Best value found by a search that saw no violation.
    SearchExhausted { restarts: usize, best: f64 },
    /// A functional `z` in the dual cone with `<z, x> = value < 0`.
    DualFunctional {
        value: f64,
        dual_min_eig: f64,
        functional: Vec<HermElement>,
    },
    /// `x` is within `residual` of an explicit sum of generator compressions.
    Compressions { residual: f64, terms: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tag: Tag,
    pub witness: Option<Witness>,
    /// False when the verdict rests on a heuristic search only.
    pub certified: bool,
}

impl Verdict {
    pub fn certified(tag: Tag, witness: Witness) -> Self {
        Verdict {
            tag,
            witness: Some(witness),
            certified: true,
        }
    }

    pub fn heuristic(tag: Tag, witness: Witness) -> Self {
        Verdict {
            tag,
            witness: Some(witness),
            certified: false,
        }
    }

    pub fn unknown(witness: Option<Witness>) -> Self {
        Verdict {
            tag: Tag::Unknown,
            witness,
            certified: false,
        }
    }

    pub fn is_in(&self) -> bool {
        self.tag == Tag::In
    }

    pub fn is_out(&self) -> bool {
        self.tag == Tag::Out
    }
}
