//! Correlators, the CH expression, and the generalized Svetlichny
//! functional with its local, quantum and algebraic bounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{parity, parse_word, word_string, BoxTable};

/// `E_x = Σ_a (−1)^{|a|} P(a|x)`.
pub fn correlator(table: &BoxTable, input: u32) -> Scalar {
    let mut e = Scalar::zero();
    for a in 0..table.words() {
        let p = table.get(input, a);
        if p.is_zero() {
            continue;
        }
        if parity(a) == 0 {
            e += p;
        } else {
            e -= p;
        }
    }
    e
}

/// Coefficients `C_x` over input words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellFunctional {
    parties: usize,
    coeffs: Vec<Scalar>,
}

impl BellFunctional {
    pub fn new(parties: usize, coeffs: Vec<Scalar>) -> Result<Self> {
        if coeffs.len() != 1 << parties {
            return Err(Error::Parse(format!(
                "{} coefficients for a {parties}-party functional",
                coeffs.len()
            )));
        }
        Ok(BellFunctional { parties, coeffs })
    }

    /// Generalized Svetlichny functional. `√2·cos(π/2·(|x| mod 4) − π/4)`
    /// is +1 for residues 0, 1 and −1 for residues 2, 3.
    pub fn gsi(parties: usize) -> Self {
        let coeffs = (0..1u32 << parties)
            .map(|x| Scalar::from_integer(gsi_sign(x)))
            .collect();
        BellFunctional { parties, coeffs }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn coeff(&self, input: u32) -> &Scalar {
        &self.coeffs[input as usize]
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// `Σ_x C_x · E_x`.
    pub fn evaluate(&self, table: &BoxTable) -> Result<Scalar> {
        if table.parties() != self.parties {
            return Err(Error::ArityMismatch {
                expected: self.parties,
                found: table.parties(),
            });
        }
        Ok((0..table.words())
            .filter(|&x| !self.coeffs[x as usize].is_zero())
            .map(|x| &self.coeffs[x as usize] * correlator(table, x))
            .sum())
    }

    pub fn to_file(&self) -> FunctionalFile {
        FunctionalFile {
            n: self.parties,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(x, c)| (word_string(x as u32, self.parties), c.clone()))
                .collect(),
        }
    }

    pub fn from_file(file: &FunctionalFile) -> Result<Self> {
        let mut coeffs = vec![Scalar::zero(); 1 << file.n];
        let mut seen = BTreeMap::new();
        for (word, c) in &file.coeffs {
            let x = parse_word(word, file.n)?;
            if seen.insert(x, ()).is_some() {
                return Err(Error::Parse(format!("input word {word} listed twice")));
            }
            coeffs[x as usize] = c.clone();
        }
        BellFunctional::new(file.n, coeffs)
    }
}

/// `±1` from `|x| mod 4`.
pub fn gsi_sign(input: u32) -> i64 {
    match input.count_ones() % 4 {
        0 | 1 => 1,
        _ => -1,
    }
}

/// Wire format `{"n": int, "coeffs": [[input_word, Scalar], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalFile {
    pub n: usize,
    pub coeffs: Vec<(String, Scalar)>,
}

/// `P(11|00) + P(00|10) + P(00|01) − P(00|11)`.
pub fn ch_evaluate(table: &BoxTable) -> Result<Scalar> {
    if table.parties() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: table.parties(),
        });
    }
    // words are (party1 | party2 << 1)
    let p = |a: u32, x: u32| table.get(x, a).clone();
    Ok(p(0b11, 0b00) + p(0b00, 0b01) + p(0b00, 0b10) - p(0b00, 0b11))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundTriple {
    pub local: Scalar,
    pub quantum: Scalar,
    pub algebraic: Scalar,
}

/// `(2^{n−1}, 2^{n−1}·√2, 2^n)`.
pub fn bounds(parties: usize) -> BoundTriple {
    let local = Scalar::pow2(parties as i32 - 1);
    BoundTriple {
        quantum: &local * Scalar::sqrt2(),
        algebraic: Scalar::pow2(parties as i32),
        local,
    }
}

/// Where a box's GSI value sits relative to the bounds. A value at or below
/// the local bound is not a locality certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub gsi_value: Scalar,
    pub exceeds_local: bool,
    pub exceeds_quantum: bool,
}

pub fn classify(table: &BoxTable) -> Classification {
    let n = table.parties();
    let value = BellFunctional::gsi(n)
        .evaluate(table)
        .expect("functional built for this arity");
    let b = bounds(n);
    let magnitude = value.abs();
    Classification {
        exceeds_local: magnitude > b.local,
        exceeds_quantum: magnitude > b.quantum,
        gsi_value: value,
    }
}
