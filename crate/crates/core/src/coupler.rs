//! Couplers `χ_N`: linear quasi-measurements on `N` subsystems held by one
//! party, returning a single bit `b'`.
//!
//! Each effect has uniform input weight `2^{-N}` split between the two
//! outcomes, with the success part in correlator form:
//!
//! ```text
//! χ₀(b, y) = [1 + 2·C_y·(−1)^{|b|}] / (3·2^N)      χ₁(b, y) = 2^{-N} − χ₀(b, y)
//! ```
//!
//! where `C_y` are the generalized Svetlichny coefficients. Summed against a
//! box this gives `p(b'=0) = GSI/(3·2^{N−1}) + 1/3`. Some `χ₀` weights are
//! negative, so a coupler is only meaningful where its branches come out as
//! valid boxes; [`CouplerEffect::apply`] enforces that on the outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{gsi_sign, BellFunctional};
use crate::scalar::Scalar;
use crate::table::{gather, parity, word_string, BoxTable, MAX_PARTIES};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplerEffect {
    arity: usize,
    /// Indexed by `(b' << 2N) | (inputs << N) | outputs`.
    weights: Vec<Scalar>,
    /// Distinct `(χ₀, χ₁)` pairs and the pair used at each `(inputs << N) | outputs`.
    classes: Vec<[Scalar; 2]>,
    class_of: Vec<usize>,
}

/// One outcome of a coupler application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchResult {
    pub b_prime: u8,
    pub probability: Scalar,
    /// `None` for a zero-probability branch.
    pub table: Option<BoxTable>,
}

/// `p(b'=0)` as a function of the GSI value of the consumed box.
pub fn success_law(arity: usize, gsi_value: &Scalar) -> Scalar {
    let denom = Scalar::from_integer(3) * Scalar::pow2(arity as i32 - 1);
    gsi_value / &denom + Scalar::ratio(1, 3)
}

impl CouplerEffect {
    pub fn new(arity: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidParty(format!(
                "a coupler needs arity >= 2, got {arity}"
            )));
        }
        if arity > MAX_PARTIES {
            return Err(Error::PartyCap {
                requested: arity,
                cap: MAX_PARTIES,
            });
        }
        let words = 1u32 << arity;
        let uniform = Scalar::pow2(-(arity as i32));
        let third = &uniform * Scalar::ratio(1, 3);
        let mut success = Vec::with_capacity(1 << (2 * arity));
        for y in 0..words {
            let c = gsi_sign(y);
            for b in 0..words {
                let sign = if parity(b) == 0 { c } else { -c };
                success.push(&third * Scalar::from_integer(1 + 2 * sign));
            }
        }
        let failure: Vec<Scalar> = success.iter().map(|w| &uniform - w).collect();
        let mut classes: Vec<[Scalar; 2]> = Vec::new();
        let class_of = success
            .iter()
            .zip(&failure)
            .map(
                |(w0, w1)| match classes.iter().position(|c| c[0] == *w0 && c[1] == *w1) {
                    Some(k) => k,
                    None => {
                        classes.push([w0.clone(), w1.clone()]);
                        classes.len() - 1
                    }
                },
            )
            .collect();
        success.extend(failure);
        Ok(CouplerEffect {
            arity,
            weights: success,
            classes,
            class_of,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn weight(&self, b_prime: u8, outputs: u32, inputs: u32) -> &Scalar {
        let n = self.arity;
        let idx = ((b_prime as usize & 1) << (2 * n)) | ((inputs as usize) << n) | outputs as usize;
        &self.weights[idx]
    }

    fn check_arity(&self, table: &BoxTable) -> Result<()> {
        if table.parties() != self.arity {
            Err(Error::ArityMismatch {
                expected: self.arity,
                found: table.parties(),
            })
        } else {
            Ok(())
        }
    }

    /// `Σ_{b,y} χ₀(b,y)·P(b|y)` on the consumed box.
    pub fn success_probability(&self, consumed: &BoxTable) -> Result<Scalar> {
        self.check_arity(consumed)?;
        Ok(consumed
            .entries()
            .filter(|(_, _, p)| !p.is_zero())
            .map(|(y, b, p)| self.weight(0, b, y) * p)
            .sum())
    }

    /// `−2^{N−1} ≤ GSI ≤ 2^N`, equivalently `p(b'=0) ∈ [0, 1]`.
    pub fn is_allowed(&self, consumed: &BoxTable) -> Result<bool> {
        self.check_arity(consumed)?;
        let value = BellFunctional::gsi(self.arity).evaluate(consumed)?;
        let low = -Scalar::pow2(self.arity as i32 - 1);
        let high = Scalar::pow2(self.arity as i32);
        Ok(low <= value && value <= high)
    }

    /// Unnormalized branch tables `T_{b'}(A|X) = Σ_{y,b} χ_{b'}(b,y)·P(A,b|X,y)`
    /// over the surviving parties (ascending order). No validity checks.
    pub fn apply_unnormalized(
        &self,
        joint: &BoxTable,
        consumed: &[usize],
    ) -> Result<[BoxTable; 2]> {
        let n = joint.parties();
        if consumed.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: consumed.len(),
            });
        }
        let mut used = vec![false; n];
        for &p in consumed {
            if p >= n || std::mem::replace(&mut used[p], true) {
                return Err(Error::InvalidParty(format!(
                    "consumed parties {consumed:?} are not distinct parties of a {n}-party box"
                )));
            }
        }
        let survivors: Vec<usize> = (0..n).filter(|&p| !used[p]).collect();
        if survivors.is_empty() {
            return Err(Error::InvalidParty(
                "coupler would consume every party; use success_probability instead".into(),
            ));
        }
        let m = survivors.len();
        let n_consumed = self.arity;
        // Entries sharing a weight pair are summed first and scaled once.
        let mut sums = vec![vec![Scalar::zero(); 1 << (2 * m)]; self.classes.len()];
        for (x, a, p) in joint.entries() {
            if p.is_zero() {
                continue;
            }
            let y = gather(x, consumed) as usize;
            let b = gather(a, consumed) as usize;
            let idx = ((gather(x, &survivors) as usize) << m) | gather(a, &survivors) as usize;
            sums[self.class_of[(y << n_consumed) | b]][idx] += p;
        }
        let mut success = vec![Scalar::zero(); 1 << (2 * m)];
        let mut failure = vec![Scalar::zero(); 1 << (2 * m)];
        for (class, sum) in self.classes.iter().zip(&sums) {
            for (idx, total) in sum.iter().enumerate() {
                if total.is_zero() {
                    continue;
                }
                success[idx] += &class[0] * total;
                failure[idx] += &class[1] * total;
            }
        }
        Ok([BoxTable::quasi(m, success)?, BoxTable::quasi(m, failure)?])
    }

    /// Both branches with their probabilities and normalized boxes.
    ///
    /// Fails with [`Error::CouplerInvalid`] when a branch has a negative
    /// entry or a mass that depends on the surviving inputs.
    pub fn apply(&self, joint: &BoxTable, consumed: &[usize]) -> Result<Vec<BranchResult>> {
        let tables = self.apply_unnormalized(joint, consumed)?;
        tables
            .into_iter()
            .zip(0u8..)
            .map(|(t, b_prime)| finish_branch(b_prime, t))
            .collect()
    }

    /// Wire form: `{"n": N, "weights": [[b', output_word, input_word, Scalar], …]}`.
    pub fn to_file(&self) -> CouplerFile {
        let n = self.arity;
        let mut weights = Vec::new();
        for b_prime in 0..2u8 {
            for y in 0..1u32 << n {
                for b in 0..1u32 << n {
                    let w = self.weight(b_prime, b, y);
                    if !w.is_zero() {
                        weights.push((b_prime, word_string(b, n), word_string(y, n), w.clone()));
                    }
                }
            }
        }
        CouplerFile { n, weights }
    }
}

fn finish_branch(b_prime: u8, table: BoxTable) -> Result<BranchResult> {
    let invalid = |reason: String, mass: Option<Scalar>| Error::CouplerInvalid {
        branch: b_prime,
        reason,
        mass: mass.map(Box::new),
    };
    let mass = table.row_mass(0);
    if let Some(x) = (1..table.words()).find(|&x| table.row_mass(x) != mass) {
        return Err(invalid(
            format!(
                "branch mass depends on the surviving inputs ({} for input {}, {} for input {})",
                mass,
                word_string(0, table.parties()),
                table.row_mass(x),
                word_string(x, table.parties())
            ),
            None,
        ));
    }
    if let Some((x, a, p)) = table.entries().find(|(_, _, p)| p.is_negative()) {
        return Err(invalid(
            format!(
                "negative unnormalized entry T({}|{}) = {p} at branch mass {mass}",
                word_string(a, table.parties()),
                word_string(x, table.parties())
            ),
            Some(mass),
        ));
    }
    if mass.is_zero() {
        return Ok(BranchResult {
            b_prime,
            probability: mass,
            table: None,
        });
    }
    let inv = mass.inv()?;
    let normalized = table
        .scaled(&inv)
        .into_checked()
        .map_err(|e| invalid(e.to_string(), Some(mass.clone())))?;
    Ok(BranchResult {
        b_prime,
        probability: mass,
        table: Some(normalized),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerFile {
    pub n: usize,
    pub weights: Vec<(u8, String, String, Scalar)>,
}
