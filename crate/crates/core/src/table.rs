//! Joint probability tables `P(a₁…aₙ | x₁…xₙ)` for binary-input,
//! binary-output parties, and the named box families built on them.
//!
//! Words are `u32` bit strings with party 1 in bit 0 (`party1-lsb`); the
//! table holds `4^n` entries indexed by `(input << n) | output`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense tables beyond this many parties are refused.
pub const MAX_PARTIES: usize = 10;

#[inline]
pub fn bit(word: u32, party: usize) -> u32 {
    (word >> party) & 1
}

#[inline]
pub fn parity(word: u32) -> u32 {
    word.count_ones() & 1
}

/// `⊕_{j<k} x_j x_k`, i.e. `C(|x|, 2) mod 2`.
#[inline]
pub fn pair_parity(word: u32) -> u32 {
    let k = word.count_ones();
    (k * k.saturating_sub(1) / 2) & 1
}

fn check_cap(n: usize) -> Result<()> {
    if n > MAX_PARTIES {
        Err(Error::PartyCap {
            requested: n,
            cap: MAX_PARTIES,
        })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxKind {
    Pr,
    AntiPr,
    Mixed,
    Gsb,
    Sb,
    Isotropic,
    Failure,
}

impl BoxKind {
    pub const ALL: [BoxKind; 7] = [
        BoxKind::Pr,
        BoxKind::AntiPr,
        BoxKind::Mixed,
        BoxKind::Gsb,
        BoxKind::Sb,
        BoxKind::Isotropic,
        BoxKind::Failure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoxKind::Pr => "pr",
            BoxKind::AntiPr => "anti_pr",
            BoxKind::Mixed => "mixed",
            BoxKind::Gsb => "gsb",
            BoxKind::Sb => "sb",
            BoxKind::Isotropic => "isotropic",
            BoxKind::Failure => "failure",
        }
    }
}

impl fmt::Display for BoxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoxKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoxKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown box kind {s:?}")))
    }
}

/// Inputs to discarded parties when marginalizing.
#[derive(Clone, Copy, Debug)]
pub enum Discard<'a> {
    /// Average over all discarded inputs.
    Average,
    /// `(party, input bit)` for every discarded party.
    Fixed(&'a [(usize, u32)]),
}

/// Outcome of [`BoxTable::validate`]. Exact, no tolerance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub normalized: bool,
    pub nonnegative: bool,
    /// One flag per party: its input does not influence the others' marginal.
    pub nonsignaling: Vec<bool>,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.normalized && self.nonnegative && self.nonsignaling.iter().all(|&ok| ok)
    }
}

/// Equality compares entries only, not whether the table was validated.
#[derive(Clone)]
pub struct BoxTable {
    parties: usize,
    probs: Vec<Scalar>,
    quasi: bool,
}

impl PartialEq for BoxTable {
    fn eq(&self, other: &Self) -> bool {
        self.parties == other.parties && self.probs == other.probs
    }
}

impl Eq for BoxTable {}

impl std::hash::Hash for BoxTable {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.parties.hash(state);
        self.probs.hash(state);
    }
}

impl BoxTable {
    /// A validated box: normalized, nonnegative, nonsignaling.
    pub fn new(parties: usize, probs: Vec<Scalar>) -> Result<Self> {
        let table = BoxTable::quasi(parties, probs)?;
        table.into_checked()
    }

    /// An unchecked table that may be unnormalized or carry negative
    /// entries; flagged as quasi.
    pub fn quasi(parties: usize, probs: Vec<Scalar>) -> Result<Self> {
        if parties == 0 {
            return Err(Error::InvalidBox("a box needs at least one party".into()));
        }
        check_cap(parties)?;
        if probs.len() != 1 << (2 * parties) {
            return Err(Error::InvalidBox(format!(
                "{} entries given, a {parties}-party table has {}",
                probs.len(),
                1usize << (2 * parties)
            )));
        }
        Ok(BoxTable {
            parties,
            probs,
            quasi: true,
        })
    }

    /// Validates a quasi table and clears the quasi flag.
    pub fn into_checked(mut self) -> Result<Self> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidBox(report.problems.join("; ")));
        }
        self.quasi = false;
        Ok(self)
    }

    pub fn from_fn(parties: usize, f: impl Fn(u32, u32) -> Scalar) -> Result<Self> {
        BoxTable::new(parties, build(parties, f)?)
    }

    pub fn quasi_from_fn(parties: usize, f: impl Fn(u32, u32) -> Scalar) -> Result<Self> {
        BoxTable::quasi(parties, build(parties, f)?)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn is_quasi(&self) -> bool {
        self.quasi
    }

    pub fn words(&self) -> u32 {
        1 << self.parties
    }

    pub fn probs(&self) -> &[Scalar] {
        &self.probs
    }

    #[inline]
    pub fn index(&self, input: u32, output: u32) -> usize {
        ((input as usize) << self.parties) | output as usize
    }

    #[inline]
    pub fn get(&self, input: u32, output: u32) -> &Scalar {
        &self.probs[self.index(input, output)]
    }

    /// `(input, output, probability)` for every entry.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, &Scalar)> + '_ {
        let n = self.parties;
        let mask = (1u32 << n) - 1;
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| ((i >> n) as u32, i as u32 & mask, p))
    }

    /// Total mass of one input row.
    pub fn row_mass(&self, input: u32) -> Scalar {
        let start = self.index(input, 0);
        self.probs[start..start + self.words() as usize]
            .iter()
            .sum()
    }

    // Named families -------------------------------------------------------

    /// Fully mixed box: every entry `2^{-n}`.
    pub fn uniform(parties: usize) -> Result<Self> {
        let p = Scalar::pow2(-(parties as i32));
        BoxTable::from_fn(parties, |_, _| p.clone())
    }

    /// Generalized Svetlichny box: `2^{1-n}` where `⊕aᵢ = ⊕_{j<k} xⱼxₖ`.
    pub fn gsb(parties: usize) -> Result<Self> {
        if parties < 2 {
            return Err(Error::InvalidBox("gsb needs at least 2 parties".into()));
        }
        let p = Scalar::pow2(1 - parties as i32);
        BoxTable::from_fn(parties, |x, a| {
            if parity(a) == pair_parity(x) {
                p.clone()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn pr() -> Self {
        BoxTable::gsb(2).expect("PR box")
    }

    /// `a ⊕ b = xy ⊕ 1`.
    pub fn anti_pr() -> Self {
        let half = Scalar::ratio(1, 2);
        BoxTable::from_fn(2, |x, a| {
            if parity(a) == pair_parity(x) ^ 1 {
                half.clone()
            } else {
                Scalar::zero()
            }
        })
        .expect("anti-PR box")
    }

    pub fn svetlichny() -> Self {
        BoxTable::gsb(3).expect("Svetlichny box")
    }

    /// `ξ·GSB_n + (1−ξ)·𝟙` for `ξ ∈ [−1, 1]`.
    pub fn isotropic(parties: usize, xi: &Scalar) -> Result<Self> {
        if *xi < Scalar::from_integer(-1) || *xi > Scalar::one() {
            return Err(Error::XiOutOfRange(Box::new(xi.clone())));
        }
        let extremal = BoxTable::gsb(parties)?;
        let noise = BoxTable::uniform(parties)?;
        BoxTable::mix(&[(xi.clone(), extremal), (Scalar::one() - xi, noise)])
    }

    /// Failure branch of a coupler on extremal inputs: `(3·𝟙 − GSB_n)/2`.
    pub fn failure(parties: usize) -> Result<Self> {
        BoxTable::mix(&[
            (Scalar::ratio(3, 2), BoxTable::uniform(parties)?),
            (Scalar::ratio(-1, 2), BoxTable::gsb(parties)?),
        ])
    }

    /// Local deterministic box: party `i` outputs `response(i, xᵢ)`.
    pub fn deterministic(parties: usize, response: impl Fn(usize, u32) -> u32) -> Result<Self> {
        BoxTable::from_fn(parties, |x, a| {
            let hit = (0..parties).all(|i| bit(a, i) == response(i, bit(x, i)) & 1);
            if hit {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn construct(kind: BoxKind, parties: usize, xi: Option<&Scalar>) -> Result<Self> {
        if parties < 2 {
            return Err(Error::InvalidBox(format!(
                "{kind} needs n >= 2, got {parties}"
            )));
        }
        match (kind, xi) {
            (BoxKind::Isotropic, None) => {
                return Err(Error::InvalidBox("isotropic requires xi".into()))
            }
            (BoxKind::Isotropic, Some(_)) => {}
            (_, Some(_)) => return Err(Error::InvalidBox(format!("{kind} does not take xi"))),
            _ => {}
        }
        let need = |expected: usize| {
            if parties == expected {
                Ok(())
            } else {
                Err(Error::InvalidBox(format!(
                    "{kind} is a {expected}-party box, n = {parties} requested"
                )))
            }
        };
        match kind {
            BoxKind::Pr => need(2).map(|_| BoxTable::pr()),
            BoxKind::AntiPr => need(2).map(|_| BoxTable::anti_pr()),
            BoxKind::Sb => need(3).map(|_| BoxTable::svetlichny()),
            BoxKind::Mixed => BoxTable::uniform(parties),
            BoxKind::Gsb => BoxTable::gsb(parties),
            BoxKind::Failure => BoxTable::failure(parties),
            BoxKind::Isotropic => BoxTable::isotropic(parties, xi.expect("checked above")),
        }
    }

    // Structural operations ------------------------------------------------

    /// Independent product; `self`'s parties take the low bit positions.
    pub fn tensor(&self, other: &BoxTable) -> Result<BoxTable> {
        let (na, nb) = (self.parties, other.parties);
        check_cap(na + nb)?;
        let n = na + nb;
        // Tables carry few distinct values, so each product is computed once.
        let (left, left_ids) = distinct_values(&self.probs);
        let (right, right_ids) = distinct_values(&other.probs);
        let products: Vec<Scalar> = left
            .iter()
            .flat_map(|l| right.iter().map(move |r| l * r))
            .collect();
        let mut probs = vec![Scalar::zero(); 1 << (2 * n)];
        for (xa, aa, pa) in self.entries() {
            if pa.is_zero() {
                continue;
            }
            let row = left_ids[self.index(xa, aa)] * right.len();
            for (xb, ab, pb) in other.entries() {
                if pb.is_zero() {
                    continue;
                }
                let x = xa | (xb << na);
                let a = aa | (ab << na);
                probs[((x as usize) << n) | a as usize] =
                    products[row + right_ids[other.index(xb, ab)]].clone();
            }
        }
        Ok(BoxTable {
            parties: n,
            probs,
            quasi: self.quasi || other.quasi,
        })
    }

    /// Marginal over `keep` (returned in ascending party order). The result
    /// must not depend on the discarded parties' inputs; a dependence is
    /// reported as signaling by the offending party.
    pub fn marginalize(&self, keep: &[usize], discard: Discard<'_>) -> Result<BoxTable> {
        let n = self.parties;
        let kept: BTreeSet<usize> = keep.iter().copied().collect();
        if kept.len() != keep.len() {
            return Err(Error::InvalidParty(format!(
                "duplicate parties in {keep:?}"
            )));
        }
        if kept.is_empty() {
            return Err(Error::InvalidParty(
                "marginal must keep at least one party".into(),
            ));
        }
        if let Some(&p) = kept.iter().find(|&&p| p >= n) {
            return Err(Error::InvalidParty(format!("party {p} of a {n}-party box")));
        }
        let kept: Vec<usize> = kept.into_iter().collect();
        let dropped: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
        let k = kept.len();
        let d = dropped.len();

        // marginals[u] for each assignment u of the dropped inputs.
        let marginals: Vec<Vec<Scalar>> = (0..1u32 << d)
            .map(|u| {
                let dropped_in = scatter(u, &dropped);
                let mut m = vec![Scalar::zero(); 1 << (2 * k)];
                for xk in 0..1u32 << k {
                    let x = scatter(xk, &kept) | dropped_in;
                    for a in 0..self.words() {
                        let p = self.get(x, a);
                        if !p.is_zero() {
                            let ak = gather(a, &kept);
                            m[((xk as usize) << k) | ak as usize] += p;
                        }
                    }
                }
                m
            })
            .collect();

        for u in 0..1u32 << d {
            for (j, &party) in dropped.iter().enumerate() {
                if u & (1 << j) == 0 && marginals[u as usize] != marginals[(u | 1 << j) as usize] {
                    return Err(Error::Signaling { party: party + 1 });
                }
            }
        }

        let chosen = match discard {
            Discard::Average => 0,
            Discard::Fixed(fixed) => {
                let mut u = 0u32;
                for (j, &party) in dropped.iter().enumerate() {
                    let bitval = fixed
                        .iter()
                        .find(|(p, _)| *p == party)
                        .map(|(_, b)| *b)
                        .ok_or_else(|| {
                            Error::InvalidParty(format!(
                                "no input fixed for discarded party {party}"
                            ))
                        })?;
                    u |= (bitval & 1) << j;
                }
                u as usize
            }
        };
        let probs = marginals
            .into_iter()
            .nth(chosen)
            .expect("assignment in range");
        Ok(BoxTable {
            parties: k,
            probs,
            quasi: self.quasi,
        })
    }

    /// Affine combination of boxes; the result must be a valid box.
    pub fn mix(terms: &[(Scalar, BoxTable)]) -> Result<BoxTable> {
        let total: Scalar = terms.iter().map(|(w, _)| w).sum();
        if !total.is_one() {
            return Err(Error::InvalidBox(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        BoxTable::mix_quasi(terms)?.into_checked()
    }

    /// Linear combination with no validity requirement; result is quasi.
    pub fn mix_quasi(terms: &[(Scalar, BoxTable)]) -> Result<BoxTable> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidBox("empty mixture".into()))?;
        let n = first.1.parties;
        let mut probs = vec![Scalar::zero(); 1 << (2 * n)];
        for (w, t) in terms {
            if t.parties != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: t.parties,
                });
            }
            if w.is_zero() {
                continue;
            }
            for (acc, p) in probs.iter_mut().zip(&t.probs) {
                if !p.is_zero() {
                    *acc += w * p;
                }
            }
        }
        BoxTable::quasi(n, probs)
    }

    /// Every entry multiplied by `factor`; result is quasi.
    pub fn scaled(&self, factor: &Scalar) -> BoxTable {
        BoxTable {
            parties: self.parties,
            probs: self.probs.iter().map(|p| p * factor).collect(),
            quasi: true,
        }
    }

    /// Wiring: parties `i` and `j` receive a common input and report the XOR
    /// of their outputs. The merged party sits at `min(i, j)`.
    pub fn merge_parties(&self, i: usize, j: usize) -> Result<BoxTable> {
        let n = self.parties;
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidParty(format!(
                "cannot merge parties {i} and {j} of a {n}-party box"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidParty("merging needs two parties".into()));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let m = n - 1;
        let mut probs = vec![Scalar::zero(); 1 << (2 * m)];
        for xm in 0..1u32 << m {
            let x = insert_bit(xm, hi, bit(xm, lo));
            for a in 0..self.words() {
                let p = self.get(x, a);
                if p.is_zero() {
                    continue;
                }
                let merged = bit(a, lo) ^ bit(a, hi);
                let am = remove_bit(a, hi) & !(1 << lo) | merged << lo;
                probs[((xm as usize) << m) | am as usize] += p;
            }
        }
        let out = BoxTable {
            parties: m,
            probs,
            quasi: self.quasi,
        };
        if self.quasi {
            Ok(out)
        } else {
            out.into_checked()
        }
    }

    /// Reorders parties: new party `k` is old party `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<BoxTable> {
        let n = self.parties;
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidParty(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        let mut probs = vec![Scalar::zero(); self.probs.len()];
        for (x, a, p) in self.entries() {
            let nx = gather(x, order);
            let na = gather(a, order);
            probs[((nx as usize) << n) | na as usize] = p.clone();
        }
        Ok(BoxTable {
            parties: n,
            probs,
            quasi: self.quasi,
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.parties;
        let words = self.words();
        let mut problems = Vec::new();

        let negative = self.entries().find(|(_, _, p)| p.is_negative());
        if let Some((x, a, p)) = negative {
            problems.push(format!(
                "negative entry P({}|{}) = {p}",
                word_string(a, n),
                word_string(x, n)
            ));
        }

        let one = Scalar::one();
        let bad_row = (0..words).find(|&x| self.row_mass(x) != one);
        if let Some(x) = bad_row {
            problems.push(format!(
                "outputs for input {} sum to {}",
                word_string(x, n),
                self.row_mass(x)
            ));
        }

        let nonsignaling: Vec<bool> = (0..n)
            .map(|party| {
                let ok = self.party_nonsignaling(party);
                if !ok {
                    problems.push(format!("party {} signals to the others", party + 1));
                }
                ok
            })
            .collect();

        ValidationReport {
            normalized: bad_row.is_none(),
            nonnegative: negative.is_none(),
            nonsignaling,
            problems,
        }
    }

    /// `Σ_{aᵢ} P(a|x)` does not depend on `xᵢ`.
    fn party_nonsignaling(&self, party: usize) -> bool {
        let mask = 1u32 << party;
        (0..self.words()).filter(|x| x & mask == 0).all(|x| {
            (0..self.words()).filter(|a| a & mask == 0).all(|a| {
                if self.get(x, a) == self.get(x | mask, a)
                    && self.get(x, a | mask) == self.get(x | mask, a | mask)
                {
                    return true;
                }
                let lhs = self.get(x, a) + self.get(x, a | mask);
                let rhs = self.get(x | mask, a) + self.get(x | mask, a | mask);
                lhs == rhs
            })
        })
    }
}

impl fmt::Debug for BoxTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoxTable(n={}, quasi={}) {{", self.parties, self.quasi)?;
        for (x, a, p) in self.entries() {
            if !p.is_zero() {
                writeln!(
                    f,
                    "  P({}|{}) = {p}",
                    word_string(a, self.parties),
                    word_string(x, self.parties)
                )?;
            }
        }
        write!(f, "}}")
    }
}

fn build(parties: usize, f: impl Fn(u32, u32) -> Scalar) -> Result<Vec<Scalar>> {
    if parties == 0 {
        return Err(Error::InvalidBox("a box needs at least one party".into()));
    }
    check_cap(parties)?;
    let words = 1u32 << parties;
    Ok((0..words)
        .flat_map(|x| (0..words).map(move |a| (x, a)))
        .map(|(x, a)| f(x, a))
        .collect())
}

/// Bits of `word` taken from `positions`, packed low to high.
#[inline]
fn distinct_values(values: &[Scalar]) -> (Vec<Scalar>, Vec<usize>) {
    let mut seen: HashMap<&Scalar, usize> = HashMap::new();
    let mut uniques = Vec::new();
    let ids = values
        .iter()
        .map(|v| {
            *seen.entry(v).or_insert_with(|| {
                uniques.push(v.clone());
                uniques.len() - 1
            })
        })
        .collect();
    (uniques, ids)
}

pub fn gather(word: u32, positions: &[usize]) -> u32 {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | bit(word, p) << k)
}

/// Inverse of [`gather`]: bit `k` of `packed` goes to `positions[k]`.
#[inline]
pub fn scatter(packed: u32, positions: &[usize]) -> u32 {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | bit(packed, k) << p)
}

fn insert_bit(word: u32, pos: usize, value: u32) -> u32 {
    let low = word & ((1 << pos) - 1);
    let high = word >> pos;
    low | value << pos | high << (pos + 1)
}

fn remove_bit(word: u32, pos: usize) -> u32 {
    let low = word & ((1 << pos) - 1);
    let high = word >> (pos + 1);
    low | high << pos
}

/// Word as text, party 1 first.
pub fn word_string(word: u32, parties: usize) -> String {
    (0..parties)
        .map(|i| if bit(word, i) == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_word(text: &str, parties: usize) -> Result<u32> {
    if text.len() != parties {
        return Err(Error::Parse(format!(
            "word {text:?} has length {}, expected {parties}",
            text.len()
        )));
    }
    text.chars()
        .enumerate()
        .try_fold(0u32, |acc, (i, c)| match c {
            '0' => Ok(acc),
            '1' => Ok(acc | 1 << i),
            _ => Err(Error::Parse(format!("word {text:?} is not a bit string"))),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn gsb3_matches_svetlichny_condition() {
        let sb = BoxTable::gsb(3).unwrap();
        for (x, a, p) in sb.entries() {
            let (a1, b, c) = (bit(a, 0), bit(a, 1), bit(a, 2));
            let (xx, y, z) = (bit(x, 0), bit(x, 1), bit(x, 2));
            let hit = a1 ^ b ^ c == (xx & y) ^ (xx & z) ^ (y & z);
            assert_eq!(*p, if hit { s(1, 4) } else { Scalar::zero() });
        }
    }

    #[test]
    fn mixed_two_party_is_quarter_everywhere() {
        let m = BoxTable::construct(BoxKind::Mixed, 2, None).unwrap();
        assert!(m.probs().iter().all(|p| *p == s(1, 4)));
        assert_eq!(m.probs().len(), 16);
    }

    #[test]
    fn isotropic_at_one_is_pr() {
        let b = BoxTable::construct(BoxKind::Isotropic, 2, Some(&Scalar::one())).unwrap();
        assert_eq!(b, BoxTable::pr());
    }

    #[test]
    fn failure_box_golden_table() {
        // (3·𝟙 − PR)/2: 3/8 − 1/4 = 1/8 where a⊕b = xy, else 3/8.
        let f = BoxTable::construct(BoxKind::Failure, 2, None).unwrap();
        #[rustfmt::skip]
        let golden = [
            // x=0,y=0 : a b = 00, 10, 01, 11
            s(1, 8), s(3, 8), s(3, 8), s(1, 8),
            // x=1,y=0
            s(1, 8), s(3, 8), s(3, 8), s(1, 8),
            // x=0,y=1
            s(1, 8), s(3, 8), s(3, 8), s(1, 8),
            // x=1,y=1
            s(3, 8), s(1, 8), s(1, 8), s(3, 8),
        ];
        assert_eq!(f.probs(), &golden);
    }

    #[test]
    fn anti_pr_condition() {
        let b = BoxTable::anti_pr();
        for (x, a, p) in b.entries() {
            let hit = (bit(a, 0) ^ bit(a, 1)) == (bit(x, 0) & bit(x, 1)) ^ 1;
            assert_eq!(*p, if hit { s(1, 2) } else { Scalar::zero() });
        }
        let iso = BoxTable::isotropic(2, &Scalar::from_integer(-1)).unwrap();
        assert_eq!(iso, b);
    }

    #[test]
    fn constructor_argument_errors() {
        assert!(BoxTable::construct(BoxKind::Pr, 3, None).is_err());
        assert!(BoxTable::construct(BoxKind::Sb, 2, None).is_err());
        assert!(BoxTable::construct(BoxKind::Isotropic, 2, None).is_err());
        assert!(BoxTable::construct(BoxKind::Gsb, 3, Some(&s(1, 2))).is_err());
        assert!(BoxTable::construct(BoxKind::Gsb, 1, None).is_err());
        assert!(matches!(
            BoxTable::construct(BoxKind::Isotropic, 2, Some(&s(3, 2))),
            Err(Error::XiOutOfRange(_))
        ));
        assert!(matches!(
            BoxTable::construct(BoxKind::Mixed, 11, None),
            Err(Error::PartyCap {
                requested: 11,
                cap: 10
            })
        ));
    }

    #[test]
    fn every_named_constructor_validates() {
        for n in 2..=5 {
            for kind in [BoxKind::Mixed, BoxKind::Gsb, BoxKind::Failure] {
                let b = BoxTable::construct(kind, n, None).unwrap();
                assert!(b.validate().is_valid(), "{kind} n={n}");
                assert!(!b.is_quasi());
            }
            for xi in [s(-1, 1), s(-1, 3), Scalar::inv_sqrt2(), Scalar::one()] {
                let b = BoxTable::isotropic(n, &xi).unwrap();
                assert!(b.validate().is_valid());
            }
        }
    }

    #[test]
    fn gsb_low_orders_are_pr_and_sb() {
        assert_eq!(
            BoxTable::construct(BoxKind::Gsb, 2, None).unwrap(),
            BoxTable::pr()
        );
        assert_eq!(
            BoxTable::construct(BoxKind::Gsb, 3, None).unwrap(),
            BoxTable::svetlichny()
        );
    }

    #[test]
    fn tensor_of_prs_entry() {
        let t = BoxTable::pr().tensor(&BoxTable::pr()).unwrap();
        assert_eq!(t.parties(), 4);
        assert_eq!(*t.get(0, 0), s(1, 4));
        let u = BoxTable::uniform(2).unwrap();
        assert_eq!(u.tensor(&u).unwrap(), BoxTable::uniform(4).unwrap());
    }

    #[test]
    fn tensor_respects_cap() {
        let a = BoxTable::uniform(6).unwrap();
        let b = BoxTable::uniform(5).unwrap();
        assert!(matches!(a.tensor(&b), Err(Error::PartyCap { .. })));
    }

    #[test]
    fn marginal_of_pr_is_uniform_bit() {
        let m = BoxTable::pr().marginalize(&[0], Discard::Average).unwrap();
        assert_eq!(m.parties(), 1);
        assert!(m.probs().iter().all(|p| *p == s(1, 2)));
        let fixed = BoxTable::pr()
            .marginalize(&[1], Discard::Fixed(&[(0, 1)]))
            .unwrap();
        assert_eq!(fixed, BoxTable::uniform(1).unwrap());
    }

    #[test]
    fn gsb_single_party_marginals_are_uniform() {
        for n in 2..=5 {
            let g = BoxTable::gsb(n).unwrap();
            for p in 0..n {
                assert_eq!(
                    g.marginalize(&[p], Discard::Average).unwrap(),
                    BoxTable::uniform(1).unwrap()
                );
            }
        }
    }

    #[test]
    fn bob_marginal_of_two_prs_is_mixed() {
        // parties (a, b1, b2, c)
        let joint = BoxTable::pr().tensor(&BoxTable::pr()).unwrap();
        let bob = joint.marginalize(&[1, 2], Discard::Average).unwrap();
        assert_eq!(bob, BoxTable::uniform(2).unwrap());
    }

    #[test]
    fn marginal_detects_signaling() {
        // Party 2 copies party 1's input: signaling from party 1.
        let t = BoxTable::quasi_from_fn(2, |x, a| {
            if bit(a, 1) == bit(x, 0) && bit(a, 0) == 0 {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        })
        .unwrap();
        assert!(!t.validate().is_valid());
        assert!(matches!(
            t.marginalize(&[1], Discard::Average),
            Err(Error::Signaling { party: 1 })
        ));
    }

    #[test]
    fn marginal_requires_all_fixed_inputs() {
        let g = BoxTable::gsb(3).unwrap();
        assert!(g.marginalize(&[0], Discard::Fixed(&[(1, 0)])).is_err());
        assert!(g.marginalize(&[0, 0], Discard::Average).is_err());
        assert!(g.marginalize(&[3], Discard::Average).is_err());
    }

    #[test]
    fn quasi_mixture_branch_boxes() {
        let sb = BoxTable::svetlichny();
        let u = BoxTable::uniform(3).unwrap();
        let b = BoxTable::mix(&[(s(3, 2), u.clone()), (s(-1, 2), sb.clone())]).unwrap();
        // 3/2·1/8 − 1/2·{1/4, 0} = {1/16, 3/16}
        for (_, _, p) in b.entries() {
            assert!(*p == s(1, 16) || *p == s(3, 16));
        }
        let c = BoxTable::mix(&[(s(9, 8), u), (s(-1, 8), sb)]).unwrap();
        // 9/8·1/8 − 1/8·{1/4, 0} = {7/64, 9/64}
        for (x, a, p) in c.entries() {
            let hit = parity(a) == pair_parity(x);
            assert_eq!(*p, if hit { s(7, 64) } else { s(9, 64) });
        }
        assert!(c.validate().is_valid());
    }

    #[test]
    fn mixture_rejects_bad_inputs() {
        let u = BoxTable::uniform(2).unwrap();
        let pr = BoxTable::pr();
        assert!(BoxTable::mix(&[(s(1, 2), u.clone())]).is_err());
        assert!(BoxTable::mix(&[(s(2, 1), pr.clone()), (s(-1, 1), u.clone())]).is_err());
        assert!(BoxTable::mix(&[(s(1, 2), pr), (s(1, 2), BoxTable::uniform(3).unwrap())]).is_err());
        let half = BoxTable::mix(&[(s(1, 2), BoxTable::pr()), (s(1, 2), u)]).unwrap();
        assert_eq!(half, BoxTable::isotropic(2, &s(1, 2)).unwrap());
        let g4 = BoxTable::gsb(4).unwrap();
        assert_eq!(BoxTable::mix(&[(Scalar::one(), g4.clone())]).unwrap(), g4);
    }

    #[test]
    fn merging_uniform_parties_gives_uniform_bit() {
        let m = BoxTable::uniform(2).unwrap().merge_parties(0, 1).unwrap();
        assert_eq!(m, BoxTable::uniform(1).unwrap());
    }

    #[test]
    fn merging_preserves_mass_and_validity() {
        let t = BoxTable::pr().tensor(&BoxTable::pr()).unwrap();
        let m = t.merge_parties(0, 2).unwrap();
        assert_eq!(m.parties(), 3);
        assert!(m.validate().is_valid());
        assert!(t.merge_parties(1, 1).is_err());
        assert!(t.merge_parties(0, 4).is_err());
    }

    #[test]
    fn permutation_roundtrip() {
        let g = BoxTable::failure(3)
            .unwrap()
            .tensor(&BoxTable::pr())
            .unwrap();
        let order = [3, 0, 4, 1, 2];
        let p = g.permute(&order).unwrap();
        let mut inverse = [0; 5];
        for (k, &o) in order.iter().enumerate() {
            inverse[o] = k;
        }
        assert_eq!(p.permute(&inverse).unwrap(), g);
        assert!(g.permute(&[0, 0, 1, 2, 3]).is_err());
    }

    #[test]
    fn perturbed_table_fails_normalization() {
        let mut probs = BoxTable::gsb(5).unwrap().probs().to_vec();
        assert!(BoxTable::new(5, probs.clone()).is_ok());
        probs[7] += s(1, 100);
        let t = BoxTable::quasi(5, probs).unwrap();
        let report = t.validate();
        assert!(!report.normalized);
        assert!(!report.is_valid());
    }

    #[test]
    fn word_text_is_party_one_first() {
        assert_eq!(word_string(0b001, 3), "100");
        assert_eq!(parse_word("100", 3).unwrap(), 0b001);
        assert!(parse_word("10", 3).is_err());
        assert!(parse_word("1x0", 3).is_err());
    }

    #[test]
    fn gather_scatter_inverse() {
        let pos = [4, 1, 3];
        for w in 0..8 {
            assert_eq!(gather(scatter(w, &pos), &pos), w);
        }
    }
}
