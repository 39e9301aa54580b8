//! Declarative swapping experiments.
//!
//! A [`ScenarioSpec`] names boxes with labelled parties, couplers that
//! consume labelled parties, and wirings that merge two surviving parties.
//! [`run_scenario`] tracks every coupler outcome as a separate branch. A
//! coupler only tensors the components it touches, so independent pairs are
//! swapped before anything else is combined and tables stay small.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::coupler::CouplerEffect;
use crate::error::{Error, Result};
use crate::functional::{bounds, ch_evaluate, classify, BoundTriple};
use crate::scalar::Scalar;
use crate::table::{word_string, BoxKind, BoxTable, Discard, MAX_PARTIES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalName {
    Gsi,
    Ch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub name: String,
    pub kind: BoxKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Scalar>,
    /// One label per party, party 1 first.
    pub parties: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSpec {
    pub arity: usize,
    /// Labels fed to coupler slots 1..N, in order.
    pub consumed: Vec<String>,
    /// Outcome to condition on, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiringSpec {
    /// Common input, XOR of outputs.
    pub merge: [String; 2],
    pub into: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub couplers: Vec<CouplerSpec>,
    #[serde(default)]
    pub wirings: Vec<WiringSpec>,
    /// Per-coupler outcome condition, an alternative to the per-coupler field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Vec<Option<u8>>>,
    #[serde(default)]
    pub reports: Vec<FunctionalName>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub functional: FunctionalName,
    pub value: Scalar,
    /// GSI only.
    pub bounds: Option<BoundTriple>,
    pub exceeds_local: Option<bool>,
    pub exceeds_quantum: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchRecord {
    pub outcomes: Vec<u8>,
    pub probability: Scalar,
    /// `None` for a zero-probability branch.
    pub table: Option<BoxTable>,
    pub evaluations: Vec<Evaluation>,
    /// Allowed-region flag of each coupler along the path (`None` once the
    /// path has zero probability).
    pub allowed: Vec<Option<bool>>,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionedResult {
    pub condition: Vec<Option<u8>>,
    pub probability: Scalar,
    pub table: Option<BoxTable>,
    pub evaluations: Vec<Evaluation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchGroup {
    pub label: String,
    pub branches: Vec<Vec<u8>>,
    pub probability: Scalar,
    /// Shared box of the group, when all its branches agree.
    pub table: Option<BoxTable>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl CrossCheck {
    pub fn scalar(name: impl Into<String>, expected: &Scalar, computed: &Scalar) -> Self {
        CrossCheck {
            name: name.into(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            pass: expected == computed,
        }
    }

    pub fn flag(name: impl Into<String>, expected: bool, computed: bool) -> Self {
        CrossCheck {
            name: name.into(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            pass: expected == computed,
        }
    }

    /// Entrywise table equality; `computed` reports the first mismatch.
    pub fn table(
        name: impl Into<String>,
        expected_label: &str,
        expected: &BoxTable,
        computed: Option<&BoxTable>,
    ) -> Self {
        let computed_text = match computed {
            None => "no box (zero-probability branch)".to_string(),
            Some(t) => describe_mismatch(expected, t).unwrap_or_else(|| "equal".to_string()),
        };
        CrossCheck {
            name: name.into(),
            expected: expected_label.to_string(),
            pass: computed_text == "equal",
            computed: computed_text,
        }
    }
}

fn describe_mismatch(expected: &BoxTable, computed: &BoxTable) -> Option<String> {
    if expected.parties() != computed.parties() {
        return Some(format!(
            "{}-party box, expected {} parties",
            computed.parties(),
            expected.parties()
        ));
    }
    let n = expected.parties();
    expected
        .entries()
        .zip(computed.probs())
        .find(|((_, _, e), c)| e != c)
        .map(|((x, a, e), c)| {
            format!(
                "differs at P({}|{}): {c} instead of {e}",
                word_string(a, n),
                word_string(x, n)
            )
        })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioReport {
    pub name: String,
    /// Labels of the final box's parties, party 1 first.
    pub parties: Vec<String>,
    pub branches: Vec<BranchRecord>,
    pub conditioned: Option<ConditionedResult>,
    pub groups: Vec<BranchGroup>,
    pub checks: Vec<CrossCheck>,
}

impl ScenarioReport {
    pub fn branch(&self, outcomes: &[u8]) -> Option<&BranchRecord> {
        self.branches.iter().find(|b| b.outcomes == outcomes)
    }

    pub fn total_probability(&self) -> Scalar {
        self.branches.iter().map(|b| &b.probability).sum()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CrossCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

// Execution -----------------------------------------------------------------

#[derive(Clone)]
struct Component {
    labels: Vec<String>,
    table: BoxTable,
}

struct State {
    outcomes: Vec<u8>,
    probability: Scalar,
    components: Option<Vec<Component>>,
    allowed: Vec<Option<bool>>,
}

struct Plan {
    conditions: Vec<Option<u8>>,
    rank: BTreeMap<String, usize>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Scenario(msg.into())
}

fn plan(spec: &ScenarioSpec) -> Result<Plan> {
    if spec.boxes.is_empty() {
        return Err(invalid("no boxes declared"));
    }
    let mut rank = BTreeMap::new();
    let mut total = 0usize;
    for b in &spec.boxes {
        if b.parties.len() != b.n {
            return Err(invalid(format!(
                "box {:?} declares n = {} but labels {} parties",
                b.name,
                b.n,
                b.parties.len()
            )));
        }
        for label in &b.parties {
            if label.is_empty() {
                return Err(invalid(format!(
                    "box {:?} has an empty party label",
                    b.name
                )));
            }
            let next = rank.len();
            if rank.insert(label.clone(), next).is_some() {
                return Err(invalid(format!("party label {label:?} is used twice")));
            }
        }
        total += b.n;
    }

    let mut live: BTreeSet<String> = rank.keys().cloned().collect();
    let mut consumed_total = 0;
    for (k, c) in spec.couplers.iter().enumerate() {
        if c.consumed.len() != c.arity {
            return Err(invalid(format!(
                "coupler {k} has arity {} but consumes {} parties",
                c.arity,
                c.consumed.len()
            )));
        }
        if c.arity < 2 {
            return Err(invalid(format!("coupler {k} needs arity >= 2")));
        }
        for label in &c.consumed {
            if !rank.contains_key(label) {
                return Err(invalid(format!(
                    "coupler {k} consumes unknown party {label:?}"
                )));
            }
            if !live.remove(label) {
                return Err(invalid(format!("party {label:?} is consumed twice")));
            }
        }
        if matches!(c.condition, Some(b) if b > 1) {
            return Err(invalid(format!(
                "coupler {k} conditions on a non-bit outcome"
            )));
        }
        consumed_total += c.arity;
    }

    let mut conditions: Vec<Option<u8>> = spec.couplers.iter().map(|c| c.condition).collect();
    if let Some(top) = &spec.condition {
        if top.len() != spec.couplers.len() {
            return Err(invalid(format!(
                "condition lists {} outcomes for {} couplers",
                top.len(),
                spec.couplers.len()
            )));
        }
        for (k, (slot, &bit)) in conditions.iter_mut().zip(top).enumerate() {
            match (*slot, bit) {
                (_, Some(b)) if b > 1 => {
                    return Err(invalid(format!("condition for coupler {k} is not a bit")))
                }
                (Some(a), Some(b)) if a != b => {
                    return Err(invalid(format!("conflicting conditions for coupler {k}")))
                }
                (None, Some(b)) => *slot = Some(b),
                _ => {}
            }
        }
    }

    for (k, w) in spec.wirings.iter().enumerate() {
        let [l1, l2] = &w.merge;
        if l1 == l2 {
            return Err(invalid(format!("wiring {k} merges {l1:?} with itself")));
        }
        for label in [l1, l2] {
            if !live.contains(label) {
                return Err(invalid(format!(
                    "wiring {k} uses {label:?}, which is unknown, consumed, or already merged"
                )));
            }
        }
        live.remove(l1);
        live.remove(l2);
        if w.into.is_empty()
            || live.contains(&w.into)
            || (rank.contains_key(&w.into) && w.into != *l1 && w.into != *l2)
        {
            return Err(invalid(format!(
                "wiring {k} target label {:?} is already taken",
                w.into
            )));
        }
        let r = rank[l1].min(rank[l2]);
        rank.insert(w.into.clone(), r);
        live.insert(w.into.clone());
    }

    let final_parties = total - consumed_total - spec.wirings.len();
    if final_parties == 0 {
        return Err(invalid("no parties survive the couplers"));
    }
    if spec.reports.contains(&FunctionalName::Ch) && final_parties != 2 {
        return Err(invalid(format!(
            "ch is a two-party functional but {final_parties} parties survive"
        )));
    }
    Ok(Plan { conditions, rank })
}

fn merge_components(parts: Vec<Component>) -> Result<Option<Component>> {
    let mut iter = parts.into_iter();
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    iter.try_fold(Some(first), |acc, c| {
        let acc = acc.expect("folded component");
        let mut labels = acc.labels;
        labels.extend(c.labels);
        Ok(Some(Component {
            table: acc.table.tensor(&c.table)?,
            labels,
        }))
    })
}

type Children = [(Scalar, Option<Vec<Component>>); 2];

fn couple(
    chi: &CouplerEffect,
    comps: Vec<Component>,
    consumed: &[String],
) -> Result<(bool, Children)> {
    let (picked, rest): (Vec<Component>, Vec<Component>) = comps
        .into_iter()
        .partition(|c| c.labels.iter().any(|l| consumed.contains(l)));
    // Marginals are taken per component, before the product is materialized.
    let mut marginal: Option<Component> = None;
    for c in &picked {
        let keep: Vec<usize> = (0..c.labels.len())
            .filter(|&k| consumed.contains(&c.labels[k]))
            .collect();
        let part = Component {
            labels: keep.iter().map(|&k| c.labels[k].clone()).collect(),
            table: c.table.marginalize(&keep, Discard::Average)?,
        };
        marginal = merge_components(marginal.into_iter().chain([part]).collect())?;
    }
    let marginal = marginal.expect("consumed labels are live");
    let slot_order: Vec<usize> = consumed
        .iter()
        .map(|l| {
            marginal
                .labels
                .iter()
                .position(|m| m == l)
                .expect("label in marginal")
        })
        .collect();
    let allowed = chi.is_allowed(&marginal.table.permute(&slot_order)?)?;

    let merged = merge_components(picked)?.expect("consumed labels are live");
    let positions: Vec<usize> = consumed
        .iter()
        .map(|l| {
            merged
                .labels
                .iter()
                .position(|m| m == l)
                .expect("label in component")
        })
        .collect();

    if positions.len() == merged.labels.len() {
        // The whole component goes into the coupler; no branch box survives from it.
        let bob = merged.table.permute(&positions)?;
        let p0 = chi.success_probability(&bob)?;
        let p1 = Scalar::one() - &p0;
        if p0.is_negative() || p1.is_negative() {
            return Err(Error::CouplerInvalid {
                branch: if p0.is_negative() { 0 } else { 1 },
                reason: format!("success probability {p0} outside [0, 1]"),
                mass: Some(Box::new(p0)),
            });
        }
        let keep = |p: &Scalar| {
            if p.is_zero() {
                None
            } else {
                Some(rest.clone())
            }
        };
        return Ok((allowed, [(p0.clone(), keep(&p0)), (p1.clone(), keep(&p1))]));
    }

    let survivors: Vec<String> = merged
        .labels
        .iter()
        .filter(|l| !consumed.contains(l))
        .cloned()
        .collect();
    let branches = chi.apply(&merged.table, &positions)?;
    let mut children = branches.into_iter().map(|b| {
        let comps = b.table.map(|t| {
            let mut comps = rest.clone();
            comps.push(Component {
                labels: survivors.clone(),
                table: t,
            });
            comps
        });
        (b.probability, comps)
    });
    let c0 = children.next().expect("two branches");
    let c1 = children.next().expect("two branches");
    Ok((allowed, [c0, c1]))
}

fn evaluate_all(table: &BoxTable, reports: &[FunctionalName]) -> Result<Vec<Evaluation>> {
    reports
        .iter()
        .map(|&f| match f {
            FunctionalName::Gsi => {
                let c = classify(table);
                Ok(Evaluation {
                    functional: f,
                    value: c.gsi_value,
                    bounds: Some(bounds(table.parties())),
                    exceeds_local: Some(c.exceeds_local),
                    exceeds_quantum: Some(c.exceeds_quantum),
                })
            }
            FunctionalName::Ch => Ok(Evaluation {
                functional: f,
                value: ch_evaluate(table)?,
                bounds: None,
                exceeds_local: None,
                exceeds_quantum: None,
            }),
        })
        .collect()
}

fn finalize(
    comps: Vec<Component>,
    spec: &ScenarioSpec,
    rank: &BTreeMap<String, usize>,
) -> Result<(Vec<String>, BoxTable)> {
    let Component {
        mut labels,
        mut table,
    } = merge_components(comps)?.ok_or_else(|| invalid("no parties survive the couplers"))?;
    for w in &spec.wirings {
        let find = |l: &String| {
            labels
                .iter()
                .position(|m| m == l)
                .expect("wired label survives")
        };
        let (i, j) = (find(&w.merge[0]), find(&w.merge[1]));
        table = table.merge_parties(i, j)?;
        let (lo, hi) = (i.min(j), i.max(j));
        labels[lo] = w.into.clone();
        labels.remove(hi);
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&k| rank[&labels[k]]);
    let table = table.permute(&order)?;
    let labels = order.iter().map(|&k| labels[k].clone()).collect();
    Ok((labels, table))
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    let Plan { conditions, rank } = plan(spec)?;

    let mut initial = Vec::with_capacity(spec.boxes.len());
    for b in &spec.boxes {
        initial.push(Component {
            labels: b.parties.clone(),
            table: BoxTable::construct(b.kind, b.n, b.xi.as_ref())?,
        });
    }

    let mut states = vec![State {
        outcomes: Vec::new(),
        probability: Scalar::one(),
        components: Some(initial),
        allowed: Vec::new(),
    }];

    for (k, c) in spec.couplers.iter().enumerate() {
        let chi = CouplerEffect::new(c.arity)?;
        let mut next = Vec::with_capacity(states.len() * 2);
        for state in states {
            let Some(comps) = state.components else {
                for b in 0..2u8 {
                    let mut outcomes = state.outcomes.clone();
                    outcomes.push(b);
                    let mut allowed = state.allowed.clone();
                    allowed.push(None);
                    next.push(State {
                        outcomes,
                        probability: Scalar::zero(),
                        components: None,
                        allowed,
                    });
                }
                continue;
            };
            let (allowed_here, children) =
                couple(&chi, comps, &c.consumed).map_err(|e| Error::BranchFailure {
                    coupler: k,
                    path: state.outcomes.clone(),
                    source: Box::new(e),
                })?;
            for (b, (p, comps)) in (0u8..).zip(children) {
                let mut outcomes = state.outcomes.clone();
                outcomes.push(b);
                let mut allowed = state.allowed.clone();
                allowed.push(Some(allowed_here));
                let probability = &state.probability * &p;
                let components = if probability.is_zero() { None } else { comps };
                next.push(State {
                    outcomes,
                    probability,
                    components,
                    allowed,
                });
            }
        }
        states = next;
    }

    let mut parties = Vec::new();
    let mut branches = Vec::with_capacity(states.len());
    for state in states {
        let selected = conditions
            .iter()
            .zip(&state.outcomes)
            .all(|(c, o)| c.is_none_or(|c| c == *o));
        let (table, evaluations) = match state.components {
            Some(comps) => {
                let (labels, table) = finalize(comps, spec, &rank)?;
                parties = labels;
                let evals = evaluate_all(&table, &spec.reports)?;
                (Some(table), evals)
            }
            None => (None, Vec::new()),
        };
        branches.push(BranchRecord {
            outcomes: state.outcomes,
            probability: state.probability,
            table,
            evaluations,
            allowed: state.allowed,
            selected,
        });
    }

    let conditioned = if conditions.iter().any(Option::is_some) {
        let chosen: Vec<&BranchRecord> = branches.iter().filter(|b| b.selected).collect();
        let probability: Scalar = chosen.iter().map(|b| &b.probability).sum();
        let table = if probability.is_zero() {
            None
        } else {
            let inv = probability.inv()?;
            let terms: Vec<(Scalar, BoxTable)> = chosen
                .iter()
                .filter_map(|b| b.table.as_ref().map(|t| (&b.probability * &inv, t.clone())))
                .collect();
            Some(BoxTable::mix(&terms)?)
        };
        let evaluations = match &table {
            Some(t) => evaluate_all(t, &spec.reports)?,
            None => Vec::new(),
        };
        Some(ConditionedResult {
            condition: conditions,
            probability,
            table,
            evaluations,
        })
    } else {
        None
    };

    let total: Scalar = branches.iter().map(|b| &b.probability).sum();
    let all_valid = branches
        .iter()
        .filter_map(|b| b.table.as_ref())
        .all(|t| t.validate().is_valid());
    let checks = vec![
        CrossCheck::scalar("branch masses sum to 1", &Scalar::one(), &total),
        CrossCheck::flag(
            "every final box is a valid nonsignaling box",
            true,
            all_valid,
        ),
    ];

    Ok(ScenarioReport {
        name: spec.name.clone(),
        parties,
        branches,
        conditioned,
        groups: Vec::new(),
        checks,
    })
}

// Named experiments -----------------------------------------------------------

fn check_xi_allowed(xi: &Scalar) -> Result<()> {
    if xi.is_negative() || *xi > Scalar::one() {
        Err(invalid(format!(
            "xi = {xi} lies outside the coupler-allowed range [0, 1]"
        )))
    } else {
        Ok(())
    }
}

fn isotropic_spec(name: String, n: usize, xi: &Scalar, parties: Vec<String>) -> BoxSpec {
    BoxSpec {
        name,
        kind: BoxKind::Isotropic,
        n,
        xi: Some(xi.clone()),
        parties,
    }
}

fn conditioned_box(report: &ScenarioReport) -> Option<&BoxTable> {
    report.conditioned.as_ref().and_then(|c| c.table.as_ref())
}

fn conditioned_probability(report: &ScenarioReport) -> Scalar {
    report
        .conditioned
        .as_ref()
        .map(|c| c.probability.clone())
        .unwrap_or_default()
}

/// χ₂ on an `m`-party and an `n`-party isotropic GSB; Bob holds the last
/// party of the first box and the first party of the second.
pub fn swap_two(m: usize, n: usize, xi1: &Scalar, xi2: &Scalar) -> Result<ScenarioReport> {
    if m < 2 || n < 2 {
        return Err(invalid("both boxes need at least 2 parties"));
    }
    if m + n > MAX_PARTIES {
        return Err(Error::PartyCap {
            requested: m + n,
            cap: MAX_PARTIES,
        });
    }
    check_xi_allowed(xi1)?;
    check_xi_allowed(xi2)?;
    let mut first: Vec<String> = (1..m).map(|k| format!("a{k}")).collect();
    first.push("b1".into());
    let mut second = vec!["b2".to_string()];
    second.extend((1..n).map(|k| format!("c{k}")));
    let spec = ScenarioSpec {
        name: format!("swap_two(m={m}, n={n}, xi1={xi1}, xi2={xi2})"),
        boxes: vec![
            isotropic_spec("group_a".into(), m, xi1, first),
            isotropic_spec("group_c".into(), n, xi2, second),
        ],
        couplers: vec![CouplerSpec {
            arity: 2,
            consumed: vec!["b1".into(), "b2".into()],
            condition: Some(0),
        }],
        wirings: Vec::new(),
        condition: None,
        reports: vec![FunctionalName::Gsi],
    };
    let mut report = run_scenario(&spec)?;

    let out = m + n - 2;
    let weight = xi1 * xi2;
    let expected = BoxTable::isotropic(out, &weight)?;
    let final_box = conditioned_box(&report).cloned();
    report.checks.push(CrossCheck::scalar(
        "p(b'=0) = 1/3",
        &Scalar::ratio(1, 3),
        &conditioned_probability(&report),
    ));
    report.checks.push(CrossCheck::table(
        format!("b'=0 box = isotropic GSB_{out} with weight xi1*xi2"),
        &format!("{weight}·GSB_{out} + ({})·𝟙", Scalar::one() - &weight),
        &expected,
        final_box.as_ref(),
    ));
    if let Some(t) = &final_box {
        let exceeds = classify(t).exceeds_local;
        report.checks.push(CrossCheck::flag(
            "final box exceeds the local bound iff xi1*xi2 > 1/2",
            weight > Scalar::ratio(1, 2),
            exceeds,
        ));
    }
    if xi1.is_one() && xi2.is_one() {
        let failure = report.branch(&[1]).and_then(|b| b.table.clone());
        report.checks.push(CrossCheck::table(
            "b'=1 box = (3·𝟙 − GSB)/2",
            &format!("(3·𝟙 − GSB_{out})/2"),
            &BoxTable::failure(out)?,
            failure.as_ref(),
        ));
    }
    Ok(report)
}

/// The six-PR-box hybrid: three χ₂ couplers, then local XOR wirings at
/// Alice, Charlie and Danny.
pub fn hybrid_spec() -> ScenarioSpec {
    let pr = |name: &str, user: &str, bob: &str| BoxSpec {
        name: name.into(),
        kind: BoxKind::Pr,
        n: 2,
        xi: None,
        parties: vec![user.into(), bob.into()],
    };
    let coupler = |b1: &str, b2: &str| CouplerSpec {
        arity: 2,
        consumed: vec![b1.into(), b2.into()],
        condition: None,
    };
    let wire = |u1: &str, u2: &str, into: &str| WiringSpec {
        merge: [u1.into(), u2.into()],
        into: into.into(),
    };
    ScenarioSpec {
        name: "hybrid_three".into(),
        boxes: vec![
            pr("pr1", "a1", "b1"),
            pr("pr2", "c2", "b2"),
            pr("pr3", "c1", "b3"),
            pr("pr4", "d2", "b4"),
            pr("pr5", "d1", "b5"),
            pr("pr6", "a2", "b6"),
        ],
        couplers: vec![
            coupler("b1", "b2"),
            coupler("b3", "b4"),
            coupler("b5", "b6"),
        ],
        wirings: vec![
            wire("a1", "a2", "a"),
            wire("c1", "c2", "c"),
            wire("d1", "d2", "d"),
        ],
        condition: None,
        reports: vec![FunctionalName::Gsi],
    }
}

pub fn hybrid_three() -> Result<ScenarioReport> {
    let mut report = run_scenario(&hybrid_spec())?;
    let sb = BoxTable::svetlichny();
    let u = BoxTable::uniform(3)?;
    let s = Scalar::ratio;
    let cases = [
        (3, "b'1=b'2=b'3=0", s(1, 27), s(0, 1), s(1, 1), "SB"),
        (
            2,
            "two of b'1,b'2,b'3 equal 0",
            s(6, 27),
            s(3, 2),
            s(-1, 2),
            "(3/2)·𝟙 − (1/2)·SB",
        ),
        (
            1,
            "two of b'1,b'2,b'3 equal 1",
            s(12, 27),
            s(3, 4),
            s(1, 4),
            "(3/4)·𝟙 + (1/4)·SB",
        ),
        (
            0,
            "b'1=b'2=b'3=1",
            s(8, 27),
            s(9, 8),
            s(-1, 8),
            "(9/8)·𝟙 − (1/8)·SB",
        ),
    ];
    for (zeros, label, expected_p, w_mixed, w_sb, box_label) in cases {
        let members: Vec<&BranchRecord> = report
            .branches
            .iter()
            .filter(|b| b.outcomes.iter().filter(|&&o| o == 0).count() == zeros)
            .collect();
        let probability: Scalar = members.iter().map(|b| &b.probability).sum();
        let expected_box = BoxTable::mix(&[(w_mixed, u.clone()), (w_sb, sb.clone())])?;
        let first = members.first().and_then(|b| b.table.clone());
        let shared = members.iter().all(|b| b.table == first);
        let mut checks = vec![CrossCheck::scalar(
            format!("{label}: probability"),
            &expected_p,
            &probability,
        )];
        for b in &members {
            checks.push(CrossCheck::table(
                format!("{label}: box for outcomes {:?}", b.outcomes),
                box_label,
                &expected_box,
                b.table.as_ref(),
            ));
        }
        report.groups.push(BranchGroup {
            label: label.to_string(),
            branches: members.iter().map(|b| b.outcomes.clone()).collect(),
            probability,
            table: if shared { first } else { None },
        });
        report.checks.extend(checks);
    }
    Ok(report)
}

/// One χ_N on `N` isotropic GSBs of sizes `arities`, Bob holding the last
/// party of each.
pub fn swap_many(arities: &[usize], xis: &[Scalar]) -> Result<ScenarioReport> {
    let count = arities.len();
    if count < 2 {
        return Err(invalid("swap_many needs at least two boxes"));
    }
    if xis.len() != count {
        return Err(invalid(format!("{} weights for {count} boxes", xis.len())));
    }
    if let Some(&n) = arities.iter().find(|&&n| n < 2) {
        return Err(invalid(format!("box arity {n} is below 2")));
    }
    let total: usize = arities.iter().sum();
    if total > MAX_PARTIES {
        return Err(Error::PartyCap {
            requested: total,
            cap: MAX_PARTIES,
        });
    }
    for xi in xis {
        check_xi_allowed(xi)?;
    }
    let boxes = arities
        .iter()
        .zip(xis)
        .enumerate()
        .map(|(i, (&n, xi))| {
            let mut labels: Vec<String> = (1..n).map(|k| format!("u{}_{k}", i + 1)).collect();
            labels.push(format!("bob{}", i + 1));
            isotropic_spec(format!("group{}", i + 1), n, xi, labels)
        })
        .collect();
    let spec = ScenarioSpec {
        name: format!(
            "swap_many(arities={arities:?}, xis=[{}])",
            xis.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        boxes,
        couplers: vec![CouplerSpec {
            arity: count,
            consumed: (1..=count).map(|i| format!("bob{i}")).collect(),
            condition: Some(0),
        }],
        wirings: Vec::new(),
        condition: None,
        reports: vec![FunctionalName::Gsi],
    };
    let mut report = run_scenario(&spec)?;

    let out = total - count;
    let weight: Scalar = xis.iter().cloned().product();
    let expected = BoxTable::isotropic(out, &weight)?;
    let final_box = conditioned_box(&report).cloned();
    report.checks.push(CrossCheck::scalar(
        "p(b'=0) = 1/3",
        &Scalar::ratio(1, 3),
        &conditioned_probability(&report),
    ));
    report.checks.push(CrossCheck::table(
        format!("b'=0 box = isotropic GSB_{out} with weight prod(xi)"),
        &format!("{weight}·GSB_{out} + ({})·𝟙", Scalar::one() - &weight),
        &expected,
        final_box.as_ref(),
    ));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub users: usize,
    pub hybrid_probability: Scalar,
    pub hybrid_boxes: usize,
    pub hybrid_couplers: usize,
    pub chi_n_probability: Scalar,
    pub chi_n_boxes: usize,
}

/// Analytic resource comparison: `N(N−1)/2` χ₂ couplers on `N(N−1)` PR
/// boxes versus one χ_N on `N` boxes.
pub fn efficiency_compare(users: usize) -> Result<EfficiencyReport> {
    if users < 3 {
        return Err(invalid("efficiency comparison needs at least 3 users"));
    }
    let couplers = users * (users - 1) / 2;
    let third = Scalar::ratio(1, 3);
    let exp = u32::try_from(couplers).map_err(|_| invalid("too many users"))?;
    Ok(EfficiencyReport {
        users,
        hybrid_probability: third.pow(exp),
        hybrid_boxes: users * (users - 1),
        hybrid_couplers: couplers,
        chi_n_probability: third,
        chi_n_boxes: users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn two_pr_spec() -> ScenarioSpec {
        ScenarioSpec {
            name: "pr pair".into(),
            boxes: vec![
                BoxSpec {
                    name: "ab".into(),
                    kind: BoxKind::Pr,
                    n: 2,
                    xi: None,
                    parties: vec!["a".into(), "b1".into()],
                },
                BoxSpec {
                    name: "bc".into(),
                    kind: BoxKind::Pr,
                    n: 2,
                    xi: None,
                    parties: vec!["b2".into(), "c".into()],
                },
            ],
            couplers: vec![CouplerSpec {
                arity: 2,
                consumed: vec!["b1".into(), "b2".into()],
                condition: Some(0),
            }],
            wirings: vec![],
            condition: None,
            reports: vec![FunctionalName::Gsi, FunctionalName::Ch],
        }
    }

    #[test]
    fn pr_pair_conditioned_on_success() {
        let r = run_scenario(&two_pr_spec()).unwrap();
        let c = r.conditioned.as_ref().unwrap();
        assert_eq!(c.probability, s(1, 3));
        assert_eq!(c.table.as_ref().unwrap(), &BoxTable::pr());
        assert_eq!(r.parties, vec!["a", "c"]);
        assert_eq!(r.branches.len(), 2);
        assert!(r.branches[0].selected && !r.branches[1].selected);
        assert_eq!(c.evaluations[1].value, s(3, 2));
        assert!(r.all_checks_pass());
    }

    #[test]
    fn top_level_condition_merges() {
        let mut spec = two_pr_spec();
        spec.couplers[0].condition = None;
        spec.condition = Some(vec![Some(1)]);
        let r = run_scenario(&spec).unwrap();
        assert_eq!(r.conditioned.unwrap().probability, s(2, 3));
        spec.couplers[0].condition = Some(0);
        assert!(run_scenario(&spec).is_err());
        spec.condition = Some(vec![]);
        assert!(run_scenario(&spec).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut dup = two_pr_spec();
        dup.boxes[1].parties[1] = "a".into();
        assert!(matches!(run_scenario(&dup), Err(Error::Scenario(_))));

        let mut unknown = two_pr_spec();
        unknown.couplers[0].consumed[1] = "zz".into();
        assert!(run_scenario(&unknown).is_err());

        let mut reuse = two_pr_spec();
        reuse.couplers.push(reuse.couplers[0].clone());
        assert!(run_scenario(&reuse).is_err());

        let mut arity = two_pr_spec();
        arity.couplers[0].arity = 3;
        assert!(run_scenario(&arity).is_err());

        let mut wire = two_pr_spec();
        wire.wirings.push(WiringSpec {
            merge: ["a".into(), "b1".into()],
            into: "x".into(),
        });
        assert!(run_scenario(&wire).is_err());

        let mut ch = two_pr_spec();
        ch.wirings.push(WiringSpec {
            merge: ["a".into(), "c".into()],
            into: "x".into(),
        });
        assert!(run_scenario(&ch).is_err());

        let mut count = two_pr_spec();
        count.boxes[0].n = 3;
        assert!(run_scenario(&count).is_err());
    }

    #[test]
    fn gsb4_and_gsb3_swap_to_five_users() {
        let spec = ScenarioSpec {
            name: "gsb4 x gsb3".into(),
            boxes: vec![
                BoxSpec {
                    name: "g4".into(),
                    kind: BoxKind::Gsb,
                    n: 4,
                    xi: None,
                    parties: vec!["a1".into(), "a2".into(), "a3".into(), "b1".into()],
                },
                BoxSpec {
                    name: "g3".into(),
                    kind: BoxKind::Gsb,
                    n: 3,
                    xi: None,
                    parties: vec!["b2".into(), "c1".into(), "c2".into()],
                },
            ],
            couplers: vec![CouplerSpec {
                arity: 2,
                consumed: vec!["b1".into(), "b2".into()],
                condition: Some(0),
            }],
            wirings: vec![],
            condition: None,
            reports: vec![FunctionalName::Gsi],
        };
        let r = run_scenario(&spec).unwrap();
        let c = r.conditioned.unwrap();
        assert_eq!(c.probability, s(1, 3));
        assert_eq!(c.table.unwrap(), BoxTable::gsb(5).unwrap());
        assert_eq!(c.evaluations[0].value, Scalar::from_integer(32));
    }

    #[test]
    fn correlated_consumption_reports_branch_path() {
        let spec = ScenarioSpec {
            name: "sb pair".into(),
            boxes: vec![BoxSpec {
                name: "sb".into(),
                kind: BoxKind::Sb,
                n: 3,
                xi: None,
                parties: vec!["a".into(), "b1".into(), "b2".into()],
            }],
            couplers: vec![CouplerSpec {
                arity: 2,
                consumed: vec!["b1".into(), "b2".into()],
                condition: None,
            }],
            wirings: vec![],
            condition: None,
            reports: vec![],
        };
        let err = run_scenario(&spec).unwrap_err();
        assert!(err.is_coupler_invalid());
        match err {
            Error::BranchFailure {
                coupler: 0,
                path,
                source,
            } => {
                assert!(path.is_empty());
                assert!(
                    matches!(*source, Error::CouplerInvalid { mass: Some(ref m), .. } if **m == s(1, 3))
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn whole_box_consumption() {
        // Bob owns a complete PR box; Alice's separate bit survives untouched.
        let spec = ScenarioSpec {
            name: "bob owns pr".into(),
            boxes: vec![
                BoxSpec {
                    name: "m".into(),
                    kind: BoxKind::Mixed,
                    n: 2,
                    xi: None,
                    parties: vec!["a".into(), "c".into()],
                },
                BoxSpec {
                    name: "pr".into(),
                    kind: BoxKind::Pr,
                    n: 2,
                    xi: None,
                    parties: vec!["b1".into(), "b2".into()],
                },
            ],
            couplers: vec![CouplerSpec {
                arity: 2,
                consumed: vec!["b2".into(), "b1".into()],
                condition: None,
            }],
            wirings: vec![],
            condition: None,
            reports: vec![],
        };
        let r = run_scenario(&spec).unwrap();
        assert_eq!(r.branches[0].probability, Scalar::one());
        assert_eq!(
            r.branches[0].table.as_ref().unwrap(),
            &BoxTable::uniform(2).unwrap()
        );
        assert!(r.branches[1].table.is_none());
        assert_eq!(r.total_probability(), Scalar::one());
    }

    #[test]
    fn swap_two_extremal_and_noise_free_edges() {
        let r = swap_two(3, 3, &Scalar::one(), &Scalar::one()).unwrap();
        assert!(r.all_checks_pass(), "{:?}", r.checks);
        assert_eq!(r.parties.len(), 4);
        let r = swap_two(2, 2, &s(1, 2), &Scalar::zero()).unwrap();
        assert_eq!(
            r.conditioned.unwrap().table.unwrap(),
            BoxTable::uniform(2).unwrap()
        );
        assert!(swap_two(2, 2, &s(-1, 2), &Scalar::one()).is_err());
        assert!(swap_two(1, 2, &Scalar::one(), &Scalar::one()).is_err());
        assert!(matches!(
            swap_two(6, 5, &Scalar::one(), &Scalar::one()),
            Err(Error::PartyCap { .. })
        ));
    }

    #[test]
    fn efficiency_numbers() {
        let e = efficiency_compare(3).unwrap();
        assert_eq!(e.hybrid_probability, s(1, 27));
        assert_eq!(e.chi_n_probability, s(1, 3));
        assert_eq!((e.hybrid_boxes, e.chi_n_boxes), (6, 3));
        let e = efficiency_compare(4).unwrap();
        assert_eq!(e.hybrid_probability, s(1, 729));
        assert_eq!(
            (e.hybrid_boxes, e.chi_n_boxes, e.hybrid_couplers),
            (12, 4, 6)
        );
        assert!(efficiency_compare(2).is_err());
    }
}
