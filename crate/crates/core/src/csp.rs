//! Weighted constraint satisfaction instances over small finite domains.
//!
//! Base predicates live over Z3; projection constraints additionally use
//! label domains such as [6] for reduction outputs. All weights and values
//! are exact rationals. Brute-force search is capped at `3^MAX_ARITY`
//! assignments so it stays exhaustive and exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, ratio, RatioJson, Rational};
use crate::ternary::{add3, MAX_ARITY, POW3};

/// Search cap for exact optimization, in total assignments.
pub const OPTIMUM_CAP: u128 = POW3[MAX_ARITY] as u128;

/// Disequality over four values: true when some element of Z3 is absent.
pub fn four_nat(values: [u8; 4]) -> bool {
    let mut seen = [false; 3];
    for v in values {
        seen[(v % 3) as usize] = true;
    }
    !(seen[0] && seen[1] && seen[2])
}

/// True when the four values consist of two distinct elements, each
/// appearing exactly twice.
pub fn two_pair(values: [u8; 4]) -> bool {
    let mut counts = [0u8; 3];
    for v in values {
        counts[(v % 3) as usize] += 1;
    }
    let mut twos = 0;
    for c in counts {
        if c == 2 {
            twos += 1;
        } else if c != 0 {
            return false;
        }
    }
    twos == 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredicateKind {
    ThreeColoring,
    TwoNLin,
    FourNat,
    TwoPair,
    Projection,
}

impl PredicateKind {
    pub fn name(&self) -> &'static str {
        match self {
            PredicateKind::ThreeColoring => "3col",
            PredicateKind::TwoNLin => "2nlin",
            PredicateKind::FourNat => "4nat",
            PredicateKind::TwoPair => "2pair",
            PredicateKind::Projection => "proj",
        }
    }
}

/// Constraint predicate. All Z3 predicates expect domain-3 variables;
/// projection relates a label variable to its image variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// `v0 != v1`.
    ThreeColoring,
    /// `v0 - v1 != forbidden (mod 3)`.
    TwoNLin { forbidden: u8 },
    /// Some element of Z3 absent among `v_t + shifts[t]`.
    FourNat { shifts: [u8; 4] },
    /// Two distinct values, each twice, among the four inputs.
    TwoPair,
    /// `map[label(v0)] == label(v1)`; `v0` ranges over `[map.len()]` and
    /// `v1` over `[range]`.
    Projection { map: Vec<usize>, range: usize },
}

impl Predicate {
    pub fn kind(&self) -> PredicateKind {
        match self {
            Predicate::ThreeColoring => PredicateKind::ThreeColoring,
            Predicate::TwoNLin { .. } => PredicateKind::TwoNLin,
            Predicate::FourNat { .. } => PredicateKind::FourNat,
            Predicate::TwoPair => PredicateKind::TwoPair,
            Predicate::Projection { .. } => PredicateKind::Projection,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Predicate::ThreeColoring | Predicate::TwoNLin { .. } | Predicate::Projection { .. } => {
                2
            }
            Predicate::FourNat { .. } | Predicate::TwoPair => 4,
        }
    }

    /// Domain sizes the predicate expects for each of its slots.
    pub fn slot_domains(&self) -> Vec<usize> {
        match self {
            Predicate::ThreeColoring | Predicate::TwoNLin { .. } => vec![3, 3],
            Predicate::FourNat { .. } | Predicate::TwoPair => vec![3, 3, 3, 3],
            Predicate::Projection { map, range } => vec![map.len(), *range],
        }
    }

    pub fn eval(&self, labels: &[usize]) -> Result<bool> {
        if labels.len() != self.arity() {
            return Err(Error::Shape(format!(
                "{} constraint applied to {} labels",
                self.kind().name(),
                labels.len()
            )));
        }
        Ok(match self {
            Predicate::ThreeColoring => labels[0] % 3 != labels[1] % 3,
            Predicate::TwoNLin { forbidden } => {
                (3 + labels[0] % 3 - labels[1] % 3) % 3 != *forbidden as usize
            }
            Predicate::FourNat { shifts } => four_nat([
                add3(labels[0] as u8 % 3, shifts[0]),
                add3(labels[1] as u8 % 3, shifts[1]),
                add3(labels[2] as u8 % 3, shifts[2]),
                add3(labels[3] as u8 % 3, shifts[3]),
            ]),
            Predicate::TwoPair => two_pair([
                labels[0] as u8 % 3,
                labels[1] as u8 % 3,
                labels[2] as u8 % 3,
                labels[3] as u8 % 3,
            ]),
            Predicate::Projection { map, range } => {
                if labels[0] >= map.len() || labels[1] >= *range {
                    return Err(Error::Invalid("projection label out of range".into()));
                }
                map[labels[0]] == labels[1]
            }
        })
    }

    /// Number of satisfying tuples over the slot domains.
    pub fn satisfying_count(&self) -> usize {
        let domains = self.slot_domains();
        let mut labels = vec![0usize; domains.len()];
        let mut count = 0usize;
        loop {
            if self.eval(&labels).expect("in-range tuple") {
                count += 1;
            }
            if !advance(&mut labels, &domains) {
                return count;
            }
        }
    }

    /// Probability that a uniformly random tuple satisfies the predicate.
    pub fn random_tuple_probability(&self) -> Rational {
        let total: usize = self.slot_domains().iter().product();
        ratio(self.satisfying_count() as i64, total as i64)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Predicate::TwoNLin { forbidden } if *forbidden > 2 => {
                Err(Error::Invalid("2nlin parameter out of Z3 range".into()))
            }
            Predicate::FourNat { shifts } if shifts.iter().any(|&k| k > 2) => {
                Err(Error::Invalid("4nat shift out of Z3 range".into()))
            }
            Predicate::Projection { map, range } => {
                if map.is_empty() || *range == 0 {
                    return Err(Error::Invalid("projection with empty domain".into()));
                }
                if map.iter().any(|&image| image >= *range) {
                    return Err(Error::Invalid("projection image out of range".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Odometer step over mixed-radix labels, least significant last, so the
/// iteration order is lexicographic in the label vector.
fn advance(labels: &mut [usize], domains: &[usize]) -> bool {
    for i in (0..labels.len()).rev() {
        labels[i] += 1;
        if labels[i] < domains[i] {
            return true;
        }
        labels[i] = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub predicate: Predicate,
    pub vars: Vec<usize>,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CspInstance {
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn validate(&self) -> Result<()> {
        for c in &self.constraints {
            c.predicate.validate()?;
            if c.vars.len() != c.predicate.arity() {
                return Err(Error::Shape(format!(
                    "{} constraint with {} variables",
                    c.predicate.kind().name(),
                    c.vars.len()
                )));
            }
            for (slot, (&v, dom)) in c.vars.iter().zip(c.predicate.slot_domains()).enumerate() {
                let var = self
                    .vars
                    .get(v)
                    .ok_or_else(|| Error::Invalid(format!("variable index {v} out of range")))?;
                if var.domain != dom {
                    return Err(Error::Shape(format!(
                        "slot {slot} of a {} constraint expects domain {dom}, variable {} has {}",
                        c.predicate.kind().name(),
                        var.name,
                        var.domain
                    )));
                }
            }
            if c.weight < int(0) {
                return Err(Error::Invalid("negative constraint weight".into()));
            }
        }
        Ok(())
    }

    pub fn total_weight(&self) -> Rational {
        self.constraints
            .iter()
            .fold(int(0), |acc, c| acc + c.weight.clone())
    }

    /// Weighted fraction of constraints the assignment satisfies.
    pub fn value(&self, assignment: &[usize]) -> Result<Rational> {
        if assignment.len() != self.vars.len() {
            return Err(Error::Shape(
                "assignment length differs from variables".into(),
            ));
        }
        for (v, &label) in assignment.iter().enumerate() {
            if label >= self.vars[v].domain {
                return Err(Error::Invalid(format!(
                    "label {label} out of domain for variable {}",
                    self.vars[v].name
                )));
            }
        }
        let mut total = int(0);
        let mut labels = Vec::with_capacity(4);
        for c in &self.constraints {
            labels.clear();
            labels.extend(c.vars.iter().map(|&v| assignment[v]));
            if c.predicate.eval(&labels)? {
                total += c.weight.clone();
            }
        }
        Ok(total)
    }

    pub fn assignment_count(&self) -> u128 {
        self.vars
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain as u128))
    }

    /// Exhaustive exact optimum. Returns the best value and the
    /// lexicographically least assignment attaining it.
    pub fn optimum(&self) -> Result<(Rational, Vec<usize>)> {
        let count = self.assignment_count();
        if count > OPTIMUM_CAP {
            return Err(Error::SearchSpace {
                assignments: count,
                cap: OPTIMUM_CAP,
            });
        }
        let domains: Vec<usize> = self.vars.iter().map(|v| v.domain).collect();
        let mut assignment = vec![0usize; self.vars.len()];
        let mut best_value: Option<Rational> = None;
        let mut best_assignment = assignment.clone();
        let mut labels = Vec::with_capacity(4);
        loop {
            let mut total = int(0);
            for c in &self.constraints {
                labels.clear();
                labels.extend(c.vars.iter().map(|&v| assignment[v]));
                if c.predicate.eval(&labels)? {
                    total += c.weight.clone();
                }
            }
            if best_value.as_ref().is_none_or(|b| total > *b) {
                best_value = Some(total);
                best_assignment.copy_from_slice(&assignment);
            }
            if !advance(&mut assignment, &domains) {
                break;
            }
        }
        Ok((best_value.unwrap_or_else(|| int(0)), best_assignment))
    }

    /// Expected value of a uniformly random assignment.
    pub fn random_assignment_expectation(&self) -> Result<Rational> {
        self.validate()?;
        self.conditional_expectation(&vec![None; self.vars.len()])
    }

    /// Greedy conditional-expectation assignment: fixes variables in order,
    /// each to the label maximizing the exact expected value with the rest
    /// uniform. The result is always at least the random-assignment
    /// expectation.
    pub fn greedy_assignment(&self) -> Result<(Vec<usize>, Rational)> {
        self.validate()?;
        let n = self.vars.len();
        let mut fixed: Vec<Option<usize>> = vec![None; n];
        for v in 0..n {
            let mut best: Option<(Rational, usize)> = None;
            for label in 0..self.vars[v].domain {
                fixed[v] = Some(label);
                let e = self.conditional_expectation(&fixed)?;
                if best.as_ref().is_none_or(|(b, _)| e > *b) {
                    best = Some((e, label));
                }
            }
            fixed[v] = Some(best.expect("nonempty domain").1);
        }
        let assignment: Vec<usize> = fixed.into_iter().map(|l| l.unwrap()).collect();
        let value = self.value(&assignment)?;
        Ok((assignment, value))
    }

    fn conditional_expectation(&self, fixed: &[Option<usize>]) -> Result<Rational> {
        let mut total = int(0);
        for c in &self.constraints {
            // Enumerate assignments of the constraint's distinct variables
            // so a repeated variable takes one label across its slots.
            let mut distinct: Vec<usize> = Vec::new();
            let mut slot_of: Vec<usize> = Vec::with_capacity(c.vars.len());
            for &v in &c.vars {
                let pos = distinct.iter().position(|&u| u == v).unwrap_or_else(|| {
                    distinct.push(v);
                    distinct.len() - 1
                });
                slot_of.push(pos);
            }
            let domains: Vec<usize> = distinct.iter().map(|&v| self.vars[v].domain).collect();
            let mut choice = vec![0usize; distinct.len()];
            let mut labels = vec![0usize; c.vars.len()];
            let mut sat = 0u64;
            let mut all = 0u64;
            loop {
                let consistent = distinct
                    .iter()
                    .zip(&choice)
                    .all(|(&v, &l)| fixed[v].is_none_or(|fl| fl == l));
                if consistent {
                    all += 1;
                    for (slot, &p) in slot_of.iter().enumerate() {
                        labels[slot] = choice[p];
                    }
                    if c.predicate.eval(&labels)? {
                        sat += 1;
                    }
                }
                if !advance(&mut choice, &domains) {
                    break;
                }
            }
            total += c.weight.clone() * ratio(sat as i64, all as i64);
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        let dto = InstanceJson::try_from(self)?;
        serde_json::to_string(&dto).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        let dto = InstanceJson::try_from(self)?;
        serde_json::to_string_pretty(&dto).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: InstanceJson =
            serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        dto.try_into()
    }
}

/// Wire form of an instance. `domain` is the base field size and is
/// always 3; variables whose domain differs (projection labels) say so
/// explicitly.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    pub domain: usize,
    pub vars: Vec<VariableJson>,
    pub constraints: Vec<ConstraintJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariableJson {
    Plain(String),
    Sized { name: String, domain: usize },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub kind: String,
    pub params: Vec<usize>,
    pub vars: Vec<String>,
    pub weight: RatioJson,
}

impl TryFrom<&CspInstance> for InstanceJson {
    type Error = Error;

    fn try_from(instance: &CspInstance) -> Result<Self> {
        instance.validate()?;
        let vars = instance
            .vars
            .iter()
            .map(|v| {
                if v.domain == 3 {
                    VariableJson::Plain(v.name.clone())
                } else {
                    VariableJson::Sized {
                        name: v.name.clone(),
                        domain: v.domain,
                    }
                }
            })
            .collect();
        let constraints = instance
            .constraints
            .iter()
            .map(|c| {
                let params = match &c.predicate {
                    Predicate::ThreeColoring | Predicate::TwoPair => vec![],
                    Predicate::TwoNLin { forbidden } => vec![*forbidden as usize],
                    Predicate::FourNat { shifts } => shifts.iter().map(|&k| k as usize).collect(),
                    Predicate::Projection { map, range } => {
                        let mut params = vec![*range];
                        params.extend_from_slice(map);
                        params
                    }
                };
                Ok(ConstraintJson {
                    kind: c.predicate.kind().name().to_string(),
                    params,
                    vars: c
                        .vars
                        .iter()
                        .map(|&v| instance.vars[v].name.clone())
                        .collect(),
                    weight: RatioJson::from_rational(&c.weight)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InstanceJson {
            domain: 3,
            vars,
            constraints,
        })
    }
}

impl TryFrom<InstanceJson> for CspInstance {
    type Error = Error;

    fn try_from(dto: InstanceJson) -> Result<Self> {
        if dto.domain != 3 {
            return Err(Error::Invalid(format!(
                "base domain must be 3, got {}",
                dto.domain
            )));
        }
        let vars: Vec<Variable> = dto
            .vars
            .into_iter()
            .map(|v| match v {
                VariableJson::Plain(name) => Variable { name, domain: 3 },
                VariableJson::Sized { name, domain } => Variable { name, domain },
            })
            .collect();
        let mut index = std::collections::BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate variable name {}",
                    v.name
                )));
            }
        }
        let trit = |p: usize| -> Result<u8> {
            if p > 2 {
                Err(Error::Invalid("parameter out of Z3 range".into()))
            } else {
                Ok(p as u8)
            }
        };
        let constraints =
            dto.constraints
                .into_iter()
                .map(|c| {
                    let predicate = match c.kind.as_str() {
                        "3col" => Predicate::ThreeColoring,
                        "2nlin" => match c.params.as_slice() {
                            [a] => Predicate::TwoNLin {
                                forbidden: trit(*a)?,
                            },
                            _ => return Err(Error::Invalid("2nlin expects one parameter".into())),
                        },
                        "4nat" => match c.params.as_slice() {
                            [k0, k1, k2, k3] => Predicate::FourNat {
                                shifts: [trit(*k0)?, trit(*k1)?, trit(*k2)?, trit(*k3)?],
                            },
                            _ => return Err(Error::Invalid("4nat expects four parameters".into())),
                        },
                        "2pair" => Predicate::TwoPair,
                        "proj" => match c.params.split_first() {
                            Some((&range, map)) if !map.is_empty() => Predicate::Projection {
                                map: map.to_vec(),
                                range,
                            },
                            _ => {
                                return Err(Error::Invalid(
                                    "proj expects the range followed by the map".into(),
                                ))
                            }
                        },
                        other => {
                            return Err(Error::Kind {
                                expected: "3col|2nlin|4nat|2pair|proj".into(),
                                found: other.to_string(),
                            })
                        }
                    };
                    let vars =
                        c.vars
                            .iter()
                            .map(|name| {
                                index.get(name).copied().ok_or_else(|| {
                                    Error::Invalid(format!("unknown variable {name}"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                    Ok(Constraint {
                        predicate,
                        vars,
                        weight: c.weight.to_rational()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        let instance = CspInstance { vars, constraints };
        instance.validate()?;
        Ok(instance)
    }
}

/// Variables named `v0..v{n-1}`, all over Z3.
pub fn z3_vars(n: usize) -> Vec<Variable> {
    (0..n)
        .map(|i| Variable {
            name: format!("v{i}"),
            domain: 3,
        })
        .collect()
}
