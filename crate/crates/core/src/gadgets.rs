//! Constraint gadget reductions with exactly verified gap parameters.
//!
//! A gadget maps one source constraint to a weighted family of target
//! constraints over the source variables plus fresh auxiliaries, with the
//! internal weights summing to 1. Its gap parameter `gamma` is the common
//! optimum, over auxiliary labels, achieved by every non-satisfying source
//! assignment; satisfying assignments always extend to value exactly 1.
//! Composing a gadget onto a `(c, s)` decision threshold pair yields
//! `(c + (1-c) gamma, s + (1-s) gamma)`.

use serde::Serialize;

use crate::csp::{Constraint, CspInstance, Predicate, PredicateKind, Variable};
use crate::error::{Error, Result};
use crate::rational::{int, ratio, RatioJson, Rational};
use crate::ternary::neg3;

/// A completeness/soundness threshold pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionThresholds {
    pub completeness: Rational,
    pub soundness: Rational,
}

impl DecisionThresholds {
    pub fn new(completeness: Rational, soundness: Rational) -> Self {
        DecisionThresholds {
            completeness,
            soundness,
        }
    }

    /// Threshold pair after applying a gadget with the given gap parameter.
    pub fn compose(&self, gamma: &Rational) -> Self {
        let lift = |t: &Rational| t.clone() + (int(1) - t.clone()) * gamma.clone();
        DecisionThresholds {
            completeness: lift(&self.completeness),
            soundness: lift(&self.soundness),
        }
    }
}

/// Slot in a gadget's target constraint: either one of the source
/// constraint's variable positions or a fresh auxiliary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetSlot {
    Source(usize),
    Aux(usize),
}

/// Expansion of one source constraint.
#[derive(Debug, Clone)]
pub struct GadgetExpansion {
    /// Domain sizes of the fresh auxiliary variables, in index order.
    pub aux_domains: Vec<usize>,
    /// Target constraints with internal weights summing to 1.
    pub constraints: Vec<(Predicate, Vec<GadgetSlot>, Rational)>,
}

pub trait Gadget {
    fn name(&self) -> &'static str;
    fn source_kind(&self) -> PredicateKind;
    fn target_kind(&self) -> PredicateKind;
    /// The documented gap parameter; `verify_gamma` recomputes it.
    fn gamma(&self) -> Rational;
    fn expand(&self, source: &Predicate) -> Result<GadgetExpansion>;
}

fn check_source_kind(gadget: &dyn Gadget, source: &Predicate) -> Result<()> {
    if source.kind() != gadget.source_kind() {
        return Err(Error::Kind {
            expected: gadget.source_kind().name().into(),
            found: source.kind().name().into(),
        });
    }
    Ok(())
}

/// Replaces each of the four shifted disequality slots with an equation
/// against a single fresh Z3 auxiliary: `v_t + k_t != y` becomes the
/// two-variable constraint `v_t - y != -k_t`, each at weight 1/4.
pub struct FourNatToTwoNLin;

impl Gadget for FourNatToTwoNLin {
    fn name(&self) -> &'static str {
        "4nat-to-2nlin"
    }

    fn source_kind(&self) -> PredicateKind {
        PredicateKind::FourNat
    }

    fn target_kind(&self) -> PredicateKind {
        PredicateKind::TwoNLin
    }

    fn gamma(&self) -> Rational {
        ratio(3, 4)
    }

    fn expand(&self, source: &Predicate) -> Result<GadgetExpansion> {
        check_source_kind(self, source)?;
        let Predicate::FourNat { shifts } = source else {
            unreachable!()
        };
        let constraints = (0..4)
            .map(|t| {
                (
                    Predicate::TwoNLin {
                        forbidden: neg3(shifts[t]),
                    },
                    vec![GadgetSlot::Source(t), GadgetSlot::Aux(0)],
                    ratio(1, 4),
                )
            })
            .collect();
        Ok(GadgetExpansion {
            aux_domains: vec![3],
            constraints,
        })
    }
}

/// The six satisfying pairs of `v0 - v1 != forbidden`, in lexicographic
/// order. These are the labels of the auxiliary in
/// [`TwoNLinToProjection`].
pub fn satisfying_pairs(forbidden: u8) -> Vec<(u8, u8)> {
    let mut pairs = Vec::with_capacity(6);
    for b0 in 0..3u8 {
        for b1 in 0..3u8 {
            if (3 + b0 - b1) % 3 != forbidden {
                pairs.push((b0, b1));
            }
        }
    }
    pairs
}

/// Replaces one disequation with a domain-6 auxiliary labeled by a
/// satisfying pair, tied to each endpoint by a 2-to-1 projection, each at
/// weight 1/2.
pub struct TwoNLinToProjection;

impl Gadget for TwoNLinToProjection {
    fn name(&self) -> &'static str {
        "2nlin-to-labelcover"
    }

    fn source_kind(&self) -> PredicateKind {
        PredicateKind::TwoNLin
    }

    fn target_kind(&self) -> PredicateKind {
        PredicateKind::Projection
    }

    fn gamma(&self) -> Rational {
        ratio(1, 2)
    }

    fn expand(&self, source: &Predicate) -> Result<GadgetExpansion> {
        check_source_kind(self, source)?;
        let Predicate::TwoNLin { forbidden } = source else {
            unreachable!()
        };
        let pairs = satisfying_pairs(*forbidden);
        let map0: Vec<usize> = pairs.iter().map(|&(b0, _)| b0 as usize).collect();
        let map1: Vec<usize> = pairs.iter().map(|&(_, b1)| b1 as usize).collect();
        Ok(GadgetExpansion {
            aux_domains: vec![6],
            constraints: vec![
                (
                    Predicate::Projection {
                        map: map0,
                        range: 3,
                    },
                    vec![GadgetSlot::Aux(0), GadgetSlot::Source(0)],
                    ratio(1, 2),
                ),
                (
                    Predicate::Projection {
                        map: map1,
                        range: 3,
                    },
                    vec![GadgetSlot::Aux(0), GadgetSlot::Source(1)],
                    ratio(1, 2),
                ),
            ],
        })
    }
}

/// Literal composition of [`FourNatToTwoNLin`] with
/// [`TwoNLinToProjection`]: one Z3 auxiliary plus four domain-6
/// auxiliaries, eight projections at weight 1/8 each.
pub struct FourNatToProjection;

impl Gadget for FourNatToProjection {
    fn name(&self) -> &'static str {
        "4nat-to-labelcover"
    }

    fn source_kind(&self) -> PredicateKind {
        PredicateKind::FourNat
    }

    fn target_kind(&self) -> PredicateKind {
        PredicateKind::Projection
    }

    fn gamma(&self) -> Rational {
        ratio(7, 8)
    }

    fn expand(&self, source: &Predicate) -> Result<GadgetExpansion> {
        check_source_kind(self, source)?;
        let stage1 = FourNatToTwoNLin.expand(source)?;
        let mut aux_domains = stage1.aux_domains.clone();
        let mut constraints = Vec::with_capacity(8);
        for (predicate, slots, weight) in &stage1.constraints {
            let stage2 = TwoNLinToProjection.expand(predicate)?;
            let fresh_base = aux_domains.len();
            aux_domains.extend(&stage2.aux_domains);
            for (inner_pred, inner_slots, inner_weight) in stage2.constraints {
                let remapped = inner_slots
                    .iter()
                    .map(|slot| match slot {
                        GadgetSlot::Source(p) => slots[*p],
                        GadgetSlot::Aux(a) => GadgetSlot::Aux(fresh_base + a),
                    })
                    .collect();
                constraints.push((inner_pred, remapped, weight.clone() * inner_weight));
            }
        }
        Ok(GadgetExpansion {
            aux_domains,
            constraints,
        })
    }
}

/// Exhaustive verification record for one gadget on one source predicate.
#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub gadget: String,
    pub gamma_expected: RatioJson,
    pub gamma_observed: RatioJson,
    /// Every satisfying source assignment extends to target value 1.
    pub completeness_exact: bool,
    /// Every non-satisfying source assignment achieves the same optimum.
    pub soundness_uniform: bool,
    pub pass: bool,
}

/// Enumerates all source assignments and, for each, the exact optimum of
/// the expansion over auxiliary labels.
pub fn verify_gamma(gadget: &dyn Gadget, source: &Predicate) -> Result<GammaReport> {
    check_source_kind(gadget, source)?;
    let expansion = gadget.expand(source)?;
    let internal_total: Rational = expansion
        .constraints
        .iter()
        .fold(int(0), |acc, (_, _, w)| acc + w.clone());
    if internal_total != int(1) {
        return Err(Error::Invalid(format!(
            "gadget {} internal weights do not sum to 1",
            gadget.name()
        )));
    }

    let arity = source.arity();
    let source_domains = source.slot_domains();
    let mut completeness_exact = true;
    let mut soundness_uniform = true;
    let mut observed: Option<Rational> = None;

    let mut source_labels = vec![0usize; arity];
    loop {
        let best = best_extension(&expansion, &source_labels)?;
        if source.eval(&source_labels)? {
            if best != int(1) {
                completeness_exact = false;
            }
        } else {
            match &observed {
                None => observed = Some(best),
                Some(prev) if *prev != best => soundness_uniform = false,
                _ => {}
            }
        }
        if !advance_mixed(&mut source_labels, &source_domains) {
            break;
        }
    }

    let gamma_expected = gadget.gamma();
    let gamma_observed = observed.unwrap_or_else(|| int(1));
    let pass = completeness_exact && soundness_uniform && gamma_observed == gamma_expected;
    Ok(GammaReport {
        gadget: gadget.name().into(),
        gamma_expected: RatioJson::from_rational(&gamma_expected)?,
        gamma_observed: RatioJson::from_rational(&gamma_observed)?,
        completeness_exact,
        soundness_uniform,
        pass,
    })
}

fn best_extension(expansion: &GadgetExpansion, source_labels: &[usize]) -> Result<Rational> {
    let mut aux = vec![0usize; expansion.aux_domains.len()];
    let mut best = int(0);
    let mut first = true;
    loop {
        let mut total = int(0);
        for (predicate, slots, weight) in &expansion.constraints {
            let labels: Vec<usize> = slots
                .iter()
                .map(|slot| match slot {
                    GadgetSlot::Source(p) => source_labels[*p],
                    GadgetSlot::Aux(a) => aux[*a],
                })
                .collect();
            if predicate.eval(&labels)? {
                total += weight.clone();
            }
        }
        if first || total > best {
            best = total;
            first = false;
        }
        if !advance_mixed(&mut aux, &expansion.aux_domains) {
            break;
        }
    }
    Ok(best)
}

fn advance_mixed(labels: &mut [usize], domains: &[usize]) -> bool {
    for i in (0..labels.len()).rev() {
        labels[i] += 1;
        if labels[i] < domains[i] {
            return true;
        }
        labels[i] = 0;
    }
    false
}

/// Applies a gadget to every constraint of an instance. Target weights are
/// the source weight times the internal weight, so a normalized instance
/// stays normalized. Auxiliaries are named `c{index}_a{slot}`.
pub fn apply_gadget(instance: &CspInstance, gadget: &dyn Gadget) -> Result<CspInstance> {
    instance.validate()?;
    for c in &instance.constraints {
        if c.predicate.kind() != gadget.source_kind() {
            return Err(Error::Kind {
                expected: gadget.source_kind().name().into(),
                found: c.predicate.kind().name().into(),
            });
        }
    }
    let mut vars = instance.vars.clone();
    let mut constraints = Vec::new();
    for (index, c) in instance.constraints.iter().enumerate() {
        let expansion = gadget.expand(&c.predicate)?;
        let aux_base = vars.len();
        for (slot, &domain) in expansion.aux_domains.iter().enumerate() {
            vars.push(Variable {
                name: format!("c{index}_a{slot}"),
                domain,
            });
        }
        for (predicate, slots, weight) in expansion.constraints {
            let target_vars = slots
                .iter()
                .map(|slot| match slot {
                    GadgetSlot::Source(p) => c.vars[*p],
                    GadgetSlot::Aux(a) => aux_base + a,
                })
                .collect();
            constraints.push(Constraint {
                predicate,
                vars: target_vars,
                weight: c.weight.clone() * weight,
            });
        }
    }
    let out = CspInstance { vars, constraints };
    out.validate()?;
    Ok(out)
}
