//! `csp3 reduce`: applies a gadget chain to a CSP instance file, or the
//! long-code reduction to a label cover instance file.
//!
//! The produced artifact goes to `--out` when given, otherwise to
//! stdout. With `--out` a JSON summary is printed to stdout instead:
//! constraint counts, the gap parameter, optional threshold transport,
//! and exact optima when the search spaces are small enough.

use serde::Serialize;

use csp3::csp::{CspInstance, OPTIMUM_CAP};
use csp3::error::Error;
use csp3::gadgets::{
    apply_gadget, DecisionThresholds, FourNatToProjection, FourNatToTwoNLin, Gadget,
    TwoNLinToProjection,
};
use csp3::longcode::{build_instance, LabelCoverInstance};
use csp3::rational::{display, parse, to_f64, Rational};

use crate::{read_input, write_artifact, ChainName, ReduceArgs};

#[derive(Serialize)]
struct ThresholdTransport {
    completeness_in: String,
    soundness_in: String,
    completeness_out: String,
    soundness_out: String,
}

#[derive(Serialize)]
struct ReduceSummary {
    chain: String,
    input_kind: String,
    input_size: usize,
    output_variables: usize,
    output_constraints: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thresholds: Option<ThresholdTransport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_output_optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_optimum_float: Option<f64>,
}

enum ArtifactKind {
    Csp,
    LabelCover,
}

/// Distinguishes the two artifact schemas by their collection key.
fn detect_kind(text: &str) -> Result<ArtifactKind, Error> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| Error::Invalid("input is not a JSON object".into()))?;
    if object.contains_key("edges") {
        Ok(ArtifactKind::LabelCover)
    } else if object.contains_key("constraints") {
        Ok(ArtifactKind::Csp)
    } else {
        Err(Error::Invalid(
            "input has neither an \"edges\" nor a \"constraints\" key".into(),
        ))
    }
}

fn chain_label(chain: ChainName) -> &'static str {
    match chain {
        ChainName::FourNatToTwoNLin => "4nat-to-2nlin",
        ChainName::TwoNLinToLabelCover => "2nlin-to-labelcover",
        ChainName::FourNatToLabelCover => "4nat-to-labelcover",
        ChainName::Longcode4Nat => "longcode-4nat",
    }
}

fn gadget_for(chain: ChainName) -> Option<&'static dyn Gadget> {
    match chain {
        ChainName::FourNatToTwoNLin => Some(&FourNatToTwoNLin),
        ChainName::TwoNLinToLabelCover => Some(&TwoNLinToProjection),
        ChainName::FourNatToLabelCover => Some(&FourNatToProjection),
        ChainName::Longcode4Nat => None,
    }
}

fn thresholds_from_args(
    args: &ReduceArgs,
    gamma: &Rational,
) -> Result<Option<ThresholdTransport>, Error> {
    match (&args.completeness, &args.soundness) {
        (None, None) => Ok(None),
        (Some(c), Some(s)) => {
            let before = DecisionThresholds::new(parse(c)?, parse(s)?);
            let after = before.compose(gamma);
            Ok(Some(ThresholdTransport {
                completeness_in: display(&before.completeness),
                soundness_in: display(&before.soundness),
                completeness_out: display(&after.completeness),
                soundness_out: display(&after.soundness),
            }))
        }
        _ => Err(Error::Invalid(
            "threshold transport needs both --completeness and --soundness".into(),
        )),
    }
}

fn optimum_if_small(instance: &CspInstance) -> Result<Option<Rational>, Error> {
    if instance.assignment_count() > OPTIMUM_CAP {
        return Ok(None);
    }
    Ok(Some(instance.optimum()?.0))
}

pub fn run(args: &ReduceArgs) -> Result<bool, Error> {
    let text = read_input(&args.input)?;
    let kind = detect_kind(&text)?;
    let chain = args.chain;

    let summary = match (gadget_for(chain), kind) {
        (Some(gadget), ArtifactKind::Csp) => {
            let source = CspInstance::from_json(&text)?;
            let target = apply_gadget(&source, gadget)?;
            let artifact = if args.pretty {
                target.to_json_pretty()?
            } else {
                target.to_json()?
            };
            write_artifact(args.out.as_deref(), &artifact)?;

            let gamma = gadget.gamma();
            let input_optimum = optimum_if_small(&source)?;
            let predicted = input_optimum
                .as_ref()
                .map(|opt| opt.clone() + (csp3::rational::int(1) - opt.clone()) * gamma.clone());
            let output_optimum = optimum_if_small(&target)?;
            ReduceSummary {
                chain: chain_label(chain).to_string(),
                input_kind: "csp".to_string(),
                input_size: source.constraints.len(),
                output_variables: target.vars.len(),
                output_constraints: target.constraints.len(),
                gamma: Some(display(&gamma)),
                thresholds: thresholds_from_args(args, &gamma)?,
                input_optimum: input_optimum.as_ref().map(display),
                predicted_output_optimum: predicted.as_ref().map(display),
                output_optimum: output_optimum.as_ref().map(display),
                output_optimum_float: output_optimum.as_ref().map(to_f64),
            }
        }
        (None, ArtifactKind::LabelCover) => {
            if args.completeness.is_some() || args.soundness.is_some() {
                return Err(Error::Invalid(
                    "threshold transport applies to gadget chains only".into(),
                ));
            }
            let lc = LabelCoverInstance::from_json(&text)?;
            let built = build_instance(&lc)?;
            let artifact = if args.pretty {
                built.csp.to_json_pretty()?
            } else {
                built.csp.to_json()?
            };
            write_artifact(args.out.as_deref(), &artifact)?;

            let output_optimum = optimum_if_small(&built.csp)?;
            ReduceSummary {
                chain: chain_label(chain).to_string(),
                input_kind: "labelcover".to_string(),
                input_size: lc.edges.len(),
                output_variables: built.csp.vars.len(),
                output_constraints: built.csp.constraints.len(),
                gamma: None,
                thresholds: None,
                input_optimum: None,
                predicted_output_optimum: None,
                output_optimum: output_optimum.as_ref().map(display),
                output_optimum_float: output_optimum.as_ref().map(to_f64),
            }
        }
        (Some(_), ArtifactKind::LabelCover) => {
            return Err(Error::Kind {
                expected: "csp instance with a \"constraints\" key".into(),
                found: "label cover instance".into(),
            })
        }
        (None, ArtifactKind::Csp) => {
            return Err(Error::Kind {
                expected: "label cover instance with an \"edges\" key".into(),
                found: "csp instance".into(),
            })
        }
    };

    if args.out.is_some() {
        let text =
            serde_json::to_string_pretty(&summary).map_err(|e| Error::Invalid(e.to_string()))?;
        println!("{text}");
    }
    Ok(true)
}
