//! `csp3 demo-decode`: builds or loads a small label cover instance,
//! decodes long-code tables into label distributions, samples a
//! labeling, and reports its value.
//!
//! Without `--labelcover` a random satisfiable two-by-two instance is
//! planted and the decoded tables default to the dictators of the
//! planted labeling, so the sampled labeling has value 1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use csp3::error::Error;
use csp3::longcode::{
    decode_spectrum, dictator_tables, expected_decoded_value, sample_label, satisfiable_demo,
    LabelCoverInstance,
};
use csp3::rational::{display, to_f64};
use csp3::ternary::FunctionTable;

use crate::{read_input, write_artifact, DemoDecodeArgs};

/// Table file schema: one small-side and one large-side table, broadcast
/// to every vertex on the matching side.
#[derive(Deserialize)]
struct TablesJson {
    f: Vec<u8>,
    g: Vec<u8>,
}

#[derive(Serialize)]
struct DemoReport {
    k: usize,
    d: usize,
    seed: u64,
    n_u: usize,
    n_v: usize,
    edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_labels_u: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_labels_v: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_value: Option<String>,
    decoded_u: Vec<Vec<f64>>,
    decoded_v: Vec<Vec<f64>>,
    sampled_labels_u: Vec<usize>,
    sampled_labels_v: Vec<usize>,
    sampled_value: String,
    sampled_value_float: f64,
    expected_decoded_value: f64,
}

pub fn run(args: &DemoDecodeArgs) -> Result<bool, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let (lc, planted) = match &args.labelcover {
        Some(path) => (LabelCoverInstance::from_json(&read_input(path)?)?, None),
        None => {
            let (lc, labels_u, labels_v) = satisfiable_demo(args.k, args.d, 2, 2, &mut rng)?;
            (lc, Some((labels_u, labels_v)))
        }
    };

    let (tables_u, tables_v) = match &args.tables {
        Some(path) => {
            let dto: TablesJson = serde_json::from_str(&read_input(path)?)
                .map_err(|e| Error::Invalid(e.to_string()))?;
            let f = FunctionTable::new(lc.k, dto.f)?;
            let g = FunctionTable::new(lc.large(), dto.g)?;
            (vec![f; lc.n_u], vec![g; lc.n_v])
        }
        None => match &planted {
            Some((labels_u, labels_v)) => dictator_tables(&lc, labels_u, labels_v)?,
            None => {
                return Err(Error::Invalid(
                    "an explicit label cover file needs a table file; \
                     there is no planted labeling to take dictators of"
                        .into(),
                ))
            }
        },
    };

    let decoded_u = tables_u
        .iter()
        .map(decode_spectrum)
        .collect::<Result<Vec<_>, _>>()?;
    let decoded_v = tables_v
        .iter()
        .map(decode_spectrum)
        .collect::<Result<Vec<_>, _>>()?;
    let sampled_labels_u: Vec<usize> = decoded_u
        .iter()
        .map(|probs| sample_label(probs, &mut rng))
        .collect();
    let sampled_labels_v: Vec<usize> = decoded_v
        .iter()
        .map(|probs| sample_label(probs, &mut rng))
        .collect();
    let sampled_value = lc.labeling_value(&sampled_labels_u, &sampled_labels_v)?;

    let planted_value = match &planted {
        Some((labels_u, labels_v)) => Some(lc.labeling_value(labels_u, labels_v)?),
        None => None,
    };

    let report = DemoReport {
        k: lc.k,
        d: lc.d,
        seed: args.seed,
        n_u: lc.n_u,
        n_v: lc.n_v,
        edges: lc.edges.len(),
        planted_labels_u: planted.as_ref().map(|p| p.0.clone()),
        planted_labels_v: planted.as_ref().map(|p| p.1.clone()),
        planted_value: planted_value.as_ref().map(display),
        decoded_u,
        decoded_v,
        sampled_labels_u,
        sampled_labels_v,
        sampled_value: display(&sampled_value),
        sampled_value_float: to_f64(&sampled_value),
        expected_decoded_value: expected_decoded_value(&lc, &tables_u, &tables_v)?,
    };

    let text = if args.pretty {
        serde_json::to_string_pretty(&report)
    } else {
        serde_json::to_string(&report)
    }
    .map_err(|e| Error::Invalid(e.to_string()))?;
    println!("{text}");
    if let Some(out) = &args.out {
        write_artifact(Some(out), &text)?;
    }
    Ok(true)
}
