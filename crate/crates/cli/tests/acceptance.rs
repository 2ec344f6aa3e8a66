//! Acceptance gate for the workspace.
//!
//! Twelve criteria, one test each. Every test prints a single
//! `[acceptance] <criterion>: pass|fail` line so the gate can be read off
//! a test log, and fails with the collected reasons if its criterion does
//! not hold. Tolerances are pinned here: exact facts compare rationals,
//! identities allow 1e-9, pointwise closed forms 1e-12.

use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use csp3::coupling::{CoupledSpace, FourNatSpace, TwoNLinSpace};
use csp3::csp::{two_pair, z3_vars, Constraint, CspInstance, Predicate};
use csp3::dictator::{
    hidden_gadget_inequality, matching_pair, nonmatching_pair, shift_disagreement_probability,
    three_coloring_pass_probability,
};
use csp3::fourier::{even_mass, transform, ComplexTable};
use csp3::gadgets::{
    verify_gamma, DecisionThresholds, FourNatToProjection, FourNatToTwoNLin, Gadget,
    TwoNLinToProjection,
};
use csp3::identities::{
    arithmetization_residual, character_block_closed_form, character_block_expectation,
    fgg_dec_bound, fgg_even_bound, four_nat_expectation_expansion, ggg_even_bound, ggg_mean_bound,
    indicator_triple_identity, mean_product_bound, pair_even_bound, pair_product_expansion,
    triple_product_expansion, triple_self_expansion, value_frequency_identity,
};
use csp3::longcode::{
    build_instance, decode_spectrum, dictator_tables, edge_table, satisfiable_demo,
};
use csp3::rational::{int, ratio, to_f64, Rational};
use csp3::soundness::{four_nat_soundness, three_coloring_soundness};
use csp3::ternary::{index_to_digits, BlockMap, FunctionTable};

const IDENTITY_TOL: f64 = 1e-9;
const POINT_TOL: f64 = 1e-12;

fn conclude(name: &str, failures: Vec<String>) {
    let ok = failures.is_empty();
    println!("[acceptance] {name}: {}", if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {name}: {failures:#?}");
}

fn note(failures: &mut Vec<String>, ok: bool, label: impl FnOnce() -> String) {
    if !ok {
        failures.push(label());
    }
}

fn blocks22() -> BlockMap {
    BlockMap::new(2, 2).unwrap()
}

#[test]
fn criterion_01_gadget_gammas_are_exact_rationals() {
    let mut failures = Vec::new();
    let cases: [(&dyn Gadget, Predicate, Rational); 3] = [
        (
            &FourNatToTwoNLin,
            Predicate::FourNat {
                shifts: [0, 0, 0, 0],
            },
            ratio(3, 4),
        ),
        (
            &TwoNLinToProjection,
            Predicate::TwoNLin { forbidden: 0 },
            ratio(1, 2),
        ),
        (
            &FourNatToProjection,
            Predicate::FourNat {
                shifts: [0, 1, 2, 0],
            },
            ratio(7, 8),
        ),
    ];
    for (gadget, source, expected) in cases {
        let report = verify_gamma(gadget, &source).unwrap();
        let observed = report.gamma_observed.to_rational().unwrap();
        note(&mut failures, report.pass && observed == expected, || {
            format!("{source:?}: gamma {observed} wanted {expected}")
        });
    }
    conclude("gadget-gammas", failures);
}

#[test]
fn criterion_02_threshold_composition_is_exact() {
    let mut failures = Vec::new();
    let base = DecisionThresholds::new(int(1), ratio(2, 3));
    let mid = base.compose(&ratio(3, 4));
    note(
        &mut failures,
        mid.completeness == int(1) && mid.soundness == ratio(11, 12),
        || format!("first hop gave ({}, {})", mid.completeness, mid.soundness),
    );
    let end = mid.compose(&ratio(1, 2));
    note(
        &mut failures,
        end.completeness == int(1) && end.soundness == ratio(23, 24),
        || format!("second hop gave ({}, {})", end.completeness, end.soundness),
    );
    let direct = base.compose(&ratio(7, 8));
    note(&mut failures, direct.soundness == end.soundness, || {
        format!("direct composition gave {}", direct.soundness)
    });
    conclude("threshold-composition", failures);
}

#[test]
fn criterion_03_dictator_pass_probabilities_are_exact() {
    let mut failures = Vec::new();
    let blocks = blocks22();
    let two_nlin = TwoNLinSpace::new(blocks).unwrap();
    let four = FourNatSpace::new(blocks).unwrap();

    let (fm, gm) = matching_pair(&blocks).unwrap();
    let hm = two_nlin.best_middle(&fm, &gm, true).unwrap();
    note(
        &mut failures,
        two_nlin.pass_probability(&fm, &gm, &hm).unwrap() == int(1),
        || "matching pair misses 1 on the pair test".into(),
    );
    note(
        &mut failures,
        three_coloring_pass_probability(&two_nlin, &fm, &gm, &hm).unwrap() == int(1),
        || "matching pair misses 1 on the coloring test".into(),
    );
    note(
        &mut failures,
        four.pass_probability(&fm, &gm).unwrap() == int(1),
        || "matching pair misses 1 on the four-variable test".into(),
    );

    let (fn_, gn) = nonmatching_pair(&blocks).unwrap();
    let hn = two_nlin.best_middle(&fn_, &gn, true).unwrap();
    let pair = two_nlin.pass_probability(&fn_, &gn, &hn).unwrap();
    note(&mut failures, pair == ratio(11, 12), || {
        format!("nonmatching pair test pass {pair}")
    });
    let coloring = three_coloring_pass_probability(&two_nlin, &fn_, &gn, &hn).unwrap();
    note(&mut failures, coloring == ratio(16, 17), || {
        format!("nonmatching coloring pass {coloring}")
    });
    let four_nat = four.pass_probability(&fn_, &gn).unwrap();
    note(&mut failures, four_nat == ratio(2, 3), || {
        format!("nonmatching four-variable pass {four_nat}")
    });
    conclude("dictator-pass-constants", failures);
}

#[test]
fn criterion_04_arithmetization_matches_on_all_tuples() {
    let mut failures = Vec::new();
    let residual = arithmetization_residual();
    note(&mut failures, residual < POINT_TOL, || {
        format!("worst tuple residual {residual:e}")
    });
    conclude("arithmetization-all-tuples", failures);
}

#[test]
fn criterion_05_character_block_table_matches_closed_form() {
    let mut failures = Vec::new();
    for beta in 0..3u8 {
        for gamma in 0..3u8 {
            for a in 0..3u8 {
                let lhs = character_block_expectation(beta, gamma, a);
                let rhs = character_block_closed_form(beta, gamma, a);
                note(&mut failures, (lhs - rhs).norm() < POINT_TOL, || {
                    format!("case ({beta}, {gamma}, {a}): {lhs} vs {rhs}")
                });
            }
        }
    }
    conclude("character-block-closed-form", failures);
}

#[test]
fn criterion_06_expansion_chain_on_five_hundred_random_tables() {
    let mut failures = Vec::new();
    let blocks = blocks22();
    let space = FourNatSpace::new(blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut free_pairs: Vec<(FunctionTable, FunctionTable)> = vec![
        (
            FunctionTable::constant(2, 0).unwrap(),
            FunctionTable::constant(4, 2).unwrap(),
        ),
        matching_pair(&blocks).unwrap(),
        (
            FunctionTable::dictator(2, 1).unwrap(),
            FunctionTable::dictator(4, 3).unwrap(),
        ),
    ];
    for _ in 0..500 {
        free_pairs.push((
            FunctionTable::random(2, &mut rng).unwrap(),
            FunctionTable::random(4, &mut rng).unwrap(),
        ));
    }
    for (i, (f, g)) in free_pairs.iter().enumerate() {
        let fp = ComplexTable::phases(f);
        let gp = ComplexTable::phases(g);
        let mixed = triple_product_expansion(&fp, &gp, &gp, &space).unwrap();
        note(&mut failures, mixed.within(IDENTITY_TOL), || {
            format!("pair {i}: mixed expansion residual {:e}", mixed.residual)
        });
        let pure = triple_self_expansion(&gp, &gp, &gp, &space).unwrap();
        note(&mut failures, pure.within(IDENTITY_TOL), || {
            format!("pair {i}: pure expansion residual {:e}", pure.residual)
        });
        let pair = pair_product_expansion(&gp, &gp, &space).unwrap();
        note(&mut failures, pair.within(IDENTITY_TOL), || {
            format!("pair {i}: pair expansion residual {:e}", pair.residual)
        });
        let freq = value_frequency_identity(g);
        note(&mut failures, freq.within(IDENTITY_TOL), || {
            format!("pair {i}: frequency identity residual {:e}", freq.residual)
        });
        let four = four_nat_expectation_expansion(f, g, &space).unwrap();
        note(&mut failures, four.within(IDENTITY_TOL), || {
            format!("pair {i}: four-variable residual {:e}", four.residual)
        });
        for (name, check) in [
            ("dec bound", fgg_dec_bound(f, g, &space).unwrap()),
            ("mean product", mean_product_bound(f, g)),
            ("pair even", pair_even_bound(g, &space).unwrap()),
            ("mixed even", fgg_even_bound(f, g, &space).unwrap()),
            ("pure even", ggg_even_bound(g, &space).unwrap()),
        ] {
            note(&mut failures, check.holds(IDENTITY_TOL), || {
                format!("pair {i}: {name} slack {:e}", check.slack)
            });
        }
    }

    // The indicator identity and the mean form of the pure-triple bound
    // hold for folded tables (and boundary tables); free random tables
    // over width-2 blocks genuinely break both.
    for i in 0..500 {
        let g = FunctionTable::random_folded(4, &mut rng).unwrap();
        let identity = indicator_triple_identity(&g, &space).unwrap();
        note(&mut failures, identity.within(IDENTITY_TOL), || {
            format!("folded {i}: indicator residual {:e}", identity.residual)
        });
        let mean = ggg_mean_bound(&g, &space).unwrap();
        note(&mut failures, mean.holds(IDENTITY_TOL), || {
            format!("folded {i}: mean bound slack {:e}", mean.slack)
        });
    }
    for (f, g) in &free_pairs[..3] {
        let _ = f;
        let identity = indicator_triple_identity(g, &space).unwrap();
        note(&mut failures, identity.within(IDENTITY_TOL), || {
            format!("boundary indicator residual {:e}", identity.residual)
        });
        let mean = ggg_mean_bound(g, &space).unwrap();
        note(&mut failures, mean.holds(IDENTITY_TOL), || {
            format!("boundary mean bound slack {:e}", mean.slack)
        });
    }

    // Hypothesis boundary, pinned: one width-2 table where the identity
    // leaves 1/18, the mean bound overshoots by 1/12, and the even-mass
    // penalty absorbs the overshoot with zero slack.
    let narrow = BlockMap::new(1, 2).unwrap();
    let narrow_space = FourNatSpace::new(narrow).unwrap();
    let pinned = FunctionTable::new(2, vec![2, 1, 2, 2, 2, 1, 2, 2, 1]).unwrap();
    let identity = indicator_triple_identity(&pinned, &narrow_space).unwrap();
    note(
        &mut failures,
        (identity.residual - 1.0 / 18.0).abs() < IDENTITY_TOL,
        || format!("pinned identity residual {:e}", identity.residual),
    );
    let mean = ggg_mean_bound(&pinned, &narrow_space).unwrap();
    note(
        &mut failures,
        (mean.slack + 1.0 / 12.0).abs() < IDENTITY_TOL,
        || format!("pinned mean bound slack {:e}", mean.slack),
    );
    let even = ggg_even_bound(&pinned, &narrow_space).unwrap();
    note(&mut failures, even.slack.abs() < IDENTITY_TOL, || {
        format!("pinned even bound slack {:e}", even.slack)
    });
    conclude("expansion-chain-random-tables", failures);
}

#[test]
fn criterion_07_folding_identity_on_random_and_boundary_tables() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..500 {
        let f = FunctionTable::random(4, &mut rng).unwrap();
        let p = to_f64(&shift_disagreement_probability(&f));
        let even = even_mass(&transform(&f));
        note(
            &mut failures,
            (p - (1.0 - even)).abs() < IDENTITY_TOL,
            || format!("table {i}: probability {p} vs 1 - even {even}"),
        );
    }
    let constant = FunctionTable::constant(4, 1).unwrap();
    note(
        &mut failures,
        shift_disagreement_probability(&constant) == int(0),
        || "constant table should never disagree with its shift".into(),
    );
    let dictator = FunctionTable::dictator(4, 2).unwrap();
    note(
        &mut failures,
        shift_disagreement_probability(&dictator) == int(1),
        || "dictator table should always disagree with its shift".into(),
    );
    conclude("folding-identity", failures);
}

#[test]
fn criterion_08_soundness_bounds_on_thousand_random_pairs() {
    let mut failures = Vec::new();
    let blocks = blocks22();
    let two_nlin = TwoNLinSpace::new(blocks).unwrap();
    let space = FourNatSpace::new(blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    for i in 0..1000 {
        let f = FunctionTable::random_folded(2, &mut rng).unwrap();
        let g = FunctionTable::random_folded(4, &mut rng).unwrap();
        let report = four_nat_soundness(&space, &f, &g, IDENTITY_TOL).unwrap();
        note(&mut failures, report.bound_satisfied, || {
            format!("folded pair {i}: {:?}", report.steps)
        });
    }
    for i in 0..1000 {
        let f = FunctionTable::random(2, &mut rng).unwrap();
        let g = FunctionTable::random(4, &mut rng).unwrap();
        let h = two_nlin.best_middle(&f, &g, false).unwrap();
        let report = three_coloring_soundness(&two_nlin, &space, &f, &g, &h, IDENTITY_TOL).unwrap();
        note(&mut failures, report.bound_satisfied, || {
            format!("free pair {i}: {:?}", report.steps)
        });
    }

    let (fm, gm) = matching_pair(&blocks).unwrap();
    let four_report = four_nat_soundness(&space, &fm, &gm, IDENTITY_TOL).unwrap();
    note(
        &mut failures,
        (to_f64(&four_report.pass_probability().unwrap()) - four_report.bound_rhs).abs()
            < IDENTITY_TOL,
        || "four-variable bound is not tight at matching dictators".into(),
    );
    let hm = two_nlin.best_middle(&fm, &gm, true).unwrap();
    let col_report =
        three_coloring_soundness(&two_nlin, &space, &fm, &gm, &hm, IDENTITY_TOL).unwrap();
    note(
        &mut failures,
        (to_f64(&col_report.pass_probability().unwrap()) - col_report.bound_rhs).abs()
            < IDENTITY_TOL,
        || "coloring bound is not tight at matching dictators".into(),
    );
    conclude("soundness-bounds", failures);
}

#[test]
fn criterion_09_coupling_identities_are_exact() {
    let mut failures = Vec::new();
    let blocks = blocks22();
    let two_nlin = TwoNLinSpace::new(blocks).unwrap();
    let four = FourNatSpace::new(blocks).unwrap();
    let coupled = CoupledSpace::new(blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    for j in 0..blocks.len() {
        let law = coupled.column_law(j);
        let uniform = coupled.len() as u64 / 18;
        note(
            &mut failures,
            law.len() == 18 && law.values().all(|&c| c == uniform),
            || format!("column {j} law is not uniform over 18 tuples"),
        );
    }

    let rewrites = coupled.rewrite_marginals();
    note(
        &mut failures,
        rewrites[0] == rewrites[1] && rewrites[1] == rewrites[2],
        || "rewrite marginals differ".into(),
    );

    let mut reference = std::collections::BTreeMap::new();
    for o in two_nlin.outcomes() {
        *reference.entry((o.x, o.y, o.z)).or_insert(0u64) += o.mult as u64;
    }
    note(
        &mut failures,
        coupled.xyz_marginal() == reference && coupled.scale() == two_nlin.scale(),
        || "coupled (x, y, z) marginal differs from the pair test".into(),
    );

    for i in 0..200 {
        let f = FunctionTable::random_folded(2, &mut rng).unwrap();
        let g = FunctionTable::random_folded(4, &mut rng).unwrap();
        note(
            &mut failures,
            coupled.four_nat_expectation(&f, &g).unwrap() == four.pass_probability(&f, &g).unwrap(),
            || format!("renaming identity differs on folded pair {i}"),
        );
    }

    for i in 0..200 {
        let f = FunctionTable::random(2, &mut rng).unwrap();
        let g = FunctionTable::random(4, &mut rng).unwrap();
        let h = FunctionTable::random(4, &mut rng).unwrap();
        let bound = hidden_gadget_inequality(&two_nlin, &coupled, &f, &g, &h).unwrap();
        note(&mut failures, bound.holds, || {
            format!("hidden gadget inequality fails on triple {i}")
        });
    }
    let (fm, gm) = matching_pair(&blocks).unwrap();
    let hm = two_nlin.best_middle(&fm, &gm, true).unwrap();
    let tight = hidden_gadget_inequality(&two_nlin, &coupled, &fm, &gm, &hm).unwrap();
    note(&mut failures, tight.holds && tight.lhs == tight.rhs, || {
        "hidden gadget inequality is not tight at matching dictators".into()
    });
    conclude("coupling-identities", failures);
}

#[test]
fn criterion_10_distributional_facts_are_exact() {
    let mut failures = Vec::new();

    let instance = CspInstance {
        vars: z3_vars(4),
        constraints: vec![
            Constraint {
                predicate: Predicate::FourNat {
                    shifts: [0, 0, 0, 0],
                },
                vars: vec![0, 1, 2, 3],
                weight: ratio(1, 3),
            },
            Constraint {
                predicate: Predicate::FourNat {
                    shifts: [1, 0, 2, 2],
                },
                vars: vec![3, 1, 0, 2],
                weight: ratio(2, 3),
            },
        ],
    };
    let mut total = int(0);
    for index in 0..81usize {
        let digits = index_to_digits(4, index).unwrap();
        let assignment: Vec<usize> = digits.iter().map(|&d| d as usize).collect();
        total += instance.value(&assignment).unwrap();
    }
    note(&mut failures, total / int(81) == ratio(5, 9), || {
        "uniform random assignment does not average 5/9".into()
    });
    note(
        &mut failures,
        Predicate::FourNat {
            shifts: [0, 0, 0, 0],
        }
        .random_tuple_probability()
            == ratio(5, 9),
        || "four-variable predicate satisfies other than 45 of 81 tuples".into(),
    );

    let mut satisfying = Vec::new();
    for index in 0..81usize {
        let d = index_to_digits(4, index).unwrap();
        let tuple = [d[0], d[1], d[2], d[3]];
        if two_pair(tuple) {
            satisfying.push(tuple);
        }
    }
    note(&mut failures, satisfying.len() == 18, || {
        format!("{} two-pair tuples instead of 18", satisfying.len())
    });
    for pos in 0..4 {
        for value in 0..3u8 {
            let count = satisfying.iter().filter(|t| t[pos] == value).count();
            note(&mut failures, count == 6, || {
                format!("marginal at position {pos}, value {value}: {count}/18")
            });
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            if a == b {
                continue;
            }
            for va in 0..3u8 {
                for vb in 0..3u8 {
                    let count = satisfying
                        .iter()
                        .filter(|t| t[a] == va && t[b] == vb)
                        .count();
                    note(&mut failures, count == 2, || {
                        format!("pair ({a}, {b}) = ({va}, {vb}): {count}/18")
                    });
                }
            }
        }
    }
    conclude("distributional-facts", failures);
}

#[test]
fn criterion_11_pipeline_end_to_end() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 1..=2usize {
        let (lc, labels_u, labels_v) = satisfiable_demo(k, 2, 2, 2, &mut rng).unwrap();
        note(
            &mut failures,
            lc.labeling_value(&labels_u, &labels_v).unwrap() == int(1),
            || format!("k {k}: planted labeling is not satisfying"),
        );
        let built = build_instance(&lc).unwrap();
        let (tu, tv) = dictator_tables(&lc, &labels_u, &labels_v).unwrap();
        let assignment = built.tables_to_assignment(&tu, &tv).unwrap();
        note(
            &mut failures,
            built.csp.value(&assignment).unwrap() == int(1),
            || format!("k {k}: dictator tables do not reach value 1"),
        );

        for (label, table) in labels_u.iter().zip(&tu).chain(labels_v.iter().zip(&tv)) {
            let probs = decode_spectrum(table).unwrap();
            let arg_max = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            note(
                &mut failures,
                arg_max == *label && (probs[*label] - 1.0).abs() < IDENTITY_TOL,
                || format!("k {k}: decoder mass {} at label {label}", probs[*label]),
            );
        }

        let space = FourNatSpace::new(built.blocks).unwrap();
        let mut from_edges = int(0);
        for (e_idx, edge) in lc.edges.iter().enumerate() {
            let reordered = edge_table(edge, &tv[edge.v]).unwrap();
            let pass = space.pass_probability(&tu[edge.u], &reordered).unwrap();
            let edge_value = built.edge_value(e_idx, &assignment).unwrap();
            note(
                &mut failures,
                edge_value == edge.weight.clone() * pass.clone(),
                || format!("k {k}: edge {e_idx} value differs from weighted pass"),
            );
            from_edges += edge_value;
        }
        note(
            &mut failures,
            from_edges == built.csp.value(&assignment).unwrap(),
            || format!("k {k}: edge values do not sum to the instance value"),
        );
    }
    conclude("pipeline-end-to-end", failures);
}

#[test]
fn criterion_12_cli_reports_are_deterministic() {
    let mut failures = Vec::new();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_csp3"))
            .args([
                "verify", "--suite", "fourier", "--K", "2", "--d", "2", "--trials", "10", "--seed",
                "123",
            ])
            .output()
            .unwrap()
    };
    let first = run();
    let second = run();
    note(&mut failures, first.status.success(), || {
        format!(
            "first run failed: {}",
            String::from_utf8_lossy(&first.stderr)
        )
    });
    note(&mut failures, first.stdout == second.stdout, || {
        "repeated runs differ on stdout".into()
    });
    note(&mut failures, !first.stdout.is_empty(), || {
        "report is empty".into()
    });
    conclude("cli-determinism", failures);
}
