//! Verification suites behind `csp3 verify`.
//!
//! Every check records an id, the expected and observed values as
//! strings, the tolerance it was judged with, and a pass flag. Exact
//! rational facts use tolerance 0; spectral quantities use the suite
//! tolerance. All randomness comes from one seeded stream, so a report
//! is a pure function of the flags.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use csp3::coupling::{CoupledSpace, FourNatSpace, TwoNLinSpace};
use csp3::csp::{z3_vars, Constraint, CspInstance, Predicate};
use csp3::dictator::{
    hidden_gadget_inequality, matching_pair, nonmatching_pair, shift_disagreement_probability,
    three_coloring_pass_probability,
};
use csp3::error::Error;
use csp3::fourier::{
    alpha_weight, dec_quantity, even_mass, omega_pow, transform, unit_alpha, ComplexTable,
};
use csp3::gadgets::{
    apply_gadget, verify_gamma, DecisionThresholds, FourNatToProjection, FourNatToTwoNLin, Gadget,
    TwoNLinToProjection,
};
use csp3::identities::{
    arithmetization_residual, character_block_closed_form, character_block_expectation,
    fgg_dec_bound, fgg_even_bound, four_nat_expectation_expansion, ggg_even_bound, ggg_mean_bound,
    indicator_triple_identity, mean_product_bound, pair_even_bound, pair_product_expansion,
    triple_product_expansion, triple_self_expansion, value_frequency_identity,
};
use csp3::longcode::{
    build_instance, decode_spectrum, decoding_bound, dictator_tables, edge_table,
    expected_decoded_value, good_alpha_set, satisfiable_demo,
};
use csp3::rational::{display, int, ratio, to_f64, Rational};
use csp3::soundness::{four_nat_soundness, shift_even_identity, three_coloring_soundness};
use csp3::ternary::{BlockMap, FunctionTable, POW3};

use crate::{write_artifact, SuiteName, VerifyArgs};

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub k: usize,
    pub d: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    #[serde(skip)]
    pub wall_time_ms: u128,
}

fn suite_label(name: SuiteName) -> &'static str {
    match name {
        SuiteName::Gadgets => "gadgets",
        SuiteName::Tests => "tests",
        SuiteName::Fourier => "fourier",
        SuiteName::Appendix => "appendix",
        SuiteName::All => "all",
    }
}

pub fn run(args: &VerifyArgs) -> Result<bool, Error> {
    let started = Instant::now();
    let mut report = build_report(args)?;
    report.wall_time_ms = started.elapsed().as_millis();
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
    eprintln!(
        "suite {} finished in {} ms: {}",
        report.suite,
        report.wall_time_ms,
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(report.pass)
}

pub fn build_report(args: &VerifyArgs) -> Result<SuiteReport, Error> {
    if args.trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut checks = Vec::new();
    match args.suite {
        SuiteName::Gadgets => gadget_checks(&mut checks)?,
        SuiteName::Tests => test_checks(&mut checks, args, &mut rng)?,
        SuiteName::Fourier => fourier_checks(&mut checks, args, &mut rng)?,
        SuiteName::Appendix => appendix_checks(&mut checks, args, &mut rng)?,
        SuiteName::All => {
            gadget_checks(&mut checks)?;
            test_checks(&mut checks, args, &mut rng)?;
            fourier_checks(&mut checks, args, &mut rng)?;
            appendix_checks(&mut checks, args, &mut rng)?;
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        suite: suite_label(args.suite).to_string(),
        seed: args.seed,
        k: args.k,
        d: args.d,
        trials: args.trials,
        tolerance: args.tolerance,
        pass,
        checks,
        wall_time_ms: 0,
    })
}

fn exact_check(id: &str, expected: &Rational, observed: &Rational) -> CheckRecord {
    CheckRecord {
        id: id.to_string(),
        expected: display(expected),
        observed: display(observed),
        tolerance: 0.0,
        pass: expected == observed,
    }
}

fn residual_check(id: &str, worst: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        id: id.to_string(),
        expected: format!("residual <= {tolerance:e}"),
        observed: format!("{worst:.3e}"),
        tolerance,
        pass: worst <= tolerance,
    }
}

fn slack_check(id: &str, worst_slack: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        id: id.to_string(),
        expected: format!("slack >= -{tolerance:e}"),
        observed: format!("{worst_slack:.3e}"),
        tolerance,
        pass: worst_slack >= -tolerance,
    }
}

fn count_check(id: &str, holding: usize, total: usize) -> CheckRecord {
    CheckRecord {
        id: id.to_string(),
        expected: format!("{total}/{total}"),
        observed: format!("{holding}/{total}"),
        tolerance: 0.0,
        pass: holding == total,
    }
}

fn flag_check(id: &str, expected: &str, observed: String, pass: bool) -> CheckRecord {
    CheckRecord {
        id: id.to_string(),
        expected: expected.to_string(),
        observed,
        tolerance: 0.0,
        pass,
    }
}

fn gamma_check(id: &str, gadget: &dyn Gadget, source: &Predicate) -> Result<CheckRecord, Error> {
    let report = verify_gamma(gadget, source)?;
    let expected = report.gamma_expected.to_rational()?;
    let observed = report.gamma_observed.to_rational()?;
    Ok(CheckRecord {
        id: id.to_string(),
        expected: display(&expected),
        observed: format!(
            "{} (completeness {}, uniform soundness {})",
            display(&observed),
            report.completeness_exact,
            report.soundness_uniform
        ),
        tolerance: 0.0,
        pass: report.pass,
    })
}

fn gadget_checks(checks: &mut Vec<CheckRecord>) -> Result<(), Error> {
    for shifts in [[0u8, 0, 0, 0], [1, 2, 0, 1], [2, 2, 2, 2]] {
        checks.push(gamma_check(
            &format!(
                "gadgets/4nat-to-2nlin-gamma-{}{}{}{}",
                shifts[0], shifts[1], shifts[2], shifts[3]
            ),
            &FourNatToTwoNLin,
            &Predicate::FourNat { shifts },
        )?);
    }
    for forbidden in 0..3u8 {
        checks.push(gamma_check(
            &format!("gadgets/2nlin-to-labelcover-gamma-{forbidden}"),
            &TwoNLinToProjection,
            &Predicate::TwoNLin { forbidden },
        )?);
    }
    checks.push(gamma_check(
        "gadgets/4nat-to-labelcover-gamma",
        &FourNatToProjection,
        &Predicate::FourNat {
            shifts: [0, 1, 2, 0],
        },
    )?);

    // Both projections of the pair gadget must be 2-to-1.
    let expansion = TwoNLinToProjection.expand(&Predicate::TwoNLin { forbidden: 0 })?;
    let mut all_balanced = true;
    let mut described = Vec::new();
    for (pred, _, _) in &expansion.constraints {
        if let Predicate::Projection { map, range } = pred {
            let mut counts = vec![0usize; *range];
            for &t in map {
                counts[t] += 1;
            }
            all_balanced &= counts.iter().all(|&c| c == map.len() / range);
            described.push(format!("{counts:?}"));
        }
    }
    checks.push(flag_check(
        "gadgets/projection-preimage-counts",
        "[2, 2, 2] for both projections",
        described.join(", "),
        all_balanced && described.len() == 2,
    ));

    let base = DecisionThresholds::new(int(1), ratio(2, 3));
    let after_pair = base.compose(&ratio(3, 4));
    checks.push(exact_check(
        "gadgets/threshold-after-4nat-to-2nlin",
        &ratio(11, 12),
        &after_pair.soundness,
    ));
    checks.push(exact_check(
        "gadgets/threshold-completeness-preserved",
        &int(1),
        &after_pair.completeness,
    ));
    let after_projection = after_pair.compose(&ratio(1, 2));
    checks.push(exact_check(
        "gadgets/threshold-after-2nlin-to-labelcover",
        &ratio(23, 24),
        &after_projection.soundness,
    ));
    checks.push(exact_check(
        "gadgets/threshold-direct-composition-agrees",
        &after_projection.soundness,
        &base.compose(&ratio(7, 8)).soundness,
    ));

    // Instance-level optimum transport through the first gadget. The
    // second constraint reads (a, a+1, a+2, a), always onto, so it is
    // never satisfied and the source optimum is exactly 1/2.
    let source = CspInstance {
        vars: z3_vars(3),
        constraints: vec![
            Constraint {
                predicate: Predicate::FourNat {
                    shifts: [0, 0, 0, 0],
                },
                vars: vec![0, 1, 2, 0],
                weight: ratio(1, 2),
            },
            Constraint {
                predicate: Predicate::FourNat {
                    shifts: [0, 1, 2, 0],
                },
                vars: vec![1, 1, 1, 1],
                weight: ratio(1, 2),
            },
        ],
    };
    let (opt, _) = source.optimum()?;
    checks.push(exact_check(
        "gadgets/apply-source-optimum",
        &ratio(1, 2),
        &opt,
    ));
    let target = apply_gadget(&source, &FourNatToTwoNLin)?;
    let (target_opt, _) = target.optimum()?;
    let predicted = opt.clone() + (int(1) - opt) * ratio(3, 4);
    checks.push(exact_check(
        "gadgets/apply-optimum-transport",
        &predicted,
        &target_opt,
    ));
    checks.push(exact_check(
        "gadgets/apply-preserves-total-weight",
        &int(1),
        &target.total_weight(),
    ));
    Ok(())
}

fn random_pair<R: Rng + ?Sized>(
    blocks: &BlockMap,
    folded: bool,
    rng: &mut R,
) -> Result<(FunctionTable, FunctionTable), Error> {
    let (k, l) = (blocks.blocks(), blocks.len());
    if folded {
        Ok((
            FunctionTable::random_folded(k, rng)?,
            FunctionTable::random_folded(l, rng)?,
        ))
    } else {
        Ok((
            FunctionTable::random(k, rng)?,
            FunctionTable::random(l, rng)?,
        ))
    }
}

fn test_checks(
    checks: &mut Vec<CheckRecord>,
    args: &VerifyArgs,
    rng: &mut ChaCha8Rng,
) -> Result<(), Error> {
    let blocks = BlockMap::new(args.k, args.d)?;
    let two_nlin = TwoNLinSpace::new(blocks)?;
    let four = FourNatSpace::new(blocks)?;
    let coupled = CoupledSpace::new(blocks)?;
    let tol = args.tolerance;

    checks.push(exact_check(
        "tests/two-nlin-total-weight",
        &int(1),
        &two_nlin.total_weight(),
    ));
    let reference = TwoNLinSpace::new(BlockMap::new(1, 1)?)?;
    checks.push(exact_check(
        "tests/outcome-count-at-1-1",
        &int(12),
        &int(reference.outcomes().len() as i64),
    ));

    let (f_match, g_match) = matching_pair(&blocks)?;
    let h_match = two_nlin.best_middle(&f_match, &g_match, true)?;
    checks.push(exact_check(
        "tests/matching-2nlin-pass",
        &int(1),
        &two_nlin.pass_probability(&f_match, &g_match, &h_match)?,
    ));
    checks.push(exact_check(
        "tests/matching-3col-pass",
        &int(1),
        &three_coloring_pass_probability(&two_nlin, &f_match, &g_match, &h_match)?,
    ));
    checks.push(exact_check(
        "tests/matching-4nat-pass",
        &int(1),
        &four.pass_probability(&f_match, &g_match)?,
    ));

    if args.k >= 2 {
        let (f_non, g_non) = nonmatching_pair(&blocks)?;
        let h_non = two_nlin.best_middle(&f_non, &g_non, true)?;
        checks.push(exact_check(
            "tests/nonmatching-2nlin-pass",
            &ratio(11, 12),
            &two_nlin.pass_probability(&f_non, &g_non, &h_non)?,
        ));
        checks.push(exact_check(
            "tests/nonmatching-3col-pass",
            &ratio(16, 17),
            &three_coloring_pass_probability(&two_nlin, &f_non, &g_non, &h_non)?,
        ));
        checks.push(exact_check(
            "tests/nonmatching-4nat-pass",
            &ratio(2, 3),
            &four.pass_probability(&f_non, &g_non)?,
        ));
    }

    let f_const = FunctionTable::constant(blocks.blocks(), 0)?;
    let g_const = FunctionTable::constant(blocks.len(), 0)?;
    let h_const = FunctionTable::constant(blocks.len(), 1)?;
    checks.push(exact_check(
        "tests/constant-3col-pass",
        &ratio(12, 17),
        &three_coloring_pass_probability(&two_nlin, &f_const, &g_const, &h_const)?,
    ));
    checks.push(exact_check(
        "tests/dictator-folding-probability",
        &int(1),
        &shift_disagreement_probability(&g_match),
    ));
    checks.push(exact_check(
        "tests/constant-folding-probability",
        &int(0),
        &shift_disagreement_probability(&g_const),
    ));

    // The folded best middle attains the unrestricted optimum.
    let mut equal = 0usize;
    for _ in 0..args.trials {
        let (f, g) = random_pair(&blocks, true, rng)?;
        let free = two_nlin.best_middle(&f, &g, false)?;
        let folded = two_nlin.best_middle(&f, &g, true)?;
        if two_nlin.pass_probability_unfolded(&f, &g, &free)?
            == two_nlin.pass_probability_unfolded(&f, &g, &folded)?
        {
            equal += 1;
        }
    }
    checks.push(count_check(
        "tests/folded-best-middle-attains-optimum",
        equal,
        args.trials,
    ));

    let mut held = 0usize;
    for _ in 0..args.trials {
        let (f, g) = random_pair(&blocks, true, rng)?;
        if four_nat_soundness(&four, &f, &g, tol)?.bound_satisfied {
            held += 1;
        }
    }
    checks.push(count_check(
        "tests/4nat-soundness-random",
        held,
        args.trials,
    ));

    let mut held = 0usize;
    for trial in 0..args.trials {
        let (f, g) = random_pair(&blocks, false, rng)?;
        let h = if trial % 2 == 0 {
            FunctionTable::random(blocks.len(), rng)?
        } else {
            two_nlin.best_middle(&f, &g, false)?
        };
        if three_coloring_soundness(&two_nlin, &four, &f, &g, &h, tol)?.bound_satisfied {
            held += 1;
        }
    }
    checks.push(count_check(
        "tests/3col-soundness-random",
        held,
        args.trials,
    ));

    let matching_report = four_nat_soundness(&four, &f_match, &g_match, tol)?;
    checks.push(residual_check(
        "tests/4nat-soundness-tight-at-matching-dictators",
        (to_f64(&matching_report.pass_probability()?) - matching_report.bound_rhs).abs(),
        tol,
    ));
    let col_report = three_coloring_soundness(&two_nlin, &four, &f_match, &g_match, &h_match, tol)?;
    checks.push(residual_check(
        "tests/3col-soundness-tight-at-matching-dictators",
        (to_f64(&col_report.pass_probability()?) - col_report.bound_rhs).abs(),
        tol,
    ));

    let mut held = 0usize;
    for _ in 0..args.trials {
        let f = FunctionTable::random(blocks.blocks(), rng)?;
        let g = FunctionTable::random(blocks.len(), rng)?;
        let h = FunctionTable::random(blocks.len(), rng)?;
        if hidden_gadget_inequality(&two_nlin, &coupled, &f, &g, &h)?.holds {
            held += 1;
        }
    }
    checks.push(count_check("tests/hidden-gadget-random", held, args.trials));

    let bound = hidden_gadget_inequality(&two_nlin, &coupled, &f_match, &g_match, &h_match)?;
    checks.push(exact_check(
        "tests/hidden-gadget-tight-at-matching-dictators",
        &bound.rhs,
        &bound.lhs,
    ));

    // Coupled distribution facts: per-coordinate law uniform over the 18
    // valid tuples, (x, y, z) marginal identical to the pair test, both
    // rewrites distributed like y given (x, z).
    let mut law_ok = true;
    for j in 0..blocks.len() {
        let law = coupled.column_law(j);
        let uniform = coupled.len() as u64 / 18;
        law_ok &= law.len() == 18 && law.values().all(|&c| c == uniform);
    }
    checks.push(flag_check(
        "tests/coupled-column-law-uniform-18",
        "18 tuples, equal counts",
        format!("{law_ok}"),
        law_ok,
    ));

    let mut reference: BTreeMap<(u32, u32, u32), u64> = BTreeMap::new();
    for o in two_nlin.outcomes() {
        *reference.entry((o.x, o.y, o.z)).or_insert(0) += o.mult as u64;
    }
    let marginal_ok = coupled.xyz_marginal() == reference && coupled.scale() == two_nlin.scale();
    checks.push(flag_check(
        "tests/coupled-xyz-marginal-matches-pair-test",
        "identical count maps",
        format!("{marginal_ok}"),
        marginal_ok,
    ));

    let rewrites = coupled.rewrite_marginals();
    let rewrites_ok = rewrites[0] == rewrites[1] && rewrites[1] == rewrites[2];
    checks.push(flag_check(
        "tests/rewrite-marginals-agree",
        "three identical count maps",
        format!("{rewrites_ok}"),
        rewrites_ok,
    ));

    let mut equal = 0usize;
    for trial in 0..args.trials {
        let (f, g) = random_pair(&blocks, trial % 2 == 0, rng)?;
        if coupled.four_nat_expectation(&f, &g)? == four.four_nat_expectation(&f, &g)? {
            equal += 1;
        }
    }
    checks.push(count_check(
        "tests/renaming-identity-exact",
        equal,
        args.trials,
    ));

    checks.push(exact_check(
        "tests/block-ambiguity-probability",
        &ratio(1, 1 << (args.d - 1)),
        &two_nlin.block_ambiguity_probability(),
    ));

    let mut worst = f64::INFINITY;
    for _ in 0..args.trials {
        let (f, g) = random_pair(&blocks, true, rng)?;
        worst = worst.min(decoding_bound(&four, &f, &g)?.slack);
    }
    checks.push(slack_check("tests/decoding-bound", worst, tol));

    let mut held = 0usize;
    for _ in 0..args.trials {
        let (f, g) = random_pair(&blocks, true, rng)?;
        if good_alpha_set(&f, &g, &blocks, 0.25)?.consequences_hold {
            held += 1;
        }
    }
    checks.push(count_check(
        "tests/good-alpha-consequences",
        held,
        args.trials,
    ));

    // End-to-end pipeline on a two-by-two demo.
    let (lc, labels_u, labels_v) = satisfiable_demo(args.k, args.d, 2, 2, rng)?;
    checks.push(exact_check(
        "tests/pipeline-demo-is-satisfiable",
        &int(1),
        &lc.labeling_value(&labels_u, &labels_v)?,
    ));
    let built = build_instance(&lc)?;
    let (tu, tv) = dictator_tables(&lc, &labels_u, &labels_v)?;
    let assignment = built.tables_to_assignment(&tu, &tv)?;
    checks.push(exact_check(
        "tests/pipeline-dictator-value",
        &int(1),
        &built.csp.value(&assignment)?,
    ));

    let space = FourNatSpace::new(built.blocks)?;
    let mut equal_edges = 0usize;
    let rf = FunctionTable::random_folded(blocks.blocks(), rng)?;
    let rgs: Vec<FunctionTable> = (0..lc.n_v)
        .map(|_| FunctionTable::random_folded(blocks.len(), rng))
        .collect::<Result<_, _>>()?;
    let random_assignment = built.tables_to_assignment(&vec![rf.clone(); lc.n_u], &rgs)?;
    for (e_idx, edge) in lc.edges.iter().enumerate() {
        let reordered = edge_table(edge, &rgs[edge.v])?;
        let pass = space.pass_probability(&rf, &reordered)?;
        if built.edge_value(e_idx, &random_assignment)? == edge.weight.clone() * pass {
            equal_edges += 1;
        }
    }
    checks.push(count_check(
        "tests/pipeline-edge-identity",
        equal_edges,
        lc.edges.len(),
    ));

    let mut recovered = true;
    for (j, table) in tv.iter().enumerate() {
        let probs = decode_spectrum(table)?;
        let arg_max = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(usize::MAX);
        recovered &= arg_max == labels_v[j];
    }
    for (i, table) in tu.iter().enumerate() {
        let probs = decode_spectrum(table)?;
        let arg_max = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(usize::MAX);
        recovered &= arg_max == labels_u[i];
    }
    checks.push(flag_check(
        "tests/pipeline-decode-recovers-labeling",
        "argmax label per vertex",
        format!("{recovered}"),
        recovered,
    ));
    checks.push(residual_check(
        "tests/pipeline-expected-decoded-value",
        (expected_decoded_value(&lc, &tu, &tv)? - 1.0).abs(),
        tol,
    ));
    Ok(())
}

/// Direct quadratic-time transform used as an independent reference.
fn naive_spectrum(table: &ComplexTable) -> Vec<num_complex::Complex64> {
    let n = table.n();
    let size = POW3[n];
    let mut coeffs = Vec::with_capacity(size);
    for alpha in 0..size {
        let mut sum = num_complex::Complex64::new(0.0, 0.0);
        for x in 0..size {
            let mut dot = 0u8;
            let (mut ra, mut rx) = (alpha, x);
            for _ in 0..n {
                dot = (dot + ((ra % 3) * (rx % 3)) as u8) % 3;
                ra /= 3;
                rx /= 3;
            }
            sum += table.value_at(x) * omega_pow(dot).conj();
        }
        coeffs.push(sum / size as f64);
    }
    coeffs
}

fn fourier_checks(
    checks: &mut Vec<CheckRecord>,
    args: &VerifyArgs,
    rng: &mut ChaCha8Rng,
) -> Result<(), Error> {
    let blocks = BlockMap::new(args.k, args.d)?;
    let l = blocks.len();
    let tol = args.tolerance;

    let mut worst = 0.0f64;
    for _ in 0..args.trials {
        let f = FunctionTable::random(l, rng)?;
        worst = worst.max((transform(&f).total_mass() - 1.0).abs());
    }
    checks.push(residual_check("fourier/parseval", worst, tol));

    let mut worst = 0.0f64;
    for _ in 0..args.trials {
        let f = FunctionTable::random_folded(l, rng)?;
        let spec = transform(&f);
        for alpha in 0..POW3[l] {
            if alpha_weight(l, alpha) % 3 != 1 {
                worst = worst.max(spec.at(alpha).norm());
            }
        }
    }
    checks.push(residual_check("fourier/folded-support", worst, tol));

    let dict = FunctionTable::dictator(l, 0)?;
    let spec = transform(&dict);
    let mut worst = (spec.at(unit_alpha(0)) - num_complex::Complex64::new(1.0, 0.0)).norm();
    for alpha in 0..POW3[l] {
        if alpha != unit_alpha(0) {
            worst = worst.max(spec.at(alpha).norm());
        }
    }
    checks.push(residual_check("fourier/dictator-spectrum", worst, tol));

    let mut worst = 0.0f64;
    let small = l.min(3);
    for _ in 0..args.trials {
        let f = FunctionTable::random(small, rng)?;
        let table = ComplexTable::phases(&f);
        let fast = csp3::fourier::transform_complex(&table);
        let slow = naive_spectrum(&table);
        for (alpha, reference) in slow.iter().enumerate() {
            worst = worst.max((fast.at(alpha) - reference).norm());
        }
    }
    checks.push(residual_check("fourier/naive-dft-agrees", worst, tol));

    let mut worst = 0.0f64;
    for _ in 0..args.trials {
        let f = FunctionTable::random(l, rng)?;
        let table = ComplexTable::phases(&f);
        let back = csp3::fourier::inverse(&csp3::fourier::transform_complex(&table));
        for idx in 0..POW3[l] {
            worst = worst.max((table.value_at(idx) - back.value_at(idx)).norm());
        }
    }
    checks.push(residual_check("fourier/inverse-round-trip", worst, tol));

    let mut worst = f64::INFINITY;
    for _ in 0..args.trials {
        let f = FunctionTable::random(l, rng)?;
        let spec = transform(&f);
        worst = worst.min(even_mass(&spec) - spec.at(0).norm_sqr());
    }
    checks.push(slack_check("fourier/mean-mass-le-even-mass", worst, tol));

    checks.push(residual_check(
        "fourier/arithmetization-all-tuples",
        arithmetization_residual(),
        1e-12,
    ));

    let mut worst = 0.0f64;
    for beta in 0..3u8 {
        for gamma in 0..3u8 {
            for a in 0..3u8 {
                worst = worst.max(
                    (character_block_expectation(beta, gamma, a)
                        - character_block_closed_form(beta, gamma, a))
                    .norm(),
                );
            }
        }
    }
    checks.push(residual_check(
        "fourier/character-block-closed-form",
        worst,
        1e-12,
    ));

    let (f_match, g_match) = matching_pair(&blocks)?;
    let dec = dec_quantity(&transform(&f_match), &transform(&g_match), &blocks)?;
    checks.push(residual_check(
        "fourier/dec-at-matching-dictators",
        (dec - 0.5).abs(),
        tol,
    ));

    let mut worst = 0.0f64;
    for _ in 0..args.trials {
        let f = FunctionTable::random(l, rng)?;
        worst = worst.max(shift_even_identity(&f).lhs);
    }
    checks.push(residual_check("fourier/shift-even-identity", worst, tol));
    Ok(())
}

fn appendix_checks(
    checks: &mut Vec<CheckRecord>,
    args: &VerifyArgs,
    rng: &mut ChaCha8Rng,
) -> Result<(), Error> {
    let blocks = BlockMap::new(args.k, args.d)?;
    let space = FourNatSpace::new(blocks)?;
    let l = blocks.len();
    let tol = args.tolerance;

    let boundary: Vec<(FunctionTable, FunctionTable)> = vec![
        (
            FunctionTable::constant(blocks.blocks(), 0)?,
            FunctionTable::constant(l, 2)?,
        ),
        (matching_pair(&blocks)?.0, matching_pair(&blocks)?.1),
        (
            FunctionTable::dictator(blocks.blocks(), blocks.blocks() - 1)?,
            FunctionTable::dictator(l, l - 1)?,
        ),
    ];
    let boundary_count = boundary.len();
    let mut pairs: Vec<(FunctionTable, FunctionTable)> = boundary;
    for _ in 0..args.trials {
        pairs.push(random_pair(&blocks, false, rng)?);
    }

    let mut mixed = 0.0f64;
    let mut pair_exp = 0.0f64;
    let mut freq = 0.0f64;
    let mut expansion = 0.0f64;
    let mut dec_slack = f64::INFINITY;
    let mut mean_slack = f64::INFINITY;
    let mut even_slack = f64::INFINITY;
    let mut fgg_slack = f64::INFINITY;
    let mut ggg_even_slack = f64::INFINITY;
    for (f, g) in &pairs {
        let fp = ComplexTable::phases(f);
        let gp = ComplexTable::phases(g);
        mixed = mixed.max(triple_product_expansion(&fp, &gp, &gp, &space)?.residual);
        pair_exp = pair_exp.max(pair_product_expansion(&gp, &gp, &space)?.residual);
        freq = freq.max(value_frequency_identity(g).residual);
        expansion = expansion.max(four_nat_expectation_expansion(f, g, &space)?.residual);
        dec_slack = dec_slack.min(fgg_dec_bound(f, g, &space)?.slack);
        mean_slack = mean_slack.min(mean_product_bound(f, g).slack);
        even_slack = even_slack.min(pair_even_bound(g, &space)?.slack);
        fgg_slack = fgg_slack.min(fgg_even_bound(f, g, &space)?.slack);
        ggg_even_slack = ggg_even_slack.min(ggg_even_bound(g, &space)?.slack);
    }

    // The indicator identity and the mean form of the pure triple bound
    // need folded tables once blocks are wider than one digit, so they
    // get their own folded sample; the boundary tables satisfy both.
    let mut indicator = 0.0f64;
    let mut ggg_slack = f64::INFINITY;
    for (_, g) in &pairs[..boundary_count] {
        indicator = indicator.max(indicator_triple_identity(g, &space)?.residual);
        ggg_slack = ggg_slack.min(ggg_mean_bound(g, &space)?.slack);
    }
    for _ in 0..args.trials {
        let g = FunctionTable::random_folded(l, rng)?;
        indicator = indicator.max(indicator_triple_identity(&g, &space)?.residual);
        ggg_slack = ggg_slack.min(ggg_mean_bound(&g, &space)?.slack);
    }

    checks.push(residual_check(
        "appendix/mixed-triple-expansion",
        mixed,
        tol,
    ));
    checks.push(residual_check("appendix/pair-expansion", pair_exp, tol));
    checks.push(residual_check(
        "appendix/value-frequency-identity",
        freq,
        tol,
    ));
    checks.push(residual_check(
        "appendix/indicator-triple-identity",
        indicator,
        tol,
    ));
    checks.push(residual_check(
        "appendix/four-variable-expansion",
        expansion,
        tol,
    ));
    checks.push(slack_check(
        "appendix/mixed-triple-dec-bound",
        dec_slack,
        tol,
    ));
    checks.push(slack_check("appendix/mean-product-bound", mean_slack, tol));
    checks.push(slack_check("appendix/pair-even-bound", even_slack, tol));
    checks.push(slack_check(
        "appendix/mixed-triple-even-bound",
        fgg_slack,
        tol,
    ));
    checks.push(slack_check(
        "appendix/pure-triple-mean-bound",
        ggg_slack,
        tol,
    ));
    checks.push(slack_check(
        "appendix/pure-triple-even-bound",
        ggg_even_slack,
        tol,
    ));

    // The pure triple expansion is cubic in the table size; keep the
    // trial count proportionate on larger domains.
    let triple_trials = if l > 4 {
        args.trials.min(3)
    } else {
        args.trials
    };
    let mut worst = 0.0f64;
    for i in 0..triple_trials + 1 {
        let g = if i == 0 {
            FunctionTable::dictator(l, 0)?
        } else {
            FunctionTable::random(l, rng)?
        };
        let gp = ComplexTable::phases(&g);
        worst = worst.max(triple_self_expansion(&gp, &gp, &gp, &space)?.residual);
    }
    checks.push(residual_check("appendix/pure-triple-expansion", worst, tol));
    Ok(())
}
