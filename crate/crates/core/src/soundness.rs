//! Soundness bounds for the long-code tests.
//!
//! Each bound is verified as a chain of inequality steps. Exact pass
//! probabilities come from full enumeration; spectral quantities are
//! floating point with a pinned slack tolerance. A report records every
//! intermediate step so a failure pinpoints the broken link.

use serde::Serialize;

use crate::coupling::{FourNatSpace, TwoNLinSpace};
use crate::dictator::shift_disagreement_probability;
use crate::error::Result;
use crate::fourier::{dec_quantity, even_mass, transform, ComplexTable};
use crate::identities::{
    expect_xy, expect_xyz, expect_yz, expect_yzw, fgg_dec_bound, fgg_even_bound, ggg_even_bound,
    ggg_mean_bound, mean_product_bound, pair_even_bound, SlackCheck,
};
use crate::rational::{ratio, to_f64, RatioJson, Rational};
use crate::ternary::FunctionTable;

/// Default slack tolerance for the floating point steps.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// One link of an inequality chain: `lhs <= rhs` up to the tolerance the
/// chain was checked with.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityStep {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

fn step(name: &str, check: SlackCheck, tolerance: f64) -> InequalityStep {
    InequalityStep {
        name: name.to_string(),
        lhs: check.lhs,
        rhs: check.rhs,
        slack: check.slack,
        holds: check.holds(tolerance),
    }
}

fn vanishing_step(name: &str, value: f64, tolerance: f64) -> InequalityStep {
    InequalityStep {
        name: name.to_string(),
        lhs: value.abs(),
        rhs: 0.0,
        slack: -value.abs(),
        holds: value.abs() <= tolerance,
    }
}

/// Full record of one soundness check.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test: String,
    pub k: usize,
    pub d: usize,
    pub pass_probability: RatioJson,
    pub dec: f64,
    pub mean_f: f64,
    pub mean_g: f64,
    pub even_f: f64,
    pub even_g: f64,
    pub bound_rhs: f64,
    pub bound_satisfied: bool,
    pub steps: Vec<InequalityStep>,
}

impl TestReport {
    pub fn pass_probability(&self) -> Result<Rational> {
        self.pass_probability.to_rational()
    }
}

/// Soundness chain for the four-variable test with folded tables: the
/// cross and pair terms of the expectation expansion vanish under
/// folding, the mixed triple is controlled by the decoding quantity, and
/// the pure triple by its mean, leaving
/// `pass <= 2/3 + 2/3 dec`.
pub fn four_nat_soundness(
    space: &FourNatSpace,
    f: &FunctionTable,
    g: &FunctionTable,
    tolerance: f64,
) -> Result<TestReport> {
    f.require_folded()?;
    g.require_folded()?;
    let blocks = space.blocks();
    let pass = space.pass_probability(f, g)?;
    let f_spec = transform(f);
    let g_spec = transform(g);
    let dec = dec_quantity(&f_spec, &g_spec, blocks)?;
    let fp = ComplexTable::phases(f);
    let gp = ComplexTable::phases(g);
    let gc = gp.conjugate();

    let mut steps = vec![
        vanishing_step(
            "cross-term-vanishes",
            expect_xy(space, &fp, &gc).re,
            tolerance,
        ),
        vanishing_step(
            "pair-term-vanishes",
            expect_yz(space, &gp, &gc).re,
            tolerance,
        ),
        step(
            "mixed-triple-le-dec",
            fgg_dec_bound(f, g, space)?,
            tolerance,
        ),
        step("pure-triple-le-half", ggg_mean_bound(g, space)?, tolerance),
    ];
    let bound_rhs = 2.0 / 3.0 + 2.0 / 3.0 * dec;
    steps.push(step(
        "pass-le-final-bound",
        SlackCheck::raw(to_f64(&pass), bound_rhs),
        tolerance,
    ));
    let bound_satisfied = steps.iter().all(|s| s.holds);
    Ok(TestReport {
        test: "4nat".to_string(),
        k: blocks.blocks(),
        d: blocks.width(),
        pass_probability: RatioJson::from_rational(&pass)?,
        dec,
        mean_f: f_spec.at(0).norm(),
        mean_g: g_spec.at(0).norm(),
        even_f: even_mass(&f_spec),
        even_g: even_mass(&g_spec),
        bound_rhs,
        bound_satisfied,
        steps,
    })
}

/// Soundness chain for the 3-coloring test with arbitrary tables.
///
/// Writing `F`, `G` for the coefficient magnitudes at zero, `Ef`, `Eg`
/// for the even masses and `E4` for the four-variable expectation, the
/// chain is:
///
/// 1. `pass <= M` exactly, where
///    `M = 1/17 p_f + 4/17 p_g + 12/17 (3/4 + E4/4)`.
/// 2. `E4 <= 2/3 + 2/3 dec + 1/3 F^2 + 1/2 F G^2 + Eg (2/3 + F/6) +
///    1/12 (Eg - G^2)`. The last term is the free-table penalty of the
///    pure-triple bound; without it the step needs folded tables once
///    blocks have width 2 or more.
/// 3. Substituting 2 into `M`, using `p = 1 - even mass` exactly:
///    `M <= 16/17 - 1/17 Ef - (7 - 2F)/68 Eg + 1/17 F^2 + 3/34 F G^2 -
///    1/68 G^2 + 2/17 dec`.
/// 4. With `F^2 <= Ef` and `G^2 <= Eg` (the `Eg` coefficient stays
///    negative for `F <= 1`): the previous line is at most
///    `16/17 + 2/17 (F - 1) G^2 + 2/17 dec`; the penalty cancels here.
/// 5. With `F <= 1`: at most `16/17 + 2/17 dec`.
pub fn three_coloring_soundness(
    two_nlin: &TwoNLinSpace,
    space: &FourNatSpace,
    f: &FunctionTable,
    g: &FunctionTable,
    h: &FunctionTable,
    tolerance: f64,
) -> Result<TestReport> {
    let blocks = space.blocks();
    let p_f = shift_disagreement_probability(f);
    let p_g = shift_disagreement_probability(g);
    let pair = two_nlin.pass_probability_unfolded(f, g, h)?;
    let pass = (p_f.clone() + p_g.clone() * ratio(4, 1) + pair * ratio(12, 1)) / ratio(17, 1);
    let e4 = space.four_nat_expectation(f, g)?;
    let mixture =
        (p_f + p_g * ratio(4, 1) + (ratio(3, 4) + e4.clone() / ratio(4, 1)) * ratio(12, 1))
            / ratio(17, 1);

    let f_spec = transform(f);
    let g_spec = transform(g);
    let dec = dec_quantity(&f_spec, &g_spec, blocks)?;
    let mean_f = f_spec.at(0).norm();
    let mean_g = g_spec.at(0).norm();
    let even_f = even_mass(&f_spec);
    let even_g = even_mass(&g_spec);

    let exact_mixture_holds = pass <= mixture;
    let mut steps = vec![InequalityStep {
        name: "pass-le-mixture-exact".to_string(),
        lhs: to_f64(&pass),
        rhs: to_f64(&mixture),
        slack: to_f64(&(mixture.clone() - pass.clone())),
        holds: exact_mixture_holds,
    }];

    let b1 = 2.0 / 3.0
        + 2.0 / 3.0 * dec
        + 1.0 / 3.0 * mean_f * mean_f
        + 0.5 * mean_f * mean_g * mean_g
        + even_g * (2.0 / 3.0 + mean_f / 6.0)
        + (even_g - mean_g * mean_g) / 12.0;
    steps.push(step(
        "expansion-le-spectral-bound",
        SlackCheck::raw(to_f64(&e4), b1),
        tolerance,
    ));

    let s1 = 16.0 / 17.0 - even_f / 17.0 - (7.0 - 2.0 * mean_f) / 68.0 * even_g
        + mean_f * mean_f / 17.0
        + 3.0 / 34.0 * mean_f * mean_g * mean_g
        - mean_g * mean_g / 68.0
        + 2.0 / 17.0 * dec;
    steps.push(step(
        "mixture-le-even-form",
        SlackCheck::raw(to_f64(&mixture), s1),
        tolerance,
    ));

    let s2 = 16.0 / 17.0 + 2.0 / 17.0 * (mean_f - 1.0) * mean_g * mean_g + 2.0 / 17.0 * dec;
    steps.push(step(
        "even-form-le-mean-form",
        SlackCheck::raw(s1, s2),
        tolerance,
    ));

    let bound_rhs = 16.0 / 17.0 + 2.0 / 17.0 * dec;
    steps.push(step(
        "mean-form-le-final-bound",
        SlackCheck::raw(s2, bound_rhs),
        tolerance,
    ));
    steps.push(step(
        "pass-le-final-bound",
        SlackCheck::raw(to_f64(&pass), bound_rhs),
        tolerance,
    ));
    let bound_satisfied = steps.iter().all(|s| s.holds);
    Ok(TestReport {
        test: "3col".to_string(),
        k: blocks.blocks(),
        d: blocks.width(),
        pass_probability: RatioJson::from_rational(&pass)?,
        dec,
        mean_f,
        mean_g,
        even_f,
        even_g,
        bound_rhs,
        bound_satisfied,
        steps,
    })
}

/// Cross-check of the ingredients used by the mixture step: the
/// agreement probability of a table with its own all-ones shift equals
/// one minus its even mass.
pub fn shift_even_identity(f: &FunctionTable) -> SlackCheck {
    let p = to_f64(&shift_disagreement_probability(f));
    let even = even_mass(&transform(f));
    SlackCheck::raw((p - (1.0 - even)).abs(), 0.0)
}

/// The supporting inequalities for step 4 of the 3-coloring chain, as
/// standalone checks on a table pair.
pub fn supporting_bounds(
    f: &FunctionTable,
    g: &FunctionTable,
    space: &FourNatSpace,
) -> Result<Vec<(String, SlackCheck)>> {
    let f_spec = transform(f);
    let g_spec = transform(g);
    Ok(vec![
        (
            "mean-sq-le-even-f".to_string(),
            SlackCheck::raw(f_spec.at(0).norm_sqr(), even_mass(&f_spec)),
        ),
        (
            "mean-sq-le-even-g".to_string(),
            SlackCheck::raw(g_spec.at(0).norm_sqr(), even_mass(&g_spec)),
        ),
        ("mean-product".to_string(), mean_product_bound(f, g)),
        ("pair-le-even".to_string(), pair_even_bound(g, space)?),
        ("fgg-even".to_string(), fgg_even_bound(f, g, space)?),
        ("fgg-dec".to_string(), fgg_dec_bound(f, g, space)?),
        ("ggg-even".to_string(), ggg_even_bound(g, space)?),
    ])
}

/// Checks of the individual expansion terms against their direct
/// enumerations for one table pair; returns the worst residual.
pub fn expansion_terms_residual(
    f: &FunctionTable,
    g: &FunctionTable,
    space: &FourNatSpace,
) -> Result<f64> {
    let fp = ComplexTable::phases(f);
    let gp = ComplexTable::phases(g);
    let gc = gp.conjugate();
    let e4 = to_f64(&space.four_nat_expectation(f, g)?);
    let rhs = 5.0 / 9.0
        + 2.0 / 3.0 * expect_xy(space, &fp, &gc).re
        + 2.0 / 3.0 * expect_yz(space, &gp, &gc).re
        - 2.0 / 3.0 * expect_xyz(space, &fp, &gp, &gp).re
        - 2.0 / 9.0 * expect_yzw(space, &gp, &gp, &gp).re;
    Ok((e4 - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictator::{matching_pair, nonmatching_pair};
    use crate::rational::int;
    use crate::ternary::BlockMap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blocks22() -> BlockMap {
        BlockMap::new(2, 2).unwrap()
    }

    #[test]
    fn four_nat_bound_is_tight_on_matching_dictators() {
        let blocks = blocks22();
        let space = FourNatSpace::new(blocks).unwrap();
        let (f, g) = matching_pair(&blocks).unwrap();
        let report = four_nat_soundness(&space, &f, &g, SLACK_TOLERANCE).unwrap();
        assert!(report.bound_satisfied);
        assert_eq!(report.pass_probability().unwrap(), int(1));
        assert!((report.dec - 0.5).abs() < 1e-12);
        assert!((report.bound_rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_nat_bound_is_tight_on_nonmatching_dictators() {
        let blocks = blocks22();
        let space = FourNatSpace::new(blocks).unwrap();
        let (f, g) = nonmatching_pair(&blocks).unwrap();
        let report = four_nat_soundness(&space, &f, &g, SLACK_TOLERANCE).unwrap();
        assert!(report.bound_satisfied);
        assert_eq!(report.pass_probability().unwrap(), ratio(2, 3));
        assert!(report.dec.abs() < 1e-12);
        assert!((report.bound_rhs - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn four_nat_bound_holds_on_random_folded_tables() {
        let blocks = blocks22();
        let space = FourNatSpace::new(blocks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let f = FunctionTable::random_folded(2, &mut rng).unwrap();
            let g = FunctionTable::random_folded(4, &mut rng).unwrap();
            let report = four_nat_soundness(&space, &f, &g, SLACK_TOLERANCE).unwrap();
            assert!(report.bound_satisfied, "steps: {:?}", report.steps);
        }
    }

    #[test]
    fn three_coloring_bound_is_tight_on_dictators() {
        let blocks = blocks22();
        let two_nlin = TwoNLinSpace::new(blocks).unwrap();
        let space = FourNatSpace::new(blocks).unwrap();
        for (pair, expected) in [
            (matching_pair(&blocks), int(1)),
            (nonmatching_pair(&blocks), ratio(16, 17)),
        ] {
            let (f, g) = pair.unwrap();
            let h = two_nlin.best_middle(&f, &g, true).unwrap();
            let report =
                three_coloring_soundness(&two_nlin, &space, &f, &g, &h, SLACK_TOLERANCE).unwrap();
            assert!(report.bound_satisfied, "steps: {:?}", report.steps);
            assert_eq!(report.pass_probability().unwrap(), expected);
            assert!((to_f64(&expected) - report.bound_rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn three_coloring_bound_holds_on_random_tables() {
        let blocks = blocks22();
        let two_nlin = TwoNLinSpace::new(blocks).unwrap();
        let space = FourNatSpace::new(blocks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..25 {
            let f = FunctionTable::random(2, &mut rng).unwrap();
            let g = FunctionTable::random(4, &mut rng).unwrap();
            let h = FunctionTable::random(4, &mut rng).unwrap();
            let report =
                three_coloring_soundness(&two_nlin, &space, &f, &g, &h, SLACK_TOLERANCE).unwrap();
            assert!(report.bound_satisfied, "steps: {:?}", report.steps);
        }
    }

    #[test]
    fn three_coloring_bound_holds_with_the_best_middle() {
        let blocks = blocks22();
        let two_nlin = TwoNLinSpace::new(blocks).unwrap();
        let space = FourNatSpace::new(blocks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let f = FunctionTable::random(2, &mut rng).unwrap();
            let g = FunctionTable::random(4, &mut rng).unwrap();
            let h = two_nlin.best_middle(&f, &g, false).unwrap();
            let report =
                three_coloring_soundness(&two_nlin, &space, &f, &g, &h, SLACK_TOLERANCE).unwrap();
            assert!(report.bound_satisfied, "steps: {:?}", report.steps);
        }
    }

    #[test]
    fn shift_even_identity_and_supports_hold() {
        let blocks = blocks22();
        let space = FourNatSpace::new(blocks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..10 {
            let f = FunctionTable::random(2, &mut rng).unwrap();
            let g = FunctionTable::random(4, &mut rng).unwrap();
            assert!(shift_even_identity(&f).lhs < 1e-9);
            assert!(shift_even_identity(&g).lhs < 1e-9);
            for (name, check) in supporting_bounds(&f, &g, &space).unwrap() {
                assert!(check.holds(SLACK_TOLERANCE), "{name}: {check:?}");
            }
            assert!(expansion_terms_residual(&f, &g, &space).unwrap() < 1e-9);
        }
    }
}
