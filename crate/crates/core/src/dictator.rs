//! Canonical long-code test configurations: matching and nonmatching
//! dictator pairs, the folding check on a single table, the 3-coloring
//! test mixture, and the hidden-gadget inequality relating the
//! two-disequation test to the four-variable expectation.

use num_bigint::BigInt;
use num_rational::Ratio;

use crate::coupling::{CoupledSpace, TwoNLinSpace};
use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};
use crate::ternary::{shift_index, BlockMap, FunctionTable, POW3};

/// Dictator pair reading a shared source coordinate: `f` reads small-side
/// coordinate 0 and `g` reads large-side coordinate 0, which projects to
/// block 0.
pub fn matching_pair(blocks: &BlockMap) -> Result<(FunctionTable, FunctionTable)> {
    Ok((
        FunctionTable::dictator(blocks.blocks(), 0)?,
        FunctionTable::dictator(blocks.len(), 0)?,
    ))
}

/// Dictator pair whose coordinates disagree at the block level: `g` reads
/// the first coordinate of block 1 while `f` still reads block 0.
pub fn nonmatching_pair(blocks: &BlockMap) -> Result<(FunctionTable, FunctionTable)> {
    if blocks.blocks() < 2 {
        return Err(Error::Invalid(
            "a nonmatching pair needs at least two blocks".into(),
        ));
    }
    Ok((
        FunctionTable::dictator(blocks.blocks(), 0)?,
        FunctionTable::dictator(blocks.len(), blocks.width())?,
    ))
}

/// Exact probability that `f(x + 1) != f(x)` under uniform `x`, where the
/// shift adds one to every coordinate. Folded tables score exactly 1 and
/// constants exactly 0.
pub fn shift_disagreement_probability(f: &FunctionTable) -> Rational {
    let n = f.n();
    let mut count = 0u64;
    for x in 0..POW3[n] {
        if f.value_at(shift_index(n, x, 1)) != f.value_at(x) {
            count += 1;
        }
    }
    Ratio::new(BigInt::from(count), BigInt::from(POW3[n]))
}

/// Exact pass probability of the 3-coloring long-code test: with
/// probability 1/17 check `f(x + 1) != f(x)`, with probability 4/17 check
/// `g(y + 1) != g(y)`, and with probability 12/17 run the two-disequation
/// test. No folding is assumed of any table.
pub fn three_coloring_pass_probability(
    space: &TwoNLinSpace,
    f: &FunctionTable,
    g: &FunctionTable,
    h: &FunctionTable,
) -> Result<Rational> {
    let p_f = shift_disagreement_probability(f);
    let p_g = shift_disagreement_probability(g);
    let pair = space.pass_probability_unfolded(f, g, h)?;
    Ok((p_f + p_g * ratio(4, 1) + pair * ratio(12, 1)) / ratio(17, 1))
}

/// Outcome of one exact rational bound check.
#[derive(Debug, Clone)]
pub struct RationalBound {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

/// The hidden-gadget inequality: for any tables of matching shapes,
/// the two-disequation pass probability with middle `h` is at most
/// `3/4 + 1/4 E[four_nat(f(x), g(y), g(y'), g(y''))]`. Compared exactly
/// as rationals.
pub fn hidden_gadget_inequality(
    two_nlin: &TwoNLinSpace,
    coupled: &CoupledSpace,
    f: &FunctionTable,
    g: &FunctionTable,
    h: &FunctionTable,
) -> Result<RationalBound> {
    if two_nlin.blocks() != coupled.blocks() {
        return Err(Error::Shape("the two spaces must share a block map".into()));
    }
    let lhs = two_nlin.pass_probability_unfolded(f, g, h)?;
    let rhs = ratio(3, 4) + coupled.four_nat_expectation(f, g)? / ratio(4, 1);
    let holds = lhs <= rhs;
    Ok(RationalBound { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::FourNatSpace;
    use crate::rational::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blocks22() -> BlockMap {
        BlockMap::new(2, 2).unwrap()
    }

    #[test]
    fn matching_dictators_pass_both_tests_exactly() {
        let blocks = blocks22();
        let space = TwoNLinSpace::new(blocks).unwrap();
        let (f, g) = matching_pair(&blocks).unwrap();
        let h = space.best_middle(&f, &g, true).unwrap();
        assert_eq!(space.pass_probability(&f, &g, &h).unwrap(), int(1));
        assert_eq!(
            three_coloring_pass_probability(&space, &f, &g, &h).unwrap(),
            int(1)
        );
        let four = FourNatSpace::new(blocks).unwrap();
        assert_eq!(four.pass_probability(&f, &g).unwrap(), int(1));
    }

    #[test]
    fn nonmatching_dictators_score_the_soundness_constants() {
        let blocks = blocks22();
        let space = TwoNLinSpace::new(blocks).unwrap();
        let (f, g) = nonmatching_pair(&blocks).unwrap();
        let h = space.best_middle(&f, &g, true).unwrap();
        assert_eq!(space.pass_probability(&f, &g, &h).unwrap(), ratio(11, 12));
        assert_eq!(
            three_coloring_pass_probability(&space, &f, &g, &h).unwrap(),
            ratio(16, 17)
        );
        let four = FourNatSpace::new(blocks).unwrap();
        assert_eq!(four.pass_probability(&f, &g).unwrap(), ratio(2, 3));
    }

    #[test]
    fn constant_tables_with_a_clashing_middle_score_twelve_seventeenths() {
        let blocks = blocks22();
        let space = TwoNLinSpace::new(blocks).unwrap();
        let f = FunctionTable::constant(blocks.blocks(), 0).unwrap();
        let g = FunctionTable::constant(blocks.len(), 0).unwrap();
        let h = FunctionTable::constant(blocks.len(), 1).unwrap();
        assert_eq!(space.pass_probability_unfolded(&f, &g, &h).unwrap(), int(1));
        assert_eq!(
            three_coloring_pass_probability(&space, &f, &g, &h).unwrap(),
            ratio(12, 17)
        );
    }

    #[test]
    fn hidden_gadget_inequality_is_tight_on_dictators() {
        let blocks = blocks22();
        let space = TwoNLinSpace::new(blocks).unwrap();
        let coupled = CoupledSpace::new(blocks).unwrap();
        for pair in [matching_pair(&blocks), nonmatching_pair(&blocks)] {
            let (f, g) = pair.unwrap();
            let h = space.best_middle(&f, &g, true).unwrap();
            let bound = hidden_gadget_inequality(&space, &coupled, &f, &g, &h).unwrap();
            assert!(bound.holds);
            assert_eq!(bound.lhs, bound.rhs);
        }
    }

    #[test]
    fn hidden_gadget_inequality_holds_for_arbitrary_tables() {
        let blocks = blocks22();
        let space = TwoNLinSpace::new(blocks).unwrap();
        let coupled = CoupledSpace::new(blocks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let f = FunctionTable::random(blocks.blocks(), &mut rng).unwrap();
            let g = FunctionTable::random(blocks.len(), &mut rng).unwrap();
            let h = FunctionTable::random(blocks.len(), &mut rng).unwrap();
            let bound = hidden_gadget_inequality(&space, &coupled, &f, &g, &h).unwrap();
            assert!(bound.holds, "lhs {} rhs {}", bound.lhs, bound.rhs);
        }
    }

    #[test]
    fn shift_disagreement_scores_the_extremes() {
        let f = FunctionTable::dictator(3, 1).unwrap();
        assert_eq!(shift_disagreement_probability(&f), int(1));
        let c = FunctionTable::constant(3, 2).unwrap();
        assert_eq!(shift_disagreement_probability(&c), int(0));
    }
}
