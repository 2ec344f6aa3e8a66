//! Enumerated outcome spaces for the long-code tests.
//!
//! All three spaces are finite weighted distributions stored outcome by
//! outcome, with exact rational weights over a fixed power-of-two and
//! power-of-three denominator. Strings are stored as table indices.
//!
//! * [`TwoNLinSpace`]: `x` uniform on Z3^K, `y` uniform on Z3^L, and
//!   coordinate `j` of `z` uniform on `Z3 \ {x_i, y_j}` where `i` is the
//!   block of `j`. That set has two elements when `x_i = y_j` and one
//!   otherwise.
//! * [`FourNatSpace`]: `x` uniform, and per coordinate the triple
//!   `(y_j, z_j, w_j)` uniform over the six completions of `x_i` to a
//!   two-pair tuple.
//! * [`CoupledSpace`]: extends each two-disequation outcome with rewrites
//!   `y'`, `y''`. Where `x_i = y_j` both rewrite coordinates take the lone
//!   element of `Z3 \ {x_i, z_j}`; elsewhere a fair coin decides which of
//!   the two takes `x_i` and which keeps `y_j`. The coin is part of the
//!   outcome space.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::Ratio;

use crate::csp::four_nat;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::ternary::{add3, index_to_digits, shift_index, BlockMap, FunctionTable, POW3};

/// Cap on materialized outcomes per space.
pub const SPACE_CAP: u128 = 4_194_304;

/// For each anchor value `a`, the six `(b, c, d)` with
/// `two_pair(a, b, c, d)`, in lexicographic order.
fn two_pair_completions() -> [[(u8, u8, u8); 6]; 3] {
    let mut table = [[(0u8, 0u8, 0u8); 6]; 3];
    for a in 0..3u8 {
        let mut slot = 0;
        for b in 0..3u8 {
            for c in 0..3u8 {
                for d in 0..3u8 {
                    if crate::csp::two_pair([a, b, c, d]) {
                        table[a as usize][slot] = (b, c, d);
                        slot += 1;
                    }
                }
            }
        }
        debug_assert_eq!(slot, 6);
    }
    table
}

fn check_cap(count: u128) -> Result<()> {
    if count > SPACE_CAP {
        return Err(Error::SearchSpace {
            assignments: count,
            cap: SPACE_CAP,
        });
    }
    Ok(())
}

fn check_small_table(table: &FunctionTable, arity: usize, side: &str) -> Result<()> {
    if table.n() != arity {
        return Err(Error::Shape(format!(
            "{side} table has arity {}, expected {arity}",
            table.n()
        )));
    }
    Ok(())
}

/// One outcome of the two-disequation test distribution. The weight is
/// `mult / scale` for the owning space's scale.
#[derive(Debug, Clone, Copy)]
pub struct TwoNLinOutcome {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    pub mult: u32,
}

/// The distribution underlying the two-disequation test.
#[derive(Debug, Clone)]
pub struct TwoNLinSpace {
    blocks: BlockMap,
    outcomes: Vec<TwoNLinOutcome>,
    scale: u64,
}

impl TwoNLinSpace {
    pub fn new(blocks: BlockMap) -> Result<Self> {
        let k = blocks.blocks();
        let l = blocks.len();
        check_cap(3u128.pow(k as u32) * 4u128.pow(l as u32))?;
        let scale = 3u64.pow((k + l) as u32) * 2u64.pow(l as u32);
        let mut outcomes = Vec::new();
        let mut choice_sets: Vec<Vec<u8>> = vec![Vec::with_capacity(2); l];
        for x_idx in 0..POW3[k] {
            let x = index_to_digits(k, x_idx)?;
            for y_idx in 0..POW3[l] {
                let y = index_to_digits(l, y_idx)?;
                let mut diag = 0u32;
                for j in 0..l {
                    let xi = x[blocks.block_of(j)];
                    choice_sets[j].clear();
                    for c in 0..3u8 {
                        if c != xi && c != y[j] {
                            choice_sets[j].push(c);
                        }
                    }
                    if xi == y[j] {
                        diag += 1;
                    }
                }
                let mult = 1u32 << (l as u32 - diag);
                let mut choice = vec![0usize; l];
                loop {
                    let mut z_idx = 0usize;
                    for j in (0..l).rev() {
                        z_idx = z_idx * 3 + choice_sets[j][choice[j]] as usize;
                    }
                    outcomes.push(TwoNLinOutcome {
                        x: x_idx as u32,
                        y: y_idx as u32,
                        z: z_idx as u32,
                        mult,
                    });
                    if !advance_choices(&mut choice, &choice_sets) {
                        break;
                    }
                }
            }
        }
        Ok(TwoNLinSpace {
            blocks,
            outcomes,
            scale,
        })
    }

    pub fn blocks(&self) -> &BlockMap {
        &self.blocks
    }

    pub fn outcomes(&self) -> &[TwoNLinOutcome] {
        &self.outcomes
    }

    /// Common denominator of the outcome weights.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn weight(&self, outcome: &TwoNLinOutcome) -> Rational {
        Ratio::new(BigInt::from(outcome.mult), BigInt::from(self.scale))
    }

    pub fn total_weight(&self) -> Rational {
        let total: u64 = self.outcomes.iter().map(|o| o.mult as u64).sum();
        Ratio::new(BigInt::from(total), BigInt::from(self.scale))
    }

    fn check_shapes(&self, f: &FunctionTable, g: &FunctionTable, h: &FunctionTable) -> Result<()> {
        check_small_table(f, self.blocks.blocks(), "small-side")?;
        check_small_table(g, self.blocks.len(), "large-side")?;
        check_small_table(h, self.blocks.len(), "middle")
    }

    /// Exact pass probability of the folded two-disequation test: with
    /// probability 1/4 check `f(x) != h(z)`, else check `g(y) != h(z)`.
    pub fn pass_probability(
        &self,
        f: &FunctionTable,
        g: &FunctionTable,
        h: &FunctionTable,
    ) -> Result<Rational> {
        f.require_folded()?;
        g.require_folded()?;
        h.require_folded()?;
        self.pass_probability_unfolded(f, g, h)
    }

    /// Same enumeration without the folding precondition.
    pub fn pass_probability_unfolded(
        &self,
        f: &FunctionTable,
        g: &FunctionTable,
        h: &FunctionTable,
    ) -> Result<Rational> {
        self.check_shapes(f, g, h)?;
        let mut num = 0u64;
        for o in &self.outcomes {
            let hz = h.value_at(o.z as usize);
            let mut hit = 0u64;
            if f.value_at(o.x as usize) != hz {
                hit += 1;
            }
            if g.value_at(o.y as usize) != hz {
                hit += 3;
            }
            num += o.mult as u64 * hit;
        }
        Ok(Ratio::new(BigInt::from(num), BigInt::from(4 * self.scale)))
    }

    /// Globally optimal middle function. The objective decomposes over
    /// `z`-points, so a per-point minimizer of the agreement probability is
    /// optimal. With `fold` set, ties are broken at the orbit
    /// representative (least minimizing value) and the choice is extended
    /// by folding, which preserves per-point optimality because the
    /// distribution and the folded `f`, `g` are shift-equivariant.
    /// Without it, ties break to the least value independently per point.
    pub fn best_middle(
        &self,
        f: &FunctionTable,
        g: &FunctionTable,
        fold: bool,
    ) -> Result<FunctionTable> {
        let l = self.blocks.len();
        check_small_table(f, self.blocks.blocks(), "small-side")?;
        check_small_table(g, l, "large-side")?;
        if fold {
            f.require_folded()?;
            g.require_folded()?;
        }
        // score[z][c] is proportional to the probability that the checked
        // side equals c at this z-point.
        let mut score = vec![[0u64; 3]; POW3[l]];
        for o in &self.outcomes {
            let s = &mut score[o.z as usize];
            s[f.value_at(o.x as usize) as usize] += o.mult as u64;
            s[g.value_at(o.y as usize) as usize] += 3 * o.mult as u64;
        }
        let least_argmin = |s: &[u64; 3]| -> u8 {
            let mut best = 0usize;
            for c in 1..3 {
                if s[c] < s[best] {
                    best = c;
                }
            }
            best as u8
        };
        let mut values = vec![0u8; POW3[l]];
        if fold {
            for rep in (0..POW3[l]).step_by(3) {
                let c0 = least_argmin(&score[rep]);
                for t in 0..3u8 {
                    values[shift_index(l, rep, t)] = add3(c0, t);
                }
            }
        } else {
            for (z, s) in score.iter().enumerate() {
                values[z] = least_argmin(s);
            }
        }
        FunctionTable::new(l, values)
    }

    /// Probability that the first block of `z` fails to determine `x` on
    /// that block, which happens exactly when all its coordinates agree.
    pub fn block_ambiguity_probability(&self) -> Rational {
        let mut num = 0u64;
        let width = self.blocks.width();
        for o in &self.outcomes {
            let z = index_to_digits(self.blocks.len(), o.z as usize).expect("stored index");
            if z[..width].iter().all(|&c| c == z[0]) {
                num += o.mult as u64;
            }
        }
        Ratio::new(BigInt::from(num), BigInt::from(self.scale))
    }
}

fn advance_choices(choice: &mut [usize], sets: &[Vec<u8>]) -> bool {
    for j in 0..choice.len() {
        choice[j] += 1;
        if choice[j] < sets[j].len() {
            return true;
        }
        choice[j] = 0;
    }
    false
}

/// One outcome of the four-variable test distribution; weights are
/// uniform.
#[derive(Debug, Clone, Copy)]
pub struct FourNatOutcome {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    pub w: u32,
}

/// The distribution underlying the four-variable disequality test.
#[derive(Debug, Clone)]
pub struct FourNatSpace {
    blocks: BlockMap,
    outcomes: Vec<FourNatOutcome>,
}

impl FourNatSpace {
    pub fn new(blocks: BlockMap) -> Result<Self> {
        let k = blocks.blocks();
        let l = blocks.len();
        check_cap(3u128.pow(k as u32) * 6u128.pow(l as u32))?;
        let completions = two_pair_completions();
        let mut outcomes = Vec::new();
        for x_idx in 0..POW3[k] {
            let x = index_to_digits(k, x_idx)?;
            let anchors: Vec<usize> = (0..l).map(|j| x[blocks.block_of(j)] as usize).collect();
            let mut choice = vec![0usize; l];
            loop {
                let mut y_idx = 0usize;
                let mut z_idx = 0usize;
                let mut w_idx = 0usize;
                for j in (0..l).rev() {
                    let (b, c, d) = completions[anchors[j]][choice[j]];
                    y_idx = y_idx * 3 + b as usize;
                    z_idx = z_idx * 3 + c as usize;
                    w_idx = w_idx * 3 + d as usize;
                }
                outcomes.push(FourNatOutcome {
                    x: x_idx as u32,
                    y: y_idx as u32,
                    z: z_idx as u32,
                    w: w_idx as u32,
                });
                if !advance_uniform(&mut choice, 6) {
                    break;
                }
            }
        }
        Ok(FourNatSpace { blocks, outcomes })
    }

    pub fn blocks(&self) -> &BlockMap {
        &self.blocks
    }

    pub fn outcomes(&self) -> &[FourNatOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn weight(&self) -> Rational {
        Ratio::new(BigInt::from(1), BigInt::from(self.outcomes.len()))
    }

    fn check_shapes(&self, f: &FunctionTable, g: &FunctionTable) -> Result<()> {
        check_small_table(f, self.blocks.blocks(), "small-side")?;
        check_small_table(g, self.blocks.len(), "large-side")
    }

    /// Exact pass probability of the folded four-variable test.
    pub fn pass_probability(&self, f: &FunctionTable, g: &FunctionTable) -> Result<Rational> {
        f.require_folded()?;
        g.require_folded()?;
        self.four_nat_expectation(f, g)
    }

    /// `E[four_nat(f(x), g(y), g(z), g(w))]` without folding preconditions.
    pub fn four_nat_expectation(&self, f: &FunctionTable, g: &FunctionTable) -> Result<Rational> {
        self.check_shapes(f, g)?;
        let mut count = 0u64;
        for o in &self.outcomes {
            if four_nat([
                f.value_at(o.x as usize),
                g.value_at(o.y as usize),
                g.value_at(o.z as usize),
                g.value_at(o.w as usize),
            ]) {
                count += 1;
            }
        }
        Ok(Ratio::new(
            BigInt::from(count),
            BigInt::from(self.outcomes.len()),
        ))
    }
}

fn advance_uniform(choice: &mut [usize], radix: usize) -> bool {
    for c in choice.iter_mut() {
        *c += 1;
        if *c < radix {
            return true;
        }
        *c = 0;
    }
    false
}

/// One outcome of the coupled rewrite distribution; weights are uniform.
#[derive(Debug, Clone, Copy)]
pub struct CoupledOutcome {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    pub y1: u32,
    pub y2: u32,
}

/// The two-disequation distribution extended with the rewrites
/// `(y', y'')`.
#[derive(Debug, Clone)]
pub struct CoupledSpace {
    blocks: BlockMap,
    outcomes: Vec<CoupledOutcome>,
}

impl CoupledSpace {
    pub fn new(blocks: BlockMap) -> Result<Self> {
        let k = blocks.blocks();
        let l = blocks.len();
        check_cap(3u128.pow((k + l) as u32) * 2u128.pow(l as u32))?;
        let mut outcomes = Vec::new();
        // Per coordinate there are exactly two equally likely branches:
        // either two z-choices (diagonal) or a two-sided coin (otherwise).
        let mut options: Vec<[(u8, u8, u8); 2]> = vec![[(0, 0, 0); 2]; l];
        for x_idx in 0..POW3[k] {
            let x = index_to_digits(k, x_idx)?;
            for y_idx in 0..POW3[l] {
                let y = index_to_digits(l, y_idx)?;
                for j in 0..l {
                    let xi = x[blocks.block_of(j)];
                    if xi == y[j] {
                        let others: Vec<u8> = (0..3u8).filter(|&c| c != xi).collect();
                        // z takes one non-anchor value, the rewrites both
                        // take the other.
                        options[j] = [
                            (others[0], others[1], others[1]),
                            (others[1], others[0], others[0]),
                        ];
                    } else {
                        let z = (0..3u8)
                            .find(|&c| c != xi && c != y[j])
                            .expect("third value");
                        options[j] = [(z, xi, y[j]), (z, y[j], xi)];
                    }
                }
                let mut choice = vec![0usize; l];
                loop {
                    let mut z_idx = 0usize;
                    let mut y1_idx = 0usize;
                    let mut y2_idx = 0usize;
                    for j in (0..l).rev() {
                        let (z, y1, y2) = options[j][choice[j]];
                        z_idx = z_idx * 3 + z as usize;
                        y1_idx = y1_idx * 3 + y1 as usize;
                        y2_idx = y2_idx * 3 + y2 as usize;
                    }
                    outcomes.push(CoupledOutcome {
                        x: x_idx as u32,
                        y: y_idx as u32,
                        z: z_idx as u32,
                        y1: y1_idx as u32,
                        y2: y2_idx as u32,
                    });
                    if !advance_uniform(&mut choice, 2) {
                        break;
                    }
                }
            }
        }
        Ok(CoupledSpace { blocks, outcomes })
    }

    pub fn blocks(&self) -> &BlockMap {
        &self.blocks
    }

    pub fn outcomes(&self) -> &[CoupledOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `E[four_nat(f(x), g(y), g(y'), g(y''))]`, exactly.
    pub fn four_nat_expectation(&self, f: &FunctionTable, g: &FunctionTable) -> Result<Rational> {
        check_small_table(f, self.blocks.blocks(), "small-side")?;
        check_small_table(g, self.blocks.len(), "large-side")?;
        let mut count = 0u64;
        for o in &self.outcomes {
            if four_nat([
                f.value_at(o.x as usize),
                g.value_at(o.y as usize),
                g.value_at(o.y1 as usize),
                g.value_at(o.y2 as usize),
            ]) {
                count += 1;
            }
        }
        Ok(Ratio::new(
            BigInt::from(count),
            BigInt::from(self.outcomes.len()),
        ))
    }

    /// Law of `(x_i, y_j, y'_j, y''_j)` for coordinate `j`, as counts over
    /// the uniform outcome space.
    pub fn column_law(&self, j: usize) -> BTreeMap<(u8, u8, u8, u8), u64> {
        let block = self.blocks.block_of(j);
        let mut law = BTreeMap::new();
        for o in &self.outcomes {
            let x = index_to_digits(self.blocks.blocks(), o.x as usize).expect("stored index");
            let digit = |idx: u32| ((idx as usize / POW3[j]) % 3) as u8;
            let key = (x[block], digit(o.y), digit(o.y1), digit(o.y2));
            *law.entry(key).or_insert(0) += 1;
        }
        law
    }

    /// Joint law of `(x, y, z)` as counts at the given scale, for comparing
    /// against [`TwoNLinSpace`] exactly.
    pub fn xyz_marginal(&self) -> BTreeMap<(u32, u32, u32), u64> {
        let mut law = BTreeMap::new();
        for o in &self.outcomes {
            *law.entry((o.x, o.y, o.z)).or_insert(0) += 1;
        }
        law
    }

    /// Joint laws of `(x, z, y)`, `(x, z, y')`, and `(x, z, y'')`.
    pub fn rewrite_marginals(&self) -> [BTreeMap<(u32, u32, u32), u64>; 3] {
        let mut laws = [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
        for o in &self.outcomes {
            *laws[0].entry((o.x, o.z, o.y)).or_insert(0) += 1;
            *laws[1].entry((o.x, o.z, o.y1)).or_insert(0) += 1;
            *laws[2].entry((o.x, o.z, o.y2)).or_insert(0) += 1;
        }
        laws
    }

    /// Scale at which [`CoupledSpace::xyz_marginal`] counts are comparable
    /// to a [`TwoNLinSpace`] with the same blocks: outcomes here are
    /// uniform at `1 / (3^(K+L) * 2^L)`, matching that space's scale.
    pub fn scale(&self) -> u64 {
        self.outcomes.len() as u64
    }
}
