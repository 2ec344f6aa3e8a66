//! Ternary strings, block structure, and dense function tables over Z3.
//!
//! Strings are little-endian: digit 0 is the first coordinate, and the
//! integer index of a string is `sum(digit[t] * 3^t)`. Dense tables are
//! capped at arity [`MAX_ARITY`] so every enumeration in the crate stays
//! exhaustive.
//!
//! A table `f` is folded when `f(x + c) = f(x) + c` for all `x` and all
//! `c` in Z3, where `x + c` adds `c` to every digit. Folded tables are
//! determined by their values on the representatives with first trit 0.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported arity for dense tables and exhaustive enumeration.
pub const MAX_ARITY: usize = 12;

/// Powers of three up to `3^MAX_ARITY`.
pub const POW3: [usize; MAX_ARITY + 1] = {
    let mut p = [1usize; MAX_ARITY + 1];
    let mut i = 1;
    while i <= MAX_ARITY {
        p[i] = p[i - 1] * 3;
        i += 1;
    }
    p
};

#[inline]
pub fn add3(a: u8, b: u8) -> u8 {
    (a + b) % 3
}

#[inline]
pub fn sub3(a: u8, b: u8) -> u8 {
    (3 + a - b) % 3
}

#[inline]
pub fn neg3(a: u8) -> u8 {
    (3 - a) % 3
}

#[inline]
pub fn mul3(a: u8, b: u8) -> u8 {
    (a * b) % 3
}

fn check_arity(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ARITY {
        return Err(Error::Capacity { n, max: MAX_ARITY });
    }
    Ok(())
}

fn check_trits(digits: &[u8]) -> Result<()> {
    if digits.iter().any(|&d| d > 2) {
        return Err(Error::Invalid("digit out of Z3 range".into()));
    }
    Ok(())
}

/// Decodes `index` into `n` little-endian trits.
pub fn index_to_digits(n: usize, index: usize) -> Result<Vec<u8>> {
    check_arity(n)?;
    if index >= POW3[n] {
        return Err(Error::Invalid(format!(
            "index {index} out of range for arity {n}"
        )));
    }
    let mut digits = vec![0u8; n];
    let mut rest = index;
    for d in digits.iter_mut() {
        *d = (rest % 3) as u8;
        rest /= 3;
    }
    Ok(digits)
}

/// Encodes little-endian trits into their index.
pub fn digits_to_index(digits: &[u8]) -> usize {
    let mut index = 0usize;
    for &d in digits.iter().rev() {
        index = index * 3 + d as usize;
    }
    index
}

/// Index of the string obtained by adding `c` to every digit of `index`.
pub fn shift_index(n: usize, index: usize, c: u8) -> usize {
    let mut out = 0usize;
    let mut rest = index;
    for &place in POW3.iter().take(n) {
        let d = ((rest % 3) as u8 + c) % 3;
        out += (d as usize) * place;
        rest /= 3;
    }
    out
}

/// A string over Z3 with at least one coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TernaryString {
    digits: Vec<u8>,
}

impl TernaryString {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        check_arity(digits.len())?;
        check_trits(&digits)?;
        Ok(TernaryString { digits })
    }

    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        Ok(TernaryString {
            digits: index_to_digits(n, index)?,
        })
    }

    pub fn n(&self) -> usize {
        self.digits.len()
    }

    pub fn index(&self) -> usize {
        digits_to_index(&self.digits)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn digit(&self, t: usize) -> u8 {
        self.digits[t]
    }

    pub fn first_trit(&self) -> u8 {
        self.digits[0]
    }

    /// Adds `c` to every digit.
    pub fn shift(&self, c: u8) -> Self {
        TernaryString {
            digits: self.digits.iter().map(|&d| add3(d, c)).collect(),
        }
    }

    /// The member of this string's shift orbit whose first trit is 0.
    pub fn orbit_representative(&self) -> Self {
        self.shift(neg3(self.first_trit()))
    }
}

impl std::fmt::Display for TernaryString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Partition of `blocks * width` coordinates into consecutive blocks of
/// equal width. Position `p` belongs to block `p / width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockMap {
    blocks: usize,
    width: usize,
}

impl BlockMap {
    pub fn new(blocks: usize, width: usize) -> Result<Self> {
        if blocks == 0 || width == 0 {
            return Err(Error::Invalid("block map with empty dimension".into()));
        }
        check_arity(blocks * width)?;
        Ok(BlockMap { blocks, width })
    }

    /// Number of blocks (the small side arity).
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Coordinates per block.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Total coordinate count `blocks * width` (the large side arity).
    pub fn len(&self) -> usize {
        self.blocks * self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn block_of(&self, position: usize) -> usize {
        debug_assert!(position < self.len());
        position / self.width
    }

    pub fn positions(&self, block: usize) -> std::ops::Range<usize> {
        debug_assert!(block < self.blocks);
        block * self.width..(block + 1) * self.width
    }

    /// The `block`-th width-sized slice of `digits`.
    pub fn slice<'a>(&self, digits: &'a [u8], block: usize) -> Result<&'a [u8]> {
        if digits.len() != self.len() {
            return Err(Error::Shape(format!(
                "string of length {} against block map of length {}",
                digits.len(),
                self.len()
            )));
        }
        Ok(&digits[self.positions(block)])
    }

    /// Reassembles a full string from its `blocks` slices.
    pub fn concat(&self, slices: &[&[u8]]) -> Result<Vec<u8>> {
        if slices.len() != self.blocks || slices.iter().any(|s| s.len() != self.width) {
            return Err(Error::Shape("block slices do not tile the string".into()));
        }
        Ok(slices.concat())
    }
}

/// Dense table of a function from Z3^n to Z3.
///
/// The folded flag is computed by a full scan at construction time and is
/// therefore always consistent with the values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableJson", into = "TableJson")]
pub struct FunctionTable {
    n: usize,
    values: Vec<u8>,
    folded: bool,
}

impl FunctionTable {
    pub fn new(n: usize, values: Vec<u8>) -> Result<Self> {
        check_arity(n)?;
        if values.len() != POW3[n] {
            return Err(Error::Shape(format!(
                "table of arity {n} needs {} values, got {}",
                POW3[n],
                values.len()
            )));
        }
        check_trits(&values)?;
        let folded = scan_folded(n, &values);
        Ok(FunctionTable { n, values, folded })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn folded(&self) -> bool {
        self.folded
    }

    pub fn require_folded(&self) -> Result<()> {
        if self.folded {
            Ok(())
        } else {
            Err(Error::NotFolded)
        }
    }

    #[inline]
    pub fn value_at(&self, index: usize) -> u8 {
        self.values[index]
    }

    pub fn eval(&self, x: &TernaryString) -> Result<u8> {
        if x.n() != self.n {
            return Err(Error::Shape(format!(
                "input of arity {} against table of arity {}",
                x.n(),
                self.n
            )));
        }
        Ok(self.values[x.index()])
    }

    /// The dictator in a given coordinate: `f(x) = x[coord]`.
    pub fn dictator(n: usize, coord: usize) -> Result<Self> {
        check_arity(n)?;
        if coord >= n {
            return Err(Error::Invalid(format!(
                "dictator coordinate {coord} out of range for arity {n}"
            )));
        }
        let values = (0..POW3[n])
            .map(|idx| ((idx / POW3[coord]) % 3) as u8)
            .collect();
        Ok(FunctionTable {
            n,
            values,
            folded: true,
        })
    }

    pub fn constant(n: usize, c: u8) -> Result<Self> {
        check_arity(n)?;
        check_trits(&[c])?;
        Ok(FunctionTable {
            n,
            values: vec![c; POW3[n]],
            folded: false,
        })
    }

    /// Uniformly random table.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_arity(n)?;
        let values = (0..POW3[n]).map(|_| rng.gen_range(0..3u8)).collect();
        Self::new(n, values)
    }

    /// Uniformly random folded table: random values on the representatives,
    /// extended by folding.
    pub fn random_folded<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_arity(n)?;
        let reps: Vec<u8> = (0..POW3[n - 1]).map(|_| rng.gen_range(0..3u8)).collect();
        Self::fold_extend(n, &reps)
    }

    /// Builds the folded table whose value on the representative with
    /// rest-index `m` (full index `3 * m`, first trit 0) is `reps[m]`.
    pub fn fold_extend(n: usize, reps: &[u8]) -> Result<Self> {
        check_arity(n)?;
        if reps.len() != POW3[n - 1] {
            return Err(Error::Shape(format!(
                "fold extension of arity {n} needs {} representative values, got {}",
                POW3[n - 1],
                reps.len()
            )));
        }
        check_trits(reps)?;
        let mut values = vec![0u8; POW3[n]];
        for (idx, v) in values.iter_mut().enumerate() {
            let t = (idx % 3) as u8;
            let rep_idx = shift_index(n, idx, neg3(t));
            debug_assert_eq!(rep_idx % 3, 0);
            *v = add3(reps[rep_idx / 3], t);
        }
        Ok(FunctionTable {
            n,
            values,
            folded: true,
        })
    }

    /// Values on the representatives with first trit 0; inverse of
    /// [`FunctionTable::fold_extend`] on folded tables.
    pub fn representatives(&self) -> Result<Vec<u8>> {
        self.require_folded()?;
        Ok((0..POW3[self.n - 1]).map(|m| self.values[3 * m]).collect())
    }

    /// Table of `x -> f(sigma(x))` where `sigma(x)[perm[p]] = x[p]`.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Shape("permutation length differs from arity".into()));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::Invalid(
                    "not a permutation of the coordinates".into(),
                ));
            }
            seen[p] = true;
        }
        let mut values = vec![0u8; self.values.len()];
        let mut digits = vec![0u8; self.n];
        let mut image = vec![0u8; self.n];
        for (idx, v) in values.iter_mut().enumerate() {
            let mut rest = idx;
            for d in digits.iter_mut() {
                *d = (rest % 3) as u8;
                rest /= 3;
            }
            for (p, &q) in perm.iter().enumerate() {
                image[q] = digits[p];
            }
            *v = self.values[digits_to_index(&image)];
        }
        Ok(FunctionTable {
            n: self.n,
            values,
            folded: self.folded,
        })
    }

    /// Counts of output values 0, 1, 2.
    pub fn value_counts(&self) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for &v in &self.values {
            counts[v as usize] += 1;
        }
        counts
    }
}

fn scan_folded(n: usize, values: &[u8]) -> bool {
    (0..values.len()).all(|idx| values[shift_index(n, idx, 1)] == add3(values[idx], 1))
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    n: usize,
    values: Vec<u8>,
    folded: bool,
}

impl TryFrom<TableJson> for FunctionTable {
    type Error = Error;

    fn try_from(raw: TableJson) -> Result<Self> {
        let table = FunctionTable::new(raw.n, raw.values)?;
        if table.folded != raw.folded {
            return Err(Error::Invalid(format!(
                "folded flag claims {} but the values say {}",
                raw.folded, table.folded
            )));
        }
        Ok(table)
    }
}

impl From<FunctionTable> for TableJson {
    fn from(table: FunctionTable) -> Self {
        TableJson {
            n: table.n,
            values: table.values,
            folded: table.folded,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_codec_examples() {
        let s = TernaryString::new(vec![1, 2]).unwrap();
        assert_eq!(s.index(), 7);
        assert_eq!(TernaryString::from_index(2, 7).unwrap(), s);
        assert_eq!(
            TernaryString::from_index(3, 0).unwrap().digits(),
            &[0, 0, 0]
        );
        assert_eq!(
            TernaryString::from_index(3, 26).unwrap().digits(),
            &[2, 2, 2]
        );
    }

    #[test]
    fn index_codec_round_trips_at_cap() {
        for n in [1, 2, 5, MAX_ARITY] {
            for idx in [0, 1, POW3[n] / 2, POW3[n] - 1] {
                let s = TernaryString::from_index(n, idx).unwrap();
                assert_eq!(s.index(), idx);
            }
        }
    }

    #[test]
    fn arity_cap_enforced() {
        assert!(matches!(
            TernaryString::from_index(MAX_ARITY + 1, 0),
            Err(Error::Capacity { .. })
        ));
        assert!(FunctionTable::constant(0, 0).is_err());
    }

    #[test]
    fn shift_wraps_every_digit() {
        let s = TernaryString::new(vec![0, 1, 2]).unwrap();
        assert_eq!(s.shift(1).digits(), &[1, 2, 0]);
        assert_eq!(s.shift(2).digits(), &[2, 0, 1]);
        assert_eq!(shift_index(3, s.index(), 1), s.shift(1).index());
    }

    #[test]
    fn block_map_slices_tile_the_string() {
        let blocks = BlockMap::new(2, 3).unwrap();
        let y: Vec<u8> = vec![0, 1, 2, 2, 1, 0];
        let s0 = blocks.slice(&y, 0).unwrap();
        let s1 = blocks.slice(&y, 1).unwrap();
        assert_eq!(s0, &[0, 1, 2]);
        assert_eq!(s1, &[2, 1, 0]);
        assert_eq!(blocks.concat(&[s0, s1]).unwrap(), y);
        assert_eq!(blocks.block_of(2), 0);
        assert_eq!(blocks.block_of(3), 1);
    }

    #[test]
    fn dictator_is_folded_and_reads_its_coordinate() {
        let f = FunctionTable::dictator(3, 1).unwrap();
        assert!(f.folded());
        for idx in 0..f.len() {
            let x = TernaryString::from_index(3, idx).unwrap();
            assert_eq!(f.value_at(idx), x.digit(1));
        }
    }

    #[test]
    fn constant_is_not_folded() {
        let f = FunctionTable::constant(2, 1).unwrap();
        assert!(!f.folded());
        assert!(f.require_folded().is_err());
    }

    #[test]
    fn fold_extend_then_restrict_is_identity() {
        let reps = vec![0, 2, 1, 1, 0, 2, 2, 1, 0];
        let f = FunctionTable::fold_extend(3, &reps).unwrap();
        assert!(f.folded());
        assert_eq!(f.representatives().unwrap(), reps);
        for idx in 0..f.len() {
            let x = TernaryString::from_index(3, idx).unwrap();
            for c in 0..3u8 {
                let shifted = f.eval(&x.shift(c)).unwrap();
                assert_eq!(shifted, add3(f.eval(&x).unwrap(), c));
            }
        }
    }

    #[test]
    fn folded_flag_matches_scan() {
        // f(x) = 2 x0 + 2 x1 satisfies f(x + 1) = f(x) + 4 = f(x) + 1.
        let f = FunctionTable::new(2, vec![0, 2, 1, 2, 1, 0, 1, 0, 2]).unwrap();
        assert!(f.folded());
        let g = FunctionTable::new(2, vec![0, 2, 1, 2, 1, 0, 1, 0, 0]).unwrap();
        assert!(!g.folded());
    }

    #[test]
    fn permute_coordinates_relabels_inputs() {
        let g = FunctionTable::dictator(4, 2).unwrap();
        // sigma(x)[perm[p]] = x[p]; the dictator in coordinate 2 becomes the
        // dictator in the position that maps onto 2.
        let perm = vec![2, 0, 1, 3];
        let h = g.permute_coordinates(&perm).unwrap();
        let expect = FunctionTable::dictator(4, 0).unwrap();
        assert_eq!(h, expect);
    }

    #[test]
    fn json_round_trip_validates_folded_flag() {
        let f = FunctionTable::dictator(2, 0).unwrap();
        let js = serde_json::to_string(&f).unwrap();
        assert!(js.contains("\"folded\":true"));
        let back: FunctionTable = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);

        let lie = r#"{"n":2,"values":[0,0,0,0,0,0,0,0,0],"folded":true}"#;
        assert!(serde_json::from_str::<FunctionTable>(lie).is_err());
    }
}
