//! Fourier analysis over Z3^n.
//!
//! Characters are `chi_alpha(x) = omega^(alpha . x)` with
//! `omega = exp(2 pi i / 3)`, and coefficients are
//! `hat(v)(alpha) = E_x[v(x) * conj(chi_alpha(x))]`. A Z3-valued table `f`
//! is transformed through its phase table `omega^f`, so Parseval gives
//! total coefficient mass exactly 1 for those inputs.
//!
//! Per-coefficient statistics: the weight `|alpha|` is the integer digit
//! sum, the support `#alpha` counts nonzero digits, and for a block map
//! the projected string `pi3(alpha)` has `i`-th digit `|alpha[i]| mod 3`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ternary::{digits_to_index, index_to_digits, BlockMap, FunctionTable, POW3};

const SQRT3_HALF: f64 = 0.866_025_403_784_438_6;

/// Primitive cube root of unity.
pub const OMEGA: Complex64 = Complex64::new(-0.5, SQRT3_HALF);

const OMEGA_POW: [Complex64; 3] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-0.5, SQRT3_HALF),
    Complex64::new(-0.5, -SQRT3_HALF),
];

#[inline]
pub fn omega_pow(t: u8) -> Complex64 {
    OMEGA_POW[(t % 3) as usize]
}

/// Dense complex-valued table on Z3^n, the common ground for phase tables,
/// indicators, and arbitrary real test functions.
#[derive(Debug, Clone)]
pub struct ComplexTable {
    n: usize,
    values: Vec<Complex64>,
}

impl ComplexTable {
    pub fn from_values(n: usize, values: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n > crate::ternary::MAX_ARITY {
            return Err(Error::Capacity {
                n,
                max: crate::ternary::MAX_ARITY,
            });
        }
        if values.len() != POW3[n] {
            return Err(Error::Shape(format!(
                "complex table of arity {n} needs {} values, got {}",
                POW3[n],
                values.len()
            )));
        }
        Ok(ComplexTable { n, values })
    }

    /// Phase table `x -> omega^(f(x))`.
    pub fn phases(f: &FunctionTable) -> Self {
        ComplexTable {
            n: f.n(),
            values: f.values().iter().map(|&v| omega_pow(v)).collect(),
        }
    }

    /// Indicator table `x -> [f(x) == value]`.
    pub fn indicator(f: &FunctionTable, value: u8) -> Self {
        ComplexTable {
            n: f.n(),
            values: f
                .values()
                .iter()
                .map(|&v| Complex64::new(if v == value { 1.0 } else { 0.0 }, 0.0))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn value_at(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    pub fn conjugate(&self) -> Self {
        ComplexTable {
            n: self.n,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }
}

/// Dense Fourier spectrum indexed by alpha in Z3^n.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<Complex64>,
    folded_source: bool,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn at(&self, alpha: usize) -> Complex64 {
        self.coeffs[alpha]
    }

    /// Whether the transformed table was a folded Z3-valued function.
    pub fn folded_source(&self) -> bool {
        self.folded_source
    }

    /// Total squared coefficient mass; 1 for phase tables by Parseval.
    pub fn total_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Triples `(alpha_index, re, im)` for export.
    pub fn to_triples(&self) -> Vec<(usize, f64, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.re, c.im))
            .collect()
    }
}

/// Forward transform of a Z3-valued table through its phases.
pub fn transform(f: &FunctionTable) -> Spectrum {
    let mut spec = transform_complex(&ComplexTable::phases(f));
    spec.folded_source = f.folded();
    spec
}

/// Forward transform of an arbitrary complex table.
pub fn transform_complex(table: &ComplexTable) -> Spectrum {
    let n = table.n;
    let mut coeffs = table.values.clone();
    butterfly(n, &mut coeffs, true);
    let scale = 1.0 / POW3[n] as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    Spectrum {
        n,
        coeffs,
        folded_source: false,
    }
}

/// Inverse transform: reconstructs the table from its spectrum.
pub fn inverse(spec: &Spectrum) -> ComplexTable {
    let mut values = spec.coeffs.clone();
    butterfly(spec.n, &mut values, false);
    ComplexTable { n: spec.n, values }
}

/// In-place radix-3 butterflies along each coordinate. Forward combines
/// with `omega^(-a*b)`, inverse with `omega^(+a*b)`.
fn butterfly(n: usize, v: &mut [Complex64], forward: bool) {
    let w1 = if forward { OMEGA_POW[2] } else { OMEGA_POW[1] };
    let w2 = if forward { OMEGA_POW[1] } else { OMEGA_POW[2] };
    for &stride in POW3.iter().take(n) {
        let outer = POW3[n] / (stride * 3);
        for hi in 0..outer {
            let base = hi * stride * 3;
            for lo in 0..stride {
                let i0 = base + lo;
                let i1 = i0 + stride;
                let i2 = i1 + stride;
                let (a, b, c) = (v[i0], v[i1], v[i2]);
                v[i0] = a + b + c;
                v[i1] = a + w1 * b + w2 * c;
                v[i2] = a + w2 * b + w1 * c;
            }
        }
    }
}

/// Integer digit sum of `alpha`.
pub fn alpha_weight(n: usize, alpha: usize) -> u32 {
    let mut rest = alpha;
    let mut sum = 0u32;
    for _ in 0..n {
        sum += (rest % 3) as u32;
        rest /= 3;
    }
    sum
}

/// Number of nonzero digits of `alpha`.
pub fn support_count(n: usize, alpha: usize) -> u32 {
    let mut rest = alpha;
    let mut count = 0u32;
    for _ in 0..n {
        if !rest.is_multiple_of(3) {
            count += 1;
        }
        rest /= 3;
    }
    count
}

/// Index over Z3^blocks of the projected string whose `i`-th digit is the
/// digit sum of `alpha` over block `i`, mod 3.
pub fn pi3_index(alpha: usize, blocks: &BlockMap) -> usize {
    let mut rest = alpha;
    let mut out = 0usize;
    let mut place = 1usize;
    for _ in 0..blocks.blocks() {
        let mut sum = 0usize;
        for _ in 0..blocks.width() {
            sum += rest % 3;
            rest /= 3;
        }
        out += (sum % 3) * place;
        place *= 3;
    }
    out
}

/// Digit-wise negation of `alpha`.
pub fn negate_index(n: usize, alpha: usize) -> usize {
    let mut rest = alpha;
    let mut out = 0usize;
    for &place in POW3.iter().take(n) {
        let d = rest % 3;
        out += ((3 - d) % 3) * place;
        rest /= 3;
    }
    out
}

/// Per-coefficient statistics for one alpha.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaProfile {
    pub index: usize,
    pub digits: Vec<u8>,
    pub weight: u32,
    pub support: u32,
    pub pi3: usize,
}

impl AlphaProfile {
    pub fn new(alpha: usize, blocks: &BlockMap) -> Result<Self> {
        let n = blocks.len();
        let digits = index_to_digits(n, alpha)?;
        Ok(AlphaProfile {
            index: alpha,
            digits,
            weight: alpha_weight(n, alpha),
            support: support_count(n, alpha),
            pi3: pi3_index(alpha, blocks),
        })
    }
}

/// Squared coefficient mass on the alphas whose weight is divisible by 3.
pub fn even_mass(spec: &Spectrum) -> f64 {
    spec.coeffs
        .iter()
        .enumerate()
        .filter(|(alpha, _)| alpha_weight(spec.n, *alpha).is_multiple_of(3))
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// Decoding quantity
/// `sum over alpha with pi3(alpha) != 0 of
///  |hat(f)(pi3(alpha))| * |hat(g)(alpha)|^2 * (1/2)^(#alpha)`.
pub fn dec_quantity(f_spec: &Spectrum, g_spec: &Spectrum, blocks: &BlockMap) -> Result<f64> {
    check_block_shapes(f_spec, g_spec, blocks)?;
    let n = g_spec.n;
    let mut total = 0.0f64;
    for alpha in 0..POW3[n] {
        let projected = pi3_index(alpha, blocks);
        if projected == 0 {
            continue;
        }
        let damping = 0.5f64.powi(support_count(n, alpha) as i32);
        total += f_spec.at(projected).norm() * g_spec.at(alpha).norm_sqr() * damping;
    }
    Ok(total)
}

/// Coefficient mass of `g` on the kernel of the block projection, damped:
/// `sum over alpha with pi3(alpha) == 0 of |hat(g)(alpha)|^2 * (1/2)^(#alpha)`.
pub fn kernel_mass(g_spec: &Spectrum, blocks: &BlockMap) -> Result<f64> {
    if g_spec.n != blocks.len() {
        return Err(Error::Shape(
            "spectrum arity differs from block map length".into(),
        ));
    }
    let n = g_spec.n;
    let mut total = 0.0f64;
    for alpha in 0..POW3[n] {
        if pi3_index(alpha, blocks) == 0 {
            let damping = 0.5f64.powi(support_count(n, alpha) as i32);
            total += g_spec.at(alpha).norm_sqr() * damping;
        }
    }
    Ok(total)
}

pub(crate) fn check_block_shapes(
    f_spec: &Spectrum,
    g_spec: &Spectrum,
    blocks: &BlockMap,
) -> Result<()> {
    if f_spec.n != blocks.blocks() || g_spec.n != blocks.len() {
        return Err(Error::Shape(format!(
            "spectra of arities {} and {} against block map {}x{}",
            f_spec.n,
            g_spec.n,
            blocks.blocks(),
            blocks.width()
        )));
    }
    Ok(())
}

/// Index of the dictator coordinate's unit vector `e_coord`.
pub fn unit_alpha(coord: usize) -> usize {
    POW3[coord]
}

pub fn digits_of(alpha: &[u8]) -> usize {
    digits_to_index(alpha)
}
