//! Spectral identities and inequalities over the coupled test
//! distributions.
//!
//! Each check computes its left side by direct enumeration over an
//! outcome space and its right side from Fourier spectra, and reports the
//! residual (for identities) or the slack (for one-sided bounds, where
//! nonnegative slack means the bound holds).

use num_complex::Complex64;

use crate::coupling::FourNatSpace;
use crate::csp::four_nat;
use crate::error::{Error, Result};
use crate::fourier::{
    dec_quantity, even_mass, kernel_mass, negate_index, omega_pow, pi3_index, support_count,
    transform, transform_complex, ComplexTable,
};
use crate::ternary::{add3, index_to_digits, mul3, BlockMap, FunctionTable, POW3};

/// Two-sided check: `lhs` from enumeration, `rhs` from spectra.
#[derive(Debug, Clone, Copy)]
pub struct ResidualCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl ResidualCheck {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        ResidualCheck {
            lhs,
            rhs,
            residual: (lhs - rhs).norm(),
        }
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.residual <= tolerance
    }
}

/// One-sided check: the bound `lhs <= rhs` holds when the slack
/// `rhs - lhs` is nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct SlackCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl SlackCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        SlackCheck {
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    /// Packages an externally computed pair as a check.
    pub fn raw(lhs: f64, rhs: f64) -> Self {
        SlackCheck::new(lhs, rhs)
    }

    pub fn holds(&self, tolerance: f64) -> bool {
        self.slack >= -tolerance
    }
}

/// The six conditional `(y_j, z_j)` pairs given anchor `a`: the pair
/// marginal of the six two-pair completions of `a`.
pub fn conditional_pairs(a: u8) -> [(u8, u8); 6] {
    let s = add3(a, 1);
    let t = add3(a, 2);
    [(a, s), (a, t), (s, a), (s, s), (t, a), (t, t)]
}

/// `E[omega^(beta * y_j + gamma * z_j) | x_i = a]` by enumerating the six
/// conditional pairs.
pub fn character_block_expectation(beta: u8, gamma: u8, a: u8) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for (y, z) in conditional_pairs(a) {
        sum += omega_pow(add3(mul3(beta, y), mul3(gamma, z)));
    }
    sum / 6.0
}

/// Closed form of the same expectation: `(-1/2)^(#beta) * omega^(2 a beta)`
/// when `beta == gamma`, zero otherwise.
pub fn character_block_closed_form(beta: u8, gamma: u8, a: u8) -> Complex64 {
    if beta != gamma {
        return Complex64::new(0.0, 0.0);
    }
    if beta == 0 {
        return Complex64::new(1.0, 0.0);
    }
    omega_pow(mul3(mul3(2, a), beta)) * -0.5
}

fn check_pair_shapes(space: &FourNatSpace, n_small: usize, n_large: usize) -> Result<()> {
    let blocks = space.blocks();
    if n_small != blocks.blocks() || n_large != blocks.len() {
        return Err(Error::Shape(format!(
            "tables of arities {n_small} and {n_large} against block map {}x{}",
            blocks.blocks(),
            blocks.width()
        )));
    }
    Ok(())
}

/// `E[f1(x) * g1(y)]` over the coupled distribution.
pub fn expect_xy(space: &FourNatSpace, f1: &ComplexTable, g1: &ComplexTable) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for o in space.outcomes() {
        sum += f1.value_at(o.x as usize) * g1.value_at(o.y as usize);
    }
    sum / space.len() as f64
}

/// `E[g1(y) * g2(z)]` over the coupled distribution.
pub fn expect_yz(space: &FourNatSpace, g1: &ComplexTable, g2: &ComplexTable) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for o in space.outcomes() {
        sum += g1.value_at(o.y as usize) * g2.value_at(o.z as usize);
    }
    sum / space.len() as f64
}

/// `E[f1(x) * g1(y) * g2(z)]` over the coupled distribution.
pub fn expect_xyz(
    space: &FourNatSpace,
    f1: &ComplexTable,
    g1: &ComplexTable,
    g2: &ComplexTable,
) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for o in space.outcomes() {
        sum += f1.value_at(o.x as usize) * g1.value_at(o.y as usize) * g2.value_at(o.z as usize);
    }
    sum / space.len() as f64
}

/// `E[g1(y) * g2(z) * g3(w)]` over the coupled distribution.
pub fn expect_yzw(
    space: &FourNatSpace,
    g1: &ComplexTable,
    g2: &ComplexTable,
    g3: &ComplexTable,
) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for o in space.outcomes() {
        sum += g1.value_at(o.y as usize) * g2.value_at(o.z as usize) * g3.value_at(o.w as usize);
    }
    sum / space.len() as f64
}

/// Mixed triple product expansion:
/// `E[f1(x) g1(y) g2(z)] = sum over alpha of
///  hat(f1)(pi3(alpha)) hat(g1)(alpha) hat(g2)(alpha) (-1/2)^(#alpha)`.
pub fn triple_product_expansion(
    f1: &ComplexTable,
    g1: &ComplexTable,
    g2: &ComplexTable,
    space: &FourNatSpace,
) -> Result<ResidualCheck> {
    check_pair_shapes(space, f1.n(), g1.n())?;
    check_pair_shapes(space, f1.n(), g2.n())?;
    let blocks = space.blocks();
    let l = blocks.len();
    let f_spec = transform_complex(f1);
    let g1_spec = transform_complex(g1);
    let g2_spec = transform_complex(g2);
    let lhs = expect_xyz(space, f1, g1, g2);
    let mut rhs = Complex64::new(0.0, 0.0);
    for alpha in 0..POW3[l] {
        let damping = (-0.5f64).powi(support_count(l, alpha) as i32);
        rhs +=
            f_spec.at(pi3_index(alpha, blocks)) * g1_spec.at(alpha) * g2_spec.at(alpha) * damping;
    }
    Ok(ResidualCheck::new(lhs, rhs))
}

/// Pair correlation expansion:
/// `E[g1(y) conj(g2(z))] = sum over alpha with pi3(alpha) = 0 of
///  hat(g1)(alpha) conj(hat(g2)(-alpha)) (-1/2)^(#alpha)`.
pub fn pair_product_expansion(
    g1: &ComplexTable,
    g2: &ComplexTable,
    space: &FourNatSpace,
) -> Result<ResidualCheck> {
    let blocks = space.blocks();
    let l = blocks.len();
    if g1.n() != l || g2.n() != l {
        return Err(Error::Shape(
            "pair expansion needs two large-side tables".into(),
        ));
    }
    let g1_spec = transform_complex(g1);
    let g2_spec = transform_complex(g2);
    let lhs = expect_yz(space, g1, &g2.conjugate());
    let mut rhs = Complex64::new(0.0, 0.0);
    for alpha in 0..POW3[l] {
        if pi3_index(alpha, blocks) != 0 {
            continue;
        }
        let damping = (-0.5f64).powi(support_count(l, alpha) as i32);
        rhs += g1_spec.at(alpha) * g2_spec.at(negate_index(l, alpha)).conj() * damping;
    }
    Ok(ResidualCheck::new(lhs, rhs))
}

/// Bound on the negated mixed triple product of phase tables:
/// `-Re E[f(x) g(y) g(z)] <= dec + |hat(f)(0)| * kernel mass of g`.
pub fn fgg_dec_bound(
    f: &FunctionTable,
    g: &FunctionTable,
    space: &FourNatSpace,
) -> Result<SlackCheck> {
    check_pair_shapes(space, f.n(), g.n())?;
    let blocks = space.blocks();
    let fp = ComplexTable::phases(f);
    let gp = ComplexTable::phases(g);
    let lhs = -expect_xyz(space, &fp, &gp, &gp).re;
    let f_spec = transform(f);
    let g_spec = transform(g);
    let rhs = dec_quantity(&f_spec, &g_spec, blocks)?
        + f_spec.at(0).norm() * kernel_mass(&g_spec, blocks)?;
    Ok(SlackCheck::new(lhs, rhs))
}

/// Per-digit factor table for the pure triple expansion:
/// `1 - (#(a + b) + #(b + c) + #(a + c)) / 2` over digit triples.
fn digit_factor_table() -> [[[f64; 3]; 3]; 3] {
    let mut table = [[[0.0f64; 3]; 3]; 3];
    for a in 0..3u8 {
        for b in 0..3u8 {
            for c in 0..3u8 {
                let nz = |v: u8| if !v.is_multiple_of(3) { 1.0 } else { 0.0 };
                table[a as usize][b as usize][c as usize] =
                    1.0 - (nz(add3(a, b)) + nz(add3(b, c)) + nz(add3(a, c))) / 2.0;
            }
        }
    }
    table
}

/// Whether the per-block digit sums of the three indices add to 0 mod 3 in
/// every block.
pub fn psi(alpha: usize, beta: usize, gamma: usize, blocks: &BlockMap) -> bool {
    let l = blocks.len();
    let pa = index_to_digits(blocks.blocks(), pi3_index(alpha, blocks)).expect("in range");
    let pb = index_to_digits(blocks.blocks(), pi3_index(beta, blocks)).expect("in range");
    let pc = index_to_digits(blocks.blocks(), pi3_index(gamma, blocks)).expect("in range");
    debug_assert!(alpha < POW3[l] && beta < POW3[l] && gamma < POW3[l]);
    (0..blocks.blocks()).all(|i| (pa[i] + pb[i] + pc[i]).is_multiple_of(3))
}

/// Coefficient of `hat(g1)(alpha) hat(g2)(beta) hat(g3)(gamma)` in the
/// pure triple expansion: the product over coordinates of the digit
/// factors of the pairwise sums.
pub fn phi(alpha: usize, beta: usize, gamma: usize, l: usize) -> f64 {
    let table = digit_factor_table();
    let mut product = 1.0f64;
    let (mut ra, mut rb, mut rc) = (alpha, beta, gamma);
    for _ in 0..l {
        product *= table[ra % 3][rb % 3][rc % 3];
        if product == 0.0 {
            return 0.0;
        }
        ra /= 3;
        rb /= 3;
        rc /= 3;
    }
    product
}

/// Pure triple product expansion over the large side:
/// `E[g1(y) g2(z) g3(w)]` equals the sum of
/// `hat(g1)(alpha) hat(g2)(beta) hat(g3)(gamma) * phi` over triples
/// passing `psi`.
pub fn triple_self_expansion(
    g1: &ComplexTable,
    g2: &ComplexTable,
    g3: &ComplexTable,
    space: &FourNatSpace,
) -> Result<ResidualCheck> {
    let blocks = space.blocks();
    let l = blocks.len();
    let k = blocks.blocks();
    if g1.n() != l || g2.n() != l || g3.n() != l {
        return Err(Error::Shape(
            "triple expansion needs large-side tables".into(),
        ));
    }
    let g1_spec = transform_complex(g1);
    let g2_spec = transform_complex(g2);
    let g3_spec = transform_complex(g3);
    let lhs = expect_yzw(space, g1, g2, g3);

    // Bucket the indices by projected block-sum profile so the inner loop
    // runs only over tuples passing psi.
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); POW3[k]];
    let mut profile_digits: Vec<Vec<u8>> = Vec::with_capacity(POW3[l]);
    for alpha in 0..POW3[l] {
        let p = pi3_index(alpha, blocks);
        buckets[p].push(alpha);
        profile_digits.push(index_to_digits(k, p)?);
    }
    let factor = digit_factor_table();
    let mut rhs = Complex64::new(0.0, 0.0);
    for alpha in 0..POW3[l] {
        let ca = g1_spec.at(alpha);
        if ca.norm_sqr() == 0.0 {
            continue;
        }
        for beta in 0..POW3[l] {
            let cb = g2_spec.at(beta);
            if cb.norm_sqr() == 0.0 {
                continue;
            }
            let mut target = 0usize;
            for i in (0..k).rev() {
                let need = (6 - profile_digits[alpha][i] - profile_digits[beta][i]) % 3;
                target = target * 3 + need as usize;
            }
            for &gamma in &buckets[target] {
                let cc = g3_spec.at(gamma);
                if cc.norm_sqr() == 0.0 {
                    continue;
                }
                let mut product = 1.0f64;
                let (mut ra, mut rb, mut rc) = (alpha, beta, gamma);
                for _ in 0..l {
                    product *= factor[ra % 3][rb % 3][rc % 3];
                    if product == 0.0 {
                        break;
                    }
                    ra /= 3;
                    rb /= 3;
                    rc /= 3;
                }
                if product != 0.0 {
                    rhs += ca * cb * cc * product;
                }
            }
        }
    }
    Ok(ResidualCheck::new(lhs, rhs))
}

/// Mean-coefficient identity: `|hat(g)(0)|^2 = p^3 + q^3 + r^3 - 3 p q r`
/// where `p`, `q`, `r` are the output value frequencies of `g`.
pub fn value_frequency_identity(g: &FunctionTable) -> ResidualCheck {
    let spec = transform(g);
    let lhs = Complex64::new(spec.at(0).norm_sqr(), 0.0);
    let counts = g.value_counts();
    let total = g.len() as f64;
    let (p, q, r) = (
        counts[0] as f64 / total,
        counts[1] as f64 / total,
        counts[2] as f64 / total,
    );
    let rhs = Complex64::new(p * p * p + q * q * q + r * r * r - 3.0 * p * q * r, 0.0);
    ResidualCheck::new(lhs, rhs)
}

/// Diagonal indicator identity over the coupled triple:
/// `sum over a of E[1_a(y) 1_a(z) 1_a(w)] =
///  3 E[1_0(y) 1_1(z) 1_2(w)] + |hat(g)(0)|^2`.
///
/// Exact when `g` is folded (any block width) and for free tables when
/// every block has width 1. Free tables over wider blocks can leave a
/// residual: spectral triples whose per-digit supports differ inside a
/// block survive the block-sum constraint once a block has two or more
/// digits, and folding is what removes them. The width-2 table
/// `[2, 1, 2, 2, 2, 1, 2, 2, 1]` leaves a residual of 1/18.
pub fn indicator_triple_identity(g: &FunctionTable, space: &FourNatSpace) -> Result<ResidualCheck> {
    if g.n() != space.blocks().len() {
        return Err(Error::Shape(
            "indicator identity needs a large-side table".into(),
        ));
    }
    let ind: Vec<ComplexTable> = (0..3u8).map(|a| ComplexTable::indicator(g, a)).collect();
    let mut diagonal = Complex64::new(0.0, 0.0);
    for table in &ind {
        diagonal += expect_yzw(space, table, table, table);
    }
    let off = expect_yzw(space, &ind[0], &ind[1], &ind[2]);
    let mean_sq = transform(g).at(0).norm_sqr();
    Ok(ResidualCheck::new(
        diagonal,
        off * 3.0 + Complex64::new(mean_sq, 0.0),
    ))
}

/// Lower-bound consequence for the pure phase triple:
/// `-Re E[g(y) g(z) g(w)] <= 1/2 - (3/2) |hat(g)(0)|^2`.
///
/// Holds under the same hypotheses as [`indicator_triple_identity`]:
/// folded `g` at any block width, or free `g` over width-1 blocks.
/// Free tables over wider blocks can exceed this right-hand side (the
/// width-2 table `[2, 1, 2, 2, 2, 1, 2, 2, 1]` overshoots it by 1/12);
/// use [`ggg_even_bound`] for free tables.
pub fn ggg_mean_bound(g: &FunctionTable, space: &FourNatSpace) -> Result<SlackCheck> {
    if g.n() != space.blocks().len() {
        return Err(Error::Shape("triple bound needs a large-side table".into()));
    }
    let gp = ComplexTable::phases(g);
    let lhs = -expect_yzw(space, &gp, &gp, &gp).re;
    let rhs = 0.5 - 1.5 * transform(g).at(0).norm_sqr();
    Ok(SlackCheck::new(lhs, rhs))
}

/// Pure-triple bound valid for free tables at any block width:
/// `-Re E[g(y) g(z) g(w)] <=
///  1/2 - (3/2) |hat(g)(0)|^2 + (3/8) (even mass of g - |hat(g)(0)|^2)`.
///
/// The penalty term vanishes exactly when `g` is folded, recovering
/// [`ggg_mean_bound`]. The constant 3/8 is tight: exhaustive search over
/// all 3^9 tables on one block of width 2 attains it, and block-local
/// tables lift the same ratio to any wider shape. Any constant up to 9/4
/// here leaves the final three-coloring soundness constant unchanged.
pub fn ggg_even_bound(g: &FunctionTable, space: &FourNatSpace) -> Result<SlackCheck> {
    if g.n() != space.blocks().len() {
        return Err(Error::Shape("triple bound needs a large-side table".into()));
    }
    let gp = ComplexTable::phases(g);
    let lhs = -expect_yzw(space, &gp, &gp, &gp).re;
    let spec = transform(g);
    let mean_sq = spec.at(0).norm_sqr();
    let rhs = 0.5 - 1.5 * mean_sq + 0.375 * (even_mass(&spec) - mean_sq);
    Ok(SlackCheck::new(lhs, rhs))
}

/// Independent-mean bound:
/// `Re E[f(x) conj(g(y))] <= (|hat(f)(0)|^2 + |hat(g)(0)|^2) / 2`.
pub fn mean_product_bound(f: &FunctionTable, g: &FunctionTable) -> SlackCheck {
    let f0 = transform(f).at(0);
    let g0 = transform(g).at(0);
    let lhs = (f0 * g0.conj()).re;
    let rhs = (f0.norm_sqr() + g0.norm_sqr()) / 2.0;
    SlackCheck::new(lhs, rhs)
}

/// Evenness bound for the coupled pair:
/// `Re E[g(y) conj(g(z))] <= even mass of g`.
pub fn pair_even_bound(g: &FunctionTable, space: &FourNatSpace) -> Result<SlackCheck> {
    if g.n() != space.blocks().len() {
        return Err(Error::Shape("pair bound needs a large-side table".into()));
    }
    let gp = ComplexTable::phases(g);
    let lhs = expect_yz(space, &gp, &gp.conjugate()).re;
    let rhs = even_mass(&transform(g));
    Ok(SlackCheck::new(lhs, rhs))
}

/// Evenness-aware bound on the negated mixed triple:
/// `-Re E[f(x) g(y) g(z)] <=
///  |hat(f)(0)| (3/4 |hat(g)(0)|^2 + 1/4 even mass of g) + dec`.
pub fn fgg_even_bound(
    f: &FunctionTable,
    g: &FunctionTable,
    space: &FourNatSpace,
) -> Result<SlackCheck> {
    check_pair_shapes(space, f.n(), g.n())?;
    let fp = ComplexTable::phases(f);
    let gp = ComplexTable::phases(g);
    let lhs = -expect_xyz(space, &fp, &gp, &gp).re;
    let f_spec = transform(f);
    let g_spec = transform(g);
    let g0 = g_spec.at(0).norm_sqr();
    let rhs = f_spec.at(0).norm() * (0.75 * g0 + 0.25 * even_mass(&g_spec))
        + dec_quantity(&f_spec, &g_spec, space.blocks())?;
    Ok(SlackCheck::new(lhs, rhs))
}

/// Both displayed arithmetizations of the four-variable disequality,
/// evaluated on one tuple.
pub fn arithmetization_forms(values: [u8; 4]) -> (f64, f64) {
    let w: Vec<Complex64> = values.iter().map(|&v| omega_pow(v)).collect();
    let mut ordered_pairs = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                ordered_pairs += w[i] * w[j].conj();
            }
        }
    }
    let mut triples = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                triples += w[i] * w[j] * w[k];
            }
        }
    }
    let form1 = 5.0 / 9.0 + (ordered_pairs / 9.0 - triples / 9.0 - triples.conj() / 9.0).re;

    let mut pair_re = 0.0f64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            pair_re += (w[i] * w[j].conj()).re;
        }
    }
    let form2 = 5.0 / 9.0 + 2.0 / 9.0 * pair_re - 2.0 / 9.0 * triples.re;
    (form1, form2)
}

/// Worst residual of the two arithmetization forms against the predicate
/// over all 81 tuples.
pub fn arithmetization_residual() -> f64 {
    let mut worst = 0.0f64;
    for idx in 0..81usize {
        let values = [
            (idx % 3) as u8,
            ((idx / 3) % 3) as u8,
            ((idx / 9) % 3) as u8,
            ((idx / 27) % 3) as u8,
        ];
        let truth = if four_nat(values) { 1.0 } else { 0.0 };
        let (form1, form2) = arithmetization_forms(values);
        worst = worst.max((form1 - truth).abs()).max((form2 - truth).abs());
    }
    worst
}

/// Term-by-term expansion of the four-variable test expectation:
/// `E[4nat] = 5/9 + 2/3 Re E[f conj(g_y)] + 2/3 Re E[g_y conj(g_z)]
///  - 2/3 Re E[f g_y g_z] - 2/9 Re E[g_y g_z g_w]`.
pub fn four_nat_expectation_expansion(
    f: &FunctionTable,
    g: &FunctionTable,
    space: &FourNatSpace,
) -> Result<ResidualCheck> {
    check_pair_shapes(space, f.n(), g.n())?;
    let fp = ComplexTable::phases(f);
    let gp = ComplexTable::phases(g);
    let gc = gp.conjugate();
    let lhs = Complex64::new(
        crate::rational::to_f64(&space.four_nat_expectation(f, g)?),
        0.0,
    );
    let rhs = 5.0 / 9.0
        + (2.0 / 3.0) * expect_xy(space, &fp, &gc).re
        + (2.0 / 3.0) * expect_yz(space, &gp, &gc).re
        - (2.0 / 3.0) * expect_xyz(space, &fp, &gp, &gp).re
        - (2.0 / 9.0) * expect_yzw(space, &gp, &gp, &gp).re;
    Ok(ResidualCheck::new(lhs, Complex64::new(rhs, 0.0)))
}
