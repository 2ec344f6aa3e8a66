//! Independent oracles: every quantity checked here is recomputed by a
//! second, deliberately different method (direct process simulation,
//! independent enumeration with a different decomposition, local search)
//! and compared against the exact machinery.

use csp3::coupling::{FourNatSpace, TwoNLinSpace};
use csp3::csp::{four_nat, z3_vars, Constraint, CspInstance, Predicate};
use csp3::rational::{int, ratio, to_f64, Rational};
use csp3::ternary::{index_to_digits, BlockMap, FunctionTable, POW3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-(x, y) enumeration of the middle distribution with explicit
/// conditional weights, avoiding the precomputed outcome list.
fn two_nlin_pass_by_conditioning(
    blocks: &BlockMap,
    f: &FunctionTable,
    g: &FunctionTable,
    h: &FunctionTable,
) -> Rational {
    let k = blocks.blocks();
    let l = blocks.len();
    let mut total = int(0);
    for x_idx in 0..POW3[k] {
        let x = index_to_digits(k, x_idx).unwrap();
        for y_idx in 0..POW3[l] {
            let y = index_to_digits(l, y_idx).unwrap();
            let choices: Vec<Vec<u8>> = (0..l)
                .map(|j| {
                    let xi = x[blocks.block_of(j)];
                    (0..3u8).filter(|&c| c != xi && c != y[j]).collect()
                })
                .collect();
            let mut pick = vec![0usize; l];
            loop {
                let z_idx: usize = (0..l).map(|j| choices[j][pick[j]] as usize * POW3[j]).sum();
                let mut z_weight = int(1);
                for c in &choices {
                    z_weight /= int(c.len() as i64);
                }
                let hz = h.value_at(z_idx);
                let mut pass = int(0);
                if f.value_at(x_idx) != hz {
                    pass += ratio(1, 4);
                }
                if g.value_at(y_idx) != hz {
                    pass += ratio(3, 4);
                }
                total += z_weight * pass;
                let mut j = 0;
                loop {
                    if j == l {
                        break;
                    }
                    pick[j] += 1;
                    if pick[j] < choices[j].len() {
                        break;
                    }
                    pick[j] = 0;
                    j += 1;
                }
                if j == l {
                    break;
                }
            }
        }
    }
    total / int((POW3[k] * POW3[l]) as i64)
}

#[test]
fn conditional_enumeration_agrees_with_the_outcome_space() {
    let blocks = BlockMap::new(2, 2).unwrap();
    let space = TwoNLinSpace::new(blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..5 {
        let f = FunctionTable::random(2, &mut rng).unwrap();
        let g = FunctionTable::random(4, &mut rng).unwrap();
        let h = FunctionTable::random(4, &mut rng).unwrap();
        assert_eq!(
            space.pass_probability_unfolded(&f, &g, &h).unwrap(),
            two_nlin_pass_by_conditioning(&blocks, &f, &g, &h)
        );
    }
}

/// Simulates the two-disequation test directly from its process
/// definition and checks the exact probability within binomial noise.
#[test]
fn monte_carlo_simulation_matches_the_exact_pass_probability() {
    let blocks = BlockMap::new(2, 2).unwrap();
    let space = TwoNLinSpace::new(blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let f = FunctionTable::random(2, &mut rng).unwrap();
    let g = FunctionTable::random(4, &mut rng).unwrap();
    let h = FunctionTable::random(4, &mut rng).unwrap();
    let exact = to_f64(&space.pass_probability_unfolded(&f, &g, &h).unwrap());

    let (k, l) = (blocks.blocks(), blocks.len());
    let samples = 1_000_000u32;
    let mut hits = 0u64;
    for _ in 0..samples {
        let x: Vec<u8> = (0..k).map(|_| rng.gen_range(0..3u8)).collect();
        let y: Vec<u8> = (0..l).map(|_| rng.gen_range(0..3u8)).collect();
        let mut z_idx = 0usize;
        for j in 0..l {
            let xi = x[blocks.block_of(j)];
            let allowed: Vec<u8> = (0..3u8).filter(|&c| c != xi && c != y[j]).collect();
            let pick = allowed[rng.gen_range(0..allowed.len())];
            z_idx += pick as usize * POW3[j];
        }
        let x_idx: usize = (0..k).map(|i| x[i] as usize * POW3[i]).sum();
        let y_idx: usize = (0..l).map(|j| y[j] as usize * POW3[j]).sum();
        let hz = h.value_at(z_idx);
        let checked = if rng.gen_range(0..4u8) == 0 {
            f.value_at(x_idx)
        } else {
            g.value_at(y_idx)
        };
        if checked != hz {
            hits += 1;
        }
    }
    let estimate = hits as f64 / samples as f64;
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    assert!(
        (estimate - exact).abs() <= 3.5 * sigma.max(1e-6),
        "estimate {estimate} exact {exact} sigma {sigma}"
    );
}

/// Simulates the four-variable test from its process definition.
#[test]
fn monte_carlo_simulation_matches_the_four_variable_expectation() {
    let blocks = BlockMap::new(2, 2).unwrap();
    let space = FourNatSpace::new(blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let f = FunctionTable::random(2, &mut rng).unwrap();
    let g = FunctionTable::random(4, &mut rng).unwrap();
    let exact = to_f64(&space.four_nat_expectation(&f, &g).unwrap());

    let (k, l) = (blocks.blocks(), blocks.len());
    let samples = 400_000u32;
    let mut hits = 0u64;
    for _ in 0..samples {
        let x: Vec<u8> = (0..k).map(|_| rng.gen_range(0..3u8)).collect();
        let (mut y_idx, mut z_idx, mut w_idx) = (0usize, 0usize, 0usize);
        for j in 0..l {
            let a = x[blocks.block_of(j)];
            // Uniform two-pair completion of the anchor: the repeated
            // value and the slot of the single anchor copy.
            let other = if rng.gen_bool(0.5) { 1u8 } else { 2u8 };
            let rep = (a + other) % 3;
            let slot = rng.gen_range(0..3usize);
            let mut col = [rep; 3];
            col[slot] = a;
            y_idx += col[0] as usize * POW3[j];
            z_idx += col[1] as usize * POW3[j];
            w_idx += col[2] as usize * POW3[j];
        }
        let x_idx: usize = (0..k).map(|i| x[i] as usize * POW3[i]).sum();
        if four_nat([
            f.value_at(x_idx),
            g.value_at(y_idx),
            g.value_at(z_idx),
            g.value_at(w_idx),
        ]) {
            hits += 1;
        }
    }
    let estimate = hits as f64 / samples as f64;
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    assert!(
        (estimate - exact).abs() <= 3.5 * sigma.max(1e-6),
        "estimate {estimate} exact {exact} sigma {sigma}"
    );
}

fn pinned_instance() -> CspInstance {
    let mut constraints = Vec::new();
    let pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3)];
    for (t, (a, b)) in pairs.into_iter().enumerate() {
        let predicate = if t % 2 == 0 {
            Predicate::ThreeColoring
        } else {
            Predicate::TwoNLin {
                forbidden: (t % 3) as u8,
            }
        };
        constraints.push(Constraint {
            predicate,
            vars: vec![a, b],
            weight: ratio(1, pairs.len() as i64),
        });
    }
    CspInstance {
        vars: z3_vars(5),
        constraints,
    }
}

/// Recursive enumeration with its own bookkeeping, as a second
/// implementation of exhaustive optimization.
fn recursive_optimum(instance: &CspInstance, assignment: &mut Vec<usize>) -> Rational {
    if assignment.len() == instance.vars.len() {
        return instance.value(assignment).unwrap();
    }
    let mut best = int(-1);
    for label in 0..instance.vars[assignment.len()].domain {
        assignment.push(label);
        let value = recursive_optimum(instance, assignment);
        assignment.pop();
        if value > best {
            best = value;
        }
    }
    best
}

#[test]
fn recursive_enumeration_agrees_with_the_odometer_optimum() {
    let instance = pinned_instance();
    let (best, witness) = instance.optimum().unwrap();
    assert_eq!(instance.value(&witness).unwrap(), best);
    assert_eq!(recursive_optimum(&instance, &mut Vec::new()), best);
}

#[test]
fn restarted_local_search_finds_the_exact_optimum() {
    let instance = pinned_instance();
    let (best, _) = instance.optimum().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let n = instance.vars.len();
    let mut found = int(-1);
    for _ in 0..50 {
        let mut assignment: Vec<usize> = (0..n)
            .map(|v| rng.gen_range(0..instance.vars[v].domain))
            .collect();
        let mut current = instance.value(&assignment).unwrap();
        loop {
            let mut improved = false;
            for v in 0..n {
                let original = assignment[v];
                for label in 0..instance.vars[v].domain {
                    if label == original {
                        continue;
                    }
                    assignment[v] = label;
                    let candidate = instance.value(&assignment).unwrap();
                    if candidate > current {
                        current = candidate;
                        improved = true;
                    } else {
                        assignment[v] = original;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        assert!(current <= best);
        if current > found {
            found = current;
        }
    }
    assert_eq!(found, best);
}

/// The four-variable satisfying count has a closed form by inclusion
/// exclusion: `3^4` minus the surjective tuples `3^4 - 3 * 2^4 + 3`.
#[test]
fn four_nat_count_matches_inclusion_exclusion() {
    let onto = 81 - 3 * 16 + 3;
    assert_eq!(
        Predicate::FourNat { shifts: [0; 4] }.satisfying_count(),
        81 - onto
    );
    let mut direct = 0usize;
    for idx in 0..81usize {
        if four_nat([
            (idx % 3) as u8,
            ((idx / 3) % 3) as u8,
            ((idx / 9) % 3) as u8,
            ((idx / 27) % 3) as u8,
        ]) {
            direct += 1;
        }
    }
    assert_eq!(direct, 45);
}
