//! Pipeline from a d-to-1 label cover instance to a weighted CSP of
//! four-variable constraints over folded long-code tables.
//!
//! Every vertex contributes one orbit variable per folding class of its
//! table, so folding is structural: any assignment of the built instance
//! corresponds to a pair of folded table families and vice versa. One
//! constraint is emitted per distinct (shift, variable) pattern arising
//! from the test distribution of an edge, so the built instance value at
//! a table assignment equals the weighted sum of per-edge test pass
//! probabilities exactly.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::FourNatSpace;
use crate::csp::{Constraint, CspInstance, Predicate, Variable};
use crate::error::{Error, Result};
use crate::fourier::{dec_quantity, pi3_index, support_count, transform};
use crate::identities::SlackCheck;
use crate::rational::{int, ratio, to_f64, RatioJson, Rational};
use crate::ternary::{neg3, shift_index, BlockMap, FunctionTable, POW3};

/// One edge of a d-to-1 label cover instance. `preimages[s]` lists the
/// `d` large-side labels projecting to small-side label `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCoverEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Rational,
    pub preimages: Vec<Vec<usize>>,
}

impl LabelCoverEdge {
    /// Large-to-small label map: `forward[j] = s` iff `j` is in
    /// `preimages[s]`.
    pub fn forward_map(&self, large: usize) -> Result<Vec<usize>> {
        let mut forward = vec![usize::MAX; large];
        for (s, list) in self.preimages.iter().enumerate() {
            for &j in list {
                if j >= large || forward[j] != usize::MAX {
                    return Err(Error::Invalid(format!(
                        "edge preimages do not partition 0..{large}"
                    )));
                }
                forward[j] = s;
            }
        }
        if forward.contains(&usize::MAX) {
            return Err(Error::Invalid(format!(
                "edge preimages do not cover 0..{large}"
            )));
        }
        Ok(forward)
    }

    /// Concatenation of the preimage lists: the table coordinate read at
    /// test position `p`. Positions `s*d .. (s+1)*d` form block `s`.
    pub fn order(&self) -> Vec<usize> {
        self.preimages.concat()
    }
}

/// Weighted bipartite d-to-1 label cover instance. Small-side vertices
/// take labels in `0..k`, large-side vertices in `0..k*d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCoverInstance {
    pub k: usize,
    pub d: usize,
    pub n_u: usize,
    pub n_v: usize,
    pub edges: Vec<LabelCoverEdge>,
}

impl LabelCoverInstance {
    pub fn blocks(&self) -> Result<BlockMap> {
        BlockMap::new(self.k, self.d)
    }

    pub fn large(&self) -> usize {
        self.k * self.d
    }

    pub fn validate(&self) -> Result<()> {
        let blocks = self.blocks()?;
        if self.n_u == 0 || self.n_v == 0 || self.edges.is_empty() {
            return Err(Error::Invalid(
                "label cover instance with an empty side".into(),
            ));
        }
        let mut total = int(0);
        for e in &self.edges {
            if e.u >= self.n_u || e.v >= self.n_v {
                return Err(Error::Invalid(format!(
                    "edge ({}, {}) out of range",
                    e.u, e.v
                )));
            }
            if e.weight < int(0) {
                return Err(Error::Invalid("negative edge weight".into()));
            }
            if e.preimages.len() != self.k || e.preimages.iter().any(|list| list.len() != self.d) {
                return Err(Error::Invalid(format!(
                    "edge projection is not {}-to-1 onto {} labels",
                    self.d, self.k
                )));
            }
            e.forward_map(blocks.len())?;
            total += e.weight.clone();
        }
        if total != int(1) {
            return Err(Error::Invalid("edge weights must sum to 1".into()));
        }
        Ok(())
    }

    /// Weighted fraction of edges a labeling satisfies: edge `(u, v)` is
    /// satisfied iff the projection maps the label of `v` to the label
    /// of `u`.
    pub fn labeling_value(&self, labels_u: &[usize], labels_v: &[usize]) -> Result<Rational> {
        if labels_u.len() != self.n_u || labels_v.len() != self.n_v {
            return Err(Error::Shape(
                "labeling size differs from vertex counts".into(),
            ));
        }
        let large = self.large();
        if labels_u.iter().any(|&s| s >= self.k) || labels_v.iter().any(|&j| j >= large) {
            return Err(Error::Invalid("label out of range".into()));
        }
        let mut total = int(0);
        for e in &self.edges {
            let forward = e.forward_map(large)?;
            if forward[labels_v[e.v]] == labels_u[e.u] {
                total += e.weight.clone();
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&LabelCoverJson::try_from(self)?)
            .map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(&LabelCoverJson::try_from(self)?)
            .map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: LabelCoverJson =
            serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        dto.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelCoverJson {
    k: usize,
    d: usize,
    n_u: usize,
    n_v: usize,
    edges: Vec<EdgeJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    u: usize,
    v: usize,
    weight: RatioJson,
    pi: Vec<Vec<usize>>,
}

impl TryFrom<&LabelCoverInstance> for LabelCoverJson {
    type Error = Error;

    fn try_from(lc: &LabelCoverInstance) -> Result<Self> {
        lc.validate()?;
        Ok(LabelCoverJson {
            k: lc.k,
            d: lc.d,
            n_u: lc.n_u,
            n_v: lc.n_v,
            edges: lc
                .edges
                .iter()
                .map(|e| {
                    Ok(EdgeJson {
                        u: e.u,
                        v: e.v,
                        weight: RatioJson::from_rational(&e.weight)?,
                        pi: e.preimages.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

impl TryFrom<LabelCoverJson> for LabelCoverInstance {
    type Error = Error;

    fn try_from(dto: LabelCoverJson) -> Result<Self> {
        let lc = LabelCoverInstance {
            k: dto.k,
            d: dto.d,
            n_u: dto.n_u,
            n_v: dto.n_v,
            edges: dto
                .edges
                .into_iter()
                .map(|e| {
                    Ok(LabelCoverEdge {
                        u: e.u,
                        v: e.v,
                        weight: e.weight.to_rational()?,
                        preimages: e.pi,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        lc.validate()?;
        Ok(lc)
    }
}

/// Random satisfiable complete-bipartite instance together with a
/// satisfying labeling: projections are drawn uniformly conditioned on
/// mapping the chosen large label to the chosen small label.
pub fn satisfiable_demo<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    n_u: usize,
    n_v: usize,
    rng: &mut R,
) -> Result<(LabelCoverInstance, Vec<usize>, Vec<usize>)> {
    let blocks = BlockMap::new(k, d)?;
    let large = blocks.len();
    if n_u == 0 || n_v == 0 {
        return Err(Error::Invalid("demo instance with an empty side".into()));
    }
    let labels_u: Vec<usize> = (0..n_u).map(|_| rng.gen_range(0..k)).collect();
    let labels_v: Vec<usize> = (0..n_v).map(|_| rng.gen_range(0..large)).collect();
    let weight = ratio(1, (n_u * n_v) as i64);
    let mut edges = Vec::new();
    for u in 0..n_u {
        for (v, &label_v) in labels_v.iter().enumerate() {
            let mut rest: Vec<usize> = (0..large).filter(|&j| j != label_v).collect();
            rest.shuffle(rng);
            let mut preimages = vec![Vec::new(); k];
            preimages[labels_u[u]].push(label_v);
            for (s, list) in preimages.iter_mut().enumerate() {
                let need = d - usize::from(s == labels_u[u]);
                for _ in 0..need {
                    list.push(rest.pop().expect("enough labels"));
                }
                list.sort_unstable();
            }
            edges.push(LabelCoverEdge {
                u,
                v,
                weight: weight.clone(),
                preimages,
            });
        }
    }
    let lc = LabelCoverInstance {
        k,
        d,
        n_u,
        n_v,
        edges,
    };
    lc.validate()?;
    Ok((lc, labels_u, labels_v))
}

/// Orbit id and first trit of a point: the point is the representative
/// with rest-index `id` shifted by the trit.
fn orbit_of(n: usize, index: usize) -> (usize, u8) {
    let t = (index % 3) as u8;
    let rep = shift_index(n, index, neg3(t));
    (rep / 3, t)
}

/// Index of `sigma(y)` where `sigma(y)[order[p]] = y[p]`: the test point
/// `y` routed back to table coordinates.
fn scatter_index(order: &[usize], test_index: usize) -> usize {
    let mut image = 0usize;
    let mut rest = test_index;
    for &q in order {
        image += (rest % 3) * POW3[q];
        rest /= 3;
    }
    image
}

/// The CSP produced from a label cover instance, with bookkeeping that
/// remembers which constraints belong to which edge.
#[derive(Debug, Clone)]
pub struct BuiltInstance {
    pub csp: CspInstance,
    pub edge_ranges: Vec<std::ops::Range<usize>>,
    pub blocks: BlockMap,
    pub n_u: usize,
    pub n_v: usize,
}

impl BuiltInstance {
    pub fn u_span(&self) -> usize {
        POW3[self.blocks.blocks() - 1]
    }

    pub fn v_span(&self) -> usize {
        POW3[self.blocks.len() - 1]
    }

    fn u_base(&self, i: usize) -> usize {
        i * self.u_span()
    }

    fn v_base(&self, j: usize) -> usize {
        self.n_u * self.u_span() + j * self.v_span()
    }

    /// Assignment encoding one folded table per vertex: the orbit
    /// variables take the table values on the orbit representatives.
    pub fn tables_to_assignment(
        &self,
        tables_u: &[FunctionTable],
        tables_v: &[FunctionTable],
    ) -> Result<Vec<usize>> {
        if tables_u.len() != self.n_u || tables_v.len() != self.n_v {
            return Err(Error::Shape("one table per vertex is required".into()));
        }
        let mut assignment = Vec::with_capacity(self.csp.vars.len());
        for f in tables_u {
            if f.n() != self.blocks.blocks() {
                return Err(Error::Shape("small-side table arity mismatch".into()));
            }
            assignment.extend(f.representatives()?.into_iter().map(usize::from));
        }
        for g in tables_v {
            if g.n() != self.blocks.len() {
                return Err(Error::Shape("large-side table arity mismatch".into()));
            }
            assignment.extend(g.representatives()?.into_iter().map(usize::from));
        }
        Ok(assignment)
    }

    /// Folded tables read back from an assignment; inverse of
    /// [`BuiltInstance::tables_to_assignment`].
    pub fn assignment_to_tables(
        &self,
        assignment: &[usize],
    ) -> Result<(Vec<FunctionTable>, Vec<FunctionTable>)> {
        if assignment.len() != self.csp.vars.len() {
            return Err(Error::Shape(
                "assignment length differs from variables".into(),
            ));
        }
        let reps = |base: usize, span: usize| -> Result<Vec<u8>> {
            assignment[base..base + span]
                .iter()
                .map(|&x| {
                    u8::try_from(x)
                        .ok()
                        .filter(|&t| t < 3)
                        .ok_or_else(|| Error::Invalid("orbit value out of range".into()))
                })
                .collect()
        };
        let mut tables_u = Vec::with_capacity(self.n_u);
        for i in 0..self.n_u {
            let r = reps(self.u_base(i), self.u_span())?;
            tables_u.push(FunctionTable::fold_extend(self.blocks.blocks(), &r)?);
        }
        let mut tables_v = Vec::with_capacity(self.n_v);
        for j in 0..self.n_v {
            let r = reps(self.v_base(j), self.v_span())?;
            tables_v.push(FunctionTable::fold_extend(self.blocks.len(), &r)?);
        }
        Ok((tables_u, tables_v))
    }

    /// Weighted value contributed by one edge's constraints.
    pub fn edge_value(&self, edge: usize, assignment: &[usize]) -> Result<Rational> {
        let range = self
            .edge_ranges
            .get(edge)
            .ok_or_else(|| Error::Invalid(format!("edge {edge} out of range")))?;
        let mut total = int(0);
        for c in &self.csp.constraints[range.clone()] {
            let labels: Vec<usize> = c.vars.iter().map(|&v| assignment[v]).collect();
            if c.predicate.eval(&labels)? {
                total += c.weight.clone();
            }
        }
        Ok(total)
    }
}

/// Expands every edge of a label cover instance into four-variable
/// constraints on orbit variables, one per distinct pattern in the test
/// distribution.
pub fn build_instance(lc: &LabelCoverInstance) -> Result<BuiltInstance> {
    lc.validate()?;
    let blocks = lc.blocks()?;
    let space = FourNatSpace::new(blocks)?;
    let k = blocks.blocks();
    let l = blocks.len();
    let u_span = POW3[k - 1];
    let v_span = POW3[l - 1];

    let mut vars = Vec::with_capacity(lc.n_u * u_span + lc.n_v * v_span);
    for i in 0..lc.n_u {
        for m in 0..u_span {
            vars.push(Variable {
                name: format!("u{i}_r{m}"),
                domain: 3,
            });
        }
    }
    for j in 0..lc.n_v {
        for m in 0..v_span {
            vars.push(Variable {
                name: format!("v{j}_r{m}"),
                domain: 3,
            });
        }
    }
    let v_base0 = lc.n_u * u_span;

    let mut constraints = Vec::new();
    let mut edge_ranges = Vec::with_capacity(lc.edges.len());
    for edge in &lc.edges {
        let start = constraints.len();
        let order = edge.order();
        let u_base = edge.u * u_span;
        let v_base = v_base0 + edge.v * v_span;
        let mut patterns: BTreeMap<([u8; 4], [usize; 4]), u64> = BTreeMap::new();
        for o in space.outcomes() {
            let (ru, tu) = orbit_of(k, o.x as usize);
            let (ry, ty) = orbit_of(l, scatter_index(&order, o.y as usize));
            let (rz, tz) = orbit_of(l, scatter_index(&order, o.z as usize));
            let (rw, tw) = orbit_of(l, scatter_index(&order, o.w as usize));
            *patterns
                .entry((
                    [tu, ty, tz, tw],
                    [u_base + ru, v_base + ry, v_base + rz, v_base + rw],
                ))
                .or_insert(0) += 1;
        }
        for ((shifts, slot_vars), count) in patterns {
            constraints.push(Constraint {
                predicate: Predicate::FourNat { shifts },
                vars: slot_vars.to_vec(),
                weight: edge.weight.clone() * ratio(count as i64, space.len() as i64),
            });
        }
        edge_ranges.push(start..constraints.len());
    }

    let csp = CspInstance { vars, constraints };
    csp.validate()?;
    Ok(BuiltInstance {
        csp,
        edge_ranges,
        blocks,
        n_u: lc.n_u,
        n_v: lc.n_v,
    })
}

/// Dictator tables encoding a labeling.
pub fn dictator_tables(
    lc: &LabelCoverInstance,
    labels_u: &[usize],
    labels_v: &[usize],
) -> Result<(Vec<FunctionTable>, Vec<FunctionTable>)> {
    if labels_u.len() != lc.n_u || labels_v.len() != lc.n_v {
        return Err(Error::Shape(
            "labeling size differs from vertex counts".into(),
        ));
    }
    let tables_u = labels_u
        .iter()
        .map(|&s| FunctionTable::dictator(lc.k, s))
        .collect::<Result<Vec<_>>>()?;
    let tables_v = labels_v
        .iter()
        .map(|&j| FunctionTable::dictator(lc.large(), j))
        .collect::<Result<Vec<_>>>()?;
    Ok((tables_u, tables_v))
}

/// The reordered table an edge actually tests: test position `p` reads
/// table coordinate `order[p]`.
pub fn edge_table(edge: &LabelCoverEdge, g: &FunctionTable) -> Result<FunctionTable> {
    g.permute_coordinates(&edge.order())
}

/// Label distribution decoded from a folded table: coordinate `j`
/// receives the squared coefficient mass of every frequency whose
/// support contains `j`, split evenly over the support. The entries sum
/// to 1.
pub fn decode_spectrum(g: &FunctionTable) -> Result<Vec<f64>> {
    g.require_folded()?;
    let n = g.n();
    let spec = transform(g);
    let mut probs = vec![0.0f64; n];
    for alpha in 1..POW3[n] {
        let mass = spec.at(alpha).norm_sqr();
        if mass == 0.0 {
            continue;
        }
        let support = support_count(n, alpha);
        let share = mass / support as f64;
        let mut rest = alpha;
        for p in probs.iter_mut() {
            if rest % 3 != 0 {
                *p += share;
            }
            rest /= 3;
        }
    }
    Ok(probs)
}

/// Draws one label from a decoded distribution.
pub fn sample_label<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut t = rng.gen::<f64>() * total;
    let mut last = 0usize;
    for (j, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = j;
        t -= p;
        if t <= 0.0 {
            return j;
        }
    }
    last
}

/// Expected label cover value of the labeling obtained by decoding every
/// vertex table independently.
pub fn expected_decoded_value(
    lc: &LabelCoverInstance,
    tables_u: &[FunctionTable],
    tables_v: &[FunctionTable],
) -> Result<f64> {
    if tables_u.len() != lc.n_u || tables_v.len() != lc.n_v {
        return Err(Error::Shape("one table per vertex is required".into()));
    }
    let dist_u = tables_u
        .iter()
        .map(decode_spectrum)
        .collect::<Result<Vec<_>>>()?;
    let dist_v = tables_v
        .iter()
        .map(decode_spectrum)
        .collect::<Result<Vec<_>>>()?;
    let large = lc.large();
    let mut total = 0.0f64;
    for e in &lc.edges {
        let forward = e.forward_map(large)?;
        let mut agree = 0.0f64;
        for (j, &s) in forward.iter().enumerate() {
            agree += dist_v[e.v][j] * dist_u[e.u][s];
        }
        total += to_f64(&e.weight) * agree;
    }
    Ok(total)
}

/// Frequencies kept by the decoding argument: nonzero projected profile
/// and damped small-side coefficient at least `3 epsilon / 8`.
#[derive(Debug, Clone)]
pub struct GoodAlphaReport {
    pub epsilon: f64,
    pub threshold: f64,
    pub members: Vec<usize>,
    pub member_mass: f64,
    pub min_small_coeff_sq: f64,
    pub max_support: u32,
    pub consequences_hold: bool,
}

/// Applies the decoding filter to the spectra of a table pair.
pub fn good_alpha_set(
    f: &FunctionTable,
    g: &FunctionTable,
    blocks: &BlockMap,
    epsilon: f64,
) -> Result<GoodAlphaReport> {
    if epsilon <= 0.0 || epsilon > 1.0 {
        return Err(Error::Invalid(format!("epsilon {epsilon} out of (0, 1]")));
    }
    if f.n() != blocks.blocks() || g.n() != blocks.len() {
        return Err(Error::Shape(
            "table arities differ from the block map".into(),
        ));
    }
    let threshold = 3.0 * epsilon / 8.0;
    let f_spec = transform(f);
    let g_spec = transform(g);
    let l = blocks.len();
    let mut members = Vec::new();
    let mut member_mass = 0.0f64;
    let mut min_small_coeff_sq = f64::INFINITY;
    let mut max_support = 0u32;
    for alpha in 0..POW3[l] {
        let projected = pi3_index(alpha, blocks);
        if projected == 0 {
            continue;
        }
        let small = f_spec.at(projected).norm();
        let support = support_count(l, alpha);
        if small * 0.5f64.powi(support as i32) < threshold {
            continue;
        }
        members.push(alpha);
        member_mass += g_spec.at(alpha).norm_sqr();
        min_small_coeff_sq = min_small_coeff_sq.min(small * small);
        max_support = max_support.max(support);
    }
    let support_cap = (8.0 / (3.0 * epsilon)).log2();
    let consequences_hold = members.iter().all(|&alpha| {
        let s = support_count(l, alpha);
        s >= 1 && (s as f64) <= support_cap + 1e-12
    }) && (members.is_empty()
        || min_small_coeff_sq >= 9.0 * epsilon * epsilon / 64.0 - 1e-12);
    Ok(GoodAlphaReport {
        epsilon,
        threshold,
        members,
        member_mass,
        min_small_coeff_sq,
        max_support,
        consequences_hold,
    })
}

/// Soundness consequence in decoding form: the decoding quantity is at
/// least `3/2 (pass - 2/3)`, so pass probability `2/3 + epsilon/2`
/// forces decoding quantity at least `3 epsilon / 4`.
pub fn decoding_bound(
    space: &FourNatSpace,
    f: &FunctionTable,
    g: &FunctionTable,
) -> Result<SlackCheck> {
    let pass = space.pass_probability(f, g)?;
    let dec = dec_quantity(&transform(f), &transform(g), space.blocks())?;
    Ok(SlackCheck::raw(1.5 * (to_f64(&pass) - 2.0 / 3.0), dec))
}
