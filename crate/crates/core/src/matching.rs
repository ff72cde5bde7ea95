//! Pairing schedules: splits and matches of spectral fragments that certify
//! unitary-orbit distance bounds.
//!
//! Side-1 atoms get ids `0..n1`, side-2 atoms `n1..n1+n2`, and split children
//! take fresh ids after that. A split keeps the side and eigenvalue of its
//! parent. Every leaf fragment is consumed by exactly one match or by the
//! residual pair.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::mismatch_cells;
use crate::geometry::{connected_components, hausdorff_distance, GridBox, GridSet};
use crate::kdata::SpectralDatum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchingError {
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(f64, f64),
    #[error("spectrum must be a single component, found {0}")]
    NotSingleComponent(usize),
    #[error("index labels differ between the two data")]
    LabelMismatch,
    #[error("union of spectra is not connected")]
    UnionDisconnected,
    #[error("invalid blocks: {0}")]
    BadBlocks(String),
    #[error("block {block}: classes differ ({class1} vs {class2})")]
    ClassMismatch { block: usize, class1: String, class2: String },
    #[error("block {0}: union of spectra is not connected")]
    BlockDisconnected(usize),
    #[error("blocks {0} and {1} are not separated")]
    BlocksTouch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub id: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Step {
    Split { parent: usize, children: [usize; 2] },
    Match { side1: usize, side2: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingPlan {
    pub atoms1: Vec<Atom>,
    pub atoms2: Vec<Atom>,
    pub steps: Vec<Step>,
    pub residual_pair: (usize, usize),
    pub cost: f64,
}

impl PairingPlan {
    pub fn splits(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Split { .. })).count()
    }

    pub fn matches(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Match { .. })).count()
    }

    /// Matched leaf pairs including the residual, as `(side1, side2)` ids.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.steps
            .iter()
            .filter_map(|s| match *s {
                Step::Match { side1, side2 } => Some((side1, side2)),
                Step::Split { .. } => None,
            })
            .chain(std::iter::once(self.residual_pair))
            .collect()
    }

    /// Eigenvalue of every fragment id, following splits back to the atoms.
    pub fn fragment_values(&self) -> BTreeMap<usize, (u8, Complex64)> {
        let mut out: BTreeMap<usize, (u8, Complex64)> = self.atoms1.iter().map(|a| (a.id, (1, a.value))).collect();
        out.extend(self.atoms2.iter().map(|a| (a.id, (2, a.value))));
        for s in &self.steps {
            if let Step::Split { parent, children } = *s {
                if let Some(&v) = out.get(&parent) {
                    for c in children {
                        out.entry(c).or_insert(v);
                    }
                }
            }
        }
        out
    }
}

/// Builder that hands out fresh fragment ids.
struct PlanBuilder {
    atoms1: Vec<Atom>,
    atoms2: Vec<Atom>,
    values: Vec<Complex64>,
    steps: Vec<Step>,
    cost: f64,
}

impl PlanBuilder {
    fn new(side1: &[Complex64], side2: &[Complex64]) -> Self {
        let n1 = side1.len();
        let atoms1 = side1.iter().enumerate().map(|(i, &value)| Atom { id: i, value }).collect();
        let atoms2 = side2.iter().enumerate().map(|(i, &value)| Atom { id: n1 + i, value }).collect();
        let values = side1.iter().chain(side2).copied().collect();
        Self { atoms1, atoms2, values, steps: Vec::new(), cost: 0.0 }
    }

    fn split(&mut self, parent: usize) -> (usize, usize) {
        let (a, b) = (self.values.len(), self.values.len() + 1);
        let v = self.values[parent];
        self.values.extend([v, v]);
        self.steps.push(Step::Split { parent, children: [a, b] });
        (a, b)
    }

    fn pair(&mut self, side1: usize, side2: usize) {
        self.cost = self.cost.max((self.values[side1] - self.values[side2]).norm());
        self.steps.push(Step::Match { side1, side2 });
    }

    fn finish(mut self, side1: usize, side2: usize) -> PairingPlan {
        self.cost = self.cost.max((self.values[side1] - self.values[side2]).norm());
        PairingPlan { atoms1: self.atoms1, atoms2: self.atoms2, steps: self.steps, residual_pair: (side1, side2), cost: self.cost }
    }
}

/// Leaf elimination along a breadth-first spanning tree of the boxes of a
/// single region, with both sides carrying the box centres. Cost ≤ √2·ε.
pub fn tree_schedule(spectrum: &GridSet) -> Result<PairingPlan, MatchingError> {
    let comps = connected_components(spectrum);
    if comps.len() != 1 {
        return Err(MatchingError::NotSingleComponent(comps.len()));
    }
    let atoms = spectrum.atoms();
    let n = atoms.len();
    let mut b = PlanBuilder::new(&atoms, &atoms);
    if n == 1 {
        return Ok(b.finish(0, 1));
    }

    let boxes: Vec<GridBox> = spectrum.boxes().iter().copied().collect();
    let index: BTreeMap<GridBox, usize> = boxes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0usize]);
    parent[0] = 0;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for nb in boxes[v].neighbors8() {
            if let Some(&w) = index.get(&nb) {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
    }
    debug_assert_eq!(order.len(), n);

    // Current fragment of each vertex on each side.
    let mut f1: Vec<usize> = (0..n).collect();
    let f2: Vec<usize> = (n..2 * n).collect();
    for &v in order.iter().skip(1).rev() {
        let p = parent[v];
        let (q2, r2) = b.split(f2[v]);
        b.pair(f1[v], q2);
        let (q1, r1) = b.split(f1[p]);
        b.pair(q1, r2);
        f1[p] = r1;
    }
    let root = order[0];
    Ok(b.finish(f1[root], f2[root]))
}

/// Edge threshold `2√2·ε + d_H(σ1, σ2)` of the bipartite matching graph.
pub fn bipartite_threshold(s1: &GridSet, s2: &GridSet) -> f64 {
    2.0 * SQRT_2 * s1.resolution() + hausdorff_distance(s1, s2)
}

/// Back-and-forth elimination on the bipartite graph joining atoms of the two
/// sides at distance at most [`bipartite_threshold`].
pub fn bipartite_schedule(d1: &SpectralDatum, d2: &SpectralDatum) -> Result<PairingPlan, MatchingError> {
    if d1.resolution() != d2.resolution() {
        return Err(MatchingError::ResolutionMismatch(d1.resolution(), d2.resolution()));
    }
    if !mismatch_cells(d1, d2).is_empty() {
        return Err(MatchingError::LabelMismatch);
    }
    let union = d1.spectrum().union(d2.spectrum()).expect("same resolution");
    if connected_components(&union).len() != 1 {
        return Err(MatchingError::UnionDisconnected);
    }
    bipartite_core(d1.spectrum(), d2.spectrum()).ok_or(MatchingError::UnionDisconnected)
}

/// Dense adjacency over at most a few hundred vertices.
struct BitGraph {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BitGraph {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { words, rows: vec![vec![0; words]; n] }
    }

    fn add(&mut self, a: usize, b: usize) {
        self.rows[a][b / 64] |= 1 << (b % 64);
        self.rows[b][a / 64] |= 1 << (a % 64);
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.rows[a][b / 64] >> (b % 64) & 1 == 1
    }

    /// Whether `alive`, minus `skip`, induces a connected subgraph.
    fn connected_without(&self, alive: &[u64], skip: Option<usize>) -> bool {
        let mut left = alive.to_vec();
        if let Some(v) = skip {
            left[v / 64] &= !(1 << (v % 64));
        }
        let total: u32 = left.iter().map(|w| w.count_ones()).sum();
        let Some(start) = first_bit(&left) else { return true };
        let mut seen = vec![0u64; self.words];
        seen[start / 64] |= 1 << (start % 64);
        let mut stack = vec![start];
        let mut count = 1u32;
        while let Some(v) = stack.pop() {
            for (w, (row, live)) in self.rows[v].iter().zip(&left).enumerate() {
                let mut fresh = row & live & !seen[w];
                seen[w] |= fresh;
                while fresh != 0 {
                    let bit = fresh.trailing_zeros() as usize;
                    fresh &= fresh - 1;
                    stack.push(w * 64 + bit);
                    count += 1;
                }
            }
        }
        count == total
    }
}

fn first_bit(words: &[u64]) -> Option<usize> {
    words.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            (w != 0).then(|| {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                i * 64 + b
            })
        })
    })
}

/// `None` when the threshold graph is disconnected.
fn bipartite_core(s1: &GridSet, s2: &GridSet) -> Option<PairingPlan> {
    let (a1, a2) = (s1.atoms(), s2.atoms());
    let n1 = a1.len();
    let n = n1 + a2.len();
    let t = bipartite_threshold(s1, s2);
    let mut b = PlanBuilder::new(&a1, &a2);
    let mut g = BitGraph::new(n);
    for (i, x) in a1.iter().enumerate() {
        for (j, y) in a2.iter().enumerate() {
            if (x - y).norm() <= t {
                g.add(i, n1 + j);
            }
        }
    }
    let mut alive = vec![0u64; g.words];
    for v in 0..n {
        alive[v / 64] |= 1 << (v % 64);
    }
    if !g.connected_without(&alive, None) {
        return None;
    }

    let mut frag: Vec<usize> = (0..n).collect();
    for _ in 0..n - 2 {
        let live: Vec<usize> = bits(&alive).collect();
        let v = *live.iter().rev().find(|&&v| g.connected_without(&alive, Some(v)))?;
        let w = live
            .iter()
            .copied()
            .filter(|&w| g.has(v, w))
            .min_by(|&x, &y| {
                let (dx, dy) = (b.values[v] - b.values[x], b.values[v] - b.values[y]);
                dx.norm().total_cmp(&dy.norm()).then(x.cmp(&y))
            })?;
        let (q, r) = b.split(frag[w]);
        if v < n1 {
            b.pair(frag[v], q);
        } else {
            b.pair(q, frag[v]);
        }
        frag[w] = r;
        alive[v / 64] &= !(1 << (v % 64));
    }
    let last: Vec<usize> = bits(&alive).collect();
    let (x, y) = (last[0], last[1]);
    debug_assert!(x < n1 && y >= n1 && g.has(x, y));
    Some(b.finish(frag[x], frag[y]))
}

/// Pieces of `d` selected by component ids, as a set on the same grid.
fn sub_spectrum(d: &SpectralDatum, ids: &BTreeSet<usize>) -> GridSet {
    let mut boxes = Vec::new();
    let mut points = Vec::new();
    for c in d.components().iter().filter(|c| ids.contains(&c.id)) {
        match c.point() {
            Some(p) => points.push(p),
            None => boxes.extend_from_slice(c.boxes()),
        }
    }
    GridSet::new(d.resolution(), boxes, points).expect("pieces of a valid set")
}

/// One block of a partitioned schedule: component ids of each side.
pub type Block = (BTreeSet<usize>, BTreeSet<usize>);

fn check_partition(blocks: &[Block], count: usize, side: usize, pick: impl Fn(&Block) -> &BTreeSet<usize>) -> Result<(), MatchingError> {
    let mut seen = BTreeSet::new();
    for (i, blk) in blocks.iter().enumerate() {
        if pick(blk).is_empty() {
            return Err(MatchingError::BadBlocks(format!("block {i} selects nothing on side {side}")));
        }
        for &id in pick(blk) {
            if id >= count {
                return Err(MatchingError::BadBlocks(format!("block {i}: side {side} has no component {id}")));
            }
            if !seen.insert(id) {
                return Err(MatchingError::BadBlocks(format!("side {side} component {id} appears twice")));
            }
        }
    }
    if seen.len() != count {
        let missing = (0..count).find(|i| !seen.contains(i)).expect("some id missing");
        return Err(MatchingError::BadBlocks(format!("side {side} component {missing} is in no block")));
    }
    Ok(())
}

/// Bipartite schedules on separated blocks, concatenated. The residual pair
/// of every block but the last becomes an ordinary match.
pub fn partitioned_schedule(d1: &SpectralDatum, d2: &SpectralDatum, blocks: &[Block]) -> Result<PairingPlan, MatchingError> {
    if d1.resolution() != d2.resolution() {
        return Err(MatchingError::ResolutionMismatch(d1.resolution(), d2.resolution()));
    }
    if blocks.is_empty() {
        return Err(MatchingError::BadBlocks("no blocks".into()));
    }
    check_partition(blocks, d1.components().len(), 1, |b| &b.0)?;
    check_partition(blocks, d2.components().len(), 2, |b| &b.1)?;
    if !mismatch_cells(d1, d2).is_empty() {
        return Err(MatchingError::LabelMismatch);
    }
    let k0_trivial = d1.profile().k0.is_trivial();
    let mut parts = Vec::with_capacity(blocks.len());
    for (i, (ids1, ids2)) in blocks.iter().enumerate() {
        if !k0_trivial {
            let c1 = d1.clopen_class(ids1).expect("checked ids");
            let c2 = d2.clopen_class(ids2).expect("checked ids");
            if c1 != c2 {
                return Err(MatchingError::ClassMismatch { block: i, class1: c1.to_string(), class2: c2.to_string() });
            }
        }
        let (s1, s2) = (sub_spectrum(d1, ids1), sub_spectrum(d2, ids2));
        let union = s1.union(&s2).expect("same resolution");
        if connected_components(&union).len() != 1 {
            return Err(MatchingError::BlockDisconnected(i));
        }
        parts.push((s1, s2, union));
    }
    let eps = d1.resolution();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let ci = connected_components(&parts[i].2);
            let cj = connected_components(&parts[j].2);
            if ci.iter().any(|a| cj.iter().any(|b| a.intersects(b, eps))) {
                return Err(MatchingError::BlocksTouch(i, j));
            }
        }
    }

    let plans: Vec<PairingPlan> = parts
        .iter()
        .enumerate()
        .map(|(i, (s1, s2, _))| bipartite_core(s1, s2).ok_or(MatchingError::BlockDisconnected(i)))
        .collect::<Result<_, _>>()?;
    Ok(concatenate(&plans))
}

fn concatenate(plans: &[PairingPlan]) -> PairingPlan {
    let n1: usize = plans.iter().map(|p| p.atoms1.len()).sum();
    let n2: usize = plans.iter().map(|p| p.atoms2.len()).sum();
    let (mut next1, mut next2, mut fresh) = (0, n1, n1 + n2);
    let mut out = PairingPlan { atoms1: Vec::new(), atoms2: Vec::new(), steps: Vec::new(), residual_pair: (0, 0), cost: 0.0 };
    for (k, p) in plans.iter().enumerate() {
        let mut map = BTreeMap::new();
        for a in &p.atoms1 {
            map.insert(a.id, next1);
            out.atoms1.push(Atom { id: next1, value: a.value });
            next1 += 1;
        }
        for a in &p.atoms2 {
            map.insert(a.id, next2);
            out.atoms2.push(Atom { id: next2, value: a.value });
            next2 += 1;
        }
        for s in &p.steps {
            out.steps.push(match *s {
                Step::Split { parent, children } => {
                    let c = [fresh, fresh + 1];
                    fresh += 2;
                    map.insert(children[0], c[0]);
                    map.insert(children[1], c[1]);
                    Step::Split { parent: map[&parent], children: c }
                }
                Step::Match { side1, side2 } => Step::Match { side1: map[&side1], side2: map[&side2] },
            });
        }
        let residual = (map[&p.residual_pair.0], map[&p.residual_pair.1]);
        if k + 1 == plans.len() {
            out.residual_pair = residual;
        } else {
            out.steps.push(Step::Match { side1: residual.0, side2: residual.1 });
        }
        out.cost = out.cost.max(p.cost);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanViolation {
    DuplicateId(usize),
    WrongSide { step: usize, id: usize },
    UnknownFragment { step: usize, id: usize },
    ConsumedTwice { step: usize, id: usize },
    ChildNotFresh { step: usize, id: usize },
    ResidualUnusable(usize),
    AtomUnconsumed(usize),
    FragmentUnconsumed(usize),
    CostMismatch { stored: f64, computed: f64 },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::DuplicateId(id) => write!(f, "atom id {id} used twice"),
            PlanViolation::WrongSide { step, id } => write!(f, "step {step}: fragment {id} is on the wrong side"),
            PlanViolation::UnknownFragment { step, id } => write!(f, "step {step}: unknown fragment {id}"),
            PlanViolation::ConsumedTwice { step, id } => write!(f, "step {step}: fragment {id} already consumed"),
            PlanViolation::ChildNotFresh { step, id } => write!(f, "step {step}: child id {id} is not fresh"),
            PlanViolation::ResidualUnusable(id) => write!(f, "residual fragment {id} is unknown, consumed or on the wrong side"),
            PlanViolation::AtomUnconsumed(id) => write!(f, "atom {id} unconsumed"),
            PlanViolation::FragmentUnconsumed(id) => write!(f, "fragment {id} unconsumed"),
            PlanViolation::CostMismatch { stored, computed } => write!(f, "cost mismatch: stored {stored:?}, computed {computed:?}"),
        }
    }
}

/// Every plan invariant that fails; empty iff the plan is valid.
pub fn plan_validate(p: &PairingPlan) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    // id -> (side, value, consumed)
    let mut frags: BTreeMap<usize, (u8, Complex64, bool)> = BTreeMap::new();
    let mut atom_ids = BTreeSet::new();
    for (side, atoms) in [(1u8, &p.atoms1), (2u8, &p.atoms2)] {
        for a in atoms {
            if frags.insert(a.id, (side, a.value, false)).is_some() {
                out.push(PlanViolation::DuplicateId(a.id));
            }
            atom_ids.insert(a.id);
        }
    }
    let mut computed = 0.0f64;
    let consume = |frags: &mut BTreeMap<usize, (u8, Complex64, bool)>, step: usize, id: usize, side: Option<u8>, out: &mut Vec<PlanViolation>| {
        match frags.get_mut(&id) {
            None => {
                out.push(PlanViolation::UnknownFragment { step, id });
                None
            }
            Some(f) if f.2 => {
                out.push(PlanViolation::ConsumedTwice { step, id });
                None
            }
            Some(f) => {
                f.2 = true;
                if side.is_some_and(|s| s != f.0) {
                    out.push(PlanViolation::WrongSide { step, id });
                }
                Some((f.0, f.1))
            }
        }
    };
    for (i, s) in p.steps.iter().enumerate() {
        match *s {
            Step::Split { parent, children } => {
                let Some((side, value)) = consume(&mut frags, i, parent, None, &mut out) else { continue };
                if children[0] == children[1] {
                    out.push(PlanViolation::ChildNotFresh { step: i, id: children[1] });
                }
                for c in children {
                    match frags.entry(c) {
                        Entry::Occupied(_) => out.push(PlanViolation::ChildNotFresh { step: i, id: c }),
                        Entry::Vacant(e) => {
                            e.insert((side, value, false));
                        }
                    }
                }
            }
            Step::Match { side1, side2 } => {
                let a = consume(&mut frags, i, side1, Some(1), &mut out);
                let b = consume(&mut frags, i, side2, Some(2), &mut out);
                if let (Some(a), Some(b)) = (a, b) {
                    computed = computed.max((a.1 - b.1).norm());
                }
            }
        }
    }
    let (r1, r2) = p.residual_pair;
    let mut residual = Vec::new();
    for (id, side) in [(r1, 1u8), (r2, 2u8)] {
        match frags.get_mut(&id) {
            Some(f) if !f.2 && f.0 == side => {
                f.2 = true;
                residual.push(f.1);
            }
            _ => out.push(PlanViolation::ResidualUnusable(id)),
        }
    }
    if let [a, b] = residual[..] {
        computed = computed.max((a - b).norm());
    }
    for (&id, f) in &frags {
        if !f.2 {
            out.push(if atom_ids.contains(&id) {
                PlanViolation::AtomUnconsumed(id)
            } else {
                PlanViolation::FragmentUnconsumed(id)
            });
        }
    }
    if p.cost != computed {
        out.push(PlanViolation::CostMismatch { stored: p.cost, computed });
    }
    out
}
