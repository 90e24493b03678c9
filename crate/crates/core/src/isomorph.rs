//! Exact automorphism-group orders, isomorphism testing, and affine
//! automorphism harvesting.
//!
//! The search maps source points to target points one at a time. Every
//! assigned pair of source points pins down a block image, and once a
//! block image is known each further point on it is constrained; a point
//! on two mapped blocks is forced outright (the image is the intersection
//! of the two image blocks). Branching always picks the most constrained
//! unmapped point, with ties broken by lowest index so runs are
//! deterministic. Pruning comes from two colorings computed up front:
//! local grid profiles, and pair-signature colors anchored at the root
//! point (see `invar`). Color hashes are compared for equality only, so a
//! hash collision can cost time but never soundness; every witness that
//! leaves this module is re-checked by explicit relabeling.
//!
//! Group orders are exact and counted, not inferred: the search first
//! counts all completions fixing the root point (the stabilizer), then
//! resolves which root images admit at least one completion. Each such
//! image contributes exactly the stabilizer count (its completions form a
//! coset), so the total is `|orbit| * |stabilizer|`. For developments the
//! verified translation subgroup already covers the whole finite orbit,
//! which skips the per-image searches; the general path resolves every
//! image explicitly.

use crate::design::{Incidence, LineTable, PointMap, SteinerDesign};
use crate::invar::{anchored_colors, fnv1a_u64, fnv1a_slice, local_colors, profiles_with, ProfileSet};
use crate::modarith::CyclicGroup;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};

const UNSET: u32 = u32::MAX;

#[derive(Debug, thiserror::Error)]
pub enum IsoError {
    #[error("design fails verification")]
    InvalidDesign(crate::design::DesignReport),
    #[error("designs have different parameters: ({0},{1}) vs ({2},{3})")]
    ParameterMismatch(u32, u32, u32, u32),
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("design is not a development over the given group")]
    NotADevelopment,
    #[error(transparent)]
    Design(#[from] crate::design::DesignError),
}

/// Node limit for one search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 100_000_000,
        }
    }
}

/// How the group order is assembled from searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Count completions under every root image by explicit search.
    Exhaustive,
    /// Count the stabilizer once; resolve other root images to their
    /// first completion (a nonempty branch is a stabilizer coset).
    CosetCounting,
    /// Like `CosetCounting`, but when the design is a development whose
    /// translation generator verifies as an automorphism, the whole
    /// translation orbit of the root is credited without searching.
    #[default]
    OrbitShortcut,
}

/// A design with everything the engines need precomputed.
pub struct PreparedDesign {
    pub design: SteinerDesign,
    pub lines: LineTable,
    pub incidence: Incidence,
    pub profiles: ProfileSet,
    local_colors: Vec<u64>,
}

impl PreparedDesign {
    pub fn prepare(design: SteinerDesign) -> Result<Self, IsoError> {
        let verification = design.verify();
        let Some(lines) = verification.lines else {
            return Err(IsoError::InvalidDesign(verification.report));
        };
        let incidence = Incidence::build(&design);
        let profiles = profiles_with(&design, &lines, &incidence);
        let local_colors = local_colors(&profiles);
        Ok(PreparedDesign {
            design,
            lines,
            incidence,
            profiles,
            local_colors,
        })
    }

    /// Root point: first member of a largest local-color class. A generic
    /// point gives the smallest stabilizer subtree and the most
    /// discriminating anchored coloring; rooting at a special point (the
    /// fixed `∞` of a rotational design, say) would hand the search the
    /// whole group with nothing to prune on.
    fn root_point(&self) -> u32 {
        let mut class_size: HashMap<u64, u32> = HashMap::new();
        for &c in &self.local_colors {
            *class_size.entry(c).or_insert(0) += 1;
        }
        let mut best = 0u32;
        let mut best_size = 0u32;
        for (p, &c) in self.local_colors.iter().enumerate() {
            let size = class_size[&c];
            if size > best_size {
                best_size = size;
                best = p as u32;
            }
        }
        best
    }
}

/// Result of an automorphism-group computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutReport {
    /// Exact order when `complete`, otherwise a verified lower bound.
    pub order: u64,
    /// Completions fixing the root point.
    pub stabilizer_order: u64,
    /// Small generating set; product closure reproduces `order` exactly.
    pub generators: Vec<PointMap>,
    /// Affine automorphism count, when a harvest was attached.
    pub affine_count: Option<u64>,
    pub complete: bool,
    pub nodes: u64,
}

/// `true` iff the image of every block is a block.
pub fn verify_automorphism(design: &SteinerDesign, map: &PointMap) -> Result<bool, IsoError> {
    if map.len() != design.v() as usize {
        return Err(crate::design::DesignError::NotABijection {
            len: map.len(),
            v: design.v(),
        }
        .into());
    }
    let mut image = Vec::with_capacity(design.k() as usize);
    for block in design.blocks() {
        image.clear();
        image.extend(block.iter().map(|&p| map.image(p)));
        image.sort_unstable();
        if design.find_block(&image).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All affine automorphisms `x -> u*x + c` (with `∞` fixed when
/// `rotational`) of a development over `group`. The returned set is closed
/// under composition: it is `{units that preserve the design} x {all
/// shifts}`, and the translation generator is verified explicitly first.
pub fn affine_automorphisms(
    design: &SteinerDesign,
    group: &CyclicGroup,
    rotational: bool,
) -> Result<Vec<(u32, u32)>, IsoError> {
    let m = group.modulus();
    let expected_v = if rotational { m + 1 } else { m };
    if design.v() != expected_v {
        return Err(IsoError::NotADevelopment);
    }
    let translation = affine_point_map(group, rotational, 1, 1);
    if !verify_automorphism(design, &translation)? {
        return Err(IsoError::NotADevelopment);
    }

    let mut units_aut = Vec::new();
    for u in group.units() {
        let map = affine_point_map(group, rotational, u, 0);
        if verify_automorphism(design, &map)? {
            units_aut.push(u);
        }
    }
    // the multiplier set must itself be a group
    let set: HashSet<u32> = units_aut.iter().copied().collect();
    for &a in &units_aut {
        for &b in &units_aut {
            assert!(
                set.contains(&group.mul(a, b)),
                "unit harvest not closed under composition"
            );
        }
    }

    let mut out = Vec::with_capacity(units_aut.len() * m as usize);
    for &u in &units_aut {
        for c in 0..m {
            out.push((u, c));
        }
    }
    Ok(out)
}

/// The point map of `x -> u*x + c` in design coordinates.
pub fn affine_point_map(group: &CyclicGroup, rotational: bool, u: u32, c: u32) -> PointMap {
    let m = group.modulus();
    let mut image: Vec<u32> = (0..m).map(|x| group.add(group.mul(u, x), c)).collect();
    if rotational {
        image.push(m);
    }
    PointMap::new(image).expect("affine maps are bijections")
}

struct Searcher<'a> {
    src: &'a PreparedDesign,
    tgt: &'a PreparedDesign,
    src_colors: Vec<u64>,
    tgt_colors: Vec<u64>,
    tgt_classes: HashMap<u64, Vec<u32>>,
    src_anchor_cache: Option<(u32, Vec<u64>, Vec<u64>)>,

    point_img: Vec<u32>,
    point_pre: Vec<u32>,
    block_img: Vec<u32>,
    block_pre: Vec<u32>,
    assigned: Vec<u32>,
    secants: Vec<u32>,
    first_secant: Vec<u32>,
    second_secant: Vec<u32>,
    trail: Vec<Trail>,

    nodes: u64,
    max_nodes: u64,
    exhausted: bool,

    completions: u64,
    collect_limit: usize,
    collected: Vec<PointMap>,
    first_only: bool,
}

enum Trail {
    Point(u32),
    Block(u32),
    Secant(u32),
}

enum Step {
    Done,
    Stop,
}

impl<'a> Searcher<'a> {
    fn new(src: &'a PreparedDesign, tgt: &'a PreparedDesign, budget: SearchBudget) -> Self {
        let v = src.design.v() as usize;
        let b = src.design.block_count() as usize;
        let bt = tgt.design.block_count() as usize;
        Searcher {
            src,
            tgt,
            src_colors: Vec::new(),
            tgt_colors: Vec::new(),
            tgt_classes: HashMap::new(),
            src_anchor_cache: None,
            point_img: vec![UNSET; v],
            point_pre: vec![UNSET; tgt.design.v() as usize],
            block_img: vec![UNSET; b],
            block_pre: vec![UNSET; bt],
            assigned: Vec::with_capacity(v),
            secants: vec![0; v],
            first_secant: vec![UNSET; v],
            second_secant: vec![UNSET; v],
            trail: Vec::with_capacity(4 * v),
            nodes: 0,
            max_nodes: budget.max_nodes,
            exhausted: false,
            completions: 0,
            collect_limit: 0,
            collected: Vec::new(),
            first_only: false,
        }
    }

    /// Anchors both colorings and rejects root pairs whose color
    /// statistics differ. Returns false when the root branch is pruned.
    fn anchor(&mut self, src_root: u32, tgt_root: u32) -> bool {
        if self.src.local_colors[src_root as usize] != self.tgt.local_colors[tgt_root as usize] {
            return false;
        }
        match &self.src_anchor_cache {
            Some((root, colors, _)) if *root == src_root => {
                self.src_colors = colors.clone();
            }
            _ => {
                let sa = anchored_colors(
                    &self.src.design,
                    &self.src.lines,
                    &self.src.incidence,
                    src_root,
                );
                self.src_colors = self
                    .src
                    .local_colors
                    .iter()
                    .zip(&sa)
                    .map(|(&l, &a)| fnv1a_u64(l, a))
                    .collect();
                let mut sorted = self.src_colors.clone();
                sorted.sort_unstable();
                self.src_anchor_cache = Some((src_root, self.src_colors.clone(), sorted));
            }
        }
        let ta = anchored_colors(&self.tgt.design, &self.tgt.lines, &self.tgt.incidence, tgt_root);
        self.tgt_colors = self
            .tgt
            .local_colors
            .iter()
            .zip(&ta)
            .map(|(&l, &a)| fnv1a_u64(l, a))
            .collect();

        let src_sorted = &self.src_anchor_cache.as_ref().unwrap().2;
        let mut tgt_sorted = self.tgt_colors.clone();
        tgt_sorted.sort_unstable();
        if src_sorted != &tgt_sorted {
            return false;
        }

        self.tgt_classes.clear();
        for (q, &c) in self.tgt_colors.iter().enumerate() {
            self.tgt_classes.entry(c).or_default().push(q as u32);
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Trail::Point(p) => {
                    let q = self.point_img[p as usize];
                    self.point_pre[q as usize] = UNSET;
                    self.point_img[p as usize] = UNSET;
                    self.assigned.pop();
                }
                Trail::Block(b) => {
                    let t = self.block_img[b as usize];
                    self.block_pre[t as usize] = UNSET;
                    self.block_img[b as usize] = UNSET;
                }
                Trail::Secant(x) => {
                    self.secants[x as usize] -= 1;
                }
            }
        }
    }

    /// Maps `p -> q` and propagates every consequence. Returns false on
    /// contradiction (caller rewinds the trail).
    fn assign(&mut self, p0: u32, q0: u32) -> bool {
        let mut queue: VecDeque<(u32, u32)> = VecDeque::new();
        let mut forced: VecDeque<u32> = VecDeque::new();
        queue.push_back((p0, q0));
        loop {
            if let Some((p, q)) = queue.pop_front() {
                if !self.assign_one(p, q, &mut forced) {
                    return false;
                }
                continue;
            }
            let Some(x) = forced.pop_front() else {
                return true;
            };
            if self.point_img[x as usize] != UNSET {
                continue; // already handled; pair processing checked it
            }
            let a = self.block_img[self.first_secant[x as usize] as usize];
            let b = self.block_img[self.second_secant[x as usize] as usize];
            debug_assert!(a != UNSET && b != UNSET);
            let Some(y) = block_intersection(&self.tgt.design, a, b) else {
                return false;
            };
            queue.push_back((x, y));
        }
    }

    fn assign_one(&mut self, p: u32, q: u32, forced: &mut VecDeque<u32>) -> bool {
        let existing = self.point_img[p as usize];
        if existing != UNSET {
            return existing == q;
        }
        if self.point_pre[q as usize] != UNSET {
            return false;
        }
        if self.src_colors[p as usize] != self.tgt_colors[q as usize] {
            return false;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.exhausted = true;
            return false;
        }
        self.point_img[p as usize] = q;
        self.point_pre[q as usize] = p;
        // assigned must stay aligned with Point trail entries even when a
        // pair check below fails midway, so push both together
        self.trail.push(Trail::Point(p));
        let prior = self.assigned.len();
        self.assigned.push(p);

        for i in 0..prior {
            let w = self.assigned[i];
            let wq = self.point_img[w as usize];
            let ls = self.src.lines.line(p, w);
            let lt = self.tgt.lines.line(q, wq);
            let mapped = self.block_img[ls as usize];
            if mapped != UNSET {
                if mapped != lt {
                    return false;
                }
                continue;
            }
            if self.block_pre[lt as usize] != UNSET {
                return false;
            }
            self.block_img[ls as usize] = lt;
            self.block_pre[lt as usize] = ls;
            self.trail.push(Trail::Block(ls));
            for &x in self.src.design.block(ls) {
                if self.point_img[x as usize] != UNSET {
                    continue;
                }
                let count = &mut self.secants[x as usize];
                *count += 1;
                self.trail.push(Trail::Secant(x));
                match *count {
                    1 => self.first_secant[x as usize] = ls,
                    2 => {
                        self.second_secant[x as usize] = ls;
                        forced.push_back(x);
                    }
                    _ => {}
                }
            }
        }
        true
    }

    /// Most constrained unmapped point and its candidate images.
    fn branch_candidates(&self) -> Option<(u32, Vec<u32>)> {
        let v = self.src.design.v();
        if self.assigned.len() == v as usize {
            return None;
        }
        let mut best: Option<(usize, u32, bool)> = None; // (count, point, via_block)
        for p in 0..v {
            if self.point_img[p as usize] != UNSET {
                continue;
            }
            let (count, via_block) = if self.secants[p as usize] >= 1 {
                let tgt_block = self.block_img[self.first_secant[p as usize] as usize];
                let n = self
                    .tgt
                    .design
                    .block(tgt_block)
                    .iter()
                    .filter(|&&y| {
                        self.point_pre[y as usize] == UNSET
                            && self.tgt_colors[y as usize] == self.src_colors[p as usize]
                    })
                    .count();
                (n, true)
            } else {
                let n = self
                    .tgt_classes
                    .get(&self.src_colors[p as usize])
                    .map_or(0, |c| c.len());
                (n, false)
            };
            let improved = match best {
                Some((c, _, _)) => count < c,
                None => true,
            };
            if improved {
                best = Some((count, p, via_block));
            }
            if matches!(best, Some((c, _, _)) if c <= 1) {
                break; // a dead end or a forced point; no point scanning on
            }
        }
        let (_, p, via_block) = best?;
        let candidates: Vec<u32> = if via_block {
            let tgt_block = self.block_img[self.first_secant[p as usize] as usize];
            self.tgt
                .design
                .block(tgt_block)
                .iter()
                .copied()
                .filter(|&y| {
                    self.point_pre[y as usize] == UNSET
                        && self.tgt_colors[y as usize] == self.src_colors[p as usize]
                })
                .collect()
        } else {
            self.tgt_classes
                .get(&self.src_colors[p as usize])
                .map(|c| {
                    c.iter()
                        .copied()
                        .filter(|&y| self.point_pre[y as usize] == UNSET)
                        .collect()
                })
                .unwrap_or_default()
        };
        Some((p, candidates))
    }

    fn dfs(&mut self) -> Step {
        let Some((p, candidates)) = self.branch_candidates() else {
            self.completions += 1;
            #[cfg(debug_assertions)]
            if self.completions <= 8 || self.completions % 1024 == 0 {
                let map = PointMap::new(self.point_img.clone()).unwrap();
                debug_assert_eq!(
                    self.src.design.relabel(&map).unwrap(),
                    self.tgt.design,
                    "completion is not an isomorphism"
                );
            }
            if self.collected.len() < self.collect_limit {
                self.collected
                    .push(PointMap::new(self.point_img.clone()).expect("search keeps a bijection"));
            }
            return if self.first_only { Step::Stop } else { Step::Done };
        };
        for q in candidates {
            let mark = self.trail.len();
            if self.assign(p, q) {
                if let Step::Stop = self.dfs() {
                    self.undo_to(mark);
                    return Step::Stop;
                }
            }
            self.undo_to(mark);
            if self.exhausted {
                return Step::Stop;
            }
        }
        Step::Done
    }

    /// Runs one root branch. Returns the number of completions found.
    fn run_root(
        &mut self,
        src_root: u32,
        tgt_root: u32,
        first_only: bool,
        collect_limit: usize,
    ) -> u64 {
        self.completions = 0;
        self.first_only = first_only;
        self.collect_limit = collect_limit;
        self.collected.clear();
        if !self.anchor(src_root, tgt_root) {
            return 0;
        }
        let mark = self.trail.len();
        if self.assign(src_root, tgt_root) {
            self.dfs();
        }
        self.undo_to(mark);
        self.completions
    }
}

fn block_intersection(design: &SteinerDesign, a: u32, b: u32) -> Option<u32> {
    let (mut ia, mut ib) = (design.block(a).iter().peekable(), design.block(b).iter().peekable());
    while let (Some(&&x), Some(&&y)) = (ia.peek(), ib.peek()) {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => {
                ia.next();
            }
            std::cmp::Ordering::Greater => {
                ib.next();
            }
            std::cmp::Ordering::Equal => return Some(x),
        }
    }
    None
}

/// Verified automorphisms that come for free with a development: the
/// translation generator, when it checks out.
fn verified_translation(prepared: &PreparedDesign) -> Option<PointMap> {
    let origin = prepared.design.origin?;
    let group = CyclicGroup::new(origin.modulus).ok()?;
    let map = affine_point_map(&group, origin.rotational, 1, 1);
    if map.len() != prepared.design.v() as usize {
        return None;
    }
    match verify_automorphism(&prepared.design, &map) {
        Ok(true) => Some(map),
        _ => None,
    }
}

/// Exact order of the full automorphism group.
pub fn automorphism_group_order(
    prepared: &PreparedDesign,
    budget: SearchBudget,
    strategy: SearchStrategy,
) -> Result<AutReport, IsoError> {
    let root = prepared.root_point();
    let v = prepared.design.v();
    let mut searcher = Searcher::new(prepared, prepared, budget);

    // stabilizer of the root: count everything fixing root -> root,
    // keeping the maps so the generator audit can rebuild the group
    let stabilizer_order = searcher.run_root(root, root, false, 1_000_000);
    if searcher.exhausted {
        return Ok(AutReport {
            order: stabilizer_order.max(1),
            stabilizer_order,
            generators: Vec::new(),
            affine_count: None,
            complete: false,
            nodes: searcher.nodes,
        });
    }
    let mut witnesses: Vec<PointMap> = searcher.collected.clone();
    debug_assert!(stabilizer_order >= 1, "identity not found");

    let translation = if strategy == SearchStrategy::OrbitShortcut {
        verified_translation(prepared)
    } else {
        None
    };
    let translation_orbit: HashSet<u32> = match &translation {
        Some(map) => {
            let mut orbit = HashSet::new();
            let mut p = root;
            loop {
                if !orbit.insert(p) {
                    break;
                }
                p = map.image(p);
            }
            orbit
        }
        None => std::iter::once(root).collect(),
    };
    if let Some(map) = &translation {
        witnesses.push(map.clone());
    }

    let mut orbit_size = translation_orbit.len() as u64;
    for q in 0..v {
        if q == root || translation_orbit.contains(&q) {
            continue;
        }
        if prepared.local_colors[q as usize] != prepared.local_colors[root as usize] {
            continue;
        }
        let count = match strategy {
            SearchStrategy::Exhaustive => searcher.run_root(root, q, false, 1),
            _ => searcher.run_root(root, q, true, 1),
        };
        if searcher.exhausted {
            return Ok(AutReport {
                order: stabilizer_order * orbit_size,
                stabilizer_order,
                generators: Vec::new(),
                affine_count: None,
                complete: false,
                nodes: searcher.nodes,
            });
        }
        if count > 0 {
            if strategy == SearchStrategy::Exhaustive {
                debug_assert_eq!(count, stabilizer_order, "coset sizes must agree");
            }
            orbit_size += 1;
            witnesses.extend(searcher.collected.iter().cloned());
        }
    }

    let order = stabilizer_order * orbit_size;
    let generators = extract_generators(prepared, &witnesses, order)?;
    Ok(AutReport {
        order,
        stabilizer_order,
        generators,
        affine_count: None,
        complete: true,
        nodes: searcher.nodes,
    })
}

/// Greedy generating set from found automorphisms, with a closure audit:
/// the generated group must have exactly `order` elements, and every
/// generator must verify.
fn extract_generators(
    prepared: &PreparedDesign,
    witnesses: &[PointMap],
    order: u64,
) -> Result<Vec<PointMap>, IsoError> {
    let v = prepared.design.v();
    let identity = PointMap::identity(v);
    let mut generators: Vec<PointMap> = Vec::new();
    let mut group: HashSet<Vec<u32>> = HashSet::new();
    group.insert(identity.as_slice().to_vec());

    for w in witnesses {
        if group.contains(w.as_slice()) {
            continue;
        }
        assert!(
            verify_automorphism(&prepared.design, w)?,
            "search produced a non-automorphism"
        );
        generators.push(w.clone());
        // re-close under all generators
        group.clear();
        group.insert(identity.as_slice().to_vec());
        let mut frontier: Vec<PointMap> = vec![identity.clone()];
        while let Some(g) = frontier.pop() {
            for gen in &generators {
                let h = gen.compose(&g);
                if group.insert(h.as_slice().to_vec()) {
                    frontier.push(h);
                }
            }
        }
        if group.len() as u64 == order {
            break;
        }
    }
    assert_eq!(
        group.len() as u64,
        order,
        "generator closure must reproduce the counted order"
    );
    Ok(generators)
}

/// Isomorphism test: a verified witness map, or `None`.
pub fn are_isomorphic(
    a: &PreparedDesign,
    b: &PreparedDesign,
    budget: SearchBudget,
) -> Result<Option<PointMap>, IsoError> {
    if a.design.v() != b.design.v() || a.design.k() != b.design.k() {
        return Err(IsoError::ParameterMismatch(
            a.design.v(),
            a.design.k(),
            b.design.v(),
            b.design.k(),
        ));
    }
    if a.profiles.global != b.profiles.global {
        return Ok(None);
    }
    let mut a_locals: Vec<u64> = a.local_colors.clone();
    let mut b_locals: Vec<u64> = b.local_colors.clone();
    a_locals.sort_unstable();
    b_locals.sort_unstable();
    if a_locals != b_locals {
        return Ok(None);
    }

    let root = a.root_point();
    let mut searcher = Searcher::new(a, b, budget);
    for q in 0..b.design.v() {
        if b.local_colors[q as usize] != a.local_colors[root as usize] {
            continue;
        }
        let found = searcher.run_root(root, q, true, 1);
        if searcher.exhausted {
            return Err(IsoError::BudgetExceeded {
                nodes: searcher.nodes,
            });
        }
        if found > 0 {
            let map = searcher.collected[0].clone();
            assert_eq!(
                a.design.relabel(&map)?,
                b.design,
                "witness failed re-verification"
            );
            return Ok(Some(map));
        }
    }
    Ok(None)
}

/// Hash of a full point coloring, used nowhere outside diagnostics.
pub(crate) fn coloring_fingerprint(colors: &[u64]) -> u64 {
    let mut sorted = colors.to_vec();
    sorted.sort_unstable();
    fnv1a_slice(&sorted)
}
