//! Difference families over a cyclic group: representation, verification,
//! multiplier expansion, development into a design, mirroring, and a small
//! brute-force searcher used as a test oracle.
//!
//! A plain family consists of all-finite base blocks over `Z_m` and is a
//! difference family exactly when every nonzero residue occurs exactly once
//! among all pairwise differences. A rotational family lives on
//! `Z_m ∪ {∞}`: one base block is `H ∪ {∞}` for a subgroup `H` of order
//! `k-1`, differences of the finite blocks must be distinct within each
//! block, and their supports together with `H \ {0}` tile the nonzero
//! residues.

use crate::design::{DesignError, DevelopmentOrigin, SteinerDesign};
use crate::modarith::{CyclicGroup, ModArithError, Point};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error(transparent)]
    Arith(#[from] ModArithError),
    #[error("base block is empty")]
    EmptyBlock,
    #[error("base block entries must be strictly increasing")]
    UnsortedBlock,
    #[error("base block holds more than one infinity point")]
    DoubleInfinity,
    #[error("residue {residue} is not reduced modulo {modulus}")]
    ResidueOutOfRange { residue: u32, modulus: u32 },
    #[error("block size {got} does not match family block size {k}")]
    BlockSizeMismatch { got: usize, k: u32 },
    #[error("family must contain at least one base block")]
    EmptyFamily,
    #[error("block size {k} exceeds the group order {m}")]
    BlockLargerThanGroup { k: u32, m: u32 },
    #[error("plain families admit no infinity point")]
    InfinityInPlainFamily,
    #[error("rotational family needs exactly one block equal to H ∪ {{∞}}")]
    BadInfinityBlock,
    #[error("subgroup must have order k-1 = {0}")]
    BadSubgroupOrder(u32),
    #[error("multiplier expansion needs exactly one all-finite seed block")]
    ExpansionAmbiguous,
    #[error("expanded blocks coincide: multiplier order too small for count {count}")]
    MultiplierOrderTooSmall { count: u32 },
    #[error("mirror vector length {got} does not match {expected} mirrorable blocks")]
    LengthMismatch { expected: usize, got: usize },
    #[error("apply the multiplier expansion before this operation")]
    ExpansionPending,
    #[error("no difference family can exist: {reason}")]
    ParameterInfeasible { reason: String },
    #[error("family fails verification")]
    Invalid(FamilyReport),
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// A base block: strictly increasing points, at most one `∞` (last).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseBlock {
    points: Vec<Point>,
}

impl BaseBlock {
    pub fn new(points: Vec<Point>, group: &CyclicGroup) -> Result<Self, FamilyError> {
        if points.is_empty() {
            return Err(FamilyError::EmptyBlock);
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(FamilyError::UnsortedBlock);
        }
        if points.iter().filter(|p| p.is_infinity()).count() > 1 {
            return Err(FamilyError::DoubleInfinity);
        }
        for p in &points {
            if let Point::Finite(x) = p {
                if *x >= group.modulus() {
                    return Err(FamilyError::ResidueOutOfRange {
                        residue: *x,
                        modulus: group.modulus(),
                    });
                }
            }
        }
        Ok(Self { points })
    }

    /// Convenience constructor from finite residues.
    pub fn finite(mut residues: Vec<u32>, group: &CyclicGroup) -> Result<Self, FamilyError> {
        residues.sort_unstable();
        Self::new(residues.into_iter().map(Point::Finite).collect(), group)
    }

    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_infinity(&self) -> bool {
        self.points.iter().any(|p| p.is_infinity())
    }

    pub fn finite_residues(&self) -> impl Iterator<Item = u32> + '_ {
        self.points.iter().filter_map(|p| p.finite())
    }

    /// The multiset of differences `a - c (mod m)` over ordered pairs of
    /// distinct finite members; `∞` is ignored. Size `f(f-1)` for `f`
    /// finite members.
    pub fn delta(&self, group: &CyclicGroup) -> Vec<u32> {
        let fin: Vec<u32> = self.finite_residues().collect();
        let mut out = Vec::with_capacity(fin.len() * fin.len().saturating_sub(1));
        for &a in &fin {
            for &c in &fin {
                if a != c {
                    out.push(group.sub(a, c));
                }
            }
        }
        out
    }

    /// Block scaled by a unit: `{u·x}` on finite members, `∞` kept.
    pub fn scaled(&self, u: u32, group: &CyclicGroup) -> Result<BaseBlock, FamilyError> {
        let mut points: Vec<Point> = self
            .points
            .iter()
            .map(|&p| group.affine_image(p, u, 0))
            .collect::<Result<_, _>>()?;
        points.sort_unstable();
        Ok(BaseBlock { points })
    }

    /// Block with finite members negated; `∞` kept. `-H = H` for a
    /// subgroup, so the short block is invariant.
    pub fn negated(&self, group: &CyclicGroup) -> BaseBlock {
        let mut points: Vec<Point> = self
            .points
            .iter()
            .map(|&p| match p {
                Point::Finite(x) => Point::Finite(group.neg(x)),
                Point::Infinity => Point::Infinity,
            })
            .collect();
        points.sort_unstable();
        BaseBlock { points }
    }

    fn translated(&self, c: u32, group: &CyclicGroup) -> Vec<u32> {
        // as design point indices: ∞ -> m
        let mut out: Vec<u32> = self
            .points
            .iter()
            .map(|&p| match p {
                Point::Finite(x) => group.add(x, c),
                Point::Infinity => group.modulus(),
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    Plain,
    Rotational { subgroup: Vec<u32> },
}

/// Expansion of one seed block into `{g^i · B : i < count}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub generator: u32,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationCode {
    WrongBlockSize,
    RepeatedDifference,
    UncoveredDifference,
    SubgroupInvalid,
    InfinityMisplaced,
    ExpansionPending,
}

/// One verification failure with a concrete witness: either the offending
/// difference or the index of the offending block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyViolation {
    pub code: ViolationCode,
    pub difference: Option<u32>,
    pub block_index: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub valid: bool,
    pub violations: Vec<FamilyViolation>,
}

impl FamilyReport {
    fn push(&mut self, code: ViolationCode, difference: Option<u32>, block_index: Option<usize>) {
        if self.violations.len() < 64 {
            self.violations.push(FamilyViolation {
                code,
                difference,
                block_index,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceFamily {
    group: CyclicGroup,
    k: u32,
    kind: FamilyKind,
    seed_blocks: Vec<BaseBlock>,
    expansion: Option<MultiplierSpec>,
}

impl DifferenceFamily {
    pub fn plain(
        group: CyclicGroup,
        k: u32,
        seed_blocks: Vec<BaseBlock>,
    ) -> Result<Self, FamilyError> {
        Self::check_shape(&group, k, &seed_blocks)?;
        if seed_blocks.iter().any(BaseBlock::has_infinity) {
            return Err(FamilyError::InfinityInPlainFamily);
        }
        for b in &seed_blocks {
            if b.len() != k as usize {
                return Err(FamilyError::BlockSizeMismatch { got: b.len(), k });
            }
        }
        Ok(Self {
            group,
            k,
            kind: FamilyKind::Plain,
            seed_blocks,
            expansion: None,
        })
    }

    /// Builds a rotational family on `Z_m ∪ {∞}`. `subgroup_generator`
    /// generates `H`; the `H ∪ {∞}` block must appear among the seeds.
    pub fn rotational(
        group: CyclicGroup,
        k: u32,
        subgroup_generator: u32,
        seed_blocks: Vec<BaseBlock>,
    ) -> Result<Self, FamilyError> {
        Self::check_shape(&group, k, &seed_blocks)?;
        let subgroup = group.additive_subgroup(subgroup_generator);
        if subgroup.len() != k as usize - 1 {
            return Err(FamilyError::BadSubgroupOrder(k - 1));
        }
        let mut inf_blocks = seed_blocks.iter().filter(|b| b.has_infinity());
        let hb = inf_blocks.next().ok_or(FamilyError::BadInfinityBlock)?;
        if inf_blocks.next().is_some() {
            return Err(FamilyError::BadInfinityBlock);
        }
        let h_points: Vec<u32> = hb.finite_residues().collect();
        if h_points != subgroup {
            return Err(FamilyError::BadInfinityBlock);
        }
        for b in &seed_blocks {
            if b.len() != k as usize {
                return Err(FamilyError::BlockSizeMismatch { got: b.len(), k });
            }
        }
        Ok(Self {
            group,
            k,
            kind: FamilyKind::Rotational { subgroup },
            seed_blocks,
            expansion: None,
        })
    }

    fn check_shape(group: &CyclicGroup, k: u32, seed_blocks: &[BaseBlock]) -> Result<(), FamilyError> {
        if seed_blocks.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        if k < 2 || k > group.modulus() {
            return Err(FamilyError::BlockLargerThanGroup {
                k,
                m: group.modulus(),
            });
        }
        Ok(())
    }

    /// Attaches a multiplier expansion. The designated block is the unique
    /// all-finite seed block; attaching to a family with several finite
    /// blocks is rejected.
    pub fn with_expansion(mut self, spec: MultiplierSpec) -> Result<Self, FamilyError> {
        if !self.group.is_unit(spec.generator) {
            return Err(ModArithError::NotAUnit {
                value: spec.generator,
                modulus: self.group.modulus(),
            }
            .into());
        }
        if spec.count == 0 {
            return Err(FamilyError::MultiplierOrderTooSmall { count: 0 });
        }
        if self.finite_block_indices().len() != 1 {
            return Err(FamilyError::ExpansionAmbiguous);
        }
        self.expansion = Some(spec);
        Ok(self)
    }

    #[inline]
    pub fn group(&self) -> &CyclicGroup {
        &self.group
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    #[inline]
    pub fn seed_blocks(&self) -> &[BaseBlock] {
        &self.seed_blocks
    }

    #[inline]
    pub fn expansion(&self) -> Option<MultiplierSpec> {
        self.expansion
    }

    /// Number of points of the developed design.
    pub fn point_count(&self) -> u32 {
        match self.kind {
            FamilyKind::Plain => self.group.modulus(),
            FamilyKind::Rotational { .. } => self.group.modulus() + 1,
        }
    }

    fn finite_block_indices(&self) -> Vec<usize> {
        self.seed_blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.has_infinity())
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of blocks a mirror vector addresses: the all-finite blocks,
    /// in seed order. Requires the expansion to be applied first.
    pub fn mirrorable_blocks(&self) -> Result<Vec<usize>, FamilyError> {
        if self.expansion.is_some() {
            return Err(FamilyError::ExpansionPending);
        }
        Ok(self.finite_block_indices())
    }

    /// Replaces the designated block `B` with `g^i · B` for `i < count`.
    /// Fails with `MultiplierOrderTooSmall` if two expanded blocks
    /// coincide as sets.
    pub fn expand(&self) -> Result<DifferenceFamily, FamilyError> {
        let Some(spec) = self.expansion else {
            return Ok(self.clone());
        };
        let target = self.finite_block_indices();
        let [target] = target[..] else {
            return Err(FamilyError::ExpansionAmbiguous);
        };
        let mut out = Vec::with_capacity(self.seed_blocks.len() + spec.count as usize - 1);
        for (i, b) in self.seed_blocks.iter().enumerate() {
            if i != target {
                out.push(b.clone());
                continue;
            }
            let mut power = 1u32;
            for _ in 0..spec.count {
                let scaled = b.scaled(power, &self.group)?;
                if out.contains(&scaled) {
                    return Err(FamilyError::MultiplierOrderTooSmall { count: spec.count });
                }
                out.push(scaled);
                power = self.group.mul(power, spec.generator);
            }
        }
        Ok(DifferenceFamily {
            group: self.group,
            k: self.k,
            kind: self.kind.clone(),
            seed_blocks: out,
            expansion: None,
        })
    }

    /// Difference-family verification by difference counting.
    ///
    /// Plain: every nonzero residue occurs exactly once in the union of
    /// the delta multisets. Rotational: `H` is a subgroup of order `k-1`,
    /// every finite block has `k(k-1)` distinct differences, and the
    /// supports together with `H \ {0}` cover the nonzero residues exactly
    /// once.
    pub fn verify(&self) -> FamilyReport {
        let mut report = FamilyReport::default();
        if self.expansion.is_some() {
            report.push(ViolationCode::ExpansionPending, None, None);
            return report;
        }
        let m = self.group.modulus() as usize;
        let mut counts = vec![0u32; m];

        match &self.kind {
            FamilyKind::Plain => {
                for (i, b) in self.seed_blocks.iter().enumerate() {
                    if b.len() != self.k as usize || b.has_infinity() {
                        report.push(ViolationCode::WrongBlockSize, None, Some(i));
                        continue;
                    }
                    for d in b.delta(&self.group) {
                        counts[d as usize] += 1;
                    }
                }
            }
            FamilyKind::Rotational { subgroup } => {
                if !self.subgroup_is_valid(subgroup) {
                    report.push(ViolationCode::SubgroupInvalid, None, None);
                }
                let mut inf_seen = false;
                for (i, b) in self.seed_blocks.iter().enumerate() {
                    if b.len() != self.k as usize {
                        report.push(ViolationCode::WrongBlockSize, None, Some(i));
                        continue;
                    }
                    if b.has_infinity() {
                        let fin: Vec<u32> = b.finite_residues().collect();
                        if inf_seen || &fin != subgroup {
                            report.push(ViolationCode::InfinityMisplaced, None, Some(i));
                        }
                        inf_seen = true;
                        continue;
                    }
                    // finite block: its delta must be k(k-1) distinct values
                    let delta = b.delta(&self.group);
                    let mut local = vec![false; m];
                    for &d in &delta {
                        if local[d as usize] {
                            report.push(ViolationCode::RepeatedDifference, Some(d), Some(i));
                        }
                        local[d as usize] = true;
                    }
                    for (d, seen) in local.iter().enumerate() {
                        if *seen {
                            counts[d] += 1;
                        }
                    }
                }
                if !inf_seen {
                    report.push(ViolationCode::InfinityMisplaced, None, None);
                }
                for &h in subgroup {
                    if h != 0 {
                        counts[h as usize] += 1;
                    }
                }
            }
        }

        for (d, &c) in counts.iter().enumerate().skip(1) {
            if c > 1 {
                report.push(ViolationCode::RepeatedDifference, Some(d as u32), None);
            } else if c == 0 {
                report.push(ViolationCode::UncoveredDifference, Some(d as u32), None);
            }
        }
        report.valid = report.violations.is_empty();
        report
    }

    fn subgroup_is_valid(&self, subgroup: &[u32]) -> bool {
        if subgroup.len() != self.k as usize - 1 || subgroup.first() != Some(&0) {
            return false;
        }
        if !subgroup.windows(2).all(|w| w[0] < w[1]) {
            return false;
        }
        let set: std::collections::BTreeSet<u32> = subgroup.iter().copied().collect();
        subgroup.iter().all(|&a| {
            set.contains(&self.group.neg(a))
                && subgroup.iter().all(|&b| set.contains(&self.group.add(a, b)))
        })
    }

    /// Develops the family into the design `{B + c : B ∈ family, c ∈ Z_m}`,
    /// verifying the family first.
    pub fn develop(&self) -> Result<SteinerDesign, FamilyError> {
        let report = self.verify();
        if !report.valid {
            return Err(FamilyError::Invalid(report));
        }
        Ok(self.develop_unchecked()?)
    }

    /// Development without the family check. The result may fail
    /// `SteinerDesign::verify`; used for differential testing.
    pub fn develop_unchecked(&self) -> Result<SteinerDesign, DesignError> {
        assert!(
            self.expansion.is_none(),
            "apply the multiplier expansion before developing"
        );
        let m = self.group.modulus();
        let mut blocks: Vec<Vec<u32>> = Vec::with_capacity(self.seed_blocks.len() * m as usize);
        for b in &self.seed_blocks {
            for c in 0..m {
                blocks.push(b.translated(c, &self.group));
            }
        }
        blocks.sort_unstable();
        blocks.dedup();
        let rotational = matches!(self.kind, FamilyKind::Rotational { .. });
        let mut design = SteinerDesign::new(self.point_count(), self.k, blocks)?;
        design.origin = Some(DevelopmentOrigin {
            modulus: m,
            rotational,
        });
        Ok(design)
    }

    /// Replaces each finite block whose vector bit is set by its negative.
    /// The `H ∪ {∞}` block is never mirrored.
    pub fn mirror(&self, vector: &MirrorVector) -> Result<DifferenceFamily, FamilyError> {
        let targets = self.mirrorable_blocks()?;
        if vector.len() != targets.len() {
            return Err(FamilyError::LengthMismatch {
                expected: targets.len(),
                got: vector.len(),
            });
        }
        let mut seed_blocks = self.seed_blocks.clone();
        for (bit, &i) in vector.bits().iter().zip(&targets) {
            if *bit {
                seed_blocks[i] = seed_blocks[i].negated(&self.group);
            }
        }
        Ok(DifferenceFamily {
            group: self.group,
            k: self.k,
            kind: self.kind.clone(),
            seed_blocks,
            expansion: None,
        })
    }
}

/// Selection of blocks to negate, one bit per mirrorable block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MirrorVector {
    bits: Vec<bool>,
}

impl MirrorVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// All-false vector (the identity mirror).
    pub fn trivial(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn complement(&self) -> MirrorVector {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl std::fmt::Display for MirrorVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for MirrorVector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(format!("bad mirror vector character {c:?}")),
            })
            .collect::<Result<Vec<bool>, _>>()
            .map(Self::new)
    }
}

/// All `2^n` mirror vectors in lexicographic order (bit 0 most
/// significant). With `reduce_negation`, only vectors with bit 0 false are
/// produced: complementing every bit amounts to the group automorphism
/// `x -> -x`, an isomorphism of developments, so one representative per
/// `{μ, complement μ}` pair suffices.
pub fn mirror_vectors(n: usize, reduce_negation: bool) -> impl Iterator<Item = MirrorVector> {
    assert!(n <= 24, "mirror space 2^{n} too large to enumerate");
    let total: u64 = 1 << if reduce_negation && n > 0 { n - 1 } else { n };
    (0..total).map(move |c| {
        MirrorVector::new((0..n).map(|i| (c >> (n - 1 - i)) & 1 == 1).collect())
    })
}

/// Exhaustive search for plain difference families on `Z_v` with block
/// size `k`, all blocks containing 0. Small parameters only; this is the
/// independent oracle for the verification pipeline.
pub fn brute_force_families(v: u32, k: u32) -> Result<Vec<DifferenceFamily>, FamilyError> {
    if v > 16 || k < 2 || k >= v {
        return Err(FamilyError::ParameterInfeasible {
            reason: format!("need k >= 2 and k < v <= 16, got v={v} k={k}"),
        });
    }
    let per_block = k * (k - 1);
    if (v - 1) % per_block != 0 {
        return Err(FamilyError::ParameterInfeasible {
            reason: format!("{per_block} does not divide v-1 = {}", v - 1),
        });
    }
    let n_blocks = ((v - 1) / per_block) as usize;
    let group = CyclicGroup::new(v).unwrap();

    // candidate blocks: k-subsets of Z_v containing 0
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    let mut current = vec![0u32];
    subsets_from(1, v, k as usize, &mut current, &mut candidates);

    let mut found = Vec::new();
    let mut counts = vec![0u32; v as usize];
    let mut chosen: Vec<usize> = Vec::new();
    search(
        &group,
        k,
        &candidates,
        n_blocks,
        0,
        &mut counts,
        &mut chosen,
        &mut found,
    );
    Ok(found)
}

fn subsets_from(start: u32, v: u32, k: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for x in start..v {
        current.push(x);
        subsets_from(x + 1, v, k, current, out);
        current.pop();
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    group: &CyclicGroup,
    k: u32,
    candidates: &[Vec<u32>],
    n_blocks: usize,
    first: usize,
    counts: &mut [u32],
    chosen: &mut Vec<usize>,
    found: &mut Vec<DifferenceFamily>,
) {
    if chosen.len() == n_blocks {
        let blocks = chosen
            .iter()
            .map(|&i| BaseBlock::finite(candidates[i].clone(), group).unwrap())
            .collect();
        let family = DifferenceFamily::plain(*group, k, blocks).unwrap();
        debug_assert!(family.verify().valid);
        found.push(family);
        return;
    }
    for i in first..candidates.len() {
        let mut ok = true;
        let mut applied = Vec::new();
        'outer: for (ai, &a) in candidates[i].iter().enumerate() {
            for (ci, &c) in candidates[i].iter().enumerate() {
                if ai != ci {
                    let d = group.sub(a, c) as usize;
                    if counts[d] > 0 {
                        ok = false;
                        break 'outer;
                    }
                    counts[d] += 1;
                    applied.push(d);
                }
            }
        }
        if ok {
            chosen.push(i);
            search(group, k, candidates, n_blocks, i + 1, counts, chosen, found);
            chosen.pop();
        }
        for d in applied {
            counts[d] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(m: u32) -> CyclicGroup {
        CyclicGroup::new(m).unwrap()
    }

    fn fano_family() -> DifferenceFamily {
        let g = group(7);
        DifferenceFamily::plain(g, 3, vec![BaseBlock::finite(vec![0, 1, 3], &g).unwrap()]).unwrap()
    }

    fn rotational_s239() -> DifferenceFamily {
        let g = group(8);
        let h = BaseBlock::new(
            vec![Point::Finite(0), Point::Finite(4), Point::Infinity],
            &g,
        )
        .unwrap();
        let b = BaseBlock::finite(vec![0, 1, 3], &g).unwrap();
        DifferenceFamily::rotational(g, 3, 4, vec![h, b]).unwrap()
    }

    #[test]
    fn delta_of_fano_block_covers_all() {
        let g = group(7);
        let b = BaseBlock::finite(vec![0, 1, 3], &g).unwrap();
        let mut d = b.delta(&g);
        d.sort_unstable();
        assert_eq!(d, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn delta_of_singleton_is_empty() {
        let g = group(7);
        let b = BaseBlock::finite(vec![0], &g).unwrap();
        assert!(b.delta(&g).is_empty());
    }

    #[test]
    fn delta_of_subgroup_block_repeats_multiples() {
        let g = group(623);
        let mut pts: Vec<Point> = (0..7).map(|i| Point::Finite(89 * i)).collect();
        pts.push(Point::Infinity);
        let b = BaseBlock::new(pts, &g).unwrap();
        let d = b.delta(&g);
        assert_eq!(d.len(), 42);
        for mult in (1..7).map(|i| 89 * i) {
            assert_eq!(d.iter().filter(|&&x| x == mult).count(), 7);
        }
    }

    #[test]
    fn verify_fano_family() {
        assert!(fano_family().verify().valid);
    }

    #[test]
    fn verify_rejects_repeated_difference() {
        let g = group(7);
        let fam =
            DifferenceFamily::plain(g, 3, vec![BaseBlock::finite(vec![0, 1, 2], &g).unwrap()])
                .unwrap();
        let report = fam.verify();
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == ViolationCode::RepeatedDifference && v.difference == Some(1)));
    }

    #[test]
    fn develop_fano() {
        let design = fano_family().develop().unwrap();
        assert_eq!(design.block_count(), 7);
        let expected: Vec<Vec<u32>> = vec![
            vec![0, 1, 3],
            vec![1, 2, 4],
            vec![2, 3, 5],
            vec![3, 4, 6],
            vec![0, 4, 5],
            vec![1, 5, 6],
            vec![0, 2, 6],
        ];
        let expected = SteinerDesign::new(7, 3, expected).unwrap();
        assert_eq!(design, expected);
        assert!(design.verify().report.valid);
    }

    #[test]
    fn develop_rotational_s239() {
        let design = rotational_s239().develop().unwrap();
        assert_eq!(design.v(), 9);
        assert_eq!(design.block_count(), 12);
        assert!(design.verify().report.valid);
        assert_eq!(design.infinity_index(), Some(8));
    }

    #[test]
    fn mirror_examples() {
        let fam = fano_family();
        let same = fam.mirror(&MirrorVector::trivial(1)).unwrap();
        assert_eq!(same, fam);
        let g = group(7);
        let flipped = fam.mirror(&MirrorVector::new(vec![true])).unwrap();
        assert_eq!(
            flipped.seed_blocks()[0],
            BaseBlock::finite(vec![0, 4, 6], &g).unwrap()
        );
        assert!(flipped.verify().valid);
    }

    #[test]
    fn mirror_is_an_involution() {
        let fam = rotational_s239();
        let vector = MirrorVector::new(vec![true]);
        let twice = fam.mirror(&vector).unwrap().mirror(&vector).unwrap();
        assert_eq!(twice, fam);
    }

    #[test]
    fn mirror_length_mismatch() {
        let err = fano_family().mirror(&MirrorVector::trivial(3));
        assert_eq!(
            err.unwrap_err(),
            FamilyError::LengthMismatch {
                expected: 1,
                got: 3
            }
        );
    }

    #[test]
    fn mirror_vector_counts() {
        assert_eq!(mirror_vectors(12, false).count(), 4096);
        assert_eq!(mirror_vectors(14, false).count(), 16384);
        let reduced: Vec<MirrorVector> = mirror_vectors(2, true).collect();
        assert_eq!(
            reduced,
            vec![
                MirrorVector::new(vec![false, false]),
                MirrorVector::new(vec![false, true]),
            ]
        );
    }

    #[test]
    fn mirror_vectors_are_lexicographic() {
        let all: Vec<String> = mirror_vectors(3, false).map(|v| v.to_string()).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn brute_force_small_cases() {
        let fams = brute_force_families(7, 3).unwrap();
        assert!(!fams.is_empty());
        let g = group(7);
        let fano = BaseBlock::finite(vec![0, 1, 3], &g).unwrap();
        assert!(fams.iter().any(|f| f.seed_blocks() == [fano.clone()]));

        assert!(matches!(
            brute_force_families(9, 3),
            Err(FamilyError::ParameterInfeasible { .. })
        ));

        let fams13 = brute_force_families(13, 4).unwrap();
        let g13 = group(13);
        let b = BaseBlock::finite(vec![0, 1, 3, 9], &g13).unwrap();
        assert!(fams13.iter().any(|f| f.seed_blocks() == [b.clone()]));
    }

    #[test]
    fn all_brute_force_families_develop_to_valid_designs() {
        for (v, k) in [(7u32, 3u32), (13, 4)] {
            for fam in brute_force_families(v, k).unwrap() {
                let design = fam.develop().unwrap();
                assert!(design.verify().report.valid);
                assert_eq!(design.block_count(), fam.seed_blocks().len() as u32 * v);
            }
        }
    }

    #[test]
    fn family_verify_matches_design_verify_on_all_candidates() {
        // differential: the counting criterion accepts exactly the
        // families whose development is a Steiner system
        for (v, k) in [(7u32, 3u32), (13, 4)] {
            let g = group(v);
            let mut candidates: Vec<Vec<u32>> = Vec::new();
            let mut cur = vec![0u32];
            subsets_from(1, v, k as usize, &mut cur, &mut candidates);
            for cand in candidates {
                let fam = DifferenceFamily::plain(
                    g,
                    k,
                    vec![BaseBlock::finite(cand, &g).unwrap()],
                )
                .unwrap();
                let family_valid = fam.verify().valid;
                let steiner_valid = fam.develop_unchecked().unwrap().verify().report.valid;
                assert_eq!(family_valid, steiner_valid);
            }
        }
    }

    #[test]
    fn every_mirror_of_an_oracle_family_develops_validly() {
        for (v, k) in [(7u32, 3u32), (13, 4)] {
            for fam in brute_force_families(v, k).unwrap() {
                let n = fam.mirrorable_blocks().unwrap().len();
                for vector in mirror_vectors(n, false) {
                    let mirrored = fam.mirror(&vector).unwrap();
                    assert!(mirrored.verify().valid);
                    assert!(mirrored.develop().unwrap().verify().report.valid);
                }
            }
        }
    }

    #[test]
    fn expansion_identity_multiplier() {
        let g = group(7);
        let fam = DifferenceFamily::plain(
            g,
            3,
            vec![BaseBlock::finite(vec![0, 1, 3], &g).unwrap()],
        )
        .unwrap()
        .with_expansion(MultiplierSpec {
            generator: 1,
            count: 1,
        })
        .unwrap();
        let expanded = fam.expand().unwrap();
        assert_eq!(expanded.seed_blocks().len(), 1);
        assert!(expanded.expansion().is_none());
    }

    #[test]
    fn expansion_detects_multiplier_order_overflow() {
        let g = group(623);
        let mut pts: Vec<Point> = (0..7).map(|i| Point::Finite(89 * i)).collect();
        pts.push(Point::Infinity);
        let h = BaseBlock::new(pts, &g).unwrap();
        let b = BaseBlock::finite(vec![0, 1, 3, 41, 216, 444, 462, 589], &g).unwrap();
        let fam = DifferenceFamily::rotational(g, 8, 89, vec![h, b])
            .unwrap()
            .with_expansion(MultiplierSpec {
                generator: 8,
                count: 12,
            })
            .unwrap();
        assert_eq!(
            fam.expand().unwrap_err(),
            FamilyError::MultiplierOrderTooSmall { count: 12 }
        );
    }

    #[test]
    fn degenerate_families_rejected_at_construction() {
        let g = group(7);
        assert!(matches!(
            DifferenceFamily::plain(g, 3, vec![]),
            Err(FamilyError::EmptyFamily)
        ));
        assert!(matches!(
            DifferenceFamily::plain(
                g,
                9,
                vec![BaseBlock::finite(vec![0, 1, 2], &g).unwrap()]
            ),
            Err(FamilyError::BlockLargerThanGroup { .. })
        ));
    }

    #[test]
    fn mirror_requires_expansion_applied() {
        let g = group(623);
        let mut pts: Vec<Point> = (0..7).map(|i| Point::Finite(89 * i)).collect();
        pts.push(Point::Infinity);
        let h = BaseBlock::new(pts, &g).unwrap();
        let b = BaseBlock::finite(vec![0, 1, 3, 41, 216, 444, 462, 589], &g).unwrap();
        let fam = DifferenceFamily::rotational(g, 8, 89, vec![h, b])
            .unwrap()
            .with_expansion(MultiplierSpec {
                generator: 8,
                count: 11,
            })
            .unwrap();
        assert_eq!(
            fam.mirror(&MirrorVector::trivial(1)).unwrap_err(),
            FamilyError::ExpansionPending
        );
        assert!(fam.expand().unwrap().mirror(&MirrorVector::trivial(11)).is_ok());
    }
}
