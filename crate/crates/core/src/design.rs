//! Developed designs: immutable block storage, the pair -> line table, and
//! the `S(2,k,v)` coverage verifier.
//!
//! A design is stored as a flat array of sorted `k`-tuples of point indices
//! in `[0, v)`, with the block list itself in lexicographic order. Two
//! designs are equal exactly when their canonical block lists are equal;
//! mirror deduplication relies on this.

use serde::{Deserialize, Serialize};

/// Bound on reported witnesses per category, to keep reports readable.
const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DesignError {
    #[error("block {index} has length {len}, expected {k}")]
    WrongBlockLength { index: usize, len: usize, k: usize },
    #[error("block {index} contains point {point} outside [0, {v})")]
    PointOutOfRange { index: usize, point: u32, v: u32 },
    #[error("design parameters v={v} k={k} are degenerate")]
    DegenerateParameters { v: u32, k: u32 },
    #[error("line table requires a verified design")]
    NotVerified,
    #[error("line_through needs two distinct points")]
    NotAPair,
    #[error("point {0} outside [0, {1})")]
    NoSuchPoint(u32, u32),
    #[error("map of length {len} is not a bijection on [0, {v})")]
    NotABijection { len: usize, v: u32 },
    #[error("designs have mismatched parameters: ({0},{1}) vs ({2},{3})")]
    ParameterMismatch(u32, u32, u32, u32),
    #[error("pair table for v={0} would be too large")]
    TooLarge(u32),
}

/// Where a design came from, when it was produced by developing a
/// difference family. Kept as metadata only; nothing is trusted from it
/// without re-verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DevelopmentOrigin {
    pub modulus: u32,
    /// True when the point set is `Z_m ∪ {∞}`; the point `∞` is index `m`.
    pub rotational: bool,
}

/// An immutable developed design on points `0..v` with blocks of size `k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteinerDesign {
    v: u32,
    k: u32,
    /// Flattened blocks, stride `k`, each sorted, block list in lex order.
    points: Vec<u32>,
    pub origin: Option<DevelopmentOrigin>,
}

impl PartialEq for SteinerDesign {
    fn eq(&self, other: &Self) -> bool {
        // origin is metadata; equality is canonical block-list equality
        self.v == other.v && self.k == other.k && self.points == other.points
    }
}
impl Eq for SteinerDesign {}

impl std::hash::Hash for SteinerDesign {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.v.hash(state);
        self.k.hash(state);
        self.points.hash(state);
    }
}

impl SteinerDesign {
    /// Builds a design from explicit blocks. Blocks are sorted internally
    /// and the block list is put into canonical (lexicographic) order.
    /// Structural errors (wrong length, out-of-range points) are rejected
    /// here; pair coverage is `verify`'s job.
    pub fn new(v: u32, k: u32, blocks: Vec<Vec<u32>>) -> Result<Self, DesignError> {
        if k < 2 || v < k {
            return Err(DesignError::DegenerateParameters { v, k });
        }
        let ku = k as usize;
        let mut canon: Vec<Vec<u32>> = Vec::with_capacity(blocks.len());
        for (index, mut b) in blocks.into_iter().enumerate() {
            if b.len() != ku {
                return Err(DesignError::WrongBlockLength {
                    index,
                    len: b.len(),
                    k: ku,
                });
            }
            b.sort_unstable();
            if let Some(&p) = b.iter().find(|&&p| p >= v) {
                return Err(DesignError::PointOutOfRange { index, point: p, v });
            }
            canon.push(b);
        }
        canon.sort_unstable();
        let mut points = Vec::with_capacity(canon.len() * ku);
        for b in &canon {
            points.extend_from_slice(b);
        }
        Ok(Self {
            v,
            k,
            points,
            origin: None,
        })
    }

    #[inline]
    pub fn v(&self) -> u32 {
        self.v
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn block_count(&self) -> u32 {
        (self.points.len() / self.k as usize) as u32
    }

    #[inline]
    pub fn block(&self, id: u32) -> &[u32] {
        let k = self.k as usize;
        let s = id as usize * k;
        &self.points[s..s + k]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[u32]> {
        self.points.chunks_exact(self.k as usize)
    }

    /// The flattened block storage (stride `k`), for hot loops.
    #[inline]
    pub fn flat_points(&self) -> &[u32] {
        &self.points
    }

    /// Binary search for a sorted block in the canonical list.
    pub fn find_block(&self, sorted: &[u32]) -> Option<u32> {
        let k = self.k as usize;
        let n = self.points.len() / k;
        let mut lo = 0usize;
        let mut hi = n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.points[mid * k..mid * k + k].cmp(sorted) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid as u32),
            }
        }
        None
    }

    /// Checks the defining property: every unordered pair of distinct
    /// points lies in exactly one block. Builds the pair -> line table as
    /// a side product (returned when the design is valid).
    pub fn verify(&self) -> DesignVerification {
        let v = self.v as usize;
        let k = self.k as usize;
        let mut report = DesignReport::default();

        for (id, b) in self.blocks().enumerate() {
            if !b.windows(2).all(|w| w[0] < w[1]) {
                report.malformed_blocks.push(id as u32);
            }
        }
        if !report.malformed_blocks.is_empty() {
            return DesignVerification {
                report,
                lines: None,
            };
        }

        let n_pairs = v * (v - 1) / 2;
        let mut table = vec![u32::MAX; n_pairs];
        for (id, b) in self.blocks().enumerate() {
            for j in 1..k {
                for i in 0..j {
                    let idx = tri_index(b[i], b[j]);
                    if table[idx] == u32::MAX {
                        table[idx] = id as u32;
                        report.pairs_covered += 1;
                    } else if report.repeated_pairs.len() < MAX_WITNESSES {
                        report.repeated_pairs.push((b[i], b[j]));
                    }
                }
            }
        }
        if report.pairs_covered < n_pairs as u64 {
            'scan: for q in 1..self.v {
                for p in 0..q {
                    if table[tri_index(p, q)] == u32::MAX {
                        report.missing_pairs.push((p, q));
                        if report.missing_pairs.len() >= MAX_WITNESSES {
                            break 'scan;
                        }
                    }
                }
            }
        }

        report.valid = report.missing_pairs.is_empty()
            && report.repeated_pairs.is_empty()
            && report.pairs_covered == n_pairs as u64;
        let lines = report.valid.then(|| LineTable {
            v: self.v,
            table,
        });
        DesignVerification { report, lines }
    }

    /// Blocks through each point. For a valid `S(2,k,v)` every entry is
    /// `r = (v-1)/(k-1)`.
    pub fn replication_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.v as usize];
        for b in self.blocks() {
            for &p in b {
                counts[p as usize] += 1;
            }
        }
        counts
    }

    /// Applies a point bijection and re-canonicalizes.
    pub fn relabel(&self, map: &PointMap) -> Result<SteinerDesign, DesignError> {
        if map.len() != self.v as usize {
            return Err(DesignError::NotABijection {
                len: map.len(),
                v: self.v,
            });
        }
        let blocks = self
            .blocks()
            .map(|b| b.iter().map(|&p| map.image(p)).collect())
            .collect();
        SteinerDesign::new(self.v, self.k, blocks)
    }

    /// The point index standing for `∞`, when this is a rotational
    /// development.
    pub fn infinity_index(&self) -> Option<u32> {
        match self.origin {
            Some(DevelopmentOrigin {
                rotational: true,
                modulus,
            }) => Some(modulus),
            _ => None,
        }
    }
}

/// Triangular index of an unordered pair, `q(q-1)/2 + p` for `p < q`.
#[inline(always)]
pub fn tri_index(p: u32, q: u32) -> usize {
    debug_assert_ne!(p, q);
    let (p, q) = if p < q { (p, q) } else { (q, p) };
    (q as usize * (q as usize - 1)) / 2 + p as usize
}

/// Result of `SteinerDesign::verify`: the report plus, for valid designs,
/// the pair -> block table.
pub struct DesignVerification {
    pub report: DesignReport,
    pub lines: Option<LineTable>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignReport {
    pub valid: bool,
    pub missing_pairs: Vec<(u32, u32)>,
    pub repeated_pairs: Vec<(u32, u32)>,
    pub malformed_blocks: Vec<u32>,
    pub pairs_covered: u64,
}

/// O(1) map from an unordered pair of distinct points to the unique block
/// containing both.
pub struct LineTable {
    v: u32,
    table: Vec<u32>,
}

impl LineTable {
    #[inline(always)]
    pub fn line(&self, p: u32, q: u32) -> u32 {
        self.table[tri_index(p, q)]
    }

    pub fn line_through(&self, p: u32, q: u32) -> Result<u32, DesignError> {
        if p == q {
            return Err(DesignError::NotAPair);
        }
        for x in [p, q] {
            if x >= self.v {
                return Err(DesignError::NoSuchPoint(x, self.v));
            }
        }
        Ok(self.line(p, q))
    }

    #[inline]
    pub fn as_slice(&self) -> &[u32] {
        &self.table
    }
}

/// A bijection on `[0, v)`, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointMap {
    image: Vec<u32>,
}

impl PointMap {
    pub fn new(image: Vec<u32>) -> Result<Self, DesignError> {
        let v = image.len() as u32;
        let mut seen = vec![false; image.len()];
        for &y in &image {
            if y >= v || seen[y as usize] {
                return Err(DesignError::NotABijection {
                    len: image.len(),
                    v,
                });
            }
            seen[y as usize] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(v: u32) -> Self {
        Self {
            image: (0..v).collect(),
        }
    }

    #[inline]
    pub fn image(&self, p: u32) -> u32 {
        self.image[p as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.image
    }

    /// `self` after `other`: `(self ∘ other)(p) = self(other(p))`.
    pub fn compose(&self, other: &PointMap) -> PointMap {
        PointMap {
            image: other.image.iter().map(|&p| self.image(p)).collect(),
        }
    }

    pub fn inverse(&self) -> PointMap {
        let mut image = vec![0u32; self.image.len()];
        for (p, &y) in self.image.iter().enumerate() {
            image[y as usize] = p as u32;
        }
        PointMap { image }
    }
}

/// Point -> incident blocks, CSR layout. Built once per design and shared
/// by the invariant and automorphism engines.
pub struct Incidence {
    offsets: Vec<u32>,
    data: Vec<u32>,
}

impl Incidence {
    pub fn build(design: &SteinerDesign) -> Self {
        let v = design.v() as usize;
        let mut counts = vec![0u32; v + 1];
        for b in design.blocks() {
            for &p in b {
                counts[p as usize + 1] += 1;
            }
        }
        for i in 0..v {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut data = vec![0u32; design.points.len()];
        for (id, b) in design.blocks().enumerate() {
            for &p in b {
                data[cursor[p as usize] as usize] = id as u32;
                cursor[p as usize] += 1;
            }
        }
        Incidence { offsets, data }
    }

    #[inline]
    pub fn blocks_through(&self, p: u32) -> &[u32] {
        &self.data[self.offsets[p as usize] as usize..self.offsets[p as usize + 1] as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fano() -> SteinerDesign {
        SteinerDesign::new(
            7,
            3,
            vec![
                vec![0, 1, 3],
                vec![1, 2, 4],
                vec![2, 3, 5],
                vec![3, 4, 6],
                vec![0, 4, 5],
                vec![1, 5, 6],
                vec![0, 2, 6],
            ],
        )
        .unwrap()
    }

    #[test]
    fn fano_verifies_with_21_pairs() {
        let d = fano();
        let vr = d.verify();
        assert!(vr.report.valid);
        assert_eq!(vr.report.pairs_covered, 21);
        let lines = vr.lines.unwrap();
        let id = lines.line_through(0, 1).unwrap();
        assert_eq!(d.block(id), &[0, 1, 3]);
    }

    #[test]
    fn deleting_a_block_uncovers_its_pairs() {
        let d = fano();
        let blocks: Vec<Vec<u32>> = d
            .blocks()
            .filter(|b| *b != [0, 1, 3])
            .map(|b| b.to_vec())
            .collect();
        let broken = SteinerDesign::new(7, 3, blocks).unwrap();
        let vr = broken.verify();
        assert!(!vr.report.valid);
        assert_eq!(vr.report.missing_pairs, vec![(0, 1), (0, 3), (1, 3)]);
        assert!(vr.lines.is_none());
    }

    #[test]
    fn line_through_rejects_equal_points() {
        let d = fano();
        let lines = d.verify().lines.unwrap();
        assert_eq!(lines.line_through(2, 2), Err(DesignError::NotAPair));
    }

    #[test]
    fn line_is_symmetric_and_contains_its_pair() {
        let d = fano();
        let lines = d.verify().lines.unwrap();
        for q in 1..7 {
            for p in 0..q {
                let id = lines.line_through(p, q).unwrap();
                assert_eq!(id, lines.line_through(q, p).unwrap());
                let b = d.block(id);
                assert!(b.contains(&p) && b.contains(&q));
            }
        }
    }

    #[test]
    fn replication_counts_fano() {
        assert!(fano().replication_counts().iter().all(|&r| r == 3));
    }

    #[test]
    fn relabel_identity_is_equal() {
        let d = fano();
        assert_eq!(d.relabel(&PointMap::identity(7)).unwrap(), d);
    }

    #[test]
    fn relabel_by_translation_fixes_fano() {
        let d = fano();
        let shift = PointMap::new((0..7).map(|x| (x + 1) % 7).collect()).unwrap();
        assert_eq!(d.relabel(&shift).unwrap(), d);
    }

    #[test]
    fn relabel_by_negation_gives_mirror_development() {
        let d = fano();
        let neg = PointMap::new((0..7u32).map(|x| (7 - x) % 7).collect()).unwrap();
        let mirrored = SteinerDesign::new(
            7,
            3,
            (0..7u32)
                .map(|c| vec![c % 7, (4 + c) % 7, (6 + c) % 7])
                .collect(),
        )
        .unwrap();
        assert_eq!(d.relabel(&neg).unwrap(), mirrored);
    }

    #[test]
    fn block_count_identity_on_valid_designs() {
        let d = fano();
        assert!(d.verify().report.valid);
        let b = d.block_count() as u64;
        let (v, k) = (d.v() as u64, d.k() as u64);
        assert_eq!(b * k * (k - 1) / 2, v * (v - 1) / 2);
    }

    #[test]
    fn point_map_rejects_non_bijections() {
        assert!(PointMap::new(vec![0, 0, 1]).is_err());
        assert!(PointMap::new(vec![0, 3, 1]).is_err());
        let pm = PointMap::new(vec![2, 0, 1]).unwrap();
        assert_eq!(pm.compose(&pm.inverse()), PointMap::identity(3));
    }

    #[test]
    fn malformed_blocks_reported() {
        // bypass the constructor's sorting by building a raw value
        let mut d = fano();
        d.points[0..3].copy_from_slice(&[3, 1, 0]);
        let vr = d.verify();
        assert!(!vr.report.valid);
        assert_eq!(vr.report.malformed_blocks, vec![0]);
    }

    #[test]
    fn incidence_lists_match_replication() {
        let d = fano();
        let inc = Incidence::build(&d);
        for p in 0..7 {
            assert_eq!(inc.blocks_through(p).len(), 3);
            for &b in inc.blocks_through(p) {
                assert!(d.block(b).contains(&p));
            }
        }
    }
}
