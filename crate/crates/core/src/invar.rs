//! Isomorphism invariants: the grid profile (global fingerprint), per-point
//! local profiles, and the anchored pair signatures the automorphism search
//! uses for refinement.
//!
//! The grid profile scans every pair of blocks `(B1, B2)` meeting in a
//! single point `p`. Each choice of `x ∈ B1\{p}`, `y ∈ B2\{p}` determines a
//! cross line `ℓ(x,y)`, which meets `B1` only in `x` and `B2` only in `y`,
//! so its remaining `k-2` points lie outside both blocks. For such a point
//! `z`, let `n(z)` be the number of cross pairs whose line passes through
//! `z`; one occurrence of the value `n(z)` is recorded per incidence
//! `(x,y,z)`. Over ordered block pairs this contributes `(k-1)²(k-2)`
//! incidences per pair, for a total mass of `v(v-1)(v-k)(k-2)` on a valid
//! design. Swapping `B1` and `B2` reproduces the same incidences, so the
//! scan walks unordered pairs and doubles the counts.

use crate::design::{tri_index, Incidence, LineTable, SteinerDesign};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;

/// Multiset of grid statistic values: value -> count of incidences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridProfile(BTreeMap<u32, u64>);

impl GridProfile {
    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.0
    }

    pub fn mass(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn from_counts(counts: BTreeMap<u32, u64>) -> Self {
        Self(counts.into_iter().filter(|&(_, c)| c > 0).collect())
    }

    /// Canonical line: ascending `value=count` pairs.
    pub fn canonical_string(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|(v, c)| format!("{v}={c}")).collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Stable 128-bit hex digest of the canonical serialization.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (v, c) in &self.0 {
            hasher.update(v.to_le_bytes());
            hasher.update(c.to_le_bytes());
        }
        let out = hasher.finalize();
        hex_lower(&out[..16])
    }

    fn add_from_slice(&mut self, counts: &[u64]) {
        for (value, &c) in counts.iter().enumerate() {
            if c > 0 {
                *self.0.entry(value as u32).or_insert(0) += c;
            }
        }
    }

    pub fn merge(&mut self, other: &GridProfile) {
        for (&v, &c) in &other.0 {
            *self.0.entry(v).or_insert(0) += c;
        }
    }
}

impl fmt::Display for GridProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

pub fn hex_lower(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Expected grid-profile mass for a valid `S(2,k,v)`.
pub fn expected_mass(v: u32, k: u32) -> u64 {
    let (v, k) = (v as u64, k as u64);
    v * (v - 1) * (v - k) * (k - 2)
}

/// Global plus per-point profiles, filled in one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSet {
    pub global: GridProfile,
    pub locals: Vec<GridProfile>,
}

/// 128-bit digest shortcut for the global profile.
pub fn profile_digest(profile: &GridProfile) -> String {
    profile.digest()
}

struct PairScratch {
    hits: Vec<u16>,
    touched: Vec<u32>,
    /// flattened "block points minus p" for all blocks through p
    others: Vec<u32>,
    /// `(epoch << 16) | count` per point, for the lazy-flush kernel
    stamped: Vec<u32>,
}

impl PairScratch {
    fn new(v: usize, r: usize, k: usize) -> Self {
        PairScratch {
            hits: vec![0; v],
            touched: Vec::with_capacity((k - 1) * (k - 1) * k),
            others: Vec::with_capacity(r * (k - 1)),
            stamped: vec![0; v],
        }
    }
}

/// Dense `v x v` pair -> block matrix; twice the triangular table but
/// branch-free to index. Only built for the profile scan.
fn square_line_table(design: &SteinerDesign) -> Vec<u32> {
    let v = design.v() as usize;
    let mut table = vec![u32::MAX; v * v];
    for (id, b) in design.blocks().enumerate() {
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[i + 1..] {
                table[x as usize * v + y as usize] = id as u32;
                table[y as usize * v + x as usize] = id as u32;
            }
        }
    }
    table
}

fn fill_others(
    design: &SteinerDesign,
    through: &[u32],
    p: u32,
    others: &mut Vec<u32>,
) {
    others.clear();
    for &b in through {
        for &x in design.block(b) {
            if x != p {
                others.push(x);
            }
        }
    }
}

/// Per-point grid counts: `counts[n]` = incidences of value `n` over
/// ordered block pairs meeting at `p`.
///
/// Hot kernel. Each scratch entry packs `(grid epoch << 16) | count`, so a
/// stale entry is flushed into `counts` the next time the point is touched
/// (or in the final drain) instead of per grid; there is no touched list
/// and no per-grid reset. Every point of a cross line is counted and the
/// two known members `x`, `y` are decremented right after, which leaves
/// them at zero and the flush skips zeros. Indexing is unchecked: lines
/// come from the verified table, so block ids and point ids are in range
/// by construction.
fn point_counts(
    design: &SteinerDesign,
    square: &[u32],
    incidence: &Incidence,
    p: u32,
    scratch: &mut PairScratch,
    counts: &mut [u64],
) {
    let v = design.v() as usize;
    let k = design.k() as usize;
    let k1 = k - 1;
    let through = incidence.blocks_through(p);
    let r = through.len();
    assert!(r * (r - 1) / 2 < u16::MAX as usize, "too many grids per point");
    fill_others(design, through, p, &mut scratch.others);
    counts.iter_mut().for_each(|c| *c = 0);
    let flat = design.flat_points();
    let hits = &mut scratch.stamped;

    let mut epoch: u32 = 0;
    for i in 0..r {
        for j in (i + 1)..r {
            epoch += 1 << 16;
            // split keeps xi/yj disjoint borrows of the same buffer
            let (left, right) = scratch.others.split_at(j * k1);
            let xi = &left[i * k1..(i + 1) * k1];
            let yj = &right[..k1];
            for &x in xi {
                let row = &square[x as usize * v..(x as usize + 1) * v];
                for &y in yj {
                    unsafe {
                        let line = *row.get_unchecked(y as usize) as usize;
                        let block = flat.get_unchecked(line * k..line * k + k);
                        for &z in block {
                            let w = hits.get_unchecked_mut(z as usize);
                            if *w & !0xffff == epoch {
                                *w += 1;
                            } else {
                                let c = *w & 0xffff;
                                counts[c as usize] += 2 * c as u64;
                                *w = epoch | 1;
                            }
                        }
                        *hits.get_unchecked_mut(x as usize) -= 1;
                        *hits.get_unchecked_mut(y as usize) -= 1;
                    }
                }
            }
        }
    }
    // drain whatever the last grids left, then hand the buffer back clean
    for w in hits.iter_mut() {
        let c = *w & 0xffff;
        counts[c as usize] += 2 * c as u64;
        *w = 0;
    }
    counts[0] = 0;
}

/// Computes the global grid profile together with all local profiles.
/// Parallelizes over points; the result is independent of thread count.
pub fn profiles(design: &SteinerDesign, lines: &LineTable) -> ProfileSet {
    let incidence = Incidence::build(design);
    profiles_with(design, lines, &incidence)
}

pub fn profiles_with(
    design: &SteinerDesign,
    lines: &LineTable,
    incidence: &Incidence,
) -> ProfileSet {
    let v = design.v() as usize;
    let k = design.k() as usize;
    let r = (design.v() as usize - 1) / (k - 1);

    let locals: Vec<GridProfile> = (0..design.v())
        .into_par_iter()
        .map_init(
            || (PairScratch::new(v, r.max(1), k), vec![0u64; k]),
            |(scratch, counts), p| {
                point_counts(design, lines, incidence, p, scratch, counts);
                let mut profile = GridProfile::default();
                profile.add_from_slice(counts);
                profile
            },
        )
        .collect();

    let mut global = GridProfile::default();
    for lp in &locals {
        global.merge(lp);
    }
    ProfileSet { global, locals }
}

/// Global profile only.
pub fn grid_profile(design: &SteinerDesign, lines: &LineTable) -> GridProfile {
    profiles(design, lines).global
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

#[inline]
pub(crate) fn fnv1a_u64(seed: u64, word: u64) -> u64 {
    let mut h = seed;
    for b in word.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub(crate) fn fnv1a_slice(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for &w in words {
        h = fnv1a_u64(h, w);
    }
    h
}

/// Hash color of one local profile; equal profiles hash equal across
/// designs, which is all the search needs.
pub(crate) fn local_colors(set: &ProfileSet) -> Vec<u64> {
    set.locals
        .iter()
        .map(|p| {
            let words: Vec<u64> = p
                .counts()
                .iter()
                .flat_map(|(&v, &c)| [v as u64, c])
                .collect();
            fnv1a_slice(&words)
        })
        .collect()
}

/// Signature of the unordered block pair `(through[i], through[j])` meeting
/// at `p`: the vector of `#{z : n(z) = value}`, hashed. Isomorphism maps
/// intersecting pairs to intersecting pairs with equal signatures.
fn pair_signature(
    design: &SteinerDesign,
    lines: &LineTable,
    xi: &[u32],
    yj: &[u32],
    scratch_hits: &mut [u16],
    touched: &mut Vec<u32>,
    by_value: &mut [u16],
) -> u64 {
    touched.clear();
    for &x in xi {
        for &y in yj {
            let line = lines.line(x, y);
            for &z in design.block(line) {
                if z != x && z != y {
                    let h = &mut scratch_hits[z as usize];
                    if *h == 0 {
                        touched.push(z);
                    }
                    *h += 1;
                }
            }
        }
    }
    by_value.iter_mut().for_each(|c| *c = 0);
    for &z in touched.iter() {
        let c = scratch_hits[z as usize];
        scratch_hits[z as usize] = 0;
        by_value[c as usize] += 1;
    }
    let mut h = FNV_OFFSET;
    for &c in by_value.iter() {
        h = fnv1a_u64(h, c as u64);
    }
    h
}

/// Colors every point by the multiset of pair signatures of the block
/// pairs through `anchor` whose second block passes through the point.
/// Covariant under isomorphisms mapping anchor to anchor-image, so two
/// points can correspond only if their colors agree.
pub(crate) fn anchored_colors(
    design: &SteinerDesign,
    lines: &LineTable,
    incidence: &Incidence,
    anchor: u32,
) -> Vec<u64> {
    let v = design.v() as usize;
    let k = design.k() as usize;
    let k1 = k - 1;
    let through = incidence.blocks_through(anchor);
    let r = through.len();

    let mut scratch = PairScratch::new(v, r.max(1), k);
    fill_others(design, through, anchor, &mut scratch.others);
    let mut by_value = vec![0u16; k];
    let mut acc: Vec<Vec<u64>> = vec![Vec::with_capacity(r.saturating_sub(1)); v];

    for i in 0..r {
        for j in (i + 1)..r {
            let (left, right) = scratch.others.split_at(j * k1);
            let xi = &left[i * k1..(i + 1) * k1];
            let yj = &right[..k1];
            let sig = pair_signature(
                design,
                lines,
                xi,
                yj,
                &mut scratch.hits,
                &mut scratch.touched,
                &mut by_value,
            );
            for &z in xi {
                acc[z as usize].push(sig);
            }
            for &z in yj {
                acc[z as usize].push(sig);
            }
        }
    }

    let mut colors = Vec::with_capacity(v);
    for (z, mut sigs) in acc.into_iter().enumerate() {
        if z as u32 == anchor {
            // unique marker distinct from every multiset hash
            colors.push(fnv1a_u64(FNV_OFFSET, u64::MAX));
        } else {
            sigs.sort_unstable();
            colors.push(fnv1a_slice(&sigs));
        }
    }
    colors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffam::{brute_force_families, BaseBlock, DifferenceFamily};
    use crate::design::PointMap;
    use crate::modarith::{CyclicGroup, Point};

    fn fano_design() -> SteinerDesign {
        let g = CyclicGroup::new(7).unwrap();
        DifferenceFamily::plain(g, 3, vec![BaseBlock::finite(vec![0, 1, 3], &g).unwrap()])
            .unwrap()
            .develop()
            .unwrap()
    }

    fn s239_design() -> SteinerDesign {
        let g = CyclicGroup::new(8).unwrap();
        let h = BaseBlock::new(
            vec![Point::Finite(0), Point::Finite(4), Point::Infinity],
            &g,
        )
        .unwrap();
        let b = BaseBlock::finite(vec![0, 1, 3], &g).unwrap();
        DifferenceFamily::rotational(g, 3, 4, vec![h, b])
            .unwrap()
            .develop()
            .unwrap()
    }

    fn profile_of(design: &SteinerDesign) -> ProfileSet {
        let lines = design.verify().lines.expect("valid design");
        profiles(design, &lines)
    }

    #[test]
    fn fano_profile_is_two_to_168() {
        let set = profile_of(&fano_design());
        assert_eq!(set.global.canonical_string(), "{2=168}");
        assert_eq!(set.global.mass(), expected_mass(7, 3));
        for lp in &set.locals {
            assert_eq!(lp.canonical_string(), "{2=24}");
        }
    }

    #[test]
    fn rotational_nine_point_profile() {
        let set = profile_of(&s239_design());
        assert_eq!(set.global.canonical_string(), "{1=432}");
        assert_eq!(set.global.mass(), expected_mass(9, 3));
    }

    #[test]
    fn thirteen_point_profile() {
        let g = CyclicGroup::new(13).unwrap();
        let fam = DifferenceFamily::plain(
            g,
            4,
            vec![BaseBlock::finite(vec![0, 1, 3, 9], &g).unwrap()],
        )
        .unwrap();
        let d = fam.develop().unwrap();
        let set = profile_of(&d);
        assert_eq!(set.global.canonical_string(), "{3=2808}");
        assert_eq!(set.global.mass(), expected_mass(13, 4));
    }

    #[test]
    fn locals_sum_to_global() {
        for design in [fano_design(), s239_design()] {
            let set = profile_of(&design);
            let mut sum = GridProfile::default();
            for lp in &set.locals {
                sum.merge(lp);
            }
            assert_eq!(sum, set.global);
        }
    }

    #[test]
    fn values_stay_below_block_size() {
        for fam in brute_force_families(13, 4).unwrap() {
            let d = fam.develop().unwrap();
            let set = profile_of(&d);
            assert_eq!(set.global.mass(), expected_mass(13, 4));
            for (&value, _) in set.global.counts() {
                assert!(value >= 1 && value <= 3);
            }
        }
    }

    #[test]
    fn profile_invariant_under_relabeling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for design in [fano_design(), s239_design()] {
            let base = profile_of(&design).global;
            for _ in 0..20 {
                let mut image: Vec<u32> = (0..design.v()).collect();
                image.shuffle(&mut rng);
                let relabeled = design.relabel(&PointMap::new(image).unwrap()).unwrap();
                assert_eq!(profile_of(&relabeled).global, base);
            }
        }
    }

    #[test]
    fn digests_are_stable_and_distinct() {
        let p = profile_of(&fano_design()).global;
        let d1 = p.digest();
        assert_eq!(d1.len(), 32);
        assert_eq!(d1, profile_of(&fano_design()).global.digest());
        let empty = GridProfile::default();
        let mut one = BTreeMap::new();
        one.insert(1u32, 1u64);
        let one = GridProfile::from_counts(one);
        assert_ne!(empty.digest(), one.digest());
        assert_ne!(p.digest(), one.digest());
    }

    #[test]
    fn rotational_design_has_at_most_two_local_profiles() {
        let set = profile_of(&s239_design());
        let mut distinct: Vec<&GridProfile> = Vec::new();
        for lp in &set.locals {
            if !distinct.contains(&lp) {
                distinct.push(lp);
            }
        }
        assert!(distinct.len() <= 2);
    }

    #[test]
    fn anchored_colors_are_translation_covariant() {
        // colors at anchor a of a development match colors at a+1 under
        // the shift that maps one to the other
        let design = fano_design();
        let lines = design.verify().lines.unwrap();
        let inc = Incidence::build(&design);
        let c0 = anchored_colors(&design, &lines, &inc, 0);
        let c1 = anchored_colors(&design, &lines, &inc, 1);
        for z in 0..7u32 {
            let shifted = (z + 1) % 7;
            assert_eq!(c0[z as usize], c1[shifted as usize]);
        }
    }
}
