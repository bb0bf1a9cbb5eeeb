//! Colorings of directed rings and line segments over the color set
//! {0,1,2}: enumeration, counting recurrences, same-color statistics
//! (beta vectors), and orbit tables under rotation / color permutation.

use crate::rational::{format_rat, Rat};
use num::bigint::BigInt;
use num::traits::Pow;
use std::collections::BTreeMap;

/// The six permutations of the color set, in lexicographic order.
pub const COLOR_PERMS: [[u8; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Powers of three up to 3^40 (fits u64).
pub fn pow3(e: usize) -> u64 {
    3u64.pow(e as u32)
}

/// A coloring of the n-node directed ring. Node v's color is `colors[v]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    pub n: usize,
    pub colors: Vec<u8>,
}

impl Coloring {
    pub fn new(colors: Vec<u8>) -> Self {
        let n = colors.len();
        assert!(n >= 3, "ring needs at least 3 nodes");
        assert!(colors.iter().all(|&c| c < 3), "colors must be in {{0,1,2}}");
        Coloring { n, colors }
    }

    pub fn from_code(code: u64, n: usize) -> Self {
        Coloring::new(unpack(code, n))
    }

    pub fn code(&self) -> u64 {
        pack(&self.colors)
    }
}

/// A coloring of a k-node line segment. Nodes are numbered 1..=k to match
/// the pair indexing of segment beta vectors; internally 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentColoring {
    pub k: usize,
    pub colors: Vec<u8>,
}

impl SegmentColoring {
    pub fn new(colors: Vec<u8>) -> Self {
        let k = colors.len();
        assert!(k >= 1, "segment needs at least 1 node");
        assert!(colors.iter().all(|&c| c < 3), "colors must be in {{0,1,2}}");
        SegmentColoring { k, colors }
    }

    pub fn from_code(code: u64, k: usize) -> Self {
        SegmentColoring::new(unpack(code, k))
    }

    pub fn code(&self) -> u64 {
        pack(&self.colors)
    }
}

/// Base-3 packing, little-endian: node v occupies the 3^v digit.
pub fn pack(colors: &[u8]) -> u64 {
    let mut code = 0u64;
    for &c in colors.iter().rev() {
        code = code * 3 + c as u64;
    }
    code
}

pub fn unpack(mut code: u64, n: usize) -> Vec<u8> {
    let mut colors = vec![0u8; n];
    for slot in colors.iter_mut() {
        *slot = (code % 3) as u8;
        code /= 3;
    }
    colors
}

#[inline]
pub fn digit(code: u64, v: usize) -> u8 {
    ((code / pow3(v)) % 3) as u8
}

/// Rotates a packed coloring by one node: node v takes the color of v+1.
#[inline]
pub fn rotate_code(code: u64, n: usize) -> u64 {
    code / 3 + (code % 3) * pow3(n - 1)
}

pub fn permute_code(code: u64, n: usize, perm: &[u8; 3]) -> u64 {
    let mut out = 0u64;
    let mut rem = code;
    let mut base = 1u64;
    for _ in 0..n {
        out += perm[(rem % 3) as usize] as u64 * base;
        rem /= 3;
        base *= 3;
    }
    out
}

/// Counts proper colorings of a length-l segment (l+1 nodes, l links),
/// split by whether the endpoints share a color:
/// a_l = 2^l + 2(-1)^l, b_l = 2(2^l - (-1)^l).
pub fn count_colorings(l: u64) -> (BigInt, BigInt) {
    let two_l: BigInt = BigInt::from(2).pow(l);
    let sign = if l % 2 == 0 { 1 } else { -1 };
    let a = &two_l + BigInt::from(2 * sign);
    let b = BigInt::from(2) * (&two_l - BigInt::from(sign));
    (a, b)
}

pub fn is_proper_ring(c: &Coloring) -> bool {
    (0..c.n).all(|v| c.colors[v] != c.colors[(v + 1) % c.n])
}

pub fn is_proper_segment(c: &SegmentColoring) -> bool {
    c.colors.windows(2).all(|w| w[0] != w[1])
}

#[inline]
pub fn is_proper_ring_code(code: u64, n: usize) -> bool {
    (0..n).all(|v| digit(code, v) != digit(code, (v + 1) % n))
}

/// Enumerates the proper ring colorings that fix colors (1,0) on nodes
/// (0,1), encoded by step strings in {1,2}^(n-2): each step adds 1 or 2
/// mod 3 to the previous color. Wrap-around violations are rejected.
/// Every proper coloring is a unique recoloring of exactly one base.
pub fn proper_ring_bases(n: usize) -> impl Iterator<Item = u64> {
    assert!(n >= 3, "ring needs at least 3 nodes");
    (0u64..1 << (n - 2)).filter_map(move |i| {
        let mut colors = [0u8; 64];
        colors[0] = 1;
        colors[1] = 0;
        for j in 2..n {
            let step = 1 + ((i >> (j - 2)) & 1) as u8;
            colors[j] = (colors[j - 1] + step) % 3;
        }
        if colors[n - 1] == colors[0] {
            None
        } else {
            Some(pack(&colors[..n]))
        }
    })
}

/// All proper colorings of the n-node ring, exactly once, in a
/// deterministic order; yields a_n colorings.
pub fn enumerate_proper_ring(n: usize) -> impl Iterator<Item = Coloring> {
    proper_ring_bases(n).flat_map(move |base| {
        COLOR_PERMS
            .iter()
            .map(move |perm| Coloring::from_code(permute_code(base, n, perm), n))
    })
}

/// All 3 * 2^(k-1) proper segment colorings, deterministic order.
pub fn enumerate_proper_segment(k: usize) -> impl Iterator<Item = SegmentColoring> {
    assert!(k >= 1, "segment needs at least 1 node");
    (0u8..3).flat_map(move |first| {
        (0u64..1 << (k - 1)).map(move |i| {
            let mut colors = vec![first; k];
            for j in 1..k {
                let step = 1 + ((i >> (j - 1)) & 1) as u8;
                colors[j] = (colors[j - 1] + step) % 3;
            }
            SegmentColoring::new(colors)
        })
    })
}

/// Probability that two nodes at distance d share a color under the
/// uniform distribution over proper ring colorings: a_d a_(n-d) / (3 a_n).
pub fn uniform_same_color_prob(n: usize, d: usize) -> Rat {
    assert!(n >= 3 && d >= 1 && d <= n - 1, "need n >= 3, 1 <= d <= n-1");
    let (a_d, _) = count_colorings(d as u64);
    let (a_nd, _) = count_colorings((n - d) as u64);
    let (a_n, _) = count_colorings(n as u64);
    Rat::new(a_d * a_nd, BigInt::from(3) * a_n)
}

/// Same-color statistics of a ring coloring: for each distance
/// d in 2..=n-2, the fraction of nodes v with color(v) = color(v+d).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaVectorRing {
    pub n: usize,
    /// Match counts per distance; entry value is counts[d-2] / n.
    pub counts: Vec<u16>,
}

impl BetaVectorRing {
    pub fn entry(&self, d: usize) -> Rat {
        crate::rational::rat(self.counts[d - 2] as i64, self.n as i64)
    }

    pub fn distances(&self) -> impl Iterator<Item = usize> {
        2..=self.n - 2
    }
}

/// Same-color indicators of a segment coloring for all non-adjacent
/// pairs 1 <= u, u+2 <= v <= k (1-based nodes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaVectorSegment {
    pub k: usize,
    /// Indicators in the order produced by `segment_pairs(k)`.
    pub entries: Vec<u8>,
}

/// Non-adjacent pairs (u,v), u < v, 1-based, in lexicographic order.
pub fn segment_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for u in 1..=k {
        for v in u + 2..=k {
            pairs.push((u, v));
        }
    }
    pairs
}

pub fn beta_ring(c: &Coloring) -> BetaVectorRing {
    BetaVectorRing {
        n: c.n,
        counts: beta_ring_counts_code(c.code(), c.n),
    }
}

pub fn beta_ring_counts_code(code: u64, n: usize) -> Vec<u16> {
    let colors = unpack(code, n);
    (2..=n - 2)
        .map(|d| (0..n).filter(|&v| colors[v] == colors[(v + d) % n]).count() as u16)
        .collect()
}

pub fn beta_segment(c: &SegmentColoring) -> BetaVectorSegment {
    let entries = segment_pairs(c.k)
        .iter()
        .map(|&(u, v)| u8::from(c.colors[u - 1] == c.colors[v - 1]))
        .collect();
    BetaVectorSegment { k: c.k, entries }
}

/// Deduplicated beta vectors over ring colorings, deterministically
/// ordered. Color permutations preserve beta, so the proper scan only
/// visits one base per recoloring orbit.
pub fn distinct_beta_ring(n: usize, proper_only: bool) -> Vec<BetaVectorRing> {
    assert!(n >= 5, "ring beta set needs n >= 5");
    let mut set: std::collections::BTreeSet<Vec<u16>> = Default::default();
    if proper_only {
        for base in proper_ring_bases(n) {
            set.insert(beta_ring_counts_code(base, n));
        }
    } else {
        for code in 0..pow3(n) {
            set.insert(beta_ring_counts_code(code, n));
        }
    }
    set.into_iter()
        .map(|counts| BetaVectorRing { n, counts })
        .collect()
}

pub fn distinct_beta_segment(k: usize, proper_only: bool) -> Vec<BetaVectorSegment> {
    assert!(k >= 4, "segment beta set needs k >= 4");
    let pairs = segment_pairs(k);
    let beta_of = |code: u64| -> Vec<u8> {
        pairs
            .iter()
            .map(|&(u, v)| u8::from(digit(code, u - 1) == digit(code, v - 1)))
            .collect()
    };
    let mut set: std::collections::BTreeSet<Vec<u8>> = Default::default();
    if proper_only {
        // First color fixed to 0: recolorings preserve beta.
        for c in enumerate_proper_segment(k) {
            if c.colors[0] == 0 {
                set.insert(beta_of(c.code()));
            }
        }
    } else {
        for code in 0..pow3(k) {
            set.insert(beta_of(code));
        }
    }
    set.into_iter()
        .map(|entries| BetaVectorSegment { k, entries })
        .collect()
}

/// CSV export of a ring beta set: header `d=2,...`, entries `num/den`.
pub fn beta_ring_csv(set: &[BetaVectorRing], n: usize) -> String {
    let mut out = String::new();
    let header: Vec<String> = (2..=n - 2).map(|d| format!("d={d}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for beta in set {
        let row: Vec<String> = (2..=n - 2).map(|d| format_rat(&beta.entry(d))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// CSV export of a segment beta set: header `u:v` pairs, entries 0/1.
pub fn beta_segment_csv(set: &[BetaVectorSegment], k: usize) -> String {
    let mut out = String::new();
    let header: Vec<String> = segment_pairs(k)
        .iter()
        .map(|&(u, v)| format!("{u}:{v}"))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for beta in set {
        let row: Vec<String> = beta.entries.iter().map(|&e| format!("{e}/1")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Partition of all 3^n colorings into orbit classes. Rotations are
/// always quotiented; color permutations optionally.
#[derive(Debug, Clone)]
pub struct ClassTable {
    pub n: usize,
    /// Class index of every packed coloring; length 3^n.
    pub class_of: Vec<u32>,
    /// Canonical (numerically smallest) member of each class.
    pub reps: Vec<u64>,
    pub orbit_sizes: Vec<u32>,
    pub proper: Vec<bool>,
}

impl ClassTable {
    pub fn class_count(&self) -> usize {
        self.reps.len()
    }
}

fn classes_impl(
    n: usize,
    rotations: bool,
    color_perms: bool,
    proper_fn: impl Fn(u64) -> bool,
) -> ClassTable {
    let total = pow3(n);
    let mut class_of = vec![u32::MAX; total as usize];
    let mut reps = Vec::new();
    let mut orbit_sizes = Vec::new();
    let mut proper = Vec::new();
    let mut orbit_buf = Vec::new();
    for code in 0..total {
        if class_of[code as usize] != u32::MAX {
            continue;
        }
        orbit_buf.clear();
        let perms: &[[u8; 3]] = if color_perms {
            &COLOR_PERMS
        } else {
            &COLOR_PERMS[..1]
        };
        for perm in perms {
            let mut cur = permute_code(code, n, perm);
            if rotations {
                for _ in 0..n {
                    orbit_buf.push(cur);
                    cur = rotate_code(cur, n);
                }
            } else {
                orbit_buf.push(cur);
            }
        }
        orbit_buf.sort_unstable();
        orbit_buf.dedup();
        let id = reps.len() as u32;
        for &member in orbit_buf.iter() {
            class_of[member as usize] = id;
        }
        reps.push(orbit_buf[0]);
        orbit_sizes.push(orbit_buf.len() as u32);
        proper.push(proper_fn(code));
    }
    ClassTable {
        n,
        class_of,
        reps,
        orbit_sizes,
        proper,
    }
}

/// Orbit table of ring colorings under rotation and/or color permutation;
/// with both flags off every coloring is its own class.
pub fn orbit_classes(n: usize, rotations: bool, color_perms: bool) -> ClassTable {
    assert!(n >= 3, "ring needs at least 3 nodes");
    classes_impl(n, rotations, color_perms, |code| {
        is_proper_ring_code(code, n)
    })
}

/// Orbit table of segment colorings under color permutation (segments
/// have no rotation symmetry).
pub fn segment_classes(k: usize, color_perms: bool) -> ClassTable {
    assert!(k >= 1);
    classes_impl(k, false, color_perms, |code| {
        let c = SegmentColoring::from_code(code, k);
        is_proper_segment(&c)
    })
}

/// Rotation-orbit table of all 3^n colorings (no color quotient).
pub type CyclicClassTable = ClassTable;

pub fn cyclic_classes(n: usize) -> CyclicClassTable {
    orbit_classes(n, true, false)
}

/// Distribution over ring colorings as a map from packed codes to
/// probabilities; used by the ring-to-segment restriction.
pub fn restrict_to_segment(
    ring_dist: &BTreeMap<u64, Rat>,
    n: usize,
    k: usize,
) -> BTreeMap<u64, Rat> {
    let mask = pow3(k);
    let mut out: BTreeMap<u64, Rat> = BTreeMap::new();
    for (&code, p) in ring_dist {
        assert!(code < pow3(n));
        let key = code % mask;
        *out.entry(key).or_insert_with(|| Rat::new(0.into(), 1.into())) += p.clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// Brute-force oracle: all 3^(l+1) node strings of a length-l segment,
    /// split by endpoint equality.
    fn count_oracle(l: usize) -> (u64, u64) {
        let nodes = l + 1;
        let (mut a, mut b) = (0u64, 0u64);
        for code in 0..pow3(nodes) {
            let colors = unpack(code, nodes);
            if colors.windows(2).all(|w| w[0] != w[1]) {
                if colors[0] == colors[nodes - 1] {
                    a += 1;
                } else {
                    b += 1;
                }
            }
        }
        (a, b)
    }

    #[test]
    fn counting_recurrence_matches_paper_values() {
        assert_eq!(count_colorings(0), (BigInt::from(3), BigInt::from(0)));
        assert_eq!(count_colorings(1), (BigInt::from(0), BigInt::from(6)));
        assert_eq!(count_colorings(4).0, BigInt::from(18));
        assert_eq!(count_colorings(11).0, BigInt::from(2046));
        assert_eq!(count_colorings(11).1, BigInt::from(4098));
    }

    #[test]
    fn counting_matches_brute_force_up_to_14() {
        for l in 0..=14 {
            let (a, b) = count_colorings(l as u64);
            let (ao, bo) = count_oracle(l);
            assert_eq!(a, BigInt::from(ao), "a mismatch at l={l}");
            assert_eq!(b, BigInt::from(bo), "b mismatch at l={l}");
            assert_eq!(a + b, BigInt::from(3) * BigInt::from(2u64).pow(l as u64));
        }
    }

    #[test]
    fn properness_checks() {
        assert!(is_proper_ring(&Coloring::new(vec![0, 1, 0, 1])));
        assert!(!is_proper_ring(&Coloring::new(vec![0, 1, 2, 0])));
        assert!(is_proper_segment(&SegmentColoring::new(vec![0, 1, 0])));
        assert!(!is_proper_segment(&SegmentColoring::new(vec![0, 0, 1])));
    }

    #[test]
    fn ring_enumeration_counts_and_uniqueness() {
        for n in [3usize, 4, 7, 11] {
            let all: Vec<_> = enumerate_proper_ring(n).collect();
            let expected = count_colorings(n as u64).0;
            assert_eq!(BigInt::from(all.len()), expected, "count at n={n}");
            let codes: std::collections::HashSet<u64> = all.iter().map(|c| c.code()).collect();
            assert_eq!(codes.len(), all.len(), "duplicates at n={n}");
            assert!(all.iter().all(is_proper_ring));
        }
    }

    #[test]
    fn segment_enumeration_counts() {
        assert_eq!(enumerate_proper_segment(2).count(), 6);
        assert_eq!(enumerate_proper_segment(9).count(), 768);
        for k in 1..=10 {
            let brute = (0..pow3(k))
                .filter(|&code| {
                    let c = SegmentColoring::from_code(code, k);
                    is_proper_segment(&c)
                })
                .count();
            assert_eq!(enumerate_proper_segment(k).count(), brute);
            assert_eq!(brute as u64, 3 * (1 << (k - 1)));
        }
    }

    #[test]
    fn uniform_prob_examples() {
        assert_eq!(uniform_same_color_prob(4, 2), rat(2, 3));
        for n in 3..=12 {
            assert_eq!(uniform_same_color_prob(n, 1), rat(0, 1));
        }
        // n=11: pairwise distinct across d=1..5.
        let vals: Vec<Rat> = (1..=5).map(|d| uniform_same_color_prob(11, d)).collect();
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                assert_ne!(vals[i], vals[j]);
            }
        }
    }

    #[test]
    fn uniform_prob_matches_enumeration() {
        for n in 3..=10 {
            let all: Vec<_> = enumerate_proper_ring(n).collect();
            for d in 1..n {
                let matches = all
                    .iter()
                    .filter(|c| c.colors[0] == c.colors[d % n])
                    .count();
                let freq = rat(matches as i64, all.len() as i64);
                assert_eq!(uniform_same_color_prob(n, d), freq, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn beta_examples() {
        let b = beta_ring(&Coloring::new(vec![0, 1, 0, 1, 0, 1]));
        assert_eq!(b.entry(2), rat(1, 1));
        assert_eq!(b.entry(3), rat(0, 1));
        assert_eq!(b.entry(4), rat(1, 1));
        let b = beta_ring(&Coloring::new(vec![0; 6]));
        assert!((2..=4).all(|d| b.entry(d) == rat(1, 1)));

        let s = beta_segment(&SegmentColoring::new(vec![0, 1, 0, 2]));
        let pairs = segment_pairs(4);
        let lookup = |u: usize, v: usize| {
            s.entries[pairs.iter().position(|&p| p == (u, v)).unwrap()]
        };
        assert_eq!(lookup(1, 3), 1);
        assert_eq!(lookup(1, 4), 0);
        assert_eq!(lookup(2, 4), 0);
    }

    #[test]
    fn beta_symmetry_holds_for_all_colorings_n7() {
        let n = 7;
        for code in 0..pow3(n) {
            let counts = beta_ring_counts_code(code, n);
            for d in 2..=n - 2 {
                assert_eq!(counts[d - 2], counts[n - d - 2]);
            }
        }
    }

    #[test]
    fn distinct_beta_small() {
        // n=11 gives 21 distinct vectors; checked cheaply here, the larger
        // published counts run in the acceptance suite.
        assert_eq!(distinct_beta_ring(11, true).len(), 21);
    }

    #[test]
    fn distinct_beta_ring_matches_full_scan() {
        // The base-orbit shortcut agrees with a scan over all proper colorings.
        let n = 9;
        let mut set = std::collections::BTreeSet::new();
        for c in enumerate_proper_ring(n) {
            set.insert(beta_ring_counts_code(c.code(), n));
        }
        let fast: std::collections::BTreeSet<Vec<u16>> = distinct_beta_ring(n, true)
            .into_iter()
            .map(|b| b.counts)
            .collect();
        assert_eq!(set, fast);
    }

    #[test]
    fn cyclic_classes_small() {
        let t = cyclic_classes(3);
        assert_eq!(t.class_count(), 11);
        let size1 = t.orbit_sizes.iter().filter(|&&s| s == 1).count();
        let size3 = t.orbit_sizes.iter().filter(|&&s| s == 3).count();
        assert_eq!((size1, size3), (3, 8));
        let total: u64 = t.orbit_sizes.iter().map(|&s| s as u64).sum();
        assert_eq!(total, 27);
    }

    #[test]
    fn cyclic_classes_burnside_n11() {
        let t = cyclic_classes(11);
        assert_eq!(t.class_count(), (pow3(11) as usize + 10 * 3) / 11);
        let total: u64 = t.orbit_sizes.iter().map(|&s| s as u64).sum();
        assert_eq!(total, pow3(11));
        for &s in &t.orbit_sizes {
            assert_eq!(11 % s, 0);
        }
    }

    #[test]
    fn class_members_share_properness() {
        let t = cyclic_classes(6);
        for code in 0..pow3(6) {
            let id = t.class_of[code as usize] as usize;
            assert_eq!(t.proper[id], is_proper_ring_code(code, 6));
        }
    }

    #[test]
    fn restriction_of_point_mass() {
        let mut dist = BTreeMap::new();
        dist.insert(pack(&[0, 1, 2, 0, 1]), rat(1, 1));
        let m = restrict_to_segment(&dist, 5, 3);
        assert_eq!(m.len(), 1);
        assert_eq!(m[&pack(&[0, 1, 2])], rat(1, 1));
    }
}
