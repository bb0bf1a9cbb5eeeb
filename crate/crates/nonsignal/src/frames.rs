//! Sliding frames, gapped frames, placements on rings and segments, and
//! the marginal-equality constraint families they induce.
//!
//! Ring nodes are numbered 0..n-1; segment nodes 1..=k. A frame of
//! length s placed at w covers w..w+s-1; its gap-r gapped interval
//! additionally covers the r predecessor positions w-r..w-1.

use crate::ring::pow3;
use std::collections::HashSet;

/// Where frames live: an n-node ring or a k-node line segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Context {
    Ring { n: usize },
    Segment { k: usize },
}

impl Context {
    pub fn node_count(&self) -> usize {
        match *self {
            Context::Ring { n } => n,
            Context::Segment { k } => k,
        }
    }

    /// Packed-code position of a node (segment nodes are 1-based).
    pub fn position(&self, node: usize) -> usize {
        match *self {
            Context::Ring { .. } => node,
            Context::Segment { .. } => node - 1,
        }
    }
}

/// A t-tuple of sliding-frame lengths (s_1, ..., s_t).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameCollection {
    pub lengths: Vec<usize>,
}

impl FrameCollection {
    pub fn new(lengths: Vec<usize>) -> Self {
        assert!(!lengths.is_empty() && lengths.iter().all(|&s| s >= 1));
        FrameCollection { lengths }
    }

    pub fn total_len(&self) -> usize {
        self.lengths.iter().sum()
    }

    pub fn count(&self) -> usize {
        self.lengths.len()
    }
}

/// Color strings read through the frames of a collection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TableauCollection {
    pub tableaux: Vec<Vec<u8>>,
}

/// One marginal-equality constraint: the probability of reading `tableaux`
/// through `frames` placed at `omega` equals that at the canonical
/// placement `omega_ref`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalConstraint {
    pub frames: FrameCollection,
    pub tableaux: TableauCollection,
    pub omega_ref: Vec<usize>,
    pub omega: Vec<usize>,
    pub gap: usize,
    pub context: Context,
}

/// A collection is gap-r-placable on the n-ring iff sum(s_j + r) <= n.
pub fn is_placable(frames: &FrameCollection, r: usize, n: usize) -> bool {
    frames.lengths.iter().map(|&s| s + r).sum::<usize>() <= n
}

/// Checks pairwise disjointness of the gapped intervals, plus (for
/// segments) containment of the non-gapped frame bodies.
pub fn is_valid_placement(
    frames: &FrameCollection,
    omega: &[usize],
    r: usize,
    context: Context,
) -> bool {
    if omega.len() != frames.count() {
        return false;
    }
    match context {
        Context::Ring { n } => {
            let mut occupied = vec![false; n];
            for (&w, &s) in omega.iter().zip(&frames.lengths) {
                if w >= n || s + r > n {
                    return false;
                }
                for off in 0..s + r {
                    let node = (w + n - r + off) % n;
                    if occupied[node] {
                        return false;
                    }
                    occupied[node] = true;
                }
            }
            true
        }
        Context::Segment { k } => {
            // Gapped intervals may stick out below node 1; disjointness is
            // checked over the integers.
            let mut intervals: Vec<(i64, i64)> = Vec::new();
            for (&w, &s) in omega.iter().zip(&frames.lengths) {
                if w < 1 || w + s - 1 > k {
                    return false;
                }
                intervals.push((w as i64 - r as i64, (w + s - 1) as i64));
            }
            for i in 0..intervals.len() {
                for j in i + 1..intervals.len() {
                    let (a, b) = intervals[i];
                    let (c, d) = intervals[j];
                    if a <= d && c <= b {
                        return false;
                    }
                }
            }
            true
        }
    }
}

fn placements_rec(
    frames: &FrameCollection,
    r: usize,
    context: Context,
    first_fixed: bool,
    partial: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let j = partial.len();
    if j == frames.count() {
        out.push(partial.clone());
        return;
    }
    let starts: Box<dyn Iterator<Item = usize>> = match context {
        Context::Ring { n } => {
            if j == 0 && first_fixed {
                Box::new(std::iter::once(0))
            } else {
                Box::new(0..n)
            }
        }
        Context::Segment { k } => {
            let s = frames.lengths[j];
            if s > k {
                return;
            }
            Box::new(1..=k - s + 1)
        }
    };
    for w in starts {
        partial.push(w);
        if is_valid_placement(
            &FrameCollection::new(frames.lengths[..=j].to_vec()),
            partial,
            r,
            context,
        ) {
            placements_rec(frames, r, context, first_fixed, partial, out);
        }
        partial.pop();
    }
}

/// All valid gap-r placements on the ring, lexicographic order.
pub fn placements_ring(frames: &FrameCollection, r: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    placements_rec(frames, r, Context::Ring { n }, false, &mut Vec::new(), &mut out);
    out
}

/// Ring placements with the first frame anchored at node 0. Under the
/// cyclicity quotient every placement is rotation-equivalent to exactly
/// one anchored placement.
pub fn placements_ring_anchored(frames: &FrameCollection, r: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    placements_rec(frames, r, Context::Ring { n }, true, &mut Vec::new(), &mut out);
    out
}

/// All valid gap-r placements respecting the segment, lexicographic order.
pub fn placements_segment(frames: &FrameCollection, r: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    placements_rec(frames, r, Context::Segment { k }, false, &mut Vec::new(), &mut out);
    out
}

pub fn placements(frames: &FrameCollection, r: usize, context: Context) -> Vec<Vec<usize>> {
    match context {
        Context::Ring { n } => placements_ring(frames, r, n),
        Context::Segment { k } => placements_segment(frames, r, k),
    }
}

/// The canonical packed placement: first frame at the start, each
/// subsequent frame immediately after the previous frame plus gap.
pub fn canonical_placement(frames: &FrameCollection, r: usize, context: Context) -> Vec<usize> {
    let start = match context {
        Context::Ring { .. } => 0,
        Context::Segment { .. } => 1,
    };
    let mut omega = Vec::with_capacity(frames.count());
    let mut w = start;
    for &s in &frames.lengths {
        omega.push(w);
        w += s + r;
    }
    omega
}

/// The partial node-to-color assignment read off a placed tableau
/// collection, sorted by packed-code position.
pub fn placement_assignment(
    frames: &FrameCollection,
    omega: &[usize],
    tableaux: &TableauCollection,
    context: Context,
) -> Vec<(usize, u8)> {
    let n = context.node_count();
    let mut assignment = Vec::with_capacity(frames.total_len());
    for ((&w, &s), zeta) in omega.iter().zip(&frames.lengths).zip(&tableaux.tableaux) {
        debug_assert_eq!(zeta.len(), s);
        for (i, &color) in zeta.iter().enumerate() {
            let node = match context {
                Context::Ring { .. } => (w + i) % n,
                Context::Segment { .. } => w + i,
            };
            assignment.push((context.position(node), color));
        }
    }
    assignment.sort_unstable();
    assignment
}

/// Enumerates the packed codes of all full colorings consistent with a
/// partial assignment; there are 3^(free nodes) of them.
pub fn consistent_codes(assignment: &[(usize, u8)], node_count: usize) -> Vec<u64> {
    let mut fixed = vec![None; node_count];
    for &(pos, color) in assignment {
        debug_assert!(fixed[pos].is_none(), "overlapping assignment");
        fixed[pos] = Some(color);
    }
    let free: Vec<usize> = (0..node_count).filter(|&p| fixed[p].is_none()).collect();
    let base: u64 = (0..node_count)
        .map(|p| fixed[p].unwrap_or(0) as u64 * pow3(p))
        .sum();
    let mut out = Vec::with_capacity(pow3(free.len()) as usize);
    for mut idx in 0..pow3(free.len()) {
        let mut code = base;
        for &p in &free {
            code += (idx % 3) * pow3(p);
            idx /= 3;
        }
        out.push(code);
    }
    out
}

/// Predicate form: does a packed coloring read the given tableaux?
pub fn code_matches(code: u64, assignment: &[(usize, u8)]) -> bool {
    assignment
        .iter()
        .all(|&(pos, color)| crate::ring::digit(code, pos) == color)
}

/// Limits on the constraint family: maximum number of frames per
/// collection and maximum total frame length. `None` means the full
/// placable family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_frames: Option<usize>,
    pub max_total_len: Option<usize>,
}

impl Budget {
    pub fn unbounded() -> Self {
        Budget::default()
    }

    pub fn capped(max_frames: usize, max_total_len: usize) -> Self {
        Budget {
            max_frames: Some(max_frames),
            max_total_len: Some(max_total_len),
        }
    }
}

/// All gap-r-placable frame collections within budget, ordered by frame
/// count, then lexicographically by lengths.
pub fn placable_collections(context: Context, r: usize, budget: Budget) -> Vec<FrameCollection> {
    let nodes = context.node_count();
    // Placability: on the ring every frame needs its gap; on a segment
    // only the t-1 inner gaps are forced (outer gaps may stick out).
    let fits = |lengths: &[usize]| -> bool {
        let total: usize = lengths.iter().sum();
        match context {
            Context::Ring { .. } => total + lengths.len() * r <= nodes,
            Context::Segment { .. } => {
                total + (lengths.len() - 1) * r <= nodes
                    && lengths.iter().all(|&s| s <= nodes)
            }
        }
    };
    let max_t = budget.max_frames.unwrap_or(nodes);
    let max_len = budget.max_total_len.unwrap_or(nodes);
    let mut out = Vec::new();
    for t in 1..=max_t {
        let mut lengths = vec![1usize; t];
        loop {
            if lengths.iter().sum::<usize>() <= max_len && fits(&lengths) {
                out.push(FrameCollection::new(lengths.clone()));
            }
            // Odometer over lengths, each in 1..=max_len.
            let mut j = t;
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                if lengths[j] < max_len.min(nodes) {
                    lengths[j] += 1;
                    for l in lengths.iter_mut().skip(j + 1) {
                        *l = 1;
                    }
                    break;
                }
                if j == 0 {
                    j = usize::MAX;
                    break;
                }
            }
            if j == usize::MAX {
                break;
            }
        }
    }
    out
}

/// Enumerates all tableau collections for a frame collection as packed
/// base-3 counters split per frame.
pub fn tableau_collections(frames: &FrameCollection) -> impl Iterator<Item = TableauCollection> + '_ {
    let total = frames.total_len();
    (0..pow3(total)).map(move |mut idx| {
        let mut tableaux = Vec::with_capacity(frames.count());
        for &s in &frames.lengths {
            let mut zeta = Vec::with_capacity(s);
            for _ in 0..s {
                zeta.push((idx % 3) as u8);
                idx /= 3;
            }
            tableaux.push(zeta);
        }
        TableauCollection { tableaux }
    })
}

/// Streams the canonical-anchored marginal constraint family: for every
/// placable collection within budget, every tableau collection, and every
/// non-canonical placement, one constraint equating its marginal with the
/// canonical placement's. Constraints whose assignment pair was already
/// seen (identical coloring index sets) are suppressed.
pub fn generate_marginal_constraints(
    context: Context,
    r: usize,
    budget: Budget,
) -> Vec<MarginalConstraint> {
    let mut out = Vec::new();
    let mut seen: HashSet<(Vec<(usize, u8)>, Vec<(usize, u8)>)> = HashSet::new();
    for frames in placable_collections(context, r, budget) {
        let all = placements(&frames, r, context);
        if all.len() < 2 {
            continue;
        }
        let omega_ref = canonical_placement(&frames, r, context);
        debug_assert!(all.contains(&omega_ref));
        for zeta in tableau_collections(&frames) {
            let ref_assignment = placement_assignment(&frames, &omega_ref, &zeta, context);
            for omega in &all {
                if *omega == omega_ref {
                    continue;
                }
                let assignment = placement_assignment(&frames, omega, &zeta, context);
                if assignment == ref_assignment {
                    continue;
                }
                let key = if ref_assignment <= assignment {
                    (ref_assignment.clone(), assignment.clone())
                } else {
                    (assignment.clone(), ref_assignment.clone())
                };
                if !seen.insert(key) {
                    continue;
                }
                out.push(MarginalConstraint {
                    frames: frames.clone(),
                    tableaux: zeta.clone(),
                    omega_ref: omega_ref.clone(),
                    omega: omega.clone(),
                    gap: r,
                    context,
                });
            }
        }
    }
    out
}

/// Stable one-line text form for `--dump-constraints`.
pub fn constraint_line(c: &MarginalConstraint) -> String {
    let lengths: Vec<String> = c.frames.lengths.iter().map(|s| s.to_string()).collect();
    let zetas: Vec<String> = c
        .tableaux
        .tableaux
        .iter()
        .map(|z| z.iter().map(|v| v.to_string()).collect::<String>())
        .collect();
    let fmt = |w: &[usize]| {
        w.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "F=({}) zeta=({}) omega=({}) omega'=({})",
        lengths.join(","),
        zetas.join("|"),
        fmt(&c.omega_ref),
        fmt(&c.omega),
    )
}
