//! Assembles the marginal-equality linear programs over coloring
//! distributions, with optional rotation and color-permutation quotients,
//! and checks candidate solutions against the full (unbudgeted)
//! constraint family.

use crate::frames::{
    canonical_placement, placable_collections, placements_ring, placements_ring_anchored,
    placements_segment, tableau_collections, Budget, Context, FrameCollection,
};
use crate::lp::{RationalLP, Row};
use crate::rational::{rat_int, Rat};
use crate::ring::{digit, pow3, rotate_code, unpack, ClassTable};
use num::bigint::BigInt;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::HashSet;

/// A built LP together with the class table its variables refer to.
pub struct BuiltLp {
    pub lp: RationalLP,
    pub classes: ClassTable,
    pub context: Context,
    pub gap: usize,
    pub rotation_quotient: bool,
    pub budget: Budget,
}

/// Human-readable dump of the marginal-equality family the LP encodes
/// (frames, tableaux, and the placements being equated), regenerated
/// from the stored budget.
pub fn constraint_descriptions(built: &BuiltLp) -> Vec<String> {
    crate::frames::generate_marginal_constraints(built.context, built.gap, built.budget)
        .iter()
        .map(crate::frames::constraint_line)
        .collect()
}

fn class_label(rep: u64, nodes: usize) -> String {
    unpack(rep, nodes).iter().map(|c| c.to_string()).collect()
}

/// Frame collections are generated in every length order, but reordering
/// the frames only re-indexes a constraint's tableau coordinates, so the
/// sorted representative spans the same equalities.
fn is_sorted_lengths(frames: &FrameCollection) -> bool {
    frames.lengths.windows(2).all(|w| w[0] <= w[1])
}

fn build_placements(
    frames: &FrameCollection,
    r: usize,
    context: Context,
    rotation_quotient: bool,
) -> Vec<Vec<usize>> {
    match context {
        Context::Ring { n } => {
            if rotation_quotient {
                placements_ring_anchored(frames, r, n)
            } else {
                placements_ring(frames, r, n)
            }
        }
        Context::Segment { k } => placements_segment(frames, r, k),
    }
}

/// Accumulates, for one placed tableau collection, how many colorings of
/// each class are consistent with it. `acc` is a dense scratch buffer;
/// touched indices are recorded for cheap reset.
fn accumulate_marginal(
    frames: &FrameCollection,
    omega: &[usize],
    zeta_digits: &[u8],
    context: Context,
    classes: &ClassTable,
    acc: &mut [i64],
    touched: &mut Vec<u32>,
) {
    let nodes = context.node_count();
    let mut fixed: Vec<Option<u8>> = vec![None; nodes];
    let mut zi = 0usize;
    for (&w, &s) in omega.iter().zip(&frames.lengths) {
        for i in 0..s {
            let node = match context {
                Context::Ring { n } => (w + i) % n,
                Context::Segment { .. } => w + i,
            };
            let pos = context.position(node);
            debug_assert!(fixed[pos].is_none());
            fixed[pos] = Some(zeta_digits[zi]);
            zi += 1;
        }
    }
    let free: Vec<usize> = (0..nodes).filter(|&p| fixed[p].is_none()).collect();
    let base: u64 = (0..nodes)
        .map(|p| fixed[p].unwrap_or(0) as u64 * pow3(p))
        .sum();
    for mut idx in 0..pow3(free.len()) {
        let mut code = base;
        for &p in &free {
            code += (idx % 3) * pow3(p);
            idx /= 3;
        }
        let c = classes.class_of[code as usize];
        if acc[c as usize] == 0 {
            touched.push(c);
        }
        acc[c as usize] += 1;
    }
}

/// Canonical sparse form of a difference row: gcd-reduced, first nonzero
/// coefficient positive.
fn normalize_row(mut terms: Vec<(u32, i64)>) -> Vec<(u32, i64)> {
    terms.retain(|&(_, v)| v != 0);
    if terms.is_empty() {
        return terms;
    }
    let mut g: i64 = 0;
    for &(_, v) in &terms {
        g = g.gcd(&v.abs());
    }
    let sign = if terms[0].1 < 0 { -1 } else { 1 };
    for t in terms.iter_mut() {
        t.1 = t.1 / g * sign;
    }
    terms
}

/// Builds the distribution LP on a ring or segment: maximize total proper
/// probability subject to normalization, cyclicity (rings without the
/// rotation quotient), and placement-invariance of every within-budget
/// frame-collection marginal.
pub fn build_lp(
    context: Context,
    r: usize,
    rotation_quotient: bool,
    color_symmetry: bool,
    budget: Budget,
) -> BuiltLp {
    let nodes = context.node_count();
    let classes = match context {
        Context::Ring { n } => crate::ring::orbit_classes(n, rotation_quotient, color_symmetry),
        Context::Segment { k } => {
            assert!(!rotation_quotient, "segments have no rotation symmetry");
            crate::ring::segment_classes(k, color_symmetry)
        }
    };
    let nv = classes.reps.len();
    let variables: Vec<String> = classes
        .reps
        .iter()
        .map(|&rep| class_label(rep, nodes))
        .collect();
    let objective: Vec<(usize, Rat)> = (0..nv)
        .filter(|&c| classes.proper[c])
        .map(|c| (c, rat_int(classes.orbit_sizes[c] as i64)))
        .collect();

    let mut rows = Vec::new();
    // Row 0: total probability mass is one.
    rows.push(Row {
        terms: (0..nv)
            .map(|c| (c, rat_int(classes.orbit_sizes[c] as i64)))
            .collect(),
        rhs: Rat::one(),
    });

    let mut seen: HashSet<Vec<(u32, i64)>> = HashSet::new();

    // Cyclicity rows, when rotation is not already quotiented away.
    if let Context::Ring { n } = context {
        if !rotation_quotient {
            for code in 0..pow3(n) {
                let a = classes.class_of[code as usize];
                let b = classes.class_of[rotate_code(code, n) as usize];
                if a == b {
                    continue;
                }
                let row = normalize_row(vec![(a, 1), (b, -1)]);
                if seen.insert(row.clone()) {
                    rows.push(Row {
                        terms: row
                            .into_iter()
                            .map(|(c, v)| (c as usize, rat_int(v)))
                            .collect(),
                        rhs: Rat::zero(),
                    });
                }
            }
        }
    }

    let mut acc = vec![0i64; nv];
    let mut touched: Vec<u32> = Vec::new();
    let mut ref_row: Vec<(u32, i64)> = Vec::new();
    for frames in placable_collections(context, r, budget) {
        if !is_sorted_lengths(&frames) {
            continue;
        }
        let plist = build_placements(&frames, r, context, rotation_quotient);
        if plist.len() < 2 {
            continue;
        }
        let omega_ref = canonical_placement(&frames, r, context);
        assert!(plist.contains(&omega_ref));
        for zeta in tableau_collections(&frames) {
            let digits: Vec<u8> = zeta.tableaux.iter().flatten().copied().collect();
            ref_row.clear();
            accumulate_marginal(
                &frames, &omega_ref, &digits, context, &classes, &mut acc, &mut touched,
            );
            for &c in &touched {
                ref_row.push((c, acc[c as usize]));
                acc[c as usize] = 0;
            }
            touched.clear();
            ref_row.sort_unstable();
            for omega in &plist {
                if *omega == omega_ref {
                    continue;
                }
                accumulate_marginal(
                    &frames, omega, &digits, context, &classes, &mut acc, &mut touched,
                );
                for &(c, v) in &ref_row {
                    if acc[c as usize] == 0 {
                        touched.push(c);
                    }
                    acc[c as usize] -= v;
                }
                let mut diff: Vec<(u32, i64)> = Vec::with_capacity(touched.len());
                for &c in &touched {
                    if acc[c as usize] != 0 {
                        diff.push((c, acc[c as usize]));
                    }
                    acc[c as usize] = 0;
                }
                touched.clear();
                diff.sort_unstable();
                let row = normalize_row(diff);
                if row.is_empty() || !seen.insert(row.clone()) {
                    continue;
                }
                rows.push(Row {
                    terms: row
                        .into_iter()
                        .map(|(c, v)| (c as usize, rat_int(v)))
                        .collect(),
                    rhs: Rat::zero(),
                });
            }
        }
    }

    BuiltLp {
        lp: RationalLP {
            variables,
            objective,
            rows,
        },
        classes,
        context,
        gap: r,
        budget,
        rotation_quotient,
    }
}

pub fn build_ring_lp(
    n: usize,
    r: usize,
    use_cyclic_classes: bool,
    use_color_symmetry: bool,
    budget: Budget,
) -> BuiltLp {
    build_lp(
        Context::Ring { n },
        r,
        use_cyclic_classes,
        use_color_symmetry,
        budget,
    )
}

pub fn build_segment_lp(k: usize, r: usize, use_color_symmetry: bool, budget: Budget) -> BuiltLp {
    build_lp(Context::Segment { k }, r, false, use_color_symmetry, budget)
}

/// Objective value of a class-indexed distribution.
pub fn objective_value(built: &BuiltLp, primal: &[Rat]) -> Rat {
    built
        .lp
        .objective
        .iter()
        .map(|(c, w)| w * &primal[*c])
        .fold(Rat::zero(), |a, b| a + b)
}

/// A witness that a distribution violates placement-invariance somewhere
/// in the full constraint family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonsignalingViolation {
    pub frames: Vec<usize>,
    pub omega_ref: Vec<usize>,
    pub omega: Vec<usize>,
    pub tableau_index: usize,
}

fn marginal_vector_bigint(
    frames: &FrameCollection,
    omega: &[usize],
    context: Context,
    numers: &[BigInt],
    class_of: &[u32],
) -> Vec<BigInt> {
    let nodes = context.node_count();
    let m = frames.total_len();
    let mut positions: Vec<usize> = Vec::with_capacity(m);
    for (&w, &s) in omega.iter().zip(&frames.lengths) {
        for i in 0..s {
            let node = match context {
                Context::Ring { n } => (w + i) % n,
                Context::Segment { .. } => w + i,
            };
            positions.push(context.position(node));
        }
    }
    let mut buckets = vec![BigInt::zero(); pow3(m) as usize];
    for code in 0..pow3(nodes) {
        let mut idx = 0u64;
        for &p in positions.iter().rev() {
            idx = idx * 3 + digit(code, p) as u64;
        }
        buckets[idx as usize] += &numers[class_of[code as usize] as usize];
    }
    buckets
}

fn marginal_vector_i128(
    frames: &FrameCollection,
    omega: &[usize],
    context: Context,
    numers: &[i128],
    class_of: &[u32],
) -> Vec<i128> {
    let nodes = context.node_count();
    let m = frames.total_len();
    let mut positions: Vec<usize> = Vec::with_capacity(m);
    for (&w, &s) in omega.iter().zip(&frames.lengths) {
        for i in 0..s {
            let node = match context {
                Context::Ring { n } => (w + i) % n,
                Context::Segment { .. } => w + i,
            };
            positions.push(context.position(node));
        }
    }
    let mut buckets = vec![0i128; pow3(m) as usize];
    for code in 0..pow3(nodes) {
        let mut idx = 0u64;
        for &p in positions.iter().rev() {
            idx = idx * 3 + digit(code, p) as u64;
        }
        buckets[idx as usize] += numers[class_of[code as usize] as usize];
    }
    buckets
}

/// Verifies a class-indexed distribution against the *full* placable
/// constraint family (no budget): every frame collection's marginal must
/// be identical at every valid placement. For rotation-quotiented ring
/// solutions the anchored placements cover the family. Exact arithmetic
/// throughout; the comparison is over common-denominator numerators.
pub fn verify_full_nonsignaling(built: &BuiltLp, primal: &[Rat]) -> Result<(), NonsignalingViolation> {
    if let Context::Ring { .. } = built.context {
        assert!(
            built.rotation_quotient,
            "full check expects rotation-quotiented ring solutions"
        );
    }
    verify_nonsignaling(
        built.context,
        built.gap,
        built.rotation_quotient,
        &built.classes.class_of,
        primal,
    )
}

/// Same check against an arbitrary class map (identity map = one class
/// per coloring). `rotation_quotient` may only be set when `primal` is
/// rotation-invariant; it restricts ring placements to anchored ones.
pub fn verify_nonsignaling(
    context: Context,
    r: usize,
    rotation_quotient: bool,
    class_of: &[u32],
    primal: &[Rat],
) -> Result<(), NonsignalingViolation> {
    assert_eq!(class_of.len(), pow3(context.node_count()) as usize);
    let mut lcm = BigInt::one();
    for x in primal {
        lcm = lcm.lcm(x.denom());
    }
    let numers: Vec<BigInt> = primal
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    // Sums have at most 3^nodes terms; guard i128 against overflow.
    let headroom = BigInt::from(i128::MAX) / BigInt::from(pow3(context.node_count()) + 1);
    let small: Option<Vec<i128>> = if numers.iter().all(|v| v.abs() < headroom) {
        Some(numers.iter().map(|v| v.to_i128().unwrap()).collect())
    } else {
        None
    };

    let collections: Vec<FrameCollection> =
        placable_collections(context, r, Budget::unbounded())
            .into_iter()
            .filter(is_sorted_lengths)
            .collect();
    let violation = collections
        .par_iter()
        .map(|frames| {
            let plist = build_placements(frames, r, context, rotation_quotient);
            if plist.len() < 2 {
                return None;
            }
            let omega_ref = canonical_placement(frames, r, context);
            let compare = |omega: &Vec<usize>| -> Option<usize> {
                if let Some(nums) = &small {
                    let a = marginal_vector_i128(frames, &omega_ref, context, nums, class_of);
                    let b = marginal_vector_i128(frames, omega, context, nums, class_of);
                    a.iter().zip(&b).position(|(x, y)| x != y)
                } else {
                    let a = marginal_vector_bigint(frames, &omega_ref, context, &numers, class_of);
                    let b = marginal_vector_bigint(frames, omega, context, &numers, class_of);
                    a.iter().zip(&b).position(|(x, y)| x != y)
                }
            };
            for omega in &plist {
                if *omega == omega_ref {
                    continue;
                }
                if let Some(idx) = compare(omega) {
                    return Some(NonsignalingViolation {
                        frames: frames.lengths.clone(),
                        omega_ref: omega_ref.clone(),
                        omega: omega.clone(),
                        tableau_index: idx,
                    });
                }
            }
            None
        })
        .find_map_first(|v| v);
    match violation {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

/// Densifies a certificate primal and drops it onto the class variables.
pub fn densify_primal(built: &BuiltLp, cert: &crate::lp::Certificate) -> Vec<Rat> {
    let mut x = vec![Rat::zero(); built.classes.reps.len()];
    for (i, v) in &cert.primal {
        x[*i] = v.clone();
    }
    x
}

pub use crate::lp::Certificate;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_exact, SolveOutcome};

    fn exact_opt(built: &BuiltLp) -> Rat {
        match solve_exact(&built.lp) {
            SolveOutcome::Optimal(cert) => {
                crate::lp::verify_certificate(&built.lp, &cert).unwrap();
                cert.objective
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_odd_rings_admit_perfect_colorings() {
        for n in [5usize, 7] {
            let built = build_ring_lp(n, 1, true, true, Budget::unbounded());
            assert_eq!(exact_opt(&built), Rat::one(), "n={n}");
        }
    }

    #[test]
    fn quotients_agree_on_tiny_rings() {
        for n in [4usize, 5] {
            let opts: Vec<Rat> = [
                (false, false),
                (true, false),
                (true, true),
                (false, true),
            ]
            .iter()
            .map(|&(rot, sym)| exact_opt(&build_ring_lp(n, 1, rot, sym, Budget::unbounded())))
            .collect();
            assert!(opts.windows(2).all(|w| w[0] == w[1]), "n={n}: {opts:?}");
        }
    }

    #[test]
    fn full_family_check_accepts_and_rejects() {
        let built = build_ring_lp(5, 1, true, true, Budget::unbounded());
        let cert = match solve_exact(&built.lp) {
            SolveOutcome::Optimal(c) => c,
            other => panic!("{other:?}"),
        };
        let x = densify_primal(&built, &cert);
        assert!(verify_full_nonsignaling(&built, &x).is_ok());

        // On n=7, uniform mass on the orbit of 0001111 signals: it has 3
        // equal distance-2 pairs but only 1 equal distance-3 pair, and
        // both distances are observable by a pair of gap-1 frames.
        let built7 = build_ring_lp(7, 1, true, true, Budget::capped(2, 2));
        let mut bad = vec![Rat::zero(); built7.classes.reps.len()];
        let code = crate::ring::pack(&[0, 0, 0, 1, 1, 1, 1]);
        let target = built7.classes.class_of[code as usize] as usize;
        bad[target] = Rat::one() / rat_int(built7.classes.orbit_sizes[target] as i64);
        assert!(verify_full_nonsignaling(&built7, &bad).is_err());
    }

    #[test]
    fn normalization_row_is_first() {
        let built = build_ring_lp(4, 1, true, false, Budget::capped(2, 2));
        assert_eq!(built.lp.rows[0].rhs, Rat::one());
        assert!(built.lp.validate().is_ok());
    }
}
