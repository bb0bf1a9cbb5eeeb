//! Pairwise-bias linear programs, improper-coloring penalties, error
//! bounds, exponential composition, the two fixed-distribution ring
//! experiments, the four-node infeasibility grid scan, and restriction
//! of ring distributions to segments.

use std::collections::BTreeMap;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::frames::Context;
use crate::lp::{RationalLP, Row};
use crate::lp_build::verify_nonsignaling;
use crate::rational::{format_rat, parse_rat, rat_to_f64, Rat};
use crate::ring::{
    digit, distinct_beta_ring, distinct_beta_segment, is_proper_ring_code, pow3,
    restrict_to_segment, segment_pairs, unpack,
};
use crate::solver::{solve_via_presolve, SolveOutcome};

/// Index of one entry of a bias witness: a node distance on a ring, or
/// a non-adjacent node pair on a segment (1-based, u < v).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BiasKey {
    Distance(usize),
    Pair(usize, usize),
}

impl std::fmt::Display for BiasKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            BiasKey::Distance(d) => write!(f, "{d}"),
            BiasKey::Pair(u, v) => write!(f, "{u},{v}"),
        }
    }
}

/// A pair of distributions (p, p') over distances or pairs, together
/// with the guaranteed same-color-statistic gap `delta` they achieve
/// over proper colorings, and optionally the improper-coloring penalty
/// `gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasWitness {
    pub context: Context,
    pub keys: Vec<BiasKey>,
    pub p: Vec<Rat>,
    pub p_prime: Vec<Rat>,
    pub delta: Rat,
    pub gamma: Option<Rat>,
}

impl BiasWitness {
    /// Entry-wise difference p - p'.
    pub fn weights(&self) -> Vec<Rat> {
        self.p
            .iter()
            .zip(&self.p_prime)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Checks that p and p' are probability distributions and that the
    /// supports are disjoint when delta > 0. For witnesses produced by
    /// the LPs the support condition is a hard assertion; hand-supplied
    /// witnesses only get a warning on stderr.
    pub fn validate(&self, hand_supplied: bool) {
        assert_eq!(self.keys.len(), self.p.len());
        assert_eq!(self.keys.len(), self.p_prime.len());
        let one = Rat::one();
        let sum_p: Rat = self.p.iter().sum();
        let sum_pp: Rat = self.p_prime.iter().sum();
        assert!(self.p.iter().all(|x| !x.is_negative()), "p has a negative entry");
        assert!(
            self.p_prime.iter().all(|x| !x.is_negative()),
            "p' has a negative entry"
        );
        assert_eq!(sum_p, one, "p does not sum to 1");
        assert_eq!(sum_pp, one, "p' does not sum to 1");
        assert!(!self.delta.is_negative(), "delta must be >= 0");
        if self.delta.is_positive() {
            let overlap = self
                .p
                .iter()
                .zip(&self.p_prime)
                .any(|(a, b)| a.is_positive() && b.is_positive());
            if overlap {
                if hand_supplied {
                    eprintln!("warning: witness supports of p and p' overlap despite delta > 0");
                } else {
                    panic!("LP witness with delta > 0 has overlapping supports");
                }
            }
        }
    }
}

/// Lower bound on the failure probability and the matching upper bound
/// on the success probability derived from a (delta, gamma) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorBound {
    pub epsilon_lower: Rat,
    pub success_upper: Rat,
}

/// epsilon >= delta / (delta + gamma), defined as 0 when delta = 0;
/// success_upper = gamma / (delta + gamma) = 1 - epsilon_lower.
pub fn error_lower_bound(delta: &Rat, gamma: &Rat) -> ErrorBound {
    assert!(!delta.is_negative(), "delta must be >= 0");
    assert!(!gamma.is_negative() && *gamma <= Rat::one(), "gamma must be in [0,1]");
    if delta.is_zero() {
        return ErrorBound {
            epsilon_lower: Rat::zero(),
            success_upper: Rat::one(),
        };
    }
    let total = delta + gamma;
    ErrorBound {
        epsilon_lower: delta / &total,
        success_upper: gamma / &total,
    }
}

/// q^⌊n/(k+r)⌋: the success bound that survives splitting a ring of n
/// nodes into independent blocks of k nodes plus r buffer nodes.
pub fn compose_exponential(q: &Rat, k: usize, r: usize, n: usize) -> Rat {
    assert!(!q.is_negative() && *q <= Rat::one(), "q must be in [0,1]");
    assert!(k >= 2, "block length must be at least 2");
    assert!(n >= 1);
    let exp = n / (k + r);
    num::pow::pow(q.clone(), exp)
}

// ---------------------------------------------------------------------
// Bias LPs: maximize delta subject to (p - p')·beta >= delta for every
// distinct beta vector of a proper coloring, with p and p' probability
// distributions over the key set.
// ---------------------------------------------------------------------

/// Above this many beta rows the LP is solved in its "spread" form
/// (variables indexed by beta rows, witness read off the dual) instead
/// of the direct form (variables p, p', delta, one slack per row).
const DIRECT_FORM_MAX_ROWS: usize = 500;

/// Optimal bias witness over ring distances d in 2..=⌊n/2⌋. Distances
/// above ⌊n/2⌋ duplicate their mirror d ↔ n-d, so the support is
/// restricted to the lower half without loss of generality.
pub fn bias_lp_ring(n: usize) -> BiasWitness {
    assert!(n >= 5, "ring bias LP needs n >= 5");
    let dists: Vec<usize> = (2..=n / 2).collect();
    let keys: Vec<BiasKey> = dists.iter().map(|&d| BiasKey::Distance(d)).collect();
    let rows: Vec<Vec<Rat>> = distinct_beta_ring(n, true)
        .iter()
        .map(|b| dists.iter().map(|&d| b.entry(d)).collect())
        .collect();
    finish_bias_lp(Context::Ring { n }, keys, rows)
}

/// Optimal bias witness over non-adjacent segment pairs (u,v), v >= u+2.
pub fn bias_lp_segment(k: usize) -> BiasWitness {
    assert!(k >= 4, "segment bias LP needs k >= 4");
    let pairs = segment_pairs(k);
    let keys: Vec<BiasKey> = pairs.iter().map(|&(u, v)| BiasKey::Pair(u, v)).collect();
    let rows: Vec<Vec<Rat>> = distinct_beta_segment(k, true)
        .iter()
        .map(|b| b.entries.iter().map(|&e| Rat::from_integer(e.into())).collect())
        .collect();
    finish_bias_lp(Context::Segment { k }, keys, rows)
}

fn finish_bias_lp(context: Context, keys: Vec<BiasKey>, rows: Vec<Vec<Rat>>) -> BiasWitness {
    let force_spread = std::env::var_os("NONSIG_FORCE_SPREAD").is_some();
    let (p, p_prime, delta) = if rows.len() <= DIRECT_FORM_MAX_ROWS && !force_spread {
        solve_bias_direct(&keys, &rows)
    } else {
        solve_bias_spread(&keys, &rows)
    };
    let witness = BiasWitness {
        context,
        keys,
        p,
        p_prime,
        delta: delta.clone(),
        gamma: None,
    };
    witness.validate(false);
    // Independent re-verification: the minimum of (p - p')·beta over the
    // proper beta rows must equal the reported delta exactly.
    let weights = witness.weights();
    let recomputed = rows
        .iter()
        .map(|row| dot(&weights, row))
        .min()
        .expect("beta row set is never empty");
    assert_eq!(recomputed, delta, "brute-force bias minimum disagrees with LP optimum");
    witness
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .filter(|(_, y)| !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

fn solve_lp(lp: &RationalLP) -> crate::lp::Certificate {
    match solve_via_presolve(lp, 1e-6, 1_000_000_000_000) {
        SolveOutcome::Optimal(cert) => cert,
        other => panic!("bias LP unexpectedly {other:?}"),
    }
}

/// Direct form: variables p_d, p'_d, delta, and one slack per beta row.
fn solve_bias_direct(keys: &[BiasKey], rows: &[Vec<Rat>]) -> (Vec<Rat>, Vec<Rat>, Rat) {
    let h = keys.len();
    let delta_idx = 2 * h;
    let mut variables: Vec<String> = keys.iter().map(|k| format!("p_{k}")).collect();
    variables.extend(keys.iter().map(|k| format!("pp_{k}")));
    variables.push("delta".into());
    for i in 0..rows.len() {
        variables.push(format!("slack_{i}"));
    }
    let mut lp_rows = Vec::with_capacity(rows.len() + 2);
    lp_rows.push(Row {
        terms: (0..h).map(|j| (j, Rat::one())).collect(),
        rhs: Rat::one(),
    });
    lp_rows.push(Row {
        terms: (h..2 * h).map(|j| (j, Rat::one())).collect(),
        rhs: Rat::one(),
    });
    for (i, beta) in rows.iter().enumerate() {
        let mut terms: Vec<(usize, Rat)> = Vec::new();
        for (j, b) in beta.iter().enumerate() {
            if !b.is_zero() {
                terms.push((j, b.clone()));
                terms.push((h + j, -b.clone()));
            }
        }
        terms.push((delta_idx, -Rat::one()));
        terms.push((delta_idx + 1 + i, -Rat::one()));
        lp_rows.push(Row {
            terms,
            rhs: Rat::zero(),
        });
    }
    let lp = RationalLP {
        variables,
        objective: vec![(delta_idx, Rat::one())],
        rows: lp_rows,
    };
    let cert = solve_lp(&lp);
    let x = cert.dense_primal(lp.num_vars());
    let p = x[..h].to_vec();
    let p_prime = x[h..2 * h].to_vec();
    let delta = x[delta_idx].clone();
    assert_eq!(delta, cert.objective);
    if delta.is_zero() {
        return uniform_witness(h);
    }
    (p, p_prime, delta)
}

/// Spread form: minimize (max_d - min_d) of the lambda-average of the
/// beta rows over distributions lambda on rows. Its optimum equals the
/// optimal delta, and the row duals are exactly (p, -p').
fn solve_bias_spread(keys: &[BiasKey], rows: &[Vec<Rat>]) -> (Vec<Rat>, Vec<Rat>, Rat) {
    let h = keys.len();
    let nrows = rows.len();
    let (u_idx, l_idx) = (nrows, nrows + 1);
    let su0 = nrows + 2;
    let sl0 = su0 + h;
    let mut variables: Vec<String> = (0..nrows).map(|i| format!("lam_{i}")).collect();
    variables.push("hi".into());
    variables.push("lo".into());
    for k in keys {
        variables.push(format!("hi_slack_{k}"));
    }
    for k in keys {
        variables.push(format!("lo_slack_{k}"));
    }
    // Column view of the beta matrix, sparse per key.
    let columns: Vec<Vec<(usize, Rat)>> = (0..h)
        .map(|d| {
            rows.iter()
                .enumerate()
                .filter(|(_, beta)| !beta[d].is_zero())
                .map(|(i, beta)| (i, beta[d].clone()))
                .collect()
        })
        .collect();
    let mut lp_rows = Vec::with_capacity(2 * h + 1);
    for (d, col) in columns.iter().enumerate() {
        let mut terms = col.clone();
        terms.push((u_idx, -Rat::one()));
        terms.push((su0 + d, Rat::one()));
        lp_rows.push(Row {
            terms,
            rhs: Rat::zero(),
        });
    }
    for (d, col) in columns.iter().enumerate() {
        let mut terms = col.clone();
        terms.push((l_idx, -Rat::one()));
        terms.push((sl0 + d, -Rat::one()));
        lp_rows.push(Row {
            terms,
            rhs: Rat::zero(),
        });
    }
    lp_rows.push(Row {
        terms: (0..nrows).map(|i| (i, Rat::one())).collect(),
        rhs: Rat::one(),
    });
    let lp = RationalLP {
        variables,
        objective: vec![(l_idx, Rat::one()), (u_idx, -Rat::one())],
        rows: lp_rows,
    };
    let cert = solve_lp(&lp);
    let delta = -cert.objective.clone();
    assert!(!delta.is_negative(), "spread optimum must be <= 0");
    if delta.is_zero() {
        return uniform_witness(h);
    }
    let mut y = vec![Rat::zero(); lp.num_rows()];
    for (i, v) in &cert.dual {
        y[*i] = v.clone();
    }
    let mut p: Vec<Rat> = (0..h).map(|d| y[d].clone()).collect();
    let mut p_prime: Vec<Rat> = (0..h).map(|d| -y[h + d].clone()).collect();
    assert!(p.iter().all(|x| !x.is_negative()));
    assert!(p_prime.iter().all(|x| !x.is_negative()));
    // Dual feasibility only forces sum(p) <= 1 and sum(p') >= 1; padding
    // p or trimming p' keeps every constraint value >= delta because the
    // beta entries are non-negative, so the repaired pair is still an
    // optimal witness.
    let sum_p: Rat = p.iter().sum();
    if sum_p < Rat::one() {
        let deficit = Rat::one() - sum_p;
        let slot = (0..h).find(|&d| p_prime[d].is_zero()).unwrap_or(0);
        p[slot] += deficit;
    }
    let mut excess = p_prime.iter().sum::<Rat>() - Rat::one();
    assert!(!excess.is_negative());
    // Trim entries outside p's support first so the supports stay disjoint.
    for pass in 0..2 {
        for d in 0..h {
            if excess.is_zero() {
                break;
            }
            if pass == 0 && !p[d].is_zero() {
                continue;
            }
            let cut = p_prime[d].clone().min(excess.clone());
            p_prime[d] -= &cut;
            excess -= cut;
        }
    }
    assert!(excess.is_zero());
    (p, p_prime, delta)
}

fn uniform_witness(h: usize) -> (Vec<Rat>, Vec<Rat>, Rat) {
    let u = Rat::new(BigInt::one(), BigInt::from(h as i64));
    (vec![u.clone(); h], vec![u; h], Rat::zero())
}

// ---------------------------------------------------------------------
// Gamma: worst-case penalty over improper colorings.
// ---------------------------------------------------------------------

/// Weight numerators over a common denominator, for fast integer scans.
fn common_numerators(weights: &[Rat]) -> (BigInt, Vec<BigInt>) {
    let mut lcm = BigInt::one();
    for w in weights {
        lcm = lcm.lcm(w.denom());
    }
    let numers = weights
        .iter()
        .map(|w| w.numer() * (&lcm / w.denom()))
        .collect();
    (lcm, numers)
}

fn numerators_fit_i128(numers: &[BigInt], max_count: u64) -> Option<Vec<i128>> {
    let headroom = BigInt::from(i128::MAX)
        / (BigInt::from(max_count) * BigInt::from(numers.len() as u64 + 1) * 4);
    if numers.iter().all(|v| v.abs() < headroom) {
        Some(numers.iter().map(|v| v.to_i128().unwrap()).collect())
    } else {
        None
    }
}

/// Deterministic parallel minimum of (value, code), tie-broken on code.
fn par_min<T: Ord + Send>(
    total: u64,
    eval: impl Fn(u64) -> Option<T> + Sync,
) -> Option<(T, u64)> {
    let pick = |a: Option<(T, u64)>, b: Option<(T, u64)>| match (a, b) {
        (Some(x), Some(y)) => Some(std::cmp::min(x, y)),
        (x, None) => x,
        (None, y) => y,
    };
    (0..total as usize)
        .into_par_iter()
        .with_min_len(1 << 12)
        .fold(
            || None,
            |acc, code| {
                let code = code as u64;
                pick(acc, eval(code).map(|v| (v, code)))
            },
        )
        .reduce(|| None, pick)
}

fn is_proper_segment_code(code: u64, k: usize) -> bool {
    (1..k).all(|i| digit(code, i) != digit(code, i - 1))
}

/// Minimum of sum(weight_numerator * beta_count) over ring colorings of
/// the requested properness, plus the number of colorings scanned.
fn scan_ring(
    n: usize,
    dists: &[usize],
    numers: &[BigInt],
    proper: bool,
) -> (BigInt, u64, usize) {
    let total = pow3(n);
    let small = numerators_fit_i128(numers, n as u64);
    let count = std::sync::atomic::AtomicUsize::new(0);
    let eval_counts = |code: u64| -> Option<Vec<u64>> {
        if is_proper_ring_code(code, n) != proper {
            return None;
        }
        count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let colors = unpack(code, n);
        Some(
            dists
                .iter()
                .map(|&d| (0..n).filter(|&v| colors[v] == colors[(v + d) % n]).count() as u64)
                .collect(),
        )
    };
    let best = if let Some(nums) = &small {
        par_min(total, |code| {
            eval_counts(code).map(|c| {
                let v: i128 = c.iter().zip(nums).map(|(&k, w)| k as i128 * w).sum();
                BigInt::from(v)
            })
        })
    } else {
        par_min(total, |code| {
            eval_counts(code).map(|c| {
                c.iter()
                    .zip(numers)
                    .map(|(&k, w)| BigInt::from(k) * w)
                    .sum::<BigInt>()
            })
        })
    };
    let (value, code) = best.expect("scan found no colorings of the requested kind");
    (value, code, count.into_inner())
}

/// Segment analogue of `scan_ring`; beta entries are 0/1 indicators.
fn scan_segment(
    k: usize,
    pairs: &[(usize, usize)],
    numers: &[BigInt],
    proper: bool,
) -> (BigInt, u64, usize) {
    let total = pow3(k);
    let small = numerators_fit_i128(numers, 1);
    let count = std::sync::atomic::AtomicUsize::new(0);
    let pair_idx: Vec<(usize, usize)> = pairs.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
    let admit = |code: u64| -> Option<Vec<u8>> {
        if is_proper_segment_code(code, k) != proper {
            return None;
        }
        count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        Some(unpack(code, k))
    };
    let best = if let Some(nums) = &small {
        par_min(total, |code| {
            admit(code).map(|colors| {
                let v: i128 = pair_idx
                    .iter()
                    .zip(nums)
                    .filter(|(&(u, v), _)| colors[u] == colors[v])
                    .map(|(_, w)| *w)
                    .sum();
                BigInt::from(v)
            })
        })
    } else {
        par_min(total, |code| {
            admit(code).map(|colors| {
                pair_idx
                    .iter()
                    .zip(numers)
                    .filter(|(&(u, v), _)| colors[u] == colors[v])
                    .map(|(_, w)| w.clone())
                    .sum::<BigInt>()
            })
        })
    };
    let (value, code) = best.expect("scan found no colorings of the requested kind");
    (value, code, count.into_inner())
}

/// Gamma = -min over improper colorings of (p - p')·beta, by brute
/// force over all 3^n (or 3^k) colorings, skipping the proper ones.
/// The all-same coloring gives value 0, so gamma >= 0 always.
pub fn gamma(witness: &BiasWitness) -> Rat {
    witness.validate(true);
    let weights = witness.weights();
    let (den, numers) = common_numerators(&weights);
    let min = match witness.context {
        Context::Ring { n } => {
            let dists: Vec<usize> = witness
                .keys
                .iter()
                .map(|k| match *k {
                    BiasKey::Distance(d) => d,
                    BiasKey::Pair(..) => panic!("ring witness with pair keys"),
                })
                .collect();
            let (value, _, _) = scan_ring(n, &dists, &numers, false);
            Rat::new(value, den * BigInt::from(n as u64))
        }
        Context::Segment { k } => {
            let pairs: Vec<(usize, usize)> = witness
                .keys
                .iter()
                .map(|key| match *key {
                    BiasKey::Pair(u, v) => (u, v),
                    BiasKey::Distance(_) => panic!("segment witness with distance keys"),
                })
                .collect();
            let (value, _, _) = scan_segment(k, &pairs, &numers, false);
            Rat::new(value, den)
        }
    };
    let g = -min;
    assert!(!g.is_negative(), "gamma must be >= 0");
    g
}

// ---------------------------------------------------------------------
// The two fixed 11-ring experiments.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentsReport {
    pub min_bias: Rat,
    pub per_coloring_check: bool,
    pub colorings_scanned: usize,
    pub witness: BiasWitness,
}

/// Two match experiments on the 11-ring: the first samples a distance
/// d1 = 2 w.p. 30/41 or 3 w.p. 11/41, the second d2 = 4 w.p. 14/41 or
/// 5 w.p. 27/41; each reports whether the colors at the sampled
/// distance match. Scans every proper coloring and returns the minimum
/// of P[experiment 1 matches] - P[experiment 2 matches], which must be
/// exactly 1/451.
pub fn experiments11() -> ExperimentsReport {
    let n = 11;
    let witness = BiasWitness {
        context: Context::Ring { n },
        keys: vec![
            BiasKey::Distance(2),
            BiasKey::Distance(3),
            BiasKey::Distance(4),
            BiasKey::Distance(5),
        ],
        p: vec![
            Rat::new(30.into(), 41.into()),
            Rat::new(11.into(), 41.into()),
            Rat::zero(),
            Rat::zero(),
        ],
        p_prime: vec![
            Rat::zero(),
            Rat::zero(),
            Rat::new(14.into(), 41.into()),
            Rat::new(27.into(), 41.into()),
        ],
        delta: Rat::new(1.into(), 451.into()),
        gamma: None,
    };
    witness.validate(true);
    let weights = witness.weights();
    let (den, numers) = common_numerators(&weights);
    let (value, _, scanned) = scan_ring(n, &[2, 3, 4, 5], &numers, true);
    let min_bias = Rat::new(value, den * BigInt::from(n as u64));
    assert_eq!(scanned, 2046, "the 11-ring has 2046 proper colorings");
    assert_eq!(
        min_bias,
        Rat::new(1.into(), 451.into()),
        "minimum experiment bias must be 1/451"
    );
    ExperimentsReport {
        per_coloring_check: scanned == 2046 && min_bias == witness.delta,
        min_bias,
        colorings_scanned: scanned,
        witness,
    }
}

// ---------------------------------------------------------------------
// Four-node infeasibility grid scan.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridScanReport {
    pub resolution: u64,
    pub grid_points: usize,
    pub all_negative: bool,
    /// The largest (closest to zero) of the per-point minima.
    pub worst_q: Rat,
    /// Grid point (numerators over `resolution`) attaining `worst_q`.
    pub worst_point: (u64, u64, u64),
}

/// Scans every point (r0, r1, r2) of the simplex grid with the given
/// resolution. An independent-beyond-0 perfect 4-ring coloring with
/// single-color marginals r forces, for each color rho, a matching-pair
/// probability q(rho) = r_rho^2 - 2 r_rho + 1/2 for the other two
/// colors; q is decreasing in r_rho on [0,1], so min_rho q = q(max_rho
/// r_rho), and max_rho r_rho >= 1/3 > 1 - 1/sqrt(2) makes it negative
/// at every grid point: no such coloring exists.
pub fn n4_infeasibility_scan(grid_resolution: u64) -> GridScanReport {
    assert!(grid_resolution >= 2, "grid resolution must be >= 2");
    let res = grid_resolution;
    let mut points = 0usize;
    // q(a/res) = (2a^2 - 4a*res + res^2) / (2 res^2); track the largest
    // minimum by its integer numerator.
    let mut worst_num: Option<i128> = None;
    let mut worst_point = (0, 0, 0);
    for a in 0..=res {
        for b in 0..=res - a {
            let c = res - a - b;
            points += 1;
            let m = a.max(b).max(c) as i128;
            let r = res as i128;
            let num = 2 * m * m - 4 * m * r + r * r;
            if worst_num.map_or(true, |w| num > w) {
                worst_num = Some(num);
                worst_point = (a, b, c);
            }
        }
    }
    let worst_num = worst_num.unwrap();
    GridScanReport {
        resolution: res,
        grid_points: points,
        all_negative: worst_num < 0,
        worst_q: Rat::new(
            BigInt::from(worst_num),
            BigInt::from(2 * (res as i128) * (res as i128)),
        ),
        worst_point,
    }
}

/// q(rho) for exact rational marginals, for spot checks.
pub fn n4_forced_probability(r: &Rat) -> Rat {
    r * r - Rat::from_integer(2.into()) * r + Rat::new(1.into(), 2.into())
}

// ---------------------------------------------------------------------
// Ring-to-segment restriction.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentRestriction {
    pub k: usize,
    pub distribution: BTreeMap<u64, Rat>,
    /// Probability mass on proper segment colorings.
    pub success: Rat,
}

/// Marginalizes a ring distribution onto its first k nodes and checks
/// that the result satisfies every segment non-signaling constraint.
/// Requires k <= n - r so that each placement that respects the segment
/// also respects the ring with the same gap.
pub fn restrict_ring_to_segment(
    ring_distribution: &BTreeMap<u64, Rat>,
    n: usize,
    k: usize,
    r: usize,
) -> Result<SegmentRestriction, String> {
    if k > n - r {
        return Err(format!(
            "segment length {k} exceeds n - r = {}",
            n - r
        ));
    }
    let total: Rat = ring_distribution.values().sum();
    if total != Rat::one() {
        return Err("ring distribution does not sum to 1".into());
    }
    if ring_distribution.values().any(|p| p.is_negative()) {
        return Err("ring distribution has a negative entry".into());
    }
    let marginal = restrict_to_segment(ring_distribution, n, k);
    let size = pow3(k) as usize;
    let mut dense = vec![Rat::zero(); size];
    for (&code, p) in &marginal {
        dense[code as usize] = p.clone();
    }
    let identity: Vec<u32> = (0..size as u32).collect();
    verify_nonsignaling(Context::Segment { k }, r, false, &identity, &dense)
        .map_err(|v| format!("restriction violates non-signaling: {v:?}"))?;
    let success = marginal
        .iter()
        .filter(|(&code, _)| is_proper_segment_code(code, k))
        .map(|(_, p)| p.clone())
        .sum();
    Ok(SegmentRestriction {
        k,
        distribution: marginal,
        success,
    })
}

/// Probability mass a ring distribution puts on proper ring colorings.
pub fn ring_success(ring_distribution: &BTreeMap<u64, Rat>, n: usize) -> Rat {
    ring_distribution
        .iter()
        .filter(|(&code, _)| is_proper_ring_code(code, n))
        .map(|(_, p)| p.clone())
        .sum()
}

// ---------------------------------------------------------------------
// Serialization: witness JSON and figure CSVs.
// ---------------------------------------------------------------------

pub fn witness_to_json(w: &BiasWitness) -> String {
    let (ctx, size) = match w.context {
        Context::Ring { n } => ("ring", n),
        Context::Segment { k } => ("segment", k),
    };
    let mut v = serde_json::json!({
        "context": ctx,
        "size": size,
        "keys": w.keys.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        "p": w.p.iter().map(format_rat).collect::<Vec<_>>(),
        "p_prime": w.p_prime.iter().map(format_rat).collect::<Vec<_>>(),
        "delta": format_rat(&w.delta),
    });
    if let Some(g) = &w.gamma {
        v["gamma"] = serde_json::Value::String(format_rat(g));
    }
    serde_json::to_string_pretty(&v).unwrap()
}

pub fn witness_from_json(text: &str) -> Result<BiasWitness, String> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let ctx = v["context"].as_str().ok_or("missing context")?;
    let size = v["size"].as_u64().ok_or("missing size")? as usize;
    let context = match ctx {
        "ring" => Context::Ring { n: size },
        "segment" => Context::Segment { k: size },
        other => return Err(format!("unknown context {other:?}")),
    };
    let parse_key = |s: &str| -> Result<BiasKey, String> {
        if let Some((u, vv)) = s.split_once(',') {
            Ok(BiasKey::Pair(
                u.trim().parse().map_err(|e| format!("bad pair key: {e}"))?,
                vv.trim().parse().map_err(|e| format!("bad pair key: {e}"))?,
            ))
        } else {
            Ok(BiasKey::Distance(
                s.trim().parse().map_err(|e| format!("bad distance key: {e}"))?,
            ))
        }
    };
    let str_array = |field: &str| -> Result<Vec<String>, String> {
        v[field]
            .as_array()
            .ok_or_else(|| format!("missing array {field:?}"))?
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| format!("non-string entry in {field:?}"))
            })
            .collect()
    };
    let keys = str_array("keys")?
        .iter()
        .map(|s| parse_key(s))
        .collect::<Result<Vec<_>, _>>()?;
    let rats = |field: &str| -> Result<Vec<Rat>, String> {
        str_array(field)?
            .iter()
            .map(|s| parse_rat(s).map_err(|e| format!("bad rational in {field:?}: {e:?}")))
            .collect()
    };
    let gamma = match &v["gamma"] {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) => {
            Some(parse_rat(s).map_err(|e| format!("bad gamma: {e:?}"))?)
        }
        _ => return Err("gamma must be a string".into()),
    };
    let witness = BiasWitness {
        context,
        keys,
        p: rats("p")?,
        p_prime: rats("p_prime")?,
        delta: parse_rat(v["delta"].as_str().ok_or("missing delta")?)
            .map_err(|e| format!("bad delta: {e:?}"))?,
        gamma,
    };
    if witness.keys.len() != witness.p.len() || witness.keys.len() != witness.p_prime.len() {
        return Err("keys, p, p_prime must have equal lengths".into());
    }
    witness.validate(true);
    Ok(witness)
}

/// CSV with one row per witness key: exact and float entries of p, p'.
pub fn witness_csv(w: &BiasWitness) -> String {
    let mut out = String::from("key,p,p_float,p_prime,p_prime_float\n");
    for ((k, a), b) in w.keys.iter().zip(&w.p).zip(&w.p_prime) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            k,
            format_rat(a),
            rat_to_f64(a),
            format_rat(b),
            rat_to_f64(b)
        ));
    }
    out
}

/// CSV of a segment witness as an upper-triangular (u,v) grid of the
/// two distributions, exact and float.
pub fn witness_grid_csv(w: &BiasWitness) -> String {
    let mut out = String::from("u,v,p,p_float,p_prime,p_prime_float\n");
    for ((k, a), b) in w.keys.iter().zip(&w.p).zip(&w.p_prime) {
        if let BiasKey::Pair(u, v) = *k {
            out.push_str(&format!(
                "{u},{v},{},{},{},{}\n",
                format_rat(a),
                rat_to_f64(a),
                format_rat(b),
                rat_to_f64(b)
            ));
        }
    }
    out
}

/// CSV of optimal bias values per ring size: exact and float.
pub fn bias_vs_n_csv(rows: &[(usize, Rat)]) -> String {
    let mut out = String::from("n,delta,delta_float\n");
    for (n, d) in rows {
        out.push_str(&format!("{n},{},{}\n", format_rat(d), rat_to_f64(d)));
    }
    out
}
