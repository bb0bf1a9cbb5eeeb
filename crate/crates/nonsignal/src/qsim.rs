//! Exact state-vector simulator of the quantum one-way ring protocol:
//! every node runs the same local unitary between communication rounds,
//! messages hop one step around the ring, and the final computational
//! basis measurement is mapped to colors per node. Used to validate
//! numerically that protocol outputs are cyclic and independent beyond
//! the round count.

use std::collections::BTreeMap;

use num::complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frames::{
    canonical_placement, placable_collections, placements, Budget, Context, FrameCollection,
};
use crate::ring::pow3;

pub const UNITARITY_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const MAX_QUBITS: usize = 24;

/// One-way ring protocol: n nodes, r rounds, each node holding w
/// workspace qubits and m message qubits. `unitary` has dimension
/// 2^(w+m); `color_map` assigns a color in {0,1,2} to every local basis
/// index (the measurement is the induced basis partition).
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub n: usize,
    pub r: usize,
    pub w: usize,
    pub m: usize,
    pub unitary: Vec<Vec<Complex64>>,
    pub color_map: Vec<u8>,
}

impl ProtocolSpec {
    pub fn local_dim(&self) -> usize {
        1 << (self.w + self.m)
    }

    /// Dimension guard, unitarity check, and color-map totality.
    pub fn validate(&self) -> Result<(), String> {
        let q = self.w + self.m;
        if self.n == 0 || q == 0 {
            return Err("need at least one node and one qubit per node".into());
        }
        if self.n * q > MAX_QUBITS {
            return Err(format!(
                "protocol needs {} qubits, limit is {MAX_QUBITS}",
                self.n * q
            ));
        }
        let dim = self.local_dim();
        if self.unitary.len() != dim || self.unitary.iter().any(|row| row.len() != dim) {
            return Err(format!("unitary must be {dim}x{dim}"));
        }
        if self.color_map.len() != dim {
            return Err(format!("color_map must cover all {dim} basis indices"));
        }
        if self.color_map.iter().any(|&c| c > 2) {
            return Err("color_map values must be in {0,1,2}".into());
        }
        // max |(U† U - I)_{ij}|
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    s += self.unitary[k][i].conj() * self.unitary[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - Complex64::new(target, 0.0)).norm());
            }
        }
        if worst > UNITARITY_TOL {
            return Err(format!("matrix is not unitary: deviation {worst:e}"));
        }
        Ok(())
    }
}

/// Distribution of measured color strings; keys are {0,1,2}^n strings
/// with node 0 first, entries with zero probability omitted.
#[derive(Debug, Clone)]
pub struct OutputDistribution {
    pub n: usize,
    pub probabilities: BTreeMap<String, f64>,
}

impl OutputDistribution {
    pub fn probability(&self, colors: &[u8]) -> f64 {
        self.probabilities
            .get(&color_string(colors))
            .copied()
            .unwrap_or(0.0)
    }

    /// CSV export: coloring string, probability.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("coloring,probability\n");
        for (key, p) in &self.probabilities {
            out.push_str(&format!("{key},{p}\n"));
        }
        out
    }
}

pub fn color_string(colors: &[u8]) -> String {
    colors.iter().map(|c| (b'0' + c) as char).collect()
}

fn parse_colors(key: &str) -> Vec<u8> {
    key.bytes().map(|b| b - b'0').collect()
}

/// Applies the local unitary to one node's q qubits, in place.
fn apply_local_unitary(state: &mut [Complex64], node: usize, q: usize, u: &[Vec<Complex64>]) {
    let dim = 1usize << q;
    let shift = node * q;
    let local_mask = (dim - 1) << shift;
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..state.len() {
        if base & local_mask != 0 {
            continue;
        }
        for (v, s) in scratch.iter_mut().enumerate() {
            *s = state[base | (v << shift)];
        }
        for (v, row) in u.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, amp) in row.iter().zip(&scratch) {
                acc += x * amp;
            }
            state[base | (v << shift)] = acc;
        }
    }
}

/// One communication round: each node's message register moves to its
/// successor (a permutation of basis states). Local basis convention:
/// workspace bits high, message bits low.
fn apply_messaging(state: &[Complex64], n: usize, w: usize, m: usize) -> Vec<Complex64> {
    if m == 0 {
        return state.to_vec();
    }
    let q = w + m;
    let msg_mask = (1usize << m) - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for (idx, amp) in state.iter().enumerate() {
        let mut to = 0usize;
        for node in 0..n {
            let local = (idx >> (node * q)) & ((1 << q) - 1);
            let ws = local >> m;
            let prev = (node + n - 1) % n;
            let prev_msg = (idx >> (prev * q)) & msg_mask;
            let new_local = (ws << m) | prev_msg;
            to |= new_local << (node * q);
        }
        out[to] = *amp;
    }
    out
}

/// Runs the protocol: r alternations of per-node unitary and message
/// hop starting from the all-zeros state, then measures every qubit and
/// buckets the squared amplitudes by color string.
pub fn run_protocol(spec: &ProtocolSpec) -> OutputDistribution {
    spec.validate().expect("invalid protocol spec");
    let q = spec.w + spec.m;
    let size = 1usize << (spec.n * q);
    let mut state = vec![Complex64::new(0.0, 0.0); size];
    state[0] = Complex64::new(1.0, 0.0);
    for _ in 0..spec.r {
        for node in 0..spec.n {
            apply_local_unitary(&mut state, node, q, &spec.unitary);
        }
        state = apply_messaging(&state, spec.n, spec.w, spec.m);
        let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
        assert!(
            (norm - 1.0).abs() <= NORM_TOL,
            "state norm drifted to {norm}"
        );
    }
    let mut buckets = vec![0.0f64; pow3(spec.n) as usize];
    let local_mask = (1usize << q) - 1;
    for (idx, amp) in state.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut code = 0u64;
        for node in 0..spec.n {
            let local = (idx >> (node * q)) & local_mask;
            code += spec.color_map[local] as u64 * pow3(node);
        }
        buckets[code as usize] += p;
    }
    let mut probabilities = BTreeMap::new();
    for (code, &p) in buckets.iter().enumerate() {
        if p > 0.0 {
            let colors: Vec<u8> = (0..spec.n)
                .map(|v| crate::ring::digit(code as u64, v))
                .collect();
            probabilities.insert(color_string(&colors), p);
        }
    }
    OutputDistribution {
        n: spec.n,
        probabilities,
    }
}

/// True iff rotating every color string by one node leaves its
/// probability unchanged within tol.
pub fn check_cyclicity(dist: &OutputDistribution, tol: f64) -> bool {
    dist.probabilities.iter().all(|(key, &p)| {
        let mut colors = parse_colors(key);
        colors.rotate_right(1);
        (dist.probability(&colors) - p).abs() <= tol
    })
}

/// Result of the independence check: worst deviation over all frame
/// collections, placements, and product factorizations.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub max_deviation: f64,
    pub passed: bool,
    pub collections_checked: usize,
    /// Frame lengths and placement of the worst deviation, if any.
    pub worst: Option<(Vec<usize>, Vec<usize>)>,
}

/// Marginal of the distribution through frames placed at omega: bucket
/// 3^(total frame length) indexed by the concatenated tableau colors.
fn placed_marginal(
    dist: &OutputDistribution,
    frames: &FrameCollection,
    omega: &[usize],
    n: usize,
) -> Vec<f64> {
    let mut positions = Vec::with_capacity(frames.total_len());
    for (&start, &s) in omega.iter().zip(&frames.lengths) {
        for i in 0..s {
            positions.push((start + i) % n);
        }
    }
    let mut out = vec![0.0f64; pow3(positions.len()) as usize];
    for (key, &p) in &dist.probabilities {
        let colors = parse_colors(key);
        let mut idx = 0usize;
        for (slot, &pos) in positions.iter().enumerate() {
            idx += colors[pos] as usize * pow3(slot) as usize;
        }
        out[idx] += p;
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Checks that marginals through every gap-r-placable frame collection
/// depend only on the frames (not the placement) and factor into the
/// product of single-frame marginals. Exhaustive over the full frame
/// family; intended for n <= 6.
pub fn check_independence(dist: &OutputDistribution, r: usize, tol: f64) -> IndependenceReport {
    let n = dist.n;
    let context = Context::Ring { n };
    let mut report = IndependenceReport {
        max_deviation: 0.0,
        passed: true,
        collections_checked: 0,
        worst: None,
    };
    let mut record = |dev: f64, frames: &FrameCollection, omega: &[usize]| {
        if dev > report.max_deviation {
            report.max_deviation = dev;
            report.worst = Some((frames.lengths.clone(), omega.to_vec()));
        }
    };
    // Single-frame marginals at the canonical placement, per length.
    let mut single: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in 1..=n {
        let frames = FrameCollection::new(vec![s]);
        if placements(&frames, r, context).is_empty() {
            continue;
        }
        let omega = canonical_placement(&frames, r, context);
        single.insert(s, placed_marginal(dist, &frames, &omega, n));
    }
    for frames in placable_collections(context, r, Budget::unbounded()) {
        report.collections_checked += 1;
        let omega_ref = canonical_placement(&frames, r, context);
        let reference = placed_marginal(dist, &frames, &omega_ref, n);
        // (a) placement invariance
        for omega in placements(&frames, r, context) {
            if omega == omega_ref {
                continue;
            }
            let marginal = placed_marginal(dist, &frames, &omega, n);
            record(max_abs_diff(&reference, &marginal), &frames, &omega);
        }
        // (b) product factorization against single-frame marginals
        let mut product = vec![1.0f64; reference.len()];
        for (idx, value) in product.iter_mut().enumerate() {
            let mut rest = idx;
            for &s in &frames.lengths {
                let block = pow3(s) as usize;
                *value *= single[&s][rest % block];
                rest /= block;
            }
        }
        record(max_abs_diff(&reference, &product), &frames, &omega_ref);
    }
    report.passed = report.max_deviation <= tol;
    report
}

/// Deterministic pseudo-random unitary: complex Gaussian-ish matrix
/// orthonormalized by modified Gram-Schmidt.
pub fn random_unitary(dim: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    // sum of uniforms: light-tailed, full support, cheap
                    let re: f64 = rng.gen::<f64>() + rng.gen::<f64>() - 1.0;
                    let im: f64 = rng.gen::<f64>() + rng.gen::<f64>() - 1.0;
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    for j in 0..dim {
        for i in 0..j {
            let proj: Complex64 = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            for k in 0..dim {
                let d = proj * cols[i][k];
                cols[j][k] -= d;
            }
        }
        let norm: f64 = cols[j].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 1e-9, "degenerate random matrix; change the seed");
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    // Transpose columns into row-major U.
    (0..dim)
        .map(|i| (0..dim).map(|j| cols[j][i]).collect())
        .collect()
}

/// Color map splitting local basis indices round-robin into {0,1,2}.
pub fn round_robin_color_map(dim: usize) -> Vec<u8> {
    (0..dim).map(|i| (i % 3) as u8).collect()
}

/// A random protocol spec for validation runs.
pub fn random_protocol(n: usize, w: usize, m: usize, r: usize, seed: u64) -> ProtocolSpec {
    let dim = 1 << (w + m);
    ProtocolSpec {
        n,
        r,
        w,
        m,
        unitary: random_unitary(dim, seed),
        color_map: round_robin_color_map(dim),
    }
}

/// Negative control: the output of a two-round protocol presented as if
/// it came from a one-round protocol. Messages have then travelled two
/// hops, so distance-2 correlations survive and the r=1 independence
/// check must flag them.
pub fn signaling_control(n: usize, seed: u64) -> OutputDistribution {
    let spec = random_protocol(n, 1, 1, 2, seed);
    run_protocol(&spec)
}

// ---------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------

/// Loads a protocol from JSON: integers n, r, w, m; `unitary` as a
/// row-major matrix of [re, im] pairs; `color_map` as an integer array.
pub fn protocol_from_json(text: &str) -> Result<ProtocolSpec, String> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let int = |field: &str| -> Result<usize, String> {
        v[field]
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| format!("missing integer field {field:?}"))
    };
    let unitary = v["unitary"]
        .as_array()
        .ok_or("missing unitary")?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| "unitary rows must be arrays".to_string())?
                .iter()
                .map(|pair| {
                    let p = pair
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .ok_or("unitary entries must be [re, im] pairs")?;
                    let re = p[0].as_f64().ok_or("non-numeric real part")?;
                    let im = p[1].as_f64().ok_or("non-numeric imaginary part")?;
                    Ok::<_, String>(Complex64::new(re, im))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let color_map = v["color_map"]
        .as_array()
        .ok_or("missing color_map")?
        .iter()
        .map(|x| {
            x.as_u64()
                .filter(|&c| c <= 2)
                .map(|c| c as u8)
                .ok_or_else(|| "color_map entries must be 0, 1, or 2".to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = ProtocolSpec {
        n: int("n")?,
        r: int("r")?,
        w: int("w")?,
        m: int("m")?,
        unitary,
        color_map,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_unitary(dim: usize) -> Vec<Vec<Complex64>> {
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_protocol_is_all_zeros() {
        let spec = ProtocolSpec {
            n: 4,
            r: 2,
            w: 1,
            m: 1,
            unitary: identity_unitary(4),
            color_map: vec![0; 4],
        };
        let dist = run_protocol(&spec);
        assert_eq!(dist.probabilities.len(), 1);
        assert!((dist.probability(&[0, 0, 0, 0]) - 1.0).abs() < 1e-15);
        assert!(check_cyclicity(&dist, 1e-9));
        let rep = check_independence(&dist, 1, 1e-9);
        assert!(rep.passed, "deviation {}", rep.max_deviation);
    }

    #[test]
    fn zero_rounds_ignores_the_unitary() {
        let spec = random_protocol(3, 1, 1, 0, 7);
        let dist = run_protocol(&spec);
        assert_eq!(dist.probabilities.len(), 1);
        assert!((dist.probability(&[0, 0, 0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn workspace_superposition_gives_iid_colors() {
        // w=2, m=0: Hadamard on both workspace qubits puts each node in
        // the uniform distribution over 4 basis values; colors value%3
        // give per-node marginals (1/2, 1/4, 1/4), independent nodes.
        let h = 0.5f64;
        let had2: Vec<Vec<Complex64>> = (0..4)
            .map(|i: usize| {
                (0..4)
                    .map(|j: usize| {
                        let sign = if (i & j).count_ones() % 2 == 1 { -h } else { h };
                        Complex64::new(sign, 0.0)
                    })
                    .collect()
            })
            .collect();
        let spec = ProtocolSpec {
            n: 3,
            r: 1,
            w: 2,
            m: 0,
            unitary: had2,
            color_map: vec![0, 1, 2, 0],
        };
        let dist = run_protocol(&spec);
        let marginal = [0.5, 0.25, 0.25];
        for (key, &p) in &dist.probabilities {
            let expect: f64 = key.bytes().map(|b| marginal[(b - b'0') as usize]).product();
            assert!((p - expect).abs() < 1e-12, "{key}: {p} vs {expect}");
        }
        let rep = check_independence(&dist, 0, 1e-9);
        assert!(rep.passed, "deviation {}", rep.max_deviation);
    }

    #[test]
    fn random_protocols_are_cyclic_and_independent() {
        for seed in [1u64, 2, 3] {
            for n in [3usize, 4] {
                let spec = random_protocol(n, 1, 1, 1, seed);
                let dist = run_protocol(&spec);
                assert!(check_cyclicity(&dist, 1e-9));
                let rep = check_independence(&dist, 1, 1e-9);
                assert!(
                    rep.passed,
                    "seed {seed} n {n} deviation {}",
                    rep.max_deviation
                );
            }
        }
    }

    #[test]
    fn two_round_output_fails_one_round_check() {
        let mut worst = 0.0f64;
        for seed in 1..=5u64 {
            let dist = signaling_control(4, seed);
            let rep = check_independence(&dist, 1, 1e-9);
            worst = worst.max(rep.max_deviation);
        }
        assert!(worst > 1e-3, "negative control too weak: {worst}");
    }

    #[test]
    fn rejects_non_unitary_matrices() {
        let mut u = identity_unitary(4);
        u[0][0] = Complex64::new(0.5, 0.0);
        let spec = ProtocolSpec {
            n: 2,
            r: 1,
            w: 1,
            m: 1,
            unitary: u,
            color_map: vec![0; 4],
        };
        assert!(spec.validate().is_err());
        let big = ProtocolSpec {
            n: 13,
            r: 1,
            w: 1,
            m: 1,
            unitary: identity_unitary(4),
            color_map: vec![0; 4],
        };
        assert!(big.validate().is_err());
    }

    #[test]
    fn concentrated_distribution_is_not_cyclic() {
        let mut probabilities = BTreeMap::new();
        probabilities.insert("012".to_string(), 1.0);
        let dist = OutputDistribution { n: 3, probabilities };
        assert!(!check_cyclicity(&dist, 1e-9));
    }

    #[test]
    fn json_roundtrip_runs() {
        let spec = random_protocol(3, 1, 1, 1, 5);
        let unitary: Vec<Vec<[f64; 2]>> = spec
            .unitary
            .iter()
            .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
            .collect();
        let text = serde_json::json!({
            "n": spec.n, "r": spec.r, "w": spec.w, "m": spec.m,
            "unitary": unitary,
            "color_map": spec.color_map,
        })
        .to_string();
        let loaded = protocol_from_json(&text).unwrap();
        let a = run_protocol(&spec);
        let b = run_protocol(&loaded);
        assert_eq!(a.probabilities, b.probabilities);
        assert!(protocol_from_json("{}").is_err());
    }
}
