//! Power metrics and run-length constraint capacities.
//!
//! A passive tag is powered by the reader field, and every 0-bit of the line
//! code switches the field off, so three figures of merit matter for a code
//! besides its rate:
//!
//! * **average power** — long-run fraction of 1-bits under uniform data;
//! * **minimum sustainable power** — the smallest 1-density an adversarial
//!   data stream can force forever (minimum over cycles of the encoder);
//! * **local minimum power** — the smallest 1-density over any short window
//!   (the tag's storage capacitor only bridges short gaps).
//!
//! All three are computed *exactly* as rationals from the code's sequence
//! automaton. Constraint capacities are computed twice, from the generating
//! function root and from the spectral radius of the bit-level constraint
//! graph, and the two routes are required to agree.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_rational::Ratio;
use num_traits::Zero;

use crate::codes::CodeId;
use crate::{Error, Result};

/// Exact power value (1-density), e.g. `13/24`.
pub type Power = Ratio<i64>;

/// A run-length constraint: admissible maximal-run lengths for each symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RllConstraint {
    pub zero_runs: Vec<u32>,
    pub one_runs: Vec<u32>,
}

impl RllConstraint {
    pub fn new(zero_runs: Vec<u32>, one_runs: Vec<u32>) -> Result<Self> {
        for set in [&zero_runs, &one_runs] {
            if set.is_empty() {
                return Err(Error::InvalidParameter("run sets must be non-empty".into()));
            }
            if set.contains(&0) {
                return Err(Error::InvalidParameter("run lengths must be >= 1".into()));
            }
            if !set.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidParameter(
                    "run sets must be sorted and duplicate-free".into(),
                ));
            }
        }
        Ok(Self { zero_runs, one_runs })
    }

    /// Longest admissible run of either symbol.
    pub fn max_run(&self) -> u32 {
        *self
            .zero_runs
            .iter()
            .chain(self.one_runs.iter())
            .max()
            .expect("non-empty")
    }
}

/// Capacity (bits per channel bit) of the constraint: `log2` of the largest
/// root of `(sum_i x^-i)(sum_j x^-j) = 1`, found by bisection on `[1, 2]`.
/// The product counts closed runs of zeros followed by runs of ones, so the
/// root is the growth rate of the number of admissible sequences.
pub fn rll_capacity(c: &RllConstraint) -> Result<f64> {
    let g = |lam: f64| -> f64 {
        let s = |set: &[u32]| set.iter().map(|&i| libm::pow(lam, -(i as f64))).sum::<f64>();
        s(&c.zero_runs) * s(&c.one_runs) - 1.0
    };
    // g is strictly decreasing for lam >= 1; g(2) < 1 * 1 - 1 <= 0 always.
    if g(1.0) <= 0.0 {
        // Only the single alternating sequence is admissible.
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(libm::log2(0.5 * (lo + hi)))
}

/// Same capacity from the other direction: spectral radius of the bit-level
/// constraint graph (states are "emitting symbol `b`, `j` bits into the
/// run"), via Collatz-Wielandt bounds on `A + I` (the shift removes any
/// periodicity). Used to cross-check [`rll_capacity`].
pub fn rll_capacity_spectral(c: &RllConstraint) -> Result<f64> {
    // State index: (b, j) with 1 <= j <= max(run set of b).
    let max0 = *c.zero_runs.iter().max().unwrap() as usize;
    let max1 = *c.one_runs.iter().max().unwrap() as usize;
    let n = max0 + max1;
    let idx = |b: usize, j: usize| if b == 0 { j - 1 } else { max0 + j - 1 };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (b, set, maxb) in [(0usize, &c.zero_runs, max0), (1, &c.one_runs, max1)] {
        let other_set = if b == 0 { &c.one_runs } else { &c.zero_runs };
        debug_assert!(!other_set.is_empty());
        for j in 1..=maxb {
            // Continue the current run if some admissible length exceeds j.
            if set.iter().any(|&l| l as usize > j) {
                adj[idx(b, j)].push(idx(b, j + 1));
            }
            // Close the run and switch symbols if j itself is admissible.
            if set.contains(&(j as u32)) {
                adj[idx(b, j)].push(idx(1 - b, 1));
            }
        }
    }
    // Power iteration on A + I with Collatz-Wielandt convergence bounds.
    let mut v = vec![1.0f64; n];
    let mut rho = 1.0;
    for _ in 0..200_000 {
        let mut w = v.clone();
        for (s, outs) in adj.iter().enumerate() {
            for &t in outs {
                w[t] += v[s];
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = w[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm: f64 = w.iter().sum::<f64>() / n as f64;
        for x in w.iter_mut() {
            *x /= norm;
        }
        v = w;
        rho = 0.5 * (lo + hi);
        if hi - lo < 1e-13 {
            break;
        }
    }
    // rho = 1 + lambda(A) and lambda(A) >= 1 (the graph always has a cycle).
    Ok(libm::log2(rho - 1.0))
}

/// Capacities of the nested constraints with run lengths `{3^0, ..., 3^l}`
/// for `l = 0, ..., l_max`. The sequence increases and saturates almost
/// immediately: runs beyond length 9 add less than 2e-5 bits.
pub fn rll_capacity_powers_of_three(l_max: u32) -> Result<Vec<f64>> {
    if l_max > 12 {
        return Err(Error::InvalidParameter("l_max > 12 overflows run lengths".into()));
    }
    let mut out = Vec::new();
    let mut set: Vec<u32> = Vec::new();
    for l in 0..=l_max {
        set.push(3u32.pow(l));
        out.push(rll_capacity(&RllConstraint::new(set.clone(), set.clone())?)?);
    }
    Ok(out)
}

/// The sequence automaton of a code: from each state, one labelled edge per
/// input block, all inputs equally likely under uniform data. This is the
/// encoder graph stripped of input labels' meaning — exactly what the power
/// metrics need.
#[derive(Debug, Clone)]
pub struct SequenceAutomaton {
    /// `edges[state][input] = (emitted bits, next state)`. Every state must
    /// have the same number of inputs.
    pub edges: Vec<Vec<(Vec<u8>, usize)>>,
}

impl SequenceAutomaton {
    fn validate(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::InvalidParameter("automaton has no states".into()));
        }
        let m = self.edges[0].len();
        for (s, outs) in self.edges.iter().enumerate() {
            if outs.len() != m || m == 0 {
                return Err(Error::InvalidParameter(format!(
                    "state {s} has {} inputs, expected {m}",
                    outs.len()
                )));
            }
            for (bits, next) in outs {
                if bits.is_empty() || *next >= self.edges.len() {
                    return Err(Error::InvalidParameter(format!("bad edge from state {s}")));
                }
            }
        }
        if !self.strongly_connected() {
            return Err(Error::InvalidParameter(
                "automaton must be strongly connected".into(),
            ));
        }
        Ok(())
    }

    fn strongly_connected(&self) -> bool {
        let n = self.edges.len();
        let reach = |start: usize, rev: bool| -> usize {
            let mut seen = vec![false; n];
            let mut stack = vec![start];
            seen[start] = true;
            let mut count = 1;
            while let Some(s) = stack.pop() {
                for (t, outs) in self.edges.iter().enumerate() {
                    for (_, next) in outs {
                        let (from, to) = if rev { (*next, t) } else { (t, *next) };
                        if from == s && !seen[to] {
                            seen[to] = true;
                            count += 1;
                            stack.push(to);
                        }
                    }
                }
            }
            count
        };
        reach(0, false) == n && reach(0, true) == n
    }

    /// Exact long-run 1-density under uniform inputs: the stationary state
    /// distribution is solved in rationals, then average weight over average
    /// length per step (renewal-reward).
    pub fn average_power(&self) -> Result<Power> {
        self.validate()?;
        let n = self.edges.len();
        let m = self.edges[0].len() as i64;
        // pi (P - I) = 0 with sum(pi) = 1; replace the last column by the
        // normalization. P[s][t] = (#edges s->t) / m.
        let mut a = vec![vec![Power::zero(); n]; n];
        for (s, outs) in self.edges.iter().enumerate() {
            for (_, t) in outs {
                a[s][*t] += Power::new(1, m);
            }
            a[s][s] -= Power::new(1, 1);
        }
        // System: for t < n-1: sum_s pi_s a[s][t] = 0; sum_s pi_s = 1.
        let mut mat = vec![vec![Power::zero(); n + 1]; n];
        for t in 0..n - 1 {
            for s in 0..n {
                mat[t][s] = a[s][t];
            }
        }
        for s in 0..n {
            mat[n - 1][s] = Power::new(1, 1);
        }
        mat[n - 1][n] = Power::new(1, 1);
        let pi = solve_rational(mat)?;
        let mut weight = Power::zero();
        let mut length = Power::zero();
        for (s, outs) in self.edges.iter().enumerate() {
            for (bits, _) in outs {
                let w = bits.iter().filter(|&&b| b == 1).count() as i64;
                weight += pi[s] * Power::new(w, m);
                length += pi[s] * Power::new(bits.len() as i64, m);
            }
        }
        Ok(weight / length)
    }

    /// Exact minimum sustainable 1-density: the minimum of
    /// `weight / length` over simple cycles (a minimizing cycle can always
    /// be taken simple).
    pub fn min_sustainable_power(&self) -> Result<Power> {
        self.validate()?;
        let n = self.edges.len();
        let mut best: Option<Power> = None;
        // DFS over simple paths from each start state, closing cycles at it.
        fn dfs(
            auto: &SequenceAutomaton,
            start: usize,
            s: usize,
            visited: &mut Vec<bool>,
            w: i64,
            l: i64,
            best: &mut Option<Power>,
        ) {
            for (bits, t) in &auto.edges[s] {
                let ew = bits.iter().filter(|&&b| b == 1).count() as i64;
                let el = bits.len() as i64;
                if *t == start {
                    let r = Power::new(w + ew, l + el);
                    if best.map_or(true, |b| r < b) {
                        *best = Some(r);
                    }
                } else if *t > start && !visited[*t] {
                    // Only cycles whose minimal state is `start`: avoids
                    // enumerating each cycle once per rotation.
                    visited[*t] = true;
                    dfs(auto, start, *t, visited, w + ew, l + el, best);
                    visited[*t] = false;
                }
            }
        }
        for start in 0..n {
            let mut visited = vec![false; n];
            visited[start] = true;
            dfs(self, start, start, &mut visited, 0, 0, &mut best);
        }
        best.ok_or_else(|| Error::InvalidParameter("no cycles".into()))
    }

    /// Exact minimum 1-density over all windows of up to `window_bound` bits
    /// that can occur in a bi-infinite code sequence, restricted to windows
    /// of positive weight (an all-zero window is a run, not a power dip, and
    /// is already bounded by the run-length constraint).
    pub fn local_min_power(&self, window_bound: u32) -> Result<Power> {
        self.validate()?;
        if window_bound == 0 {
            return Err(Error::InvalidParameter("window bound must be >= 1".into()));
        }
        let maxblock = self
            .edges
            .iter()
            .flatten()
            .map(|(bits, _)| bits.len())
            .max()
            .unwrap();
        // Any admissible window of length <= W lies inside the label of some
        // path that starts at a state boundary at most one block before the
        // window, so paths of length W + maxblock from every state cover all
        // windows.
        let need = window_bound as usize + maxblock;
        let mut best: Option<Power> = None;
        fn dfs(
            auto: &SequenceAutomaton,
            s: usize,
            label: &mut Vec<u8>,
            need: usize,
            window: usize,
            best: &mut Option<Power>,
        ) {
            if label.len() >= need {
                scan(label, window, best);
                return;
            }
            for (bits, t) in &auto.edges[s] {
                let keep = label.len();
                label.extend_from_slice(bits);
                dfs(auto, *t, label, need, window, best);
                label.truncate(keep);
            }
        }
        fn scan(label: &[u8], window: usize, best: &mut Option<Power>) {
            for len in 1..=window.min(label.len()) {
                for start in 0..=label.len() - len {
                    let w = label[start..start + len].iter().filter(|&&b| b == 1).count();
                    if w == 0 {
                        continue;
                    }
                    let r = Power::new(w as i64, len as i64);
                    if best.map_or(true, |b| r < b) {
                        *best = Some(r);
                    }
                }
            }
        }
        let mut label = Vec::new();
        for s in 0..self.edges.len() {
            dfs(self, s, &mut label, need, window_bound as usize, &mut best);
        }
        best.ok_or_else(|| Error::InvalidParameter("automaton emits no ones".into()))
    }
}

/// Gaussian elimination over exact rationals for the small (<= 5x5)
/// stationary-distribution systems. `mat` is the augmented matrix.
fn solve_rational(mut mat: Vec<Vec<Power>>) -> Result<Vec<Power>> {
    let n = mat.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !mat[r][col].is_zero())
            .ok_or_else(|| Error::InvalidParameter("singular stationary system".into()))?;
        mat.swap(col, pivot);
        let p = mat[col][col];
        for x in mat[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && !mat[r][col].is_zero() {
                let f = mat[r][col];
                for c in 0..=n {
                    let sub = f * mat[col][c];
                    mat[r][c] -= sub;
                }
            }
        }
    }
    Ok((0..n).map(|r| mat[r][n]).collect())
}

/// All three power metrics of a code, with the window for the local minimum
/// defaulting to `3 * max_run + 2` (long enough that every periodic dip of
/// the constraint shows up in full).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerReport {
    pub average: Power,
    pub min_sustainable: Power,
    pub local_min: Power,
    pub window_bound: u32,
}

/// Long-run 1-density of `code` under uniform data.
pub fn average_power(code: CodeId) -> Result<Power> {
    code.sequence_automaton().average_power()
}

/// Worst sustainable 1-density of `code` over adversarial data.
pub fn min_sustainable_power(code: CodeId) -> Result<Power> {
    code.sequence_automaton().min_sustainable_power()
}

/// Worst short-window 1-density of `code`; see
/// [`SequenceAutomaton::local_min_power`].
pub fn local_min_power(code: CodeId, window_bound: u32) -> Result<Power> {
    code.sequence_automaton().local_min_power(window_bound)
}

/// All metrics of `code` with the default window bound.
pub fn power_report(code: CodeId) -> Result<PowerReport> {
    let window_bound = 3 * code.constraint().max_run() + 2;
    Ok(PowerReport {
        average: average_power(code)?,
        min_sustainable: min_sustainable_power(code)?,
        local_min: local_min_power(code, window_bound)?,
        window_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(z: &[u32], o: &[u32]) -> RllConstraint {
        RllConstraint::new(z.to_vec(), o.to_vec()).unwrap()
    }

    // Frozen from an independent high-precision root finder.
    const CAP_ORACLE: &[(&[u32], &[u32], f64)] = &[
        (&[1, 2], &[1, 2], 0.6942419136306174),
        (&[1], &[1, 2], 0.4056852313625786),
        (&[1, 3], &[1, 3], 0.5514630896870247),
        (&[1], &[1, 3], 0.3471209568153087),
        (&[1, 2, 4], &[1, 2, 4], 0.8113704627251572),
        (&[1, 2], &[1, 2, 4], 0.7582200624961112),
        (&[1], &[1, 2, 4], 0.5151152701656557),
        (&[1, 2, 3], &[1, 2, 3], 0.8791464216066382),
    ];

    #[test]
    fn capacities_match_oracle() {
        for &(z, o, cap) in CAP_ORACLE {
            let got = rll_capacity(&c(z, o)).unwrap();
            assert!((got - cap).abs() < 1e-8, "({z:?},{o:?}): {got} vs {cap}");
        }
    }

    #[test]
    fn both_routes_agree() {
        let mut cases: Vec<RllConstraint> =
            CAP_ORACLE.iter().map(|&(z, o, _)| c(z, o)).collect();
        cases.push(c(&[1], &[1]));
        cases.push(c(&[2], &[1, 4]));
        cases.push(c(&[1, 3, 9], &[1, 3, 9]));
        for cons in cases {
            let a = rll_capacity(&cons).unwrap();
            let b = rll_capacity_spectral(&cons).unwrap();
            assert!((a - b).abs() < 1e-9, "{cons:?}: transfer {a} vs spectral {b}");
        }
    }

    #[test]
    fn degenerate_constraint_has_zero_capacity() {
        assert_eq!(rll_capacity(&c(&[1], &[1])).unwrap(), 0.0);
        assert!(rll_capacity_spectral(&c(&[1], &[1])).unwrap().abs() < 1e-9);
    }

    #[test]
    fn powers_of_three_saturate() {
        let caps = rll_capacity_powers_of_three(5).unwrap();
        let expect = [
            0.0,
            0.5514630896870247,
            0.5761577058471074,
            0.5761741219477897,
            0.5761741219477897, // saturated to printed precision
        ];
        for (i, &e) in expect.iter().enumerate() {
            assert!((caps[i] - e).abs() < 1e-7, "l = {i}: {} vs {e}", caps[i]);
        }
        for w in caps.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(caps[5] - caps[3] < 1e-7);
        assert!(rll_capacity_powers_of_three(13).is_err());
    }

    fn manchester_auto() -> SequenceAutomaton {
        SequenceAutomaton {
            edges: vec![vec![(vec![0, 1], 0), (vec![1, 0], 0)]],
        }
    }

    #[test]
    fn manchester_metrics() {
        let a = manchester_auto();
        assert_eq!(a.average_power().unwrap(), Power::new(1, 2));
        assert_eq!(a.min_sustainable_power().unwrap(), Power::new(1, 2));
        assert_eq!(a.local_min_power(8).unwrap(), Power::new(1, 4));
    }

    #[test]
    fn two_state_alternator_average() {
        // 0 <-> 1 with asymmetric weights; stationary is (1/2, 1/2).
        let a = SequenceAutomaton {
            edges: vec![
                vec![(vec![1, 1, 1], 1), (vec![1, 0], 1)],
                vec![(vec![0], 0), (vec![0, 0], 0)],
            ],
        };
        // Per step from state 0: E[w] = 2, E[n] = 5/2; from 1: 0 and 3/2.
        assert_eq!(a.average_power().unwrap(), Power::new(1, 2));
    }

    #[test]
    fn local_min_brute_force_agreement() {
        // Cross-check the window search against direct enumeration of all
        // emitted sequences for a small two-state automaton.
        let a = SequenceAutomaton {
            edges: vec![
                vec![(vec![0, 0, 1], 1), (vec![1], 1)],
                vec![(vec![1, 1, 0], 0), (vec![0], 0)],
            ],
        };
        let got = a.local_min_power(7).unwrap();
        let mut best = Power::new(1, 1);
        let mut stack = vec![(0usize, Vec::<u8>::new())];
        while let Some((s, label)) = stack.pop() {
            if label.len() >= 12 {
                for len in 1..=7usize {
                    for start in 0..=label.len() - len {
                        let w = label[start..start + len].iter().filter(|&&b| b == 1).count();
                        if w > 0 {
                            best = best.min(Power::new(w as i64, len as i64));
                        }
                    }
                }
                continue;
            }
            for (bits, t) in &a.edges[s] {
                let mut l2 = label.clone();
                l2.extend_from_slice(bits);
                stack.push((*t, l2));
            }
        }
        assert_eq!(got, best);
    }

    #[test]
    fn rejects_malformed_constraints() {
        assert!(RllConstraint::new(vec![], vec![1]).is_err());
        assert!(RllConstraint::new(vec![0], vec![1]).is_err());
        assert!(RllConstraint::new(vec![2, 1], vec![1]).is_err());
        assert!(RllConstraint::new(vec![1, 1], vec![1]).is_err());
    }
}
