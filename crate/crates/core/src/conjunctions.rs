//! Conjunctions over `{-1, +1}^n` under the uniform distribution.
//!
//! Literal `j` is true when coordinate `j` (1-based) is `+1`; literal `-j` is
//! its negation. The empty conjunction is the constant `+1` function.

use std::fmt;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{DistributionSpec, ExamplePoint};
use crate::drift::{DriftPolicy, DriftSchedule};
use crate::engine::{EvolutionAlgorithm, NeighborSet, PerformanceOracle};
use crate::{ceil_snapped, Error, Result};

/// Largest supported `n`. Keeps exact performances inside `i128`.
pub const MAX_VARIABLES: usize = 60;

/// Exact performance value: a dyadic rational.
pub type ExactPerf = Ratio<i128>;

/// Bit `i` of `pos` (`neg`) is set when `x_{i+1}` (`!x_{i+1}`) is a literal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Conjunction {
    pos: u64,
    neg: u64,
}

impl Conjunction {
    pub fn empty() -> Self {
        Conjunction::default()
    }

    pub fn from_literals(literals: &[i32], n: usize) -> Result<Self> {
        check_dimension(n)?;
        let mut c = Conjunction::empty();
        for &l in literals {
            let j = l.unsigned_abs() as usize;
            if l == 0 || j > n {
                return Err(Error::IndexOutOfRange { index: l as i64, n });
            }
            let bit = 1u64 << (j - 1);
            if c.vars() & bit != 0 {
                return Err(Error::Parse(format!("variable {j} appears twice")));
            }
            if l > 0 {
                c.pos |= bit;
            } else {
                c.neg |= bit;
            }
        }
        Ok(c)
    }

    /// Monotone conjunction over the given 1-based variables.
    pub fn monotone(vars: &[usize], n: usize) -> Result<Self> {
        let lits: Vec<i32> = vars.iter().map(|&v| v as i32).collect();
        Conjunction::from_literals(&lits, n)
    }

    /// Parse `"1,-3,7"`; the empty string is the empty conjunction.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            check_dimension(n)?;
            return Ok(Conjunction::empty());
        }
        let lits = s
            .split(',')
            .map(|t| t.trim().parse::<i32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Conjunction::from_literals(&lits, n)
    }

    pub fn encode(&self) -> String {
        self.literals().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Literals sorted by variable.
    pub fn literals(&self) -> Vec<i32> {
        (0..64)
            .filter_map(|i| {
                let bit = 1u64 << i;
                if self.pos & bit != 0 {
                    Some(i + 1)
                } else if self.neg & bit != 0 {
                    Some(-(i + 1))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.vars().count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.vars() == 0
    }

    pub fn is_monotone(&self) -> bool {
        self.neg == 0
    }

    /// Mask of variables mentioned.
    pub fn vars(&self) -> u64 {
        self.pos | self.neg
    }

    /// Largest variable index mentioned (1-based), 0 when empty.
    pub fn max_variable(&self) -> usize {
        64 - self.vars().leading_zeros() as usize
    }

    pub fn evaluate(&self, x: &[f64]) -> bool {
        let mut m = self.vars();
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            let want = self.pos & (1u64 << i) != 0;
            if (x[i] > 0.0) != want {
                return false;
            }
        }
        true
    }

    /// `+1` when satisfied, `-1` otherwise.
    pub fn value(&self, x: &[f64]) -> f64 {
        if self.evaluate(x) {
            1.0
        } else {
            -1.0
        }
    }

    fn with(self, var: usize, positive: bool) -> Self {
        let bit = 1u64 << var;
        let mut c = self.without(var);
        if positive {
            c.pos |= bit;
        } else {
            c.neg |= bit;
        }
        c
    }

    fn without(self, var: usize) -> Self {
        let bit = !(1u64 << var);
        Conjunction { pos: self.pos & bit, neg: self.neg & bit }
    }

    fn is_positive(&self, var: usize) -> bool {
        self.pos & (1u64 << var) != 0
    }

    /// True when `self` contains the negation of a literal of `other`.
    pub fn contradicts(&self, other: &Conjunction) -> bool {
        (self.pos & other.neg) | (self.neg & other.pos) != 0
    }
}

impl fmt::Debug for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Conjunction[{}]", self.encode())
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VARIABLES {
        return Err(Error::InvalidParameter(format!("n = {n} must be in 1..={MAX_VARIABLES}")));
    }
    Ok(())
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Exact `E[f r]` under the uniform distribution:
/// `1 - 2^(1-|f|) - 2^(1-|r|) + 2^(2-|vars(f) u vars(r)|)`, with the last
/// term dropped when `r` contradicts `f`.
pub fn exact_performance(f: &Conjunction, r: &Conjunction) -> ExactPerf {
    let a = f.len() as i32;
    let b = r.len() as i32;
    let joint = if f.contradicts(r) { None } else { Some((f.vars() | r.vars()).count_ones() as i32) };
    let d = [a - 1, b - 1, joint.map_or(0, |s| s - 2), 0].into_iter().max().unwrap();
    let p2 = |e: i32| 1i128 << e;
    let mut numer = p2(d) - p2(d - a + 1) - p2(d - b + 1);
    if let Some(s) = joint {
        numer += p2(d - s + 2);
    }
    Ratio::new(numer, p2(d))
}

pub fn ratio_to_f64(r: &ExactPerf) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn performance(f: &Conjunction, r: &Conjunction) -> f64 {
    ratio_to_f64(&exact_performance(f, r))
}

/// Maximum representation length: `ceil(log2(3/epsilon))`.
pub fn quantization_length(epsilon: f64) -> usize {
    ceil_snapped((3.0 / epsilon).log2()).max(0.0) as usize
}

/// Every inaccurate representation has a neighbor this much better (`9/epsilon^2`).
pub fn benefit_bound(epsilon: f64) -> f64 {
    9.0 / (epsilon * epsilon)
}

pub fn monotone_neighborhood_bound(n: usize) -> f64 {
    let n = n as f64;
    1.0 + n + n * n / 4.0
}

pub fn general_neighborhood_bound(n: usize, epsilon: f64) -> f64 {
    let n = n as f64;
    1.0 + 2.0 * n + n * n + 6.0 / epsilon
}

/// Shortest conjunction whose one-variable swaps stay within `delta`.
pub fn min_long_length(delta: f64) -> usize {
    ceil_snapped((1.0 / delta).log2()).max(0.0) as usize
}

fn check_rep(r: &Conjunction, n: usize, q: usize) -> Result<()> {
    check_dimension(n)?;
    if r.max_variable() > n {
        return Err(Error::IndexOutOfRange { index: r.max_variable() as i64, n });
    }
    if r.len() > q {
        return Err(Error::TooLong { len: r.len(), max: q });
    }
    Ok(())
}

/// Add one variable (below length `q`), drop one, swap one for an absent
/// one (nonempty `r`), or stay. Uniform weights.
pub fn neighborhood_monotone(r: &Conjunction, n: usize, epsilon: f64) -> Result<NeighborSet<Conjunction>> {
    if !r.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let q = quantization_length(epsilon);
    check_rep(r, n, q)?;
    let absent = !r.vars() & mask(n);
    let mut out = Vec::new();
    if r.len() < q {
        out.extend(bits(absent).map(|j| (r.with(j, true), 1.0)));
    }
    out.extend(bits(r.vars()).map(|i| (r.without(i), 1.0)));
    for i in bits(r.vars()) {
        let base = r.without(i);
        out.extend(bits(absent).map(|j| (base.with(j, true), 1.0)));
    }
    NeighborSet::new(*r, 1.0, out)
}

/// Signed version of [`neighborhood_monotone`] plus every nonempty
/// sign-flip of `r`'s literals.
pub fn neighborhood_general(r: &Conjunction, n: usize, epsilon: f64) -> Result<NeighborSet<Conjunction>> {
    let q = quantization_length(epsilon);
    check_rep(r, n, q)?;
    let absent = !r.vars() & mask(n);
    let mut out = Vec::new();
    if r.len() < q {
        for j in bits(absent) {
            out.push((r.with(j, true), 1.0));
            out.push((r.with(j, false), 1.0));
        }
    }
    out.extend(bits(r.vars()).map(|i| (r.without(i), 1.0)));
    for i in bits(r.vars()) {
        let base = r.without(i);
        for j in bits(absent) {
            out.push((base.with(j, true), 1.0));
            out.push((base.with(j, false), 1.0));
        }
    }
    let vars: Vec<usize> = bits(r.vars()).collect();
    for flip in 1u64..(1u64 << vars.len()) {
        let mut c = *r;
        for (k, &v) in vars.iter().enumerate() {
            if flip & (1 << k) != 0 {
                c = c.with(v, !r.is_positive(v));
            }
        }
        out.push((c, 1.0));
    }
    NeighborSet::new(*r, 1.0, out)
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Uniformly random conjunction of the given length.
pub fn random_conjunction(n: usize, len: usize, monotone: bool, rng: &mut dyn RngCore) -> Result<Conjunction> {
    check_dimension(n)?;
    if len > n {
        return Err(Error::TooLong { len, max: n });
    }
    let mut c = Conjunction::empty();
    for v in sample(rng, n, len) {
        let positive = monotone || rng.random::<bool>();
        c = c.with(v, positive);
    }
    Ok(c)
}

/// Conjunction learner: mutation neighborhoods over short conjunctions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjunctionEvolution {
    pub n: usize,
    pub epsilon: f64,
    pub monotone: bool,
    pub tolerance: f64,
    distribution: DistributionSpec,
}

impl ConjunctionEvolution {
    /// Uses the tolerance `1/(2b)` with `b = 9/epsilon^2`.
    pub fn new(n: usize, epsilon: f64, monotone: bool) -> Result<Self> {
        Self::with_tolerance(n, epsilon, monotone, 1.0 / (2.0 * benefit_bound(epsilon)))
    }

    pub fn with_tolerance(n: usize, epsilon: f64, monotone: bool, tolerance: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be in (0, 1)")));
        }
        Ok(ConjunctionEvolution {
            n,
            epsilon,
            monotone,
            tolerance,
            distribution: DistributionSpec::UniformHypercube { n },
        })
    }

    pub fn max_length(&self) -> usize {
        quantization_length(self.epsilon)
    }

    pub fn benefit(&self) -> f64 {
        benefit_bound(self.epsilon)
    }

    pub fn neighborhood_bound(&self) -> f64 {
        if self.monotone {
            monotone_neighborhood_bound(self.n)
        } else {
            general_neighborhood_bound(self.n, self.epsilon)
        }
    }

    pub fn neighbors(&self, r: &Conjunction) -> Result<NeighborSet<Conjunction>> {
        if self.monotone {
            neighborhood_monotone(r, self.n, self.epsilon)
        } else {
            neighborhood_general(r, self.n, self.epsilon)
        }
    }

    /// `max Perf(r') - Perf(r)` over the neighborhood, exactly.
    pub fn best_gain(&self, f: &Conjunction, r: &Conjunction) -> Result<ExactPerf> {
        let base = exact_performance(f, r);
        let set = self.neighbors(r)?;
        Ok(set.members().iter().map(|m| exact_performance(f, m) - base).max().unwrap())
    }
}

impl PerformanceOracle for ConjunctionEvolution {
    type Target = Conjunction;
    type Rep = Conjunction;

    fn performance(&self, target: &Conjunction, rep: &Conjunction) -> f64 {
        performance(target, rep)
    }
    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint {
        self.distribution.sample(rng)
    }
    fn target_value(&self, target: &Conjunction, x: &ExamplePoint) -> f64 {
        target.value(x)
    }
    fn rep_value(&self, rep: &Conjunction, x: &ExamplePoint) -> f64 {
        rep.value(x)
    }
}

impl EvolutionAlgorithm for ConjunctionEvolution {
    fn neighborhood(&self, rep: &Conjunction, _rng: &mut dyn RngCore) -> Result<NeighborSet<Conjunction>> {
        self.neighbors(rep)
    }
    fn tolerance(&self, _rep: &Conjunction) -> f64 {
        self.tolerance
    }
}

/// One drift step. Non-constant policies only move long targets, so every
/// step changes the error by at most `delta`; that bound is checked with the
/// exact oracle.
pub fn drift_step(
    f: &Conjunction,
    n: usize,
    policy: DriftPolicy,
    delta: f64,
    rng: &mut dyn RngCore,
) -> Result<Conjunction> {
    let min_len = min_long_length(delta);
    let fresh_sign = |rng: &mut dyn RngCore| f.is_monotone() || rng.random::<bool>();
    let absent: Vec<usize> = bits(!f.vars() & mask(n)).collect();
    let present: Vec<usize> = bits(f.vars()).collect();
    let next = match policy {
        DriftPolicy::Constant => return Ok(*f),
        DriftPolicy::LongSwap => {
            if f.len() < min_len.max(1) || absent.is_empty() {
                return Err(Error::DriftInfeasible(format!(
                    "swap drift needs {} <= |f| < n, got |f| = {} with n = {n}",
                    min_len.max(1),
                    f.len()
                )));
            }
            let out = present[rng.random_range(0..present.len())];
            let inn = absent[rng.random_range(0..absent.len())];
            f.without(out).with(inn, f.is_positive(out))
        }
        DriftPolicy::LongShrinkGrow => {
            let can_grow = !absent.is_empty() && f.len() >= min_len;
            let can_shrink = f.len() > min_len;
            match (can_grow, can_shrink) {
                (false, false) => {
                    return Err(Error::DriftInfeasible(format!(
                        "shrink/grow drift needs |f| >= {min_len} and room to move, got |f| = {} with n = {n}",
                        f.len()
                    )))
                }
                (true, s) if !s || rng.random::<bool>() => {
                    let inn = absent[rng.random_range(0..absent.len())];
                    let sign = fresh_sign(rng);
                    f.with(inn, sign)
                }
                _ => f.without(present[rng.random_range(0..present.len())]),
            }
        }
        other => {
            return Err(Error::InvalidParameter(format!("{other:?} drift does not apply to conjunctions")))
        }
    };
    let err = (1.0 - performance(f, &next)) / 2.0;
    if err > delta + 1e-12 {
        return Err(Error::DriftInfeasible(format!("step error {err:e} exceeds {delta:e}")));
    }
    Ok(next)
}

/// Seeded conjunction drift schedule.
#[derive(Debug, Clone)]
pub struct ConjunctionDrift {
    target: Conjunction,
    n: usize,
    policy: DriftPolicy,
    delta: f64,
    rng: ChaCha8Rng,
}

impl ConjunctionDrift {
    pub fn new(target: Conjunction, n: usize, policy: DriftPolicy, delta: f64, seed: u64) -> Result<Self> {
        check_rep(&target, n, n)?;
        if policy != DriftPolicy::Constant {
            if !(delta > 0.0) {
                return Err(Error::DriftInfeasible(format!("{policy:?} drift needs delta > 0")));
            }
            // dry run so a bad configuration is refused up front
            let mut probe = ChaCha8Rng::seed_from_u64(seed);
            drift_step(&target, n, policy, delta, &mut probe)?;
        }
        Ok(ConjunctionDrift { target, n, policy, delta, rng: ChaCha8Rng::seed_from_u64(seed) })
    }
}

impl DriftSchedule for ConjunctionDrift {
    type Target = Conjunction;
    fn current(&self) -> &Conjunction {
        &self.target
    }
    fn advance(&mut self) -> Result<bool> {
        let next = drift_step(&self.target, self.n, self.policy, self.delta, &mut self.rng)?;
        let changed = next != self.target;
        self.target = next;
        Ok(changed)
    }
}
