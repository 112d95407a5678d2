//! Frequency model for generating `scf.while`.
//!
//! `N` ops precede the while in its block and `K` ops fill its condition
//! region, each geometric with parameter `p_g` on `{0, 1, ...}`. Their sum
//! `S = N + K` has `P(S = s) = (s + 1) p_g^2 (1 - p_g)^s`. The while can be
//! generated iff at least one of the `S` ops yields a boolean, each
//! independently with probability `p_bool`.
//!
//! Series are truncated with the tail majorant
//! `P(S >= m) = (1 - p_g)^m (1 + m p_g)`, which bounds every summand of the
//! success series as well.

use std::collections::BTreeMap;

use num_traits::Float;
use rayon::prelude::*;
use thiserror::Error;

use crate::genkit::rng::{derive_seed, SplitMix64};
use crate::genkit::{generate_with, AttemptCounts, GenConfig, GenError};
use crate::ir::OpKind;

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
#[error("invalid frequency model: {0}")]
pub struct ParamError(&'static str);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreqModelParams<T> {
    /// In `(0, 1)`.
    pub p_g: T,
    /// In `[0, 1]`.
    pub p_bool: T,
}

impl<T: Float> FreqModelParams<T> {
    pub fn new(p_g: T, p_bool: T) -> Result<Self, ParamError> {
        if !(p_g > T::zero() && p_g < T::one()) {
            return Err(ParamError("p_g must lie in (0, 1)"));
        }
        if !(p_bool >= T::zero() && p_bool <= T::one()) {
            return Err(ParamError("p_bool must lie in [0, 1]"));
        }
        Ok(FreqModelParams { p_g, p_bool })
    }

    fn q(&self) -> T {
        T::one() - self.p_g
    }

    /// `P(S >= m)`.
    pub fn tail_bound(&self, m: u64) -> T {
        let m_t = T::from(m).expect("count fits the float type");
        pow(self.q(), m) * (T::one() + m_t * self.p_g)
    }
}

fn pow<T: Float>(x: T, n: u64) -> T {
    match i32::try_from(n) {
        Ok(n) => x.powi(n),
        Err(_) => x.powf(T::from(n).expect("count fits the float type")),
    }
}

/// `P(S = s) = (s + 1) p_g^2 (1 - p_g)^s`.
pub fn length_sum_pmf<T: Float>(params: &FreqModelParams<T>, s: u64) -> T {
    let s_t = T::from(s).expect("count fits the float type");
    (s_t + T::one()) * params.p_g * params.p_g * pow(params.q(), s)
}

/// Sums `f(s) * P(S = s)` for `s = 0, 1, ...` until the tail bound drops
/// below `tolerance`; `f` must lie in `[0, 1]`.
fn truncated_sum<T: Float>(params: &FreqModelParams<T>, tolerance: T, f: impl Fn(u64) -> T) -> T {
    let mut total = T::zero();
    let mut s = 0u64;
    while params.tail_bound(s) >= tolerance {
        total = total + f(s) * length_sum_pmf(params, s);
        s += 1;
    }
    total
}

/// `sum_s P(S = s)`, which is 1 up to the truncation tolerance.
pub fn pmf_total<T: Float>(params: &FreqModelParams<T>, tolerance: T) -> T {
    truncated_sum(params, tolerance, |_| T::one())
}

/// `P(while generated | while chosen) = sum_s (1 - (1 - p_bool)^s) P(S = s)`.
pub fn while_success_probability<T: Float>(params: &FreqModelParams<T>, tail_tolerance: T) -> T {
    let miss = T::one() - params.p_bool;
    let p = truncated_sum(params, tail_tolerance, |s| T::one() - pow(miss, s));
    p.max(T::zero()).min(T::one())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_successes(successes: u64, trials: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Estimate {
            value: p,
            standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }
}

fn geometric(rng: &mut SplitMix64, p: f64) -> u64 {
    let mut n = 0;
    while !rng.bernoulli(p) {
        n += 1;
    }
    n
}

/// Simulates the idealized process: draw `N` and `K`, flip `p_bool` for
/// each of the `N + K` ops, succeed iff any flip comes up true.
pub fn monte_carlo_while<T: Float>(params: &FreqModelParams<T>, trials: u64, seed: u64) -> Estimate {
    assert!(trials >= 1, "at least one trial");
    let p_g = params.p_g.to_f64().expect("finite");
    let p_bool = params.p_bool.to_f64().expect("finite");
    let mut rng = SplitMix64::new(seed);
    let mut successes = 0;
    for _ in 0..trials {
        let s = geometric(&mut rng, p_g) + geometric(&mut rng, p_g);
        if (0..s).any(|_| rng.bernoulli(p_bool)) {
            successes += 1;
        }
    }
    Estimate::from_successes(successes, trials)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpFrequency {
    pub chosen: u64,
    pub generated: u64,
    pub produced_bool: u64,
}

impl OpFrequency {
    /// Share of attempts that inserted the op.
    pub fn success_fraction(&self) -> f64 {
        if self.chosen == 0 {
            0.0
        } else {
            self.generated as f64 / self.chosen as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyReport {
    pub programs: u64,
    /// Keyed by op name; ops never chosen are absent.
    pub ops: BTreeMap<String, OpFrequency>,
}

impl FrequencyReport {
    pub fn total_generated(&self) -> u64 {
        self.ops.values().map(|f| f.generated).sum()
    }

    /// Share of all inserted ops that are `name`.
    pub fn occurrence(&self, name: &str) -> f64 {
        let total = self.total_generated();
        match self.ops.get(name) {
            Some(f) if total > 0 => f.generated as f64 / total as f64,
            _ => 0.0,
        }
    }

    /// Share of inserted ops with an `i1` result: the empirical `p_bool`.
    pub fn bool_producer_fraction(&self) -> f64 {
        let total = self.total_generated();
        if total == 0 {
            return 0.0;
        }
        self.ops.values().map(|f| f.produced_bool).sum::<u64>() as f64 / total as f64
    }

    /// `op, chosen, generated, success_fraction, occurrence` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("op\tchosen\tgenerated\tsuccess_fraction\toccurrence\n");
        for (name, f) in &self.ops {
            out.push_str(&format!(
                "{name}\t{}\t{}\t{:.6}\t{:.6}\n",
                f.chosen,
                f.generated,
                f.success_fraction(),
                self.occurrence(name)
            ));
        }
        out
    }
}

/// Generates programs `0..n_programs` (seeds derived from `config.seed` as in
/// a campaign) and totals the selection loop's per-op attempt counters.
pub fn measure_op_frequencies(config: &GenConfig, n_programs: u64) -> Result<FrequencyReport, GenError> {
    config.validate()?;
    let suite = crate::dialects::standard_suite();
    let per_program: Vec<BTreeMap<OpKind, AttemptCounts>> = (0..n_programs)
        .into_par_iter()
        .map(|i| {
            let cfg = GenConfig {
                seed: derive_seed(config.seed, i),
                ..config.clone()
            };
            generate_with(&suite, &cfg).map(|g| g.counts)
        })
        .collect::<Result<_, _>>()?;
    let mut ops: BTreeMap<String, OpFrequency> = BTreeMap::new();
    for counts in per_program {
        for (kind, c) in counts {
            let f = ops.entry(kind.name().to_string()).or_default();
            f.chosen += c.chosen;
            f.generated += c.generated;
            f.produced_bool += c.produced_bool;
        }
    }
    Ok(FrequencyReport {
        programs: n_programs,
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p_g: f64, p_bool: f64) -> FreqModelParams<f64> {
        FreqModelParams::new(p_g, p_bool).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert!((length_sum_pmf(&params(0.2, 0.0), 0) - 0.04).abs() < 1e-15);
        assert!((length_sum_pmf(&params(0.5, 0.0), 1) - 0.25).abs() < 1e-15);
        let total: f64 = (0..=2000).map(|s| length_sum_pmf(&params(0.2, 0.0), s)).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tail_bound_is_exact_tail() {
        let p = params(0.3, 0.0);
        for m in [0, 1, 5, 20] {
            let head: f64 = (0..m).map(|s| length_sum_pmf(&p, s)).sum();
            assert!((1.0 - head - p.tail_bound(m)).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn success_probability_edges() {
        assert_eq!(while_success_probability(&params(0.2, 0.0), 1e-12), 0.0);
        let all = while_success_probability(&params(0.2, 1.0), 1e-12);
        assert!((all - 0.96).abs() < 1e-11);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(FreqModelParams::new(0.0, 0.5).is_err());
        assert!(FreqModelParams::new(1.0, 0.5).is_err());
        assert!(FreqModelParams::new(0.5, 1.5).is_err());
        assert!(FreqModelParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn f32_agrees_with_f64() {
        let p32 = FreqModelParams::<f32>::new(0.2, 1.0 / 90.0).unwrap();
        let a = while_success_probability(&p32, 1e-9) as f64;
        let b = while_success_probability(&params(0.2, 1.0 / 90.0), 1e-12);
        assert!((a - b).abs() < 1e-5);
    }
}
