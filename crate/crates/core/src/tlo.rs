//! Thresholded lexicographic ordering (TLO) over reward vectors.
//!
//! Objectives `1..n-1` carry a threshold and are clipped to it; the final
//! objective is unthresholded. Clipped vectors are then compared
//! lexicographically, first objective first.

use std::cmp::Ordering;

use rand::Rng;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reward::RewardVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Decimal>", into = "Vec<Decimal>")]
pub struct TloUtility {
    thresholds: Vec<Decimal>,
    thresholds_f64: Vec<f64>,
}

impl TloUtility {
    /// Thresholds for objectives `1..n-1`; the utility then applies to
    /// `thresholds.len() + 1` objectives.
    pub fn new(thresholds: Vec<Decimal>) -> Self {
        let thresholds_f64 = thresholds
            .iter()
            .map(|t| t.to_f64().expect("decimal threshold fits in f64"))
            .collect();
        TloUtility {
            thresholds,
            thresholds_f64,
        }
    }

    /// Single-threshold utility for two-objective problems.
    pub fn single(threshold: Decimal) -> Self {
        TloUtility::new(vec![threshold])
    }

    pub fn thresholds(&self) -> &[Decimal] {
        &self.thresholds
    }

    pub fn objectives(&self) -> usize {
        self.thresholds.len() + 1
    }

    fn check(&self, v: &RewardVector) -> Result<()> {
        v.check_len(self.objectives())
    }

    pub fn clip(&self, v: &RewardVector) -> Result<RewardVector> {
        self.check(v)?;
        Ok(self.clip_unchecked(v))
    }

    fn clip_unchecked(&self, v: &RewardVector) -> RewardVector {
        let mut out = v.as_slice().to_vec();
        for (x, t) in out.iter_mut().zip(&self.thresholds_f64) {
            *x = x.min(*t);
        }
        RewardVector::new(out)
    }

    /// `Greater` means `a` is preferred to `b`.
    pub fn compare(&self, a: &RewardVector, b: &RewardVector) -> Result<Ordering> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.compare_unchecked(a, b))
    }

    pub(crate) fn compare_unchecked(&self, a: &RewardVector, b: &RewardVector) -> Ordering {
        let n = a.len();
        for i in 0..n {
            let (x, y) = if i + 1 < n {
                let t = self.thresholds_f64[i];
                (a[i].min(t), b[i].min(t))
            } else {
                (a[i], b[i])
            };
            match x.partial_cmp(&y).unwrap_or_else(|| x.total_cmp(&y)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Exact clip-then-lexicographic comparison on decimal vectors.
    pub fn compare_exact(&self, a: &[Decimal], b: &[Decimal]) -> Result<Ordering> {
        let n = self.objectives();
        if a.len() != n || b.len() != n {
            return Err(Error::input(format!(
                "expected {n}-objective vectors, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        for i in 0..n {
            let (x, y) = if i + 1 < n {
                let t = self.thresholds[i];
                (a[i].min(t), b[i].min(t))
            } else {
                (a[i], b[i])
            };
            match x.cmp(&y) {
                Ordering::Equal => continue,
                ord => return Ok(ord),
            }
        }
        Ok(Ordering::Equal)
    }

    pub fn clip_exact(&self, v: &[Decimal]) -> Vec<Decimal> {
        v.iter()
            .enumerate()
            .map(|(i, x)| match self.thresholds.get(i) {
                Some(t) => (*x).min(*t),
                None => *x,
            })
            .collect()
    }

    /// Whether every thresholded objective of `v` reaches its threshold.
    pub fn satisfies_exact(&self, v: &[Decimal]) -> bool {
        self.thresholds.iter().zip(v).all(|(t, x)| x >= t)
    }

    /// All indices whose value is TLO-maximal, ascending.
    pub fn argmax(&self, values: &[RewardVector]) -> Result<Vec<usize>> {
        if values.is_empty() {
            return Err(Error::input("argmax over an empty list"));
        }
        for v in values {
            self.check(v)?;
        }
        let best = self.greedy_unchecked(values);
        Ok((0..values.len())
            .filter(|&i| self.compare_unchecked(&values[i], &values[best]) == Ordering::Equal)
            .collect())
    }

    /// Lowest-index maximal element: the deterministic greedy choice.
    pub fn greedy(&self, values: &[RewardVector]) -> Result<usize> {
        self.argmax(values).map(|set| set[0])
    }

    pub(crate) fn greedy_unchecked(&self, values: &[RewardVector]) -> usize {
        let mut best = 0;
        for i in 1..values.len() {
            if self.compare_unchecked(&values[i], &values[best]) == Ordering::Greater {
                best = i;
            }
        }
        best
    }

    /// Rank of each value under the ordering: the number of values strictly
    /// preferred to it, so ties share the better rank.
    pub fn ranks(&self, values: &[RewardVector]) -> Vec<usize> {
        values
            .iter()
            .map(|v| {
                values
                    .iter()
                    .filter(|w| self.compare_unchecked(w, v) == Ordering::Greater)
                    .count()
            })
            .collect()
    }

    /// Selection probabilities of the rank softmax: `P(i) ∝ exp(-rank_i / temperature)`.
    pub fn softmax_probabilities(
        &self,
        values: &[RewardVector],
        temperature: f64,
    ) -> Result<Vec<f64>> {
        if values.is_empty() {
            return Err(Error::input("softmax over an empty list"));
        }
        if temperature.is_nan() || temperature <= 0.0 {
            return Err(Error::input(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        for v in values {
            self.check(v)?;
        }
        Ok(self.softmax_unchecked(values, temperature))
    }

    fn softmax_unchecked(&self, values: &[RewardVector], temperature: f64) -> Vec<f64> {
        let weights: Vec<f64> = self
            .ranks(values)
            .into_iter()
            .map(|r| (-(r as f64) / temperature).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Samples an index from the rank softmax.
    pub fn softmax_select<R: Rng + ?Sized>(
        &self,
        values: &[RewardVector],
        temperature: f64,
        rng: &mut R,
    ) -> Result<usize> {
        let probs = self.softmax_probabilities(values, temperature)?;
        Ok(sample_index(&probs, rng))
    }

    pub(crate) fn softmax_select_unchecked<R: Rng + ?Sized>(
        &self,
        values: &[RewardVector],
        temperature: f64,
        rng: &mut R,
    ) -> usize {
        sample_index(&self.softmax_unchecked(values, temperature), rng)
    }
}

impl TryFrom<Vec<Decimal>> for TloUtility {
    type Error = Error;

    fn try_from(thresholds: Vec<Decimal>) -> Result<Self> {
        Ok(TloUtility::new(thresholds))
    }
}

impl From<TloUtility> for Vec<Decimal> {
    fn from(u: TloUtility) -> Self {
        u.thresholds
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Free-function form of [`TloUtility::clip`].
pub fn tlo_clip(v: &RewardVector, u: &TloUtility) -> Result<RewardVector> {
    u.clip(v)
}

/// Free-function form of [`TloUtility::compare`].
pub fn tlo_compare(a: &RewardVector, b: &RewardVector, u: &TloUtility) -> Result<Ordering> {
    u.compare(a, b)
}

/// Free-function form of [`TloUtility::argmax`].
pub fn tlo_argmax(values: &[RewardVector], u: &TloUtility) -> Result<Vec<usize>> {
    u.argmax(values)
}

/// Free-function form of [`TloUtility::softmax_select`].
pub fn softmax_rank_select<R: Rng + ?Sized>(
    values: &[RewardVector],
    u: &TloUtility,
    temperature: f64,
    rng: &mut R,
) -> Result<usize> {
    u.softmax_select(values, temperature, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rust_decimal_macros::dec;

    fn v(a: f64, b: f64) -> RewardVector {
        RewardVector::from([a, b])
    }

    fn t88() -> TloUtility {
        TloUtility::single(dec!(0.88))
    }

    #[test]
    fn clip_examples() {
        let u = t88();
        assert_eq!(tlo_clip(&v(1.0, -22.0), &u).unwrap(), v(0.88, -22.0));
        assert_eq!(tlo_clip(&v(0.85, -12.0), &u).unwrap(), v(0.85, -12.0));
        assert_eq!(tlo_clip(&v(0.9, -14.5), &u).unwrap(), v(0.88, -14.5));
    }

    #[test]
    fn clip_rejects_wrong_dimension() {
        let err = t88()
            .clip(&RewardVector::from([1.0, 2.0, 3.0]))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn compare_examples() {
        let u = t88();
        assert_eq!(
            tlo_compare(&v(0.9, -14.5), &v(0.9, -19.9), &u).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            tlo_compare(&v(1.0, -22.0), &v(0.85, -12.0), &u).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            tlo_compare(&v(0.5, -3.0), &v(0.5, -3.0), &u).unwrap(),
            Ordering::Equal
        );
        assert!(u.compare(&v(0.5, -3.0), &RewardVector::zeros(3)).is_err());
    }

    #[test]
    fn argmax_examples() {
        let u = t88();
        let b_means = [v(1.0, -10.0), v(0.9, -7.9), v(0.85, 0.0)];
        assert_eq!(tlo_argmax(&b_means, &u).unwrap(), vec![1]);
        assert_eq!(
            tlo_argmax(&[v(0.0, 0.0), v(0.0, 0.0)], &u).unwrap(),
            vec![0, 1]
        );
        assert_eq!(tlo_argmax(&[v(0.5, -1.0)], &u).unwrap(), vec![0]);
        assert!(matches!(tlo_argmax(&[], &u), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn softmax_rejects_bad_temperature() {
        let u = t88();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                softmax_rank_select(&[v(0.0, 0.0)], &u, t, &mut rng),
                Err(Error::InvalidInput(_))
            ));
        }
    }

    #[test]
    fn softmax_two_ranks_at_temperature_two() {
        // e^0 / (e^0 + e^-0.5), evaluated by hand.
        let expected = 1.0 / (1.0 + (-0.5f64).exp());
        assert!((expected - 0.6225).abs() < 5e-5);
        let u = t88();
        let values = [v(0.0, -1.0), v(0.0, 0.0)];
        let probs = u.softmax_probabilities(&values, 2.0).unwrap();
        assert!((probs[1] - expected).abs() < 1e-15);

        // Monte-Carlo cross-check within 3 standard errors.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| softmax_rank_select(&values, &u, 2.0, &mut rng).unwrap() == 1)
            .count();
        let freq = hits as f64 / draws as f64;
        let se = (expected * (1.0 - expected) / draws as f64).sqrt();
        assert!(
            (freq - expected).abs() < 3.0 * se,
            "freq {freq} vs {expected}"
        );
    }

    #[test]
    fn softmax_uniform_limits() {
        let u = t88();
        let distinct = [v(1.0, 0.0), v(0.5, 0.0), v(0.0, 0.0), v(0.0, -9.0)];
        for p in u.softmax_probabilities(&distinct, f64::INFINITY).unwrap() {
            assert_eq!(p, 0.25);
        }
        for p in u.softmax_probabilities(&distinct, 1e12).unwrap() {
            assert!((p - 0.25).abs() < 1e-9);
        }
        let same = vec![v(0.3, -1.0); 3];
        for t in [0.1, 2.0, 10.0] {
            for p in u.softmax_probabilities(&same, t).unwrap() {
                assert!((p - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ties_share_the_better_rank() {
        let u = t88();
        let values = [v(0.9, -1.0), v(1.0, -1.0), v(0.5, 0.0)];
        assert_eq!(u.ranks(&values), vec![0, 0, 2]);
    }

    fn arb_vec() -> impl Strategy<Value = RewardVector> {
        // A coarse grid makes ties and threshold crossings common.
        (-4i32..=14, -6i32..=2).prop_map(|(a, b)| v(a as f64 * 0.1, b as f64))
    }

    proptest! {
        #[test]
        fn compare_is_a_total_preorder(a in arb_vec(), b in arb_vec(), c in arb_vec()) {
            let u = t88();
            let ab = u.compare(&a, &b).unwrap();
            prop_assert_eq!(ab, u.compare(&b, &a).unwrap().reverse());
            prop_assert_eq!(u.compare(&a, &a).unwrap(), Ordering::Equal);
            let bc = u.compare(&b, &c).unwrap();
            if ab != Ordering::Less && bc != Ordering::Less {
                prop_assert_ne!(u.compare(&a, &c).unwrap(), Ordering::Less);
            }
        }

        #[test]
        fn clip_is_idempotent(a in arb_vec()) {
            let u = t88();
            let once = u.clip(&a).unwrap();
            prop_assert_eq!(u.clip(&once).unwrap(), once);
        }

        #[test]
        fn argmax_ignores_shift_of_final_objective(
            values in prop::collection::vec(arb_vec(), 1..6),
            shift in 1u32..50,
        ) {
            let u = t88();
            let shifted: Vec<_> = values.iter().map(|x| v(x[0], x[1] + shift as f64)).collect();
            prop_assert_eq!(u.argmax(&values).unwrap(), u.argmax(&shifted).unwrap());
        }
    }
}
