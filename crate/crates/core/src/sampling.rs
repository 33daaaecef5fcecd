//! Collocation sets for training and the equispaced evaluation grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{encode_law, LawId};
use crate::error::{Error, Result};
use crate::mlp::SamplePoint;
use crate::physics::Stratum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    pub per_law_total: usize,
    pub interior_fraction: f64,
    pub top_fraction: f64,
    pub bottom_fraction: f64,
    pub initial_fraction: f64,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            per_law_total: 1000,
            interior_fraction: 0.7,
            top_fraction: 0.1,
            bottom_fraction: 0.1,
            initial_fraction: 0.1,
            seed: 0,
        }
    }
}

const STRATA: [Stratum; 4] = [
    Stratum::Interior,
    Stratum::Top,
    Stratum::Bottom,
    Stratum::Initial,
];

impl SamplingPlan {
    fn fractions(&self) -> [f64; 4] {
        [
            self.interior_fraction,
            self.top_fraction,
            self.bottom_fraction,
            self.initial_fraction,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.fractions();
        if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "stratum fractions must be non-negative, got {f:?}"
            )));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "stratum fractions sum to {sum}, expected 1"
            )));
        }
        if self.per_law_total < 4 {
            return Err(Error::InvalidConfig(format!(
                "per_law_total = {} must be at least 4",
                self.per_law_total
            )));
        }
        Ok(())
    }

    /// Per-law sample counts for interior, top, bottom and initial strata.
    ///
    /// Largest-remainder rounding, then every stratum with a positive
    /// fraction is given at least one point.
    pub fn stratum_counts(&self) -> [usize; 4] {
        let total = self.per_law_total;
        let f = self.fractions();
        let exact: Vec<f64> = f.iter().map(|v| v * total as f64).collect();
        let mut counts: [usize; 4] = std::array::from_fn(|i| exact[i].floor() as usize);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut assigned: usize = counts.iter().sum();
        for &i in order.iter().cycle() {
            if assigned >= total {
                break;
            }
            if f[i] > 0.0 {
                counts[i] += 1;
                assigned += 1;
            }
        }
        for i in 0..4 {
            if f[i] > 0.0 && counts[i] == 0 {
                let donor = (0..4)
                    .max_by_key(|&k| (counts[k], std::cmp::Reverse(k)))
                    .unwrap();
                counts[donor] -= 1;
                counts[i] = 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub samples: Vec<SamplePoint>,
    pub strata: Vec<Stratum>,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, law: LawId, stratum: Stratum) -> usize {
        self.samples
            .iter()
            .zip(&self.strata)
            .filter(|(p, s)| p.law.law() == law && **s == stratum)
            .count()
    }
}

/// Uniform draw from the open interval (0, 1).
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

/// Uniform draw from (0, 1].
fn half_open_unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Draws `per_law_total` points for every law, grouped by law then stratum.
pub fn sample_training_set(plan: &SamplingPlan, laws: &[LawId]) -> Result<CollocationSet> {
    plan.validate()?;
    if laws.is_empty() {
        return Err(Error::InvalidConfig(
            "no constitutive laws requested".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let counts = plan.stratum_counts();
    let mut samples = Vec::with_capacity(plan.per_law_total * laws.len());
    let mut strata = Vec::with_capacity(samples.capacity());
    for &law in laws {
        let e = encode_law(law);
        for (stratum, &n) in STRATA.iter().zip(&counts) {
            for _ in 0..n {
                let (x, t) = match stratum {
                    Stratum::Interior => (open_unit(&mut rng), half_open_unit(&mut rng)),
                    Stratum::Top => (0.0, half_open_unit(&mut rng)),
                    Stratum::Bottom => (1.0, half_open_unit(&mut rng)),
                    Stratum::Initial => (open_unit(&mut rng), 0.0),
                };
                samples.push(SamplePoint::new(x, t, e));
                strata.push(*stratum);
            }
        }
    }
    Ok(CollocationSet { samples, strata })
}

/// Equispaced evaluation points, `t`-major: `X_i = i / (n_x - 1)` and
/// `t_j = (j + 1) / n_t`, so the `t = 0` row is excluded.
pub fn test_grid(n_x: usize, n_t: usize) -> Result<Vec<(f64, f64)>> {
    if n_x < 2 || n_t < 1 {
        return Err(Error::InvalidConfig(format!(
            "test grid needs n_x >= 2 and n_t >= 1, got {n_x} x {n_t}"
        )));
    }
    let mut pts = Vec::with_capacity(n_x * n_t);
    for j in 0..n_t {
        let t = grid_time(j, n_t);
        for i in 0..n_x {
            pts.push((i as f64 / (n_x - 1) as f64, t));
        }
    }
    Ok(pts)
}

/// `t` coordinate of row `j` of [`test_grid`].
pub fn grid_time(j: usize, n_t: usize) -> f64 {
    (j + 1) as f64 / n_t as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_plan_split() {
        let plan = SamplingPlan {
            seed: 42,
            ..Default::default()
        };
        let set = sample_training_set(&plan, &LawId::ALL).unwrap();
        assert_eq!(set.len(), 3000);
        for law in LawId::ALL {
            assert_eq!(set.count(law, Stratum::Interior), 700);
            assert_eq!(set.count(law, Stratum::Top), 100);
            assert_eq!(set.count(law, Stratum::Bottom), 100);
            assert_eq!(set.count(law, Stratum::Initial), 100);
        }
    }

    #[test]
    fn reproducible_and_seed_dependent() {
        let plan = SamplingPlan {
            seed: 42,
            ..Default::default()
        };
        let a = sample_training_set(&plan, &LawId::ALL).unwrap();
        let b = sample_training_set(&plan, &LawId::ALL).unwrap();
        assert_eq!(a, b);
        let c = sample_training_set(&SamplingPlan { seed: 43, ..plan }, &LawId::ALL).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn interior_only_plan() {
        let plan = SamplingPlan {
            interior_fraction: 1.0,
            top_fraction: 0.0,
            bottom_fraction: 0.0,
            initial_fraction: 0.0,
            ..Default::default()
        };
        let set = sample_training_set(&plan, &[LawId::NeoHookean]).unwrap();
        assert_eq!(set.len(), 1000);
        assert!(set.strata.iter().all(|s| *s == Stratum::Interior));
    }

    #[test]
    fn invalid_plans() {
        assert!(sample_training_set(&SamplingPlan::default(), &[]).is_err());
        let bad = SamplingPlan {
            interior_fraction: 0.6,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let tiny = SamplingPlan {
            per_law_total: 3,
            ..Default::default()
        };
        assert!(tiny.validate().is_err());
    }

    #[test]
    fn grid_shape() {
        let g = test_grid(100, 100).unwrap();
        assert_eq!(g.len(), 10_000);
        assert_eq!(g[0], (0.0, 0.01));
        assert_eq!(*g.last().unwrap(), (1.0, 1.0));
        for w in g[..100].windows(2) {
            assert!((w[1].0 - w[0].0 - 1.0 / 99.0).abs() < 1e-15);
        }
        assert!(test_grid(1, 10).is_err());
    }

    proptest! {
        #[test]
        fn strata_match_coordinates(
            total in 4usize..200,
            w in prop::array::uniform4(0u32..10),
            seed in 0u64..1000,
        ) {
            let sum: u32 = w.iter().sum();
            prop_assume!(sum > 0);
            let f: Vec<f64> = w.iter().map(|&v| v as f64 / sum as f64).collect();
            let rest = 1.0 - f[0] - f[1] - f[2];
            let plan = SamplingPlan {
                per_law_total: total,
                interior_fraction: f[0],
                top_fraction: f[1],
                bottom_fraction: f[2],
                initial_fraction: rest,
                seed,
            };
            prop_assume!(plan.validate().is_ok());
            let set = sample_training_set(&plan, &LawId::ALL).unwrap();
            prop_assert_eq!(set.len(), 3 * total);
            for (p, s) in set.samples.iter().zip(&set.strata) {
                prop_assert_eq!(Stratum::of(p.x_hat, p.t_hat), *s);
                prop_assert!((0.0..=1.0).contains(&p.x_hat) && (0.0..=1.0).contains(&p.t_hat));
            }
            let counts = plan.stratum_counts();
            for (c, fr) in counts.iter().zip([f[0], f[1], f[2], rest]) {
                if fr > 0.0 { prop_assert!(*c > 0); }
            }
        }
    }
}
