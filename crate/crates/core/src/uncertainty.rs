//! Proportional interval uncertainty on carrier prices.
//!
//! Each price may deviate from its nominal value by a fraction `delta` of
//! that value. Both electricity-based technologies share one deviation, as do
//! both hydrogen-based ones, so the set is a box with two independent axes.
//! Lower endpoints are floored at zero.
//!
//! Prices enter the planning objective only through terms of the form
//! `price * heat / efficiency`, all nonnegative. For any fixed plan the worst
//! realization is therefore the upper corner of the box, and the min-max
//! problem reduces to one deterministic solve at those prices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Carrier, PerTech, PriceVector, Technology};

/// Absolute slack used by [`UncertaintyBox::contains`].
pub const CONTAINS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBox {
    pub nominal: PriceVector,
    pub delta_electricity: f64,
    pub delta_hydrogen: f64,
}

impl UncertaintyBox {
    pub fn new(nominal: PriceVector, delta_electricity: f64, delta_hydrogen: f64) -> Result<Self> {
        let b = UncertaintyBox {
            nominal,
            delta_electricity,
            delta_hydrogen,
        };
        b.validate()?;
        Ok(b)
    }

    /// A box with zero deviation, containing only `nominal`.
    pub fn degenerate(nominal: PriceVector) -> Self {
        UncertaintyBox {
            nominal,
            delta_electricity: 0.0,
            delta_hydrogen: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.nominal.validate()?;
        for (name, d) in [
            ("delta_electricity", self.delta_electricity),
            ("delta_hydrogen", self.delta_hydrogen),
        ] {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidBox(format!("{name} must be finite and >= 0, got {d}")));
            }
        }
        Ok(())
    }

    pub fn delta(&self, carrier: Carrier) -> f64 {
        match carrier {
            Carrier::Electricity => self.delta_electricity,
            Carrier::Hydrogen => self.delta_hydrogen,
        }
    }

    /// Relative factor range `[max(0, 1 - delta), 1 + delta]` of a carrier.
    fn factor_range(&self, carrier: Carrier) -> (f64, f64) {
        let d = self.delta(carrier);
        ((1.0 - d).max(0.0), 1.0 + d)
    }

    pub fn lower(&self, tech: Technology) -> f64 {
        (self.nominal[tech] * (1.0 - self.delta(tech.carrier()))).max(0.0)
    }

    pub fn upper(&self, tech: Technology) -> f64 {
        self.nominal[tech] * (1.0 + self.delta(tech.carrier()))
    }

    pub fn contains(&self, prices: &PriceVector) -> bool {
        Technology::ALL.iter().all(|&t| {
            let p = prices[t];
            p >= self.lower(t) - CONTAINS_SLACK && p <= self.upper(t) + CONTAINS_SLACK
        })
    }

    /// The upper vertex of the box.
    pub fn worst_case_prices(&self) -> PriceVector {
        PriceVector(PerTech::from_fn(|t| self.upper(t)))
    }

    /// The four corners, ordered (el low, h2 low), (el low, h2 high),
    /// (el high, h2 low), (el high, h2 high).
    pub fn vertices(&self) -> Vec<PriceVector> {
        let mut out = Vec::with_capacity(4);
        for el_high in [false, true] {
            for h2_high in [false, true] {
                out.push(PriceVector(PerTech::from_fn(|t| {
                    let high = match t.carrier() {
                        Carrier::Electricity => el_high,
                        Carrier::Hydrogen => h2_high,
                    };
                    if high {
                        self.upper(t)
                    } else {
                        self.lower(t)
                    }
                })));
            }
        }
        out
    }

    /// The `index`-th price sample of the stream identified by `seed`.
    ///
    /// Each sample has its own ChaCha stream, so a sample depends only on
    /// `(seed, index)` and not on evaluation order.
    pub fn sample_at(&self, seed: u64, index: u64) -> PriceVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut draw = |carrier| {
            let (lo, hi) = self.factor_range(carrier);
            if lo < hi {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        };
        let el = draw(Carrier::Electricity);
        let h2 = draw(Carrier::Hydrogen);
        PriceVector(PerTech::from_fn(|t| {
            let factor = match t.carrier() {
                Carrier::Electricity => el,
                Carrier::Hydrogen => h2,
            };
            // Clamp guards the last ulp so every sample passes `contains`.
            (self.nominal[t] * factor).clamp(self.lower(t), self.upper(t))
        }))
    }

    /// `n` samples, uniform and independent per carrier axis.
    pub fn sample_prices(&self, n: usize, seed: u64) -> Vec<PriceVector> {
        (0..n as u64).into_par_iter().map(|i| self.sample_at(seed, i)).collect()
    }
}
