//! Synthetic city instances.
//!
//! `HamburgLike` lays cells on a square 1 km grid around a city center. Peak
//! load is log-normal with a median that falls from ~40 MW in the core to the
//! 50 kW floor at the edge, clamped to [50 kW, 60 MW]. Street length grows
//! with load density. The densest tenth of cells already has district
//! heating. Heat demand is peak load times a fixed number of full-load hours.
//!
//! `Uniform` draws peak load uniformly in [50 kW, 60 MW], street length
//! uniformly in [1, 25] km, and marks each cell as district heated with
//! probability 0.1, without spatial structure.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::CellRecord;

pub const FULL_LOAD_HOURS: f64 = 2000.0;
pub const MIN_PEAK_KW: f64 = 50.0;
pub const MAX_PEAK_KW: f64 = 60_000.0;

const CENTER_LON: f64 = 9.99;
const CENTER_LAT: f64 = 53.55;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    HamburgLike,
    Uniform,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamburg_like" => Ok(Profile::HamburgLike),
            "uniform" => Ok(Profile::Uniform),
            other => Err(Error::Invalid(format!(
                "unknown profile `{other}` (expected hamburg_like or uniform)"
            ))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::HamburgLike => "hamburg_like",
            Profile::Uniform => "uniform",
        })
    }
}

pub fn synthesize_instance(n_cells: usize, seed: u64, profile: Profile) -> Result<Vec<CellRecord>> {
    synthesize_instance_with(n_cells, seed, profile, FULL_LOAD_HOURS)
}

pub fn synthesize_instance_with(
    n_cells: usize,
    seed: u64,
    profile: Profile,
    full_load_hours: f64,
) -> Result<Vec<CellRecord>> {
    if n_cells == 0 {
        return Err(Error::Invalid("n_cells must be at least 1".into()));
    }
    if !full_load_hours.is_finite() || full_load_hours <= 0.0 {
        return Err(Error::Invalid("full_load_hours must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (n_cells as f64).sqrt().ceil() as usize;
    let rows = n_cells.div_ceil(cols);
    let (rc, cc) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    let max_dist = (rc * rc + cc * cc).sqrt().max(1.0);
    let span = (MAX_PEAK_KW / MIN_PEAK_KW).ln();
    let deg_lat = 1.0 / 110.574;
    let deg_lon = 1.0 / (111.320 * CENTER_LAT.to_radians().cos());
    let load_noise = Normal::<f64>::new(0.0, 0.45).expect("valid normal");
    let street_noise = Normal::<f64>::new(0.0, 0.15).expect("valid normal");

    let mut cells: Vec<CellRecord> = (0..n_cells)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let (dr, dc) = (r as f64 - rc, c as f64 - cc);
            let rho = (dr * dr + dc * dc).sqrt() / max_dist;
            let peak = match profile {
                Profile::HamburgLike => {
                    let ln_median = MIN_PEAK_KW.ln() + 0.95 * span * (1.0 - rho).powf(1.3);
                    (ln_median + load_noise.sample(&mut rng)).exp()
                }
                Profile::Uniform => rng.random_range(MIN_PEAK_KW..=MAX_PEAK_KW),
            }
            .clamp(MIN_PEAK_KW, MAX_PEAK_KW)
            .round();
            let street = match profile {
                Profile::HamburgLike => {
                    let density = (peak / MIN_PEAK_KW).ln() / span;
                    (2000.0 + 18_000.0 * density) * street_noise.sample(&mut rng).exp()
                }
                Profile::Uniform => rng.random_range(1000.0..=25_000.0),
            }
            .round();
            let dh = profile == Profile::Uniform && rng.random_bool(0.1);
            CellRecord::new(format!("r{r:03}c{c:03}"), peak * full_load_hours, peak, street, dh)
                .with_centroid(CENTER_LON + dc * deg_lon, CENTER_LAT - dr * deg_lat)
        })
        .collect();

    if profile == Profile::HamburgLike {
        let mut by_load: Vec<usize> = (0..n_cells).collect();
        by_load.sort_by(|&a, &b| cells[b].peak_kw.total_cmp(&cells[a].peak_kw).then(a.cmp(&b)));
        for &k in &by_load[..n_cells.div_ceil(10)] {
            cells[k].has_district_heating = true;
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_cells;

    #[test]
    fn deterministic() {
        let a = synthesize_instance(750, 7, Profile::HamburgLike).unwrap();
        assert_eq!(a, synthesize_instance(750, 7, Profile::HamburgLike).unwrap());
        assert_ne!(a, synthesize_instance(750, 8, Profile::HamburgLike).unwrap());
        assert_eq!(a.len(), 750);
    }

    #[test]
    fn cells_are_valid() {
        for profile in [Profile::HamburgLike, Profile::Uniform] {
            let cells = synthesize_instance(300, 1, profile).unwrap();
            validate_cells(&cells).unwrap();
            for c in &cells {
                assert!((MIN_PEAK_KW..=MAX_PEAK_KW).contains(&c.peak_kw));
                assert_eq!(c.heat_kwh_a, c.peak_kw * FULL_LOAD_HOURS);
                assert_eq!(c.peak_kw.fract(), 0.0);
                assert!(c.centroid.is_some());
            }
        }
    }

    #[test]
    fn density_spans_threshold() {
        // 10 MW per 1 km² cell.
        let cells = synthesize_instance(750, 7, Profile::HamburgLike).unwrap();
        let dense = cells.iter().filter(|c| c.peak_kw > 10_000.0).count();
        let sparse = cells.iter().filter(|c| c.peak_kw < 10_000.0).count();
        assert!(dense >= 10, "{dense} dense cells");
        assert!(sparse >= 375, "{sparse} sparse cells");
    }

    #[test]
    fn district_heating_in_densest_decile() {
        let cells = synthesize_instance(750, 7, Profile::HamburgLike).unwrap();
        let dh: Vec<&CellRecord> = cells.iter().filter(|c| c.has_district_heating).collect();
        assert_eq!(dh.len(), 75);
        let min_dh = dh.iter().map(|c| c.peak_kw).fold(f64::MAX, f64::min);
        let max_other = cells
            .iter()
            .filter(|c| !c.has_district_heating)
            .map(|c| c.peak_kw)
            .fold(0.0, f64::max);
        assert!(min_dh >= max_other);
    }

    #[test]
    fn rejects_empty() {
        assert!(synthesize_instance(0, 1, Profile::Uniform).is_err());
        assert_eq!("uniform".parse::<Profile>().unwrap(), Profile::Uniform);
        assert!("dense".parse::<Profile>().is_err());
    }
}
