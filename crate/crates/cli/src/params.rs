//! Link parameters shared by every subcommand and their resolution into
//! concrete apertures.

use std::str::FromStr;

use losmimo::design::max_rayleigh_elements;
use losmimo::geometry::whole_intervals;
use losmimo::{optimal_spacing, sample_continuous, Aperture, Error, LinkGeometry, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Half,
    Optimal,
    Custom(f64),
}

impl FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "half" => Ok(Spacing::Half),
            "optimal" => Ok(Spacing::Optimal),
            _ => match s.strip_prefix("custom:") {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|e| format!("bad custom spacing `{v}`: {e}"))
                    .and_then(|d| {
                        if d.is_finite() && d > 0.0 {
                            Ok(Spacing::Custom(d))
                        } else {
                            Err(format!("custom spacing must be positive, got {d}"))
                        }
                    }),
                None => Err(format!("expected half, optimal or custom:<m>, got `{s}`")),
            },
        }
    }
}

/// Fully resolved numeric link description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub wavelength: f64,
    pub distance: f64,
    pub l_tx: f64,
    pub l_rx: f64,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub spacing: Option<Spacing>,
    pub sample_spacing: Option<f64>,
}

impl LinkParams {
    pub fn geometry(&self) -> Result<LinkGeometry> {
        LinkGeometry::new(self.wavelength, self.distance)
    }

    pub fn sample_spacing(&self) -> f64 {
        self.sample_spacing.unwrap_or(self.wavelength / 4.0)
    }

    /// Transmit and receive apertures implied by the spacing flags.
    ///
    /// Without `--spacing` the link is a pair of MIMO-lines sampled at
    /// `--sample-spacing` (or evenly spaced `--n`/`--m` elements when counts
    /// are given).
    pub fn apertures(&self) -> Result<(Aperture, Aperture)> {
        let lam = self.wavelength;
        let m = self.m.or(self.n);
        match self.spacing {
            None => match (self.n, m) {
                (Some(n), Some(m)) => Ok((
                    Aperture::evenly_spaced(self.l_tx, n)?,
                    Aperture::evenly_spaced(self.l_rx, m)?,
                )),
                _ => {
                    let delta = self.sample_spacing();
                    Ok((line(self.l_tx, delta)?, line(self.l_rx, delta)?))
                }
            },
            Some(Spacing::Half) => {
                let n = self.n.unwrap_or_else(|| whole_intervals(2.0 * self.l_tx, lam) + 1);
                let m = m.unwrap_or_else(|| whole_intervals(2.0 * self.l_rx, lam) + 1);
                Ok((Aperture::half_wavelength(lam, n)?, Aperture::half_wavelength(lam, m)?))
            }
            Some(Spacing::Custom(d)) => {
                let n = self.n.unwrap_or_else(|| whole_intervals(self.l_tx, d) + 1);
                let m = m.unwrap_or_else(|| whole_intervals(self.l_rx, d) + 1);
                Ok((Aperture::with_spacing(d, n)?, Aperture::with_spacing(d, m)?))
            }
            Some(Spacing::Optimal) => {
                let n = match self.n {
                    Some(n) => n,
                    None => max_rayleigh_elements(self.l_tx, self.l_rx, lam, self.distance)
                        .ok_or_else(|| {
                            Error::Domain(format!(
                                "no two-element Rayleigh layout fits L_T = {} m, L_R = {} m at D = {} m",
                                self.l_tx, self.l_rx, self.distance
                            ))
                        })?,
                };
                if m != Some(n) && m.is_some() {
                    return Err(Error::Domain(format!(
                        "Rayleigh spacing needs equal element counts, got N = {n}, M = {}",
                        m.unwrap_or(n)
                    )));
                }
                let d = optimal_spacing(lam, self.distance, n)?;
                Ok((Aperture::with_spacing(d, n)?, Aperture::with_spacing(d, n)?))
            }
        }
    }
}

fn line(length: f64, delta: f64) -> Result<Aperture> {
    if length < delta {
        // shorter than one sample: a point source
        return Aperture::evenly_spaced(0.0, 1);
    }
    sample_continuous(length, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LinkParams {
        LinkParams {
            wavelength: 0.003,
            distance: 100.0,
            l_tx: 1.0,
            l_rx: 0.5,
            n: None,
            m: None,
            spacing: None,
            sample_spacing: None,
        }
    }

    #[test]
    fn parses_spacing() {
        assert_eq!("half".parse::<Spacing>().unwrap(), Spacing::Half);
        assert_eq!("optimal".parse::<Spacing>().unwrap(), Spacing::Optimal);
        assert_eq!("custom:0.01".parse::<Spacing>().unwrap(), Spacing::Custom(0.01));
        assert!("custom:-1".parse::<Spacing>().is_err());
        assert!("wide".parse::<Spacing>().is_err());
    }

    #[test]
    fn default_is_quarter_wavelength_line() {
        let (tx, rx) = params().apertures().unwrap();
        assert_eq!(tx.count(), 1334);
        assert_eq!(rx.count(), 667);
    }

    #[test]
    fn half_wavelength_counts_follow_length() {
        let p = LinkParams {
            spacing: Some(Spacing::Half),
            ..params()
        };
        let (tx, rx) = p.apertures().unwrap();
        assert_eq!((tx.count(), rx.count()), (667, 334));
    }

    #[test]
    fn optimal_uses_rayleigh_spacing() {
        let p = LinkParams {
            spacing: Some(Spacing::Optimal),
            n: Some(4),
            ..params()
        };
        let (tx, _) = p.apertures().unwrap();
        assert!((tx.spacing() - 0.273_861_278_752_583).abs() < 1e-12);
        let p = LinkParams {
            m: Some(3),
            ..p
        };
        assert!(p.apertures().is_err());
    }
}
