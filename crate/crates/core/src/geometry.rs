//! Link geometry, linear apertures and field-region classification.
//!
//! Both apertures lie on parallel lines whose centers are aligned and separated
//! by the link distance. Element coordinates are transverse offsets along each
//! line, measured from the line center.

use serde::Serialize;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default multiple of the largest aperture below which a link counts as
/// geometric near field.
pub const DEFAULT_GEOMETRIC_KAPPA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkGeometry {
    wavelength: f64,
    distance: f64,
}

impl LinkGeometry {
    pub fn new(wavelength: f64, distance: f64) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        ensure_positive("distance", distance)?;
        Ok(Self {
            wavelength,
            distance,
        })
    }

    pub fn from_frequency(frequency: f64, distance: f64) -> Result<Self> {
        ensure_positive("frequency", frequency)?;
        Self::new(SPEED_OF_LIGHT / frequency, distance)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Center-to-center distance between the two lines.
    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        Self::new(self.wavelength, distance)
    }

    pub fn with_wavelength(&self, wavelength: f64) -> Result<Self> {
        Self::new(wavelength, self.distance)
    }
}

/// How the element spacing of an aperture was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SpacingPolicy {
    HalfWavelength,
    /// Rayleigh spacing for a link distance and a target mode count.
    Optimal { distance: f64, modes: usize },
    Custom { spacing: f64 },
    /// Quasi-continuous surrogate of a holographic line, sampled at `delta`.
    ContinuousSampled { delta: f64 },
}

/// A linear antenna: `count` evenly spaced point elements spanning `length`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aperture {
    length: f64,
    count: usize,
    policy: SpacingPolicy,
}

impl Aperture {
    /// Evenly spaced elements over a given length. A single element sits at
    /// the center regardless of `length`.
    pub fn new(length: f64, count: usize, policy: SpacingPolicy) -> Result<Self> {
        ensure_non_negative("aperture length", length)?;
        if count == 0 {
            return Err(Error::domain("aperture needs at least one element"));
        }
        match policy {
            SpacingPolicy::Custom { spacing } => ensure_non_negative("spacing", spacing)?,
            SpacingPolicy::ContinuousSampled { delta } => ensure_positive("sample spacing", delta)?,
            SpacingPolicy::Optimal { distance, modes } => {
                ensure_positive("distance", distance)?;
                if modes == 0 {
                    return Err(Error::domain("optimal spacing needs a positive mode count"));
                }
            }
            SpacingPolicy::HalfWavelength => {}
        }
        Ok(Self {
            length,
            count,
            policy,
        })
    }

    pub fn half_wavelength(wavelength: f64, count: usize) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        let length = (count.saturating_sub(1)) as f64 * wavelength / 2.0;
        Self::new(length, count, SpacingPolicy::HalfWavelength)
    }

    pub fn with_spacing(spacing: f64, count: usize) -> Result<Self> {
        ensure_non_negative("spacing", spacing)?;
        let length = (count.saturating_sub(1)) as f64 * spacing;
        Self::new(length, count, SpacingPolicy::Custom { spacing })
    }

    /// `count` elements spread evenly over `length`.
    pub fn evenly_spaced(length: f64, count: usize) -> Result<Self> {
        let spacing = if count >= 2 {
            length / (count - 1) as f64
        } else {
            0.0
        };
        Self::new(length, count, SpacingPolicy::Custom { spacing })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn policy(&self) -> SpacingPolicy {
        self.policy
    }

    /// Element pitch, zero for a single element.
    pub fn spacing(&self) -> f64 {
        if self.count >= 2 {
            self.length / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    /// Element coordinates, strictly increasing and centered on zero.
    pub fn positions(&self) -> Vec<f64> {
        element_positions(self)
    }
}

/// `position(i) = (i - (count-1)/2) * d`, evaluated as `k * L / (2 (count-1))`
/// with integer `k = 2i - (count-1)` so that mirrored elements are exact negatives.
pub fn element_positions(aperture: &Aperture) -> Vec<f64> {
    let n = aperture.count;
    if n == 1 {
        return vec![0.0];
    }
    let denom = 2.0 * (n - 1) as f64;
    (0..n)
        .map(|i| {
            let k = 2 * i as i64 - (n as i64 - 1);
            k as f64 * aperture.length / denom
        })
        .collect()
}

/// `floor(numerator / denominator)`, snapping ratios within a relative 1e-9 of
/// an integer so that e.g. `0.3 / 0.0015` counts 200 intervals, not 199.
pub fn whole_intervals(numerator: f64, denominator: f64) -> usize {
    let ratio = numerator / denominator;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.floor() as usize
    }
}

/// Far-field boundary `2 L^2 / lambda` of an aperture of size `length`.
pub fn fraunhofer_distance(length: f64, wavelength: f64) -> Result<f64> {
    ensure_positive("wavelength", wavelength)?;
    ensure_non_negative("length", length)?;
    Ok(2.0 * length * length / wavelength)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRegion {
    FarField,
    RadiatingNearField,
    GeometricNearField,
}

impl FieldRegion {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldRegion::FarField => "far_field",
            FieldRegion::RadiatingNearField => "radiating_near_field",
            FieldRegion::GeometricNearField => "geometric_near_field",
        }
    }
}

impl std::fmt::Display for FieldRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies the link with the default geometric threshold `kappa = 10`.
pub fn classify_region(geom: &LinkGeometry, tx: &Aperture, rx: &Aperture) -> FieldRegion {
    classify_region_with(geom, tx.length(), rx.length(), DEFAULT_GEOMETRIC_KAPPA)
}

/// Far field when `D >= 2 (L_T + L_R)^2 / lambda`; otherwise geometric near
/// field when `D < kappa * max(L_T, L_R)`; otherwise radiating near field.
///
/// The far-field test takes precedence: electrically tiny apertures can sit
/// beyond the Fraunhofer distance while still being close in geometric terms.
pub fn classify_region_with(
    geom: &LinkGeometry,
    l_tx: f64,
    l_rx: f64,
    kappa: f64,
) -> FieldRegion {
    let combined = l_tx + l_rx;
    let r_ff = 2.0 * combined * combined / geom.wavelength;
    if geom.distance >= r_ff {
        FieldRegion::FarField
    } else if geom.distance < kappa * l_tx.max(l_rx) {
        FieldRegion::GeometricNearField
    } else {
        FieldRegion::RadiatingNearField
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn fraunhofer_examples() {
        assert!(close(fraunhofer_distance(0.1, 0.003).unwrap(), 6.666_666_666_666_667, 1e-12));
        assert_eq!(fraunhofer_distance(0.0, 0.003).unwrap(), 0.0);
        assert!(close(fraunhofer_distance(0.5, 0.003).unwrap(), 166.666_666_666_666_7, 1e-12));
        assert!(fraunhofer_distance(0.1, 0.0).is_err());
        assert!(fraunhofer_distance(0.1, -1.0).is_err());
    }

    #[test]
    fn positions_examples() {
        let p = Aperture::evenly_spaced(0.3, 4).unwrap().positions();
        for (got, want) in p.iter().zip([-0.15, -0.05, 0.05, 0.15]) {
            assert!((got - want).abs() < 1e-15, "{p:?}");
        }
        assert_eq!(Aperture::evenly_spaced(1.0, 1).unwrap().positions(), vec![0.0]);
        let p = Aperture::evenly_spaced(0.03, 3).unwrap().positions();
        assert_eq!(p, vec![-0.015, 0.0, 0.015]);
    }

    #[test]
    fn half_wavelength_aperture() {
        let a = Aperture::half_wavelength(0.003, 5).unwrap();
        assert!(close(a.length(), 0.006, 1e-15));
        assert!(close(a.spacing(), 0.0015, 1e-15));
    }

    #[test]
    fn rejects_bad_apertures() {
        assert!(Aperture::evenly_spaced(1.0, 0).is_err());
        assert!(Aperture::evenly_spaced(-1.0, 3).is_err());
        assert!(Aperture::new(1.0, 3, SpacingPolicy::ContinuousSampled { delta: 0.0 }).is_err());
        assert!(LinkGeometry::new(0.0, 1.0).is_err());
        assert!(LinkGeometry::new(0.003, -1.0).is_err());
    }

    #[test]
    fn frequency_round_trip() {
        let g = LinkGeometry::from_frequency(100e9, 10.0).unwrap();
        assert_eq!(g.wavelength(), SPEED_OF_LIGHT / 100e9);
        assert!(close(g.frequency(), 100e9, 1e-15));
    }

    #[test]
    fn region_examples() {
        let g = LinkGeometry::new(0.003, 10_000.0).unwrap();
        assert_eq!(classify_region_with(&g, 0.5, 0.5, 10.0), FieldRegion::FarField);
        let g = LinkGeometry::new(0.003, 3.0).unwrap();
        assert_eq!(classify_region_with(&g, 0.1, 1.0, 10.0), FieldRegion::GeometricNearField);
        let g = LinkGeometry::new(0.003, 100.0).unwrap();
        assert_eq!(classify_region_with(&g, 0.5, 0.5, 10.0), FieldRegion::RadiatingNearField);

        let tx = Aperture::evenly_spaced(0.5, 10).unwrap();
        assert_eq!(classify_region(&g, &tx, &tx), FieldRegion::RadiatingNearField);
    }

    proptest! {
        #[test]
        fn fraunhofer_scaling(l in 1e-4f64..10.0, lam in 1e-4f64..1.0) {
            let base = fraunhofer_distance(l, lam).unwrap();
            prop_assert_eq!(fraunhofer_distance(2.0 * l, lam).unwrap(), 4.0 * base);
            prop_assert!(fraunhofer_distance(l * 1.01, lam).unwrap() > base);
            prop_assert!(fraunhofer_distance(l, lam * 1.01).unwrap() < base);
        }

        #[test]
        fn positions_are_antisymmetric(l in 0.0f64..5.0, n in 1usize..300) {
            let p = Aperture::evenly_spaced(l, n).unwrap().positions();
            prop_assert_eq!(p.len(), n);
            for i in 0..n {
                prop_assert!((p[i] + p[n - 1 - i]).abs() <= 1e-12 * l);
            }
            if l > 0.0 {
                prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
            }
            let mean = p.iter().sum::<f64>() / n as f64;
            prop_assert!(mean.abs() <= 1e-12 * l.max(f64::MIN_POSITIVE));
            if n >= 2 {
                prop_assert!((p[n - 1] - p[0] - l).abs() <= 1e-12 * l.max(1.0));
            }
        }

        #[test]
        fn region_is_scale_invariant(
            lam in 1e-3f64..1e-2,
            d in 0.01f64..1e5,
            lt in 1e-3f64..2.0,
            lr in 1e-3f64..2.0,
            exp in -8i32..8,
        ) {
            // power-of-two factors keep every product exact
            let s = 2f64.powi(exp);
            let a = classify_region_with(&LinkGeometry::new(lam, d).unwrap(), lt, lr, 10.0);
            let b = classify_region_with(&LinkGeometry::new(lam * s, d * s).unwrap(), lt * s, lr * s, 10.0);
            prop_assert_eq!(a, b);
        }
    }
}
