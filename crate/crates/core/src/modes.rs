//! Communication modes of a sampled channel.
//!
//! The channel factors as `G = sum_n c_n b_n a_n^H`, where `a_n` are transmit
//! aperture profiles, `b_n` the receive profiles they map onto and `c_n >= 0`
//! the coupling intensities. Numerically this is the SVD `G = U S V^H` with
//! `a_n = V[:, n]`, `b_n = U[:, n]`, `c_n = S[n]`.

use std::cmp::Ordering;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

/// Default relative power threshold for "strongly coupled" modes, in dB.
pub const DEFAULT_THRESHOLD_DB: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    intensities: Vec<f64>,
    tx_basis: Mat<Complex64>,
    rx_basis: Mat<Complex64>,
    tx_positions: Vec<f64>,
    rx_positions: Vec<f64>,
}

/// A basis function sampled on its aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub coords: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DofEstimate {
    /// Modes within `threshold_db` of the strongest one.
    pub strong_count: usize,
    /// `(sum c^2)^2 / sum c^4`; zero for an all-zero spectrum.
    pub participation_ratio: f64,
    pub threshold_db: f64,
}

fn svd_error(channel: &ChannelMatrix, reason: impl Into<String>) -> Error {
    Error::Computation {
        rows: channel.rows(),
        cols: channel.cols(),
        reason: reason.into(),
    }
}

/// Full set of `min(N, M)` modes. Each mode's phase is fixed so the largest
/// entry of its transmit profile is real and positive.
pub fn decompose(channel: &ChannelMatrix) -> Result<ModeDecomposition> {
    let svd = channel
        .entries()
        .thin_svd()
        .map_err(|e| svd_error(channel, format!("{e:?}")))?;
    let k = channel.rows().min(channel.cols());
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());

    let mut modes: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = (0..k)
        .map(|j| {
            let mut a: Vec<Complex64> = (0..v.nrows()).map(|i| v[(i, j)]).collect();
            let mut b: Vec<Complex64> = (0..u.nrows()).map(|i| u[(i, j)]).collect();
            fix_phase(&mut a, &mut b);
            (s[j].re, a, b)
        })
        .collect();
    if modes.iter().any(|(c, ..)| !c.is_finite()) {
        return Err(svd_error(channel, "non-finite singular value"));
    }

    // Exactly equal intensities have no canonical order; break ties on the
    // first differing transmit coordinate so the output is reproducible.
    modes.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| compare_profiles(&y.1, &x.1))
    });

    let tx_basis = Mat::from_fn(channel.cols(), k, |i, j| modes[j].1[i]);
    let rx_basis = Mat::from_fn(channel.rows(), k, |i, j| modes[j].2[i]);
    Ok(ModeDecomposition {
        intensities: modes.iter().map(|m| m.0.max(0.0)).collect(),
        tx_basis,
        rx_basis,
        tx_positions: channel.tx_positions().to_vec(),
        rx_positions: channel.rx_positions().to_vec(),
    })
}

/// Coupling intensities only, largest first. Much cheaper than `decompose`
/// for large apertures.
pub fn singular_values(channel: &ChannelMatrix) -> Result<Vec<f64>> {
    let mut s = channel
        .entries()
        .singular_values()
        .map_err(|e| svd_error(channel, format!("{e:?}")))?;
    if s.iter().any(|c| !c.is_finite()) {
        return Err(svd_error(channel, "non-finite singular value"));
    }
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    Ok(s.into_iter().map(|c| c.max(0.0)).collect())
}

fn fix_phase(a: &mut [Complex64], b: &mut [Complex64]) {
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in a.iter().enumerate() {
        let mag = z.norm();
        if mag > best {
            best = mag;
            pivot = i;
        }
    }
    if best <= 0.0 {
        return;
    }
    let rot = a[pivot].conj() / best;
    for z in a.iter_mut() {
        *z *= rot;
    }
    a[pivot] = Complex64::new(a[pivot].re, 0.0);
    for z in b.iter_mut() {
        *z *= rot;
    }
}

fn compare_profiles(x: &[Complex64], y: &[Complex64]) -> Ordering {
    for (p, q) in x.iter().zip(y) {
        let ord = p
            .re
            .total_cmp(&q.re)
            .then_with(|| p.im.total_cmp(&q.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Counts modes with `20 log10(c_n / c_1) >= -threshold_db`.
pub fn effective_dof(intensities: &[f64], threshold_db: f64) -> Result<DofEstimate> {
    if intensities.is_empty() {
        return Err(Error::domain("empty intensity list"));
    }
    if !(threshold_db.is_finite() && threshold_db > 0.0) {
        return Err(Error::domain(format!(
            "threshold must be a positive number of dB, got {threshold_db}"
        )));
    }
    let peak = intensities.iter().copied().fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Ok(DofEstimate {
            strong_count: 0,
            participation_ratio: 0.0,
            threshold_db,
        });
    }
    let strong_count = intensities
        .iter()
        .filter(|&&c| c > 0.0 && 20.0 * (c / peak).log10() >= -threshold_db)
        .count();
    // normalize first so c^4 cannot underflow for tiny Green magnitudes
    let (p2, p4) = intensities.iter().fold((0.0, 0.0), |(s2, s4), &c| {
        let r2 = (c / peak) * (c / peak);
        (s2 + r2, s4 + r2 * r2)
    });
    Ok(DofEstimate {
        strong_count,
        participation_ratio: p2 * p2 / p4,
        threshold_db,
    })
}

impl ModeDecomposition {
    /// `c_1 >= c_2 >= ... >= 0`.
    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    /// Number of retained modes, `min(N, M)`.
    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    /// `N x K`, columns are `a_n`.
    pub fn tx_basis(&self) -> &Mat<Complex64> {
        &self.tx_basis
    }

    /// `M x K`, columns are `b_n`.
    pub fn rx_basis(&self) -> &Mat<Complex64> {
        &self.rx_basis
    }

    pub fn effective_dof(&self, threshold_db: f64) -> Result<DofEstimate> {
        effective_dof(&self.intensities, threshold_db)
    }

    /// The `index`-th mode (1-based): transmit profile, receive profile and
    /// coupling intensity.
    pub fn mode_fields(&self, index: usize) -> Result<(ModeProfile, ModeProfile, f64)> {
        if index == 0 || index > self.len() {
            return Err(Error::domain(format!(
                "mode index {index} outside 1..={}",
                self.len()
            )));
        }
        let j = index - 1;
        let tx = ModeProfile {
            coords: self.tx_positions.clone(),
            values: (0..self.tx_basis.nrows()).map(|i| self.tx_basis[(i, j)]).collect(),
        };
        let rx = ModeProfile {
            coords: self.rx_positions.clone(),
            values: (0..self.rx_basis.nrows()).map(|i| self.rx_basis[(i, j)]).collect(),
        };
        Ok((tx, rx, self.intensities[j]))
    }

    /// `sum_{n <= rank} c_n b_n a_n^H`.
    pub fn reconstruct(&self, rank: usize) -> Mat<Complex64> {
        let r = rank.min(self.len());
        let (a, b) = (&self.tx_basis, &self.rx_basis);
        Mat::from_fn(b.nrows(), a.nrows(), |m, n| {
            (0..r).fold(Complex64::new(0.0, 0.0), |acc, k| {
                acc + b[(m, k)] * a[(n, k)].conj() * self.intensities[k]
            })
        })
    }
}
