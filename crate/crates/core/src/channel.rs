//! Sampled free-space Green operator between two parallel line apertures.

use std::f64::consts::PI;
use std::io::{self, Write};

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::geometry::{whole_intervals, Aperture, LinkGeometry, SpacingPolicy};

/// Default ceiling on the number of matrix entries (4096 x 4096).
pub const DEFAULT_MAX_ENTRIES: usize = 4096 * 4096;

/// Distance model used inside the Green kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseModel {
    /// Exact Euclidean distance in both phase and magnitude.
    #[default]
    Exact,
    /// `r ~ D + (x_r - x_t)^2 / (2D)` in the phase, `1/(4 pi D)` magnitude.
    Fresnel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOptions {
    pub phase: PhaseModel,
    pub max_entries: usize,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self {
            phase: PhaseModel::Exact,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

fn distance_between(x_t: f64, x_r: f64, geom: &LinkGeometry) -> f64 {
    let dx = x_r - x_t;
    (geom.distance() * geom.distance() + dx * dx).sqrt()
}

/// Scalar outgoing Green function `exp(-jkr) / (4 pi r)` between a point at
/// `x_t` on the transmit line and a point at `x_r` on the receive line.
pub fn green_scalar(x_t: f64, x_r: f64, geom: &LinkGeometry) -> Complex64 {
    let r = distance_between(x_t, x_r, geom);
    Complex64::from_polar(1.0 / (4.0 * PI * r), -geom.wavenumber() * r)
}

pub fn green_fresnel(x_t: f64, x_r: f64, geom: &LinkGeometry) -> Complex64 {
    let d = geom.distance();
    let dx = x_r - x_t;
    let r = d + dx * dx / (2.0 * d);
    Complex64::from_polar(1.0 / (4.0 * PI * d), -geom.wavenumber() * r)
}

/// Discretizes a holographic line of `length` at sample pitch `delta`:
/// `floor(length / delta) + 1` samples spread evenly over the full length.
pub fn sample_continuous(length: f64, delta: f64) -> Result<Aperture> {
    ensure_positive("sample spacing", delta)?;
    ensure_non_negative("length", length)?;
    if length < delta {
        return Err(Error::domain(format!(
            "length {length} is shorter than the sample spacing {delta}"
        )));
    }
    Aperture::new(
        length,
        whole_intervals(length, delta) + 1,
        SpacingPolicy::ContinuousSampled { delta },
    )
}

/// `M x N` matrix of Green samples: row `m` is the receive element, column
/// `n` the transmit element.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    entries: Mat<Complex64>,
    tx_positions: Vec<f64>,
    rx_positions: Vec<f64>,
    geom: LinkGeometry,
}

impl ChannelMatrix {
    /// Assembles the matrix from explicit element coordinates.
    pub fn from_positions(
        tx_positions: Vec<f64>,
        rx_positions: Vec<f64>,
        geom: LinkGeometry,
        options: &ChannelOptions,
    ) -> Result<Self> {
        let (rows, cols) = (rx_positions.len(), tx_positions.len());
        if rows == 0 || cols == 0 {
            return Err(Error::domain("channel needs at least one element per side"));
        }
        if rows.checked_mul(cols).is_none_or(|n| n > options.max_entries) {
            return Err(Error::Resource {
                what: "channel matrix".into(),
                rows,
                cols,
                budget: options.max_entries,
            });
        }
        let kernel = match options.phase {
            PhaseModel::Exact => green_scalar,
            PhaseModel::Fresnel => green_fresnel,
        };
        // column-major buffer, one column per transmit element
        let mut buf = vec![Complex64::new(0.0, 0.0); rows * cols];
        buf.par_chunks_mut(rows)
            .zip(tx_positions.par_iter())
            .for_each(|(col, &x_t)| {
                for (g, &x_r) in col.iter_mut().zip(&rx_positions) {
                    *g = kernel(x_t, x_r, &geom);
                }
            });
        let entries = Mat::from_fn(rows, cols, |m, n| buf[n * rows + m]);
        Ok(Self {
            entries,
            tx_positions,
            rx_positions,
            geom,
        })
    }

    /// Wraps an existing matrix; used for synthetic channels and effective
    /// (beamformed) channels.
    pub fn from_entries(
        entries: Mat<Complex64>,
        tx_positions: Vec<f64>,
        rx_positions: Vec<f64>,
        geom: LinkGeometry,
    ) -> Result<Self> {
        if entries.nrows() != rx_positions.len() || entries.ncols() != tx_positions.len() {
            return Err(Error::domain(format!(
                "matrix is {}x{} but there are {} rx and {} tx positions",
                entries.nrows(),
                entries.ncols(),
                rx_positions.len(),
                tx_positions.len()
            )));
        }
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::domain("empty channel matrix"));
        }
        Ok(Self {
            entries,
            tx_positions,
            rx_positions,
            geom,
        })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m, n)]
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn tx_positions(&self) -> &[f64] {
        &self.tx_positions
    }

    pub fn rx_positions(&self) -> &[f64] {
        &self.rx_positions
    }

    pub fn geometry(&self) -> &LinkGeometry {
        &self.geom
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            entries: Mat::from_fn(self.rows(), self.cols(), |m, n| self.entries[(m, n)] * factor),
            ..self.clone()
        }
    }

    /// Same link seen from the other end.
    pub fn transposed(&self) -> Self {
        Self {
            entries: self.entries.transpose().to_owned(),
            tx_positions: self.rx_positions.clone(),
            rx_positions: self.tx_positions.clone(),
            geom: self.geom,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm_l2()
    }

    /// Column-major dump with header `m,n,re,im`. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "m,n,re,im")?;
        for n in 0..self.cols() {
            for m in 0..self.rows() {
                let g = self.entries[(m, n)];
                writeln!(out, "{m},{n},{},{}", g.re, g.im)?;
            }
        }
        Ok(())
    }
}

/// Channel between two apertures with the default exact kernel and budget.
pub fn channel_matrix(tx: &Aperture, rx: &Aperture, geom: &LinkGeometry) -> Result<ChannelMatrix> {
    channel_matrix_with(tx, rx, geom, &ChannelOptions::default())
}

pub fn channel_matrix_with(
    tx: &Aperture,
    rx: &Aperture,
    geom: &LinkGeometry,
    options: &ChannelOptions,
) -> Result<ChannelMatrix> {
    for side in [tx, rx] {
        if let SpacingPolicy::ContinuousSampled { delta } = side.policy() {
            if delta > geom.wavelength() / 2.0 {
                return Err(Error::domain(format!(
                    "sample spacing {delta} exceeds half a wavelength ({})",
                    geom.wavelength() / 2.0
                )));
            }
        }
    }
    ChannelMatrix::from_positions(tx.positions(), rx.positions(), *geom, options)
}
