//! Architecture synthesis and comparison.
//!
//! Three ways to get spatial multiplexing out of a LoS link are modeled side
//! by side, plus the hybrid arrays-of-sub-arrays layout:
//!
//! * holographic MIMO-lines, approximated by sub-half-wavelength sampling;
//! * half-wavelength arrays;
//! * sparse arrays at Rayleigh spacing (`d_T d_R = lambda D / N`);
//! * sub-arrays of half-wavelength elements whose centers sit at Rayleigh
//!   spacing, each driven by a single RF chain through fixed boresight weights.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{sample_continuous, ChannelMatrix, ChannelOptions};
use crate::error::{ensure_positive, Error, Result};
use crate::formulas::{
    dof_geometric, dof_geometric_capped, dof_paraxial, dof_paraxial_capped, DofFormulaResult, FormulaId,
};
use crate::geometry::{
    classify_region_with, whole_intervals, Aperture, FieldRegion, LinkGeometry, SpacingPolicy,
    DEFAULT_GEOMETRIC_KAPPA,
};
use crate::modes::{effective_dof, singular_values, DEFAULT_THRESHOLD_DB};

/// Rayleigh spacing `sqrt(lambda D / N)` for `N` elements per side.
pub fn optimal_spacing(wavelength: f64, distance: f64, n: usize) -> Result<f64> {
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("distance", distance)?;
    if n < 2 {
        return Err(Error::domain(format!(
            "Rayleigh spacing needs at least two elements, got {n}"
        )));
    }
    Ok((wavelength * distance / n as f64).sqrt())
}

/// Receive spacing completing `d_T d_R = lambda D / N` for a given transmit spacing.
pub fn optimal_spacing_asymmetric(
    wavelength: f64,
    distance: f64,
    n: usize,
    tx_spacing: f64,
) -> Result<f64> {
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("distance", distance)?;
    ensure_positive("tx spacing", tx_spacing)?;
    if n == 0 {
        return Err(Error::domain("element count must be positive"));
    }
    Ok(wavelength * distance / (n as f64 * tx_spacing))
}

/// Largest `N >= 2` whose Rayleigh layout fits both lengths, i.e.
/// `(N-1)^2 lambda D / N <= L_T L_R`. `None` when not even two elements fit.
pub fn max_rayleigh_elements(l_tx: f64, l_rx: f64, wavelength: f64, distance: f64) -> Option<usize> {
    let budget = l_tx * l_rx;
    let unit = wavelength * distance;
    // (N-1)^2 / N > N - 2, so nothing above this can fit
    let upper = (budget / unit).floor() as usize + 2;
    (2..=upper).rev().find(|&n| {
        let k = (n - 1) as f64;
        k * k * unit / n as f64 <= budget * (1.0 + 1e-12)
    })
}

/// Which of the compared architectures a design refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureType {
    MimoLine,
    HalfWavelengthArray,
    OptimallySpacedArray,
    SubArrayOfArrays,
}

impl ArchitectureType {
    pub const ALL: [ArchitectureType; 4] = [
        ArchitectureType::MimoLine,
        ArchitectureType::HalfWavelengthArray,
        ArchitectureType::OptimallySpacedArray,
        ArchitectureType::SubArrayOfArrays,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ArchitectureType::MimoLine => "mimo_line",
            ArchitectureType::HalfWavelengthArray => "half_wavelength_array",
            ArchitectureType::OptimallySpacedArray => "optimally_spaced_array",
            ArchitectureType::SubArrayOfArrays => "sub_array_of_arrays",
        }
    }
}

impl std::fmt::Display for ArchitectureType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArchitectureKind {
    MimoLine { sample_spacing: f64 },
    HalfWavelengthArray,
    OptimallySpacedArray,
    /// The architecture's apertures hold the sub-array centers; every
    /// sub-array has `elements_per_subarray` elements at `element_spacing`.
    SubArrayOfArrays {
        elements_per_subarray: usize,
        element_spacing: f64,
    },
}

impl ArchitectureKind {
    pub fn architecture_type(&self) -> ArchitectureType {
        match self {
            ArchitectureKind::MimoLine { .. } => ArchitectureType::MimoLine,
            ArchitectureKind::HalfWavelengthArray => ArchitectureType::HalfWavelengthArray,
            ArchitectureKind::OptimallySpacedArray => ArchitectureType::OptimallySpacedArray,
            ArchitectureKind::SubArrayOfArrays { .. } => ArchitectureType::SubArrayOfArrays,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub kind: ArchitectureKind,
    pub tx: Aperture,
    pub rx: Aperture,
    /// Aperture lengths the layout was asked to fill. Reports and RF-chain
    /// accounting use these, so equal-aperture comparisons stay equal.
    pub l_tx: f64,
    pub l_rx: f64,
    /// Soft problems found while synthesizing (infeasible layouts, overlaps).
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignConstraint {
    FixedLengths { l_tx: f64, l_rx: f64 },
    FixedModes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// MIMO-line sample pitch; `lambda / 4` when unset.
    pub sample_spacing: Option<f64>,
    /// Sub-array size; the largest non-overlapping size when unset.
    pub elements_per_subarray: Option<usize>,
    pub threshold_db: f64,
    pub kappa: f64,
    pub channel: ChannelOptions,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            sample_spacing: None,
            elements_per_subarray: None,
            threshold_db: DEFAULT_THRESHOLD_DB,
            kappa: DEFAULT_GEOMETRIC_KAPPA,
            channel: ChannelOptions::default(),
        }
    }
}

impl DesignOptions {
    fn sample_spacing(&self, geom: &LinkGeometry) -> f64 {
        self.sample_spacing.unwrap_or(geom.wavelength() / 4.0)
    }
}

fn sub_array_offsets(count: usize, spacing: f64) -> Vec<f64> {
    (0..count)
        .map(|p| (2 * p as i64 - (count as i64 - 1)) as f64 * spacing / 2.0)
        .collect()
}

impl Architecture {
    pub fn architecture_type(&self) -> ArchitectureType {
        self.kind.architecture_type()
    }

    fn side_positions(&self, side: &Aperture) -> Vec<f64> {
        match self.kind {
            ArchitectureKind::SubArrayOfArrays {
                elements_per_subarray,
                element_spacing,
            } => {
                let offsets = sub_array_offsets(elements_per_subarray, element_spacing);
                side.positions()
                    .into_iter()
                    .flat_map(|c| offsets.iter().map(move |o| c + o))
                    .collect()
            }
            _ => side.positions(),
        }
    }

    pub fn tx_element_positions(&self) -> Vec<f64> {
        self.side_positions(&self.tx)
    }

    pub fn rx_element_positions(&self) -> Vec<f64> {
        self.side_positions(&self.rx)
    }

    fn per_port(&self) -> usize {
        match self.kind {
            ArchitectureKind::SubArrayOfArrays {
                elements_per_subarray,
                ..
            } => elements_per_subarray,
            _ => 1,
        }
    }

    pub fn tx_element_count(&self) -> usize {
        self.tx.count() * self.per_port()
    }

    pub fn rx_element_count(&self) -> usize {
        self.rx.count() * self.per_port()
    }

    fn extent(&self, side: &Aperture) -> f64 {
        match self.kind {
            ArchitectureKind::SubArrayOfArrays {
                elements_per_subarray,
                element_spacing,
            } => side.length() + (elements_per_subarray - 1) as f64 * element_spacing,
            _ if side.count() < 2 => 0.0,
            _ => side.length(),
        }
    }

    /// Physical span of the transmit elements.
    pub fn tx_extent(&self) -> f64 {
        self.extent(&self.tx)
    }

    pub fn rx_extent(&self) -> f64 {
        self.extent(&self.rx)
    }

    /// Element-level channel.
    pub fn channel(&self, geom: &LinkGeometry, options: &ChannelOptions) -> Result<ChannelMatrix> {
        ChannelMatrix::from_positions(
            self.tx_element_positions(),
            self.rx_element_positions(),
            *geom,
            options,
        )
    }

    /// Channel seen by the RF chains. For sub-arrays this is `W_r^H G W_t`
    /// with uniform, unit-norm boresight weights per sub-array; otherwise the
    /// element-level channel.
    pub fn port_channel(&self, geom: &LinkGeometry, options: &ChannelOptions) -> Result<ChannelMatrix> {
        let full = self.channel(geom, options)?;
        let p = self.per_port();
        if p == 1 {
            return Ok(full);
        }
        let (s_rx, s_tx) = (self.rx.count(), self.tx.count());
        let w = 1.0 / p as f64; // (1/sqrt p) on each side
        let g = full.entries();
        let combined = Mat::from_fn(s_rx, s_tx, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..p {
                for n in 0..p {
                    acc += g[(i * p + m, j * p + n)];
                }
            }
            acc * w
        });
        ChannelMatrix::from_entries(combined, self.tx.positions(), self.rx.positions(), *geom)
    }
}

fn degenerate(warnings: &mut Vec<String>, msg: String) -> Result<Aperture> {
    warnings.push(msg);
    Aperture::new(0.0, 1, SpacingPolicy::Custom { spacing: 0.0 })
}

fn half_wavelength_side(length: f64, wavelength: f64) -> Result<Aperture> {
    Aperture::half_wavelength(wavelength, whole_intervals(2.0 * length, wavelength) + 1)
}

fn line_side(length: f64, delta: f64, warnings: &mut Vec<String>) -> Result<Aperture> {
    if length < delta {
        return degenerate(
            warnings,
            format!("aperture {length} m is shorter than the sample spacing {delta} m; using one sample"),
        );
    }
    sample_continuous(length, delta)
}

/// Rayleigh layout with `n` elements on each side and spacings split in
/// proportion to the requested lengths.
fn rayleigh_pair(geom: &LinkGeometry, n: usize, l_tx: f64, l_rx: f64) -> Result<(Aperture, Aperture)> {
    let d_opt = optimal_spacing(geom.wavelength(), geom.distance(), n)?;
    let skew = if l_tx > 0.0 && l_rx > 0.0 {
        (l_tx / l_rx).sqrt()
    } else {
        1.0
    };
    let d_tx = d_opt * skew;
    let d_rx = optimal_spacing_asymmetric(geom.wavelength(), geom.distance(), n, d_tx)?;
    let policy = SpacingPolicy::Optimal {
        distance: geom.distance(),
        modes: n,
    };
    Ok((
        Aperture::new((n - 1) as f64 * d_tx, n, policy)?,
        Aperture::new((n - 1) as f64 * d_rx, n, policy)?,
    ))
}

/// Builds an architecture of the requested type under either a fixed
/// aperture length per side or a fixed number of modes.
pub fn synthesize(
    arch: ArchitectureType,
    geom: &LinkGeometry,
    constraint: DesignConstraint,
    options: &DesignOptions,
) -> Result<Architecture> {
    let lam = geom.wavelength();
    let (l_tx, l_rx) = match constraint {
        DesignConstraint::FixedLengths { l_tx, l_rx } => {
            crate::error::ensure_non_negative("L_T", l_tx)?;
            crate::error::ensure_non_negative("L_R", l_rx)?;
            (l_tx, l_rx)
        }
        DesignConstraint::FixedModes(r) => {
            // validates r >= 2
            let d_opt = optimal_spacing(lam, geom.distance(), r)?;
            if arch == ArchitectureType::OptimallySpacedArray {
                let (tx, rx) = rayleigh_pair(geom, r, 1.0, 1.0)?;
                return Ok(Architecture {
                    kind: ArchitectureKind::OptimallySpacedArray,
                    l_tx: tx.length(),
                    l_rx: rx.length(),
                    tx,
                    rx,
                    warnings: Vec::new(),
                });
            }
            if arch == ArchitectureType::SubArrayOfArrays {
                return sub_arrays(geom, r, d_opt, d_opt, None, options);
            }
            // aperture whose paraxial mode count equals r
            let l = (r as f64 * lam * geom.distance()).sqrt();
            (l, l)
        }
    };

    let mut warnings = Vec::new();
    match arch {
        ArchitectureType::MimoLine => {
            let delta = options.sample_spacing(geom);
            ensure_positive("sample spacing", delta)?;
            let tx = line_side(l_tx, delta, &mut warnings)?;
            let rx = line_side(l_rx, delta, &mut warnings)?;
            Ok(Architecture {
                kind: ArchitectureKind::MimoLine {
                    sample_spacing: delta,
                },
                tx,
                rx,
                l_tx,
                l_rx,
                warnings,
            })
        }
        ArchitectureType::HalfWavelengthArray => Ok(Architecture {
            kind: ArchitectureKind::HalfWavelengthArray,
            tx: half_wavelength_side(l_tx, lam)?,
            rx: half_wavelength_side(l_rx, lam)?,
            l_tx,
            l_rx,
            warnings,
        }),
        ArchitectureType::OptimallySpacedArray => {
            match max_rayleigh_elements(l_tx, l_rx, lam, geom.distance()) {
                Some(n) => {
                    let (tx, rx) = rayleigh_pair(geom, n, l_tx, l_rx)?;
                    Ok(Architecture {
                        kind: ArchitectureKind::OptimallySpacedArray,
                        tx,
                        rx,
                        l_tx,
                        l_rx,
                        warnings,
                    })
                }
                None => {
                    let msg = format!(
                        "no two-element Rayleigh layout fits L_T = {l_tx} m, L_R = {l_rx} m at D = {} m (needs d_T d_R = {} m^2); falling back to a single element",
                        geom.distance(),
                        lam * geom.distance() / 2.0
                    );
                    let tx = degenerate(&mut warnings, msg)?;
                    Ok(Architecture {
                        kind: ArchitectureKind::OptimallySpacedArray,
                        rx: tx.clone(),
                        tx,
                        l_tx,
                        l_rx,
                        warnings,
                    })
                }
            }
        }
        ArchitectureType::SubArrayOfArrays => {
            match max_rayleigh_elements(l_tx, l_rx, lam, geom.distance()) {
                Some(s) => {
                    let (tx, rx) = rayleigh_pair(geom, s, l_tx, l_rx)?;
                    let limits = Some((l_tx, l_rx));
                    sub_arrays(geom, s, tx.spacing(), rx.spacing(), limits, options)
                }
                None => {
                    // one sub-array covering the smaller aperture
                    let p = options
                        .elements_per_subarray
                        .unwrap_or_else(|| whole_intervals(2.0 * l_tx.min(l_rx), lam) + 1);
                    let warnings = vec![format!(
                        "no two-sub-array Rayleigh layout fits L_T = {l_tx} m, L_R = {l_rx} m; using a single sub-array"
                    )];
                    let center = Aperture::new(0.0, 1, SpacingPolicy::Custom { spacing: 0.0 })?;
                    check_subarray_size(p)?;
                    Ok(Architecture {
                        kind: ArchitectureKind::SubArrayOfArrays {
                            elements_per_subarray: p,
                            element_spacing: lam / 2.0,
                        },
                        tx: center.clone(),
                        rx: center,
                        l_tx,
                        l_rx,
                        warnings,
                    })
                }
            }
        }
    }
}

fn check_subarray_size(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::domain("sub-arrays need at least one element"));
    }
    Ok(())
}

fn sub_arrays(
    geom: &LinkGeometry,
    s: usize,
    d_tx: f64,
    d_rx: f64,
    limits: Option<(f64, f64)>,
    options: &DesignOptions,
) -> Result<Architecture> {
    let lam = geom.wavelength();
    let half = lam / 2.0;
    let mut warnings = Vec::new();
    let fit = |d: f64, limit: Option<f64>| {
        // largest size leaving at least half a wavelength between neighbours
        let mut p = whole_intervals(d, half).max(1);
        if let Some(l) = limit {
            let spare = (l - (s - 1) as f64 * d).max(0.0);
            p = p.min(whole_intervals(spare, half) + 1);
        }
        p
    };
    let p = match options.elements_per_subarray {
        Some(p) => p,
        None => fit(d_tx, limits.map(|l| l.0)).min(fit(d_rx, limits.map(|l| l.1))),
    };
    check_subarray_size(p)?;
    if (p - 1) as f64 * half >= d_tx.min(d_rx) {
        warnings.push(format!(
            "sub-arrays of {p} elements overlap their neighbours at center spacing {} m",
            d_tx.min(d_rx)
        ));
    }
    let policy = SpacingPolicy::Optimal {
        distance: geom.distance(),
        modes: s,
    };
    let mut arch = Architecture {
        kind: ArchitectureKind::SubArrayOfArrays {
            elements_per_subarray: p,
            element_spacing: half,
        },
        tx: Aperture::new((s - 1) as f64 * d_tx, s, policy)?,
        rx: Aperture::new((s - 1) as f64 * d_rx, s, policy)?,
        l_tx: 0.0,
        l_rx: 0.0,
        warnings,
    };
    (arch.l_tx, arch.l_rx) = limits.unwrap_or((arch.tx_extent(), arch.rx_extent()));
    Ok(arch)
}

/// RF-chain accounting for one architecture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfChains {
    /// Headline figure: modes for lines and sparse arrays, the combined
    /// `2 L_T / lambda + 2 L_R / lambda` for half-wavelength arrays, the
    /// sub-array count for hybrid layouts.
    pub chains: usize,
    pub tx_chains: usize,
    pub rx_chains: usize,
    /// Paraxial mode estimate for the architecture's aperture lengths.
    pub modes: DofFormulaResult,
    /// `L_T L_R / (lambda D)`.
    pub mode_side: f64,
    /// `2 L_T / lambda + 2 L_R / lambda`.
    pub element_side: f64,
}

/// Both sides of the mode-count versus half-wavelength element-count comparison.
pub fn rf_chain_inequality(l_tx: f64, l_rx: f64, wavelength: f64, distance: f64) -> (f64, f64) {
    (
        l_tx * l_rx / (wavelength * distance),
        2.0 * l_tx / wavelength + 2.0 * l_rx / wavelength,
    )
}

fn unit_estimate(formula: FormulaId) -> DofFormulaResult {
    DofFormulaResult {
        value: 1.0,
        rounded: 1,
        formula,
        warnings: vec!["zero-length aperture supports a single mode".into()],
    }
}

fn paraxial_estimate(l_tx: f64, l_rx: f64, geom: &LinkGeometry) -> Result<DofFormulaResult> {
    if l_tx <= 0.0 || l_rx <= 0.0 {
        return Ok(unit_estimate(FormulaId::Paraxial2));
    }
    dof_paraxial(l_tx, l_rx, geom.wavelength(), geom.distance())
}

pub fn rf_chain_counts(arch: &Architecture, geom: &LinkGeometry) -> Result<RfChains> {
    let (l_tx, l_rx) = (arch.l_tx, arch.l_rx);
    let modes = paraxial_estimate(l_tx, l_rx, geom)?;
    let (mode_side, element_side) = rf_chain_inequality(l_tx, l_rx, geom.wavelength(), geom.distance());
    let (chains, tx_chains, rx_chains) = match arch.kind {
        ArchitectureKind::MimoLine { .. } | ArchitectureKind::OptimallySpacedArray => {
            (modes.rounded, modes.rounded, modes.rounded)
        }
        ArchitectureKind::HalfWavelengthArray => (
            element_side.round() as usize,
            arch.tx.count(),
            arch.rx.count(),
        ),
        ArchitectureKind::SubArrayOfArrays { .. } => {
            (arch.tx.count(), arch.tx.count(), arch.rx.count())
        }
    };
    Ok(RfChains {
        chains,
        tx_chains,
        rx_chains,
        modes,
        mode_side,
        element_side,
    })
}

/// One row of an architecture comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchitectureReport {
    pub kind: ArchitectureType,
    pub n_tx: usize,
    pub n_rx: usize,
    pub l_tx_m: f64,
    pub l_rx_m: f64,
    /// Element pitch on the transmit side; sub-array center pitch for hybrid layouts.
    pub spacing_m: f64,
    pub dof_numerical: usize,
    pub dof_formula: f64,
    pub dof_formula_id: FormulaId,
    pub rf_chains: usize,
    /// `10 log10(elements)` per side, averaged over the two sides.
    pub bf_gain_proxy_db: f64,
    pub warnings: Vec<String>,
}

/// Closed-form estimate suited to the link region: the geometric near-field
/// expression inside `kappa * max(L)`, the paraxial one elsewhere. `caps`
/// bounds the result by the port counts when given.
pub fn formula_estimate(
    l_tx: f64,
    l_rx: f64,
    geom: &LinkGeometry,
    kappa: f64,
    caps: Option<(usize, usize)>,
) -> Result<DofFormulaResult> {
    let (lam, d) = (geom.wavelength(), geom.distance());
    let region = classify_region_with(geom, l_tx, l_rx, kappa);
    if l_tx <= 0.0 || l_rx <= 0.0 {
        return Ok(unit_estimate(match caps {
            Some(_) => FormulaId::ParaxialCapped8,
            None => FormulaId::Paraxial2,
        }));
    }
    if region == FieldRegion::GeometricNearField {
        // the expression assumes the smaller aperture transmits
        let (small, large) = (l_tx.min(l_rx), l_tx.max(l_rx));
        return match caps {
            Some((n, m)) => dof_geometric_capped(small, large, lam, d, n, m),
            None => dof_geometric(small, large, lam, d),
        };
    }
    match caps {
        Some((n, m)) => dof_paraxial_capped(l_tx, l_rx, lam, d, n, m),
        None => dof_paraxial(l_tx, l_rx, lam, d),
    }
}

/// Builds the port-level channel, counts strong modes and assembles the report.
pub fn evaluate(arch: &Architecture, geom: &LinkGeometry, options: &DesignOptions) -> Result<ArchitectureReport> {
    let channel = arch.port_channel(geom, &options.channel).map_err(|e| match e {
        Error::Resource {
            rows, cols, budget, ..
        } => Error::Resource {
            what: format!("{} channel", arch.architecture_type()),
            rows,
            cols,
            budget,
        },
        other => other,
    })?;
    let dof = effective_dof(&singular_values(&channel)?, options.threshold_db)?;
    let (l_tx, l_rx) = (arch.l_tx, arch.l_rx);
    let caps = match arch.kind {
        ArchitectureKind::MimoLine { .. } => None,
        _ => Some((arch.tx.count(), arch.rx.count())),
    };
    let formula = formula_estimate(l_tx, l_rx, geom, options.kappa, caps)?;
    let chains = rf_chain_counts(arch, geom)?;
    let (n_tx, n_rx) = (arch.tx_element_count(), arch.rx_element_count());
    let mut warnings = arch.warnings.clone();
    warnings.extend(formula.warnings.iter().cloned());
    Ok(ArchitectureReport {
        kind: arch.architecture_type(),
        n_tx,
        n_rx,
        l_tx_m: l_tx,
        l_rx_m: l_rx,
        spacing_m: arch.tx.spacing(),
        dof_numerical: dof.strong_count,
        dof_formula: formula.value,
        dof_formula_id: formula.formula,
        rf_chains: chains.chains,
        bf_gain_proxy_db: 5.0 * ((n_tx * n_rx) as f64).log10(),
        warnings,
    })
}

/// Reports for every architecture at equal physical aperture, in the order
/// MIMO-line, half-wavelength, optimally spaced, sub-arrays.
pub fn compare(
    geom: &LinkGeometry,
    l_tx: f64,
    l_rx: f64,
    options: &DesignOptions,
) -> Result<Vec<ArchitectureReport>> {
    ArchitectureType::ALL
        .par_iter()
        .map(|&arch| {
            let design = synthesize(arch, geom, DesignConstraint::FixedLengths { l_tx, l_rx }, options)?;
            evaluate(&design, geom, options)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_matrix;
    use crate::modes::decompose;
    use proptest::prelude::*;

    fn geom(lam: f64, d: f64) -> LinkGeometry {
        LinkGeometry::new(lam, d).unwrap()
    }

    fn condition_number(h: &ChannelMatrix) -> f64 {
        let s = singular_values(h).unwrap();
        s[0] / s[s.len() - 1]
    }

    #[test]
    fn optimal_spacing_examples() {
        let d = optimal_spacing(0.003, 100.0, 4).unwrap();
        assert!((d - 0.273_861_278_752_583).abs() < 1e-12);
        assert!(optimal_spacing(0.003, 100.0, 1).is_err());
        let d = optimal_spacing(0.003, 25.0, 4).unwrap();
        assert!((d - (0.075f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!((d - 0.13693).abs() < 1e-5);
    }

    #[test]
    fn asymmetric_spacing_examples() {
        let d_r = optimal_spacing_asymmetric(0.003, 100.0, 4, 0.15).unwrap();
        assert!((d_r - 0.5).abs() < 1e-12);
        let d_opt = optimal_spacing(0.003, 100.0, 4).unwrap();
        let back = optimal_spacing_asymmetric(0.003, 100.0, 4, d_opt).unwrap();
        assert!((back - d_opt).abs() <= 1e-15);
        assert!(optimal_spacing_asymmetric(0.003, 100.0, 4, 0.0).is_err());
        assert!(optimal_spacing_asymmetric(0.003, -1.0, 4, 0.1).is_err());
    }

    #[test]
    fn rf_chain_examples() {
        let g = geom(0.003, 100.0);
        let opts = DesignOptions::default();
        let half = synthesize(
            ArchitectureType::HalfWavelengthArray,
            &g,
            DesignConstraint::FixedLengths { l_tx: 1.0, l_rx: 1.0 },
            &opts,
        )
        .unwrap();
        assert_eq!(half.tx.count(), 667);
        let rf = rf_chain_counts(&half, &g).unwrap();
        assert!((rf.element_side - 1333.333).abs() < 1e-3);
        assert_eq!(rf.chains, 1333);
        assert_eq!((rf.tx_chains, rf.rx_chains), (667, 667));

        // same 1 m apertures, modes-limited architectures
        let line = synthesize(
            ArchitectureType::MimoLine,
            &g,
            DesignConstraint::FixedLengths { l_tx: 1.0, l_rx: 1.0 },
            &opts,
        )
        .unwrap();
        let rf = rf_chain_counts(&line, &g).unwrap();
        assert_eq!(rf.chains, 3);
        assert!((rf.mode_side - 10.0 / 3.0).abs() < 1e-12);
        assert!(rf.mode_side <= rf.element_side);
    }

    #[test]
    fn optimal_array_chains_follow_modes() {
        let g = geom(0.003, 100.0);
        let arch = synthesize(
            ArchitectureType::OptimallySpacedArray,
            &g,
            DesignConstraint::FixedLengths { l_tx: 1.0, l_rx: 1.0 },
            &DesignOptions::default(),
        )
        .unwrap();
        // (N-1)^2 * 0.3 / N <= 1 holds up to N = 5
        assert_eq!(arch.tx.count(), 5);
        let rf = rf_chain_counts(&arch, &g).unwrap();
        assert_eq!(rf.chains, rf.modes.rounded);
        assert_eq!(rf.chains, 3);
    }

    #[test]
    fn synthesize_fixed_modes() {
        let g = geom(0.003, 100.0);
        let arch = synthesize(
            ArchitectureType::OptimallySpacedArray,
            &g,
            DesignConstraint::FixedModes(4),
            &DesignOptions::default(),
        )
        .unwrap();
        assert_eq!(arch.tx.count(), 4);
        assert!((arch.tx.spacing() - 0.273_861_278_752_583).abs() < 1e-12);
        assert!((arch.tx.length() - 0.821_583_836_257_749).abs() < 1e-12);
        assert!(arch.warnings.is_empty());
        assert!(synthesize(
            ArchitectureType::OptimallySpacedArray,
            &g,
            DesignConstraint::FixedModes(1),
            &DesignOptions::default()
        )
        .is_err());
    }

    #[test]
    fn synthesize_fixed_length_half_wavelength() {
        let g = geom(0.003, 100.0);
        let arch = synthesize(
            ArchitectureType::HalfWavelengthArray,
            &g,
            DesignConstraint::FixedLengths { l_tx: 1.0, l_rx: 1.0 },
            &DesignOptions::default(),
        )
        .unwrap();
        assert_eq!(arch.tx.count(), 667);
        assert!((arch.tx.spacing() - 0.0015).abs() < 1e-15);
    }

    #[test]
    fn infeasible_optimal_design_degenerates() {
        let g = geom(0.003, 100.0);
        assert!(optimal_spacing(0.003, 100.0, 2).unwrap() > 0.1);
        let arch = synthesize(
            ArchitectureType::OptimallySpacedArray,
            &g,
            DesignConstraint::FixedLengths { l_tx: 0.1, l_rx: 0.1 },
            &DesignOptions::default(),
        )
        .unwrap();
        assert_eq!(arch.tx.count(), 1);
        assert_eq!(arch.warnings.len(), 1);
    }

    #[test]
    fn max_rayleigh_matches_brute_force() {
        for &(lt, lr, d) in &[(0.3f64, 0.3f64, 20.0f64), (1.0, 1.0, 100.0), (0.1, 0.1, 100.0), (2.0, 0.5, 7.0)] {
            let brute = (2..10_000)
                .filter(|&n| {
                    let d_opt = (0.003 * d / n as f64).sqrt();
                    (n - 1) as f64 * d_opt * (lt / lr).sqrt() <= lt + 1e-12
                })
                .max();
            assert_eq!(max_rayleigh_elements(lt, lr, 0.003, d), brute, "{lt} {lr} {d}");
        }
    }

    #[test]
    fn compare_equal_aperture() {
        let g = geom(0.003, 20.0);
        let reports = compare(&g, 0.3, 0.3, &DesignOptions::default()).unwrap();
        let kinds: Vec<_> = reports.iter().map(|r| r.kind).collect();
        assert_eq!(kinds, ArchitectureType::ALL.to_vec());
        for r in &reports {
            assert!((r.dof_formula - 1.5).abs() < 1e-12, "{r:?}");
            assert!(r.n_tx > 0 && r.n_rx > 0 && r.rf_chains > 0);
        }
        let half = &reports[1];
        assert_eq!(half.n_tx, 201);
        assert!((half.bf_gain_proxy_db - 23.0).abs() < 0.05);
        let sparse = &reports[2];
        assert_eq!(sparse.n_tx, 3);
        assert!(sparse.bf_gain_proxy_db < half.bf_gain_proxy_db);
        assert_eq!(sparse.dof_numerical, 3);
    }

    #[test]
    fn compare_far_field_collapses() {
        let g = geom(0.003, 1e6);
        for r in compare(&g, 0.3, 0.3, &DesignOptions::default()).unwrap() {
            assert_eq!(r.dof_numerical, 1, "{r:?}");
        }
    }

    #[test]
    fn compare_names_architecture_over_budget() {
        let g = geom(0.003, 100.0);
        let opts = DesignOptions {
            channel: ChannelOptions {
                max_entries: 1000 * 1000,
                ..Default::default()
            },
            ..Default::default()
        };
        match compare(&g, 1.0, 1.0, &opts) {
            Err(Error::Resource { what, .. }) => assert!(what.contains("mimo_line"), "{what}"),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn sub_arrays_collapse_to_center_count() {
        for (s, d) in [(2, 50.0), (3, 100.0), (4, 100.0), (5, 200.0)] {
            let g = geom(0.003, d);
            let arch = synthesize(
                ArchitectureType::SubArrayOfArrays,
                &g,
                DesignConstraint::FixedModes(s),
                &DesignOptions::default(),
            )
            .unwrap();
            assert!(arch.warnings.is_empty(), "{:?}", arch.warnings);
            let ports = arch.port_channel(&g, &ChannelOptions::default()).unwrap();
            assert_eq!((ports.rows(), ports.cols()), (s, s));
            let dof = effective_dof(&singular_values(&ports).unwrap(), 20.0).unwrap();
            assert!(dof.strong_count.abs_diff(s) <= 1, "S={s}: {}", dof.strong_count);
            assert_eq!(rf_chain_counts(&arch, &g).unwrap().chains, s);
        }
    }

    #[test]
    fn rayleigh_design_is_well_conditioned() {
        for n in 2..=8 {
            let d_opt = optimal_spacing(0.003, 100.0, n).unwrap();
            assert!(100.0 >= 20.0 * (n - 1) as f64 * d_opt);
            let g = geom(0.003, 100.0);
            let arch = synthesize(
                ArchitectureType::OptimallySpacedArray,
                &g,
                DesignConstraint::FixedModes(n),
                &DesignOptions::default(),
            )
            .unwrap();
            let h = channel_matrix(&arch.tx, &arch.rx, &g).unwrap();
            assert!(condition_number(&h) <= 1.05, "N={n}: {}", condition_number(&h));
            // every mode carries the same power
            let dec = decompose(&h).unwrap();
            assert_eq!(dec.effective_dof(1.0).unwrap().strong_count, n);
        }
    }

    proptest! {
        #[test]
        fn rayleigh_count_is_floor_of_orthogonal_max(
            lt in 1e-3f64..3.0, lr in 1e-3f64..3.0, d in 0.5f64..500.0,
        ) {
            let bound = crate::formulas::dof_orthogonal_max(lt, lr, 0.003, d).unwrap().value;
            prop_assume!((bound - bound.round()).abs() > 1e-9);
            let want = bound.floor() as usize;
            let got = max_rayleigh_elements(lt, lr, 0.003, d).unwrap_or(1);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn spacing_scales_with_sqrt_distance(lam in 1e-4f64..0.1, d in 0.1f64..1e4, n in 2usize..64) {
            prop_assert_eq!(optimal_spacing(lam, 4.0 * d, n).unwrap(), 2.0 * optimal_spacing(lam, d, n).unwrap());
        }

        #[test]
        fn spacing_product_identity(lam in 1e-4f64..0.1, d in 0.1f64..1e4, n in 1usize..64, dt in 1e-3f64..10.0) {
            let dr = optimal_spacing_asymmetric(lam, d, n, dt).unwrap();
            let target = lam * d / n as f64;
            prop_assert!((dt * dr - target).abs() <= 1e-14 * target);
        }

        #[test]
        fn sparse_arrays_exceed_a_wavelength(lam in 1e-4f64..0.1, n in 2usize..128, margin in 1.0001f64..1e4) {
            let d = n as f64 * lam * margin;
            prop_assert!(optimal_spacing(lam, d, n).unwrap() > lam);
        }
    }
}
