//! Closed-form degrees-of-freedom and rank estimates for LoS line links.
//!
//! Every estimate depends only on dimensionless ratios of the inputs. Results
//! carry the continuous value, the integer mode count it rounds to, and soft
//! warnings when the inputs leave the regime the expression was derived for.

use serde::Serialize;

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// `max{1, L_T L_R / (lambda D)}`
    Paraxial2,
    /// `1 + 2 L_T L_R / (lambda sqrt(4 D^2 + L_R^2))`
    GeometricNearField3,
    /// `min{N, M}`
    RankCap7,
    ParaxialCapped8,
    GeometricCapped9,
    /// `min{1 + 2 L_T / lambda, N}`
    InfiniteRx10,
    /// Largest orthogonality-preserving mode count at fixed lengths.
    OrthogonalMax12,
}

impl FormulaId {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaId::Paraxial2 => "paraxial2",
            FormulaId::GeometricNearField3 => "geometric_near_field3",
            FormulaId::RankCap7 => "rank_cap7",
            FormulaId::ParaxialCapped8 => "paraxial_capped8",
            FormulaId::GeometricCapped9 => "geometric_capped9",
            FormulaId::InfiniteRx10 => "infinite_rx10",
            FormulaId::OrthogonalMax12 => "orthogonal_max12",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofFormulaResult {
    pub value: f64,
    pub rounded: usize,
    pub formula: FormulaId,
    pub warnings: Vec<String>,
}

impl DofFormulaResult {
    fn new(value: f64, formula: FormulaId) -> Self {
        Self {
            value,
            rounded: round_modes(value),
            formula,
            warnings: Vec::new(),
        }
    }

    fn warn(mut self, condition: bool, msg: impl FnOnce() -> String) -> Self {
        if condition {
            self.warnings.push(msg());
        }
        self
    }

    fn capped(mut self, n: usize, m: usize, formula: FormulaId) -> Self {
        self.value = self.value.min(n as f64).min(m as f64);
        self.rounded = round_modes(self.value);
        self.formula = formula;
        self
    }
}

/// `max(1, nearest integer)`, halves rounding up.
pub fn round_modes(value: f64) -> usize {
    value.round().max(1.0) as usize
}

fn check_counts(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::domain(format!("element counts must be >= 1, got N={n}, M={m}")));
    }
    Ok(())
}

fn check_link(l_tx: f64, l_rx: f64, wavelength: f64, distance: f64) -> Result<()> {
    ensure_positive("L_T", l_tx)?;
    ensure_positive("L_R", l_rx)?;
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("distance", distance)
}

/// Paraxial mode count between two parallel lines.
pub fn dof_paraxial(l_tx: f64, l_rx: f64, wavelength: f64, distance: f64) -> Result<DofFormulaResult> {
    check_link(l_tx, l_rx, wavelength, distance)?;
    let value = (l_tx * l_rx / (wavelength * distance)).max(1.0);
    Ok(DofFormulaResult::new(value, FormulaId::Paraxial2).warn(
        l_tx.max(l_rx) > distance / 10.0,
        || {
            format!(
                "paraxial estimate assumes L_T, L_R << D; max aperture {} exceeds D/10 = {}",
                l_tx.max(l_rx),
                distance / 10.0
            )
        },
    ))
}

/// Mode count in the geometric near field of a small transmitter facing a
/// much larger receiver.
pub fn dof_geometric(l_tx: f64, l_rx: f64, wavelength: f64, distance: f64) -> Result<DofFormulaResult> {
    check_link(l_tx, l_rx, wavelength, distance)?;
    let value = 1.0
        + 2.0 * l_tx * l_rx / (wavelength * (4.0 * distance * distance + l_rx * l_rx).sqrt());
    Ok(DofFormulaResult::new(value, FormulaId::GeometricNearField3).warn(
        l_rx < 10.0 * l_tx,
        || format!("geometric estimate assumes L_R >> L_T; got L_R = {l_rx}, L_T = {l_tx}"),
    ))
}

pub fn rank_upper_bound(n: usize, m: usize) -> Result<usize> {
    check_counts(n, m)?;
    Ok(n.min(m))
}

pub fn dof_paraxial_capped(
    l_tx: f64,
    l_rx: f64,
    wavelength: f64,
    distance: f64,
    n: usize,
    m: usize,
) -> Result<DofFormulaResult> {
    check_counts(n, m)?;
    Ok(dof_paraxial(l_tx, l_rx, wavelength, distance)?.capped(n, m, FormulaId::ParaxialCapped8))
}

pub fn dof_geometric_capped(
    l_tx: f64,
    l_rx: f64,
    wavelength: f64,
    distance: f64,
    n: usize,
    m: usize,
) -> Result<DofFormulaResult> {
    check_counts(n, m)?;
    Ok(dof_geometric(l_tx, l_rx, wavelength, distance)?.capped(n, m, FormulaId::GeometricCapped9))
}

/// Rank of an `N`-element transmitter facing an unbounded receiver.
pub fn dof_infinite_rx(l_tx: f64, wavelength: f64, n: usize) -> Result<DofFormulaResult> {
    ensure_positive("L_T", l_tx)?;
    ensure_positive("wavelength", wavelength)?;
    check_counts(n, 1)?;
    let value = (1.0 + 2.0 * l_tx / wavelength).min(n as f64);
    Ok(DofFormulaResult::new(value, FormulaId::InfiniteRx10))
}

/// With `s = L_T L_R / (2 lambda D)`: `1 + s + sqrt((1 + s)^2 - 1)`.
pub fn dof_orthogonal_max(
    l_tx: f64,
    l_rx: f64,
    wavelength: f64,
    distance: f64,
) -> Result<DofFormulaResult> {
    check_link(l_tx, l_rx, wavelength, distance)?;
    let s = l_tx * l_rx / (2.0 * wavelength * distance);
    // (1+s)^2 - 1 = s (2 + s) without cancellation for small s
    let value = 1.0 + s + (s * (2.0 + s)).sqrt();
    Ok(DofFormulaResult::new(value, FormulaId::OrthogonalMax12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn paraxial_examples() {
        let r = dof_paraxial(1.0, 1.0, 0.003, 100.0).unwrap();
        assert!(close(r.value, 10.0 / 3.0, 1e-12));
        assert_eq!(r.rounded, 3);
        assert_eq!(r.formula, FormulaId::Paraxial2);
        assert!(r.warnings.is_empty());
        assert_eq!(dof_paraxial(0.1, 0.1, 0.003, 100.0).unwrap().value, 1.0);
        assert_eq!(dof_paraxial(1e-12, 5.0, 0.003, 100.0).unwrap().value, 1.0);
        assert!(dof_paraxial(0.0, 1.0, 0.003, 100.0).is_err());
        assert!(!dof_paraxial(20.0, 1.0, 0.003, 100.0).unwrap().warnings.is_empty());
    }

    #[test]
    fn geometric_examples() {
        let r = dof_geometric(0.1, 10.0, 0.003, 5.0).unwrap();
        let want = 1.0 + 2.0 / (0.003 * 200f64.sqrt());
        assert!(close(r.value, want, 1e-12));
        assert!(close(r.value, 48.14, 1e-4));
        assert!(r.warnings.is_empty());
        assert!(close(dof_geometric(1e-12, 1.0, 0.003, 5.0).unwrap().value, 1.0, 1e-9));
        assert!(!dof_geometric(1.0, 1.0, 0.003, 5.0).unwrap().warnings.is_empty());
        assert!(dof_geometric(0.1, 10.0, 0.003, 0.0).is_err());
    }

    #[test]
    fn geometric_limit() {
        for l_tx in [0.01, 0.1] {
            let d = 5.0;
            let r = dof_geometric(l_tx, 1e6 * d, 0.003, d).unwrap();
            assert!(close(r.value, 1.0 + 2.0 * l_tx / 0.003, 1e-6));
        }
    }

    #[test]
    fn rank_bound_examples() {
        assert_eq!(rank_upper_bound(4, 6).unwrap(), 4);
        assert_eq!(rank_upper_bound(1, 1000).unwrap(), 1);
        assert_eq!(rank_upper_bound(5, 5).unwrap(), 5);
        assert!(rank_upper_bound(0, 5).is_err());
    }

    #[test]
    fn capped_examples() {
        let r = dof_paraxial_capped(1.0, 1.0, 0.003, 100.0, 2, 8).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.formula, FormulaId::ParaxialCapped8);
        let r = dof_paraxial_capped(1.0, 1.0, 0.003, 100.0, 8, 8).unwrap();
        assert!(close(r.value, 10.0 / 3.0, 1e-12));
        assert_eq!(dof_paraxial_capped(5.0, 5.0, 0.003, 100.0, 1, 9).unwrap().value, 1.0);

        let r = dof_geometric_capped(0.1, 10.0, 0.003, 5.0, 100, 100).unwrap();
        assert!(close(r.value, 48.14, 1e-4));
        assert_eq!(dof_geometric_capped(0.1, 10.0, 0.003, 5.0, 16, 100).unwrap().value, 16.0);
        assert_eq!(dof_geometric_capped(0.1, 10.0, 0.003, 5.0, 16, 1).unwrap().value, 1.0);
        assert!(dof_geometric_capped(0.1, 10.0, 0.003, 5.0, 0, 1).is_err());
    }

    #[test]
    fn infinite_rx_examples() {
        assert_eq!(dof_infinite_rx(1.0, 0.003, 4).unwrap().value, 4.0);
        let r = dof_infinite_rx(1.0, 0.003, 10_000).unwrap();
        assert!(close(r.value, 667.666_666_666_666_7, 1e-12));
        assert!(close(dof_infinite_rx(1e-12, 0.003, 7).unwrap().value, 1.0, 1e-9));
        assert!(dof_infinite_rx(1.0, 0.003, 0).is_err());
    }

    #[test]
    fn orthogonal_max_examples() {
        let r = dof_orthogonal_max(1.0, 1.0, 0.003, 100.0).unwrap();
        let s = 5.0 / 3.0;
        assert!(close(r.value, 1.0 + s + ((1.0 + s) * (1.0 + s) - 1.0f64).sqrt(), 1e-12));
        assert!(close(r.value, 5.139, 1e-3));
        assert!(close(dof_orthogonal_max(1e-9, 1.0, 0.003, 100.0).unwrap().value, 1.0, 1e-3));

        let d = 1.0 / (0.003 * 20.0);
        let r = dof_orthogonal_max(1.0, 1.0, 0.003, d).unwrap();
        assert!(close(r.value, 11.0 + 120f64.sqrt(), 1e-12));
        let gap = (r.value - 20.0) / 20.0;
        assert!((gap - 0.0977).abs() < 1e-3, "{gap}");
    }

    #[test]
    fn rounding_convention() {
        assert_eq!(round_modes(1.5), 2);
        assert_eq!(round_modes(0.2), 1);
        assert_eq!(round_modes(3.333), 3);
    }

    fn all_values(lt: f64, lr: f64, lam: f64, d: f64) -> Vec<f64> {
        vec![
            dof_paraxial(lt, lr, lam, d).unwrap().value,
            dof_geometric(lt, lr, lam, d).unwrap().value,
            dof_paraxial_capped(lt, lr, lam, d, 50, 70).unwrap().value,
            dof_geometric_capped(lt, lr, lam, d, 50, 70).unwrap().value,
            dof_infinite_rx(lt, lam, 50).unwrap().value,
            dof_orthogonal_max(lt, lr, lam, d).unwrap().value,
        ]
    }

    proptest! {
        #[test]
        fn values_at_least_one(lt in 1e-4f64..10.0, lr in 1e-4f64..10.0, lam in 1e-4f64..0.1, d in 0.1f64..1e4) {
            for v in all_values(lt, lr, lam, d) {
                prop_assert!(v >= 1.0);
            }
        }

        #[test]
        fn scale_invariant(lt in 1e-3f64..10.0, lr in 1e-3f64..10.0, lam in 1e-4f64..0.1, d in 0.1f64..1e4, exp in -10i32..10) {
            let s = 2f64.powi(exp);
            prop_assert_eq!(all_values(lt, lr, lam, d), all_values(lt * s, lr * s, lam * s, d * s));
        }

        #[test]
        fn paraxial_monotone(lt in 1e-3f64..10.0, lr in 1e-3f64..10.0, lam in 1e-4f64..0.1, d in 0.1f64..1e4, f in 1.0f64..3.0) {
            let base = dof_paraxial(lt, lr, lam, d).unwrap().value;
            prop_assert!(dof_paraxial(lt * f, lr, lam, d).unwrap().value >= base);
            prop_assert!(dof_paraxial(lt, lr * f, lam, d).unwrap().value >= base);
            prop_assert!(dof_paraxial(lt, lr, lam * f, d).unwrap().value <= base);
            prop_assert!(dof_paraxial(lt, lr, lam, d * f).unwrap().value <= base);
            if base > 1.0 && f > 1.0 + 1e-9 {
                prop_assert!(dof_paraxial(lt, lr, lam, d * f).unwrap().value < base);
            }
        }

        #[test]
        fn caps_respect_rank_bound(lt in 1e-3f64..10.0, lr in 1e-3f64..10.0, d in 0.1f64..1e3, n in 1usize..64, m in 1usize..64) {
            let cap = rank_upper_bound(n, m).unwrap() as f64;
            prop_assert!(dof_paraxial_capped(lt, lr, 0.003, d, n, m).unwrap().value <= cap);
            prop_assert!(dof_geometric_capped(lt, lr, 0.003, d, n, m).unwrap().value <= cap);
            prop_assert!(dof_paraxial_capped(lt, lr, 0.003, d, n, m).unwrap().rounded <= cap as usize);
        }
    }
}
