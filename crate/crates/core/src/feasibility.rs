//! Geometry of the set of infection-rate pairs `(beta1, beta2)` for which the
//! disease-free equilibrium is stable at a given susceptible split `rho`.
//!
//! The set is cut out of the unit square by `beta2 < beta1` and
//! `rho*beta1 + (1-rho)*beta2 < kappa`. Its closure is a convex polygon whose
//! shape depends only on the sign of `kappa - rho`: the stability line leaves
//! through the right edge `beta1 = 1` above the axis (Type 1), exactly at the
//! corner `(1, 0)` (Type 0), or through the axis at `kappa/rho < 1` (Type -1).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ModelKind;

/// Distance from `rho = kappa` within which the set is reported as Type 0.
pub const TYPE_ZERO_TOLERANCE: f64 = 1e-12;

/// True iff `(beta1, beta2)` gives `R0 < 1` at split `rho`.
pub fn rho_feasible(beta1: f64, beta2: f64, rho: f64, kappa: f64) -> bool {
    rho * beta1 + (1.0 - rho) * beta2 < kappa
}

/// Largest split for which the equilibrium is stable: stable iff `rho < P`.
/// Values `>= 1` mean every split is stable.
pub fn threshold_p(beta1: f64, beta2: f64, kappa: f64) -> Result<f64> {
    if !(beta1 > 0.0 && beta1 <= 1.0) {
        return Err(Error::range("beta1", format!("{beta1} not in (0, 1]")));
    }
    if !(beta2 > 0.0 && beta2 < beta1.min(kappa)) {
        return Err(Error::range(
            "beta2",
            format!("{beta2} not in (0, min(beta1, kappa)); no split is stable when beta2 >= kappa"),
        ));
    }
    Ok((kappa - beta2) / (beta1 - beta2))
}

/// Stable iff `beta2 < B2`.
pub fn threshold_b2(beta1: f64, rho: f64, kappa: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::range("rho", format!("{rho} not in (0, 1)")));
    }
    let cap = 1.0f64.min(kappa / rho);
    if !(beta1 > 0.0 && beta1 <= cap) {
        return Err(Error::range("beta1", format!("{beta1} not in (0, {cap}]; no stable beta2 exists")));
    }
    if beta1 <= kappa {
        Ok(beta1)
    } else {
        Ok((kappa - rho * beta1) / (1.0 - rho))
    }
}

/// Stable iff `beta2 < beta1 <= B1` (strict at the upper end for `R0 < 1`).
pub fn threshold_b1(beta2: f64, rho: f64, kappa: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::range("rho", format!("{rho} not in (0, 1)")));
    }
    if !(beta2 > 0.0 && beta2 < kappa) {
        return Err(Error::range("beta2", format!("{beta2} not in (0, kappa = {kappa})")));
    }
    Ok(1.0f64.min((kappa - (1.0 - rho) * beta2) / rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeasibleType {
    Type1,
    Type0,
    TypeMinus1,
}

impl FeasibleType {
    pub fn value(self) -> i8 {
        match self {
            FeasibleType::Type1 => 1,
            FeasibleType::Type0 => 0,
            FeasibleType::TypeMinus1 => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeasibleType::Type1 => "TYPE_1",
            FeasibleType::Type0 => "TYPE_0",
            FeasibleType::TypeMinus1 => "TYPE_MINUS_1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSetReport {
    pub type_label: FeasibleType,
    /// Hull vertices `(beta1, beta2)`, counter-clockwise from the origin.
    pub vertices: Vec<(f64, f64)>,
    pub kappa: f64,
    pub rho: f64,
}

impl FeasibleSetReport {
    /// Closed-hull membership test (with tolerance `tol`).
    pub fn contains(&self, beta1: f64, beta2: f64, tol: f64) -> bool {
        let v = &self.vertices;
        (0..v.len()).all(|i| {
            let (ax, ay) = v[i];
            let (bx, by) = v[(i + 1) % v.len()];
            (bx - ax) * (beta2 - ay) - (by - ay) * (beta1 - ax) >= -tol
        })
    }
}

fn split_upper_bound(model: ModelKind) -> f64 {
    match model {
        ModelKind::Mb => 0.5,
        _ => 1.0,
    }
}

/// Type and hull of the feasible set for split `rho` and recovery rate
/// `kappa`. For `Mb` the split must lie below one half.
pub fn classify_feasible_set(rho: f64, kappa: f64, model: ModelKind) -> Result<FeasibleSetReport> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::range("kappa", format!("{kappa} not in (0, 1]")));
    }
    let upper = split_upper_bound(model);
    if !(rho > 0.0 && rho < upper) {
        return Err(Error::range("rho", format!("{rho} not in (0, {upper}) for model {}", model.name())));
    }

    let (type_label, vertices) = if (rho - kappa).abs() <= TYPE_ZERO_TOLERANCE {
        (FeasibleType::Type0, vec![(0.0, 0.0), (1.0, 0.0), (kappa, kappa)])
    } else if rho < kappa {
        let exit = (kappa - rho) / (1.0 - rho);
        let mut v = vec![(0.0, 0.0), (1.0, 0.0), (1.0, exit), (kappa, kappa)];
        if kappa >= 1.0 {
            // Stability line runs through (1, 1): the hull is the half-square.
            v.remove(2);
        }
        (FeasibleType::Type1, v)
    } else {
        (FeasibleType::TypeMinus1, vec![(0.0, 0.0), (kappa / rho, 0.0), (kappa, kappa)])
    };

    Ok(FeasibleSetReport {
        type_label,
        vertices,
        kappa,
        rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    Rho,
    Kappa,
}

/// A change of Type between two adjacent grid values. When a grid point
/// lands on the Type 0 set itself, the transitions on either side of it are
/// merged and `exact` carries that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
    pub from: FeasibleType,
    pub to: FeasibleType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationScan {
    pub axis: ScanAxis,
    pub model: ModelKind,
    /// The parameter held fixed (kappa for a rho scan, rho for a kappa scan).
    pub fixed: f64,
    pub grid: Vec<f64>,
    pub labels: Vec<FeasibleType>,
    pub breakpoints: Vec<Breakpoint>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::range("grid", "empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::range("grid", "must be strictly increasing"));
    }
    Ok(())
}

fn find_breakpoints(grid: &[f64], labels: &[FeasibleType]) -> Vec<Breakpoint> {
    let mut out: Vec<Breakpoint> = Vec::new();
    for i in 1..grid.len() {
        if labels[i] == labels[i - 1] {
            continue;
        }
        // Merge 1 -> 0 -> -1 (or reverse) through a single Type 0 sample.
        if let Some(prev) = out.last_mut() {
            if prev.to == FeasibleType::Type0 && prev.upper == grid[i - 1] {
                prev.exact = Some(grid[i - 1]);
                prev.upper = grid[i];
                prev.to = labels[i];
                continue;
            }
        }
        out.push(Breakpoint {
            lower: grid[i - 1],
            upper: grid[i],
            exact: None,
            from: labels[i - 1],
            to: labels[i],
        });
    }
    out
}

/// Label each split in `grid` for fixed `kappa`.
pub fn bifurcation_scan(model: ModelKind, kappa: f64, grid: &[f64]) -> Result<BifurcationScan> {
    check_grid(grid)?;
    let labels = grid
        .par_iter()
        .map(|&rho| classify_feasible_set(rho, kappa, model).map(|r| r.type_label))
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationScan {
        axis: ScanAxis::Rho,
        model,
        fixed: kappa,
        breakpoints: find_breakpoints(grid, &labels),
        grid: grid.to_vec(),
        labels,
    })
}

/// Label each recovery rate in `grid` for fixed split `rho`.
pub fn bifurcation_scan_kappa(model: ModelKind, rho: f64, grid: &[f64]) -> Result<BifurcationScan> {
    check_grid(grid)?;
    let labels = grid
        .par_iter()
        .map(|&kappa| classify_feasible_set(rho, kappa, model).map(|r| r.type_label))
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationScan {
        axis: ScanAxis::Kappa,
        model,
        fixed: rho,
        breakpoints: find_breakpoints(grid, &labels),
        grid: grid.to_vec(),
        labels,
    })
}

/// `steps` evenly spaced interior points of the model's admissible split
/// range.
pub fn rho_grid(model: ModelKind, steps: usize) -> Vec<f64> {
    let upper = split_upper_bound(model);
    (1..=steps)
        .map(|i| upper * i as f64 / (steps + 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn feasibility_examples() {
        assert!(rho_feasible(0.0005, 0.0001, 0.5, 0.0006));
        for rho in [0.1, 0.5, 0.9] {
            assert!(!rho_feasible(0.9, 0.5, rho, 0.5));
            assert!(rho_feasible(0.5, 0.5 - 1e-3, rho, 0.5));
        }
    }

    #[test]
    fn threshold_p_examples() {
        assert!((threshold_p(0.8, 0.2, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(threshold_p(0.5, 0.2, 0.5).unwrap(), 1.0);
        assert!(matches!(threshold_p(0.0042, 0.0009, 0.0006), Err(Error::RejectRange { .. })));
    }

    #[test]
    fn threshold_b2_examples() {
        assert!((threshold_b2(0.8, 0.25, 0.5).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(threshold_b2(0.4, 0.25, 0.5).unwrap(), 0.4);
        for rho in [0.1, 0.4, 0.8] {
            let kappa = 0.3;
            let second = (kappa - rho * kappa) / (1.0 - rho);
            assert!((threshold_b2(kappa, rho, kappa).unwrap() - kappa).abs() < 1e-15);
            assert!((second - kappa).abs() < 1e-15);
        }
        assert!(threshold_b2(0.9, 0.75, 0.5).is_err());
    }

    #[test]
    fn threshold_b1_examples() {
        assert_eq!(threshold_b1(0.2, 0.25, 0.5).unwrap(), 1.0);
        assert!((threshold_b1(0.1, 0.5, 0.2).unwrap() - 0.3).abs() < 1e-15);
        let kappa = 0.4;
        assert!((threshold_b1(kappa * (1.0 - 1e-12), 0.6, kappa).unwrap() - kappa).abs() < 1e-12);
        assert!(threshold_b1(0.5, 0.5, 0.4).is_err());
    }

    #[test]
    fn half_kappa_classification() {
        let r = classify_feasible_set(0.25, 0.5, ModelKind::Ma).unwrap();
        assert_eq!(r.type_label, FeasibleType::Type1);
        assert_eq!(r.vertices.len(), 4);
        assert!(r.vertices.contains(&(0.5, 0.5)));
        let exit = r.vertices.iter().find(|v| v.0 == 1.0 && v.1 > 0.0).unwrap();
        assert!((exit.1 - 1.0 / 3.0).abs() < 1e-15);

        let r = classify_feasible_set(0.5, 0.5, ModelKind::Ma).unwrap();
        assert_eq!(r.type_label, FeasibleType::Type0);
        assert_eq!(r.vertices.len(), 3);

        let r = classify_feasible_set(0.75, 0.5, ModelKind::Ma).unwrap();
        assert_eq!(r.type_label, FeasibleType::TypeMinus1);
        let intercept = r.vertices.iter().find(|v| v.1 == 0.0 && v.0 > 0.0).unwrap();
        assert!((intercept.0 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unit_kappa_is_half_square() {
        let r = classify_feasible_set(0.6, 1.0, ModelKind::Ma).unwrap();
        assert_eq!(r.type_label, FeasibleType::Type1);
        assert_eq!(r.vertices, vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn model_split_bounds() {
        assert!(classify_feasible_set(0.6, 0.3, ModelKind::Mb).is_err());
        assert!(classify_feasible_set(0.0, 0.3, ModelKind::Ma).is_err());
        assert!(classify_feasible_set(0.2, 0.0, ModelKind::Ma).is_err());
    }

    #[test]
    fn ma_scan_breaks_at_kappa() {
        let grid = rho_grid(ModelKind::Ma, 99);
        let scan = bifurcation_scan(ModelKind::Ma, 0.3, &grid).unwrap();
        assert_eq!(scan.breakpoints.len(), 1);
        let bp = scan.breakpoints[0];
        assert!(bp.lower <= 0.3 && 0.3 <= bp.upper);
        assert_eq!(bp.from, FeasibleType::Type1);
        assert_eq!(bp.to, FeasibleType::TypeMinus1);
        assert_eq!(bp.exact, Some(0.3));
    }

    #[test]
    fn mb_scans() {
        let grid = rho_grid(ModelKind::Mb, 200);
        let scan = bifurcation_scan(ModelKind::Mb, 0.5, &grid).unwrap();
        assert!(scan.breakpoints.is_empty());
        assert!(scan.labels.iter().all(|&l| l == FeasibleType::Type1));

        let scan = bifurcation_scan(ModelKind::Mb, 0.3, &grid).unwrap();
        assert_eq!(scan.breakpoints.len(), 1);
        let bp = scan.breakpoints[0];
        assert!(bp.lower < 0.3 && 0.3 < bp.upper);
    }

    #[test]
    fn kappa_scan_mirrors_rho_scan() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let scan = bifurcation_scan_kappa(ModelKind::Ma, 0.42, &grid).unwrap();
        assert_eq!(scan.breakpoints.len(), 1);
        assert_eq!(scan.breakpoints[0].from, FeasibleType::TypeMinus1);
        assert_eq!(scan.breakpoints[0].to, FeasibleType::Type1);
    }

    #[test]
    fn scan_rejects_unsorted_grid() {
        assert!(bifurcation_scan(ModelKind::Ma, 0.3, &[0.2, 0.1]).is_err());
    }

    proptest! {
        #[test]
        fn vertices_are_feasible(rho in 0.001f64..0.999, kappa in 0.001f64..1.0) {
            let r = classify_feasible_set(rho, kappa, ModelKind::Ma).unwrap();
            for &(b1, b2) in &r.vertices {
                prop_assert!(rho * b1 + (1.0 - rho) * b2 <= kappa + 1e-12);
                prop_assert!(b2 <= b1);
                prop_assert!((0.0..=1.0).contains(&b1) && b2 >= 0.0);
            }
            let distinct = match r.type_label {
                FeasibleType::Type1 => 4,
                _ => 3,
            };
            prop_assert_eq!(r.vertices.len(), distinct);
        }

        #[test]
        fn thresholds_agree(b1 in 0.001f64..0.999, frac in 0.001f64..0.999, rho in 0.001f64..0.999, kappa in 0.001f64..1.0) {
            let b2 = b1 * frac;
            let feasible = rho_feasible(b1, b2, rho, kappa);
            if let Ok(p) = threshold_p(b1, b2, kappa) {
                prop_assert_eq!(feasible, rho < p);
            }
            if let Ok(t) = threshold_b2(b1, rho, kappa) {
                prop_assert_eq!(feasible, b2 < t);
            }
            if let Ok(t) = threshold_b1(b2, rho, kappa) {
                prop_assert_eq!(feasible, b1 < t);
            }
            if b2 >= kappa {
                prop_assert!(!feasible);
            }
        }

        #[test]
        fn core_below_kappa_always_feasible(kappa in 0.001f64..1.0, u in 0.0f64..1.0, v in 0.0f64..1.0, rho in 0.0001f64..0.9999) {
            let b1 = kappa * (1e-9 + u * (1.0 - 2e-9));
            let b2 = b1 * v;
            prop_assert!(rho_feasible(b1, b2, rho, kappa));
        }
    }
}
