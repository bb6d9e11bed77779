//! Density of states from the retarded resolvent.
//!
//! The imaginary part of the resolvent trace reduces, in the eigenbasis,
//! to a sum of Lorentzians of width η centered on the eigenvalues. The
//! curve is evaluated from eigenvalues directly — O(M) per grid point
//! instead of an O(M³) matrix inversion — and averaged over the
//! ensemble. Grid points are independent, so the evaluation parallelizes
//! over the grid with a fixed member summation order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::EigenSystem;

/// Ensemble-averaged density of states sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DOSCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub eta: f64,
    pub sample_count: usize,
}

/// Green's-function density of states with broadening `eta`, averaged
/// over the ensemble:
/// `ρ(λ) = ⟨ (1/πM) Σ_m η / ((λ−λ_m)² + η²) ⟩`.
pub fn dos_green(ensemble: &[EigenSystem], grid: &[f64], eta: f64) -> Result<DOSCurve> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be > 0, got {eta}")));
    }
    if ensemble.is_empty() {
        return Err(Error::Argument("empty ensemble".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("grid must be strictly ascending".into()));
    }
    // Pool eigenvalues with per-member weights 1/(pi * M_member * samples)
    // so heterogeneous dimensions still average member densities.
    let samples = ensemble.len() as f64;
    let mut poles = Vec::new();
    for es in ensemble {
        let w = 1.0 / (std::f64::consts::PI * es.dim() as f64 * samples);
        for &l in es.eigenvalues() {
            poles.push((l, w));
        }
    }
    let density = par::indexed_map(grid.len(), |gi| {
        let x = grid[gi];
        poles
            .iter()
            .map(|&(l, w)| w * eta / ((x - l) * (x - l) + eta * eta))
            .sum::<f64>()
    });
    Ok(DOSCurve {
        grid: grid.to_vec(),
        density,
        eta,
        sample_count: ensemble.len(),
    })
}

/// Trapezoid integral of `|f - g|` over the overlap of `curve` with
/// `[a, b]`, divided by the interval width: the mean absolute deviation
/// between the sampled curve and the reference on that interval.
pub fn l1_distance(curve: &DOSCurve, reference: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let pts: Vec<(f64, f64)> = curve
        .grid
        .iter()
        .zip(&curve.density)
        .filter(|(&x, _)| x >= a && x <= b)
        .map(|(&x, &y)| (x, (y - reference(x)).abs()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mut acc = 0.0;
    for w in pts.windows(2) {
        acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
    }
    acc / (b - a)
}

/// Trapezoid integral of the curve over its own grid.
pub fn trapezoid_mass(grid: &[f64], density: &[f64]) -> f64 {
    grid.windows(2)
        .zip(density.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::EigenSystem;
    use approx::assert_abs_diff_eq;

    fn single_mode(lambda: f64) -> EigenSystem {
        EigenSystem::new(vec!["X".into()], vec![lambda], vec![vec![1.0]]).unwrap()
    }

    #[test]
    fn one_pole_resolvent_is_a_lorentzian() {
        let es = single_mode(0.7);
        let eta = 0.05;
        let grid: Vec<f64> = (0..400).map(|i| -1.0 + i as f64 * 0.01).collect();
        let dos = dos_green(&[es], &grid, eta).unwrap();
        let peak_idx = dos
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_abs_diff_eq!(dos.grid[peak_idx], 0.7, epsilon = 0.011);
        let peak = dos.density[peak_idx];
        assert_abs_diff_eq!(peak, 1.0 / (std::f64::consts::PI * eta), epsilon = 0.05);
    }

    #[test]
    fn mass_is_one_when_grid_spans_all_mass() {
        // Lorentzian tails decay like 1/x^2: +-300 eta around the spectrum
        // captures (2/pi) atan(300) = 0.9979 of the mass.
        let members: Vec<EigenSystem> = (0..4)
            .map(|k| single_mode(0.5 + 0.1 * k as f64))
            .collect();
        let eta = 0.02;
        let lo = 0.5 - 300.0 * eta;
        let hi = 0.8 + 300.0 * eta;
        let grid: Vec<f64> = (0..24_000)
            .map(|i| lo + (hi - lo) * i as f64 / 23_999.0)
            .collect();
        let dos = dos_green(&members, &grid, eta).unwrap();
        let mass = trapezoid_mass(&dos.grid, &dos.density);
        assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
    }

    #[test]
    fn rejects_nonpositive_eta() {
        let es = single_mode(1.0);
        assert!(matches!(
            dos_green(&[es.clone()], &[0.0, 1.0], 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            dos_green(&[es], &[0.0, 1.0], -0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resolvent_identity_against_complex_inversion() {
        // Oracle: invert (λ + iη)I − Λ explicitly and trace the imaginary
        // part; must match the eigenvalue closed form pointwise.
        use nalgebra::{Complex, DMatrix};

        let labels: Vec<String> = (0..5).map(|i| format!("A{i}")).collect();
        let mut rng = crate::rng::member_rng(31, 0);
        let l = DMatrix::from_fn(5, 30, |_, _| {
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
        });
        let corr = crate::returns::correlation(&l, &labels).unwrap();
        let es = crate::spectral::eig_sym(&corr).unwrap();
        let eta = 0.07;
        let grid: Vec<f64> = (0..200).map(|i| -0.5 + i as f64 * 0.02).collect();
        let dos = dos_green(std::slice::from_ref(&es), &grid, eta).unwrap();

        let lam_c = corr.to_matrix().map(|x| Complex::new(x, 0.0));
        for (gi, &x) in grid.iter().enumerate() {
            let z = Complex::new(x, eta);
            let a = DMatrix::from_diagonal_element(5, 5, z) - &lam_c;
            let g = a.try_inverse().expect("resolvent invertible off the real axis");
            let tr_im: f64 = (0..5).map(|i| g[(i, i)].im).sum();
            let oracle = -tr_im / (std::f64::consts::PI * 5.0);
            assert!(
                (oracle - dos.density[gi]).abs() < 1e-10,
                "grid point {x}: oracle {oracle} vs closed form {}",
                dos.density[gi]
            );
        }
    }
}
