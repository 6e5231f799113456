//! Scalar metrics on reconstructed and simulated distributions: half-plane
//! mass ratios against the dividing-line angle, and grid distances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tomography::SpatialGrid;

/// Floor on the denominator mass; keeps degenerate one-sided distributions
/// finite and is reported alongside the curve.
pub const RATIO_FLOOR: f64 = 1e-9;

/// R(theta) samples with propagated shot-noise uncertainties.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCurve {
    pub theta: Vec<f64>,
    pub ratio: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl RatioCurve {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "theta,ratio,sigma")?;
        for i in 0..self.theta.len() {
            writeln!(f, "{},{},{}", self.theta[i], self.ratio[i], self.sigma[i])?;
        }
        Ok(())
    }
}

/// Fraction of the square cell centered at (cx, cy) with half-width `h`
/// lying on the positive side of n . r > 0, by clipping the cell against
/// the line (Sutherland-Hodgman) and taking the shoelace area.
fn cell_fraction(cx: f64, cy: f64, h: f64, n: (f64, f64)) -> f64 {
    let corners = [
        (cx - h, cy - h),
        (cx + h, cy - h),
        (cx + h, cy + h),
        (cx - h, cy + h),
    ];
    let side = |p: (f64, f64)| n.0 * p.0 + n.1 * p.1;
    // fast paths: cell entirely on one side
    let sides: Vec<f64> = corners.iter().map(|&p| side(p)).collect();
    if sides.iter().all(|&s| s >= 0.0) {
        return 1.0;
    }
    if sides.iter().all(|&s| s <= 0.0) {
        return 0.0;
    }
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(6);
    for i in 0..4 {
        let (p, sp) = (corners[i], sides[i]);
        let (q, sq) = (corners[(i + 1) % 4], sides[(i + 1) % 4]);
        if sp >= 0.0 {
            poly.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            poly.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    if poly.len() < 3 {
        return 0.0;
    }
    let mut area = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        area += a.0 * b.1 - b.0 * a.1;
    }
    (area.abs() / 2.0) / (4.0 * h * h)
}

/// Mass fractions per cell on the numerator side of the dividing line at
/// angle `theta` from vertical; the numerator side contains the crescent
/// lobe (negative x at theta = 0), normal n = (-cos theta, sin theta).
fn side_fractions(grid: &SpatialGrid, theta: f64) -> Vec<f64> {
    let xs = grid.spec.axis();
    let res = grid.spec.resolution;
    let h = (xs[1] - xs[0]) / 2.0;
    let n = (-theta.cos(), theta.sin());
    let mut f = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            f.push(cell_fraction(xs[i], xs[j], h, n));
        }
    }
    f
}

fn split_masses(grid: &SpatialGrid, fractions: &[f64]) -> (f64, f64) {
    let area = grid.spec.cell_area();
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, f) in grid.values.iter().zip(fractions.iter()) {
        num += v * f * area;
        den += v * (1.0 - f) * area;
    }
    (num, den)
}

/// R(theta): mass on the crescent side of the dividing line over the mass
/// on the other side, with cells straddling the line split by fractional
/// area.
pub fn half_plane_ratio(grid: &SpatialGrid, theta: f64) -> Result<f64> {
    if grid.integral() <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    let fractions = side_fractions(grid, theta);
    let (num, den) = split_masses(grid, &fractions);
    Ok(num / den.max(RATIO_FLOOR))
}

/// R(theta) on a uniform grid over [0, pi/2], with shot-noise uncertainties
/// propagated through the linear reconstruction and a first-order Taylor
/// expansion of the ratio whenever the grid carries a noise model.
pub fn ratio_curve(grid: &SpatialGrid, n_angles: usize) -> Result<RatioCurve> {
    if n_angles < 2 {
        return Err(Error::GridMismatch(format!(
            "ratio curve needs at least 2 angles, got {n_angles}"
        )));
    }
    if grid.integral() <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    let mut theta = Vec::with_capacity(n_angles);
    let mut ratio = Vec::with_capacity(n_angles);
    let mut sigma = Vec::with_capacity(n_angles);
    for a in 0..n_angles {
        let th = std::f64::consts::FRAC_PI_2 * a as f64 / (n_angles - 1) as f64;
        let fractions = side_fractions(grid, th);
        let (num, den) = split_masses(grid, &fractions);
        let r = num / den.max(RATIO_FLOOR);
        theta.push(th);
        ratio.push(r);
        sigma.push(match &grid.noise {
            Some(noise) => ratio_sigma(grid, &fractions, num, den, noise),
            None => 0.0,
        });
    }
    Ok(RatioCurve { theta, ratio, sigma })
}

/// Var(A), Var(B), Cov(A, B) of the side masses under the per-sample shot
/// variances, using that both are linear functionals of the measured
/// cosine/sine maps; then sigma_R by the Taylor expansion of A/B.
fn ratio_sigma(
    grid: &SpatialGrid,
    fractions: &[f64],
    num: f64,
    den: f64,
    noise: &crate::tomography::ReconNoise,
) -> f64 {
    let xs = grid.spec.axis();
    let res = grid.spec.resolution;
    let area = grid.spec.cell_area();
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut cov = 0.0;
    // per-axis phase tables keep this O(nk (res + res^2)) without trig in
    // the inner loop
    let mut cos_x = vec![0.0; res];
    let mut sin_x = vec![0.0; res];
    let mut cos_y = vec![0.0; res];
    let mut sin_y = vec![0.0; res];
    for (k, &(qx, qy)) in noise.qvecs.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            let (s, c) = (qx * x).sin_cos();
            cos_x[i] = c;
            sin_x[i] = s;
            let (s, c) = (qy * x).sin_cos();
            cos_y[i] = c;
            sin_y[i] = s;
        }
        let mut ga_cos = 0.0;
        let mut ga_sin = 0.0;
        let mut gb_cos = 0.0;
        let mut gb_sin = 0.0;
        for i in 0..res {
            for j in 0..res {
                let f = fractions[i * res + j];
                let cos_qr = cos_x[i] * cos_y[j] - sin_x[i] * sin_y[j];
                let sin_qr = sin_x[i] * cos_y[j] + cos_x[i] * sin_y[j];
                ga_cos += f * cos_qr;
                ga_sin += f * sin_qr;
                gb_cos += (1.0 - f) * cos_qr;
                gb_sin += (1.0 - f) * sin_qr;
            }
        }
        let w = noise.coef[k] * area;
        let (vc, vs) = (noise.var_cos[k], noise.var_sin[k]);
        var_a += w * w * (vc * ga_cos * ga_cos + vs * ga_sin * ga_sin);
        var_b += w * w * (vc * gb_cos * gb_cos + vs * gb_sin * gb_sin);
        cov += w * w * (vc * ga_cos * gb_cos + vs * ga_sin * gb_sin);
    }
    let b = den.max(RATIO_FLOOR);
    let r = num / b;
    ((var_a / (b * b)) + (r * r * var_b / (b * b)) - 2.0 * r * cov / (b * b))
        .max(0.0)
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    L1,
    L2,
}

/// Grid distance between two distributions on identical grids; L1 of
/// normalized distributions lies in [0, 2].
pub fn distribution_distance(
    a: &SpatialGrid,
    b: &SpatialGrid,
    metric: DistanceMetric,
) -> Result<f64> {
    if a.spec.resolution != b.spec.resolution || (a.spec.extent - b.spec.extent).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "{}x[-{},{}] vs {}x[-{},{}]",
            a.spec.resolution, a.spec.extent, a.spec.extent,
            b.spec.resolution, b.spec.extent, b.spec.extent
        )));
    }
    let area = a.spec.cell_area();
    Ok(match metric {
        DistanceMetric::L1 => {
            a.values
                .iter()
                .zip(b.values.iter())
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
                * area
        }
        DistanceMetric::L2 => (a
            .values
            .iter()
            .zip(b.values.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            * area)
            .sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ModeSpace, SpinBosonState};
    use crate::tomography::{position_distribution, GridSpec};
    use ndarray::Array2;

    fn vacuum_grid() -> SpatialGrid {
        let sp = ModeSpace::new(6, 6);
        let st = SpinBosonState::basis_state(sp, 0, 0, 0);
        position_distribution(&st, &GridSpec::default())
    }

    fn gaussian_grid(spec: &GridSpec, cx: f64, cy: f64, var: f64) -> SpatialGrid {
        let xs = spec.axis();
        let res = spec.resolution;
        let mut values = Array2::zeros((res, res));
        for i in 0..res {
            for j in 0..res {
                let dx = xs[i] - cx;
                let dy = xs[j] - cy;
                values[(i, j)] = (-(dx * dx + dy * dy) / (2.0 * var)).exp()
                    / (std::f64::consts::TAU * var);
            }
        }
        SpatialGrid { spec: *spec, values, noise: None }
    }

    #[test]
    fn isotropic_distribution_has_unit_ratio_everywhere() {
        let grid = vacuum_grid();
        let curve = ratio_curve(&grid, 16).unwrap();
        for (th, r) in curve.theta.iter().zip(curve.ratio.iter()) {
            assert!((r - 1.0).abs() < 1e-6, "R({th}) = {r}");
        }
        assert!(curve.sigma.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn point_mass_hits_the_regularization_floor() {
        let spec = GridSpec { extent: 2.0, resolution: 21 };
        let mut values = Array2::zeros((21, 21));
        values[(2, 10)] = 1.0; // fully on the negative-x (numerator) side
        let grid = SpatialGrid { spec, values, noise: None };
        let r = half_plane_ratio(&grid, 0.0).unwrap();
        assert!(r.is_finite() && r > 1e6, "floored ratio {r}");
    }

    #[test]
    fn crescent_side_is_the_numerator() {
        // mass at negative x: R(0) large, not small
        let spec = GridSpec { extent: 3.0, resolution: 61 };
        let grid = gaussian_grid(&spec, -1.0, 0.0, 0.25);
        let r = half_plane_ratio(&grid, 0.0).unwrap();
        assert!(r > 10.0, "negative-x lobe must dominate: {r}");
    }

    #[test]
    fn rotating_the_distribution_by_pi_inverts_the_ratio() {
        let spec = GridSpec { extent: 3.0, resolution: 41 };
        let grid = gaussian_grid(&spec, -0.8, 0.5, 0.3);
        let res = spec.resolution;
        let mut rotated = Array2::zeros((res, res));
        for i in 0..res {
            for j in 0..res {
                rotated[(i, j)] = grid.values[(res - 1 - i, res - 1 - j)];
            }
        }
        let rot = SpatialGrid { spec, values: rotated, noise: None };
        for th in [0.0, 0.4, 1.1] {
            let r = half_plane_ratio(&grid, th).unwrap();
            let ri = half_plane_ratio(&rot, th).unwrap();
            assert!((r * ri - 1.0).abs() < 1e-9, "theta {th}: {r} * {ri}");
        }
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let spec = GridSpec { extent: 3.0, resolution: 41 };
        let grid = gaussian_grid(&spec, -0.6, 0.2, 0.4);
        let scaled = SpatialGrid {
            spec,
            values: grid.values.mapv(|v| 17.3 * v),
            noise: None,
        };
        for th in [0.0, 0.7, std::f64::consts::FRAC_PI_2] {
            let a = half_plane_ratio(&grid, th).unwrap();
            let b = half_plane_ratio(&scaled, th).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs());
        }
    }

    #[test]
    fn reflection_symmetric_distribution_is_unity_at_the_symmetry_angle() {
        // symmetric under y -> -y: at theta = pi/2 the dividing line is
        // horizontal and both sides carry equal mass
        let spec = GridSpec { extent: 3.0, resolution: 41 };
        let grid = gaussian_grid(&spec, -1.2, 0.0, 0.3);
        let r = half_plane_ratio(&grid, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "symmetry angle ratio {r}");
    }

    #[test]
    fn empty_distribution_is_rejected() {
        let spec = GridSpec { extent: 2.0, resolution: 11 };
        let grid = SpatialGrid { spec, values: Array2::zeros((11, 11)), noise: None };
        assert!(matches!(half_plane_ratio(&grid, 0.3), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn distance_examples() {
        let spec = GridSpec { extent: 4.0, resolution: 81 };
        let a = gaussian_grid(&spec, 0.0, 0.0, 0.5);
        assert_eq!(distribution_distance(&a, &a, DistanceMetric::L1).unwrap(), 0.0);

        // disjoint unit masses
        let mut u = Array2::zeros((81, 81));
        let mut v = Array2::zeros((81, 81));
        let area = spec.cell_area();
        u[(10, 40)] = 1.0 / area;
        v[(70, 40)] = 1.0 / area;
        let du = SpatialGrid { spec, values: u, noise: None };
        let dv = SpatialGrid { spec, values: v, noise: None };
        let l1 = distribution_distance(&du, &dv, DistanceMetric::L1).unwrap();
        assert!((l1 - 2.0).abs() < 1e-12, "disjoint L1 {l1}");
    }

    #[test]
    fn shifted_gaussian_l1_matches_the_analytic_overlap() {
        // N(0, 1/2) vs N(0.5 e_x, 1/2): L1 = 2 erf(d / (2 sigma sqrt 2))
        let spec = GridSpec { extent: 6.0, resolution: 241 };
        let a = gaussian_grid(&spec, 0.0, 0.0, 0.5);
        let b = gaussian_grid(&spec, 0.5, 0.0, 0.5);
        let l1 = distribution_distance(&a, &b, DistanceMetric::L1).unwrap();
        let expected = 2.0 * erf(0.25);
        assert!((l1 - expected).abs() < 1e-3, "L1 {l1} vs {expected}");
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = gaussian_grid(&GridSpec { extent: 3.0, resolution: 21 }, 0.0, 0.0, 0.5);
        let b = gaussian_grid(&GridSpec { extent: 3.0, resolution: 31 }, 0.0, 0.0, 0.5);
        assert!(matches!(
            distribution_distance(&a, &b, DistanceMetric::L2),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn fractional_splitting_is_smooth_in_theta() {
        // no resolution-scale jumps between nearby angles
        let spec = GridSpec { extent: 3.0, resolution: 41 };
        let grid = gaussian_grid(&spec, -0.9, 0.1, 0.35);
        let curve = ratio_curve(&grid, 64).unwrap();
        for w in curve.ratio.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.35 * w[0].max(1.0), "jump {:?}", w);
        }
    }

    // Abramowitz-Stegun 7.1.26, |error| < 1.5e-7
    fn erf(x: f64) -> f64 {
        let sign = x.signum();
        let x = x.abs();
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        sign * (1.0 - poly * (-x * x).exp())
    }
}
