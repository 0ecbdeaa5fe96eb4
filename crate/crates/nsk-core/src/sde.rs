//! Euler-Maruyama ensembles for the forward particle SDE
//! dx = u_plus(x) dt + sqrt(2 nu) dW, with the drift recovered from a
//! fluid field through u_plus = v + nu d ln rho/dx, and statistical
//! comparison of the ensemble law against a reference density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{NskError, Result};
use crate::params::ModelParameters;
use crate::real::Real;
use crate::uncertainty::{dlog_rho, expectation, FluidField1D, SUPPORT_FLOOR_FRAC};

/// Particle positions plus the reproducibility state. `epoch` counts
/// completed propagation calls; together with `seed` it selects the
/// RNG streams of the next call, so identical (seed, inputs) reproduce
/// identical trajectories bit for bit regardless of thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T> {
    pub positions: Vec<T>,
    pub seed: u64,
    pub t: T,
    pub epoch: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Base RNG key for one (seed, epoch) pair; stream 0 is reserved for
/// initialization, streams 1.. belong to particles.
fn rng_key(seed: u64, epoch: u64) -> u64 {
    splitmix64(seed ^ epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

impl<T: Real> Ensemble<T> {
    /// N draws from the Gaussian density with width parameter `a`
    /// (variance 1/(2a)) centered at x0.
    pub fn gaussian(n: usize, a: T, x0: T, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(NskError::InvalidConfig("ensemble needs at least one particle".into()));
        }
        if a <= T::zero() || !a.is_finite() {
            return Err(NskError::NonPositive { name: "a", value: a.as_f64() });
        }
        let sigma = (T::of(2.0) * a).sqrt().recip();
        let mut rng = ChaCha8Rng::seed_from_u64(rng_key(seed, 0));
        rng.set_stream(0);
        let positions = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                x0 + sigma * T::of(z)
            })
            .collect();
        Ok(Ensemble { positions, seed, t: T::zero(), epoch: 0 })
    }

    /// N particles at a single point.
    pub fn at_point(n: usize, x0: T, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(NskError::InvalidConfig("ensemble needs at least one particle".into()));
        }
        if !x0.is_finite() {
            return Err(NskError::NonFinite { name: "x0", value: x0.as_f64() });
        }
        Ok(Ensemble { positions: vec![x0; n], seed, t: T::zero(), epoch: 0 })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> T {
        self.positions.iter().copied().sum::<T>() / T::of(self.len() as f64)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> T {
        let n = self.len();
        if n < 2 {
            return T::zero();
        }
        let mean = self.mean();
        let ss: T = self.positions.iter().map(|x| (*x - mean) * (*x - mean)).sum();
        ss / T::of((n - 1) as f64)
    }
}

/// Forward drift sampled on the retained support of a field, with
/// clamped linear interpolation between nodes; positions beyond either
/// end take the edge value.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField<T> {
    x0: T,
    dx: T,
    samples: Vec<T>,
}

impl<T: Real> DriftField<T> {
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn eval(&self, x: T) -> T {
        let m = self.samples.len();
        let s = (x - self.x0) / self.dx;
        if s <= T::zero() {
            return self.samples[0];
        }
        let last = T::of((m - 1) as f64);
        if s >= last {
            return self.samples[m - 1];
        }
        let i = s.floor().as_f64() as usize;
        let frac = s - T::of(i as f64);
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }
}

/// u_plus = v + nu d ln rho/dx on the retained support.
pub fn drift_field<T: Real>(field: &FluidField1D<T>, params: &ModelParameters<T>) -> Result<DriftField<T>> {
    let (i0, i1) = field.retained_support(T::of(SUPPORT_FLOOR_FRAC));
    let floor = T::of(SUPPORT_FLOOR_FRAC) * field.max_rho();
    let dln = dlog_rho(field, i0, i1, floor)?;
    let nu = params.nu();
    let v = &field.v()[i0..=i1];
    let samples = dln.iter().zip(v).map(|(d, vi)| *vi + nu * *d).collect();
    Ok(DriftField { x0: field.x()[i0], dx: field.dx(), samples })
}

/// Euler-Maruyama propagation: x <- x + drift(x) dt + sqrt(2 nu dt) z,
/// n_steps times, with one ChaCha stream per particle. Aborts if a
/// position leaves a guard interval of 10^3 times the ensemble's entry
/// width (at least 10^3) around its entry midpoint.
pub fn propagate_ensemble<T, F>(e: &Ensemble<T>, drift: F, nu: T, dt: T, n_steps: usize) -> Result<Ensemble<T>>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    if dt <= T::zero() || !dt.is_finite() {
        return Err(NskError::NonPositive { name: "dt", value: dt.as_f64() });
    }
    if nu < T::zero() || !nu.is_finite() {
        return Err(NskError::Negative { name: "nu", value: nu.as_f64() });
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for x in &e.positions {
        lo = lo.min(*x);
        hi = hi.max(*x);
    }
    let mid = (lo + hi) * T::of(0.5);
    let guard = T::of(1e3) * (hi - lo).max(T::one());
    let root = (T::of(2.0) * nu * dt).sqrt();
    let base = rng_key(e.seed, e.epoch);

    let positions: Result<Vec<T>> = e
        .positions
        .par_iter()
        .enumerate()
        .map(|(i, x_init)| {
            let mut rng = ChaCha8Rng::seed_from_u64(base);
            rng.set_stream(i as u64 + 1);
            let mut x = *x_init;
            for step in 0..n_steps {
                let z: f64 = rng.sample(StandardNormal);
                x = x + drift(x) * dt + root * T::of(z);
                if !x.is_finite() || (x - mid).abs() > guard {
                    return Err(NskError::Divergence {
                        t: (e.t + dt * T::of((step + 1) as f64)).as_f64(),
                        x: x.as_f64(),
                        guard: guard.as_f64(),
                    });
                }
            }
            Ok(x)
        })
        .collect();

    Ok(Ensemble {
        positions: positions?,
        seed: e.seed,
        t: e.t + dt * T::of(n_steps as f64),
        epoch: e.epoch + 1,
    })
}

/// Ensemble-vs-density comparison: histogram L1 distance against the
/// reference sampled at bin centers, and moment errors with Monte Carlo
/// standard-error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport<T> {
    pub hist_l1_error: T,
    pub mean_error: T,
    pub var_error: T,
    pub mean_se: T,
    pub var_se: T,
}

pub fn empirical_compare<T: Real>(
    e: &Ensemble<T>,
    reference: &FluidField1D<T>,
    bins: usize,
) -> Result<CompareReport<T>> {
    if bins < 10 {
        return Err(NskError::InvalidConfig(format!("need at least 10 bins, got {bins}")));
    }
    if e.is_empty() {
        return Err(NskError::InvalidConfig("ensemble is empty".into()));
    }
    let n = e.len();
    let x = reference.x();
    let span_lo = x[0];
    let span_hi = x[x.len() - 1];
    let width = (span_hi - span_lo) / T::of(bins as f64);

    // Empirical bin densities; positions beyond the span count toward the
    // end bins.
    let mut counts = vec![0usize; bins];
    for p in &e.positions {
        let idx = ((*p - span_lo) / width).floor().as_f64() as isize;
        let idx = idx.clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    let norm = (T::of(n as f64) * width).recip();
    let interp = DriftField { x0: x[0], dx: reference.dx(), samples: reference.rho().to_vec() };
    let mut l1 = T::zero();
    for (j, c) in counts.iter().enumerate() {
        let center = span_lo + (T::of(j as f64) + T::of(0.5)) * width;
        let emp = T::of(*c as f64) * norm;
        l1 += (emp - interp.eval(center)).abs() * width;
    }

    // Reference moments by trapezoid quadrature.
    let ref_mean = expectation(reference, x)?;
    let centered: Vec<T> = x.iter().map(|t| (*t - ref_mean) * (*t - ref_mean)).collect();
    let ref_var = expectation(reference, &centered)?;

    let mean = e.mean();
    let var = e.variance();
    let nf = T::of(n as f64);
    // Fourth central moment for the variance standard error
    // SE(s^2) = sqrt((m4 - s^4)/n).
    let mut m4 = T::zero();
    for p in &e.positions {
        let d = *p - mean;
        m4 += d * d * d * d;
    }
    m4 = m4 / nf;
    let var_se = ((m4 - var * var).max(T::zero()) / nf).sqrt();
    let mean_se = (var / nf).sqrt();

    Ok(CompareReport {
        hist_l1_error: l1,
        mean_error: (mean - ref_mean).abs(),
        var_error: (var - ref_var).abs(),
        mean_se,
        var_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{sample_on_grid, GaussianState};
    use crate::testutil::linspace;

    #[test]
    fn drift_from_gaussian_is_linear() {
        // rho Gaussian (A=1, x0=0), v = 0.2 + 0.3 x, nu = 1/2:
        // u_plus = 0.2 + 0.3 x - 2 A nu x = 0.2 - 0.7 x.
        let params = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let state = GaussianState::new(1.0, 0.3, 0.0, 0.2).unwrap();
        let field = sample_on_grid(&state, &linspace(-8.0, 8.0, 2049)).unwrap().field;
        let d = drift_field(&field, &params).unwrap();
        for &xq in &[-2.0, -0.37, 0.0, 1.25, 3.0] {
            let want = 0.2 - 0.7 * xq;
            assert!((d.eval(xq) - want).abs() < 1e-4, "u+({xq}) = {} want {want}", d.eval(xq));
        }
    }

    #[test]
    fn drift_flat_density_equals_velocity() {
        let params = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let n = 101;
        let field = FluidField1D::new(linspace(-0.5, 0.5, n), vec![1.0; n], vec![0.3; n]).unwrap();
        let d = drift_field(&field, &params).unwrap();
        assert!(d.samples().iter().all(|u| (u - 0.3).abs() < 1e-12));
    }

    #[test]
    fn interpolation_is_linear_and_clamped() {
        let d = DriftField { x0: 0.0, dx: 1.0, samples: vec![0.0, 2.0, 6.0] };
        assert_eq!(d.eval(0.5), 1.0);
        assert_eq!(d.eval(1.25), 3.0);
        assert_eq!(d.eval(-5.0), 0.0);
        assert_eq!(d.eval(9.0), 6.0);
    }

    #[test]
    fn zero_noise_translates_deterministically() {
        let e = Ensemble::at_point(100, 0.0, 7).unwrap();
        let out = propagate_ensemble(&e, |_: f64| 0.25, 0.0, 0.01, 40).unwrap();
        for p in &out.positions {
            assert!((p - 0.1).abs() < 1e-12);
        }
        assert!((out.t - 0.4).abs() < 1e-12);
        assert_eq!(out.epoch, 1);
    }

    #[test]
    fn ou_variance_matches_stationary_and_relaxation() {
        // theta = 2 A nu = 1 with A = 1, nu = 1/2.
        let nu = 0.5;
        let drift = |x: f64| -x;
        let n = 20_000;

        // Stationary start: variance stays at 1/(2A) = 1/2 within 3 SE.
        let e = Ensemble::gaussian(n, 1.0, 0.0, 42).unwrap();
        let out = propagate_ensemble(&e, drift, nu, 1e-3, 200).unwrap();
        let se = (2.0 / n as f64).sqrt() * 0.5;
        assert!((out.variance() - 0.5).abs() < 3.0 * se, "var {} vs 0.5 (se {se})", out.variance());

        // Point start: var(t) = (1/2)(1 - exp(-2t)) at t = 0.2.
        let e = Ensemble::at_point(n, 0.0, 43).unwrap();
        let out = propagate_ensemble(&e, drift, nu, 1e-3, 200).unwrap();
        let want = 0.5 * (1.0 - (-0.4f64).exp());
        let se = (2.0 / n as f64).sqrt() * want;
        assert!((out.variance() - want).abs() < 3.0 * se, "var {} vs {want} (se {se})", out.variance());
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let run = || {
            let e = Ensemble::gaussian(500, 1.0, 0.0, 9).unwrap();
            propagate_ensemble(&e, |x| -x, 0.5, 1e-3, 50).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.positions, b.positions);
        let c = {
            let e = Ensemble::gaussian(500, 1.0, 0.0, 10).unwrap();
            propagate_ensemble(&e, |x| -x, 0.5, 1e-3, 50).unwrap()
        };
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn divergence_guard_trips() {
        let e = Ensemble::at_point(10, 0.0, 1).unwrap();
        let r = propagate_ensemble(&e, |x| 1e6 * (x + 1.0), 0.1, 0.1, 1000);
        assert!(matches!(r, Err(NskError::Divergence { .. })));
    }

    #[test]
    fn self_comparison_vanishes() {
        // Flat reference on [0, 1]; particles spread uniformly, one per
        // sub-interval, make the empirical histogram reproduce the
        // reference density to rounding for any bin count.
        let n_nodes = 41;
        let reference =
            FluidField1D::new(linspace(0.0, 1.0, n_nodes), vec![1.0; n_nodes], vec![0.0; n_nodes]).unwrap();
        let n = 4000;
        let e = Ensemble {
            positions: (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
            seed: 0,
            t: 0.0,
            epoch: 0,
        };
        let r = empirical_compare(&e, &reference, 20).unwrap();
        assert!(r.hist_l1_error < 1e-12, "l1 {}", r.hist_l1_error);
        assert!(r.mean_error < 1e-9, "mean {}", r.mean_error);
    }

    #[test]
    fn ground_state_ensemble_tracks_reference() {
        // Frozen Gaussian drift; empirical law vs the sampled density.
        let params = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let state = GaussianState::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let field = sample_on_grid(&state, &linspace(-6.0, 6.0, 513)).unwrap().field;
        let d = drift_field(&field, &params).unwrap();
        let e = Ensemble::gaussian(40_000, 1.0, 0.0, 11).unwrap();
        let out = propagate_ensemble(&e, |x| d.eval(x), params.nu(), 1e-3, 300).unwrap();
        let r = empirical_compare(&out, &field, 40).unwrap();
        assert!(r.mean_error < 3.0 * r.mean_se, "mean {} se {}", r.mean_error, r.mean_se);
        assert!(r.var_error < 3.0 * r.var_se + 1e-3, "var {} se {}", r.var_error, r.var_se);
        // L1 at the Monte Carlo scale sqrt(bins/N), with a geometry factor.
        assert!(r.hist_l1_error < 0.1, "l1 {}", r.hist_l1_error);
    }
}
