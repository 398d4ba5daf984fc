//! Randomized invariant suites, one per theorem family. The CLI `selftest`
//! command and the acceptance battery both run these; a soundness failure
//! means a certificate passed its hypothesis check and the guaranteed
//! conclusion still failed — a defect, never an expected outcome.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gram::cross_gram;
use crate::inversion;
use crate::matrix::LinearMap;
use crate::sampling::Sampler;
use crate::stability;
use crate::tolerance::TolerancePolicy;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    /// Trials whose certificate verdict was true.
    pub passes: usize,
    /// Passing certificates whose guaranteed conclusion failed.
    pub soundness_failures: usize,
    /// Identity checks that failed outside certificate flows.
    pub identity_failures: usize,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.into(),
            trials: 0,
            passes: 0,
            soundness_failures: 0,
            identity_failures: 0,
        }
    }

    pub fn ok(&self) -> bool {
        self.soundness_failures == 0 && self.identity_failures == 0
    }

    fn absorb(&mut self, outcome: Result<bool>) {
        self.trials += 1;
        match outcome {
            Ok(passed) => {
                if passed {
                    self.passes += 1;
                }
            }
            Err(Error::TheoremViolation { .. }) => self.soundness_failures += 1,
            Err(_) => self.identity_failures += 1,
        }
    }
}

fn size_for(trial: usize, sizes: &[usize]) -> usize {
    sizes[trial % sizes.len()]
}

/// Scale factor that straddles a threshold: roughly half the draws land
/// below it and half above.
fn straddle(s: &mut Sampler) -> f64 {
    use rand::Rng;
    let t: f64 = s.rng().gen_range(-1.4..1.4);
    t.exp2()
}

/// Inverse formula for invertible Gram matrices of Riesz bases.
pub fn suite_inverse_formula(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x11);
    let mut result = SuiteResult::new("gram-inverse-formula");
    for t in 0..trials {
        let n = size_for(t, sizes);
        let u = s.invertible(n, 16.0);
        let phi = s.riesz_basis(n, 9.0);
        let psi = s.riesz_basis(n, 9.0);
        let outcome = inversion::invert_gram(&u, &phi, &psi, pol).map(|report| {
            report.invertible
                && report.theorem_ok
                && report.inverse_residual.map(|r| r <= 1e-8).unwrap_or(false)
        });
        result.absorb(outcome.and_then(|ok| {
            if ok {
                Ok(true)
            } else {
                Err(Error::violation(
                    "inverse formula residual above 1e-8",
                    f64::NAN,
                ))
            }
        }));
    }
    result
}

/// Pseudo-inverse representation through special duals for invertible
/// operators over redundant frames.
pub fn suite_pinv_representation(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x22);
    let mut result = SuiteResult::new("pinv-representation");
    for t in 0..trials {
        let n = size_for(t, sizes);
        // Alternate exact (m = n) and redundant (m = 1.5 n) frames.
        let m = if t % 2 == 0 { n } else { n + (n + 1) / 2 };
        let u = s.invertible(n, 16.0);
        let phi = s.frame(n, m, 4.0);
        let psi = s.frame(n, m, 4.0);
        let outcome = inversion::pinv_gram(&u, &phi, &psi, pol)
            .map(|report| report.u_invertible && report.all_guaranteed_hold);
        result.absorb(outcome);
    }
    result
}

/// Three-operator stability certificates.
pub fn suite_three_ops(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x33);
    let mut result = SuiteResult::new("stability-three-ops");
    for t in 0..trials {
        let n = size_for(t, sizes);
        // Alternate spanning Riesz bases with non-spanning Riesz sequences;
        // both keep the anchor Gram square and invertible.
        let dim = if t % 2 == 0 { n } else { n + 1 };
        let phi = if t % 2 == 0 {
            s.riesz_basis(n, 4.0)
        } else {
            match crate::frame::FrameSystem::from_synthesis(s.with_rank(dim, n, n)) {
                Ok(f) => f,
                Err(_) => continue,
            }
        };
        let u1 = s.invertible(dim, 4.0);
        let base = match cross_gram(&u1, &phi, &phi) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let base_inv = match base.matrix().try_inverse(pol) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let threshold = 1.0 / (base_inv.operator_norm() * phi.bessel_bound());
        let eye = LinearMap::identity(dim);
        let bump2 = s.matrix(dim, dim);
        let bump3 = s.matrix(dim, dim);
        let scale = threshold * straddle(&mut s) / (4.0 * (1.0 + u1.operator_norm()));
        let u2 = &eye + &bump2.scale(num_complex::Complex64::new(scale, 0.0));
        let u3 = &eye + &bump3.scale(num_complex::Complex64::new(scale, 0.0));
        let outcome = stability::stability_three_ops(&u1, &u2, &u3, &phi, pol).map(|c| c.verdict);
        result.absorb(outcome);
    }
    result
}

/// Factor stability certificates.
pub fn suite_factor(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x44);
    let mut result = SuiteResult::new("stability-factor");
    for t in 0..trials {
        let n = size_for(t, sizes);
        let u1 = s.invertible(n, 4.0);
        let phi = s.riesz_basis(n, 4.0);
        let base = match cross_gram(&u1, &phi, &phi).and_then(|g| g.matrix().try_inverse(pol)) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let threshold = 1.0 / (base.operator_norm() * phi.bessel_bound() * u1.operator_norm());
        let bump = s.matrix(n, n);
        let scale = threshold * straddle(&mut s) / (1.0 + bump.operator_norm());
        let u2 = &LinearMap::identity(n) + &bump.scale(num_complex::Complex64::new(scale, 0.0));
        let outcome = stability::stability_factor(&u1, &u2, &phi, pol).map(|c| c.verdict);
        result.absorb(outcome);
    }
    result
}

/// Single-perturbation certificates (operator / right frame / left frame).
pub fn suite_perturbations(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x55);
    let mut result = SuiteResult::new("stability-c1-c2-c3");
    for t in 0..trials {
        let n = size_for(t, sizes);
        let u = s.invertible(n, 4.0);
        let phi = s.riesz_basis(n, 4.0);
        let psi = s.riesz_basis(n, 4.0);
        let base = match cross_gram(&u, &phi, &psi).and_then(|g| g.matrix().try_inverse(pol)) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let inv_norm = base.operator_norm();
        let r1 = 1.0 / (inv_norm * (phi.bessel_bound() * psi.bessel_bound()).sqrt());
        let r2 = 1.0 / (inv_norm * phi.bessel_bound().sqrt() * u.operator_norm());
        let r3 = 1.0 / (inv_norm * psi.bessel_bound().sqrt() * u.operator_norm());
        let bump = s.matrix(n, n);
        let v = &u
            + &bump.scale(num_complex::Complex64::new(
                r1 * straddle(&mut s) / (1.0 + bump.operator_norm()),
                0.0,
            ));
        let theta_size = r2 * straddle(&mut s);
        let theta = s.perturbed_frame(&psi, theta_size);
        let xi_size = r3 * straddle(&mut s);
        let xi = s.perturbed_frame(&phi, xi_size);
        let outcome = stability::perturb_certificates(&u, &v, &phi, &psi, &xi, &theta, pol)
            .map(|certs| certs.iter().all(|c| c.verdict));
        result.absorb(outcome);
    }
    result
}

/// Riesz-anchor perturbation certificates.
pub fn suite_riesz_perturbation(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x66);
    let mut result = SuiteResult::new("stability-riesz-anchor");
    for t in 0..trials {
        let n = size_for(t, sizes);
        let u = s.invertible(n, 4.0);
        let phi = s.riesz_basis(n, 4.0);
        let (a, b) = match phi.frame_bounds_with(pol) {
            Ok(v) => v,
            Err(_) => continue,
        };
        // Ψ = U⁻¹(Φ + E) with ‖E‖_F straddling the threshold √(A²/B).
        let budget = (a * a / b).sqrt() * straddle(&mut s);
        let moved = s.perturbed_frame(&phi, budget);
        let u_inv = match u.try_inverse(pol) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let psi = match moved.transform(&u_inv) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let outcome = stability::riesz_perturbation(&u, &phi, &psi, pol).map(|c| c.verdict);
        result.absorb(outcome);
    }
    result
}

/// Joint perturbation certificates.
pub fn suite_joint(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    falsification_samples: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x77);
    let mut result = SuiteResult::new("stability-joint");
    for t in 0..trials {
        let n = size_for(t, sizes);
        let u = s.invertible(n, 2.0);
        let phi = s.riesz_basis(n, 2.0);
        let psi = s.riesz_basis(n, 2.0);
        let eps = 0.05 * straddle(&mut s);
        let bump = s.matrix(n, n);
        let v = &u
            + &bump.scale(num_complex::Complex64::new(
                eps / (1.0 + bump.operator_norm()),
                0.0,
            ));
        let xi = s.perturbed_frame(&phi, eps);
        let theta = s.perturbed_frame(&psi, eps);
        let lambda = eps / (phi.bessel_bound().min(psi.bessel_bound()).sqrt()) * straddle(&mut s);
        let budget = match stability::StabilityBudget::new([lambda; 4], eps * 1.5) {
            Ok(b) => b,
            Err(_) => continue,
        };
        let mut rng = {
            use rand::SeedableRng;
            rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (t as u64))
        };
        let outcome = match stability::joint_stability(
            &u,
            &v,
            &phi,
            &psi,
            &xi,
            &theta,
            &budget,
            pol,
            falsification_samples,
            &mut rng,
        ) {
            Ok(c) => Ok(c.verdict),
            Err(Error::Singular(_)) | Err(Error::Precondition(_)) => continue,
            Err(e) => Err(e),
        };
        result.absorb(outcome);
    }
    result
}

/// Neumann truncation-error bound on random contractions.
pub fn suite_neumann(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    pol: &TolerancePolicy,
) -> SuiteResult {
    let mut s = Sampler::new(seed ^ 0x88);
    let mut result = SuiteResult::new("neumann-inverse");
    for t in 0..trials {
        let n = size_for(t, sizes);
        let u1 = s.invertible(n, 4.0);
        let bump = s.matrix(n, n);
        let u1_inv_norm = match u1.try_inverse(pol) {
            Ok(m) => m.operator_norm(),
            Err(_) => continue,
        };
        let ratio = 0.8 * straddle(&mut s).min(1.5);
        let scale = ratio / (u1_inv_norm * bump.operator_norm().max(1e-300));
        let u2 = &u1 - &bump.scale(num_complex::Complex64::new(scale, 0.0));
        let outcome = match stability::neumann_inverse(&u1, &u2, pol) {
            Ok(out) => {
                let direct = match u2.try_inverse(pol) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                let err = out.inverse.distance(&direct);
                if err <= out.truncation_bound * (1.0 + 1e-6) + 1e-12 {
                    Ok(true)
                } else {
                    Err(Error::violation("Neumann truncation bound", err))
                }
            }
            Err(Error::NotContractive { .. }) => Ok(false),
            Err(e) => Err(e),
        };
        result.absorb(outcome);
    }
    result
}

/// Runs every suite with one seed; `trials` applies per theorem.
pub fn run_all(
    seed: u64,
    sizes: &[usize],
    trials: usize,
    falsification_samples: usize,
    pol: &TolerancePolicy,
) -> Vec<SuiteResult> {
    vec![
        suite_inverse_formula(seed, sizes, trials, pol),
        suite_pinv_representation(seed, sizes, trials, pol),
        suite_three_ops(seed, sizes, trials, pol),
        suite_factor(seed, sizes, trials, pol),
        suite_perturbations(seed, sizes, trials, pol),
        suite_riesz_perturbation(seed, sizes, trials, pol),
        suite_joint(seed, sizes, trials, falsification_samples, pol),
        suite_neumann(seed, sizes, trials, pol),
    ]
}
