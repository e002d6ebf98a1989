//! Roots of the construction polynomial and the `(λ, φ)` data derived from
//! them.
//!
//! Two routes are kept deliberately independent: [`roots_closed_form`] solves
//! the quadratic in `y = x^k` and takes k-th roots, while [`roots_iterative`]
//! runs Aberth–Ehrlich on the raw coefficients. [`cross_check`] matches one
//! against the other.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::{IntPoly, PolySpec};

/// Imaginary parts and `| |r| - 1 |` below this are treated as zero.
pub const CLASSIFY_TOL: f64 = 1e-12;
/// Target residual factor for the iterative solver.
pub const RESIDUAL_TOL: f64 = 1e-13;
/// Agreement required between the two root routes.
pub const CROSS_CHECK_TOL: f64 = 1e-10;

const MAX_ITERATIONS: usize = 2000;

/// A complex-conjugate pair `e^{λ ± iφ}` with `φ ∈ (0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootPair {
    pub lambda: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub n: usize,
    pub pairs: Vec<RootPair>,
    /// `ln r` for each positive real root.
    pub reals: Vec<f64>,
    /// `ln |r|` for each negative real root. Such roots have no real
    /// logarithm; they are kept so that generator assembly can refuse them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negative_reals: Vec<f64>,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub holds: bool,
    pub margin: f64,
}

impl Spectrum {
    fn assemble(
        mut pairs: Vec<RootPair>,
        mut reals: Vec<f64>,
        mut negative_reals: Vec<f64>,
    ) -> Self {
        pairs.sort_by(|a, b| a.phi.total_cmp(&b.phi).then(a.lambda.total_cmp(&b.lambda)));
        reals.sort_by(f64::total_cmp);
        negative_reals.sort_by(f64::total_cmp);
        let lambda_max = pairs
            .iter()
            .map(|p| p.lambda.abs())
            .chain(reals.iter().map(|l| l.abs()))
            .chain(negative_reals.iter().map(|l| l.abs()))
            .fold(0.0, f64::max);
        Spectrum {
            n: 2 * pairs.len() + reals.len() + negative_reals.len(),
            pairs,
            reals,
            negative_reals,
            lambda_max,
        }
    }

    /// Builds the spectrum from a full list of complex roots (both members of
    /// every conjugate pair present).
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut reals = Vec::new();
        let mut negative_reals = Vec::new();
        let mut lower = 0usize;
        for r in roots {
            let modulus = r.norm();
            if modulus == 0.0 || !modulus.is_finite() {
                return Err(Error::InvalidArgument(format!("root {r} has no logarithm")));
            }
            let lambda = snap_zero(modulus.ln());
            let tol = CLASSIFY_TOL * (1.0 + modulus);
            if r.im > tol {
                pairs.push(RootPair {
                    lambda,
                    phi: r.im.atan2(r.re),
                });
            } else if r.im < -tol {
                lower += 1;
            } else if r.re > 0.0 {
                reals.push(lambda);
            } else {
                negative_reals.push(lambda);
            }
        }
        if lower != pairs.len() {
            return Err(Error::InvalidArgument(format!(
                "roots are not closed under conjugation ({} upper, {lower} lower)",
                pairs.len()
            )));
        }
        Ok(Self::assemble(pairs, reals, negative_reals))
    }

    /// `λ` values with multiplicity (each pair counted twice).
    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .flat_map(|p| [p.lambda, p.lambda])
            .chain(self.reals.iter().copied())
            .chain(self.negative_reals.iter().copied())
            .collect()
    }

    pub fn lambda_sum(&self) -> f64 {
        self.lambdas().iter().sum()
    }

    /// All roots as complex numbers: for each pair `r, r̄`, then positive and
    /// negative reals.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n);
        for p in &self.pairs {
            let r = Complex64::from_polar(p.lambda.exp(), p.phi);
            out.push(r);
            out.push(r.conj());
        }
        out.extend(self.reals.iter().map(|l| Complex64::new(l.exp(), 0.0)));
        out.extend(
            self.negative_reals
                .iter()
                .map(|l| Complex64::new(-l.exp(), 0.0)),
        );
        out
    }

    /// Spectrum with every `λ` set to zero, keeping the angles.
    pub fn flattened(&self) -> Spectrum {
        Self::assemble(
            self.pairs
                .iter()
                .map(|p| RootPair {
                    lambda: 0.0,
                    phi: p.phi,
                })
                .collect(),
            vec![0.0; self.reals.len()],
            vec![0.0; self.negative_reals.len()],
        )
    }
}

fn snap_zero(lambda: f64) -> f64 {
    if lambda.abs() < CLASSIFY_TOL {
        0.0
    } else {
        lambda
    }
}

/// Roots of `x^{2k} + s·3x^k + 1` (times `x - 1`) from the quadratic formula
/// in `y = x^k`.
pub fn roots_closed_form(spec: &PolySpec) -> Result<Spectrum> {
    spec.validate()?;
    let k = spec.k as usize;
    let s = f64::from(spec.sign);
    let sqrt5 = 5f64.sqrt();
    // y^2 + 3s·y + 1 = 0; both roots have the sign of -s.
    let big = (3.0 + sqrt5) / 2.0;
    let ys = [big, 1.0 / big];
    let y_negative = s > 0.0;

    let mut pairs = Vec::new();
    let mut reals = Vec::new();
    let mut negative_reals = Vec::new();
    for y_abs in ys {
        let lambda = y_abs.ln() / k as f64;
        for j in 0..k {
            // arg x = π·m/k with m = 2j (+1 when y < 0), taken mod 2k.
            let m = (2 * j + usize::from(y_negative)) % (2 * k);
            if m == 0 {
                reals.push(lambda);
            } else if m == k {
                negative_reals.push(lambda);
            } else if m < k {
                pairs.push(RootPair {
                    lambda,
                    phi: PI * m as f64 / k as f64,
                });
            }
        }
    }
    if spec.odd_factor {
        reals.push(0.0);
    }
    Ok(Spectrum::assemble(pairs, reals, negative_reals))
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn residual_ok(coeffs: &[f64], z: Complex64) -> (bool, f64) {
    let deg = coeffs.len() as i32 - 1;
    let res = horner(coeffs, z).0.norm();
    (res < RESIDUAL_TOL * (1.0 + z.norm()).powi(deg), res)
}

/// All complex roots of a monic integer polynomial by Aberth–Ehrlich
/// iteration. Starting points lie on the circle of radius `|c_0|^{1/n}` with
/// a fixed angular offset, so the result is deterministic.
pub fn roots_iterative(p: &IntPoly) -> Result<Vec<Complex64>> {
    if !p.is_monic() {
        return Err(Error::NotMonic(p.leading().to_string()));
    }
    let n = p.degree();
    if n < 1 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let coeffs = p.to_f64();
    let c0 = coeffs[n];
    if c0 == 0.0 {
        return Err(Error::InvalidArgument("constant term is zero".into()));
    }
    let radius = c0.abs().powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64 + 0.4))
        .collect();

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut moved = false;
        for i in 0..n {
            let (pv, dpv) = horner(&coeffs, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() > 4.0 * f64::EPSILON * (1.0 + z[i].norm()) {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let worst = z
        .iter()
        .map(|&r| residual_ok(&coeffs, r))
        .fold((true, 0.0f64), |(ok, w), (o, r)| (ok && o, w.max(r)));
    if !worst.0 {
        return Err(Error::SolverFailure {
            iterations,
            worst_residual: worst.1,
        });
    }
    // Clean up imaginary dust on real roots.
    for r in &mut z {
        if r.im.abs() <= CLASSIFY_TOL * (1.0 + r.norm()) {
            r.im = 0.0;
        }
    }
    Ok(z)
}

/// Greedy nearest-neighbour matching of two root multisets; returns the
/// largest matched distance.
pub fn match_roots(expected: &[Complex64], found: &[Complex64]) -> Result<f64> {
    if expected.len() != found.len() {
        return Err(Error::DimensionMismatch {
            expected: expected.len(),
            got: found.len(),
        });
    }
    let mut used = vec![false; found.len()];
    let mut worst = 0.0f64;
    for e in expected {
        let (idx, d) = found
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, f)| (i, (e - f).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("lengths match");
        used[idx] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Computes the iterative roots of `p` and compares them against the
/// closed-form spectrum. Returns the iterative spectrum and the worst
/// mismatch.
pub fn cross_check(closed: &Spectrum, p: &IntPoly) -> Result<(Spectrum, f64)> {
    let roots = roots_iterative(p)?;
    let worst = match_roots(&closed.complex_roots(), &roots)?;
    if worst > CROSS_CHECK_TOL {
        return Err(Error::CheckFailed {
            stage: "spectrum",
            detail: format!("root routes disagree by {worst:e}"),
        });
    }
    Ok((Spectrum::from_roots(&roots)?, worst))
}

/// `λ_max < 2/n` together with the (possibly negative) margin.
pub fn verify_spectral_bound(spec: &Spectrum) -> SpectralBound {
    let margin = 2.0 / spec.n as f64 - spec.lambda_max;
    SpectralBound {
        holds: margin > 0.0,
        margin,
    }
}

/// True when some root of the holonomy has modulus different from 1, i.e.
/// some `|λ_i| > tol`.
pub fn check_not_nilcoverable(spec: &Spectrum, tol: f64) -> bool {
    spec.lambdas().iter().any(|l| l.abs() > tol)
}
