//! Sectional curvature of the left-invariant metric, evaluated at the
//! identity in the orthonormal basis `(e_1, …, e_n, ∂_t)`.
//!
//! The Lie bracket is `[X, Y] = x0·A·Y' − y0·A·X'` and the curvature of a
//! left-invariant metric is the five-term expression
//!
//! ```text
//! <R(X,Y)Y,X> = ¼|ad*_X Y + ad*_Y X|² − <ad*_X X, ad*_Y Y> − ¾|[X,Y]|²
//!               − ½<[[X,Y],Y],X> − ½<[[Y,X],X],Y>
//! ```
//!
//! [`max_abs_curvature`] searches the Grassmannian of 2-planes for the
//! largest `|K|` by multistart local ascent.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvgroup::{BlockGenerator, TangentVector};
use crate::spectra::Spectrum;

pub const CURVATURE_CONSTANT: f64 = 11.0 / 4.0;
/// Orthonormality defect accepted by [`sectional_curvature`].
pub const PLANE_TOL: f64 = 1e-12;

const FD_STEP: f64 = 1e-5;
const MAX_ASCENT_STEPS: usize = 200;
const MIN_IMPROVEMENT: f64 = 1e-12;
const INITIAL_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-10;
const COLLAPSE_TOL: f64 = 1e-8;

/// An orthonormal pair spanning a 2-plane in the Lie algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl Plane {
    pub fn new(u: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let p = Plane { u, w };
        p.check()?;
        Ok(p)
    }

    /// Gram–Schmidt on an arbitrary independent pair.
    pub fn orthonormalize(u: &[f64], w: &[f64]) -> Result<Self> {
        let (u, w) = gram_schmidt(u, w).ok_or(Error::NotOrthonormal(1.0))?;
        Ok(Plane { u, w })
    }

    pub fn defect(&self) -> f64 {
        let uu = dot(&self.u, &self.u);
        let ww = dot(&self.w, &self.w);
        let uw = dot(&self.u, &self.w);
        (uu - 1.0).abs().max((ww - 1.0).abs()).max(uw.abs())
    }

    fn check(&self) -> Result<()> {
        if self.u.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.u.len(),
                got: self.w.len(),
            });
        }
        let d = self.defect();
        if d > PLANE_TOL || !d.is_finite() {
            return Err(Error::NotOrthonormal(d));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub max_abs: f64,
    pub argmax_plane: Plane,
    pub analytic_bound: f64,
    pub samples_used: usize,
    /// Restarts dropped because the pair collapsed onto a line.
    pub discarded: usize,
    pub seed: u64,
}

impl CurvatureReport {
    /// `max_abs / analytic_bound`, zero when the bound is zero.
    pub fn ratio(&self) -> f64 {
        if self.analytic_bound > 0.0 {
            self.max_abs / self.analytic_bound
        } else {
            0.0
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(u: &[f64], w: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let nu = dot(u, u).sqrt();
    if nu == 0.0 || !nu.is_finite() {
        return None;
    }
    let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
    let c = dot(&u, w);
    let mut w: Vec<f64> = w.iter().zip(&u).map(|(x, y)| x - c * y).collect();
    // second pass for accuracy
    let c = dot(&u, &w);
    w.iter_mut().zip(&u).for_each(|(x, y)| *x -= c * y);
    let nw = dot(&w, &w).sqrt();
    if nw < 1e-12 || !nw.is_finite() {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= nw);
    Some((u, w))
}

/// Dense row-major copy of `A` for allocation-light evaluation of brackets
/// on `(n+1)`-vectors laid out as `(X', x0)`.
struct Algebra {
    n: usize,
    a: Vec<f64>,
}

impl Algebra {
    fn new(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rows.push(a[(i, j)]);
            }
        }
        Algebra { n, a: rows }
    }

    fn bracket(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (x0, y0) = (x[n], y[n]);
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in 0..n {
                s += row[j] * (x0 * y[j] - y0 * x[j]);
            }
            out[i] = s;
        }
        out[n] = 0.0;
    }

    /// `(ad_X)^* Y = (x0·Aᵀ·Y', −<Y', A·X'>)`.
    fn ad_star(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let x0 = x[n];
        let mut last = 0.0;
        out[..n].iter_mut().for_each(|o| *o = 0.0);
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            let yi = y[i];
            let mut ax = 0.0;
            for j in 0..n {
                out[j] += x0 * row[j] * yi;
                ax += row[j] * x[j];
            }
            last -= yi * ax;
        }
        out[n] = last;
    }

    fn numerator(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.n + 1;
        let mut buf = vec![0.0; 6 * m];
        let (b, rest) = buf.split_at_mut(m);
        let (p, rest) = rest.split_at_mut(m);
        let (q, rest) = rest.split_at_mut(m);
        let (q1, rest) = rest.split_at_mut(m);
        let (q2, c) = rest.split_at_mut(m);

        self.bracket(x, y, b);
        self.ad_star(x, y, p);
        self.ad_star(y, x, q);
        p.iter_mut().zip(q.iter()).for_each(|(a, b)| *a += b);
        self.ad_star(x, x, q1);
        self.ad_star(y, y, q2);
        // [[X,Y],Y]
        self.bracket(b, y, &mut c[..m]);
        let t4 = dot(&c[..m], x);
        // [[Y,X],X] = −[[X,Y],X]
        self.bracket(b, x, &mut c[..m]);
        let t5 = -dot(&c[..m], y);

        0.25 * dot(p, p) - dot(q1, q2) - 0.75 * dot(b, b) - 0.5 * t4 - 0.5 * t5
    }
}

pub fn bracket(x: &TangentVector, y: &TangentVector, a: &BlockGenerator) -> TangentVector {
    TangentVector::new(a.dense() * (&y.xp * x.x0 - &x.xp * y.x0), 0.0)
}

/// Matrix of the metric adjoint of `ad_X` in the basis `(e_1, …, e_n, ∂_t)`.
pub fn ad_star(x: &TangentVector, a: &BlockGenerator) -> DMatrix<f64> {
    let n = a.dim();
    let mut ad = DMatrix::zeros(n + 1, n + 1);
    // column j holds [X, e_j]
    ad.view_mut((0, 0), (n, n)).copy_from(&(a.dense() * x.x0));
    let last = -(a.dense() * &x.xp);
    ad.view_mut((0, n), (n, 1)).copy_from(&last);
    ad.transpose()
}

/// `<R(X,Y)Y, X>` from the five-term formula.
pub fn curvature_numerator(x: &TangentVector, y: &TangentVector, a: &BlockGenerator) -> f64 {
    let alg = Algebra::new(a.dense());
    alg.numerator(x.to_ambient().as_slice(), y.to_ambient().as_slice())
}

pub fn sectional_curvature(plane: &Plane, a: &BlockGenerator) -> Result<f64> {
    plane.check()?;
    if plane.u.len() != a.dim() + 1 {
        return Err(Error::DimensionMismatch {
            expected: a.dim() + 1,
            got: plane.u.len(),
        });
    }
    Ok(Algebra::new(a.dense()).numerator(&plane.u, &plane.w))
}

/// `11/4 · λ_max²`.
pub fn analytic_bound(spec: &Spectrum) -> f64 {
    CURVATURE_CONSTANT * spec.lambda_max * spec.lambda_max
}

fn coordinate_planes(m: usize) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect()
}

/// Local ascent of `|K|` from one starting pair. `None` if the pair
/// collapses.
fn ascend(alg: &Algebra, u0: Vec<f64>, w0: Vec<f64>) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let m = u0.len();
    let f = |u: &[f64], w: &[f64]| alg.numerator(u, w).abs();
    let (mut u, mut w) = (u0, w0);
    let mut val = f(&u, &w);
    let mut step = INITIAL_STEP;
    let mut grad = vec![0.0; 2 * m];
    let (mut up, mut wp) = (u.clone(), w.clone());

    for _ in 0..MAX_ASCENT_STEPS {
        for i in 0..2 * m {
            let (vec, idx) = if i < m {
                (&mut up, i)
            } else {
                (&mut wp, i - m)
            };
            let orig = vec[idx];
            vec[idx] = orig + FD_STEP;
            let plus = f(&up, &wp);
            let vec = if i < m { &mut up } else { &mut wp };
            vec[idx] = orig - FD_STEP;
            let minus = f(&up, &wp);
            let vec = if i < m { &mut up } else { &mut wp };
            vec[idx] = orig;
            grad[i] = (plus - minus) / (2.0 * FD_STEP);
        }
        // drop components inside the plane: they only re-base it
        let (gu, gw) = grad.split_at_mut(m);
        for g in [&mut *gu, &mut *gw] {
            let cu = dot(g, &u);
            let cw = dot(g, &w);
            for k in 0..m {
                g[k] -= cu * u[k] + cw * w[k];
            }
        }
        let gnorm = (dot(gu, gu) + dot(gw, gw)).sqrt();
        if gnorm < 1e-14 {
            break;
        }

        let mut accepted = false;
        while step >= MIN_STEP {
            let s = step / gnorm;
            let cu: Vec<f64> = u.iter().zip(gu.iter()).map(|(a, g)| a + s * g).collect();
            let cw: Vec<f64> = w.iter().zip(gw.iter()).map(|(a, g)| a + s * g).collect();
            let cos = dot(&cu, &cw) / (dot(&cu, &cu) * dot(&cw, &cw)).sqrt();
            if cos.abs() > 1.0 - COLLAPSE_TOL {
                return None;
            }
            let (nu, nw) = gram_schmidt(&cu, &cw)?;
            let nv = f(&nu, &nw);
            if nv > val {
                let improvement = nv - val;
                u = nu;
                w = nw;
                val = nv;
                accepted = true;
                if improvement < MIN_IMPROVEMENT {
                    return Some((val, u, w));
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        up.copy_from_slice(&u);
        wp.copy_from_slice(&w);
    }
    Some((val, u, w))
}

fn starting_pair(r: usize, coords: &[(usize, usize)], m: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    if let Some(&(i, j)) = coords.get(r) {
        let mut u = vec![0.0; m];
        let mut w = vec![0.0; m];
        u[i] = 1.0;
        w[j] = 1.0;
        return (u, w);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    let u = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let w = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    (u, w)
}

/// Multistart search for the plane of largest `|K|` at the identity.
///
/// Seeds are every coordinate plane followed by Gaussian random pairs, for
/// `budget` restarts in total. Restart `r` draws from stream `r` of a
/// ChaCha generator keyed by `seed`, and ties are broken by restart index,
/// so the result does not depend on thread scheduling.
pub fn max_abs_curvature(a: &BlockGenerator, budget: usize, seed: u64) -> Result<CurvatureReport> {
    let m = a.dim() + 1;
    let coords = coordinate_planes(m);
    if budget < coords.len() {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} is below the {} coordinate planes",
            coords.len()
        )));
    }
    let alg = Algebra::new(a.dense());
    let results: Vec<Option<(f64, Vec<f64>, Vec<f64>)>> = (0..budget)
        .into_par_iter()
        .map(|r| {
            let (u, w) = starting_pair(r, &coords, m, seed);
            let (u, w) = gram_schmidt(&u, &w)?;
            ascend(&alg, u, w)
        })
        .collect();

    let discarded = results.iter().filter(|r| r.is_none()).count();
    let (max_abs, u, w) = results
        .into_iter()
        .flatten()
        .fold(
            None,
            |best: Option<(f64, Vec<f64>, Vec<f64>)>, cand| match best {
                Some(b) if b.0 >= cand.0 => Some(b),
                _ => Some(cand),
            },
        )
        .ok_or_else(|| Error::CheckFailed {
            stage: "curvature",
            detail: "every restart collapsed".into(),
        })?;
    let lmax = a.lambda_max();
    Ok(CurvatureReport {
        max_abs,
        argmax_plane: Plane { u, w },
        analytic_bound: CURVATURE_CONSTANT * lmax * lmax,
        samples_used: budget - discarded,
        discarded,
        seed,
    })
}

/// Operator norm of a square matrix (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

/// Standard basis vector of the Lie algebra.
pub fn basis_vector(n: usize, i: usize) -> TangentVector {
    TangentVector::from_ambient(&DVector::from_fn(
        n + 1,
        |k, _| if k == i { 1.0 } else { 0.0 },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::PolySpec;
    use crate::solvgroup::{assemble_generator, Block};
    use crate::spectra::roots_closed_form;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn generator(n: usize) -> BlockGenerator {
        assemble_generator(&roots_closed_form(&PolySpec::for_dimension(n).unwrap()).unwrap())
            .unwrap()
    }

    fn random_tangent(rng: &mut ChaCha8Rng, n: usize) -> TangentVector {
        TangentVector::new(
            DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            rng.random_range(-1.0..1.0),
        )
    }

    fn random_plane(rng: &mut ChaCha8Rng, m: usize) -> Plane {
        let u: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let w: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        Plane::orthonormalize(&u, &w).unwrap()
    }

    fn skew_generator(rng: &mut ChaCha8Rng, pairs: usize) -> BlockGenerator {
        BlockGenerator::from_blocks(
            (0..pairs)
                .map(|_| Block::Rot2 {
                    lambda: 0.0,
                    phi: rng.random_range(0.1..3.0),
                })
                .collect(),
        )
    }

    #[test]
    fn bracket_examples() {
        let a = generator(4);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut x = random_tangent(&mut rng, 4);
        let mut y = random_tangent(&mut rng, 4);
        x.x0 = 0.0;
        y.x0 = 0.0;
        assert_eq!(bracket(&x, &y, &a), TangentVector::zeros(4));
        let base = basis_vector(4, 4);
        let yp = TangentVector::new(y.xp.clone(), 0.0);
        assert_eq!(bracket(&base, &yp, &a).xp, a.dense() * &y.xp);
    }

    #[test]
    fn bracket_norm_bound_diagonal() {
        let a = generator(6).diagonal_part();
        let lmax = a.lambda_max();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let x = random_tangent(&mut rng, 6);
            let y = random_tangent(&mut rng, 6);
            let b = bracket(&x, &y, &a);
            assert_eq!(b.x0, 0.0);
            assert!(b.norm() <= lmax * x.norm() * y.norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ad_star_is_adjoint() {
        let a = generator(5);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        assert_eq!(ad_star(&TangentVector::zeros(5), &a), DMatrix::zeros(6, 6));
        let alg = Algebra::new(a.dense());
        for _ in 0..1000 {
            let x = random_tangent(&mut rng, 5);
            let y = random_tangent(&mut rng, 5);
            let z = random_tangent(&mut rng, 5);
            let lhs = (ad_star(&x, &a) * y.to_ambient()).dot(&z.to_ambient());
            let rhs = y.dot(&bracket(&x, &z, &a));
            assert!((lhs - rhs).abs() < 1e-11);
            let mut fast = vec![0.0; 6];
            alg.ad_star(
                x.to_ambient().as_slice(),
                y.to_ambient().as_slice(),
                &mut fast,
            );
            let slow = ad_star(&x, &a) * y.to_ambient();
            assert!((DVector::from_vec(fast) - slow).amax() < 1e-14);
        }
    }

    #[test]
    fn ad_star_norm_bound() {
        let a = generator(6).diagonal_part();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let x = random_tangent(&mut rng, 6);
            assert!(operator_norm(&ad_star(&x, &a)) <= a.lambda_max() * x.norm() + 1e-9);
        }
    }

    #[test]
    fn numerator_vanishes_on_lines_and_flat_groups() {
        let a = generator(6);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let x = random_tangent(&mut rng, 6);
            let y = TangentVector::new(&x.xp * 2.5, x.x0 * 2.5);
            assert!(curvature_numerator(&x, &y, &a).abs() < 1e-12);
            assert!(curvature_numerator(&x, &x, &a).abs() < 1e-12);
        }
        let flat = skew_generator(&mut rng, 3);
        for _ in 0..200 {
            let x = random_tangent(&mut rng, 6);
            let y = random_tangent(&mut rng, 6);
            assert!(curvature_numerator(&x, &y, &flat).abs() < 1e-10);
        }
    }

    #[test]
    fn hyperbolic_plane() {
        for lambda in [0.1, 0.5, 0.7, 0.962_423_650_119_206_9] {
            let a = BlockGenerator::from_blocks(vec![Block::Scal1 { lambda }]);
            let k = curvature_numerator(&basis_vector(1, 0), &basis_vector(1, 1), &a);
            assert_abs_diff_eq!(k, -lambda * lambda, epsilon = 1e-14);
            let p = Plane::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
            assert_abs_diff_eq!(
                sectional_curvature(&p, &a).unwrap(),
                -lambda * lambda,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn sectional_curvature_is_basis_independent() {
        let a = generator(5);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..200 {
            let p = random_plane(&mut rng, 6);
            let k = sectional_curvature(&p, &a).unwrap();
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (s, c) = th.sin_cos();
            let u2: Vec<f64> = p.u.iter().zip(&p.w).map(|(u, w)| c * u + s * w).collect();
            let w2: Vec<f64> = p.u.iter().zip(&p.w).map(|(u, w)| -s * u + c * w).collect();
            let q = Plane::orthonormalize(&u2, &w2).unwrap();
            assert!((sectional_curvature(&q, &a).unwrap() - k).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_planes() {
        let a = generator(2);
        let p = Plane {
            u: vec![1.0, 0.0, 0.0],
            w: vec![0.5, 1.0, 0.0],
        };
        assert!(matches!(
            sectional_curvature(&p, &a),
            Err(Error::NotOrthonormal(_))
        ));
        let p = Plane::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            sectional_curvature(&p, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn maximizer_on_two_dimensional_group() {
        let a = BlockGenerator::from_blocks(vec![Block::Scal1 { lambda: 0.7 }]);
        let r = max_abs_curvature(&a, 8, 1).unwrap();
        assert_abs_diff_eq!(r.max_abs, 0.49, epsilon = 1e-8);
        assert!(max_abs_curvature(&generator(4), 3, 1).is_err());
    }

    #[test]
    fn maximizer_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let a = skew_generator(&mut rng, 2);
        let r = max_abs_curvature(&a, 64, 3).unwrap();
        assert!(r.max_abs < 1e-9);
        assert_eq!(r.analytic_bound, 0.0);
    }

    #[test]
    fn maximizer_respects_bound_n4() {
        let spec = roots_closed_form(&PolySpec::for_dimension(4).unwrap()).unwrap();
        let a = assemble_generator(&spec).unwrap();
        let r = max_abs_curvature(&a, 256, 7).unwrap();
        assert_abs_diff_eq!(
            analytic_bound(&spec),
            0.636_803_256_587_284_6,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(r.analytic_bound, analytic_bound(&spec), epsilon = 1e-15);
        assert!(r.max_abs <= r.analytic_bound * (1.0 + 1e-6));
        assert!(r.max_abs >= spec.lambda_max.powi(2) * (1.0 - 1e-9));
        assert_eq!(r, max_abs_curvature(&a, 256, 7).unwrap());
    }

    #[test]
    fn analytic_bound_values() {
        let s = roots_closed_form(&PolySpec::for_dimension(2).unwrap()).unwrap();
        assert_abs_diff_eq!(analytic_bound(&s), 2.547_213_026_349_138_6, epsilon = 1e-12);
        assert_eq!(analytic_bound(&s.flattened()), 0.0);
    }
}
