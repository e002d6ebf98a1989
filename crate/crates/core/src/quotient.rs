//! Lattices in `S` and diameter bounds for the quotients `S/Γ'_h`.
//!
//! The holonomy `Exp(A)` is conjugate to the integer matrix `T`:
//! `Exp(A)·P = P·T`, so `Γ = P·Z^n` is an `Exp(A)`-invariant lattice and
//! `Γ'_h = (1/h)Γ ⋊ Z` is a lattice in `S` for every positive integer `h`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::IntMatrix;
use crate::solvgroup::{assemble_generator, exp_ta_closed, BlockGenerator};
use crate::spectra::Spectrum;

/// Conjugation residual accepted by [`conjugator`].
pub const CONJUGATION_TOL: f64 = 1e-8;
/// Default number of `t` samples for the fiber bound.
pub const DEFAULT_T_GRID: usize = 64;
/// Diameter of the base circle `R/Z` (circumference 1).
pub const BASE_DIAMETER: f64 = 0.5;
/// Base diameter of the coarser variant of the bound, taken as 1.
pub const BASE_DIAMETER_PAPER: f64 = 1.0;

const ROOT_CLUSTER_TOL: f64 = 1e-8;

/// The lattice `(1/h)·P·Z^n` together with the integer matrix `T` it is
/// invariant under.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeData {
    pub t: IntMatrix,
    pub p: DMatrix<f64>,
    pub h: u64,
    /// `‖Exp(A)P − PT‖_F / ‖P‖_F`
    pub residual: f64,
    pub condition: f64,
}

impl LatticeData {
    pub fn with_h(&self, h: u64) -> LatticeData {
        LatticeData { h, ..self.clone() }
    }

    /// Basis of `(1/h)Γ`, one vector per column.
    pub fn basis(&self) -> DMatrix<f64> {
        &self.p / self.h as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterBound {
    pub base_diam: f64,
    pub base_diam_paper: f64,
    pub fiber_sup: f64,
    pub upper: f64,
    pub upper_paper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<f64>,
}

fn null_space(m: &DMatrix<Complex64>, dim: usize) -> Result<Vec<DVector<Complex64>>> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.ok_or(Error::DegenerateBasis)?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    Ok(idx[..dim]
        .iter()
        .map(|&i| vt.row(i).adjoint().into_owned())
        .collect())
}

/// Builds `P` with `Exp(A)·P = P·T`, where `A` is the generator assembled
/// from `spec`.
///
/// The columns of `Q = P^{-1}` are a real Jordan basis of `T`: `Re v, Im v`
/// for an eigenvector `v` of each conjugate pair and the eigenvector itself
/// for each positive real root, in the block order of
/// [`assemble_generator`]. `P` is scaled to `‖P‖_F = √n`.
pub fn conjugator(t: &IntMatrix, spec: &Spectrum) -> Result<LatticeData> {
    let a = assemble_generator(spec)?;
    let n = t.dim();
    if spec.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spec.n,
        });
    }
    let tf = t.to_dmatrix();
    let tc = tf.map(|x| Complex64::new(x, 0.0));

    let mut roots: Vec<(Complex64, bool)> = spec
        .pairs
        .iter()
        .map(|p| (Complex64::from_polar(p.lambda.exp(), p.phi), true))
        .collect();
    roots.extend(
        spec.reals
            .iter()
            .map(|l| (Complex64::new(l.exp(), 0.0), false)),
    );

    let mut q = DMatrix::<f64>::zeros(n, n);
    let mut col = 0;
    let mut i = 0;
    while i < roots.len() {
        let (r, is_pair) = roots[i];
        let mult = roots[i..]
            .iter()
            .take_while(|(s, p)| *p == is_pair && (s - r).norm() < ROOT_CLUSTER_TOL)
            .count();
        let shifted = &tc - DMatrix::<Complex64>::identity(n, n) * r;
        for v in null_space(&shifted, mult)? {
            // rotate so the largest component is real and positive
            let big = v
                .iter()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .copied();
            let phase = big
                .map(|z| z.conj() / z.norm())
                .unwrap_or(Complex64::new(1.0, 0.0));
            let v = v * phase;
            q.set_column(col, &v.map(|z| z.re));
            if is_pair {
                q.set_column(col + 1, &v.map(|z| z.im));
                col += 2;
            } else {
                col += 1;
            }
        }
        i += mult;
    }

    let mut p = q.try_inverse().ok_or(Error::DegenerateBasis)?;
    let scale = (n as f64).sqrt() / p.norm();
    p *= scale;
    let sv = p.singular_values();
    let condition = sv.max() / sv.min();
    let e = exp_ta_closed(&a, 1.0);
    let residual = (&e * &p - &p * &tf).norm() / p.norm();
    if !(residual < CONJUGATION_TOL) {
        return Err(Error::ConjugationFailure {
            residual,
            condition,
        });
    }
    Ok(LatticeData {
        t: t.clone(),
        p,
        h: 1,
        residual,
        condition,
    })
}

/// Largest distance from `Exp(A)·b` to the lattice over basis vectors `b`
/// of `(1/h)Γ`, measured by rounding coordinates in that basis.
pub fn lattice_invariance_check(l: &LatticeData, a: &BlockGenerator) -> f64 {
    let b = l.basis();
    let lu = b.clone().lu();
    let e = exp_ta_closed(a, 1.0);
    let image = &e * &b;
    let mut worst = 0.0f64;
    for j in 0..b.ncols() {
        let y = image.column(j).into_owned();
        let Some(c) = lu.solve(&y) else {
            return f64::INFINITY;
        };
        let frac = c.map(|x| x - x.round());
        worst = worst.max((&b * frac).norm());
    }
    worst
}

/// Basis of the fiber lattice over base point `t`, as seen by the metric:
/// `(1/h)·Exp(−tA)·P`.
pub fn fiber_basis(l: &LatticeData, a: &BlockGenerator, t: f64) -> DMatrix<f64> {
    exp_ta_closed(a, -t) * l.basis()
}

/// LLL reduction with `δ = 3/4`, columns as basis vectors.
pub fn lll_reduce(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.ncols();
    let mut b: Vec<DVector<f64>> = (0..n).map(|j| basis.column(j).into_owned()).collect();
    if n < 2 {
        return basis.clone();
    }
    let gso = |b: &[DVector<f64>]| {
        let mut star: Vec<DVector<f64>> = Vec::with_capacity(b.len());
        let mut mu = vec![vec![0.0; b.len()]; b.len()];
        for i in 0..b.len() {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = b[i].dot(&star[j]) / star[j].norm_squared();
                v -= &star[j] * mu[i][j];
            }
            star.push(v);
        }
        (star, mu)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 10_000 {
        guard += 1;
        let (_, mut mu) = gso(&b);
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = b[j].clone();
                b[k] -= bj * q;
                for i in 0..j {
                    mu[k][i] -= q * mu[j][i];
                }
                mu[k][j] -= q;
            }
        }
        let (star, mu) = gso(&b);
        let lhs = star[k].norm_squared();
        let rhs = (0.75 - mu[k][k - 1] * mu[k][k - 1]) * star[k - 1].norm_squared();
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    DMatrix::from_columns(&b)
}

/// `½·√(Σ‖b_i*‖²)` over the Gram–Schmidt vectors of `basis`: an upper bound
/// on the covering radius of the lattice it spans.
pub fn covering_radius_bound(basis: &DMatrix<f64>) -> Result<f64> {
    let qr = basis.clone().qr();
    let r = qr.r();
    let mut sum = 0.0;
    for i in 0..r.nrows().min(r.ncols()) {
        let d = r[(i, i)];
        if d.abs() < 1e-300 || !d.is_finite() {
            return Err(Error::DegenerateBasis);
        }
        sum += d * d;
    }
    Ok(0.5 * sum.sqrt())
}

/// Covering-radius bound of the fiber over `t` after LLL reduction.
pub fn fiber_covering_bound(l: &LatticeData, a: &BlockGenerator, t: f64) -> Result<f64> {
    covering_radius_bound(&lll_reduce(&fiber_basis(l, a, t)))
}

/// `‖B(1)·T − B(0)‖_F / ‖B(0)‖_F`: zero exactly when `Exp(−A)` maps the
/// fiber lattice over `t = 0` onto itself with change of basis `T^{-1}`.
pub fn fiber_periodicity_defect(l: &LatticeData, a: &BlockGenerator) -> f64 {
    let b0 = fiber_basis(l, a, 0.0);
    let b1 = fiber_basis(l, a, 1.0);
    (b1 * l.t.to_dmatrix() - &b0).norm() / b0.norm()
}

/// Supremum over `t` of the fiber diameter bound: the maximum over a
/// uniform grid on `[0, 1]`, inflated by `1 + ‖A‖·Δt·e^{‖A‖}` to cover the
/// gaps between grid points.
pub fn fiber_diameter_upper(l: &LatticeData, a: &BlockGenerator, t_grid: usize) -> Result<f64> {
    if t_grid < 16 {
        return Err(Error::InvalidArgument(format!("t_grid {t_grid} < 16")));
    }
    let dt = 1.0 / t_grid as f64;
    let mut worst = 0.0f64;
    for i in 0..=t_grid {
        worst = worst.max(fiber_covering_bound(l, a, i as f64 * dt)?);
    }
    let norm_a = if a.dim() == 0 {
        0.0
    } else {
        a.dense().singular_values().max()
    };
    Ok(worst * (1.0 + norm_a * dt * norm_a.exp()))
}

/// Diameter of `S/Γ'_h` bounded by base diameter plus the largest fiber
/// diameter (the projection to the base circle is a Riemannian submersion).
pub fn diameter_upper(l: &LatticeData, a: &BlockGenerator) -> Result<DiameterBound> {
    let fiber_sup = fiber_diameter_upper(l, a, DEFAULT_T_GRID)?;
    Ok(DiameterBound {
        base_diam: BASE_DIAMETER,
        base_diam_paper: BASE_DIAMETER_PAPER,
        fiber_sup,
        upper: BASE_DIAMETER + fiber_sup,
        upper_paper: BASE_DIAMETER_PAPER + fiber_sup,
        sampled: None,
    })
}

fn integer_inverse(t: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let rows = t.rows_i64().ok_or(Error::DegenerateBasis)?;
    let n = rows.len();
    let inv = t.to_dmatrix().try_inverse().ok_or(Error::DegenerateBasis)?;
    let out: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)].round() as i64).collect())
        .collect();
    for i in 0..n {
        for j in 0..n {
            let s: i64 = (0..n).map(|k| rows[i][k] * out[k][j]).sum();
            if s != i64::from(i == j) {
                return Err(Error::CheckFailed {
                    stage: "lattice",
                    detail: "T is not invertible over the integers".into(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fixed-degree graph in compressed form: node `u` owns
/// `targets[u*degree..(u+1)*degree]`.
struct TorusGraph {
    degree: usize,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl TorusGraph {
    fn node_count(&self) -> usize {
        self.targets.len() / self.degree
    }

    fn eccentricity(&self, source: usize) -> f64 {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            let range = u * self.degree..(u + 1) * self.degree;
            for (&v, &w) in self.targets[range.clone()].iter().zip(&self.weights[range]) {
                let v = v as usize;
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
        dist.into_iter().fold(0.0, f64::max)
    }
}

fn apply_int(m: &[Vec<i64>], c: &[i64]) -> Vec<i64> {
    m.iter()
        .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
        .collect()
}

/// Graph estimate of the diameter of `S/Γ'_h` for `n ≤ 3`.
///
/// Nodes form a `grid^{n+1}` lattice over the fundamental domain
/// (fiber coordinates in the basis of `(1/h)Γ`, base coordinate in
/// `[0, 1)`); edges join all `3^{n+1} − 1` neighbours, wrapping through the
/// deck transformations, and carry the metric length of the straight segment
/// evaluated at its midpoint. Returns the largest shortest-path distance.
pub fn sampled_diameter(l: &LatticeData, a: &BlockGenerator, grid: usize) -> Result<f64> {
    let n = a.dim();
    if n > 3 {
        return Err(Error::InvalidArgument(format!(
            "sampled diameter is limited to n <= 3, got {n}"
        )));
    }
    if grid < 8 {
        return Err(Error::GridTooCoarse(grid));
    }
    let t_int = l.t.rows_i64().ok_or(Error::DegenerateBasis)?;
    let t_inv = integer_inverse(&l.t)?;
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32 + 1))
        .map(|mut code| {
            (0..=n)
                .map(|_| {
                    let d = (code % 3) as i64 - 1;
                    code /= 3;
                    d
                })
                .collect::<Vec<i64>>()
        })
        .filter(|o| o.iter().any(|&d| d != 0))
        .collect();
    let basis = l.basis();
    let g = grid as f64;
    let weights: Vec<Vec<f64>> = (0..grid)
        .map(|s| {
            offsets
                .iter()
                .map(|o| {
                    let ds = o[n] as f64 / g;
                    let t_mid = s as f64 / g + ds / 2.0;
                    let dc = DVector::from_fn(n, |i, _| o[i] as f64 / g);
                    let dv = exp_ta_closed(a, -t_mid) * (&basis * dc);
                    (dv.norm_squared() + ds * ds).sqrt()
                })
                .collect()
        })
        .collect();
    let nodes = grid.pow(n as u32 + 1);
    let gi = grid as i64;
    let encode = |c: &[i64]| -> u32 {
        c.iter()
            .rev()
            .fold(0i64, |acc, &x| acc * gi + x.rem_euclid(gi)) as u32
    };
    let degree = offsets.len();
    let mut targets = Vec::with_capacity(nodes * degree);
    let mut edge_weights = Vec::with_capacity(nodes * degree);
    for id in 0..nodes {
        let mut rest = id;
        let coords: Vec<i64> = (0..=n)
            .map(|_| {
                let c = (rest % grid) as i64;
                rest /= grid;
                c
            })
            .collect();
        let s = coords[n] as usize;
        for (o, &w) in offsets.iter().zip(&weights[s]) {
            let mut fiber: Vec<i64> = (0..n).map(|i| coords[i] + o[i]).collect();
            let mut base = coords[n] + o[n];
            if base >= gi {
                base -= gi;
                fiber = apply_int(&t_inv, &fiber);
            } else if base < 0 {
                base += gi;
                fiber = apply_int(&t_int, &fiber);
            }
            fiber.push(base);
            targets.push(encode(&fiber));
            edge_weights.push(w);
        }
    }
    let graph = TorusGraph {
        degree,
        targets,
        weights: edge_weights,
    };
    let diam = (0..graph.node_count())
        .into_par_iter()
        .map(|s| graph.eccentricity(s))
        .reduce(|| 0.0, f64::max);
    if !diam.is_finite() {
        return Err(Error::GridTooCoarse(grid));
    }
    Ok(diam)
}
