#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use pinch_core::exactalg::{IntMatrix, PolySpec};
use pinch_core::solvgroup::{assemble_generator, metric_at, Block, BlockGenerator, GroupElement};
use pinch_core::spectra::roots_closed_form;
use rand::Rng;

pub fn generator_for(n: usize) -> BlockGenerator {
    let spec = PolySpec::for_dimension(n).unwrap();
    assemble_generator(&roots_closed_form(&spec).unwrap()).unwrap()
}

pub fn random_blocks<R: Rng>(rng: &mut R, n: usize, lambda: f64, phi: f64) -> BlockGenerator {
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        if left >= 2 && rng.random_bool(0.7) {
            blocks.push(Block::Rot2 {
                lambda: rng.random_range(-lambda..=lambda),
                phi: rng.random_range(-phi..=phi),
            });
            left -= 2;
        } else {
            blocks.push(Block::Scal1 {
                lambda: rng.random_range(-lambda..=lambda),
            });
            left -= 1;
        }
    }
    BlockGenerator::from_blocks(blocks)
}

/// Determinant by cofactor expansion along the first row.
pub fn det_cofactor(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0] as i128,
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] as i128 * det_cofactor(&minor)
            })
            .sum(),
    }
}

pub fn int_matrix(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows(rows).unwrap()
}

// Fourth-order central stencils.
const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
const D2: [(f64, f64); 5] = [
    (-2.0, -1.0),
    (-1.0, 16.0),
    (0.0, -30.0),
    (1.0, 16.0),
    (2.0, -1.0),
];

/// Sectional curvature of the plane spanned by coordinate vectors `x` and `y`
/// at `p`, for the metric `g`, from Christoffel symbols and the Riemann
/// tensor assembled with finite differences of `g` only.
pub fn sectional_fd(
    g: &dyn Fn(&[f64]) -> DMatrix<f64>,
    p: &[f64],
    x: &[f64],
    y: &[f64],
    step: f64,
) -> f64 {
    let m = p.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(k, s) in shifts {
            q[k] += s * step;
        }
        g(&q)
    };
    let g0 = g(p);
    let ginv = g0.clone().try_inverse().expect("metric is invertible");

    let dg: Vec<DMatrix<f64>> = (0..m)
        .map(|k| {
            D1.iter()
                .map(|&(s, c)| at(&[(k, s)]) * c)
                .sum::<DMatrix<f64>>()
                / (12.0 * step)
        })
        .collect();
    let mut ddg = vec![vec![DMatrix::zeros(m, m); m]; m];
    for k in 0..m {
        for l in k..m {
            let v = if k == l {
                D2.iter()
                    .map(|&(s, c)| at(&[(k, s)]) * c)
                    .sum::<DMatrix<f64>>()
                    / (12.0 * step * step)
            } else {
                let mut acc = DMatrix::zeros(m, m);
                for &(a, ca) in &D1 {
                    for &(b, cb) in &D1 {
                        acc += at(&[(k, a), (l, b)]) * (ca * cb);
                    }
                }
                acc / (144.0 * step * step)
            };
            ddg[k][l] = v.clone();
            ddg[l][k] = v;
        }
    }

    // Γ^a_{ij} = ½ g^{al} (∂_i g_{lj} + ∂_j g_{li} − ∂_l g_{ij})
    let gamma_lower =
        |l: usize, i: usize, j: usize| 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
    let gamma = |a: usize, i: usize, j: usize| {
        (0..m)
            .map(|l| ginv[(a, l)] * gamma_lower(l, i, j))
            .sum::<f64>()
    };
    // ∂_c Γ^a_{ij}
    let dginv: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&ginv * d * &ginv)).collect();
    let dgamma = |c: usize, a: usize, i: usize, j: usize| {
        (0..m)
            .map(|l| {
                let dlow = 0.5 * (ddg[c][i][(l, j)] + ddg[c][j][(l, i)] - ddg[c][l][(i, j)]);
                dginv[c][(a, l)] * gamma_lower(l, i, j) + ginv[(a, l)] * dlow
            })
            .sum::<f64>()
    };
    let gam: Vec<f64> = (0..m * m * m)
        .map(|idx| gamma(idx / (m * m), (idx / m) % m, idx % m))
        .collect();
    let gm = |a: usize, i: usize, j: usize| gam[a * m * m + i * m + j];

    // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
    let riemann = |a: usize, b: usize, c: usize, d: usize| {
        let mut r = dgamma(c, a, d, b) - dgamma(d, a, c, b);
        for e in 0..m {
            r += gm(a, c, e) * gm(e, d, b) - gm(a, d, e) * gm(e, c, b);
        }
        r
    };

    // ⟨R(X,Y)Y, X⟩
    let mut num = 0.0;
    for a in 0..m {
        let xa: f64 = (0..m).map(|e| g0[(e, a)] * x[e]).sum();
        if xa == 0.0 {
            continue;
        }
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let w = y[b] * x[c] * y[d];
                    if w != 0.0 {
                        num += xa * w * riemann(a, b, c, d);
                    }
                }
            }
        }
    }
    let xv = DVector::from_column_slice(x);
    let yv = DVector::from_column_slice(y);
    let gxx = xv.dot(&(&g0 * &xv));
    let gyy = yv.dot(&(&g0 * &yv));
    let gxy = xv.dot(&(&g0 * &yv));
    num / (gxx * gyy - gxy * gxy)
}

/// The left-invariant metric of the group as a function of coordinates `(v, t)`.
pub fn group_metric(a: &BlockGenerator) -> impl Fn(&[f64]) -> DMatrix<f64> + '_ {
    move |q: &[f64]| {
        let n = a.dim();
        let p = GroupElement::new(DVector::from_column_slice(&q[..n]), q[n]);
        metric_at(&p, a)
    }
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, r: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-r..=r))
}
