//! The solvable group `S = R^n ⋊ R` with product
//! `(v, t)·(w, s) = (v + Exp(tA)·w, t + s)` and its left-invariant metric.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Block {
    /// `λ·I + φ·J` with `J = [[0, 1], [-1, 0]]`.
    Rot2 {
        lambda: f64,
        phi: f64,
    },
    Scal1 {
        lambda: f64,
    },
}

impl Block {
    pub fn size(&self) -> usize {
        match self {
            Block::Rot2 { .. } => 2,
            Block::Scal1 { .. } => 1,
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Block::Rot2 { lambda, .. } | Block::Scal1 { lambda } => lambda,
        }
    }
}

/// Block-diagonal generator `A` of the `R` action, kept both as blocks and
/// as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGenerator {
    blocks: Vec<Block>,
    dense: DMatrix<f64>,
}

impl BlockGenerator {
    pub fn from_blocks(blocks: Vec<Block>) -> Self {
        let n: usize = blocks.iter().map(Block::size).sum();
        let mut dense = DMatrix::zeros(n, n);
        let mut at = 0;
        for b in &blocks {
            match *b {
                Block::Rot2 { lambda, phi } => {
                    dense[(at, at)] = lambda;
                    dense[(at + 1, at + 1)] = lambda;
                    dense[(at, at + 1)] = phi;
                    dense[(at + 1, at)] = -phi;
                }
                Block::Scal1 { lambda } => dense[(at, at)] = lambda,
            }
            at += b.size();
        }
        BlockGenerator { blocks, dense }
    }

    pub fn dim(&self) -> usize {
        self.dense.nrows()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    pub fn trace(&self) -> f64 {
        self.dense.trace()
    }

    pub fn lambda_max(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.lambda().abs())
            .fold(0.0, f64::max)
    }

    /// The same generator with every rotation angle removed. The group it
    /// defines carries an isometric left-invariant metric.
    pub fn diagonal_part(&self) -> BlockGenerator {
        Self::from_blocks(
            self.blocks
                .iter()
                .map(|b| match *b {
                    Block::Rot2 { lambda, .. } => Block::Rot2 { lambda, phi: 0.0 },
                    s => s,
                })
                .collect(),
        )
    }
}

/// One `Rot2` block per conjugate pair, then one `Scal1` per positive real
/// root.
pub fn assemble_generator(spec: &Spectrum) -> Result<BlockGenerator> {
    if let Some(&l) = spec.negative_reals.first() {
        return Err(Error::Unrepresentable(-l.exp()));
    }
    let blocks = spec
        .pairs
        .iter()
        .map(|p| Block::Rot2 {
            lambda: p.lambda,
            phi: p.phi,
        })
        .chain(spec.reals.iter().map(|&lambda| Block::Scal1 { lambda }))
        .collect();
    Ok(BlockGenerator::from_blocks(blocks))
}

/// `Exp(tA)` from the block formula: `e^{tλ}` rotations and scalars.
pub fn exp_ta_closed(a: &BlockGenerator, t: f64) -> DMatrix<f64> {
    let n = a.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in &a.blocks {
        match *b {
            Block::Rot2 { lambda, phi } => {
                let e = (t * lambda).exp();
                let (s, c) = (t * phi).sin_cos();
                out[(at, at)] = e * c;
                out[(at, at + 1)] = e * s;
                out[(at + 1, at)] = -e * s;
                out[(at + 1, at + 1)] = e * c;
            }
            Block::Scal1 { lambda } => out[(at, at)] = (t * lambda).exp(),
        }
        at += b.size();
    }
    out
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn exp_generic(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite matrix entry".into()));
    }
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if norm1 > 700.0 {
        return Err(Error::ExpOverflow(norm1));
    }
    let squarings = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * 2f64.powi(-squarings);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::ExpOverflow(norm1))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::ExpOverflow(norm1));
    }
    Ok(r)
}

/// A point `(v, t)` of the group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub v: DVector<f64>,
    pub t: f64,
}

impl GroupElement {
    pub fn new(v: DVector<f64>, t: f64) -> Self {
        GroupElement { v, t }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            v: DVector::zeros(n),
            t: 0.0,
        }
    }

    /// Max-norm distance to the identity.
    pub fn deviation_from_identity(&self) -> f64 {
        self.v.amax().max(self.t.abs())
    }
}

/// A Lie algebra vector `(X', x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub xp: DVector<f64>,
    pub x0: f64,
}

impl TangentVector {
    pub fn new(xp: DVector<f64>, x0: f64) -> Self {
        TangentVector { xp, x0 }
    }

    pub fn zeros(n: usize) -> Self {
        TangentVector {
            xp: DVector::zeros(n),
            x0: 0.0,
        }
    }

    pub fn from_ambient(x: &DVector<f64>) -> Self {
        let n = x.len() - 1;
        TangentVector {
            xp: x.rows(0, n).into_owned(),
            x0: x[n],
        }
    }

    pub fn to_ambient(&self) -> DVector<f64> {
        let n = self.xp.len();
        DVector::from_fn(n + 1, |i, _| if i < n { self.xp[i] } else { self.x0 })
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.xp.dot(&other.xp) + self.x0 * other.x0
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

fn check_dim(a: &BlockGenerator, v: &DVector<f64>) -> Result<()> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

pub fn multiply(g: &GroupElement, h: &GroupElement, a: &BlockGenerator) -> Result<GroupElement> {
    check_dim(a, &g.v)?;
    check_dim(a, &h.v)?;
    Ok(GroupElement {
        v: &g.v + exp_ta_closed(a, g.t) * &h.v,
        t: g.t + h.t,
    })
}

/// `(v, t)^{-1} = (-Exp(-tA)·v, -t)`.
pub fn inverse(g: &GroupElement, a: &BlockGenerator) -> Result<GroupElement> {
    check_dim(a, &g.v)?;
    Ok(GroupElement {
        v: -(exp_ta_closed(a, -g.t) * &g.v),
        t: -g.t,
    })
}

/// `g^{-1} h^{-1} g h` evaluated with the group law.
pub fn commutator(g: &GroupElement, h: &GroupElement, a: &BlockGenerator) -> Result<GroupElement> {
    let gi = inverse(g, a)?;
    let hi = inverse(h, a)?;
    let left = multiply(&gi, &hi, a)?;
    let right = multiply(g, h, a)?;
    multiply(&left, &right, a)
}

/// Closed-form vector part of `[(v,t),(w,s)]`:
/// `Exp(-(s+t)A)v - Exp(-tA)v + Exp(-sA)w - Exp(-(s+t)A)w`.
pub fn commutator_vector(g: &GroupElement, h: &GroupElement, a: &BlockGenerator) -> DVector<f64> {
    let (t, s) = (g.t, h.t);
    let e_st = exp_ta_closed(a, -s - t);
    &e_st * &g.v - exp_ta_closed(a, -t) * &g.v + exp_ta_closed(a, -s) * &h.v - &e_st * &h.v
}

/// Gram matrix of the left-invariant metric at `p` in the coordinates
/// `(v, t)`: `H(-t)^T H(-t)` with `H(-t) = diag(Exp(-tA), 1)`.
pub fn metric_at(p: &GroupElement, a: &BlockGenerator) -> DMatrix<f64> {
    let n = a.dim();
    let e = exp_ta_closed(a, -p.t);
    let mut g = DMatrix::zeros(n + 1, n + 1);
    g.view_mut((0, 0), (n, n)).copy_from(&(e.transpose() * &e));
    g[(n, n)] = 1.0;
    g
}

/// Differential of left translation by `g`, applied to a tangent vector.
pub fn push_forward(g: &GroupElement, x: &TangentVector, a: &BlockGenerator) -> TangentVector {
    TangentVector {
        xp: exp_ta_closed(a, g.t) * &x.xp,
        x0: x.x0,
    }
}
