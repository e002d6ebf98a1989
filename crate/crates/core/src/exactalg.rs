//! Exact integer polynomials and matrices.
//!
//! Everything here runs on arbitrary-precision integers, so unimodularity and
//! characteristic polynomials are decided without rounding.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parameters of the polynomial family `x^{2k} + s·3·x^k + 1`, optionally
/// multiplied by `(x - 1)` to reach odd degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolySpec {
    pub k: u32,
    pub sign: i8,
    pub odd_factor: bool,
}

impl PolySpec {
    pub fn new(k: u32, sign: i8, odd_factor: bool) -> Result<Self> {
        let spec = PolySpec {
            k,
            sign,
            odd_factor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The construction used in dimension `n`: `k = ⌊n/2⌋`, the middle sign
    /// is `-1` for odd `k` so that no root is a negative real.
    pub fn for_dimension(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!("dimension {n} < 2")));
        }
        let k = (n / 2) as u32;
        PolySpec::new(k, Self::default_sign(k), n % 2 == 1)
    }

    pub fn default_sign(k: u32) -> i8 {
        if k % 2 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidSpec(format!(
                "sign must be +1 or -1, got {}",
                self.sign
            )));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        2 * self.k as usize + usize::from(self.odd_factor)
    }
}

/// Integer polynomial, leading coefficient first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    /// Strips leading zeros; the zero polynomial keeps a single `0`.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let first = coeffs.iter().position(|c| !c.is_zero());
        let coeffs = match first {
            Some(i) => coeffs[i..].to_vec(),
            None => vec![BigInt::zero()],
        };
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs[0].is_one()
    }

    pub fn leading(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn constant(&self) -> &BigInt {
        self.coeffs.last().expect("non-empty")
    }

    /// Coefficient of `x^i`.
    pub fn coeff_of_power(&self, i: usize) -> &BigInt {
        &self.coeffs[self.degree() - i]
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Coefficients as `f64`, leading first.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// `coeffs[i] == coeffs[deg - i]` for all `i`.
    pub fn is_palindromic(&self) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && d > 0 {
                continue;
            }
            let p = d - i;
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let show_mag = !mag.is_one() || p == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match p {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{p}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(serde::de::Error::custom("empty coefficient list"));
        }
        Ok(IntPoly::new(coeffs))
    }
}

/// Square matrix of exact integers, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            entries: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        Ok(IntMatrix {
            n,
            entries: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.n + j] = v;
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_i64()).collect())
            .collect()
    }

    fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(l, j);
                }
            }
        }
        out
    }

    /// `tr(self · other)` without forming the product.
    fn trace_of_product(&self, other: &IntMatrix) -> BigInt {
        let n = self.n;
        let mut acc = BigInt::zero();
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if !a.is_zero() {
                    acc += a * other.get(l, i);
                }
            }
        }
        acc
    }
}

/// `x^{2k} + sign·3·x^k + 1`, times `(x - 1)` when `odd_factor` is set.
pub fn build_polynomial(spec: &PolySpec) -> Result<IntPoly> {
    spec.validate()?;
    let k = spec.k as usize;
    let mut coeffs = vec![BigInt::zero(); 2 * k + 1];
    coeffs[0] = BigInt::one();
    coeffs[k] = BigInt::from(3 * i64::from(spec.sign));
    coeffs[2 * k] = BigInt::one();
    let p = IntPoly::new(coeffs);
    Ok(if spec.odd_factor {
        p.mul(&IntPoly::from_i64(&[1, -1]))
    } else {
        p
    })
}

/// Frobenius companion matrix: ones on the subdiagonal, last column
/// `-c_0, …, -c_{n-1}` for `p = x^n + c_{n-1}x^{n-1} + … + c_0`.
pub fn companion_matrix(p: &IntPoly) -> Result<IntMatrix> {
    if !p.is_monic() {
        return Err(Error::NotMonic(p.leading().to_string()));
    }
    let n = p.degree();
    if n < 1 {
        return Err(Error::InvalidArgument(
            "companion matrix needs degree >= 1".into(),
        ));
    }
    let mut m = IntMatrix::zeros(n);
    for i in 1..n {
        m.set(i, i - 1, BigInt::one());
    }
    for i in 0..n {
        m.set(i, n - 1, -p.coeff_of_power(i));
    }
    Ok(m)
}

/// Determinant by Bareiss fraction-free elimination.
pub fn det_exact(m: &IntMatrix) -> BigInt {
    let n = m.n;
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).clone()).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                debug_assert!(num.is_multiple_of(&prev));
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// `det(xI - M)` by the Faddeev–LeVerrier recurrence. Every division is
/// exact over the integers.
pub fn charpoly_exact(m: &IntMatrix) -> IntPoly {
    let n = m.n;
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[0] = BigInt::one();
    // M_0 = 0, c_n = 1; M_k = A·M_{k-1} + c_{n-k+1}·I, c_{n-k} = -tr(A·M_k)/k
    let mut mk = IntMatrix::zeros(n);
    for k in 1..=n {
        let mut next = m.mul(&mk);
        for i in 0..n {
            next.entries[i * n + i] += &coeffs[k - 1];
        }
        mk = next;
        let tr = m.trace_of_product(&mk);
        let kk = BigInt::from(k);
        debug_assert!(tr.is_multiple_of(&kk));
        coeffs[k] = -(tr / kk);
    }
    IntPoly::new(coeffs)
}

pub fn is_unimodular(m: &IntMatrix) -> bool {
    det_exact(m).abs().is_one()
}
