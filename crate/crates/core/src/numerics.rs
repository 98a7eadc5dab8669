//! Dense complex linear algebra for small square matrices.
//!
//! Everything in the crate is carried by [`ComplexMatrix`] (operators, states)
//! and [`ComplexVector`] (kets). Storage is row-major and the dimension is
//! fixed at construction.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Equality, Hermiticity and unitarity tolerance used across the crate.
pub const TOL: f64 = 1e-10;

/// Slack on the smallest Cholesky pivot when testing positive semidefiniteness.
pub const PSD_SLACK: f64 = 1e-8;

pub const I: Complex = Complex::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// `exp(i theta)`
#[inline]
pub fn cis(theta: f64) -> Complex {
    Complex::from_polar(1.0, theta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![Complex::default(); dim] }
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = Self::zeros(dim);
        v.entries[index] = cr(1.0);
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Result<Complex> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: Complex) -> ComplexVector {
        ComplexVector::new(self.entries.iter().map(|z| z * s).collect())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.entries[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex::default(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = cr(1.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != dim {
                return Err(Error::NonSquare { rows: dim, row, len: r.len() });
            }
            entries.extend(r);
        }
        Ok(Self { dim, entries })
    }

    pub fn diagonal(diag: &[Complex]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, z) in diag.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Complex>> {
        self.entries.chunks(self.dim.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn scaled(&self, s: Complex) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, entries: self.entries.iter().map(|&z| f(z)).collect() }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: Complex, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += s * b;
        }
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dims(self.dim, v.dim())?;
        let d = self.dim;
        Ok(ComplexVector::new(
            (0..d)
                .map(|i| (0..d).map(|j| self.entries[i * d + j] * v[j]).sum())
                .collect(),
        ))
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut exp: u64) -> ComplexMatrix {
        let mut base = self.clone();
        let mut acc = ComplexMatrix::identity(self.dim);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn frob_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        frob_dist(self, &adjoint(self)).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = &adjoint(self) * self;
        frob_dist(&p, &ComplexMatrix::identity(self.dim)).map(|d| d <= tol).unwrap_or(false)
    }

    /// Positive semidefiniteness up to `slack`: Cholesky of `self + slack * 1`
    /// must have strictly positive real pivots.
    pub fn is_positive_semidefinite(&self, slack: f64) -> bool {
        let d = self.dim;
        let mut l = vec![Complex::default(); d * d];
        for j in 0..d {
            let mut pivot = self.entries[j * d + j].re + slack;
            for k in 0..j {
                pivot -= l[j * d + k].norm_sqr();
            }
            // negated so that NaN also fails
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(pivot > 0.0) {
                return false;
            }
            let ljj = pivot.sqrt();
            l[j * d + j] = cr(ljj);
            for i in j + 1..d {
                let mut s = self.entries[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.entries[i * self.dim + j]
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a.dim, b.dim)?;
    let d = a.dim;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a.entries[i * d + k];
            if aik == Complex::default() {
                continue;
            }
            let row = &b.entries[k * d..(k + 1) * d];
            let dst = &mut out.entries[i * d..(i + 1) * d];
            for (o, bkj) in dst.iter_mut().zip(row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.dim, |i, j| a[(j, i)].conj())
}

pub fn trace(a: &ComplexMatrix) -> Complex {
    (0..a.dim).map(|i| a[(i, i)]).sum()
}

/// `Tr{a b}` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex> {
    check_dims(a.dim, b.dim)?;
    let d = a.dim;
    let mut acc = Complex::default();
    for i in 0..d {
        for j in 0..d {
            acc += a.entries[i * d + j] * b.entries[j * d + i];
        }
    }
    Ok(acc)
}

/// `|u><v|`
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> Result<ComplexMatrix> {
    check_dims(u.dim(), v.dim())?;
    Ok(ComplexMatrix::from_fn(u.dim(), |i, j| u[i] * v[j].conj()))
}

/// Frobenius norm of `a - b`.
pub fn frob_dist(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    check_dims(a.dim, b.dim)?;
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) + &(b * a)
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs).expect("dimension mismatch in matrix product")
    }
}

impl Mul<Complex> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex) -> ComplexMatrix {
        self.scaled(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_unit(rng: &mut impl Rng, d: usize) -> ComplexVector {
        let v = ComplexVector::new(
            (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        );
        let n = v.norm();
        v.scaled(cr(1.0 / n))
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 4);
        let p = matmul(&ComplexMatrix::identity(4), &a).unwrap();
        assert_eq!(frob_dist(&p, &a).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_product() {
        let a = ComplexMatrix::from_rows(vec![vec![cr(1.0), I], vec![cr(0.0), cr(1.0)]]).unwrap();
        let b = ComplexMatrix::from_rows(vec![vec![cr(1.0), cr(0.0)], vec![I, cr(1.0)]]).unwrap();
        let expected =
            ComplexMatrix::from_rows(vec![vec![cr(0.0), I], vec![I, cr(1.0)]]).unwrap();
        assert!(frob_dist(&matmul(&a, &b).unwrap(), &expected).unwrap() < 1e-15);
    }

    #[test]
    fn unitary_times_adjoint_is_identity() {
        // discrete Fourier matrix
        let d = 5;
        let f = ComplexMatrix::from_fn(d, |i, j| {
            cis(2.0 * std::f64::consts::PI * (i * j) as f64 / d as f64) / (d as f64).sqrt()
        });
        let p = matmul(&f, &adjoint(&f)).unwrap();
        assert!(frob_dist(&p, &ComplexMatrix::identity(d)).unwrap() < 1e-12);
        assert!(f.is_unitary(TOL));
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let r = matmul(&ComplexMatrix::zeros(2), &ComplexMatrix::zeros(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(frob_dist(&ComplexMatrix::zeros(2), &ComplexMatrix::zeros(3)).is_err());
    }

    #[test]
    fn adjoint_cases() {
        assert_eq!(adjoint(&ComplexMatrix::identity(3)), ComplexMatrix::identity(3));
        let a = ComplexMatrix::from_rows(vec![vec![cr(0.0), I], vec![cr(0.0), cr(0.0)]]).unwrap();
        let expected =
            ComplexMatrix::from_rows(vec![vec![cr(0.0), cr(0.0)], vec![-I, cr(0.0)]]).unwrap();
        assert_eq!(adjoint(&a), expected);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_matrix(&mut rng, 4);
        assert_eq!(adjoint(&adjoint(&b)), b);
    }

    #[test]
    fn trace_cases() {
        assert_eq!(trace(&ComplexMatrix::identity(6)), cr(6.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_unit(&mut rng, 5);
        let p = outer(&v, &v).unwrap();
        assert!((trace(&p) - cr(1.0)).norm() < 1e-12);
        let a = random_matrix(&mut rng, 4);
        let b = random_matrix(&mut rng, 4);
        let ab = trace(&(&a * &b));
        let ba = trace(&(&b * &a));
        assert!((ab - ba).norm() < 1e-12);
        assert!((trace_product(&a, &b).unwrap() - ab).norm() < 1e-12);
    }

    #[test]
    fn outer_cases() {
        let e0 = ComplexVector::basis(3, 0).unwrap();
        assert_eq!(outer(&e0, &e0).unwrap(), ComplexMatrix::diagonal(&[cr(1.0), cr(0.0), cr(0.0)]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unit(&mut rng, 4);
        let v = random_unit(&mut rng, 4);
        let p = outer(&u, &v).unwrap();
        assert!((trace(&p) - v.inner(&u).unwrap()).norm() < 1e-14);
        // rank one: every 2x2 minor vanishes
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let minor = p[(i, k)] * p[(j, l)] - p[(i, l)] * p[(j, k)];
                        assert!(minor.norm() < 1e-12);
                    }
                }
            }
        }
        assert!(outer(&u, &ComplexVector::zeros(3)).is_err());
    }

    #[test]
    fn frob_dist_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 3);
        assert_eq!(frob_dist(&a, &a).unwrap(), 0.0);
        let d = frob_dist(&ComplexMatrix::identity(2), &ComplexMatrix::zeros(2)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let b = random_matrix(&mut rng, 3);
        let cm = random_matrix(&mut rng, 3);
        let ab = frob_dist(&a, &b).unwrap();
        let bc = frob_dist(&b, &cm).unwrap();
        let ac = frob_dist(&a, &cm).unwrap();
        assert!(ac <= ab + bc + 1e-15);
    }

    #[test]
    fn psd_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = random_unit(&mut rng, 4);
        assert!(outer(&v, &v).unwrap().is_positive_semidefinite(PSD_SLACK));
        let bad = ComplexMatrix::diagonal(&[cr(0.6), cr(0.6), cr(-0.2)]);
        assert!(!bad.is_positive_semidefinite(PSD_SLACK));
        let tiny = ComplexMatrix::diagonal(&[cr(1.0), cr(-1e-12)]);
        assert!(tiny.is_positive_semidefinite(PSD_SLACK));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 3).scaled(cr(0.5));
        let p = &(&a * &a) * &a;
        assert!(frob_dist(&a.pow(3), &p).unwrap() < 1e-12);
        assert_eq!(a.pow(0), ComplexMatrix::identity(3));
    }
}
