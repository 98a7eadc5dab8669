//! Kernel tables `K(k, l)` weighting the displacement operators in the
//! quantizer, and the conditions a kernel has to meet.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cr, Complex, TOL};

/// Entries below this modulus count as structural zeros.
pub const NONZERO_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelFamily {
    /// `cos(pi k l / (2N+1))`
    Symmetric,
    /// `(-1)^{k l}`
    Wootters,
    /// `cos(pi k l / (2N) + eps) / cos(eps)`
    AlmostSymmetric { epsilon: f64 },
    /// User-supplied table.
    Table,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Symmetric => write!(f, "symmetric"),
            KernelFamily::Wootters => write!(f, "wootters"),
            KernelFamily::AlmostSymmetric { epsilon } => write!(f, "almost-symmetric:{epsilon:?}"),
            KernelFamily::Table => write!(f, "table"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    dim: usize,
    values: Vec<Complex>,
    family: KernelFamily,
}

impl Kernel {
    fn from_fn(dim: usize, family: KernelFamily, f: impl Fn(usize, usize) -> Complex) -> Self {
        let values = (0..dim).flat_map(|k| (0..dim).map(move |l| (k, l))).map(|(k, l)| f(k, l)).collect();
        Self { dim, values, family }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, l: usize) -> Complex {
        self.values[k * self.dim + l]
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Text tag; re-parsable for the built-in families.
    pub fn label(&self) -> String {
        self.family.to_string()
    }

    pub fn rows(&self) -> Vec<Vec<Complex>> {
        self.values.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// `K(k, l) = cos(pi k l / (2N+1))` on dimension `2N+1`.
pub fn symmetric_kernel(n: usize) -> Result<Kernel> {
    if n == 0 {
        return Err(Error::InvalidKernel("N must be positive".into()));
    }
    let d = 2 * n + 1;
    Ok(Kernel::from_fn(d, KernelFamily::Symmetric, |k, l| {
        cr((PI * (k * l) as f64 / d as f64).cos())
    }))
}

/// `K(k, l) = (-1)^{k l}` on dimension `2N+1`.
pub fn wootters_kernel(n: usize) -> Result<Kernel> {
    if n == 0 {
        return Err(Error::InvalidKernel("N must be positive".into()));
    }
    let d = 2 * n + 1;
    Ok(Kernel::from_fn(d, KernelFamily::Wootters, |k, l| {
        cr(if (k * l) % 2 == 0 { 1.0 } else { -1.0 })
    }))
}

/// Default shift `eps_N = 1 / (2N)`.
pub fn default_epsilon(n: usize) -> f64 {
    1.0 / (2 * n) as f64
}

/// `K(k, l) = cos(pi k l / (2N) + eps) / cos(eps)` on dimension `2N`.
///
/// Fails when `cos(eps)` or any numerator vanishes; the caller should then
/// pick another `eps`.
pub fn almost_symmetric_kernel(n: usize, epsilon: f64) -> Result<Kernel> {
    if n == 0 {
        return Err(Error::InvalidKernel("N must be positive".into()));
    }
    if !epsilon.is_finite() {
        return Err(Error::InvalidKernel(format!("epsilon {epsilon} is not finite")));
    }
    let d = 2 * n;
    let denom = epsilon.cos();
    if denom.abs() <= NONZERO_THRESHOLD {
        return Err(Error::InadmissibleEpsilon { epsilon, dim: d, k: 0, l: 0 });
    }
    for k in 0..d {
        for l in 0..d {
            let num = (PI * (k * l) as f64 / d as f64 + epsilon).cos();
            if (num / denom).abs() <= NONZERO_THRESHOLD {
                return Err(Error::InadmissibleEpsilon { epsilon, dim: d, k, l });
            }
        }
    }
    Ok(Kernel::from_fn(d, KernelFamily::AlmostSymmetric { epsilon }, |k, l| {
        cr((PI * (k * l) as f64 / d as f64 + epsilon).cos() / denom)
    }))
}

/// Wrap a user table; the caller is responsible for calling [`validate`].
pub fn kernel_from_table(dim: usize, rows: Vec<Vec<Complex>>) -> Result<Kernel> {
    if dim == 0 {
        return Err(Error::InvalidKernel("dimension must be positive".into()));
    }
    if rows.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rows.len() });
    }
    let mut values = Vec::with_capacity(dim * dim);
    for (row, r) in rows.into_iter().enumerate() {
        if r.len() != dim {
            return Err(Error::NonSquare { rows: dim, row, len: r.len() });
        }
        values.extend(r);
    }
    Ok(Kernel { dim, values, family: KernelFamily::Table })
}

/// One flag per kernel condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    /// `K(k, l) != 0` everywhere; makes quantization one-to-one.
    pub nonvanishing: bool,
    /// `K*(k, l) = (-1)^{d+k+l} K(d-k, d-l)` for `1 <= k, l <= s`.
    pub hermitian_bulk: bool,
    /// `K*(0, l) = K(0, d-l)`
    pub hermitian_row: bool,
    /// `K*(k, 0) = K(d-k, 0)`
    pub hermitian_column: bool,
    /// `K(0, 0)` real.
    pub hermitian_origin: bool,
    /// `K(k, 0) = 1`: phase-only functions map to `f(phi^)`.
    pub phase_functions: bool,
    /// `K(0, l) = 1`: number-only functions map to `f(n^)`.
    pub number_functions: bool,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.nonvanishing && self.is_hermitian() && self.phase_functions && self.number_functions
    }

    /// The four conditions that together are equivalent to a Hermitian quantizer.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_bulk && self.hermitian_row && self.hermitian_column && self.hermitian_origin
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let checks = [
            (self.nonvanishing, "nonvanishing"),
            (self.hermitian_bulk, "hermitian-bulk"),
            (self.hermitian_row, "hermitian-row"),
            (self.hermitian_column, "hermitian-column"),
            (self.hermitian_origin, "hermitian-origin"),
            (self.phase_functions, "unit-column K(k,0)=1"),
            (self.number_functions, "unit-row K(0,l)=1"),
        ];
        for (ok, name) in checks {
            if !ok {
                out.push(name);
            }
        }
        out
    }
}

pub fn validate(kernel: &Kernel) -> ValidityReport {
    let d = kernel.dim;
    let close = |a: Complex, b: Complex| (a - b).norm() <= TOL;
    let nonvanishing = kernel.values.iter().all(|z| z.norm() > NONZERO_THRESHOLD);

    let mut hermitian_bulk = true;
    for k in 1..d {
        for l in 1..d {
            let sign = if (d + k + l) % 2 == 0 { 1.0 } else { -1.0 };
            if !close(kernel.get(k, l).conj(), kernel.get(d - k, d - l) * sign) {
                hermitian_bulk = false;
            }
        }
    }
    let hermitian_row = (1..d).all(|l| close(kernel.get(0, l).conj(), kernel.get(0, d - l)));
    let hermitian_column = (1..d).all(|k| close(kernel.get(k, 0).conj(), kernel.get(d - k, 0)));
    let hermitian_origin = kernel.get(0, 0).im.abs() <= TOL;
    let phase_functions = (0..d).all(|k| close(kernel.get(k, 0), cr(1.0)));
    let number_functions = (0..d).all(|l| close(kernel.get(0, l), cr(1.0)));

    ValidityReport {
        nonvanishing,
        hermitian_bulk,
        hermitian_row,
        hermitian_column,
        hermitian_origin,
        phase_functions,
        number_functions,
    }
}

/// `|K(k, l)| = 1` everywhere, the condition for orthogonal phase-point operators.
pub fn is_unimodular(kernel: &Kernel) -> bool {
    kernel.values.iter().all(|z| (z.norm() - 1.0).abs() <= TOL)
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    dim: usize,
    values: Vec<Vec<[f64; 2]>>,
}

impl Kernel {
    pub fn to_json(&self) -> Result<String> {
        let file = KernelFile {
            dim: self.dim,
            values: self.rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Kernel> {
        let file: KernelFile = serde_json::from_str(text)?;
        let rows = file
            .values
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
            .collect();
        kernel_from_table(file.dim, rows)
    }
}
