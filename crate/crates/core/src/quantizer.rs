//! Phase-point operators `Omega[K](phi_m, n)` and the quantization maps they
//! induce between grid functions and operators.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{is_unimodular, validate, Kernel, KernelFamily};
use crate::numerics::{
    adjoint, anticommutator, cis, commutator, cr, frob_dist, outer, trace, trace_product, Complex,
    ComplexMatrix, I, TOL,
};
use crate::phasespace::{grid_character, GridFunction, PhaseGrid};

/// Kernels with an entry below this modulus make the inverse map ill-conditioned.
pub const CONDITIONING_THRESHOLD: f64 = 1e-6;

/// Cached table of the `d^2` phase-point operators for one grid and kernel.
#[derive(Clone, Debug)]
pub struct Quantizer {
    grid: PhaseGrid,
    kernel: Kernel,
    omega: Vec<ComplexMatrix>,
    displacements: Vec<ComplexMatrix>,
}

impl Quantizer {
    /// Builds `Omega(phi_m, n) = (1/d) sum_{k,l} K(k,l) D(k,l) exp{-i(k phi_m + 2 pi l n/d)}`.
    pub fn build(grid: PhaseGrid, kernel: Kernel) -> Result<Self> {
        let report = validate(&kernel);
        if !report.is_valid() {
            return Err(Error::InvalidKernel(format!(
                "{} fails: {}",
                kernel.label(),
                report.failures().join(", ")
            )));
        }
        Self::build_unvalidated(grid, kernel)
    }

    /// Same as [`Quantizer::build`] without checking the kernel conditions.
    /// Used to study kernels that break Hermiticity or normalization.
    pub fn build_unvalidated(grid: PhaseGrid, kernel: Kernel) -> Result<Self> {
        let d = grid.dim();
        if kernel.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: kernel.dim() });
        }
        let displacements: Vec<ComplexMatrix> = (0..d)
            .flat_map(|k| (0..d).map(move |l| (k, l)))
            .map(|(k, l)| grid.displacement(k as i64, l as i64))
            .collect();
        let mut omega = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                let mut acc = ComplexMatrix::zeros(d);
                for k in 0..d {
                    for l in 0..d {
                        let w = kernel.get(k, l) * grid_character(&grid, k, l, m, n).conj();
                        acc.add_scaled(w, &displacements[k * d + l]);
                    }
                }
                omega.push(acc.scaled(cr(1.0 / d as f64)));
            }
        }
        Ok(Self { grid, kernel, omega, displacements })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn omega(&self, m: usize, n: usize) -> &ComplexMatrix {
        &self.omega[m * self.dim() + n]
    }

    fn displacement(&self, k: usize, l: usize) -> &ComplexMatrix {
        &self.displacements[k * self.dim() + l]
    }

    /// `Some(min |K|)` when the kernel is close enough to singular that
    /// [`Quantizer::symbol`] amplifies roundoff noticeably.
    pub fn conditioning_warning(&self) -> Option<f64> {
        let min = self.kernel.min_modulus();
        (min < CONDITIONING_THRESHOLD).then_some(min)
    }

    fn check_grid(&self, other: &PhaseGrid) -> Result<()> {
        if *other != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn check_dim(&self, op: &ComplexMatrix) -> Result<()> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(())
    }

    /// `f^ = (1/d) sum_{m,n} f(phi_m, n) Omega(phi_m, n)`
    pub fn quantize(&self, f: &GridFunction) -> Result<ComplexMatrix> {
        self.check_grid(f.grid())?;
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d);
        for m in 0..d {
            for n in 0..d {
                acc.add_scaled(f.get(m, n), self.omega(m, n));
            }
        }
        Ok(acc.scaled(cr(1.0 / d as f64)))
    }

    /// Inverse of [`Quantizer::quantize`] via the kernel-divided Fourier sum
    /// `f = (1/d) sum_{k,l} K^{-1} exp{i(k phi_m + 2 pi l n/d)} Tr{f^ D^+(k,l)}`.
    pub fn symbol(&self, op: &ComplexMatrix) -> Result<GridFunction> {
        self.check_dim(op)?;
        let d = self.dim();
        let mut coeffs = vec![Complex::default(); d * d];
        for k in 0..d {
            for l in 0..d {
                let t = trace_product(op, &adjoint(self.displacement(k, l)))?;
                coeffs[k * d + l] = t / self.kernel.get(k, l);
            }
        }
        Ok(GridFunction::from_fn(self.grid, |m, n| {
            let mut acc = Complex::default();
            for k in 0..d {
                for l in 0..d {
                    acc += coeffs[k * d + l] * grid_character(&self.grid, k, l, m, n);
                }
            }
            acc / d as f64
        }))
    }

    /// Inverse map through the phase-point operators themselves, weighting by
    /// `|K|^{-2}`. Agrees with [`Quantizer::symbol`] for any valid kernel.
    pub fn symbol_via_overlap(&self, op: &ComplexMatrix) -> Result<GridFunction> {
        self.check_dim(op)?;
        let d = self.dim();
        let overlaps: Vec<Complex> = self
            .omega
            .iter()
            .map(|o| trace_product(op, o))
            .collect::<Result<_>>()?;
        let mut g = vec![Complex::default(); d * d];
        for k in 0..d {
            for l in 0..d {
                let mut acc = Complex::default();
                for m in 0..d {
                    for n in 0..d {
                        acc += grid_character(&self.grid, k, l, m, n).conj() * overlaps[m * d + n];
                    }
                }
                g[k * d + l] = acc / self.kernel.get(k, l).norm_sqr();
            }
        }
        Ok(GridFunction::from_fn(self.grid, |m, n| {
            let mut acc = Complex::default();
            for k in 0..d {
                for l in 0..d {
                    acc += g[k * d + l] * grid_character(&self.grid, k, l, m, n);
                }
            }
            acc / (d * d) as f64
        }))
    }

    /// `f(phi_m, n) = Tr{f^ Omega(phi_m, n)}`, valid only for unimodular kernels.
    pub fn symbol_unimodular(&self, op: &ComplexMatrix) -> Result<GridFunction> {
        self.check_dim(op)?;
        if !is_unimodular(&self.kernel) {
            return Err(Error::WrongKernel { required: "unimodular", found: self.kernel.label() });
        }
        let d = self.dim();
        let values = (0..d * d)
            .map(|i| trace_product(op, &self.omega[i]))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(self.grid, values)
    }

    /// Recovers `D(k, l)` from the phase-point operators.
    pub fn displacement_from_omega(&self, k: usize, l: usize) -> ComplexMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d);
        for m in 0..d {
            for n in 0..d {
                acc.add_scaled(grid_character(&self.grid, k, l, m, n), self.omega(m, n));
            }
        }
        acc.scaled(cr(1.0 / d as f64) / self.kernel.get(k, l))
    }

    /// Kernel-side value of `Tr{Omega(phi_m, n) Omega(phi_m', n')}`.
    pub fn overlap_from_kernel(&self, m: usize, n: usize, mp: usize, np: usize) -> Complex {
        let d = self.dim();
        let mut acc = Complex::default();
        for k in 0..d {
            for l in 0..d {
                let angle = k as f64 * (self.grid.phase(m as i64) - self.grid.phase(mp as i64))
                    + 2.0 * PI * (l as f64) * (n as f64 - np as f64) / d as f64;
                acc += cis(-angle) * self.kernel.get(k, l).norm_sqr();
            }
        }
        acc / d as f64
    }

    pub fn verify(&self) -> QuantizerReport {
        let d = self.dim();
        let df = d as f64;
        let inv = cr(1.0 / df);

        let mut herm = 0.0f64;
        let mut unit = 0.0f64;
        for o in &self.omega {
            herm = herm.max(frob_dist(o, &adjoint(o)).unwrap());
            unit = unit.max((trace(o) - cr(1.0)).norm());
        }

        let mut phase_marg = 0.0f64;
        for m in 0..d {
            let mut acc = ComplexMatrix::zeros(d);
            for n in 0..d {
                acc += self.omega(m, n);
            }
            let target = self.grid.phase_projector(m as i64);
            phase_marg = phase_marg.max(frob_dist(&acc.scaled(inv), &target).unwrap());
        }

        let mut number_marg = 0.0f64;
        let mut total = ComplexMatrix::zeros(d);
        for n in 0..d {
            let mut acc = ComplexMatrix::zeros(d);
            for m in 0..d {
                acc += self.omega(m, n);
            }
            total += &acc;
            let target = self.grid.number_projector(n);
            number_marg = number_marg.max(frob_dist(&acc.scaled(inv), &target).unwrap());
        }
        let resolution = frob_dist(&total.scaled(inv), &ComplexMatrix::identity(d)).unwrap();

        // the kernel side depends only on the differences (m - m', n - n') mod d
        let table: Vec<Complex> = (0..d * d).map(|i| self.overlap_from_kernel(i / d, i % d, 0, 0)).collect();
        let mut formula = 0.0f64;
        let mut ortho = 0.0f64;
        for a in 0..d * d {
            for b in a..d * d {
                let t = trace_product(&self.omega[a], &self.omega[b]).unwrap();
                let (m, n) = (a / d, a % d);
                let (mp, np) = (b / d, b % d);
                let diff = ((m + d - mp) % d) * d + (n + d - np) % d;
                let back = ((mp + d - m) % d) * d + (np + d - n) % d;
                formula = formula.max((t - table[diff]).norm()).max((t - table[back]).norm());
                let delta = if a == b { df } else { 0.0 };
                ortho = ortho.max((t - cr(delta)).norm());
            }
        }

        QuantizerReport {
            hermitian: Check::new(herm),
            unit_trace: Check::new(unit),
            phase_marginal: Check::new(phase_marg),
            number_marginal: Check::new(number_marg),
            resolution: Check::new(resolution),
            overlap_formula: Check::new(formula),
            orthogonality: Check::new(ortho),
            unimodular: is_unimodular(&self.kernel),
        }
    }

    /// Compares `quantize(f1(phi) f2(n))` with the ordering rule of the kernel
    /// family: symmetric, or almost symmetric with the `(i/2) tan(eps)`
    /// commutator correction.
    pub fn ordering_check(
        &self,
        f1: impl Fn(f64) -> Complex,
        f2: impl Fn(usize) -> Complex,
    ) -> Result<OrderingReport> {
        let tan_eps = match self.kernel.family() {
            KernelFamily::Symmetric => 0.0,
            KernelFamily::AlmostSymmetric { epsilon } => epsilon.tan(),
            _ => {
                return Err(Error::WrongKernel {
                    required: "symmetric or almost-symmetric",
                    found: self.kernel.label(),
                })
            }
        };
        let a = self.grid.phase_function_op(&f1);
        let b = self.grid.number_function_op(&f2);
        let mut expected = anticommutator(&a, &b).scaled(cr(0.5));
        expected.add_scaled(I * 0.5 * tan_eps, &commutator(&a, &b));
        let product = GridFunction::from_fn(self.grid, |m, n| f1(self.grid.phase(m as i64)) * f2(n));
        let quantized = self.quantize(&product)?;
        let deviation = frob_dist(&quantized, &expected)?;
        Ok(OrderingReport { deviation, passed: deviation <= TOL, commutator_weight: 0.5 * tan_eps })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub passed: bool,
    pub deviation: f64,
}

impl Check {
    pub fn new(deviation: f64) -> Self {
        Self { passed: deviation <= TOL, deviation }
    }

    pub fn within(deviation: f64, tol: f64) -> Self {
        Self { passed: deviation <= tol, deviation }
    }
}

/// Outcome of the quantizer identity suite; deviations are max Frobenius or
/// absolute errors over the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerReport {
    /// Every `Omega` is Hermitian.
    pub hermitian: Check,
    /// `Tr Omega = 1`
    pub unit_trace: Check,
    /// `(1/d) sum_n Omega(phi_m, n) = |phi_m><phi_m|`
    pub phase_marginal: Check,
    /// `(1/d) sum_m Omega(phi_m, n) = |n><n|`
    pub number_marginal: Check,
    /// `(1/d) sum_{m,n} Omega = 1`
    pub resolution: Check,
    /// Overlap traces match the `|K|^2` Fourier sum.
    pub overlap_formula: Check,
    /// `Tr{Omega Omega'} = d delta delta'`; holds iff the kernel is unimodular.
    pub orthogonality: Check,
    pub unimodular: bool,
}

impl QuantizerReport {
    /// Every identity passes, and orthogonality passes exactly when the kernel
    /// is unimodular.
    pub fn expected_pass(&self) -> bool {
        self.hermitian.passed
            && self.unit_trace.passed
            && self.phase_marginal.passed
            && self.number_marginal.passed
            && self.resolution.passed
            && self.overlap_formula.passed
            && self.orthogonality.passed == self.unimodular
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderingReport {
    pub deviation: f64,
    pub passed: bool,
    /// Coefficient of the commutator term, `tan(eps) / 2`.
    pub commutator_weight: f64,
}

fn phase_number_product(grid: &PhaseGrid, m: usize, n: usize) -> ComplexMatrix {
    // |phi_m><phi_m|n><n|
    let phi = grid.phase_ket(m as i64);
    let num = grid.number_ket(n).expect("index within grid");
    let overlap = phi[n].conj();
    outer(&phi, &num).expect("same dimension").scaled(overlap)
}

/// `(d/2)(|phi_m><phi_m|n><n| + h.c.)`, the phase-point operator of the
/// symmetric kernel.
pub fn symmetric_closed_form(grid: &PhaseGrid, m: usize, n: usize) -> ComplexMatrix {
    let a = phase_number_product(grid, m, n);
    (&a + &adjoint(&a)).scaled(cr(grid.dim() as f64 / 2.0))
}

/// `(d/2)(A + A^+) + i (d/2) tan(eps) (A - A^+)` with `A = |phi_m><phi_m|n><n|`,
/// the phase-point operator of the almost-symmetric kernel.
pub fn almost_symmetric_closed_form(grid: &PhaseGrid, epsilon: f64, m: usize, n: usize) -> ComplexMatrix {
    let a = phase_number_product(grid, m, n);
    let a_dag = adjoint(&a);
    let half = grid.dim() as f64 / 2.0;
    let mut out = (&a + &a_dag).scaled(cr(half));
    out.add_scaled(I * half * epsilon.tan(), &(&a - &a_dag));
    out
}

/// Qubit phase-point operator in Pauli form:
/// `(1/2)[1 + (-1)^n s3 + diag(e^{-i phi0}, e^{i phi0}) ((-1)^m s1 + (-1)^{m+n} tan(eps) s2)]`.
pub fn qubit_pauli_form(phi0: f64, epsilon: f64, m: usize, n: usize) -> ComplexMatrix {
    let sm = if m % 2 == 0 { 1.0 } else { -1.0 };
    let sn = if n % 2 == 0 { 1.0 } else { -1.0 };
    let z = cr(0.0);
    let one = cr(1.0);
    let s1 = ComplexMatrix::from_rows(vec![vec![z, one], vec![one, z]]).unwrap();
    let s2 = ComplexMatrix::from_rows(vec![vec![z, -I], vec![I, z]]).unwrap();
    let s3 = ComplexMatrix::diagonal(&[one, -one]);
    let rot = ComplexMatrix::diagonal(&[cis(-phi0), cis(phi0)]);
    let mut inner = s1.scaled(cr(sm));
    inner.add_scaled(cr(sm * sn * epsilon.tan()), &s2);
    let mut out = ComplexMatrix::identity(2);
    out.add_scaled(cr(sn), &s3);
    out += &(&rot * &inner);
    out.scaled(cr(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{almost_symmetric_kernel, kernel_from_table, symmetric_kernel, wootters_kernel};
    use crate::numerics::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_function(rng: &mut impl Rng, grid: PhaseGrid) -> GridFunction {
        GridFunction::from_fn(grid, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn symmetric_matches_closed_form() {
        for n in 1..=3 {
            let grid = PhaseGrid::new(2 * n + 1, 0.37).unwrap();
            let q = Quantizer::build(grid, symmetric_kernel(n).unwrap()).unwrap();
            for m in 0..grid.dim() {
                for nn in 0..grid.dim() {
                    let dist = frob_dist(q.omega(m, nn), &symmetric_closed_form(&grid, m, nn)).unwrap();
                    assert!(dist < TOL, "N={n} m={m} n={nn}: {dist}");
                }
            }
        }
    }

    #[test]
    fn almost_symmetric_matches_closed_form() {
        for (n, eps) in [(1, 0.5), (2, 0.25), (3, 1.0 / 6.0)] {
            let grid = PhaseGrid::new(2 * n, -0.8).unwrap();
            let q = Quantizer::build(grid, almost_symmetric_kernel(n, eps).unwrap()).unwrap();
            for m in 0..grid.dim() {
                for nn in 0..grid.dim() {
                    let closed = almost_symmetric_closed_form(&grid, eps, m, nn);
                    assert!(frob_dist(q.omega(m, nn), &closed).unwrap() < TOL);
                }
            }
        }
    }

    #[test]
    fn qubit_matches_pauli_form() {
        for (phi0, eps) in [(0.0, PI / 4.0), (0.6, 0.3), (-1.2, -0.7)] {
            let grid = PhaseGrid::new(2, phi0).unwrap();
            let q = Quantizer::build(grid, almost_symmetric_kernel(1, eps).unwrap()).unwrap();
            for m in 0..2 {
                for n in 0..2 {
                    let p = qubit_pauli_form(phi0, eps, m, n);
                    assert!(frob_dist(q.omega(m, n), &p).unwrap() < TOL, "phi0={phi0} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn quantize_constant_is_identity() {
        let grid = PhaseGrid::new(5, 0.2).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(2).unwrap()).unwrap();
        let one = GridFunction::from_fn(grid, |_, _| cr(1.0));
        assert!(frob_dist(&q.quantize(&one).unwrap(), &ComplexMatrix::identity(5)).unwrap() < TOL);
    }

    #[test]
    fn quantize_phase_only_function() {
        let grid = PhaseGrid::new(5, 0.9).unwrap();
        for kernel in [symmetric_kernel(2).unwrap(), wootters_kernel(2).unwrap()] {
            let q = Quantizer::build(grid, kernel).unwrap();
            let f = GridFunction::of_phase(grid, |p| cr(p.cos()));
            let expected = grid.phase_function_op(|p| cr(p.cos()));
            assert!(frob_dist(&q.quantize(&f).unwrap(), &expected).unwrap() < TOL);
        }
    }

    #[test]
    fn quantize_phase_delta_gives_projector() {
        let grid = PhaseGrid::new(4, 0.1).unwrap();
        let q = Quantizer::build(grid, almost_symmetric_kernel(2, 0.25).unwrap()).unwrap();
        let f = GridFunction::of_phase(grid, |p| cr(if (p - grid.phase(2)).abs() < 1e-9 { 1.0 } else { 0.0 }));
        let got = q.quantize(&f).unwrap();
        assert!(frob_dist(&got, &grid.phase_projector(2)).unwrap() < TOL);
    }

    #[test]
    fn symmetric_ordering_random_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let grid = PhaseGrid::new(7, 0.0).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(3).unwrap()).unwrap();
        let a: Vec<Complex> = (0..7).map(|_| c(rng.gen(), rng.gen())).collect();
        let b: Vec<Complex> = (0..7).map(|_| c(rng.gen(), rng.gen())).collect();
        let f1 = |p: f64| a[grid.nearest_phase_index(p)];
        let f2 = |n: usize| b[n];
        let r = q.ordering_check(f1, f2).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn ordering_examples() {
        let grid = PhaseGrid::new(5, 0.0).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(2).unwrap()).unwrap();
        assert!(q.ordering_check(cis, |n| cr((n * n) as f64)).unwrap().passed);

        let grid4 = PhaseGrid::new(4, 0.0).unwrap();
        let q4 = Quantizer::build(grid4, almost_symmetric_kernel(2, 0.25).unwrap()).unwrap();
        let r = q4.ordering_check(|p| cr(p.sin()) + cis(2.0 * p), |n| c(n as f64, 1.0)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.commutator_weight - 0.5 * 0.25f64.tan()).abs() < 1e-15);

        let qw = Quantizer::build(grid, wootters_kernel(2).unwrap()).unwrap();
        assert!(matches!(qw.ordering_check(cis, |n| cr(n as f64)), Err(Error::WrongKernel { .. })));
    }

    #[test]
    fn commutator_weight_shrinks_with_n() {
        let weights: Vec<f64> = (1..=10).map(|n| 0.5 * super::super::kernels::default_epsilon(n).tan()).collect();
        for w in weights.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn symbol_inverts_quantize() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let grid5 = PhaseGrid::new(5, 0.3).unwrap();
        for kernel in [symmetric_kernel(2).unwrap(), wootters_kernel(2).unwrap()] {
            let q = Quantizer::build(grid5, kernel).unwrap();
            let f = random_function(&mut rng, grid5);
            let back = q.symbol(&q.quantize(&f).unwrap()).unwrap();
            assert!(f.max_abs_diff(&back) < TOL);
            let back2 = q.symbol_via_overlap(&q.quantize(&f).unwrap()).unwrap();
            assert!(f.max_abs_diff(&back2) < TOL);
        }
        let identity = ComplexMatrix::identity(5);
        let q = Quantizer::build(grid5, symmetric_kernel(2).unwrap()).unwrap();
        let s = q.symbol(&identity).unwrap();
        assert!(s.values().iter().all(|z| (z - cr(1.0)).norm() < TOL));
    }

    #[test]
    fn unimodular_symbol_is_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let grid = PhaseGrid::new(3, 0.0).unwrap();
        let q = Quantizer::build(grid, wootters_kernel(1).unwrap()).unwrap();
        let op = ComplexMatrix::from_fn(3, |_, _| c(rng.gen(), rng.gen()));
        let a = q.symbol(&op).unwrap();
        let b = q.symbol_unimodular(&op).unwrap();
        assert!(a.max_abs_diff(&b) < TOL);

        let qs = Quantizer::build(grid, symmetric_kernel(1).unwrap()).unwrap();
        assert!(qs.symbol_unimodular(&op).is_err());
    }

    #[test]
    fn displacement_recovered_from_omega() {
        let grid = PhaseGrid::new(5, 0.77).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(2).unwrap()).unwrap();
        for k in 0..5 {
            for l in 0..5 {
                let d = q.displacement_from_omega(k, l);
                assert!(frob_dist(&d, &grid.displacement(k as i64, l as i64)).unwrap() < TOL);
            }
        }
    }

    #[test]
    fn verify_reports() {
        for n in 1..=3 {
            let grid = PhaseGrid::new(2 * n + 1, 0.0).unwrap();
            let rs = Quantizer::build(grid, symmetric_kernel(n).unwrap()).unwrap().verify();
            assert!(rs.expected_pass() && !rs.orthogonality.passed, "{rs:?}");
            assert!(rs.orthogonality.deviation > 1e-3);
        }
        let grid = PhaseGrid::new(3, 0.0).unwrap();
        let rw = Quantizer::build(grid, wootters_kernel(1).unwrap()).unwrap().verify();
        assert!(rw.expected_pass() && rw.orthogonality.passed, "{rw:?}");

        let grid = PhaseGrid::new(4, 0.0).unwrap();
        let ra = Quantizer::build(grid, almost_symmetric_kernel(2, 0.25).unwrap()).unwrap().verify();
        assert!(ra.expected_pass() && !ra.orthogonality.passed, "{ra:?}");
    }

    #[test]
    fn hermiticity_tracks_kernel_conditions() {
        let grid = PhaseGrid::new(3, 0.0).unwrap();
        let mut rows = symmetric_kernel(1).unwrap().rows();
        rows[1][2] = c(rows[1][2].re, 0.4);
        let k = kernel_from_table(3, rows).unwrap();
        assert!(!validate(&k).is_hermitian());
        assert!(Quantizer::build(grid, k.clone()).is_err());
        let q = Quantizer::build_unvalidated(grid, k).unwrap();
        assert!(!q.verify().hermitian.passed);
    }

    #[test]
    fn rejects_mismatches() {
        let grid = PhaseGrid::new(5, 0.0).unwrap();
        assert!(matches!(
            Quantizer::build(grid, symmetric_kernel(1).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        let q = Quantizer::build(grid, symmetric_kernel(2).unwrap()).unwrap();
        let other = GridFunction::from_fn(PhaseGrid::new(5, 0.1).unwrap(), |_, _| cr(1.0));
        assert!(matches!(q.quantize(&other), Err(Error::GridMismatch)));
        assert!(q.symbol(&ComplexMatrix::identity(3)).is_err());
        assert!(q.conditioning_warning().is_none());
    }

    #[test]
    fn conditioning_warning_for_tiny_entries() {
        let grid = PhaseGrid::new(3, 0.0).unwrap();
        let mut rows = symmetric_kernel(1).unwrap().rows();
        rows[1][1] = cr(1e-8);
        rows[2][2] = cr(-1e-8);
        let k = kernel_from_table(3, rows).unwrap();
        let q = Quantizer::build(grid, k).unwrap();
        assert_eq!(q.conditioning_warning(), Some(1e-8));
    }
}
