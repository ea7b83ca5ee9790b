//! Transfer matrices of the backward equation and their spectra.
//!
//! For a walk with largest steps `R` up and `L` down, each residue `k` gives
//! an `(R + L)`-square companion-style matrix `A_k` that shifts the window of
//! hitting probabilities one site down. The monodromy `A_1 A_2 ... A_{N-1} A_0`
//! carries the window across a full spatial period.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::composer::{EnvironmentKernel, StepDistribution};
use crate::error::{Error, Result};
use crate::roots;

/// Largest matrix order handled by the eigenvalue routine.
pub const MAX_ORDER: usize = 64;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    order: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { order, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.order);
        for i in 0..self.order {
            for j in 0..self.order {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.order;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
            if a[pivot * n + col] == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                b.swap(col, pivot);
            }
            for row in col + 1..n {
                let factor = a[row * n + col] / a[col * n + col];
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
                b[row] -= factor * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let tail: f64 = (row + 1..n).map(|j| a[row * n + j] * x[j]).sum();
            x[row] = (b[row] - tail) / a[row * n + row];
        }
        Some(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.order + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.order + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.order, rhs.order, "matrix orders differ");
        let n = self.order;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.order {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:>14.6e}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Transfer matrix of one residue.
pub fn build_a(dist: &StepDistribution, right: i64, left: i64) -> Result<Matrix> {
    build_a_at(dist, right, left, 0)
}

fn build_a_at(dist: &StepDistribution, right: i64, left: i64, residue: usize) -> Result<Matrix> {
    let bottom = dist.prob(-left);
    if bottom <= 0.0 {
        return Err(Error::DegenerateDistribution(residue));
    }
    let order = (right + left) as usize;
    let mut a = Matrix::zeros(order);
    for j in 1..=order {
        let offset = j as i64 - left;
        a[(0, j - 1)] = if offset == 0 {
            (1.0 - dist.prob(0)) / bottom
        } else {
            -dist.prob(offset) / bottom
        };
    }
    for i in 1..order {
        a[(i, i - 1)] = 1.0;
    }
    Ok(a)
}

/// `A_1 A_2 ... A_{N-1} A_0`.
pub fn monodromy(kernel: &EnvironmentKernel) -> Result<Matrix> {
    let (right, left) = (kernel.right(), kernel.left());
    let n = kernel.period();
    let mut m = Matrix::identity((right + left) as usize);
    for residue in (1..n).chain(std::iter::once(0)) {
        let a = build_a_at(kernel.step(residue), right, left, residue)?;
        m = &m * &a;
    }
    Ok(m)
}

/// Monic characteristic polynomial, leading coefficient first
/// (Faddeev–LeVerrier recurrence).
pub fn char_poly(m: &Matrix) -> Vec<f64> {
    let n = m.order();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    // work = A * M_k, with M_1 = I
    let mut aux = Matrix::identity(n);
    for k in 1..=n {
        let work = m * &aux;
        let c = -work.trace() / k as f64;
        coeffs.push(c);
        aux = work;
        for i in 0..n {
            aux[(i, i)] += c;
        }
    }
    coeffs
}

/// Eigenvalues of a monodromy matrix with their magnitudes.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// With multiplicity, ascending.
    pub magnitudes: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub residual: f64,
}

impl Spectrum {
    /// `ln |lambda_i|`, ascending.
    pub fn log_magnitudes(&self) -> Vec<f64> {
        self.magnitudes.iter().map(|m| m.ln()).collect()
    }
}

pub fn eigen_magnitudes(m: &Matrix) -> Result<Spectrum> {
    if m.order() > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "matrix order {} exceeds {MAX_ORDER}",
            m.order()
        )));
    }
    let roots = roots::polynomial_roots(&char_poly(m))?;
    let mut magnitudes: Vec<f64> = roots.roots.iter().map(|z| z.norm()).collect();
    magnitudes.sort_by(f64::total_cmp);
    Ok(Spectrum {
        magnitudes,
        eigenvalues: roots.roots,
        residual: roots.residual,
    })
}

/// Spectrum of a kernel's monodromy, computed so that the verdict survives
/// ill-conditioning.
///
/// Floating-point Faddeev–LeVerrier loses most of its digits once the
/// monodromy has entries far from 1, and at fairness 1 is a double root,
/// which root finding resolves only to about `sqrt(eps)`. Instead the
/// monodromy and its characteristic polynomial are formed exactly, in integer
/// arithmetic after clearing the dyadic denominators of the probabilities
/// (every `f64` is `m * 2^e`). Each `A_k` is written in the
/// form that fixes the constant vector exactly, so `lambda - 1` divides the
/// polynomial exactly; the quotient is rounded once and handed to the root
/// finder, and the eigenvalue 1 is put back by hand.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    pub spectrum: Spectrum,
    /// `|q(1)| / sum |q_k|` for the deflated polynomial `q`; zero exactly
    /// when 1 is a double root.
    pub unit_defect: f64,
}

pub fn kernel_spectrum(kernel: &EnvironmentKernel) -> Result<KernelSpectrum> {
    let order = (kernel.right() + kernel.left()) as usize;
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "matrix order {order} exceeds {MAX_ORDER}"
        )));
    }
    // M = M~ / delta with M~ integral, so chi_M(x) = sum c~_k x^(n-k) / delta^k
    let (m, delta) = scaled_monodromy(kernel)?;
    let chi = integer_char_poly(&m);
    // dividing chi_M by (x - 1): q_j = sum_{i <= j} c~_i / delta^i = Q_j / delta^j
    let mut numerators: Vec<BigInt> = Vec::with_capacity(order);
    for c in &chi[..order] {
        let next = match numerators.last() {
            Some(prev) => prev * &delta + c,
            None => c.clone(),
        };
        numerators.push(next);
    }
    debug_assert!((numerators.last().unwrap() * &delta + &chi[order]).is_zero());

    let mut powers = Vec::with_capacity(order);
    powers.push(BigInt::one());
    for j in 1..order {
        powers.push(&powers[j - 1] * &delta);
    }
    let quotient: Vec<BigRational> = numerators
        .into_iter()
        .zip(&powers)
        .map(|(n, d)| BigRational::new(n, d.clone()))
        .collect();

    let at_one = quotient.iter().fold(BigRational::zero(), |acc, c| acc + c);
    let scale = quotient.iter().fold(BigRational::zero(), |acc, c| acc + c.abs());
    let unit_defect = (at_one.abs() / scale).to_f64().unwrap_or(f64::INFINITY);

    let coeffs: Vec<f64> = quotient
        .iter()
        .map(|c| c.to_f64().unwrap_or(f64::NAN))
        .collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::ConvergenceFailure {
            residual: f64::INFINITY,
        });
    }
    let roots = roots::polynomial_roots(&coeffs)?;
    let mut eigenvalues = roots.roots;
    eigenvalues.push(Complex64::new(1.0, 0.0));
    let mut magnitudes: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    magnitudes.sort_by(f64::total_cmp);
    Ok(KernelSpectrum {
        spectrum: Spectrum {
            magnitudes,
            eigenvalues,
            residual: roots.residual,
        },
        unit_defect,
    })
}

type IntegerMatrix = Vec<Vec<BigInt>>;

/// `x = mantissa * 2^exponent`, exactly.
fn dyadic(x: f64) -> (BigInt, i32) {
    let (mantissa, exponent, sign) = x.integer_decode();
    (BigInt::from(sign) * BigInt::from(mantissa), i32::from(exponent))
}

/// `A_k = A~ / delta` with integral `A~`.
///
/// The `lambda = 0` column is written `1 + sum_{j != 0, -L} e(j) / e(-L)`,
/// which equals `(1 - e(0)) / e(-L)` for a normalised law and makes every
/// row of `A_k` sum to exactly 1.
fn scaled_a(dist: &StepDistribution, right: i64, left: i64, residue: usize) -> Result<(IntegerMatrix, BigInt)> {
    if dist.prob(-left) <= 0.0 {
        return Err(Error::DegenerateDistribution(residue));
    }
    let order = (right + left) as usize;
    let parts: Vec<(i64, BigInt, i32)> = (-left..=right)
        .filter(|&o| o != 0 && dist.prob(o) > 0.0)
        .map(|o| {
            let (m, e) = dyadic(dist.prob(o));
            (o, m, e)
        })
        .collect();
    let floor = parts.iter().map(|p| p.2).min().expect("bottom step is present");
    let int = |m: &BigInt, e: i32| m << ((e - floor) as usize);
    let bottom = parts
        .iter()
        .find(|p| p.0 == -left)
        .map(|(_, m, e)| int(m, *e))
        .expect("bottom step is present");

    let mut a = vec![vec![BigInt::zero(); order]; order];
    let mut centre = bottom.clone();
    for (offset, m, e) in &parts {
        if *offset == -left {
            continue;
        }
        let entry = int(m, *e);
        centre += &entry;
        a[0][(offset + left - 1) as usize] = -entry;
    }
    a[0][left as usize - 1] = centre;
    for (i, row) in a.iter_mut().enumerate().skip(1) {
        row[i - 1] = bottom.clone();
    }
    Ok((a, bottom))
}

fn integer_product(a: &IntegerMatrix, b: &IntegerMatrix) -> IntegerMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    a[i].iter()
                        .zip(b)
                        .filter(|(x, row)| !x.is_zero() && !row[j].is_zero())
                        .fold(BigInt::zero(), |acc, (x, row)| acc + x * &row[j])
                })
                .collect()
        })
        .collect()
}

fn scaled_monodromy(kernel: &EnvironmentKernel) -> Result<(IntegerMatrix, BigInt)> {
    let (right, left) = (kernel.right(), kernel.left());
    let mut product: Option<(IntegerMatrix, BigInt)> = None;
    for residue in (1..kernel.period()).chain(std::iter::once(0)) {
        let (a, delta) = scaled_a(kernel.step(residue), right, left, residue)?;
        product = Some(match product {
            Some((m, d)) => (integer_product(&m, &a), d * delta),
            None => (a, delta),
        });
    }
    Ok(product.expect("period is at least 1"))
}

/// Faddeev–LeVerrier over the integers; every division is exact.
fn integer_char_poly(m: &IntegerMatrix) -> Vec<BigInt> {
    let n = m.len();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(BigInt::one());
    let mut aux: IntegerMatrix = m.clone();
    for k in 1..=n {
        if k > 1 {
            aux = integer_product(m, &aux);
        }
        let trace = (0..n).fold(BigInt::zero(), |acc, i| acc + &aux[i][i]);
        let c = -trace / BigInt::from(k);
        for (i, row) in aux.iter_mut().enumerate() {
            row[i] += &c;
        }
        coeffs.push(c);
    }
    coeffs
}

/// Whether the characteristic polynomial has a double root at 1:
/// `|chi(1)| <= tol` and `|chi'(1)| <= tol`.
pub fn double_root_at_one(m: &Matrix, tol: f64) -> bool {
    let coeffs = char_poly(m);
    let (value, slope) = roots::eval_with_derivative(&coeffs, Complex64::new(1.0, 0.0));
    value.norm() <= tol && slope.norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composer::lift;
    use crate::game::PeriodicGame;
    use std::collections::BTreeMap;

    fn dist(pairs: &[(i64, f64)]) -> StepDistribution {
        StepDistribution::new(pairs.iter().copied().collect::<BTreeMap<_, _>>()).unwrap()
    }

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn a_matrix_symmetric() {
        let a = build_a(&dist(&[(-1, 0.5), (1, 0.5)]), 1, 1).unwrap();
        assert_eq!(a, mat(&[&[2.0, -1.0], &[1.0, 0.0]]));
    }

    #[test]
    fn a_matrix_lazy() {
        let (a, b, c) = (0.3, 0.5, 0.2);
        let m = build_a(&dist(&[(-1, c), (0, b), (1, a)]), 1, 1).unwrap();
        assert_eq!(m, mat(&[&[(1.0 - b) / c, -a / c], &[1.0, 0.0]]));
    }

    #[test]
    fn a_matrix_six_by_six() {
        let (a, b, c, d) = (0.1, 0.2, 0.3, 0.4);
        let m = build_a(&dist(&[(-3, b), (-1, d), (1, c), (3, a)]), 3, 3).unwrap();
        let first = [0.0, -d / b, 1.0 / b, -c / b, 0.0, -a / b];
        assert_eq!(m.row(0), first);
        for i in 1..6 {
            for j in 0..6 {
                assert_eq!(m[(i, j)], if j + 1 == i { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn a_matrix_needs_bottom_step() {
        assert_eq!(
            build_a(&dist(&[(-1, 0.5), (1, 0.5)]), 1, 2),
            Err(Error::DegenerateDistribution(0))
        );
    }

    #[test]
    fn monodromy_examples() {
        let k = lift(&"0.5,0.5".parse::<PeriodicGame>().unwrap()).unwrap();
        assert_eq!(monodromy(&k).unwrap(), mat(&[&[3.0, -2.0], &[2.0, -1.0]]));

        let k = lift(&"0.3".parse::<PeriodicGame>().unwrap()).unwrap();
        let a0 = build_a(k.step(0), 1, 1).unwrap();
        assert_eq!(monodromy(&k).unwrap(), a0);

        let g: PeriodicGame = "0.2,0.7,0.45".parse().unwrap();
        let m = monodromy(&lift(&g).unwrap()).unwrap();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let c = crate::game::fairness_constant(&g).unwrap();
        assert!((det / c - 1.0).abs() < 1e-13);
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&Matrix::identity(2)), vec![1.0, -2.0, 1.0]);
        assert_eq!(char_poly(&mat(&[&[3.0, -2.0], &[2.0, -1.0]])), vec![1.0, -2.0, 1.0]);
        assert_eq!(char_poly(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn eigen_magnitude_examples() {
        let s = eigen_magnitudes(&Matrix::identity(2)).unwrap();
        assert!(s.magnitudes.iter().all(|m| (m - 1.0).abs() < 1e-7));
        let s = eigen_magnitudes(&mat(&[&[3.0, -2.0], &[2.0, -1.0]])).unwrap();
        assert!(s.magnitudes.iter().all(|m| (m - 1.0).abs() < 1e-7));
        let s = eigen_magnitudes(&mat(&[&[2.0, 0.0], &[0.0, 0.5]])).unwrap();
        assert!((s.magnitudes[0] - 0.5).abs() < 1e-14 && (s.magnitudes[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_rejects_large_order() {
        assert!(eigen_magnitudes(&Matrix::identity(65)).is_err());
    }

    #[test]
    fn double_root_examples() {
        assert!(double_root_at_one(&mat(&[&[3.0, -2.0], &[2.0, -1.0]]), 1e-9));
        assert!(double_root_at_one(&Matrix::identity(2), 1e-9));
        assert!(!double_root_at_one(&mat(&[&[2.0, 0.0], &[0.0, 0.5]]), 1e-9));
    }

    #[test]
    fn solve_small_system() {
        let a = mat(&[&[0.0, 2.0], &[1.0, 1.0]]);
        let x = a.solve(&[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(mat(&[&[1.0, 2.0], &[2.0, 4.0]]).solve(&[1.0, 1.0]).is_none());
    }
}
