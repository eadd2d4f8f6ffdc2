//! The axis involutions `Theta_Z` and `Theta_X`: conjugation by `I^(n-1) (x) sigma`.
//!
//! Both conjugators act only on the last qubit, so [`AxisInvolution::apply`]
//! uses index arithmetic instead of dense products: `Z` flips the sign of
//! entries whose row and column parities differ, `X` swaps indices `r <-> r ^ 1`.

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, pauli_x, pauli_z, AlgebraElement, ComplexMatrix};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Z,
    X,
}

#[derive(Debug, Clone)]
pub struct AxisInvolution {
    pub n: usize,
    pub axis: Axis,
    pub conjugator: ComplexMatrix,
}

impl AxisInvolution {
    pub fn new(n: usize, axis: Axis) -> Self {
        let sigma = match axis {
            Axis::Z => pauli_z(),
            Axis::X => pauli_x(),
        };
        let conjugator = kron(&identity(1 << (n - 1)), &sigma);
        Self { n, axis, conjugator }
    }

    pub fn theta_z(n: usize) -> Self {
        Self::new(n, Axis::Z)
    }

    pub fn theta_x(n: usize) -> Self {
        Self::new(n, Axis::X)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `C a C` with `C = I^(n-1) (x) sigma_axis`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: a.nrows() });
        }
        Ok(self.apply_unchecked(a))
    }

    pub(crate) fn apply_unchecked(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let dim = a.nrows();
        match self.axis {
            Axis::Z => ComplexMatrix::from_fn(dim, dim, |r, c| {
                if (r ^ c) & 1 == 1 {
                    -a[(r, c)]
                } else {
                    a[(r, c)]
                }
            }),
            Axis::X => ComplexMatrix::from_fn(dim, dim, |r, c| a[(r ^ 1, c ^ 1)]),
        }
    }

    /// Splits `a` into its `+1` and `-1` eigen-parts.
    pub fn eigensplit(&self, a: &AlgebraElement) -> Result<(AlgebraElement, AlgebraElement)> {
        let t = self.apply(&a.matrix)?;
        let half = Complex64::new(0.5, 0.0);
        let plus = (&a.matrix + &t) * half;
        let minus = &a.matrix - &plus;
        Ok((AlgebraElement::new(plus), AlgebraElement::new(minus)))
    }

    /// `||Theta(k) - k||_F`: zero for members of the fixed subgroup.
    pub fn fixedness_defect(&self, k: &ComplexMatrix) -> f64 {
        (self.apply_unchecked(k) - k).norm()
    }
}
