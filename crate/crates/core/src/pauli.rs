//! Labeled Pauli words `(i/2) sigma_1 (x) ... (x) sigma_n`.
//!
//! A word is stored as a signed permutation: row `r` has exactly one nonzero,
//! at column `r ^ flip_mask`. Dense matrices are built on first use and cached.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Clone)]
pub struct PauliWord {
    label: String,
    flip_mask: usize,
    values: Vec<Complex64>,
    dense: OnceLock<ComplexMatrix>,
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({})", self.label)
    }
}

impl PartialEq for PauliWord {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

impl Eq for PauliWord {}

/// Builds `(i/2) * sigma_{c1} (x) ... (x) sigma_{cn}` from a label over `{I, X, Y, Z}`.
pub fn pauli_word(label: &str) -> Result<PauliWord> {
    PauliWord::new(label)
}

impl PauliWord {
    pub fn new(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::BadLabel { label: label.into(), reason: "empty label" });
        }
        if label.chars().any(|c| !matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
            return Err(Error::BadLabel {
                label: label.into(),
                reason: "characters must be one of I, X, Y, Z",
            });
        }
        let n = label.len();
        if n > 16 {
            return Err(Error::BadLabel { label: label.into(), reason: "more than 16 qubits" });
        }
        let letters = label.as_bytes();
        let mut flip_mask = 0usize;
        for (q, &ch) in letters.iter().enumerate() {
            if ch == b'X' || ch == b'Y' {
                flip_mask |= 1 << (n - 1 - q);
            }
        }
        let dim = 1usize << n;
        let values = (0..dim)
            .map(|row| {
                let mut v = Complex64::new(0.0, 0.5);
                for (q, &ch) in letters.iter().enumerate() {
                    let bit = (row >> (n - 1 - q)) & 1;
                    v *= match (ch, bit) {
                        (b'Y', 0) => Complex64::new(0.0, -1.0),
                        (b'Y', _) => Complex64::new(0.0, 1.0),
                        (b'Z', 1) => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(1.0, 0.0),
                    };
                }
                v
            })
            .collect();
        Ok(Self { label: label.to_owned(), flip_mask, values, dense: OnceLock::new() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn qubits(&self) -> usize {
        self.label.len()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Column holding the nonzero entry of `row`.
    #[inline]
    pub fn column_of(&self, row: usize) -> usize {
        row ^ self.flip_mask
    }

    /// Value of the nonzero entry in `row`.
    #[inline]
    pub fn value_at(&self, row: usize) -> Complex64 {
        self.values[row]
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.dense.get_or_init(|| {
            let dim = self.dim();
            let mut m = ComplexMatrix::zeros(dim, dim);
            for r in 0..dim {
                m[(r, self.column_of(r))] = self.values[r];
            }
            m
        })
    }

    /// `Re tr(w^dag x)` in O(dim).
    pub fn inner(&self, x: &ComplexMatrix) -> f64 {
        (0..self.dim())
            .map(|r| {
                let w = self.values[r];
                let z = x[(r, self.column_of(r))];
                w.re * z.re + w.im * z.im
            })
            .sum()
    }

    /// `<w, w> = 2^(n-2)`.
    pub fn norm_sqr(&self) -> f64 {
        self.dim() as f64 / 4.0
    }

    /// Coordinate of `x` along this word.
    pub fn coordinate(&self, x: &ComplexMatrix) -> f64 {
        self.inner(x) / self.norm_sqr()
    }

    /// Adds `coeff * w` to `acc`.
    pub fn add_scaled_to(&self, acc: &mut ComplexMatrix, coeff: f64) {
        for r in 0..self.dim() {
            acc[(r, self.column_of(r))] += self.values[r] * coeff;
        }
    }

    /// `w * a`.
    pub fn left_mul(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        ComplexMatrix::from_fn(dim, a.ncols(), |r, c| self.values[r] * a[(self.column_of(r), c)])
    }

    /// `a * w`.
    pub fn right_mul(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        // column `col` of w has its nonzero in row `col ^ mask`
        ComplexMatrix::from_fn(a.nrows(), dim, |r, col| {
            let k = self.column_of(col);
            a[(r, k)] * self.values[k]
        })
    }

    /// `[a, w]`.
    pub fn commutator_with(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.right_mul(a) - self.left_mul(a)
    }

    /// Two Pauli words commute iff they differ (both non-identity) on an even
    /// number of qubits.
    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        let clashes = self
            .label
            .bytes()
            .zip(other.label.bytes())
            .filter(|&(a, b)| a != b'I' && b != b'I' && a != b)
            .count();
        clashes % 2 == 0
    }

    /// The word with `suffix` appended on the right.
    pub fn extended(&self, suffix: &str) -> Result<PauliWord> {
        PauliWord::new(&format!("{}{}", self.label, suffix))
    }
}

/// `sum_i coeffs[i] * words[i]`.
pub fn combination(words: &[PauliWord], coeffs: &[f64]) -> ComplexMatrix {
    assert_eq!(words.len(), coeffs.len(), "one coefficient per word");
    let dim = words.first().map_or(1, PauliWord::dim);
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (w, &c) in words.iter().zip(coeffs) {
        if c != 0.0 {
            w.add_scaled_to(&mut acc, c);
        }
    }
    acc
}

/// Coordinates of `x` along each word, and the Frobenius norm of the remainder.
pub fn coordinates(x: &ComplexMatrix, words: &[PauliWord]) -> (Vec<f64>, f64) {
    let coords: Vec<f64> = words.iter().map(|w| w.coordinate(x)).collect();
    let residual = (x - combination(words, &coords)).norm();
    (coords, residual)
}

pub fn labels(words: &[PauliWord]) -> Vec<String> {
    words.iter().map(|w| w.label().to_owned()).collect()
}
