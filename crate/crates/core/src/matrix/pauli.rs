//! The Pauli matrices and Pauli words.

use super::{ComplexMatrix, C64, I, ONE, ZERO};

pub fn id2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
}

pub fn y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap()
}

pub fn z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[ONE, -ONE])
}

/// Single-qubit Pauli by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn by_index(k: usize) -> ComplexMatrix {
    match k {
        0 => id2(),
        1 => x(),
        2 => y(),
        3 => z(),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Tensor product of single-qubit Paulis, leftmost factor outermost.
pub fn word(indices: &[usize]) -> ComplexMatrix {
    indices
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, &k| acc.kron(&by_index(k)))
}

/// Coefficients `v_k = tr(σ_k M)/2` so that `M = Σ v_k σ_k` for a 2×2 `M`.
pub fn coefficients(m: &ComplexMatrix) -> [C64; 4] {
    assert_eq!(m.dim(), 2);
    let half = C64::new(0.5, 0.0);
    [0, 1, 2, 3].map(|k| (&by_index(k) * m).trace() * half)
}
