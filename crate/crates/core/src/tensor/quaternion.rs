//! Quaternion basis as 2×2 complex matrices and the ε-tuple bookkeeping used
//! by self-dual tensors.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// e₀ = 𝟏, e₁ = diag(i, −i), e₂ = [[0, −1], [1, 0]], e₃ = [[0, −i], [−i, 0]].
pub const BASIS: [[[Complex64; 2]; 2]; 4] = [
    [[ONE, ZERO], [ZERO, ONE]],
    [[I, ZERO], [ZERO, Complex64::new(0.0, -1.0)]],
    [[ZERO, Complex64::new(-1.0, 0.0)], [ONE, ZERO]],
    [[ZERO, Complex64::new(0.0, -1.0)], [Complex64::new(0.0, -1.0), ZERO]],
];

/// Number of ε tuples for order p (4^{p/2}).
pub fn num_eps(order: usize) -> usize {
    1 << order // 4^(p/2) = 2^p for even p
}

/// Decodes an ε code (base 4, ε₁ most significant) into its digits.
pub fn eps_digits(code: usize, order: usize) -> Vec<u8> {
    let half = order / 2;
    (0..half).map(|s| ((code >> (2 * (half - 1 - s))) & 3) as u8).collect()
}

pub fn eps_code(digits: &[u8]) -> usize {
    digits.iter().fold(0, |acc, &d| (acc << 2) | d as usize)
}

/// ε ∈ 𝓔 iff n₁ + n₃ ≡ n₂ (mod 2), i.e. an even number of non-identity factors.
pub fn in_parity_set(digits: &[u8]) -> bool {
    digits.iter().filter(|&&d| d != 0).count() % 2 == 0
}

/// Entry of ⊗ₛ e_{εₛ} at the 2×…×2 position `iota` (length p, values 0/1).
pub fn basis_product_entry(digits: &[u8], iota: &[usize]) -> Complex64 {
    let mut acc = ONE;
    for (s, &d) in digits.iter().enumerate() {
        acc *= BASIS[d as usize][iota[2 * s]][iota[2 * s + 1]];
        if acc == ZERO {
            break;
        }
    }
    acc
}

/// Coefficients of a 2×2 complex matrix in the quaternion basis.
pub fn decompose(m: [[Complex64; 2]; 2]) -> [Complex64; 4] {
    let [[a, b], [c, d]] = m;
    [(a + d) / 2.0, -I * (a - d) / 2.0, -(b - c) / 2.0, I * (b + c) / 2.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_set_examples() {
        for e in [[0u8, 0, 0], [1, 1, 0], [1, 3, 0]] {
            assert!(in_parity_set(&e), "{e:?}");
        }
        for e in [[1u8, 0, 0], [1, 1, 1], [1, 3, 2]] {
            assert!(!in_parity_set(&e), "{e:?}");
        }
        assert!(in_parity_set(&[0]));
        for k in 1..4u8 {
            assert!(!in_parity_set(&[k]));
        }
    }

    #[test]
    fn codes_round_trip() {
        for code in 0..64 {
            assert_eq!(eps_code(&eps_digits(code, 6)), code);
        }
        assert_eq!(eps_digits(0b01_00_10, 6), vec![1, 0, 2]);
    }

    #[test]
    fn decomposition_reconstructs() {
        let m = [
            [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3)],
            [Complex64::new(0.7, -1.1), Complex64::new(4.0, 0.25)],
        ];
        let c = decompose(m);
        for r in 0..2 {
            for s in 0..2 {
                let v: Complex64 = (0..4).map(|k| c[k] * BASIS[k][r][s]).sum();
                assert!((v - m[r][s]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn quaternion_relations() {
        // e₁² = e₂² = e₃² = −𝟏 and e₁e₂ = e₃
        let mul = |a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]| {
            let mut out = [[ZERO; 2]; 2];
            for r in 0..2 {
                for s in 0..2 {
                    out[r][s] = a[r][0] * b[0][s] + a[r][1] * b[1][s];
                }
            }
            out
        };
        let minus_one = [[-ONE, ZERO], [ZERO, -ONE]];
        for k in 1..4 {
            assert_eq!(mul(&BASIS[k], &BASIS[k]), minus_one);
        }
        assert_eq!(mul(&BASIS[1], &BASIS[2]), BASIS[3]);
    }
}
