use serde::Serialize;

use crate::designs::{InclusionProbabilities, SecondOrderMatrix};
use crate::error::{Error, Result};

use super::VertexRiskProfile;

/// In-place unnormalized Walsh–Hadamard transform. `values.len()` must be a
/// power of two; entry `u` afterwards holds `Σ_x values[x] (-1)^{|u & x|}`.
pub fn walsh_transform(values: &mut [f64]) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (values[i], values[i + h]);
                values[i] = a + b;
                values[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Walsh coefficients of a vertex risk profile up to second order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalshRecovery {
    /// `2^-N Σ_ε R(ε)`.
    pub constant: f64,
    /// Symmetric `N x N`, zero diagonal; entry `(i, j)` is `2^-N Σ_ε R(ε) ε_i ε_j`.
    pub pairs: Vec<Vec<f64>>,
    /// Largest `|coefficient|` among first-order and third-or-higher-order terms.
    pub higher_order_max: f64,
}

impl WalshRecovery {
    /// Largest deviation of the pair coefficients from `expected`.
    pub fn pair_residual(&self, expected: &[Vec<f64>]) -> f64 {
        self.pairs
            .iter()
            .zip(expected)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Recovers the constant and pairwise Walsh coefficients of a risk profile.
///
/// For the midpoint-differenced estimator these equal `D_π` and
/// `2 Δ_ij r_i r_j / (π_i π_j)` respectively; `π` and `r` are only used for
/// dimension checks here, see [`expected_walsh_coefficients`].
pub fn walsh_delta_recovery(
    profile: &VertexRiskProfile,
    pi: &InclusionProbabilities,
    radii: &[f64],
) -> Result<WalshRecovery> {
    let units = profile.units;
    let expected = 1usize << units;
    if profile.risks.len() != expected {
        return Err(Error::IncompleteProfile {
            expected,
            got: profile.risks.len(),
        });
    }
    super::check_population(units, pi.len())?;
    super::check_population(units, radii.len())?;

    let mut coeffs = profile.risks.clone();
    walsh_transform(&mut coeffs);
    let scale = 1.0 / expected as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    // Bit 1 encodes ε = +1, so the transform character for a mask u is
    // (-1)^{|u|} Π_{i∈u} ε_i; even-order coefficients need no sign fix.
    let mut pairs = vec![vec![0.0; units]; units];
    let mut higher_order_max: f64 = 0.0;
    for (mask, &c) in coeffs.iter().enumerate() {
        match mask.count_ones() {
            0 => {}
            2 => {
                let i = mask.trailing_zeros() as usize;
                let j = (mask & !(1 << i)).trailing_zeros() as usize;
                pairs[i][j] = c;
                pairs[j][i] = c;
            }
            _ => higher_order_max = higher_order_max.max(c.abs()),
        }
    }
    Ok(WalshRecovery {
        constant: coeffs[0],
        pairs,
        higher_order_max,
    })
}

/// `2 Δ_ij r_i r_j / (π_i π_j)` for `i != j`, zero on the diagonal.
pub fn expected_walsh_coefficients(second: &SecondOrderMatrix, radii: &[f64]) -> Vec<Vec<f64>> {
    let n = second.units();
    let pi = second.first_order();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        2.0 * second.delta(i, j) * radii[i] * radii[j] / (pi[i] * pi[j])
                    }
                })
                .collect()
        })
        .collect()
}
