#pragma once

#include <vector>

#include "imfrac/eigenbasis.hpp"
#include "imfrac/types.hpp"

namespace imfrac {

// DFrFT of one signal evaluated on the uniform angle grid
// alpha_m = 2 pi m / m_angles, rows ordered by m. Row m_angles/4 is the
// plain unitary DFT of the input.
struct EmdfrftGrid {
  int m_angles = 0;
  int n = 0;
  CMatRM s;  // m_angles x n

  double angle(int row) const { return 2.0 * pi * row / m_angles; }
  int dft_row() const { return m_angles / 4; }
};

// Fold class of eigen coefficient p: its Hermite index modulo m_angles.
// Summing coefficients per class and running one length-m_angles DFT across
// classes evaluates e^{-j k alpha_m} for all m simultaneously, for any
// m_angles divisible by 4 (no divisibility relation with n is required).
std::vector<int> fold_classes(const DfrftBasis& b, int m_angles);

// Dense one-hot folding matrix (m_angles x n); column p marks class of p.
// Mostly useful for inspection and tests.
Eigen::MatrixXi folding_kernel(const DfrftBasis& b, int m_angles);

// Full evaluation from a signal or from precomputed eigen coefficients.
// With half_fft enabled only columns 0..n/2 are transformed; the rest follow
// from the exact half-turn identity
//   s(m + M/2, idx) == s(m, (n - idx) mod n),
// which holds because a half-turn of the transform is the circular parity
// operator and commutes with every other angle.
EmdfrftGrid emdfrft(const DfrftBasis& b, int m_angles, const CVec& signal,
                    bool half_fft = true);
EmdfrftGrid emdfrft_from_coeffs(const DfrftBasis& b, int m_angles,
                                const CVec& rho, bool half_fft = true);

// One grid row evaluated directly from the coefficients,
//   s(row, :) = sum_p rho_p e^{-j k_p alpha_row} v_p^T,
// without building the other rows. Matches emdfrft_from_coeffs row for row;
// useful when only a handful of known angles need refreshing.
CVec emdfrft_row(const DfrftBasis& b, int m_angles, const CVec& rho, int row);

}  // namespace imfrac
