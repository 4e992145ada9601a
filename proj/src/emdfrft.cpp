#include "imfrac/emdfrft.hpp"

#include <stdexcept>

#include "imfrac/fft.hpp"

namespace imfrac {

namespace {

void check_m(int m_angles) {
  if (m_angles < 4 || m_angles % 4 != 0)
    throw std::invalid_argument("emdfrft: m_angles must be a positive multiple of 4");
}

}  // namespace

std::vector<int> fold_classes(const DfrftBasis& b, int m_angles) {
  check_m(m_angles);
  std::vector<int> q(b.n);
  for (int p = 0; p < b.n; ++p) q[p] = b.k[p] % m_angles;
  return q;
}

Eigen::MatrixXi folding_kernel(const DfrftBasis& b, int m_angles) {
  const std::vector<int> q = fold_classes(b, m_angles);
  Eigen::MatrixXi k = Eigen::MatrixXi::Zero(m_angles, b.n);
  for (int p = 0; p < b.n; ++p) k(q[p], p) = 1;
  return k;
}

EmdfrftGrid emdfrft_from_coeffs(const DfrftBasis& b, int m_angles,
                                const CVec& rho, bool half_fft) {
  check_m(m_angles);
  if (rho.size() != b.n)
    throw std::invalid_argument("emdfrft: coefficient size mismatch");
  const int n = b.n;
  const int m = m_angles;

  // Folded synthesis: row q collects sum_{p: k_p = q (mod m)} rho_p v_p^T.
  // Each row then holds one "fold class" of the eigen expansion, and the DFT
  // across rows turns the class phases e^{-j q alpha_m} on for every angle.
  CMatRM folded = CMatRM::Zero(m, n);
  const std::vector<int> q = fold_classes(b, m_angles);
  for (int p = 0; p < n; ++p) {
    if (rho[p] == cplx{0.0, 0.0}) continue;
    folded.row(q[p]) += rho[p] * b.v.col(p).transpose();
  }

  EmdfrftGrid g;
  g.m_angles = m;
  g.n = n;
  g.s.resize(m, n);

  // Column-wise DFT across the fold axis. Row-major storage: element (q, idx)
  // sits at q*n + idx, so one column is a stride-n batch item.
  const int cols = half_fft ? n / 2 + 1 : n;
  fft::transform_many(folded.data(), g.s.data(), m, cols, n, 1, fft::kForward);
  if (half_fft) {
    for (int idx = n / 2 + 1; idx < n; ++idx) {
      const int src = n - idx;
      for (int row = 0; row < m; ++row)
        g.s(row, idx) = g.s((row + m / 2) % m, src);
    }
  }
  return g;
}

EmdfrftGrid emdfrft(const DfrftBasis& b, int m_angles, const CVec& signal,
                    bool half_fft) {
  return emdfrft_from_coeffs(b, m_angles, basis_analysis(b, signal), half_fft);
}

CVec emdfrft_row(const DfrftBasis& b, int m_angles, const CVec& rho, int row) {
  check_m(m_angles);
  if (rho.size() != b.n)
    throw std::invalid_argument("emdfrft_row: coefficient size mismatch");
  if (row < 0 || row >= m_angles)
    throw std::invalid_argument("emdfrft_row: row out of range");
  const double alpha = 2.0 * pi * row / m_angles;
  CVec out = CVec::Zero(b.n);
  for (int p = 0; p < b.n; ++p) {
    if (rho[p] == cplx{0.0, 0.0}) continue;
    out += (rho[p] * std::polar(1.0, -alpha * b.k[p])) * b.v.col(p);
  }
  return out;
}

}  // namespace imfrac
