#include "imfrac/detector.hpp"

#include <limits>
#include <stdexcept>

namespace imfrac {

void DetectorConfig::validate(int n) const {
  if (g < 0) throw std::invalid_argument("detector: guard count must be >= 0");
  const int p = resolve_phi(n);
  if (p < 1) throw std::invalid_argument("detector: needs at least one training cell");
  if (2 * (p + g) + 1 > n)
    throw std::invalid_argument("detector: windows do not fit the row");
}

Detection lo_cfar(const CVec& row, int idx, const DetectorConfig& cfg) {
  const int n = static_cast<int>(row.size());
  cfg.validate(n);
  if (idx < 0 || idx >= n) throw std::invalid_argument("detector: index out of range");
  const int p = cfg.resolve_phi(n);

  double lead = 0.0, lag = 0.0;
  for (int i = 1; i <= p; ++i) {
    lead += std::norm(row[wrap_index(idx - cfg.g - i, n)]);
    lag += std::norm(row[wrap_index(idx + cfg.g + i, n)]);
  }
  const double noise = std::min(lead, lag) / p;
  const double cell = std::norm(row[idx]);

  Detection d;
  d.index = idx;
  d.noise_power = noise;
  if (noise > 0.0) {
    d.snr_db = 10.0 * std::log10(cell / noise);
  } else {
    d.snr_db = cell > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
  }
  d.detected = d.snr_db >= cfg.beta_db;
  return d;
}

RVec detection_mask(int n, int idx, int g) {
  RVec m = RVec::Ones(n);
  for (int d = -g; d <= g; ++d) m[wrap_index(idx + d, n)] = 0.0;
  return m;
}

CVec apply_mask(const CVec& row, const RVec& mask) {
  if (row.size() != mask.size())
    throw std::invalid_argument("apply_mask: size mismatch");
  return row.cwiseProduct(mask.cast<cplx>());
}

}  // namespace imfrac
