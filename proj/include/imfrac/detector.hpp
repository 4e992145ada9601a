#pragma once

#include "imfrac/types.hpp"

namespace imfrac {

// Lesser-of cell-averaging CFAR on one transform-domain row. Noise is taken
// as the smaller of the leading/lagging training means so that a second
// chirp response or a skirt on one side does not lift the estimate.
struct DetectorConfig {
  int phi = 0;           // training cells per side; 0 = auto (n/2 - g - 1)
  int g = 20;            // guard cells per side
  double beta_db = 20.0; // detection threshold

  int resolve_phi(int n) const { return phi > 0 ? phi : n / 2 - g - 1; }
  void validate(int n) const;
};

struct Detection {
  bool detected = false;
  int index = -1;
  double snr_db = 0.0;
  double noise_power = 0.0;
};

// Tests cell `idx` of `row` (circular windows, `g` guards then `phi`
// training cells per side). Detected iff snr_db >= beta_db.
Detection lo_cfar(const CVec& row, int idx, const DetectorConfig& cfg);

// 1 everywhere except idx±g (circular), i.e. 2g+1 zeros.
RVec detection_mask(int n, int idx, int g);

CVec apply_mask(const CVec& row, const RVec& mask);

}  // namespace imfrac
