#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imfrac/detector.hpp"
#include "imfrac/emdfrft.hpp"
#include "imfrac/types.hpp"

namespace imfrac {

// ---- chirp rate <-> grid angle ------------------------------------------
//
// A linear FM component whose instantaneous frequency moves s bins per
// sample compresses at the grid angle with -cot(alpha) = s: positive slopes
// land above the DFT row (90 deg), negative slopes below. The map treats
// angles modulo a half turn (a half-turn shift only mirrors the sample
// index). Measured deviations of the discrete transform from this ideal map
// stay under ~2.5 deg across the admissible range.

double slope_for_angle(double alpha);        // bins per sample
double angle_for_slope(double slope);        // in (0, pi)

// Angle of a grid row reflected into (-pi/2, pi/2], identifying alpha with
// alpha + pi.
double reflected_angle(double alpha);

// Unit-energy signal that the transform at angle `alpha` compresses to a
// spike at sample n_hat (column n_hat of the inverse rotation).
CVec chirp_at_angle(const DfrftBasis& b, double alpha, int n_hat);

// ---- bit-packed m_angles x n cell sets -----------------------------------

struct BitGrid {
  int rows = 0, cols = 0, words = 0;
  std::vector<std::uint64_t> bits;

  BitGrid() = default;
  BitGrid(int r, int c, bool value);
  bool get(int r, int c) const {
    return (bits[static_cast<std::size_t>(r) * words + (c >> 6)] >> (c & 63)) & 1u;
  }
  void set(int r, int c, bool v) {
    auto& w = bits[static_cast<std::size_t>(r) * words + (c >> 6)];
    const std::uint64_t m = 1ULL << (c & 63);
    w = v ? (w | m) : (w & ~m);
  }
  std::size_t count() const;
};

// Rows whose reflected angle magnitude stays within alpha_max; the plain-DFT
// neighbourhood (rows near ±90 deg) is excluded so echo tones are never
// treated as chirps.
BitGrid admissible_rows(int m_angles, int n, double alpha_max);

// ---- chirp support templates ---------------------------------------------
//
// Geometric footprint of one detected chirp on the angle grid, used to keep
// the same component from being found twice in a pass. Templates come from a
// canonical family: a Hann-windowed tone of duration `duration_frac * n`
// centered mid-frame, rotated from the DFT row to the detection row. Thanks
// to the group structure the whole family is one stored grid per frequency
// bin, row-shifted at lookup time; bins above n/2 reuse mirrored templates.
// Cells within `threshold_db` of the template's global peak belong to the
// support.

struct SupportMaskSet {
  int m_angles = 0, n = 0;
  double threshold_db = 25.0;
  double duration_frac = 0.5;
  std::vector<BitGrid> ref;  // index = frequency bin, 0..n/2

  // clears mask cells covered by the template anchored at (m_hat, n_hat)
  void subtract(BitGrid& mask, int m_hat, int n_hat) const;
  // sets the cells covered by the template anchored at (m_hat, n_hat)
  void mark(BitGrid& claimed, int m_hat, int n_hat) const;
  // true when the template anchored at (m_hat, n_hat) touches any set cell
  bool overlaps(const BitGrid& claimed, int m_hat, int n_hat) const;
  bool covered(int m_hat, int n_hat, int m, int idx) const;
};

SupportMaskSet build_support_masks(const DfrftBasis& b, int m_angles,
                                   double threshold_db = 25.0,
                                   double duration_frac = 0.5,
                                   int num_threads = 0);

// Binary cache ("CMSK"); load refuses geometry mismatches.
void save_support_masks(const SupportMaskSet& s, const std::string& path);
SupportMaskSet load_support_masks(const std::string& path);
SupportMaskSet cached_support_masks(const DfrftBasis& b, int m_angles,
                                    double threshold_db, double duration_frac,
                                    std::optional<std::string> cache_dir);

// ---- eigen-domain sparse updates -----------------------------------------

// Residual removed from a transform row: values at the zeroed cells.
struct SparseGamma {
  double alpha = 0.0;
  std::vector<int> idx;
  std::vector<cplx> val;
};

SparseGamma gamma_from_row(const CVec& row, double alpha, int n_hat, int g);

struct UpdateStats {
  std::int64_t mults = 0;  // complex multiply-accumulates actually spent
};

// rho' = rho - Lambda(-alpha) V^T gamma, touching only the nonzero gamma
// cells: n * (nnz + 1) multiplies instead of the n^2 a dense re-analysis
// would cost.
UpdateStats update_coeffs(const DfrftBasis& b, CVec& rho, const SparseGamma& gamma);

// Shared-pass form: one batch of residuals gathered from the same grid,
// applied together. Exactly equivalent to folding update_coeffs over the
// batch members in order.
UpdateStats update_coeffs_batch(const DfrftBasis& b, CVec& rho,
                                const std::vector<SparseGamma>& batch);

// Dense reference implementation used for op-count comparisons.
UpdateStats update_coeffs_dense(const DfrftBasis& b, CVec& rho,
                                const SparseGamma& gamma);

// ---- iterative detection/removal driver ----------------------------------

struct ImfracConfig {
  int m_angles = 256;
  double alpha_max = deg2rad(80.0);
  DetectorConfig detector{.phi = 0, .g = 20, .beta_db = 20.0};
  double support_threshold_db = 25.0;
  double template_duration_frac = 0.5;
  int max_outer_iters = 16;
  int max_inner_iters = 64;
  bool half_fft = true;
};

struct ChirpDetection {
  int m_hat = -1, n_hat = -1;
  double alpha = 0.0;    // reflected angle of the detection row
  double snr_db = 0.0;
  int outer_iter = 0;
};

struct ImfracResult {
  CVec spectrum;  // plain-DFT row of the final grid (unitary scaling)
  std::vector<ChirpDetection> detections;
  int outer_iters = 0;
  bool converged = true;  // false if the iteration cap stopped the loop
  UpdateStats stats;
};

// Window the oracle variant searches around a predicted grid cell.
struct OracleTarget {
  int m_hat = -1, n_hat = -1;
  int row_halfwidth = 2;
};

// Detect-and-zero loop. Each pass scans the admissible grid, gathers every
// separable detection into one batch (masking each one's support so the scan
// moves on), applies the batch to the eigen coefficients and rebuilds the
// grid; passes repeat until a scan comes back empty. With `oracle_targets`
// the scan is replaced by windowed searches around the predicted cells and
// thresholding is bypassed (one pass).
ImfracResult mitigate(const DfrftBasis& b, const SupportMaskSet& masks,
                    const CVec& signal, const ImfracConfig& cfg,
                    const std::vector<OracleTarget>* oracle_targets = nullptr);

// Predicts where a clean interference component lands on the grid:
// global magnitude peak over the admissible cells, one target per arm
// (the second arm is searched with the first one's support masked).
std::vector<OracleTarget> predict_oracle_targets(const DfrftBasis& b,
                                                 const SupportMaskSet& masks,
                                                 const CVec& clean_component,
                                                 const ImfracConfig& cfg,
                                                 int max_arms = 2);

// A zeroing window fixed in advance: grid cell (m_hat, n_hat), width taken
// from the detector guard span as usual.
struct PinnedWindow {
  int m_hat = -1, n_hat = -1;
};

// Applies the given windows to a signal unconditionally, in the given order,
// with no detection step: each window's cells are read from the current
// coefficients, subtracted, and the next window sees the residual. Returns
// the plain-DFT row of the result (unitary scaling). For a fixed window list
// this is one linear operator, so applying it to every ramp of a frame
// attenuates all ramps identically and cannot modulate echoes in slow time.
CVec apply_pinned_windows(const DfrftBasis& b, const CVec& signal,
                          const ImfracConfig& cfg,
                          const std::vector<PinnedWindow>& windows);

}  // namespace imfrac
