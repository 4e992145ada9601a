#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imfrac/frontend.hpp"
#include "imfrac/mitigation.hpp"
#include "imfrac/sigmodel.hpp"

namespace imfrac {

// Everything that shapes a processed frame, across all methods.
struct ChainConfig {
  FrontendConfig frontend;
  ImfracConfig imfrac;
  std::string range_window = "hann";    // standard (unpadded) chain taper
  std::string doppler_window = "hann";  // slow-time taper
  bool mitigation_enabled = true;       // false: padded plumbing, no zeroing
  bool lowpass_enabled = true;          // post-mitigation range smoothing
  int ramp_filter_window = 3;           // sliding-min baseline window
  int envelope_ma = 16;                 // envelope baseline: moving average
  double envelope_c = 5.0;              // envelope baseline: MAD multiplier
  std::optional<std::string> cache_dir; // support-mask cache location
};

// A range-Doppler map plus the bookkeeping needed to trust it.
struct RdMap {
  CMat map;                // n_range x n_doppler, Doppler axis DC-centred
  std::string provenance;  // producing chain identifier
  std::uint64_t config_hash = 0;
  int ramps_mitigated = 0;    // ramps where at least one component was removed
  int total_detections = 0;
  bool converged = true;      // false if any ramp hit its iteration cap
};

// Heavy shared state for the mitigation chain: the transform basis at the
// padded length and the support-template set.  Build once, use across frames
// and threads (read-only).
struct ChainContext {
  ChainConfig cfg;
  DfrftBasis basis;
  SupportMaskSet masks;
  std::uint64_t hash = 0;
};

std::uint64_t chain_config_hash(const ChainConfig& cfg);
ChainContext make_chain_context(const ChainConfig& cfg, int n_fast_real);

// Digital I/Q demodulation ramp by ramp: 2N x R real -> N x R complex, with
// the receiver's DC notch optionally applied.
CMat iq_cube(const RMat& real_cube, bool dc_notch, double cutoff = 0.01);

// Standard chain on an I/Q cube: range window + FFT per ramp, then Doppler
// window + FFT per range bin with the DC column centred.
RdMap process_reference(const CMat& iq, const ChainConfig& cfg);

// Standard chain on the raw real cube (no interference handling).
RdMap process_none(const RMat& real_cube, const ChainConfig& cfg);

// Full mitigation chain: per ramp digital I/Q -> DC notch -> oversample,
// window, pad -> detect-and-zero in the rotated transform domain -> crop
// back to the base range grid -> optional low-pass; then Doppler processing.
RdMap process_imfrac(const ChainContext& ctx, const RMat& real_cube);

// Oracle-informed variant: per ramp, the clean interference component is
// pushed through the identical front end and its grid cells predicted; the
// mitigation loop then zeroes exactly those windows (single pass, no
// threshold decisions).
RdMap process_imfrac_oracle(const ChainContext& ctx, const RadarCube& cube);

// Time-domain sample zeroing baseline.  Oracle mode nulls the ground-truth
// interference support; envelope mode flags samples whose moving-average
// envelope exceeds median + c * MAD per ramp.  Standard chain afterwards.
RdMap baseline_zeroing(const RadarCube& cube, bool oracle, const ChainConfig& cfg);

// Envelope change-point detector used by the zeroing baseline (exposed for
// validation): 1 where the smoothed |x| exceeds the robust threshold.
std::vector<std::uint8_t> envelope_flags(const RVec& ramp, int ma, double c);

// Slow-time sliding-minimum baseline: per range bin, each ramp's spectral
// magnitude is replaced by the window minimum (phase kept), then Doppler.
RdMap baseline_ramp_filter(const RMat& real_cube, const ChainConfig& cfg);

// Inverse of the oversample+pad stage on a padded unitary spectrum: back to
// time, strip the pads, resample down, return the unitary base-grid range
// spectrum.  Identity when padding is disabled.
CVec crop_spectrum(const CVec& padded_spec, const FrontendConfig& cfg, int n_base);

// 3-tap raised-cosine smoothing across range bins (circular, gain <= 1).
CVec lowpass3(const CVec& spec);

// Expected object locations on the RD grid, for evaluation.
struct GtCell {
  int range_bin = 0;
  int doppler_bin = 0;  // in DC-centred (shifted) coordinates
  double amplitude = 0.0;
};
std::vector<GtCell> ground_truth_cells(const FrameConfig& cfg, int n_range,
                                       int n_doppler);

}  // namespace imfrac
