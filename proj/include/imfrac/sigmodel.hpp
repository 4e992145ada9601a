#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imfrac/types.hpp"

namespace imfrac {

// One point echo: a complex tone in fast time whose phase advances by a fixed
// Doppler step from ramp to ramp (stop-and-hop model).
struct ObjectParams {
  double amplitude = 1.0;     // A > 0, linear
  double omega = 0.0;         // angular beat frequency, rad/s
  double phi = 0.0;           // initial phase, rad, in [0, 2*pi)
  double doppler_step = 0.0;  // phase increment per ramp, rad
};

// One uncoordinated FMCW interferer after dechirping in the victim receiver:
// a linear FM sweep that crosses the victim baseband around sample tau/t_s,
// limited to the ideal anti-aliasing bandwidth +-B around DC.
struct InterferenceParams {
  double amplitude = 1.0;  // A, linear
  double chirp_rate = 0.0; // k: relative sweep-slope difference, Hz/s, nonzero
  double tau = 0.0;        // baseband crossing delay, s
  double phi0 = 0.0;       // initial phase, rad (fallback when per-ramp empty)
  double bandwidth = 0.5;  // B: anti-aliasing one-sided bandwidth, Hz

  // Per-ramp controls filled by the dataset generator; empty vectors mean
  // "present on every ramp" / "phi0 everywhere".
  std::vector<std::uint8_t> present;
  std::vector<double> phi0_per_ramp;
};

// Everything needed to synthesise one frame deterministically.
struct FrameConfig {
  int n_fast = 1024;   // real-valued fast-time samples per ramp
  int n_ramps = 128;   // slow-time ramps
  double t_s = 1.0;    // fast-time sample interval, s (normalised units)
  double noise_power = 1.0;  // linear, E|w|^2
  std::vector<ObjectParams> objects;
  std::vector<InterferenceParams> interferers;
  std::uint64_t rng_seed = 0;
};

// A synthesised frame with its ground-truth decomposition kept alongside the
// composite.  `data` is assembled once at generation time and must equal the
// component sum bit-for-bit.
struct RadarCube {
  Eigen::MatrixXcd data;          // n_fast x n_ramps composite
  Eigen::MatrixXcd object;        // echo component
  Eigen::MatrixXcd interference;  // all interferers summed
  Eigen::MatrixXcd noise;
  FrameConfig config;

  // The receiver under study digitises the real part only.
  Eigen::MatrixXd real_composite() const { return data.real(); }
};

// Randomisation ranges for the synthetic study.  All draws derive from
// master_seed, one child stream per frame, so any frame can be regenerated
// in isolation and in parallel.
struct DatasetSpec {
  int n_fast = 1024;
  int n_ramps = 128;
  double t_s = 1.0;
  double noise_power = 1.0;

  int min_objects = 1;
  int max_objects = 5;
  double snr_db_min = 10.0;
  double snr_db_max = 30.0;

  int min_interferers = 1;
  int max_interferers = 3;
  double inr_db_min = 20.0;
  double inr_db_max = 40.0;
  // Sweep-angle magnitude range in the rotated-transform domain; the chirp
  // rate is derived so the digital-I/Q arm of the sweep lands at this angle.
  double angle_deg_min = 20.0;
  double angle_deg_max = 70.0;
  double bandwidth = 0.5;     // anti-aliasing bandwidth, cycles/sample
  double ramp_presence = 0.3; // fraction of ramps an interferer occupies

  // Geometry of the analysis frame the angles refer to (padded length and
  // oversampling factor of the mitigation front end).
  int analysis_n = 896;
  double analysis_oversample = 1.25;

  std::uint64_t master_seed = 1;
};

// Echo component: column r holds sum_i A_i exp(j(w_i n t_s + phi_i + r dphi_i)).
Eigen::MatrixXcd gen_objects(const FrameConfig& cfg);

// Interference component: each interferer evaluates
//   A exp(j(-2 pi k tau n t_s + pi k n^2 t_s^2 + phi0))
// on the open support (tau - B/k)/t_s < n < (tau + B/k)/t_s (endpoints swap
// for k < 0), clipped to [0, n_fast); zero elsewhere and on absent ramps.
// Throws if any interferer's clipped support is empty.
Eigen::MatrixXcd gen_interference(const FrameConfig& cfg);

// Circular white Gaussian noise with E|w|^2 = noise_power, fully determined
// by cfg.rng_seed.
Eigen::MatrixXcd gen_noise(const FrameConfig& cfg);

// Assemble one cube from an explicit config (components + bit-exact sum).
RadarCube gen_frame(const FrameConfig& cfg);

// Draw the config for frame `index` of the randomised study.
FrameConfig draw_frame_config(const DatasetSpec& spec, std::uint64_t index);

// Generate `count` cubes; frame i uses derive_seed(master_seed, i).
std::vector<RadarCube> gen_dataset(const DatasetSpec& spec, int count);

// Integer sample support of one interferer on an n_fast grid: [first, last]
// inclusive, empty when first > last.
std::pair<int, int> interference_support(const InterferenceParams& p, int n_fast,
                                         double t_s);

// Chirp rate k whose folded digital-I/Q image sweeps at transform angle
// `alpha` on an analysis frame of n_grid samples oversampled by `oversample`.
// The real-receiver chain halves the sample rate (I/Q decimation) and then
// interpolates by `oversample`, so the fast-time slope seen by the rotated
// transform is 4 * oversample^-2 * n_grid * k * t_s^2 bins per sample.
double chirp_rate_for_arm_angle(double alpha, double t_s, double oversample,
                                int n_grid);

// Stable FNV-1a hash of the spec's defining fields; reports print it so runs
// are attributable to an exact randomisation.
std::uint64_t spec_hash(const DatasetSpec& spec);

}  // namespace imfrac
