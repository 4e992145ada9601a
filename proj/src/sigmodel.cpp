#include "imfrac/sigmodel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "imfrac/io.hpp"
#include "imfrac/mitigation.hpp"
#include "imfrac/rng.hpp"

namespace imfrac {

namespace {

void check_frame(const FrameConfig& cfg) {
  if (cfg.n_fast <= 0 || cfg.n_ramps <= 0)
    throw std::invalid_argument("sigmodel: frame dimensions must be positive");
  if (cfg.t_s <= 0.0) throw std::invalid_argument("sigmodel: t_s must be positive");
  if (cfg.noise_power < 0.0)
    throw std::invalid_argument("sigmodel: noise power must be nonnegative");
  for (const ObjectParams& o : cfg.objects)
    if (o.amplitude <= 0.0)
      throw std::invalid_argument("sigmodel: object amplitude must be positive");
  for (const InterferenceParams& p : cfg.interferers) {
    if (p.chirp_rate == 0.0)
      throw std::invalid_argument("sigmodel: chirp rate must be nonzero");
    if (p.bandwidth <= 0.0)
      throw std::invalid_argument("sigmodel: bandwidth must be positive");
    if (!p.present.empty() &&
        p.present.size() != static_cast<std::size_t>(cfg.n_ramps))
      throw std::invalid_argument("sigmodel: presence flags must cover all ramps");
    if (!p.phi0_per_ramp.empty() &&
        p.phi0_per_ramp.size() != static_cast<std::size_t>(cfg.n_ramps))
      throw std::invalid_argument("sigmodel: per-ramp phases must cover all ramps");
  }
}

}  // namespace

Eigen::MatrixXcd gen_objects(const FrameConfig& cfg) {
  check_frame(cfg);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cfg.n_fast, cfg.n_ramps);
  for (const ObjectParams& o : cfg.objects)
    for (int r = 0; r < cfg.n_ramps; ++r) {
      const double ramp_phase = o.phi + o.doppler_step * r;
      for (int n = 0; n < cfg.n_fast; ++n)
        m(n, r) += std::polar(o.amplitude, o.omega * n * cfg.t_s + ramp_phase);
    }
  return m;
}

std::pair<int, int> interference_support(const InterferenceParams& p, int n_fast,
                                         double t_s) {
  // open interval between the two band-edge crossings; k < 0 swaps the ends
  const double e0 = (p.tau - p.bandwidth / p.chirp_rate) / t_s;
  const double e1 = (p.tau + p.bandwidth / p.chirp_rate) / t_s;
  const double lo = std::min(e0, e1);
  const double hi = std::max(e0, e1);
  int first = static_cast<int>(std::floor(lo)) + 1;
  int last = static_cast<int>(std::ceil(hi)) - 1;
  first = std::max(first, 0);
  last = std::min(last, n_fast - 1);
  return {first, last};
}

Eigen::MatrixXcd gen_interference(const FrameConfig& cfg) {
  check_frame(cfg);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cfg.n_fast, cfg.n_ramps);
  for (const InterferenceParams& p : cfg.interferers) {
    const auto [first, last] = interference_support(p, cfg.n_fast, cfg.t_s);
    if (first > last)
      throw std::invalid_argument(
          "sigmodel: interferer support does not intersect the frame");
    for (int r = 0; r < cfg.n_ramps; ++r) {
      if (!p.present.empty() && !p.present[static_cast<std::size_t>(r)]) continue;
      const double phi0 =
          p.phi0_per_ramp.empty() ? p.phi0 : p.phi0_per_ramp[static_cast<std::size_t>(r)];
      for (int n = first; n <= last; ++n) {
        const double t = n * cfg.t_s;
        const double phase =
            -2.0 * pi * p.chirp_rate * p.tau * t + pi * p.chirp_rate * t * t + phi0;
        m(n, r) += std::polar(p.amplitude, phase);
      }
    }
  }
  return m;
}

Eigen::MatrixXcd gen_noise(const FrameConfig& cfg) {
  check_frame(cfg);
  Rng rng(cfg.rng_seed);
  Eigen::MatrixXcd m(cfg.n_fast, cfg.n_ramps);
  // column-by-column fill order is part of the determinism contract
  for (int r = 0; r < cfg.n_ramps; ++r)
    for (int n = 0; n < cfg.n_fast; ++n) m(n, r) = rng.cnormal(cfg.noise_power);
  return m;
}

RadarCube gen_frame(const FrameConfig& cfg) {
  RadarCube cube;
  cube.config = cfg;
  cube.object = gen_objects(cfg);
  cube.interference = gen_interference(cfg);
  cube.noise = gen_noise(cfg);
  cube.data = cube.object + cube.interference + cube.noise;
  return cube;
}

double chirp_rate_for_arm_angle(double alpha, double t_s, double oversample,
                                int n_grid) {
  // transform-grid slope (bins/sample on the padded frame) back through the
  // x1/oversample interpolation and the x2 I/Q decimation to a physical rate
  const double grid_slope = slope_for_angle(alpha);                 // bins/sample
  const double padded = grid_slope / n_grid;                        // cycles/sample^2
  const double decimated = padded * oversample * oversample;
  return decimated / 4.0 / (t_s * t_s);
}

FrameConfig draw_frame_config(const DatasetSpec& spec, std::uint64_t index) {
  if (spec.min_objects < 0 || spec.max_objects < spec.min_objects ||
      spec.min_interferers < 0 || spec.max_interferers < spec.min_interferers)
    throw std::invalid_argument("sigmodel: invalid count ranges");
  if (spec.snr_db_max < spec.snr_db_min || spec.inr_db_max < spec.inr_db_min ||
      spec.angle_deg_max < spec.angle_deg_min)
    throw std::invalid_argument("sigmodel: invalid level ranges");
  if (spec.angle_deg_min <= 0.0 || spec.angle_deg_max >= 90.0)
    throw std::invalid_argument("sigmodel: angles must lie strictly in (0, 90) deg");
  if (spec.ramp_presence <= 0.0 || spec.ramp_presence > 1.0)
    throw std::invalid_argument("sigmodel: ramp presence must be in (0, 1]");

  FrameConfig cfg;
  cfg.n_fast = spec.n_fast;
  cfg.n_ramps = spec.n_ramps;
  cfg.t_s = spec.t_s;
  cfg.noise_power = spec.noise_power;
  cfg.rng_seed = derive_seed(spec.master_seed, index);
  Rng rng(cfg.rng_seed);
  const double sigma = std::sqrt(spec.noise_power);

  // the draw order below is frozen: changing it changes every dataset
  const int n_obj = rng.uniform_int(spec.min_objects, spec.max_objects);
  for (int i = 0; i < n_obj; ++i) {
    ObjectParams o;
    o.amplitude = sigma * std::pow(10.0, rng.uniform(spec.snr_db_min, spec.snr_db_max) / 20.0);
    // beat frequency inside the real receiver band, clear of the DC notch
    const double f = rng.uniform(0.02, 0.47);  // cycles/sample
    o.omega = 2.0 * pi * f / spec.t_s;
    o.phi = rng.uniform(0.0, 2.0 * pi);
    o.doppler_step = rng.uniform(-pi, pi);
    cfg.objects.push_back(o);
  }

  const int n_int = rng.uniform_int(spec.min_interferers, spec.max_interferers);
  for (int i = 0; i < n_int; ++i) {
    InterferenceParams p;
    p.amplitude = sigma * std::pow(10.0, rng.uniform(spec.inr_db_min, spec.inr_db_max) / 20.0);
    double alpha = deg2rad(rng.uniform(spec.angle_deg_min, spec.angle_deg_max));
    if (rng.bernoulli(0.5)) alpha = -alpha;
    p.chirp_rate = chirp_rate_for_arm_angle(alpha, spec.t_s, spec.analysis_oversample,
                                            spec.analysis_n);
    p.tau = rng.uniform(0.0, (spec.n_fast - 1) * spec.t_s);
    p.phi0 = rng.uniform(0.0, 2.0 * pi);
    p.bandwidth = spec.bandwidth;
    p.present.resize(static_cast<std::size_t>(spec.n_ramps));
    int hits = 0;
    for (int r = 0; r < spec.n_ramps; ++r) {
      p.present[static_cast<std::size_t>(r)] = rng.bernoulli(spec.ramp_presence) ? 1 : 0;
      hits += p.present[static_cast<std::size_t>(r)];
    }
    if (hits == 0) p.present[static_cast<std::size_t>(rng.uniform_int(0, spec.n_ramps - 1))] = 1;
    p.phi0_per_ramp.resize(static_cast<std::size_t>(spec.n_ramps));
    for (int r = 0; r < spec.n_ramps; ++r)
      p.phi0_per_ramp[static_cast<std::size_t>(r)] = rng.uniform(0.0, 2.0 * pi);
    cfg.interferers.push_back(p);
  }
  return cfg;
}

std::vector<RadarCube> gen_dataset(const DatasetSpec& spec, int count) {
  if (count < 0) throw std::invalid_argument("sigmodel: negative frame count");
  std::vector<RadarCube> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(gen_frame(draw_frame_config(spec, static_cast<std::uint64_t>(i))));
  return out;
}

std::uint64_t spec_hash(const DatasetSpec& spec) {
  char buf[640];
  const int len = std::snprintf(
      buf, sizeof buf,
      "%d|%d|%.17g|%.17g|%d|%d|%.17g|%.17g|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d|%.17g|%llu",
      spec.n_fast, spec.n_ramps, spec.t_s, spec.noise_power, spec.min_objects,
      spec.max_objects, spec.snr_db_min, spec.snr_db_max, spec.min_interferers,
      spec.max_interferers, spec.inr_db_min, spec.inr_db_max, spec.angle_deg_min,
      spec.angle_deg_max, spec.bandwidth, spec.ramp_presence, spec.analysis_n,
      spec.analysis_oversample,
      static_cast<unsigned long long>(spec.master_seed));
  return io::fnv1a(std::string_view(buf, static_cast<std::size_t>(len)));
}

}  // namespace imfrac
