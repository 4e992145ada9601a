#include <doctest.h>

#include "imfrac/fft.hpp"
#include "imfrac/mitigation.hpp"
#include "imfrac/sigmodel.hpp"

using namespace imfrac;

namespace {

FrameConfig small_frame() {
  FrameConfig cfg;
  cfg.n_fast = 256;
  cfg.n_ramps = 4;
  cfg.noise_power = 0.0;
  return cfg;
}

}  // namespace

TEST_SUITE("sigmodel") {

TEST_CASE("a zero-frequency unit echo is an all-ones cube") {
  FrameConfig cfg = small_frame();
  cfg.objects.push_back({1.0, 0.0, 0.0, 0.0});
  const Eigen::MatrixXcd m = gen_objects(cfg);
  CHECK((m.array() - cplx{1.0, 0.0}).abs().maxCoeff() == 0.0);
}

TEST_CASE("an echo at a bin frequency peaks at that bin") {
  FrameConfig cfg = small_frame();
  cfg.objects.push_back({2.0, 2.0 * pi * 5.0 / 256.0, 0.3, 0.0});
  const Eigen::MatrixXcd m = gen_objects(cfg);
  const CVec spec = fft::unitary(m.col(0));
  int peak = 0;
  spec.cwiseAbs().maxCoeff(&peak);
  CHECK(peak == 5);
  CHECK(std::abs(spec[5]) == doctest::Approx(2.0 * 16.0).epsilon(1e-12));
}

TEST_CASE("echoes superpose linearly and advance by the Doppler step per ramp") {
  FrameConfig a = small_frame();
  a.objects.push_back({1.0, 0.7, 0.1, 0.4});
  FrameConfig b = small_frame();
  b.objects.push_back({0.5, 1.9, 2.0, -0.9});
  FrameConfig both = small_frame();
  both.objects = {a.objects[0], b.objects[0]};
  // same accumulation order as the generator's internal sum: bit-exact
  CHECK((gen_objects(both) - (gen_objects(a) + gen_objects(b))).cwiseAbs().maxCoeff() ==
        0.0);

  const Eigen::MatrixXcd m = gen_objects(a);
  const cplx step = std::polar(1.0, 0.4);
  CHECK((m.col(3) - m.col(2) * step).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("interference support arithmetic") {
  InterferenceParams p;
  p.chirp_rate = 2.0e-3;
  p.bandwidth = 0.5;
  p.tau = 500.0;  // mid-frame crossing
  auto [first, last] = interference_support(p, 1024, 1.0);
  // strict interval (500 - 250, 500 + 250) -> integers 251..749
  CHECK(first == 251);
  CHECK(last == 749);
  CHECK(last - first + 1 ==
        doctest::Approx(2.0 * p.bandwidth / (p.chirp_rate * 1.0)).epsilon(0.01));

  // negative rates swap the band-edge crossings but not the window
  p.chirp_rate = -2.0e-3;
  auto [f2, l2] = interference_support(p, 1024, 1.0);
  CHECK(f2 == first);
  CHECK(l2 == last);

  // clipping against the frame edges
  p.chirp_rate = 2.0e-3;
  p.tau = 100.0;
  auto [f3, l3] = interference_support(p, 1024, 1.0);
  CHECK(f3 == 0);
  CHECK(l3 == 349);

  // a window entirely before the frame is empty and rejected downstream
  p.tau = -400.0;
  auto [f4, l4] = interference_support(p, 1024, 1.0);
  CHECK(f4 > l4);
  FrameConfig cfg;
  cfg.interferers.push_back(p);
  CHECK_THROWS_AS(gen_interference(cfg), std::invalid_argument);
}

TEST_CASE("zero-amplitude interference is exactly zero") {
  FrameConfig cfg = small_frame();
  InterferenceParams p;
  p.amplitude = 0.0;
  p.chirp_rate = 1e-3;
  p.tau = 128.0;
  p.bandwidth = 0.5;
  cfg.interferers.push_back(p);
  CHECK(gen_interference(cfg).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the sweep rate measured from a short-time ridge matches the model") {
  FrameConfig cfg;
  cfg.n_fast = 1024;
  cfg.n_ramps = 1;
  cfg.noise_power = 0.0;
  InterferenceParams p;
  p.amplitude = 1.0;
  p.chirp_rate = 1.2e-3;
  p.tau = 512.0;
  p.phi0 = 0.7;
  p.bandwidth = 0.5;
  cfg.interferers.push_back(p);
  const Eigen::MatrixXcd m = gen_interference(cfg);

  // Hann-windowed peak-bin track, regressed against the window centre;
  // centres stay where the instantaneous frequency is well inside the band
  const int w = 64, hop = 16;
  std::vector<double> cs, fs;
  for (int c = 512 - 320; c <= 512 + 320; c += hop) {
    CVec seg(w);
    for (int i = 0; i < w; ++i)
      seg[i] = m(c - w / 2 + i, 0) * 0.5 * (1.0 - std::cos(2.0 * pi * i / w));
    const CVec spec = fft::unitary(seg);
    int b = 0;
    spec.cwiseAbs().maxCoeff(&b);
    cs.push_back(c);
    fs.push_back((b > w / 2 ? b - w : b) / static_cast<double>(w));
  }
  double sc = 0, sf = 0, scc = 0, scf = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    sc += cs[i];
    sf += fs[i];
    scc += cs[i] * cs[i];
    scf += cs[i] * fs[i];
  }
  const double n = static_cast<double>(cs.size());
  const double slope = (n * scf - sc * sf) / (n * scc - sc * sc);
  CHECK(std::abs(slope - p.chirp_rate) / p.chirp_rate < 0.05);

  // the instantaneous frequency crosses DC at tau/t_s: the ridge bin there is 0
  CVec seg(w);
  for (int i = 0; i < w; ++i)
    seg[i] = m(512 - w / 2 + i, 0) * 0.5 * (1.0 - std::cos(2.0 * pi * i / w));
  int b0 = 0;
  fft::unitary(seg).cwiseAbs().maxCoeff(&b0);
  CHECK(std::min(b0, w - b0) <= 1);
}

TEST_CASE("per-ramp presence flags and phases are honoured") {
  FrameConfig cfg = small_frame();
  InterferenceParams p;
  p.amplitude = 1.0;
  p.chirp_rate = 4e-3;
  p.tau = 128.0;
  p.bandwidth = 0.5;
  p.present = {1, 0, 1, 0};
  p.phi0_per_ramp = {0.0, 0.0, 1.3, 0.0};
  cfg.interferers.push_back(p);
  const Eigen::MatrixXcd m = gen_interference(cfg);
  CHECK(m.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.col(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.col(0).cwiseAbs().maxCoeff() > 0.0);
  // a per-ramp phase rotates the whole ramp rigidly
  CHECK((m.col(2) - m.col(0) * std::polar(1.0, 1.3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noise is seeded, sized, and at the configured power") {
  FrameConfig cfg = small_frame();
  cfg.noise_power = 0.0;
  CHECK(gen_noise(cfg).cwiseAbs().maxCoeff() == 0.0);

  cfg.noise_power = 1.0;
  cfg.n_fast = 1024;
  cfg.n_ramps = 1024;  // ~1e6 draws: sample power within 1%
  cfg.rng_seed = 99;
  const Eigen::MatrixXcd a = gen_noise(cfg);
  CHECK(a.squaredNorm() / (1024.0 * 1024.0) == doctest::Approx(1.0).epsilon(0.01));
  const Eigen::MatrixXcd b = gen_noise(cfg);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  cfg.rng_seed = 100;
  CHECK((a - gen_noise(cfg)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("cube decomposition is exact and the real view is Hermite-symmetric") {
  DatasetSpec spec;
  spec.n_fast = 512;
  spec.n_ramps = 8;
  spec.master_seed = 7;
  const RadarCube cube = gen_frame(draw_frame_config(spec, 3));
  CHECK(cube.data.rows() == 512);
  CHECK(cube.data.cols() == 8);
  // bit-level: the composite is assembled from exactly these three terms
  const Eigen::MatrixXcd sum = cube.object + cube.interference + cube.noise;
  CHECK((cube.data - sum).cwiseAbs().maxCoeff() == 0.0);

  // spectrum of the real part mirrors onto its own conjugate
  const Eigen::MatrixXd re = cube.real_composite();
  const CVec spec0 = fft::unitary(re.col(0).cast<cplx>());
  double worst = 0.0;
  for (int k = 0; k < 512; ++k)
    worst = std::max(worst,
                     std::abs(spec0[k] - std::conj(spec0[(512 - k) % 512])));
  CHECK(worst < 1e-10);
}

TEST_CASE("dataset draws stay inside the commanded ranges") {
  DatasetSpec spec;
  spec.n_fast = 1024;
  spec.n_ramps = 32;
  spec.master_seed = 21;
  const double k_lo =
      std::abs(chirp_rate_for_arm_angle(deg2rad(70.0), 1.0, 1.25, 896));
  const double k_hi =
      std::abs(chirp_rate_for_arm_angle(deg2rad(20.0), 1.0, 1.25, 896));
  for (std::uint64_t f = 0; f < 12; ++f) {
    const FrameConfig cfg = draw_frame_config(spec, f);
    CHECK(cfg.objects.size() >= 1);
    CHECK(cfg.objects.size() <= 5);
    CHECK(cfg.interferers.size() >= 1);
    CHECK(cfg.interferers.size() <= 3);
    for (const ObjectParams& o : cfg.objects) {
      const double snr = 20.0 * std::log10(o.amplitude);
      CHECK(snr >= 10.0);
      CHECK(snr <= 30.0);
      const double f_cyc = o.omega / (2.0 * pi);
      CHECK(f_cyc >= 0.02);
      CHECK(f_cyc <= 0.47);
    }
    for (const InterferenceParams& p : cfg.interferers) {
      const double inr = 20.0 * std::log10(p.amplitude);
      CHECK(inr >= 20.0);
      CHECK(inr <= 40.0);
      CHECK(std::abs(p.chirp_rate) >= k_lo * 0.999);
      CHECK(std::abs(p.chirp_rate) <= k_hi * 1.001);
      CHECK(p.tau >= 0.0);
      CHECK(p.tau <= 1023.0);
      int hits = 0;
      for (auto v : p.present) hits += v;
      CHECK(hits >= 1);  // an interferer always occupies at least one ramp
      CHECK(p.phi0_per_ramp.size() == 32);
    }
  }
}

TEST_CASE("datasets are reproducible and interferer-free when commanded") {
  DatasetSpec spec;
  spec.n_fast = 256;
  spec.n_ramps = 4;
  spec.master_seed = 5;
  const auto d1 = gen_dataset(spec, 3);
  const auto d2 = gen_dataset(spec, 3);
  REQUIRE(d1.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK((d1[static_cast<std::size_t>(i)].data - d2[static_cast<std::size_t>(i)].data)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  // frame i alone reproduces frame i of the batch
  const RadarCube solo = gen_frame(draw_frame_config(spec, 1));
  CHECK((solo.data - d1[1].data).cwiseAbs().maxCoeff() == 0.0);

  spec.min_interferers = 0;
  spec.max_interferers = 0;
  const auto clean = gen_dataset(spec, 2);
  for (const RadarCube& c : clean) {
    CHECK(c.interference.cwiseAbs().maxCoeff() == 0.0);
    CHECK((c.data - (c.object + c.noise)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("invalid randomisation ranges are rejected") {
  DatasetSpec spec;
  spec.min_objects = 4;
  spec.max_objects = 2;
  CHECK_THROWS_AS(draw_frame_config(spec, 0), std::invalid_argument);
  spec = DatasetSpec{};
  spec.inr_db_min = 50.0;
  CHECK_THROWS_AS(draw_frame_config(spec, 0), std::invalid_argument);
  spec = DatasetSpec{};
  spec.angle_deg_max = 95.0;
  CHECK_THROWS_AS(draw_frame_config(spec, 0), std::invalid_argument);
  spec = DatasetSpec{};
  spec.ramp_presence = 0.0;
  CHECK_THROWS_AS(draw_frame_config(spec, 0), std::invalid_argument);
}

TEST_CASE("the spec hash separates distinct randomisations") {
  DatasetSpec a;
  DatasetSpec b;
  CHECK(spec_hash(a) == spec_hash(b));
  b.master_seed = 2;
  CHECK(spec_hash(a) != spec_hash(b));
  b = a;
  b.inr_db_max = 41.0;
  CHECK(spec_hash(a) != spec_hash(b));
}

TEST_CASE("arm-angle chirp rates follow the documented conversion") {
  const double k = chirp_rate_for_arm_angle(pi / 4.0, 1.0, 1.25, 896);
  CHECK(k == doctest::Approx(slope_for_angle(pi / 4.0) * 1.25 * 1.25 / (4.0 * 896.0)));
  // steeper transform angles (closer to the tone row) mean slower sweeps
  CHECK(std::abs(chirp_rate_for_arm_angle(deg2rad(70.0), 1.0, 1.25, 896)) <
        std::abs(chirp_rate_for_arm_angle(deg2rad(20.0), 1.0, 1.25, 896)));
  // opposite-sign angles sweep the opposite way
  CHECK(chirp_rate_for_arm_angle(deg2rad(-40.0), 1.0, 1.25, 896) ==
        doctest::Approx(-chirp_rate_for_arm_angle(deg2rad(40.0), 1.0, 1.25, 896)));
}

}  // TEST_SUITE
