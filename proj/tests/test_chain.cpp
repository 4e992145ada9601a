#include <doctest.h>

#include "imfrac/chain.hpp"
#include "imfrac/fft.hpp"
#include "imfrac/rng.hpp"

using namespace imfrac;

namespace {

// scaled geometry: 512 real samples -> 256 I/Q -> 448 padded, 128 angles
ChainConfig scaled_config() {
  ChainConfig cfg;
  cfg.frontend.zero_pad = 64;
  cfg.imfrac.m_angles = 128;
  cfg.imfrac.detector.g = 8;
  return cfg;
}

const ChainContext& scaled_context() {
  static ChainContext ctx = make_chain_context(scaled_config(), 512);
  return ctx;
}

// frame spec for the scaled geometry with one mid-frame interferer
FrameConfig scaled_frame(double inr_db, double angle_deg, std::uint64_t seed) {
  FrameConfig cfg;
  cfg.n_fast = 512;
  cfg.n_ramps = 16;
  cfg.noise_power = 1e-4;
  cfg.rng_seed = seed;

  ObjectParams o;
  o.amplitude = 1.0;
  o.omega = 2.0 * pi * 0.15;  // bin 77 of 256 after demodulation
  o.phi = 0.4;
  o.doppler_step = 2.0 * pi * 3.0 / 16.0;  // Doppler bin +3
  cfg.objects.push_back(o);

  if (inr_db > 0.0) {
    InterferenceParams p;
    p.amplitude = 1e-2 * std::pow(10.0, inr_db / 20.0);
    p.chirp_rate = chirp_rate_for_arm_angle(deg2rad(angle_deg), 1.0, 1.25, 448);
    p.tau = 256.0;
    p.phi0 = 1.0;
    p.bandwidth = 0.5;
    cfg.interferers.push_back(p);
  }
  return cfg;
}

int peak_row(const CMat& m, int* col = nullptr) {
  int r = 0, c = 0;
  m.cwiseAbs().maxCoeff(&r, &c);
  if (col) *col = c;
  return r;
}

double offpeak_energy(const CMat& m, const std::vector<GtCell>& gt, int halo) {
  double acc = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      bool near = false;
      for (const GtCell& c : gt)
        near = near || (std::abs(i - c.range_bin) <= halo &&
                        std::abs(j - c.doppler_bin) <= halo);
      if (!near) acc += std::norm(m(i, j));
    }
  return acc;
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("reference chain puts a static object at its bin and DC Doppler") {
  const int n = 256, ramps = 8;
  CMat iq(n, ramps);
  for (int r = 0; r < ramps; ++r)
    for (int i = 0; i < n; ++i) iq(i, r) = std::polar(1.0, 2.0 * pi * 77.0 * i / n);
  ChainConfig cfg;
  const RdMap m = process_reference(iq, cfg);
  REQUIRE(m.map.rows() == n);
  REQUIRE(m.map.cols() == ramps);
  int col = 0;
  CHECK(peak_row(m.map, &col) == 77);
  CHECK(col == ramps / 2);  // DC column is centred
  CHECK(m.provenance == "reference");
  CHECK(m.config_hash == chain_config_hash(cfg));

  const RdMap z = process_reference(CMat::Zero(n, ramps), cfg);
  CHECK(z.map.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lowpass3 is the documented kernel and never adds energy") {
  CVec impulse = CVec::Zero(16);
  impulse[5] = 2.0;
  const CVec out = lowpass3(impulse);
  CHECK(out[4] == cplx{0.5, 0.0});
  CHECK(out[5] == cplx{1.0, 0.0});
  CHECK(out[6] == cplx{0.5, 0.0});
  CHECK(std::abs(out.squaredNorm() - 1.5) < 1e-12);

  CHECK(lowpass3(CVec::Zero(8)).cwiseAbs().maxCoeff() == 0.0);
  Rng rng(4);
  CVec x(64);
  for (int i = 0; i < 64; ++i) x[i] = rng.cnormal(1.0);
  CHECK(lowpass3(x).norm() <= x.norm() + 1e-12);
}

TEST_CASE("crop inverts the oversample+pad stage on the base grid") {
  FrontendConfig fe;
  fe.zero_pad = 64;  // 256 -> 320 -> 448
  const int n_base = 256;
  CVec tone(n_base);
  for (int i = 0; i < n_base; ++i) tone[i] = std::polar(1.0, 2.0 * pi * 60.0 * i / n_base);

  const CVec padded_spec = fft::unitary(oversample_pad(tone, fe));
  const CVec rs = crop_spectrum(padded_spec, fe, n_base);
  REQUIRE(rs.size() == n_base);

  // same bin and amplitude as the unpadded windowed chain
  const RVec w = window_vector("hann", n_base);
  const CVec direct = fft::unitary(tone.cwiseProduct(w.cast<cplx>()));
  int pa = 0, pb = 0;
  rs.cwiseAbs().maxCoeff(&pa);
  direct.cwiseAbs().maxCoeff(&pb);
  CHECK(pa == pb);
  CHECK((rs - direct).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(crop_spectrum(CVec::Zero(448), fe, n_base).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(crop_spectrum(CVec::Zero(449), fe, n_base), std::invalid_argument);
  fe.pad_enabled = false;
  CVec spec = fft::unitary(tone);
  CHECK((crop_spectrum(spec, fe, n_base) - spec).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(crop_spectrum(CVec::Zero(448), fe, n_base), std::invalid_argument);
}

TEST_CASE("padded plumbing commutes with the standard chain on in-band frames") {
  // random content strictly inside the usable band (clear of both the DC
  // notch and the I/Q Nyquist bin, where the resampler folds); mitigation
  // disabled so the only difference is pad -> transform -> crop
  const int n2 = 512, ramps = 4;
  Rng rng(17);
  RMat cube(n2, ramps);
  for (int r = 0; r < ramps; ++r) {
    CVec spec = CVec::Zero(n2);
    for (int k = 8; k < 125; ++k) spec[k] = rng.cnormal(1.0);
    for (int k = 132; k < 250; ++k) spec[k] = rng.cnormal(1.0);
    const CVec z = fft::inverse(spec) / static_cast<double>(n2);
    cube.col(r) = z.real();
  }

  ChainConfig cfg = scaled_config();
  cfg.mitigation_enabled = false;
  ChainContext ctx = scaled_context();
  ctx.cfg = cfg;

  const RdMap via_pad = process_imfrac(ctx, cube);
  const RdMap direct = process_reference(
      iq_cube(cube, true, cfg.frontend.highpass_cutoff), cfg);
  REQUIRE(via_pad.map.rows() == direct.map.rows());
  const double scale = direct.map.cwiseAbs().maxCoeff();
  CHECK((via_pad.map - direct.map).cwiseAbs().maxCoeff() / scale < 1e-9);
  CHECK(via_pad.total_detections == 0);
  CHECK(via_pad.converged);
}

TEST_CASE("interference-free frames pass through the mitigation chain unharmed") {
  FrameConfig fc = scaled_frame(0.0, 0.0, 31);
  const RadarCube cube = gen_frame(fc);
  const ChainContext& ctx = scaled_context();

  const RdMap mit = process_imfrac(ctx, cube.real_composite());
  const RdMap ref = process_reference(iq_cube(cube.real_composite(), false),
                                      ctx.cfg);
  int ca = 0, cb = 0;
  const int ra = peak_row(mit.map, &ca);
  const int rb = peak_row(ref.map, &cb);
  CHECK(ra == rb);
  CHECK(ca == cb);
  const double da = 20.0 * std::log10(std::abs(mit.map(ra, ca)) /
                                      std::abs(ref.map(rb, cb)));
  CHECK(std::abs(da) < 0.5);
  CHECK(mit.provenance == "imfrac");

  // the commanded object location matches the ground-truth bookkeeping
  const auto gt = ground_truth_cells(fc, 256, 16);
  REQUIRE(gt.size() == 1);
  CHECK(gt[0].range_bin == ra);
  CHECK(gt[0].doppler_bin == ca);
}

TEST_CASE("a V-sweep interferer is suppressed by the mitigation chain") {
  FrameConfig fc = scaled_frame(40.0, 40.0, 77);
  // interference on half the ramps
  fc.interferers[0].present.assign(16, 0);
  for (int r = 0; r < 16; r += 2) fc.interferers[0].present[static_cast<std::size_t>(r)] = 1;
  const RadarCube cube = gen_frame(fc);
  const ChainContext& ctx = scaled_context();

  const RdMap dirty = process_none(cube.real_composite(), ctx.cfg);
  const RdMap mit = process_imfrac(ctx, cube.real_composite());
  const auto gt = ground_truth_cells(fc, 256, 16);

  // off-object energy (dominated by the interference floor) drops by >6 dB
  const double before = offpeak_energy(dirty.map, gt, 2);
  const double after = offpeak_energy(mit.map, gt, 2);
  CHECK(10.0 * std::log10(before / after) > 6.0);

  // detections fire on the interfered ramps and nowhere else
  CHECK(mit.ramps_mitigated >= 7);
  CHECK(mit.ramps_mitigated <= 8);
  CHECK(mit.converged);

  // the object is still where it belongs
  int col = 0;
  const int row = peak_row(mit.map, &col);
  CHECK(row == gt[0].range_bin);
  CHECK(col == gt[0].doppler_bin);
}

TEST_CASE("oracle targeting drives the same chain without thresholds") {
  FrameConfig fc = scaled_frame(35.0, -50.0, 78);
  fc.interferers[0].present.assign(16, 0);
  for (int r = 4; r < 12; ++r) fc.interferers[0].present[static_cast<std::size_t>(r)] = 1;
  const RadarCube cube = gen_frame(fc);
  const ChainContext& ctx = scaled_context();

  const RdMap dirty = process_none(cube.real_composite(), ctx.cfg);
  const RdMap mit = process_imfrac_oracle(ctx, cube);
  CHECK(mit.provenance == "imfrac-oracle");
  CHECK(mit.converged);
  CHECK(mit.ramps_mitigated > 0);

  const auto gt = ground_truth_cells(fc, 256, 16);
  const double before = offpeak_energy(dirty.map, gt, 2);
  const double after = offpeak_energy(mit.map, gt, 2);
  CHECK(10.0 * std::log10(before / after) > 6.0);

  // interference-free ramps are left untouched: no targets exist there
  CHECK(mit.ramps_mitigated <= 8);
}

TEST_CASE("envelope flags catch a strong burst and zeroing baselines run") {
  // a fast sweep dwells briefly: its support covers a minority of the frame,
  // which is the regime an envelope change-point detector can see
  FrameConfig fc;
  fc.n_fast = 512;
  fc.n_ramps = 16;
  fc.noise_power = 1e-4;
  fc.rng_seed = 79;
  fc.objects.push_back({0.1, 2.0 * pi * 0.15, 0.4, 2.0 * pi * 3.0 / 16.0});
  InterferenceParams burst;
  burst.amplitude = 1.0;  // INR 40 dB
  burst.chirp_rate = 5e-3;
  burst.tau = 256.0;
  burst.phi0 = 1.0;
  burst.bandwidth = 0.5;
  fc.interferers.push_back(burst);
  const RadarCube cube = gen_frame(fc);

  // flags vs ground-truth support (every ramp carries the burst)
  const auto [first, last] =
      interference_support(fc.interferers[0], fc.n_fast, fc.t_s);
  REQUIRE(last - first + 1 < 256);  // minority support
  const RMat real = cube.real_composite();
  const auto flags = envelope_flags(real.col(0), 16, 5.0);
  int caught = 0;
  for (int i = first; i <= last; ++i) caught += flags[static_cast<std::size_t>(i)];
  CHECK(static_cast<double>(caught) / (last - first + 1) >= 0.9);

  const ChainConfig cfg = scaled_config();
  const RdMap oracle = baseline_zeroing(cube, true, cfg);
  const RdMap env = baseline_zeroing(cube, false, cfg);
  CHECK(oracle.provenance == "zeroing-oracle");
  CHECK(env.provenance == "zeroing");

  const RdMap dirty = process_none(real, cfg);
  const auto gt = ground_truth_cells(fc, 256, 16);
  CHECK(offpeak_energy(oracle.map, gt, 2) < offpeak_energy(dirty.map, gt, 2));

  // interference-free frame: oracle zeroing changes nothing
  const RadarCube clean = gen_frame(scaled_frame(0.0, 0.0, 80));
  const RdMap a = baseline_zeroing(clean, true, cfg);
  const RdMap b = process_none(clean.real_composite(), cfg);
  CHECK((a.map - b.map).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ramp filter reverts a single contaminated ramp and keeps statics") {
  ChainConfig cfg;
  const int n2 = 512, ramps = 6;
  RMat cube(n2, ramps);
  for (int r = 0; r < ramps; ++r)
    for (int i = 0; i < n2; ++i)
      cube(i, r) = std::cos(2.0 * pi * 0.15 * i + 0.2);

  // constant slow-time: the sliding minimum changes nothing
  const CMat rs_plain = CMat::Zero(1, 1);
  const RdMap plain = baseline_ramp_filter(cube, cfg);
  const RdMap none = process_none(cube, cfg);
  CHECK((plain.map - none.map).cwiseAbs().maxCoeff() <
        1e-9 * none.map.cwiseAbs().maxCoeff());

  // corrupt one ramp with a burst; the filtered map recovers the clean level
  RMat dirty = cube;
  for (int i = 200; i < 280; ++i) dirty(i, 3) += 40.0 * std::cos(2.0 * pi * 0.31 * i);
  const RdMap filt = baseline_ramp_filter(dirty, cfg);
  const RdMap raw = process_none(dirty, cfg);
  int col = 0;
  const int row = peak_row(none.map, &col);
  const double clean_amp = std::abs(none.map(row, col));
  CHECK(std::abs(filt.map(row, col)) ==
        doctest::Approx(clean_amp).epsilon(0.05));
  // and strips the burst's off-peak energy relative to the raw map
  std::vector<GtCell> gt{{row, col, 1.0}};
  CHECK(offpeak_energy(filt.map, gt, 2) < 0.5 * offpeak_energy(raw.map, gt, 2));

  CHECK_THROWS_AS(baseline_ramp_filter(cube.leftCols(2), cfg), std::invalid_argument);
}

TEST_CASE("ground-truth cells follow the demodulated geometry") {
  FrameConfig fc;
  fc.n_fast = 512;
  fc.n_ramps = 16;
  ObjectParams o;
  o.amplitude = 3.0;
  o.omega = 2.0 * pi * 0.25;       // bin 128 of 256
  o.doppler_step = -2.0 * pi / 8.0;  // bin -2 -> column 6 when centred
  fc.objects.push_back(o);
  const auto cells = ground_truth_cells(fc, 256, 16);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].range_bin == 128);
  CHECK(cells[0].doppler_bin == 6);
  CHECK(cells[0].amplitude == 3.0);
}

}  // TEST_SUITE
