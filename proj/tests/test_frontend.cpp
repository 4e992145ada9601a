#include <doctest.h>

#include "imfrac/emdfrft.hpp"
#include "imfrac/fft.hpp"
#include "imfrac/frontend.hpp"
#include "imfrac/rng.hpp"

using namespace imfrac;

TEST_SUITE("frontend") {

TEST_CASE("an in-band cosine demodulates to a unit complex exponential") {
  const int n2 = 1024, n = 512, bin = 40;
  RVec s(n2);
  const double phase0 = 0.35;
  for (int i = 0; i < n2; ++i)
    s[i] = std::cos(2.0 * pi * bin * i / n2 + phase0);
  const CVec y = digital_iq(s);
  REQUIRE(y.size() == n);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst,
                     std::abs(y[i] - std::polar(1.0, 2.0 * pi * bin * i / n + phase0)));
  CHECK(worst < 1e-9);
}

TEST_CASE("upper-sideband constructions are recovered at every second sample") {
  // z carries random content strictly inside bins 1..N-1 of the double-rate
  // grid (no DC, no Nyquist); the real part alone must reproduce z[2i]
  const int n2 = 256, n = 128;
  Rng rng(11);
  CVec spec = CVec::Zero(n2);
  for (int k = 1; k < n; ++k) spec[k] = rng.cnormal(1.0);
  const CVec z = fft::inverse(spec) / static_cast<double>(n2);
  const CVec y = digital_iq(z.real());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] - z[2 * i]));
  CHECK(worst < 1e-9);

  // amplitudes of individual in-band components survive unchanged
  RVec two(n2);
  for (int i = 0; i < n2; ++i)
    two[i] = 0.7 * std::cos(2.0 * pi * 30 * i / n2) +
             1.9 * std::cos(2.0 * pi * 77 * i / n2 + 1.1);
  const CVec spec2 = fft::unitary(digital_iq(two));
  CHECK(std::abs(spec2[30]) * std::sqrt(1.0 / n) == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(std::abs(spec2[77]) * std::sqrt(1.0 / n) == doctest::Approx(1.9).epsilon(1e-6));
}

TEST_CASE("digital iq rejects odd lengths and passes zero through") {
  CHECK_THROWS_AS(digital_iq(RVec::Zero(101)), std::invalid_argument);
  const CVec y = digital_iq(RVec::Zero(64));
  CHECK(y.size() == 32);
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dc suppression notches DC and leaves the passband flat") {
  const int n = 512;
  // DC constant: residual energy at least 60 dB down (here: exactly zero)
  const CVec dc = dc_suppress(CVec::Ones(n));
  CHECK(dc.squaredNorm() <= 1e-6 * static_cast<double>(n));

  // tone at 25% of the band: amplitude within 0.1 dB
  CVec tone(n);
  for (int i = 0; i < n; ++i) tone[i] = std::polar(1.0, 2.0 * pi * 64.0 * i / n);
  const CVec out = dc_suppress(tone);
  const double db = 20.0 * std::log10(out.norm() / tone.norm());
  CHECK(std::abs(db) < 0.1);

  // everything at or above twice the cutoff is untouched, not just flat
  CVec edge(n);
  for (int i = 0; i < n; ++i) edge[i] = std::polar(2.0, 2.0 * pi * 18.0 * i / n);
  CHECK((dc_suppress(edge) - edge).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(dc_suppress(CVec::Zero(n)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(dc_suppress(tone, 0.0), std::invalid_argument);
}

TEST_CASE("rational resampling rescales tone frequencies and keeps amplitudes") {
  const int n = 512;
  CVec tone(n);
  for (int i = 0; i < n; ++i) tone[i] = std::polar(1.3, 2.0 * pi * 40.0 * i / n + 0.2);
  const CVec up = resample_rational(tone, 5, 4);
  REQUIRE(up.size() == 640);
  double worst = 0.0;
  for (int i = 0; i < 640; ++i)
    worst = std::max(worst,
                     std::abs(up[i] - std::polar(1.3, 2.0 * pi * 40.0 * i / 640 + 0.2)));
  CHECK(worst < 1e-9);

  // downsampling back is the identity for band-limited content
  const CVec back = resample_rational(up, 4, 5);
  CHECK((back - tone).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(resample_rational(CVec::Ones(510), 5, 4), std::invalid_argument);
  CHECK((resample_rational(tone, 3, 3) - tone).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oversample_pad hits the documented geometry") {
  FrontendConfig cfg;
  const int n = 512;
  CHECK(cfg.padded_length(n) == 896);

  CVec tone(n);
  for (int i = 0; i < n; ++i) tone[i] = std::polar(1.0, 2.0 * pi * 40.0 * i / n);
  const CVec out = oversample_pad(tone, cfg);
  REQUIRE(out.size() == 896);

  // corners are exactly zero
  CHECK(out.head(cfg.zero_pad).cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.tail(cfg.zero_pad).cwiseAbs().maxCoeff() == 0.0);

  // the tone moved from 40/512 to 40/640, i.e. bin 56 of the padded frame
  const CVec spec = fft::unitary(out);
  int peak = 0;
  spec.cwiseAbs().maxCoeff(&peak);
  CHECK(peak == 56);

  // interior content is exactly the windowed upsampled signal
  const CVec up = resample_rational(tone, 5, 4);
  const RVec w = window_vector("hann", 640);
  CHECK((out.segment(128, 640) - up.cwiseProduct(w.cast<cplx>())).cwiseAbs().maxCoeff() <
        1e-12);

  CHECK(oversample_pad(CVec::Zero(n), cfg).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("disabling the pad reduces the stage to a pure window") {
  FrontendConfig cfg;
  cfg.pad_enabled = false;
  const int n = 128;
  Rng rng(3);
  CVec x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.cnormal(1.0);
  const CVec out = oversample_pad(x, cfg);
  REQUIRE(out.size() == n);
  const RVec w = window_vector("hann", n);
  CHECK((out - x.cwiseProduct(w.cast<cplx>())).cwiseAbs().maxCoeff() == 0.0);

  cfg.window = "rect";
  CHECK((oversample_pad(x, cfg) - x).cwiseAbs().maxCoeff() == 0.0);
  cfg.window = "flattop";
  CHECK_THROWS_AS(oversample_pad(x, cfg), std::invalid_argument);
}

TEST_CASE("demodulation breaks the real signal's transform-domain mirror symmetry") {
  // a real signal equals its own conjugate, and conjugation negates the
  // transform angle, so the angle-power distribution mirrors exactly under
  // row -> -row; digital I/Q removes the redundant sideband and the mirror
  const int n = 64, m = 64;
  DfrftBasis b = dfrft_basis(n);
  Rng rng(29);

  auto mirror_asym = [&](const CVec& x) {
    EmdfrftGrid g = emdfrft(b, m, x);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < m; ++r)
      for (int k = 0; k < n; ++k) {
        const double a = std::norm(g.s(r, k));
        const double bgd = std::norm(g.s((m - r) % m, k));
        num += (a - bgd) * (a - bgd);
        den += a * a;
      }
    return std::sqrt(num / den);
  };

  RVec real_chirp(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    const double t = i - n;
    real_chirp[i] = std::cos(2.0 * pi * (0.11 * i + 0.4 * t * t / (4.0 * n))) +
                    0.1 * rng.normal();
  }
  CVec as_complex(n);
  for (int i = 0; i < n; ++i) as_complex[i] = real_chirp[2 * i];
  CHECK(mirror_asym(as_complex) < 1e-10);          // real input: exact mirror
  CHECK(mirror_asym(digital_iq(real_chirp)) > 0.1);  // demodulated: one-sided
}

}  // TEST_SUITE
