#include "imfrac/frontend.hpp"

#include <cmath>
#include <stdexcept>

#include "imfrac/fft.hpp"

namespace imfrac {

CVec digital_iq(const RVec& s_real) {
  const int n2 = static_cast<int>(s_real.size());
  if (n2 <= 0 || n2 % 2 != 0)
    throw std::invalid_argument("digital_iq: input length must be even");
  const int n = n2 / 2;
  const CVec spec = fft::forward(s_real.cast<cplx>());
  // upper sideband only, doubled to undo the real part's half split, then
  // re-anchored on the half-length grid; 1/(2N) is the inverse-DFT scale
  CVec kept = 2.0 * spec.head(n);
  return fft::inverse(kept) / static_cast<double>(n2);
}

CVec dc_suppress(const CVec& s, double cutoff) {
  if (cutoff <= 0.0 || cutoff >= 0.5)
    throw std::invalid_argument("dc_suppress: cutoff must be in (0, 0.5)");
  const int n = static_cast<int>(s.size());
  CVec spec = fft::forward(s);
  for (int k = 0; k < n; ++k) {
    // distance from DC as a fraction of the band (Nyquist extent)
    const double frac = 2.0 * std::min(k, n - k) / static_cast<double>(n);
    double h = 1.0;
    if (frac < cutoff)
      h = 0.0;
    else if (frac < 2.0 * cutoff)
      h = 0.5 * (1.0 - std::cos(pi * (frac - cutoff) / cutoff));
    spec[k] *= h;
  }
  return fft::inverse(spec) / static_cast<double>(n);
}

CVec resample_rational(const CVec& s, int num, int den) {
  if (num <= 0 || den <= 0)
    throw std::invalid_argument("resample: factor must be positive");
  const int n = static_cast<int>(s.size());
  if ((static_cast<long long>(n) * num) % den != 0)
    throw std::invalid_argument("resample: n*num must be divisible by den");
  const int m = static_cast<int>(static_cast<long long>(n) * num / den);
  if (num == den) return s;

  const CVec spec = fft::forward(s);
  CVec out = CVec::Zero(m);
  if (m > n) {
    const int half = n / 2;
    out.head(half) = spec.head(half);
    out.tail(n - half - 1) = spec.tail(n - half - 1);
    if (n % 2 == 0) {
      // shared Nyquist bin splits symmetrically onto +-n/2 of the longer grid
      out[half] = 0.5 * spec[half];
      out[m - half] += 0.5 * spec[half];
    } else {
      out[half] = spec[half];
    }
  } else {
    // band reduction: keep the bins representable on the shorter grid; the
    // two old band edges fold onto the new shared Nyquist bin
    const int half = m / 2;
    out.head(half) = spec.head(half);
    out.tail(m - half - 1) = spec.tail(m - half - 1);
    if (m % 2 == 0)
      out[half] = spec[half] + spec[n - half];
    else
      out[half] = spec[half];
  }
  return fft::inverse(out) / static_cast<double>(n);
}

RVec window_vector(const std::string& name, int n) {
  RVec w(n);
  if (name == "hann") {
    for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * i / n);
  } else if (name == "rect") {
    w.setOnes();
  } else {
    throw std::invalid_argument("window_vector: unknown window '" + name + "'");
  }
  return w;
}

CVec oversample_pad(const CVec& s, const FrontendConfig& cfg) {
  if (!cfg.pad_enabled) {
    const RVec w = window_vector(cfg.window, static_cast<int>(s.size()));
    return s.cwiseProduct(w.cast<cplx>());
  }
  if (cfg.zero_pad < 0)
    throw std::invalid_argument("oversample_pad: negative pad");
  const CVec up = resample_rational(s, cfg.oversample_num, cfg.oversample_den);
  const int m = static_cast<int>(up.size());
  const RVec w = window_vector(cfg.window, m);
  CVec out = CVec::Zero(m + 2 * cfg.zero_pad);
  out.segment(cfg.zero_pad, m) = up.cwiseProduct(w.cast<cplx>());
  return out;
}

RMat stft_mag(const CVec& x, int win, int hop) {
  const int n = static_cast<int>(x.size());
  if (win < 2 || hop < 1) throw std::invalid_argument("stft: bad geometry");
  if (n < win) throw std::invalid_argument("stft: signal shorter than window");
  const int frames = 1 + (n - win) / hop;
  const RVec w = window_vector("hann", win);
  RMat out(win, frames);
  CVec seg(win);
  for (int f = 0; f < frames; ++f) {
    seg = x.segment(f * hop, win).cwiseProduct(w.cast<cplx>());
    out.col(f) = fft::unitary(seg).cwiseAbs();
  }
  return out;
}

}  // namespace imfrac
