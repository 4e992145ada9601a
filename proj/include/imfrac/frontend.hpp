#pragma once

#include <string>

#include "imfrac/types.hpp"

namespace imfrac {

// Per-ramp preprocessing of the real-valued receiver: digital I/Q conversion
// with DC suppression, then band-limited oversampling, windowing, and
// symmetric zero-padding ahead of the rotated-transform stage.
struct FrontendConfig {
  std::string window = "hann";    // "hann" or "rect"
  bool pad_enabled = true;        // false: window only, no resample/pad
  int oversample_num = 5;         // rational oversampling factor num/den
  int oversample_den = 4;
  int zero_pad = 128;             // zeros appended per side
  // DC notch edge as a fraction of the band.  Wide enough that the notch
  // transition ends below the lowest object beat the dataset can draw, so
  // near-DC clutter (and the interference sweep's zero-beat crossing, which
  // no linear-chirp model can represent) is rejected without touching echoes.
  double highpass_cutoff = 0.035;

  // output length for a given I/Q input length
  int padded_length(int n) const {
    if (!pad_enabled) return n;
    return n * oversample_num / oversample_den + 2 * zero_pad;
  }
};

// Digital I/Q demodulation of a real vector of even length 2N: the upper
// sideband is isolated in a length-2N spectrum and re-anchored on an N-point
// grid, which halves the rate and centres the retained band around DC.  For
// an in-band analytic construction s = Re{z} this returns exactly z[2n]; an
// in-band cosine of amplitude A becomes a complex exponential of amplitude A.
CVec digital_iq(const RVec& s_real);

// Zero-phase spectral notch around DC: bins below `cutoff` (fraction of the
// band, i.e. of the Nyquist extent) are zeroed, a raised-cosine ramp restores
// unity by 2x cutoff, everything above passes untouched.
CVec dc_suppress(const CVec& s, double cutoff = 0.035);

// Band-limited rational resampling by num/den via spectral re-anchoring;
// tone amplitudes are preserved and normalised frequencies scale by den/num.
// n * num must be divisible by den.
CVec resample_rational(const CVec& s, int num, int den);

// Named taper of length n (periodic form, so a Hann stays band-limited to
// bins {0, +-1} and resamples exactly).
RVec window_vector(const std::string& name, int n);

// Resample -> window -> pad with cfg.zero_pad zeros on each side.  With
// pad_enabled=false only the window is applied.  The first and last
// cfg.zero_pad output samples are exactly zero by construction.
CVec oversample_pad(const CVec& s, const FrontendConfig& cfg);

// Magnitude short-time Fourier transform for time-frequency views of a ramp:
// Hann-windowed segments of length `win` advanced by `hop`, unitary FFT per
// segment.  Row = frequency bin, column = segment; throws when the signal is
// shorter than one window.
RMat stft_mag(const CVec& x, int win, int hop);

}  // namespace imfrac
