#include "imfrac/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <tuple>

#include "imfrac/fft.hpp"
#include "imfrac/io.hpp"

namespace imfrac {

namespace {

// Doppler stage shared by every chain: window the slow-time rows, FFT them,
// and rotate so the DC column sits at n_ramps / 2.
CMat doppler_process(const CMat& range_spectra, const std::string& window) {
  const int n_range = static_cast<int>(range_spectra.rows());
  const int n_ramps = static_cast<int>(range_spectra.cols());
  const RVec w = window_vector(window, n_ramps);
  CMat out(n_range, n_ramps);
  CVec row(n_ramps), spec(n_ramps);
  for (int k = 0; k < n_range; ++k) {
    for (int r = 0; r < n_ramps; ++r) row[r] = range_spectra(k, r) * w[r];
    fft::transform(row.data(), spec.data(), n_ramps, fft::kForward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_ramps));
    for (int r = 0; r < n_ramps; ++r)
      out(k, (r + n_ramps / 2) % n_ramps) = spec[r] * scale;
  }
  return out;
}

// Range stage of the standard chain: taper and unitary FFT per ramp.
CMat range_spectra_standard(const CMat& iq, const std::string& window) {
  const int n = static_cast<int>(iq.rows());
  const int ramps = static_cast<int>(iq.cols());
  const RVec w = window_vector(window, n);
  CMat rs(n, ramps);
  CVec buf(n), spec(n);
  for (int r = 0; r < ramps; ++r) {
    for (int i = 0; i < n; ++i) buf[i] = iq(i, r) * w[i];
    fft::transform(buf.data(), spec.data(), n, fft::kForward);
    rs.col(r) = spec / std::sqrt(static_cast<double>(n));
  }
  return rs;
}

// Merges the detections harvested from every ramp into one frame-wide window
// list, strongest first. Interferer timing and sweep rates do not change
// within a frame, so detections of the same arm land on the same grid cell
// give or take a bin of noise jitter; those collapse to the strongest member,
// while windows on distinct stretches of an arm are kept.
std::vector<PinnedWindow> union_windows(const std::vector<ChirpDetection>& dets,
                                        int n) {
  struct Cand {
    int m = 0, idx = 0;
    double score = 0.0;
  };
  std::vector<Cand> cands;
  for (const ChirpDetection& d : dets) {
    bool merged = false;
    for (Cand& c : cands) {
      const int fwd = wrap_index(d.n_hat - c.idx, n);
      if (c.m == d.m_hat && std::min(fwd, n - fwd) <= 2) {
        if (d.snr_db > c.score) c = {d.m_hat, d.n_hat, d.snr_db};
        merged = true;
        break;
      }
    }
    if (!merged) cands.push_back({d.m_hat, d.n_hat, d.snr_db});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(b.score, a.m, a.idx) < std::tie(a.score, b.m, b.idx);
  });
  std::vector<PinnedWindow> out;
  out.reserve(cands.size());
  for (const Cand& c : cands) out.push_back({c.m, c.idx});
  return out;
}

// Shared core of the mitigation chain; `oracle` selects target prediction
// from the clean interference component instead of thresholded detection.
RdMap run_imfrac(const ChainContext& ctx, const RMat& real_cube,
                 const CMat* clean_interference) {
  const int n2 = static_cast<int>(real_cube.rows());
  const int ramps = static_cast<int>(real_cube.cols());
  if (n2 % 2 != 0) throw std::invalid_argument("chain: odd fast-time length");
  const int n_base = n2 / 2;
  const FrontendConfig& fe = ctx.cfg.frontend;
  const int np = fe.padded_length(n_base);
  if (np != ctx.basis.n)
    throw std::invalid_argument("chain: context basis does not match frame geometry");
  if (np % 2 != 0) throw std::invalid_argument("chain: padded length must be even");

  RdMap out;
  out.provenance = clean_interference ? "imfrac-oracle" : "imfrac";
  out.config_hash = ctx.hash;
  CMat rs(n_base, ramps);

  // analysis frames are circularly re-centred so the frame middle sits on
  // the torus time origin, where the discrete rotation is most faithful;
  // a half-frame shift only flips the sign of odd spectrum bins, so it is
  // undone exactly after mitigation
  auto to_origin = [np](const CVec& x) {
    CVec y(np);
    for (int i = 0; i < np; ++i) y[i] = x[(i + np / 2) % np];
    return y;
  };

  // first pass: detect per ramp, harvesting every window the detector (or the
  // oracle predictor) wants zeroed anywhere in the frame
  std::vector<CVec> frames(static_cast<std::size_t>(ramps));
  std::vector<CVec> spectra(static_cast<std::size_t>(ramps));
  std::vector<ChirpDetection> harvest;
  for (int r = 0; r < ramps; ++r) {
    const CVec iq = dc_suppress(digital_iq(real_cube.col(r)), fe.highpass_cutoff);
    frames[r] = to_origin(oversample_pad(iq, fe));

    ImfracResult res;
    if (!ctx.cfg.mitigation_enabled) {
      res.spectrum = fft::unitary(frames[r]);
    } else if (clean_interference) {
      std::vector<OracleTarget> targets;
      const CVec comp = clean_interference->col(r);
      if (comp.norm() > 1e-9) {
        const CVec clean_frame = to_origin(oversample_pad(
            dc_suppress(digital_iq(comp.real()), fe.highpass_cutoff), fe));
        targets = predict_oracle_targets(ctx.basis, ctx.masks, clean_frame,
                                         ctx.cfg.imfrac);
      }
      res = mitigate(ctx.basis, ctx.masks, frames[r], ctx.cfg.imfrac, &targets);
    } else {
      res = mitigate(ctx.basis, ctx.masks, frames[r], ctx.cfg.imfrac);
    }

    spectra[r] = std::move(res.spectrum);
    harvest.insert(harvest.end(), res.detections.begin(), res.detections.end());
    out.ramps_mitigated += res.detections.empty() ? 0 : 1;
    out.total_detections += static_cast<int>(res.detections.size());
    out.converged = out.converged && res.converged;
  }

  // second pass: apply the union of the harvested windows to every ramp in one
  // fixed order. Interference appears only on a subset of ramps, but zeroing
  // the windows on those ramps alone amplitude-modulates whatever echo energy
  // the windows graze, spreading it as a pedestal across the Doppler axis of
  // the echo's own range rows. The same windows applied everywhere make one
  // linear operator per frame: echoes lose the identical sliver on every
  // ramp, which stays at their true Doppler bin. A frame with no detections
  // skips this pass, leaving its spectra untouched.
  const std::vector<PinnedWindow> pinned = union_windows(harvest, np);
  for (int r = 0; r < ramps; ++r) {
    CVec spec = pinned.empty()
                    ? std::move(spectra[r])
                    : apply_pinned_windows(ctx.basis, frames[r], ctx.cfg.imfrac,
                                           pinned);
    for (int k = 1; k < np; k += 2) spec[k] = -spec[k];  // undo the re-centring
    rs.col(r) = crop_spectrum(spec, fe, n_base);
  }

  // smooth zeroing artifacts over range; applied to every ramp or none, since a
  // per-ramp gain would amplitude-modulate targets in slow time and throw
  // ghosts across the Doppler axis
  if (ctx.cfg.lowpass_enabled && out.total_detections > 0)
    for (int r = 0; r < ramps; ++r) rs.col(r) = lowpass3(rs.col(r));

  out.map = doppler_process(rs, ctx.cfg.doppler_window);
  return out;
}

double robust_median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

}  // namespace

std::uint64_t chain_config_hash(const ChainConfig& cfg) {
  char buf[512];
  const int len = std::snprintf(
      buf, sizeof buf,
      "%s|%d|%d|%d|%d|%.17g|%d|%.17g|%d|%d|%.17g|%.17g|%.17g|%d|%d|%d|%s|%s|%d|%d|%d|%d|%.17g",
      cfg.frontend.window.c_str(), cfg.frontend.pad_enabled ? 1 : 0,
      cfg.frontend.oversample_num, cfg.frontend.oversample_den,
      cfg.frontend.zero_pad, cfg.frontend.highpass_cutoff, cfg.imfrac.m_angles,
      cfg.imfrac.alpha_max, cfg.imfrac.detector.phi, cfg.imfrac.detector.g,
      cfg.imfrac.detector.beta_db, cfg.imfrac.support_threshold_db,
      cfg.imfrac.template_duration_frac, cfg.imfrac.max_outer_iters,
      cfg.imfrac.max_inner_iters, cfg.imfrac.half_fft ? 1 : 0,
      cfg.range_window.c_str(), cfg.doppler_window.c_str(),
      cfg.mitigation_enabled ? 1 : 0, cfg.lowpass_enabled ? 1 : 0,
      cfg.ramp_filter_window, cfg.envelope_ma, cfg.envelope_c);
  return io::fnv1a(std::string_view(buf, static_cast<std::size_t>(len)));
}

ChainContext make_chain_context(const ChainConfig& cfg, int n_fast_real) {
  if (n_fast_real <= 0 || n_fast_real % 2 != 0)
    throw std::invalid_argument("chain: real fast-time length must be even");
  ChainContext ctx;
  ctx.cfg = cfg;
  const int np = cfg.frontend.padded_length(n_fast_real / 2);
  ctx.basis = dfrft_basis(np);
  ctx.masks = cached_support_masks(ctx.basis, cfg.imfrac.m_angles,
                                   cfg.imfrac.support_threshold_db,
                                   cfg.imfrac.template_duration_frac, cfg.cache_dir);
  ctx.hash = chain_config_hash(cfg);
  return ctx;
}

CMat iq_cube(const RMat& real_cube, bool dc_notch, double cutoff) {
  const int n = static_cast<int>(real_cube.rows()) / 2;
  const int ramps = static_cast<int>(real_cube.cols());
  CMat out(n, ramps);
  for (int r = 0; r < ramps; ++r) {
    CVec iq = digital_iq(real_cube.col(r));
    out.col(r) = dc_notch ? dc_suppress(iq, cutoff) : iq;
  }
  return out;
}

RdMap process_reference(const CMat& iq, const ChainConfig& cfg) {
  RdMap out;
  out.provenance = "reference";
  out.config_hash = chain_config_hash(cfg);
  out.map = doppler_process(range_spectra_standard(iq, cfg.range_window),
                            cfg.doppler_window);
  return out;
}

RdMap process_none(const RMat& real_cube, const ChainConfig& cfg) {
  RdMap out = process_reference(
      iq_cube(real_cube, true, cfg.frontend.highpass_cutoff), cfg);
  out.provenance = "none";
  return out;
}

RdMap process_imfrac(const ChainContext& ctx, const RMat& real_cube) {
  return run_imfrac(ctx, real_cube, nullptr);
}

RdMap process_imfrac_oracle(const ChainContext& ctx, const RadarCube& cube) {
  return run_imfrac(ctx, cube.real_composite(), &cube.interference);
}

std::vector<std::uint8_t> envelope_flags(const RVec& ramp, int ma, double c) {
  const int n = static_cast<int>(ramp.size());
  if (ma < 1 || ma > n) throw std::invalid_argument("envelope: bad window");
  // centred moving average of |x| (window clipped at the edges)
  std::vector<double> env(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - ma / 2);
    const int hi = std::min(n - 1, i + (ma - 1) / 2);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += std::abs(ramp[k]);
    env[static_cast<std::size_t>(i)] = acc / (hi - lo + 1);
  }
  const double med = robust_median(env);
  std::vector<double> dev(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) dev[i] = std::abs(env[i] - med);
  const double mad = robust_median(dev);
  const double thr = med + c * mad;
  std::vector<std::uint8_t> flags(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) flags[i] = env[i] > thr ? 1 : 0;
  return flags;
}

RdMap baseline_zeroing(const RadarCube& cube, bool oracle, const ChainConfig& cfg) {
  RMat nulled = cube.real_composite();
  const int n2 = static_cast<int>(nulled.rows());
  const int ramps = static_cast<int>(nulled.cols());

  if (oracle) {
    for (const InterferenceParams& p : cube.config.interferers) {
      const auto [first, last] =
          interference_support(p, cube.config.n_fast, cube.config.t_s);
      for (int r = 0; r < ramps; ++r) {
        if (!p.present.empty() && !p.present[static_cast<std::size_t>(r)]) continue;
        for (int i = first; i <= last; ++i) nulled(i, r) = 0.0;
      }
    }
  } else {
    for (int r = 0; r < ramps; ++r) {
      const std::vector<std::uint8_t> flags =
          envelope_flags(nulled.col(r), cfg.envelope_ma, cfg.envelope_c);
      for (int i = 0; i < n2; ++i)
        if (flags[static_cast<std::size_t>(i)]) nulled(i, r) = 0.0;
    }
  }

  RdMap out = process_reference(
      iq_cube(nulled, true, cfg.frontend.highpass_cutoff), cfg);
  out.provenance = oracle ? "zeroing-oracle" : "zeroing";
  return out;
}

RdMap baseline_ramp_filter(const RMat& real_cube, const ChainConfig& cfg) {
  const int ramps = static_cast<int>(real_cube.cols());
  const int w = cfg.ramp_filter_window;
  if (w < 1 || w % 2 == 0)
    throw std::invalid_argument("ramp filter: window must be odd and positive");
  if (ramps < w) throw std::invalid_argument("ramp filter: too few ramps");

  const CMat rs = range_spectra_standard(
      iq_cube(real_cube, true, cfg.frontend.highpass_cutoff), cfg.range_window);
  CMat filt(rs.rows(), rs.cols());
  for (int k = 0; k < rs.rows(); ++k)
    for (int r = 0; r < ramps; ++r) {
      const int lo = std::max(0, r - w / 2);
      const int hi = std::min(ramps - 1, r + w / 2);
      double mag = std::abs(rs(k, r));
      for (int q = lo; q <= hi; ++q) mag = std::min(mag, std::abs(rs(k, q)));
      const double cur = std::abs(rs(k, r));
      filt(k, r) = cur > 0.0 ? rs(k, r) * (mag / cur) : rs(k, r);
    }

  RdMap out;
  out.provenance = "rampfilter";
  out.config_hash = chain_config_hash(cfg);
  out.map = doppler_process(filt, cfg.doppler_window);
  return out;
}

CVec crop_spectrum(const CVec& padded_spec, const FrontendConfig& cfg, int n_base) {
  if (!cfg.pad_enabled) {
    if (padded_spec.size() != n_base)
      throw std::invalid_argument("crop: length mismatch with padding disabled");
    return padded_spec;
  }
  const int np = cfg.padded_length(n_base);
  if (padded_spec.size() != np)
    throw std::invalid_argument("crop: spectrum does not match padded geometry");
  const int m = n_base * cfg.oversample_num / cfg.oversample_den;

  // unitary spectrum -> time, strip the pads, undo the oversampling
  const CVec time = fft::inverse(padded_spec) / std::sqrt(static_cast<double>(np));
  const CVec core = time.segment(cfg.zero_pad, m);
  const CVec base = resample_rational(core, cfg.oversample_den, cfg.oversample_num);
  return fft::unitary(base);
}

CVec lowpass3(const CVec& spec) {
  // Equivalent to a raised-cosine time taper peaked at the frame middle: it
  // damps the frame-edge ringing left by zeroed transform windows while
  // keeping mid-frame echoes intact.  A windowed echo's energy sits at the
  // frame middle, so its mainlobe bins alternate in sign and the taps must
  // alternate too; a same-sign kernel would cancel the mainlobe instead of
  // smoothing around it.
  const int n = static_cast<int>(spec.size());
  CVec out(n);
  for (int k = 0; k < n; ++k)
    out[k] = -0.25 * spec[wrap_index(k - 1, n)] + 0.5 * spec[k] -
             0.25 * spec[wrap_index(k + 1, n)];
  return out;
}

std::vector<GtCell> ground_truth_cells(const FrameConfig& cfg, int n_range,
                                       int n_doppler) {
  std::vector<GtCell> cells;
  for (const ObjectParams& o : cfg.objects) {
    const double f = o.omega * cfg.t_s / (2.0 * pi);  // cycles per real sample
    GtCell c;
    c.range_bin = wrap_index(
        static_cast<int>(std::lround(2.0 * f * n_range)), n_range);
    const int raw = static_cast<int>(
        std::lround(o.doppler_step / (2.0 * pi) * n_doppler));
    c.doppler_bin = wrap_index(raw + n_doppler / 2, n_doppler);
    c.amplitude = o.amplitude;
    cells.push_back(c);
  }
  return cells;
}

}  // namespace imfrac
