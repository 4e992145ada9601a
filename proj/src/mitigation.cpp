#include "imfrac/mitigation.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "imfrac/io.hpp"

namespace imfrac {

// ---- angle map -------------------------------------------------------------

double slope_for_angle(double alpha) { return -1.0 / std::tan(alpha); }

double angle_for_slope(double slope) { return std::atan2(1.0, -slope); }

double reflected_angle(double alpha) {
  double r = std::fmod(alpha, pi);
  if (r < 0.0) r += pi;
  if (r > pi / 2.0) r -= pi;
  return r;
}

CVec chirp_at_angle(const DfrftBasis& b, double alpha, int n_hat) {
  if (n_hat < 0 || n_hat >= b.n)
    throw std::invalid_argument("chirp_at_angle: sample index out of range");
  // column n_hat of the inverse rotation: V Lambda(-alpha) V^T e_{n_hat}
  CVec coeffs(b.n);
  for (int p = 0; p < b.n; ++p)
    coeffs[p] = std::polar(1.0, alpha * b.k[p]) * b.v(n_hat, p);
  return basis_synthesis(b, coeffs);
}

// ---- BitGrid ----------------------------------------------------------------

BitGrid::BitGrid(int r, int c, bool value)
    : rows(r), cols(c), words((c + 63) / 64),
      bits(static_cast<std::size_t>(r) * ((c + 63) / 64), 0) {
  if (value) {
    const std::uint64_t last =
        (c % 64) ? ((1ULL << (c % 64)) - 1) : ~0ULL;
    for (int row = 0; row < rows; ++row)
      for (int w = 0; w < words; ++w)
        bits[static_cast<std::size_t>(row) * words + w] =
            (w == words - 1) ? last : ~0ULL;
  }
}

std::size_t BitGrid::count() const {
  std::size_t c = 0;
  for (std::uint64_t w : bits) c += std::popcount(w);
  return c;
}

BitGrid admissible_rows(int m_angles, int n, double alpha_max) {
  if (alpha_max <= 0.0 || alpha_max >= pi / 2.0)
    throw std::invalid_argument("admissible_rows: alpha_max must lie in (0, pi/2)");
  BitGrid g(m_angles, n, false);
  const std::uint64_t full = ~0ULL;
  const std::uint64_t last = (n % 64) ? ((1ULL << (n % 64)) - 1) : full;
  for (int m = 0; m < m_angles; ++m) {
    const double a = reflected_angle(2.0 * pi * m / m_angles);
    if (std::abs(a) > alpha_max) continue;
    for (int w = 0; w < g.words; ++w)
      g.bits[static_cast<std::size_t>(m) * g.words + w] =
          (w == g.words - 1) ? last : full;
  }
  return g;
}

// ---- support templates -------------------------------------------------------

namespace {

// Canonical detection footprint: a Hann burst at a single bin, centred on the
// torus time origin (sample 0, wrapping).  Bursts must sit at the origin for
// the discrete rotation to transport them faithfully; frames are expected to
// arrive circularly centred the same way.
CVec reference_tone(int n, int bin, double duration_frac) {
  const int d = std::max(4, static_cast<int>(std::lround(duration_frac * n)));
  CVec c = CVec::Zero(n);
  for (int i = 0; i < d; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * pi * i / d));
    const int idx = wrap_index(i - d / 2, n);
    c[idx] = std::polar(w, 2.0 * pi * bin * idx / n);
  }
  c.normalize();
  return c;
}

}  // namespace

SupportMaskSet build_support_masks(const DfrftBasis& b, int m_angles,
                                   double threshold_db, double duration_frac,
                                   int num_threads) {
  SupportMaskSet s;
  s.m_angles = m_angles;
  s.n = b.n;
  s.threshold_db = threshold_db;
  s.duration_frac = duration_frac;
  const int count = b.n / 2 + 1;
  s.ref.resize(count);

  int workers = num_threads > 0
                    ? num_threads
                    : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);

  auto job = [&](int first, int step) {
    for (int bin = first; bin < count; bin += step) {
      EmdfrftGrid g = emdfrft(b, m_angles, reference_tone(b.n, bin, duration_frac));
      const double thr =
          g.s.cwiseAbs().maxCoeff() * std::pow(10.0, -threshold_db / 20.0);
      BitGrid bg(m_angles, b.n, false);
      for (int m = 0; m < m_angles; ++m)
        for (int idx = 0; idx < b.n; ++idx)
          if (std::abs(g.s(m, idx)) >= thr) bg.set(m, idx, true);
      s.ref[bin] = std::move(bg);
    }
  };
  if (workers <= 1) {
    job(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(job, t, workers);
    for (auto& t : pool) t.join();
  }
  return s;
}

namespace {

// Template grid row that overlays grid row `m` for a detection at
// (m_hat, n_hat): a pure row shift from the DFT-row reference; detections in
// the upper half of the spectrum reuse the mirrored-bin template through the
// conjugation identity |G(conj x)[m]| = |G(x)[M-m]|.
inline int template_row(int m, int m_hat, int n_hat, int m_angles, int n) {
  int r = wrap_index(m - (m_hat - m_angles / 4), m_angles);
  if (n_hat > n / 2) r = (m_angles - r) % m_angles;
  return r;
}

}  // namespace

void SupportMaskSet::subtract(BitGrid& mask, int m_hat, int n_hat) const {
  const int bin = n_hat <= n / 2 ? n_hat : n - n_hat;
  const BitGrid& t = ref[bin];
  for (int m = 0; m < m_angles; ++m) {
    const int r = template_row(m, m_hat, n_hat, m_angles, n);
    for (int w = 0; w < mask.words; ++w)
      mask.bits[static_cast<std::size_t>(m) * mask.words + w] &=
          ~t.bits[static_cast<std::size_t>(r) * t.words + w];
  }
}

void SupportMaskSet::mark(BitGrid& claimed, int m_hat, int n_hat) const {
  const int bin = n_hat <= n / 2 ? n_hat : n - n_hat;
  const BitGrid& t = ref[bin];
  for (int m = 0; m < m_angles; ++m) {
    const int r = template_row(m, m_hat, n_hat, m_angles, n);
    for (int w = 0; w < claimed.words; ++w)
      claimed.bits[static_cast<std::size_t>(m) * claimed.words + w] |=
          t.bits[static_cast<std::size_t>(r) * t.words + w];
  }
}

bool SupportMaskSet::overlaps(const BitGrid& claimed, int m_hat, int n_hat) const {
  const int bin = n_hat <= n / 2 ? n_hat : n - n_hat;
  const BitGrid& t = ref[bin];
  for (int m = 0; m < m_angles; ++m) {
    const int r = template_row(m, m_hat, n_hat, m_angles, n);
    for (int w = 0; w < claimed.words; ++w)
      if (claimed.bits[static_cast<std::size_t>(m) * claimed.words + w] &
          t.bits[static_cast<std::size_t>(r) * t.words + w])
        return true;
  }
  return false;
}

bool SupportMaskSet::covered(int m_hat, int n_hat, int m, int idx) const {
  const int bin = n_hat <= n / 2 ? n_hat : n - n_hat;
  return ref[bin].get(template_row(m, m_hat, n_hat, m_angles, n), idx);
}

namespace {
constexpr char kMaskMagic[4] = {'C', 'M', 'S', 'K'};
constexpr std::uint32_t kMaskVersion = 1;
}  // namespace

void save_support_masks(const SupportMaskSet& s, const std::string& path) {
  io::atomic_write(path, [&](std::ostream& os) {
    io::write_magic(os, kMaskMagic);
    io::write_pod(os, kMaskVersion);
    io::write_pod(os, static_cast<std::uint32_t>(s.m_angles));
    io::write_pod(os, static_cast<std::uint32_t>(s.n));
    io::write_pod(os, static_cast<std::uint32_t>(s.ref.size()));
    io::write_pod(os, s.threshold_db);
    io::write_pod(os, s.duration_frac);
    for (const BitGrid& g : s.ref)
      io::write_bytes(os, g.bits.data(), g.bits.size() * sizeof(std::uint64_t));
  });
}

SupportMaskSet load_support_masks(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_support_masks: cannot open " + path);
  io::expect_magic(is, kMaskMagic, "support mask file");
  if (io::read_pod<std::uint32_t>(is) != kMaskVersion)
    throw std::runtime_error("load_support_masks: unsupported version");
  SupportMaskSet s;
  s.m_angles = static_cast<int>(io::read_pod<std::uint32_t>(is));
  s.n = static_cast<int>(io::read_pod<std::uint32_t>(is));
  const auto count = io::read_pod<std::uint32_t>(is);
  s.threshold_db = io::read_pod<double>(is);
  s.duration_frac = io::read_pod<double>(is);
  if (s.m_angles < 4 || s.n < 2 || count != static_cast<std::uint32_t>(s.n / 2 + 1))
    throw std::runtime_error("load_support_masks: inconsistent header");
  s.ref.resize(count);
  for (auto& g : s.ref) {
    g = BitGrid(s.m_angles, s.n, false);
    io::read_bytes(is, g.bits.data(), g.bits.size() * sizeof(std::uint64_t));
  }
  return s;
}

SupportMaskSet cached_support_masks(const DfrftBasis& b, int m_angles,
                                    double threshold_db, double duration_frac,
                                    std::optional<std::string> cache_dir) {
  std::string dir;
  if (cache_dir) {
    dir = *cache_dir;
  } else if (const char* env = std::getenv("IMFRAC_CACHE_DIR")) {
    dir = env;
  }
  if (dir.empty()) return build_support_masks(b, m_angles, threshold_db, duration_frac);

  std::ostringstream name;
  name << "cmsk_n" << b.n << "_m" << m_angles << "_t" << std::lround(threshold_db * 10)
       << "_d" << std::lround(duration_frac * 1000) << ".bin";
  const std::filesystem::path path = std::filesystem::path(dir) / name.str();
  if (std::filesystem::exists(path)) {
    try {
      SupportMaskSet s = load_support_masks(path.string());
      if (s.m_angles == m_angles && s.n == b.n) return s;
    } catch (const std::exception&) {
      // rebuild below
    }
  }
  SupportMaskSet s = build_support_masks(b, m_angles, threshold_db, duration_frac);
  save_support_masks(s, path.string());
  return s;
}

// ---- sparse eigen-domain updates ---------------------------------------------

SparseGamma gamma_from_row(const CVec& row, double alpha, int n_hat, int g) {
  const int n = static_cast<int>(row.size());
  SparseGamma out;
  out.alpha = alpha;
  out.idx.reserve(2 * g + 1);
  out.val.reserve(2 * g + 1);
  for (int d = -g; d <= g; ++d) {
    const int i = wrap_index(n_hat + d, n);
    out.idx.push_back(i);
    out.val.push_back(row[i]);
  }
  return out;
}

UpdateStats update_coeffs(const DfrftBasis& b, CVec& rho, const SparseGamma& gamma) {
  if (rho.size() != b.n) throw std::invalid_argument("update_coeffs: size mismatch");
  const int nnz = static_cast<int>(gamma.idx.size());
  for (int p = 0; p < b.n; ++p) {
    cplx acc{0.0, 0.0};
    const double* col = b.v.col(p).data();
    for (int i = 0; i < nnz; ++i) acc += col[gamma.idx[i]] * gamma.val[i];
    rho[p] -= std::polar(1.0, gamma.alpha * b.k[p]) * acc;
  }
  return {static_cast<std::int64_t>(b.n) * (nnz + 1)};
}

UpdateStats update_coeffs_batch(const DfrftBasis& b, CVec& rho,
                                const std::vector<SparseGamma>& batch) {
  UpdateStats total;
  for (const SparseGamma& g : batch) total.mults += update_coeffs(b, rho, g).mults;
  return total;
}

UpdateStats update_coeffs_dense(const DfrftBasis& b, CVec& rho,
                                const SparseGamma& gamma) {
  if (rho.size() != b.n) throw std::invalid_argument("update_coeffs_dense: size mismatch");
  CVec dense = CVec::Zero(b.n);
  for (std::size_t i = 0; i < gamma.idx.size(); ++i) dense[gamma.idx[i]] = gamma.val[i];
  const CVec t = basis_analysis(b, dense);  // full n^2 analysis
  for (int p = 0; p < b.n; ++p)
    rho[p] -= std::polar(1.0, gamma.alpha * b.k[p]) * t[p];
  return {static_cast<std::int64_t>(b.n) * b.n + b.n};
}

// ---- driver --------------------------------------------------------------------

namespace {

struct Cell {
  int m = -1, idx = -1;
  double power = -1.0;
};

Cell argmax_masked(const EmdfrftGrid& g, const BitGrid& mask) {
  Cell best;
  for (int m = 0; m < g.m_angles; ++m) {
    const cplx* row = g.s.data() + static_cast<std::size_t>(m) * g.n;
    const std::uint64_t* words =
        mask.bits.data() + static_cast<std::size_t>(m) * mask.words;
    for (int w = 0; w < mask.words; ++w) {
      std::uint64_t bitsleft = words[w];
      while (bitsleft) {
        const int c = (w << 6) + std::countr_zero(bitsleft);
        bitsleft &= bitsleft - 1;
        const double p = std::norm(row[c]);
        if (p > best.power) best = {m, c, p};
      }
    }
  }
  return best;
}

Cell argmax_window(const EmdfrftGrid& g, int m0, int mh, int n0, int nh) {
  Cell best;
  for (int dm = -mh; dm <= mh; ++dm) {
    const int m = wrap_index(m0 + dm, g.m_angles);
    for (int dn = -nh; dn <= nh; ++dn) {
      const int c = wrap_index(n0 + dn, g.n);
      const double p = std::norm(g.s(m, c));
      if (p > best.power) best = {m, c, p};
    }
  }
  return best;
}

void validate(const DfrftBasis& b, const SupportMaskSet& masks,
              const CVec& signal, const ImfracConfig& cfg) {
  if (signal.size() != b.n) throw std::invalid_argument("imfrac: signal size mismatch");
  if (cfg.m_angles < 4 || cfg.m_angles % 4 != 0)
    throw std::invalid_argument("imfrac: m_angles must be a multiple of 4");
  if (masks.m_angles != cfg.m_angles || masks.n != b.n)
    throw std::invalid_argument("imfrac: support masks built for another geometry");
  cfg.detector.validate(b.n);
}

}  // namespace

ImfracResult mitigate(const DfrftBasis& b, const SupportMaskSet& masks,
                    const CVec& signal, const ImfracConfig& cfg,
                    const std::vector<OracleTarget>* oracle_targets) {
  validate(b, masks, signal, cfg);
  const int g = cfg.detector.g;

  CVec rho = basis_analysis(b, signal);
  EmdfrftGrid grid = emdfrft_from_coeffs(b, cfg.m_angles, rho, cfg.half_fft);
  const BitGrid admissible = admissible_rows(cfg.m_angles, b.n, cfg.alpha_max);

  ImfracResult r;
  int outer = 0;
  while (outer < cfg.max_outer_iters) {
    std::vector<SparseGamma> batch;
    double pass_top = 0.0;
    const std::size_t pass_first = r.detections.size();

    if (oracle_targets) {
      for (const OracleTarget& t : *oracle_targets) {
        const Cell c = argmax_window(grid, t.m_hat, t.row_halfwidth, t.n_hat, 2 * g);
        const CVec row = grid.s.row(c.m).transpose();
        const Detection det = lo_cfar(row, c.idx, cfg.detector);
        batch.push_back(gamma_from_row(row, grid.angle(c.m), c.idx, g));
        r.detections.push_back({c.m, c.idx, reflected_angle(grid.angle(c.m)),
                                det.snr_db, outer});
      }
    } else {
      BitGrid mask = admissible;
      BitGrid claimed(cfg.m_angles, b.n, false);
      std::vector<std::pair<int, int>> accepted;
      // batched subtraction reads every row from the same snapshot, so it is
      // only valid when no member's zeroing window sits on another member's
      // footprint (separable components: each peak unchanged by the others'
      // zeroing); violators are the same component seen at a neighbouring
      // angle, or one crossing it there, and wait for the next rebuild
      auto separable = [&](int m_hat, int n_hat) {
        for (int d = -g; d <= g; ++d)
          if (claimed.get(m_hat, wrap_index(n_hat + d, b.n))) return false;
        for (const auto& [me, ne] : accepted)
          for (int d = -g; d <= g; ++d)
            if (masks.covered(m_hat, n_hat, me, wrap_index(ne + d, b.n)))
              return false;
        return true;
      };
      for (int inner = 0; inner < cfg.max_inner_iters; ++inner) {
        const Cell c = argmax_masked(grid, mask);
        if (c.m < 0) break;
        const CVec row = grid.s.row(c.m).transpose();
        const Detection det = lo_cfar(row, c.idx, cfg.detector);
        if (!det.detected) break;
        if (batch.empty()) pass_top = c.power;
        // hide this component for the rest of the pass either way: geometric
        // support plus the full zeroed stretch on the detection row
        masks.subtract(mask, c.m, c.idx);
        for (int d = -g; d <= g; ++d)
          mask.set(c.m, wrap_index(c.idx + d, b.n), false);
        if (!batch.empty() && !separable(c.m, c.idx)) continue;
        masks.mark(claimed, c.m, c.idx);
        accepted.emplace_back(c.m, c.idx);
        batch.push_back(gamma_from_row(row, grid.angle(c.m), c.idx, g));
        r.detections.push_back({c.m, c.idx, reflected_angle(grid.angle(c.m)),
                                det.snr_db, outer});
      }
    }

    if (batch.empty()) break;
    const CVec rho_before = rho;
    UpdateStats st = update_coeffs_batch(b, rho, batch);
    grid = emdfrft_from_coeffs(b, cfg.m_angles, rho, cfg.half_fft);
    if (!oracle_targets && batch.size() > 1) {
      // the footprint test is a geometric proxy, so a batch can still couple
      // through shared signal energy; if the pass failed to lower the grid
      // ceiling, redo it with the leading component alone (always progress)
      const Cell top = argmax_masked(grid, admissible);
      if (top.power > pass_top * (1.0 + 1e-9)) {
        rho = rho_before;
        st.mults += update_coeffs(b, rho, batch.front()).mults;
        grid = emdfrft_from_coeffs(b, cfg.m_angles, rho, cfg.half_fft);
        r.detections.resize(pass_first + 1);
      }
    }
    r.stats.mults += st.mults;
    ++outer;
    if (oracle_targets) break;  // predictions are single-shot
  }

  r.outer_iters = outer;
  r.converged = oracle_targets != nullptr || outer < cfg.max_outer_iters;
  r.spectrum = grid.s.row(grid.dft_row()).transpose();
  return r;
}

CVec apply_pinned_windows(const DfrftBasis& b, const CVec& signal,
                          const ImfracConfig& cfg,
                          const std::vector<PinnedWindow>& windows) {
  if (signal.size() != b.n)
    throw std::invalid_argument("imfrac: signal size mismatch");
  if (cfg.m_angles < 4 || cfg.m_angles % 4 != 0)
    throw std::invalid_argument("imfrac: m_angles must be a multiple of 4");
  cfg.detector.validate(b.n);
  const int g = cfg.detector.g;

  CVec rho = basis_analysis(b, signal);
  for (const PinnedWindow& w : windows) {
    if (w.m_hat < 0 || w.m_hat >= cfg.m_angles || w.n_hat < 0 || w.n_hat >= b.n)
      throw std::invalid_argument("imfrac: pinned window out of range");
    // one window per pass: the row is refreshed after every subtraction so
    // overlapping windows see each other's residual instead of the original
    // energy (a shared snapshot would remove shared energy twice)
    const CVec row = emdfrft_row(b, cfg.m_angles, rho, w.m_hat);
    const double alpha = 2.0 * pi * w.m_hat / cfg.m_angles;
    update_coeffs(b, rho, gamma_from_row(row, alpha, w.n_hat, g));
  }
  return emdfrft_row(b, cfg.m_angles, rho, cfg.m_angles / 4);
}

std::vector<OracleTarget> predict_oracle_targets(const DfrftBasis& b,
                                                 const SupportMaskSet& masks,
                                                 const CVec& clean_component,
                                                 const ImfracConfig& cfg,
                                                 int max_arms) {
  validate(b, masks, clean_component, cfg);
  EmdfrftGrid grid = emdfrft(b, cfg.m_angles, clean_component, cfg.half_fft);
  BitGrid mask = admissible_rows(cfg.m_angles, b.n, cfg.alpha_max);

  std::vector<OracleTarget> targets;
  BitGrid claimed(cfg.m_angles, b.n, false);
  const int g = cfg.detector.g;
  auto on_claimed = [&](int m_hat, int n_hat) {
    for (int d = -g; d <= g; ++d)
      if (claimed.get(m_hat, wrap_index(n_hat + d, b.n))) return true;
    for (const OracleTarget& e : targets)
      for (int d = -g; d <= g; ++d)
        if (masks.covered(m_hat, n_hat, e.m_hat, wrap_index(e.n_hat + d, b.n)))
          return true;
    return false;
  };
  double first_power = 0.0;
  for (int arm = 0; arm < max_arms; ++arm) {
    const Cell c = argmax_masked(grid, mask);
    if (c.m < 0) break;
    if (arm == 0) {
      first_power = c.power;
    } else if (c.power < 1e-2 * first_power || on_claimed(c.m, c.idx)) {
      // sidelobes of the first arm sit below the template threshold and a
      // peak sitting on an earlier arm's footprint is the same component seen
      // at a neighbouring angle; a real second arm is strong and clear
      break;
    }
    masks.mark(claimed, c.m, c.idx);
    targets.push_back({c.m, c.idx, 2});
    masks.subtract(mask, c.m, c.idx);
    for (int d = -2 * g; d <= 2 * g; ++d)
      mask.set(c.m, wrap_index(c.idx + d, b.n), false);
  }
  return targets;
}

}  // namespace imfrac
