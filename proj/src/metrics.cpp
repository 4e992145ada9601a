#include "imfrac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace imfrac {

namespace {

// Summed-area table over the power map, tiled by the window half-extent so
// every training rectangle can wrap without special cases.
struct PowerSums {
  Eigen::MatrixXd acc;  // (rows + 2h + 1) x (cols + 2h + 1) prefix sums
  int h;

  PowerSums(const CMat& map, int half) : h(half) {
    const int r = static_cast<int>(map.rows());
    const int c = static_cast<int>(map.cols());
    acc = Eigen::MatrixXd::Zero(r + 2 * h + 1, c + 2 * h + 1);
    for (int i = 0; i < r + 2 * h; ++i)
      for (int j = 0; j < c + 2 * h; ++j) {
        const double p = std::norm(map(wrap_index(i - h, r), wrap_index(j - h, c)));
        acc(i + 1, j + 1) = p + acc(i, j + 1) + acc(i + 1, j) - acc(i, j);
      }
  }

  // sum of power over rows [i-a, i+a] x cols [j-b, j+b], indices in map space
  double box(int i, int j, int a, int b) const {
    const int r0 = i - a + h, r1 = i + a + h + 1;
    const int c0 = j - b + h, c1 = j + b + h + 1;
    return acc(r1, c1) - acc(r0, c1) - acc(r1, c0) + acc(r0, c0);
  }
};

bool near_gt(int r, int c, const std::vector<GtCell>& gt, int radius, int rows,
             int cols) {
  for (const GtCell& g : gt) {
    int dr = std::abs(r - g.range_bin);
    int dc = std::abs(c - g.doppler_bin);
    dr = std::min(dr, rows - dr);
    dc = std::min(dc, cols - dc);
    if (dr <= radius && dc <= radius) return true;
  }
  return false;
}

CMat peak_normalized(const CMat& map) {
  double peak = 0.0;
  for (int j = 0; j < map.cols(); ++j)
    for (int i = 0; i < map.rows(); ++i)
      peak = std::max(peak, std::abs(map(i, j)));
  return peak > 0.0 ? CMat(map / peak) : map;
}

}  // namespace

MaskMat cfar_detect(const CMat& map, const MetricsConfig& cfg) {
  const int rows = static_cast<int>(map.rows());
  const int cols = static_cast<int>(map.cols());
  if (cfg.cfar_train < 1 || cfg.cfar_guard < 0)
    throw std::invalid_argument("cfar: bad window geometry");
  const int half = cfg.cfar_guard + cfg.cfar_train;
  if (2 * half + 1 > rows || 2 * half + 1 > cols)
    throw std::invalid_argument("cfar: training window larger than the map");
  if (!(cfg.cfar_pfa > 0.0 && cfg.cfar_pfa < 1.0))
    throw std::invalid_argument("cfar: Pfa must lie in (0,1)");

  const int gw = 2 * cfg.cfar_guard + 1;
  const double k_cells = static_cast<double>((2 * half + 1) * (2 * half + 1) -
                                             gw * gw);
  const double alpha =
      k_cells * (std::pow(cfg.cfar_pfa, -1.0 / k_cells) - 1.0);

  const PowerSums sums(map, half);
  MaskMat hits = MaskMat::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double train = sums.box(i, j, half, half) -
                           sums.box(i, j, cfg.cfar_guard, cfg.cfar_guard);
      const double threshold = alpha * train / k_cells;
      if (std::norm(map(i, j)) > threshold) hits(i, j) = 1;
    }
  return hits;
}

FrameMetrics frame_metrics(const RdMap& test, const RdMap& reference,
                           const std::vector<GtCell>& gt,
                           const MetricsConfig& cfg) {
  if (test.map.rows() != reference.map.rows() ||
      test.map.cols() != reference.map.cols())
    throw std::invalid_argument("metrics: map dimensions differ");
  const int rows = static_cast<int>(test.map.rows());
  const int cols = static_cast<int>(test.map.cols());
  const double cells = static_cast<double>(rows) * cols;

  const CMat t = peak_normalized(test.map);
  const CMat r = peak_normalized(reference.map);

  FrameMetrics m;
  m.mse = (t - r).squaredNorm() / cells;

  // EVM: relative complex error at the object cells, as a percentage
  double evm_acc = 0.0;
  int evm_n = 0;
  for (const GtCell& g : gt) {
    const double ref_mag = std::abs(r(g.range_bin, g.doppler_bin));
    if (ref_mag == 0.0) continue;
    const double e =
        std::abs(t(g.range_bin, g.doppler_bin) - r(g.range_bin, g.doppler_bin)) /
        ref_mag;
    evm_acc += e * e;
    ++evm_n;
  }
  m.evm = evm_n > 0 ? 100.0 * std::sqrt(evm_acc / evm_n) : 0.0;

  // detection quality: CFAR exceedances grouped to their local power maxima
  // (one blob, one detection), then matched to objects within the radius
  const MaskMat raw = cfar_detect(t, cfg);
  MaskMat hits = MaskMat::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (!raw(i, j)) continue;
      const double p = std::norm(t(i, j));
      bool is_peak = true;
      for (int di = -1; di <= 1 && is_peak; ++di)
        for (int dj = -1; dj <= 1 && is_peak; ++dj)
          if ((di || dj) &&
              std::norm(t(wrap_index(i + di, rows), wrap_index(j + dj, cols))) > p)
            is_peak = false;
      if (is_peak) hits(i, j) = 1;
    }
  int tp = 0;
  for (const GtCell& g : gt) {
    bool found = false;
    for (int dr = -cfg.match_radius; dr <= cfg.match_radius && !found; ++dr)
      for (int dc = -cfg.match_radius; dc <= cfg.match_radius && !found; ++dc)
        if (hits(wrap_index(g.range_bin + dr, rows),
                 wrap_index(g.doppler_bin + dc, cols)))
          found = true;
    if (found) ++tp;
  }
  int fp = 0;
  int object_cells = 0;
  double sig = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (near_gt(i, j, gt, cfg.match_radius, rows, cols)) {
        ++object_cells;
        sig += std::norm(t(i, j));
      } else if (hits(i, j)) {
        ++fp;
      }
    }

  // SINR: power in the object mainlobe region (ground-truth cells padded by
  // the match radius, the same neighbourhood a detection is credited in)
  // against everything else
  const double rest = t.squaredNorm() - sig;
  m.sinr_db = (!gt.empty() && sig > 0.0 && rest > 0.0)
                  ? 10.0 * std::log10(sig / rest)
                  : 0.0;

  m.tpr = gt.empty() ? 1.0 : static_cast<double>(tp) / static_cast<double>(gt.size());
  const double non_object = cells - object_cells;
  m.far = non_object > 0.0 ? static_cast<double>(fp) / non_object : 0.0;
  const double precision = (tp + fp) > 0
                               ? static_cast<double>(tp) / (tp + fp)
                               : 1.0;  // a silent detector claims nothing false
  const double recall = m.tpr;
  m.f1 = (precision + recall) > 0.0
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
  return m;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("ecdf: empty input");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> steps;
  steps.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    steps.emplace_back(values[i], static_cast<double>(i + 1) / n);
  return steps;
}

std::string metrics_table_header() {
  return "frame\tmethod\tmse\tsinr_db\tevm\ttpr\tfar\tf1";
}

std::string metrics_table_row(int frame, const std::string& method,
                              const FrameMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d\t%s\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g",
                frame, method.c_str(), m.mse, m.sinr_db, m.evm, m.tpr, m.far,
                m.f1);
  return buf;
}

std::string ecdf_lines(const std::vector<std::pair<double, double>>& steps) {
  std::string out;
  char buf[96];
  for (const auto& [v, f] : steps) {
    std::snprintf(buf, sizeof buf, "%.9g\t%.9g\n", v, f);
    out += buf;
  }
  return out;
}

}  // namespace imfrac
