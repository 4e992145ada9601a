#pragma once

#include <string>
#include <utility>
#include <vector>

#include "imfrac/chain.hpp"
#include "imfrac/types.hpp"

namespace imfrac {

// Cell-averaging CFAR geometry for the detection-quality metrics. The
// training band is `cfar_train` cells deep on each side of a square guard
// ring of half-width `cfar_guard`; the threshold multiplier follows the
// classic CA-CFAR design alpha = K (Pfa^{-1/K} - 1) for K training cells.
struct MetricsConfig {
  int cfar_train = 8;
  int cfar_guard = 2;
  double cfar_pfa = 1e-4;
  int match_radius = 1;  // detection-to-object association radius (bins)
};

// Per-map scores. tpr/far/f1 come from the CFAR detector; mse/evm compare
// against the reference map; sinr_db uses the test map alone.
struct FrameMetrics {
  double mse = 0.0;
  double sinr_db = 0.0;
  double evm = 0.0;
  double tpr = 0.0;
  double far = 0.0;
  double f1 = 0.0;
};

// 2D cell-averaging CFAR over |map|^2 with circular wrap in both axes.
// Throws if the training window does not fit inside the map.
MaskMat cfar_detect(const CMat& map, const MetricsConfig& cfg);

// Scores `test` against `reference` and the generated object cells. Both
// maps are peak-normalized first, so the result is invariant to a common
// positive scaling. Conventions for degenerate inputs: an empty object
// list reports tpr = 1 and sinr_db = 0; a detector that stays silent has
// precision 1, so f1 = 1 on an empty scene and 0 when objects were missed.
FrameMetrics frame_metrics(const RdMap& test, const RdMap& reference,
                           const std::vector<GtCell>& gt,
                           const MetricsConfig& cfg = {});

// Empirical CDF: sorted (value, fraction) steps with fraction (i+1)/n, so
// the largest value carries fraction 1. Throws on an empty list.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

// Delimited-text plumbing for the evaluation outputs: one metrics row per
// frame per method, and (value, fraction) pairs for ECDF exports.
std::string metrics_table_header();
std::string metrics_table_row(int frame, const std::string& method,
                              const FrameMetrics& m);
std::string ecdf_lines(const std::vector<std::pair<double, double>>& steps);

}  // namespace imfrac
