#pragma once

#include <cstdint>
#include <string>

#include "imfrac/chain.hpp"
#include "imfrac/metrics.hpp"
#include "imfrac/sigmodel.hpp"

namespace imfrac {

// Everything one experiment needs, serializable as a single JSON document.
// Field defaults live on the component structs so a missing section simply
// keeps the production settings (angle grid 256, guard 20, threshold 20 dB,
// training auto = N/2 - G - 1, max rotation 80 deg).
struct ExperimentConfig {
  DatasetSpec dataset;
  int frame_count = 250;
  ChainConfig chain;
  MetricsConfig metrics;
  std::string output_dir = "out";
};

// Parses a JSON document, starting from defaults and applying overrides.
// Unknown keys and malformed values raise io::ConfigError so typos cannot
// silently fall back to defaults.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization (sorted keys, round-trip exact doubles); the
// experiment hash fingerprints this string.
std::string config_to_json(const ExperimentConfig& cfg);
std::uint64_t experiment_hash(const ExperimentConfig& cfg);

// Per-frame synthesis parameters embedded in cube metadata, so any cube on
// disk can be re-scored or regenerated without the original spec file.
std::string frame_config_to_json(const FrameConfig& cfg);
FrameConfig frame_config_from_json(const std::string& text);

}  // namespace imfrac
