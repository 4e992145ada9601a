// Command-line driver: dataset generation, mitigation runs, evaluation, and
// time-frequency dumps, all sharing one JSON experiment config.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "imfrac/chain.hpp"
#include "imfrac/config.hpp"
#include "imfrac/io.hpp"
#include "imfrac/metrics.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace imfrac;

namespace {

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string frame_name(int i, const char* suffix = "") {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%04d%s.rcub", i, suffix);
  return buf;
}

fs::path dataset_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.output_dir) / "dataset";
}
fs::path maps_dir(const ExperimentConfig& cfg, const std::string& method) {
  return fs::path(cfg.output_dir) / "maps" / method;
}
fs::path eval_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.output_dir) / "eval";
}

json read_manifest(const ExperimentConfig& cfg) {
  const fs::path path = dataset_dir(cfg) / "manifest.json";
  std::ifstream is(path);
  if (!is)
    throw io::DataError("run: no dataset manifest at " + path.string() +
                        " (run `imfrac generate` first)");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw io::DataError(std::string("manifest: parse failure: ") + e.what());
  }
}

int frame_limit(const json& manifest, int frames_flag) {
  const int count = manifest.at("count").get<int>();
  return frames_flag > 0 ? std::min(frames_flag, count) : count;
}

// Loads one generated frame: composite cube, interference component, and the
// synthesis parameters from the metadata block.
struct LoadedFrame {
  RadarCube cube;
};

LoadedFrame load_frame(const ExperimentConfig& cfg, int i) {
  const fs::path comp_path = dataset_dir(cfg) / frame_name(i);
  const fs::path intf_path = dataset_dir(cfg) / frame_name(i, "_intf");
  io::RcubFile comp = io::read_rcub(comp_path);
  io::RcubFile intf = io::read_rcub(intf_path);
  if (!comp.is_complex || !intf.is_complex)
    throw io::DataError("dataset: expected complex cubes for frame " +
                        std::to_string(i));
  json meta;
  try {
    meta = json::parse(comp.metadata);
  } catch (const json::exception& e) {
    throw io::DataError(std::string("dataset: bad frame metadata: ") + e.what());
  }
  LoadedFrame f;
  f.cube.data = std::move(comp.complex);
  f.cube.interference = std::move(intf.complex);
  f.cube.config = frame_config_from_json(meta.at("frame_config").dump());
  if (f.cube.data.rows() != f.cube.config.n_fast ||
      f.cube.data.cols() != f.cube.config.n_ramps)
    throw io::DataError("dataset: cube geometry disagrees with its metadata");
  return f;
}

std::optional<std::string> effective_cache_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("IMFRAC_CACHE_DIR"); env && *env)
    return std::string(env);
  return cfg.chain.cache_dir;
}

int cmd_generate(const ExperimentConfig& cfg, int frames_flag) {
  const int count = frames_flag > 0 ? frames_flag : cfg.frame_count;
  const std::uint64_t shash = spec_hash(cfg.dataset);
  const std::uint64_t ehash = experiment_hash(cfg);
  std::printf("generate: experiment %s spec %s count %d -> %s\n",
              hex64(ehash).c_str(), hex64(shash).c_str(), count,
              dataset_dir(cfg).string().c_str());

  json frames = json::array();
  for (int i = 0; i < count; ++i) {
    const FrameConfig fc = draw_frame_config(cfg.dataset, static_cast<std::uint64_t>(i));
    const RadarCube cube = gen_frame(fc);
    const json meta{{"frame", i},
                    {"spec_hash", hex64(shash)},
                    {"experiment_hash", hex64(ehash)},
                    {"frame_config", json::parse(frame_config_to_json(fc))}};
    io::write_rcub(dataset_dir(cfg) / frame_name(i), cube.data, meta.dump());
    io::write_rcub(dataset_dir(cfg) / frame_name(i, "_intf"), cube.interference,
                   meta.dump());
    frames.push_back({{"index", i},
                      {"file", frame_name(i)},
                      {"gt_file", frame_name(i, "_intf")},
                      {"seed", fc.rng_seed}});
    std::printf("  frame %d: %zu objects, %zu interferers\n", i,
                fc.objects.size(), fc.interferers.size());
  }

  const json manifest{{"count", count},
                      {"spec_hash", hex64(shash)},
                      {"experiment_hash", hex64(ehash)},
                      {"frames", frames}};
  io::atomic_write(dataset_dir(cfg) / "manifest.json",
                   [&](std::ostream& os) { os << manifest.dump(2) << "\n"; });
  std::printf("generate: wrote %d cubes\n", count);
  return 0;
}

RdMap run_method(const ExperimentConfig& cfg, const ChainContext* ctx,
                 const std::string& method, const LoadedFrame& f) {
  if (method == "none") return process_none(f.cube.real_composite(), cfg.chain);
  if (method == "imfrac") return process_imfrac(*ctx, f.cube.real_composite());
  if (method == "imfrac-oracle") return process_imfrac_oracle(*ctx, f.cube);
  if (method == "zeroing") return baseline_zeroing(f.cube, false, cfg.chain);
  if (method == "zeroing-oracle") return baseline_zeroing(f.cube, true, cfg.chain);
  if (method == "rampfilter")
    return baseline_ramp_filter(f.cube.real_composite(), cfg.chain);
  throw io::ConfigError("run: unknown method " + method);
}

int cmd_run(ExperimentConfig cfg, const std::string& method, int frames_flag,
            int workers_flag) {
  const json manifest = read_manifest(cfg);
  const int limit = frame_limit(manifest, frames_flag);
  cfg.chain.cache_dir = effective_cache_dir(cfg);

  std::unique_ptr<ChainContext> ctx;
  if (method == "imfrac" || method == "imfrac-oracle") {
    std::printf("run: building transform context (N=%d, M=%d)\n",
                cfg.chain.frontend.padded_length(cfg.dataset.n_fast / 2),
                cfg.chain.imfrac.m_angles);
    ctx = std::make_unique<ChainContext>(
        make_chain_context(cfg.chain, cfg.dataset.n_fast));
  }
  const std::uint64_t chash = chain_config_hash(cfg.chain);
  std::printf("run: method %s, %d frames, chain config %s\n", method.c_str(),
              limit, hex64(chash).c_str());

  const fs::path out_dir = maps_dir(cfg, method);
  std::mutex log_mutex;
  std::atomic<int> next{0}, skipped{0}, failed{0};

  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < limit; i = next.fetch_add(1)) {
      const fs::path out_path = out_dir / frame_name(i);
      if (fs::exists(out_path)) {
        try {
          const json meta = json::parse(io::read_rcub(out_path).metadata);
          if (meta.at("config_hash").get<std::string>() == hex64(chash)) {
            std::lock_guard<std::mutex> lk(log_mutex);
            std::printf("  frame %d: up to date, skipped\n", i);
            ++skipped;
            continue;
          }
        } catch (const std::exception&) {
          // unreadable stale output: recompute below
        }
      }
      try {
        const LoadedFrame f = load_frame(cfg, i);
        const RdMap map = run_method(cfg, ctx.get(), method, f);
        const json meta{{"frame", i},
                        {"provenance", map.provenance},
                        {"config_hash", hex64(map.config_hash)},
                        {"ramps_mitigated", map.ramps_mitigated},
                        {"total_detections", map.total_detections},
                        {"converged", map.converged}};
        io::write_rcub(out_path, map.map, meta.dump());
        std::lock_guard<std::mutex> lk(log_mutex);
        std::printf("  frame %d: %d detections on %d ramps%s\n", i,
                    map.total_detections, map.ramps_mitigated,
                    map.converged ? "" : " (iteration cap hit)");
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(log_mutex);
        std::fprintf(stderr, "  frame %d: %s\n", i, e.what());
        ++failed;
      }
    }
  };

  int workers = workers_flag > 0
                    ? workers_flag
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, limit));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::printf("run: %d frames done (%d skipped) -> %s\n", limit - failed.load(),
              skipped.load(), out_dir.string().c_str());
  if (failed.load() > 0) throw io::DataError("run: some frames failed");
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, int frames_flag) {
  const json manifest = read_manifest(cfg);
  const int limit = frame_limit(manifest, frames_flag);

  std::vector<std::string> methods;
  const fs::path maps_root = fs::path(cfg.output_dir) / "maps";
  if (fs::is_directory(maps_root))
    for (const auto& entry : fs::directory_iterator(maps_root))
      if (entry.is_directory()) methods.push_back(entry.path().filename().string());
  std::sort(methods.begin(), methods.end());
  if (methods.empty())
    throw io::DataError("eval: no RD maps under " + maps_root.string() +
                        " (run `imfrac run` first)");

  const std::uint64_t ehash = experiment_hash(cfg);
  const std::string banner = "# experiment " + hex64(ehash) + "\n# spec " +
                             manifest.at("spec_hash").get<std::string>() + "\n";
  std::printf("eval: experiment %s, %d frames, methods:", hex64(ehash).c_str(),
              limit);
  for (const std::string& m : methods) std::printf(" %s", m.c_str());
  std::printf("\n");

  const char* metric_names[6] = {"mse", "sinr_db", "evm", "tpr", "far", "f1"};
  std::string table = banner + metrics_table_header() + "\n";
  std::map<std::string, std::array<std::vector<double>, 6>> series;

  for (int i = 0; i < limit; ++i) {
    const LoadedFrame f = load_frame(cfg, i);
    const RMat clean_real = (f.cube.data - f.cube.interference).real();
    const RdMap reference = process_none(clean_real, cfg.chain);
    const std::vector<GtCell> gt = ground_truth_cells(
        f.cube.config, f.cube.config.n_fast / 2, f.cube.config.n_ramps);

    for (const std::string& method : methods) {
      const fs::path map_path = maps_dir(cfg, method) / frame_name(i);
      io::RcubFile mf = io::read_rcub(map_path);
      if (!mf.is_complex)
        throw io::DataError("eval: map is not complex: " + map_path.string());
      RdMap test;
      test.map = std::move(mf.complex);
      const FrameMetrics fm = frame_metrics(test, reference, gt, cfg.metrics);
      table += metrics_table_row(i, method, fm) + "\n";
      auto& dst = series[method];
      const double vals[6] = {fm.mse, fm.sinr_db, fm.evm, fm.tpr, fm.far, fm.f1};
      for (int k = 0; k < 6; ++k) dst[static_cast<std::size_t>(k)].push_back(vals[k]);
    }
  }

  const fs::path out_dir = eval_dir(cfg);
  io::atomic_write(out_dir / "metrics.tsv",
                   [&](std::ostream& os) { os << table; });
  for (const auto& [method, cols] : series)
    for (int k = 0; k < 6; ++k) {
      const auto steps = ecdf(cols[static_cast<std::size_t>(k)]);
      io::atomic_write(
          out_dir / (std::string("ecdf_") + metric_names[k] + "_" + method + ".tsv"),
          [&](std::ostream& os) { os << banner << ecdf_lines(steps); });
    }

  auto median = [](std::vector<double> v) {
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    double r = v[m];
    if (v.size() % 2 == 0) {
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m) - 1,
                       v.end());
      r = 0.5 * (r + v[m - 1]);
    }
    return r;
  };
  for (const auto& [method, cols] : series) {
    std::printf("eval: %-14s medians:", method.c_str());
    for (int k = 0; k < 6; ++k)
      std::printf(" %s=%.4g", metric_names[k],
                  median(cols[static_cast<std::size_t>(k)]));
    std::printf("\n");
  }
  std::printf("eval: wrote %s\n", (out_dir / "metrics.tsv").string().c_str());
  return 0;
}

int cmd_stft(const ExperimentConfig& cfg, int frame, int ramp) {
  const LoadedFrame f = load_frame(cfg, frame);
  if (ramp < 0 || ramp >= f.cube.config.n_ramps)
    throw io::ConfigError("stft-dump: ramp index out of range");
  const CVec iq = digital_iq(RVec(f.cube.real_composite().col(ramp)));
  const RMat grid = stft_mag(iq, 64, 8);

  char name[64];
  std::snprintf(name, sizeof name, "stft_frame%04d_ramp%03d.tsv", frame, ramp);
  const fs::path path = fs::path(cfg.output_dir) / name;
  io::atomic_write(path, [&](std::ostream& os) {
    os << "# experiment " << hex64(experiment_hash(cfg)) << "\n";
    os << "# rows: frequency bins (0.." << grid.rows() - 1
       << "), cols: segments, values: magnitude dB\n";
    char buf[32];
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.6g",
                      20.0 * std::log10(grid(r, c) + 1e-12));
        os << (c ? "\t" : "") << buf;
      }
      os << "\n";
    }
  });
  std::printf("stft-dump: wrote %s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear-FM interference mitigation toolbox for FMCW radar"};
  app.require_subcommand(1);

  std::string config_path, method = "imfrac", out_override;
  int frames = 0, workers = 0, frame = 0, ramp = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_override, "override the config output_dir");
  };

  CLI::App* gen = app.add_subcommand("generate", "synthesize the dataset");
  add_common(gen);
  gen->add_option("--frames", frames, "generate only the first K frames");

  CLI::App* run = app.add_subcommand("run", "process the dataset with one method");
  add_common(run);
  run->add_option("--method", method, "processing method")
      ->check(CLI::IsMember({"imfrac", "imfrac-oracle", "zeroing",
                             "zeroing-oracle", "rampfilter", "none"}));
  run->add_option("--frames", frames, "process only the first K frames");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");

  CLI::App* ev = app.add_subcommand("eval", "score RD maps against ground truth");
  add_common(ev);
  ev->add_option("--frames", frames, "evaluate only the first K frames");

  CLI::App* st = app.add_subcommand("stft-dump", "dump a ramp's time-frequency grid");
  add_common(st);
  st->add_option("--frame", frame, "frame index");
  st->add_option("--ramp", ramp, "ramp index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (gen->parsed()) return cmd_generate(cfg, frames);
    if (run->parsed()) return cmd_run(cfg, method, frames, workers);
    if (ev->parsed()) return cmd_eval(cfg, frames);
    if (st->parsed()) return cmd_stft(cfg, frame, ramp);
    return 2;
  } catch (const io::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const io::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
