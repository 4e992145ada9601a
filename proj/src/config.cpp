#include "imfrac/config.hpp"

#include <fstream>
#include <sstream>

#include "imfrac/io.hpp"
#include "json.hpp"

namespace imfrac {

namespace {

using nlohmann::json;

// Applies `obj` onto already-defaulted fields through `take`, refusing keys
// the schema does not know about.
class Section {
 public:
  Section(const json& obj, std::string name) : obj_(obj), name_(std::move(name)) {
    if (!obj.is_object())
      throw io::ConfigError("config: section '" + name_ + "' must be an object");
  }

  template <typename T>
  void take(const char* key, T& field) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      field = it->get<T>();
    } catch (const json::exception&) {
      throw io::ConfigError("config: bad value for '" + name_ + "." + key + "'");
    }
  }

  // nested object handled by the caller; only mark the key as known
  const json* child(const char* key) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  // call last: every key the schema did not claim is an error
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw io::ConfigError("config: unknown key '" + name_ + "." + it.key() +
                              "'");
    }
  }

 private:
  const json& obj_;
  std::string name_;
  std::vector<std::string> seen_;
};

void parse_dataset(const json& j, DatasetSpec& d) {
  Section s(j, "dataset");
  s.take("n_fast", d.n_fast);
  s.take("n_ramps", d.n_ramps);
  s.take("t_s", d.t_s);
  s.take("noise_power", d.noise_power);
  s.take("min_objects", d.min_objects);
  s.take("max_objects", d.max_objects);
  s.take("snr_db_min", d.snr_db_min);
  s.take("snr_db_max", d.snr_db_max);
  s.take("min_interferers", d.min_interferers);
  s.take("max_interferers", d.max_interferers);
  s.take("inr_db_min", d.inr_db_min);
  s.take("inr_db_max", d.inr_db_max);
  s.take("angle_deg_min", d.angle_deg_min);
  s.take("angle_deg_max", d.angle_deg_max);
  s.take("bandwidth", d.bandwidth);
  s.take("ramp_presence", d.ramp_presence);
  s.take("analysis_n", d.analysis_n);
  s.take("analysis_oversample", d.analysis_oversample);
  s.take("master_seed", d.master_seed);
  s.finish();
}

void parse_frontend(const json& j, FrontendConfig& f) {
  Section s(j, "frontend");
  s.take("window", f.window);
  s.take("pad_enabled", f.pad_enabled);
  s.take("oversample_num", f.oversample_num);
  s.take("oversample_den", f.oversample_den);
  s.take("zero_pad", f.zero_pad);
  s.take("highpass_cutoff", f.highpass_cutoff);
  s.finish();
}

void parse_mitigation(const json& j, ImfracConfig& m) {
  Section s(j, "mitigation");
  s.take("m_angles", m.m_angles);
  double alpha_deg = rad2deg(m.alpha_max);
  s.take("alpha_max_deg", alpha_deg);
  m.alpha_max = deg2rad(alpha_deg);
  s.take("guard_cells", m.detector.g);
  s.take("training_cells", m.detector.phi);  // 0 keeps the N/2 - G - 1 rule
  s.take("beta_db", m.detector.beta_db);
  s.take("support_threshold_db", m.support_threshold_db);
  s.take("template_duration_frac", m.template_duration_frac);
  s.take("max_outer_iters", m.max_outer_iters);
  s.take("max_inner_iters", m.max_inner_iters);
  s.take("half_fft", m.half_fft);
  s.finish();
}

void parse_chain(const json& j, ChainConfig& c) {
  Section s(j, "chain");
  s.take("range_window", c.range_window);
  s.take("doppler_window", c.doppler_window);
  s.take("mitigation_enabled", c.mitigation_enabled);
  s.take("lowpass_enabled", c.lowpass_enabled);
  s.take("ramp_filter_window", c.ramp_filter_window);
  s.take("envelope_ma", c.envelope_ma);
  s.take("envelope_c", c.envelope_c);
  std::string cache;
  s.take("cache_dir", cache);
  if (!cache.empty()) c.cache_dir = cache;
  s.finish();
}

void parse_metrics(const json& j, MetricsConfig& m) {
  Section s(j, "metrics");
  s.take("cfar_train", m.cfar_train);
  s.take("cfar_guard", m.cfar_guard);
  s.take("cfar_pfa", m.cfar_pfa);
  s.take("match_radius", m.match_radius);
  s.finish();
}

json dataset_json(const DatasetSpec& d) {
  return json{{"n_fast", d.n_fast},
              {"n_ramps", d.n_ramps},
              {"t_s", d.t_s},
              {"noise_power", d.noise_power},
              {"min_objects", d.min_objects},
              {"max_objects", d.max_objects},
              {"snr_db_min", d.snr_db_min},
              {"snr_db_max", d.snr_db_max},
              {"min_interferers", d.min_interferers},
              {"max_interferers", d.max_interferers},
              {"inr_db_min", d.inr_db_min},
              {"inr_db_max", d.inr_db_max},
              {"angle_deg_min", d.angle_deg_min},
              {"angle_deg_max", d.angle_deg_max},
              {"bandwidth", d.bandwidth},
              {"ramp_presence", d.ramp_presence},
              {"analysis_n", d.analysis_n},
              {"analysis_oversample", d.analysis_oversample},
              {"master_seed", d.master_seed}};
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw io::ConfigError(std::string("config: parse failure: ") + e.what());
  }

  ExperimentConfig cfg;
  Section root(j, "root");
  root.take("frame_count", cfg.frame_count);
  root.take("output_dir", cfg.output_dir);
  if (const json* d = root.child("dataset")) parse_dataset(*d, cfg.dataset);
  if (const json* f = root.child("frontend")) parse_frontend(*f, cfg.chain.frontend);
  if (const json* m = root.child("mitigation")) parse_mitigation(*m, cfg.chain.imfrac);
  if (const json* c = root.child("chain")) parse_chain(*c, cfg.chain);
  if (const json* me = root.child("metrics")) parse_metrics(*me, cfg.metrics);
  root.finish();

  if (cfg.frame_count < 1)
    throw io::ConfigError("config: frame_count must be positive");
  if (cfg.output_dir.empty())
    throw io::ConfigError("config: output_dir must be nonempty");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io::ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const FrontendConfig& f = cfg.chain.frontend;
  const ImfracConfig& m = cfg.chain.imfrac;
  const ChainConfig& c = cfg.chain;
  json j{
      {"frame_count", cfg.frame_count},
      {"output_dir", cfg.output_dir},
      {"dataset", dataset_json(cfg.dataset)},
      {"frontend",
       {{"window", f.window},
        {"pad_enabled", f.pad_enabled},
        {"oversample_num", f.oversample_num},
        {"oversample_den", f.oversample_den},
        {"zero_pad", f.zero_pad},
        {"highpass_cutoff", f.highpass_cutoff}}},
      {"mitigation",
       {{"m_angles", m.m_angles},
        {"alpha_max_deg", rad2deg(m.alpha_max)},
        {"guard_cells", m.detector.g},
        {"training_cells", m.detector.phi},
        {"beta_db", m.detector.beta_db},
        {"support_threshold_db", m.support_threshold_db},
        {"template_duration_frac", m.template_duration_frac},
        {"max_outer_iters", m.max_outer_iters},
        {"max_inner_iters", m.max_inner_iters},
        {"half_fft", m.half_fft}}},
      {"chain",
       {{"range_window", c.range_window},
        {"doppler_window", c.doppler_window},
        {"mitigation_enabled", c.mitigation_enabled},
        {"lowpass_enabled", c.lowpass_enabled},
        {"ramp_filter_window", c.ramp_filter_window},
        {"envelope_ma", c.envelope_ma},
        {"envelope_c", c.envelope_c},
        {"cache_dir", c.cache_dir.value_or("")}}},
      {"metrics",
       {{"cfar_train", cfg.metrics.cfar_train},
        {"cfar_guard", cfg.metrics.cfar_guard},
        {"cfar_pfa", cfg.metrics.cfar_pfa},
        {"match_radius", cfg.metrics.match_radius}}},
  };
  return j.dump(2);
}

std::uint64_t experiment_hash(const ExperimentConfig& cfg) {
  return io::fnv1a(config_to_json(cfg));
}

std::string frame_config_to_json(const FrameConfig& cfg) {
  json objects = json::array();
  for (const ObjectParams& o : cfg.objects)
    objects.push_back({{"amplitude", o.amplitude},
                       {"omega", o.omega},
                       {"phi", o.phi},
                       {"doppler_step", o.doppler_step}});
  json interferers = json::array();
  for (const InterferenceParams& p : cfg.interferers)
    interferers.push_back({{"amplitude", p.amplitude},
                           {"chirp_rate", p.chirp_rate},
                           {"tau", p.tau},
                           {"phi0", p.phi0},
                           {"bandwidth", p.bandwidth},
                           {"present", p.present},
                           {"phi0_per_ramp", p.phi0_per_ramp}});
  json j{{"n_fast", cfg.n_fast},        {"n_ramps", cfg.n_ramps},
         {"t_s", cfg.t_s},              {"noise_power", cfg.noise_power},
         {"rng_seed", cfg.rng_seed},    {"objects", objects},
         {"interferers", interferers}};
  return j.dump();
}

FrameConfig frame_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw io::DataError(std::string("frame config: parse failure: ") + e.what());
  }
  try {
    FrameConfig cfg;
    cfg.n_fast = j.at("n_fast").get<int>();
    cfg.n_ramps = j.at("n_ramps").get<int>();
    cfg.t_s = j.at("t_s").get<double>();
    cfg.noise_power = j.at("noise_power").get<double>();
    cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    for (const json& o : j.at("objects")) {
      ObjectParams p;
      p.amplitude = o.at("amplitude").get<double>();
      p.omega = o.at("omega").get<double>();
      p.phi = o.at("phi").get<double>();
      p.doppler_step = o.at("doppler_step").get<double>();
      cfg.objects.push_back(p);
    }
    for (const json& i : j.at("interferers")) {
      InterferenceParams p;
      p.amplitude = i.at("amplitude").get<double>();
      p.chirp_rate = i.at("chirp_rate").get<double>();
      p.tau = i.at("tau").get<double>();
      p.phi0 = i.at("phi0").get<double>();
      p.bandwidth = i.at("bandwidth").get<double>();
      p.present = i.at("present").get<std::vector<std::uint8_t>>();
      p.phi0_per_ramp = i.at("phi0_per_ramp").get<std::vector<double>>();
      cfg.interferers.push_back(p);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw io::DataError(std::string("frame config: missing field: ") + e.what());
  }
}

}  // namespace imfrac
