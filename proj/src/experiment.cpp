#include "risres/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "risres/io.hpp"
#include "risres/rng.hpp"

namespace risres::experiment {
namespace {

constexpr const char* kSystem = "system";
constexpr const char* kSweep = "sweep";
constexpr const char* kOutput = "output";

const char* kind_name(sca::SubproblemKind kind) {
  return kind == sca::SubproblemKind::kBeamforming ? "beamforming" : "phase";
}

// CSV field with RFC-4180 quoting for the rare free-text columns.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Typed access to Ini entries with field-naming errors and tracking of
// consumed keys so typos surface instead of being silently ignored.
class Reader {
 public:
  explicit Reader(const io::Ini& ini) : ini_(ini) {}

  const io::IniEntry* take(const std::string& sec, const std::string& key) {
    const auto* entry = ini_.find(sec, key);
    if (entry != nullptr) used_.insert(sec + "." + key);
    return entry;
  }

  [[noreturn]] void fail(const io::IniEntry& entry, const std::string& sec,
                         const std::string& key,
                         const std::string& message) const {
    throw ConfigError(ini_.origin() + ":" + std::to_string(entry.line) +
                      ": [" + sec + "] " + key + ": " + message);
  }

  double parse_real(const io::IniEntry& entry, const std::string& sec,
                    const std::string& key, const std::string& text) const {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto result = std::from_chars(text.data(), end, value);
    if (result.ec != std::errc() || result.ptr != end) {
      fail(entry, sec, key, "not a number: '" + text + "'");
    }
    return value;
  }

  std::uint64_t parse_count(const io::IniEntry& entry, const std::string& sec,
                            const std::string& key,
                            const std::string& text) const {
    std::uint64_t value = 0;
    const char* end = text.data() + text.size();
    const auto result = std::from_chars(text.data(), end, value);
    if (result.ec != std::errc() || result.ptr != end) {
      fail(entry, sec, key, "not a nonnegative integer: '" + text + "'");
    }
    return value;
  }

  double real(const std::string& sec, const std::string& key,
              double fallback) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return fallback;
    return parse_real(*entry, sec, key, entry->value);
  }

  std::size_t count(const std::string& sec, const std::string& key,
                    std::size_t fallback) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return fallback;
    return static_cast<std::size_t>(
        parse_count(*entry, sec, key, entry->value));
  }

  std::uint64_t seed(const std::string& sec, const std::string& key,
                     std::uint64_t fallback) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return fallback;
    return parse_count(*entry, sec, key, entry->value);
  }

  bool flag(const std::string& sec, const std::string& key, bool fallback) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return fallback;
    if (entry->value == "true") return true;
    if (entry->value == "false") return false;
    fail(*entry, sec, key, "expected true or false: '" + entry->value + "'");
  }

  std::string word(const std::string& sec, const std::string& key,
                   std::string fallback) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return fallback;
    return entry->value;
  }

  std::vector<std::string> items(const io::IniEntry& entry,
                                 const std::string& sec,
                                 const std::string& key) const {
    if (entry.value.empty()) return {};
    auto parts = io::split_list(entry.value);
    for (const auto& part : parts) {
      if (part.empty()) fail(entry, sec, key, "empty list item");
    }
    return parts;
  }

  std::optional<std::vector<double>> real_list(const std::string& sec,
                                               const std::string& key) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return std::nullopt;
    std::vector<double> values;
    for (const auto& part : items(*entry, sec, key)) {
      values.push_back(parse_real(*entry, sec, key, part));
    }
    return values;
  }

  std::optional<std::vector<std::uint64_t>> count_list(const std::string& sec,
                                                       const std::string& key) {
    const auto* entry = take(sec, key);
    if (entry == nullptr) return std::nullopt;
    std::vector<std::uint64_t> values;
    for (const auto& part : items(*entry, sec, key)) {
      values.push_back(parse_count(*entry, sec, key, part));
    }
    return values;
  }

  // Reports the first key that no reader consumed and any unexpected section.
  void finish() const {
    for (const auto& [sec, entries] : ini_.sections()) {
      if (sec != kSystem && sec != kSweep && sec != kOutput) {
        throw ConfigError(ini_.origin() + ": unknown section [" + sec + "]");
      }
      for (const auto& [key, entry] : entries) {
        if (used_.count(sec + "." + key) == 0) {
          throw ConfigError(ini_.origin() + ":" + std::to_string(entry.line) +
                            ": unknown key '" + key + "' in [" + sec + "]");
        }
      }
    }
  }

  const io::Ini& ini() const { return ini_; }

 private:
  const io::Ini& ini_;
  std::set<std::string> used_;
};

// A quantity that may be given linearly or in dB-milliwatts, but not both.
double power_watts(Reader& reader, const std::string& key_w,
                   const std::string& key_dbm, double fallback_w) {
  const auto* in_w = reader.take(kSystem, key_w);
  const auto* in_dbm = reader.take(kSystem, key_dbm);
  if (in_w != nullptr && in_dbm != nullptr) {
    reader.fail(*in_dbm, kSystem, key_dbm, "conflicts with '" + key_w + "'");
  }
  if (in_w != nullptr) {
    return reader.parse_real(*in_w, kSystem, key_w, in_w->value);
  }
  if (in_dbm != nullptr) {
    return dbm_to_watts(
        reader.parse_real(*in_dbm, kSystem, key_dbm, in_dbm->value));
  }
  return fallback_w;
}

std::vector<std::size_t> to_sizes(const std::vector<std::uint64_t>& values) {
  std::vector<std::size_t> out;
  out.reserve(values.size());
  for (auto v : values) out.push_back(static_cast<std::size_t>(v));
  return out;
}

template <typename T>
std::string join_counts(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += io::format_double(values[i]);
  }
  return out;
}

nlohmann::ordered_json json_array(const Eigen::VectorXd& v) {
  auto arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void append_quartiles(std::string& out, const scenario::SweepAggregate& agg,
                      const scenario::Quartiles& q) {
  if (agg.n_ok == 0) {
    out += ",,,";  // undefined: every seed in the cell failed
    return;
  }
  out += ',' + io::format_double(q.q25) + ',' + io::format_double(q.median) +
         ',' + io::format_double(q.q75);
}

struct TargetFamily {
  std::string label;   // file-name stem component
  std::string legend;  // chart legend text
  std::vector<double> targets_bps;
};

std::vector<TargetFamily> target_families(const ExperimentSpec& spec) {
  std::vector<TargetFamily> families;
  if (spec.sweep.rate_target_grid_mbps.empty()) {
    families.push_back({"base", "targets from [system]",
                        spec.system.rate_targets_bps});
    return families;
  }
  for (double mbps : spec.sweep.rate_target_grid_mbps) {
    const std::string value = io::format_double(mbps);
    families.push_back(
        {"rdes_" + value + "mbps", "r_des = " + value + " Mbps",
         std::vector<double>(spec.system.n_users, mbps * 1e6)});
  }
  return families;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text, const std::string& origin) {
  const io::Ini ini = io::Ini::parse(text, origin);
  Reader reader(ini);

  ExperimentSpec spec;
  SystemConfig& sys = spec.system;
  const double default_target_bps = sys.rate_targets_bps.front();

  sys.n_aps = reader.count(kSystem, "n_aps", sys.n_aps);
  sys.antennas_per_ap =
      reader.count(kSystem, "antennas_per_ap", sys.antennas_per_ap);
  sys.n_users = reader.count(kSystem, "n_users", sys.n_users);
  sys.n_ris_elements =
      reader.count(kSystem, "n_ris_elements", sys.n_ris_elements);
  sys.bandwidth_hz = reader.real(kSystem, "bandwidth_hz", sys.bandwidth_hz);
  sys.noise_power_w = power_watts(reader, "noise_power_w", "noise_power_dbm",
                                  sys.noise_power_w);
  sys.max_tx_power_w = power_watts(reader, "max_tx_power_w",
                                   "max_tx_power_dbm", sys.max_tx_power_w);
  sys.carrier_wavelength_m =
      reader.real(kSystem, "carrier_wavelength_m", sys.carrier_wavelength_m);
  sys.element_spacing_m =
      reader.real(kSystem, "element_spacing_m", sys.element_spacing_m);
  sys.area_half_extent_m =
      reader.real(kSystem, "area_half_extent_m", sys.area_half_extent_m);
  sys.shadowing_std_db =
      reader.real(kSystem, "shadowing_std_db", sys.shadowing_std_db);
  sys.bler = reader.real(kSystem, "bler", sys.bler);
  sys.blocklength = reader.count(kSystem, "blocklength", sys.blocklength);

  // Targets: a scalar applies to every user; a list must match n_users.
  {
    const auto* in_bps = reader.take(kSystem, "rate_targets_bps");
    const auto* in_mbps = reader.take(kSystem, "rate_targets_mbps");
    if (in_bps != nullptr && in_mbps != nullptr) {
      reader.fail(*in_mbps, kSystem, "rate_targets_mbps",
                  "conflicts with 'rate_targets_bps'");
    }
    const auto* entry = in_bps != nullptr ? in_bps : in_mbps;
    const double scale = in_bps != nullptr ? 1.0 : 1e6;
    const char* key = in_bps != nullptr ? "rate_targets_bps"
                                        : "rate_targets_mbps";
    if (entry == nullptr) {
      sys.rate_targets_bps.assign(sys.n_users, default_target_bps);
    } else {
      std::vector<double> values;
      for (const auto& part : reader.items(*entry, kSystem, key)) {
        values.push_back(scale *
                         reader.parse_real(*entry, kSystem, key, part));
      }
      if (values.size() == 1) {
        sys.rate_targets_bps.assign(sys.n_users, values.front());
      } else if (values.size() == sys.n_users) {
        sys.rate_targets_bps = values;
      } else {
        reader.fail(*entry, kSystem, key,
                    "expected 1 or n_users = " + std::to_string(sys.n_users) +
                        " values, got " + std::to_string(values.size()));
      }
    }
  }

  if (auto weights = reader.real_list(kSystem, "resilience_weights")) {
    if (weights->size() != 3) {
      reader.fail(*reader.ini().find(kSystem, "resilience_weights"), kSystem,
                  "resilience_weights",
                  "expected 3 values (absorption, adaptation, recovery)");
    }
    sys.weights.absorption = (*weights)[0];
    sys.weights.adaptation = (*weights)[1];
    sys.weights.recovery = (*weights)[2];
  }

  sys.t0_max_recovery_s =
      reader.real(kSystem, "t0_max_recovery_s", sys.t0_max_recovery_s);
  sys.coherence_time_s =
      reader.real(kSystem, "coherence_time_s", sys.coherence_time_s);
  sys.per_subproblem_time_s =
      reader.real(kSystem, "per_subproblem_time_s", sys.per_subproblem_time_s);
  sys.penalty_weight =
      reader.real(kSystem, "penalty_weight", sys.penalty_weight);
  sys.rng_seed = reader.seed(kSystem, "rng_seed", sys.rng_seed);
  sys.capped_metrics =
      reader.flag(kSystem, "capped_metrics", sys.capped_metrics);
  sys.inject_blockage =
      reader.flag(kSystem, "inject_blockage", sys.inject_blockage);
  {
    const auto* entry = reader.take(kSystem, "ignore_policy");
    if (entry != nullptr) {
      if (entry->value == "stale") {
        sys.ignore_policy = IgnorePolicy::kStaleBeamformers;
      } else if (entry->value == "reoptimize") {
        sys.ignore_policy = IgnorePolicy::kReoptimize;
      } else {
        reader.fail(*entry, kSystem, "ignore_policy",
                    "expected stale or reoptimize: '" + entry->value + "'");
      }
    }
  }
  sys.probe_steps = reader.count(kSystem, "probe_steps", sys.probe_steps);

  SweepPlan& plan = spec.sweep;
  plan.eta_grid =
      to_sizes(reader.count_list(kSweep, "eta_grid")
                   .value_or(std::vector<std::uint64_t>{sys.blocklength}));
  plan.m_grid =
      to_sizes(reader.count_list(kSweep, "m_grid")
                   .value_or(std::vector<std::uint64_t>{sys.n_ris_elements}));
  plan.rate_target_grid_mbps =
      reader.real_list(kSweep, "rate_target_grid_mbps")
          .value_or(std::vector<double>{});
  plan.seeds = reader.count_list(kSweep, "seeds")
                   .value_or(std::vector<std::uint64_t>{sys.rng_seed});

  spec.output_dir = reader.word(kOutput, "dir", spec.output_dir);
  spec.emit_plots = reader.flag(kOutput, "emit_plots", spec.emit_plots);

  reader.finish();

  try {
    sys.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  const auto plan_error = [&origin](const std::string& message) {
    throw ConfigError(origin + ": [sweep] " + message);
  };
  if (plan.eta_grid.empty()) plan_error("eta_grid must list at least one value");
  if (plan.m_grid.empty()) plan_error("m_grid must list at least one value");
  if (plan.seeds.empty()) plan_error("seeds must list at least one value");
  for (std::size_t eta : plan.eta_grid) {
    if (eta == 0) plan_error("eta_grid: blocklengths must be positive");
  }
  for (std::size_t m : plan.m_grid) {
    if (m == 0) plan_error("m_grid: element counts must be positive");
  }
  for (double mbps : plan.rate_target_grid_mbps) {
    if (!(mbps > 0.0) || !std::isfinite(mbps)) {
      plan_error("rate_target_grid_mbps: targets must be positive and finite");
    }
  }
  if (spec.output_dir.empty()) {
    throw ConfigError(origin + ": [output] dir must not be empty");
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  return parse_spec(io::read_text_file(path), path);
}

std::string render_spec(const ExperimentSpec& spec) {
  const auto& s = spec.system;
  const auto fd = io::format_double;
  std::ostringstream out;
  out << "# resolved experiment configuration (defaults applied; exact linear"
         " units,\n# so reloading this file reproduces the run bit for"
         " bit)\n";
  out << "[system]\n";
  out << "n_aps = " << s.n_aps << "\n";
  out << "antennas_per_ap = " << s.antennas_per_ap << "\n";
  out << "n_users = " << s.n_users << "\n";
  out << "n_ris_elements = " << s.n_ris_elements << "\n";
  out << "bandwidth_hz = " << fd(s.bandwidth_hz) << "\n";
  out << "noise_power_w = " << fd(s.noise_power_w) << "\n";
  out << "max_tx_power_w = " << fd(s.max_tx_power_w) << "\n";
  out << "carrier_wavelength_m = " << fd(s.carrier_wavelength_m) << "\n";
  out << "element_spacing_m = " << fd(s.element_spacing_m) << "\n";
  out << "area_half_extent_m = " << fd(s.area_half_extent_m) << "\n";
  out << "shadowing_std_db = " << fd(s.shadowing_std_db) << "\n";
  out << "bler = " << fd(s.bler) << "\n";
  out << "blocklength = " << s.blocklength << "\n";
  out << "rate_targets_bps = " << join_reals(s.rate_targets_bps) << "\n";
  out << "resilience_weights = " << fd(s.weights.absorption) << ", "
      << fd(s.weights.adaptation) << ", " << fd(s.weights.recovery) << "\n";
  out << "t0_max_recovery_s = " << fd(s.t0_max_recovery_s) << "\n";
  out << "coherence_time_s = " << fd(s.coherence_time_s) << "\n";
  out << "per_subproblem_time_s = " << fd(s.per_subproblem_time_s) << "\n";
  out << "penalty_weight = " << fd(s.penalty_weight) << "\n";
  out << "rng_seed = " << s.rng_seed << "\n";
  out << "capped_metrics = " << (s.capped_metrics ? "true" : "false") << "\n";
  out << "inject_blockage = " << (s.inject_blockage ? "true" : "false")
      << "\n";
  out << "ignore_policy = "
      << (s.ignore_policy == IgnorePolicy::kReoptimize ? "reoptimize"
                                                       : "stale")
      << "\n";
  out << "probe_steps = " << s.probe_steps << "\n";
  out << "\n[sweep]\n";
  out << "eta_grid = " << join_counts(spec.sweep.eta_grid) << "\n";
  out << "m_grid = " << join_counts(spec.sweep.m_grid) << "\n";
  out << "rate_target_grid_mbps = "
      << join_reals(spec.sweep.rate_target_grid_mbps) << "\n";
  out << "seeds = " << join_counts(spec.sweep.seeds) << "\n";
  out << "\n[output]\n";
  out << "dir = " << spec.output_dir << "\n";
  out << "emit_plots = " << (spec.emit_plots ? "true" : "false") << "\n";
  return out.str();
}

std::vector<std::string> trace_labels(const scenario::EpisodeResult& episode) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < episode.traces.size(); ++i) {
    if (i == 0) {
      labels.emplace_back("steady");
    } else if (i == 1) {
      labels.emplace_back("probe");
    } else if (i == 2) {
      labels.emplace_back(episode.decision == scenario::Decision::kRecover
                              ? "recovery"
                              : "reoptimize");
    } else {
      labels.push_back("trace" + std::to_string(i));
    }
  }
  return labels;
}

std::string episode_json_line(const scenario::EpisodeResult& episode,
                              std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["decision"] = scenario::to_string(episode.decision);
  j["r_abs"] = episode.r_abs;
  j["r_ada"] = episode.r_ada;
  j["r_rec"] = episode.r_rec;
  j["r"] = episode.r;
  j["psi_final"] = episode.psi_final;
  j["recovery_steps"] = episode.recovery_steps;
  j["failed"] = episode.failed;
  j["status"] = episode.status;
  j["timeline"] = nlohmann::ordered_json{
      {"t0_s", episode.timeline.t0_s},
      {"tq_s", episode.timeline.tq_s},
      {"t0_max_s", episode.timeline.t0_max_s}};
  j["steady_state_rates_bps"] = json_array(episode.steady_state_rates_bps);
  j["post_blockage_rates_bps"] = json_array(episode.post_blockage_rates_bps);
  j["recovered_rates_bps"] = json_array(episode.recovered_rates_bps);
  auto traces = nlohmann::ordered_json::array();
  const auto labels = trace_labels(episode);
  for (std::size_t i = 0; i < episode.traces.size(); ++i) {
    const auto& trace = episode.traces[i];
    nlohmann::ordered_json t;
    t["label"] = labels[i];
    t["converged"] = trace.converged;
    t["convergence_step"] = trace.convergence_step;
    t["final_psi"] = trace.final_psi;
    t["solver_trouble"] = trace.solver_trouble;
    auto steps = nlohmann::ordered_json::array();
    for (const auto& rec : trace.steps) {
      steps.push_back(nlohmann::ordered_json{
          {"step", rec.step},
          {"kind", kind_name(rec.kind)},
          {"psi", rec.psi},
          {"status", conic::to_string(rec.status)},
          {"model_time_s", rec.model_time_s}});
    }
    t["steps"] = std::move(steps);
    traces.push_back(std::move(t));
  }
  j["traces"] = std::move(traces);
  return j.dump();
}

std::string trace_csv(const scenario::EpisodeResult& episode) {
  std::string out = "trace,step,kind,psi,status,model_time_s\n";
  const auto labels = trace_labels(episode);
  for (std::size_t i = 0; i < episode.traces.size(); ++i) {
    for (const auto& rec : episode.traces[i].steps) {
      out += labels[i];
      out += ',' + std::to_string(rec.step);
      out += ',';
      out += kind_name(rec.kind);
      out += ',' + io::format_double(rec.psi);
      out += ',';
      out += conic::to_string(rec.status);
      out += ',' + io::format_double(rec.model_time_s);
      out += '\n';
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<scenario::SweepRow>& rows) {
  std::string out =
      "eta,m,seed,decision,r_abs,r_ada,r_rec,r,psi_final,steps,status\n";
  for (const auto& row : rows) {
    out += std::to_string(row.eta);
    out += ',' + std::to_string(row.m);
    out += ',' + std::to_string(row.seed);
    out += ',';
    out += scenario::to_string(row.decision);
    out += ',' + io::format_double(row.r_abs);
    out += ',' + io::format_double(row.r_ada);
    out += ',' + io::format_double(row.r_rec);
    out += ',' + io::format_double(row.r);
    out += ',' + io::format_double(row.psi_final);
    out += ',' + std::to_string(row.steps);
    out += ',' + csv_field(row.status);
    out += '\n';
  }
  return out;
}

std::string aggregate_csv(
    const std::vector<scenario::SweepAggregate>& aggregates) {
  std::string out =
      "eta,m,n_ok,n_failed,"
      "r_abs_q25,r_abs_median,r_abs_q75,"
      "r_ada_q25,r_ada_median,r_ada_q75,"
      "r_rec_q25,r_rec_median,r_rec_q75,"
      "r_q25,r_median,r_q75\n";
  for (const auto& agg : aggregates) {
    out += std::to_string(agg.eta);
    out += ',' + std::to_string(agg.m);
    out += ',' + std::to_string(agg.n_ok);
    out += ',' + std::to_string(agg.n_failed);
    append_quartiles(out, agg, agg.r_abs);
    append_quartiles(out, agg, agg.r_ada);
    append_quartiles(out, agg, agg.r_rec);
    append_quartiles(out, agg, agg.r);
    out += '\n';
  }
  return out;
}

int cmd_validate(const ExperimentSpec& spec, std::ostream& out) {
  out << render_spec(spec);
  out << "# configuration ok\n";
  return 0;
}

int cmd_run(const ExperimentSpec& spec, std::ostream& log) {
  const std::filesystem::path dir(spec.output_dir);
  io::write_text_file((dir / "resolved.ini").string(), render_spec(spec));
  Rng rng(spec.system.rng_seed);
  const auto episode = scenario::run_episode(spec.system, rng);
  io::write_text_file(
      (dir / "episode.jsonl").string(),
      episode_json_line(episode, spec.system.rng_seed) + "\n");
  io::write_text_file((dir / "trace.csv").string(), trace_csv(episode));
  log << "episode seed=" << spec.system.rng_seed
      << " decision=" << scenario::to_string(episode.decision)
      << " r_abs=" << io::format_double(episode.r_abs)
      << " r_ada=" << io::format_double(episode.r_ada)
      << " r_rec=" << io::format_double(episode.r_rec)
      << " r=" << io::format_double(episode.r) << " status=" << episode.status
      << "\n";
  log << "artifacts in " << dir.string()
      << ": resolved.ini, episode.jsonl, trace.csv\n";
  return episode.failed ? 1 : 0;
}

int cmd_sweep(const ExperimentSpec& spec, int jobs, std::ostream& log) {
  const std::filesystem::path dir(spec.output_dir);
  io::write_text_file((dir / "resolved.ini").string(), render_spec(spec));

  const auto families = target_families(spec);
  std::vector<std::vector<scenario::SweepAggregate>> family_aggregates;
  std::size_t episodes = 0;
  std::size_t failures = 0;
  for (const auto& family : families) {
    SystemConfig config = spec.system;
    config.rate_targets_bps = family.targets_bps;
    const auto table = scenario::sweep(config, spec.sweep.eta_grid,
                                       spec.sweep.m_grid, spec.sweep.seeds,
                                       jobs);
    episodes += table.rows.size();
    for (const auto& row : table.rows) {
      if (!row.ok) ++failures;
    }
    io::write_text_file((dir / ("sweep_" + family.label + ".csv")).string(),
                        sweep_csv(table.rows));
    io::write_text_file(
        (dir / ("aggregate_" + family.label + ".csv")).string(),
        aggregate_csv(table.aggregates));
    family_aggregates.push_back(table.aggregates);
    log << "family " << family.label << ": " << table.rows.size()
        << " episodes done\n";
  }

  if (spec.emit_plots) {
    for (std::size_t m : spec.sweep.m_grid) {
      std::vector<io::ChartSeries> series;
      for (std::size_t f = 0; f < families.size(); ++f) {
        io::ChartSeries s;
        s.label = families[f].legend;
        for (const auto& agg : family_aggregates[f]) {
          if (agg.m == m && agg.n_ok > 0) {
            s.points.emplace_back(static_cast<double>(agg.eta), agg.r.median);
          }
        }
        series.push_back(std::move(s));
      }
      const std::string svg = io::render_line_chart_svg(
          "median resilience vs blocklength, M = " + std::to_string(m),
          "blocklength eta", "median resilience r", /*log_x=*/true, series);
      io::write_text_file(
          (dir / ("resilience_m" + std::to_string(m) + ".svg")).string(),
          svg);
    }
  }

  log << "sweep: " << episodes << " episodes (" << failures << " failed), "
      << families.size() << " target famil"
      << (families.size() == 1 ? "y" : "ies") << "; artifacts in "
      << dir.string() << "\n";
  return 0;
}

}  // namespace risres::experiment
