#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "risres/config.hpp"
#include "risres/scenario.hpp"

namespace risres::experiment {

struct SweepPlan {
  std::vector<std::size_t> eta_grid;  // blocklengths
  std::vector<std::size_t> m_grid;    // RIS element counts
  // Scalar per-user rate targets to sweep (Mbps); empty runs a single family
  // with the targets from [system].
  std::vector<double> rate_target_grid_mbps;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentSpec {
  SystemConfig system;
  SweepPlan sweep;
  std::string output_dir = "out";
  bool emit_plots = true;
};

// Parses an INI-style experiment description: [system], [sweep] and [output]
// sections, defaults applied for missing keys, units converted at this
// boundary (dBm -> W, Mbps -> bit/s). Unknown keys, malformed values and
// invalid parameter combinations raise ConfigError / io::ParseError carrying
// origin:line and the offending field.
ExperimentSpec parse_spec(const std::string& text, const std::string& origin);
ExperimentSpec load_spec(const std::string& path);

// Canonical resolved form with every knob spelled out in exact linear units,
// so parse_spec(render_spec(s)) reproduces s bit for bit.
std::string render_spec(const ExperimentSpec& spec);

// Artifact serializers, exposed for the determinism tests.
std::vector<std::string> trace_labels(const scenario::EpisodeResult& episode);
std::string episode_json_line(const scenario::EpisodeResult& episode,
                              std::uint64_t seed);
std::string trace_csv(const scenario::EpisodeResult& episode);
std::string sweep_csv(const std::vector<scenario::SweepRow>& rows);
std::string aggregate_csv(
    const std::vector<scenario::SweepAggregate>& aggregates);

// Subcommands; each returns a process exit code. All artifact bytes are
// deterministic functions of the spec (shortest round-trip number formatting
// and fixed row order), so repeated runs produce identical files.
int cmd_validate(const ExperimentSpec& spec, std::ostream& out);
int cmd_run(const ExperimentSpec& spec, std::ostream& log);
int cmd_sweep(const ExperimentSpec& spec, int jobs, std::ostream& log);

}  // namespace risres::experiment
