#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "risres/channel.hpp"
#include "risres/config.hpp"
#include "risres/metrics.hpp"
#include "risres/rng.hpp"
#include "risres/sca.hpp"

namespace risres::scenario {

enum class Decision { kRecover, kIgnore };

const char* to_string(Decision decision);

struct SteadyStateResult {
  NetworkState state;
  sca::AlternationTrace trace;
};

// IBL alternation from a fresh start until the coherence budget runs out or
// the convergence detector fires. A zero power budget short-circuits to the
// silent network (all-zero beamformers and rates).
SteadyStateResult run_steady_state(const ChannelSet& channels,
                                   const SystemConfig& config, Rng& rng);

// Rates right after the disruption: the unchanged (w, v) is re-evaluated on
// the blocked channels, and each allocated rate is capped by the
// now-achievable IBL rate.
metrics::RateSnapshot measure_absorption(const NetworkState& state,
                                         const ChannelSet& blocked,
                                         const SystemConfig& config);

struct DecisionOutcome {
  Decision decision = Decision::kRecover;
  double predicted_recover_r = 0.0;
  double predicted_ignore_r = 0.0;
  sca::AlternationTrace probe;  // fixed-length FBL probe behind the decision
};

// Probes finite-blocklength recovery for config.probe_steps alternation
// steps (discarded afterwards) and compares the predicted resilience of
// recovering against riding out the disruption on the degraded IBL rates.
// Ties pick recovery.
DecisionOutcome decide_recovery(const ChannelSet& blocked,
                                const NetworkState& state,
                                const SystemConfig& config);

struct EpisodeResult {
  Eigen::VectorXd steady_state_rates_bps;
  Eigen::VectorXd post_blockage_rates_bps;  // R_k(t_0)
  Eigen::VectorXd recovered_rates_bps;      // r_k(t_q)
  Decision decision = Decision::kIgnore;
  double r_abs = 0.0;
  double r_ada = 0.0;
  double r_rec = 0.0;
  double r = 0.0;
  metrics::Timeline timeline;
  // Steady state, then (when a disruption is injected) the decision probe,
  // then the recovery run when the recover branch is taken.
  std::vector<sca::AlternationTrace> traces;
  double psi_final = 0.0;
  int recovery_steps = 0;  // z* from the convergence detector, 0 without one
  bool failed = false;
  std::string status = "ok";
};

// One full episode: steady state, one blockage, absorption, branch decision,
// recovery or tolerated degradation, resilience scoring. Stage failures mark
// the episode failed with a diagnostic; they are never dropped.
EpisodeResult run_episode(const SystemConfig& config, Rng& rng);

struct SweepRow {
  std::size_t eta = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  Decision decision = Decision::kIgnore;
  double r_abs = 0.0;
  double r_ada = 0.0;
  double r_rec = 0.0;
  double r = 0.0;
  double psi_final = 0.0;
  int steps = 0;
  std::string status = "ok";
  bool ok = false;
};

struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

// Linear-interpolation quantiles of a sample (exposed for the independent
// checker in the tests). Throws on an empty sample.
Quartiles quartiles(std::vector<double> values);

struct SweepAggregate {
  std::size_t eta = 0;
  std::size_t m = 0;
  int n_ok = 0;
  int n_failed = 0;
  Quartiles r_abs;
  Quartiles r_ada;
  Quartiles r_rec;
  Quartiles r;
};

struct SweepTable {
  std::vector<SweepRow> rows;           // grid order: eta, then m, then seed
  std::vector<SweepAggregate> aggregates;  // per (eta, m), failures skipped
};

// One episode per (eta, m, seed) cell. Cells run independently (OpenMP
// fan-out; jobs <= 0 uses the library default); rows and aggregates are
// assembled in deterministic grid order regardless of completion order.
SweepTable sweep(const SystemConfig& base,
                 const std::vector<std::size_t>& eta_grid,
                 const std::vector<std::size_t>& m_grid,
                 const std::vector<std::uint64_t>& seeds, int jobs = 0);

}  // namespace risres::scenario
