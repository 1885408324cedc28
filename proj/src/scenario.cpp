#include "risres/scenario.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "risres/conic.hpp"
#include "risres/fbl.hpp"
#include "risres/topology.hpp"

namespace risres::scenario {
namespace {

Eigen::VectorXd targets_of(const SystemConfig& config) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(config.rate_targets_bps.size()));
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    t(k) = config.rate_targets_bps[static_cast<std::size_t>(k)];
  }
  return t;
}

Eigen::VectorXd exported_rates(const sca::Iterate& it,
                               const SystemConfig& config) {
  return (it.rates_norm * config.bandwidth_hz).cwiseMax(0.0);
}

sca::AlternateOptions alternate_options(const SystemConfig& config) {
  sca::AlternateOptions opts;
  opts.time_budget_s = config.coherence_time_s;
  opts.step_time_s = config.per_subproblem_time_s;
  return opts;
}

// First non-optimal subproblem status of a trace, if any.
std::string trouble_of(const sca::AlternationTrace& trace) {
  for (const sca::StepRecord& rec : trace.steps) {
    if (rec.status != conic::SolveStatus::kOptimal) {
      return conic::to_string(rec.status);
    }
  }
  return {};
}

void note_failure(EpisodeResult& ep, const char* stage,
                  const sca::AlternationTrace& trace) {
  if (!trace.solver_trouble || ep.failed) return;
  ep.failed = true;
  ep.status = std::string(stage) + ": " + trouble_of(trace);
}

}  // namespace

const char* to_string(Decision decision) {
  return decision == Decision::kRecover ? "recover" : "ignore";
}

SteadyStateResult run_steady_state(const ChannelSet& channels,
                                   const SystemConfig& config, Rng& rng) {
  SteadyStateResult out;
  const auto nl = static_cast<Eigen::Index>(channels.dims());
  const auto k_total = static_cast<Eigen::Index>(channels.n_users);
  const auto m = static_cast<Eigen::Index>(channels.n_ris_elements);
  out.state.regime = Regime::kIbl;

  if (config.max_tx_power_w <= 0.0) {
    // Nothing can transmit; the steady state is the silent network.
    out.state.beamformers = Eigen::MatrixXcd::Zero(nl, k_total);
    out.state.phase_vector = Eigen::VectorXcd::Ones(m);
    out.state.rates_bps = Eigen::VectorXd::Zero(k_total);
    out.trace.final_psi = static_cast<double>(k_total);
    return out;
  }

  const sca::Iterate start = sca::initialize_iterate(channels, config, rng);
  out.trace =
      sca::alternate(channels, config, Regime::kIbl, start,
                     alternate_options(config));
  out.state.beamformers = out.trace.final.beamformers;
  out.state.phase_vector = out.trace.final.phase_vector;
  out.state.rates_bps = exported_rates(out.trace.final, config);
  return out;
}

metrics::RateSnapshot measure_absorption(const NetworkState& state,
                                         const ChannelSet& blocked,
                                         const SystemConfig& config) {
  const Eigen::VectorXd gamma =
      sinr_all(blocked, state.beamformers, state.phase_vector,
               config.noise_power_w);
  metrics::RateSnapshot snap;
  snap.targets_bps = targets_of(config);
  snap.rates_bps.resize(gamma.size());
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    snap.rates_bps(k) = std::min(state.rates_bps(k),
                                 ibl_rate(gamma(k), config.bandwidth_hz));
  }
  return snap;
}

DecisionOutcome decide_recovery(const ChannelSet& blocked,
                                const NetworkState& state,
                                const SystemConfig& config) {
  DecisionOutcome out;
  const metrics::RateSnapshot absorbed =
      measure_absorption(state, blocked, config);
  const double r_abs = metrics::absorption(absorbed, config.capped_metrics);

  sca::AlternateOptions popts = alternate_options(config);
  popts.time_budget_s = static_cast<double>(config.probe_steps) *
                        config.per_subproblem_time_s;
  popts.stop_on_convergence = false;  // fixed-length probe
  const sca::Iterate warm = sca::iterate_from_state(
      blocked, config, state.beamformers, state.phase_vector);
  out.probe = sca::alternate(blocked, config, Regime::kFbl, warm, popts);

  metrics::RateSnapshot probe_snap;
  probe_snap.targets_bps = absorbed.targets_bps;
  probe_snap.rates_bps = exported_rates(out.probe.final, config);
  const double r_ada_recover =
      metrics::adaptation(probe_snap, config.capped_metrics);
  metrics::Timeline probe_clock;
  probe_clock.t0_s = 0.0;
  probe_clock.tq_s = popts.time_budget_s;
  probe_clock.t0_max_s = config.t0_max_recovery_s;
  const double r_rec_recover = metrics::time_to_recovery(probe_clock);
  out.predicted_recover_r =
      metrics::resilience(r_abs, r_ada_recover, r_rec_recover, config.weights);

  const double r_ada_ignore =
      metrics::adaptation(absorbed, config.capped_metrics);
  out.predicted_ignore_r =
      metrics::resilience(r_abs, r_ada_ignore, 1.0, config.weights);

  out.decision = out.predicted_recover_r >= out.predicted_ignore_r
                     ? Decision::kRecover
                     : Decision::kIgnore;
  return out;
}

EpisodeResult run_episode(const SystemConfig& config, Rng& rng) {
  EpisodeResult ep;
  const Eigen::VectorXd targets = targets_of(config);
  ep.timeline.t0_s = 0.0;
  ep.timeline.tq_s = 0.0;
  ep.timeline.t0_max_s = config.t0_max_recovery_s;

  try {
    const Topology topo = generate_topology(config, rng);
    const ChannelSet channels = generate_channels(topo, config, rng);
    const SteadyStateResult steady = run_steady_state(channels, config, rng);
    ep.traces.push_back(steady.trace);
    note_failure(ep, "steady", steady.trace);
    ep.steady_state_rates_bps = steady.state.rates_bps;

    if (!config.inject_blockage) {
      // Control run: no disruption, nothing to decide or recover from.
      ep.post_blockage_rates_bps = steady.state.rates_bps;
      ep.recovered_rates_bps = steady.state.rates_bps;
      ep.decision = Decision::kIgnore;
      const metrics::RateSnapshot snap{steady.state.rates_bps, targets};
      ep.r_abs = metrics::absorption(snap, config.capped_metrics);
      ep.r_ada = metrics::adaptation(snap, config.capped_metrics);
      ep.r_rec = 1.0;
    } else {
      const ChannelSet blocked = apply_blockage(channels);
      const metrics::RateSnapshot absorbed =
          measure_absorption(steady.state, blocked, config);
      ep.post_blockage_rates_bps = absorbed.rates_bps;
      ep.r_abs = metrics::absorption(absorbed, config.capped_metrics);

      DecisionOutcome branch = decide_recovery(blocked, steady.state, config);
      note_failure(ep, "probe", branch.probe);
      ep.decision = branch.decision;
      ep.traces.push_back(std::move(branch.probe));

      if (ep.decision == Decision::kRecover) {
        // Fresh warm start from the degraded state; the probe is discarded.
        const sca::Iterate warm = sca::iterate_from_state(
            blocked, config, steady.state.beamformers,
            steady.state.phase_vector);
        const sca::AlternationTrace recovery = sca::alternate(
            blocked, config, Regime::kFbl, warm, alternate_options(config));
        note_failure(ep, "recovery", recovery);
        ep.recovery_steps = recovery.converged
                                ? recovery.convergence_step
                                : static_cast<int>(recovery.steps.size());
        ep.recovered_rates_bps = exported_rates(recovery.final, config);
        ep.traces.push_back(recovery);
        ep.timeline.tq_s = ep.timeline.t0_s +
                           static_cast<double>(ep.recovery_steps) *
                               config.per_subproblem_time_s;
        ep.r_rec = metrics::time_to_recovery(ep.timeline);
      } else if (config.ignore_policy == IgnorePolicy::kReoptimize) {
        // Comparison mode: adapt under IBL instead; still no recovery
        // lateness is charged, matching the ignore branch's semantics.
        const sca::Iterate warm = sca::iterate_from_state(
            blocked, config, steady.state.beamformers,
            steady.state.phase_vector);
        const sca::AlternationTrace retuned = sca::alternate(
            blocked, config, Regime::kIbl, warm, alternate_options(config));
        note_failure(ep, "ignore-reoptimize", retuned);
        ep.recovered_rates_bps = exported_rates(retuned.final, config);
        ep.traces.push_back(retuned);
        ep.r_rec = 1.0;
      } else {
        // Tolerate the disruption on the stale configuration.
        ep.recovered_rates_bps = absorbed.rates_bps;
        ep.r_rec = 1.0;
      }
      const metrics::RateSnapshot after{ep.recovered_rates_bps, targets};
      ep.r_ada = metrics::adaptation(after, config.capped_metrics);
    }

    ep.r = metrics::resilience(ep.r_abs, ep.r_ada, ep.r_rec, config.weights);
    ep.psi_final = metrics::adaptation_gap(ep.recovered_rates_bps, targets);
  } catch (const std::exception& err) {
    ep.failed = true;
    ep.status = err.what();
  }
  return ep;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("quartiles of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const auto at = [&values](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

SweepTable sweep(const SystemConfig& base,
                 const std::vector<std::size_t>& eta_grid,
                 const std::vector<std::size_t>& m_grid,
                 const std::vector<std::uint64_t>& seeds, int jobs) {
  if (eta_grid.empty() || m_grid.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep grids and seeds must be non-empty");
  }
  SweepTable table;
  const std::size_t n_cells = eta_grid.size() * m_grid.size() * seeds.size();
  table.rows.resize(n_cells);

  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t cell = 0;
       cell < static_cast<std::ptrdiff_t>(n_cells); ++cell) {
    const std::size_t idx = static_cast<std::size_t>(cell);
    const std::size_t i_seed = idx % seeds.size();
    const std::size_t i_m = (idx / seeds.size()) % m_grid.size();
    const std::size_t i_eta = idx / (seeds.size() * m_grid.size());

    SweepRow row;
    row.eta = eta_grid[i_eta];
    row.m = m_grid[i_m];
    row.seed = seeds[i_seed];
    try {
      SystemConfig config = base;
      config.blocklength = row.eta;
      config.n_ris_elements = row.m;
      config.rng_seed = row.seed;
      Rng rng(row.seed);
      const EpisodeResult ep = run_episode(config, rng);
      row.decision = ep.decision;
      row.r_abs = ep.r_abs;
      row.r_ada = ep.r_ada;
      row.r_rec = ep.r_rec;
      row.r = ep.r;
      row.psi_final = ep.psi_final;
      row.steps = ep.recovery_steps;
      row.status = ep.status;
      row.ok = !ep.failed;
    } catch (const std::exception& err) {
      row.status = err.what();
      row.ok = false;
    }
    table.rows[idx] = std::move(row);
  }

  for (const std::size_t eta : eta_grid) {
    for (const std::size_t m : m_grid) {
      SweepAggregate agg;
      agg.eta = eta;
      agg.m = m;
      std::vector<double> v_abs, v_ada, v_rec, v_r;
      for (const SweepRow& row : table.rows) {
        if (row.eta != eta || row.m != m) continue;
        if (!row.ok) {
          ++agg.n_failed;
          continue;
        }
        ++agg.n_ok;
        v_abs.push_back(row.r_abs);
        v_ada.push_back(row.r_ada);
        v_rec.push_back(row.r_rec);
        v_r.push_back(row.r);
      }
      if (agg.n_ok > 0) {
        agg.r_abs = quartiles(v_abs);
        agg.r_ada = quartiles(v_ada);
        agg.r_rec = quartiles(v_rec);
        agg.r = quartiles(v_r);
      }
      table.aggregates.push_back(agg);
    }
  }
  return table;
}

}  // namespace risres::scenario
