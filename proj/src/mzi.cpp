#include "qss/mzi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qss {

namespace {

constexpr double k_gate_sigmas = 4.0;

void validate_config(const StabilizerConfig& config) {
  if (!(config.dither_fraction > 0.0 && config.dither_fraction < 1.0)) {
    throw std::invalid_argument("StabilizerConfig.dither_fraction must lie in (0, 1)");
  }
  if (!(config.update_rate_hz > 0.0)) {
    throw std::invalid_argument("StabilizerConfig.update_rate_hz must be positive");
  }
  if (config.rounds_per_estimate < 1) {
    throw std::invalid_argument("StabilizerConfig.rounds_per_estimate must be positive");
  }
}

}  // namespace

double dither_amplitude(const StabilizerConfig& config) {
  validate_config(config);
  return config.dither_fraction * std::numbers::pi;
}

double step_drift(const DriftModel& model, double dt_s, RngStream& rng) {
  if (!(model.sigma_rw >= 0.0)) {
    throw std::invalid_argument("DriftModel.sigma_rw must be non-negative");
  }
  if (!(dt_s > 0.0)) {
    throw std::invalid_argument("step_drift: dt must be positive");
  }
  if (model.sigma_rw == 0.0) return 0.0;
  return model.sigma_rw * std::sqrt(dt_s) * rng.gaussian();
}

double monitor_qber(double theta_total, double v_eff, int n_rounds, RngStream& rng) {
  if (n_rounds < 1) {
    throw std::invalid_argument("monitor_qber: n_rounds must be positive");
  }
  if (!(v_eff >= 0.0 && v_eff <= 1.0)) {
    throw std::invalid_argument("monitor_qber: v_eff must lie in [0, 1]");
  }
  const double p_err = std::clamp(0.5 * (1.0 - v_eff * std::cos(theta_total)), 0.0, 1.0);
  const std::uint64_t errors = rng.binomial(static_cast<std::uint64_t>(n_rounds), p_err);
  return static_cast<double>(errors) / static_cast<double>(n_rounds);
}

StabilizerState stabilizer_step(const StabilizerState& state, const StabilizerConfig& config,
                                const std::function<double(double)>& plant) {
  validate_config(config);
  if (!plant) {
    throw std::invalid_argument("stabilizer_step: plant callable required");
  }
  const double delta = dither_amplitude(config);
  StabilizerState next = state;
  next.last_qber_plus = plant(state.actuator_phase + delta);
  next.last_qber_minus = plant(state.actuator_phase - delta);
  const double n = static_cast<double>(config.rounds_per_estimate);
  const double var = next.last_qber_plus * (1.0 - next.last_qber_plus) / n +
                     next.last_qber_minus * (1.0 - next.last_qber_minus) / n;
  const double gate = k_gate_sigmas * std::sqrt(var);
  const double diff = next.last_qber_plus - next.last_qber_minus;
  if (std::abs(diff) > gate) {
    next.actuator_phase += (diff < 0.0) ? delta : -delta;
  }
  next.time_s = state.time_s + 1.0 / config.update_rate_hz;
  return next;
}

StabilizerRun run_stabilized_session(double duration_s, const DriftModel& drift,
                                     const StabilizerConfig& config, double v_eff,
                                     bool stabilizer_on) {
  validate_config(config);
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("run_stabilized_session: duration must be positive");
  }
  if (!(v_eff >= 0.0 && v_eff <= 1.0)) {
    throw std::invalid_argument("run_stabilized_session: v_eff must lie in [0, 1]");
  }

  RngStream rng(drift.seed);
  const double dt = 1.0 / config.update_rate_hz;
  const std::uint64_t updates = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(duration_s * config.update_rate_hz)));

  StabilizerRun run;
  run.trace.reserve(2 * updates);
  StabilizerState state;
  double drift_phase = 0.0;
  double sum_cos = 0.0;
  double sum_qber = 0.0;

  for (std::uint64_t u = 0; u < updates; ++u) {
    const double t0 = static_cast<double>(u) * dt;
    // The probe lambda advances the drift by half an interval, samples the
    // monitor at the commanded phase and records the trace point.
    int probe = 0;
    auto sample_at = [&](double commanded) {
      drift_phase += step_drift(drift, dt / 2.0, rng);
      ++probe;
      const double theta = drift_phase + commanded;
      const double qber = monitor_qber(theta, v_eff, config.rounds_per_estimate, rng);
      run.trace.push_back({t0 + probe * dt / 2.0, theta, commanded, qber});
      sum_cos += std::cos(theta);
      sum_qber += qber;
      return qber;
    };

    if (stabilizer_on) {
      state = stabilizer_step(state, config, sample_at);
    } else {
      sample_at(state.actuator_phase);
      sample_at(state.actuator_phase);
      state.time_s += dt;
    }
  }

  const double n_samples = static_cast<double>(run.trace.size());
  run.mean_visibility = v_eff * sum_cos / n_samples;
  run.mean_qber = sum_qber / n_samples;
  return run;
}

}  // namespace qss
