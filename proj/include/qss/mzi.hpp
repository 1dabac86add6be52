#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qss/rng.hpp"

namespace qss {

// Ambient phase drift of the interferometer, modelled as a Wiener process
// with strength sigma_rw (radians per sqrt(second)).
struct DriftModel {
  double sigma_rw = 1.1;
  std::uint64_t seed = 1;
};

// Two-point dither lock on the monitor channel's QBER. dither_fraction is
// the dither amplitude as a fraction of the half-wave actuation, i.e. the
// phase excursion is dither_fraction * pi.
struct StabilizerConfig {
  double dither_fraction = 0.10;
  double update_rate_hz = 20.0;
  double monitor_channel_j = 10.0;
  int rounds_per_estimate = 250;  // monitor coincidences per probe
};

struct StabilizerState {
  double actuator_phase = 0.0;
  double time_s = 0.0;
  double last_qber_plus = 0.0;
  double last_qber_minus = 0.0;
};

double dither_amplitude(const StabilizerConfig& config);

// Gaussian phase increment with standard deviation sigma_rw * sqrt(dt).
double step_drift(const DriftModel& model, double dt_s, RngStream& rng);

// Fraction of anti-correlated outcomes over n_rounds XX-basis coincidences
// on the monitor channel; expectation (1 - v_eff cos(theta_total)) / 2.
double monitor_qber(double theta_total, double v_eff, int n_rounds, RngStream& rng);

// Evaluates the plant at actuator_phase + delta, then at actuator_phase -
// delta, and moves one dither step toward the lower-QBER side. The step is
// taken only when the difference exceeds four standard errors of the
// monitor estimate, so a locked loop keeps sampling at +-delta instead of
// wandering. The plant maps a commanded phase to a QBER sample and is the
// only input the stabilizer consults.
StabilizerState stabilizer_step(const StabilizerState& state, const StabilizerConfig& config,
                                const std::function<double(double)>& plant);

struct TracePoint {
  double time_s = 0.0;
  double theta_total = 0.0;     // drift + commanded phase at the probe
  double commanded_phase = 0.0;
  double qber_estimate = 0.0;
};

struct StabilizerRun {
  std::vector<TracePoint> trace;
  double mean_visibility = 0.0;  // v_eff * mean cos(theta_total) over the trace
  double mean_qber = 0.0;
};

// Co-simulates drift, stabilizer and monitor sampling; two probes per update
// interval. With the stabilizer off the probes sit at the unmodulated
// actuator phase. The stream is derived from drift.seed.
StabilizerRun run_stabilized_session(double duration_s, const DriftModel& drift,
                                     const StabilizerConfig& config, double v_eff,
                                     bool stabilizer_on = true);

}  // namespace qss
