#include "qss/linkbudget.hpp"

#include <cmath>
#include <stdexcept>

#include "qss/qstate.hpp"

namespace qss {

namespace {

void validate_common(const SourceParams& src, const DetectorParams& det, int n_mux) {
  if (!(src.brightness_b >= 0.0)) {
    throw std::invalid_argument("SourceParams.brightness_b must be non-negative");
  }
  if (!(src.heralding_eta >= 0.0 && src.heralding_eta <= 1.0)) {
    throw std::invalid_argument("SourceParams.heralding_eta must lie in [0, 1]");
  }
  if (!(det.dead_time_s >= 0.0) || !(det.dark_rate_sdc >= 0.0) ||
      !(det.coincidence_window_s >= 0.0)) {
    throw std::invalid_argument("DetectorParams fields must be non-negative");
  }
  if (n_mux < 2) {
    throw std::invalid_argument("n_mux must be at least 2");
  }
}

void validate_link(const LinkParams& link) {
  if (!(link.alpha_db_per_km >= 0.0) || !(link.length_km >= 0.0) ||
      !(link.noise_singles >= 0.0)) {
    throw std::invalid_argument("LinkParams fields must be non-negative");
  }
  if (!(link.e_meas >= 0.0 && link.e_meas <= 0.5)) {
    throw std::invalid_argument("LinkParams.e_meas must lie in [0, 0.5]");
  }
}

double arm_efficiency(const SourceParams& src, const LinkParams& link) {
  return src.heralding_eta * propagation_efficiency(link.alpha_db_per_km, link.length_km);
}

}  // namespace

double propagation_efficiency(double alpha_db_per_km, double length_km) {
  if (!(alpha_db_per_km >= 0.0) || !(length_km >= 0.0)) {
    throw std::invalid_argument("propagation_efficiency: inputs must be non-negative");
  }
  return std::pow(10.0, -alpha_db_per_km * length_km / 10.0);
}

double singles_rate(const SourceParams& src, const DetectorParams& det,
                    const LinkParams& link, int n_mux) {
  validate_common(src, det, n_mux);
  validate_link(link);
  const double eta = arm_efficiency(src, link);
  const double n = static_cast<double>(n_mux);
  return 2.0 * det.dark_rate_sdc + link.noise_singles +
         (n - 1.0) * src.brightness_b * eta - (n - 2.0) * src.brightness_b * eta * eta;
}

double saturation_factor(double singles_per_s, double dead_time_s) {
  if (!(singles_per_s >= 0.0) || !(dead_time_s >= 0.0)) {
    throw std::invalid_argument("saturation_factor: inputs must be non-negative");
  }
  return 1.0 / (1.0 + singles_per_s * dead_time_s);
}

double accidental_rate(double singles_a, double singles_b, double tau_s) {
  if (!(singles_a >= 0.0) || !(singles_b >= 0.0) || !(tau_s >= 0.0)) {
    throw std::invalid_argument("accidental_rate: inputs must be non-negative");
  }
  return singles_a * singles_b * 2.0 * tau_s;
}

double true_coincidence_rate(const SourceParams& src, const DetectorParams& det,
                             const LinkParams& link_a, const LinkParams& link_b, int n_mux) {
  validate_common(src, det, n_mux);
  validate_link(link_a);
  validate_link(link_b);
  const double sat_a = saturation_factor(singles_rate(src, det, link_a, n_mux), det.dead_time_s);
  const double sat_b = saturation_factor(singles_rate(src, det, link_b, n_mux), det.dead_time_s);
  return src.brightness_b * arm_efficiency(src, link_a) * arm_efficiency(src, link_b) *
         sat_a * sat_b;
}

double qber_model(double c_true, double r_acc, double e_meas) {
  if (!(c_true >= 0.0) || !(r_acc >= 0.0)) {
    throw std::invalid_argument("qber_model: rates must be non-negative");
  }
  if (!(e_meas >= 0.0 && e_meas <= 0.5)) {
    throw std::invalid_argument("qber_model: e_meas must lie in [0, 0.5]");
  }
  const double total = c_true + r_acc;
  if (!(total > 0.0)) {
    throw std::invalid_argument("qber_model: total coincidence rate must be positive");
  }
  return (c_true * e_meas + 0.5 * r_acc) / total;
}

RateReport key_rate(const RateModelInput& input) {
  validate_common(input.source, input.detector, input.n_mux);
  validate_link(input.link_a);
  validate_link(input.link_b);
  if (!(input.sift_factor_q > 0.0 && input.sift_factor_q <= 1.0)) {
    throw std::invalid_argument("sift_factor_q must lie in (0, 1]");
  }

  RateReport report;
  const double raw_a = singles_rate(input.source, input.detector, input.link_a, input.n_mux);
  const double raw_b = singles_rate(input.source, input.detector, input.link_b, input.n_mux);
  const double sat_a = saturation_factor(raw_a, input.detector.dead_time_s);
  const double sat_b = saturation_factor(raw_b, input.detector.dead_time_s);
  report.singles_a = raw_a * sat_a;
  report.singles_b = raw_b * sat_b;
  report.accidental_rate =
      accidental_rate(report.singles_a, report.singles_b, input.detector.coincidence_window_s);
  report.true_coincidence_rate = input.source.brightness_b *
                                 arm_efficiency(input.source, input.link_a) *
                                 arm_efficiency(input.source, input.link_b) * sat_a * sat_b;
  report.total_coincidence_rate = report.true_coincidence_rate + report.accidental_rate;
  if (report.total_coincidence_rate > 0.0) {
    report.qber =
        qber_model(report.true_coincidence_rate, report.accidental_rate, input.link_a.e_meas);
    report.key_fraction = key_fraction(report.qber);
    report.key_rate = input.sift_factor_q * report.total_coincidence_rate * report.key_fraction;
  }
  return report;
}

std::vector<RateReport> sweep_distance(const RateModelInput& base,
                                       const std::vector<double>& total_lengths_km) {
  if (total_lengths_km.empty()) {
    throw std::invalid_argument("sweep_distance: no distances given");
  }
  std::vector<RateReport> reports;
  reports.reserve(total_lengths_km.size());
  RateModelInput input = base;
  for (double total : total_lengths_km) {
    if (!(total >= 0.0)) {
      throw std::invalid_argument("sweep_distance: distances must be non-negative");
    }
    input.link_a.length_km = total / 2.0;
    input.link_b.length_km = total / 2.0;
    reports.push_back(key_rate(input));
  }
  return reports;
}

int max_users_positive_key(const RateModelInput& base, int n_min, int n_max) {
  if (n_min < 2 || n_max < n_min) {
    throw std::invalid_argument("max_users_positive_key: need 2 <= n_min <= n_max");
  }
  int best = 0;
  RateModelInput input = base;
  for (int n = n_min; n <= n_max; ++n) {
    input.n_mux = n;
    if (key_rate(input).key_rate > 0.0) best = n;
  }
  return best;
}

}  // namespace qss
