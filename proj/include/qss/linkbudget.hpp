#pragma once

#include <vector>

namespace qss {

struct SourceParams {
  double brightness_b = 4.7e6;   // pairs/s per channel pair
  double heralding_eta = 0.046;  // per photon, folds coupling, components, detector
};

struct DetectorParams {
  double dead_time_s = 40e-9;
  double dark_rate_sdc = 500.0;         // counts/s per detector
  double coincidence_window_s = 100e-12;
};

struct LinkParams {
  double alpha_db_per_km = 0.2;
  double length_km = 0.0;       // fiber length of this arm
  double noise_singles = 0.0;   // environmental singles S_noise, counts/s
  double e_meas = 0.053;        // measurement error, [0, 0.5]
};

struct RateReport {
  double singles_a = 0.0;  // registered singles per user, counts/s
  double singles_b = 0.0;
  double accidental_rate = 0.0;
  double true_coincidence_rate = 0.0;
  double total_coincidence_rate = 0.0;
  double qber = 0.0;
  double key_fraction = 0.0;  // bits per sifted coincidence
  double key_rate = 0.0;      // bits/s
};

struct RateModelInput {
  SourceParams source;
  DetectorParams detector;
  LinkParams link_a;
  LinkParams link_b;
  int n_mux = 2;
  double sift_factor_q = 0.5;
};

// 10^(-alpha L / 10); alpha is quoted in dB/km.
double propagation_efficiency(double alpha_db_per_km, double length_km);

// Detected singles for one user:
//   2 S_DC + S_noise + (N-1) B eta - (N-2) B eta^2,
// with eta the product of heralding and propagation efficiency for that arm.
double singles_rate(const SourceParams& src, const DetectorParams& det,
                    const LinkParams& link, int n_mux);

// 1 / (1 + singles * dead_time).
double saturation_factor(double singles_per_s, double dead_time_s);

// S_A * S_B * 2 tau, Poissonian accidentals.
double accidental_rate(double singles_a, double singles_b, double tau_s);

// B eta_A eta_B eta_sat,A eta_sat,B with eta folding heralding and
// propagation per arm and the saturation factors taken at that arm's singles
// rate.
double true_coincidence_rate(const SourceParams& src, const DetectorParams& det,
                             const LinkParams& link_a, const LinkParams& link_b, int n_mux);

// (C_true e_meas + R_acc / 2) / (C_true + R_acc). Requires a positive total.
double qber_model(double c_true, double r_acc, double e_meas);

// Full pipeline: singles -> saturation -> accidentals -> QBER -> key
// fraction -> key rate q (C_true + R_acc) r_inf, clamped at zero. A source
// that produces nothing yields an all-zero report. e_meas is read from
// link_a (arms share one measurement apparatus model).
RateReport key_rate(const RateModelInput& input);

// Rate reports over total symmetric separations between the two users with
// the source at the midpoint: each arm carries length/2 of fiber.
std::vector<RateReport> sweep_distance(const RateModelInput& base,
                                       const std::vector<double>& total_lengths_km);

// Largest n_mux in [n_min, n_max] with positive key rate for the given
// input (typically evaluated at zero fiber length). Returns 0 when no user
// count yields a positive key.
int max_users_positive_key(const RateModelInput& base, int n_min, int n_max);

}  // namespace qss
