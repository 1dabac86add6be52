#include "qss/grid.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace qss {

namespace {

constexpr double k_speed_of_light = 299792458.0;  // m/s
constexpr double k_itu_anchor_thz = 190.0;
constexpr double k_itu_step_thz = 0.1;
// The degeneracy sits midway between two 100 GHz lattice points, so the
// innermost usable centers are offset by half a lattice step.
constexpr double k_half_lattice_thz = 0.05;

void validate_grid(const GridSpec& grid) {
  if (!(grid.spacing_thz > 0.0)) {
    throw std::invalid_argument("GridSpec.spacing_thz must be positive");
  }
  if (!(grid.degeneracy_thz > 0.0)) {
    throw std::invalid_argument("GridSpec.degeneracy_thz must be positive");
  }
  if (!(grid.bandwidth_nm >= 0.0)) {
    throw std::invalid_argument("GridSpec.bandwidth_nm must be non-negative");
  }
}

// Symmetric frequency half-span of the source band: d(nu) = nu^2 d(lambda)/c.
double half_span_thz(const GridSpec& grid) {
  const double nu0_hz = grid.degeneracy_thz * 1e12;
  const double span_hz = nu0_hz * nu0_hz * (grid.bandwidth_nm * 1e-9) / k_speed_of_light;
  return span_hz / 2.0 / 1e12;
}

}  // namespace

double itu_channel_frequency_thz(int channel_number) {
  if (channel_number < 1 || channel_number > 100) {
    throw std::invalid_argument("ITU channel number out of range [1, 100]: " +
                                std::to_string(channel_number));
  }
  return k_itu_anchor_thz + k_itu_step_thz * channel_number;
}

std::optional<int> itu_channel_number(double freq_thz) {
  const double raw = (freq_thz - k_itu_anchor_thz) / k_itu_step_thz;
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-5 || rounded < 1.0 || rounded > 100.0) {
    return std::nullopt;
  }
  return static_cast<int>(rounded);
}

ChannelPair channel_pair_for_index(const GridSpec& grid, double j) {
  validate_grid(grid);
  if (!(j >= 0.0)) {
    throw std::invalid_argument("channel pair index j must be non-negative");
  }
  ChannelPair pair;
  pair.index_j = j;
  pair.signal_thz = grid.degeneracy_thz + k_half_lattice_thz + grid.spacing_thz * j;
  pair.idler_thz = grid.degeneracy_thz - k_half_lattice_thz - grid.spacing_thz * j;
  pair.width_thz = grid.spacing_thz;
  const double offset = k_half_lattice_thz + grid.spacing_thz * j;
  if (offset > half_span_thz(grid)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "channel pair j=%g lies outside the %g nm source bandwidth", j,
                  grid.bandwidth_nm);
    throw std::invalid_argument(buf);
  }
  return pair;
}

int available_pair_count(const GridSpec& grid) {
  validate_grid(grid);
  const double room = half_span_thz(grid) - k_half_lattice_thz;
  if (room < 0.0) return 0;
  return static_cast<int>(std::floor(room / grid.spacing_thz)) + 1;
}

int max_fully_connected_users(int n_pairs) {
  if (n_pairs < 1) {
    throw std::invalid_argument("max_fully_connected_users: need at least one channel pair");
  }
  int n = 2;
  while (static_cast<long long>(n + 1) * n / 2 <= n_pairs) ++n;
  return n;
}

NetworkPlan allocate_fully_connected(const GridSpec& grid, int n_users,
                                     const std::vector<double>& reserved_j) {
  validate_grid(grid);
  if (n_users < 2) {
    throw std::invalid_argument("allocate_fully_connected: need at least two users");
  }
  const int needed = n_users * (n_users - 1) / 2;
  const int total = available_pair_count(grid);

  const auto is_reserved = [&reserved_j](double j) {
    for (double r : reserved_j) {
      if (std::abs(j - r) < 1e-9) return true;
    }
    return false;
  };

  int usable = 0;
  for (int j = 0; j < total; ++j) {
    if (!is_reserved(j)) ++usable;
  }
  if (usable < needed) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "fully connected plan for %d users needs %d channel pairs, grid provides %d "
                  "(short by %d)",
                  n_users, needed, usable, needed - usable);
    throw std::runtime_error(buf);
  }

  NetworkPlan plan;
  plan.n_users = n_users;
  plan.assignments.reserve(needed);
  int j = 0;
  for (int u = 0; u < n_users; ++u) {
    for (int v = u + 1; v < n_users; ++v) {
      while (is_reserved(j)) ++j;
      plan.assignments.push_back({channel_pair_for_index(grid, j), u, v});
      ++j;
    }
  }
  return plan;
}

std::string serialize_plan(const NetworkPlan& plan) {
  std::string out = "j,signal_itu,idler_itu,user_u,user_v\n";
  char buf[160];
  for (const PairAssignment& a : plan.assignments) {
    const auto sig = itu_channel_number(a.pair.signal_thz);
    const auto idl = itu_channel_number(a.pair.idler_thz);
    std::string sig_s = sig ? std::to_string(*sig) : "";
    std::string idl_s = idl ? std::to_string(*idl) : "";
    std::snprintf(buf, sizeof(buf), "%g,%s,%s,%d,%d\n", a.pair.index_j, sig_s.c_str(),
                  idl_s.c_str(), a.user_u, a.user_v);
    out += buf;
  }
  return out;
}

}  // namespace qss
