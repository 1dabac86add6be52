#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qss {

// DWDM grid description. Channel centers sit on the 100 GHz ITU lattice
// (190 + 0.1 n THz); the degeneracy frequency lies midway between the two
// innermost lattice points (193.65 THz between ITU 36 and 37).
struct GridSpec {
  double spacing_thz = 0.2;       // channel spacing / width
  double degeneracy_thz = 193.65;
  double bandwidth_nm = 70.0;     // usable source bandwidth around the degeneracy
};

// Correlated channel pair j: signal at the high-frequency side, idler
// mirrored about the degeneracy frequency.
struct ChannelPair {
  double index_j = 0.0;  // integer, or half-integer for merged channels
  double signal_thz = 0.0;
  double idler_thz = 0.0;
  double width_thz = 0.0;
};

struct PairAssignment {
  ChannelPair pair;
  int user_u = 0;  // u < v, users indexed from 0
  int user_v = 0;
};

// Full-connectivity channel plan: every unordered user pair appears exactly
// once and no channel pair is assigned twice.
struct NetworkPlan {
  int n_users = 0;
  std::vector<PairAssignment> assignments;
};

// 100 GHz ITU-T G.694.1 anchor: 190.0 + 0.1 * n THz.
double itu_channel_frequency_thz(int channel_number);

// Nearest 100 GHz ITU channel number, or nullopt when the frequency is off
// the lattice by more than 1e-6 THz.
std::optional<int> itu_channel_number(double freq_thz);

ChannelPair channel_pair_for_index(const GridSpec& grid, double j);

// Number of correlated channel pairs (j = 0, 1, 2, ...) whose centers fit
// inside the source bandwidth. 70 nm at 193.65 THz gives 44 pairs on the
// 100 GHz grid and 22 on the 200 GHz grid.
int available_pair_count(const GridSpec& grid);

// Largest N with N(N-1)/2 <= n_pairs.
int max_fully_connected_users(int n_pairs);

// Deterministic allocation: user pairs (u,v) in lexicographic order, channel
// indices j ascending from 0, skipping indices reserved for stabilization
// monitoring.
NetworkPlan allocate_fully_connected(const GridSpec& grid, int n_users,
                                     const std::vector<double>& reserved_j = {});

// One CSV record per assignment: j, signal ITU number, idler ITU number,
// user pair. Off-lattice channels leave the ITU columns blank.
std::string serialize_plan(const NetworkPlan& plan);

}  // namespace qss
