#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>

#include "qss/qstate.hpp"
#include "qss/rng.hpp"

namespace qss {

// One dealer encoding choice: public encoding basis C, private sign c, and
// the resulting spectral phase theta = phase_of((C, c)).
struct DealerRound {
  std::uint64_t round_id = 0;
  double channel_j = 0.0;
  EncodingBasis public_c = EncodingBasis::phi;
  int private_c = +1;
  Phase theta;
};

// One user's measurement: basis restricted to {X, Y} in protocol flow,
// outcome in {+1, -1}.
struct UserRecord {
  std::uint64_t round_id = 0;
  MeasBasis basis = MeasBasis::x;
  int outcome = +1;
};

// The four public-bit combinations that survive sifting.
enum class Combination : int {
  xx_phi = 0,
  yy_phi = 1,
  xy_varphi = 2,
  yx_varphi = 3,
};

const char* combination_name(Combination combo);

struct SiftedTriple {
  std::uint64_t round_id = 0;
  MeasBasis basis_a = MeasBasis::x;
  MeasBasis basis_b = MeasBasis::x;
  EncodingBasis public_c = EncodingBasis::phi;
  int a = +1;
  int b = +1;
  int c = +1;
  int parity_expected = +1;  // -1 only for (Y, Y, phi)

  Combination combination() const;
};

struct ComboTally {
  std::uint64_t rounds = 0;
  std::int64_t sum_abc = 0;
  std::uint64_t errors = 0;  // rounds where a*b*c != parity_expected

  ComboTally& operator+=(const ComboTally& other);
};

// Mergeable per-session tallies; addition is associative and commutative so
// partitioned runs combine deterministically.
struct SessionTally {
  std::uint64_t total_rounds = 0;
  std::uint64_t sifted_rounds = 0;
  std::array<ComboTally, 4> combos{};

  void add(const SiftedTriple& triple);
  SessionTally& operator+=(const SessionTally& other);
};

struct SessionStats {
  SessionTally tally;
  std::array<std::optional<double>, 4> epsilon_hat{};  // per combination
  std::array<std::optional<double>, 4> qber{};
  double mean_abs_epsilon = 0.0;  // mean of |eps| over combinations with data
  double mean_qber = 0.0;
  double sifted_fraction = 0.0;
  bool abort_flag = false;
};

DealerRound dealer_choose(std::uint64_t round_id, double channel_j, RngStream& rng);

// Samples one coincidence. With probability p_accidental the outcome pair is
// uniform over the four possibilities; otherwise it follows
// joint_probability at theta + mzi_phase and v_eff. Z bases are accepted for
// diagnostic sampling (ZZ only).
std::pair<UserRecord, UserRecord> measure_round_with_bases(
    const DealerRound& round, MeasBasis basis_a, MeasBasis basis_b, double mzi_phase,
    double v_eff, double p_accidental, RngStream& rng);

// Same, with both bases drawn uniformly from {X, Y}.
std::pair<UserRecord, UserRecord> measure_round(const DealerRound& round, double mzi_phase,
                                                double v_eff, double p_accidental,
                                                RngStream& rng);

// Keeps the round iff (A, B, C) is one of the four meaningful combinations;
// parity_expected is -1 for (Y, Y, phi) and +1 otherwise.
std::optional<SiftedTriple> sift(const DealerRound& dealer, const UserRecord& alice,
                                 const UserRecord& bob);

// The collaborators' estimate of c: a * b * parity_expected.
int reconstruct_secret(const SiftedTriple& triple);

SessionStats finalize_stats(const SessionTally& tally, double abort_threshold = 0.11);

// Builds stats from sifted triples; total_rounds is the number of generated
// rounds (sifted and discarded) the triples were drawn from.
SessionStats accumulate_stats(std::span<const SiftedTriple> triples, std::uint64_t total_rounds,
                              double abort_threshold = 0.11);

// True (abort) iff any per-combination QBER reaches the threshold.
bool abort_check(const SessionStats& stats, double threshold = 0.11);

struct SessionConfig {
  std::uint64_t rounds = 100000;
  double channel_j = 11.5;
  double v_eff = 1.0;
  double mzi_phase = 0.0;
  double p_accidental = 0.0;
  double abort_threshold = 0.11;
  std::uint64_t seed = 1;
};

struct TranscriptRow {
  std::uint64_t round_id = 0;
  double channel_j = 0.0;
  EncodingBasis public_c = EncodingBasis::phi;
  int private_c = +1;
  MeasBasis basis_a = MeasBasis::x;
  int a = +1;
  MeasBasis basis_b = MeasBasis::x;
  int b = +1;
  bool kept = false;
  bool error = false;
};

using TranscriptSink = std::function<void(const TranscriptRow&)>;

// Single-threaded session; identical seeds produce identical stats.
SessionStats run_session(const SessionConfig& config, const TranscriptSink& sink = {});

// Partitioned run with one independent substream per partition and a merge
// in partition order, so the result does not depend on thread scheduling.
// Note the stream layout differs between partition counts.
SessionStats run_session_parallel(const SessionConfig& config, unsigned partitions);

}  // namespace qss
