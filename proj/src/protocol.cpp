#include "qss/protocol.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace qss {

namespace {

void require_user_basis(MeasBasis basis, const char* who) {
  if (basis != MeasBasis::x && basis != MeasBasis::y) {
    throw std::invalid_argument(std::string(who) + " basis must be X or Y");
  }
}

int combination_index(MeasBasis a, MeasBasis b, EncodingBasis c) {
  if (c == EncodingBasis::phi) {
    if (a == MeasBasis::x && b == MeasBasis::x) return 0;
    if (a == MeasBasis::y && b == MeasBasis::y) return 1;
  } else {
    if (a == MeasBasis::x && b == MeasBasis::y) return 2;
    if (a == MeasBasis::y && b == MeasBasis::x) return 3;
  }
  return -1;
}

SessionTally run_partition(const SessionConfig& config, std::uint64_t first_round,
                           std::uint64_t rounds, RngStream rng, const TranscriptSink& sink) {
  SessionTally tally;
  tally.total_rounds = rounds;
  for (std::uint64_t i = 0; i < rounds; ++i) {
    const DealerRound dealer = dealer_choose(first_round + i, config.channel_j, rng);
    const auto [alice, bob] =
        measure_round(dealer, config.mzi_phase, config.v_eff, config.p_accidental, rng);
    const auto triple = sift(dealer, alice, bob);
    if (triple) tally.add(*triple);
    if (sink) {
      TranscriptRow row;
      row.round_id = dealer.round_id;
      row.channel_j = dealer.channel_j;
      row.public_c = dealer.public_c;
      row.private_c = dealer.private_c;
      row.basis_a = alice.basis;
      row.a = alice.outcome;
      row.basis_b = bob.basis;
      row.b = bob.outcome;
      row.kept = triple.has_value();
      row.error = triple && reconstruct_secret(*triple) != triple->c;
      sink(row);
    }
  }
  return tally;
}

}  // namespace

const char* combination_name(Combination combo) {
  switch (combo) {
    case Combination::xx_phi: return "xx_phi";
    case Combination::yy_phi: return "yy_phi";
    case Combination::xy_varphi: return "xy_varphi";
    case Combination::yx_varphi: return "yx_varphi";
  }
  return "?";
}

Combination SiftedTriple::combination() const {
  const int idx = combination_index(basis_a, basis_b, public_c);
  if (idx < 0) throw std::logic_error("SiftedTriple holds an invalid combination");
  return static_cast<Combination>(idx);
}

ComboTally& ComboTally::operator+=(const ComboTally& other) {
  rounds += other.rounds;
  sum_abc += other.sum_abc;
  errors += other.errors;
  return *this;
}

void SessionTally::add(const SiftedTriple& triple) {
  const int idx = static_cast<int>(triple.combination());
  const int abc = triple.a * triple.b * triple.c;
  ++sifted_rounds;
  ++combos[idx].rounds;
  combos[idx].sum_abc += abc;
  if (abc != triple.parity_expected) ++combos[idx].errors;
}

SessionTally& SessionTally::operator+=(const SessionTally& other) {
  total_rounds += other.total_rounds;
  sifted_rounds += other.sifted_rounds;
  for (int i = 0; i < 4; ++i) combos[i] += other.combos[i];
  return *this;
}

DealerRound dealer_choose(std::uint64_t round_id, double channel_j, RngStream& rng) {
  DealerRound round;
  round.round_id = round_id;
  round.channel_j = channel_j;
  round.public_c = rng.sign() > 0 ? EncodingBasis::phi : EncodingBasis::varphi;
  round.private_c = rng.sign();
  round.theta = phase_of({round.public_c, round.private_c});
  return round;
}

std::pair<UserRecord, UserRecord> measure_round_with_bases(
    const DealerRound& round, MeasBasis basis_a, MeasBasis basis_b, double mzi_phase,
    double v_eff, double p_accidental, RngStream& rng) {
  if (!(p_accidental >= 0.0 && p_accidental <= 1.0)) {
    throw std::invalid_argument("p_accidental must lie in [0, 1]");
  }
  int a = 0;
  int b = 0;
  if (p_accidental > 0.0 && rng.bernoulli(p_accidental)) {
    // Accidental coincidence: no correlation with the encoded state.
    a = rng.sign();
    b = rng.sign();
  } else {
    const Phase total = round.theta.shifted(mzi_phase);
    // Marginals are uniform for every supported basis pair, so sample a
    // fair a and then b from P(b | a) = 2 P(a, b).
    a = rng.sign();
    const double p_b_plus = 2.0 * joint_probability(total, basis_a, basis_b, a, +1, v_eff);
    b = rng.bernoulli(p_b_plus) ? +1 : -1;
  }
  return {UserRecord{round.round_id, basis_a, a}, UserRecord{round.round_id, basis_b, b}};
}

std::pair<UserRecord, UserRecord> measure_round(const DealerRound& round, double mzi_phase,
                                                double v_eff, double p_accidental,
                                                RngStream& rng) {
  const MeasBasis basis_a = rng.sign() > 0 ? MeasBasis::x : MeasBasis::y;
  const MeasBasis basis_b = rng.sign() > 0 ? MeasBasis::x : MeasBasis::y;
  return measure_round_with_bases(round, basis_a, basis_b, mzi_phase, v_eff, p_accidental, rng);
}

std::optional<SiftedTriple> sift(const DealerRound& dealer, const UserRecord& alice,
                                 const UserRecord& bob) {
  if (alice.round_id != dealer.round_id || bob.round_id != dealer.round_id) {
    throw std::invalid_argument("sift: user records do not match the dealer round");
  }
  require_user_basis(alice.basis, "alice");
  require_user_basis(bob.basis, "bob");
  const int idx = combination_index(alice.basis, bob.basis, dealer.public_c);
  if (idx < 0) return std::nullopt;
  SiftedTriple triple;
  triple.round_id = dealer.round_id;
  triple.basis_a = alice.basis;
  triple.basis_b = bob.basis;
  triple.public_c = dealer.public_c;
  triple.a = alice.outcome;
  triple.b = bob.outcome;
  triple.c = dealer.private_c;
  triple.parity_expected = (static_cast<Combination>(idx) == Combination::yy_phi) ? -1 : +1;
  return triple;
}

int reconstruct_secret(const SiftedTriple& triple) {
  return triple.a * triple.b * triple.parity_expected;
}

SessionStats finalize_stats(const SessionTally& tally, double abort_threshold) {
  if (tally.total_rounds == 0) {
    throw std::invalid_argument("finalize_stats: no rounds recorded");
  }
  SessionStats stats;
  stats.tally = tally;
  double sum_abs_eps = 0.0;
  double sum_qber = 0.0;
  int populated = 0;
  for (int i = 0; i < 4; ++i) {
    const ComboTally& combo = tally.combos[i];
    if (combo.rounds == 0) continue;
    const double n = static_cast<double>(combo.rounds);
    const double eps = static_cast<double>(combo.sum_abc) / n;
    const double q = static_cast<double>(combo.errors) / n;
    stats.epsilon_hat[i] = eps;
    stats.qber[i] = q;
    sum_abs_eps += std::abs(eps);
    sum_qber += q;
    ++populated;
  }
  if (populated > 0) {
    stats.mean_abs_epsilon = sum_abs_eps / populated;
    stats.mean_qber = sum_qber / populated;
  }
  stats.sifted_fraction =
      static_cast<double>(tally.sifted_rounds) / static_cast<double>(tally.total_rounds);
  stats.abort_flag = abort_check(stats, abort_threshold);
  return stats;
}

SessionStats accumulate_stats(std::span<const SiftedTriple> triples, std::uint64_t total_rounds,
                              double abort_threshold) {
  if (triples.empty()) {
    throw std::invalid_argument("accumulate_stats: empty triple sequence");
  }
  if (total_rounds < triples.size()) {
    throw std::invalid_argument("accumulate_stats: total_rounds below sifted count");
  }
  SessionTally tally;
  tally.total_rounds = total_rounds;
  for (const SiftedTriple& t : triples) tally.add(t);
  return finalize_stats(tally, abort_threshold);
}

bool abort_check(const SessionStats& stats, double threshold) {
  for (const auto& q : stats.qber) {
    if (q && *q >= threshold) return true;
  }
  return false;
}

SessionStats run_session(const SessionConfig& config, const TranscriptSink& sink) {
  if (config.rounds == 0) {
    throw std::invalid_argument("run_session: rounds must be positive");
  }
  SessionTally tally = run_partition(config, 0, config.rounds,
                                     RngStream::substream(config.seed, 0), sink);
  return finalize_stats(tally, config.abort_threshold);
}

SessionStats run_session_parallel(const SessionConfig& config, unsigned partitions) {
  if (partitions == 0) {
    throw std::invalid_argument("run_session_parallel: need at least one partition");
  }
  if (config.rounds == 0) {
    throw std::invalid_argument("run_session_parallel: rounds must be positive");
  }
  if (partitions == 1) return run_session(config);

  const std::uint64_t base = config.rounds / partitions;
  const std::uint64_t rem = config.rounds % partitions;
  std::vector<SessionTally> tallies(partitions);
  std::vector<std::thread> workers;
  workers.reserve(partitions);
  std::uint64_t first = 0;
  for (unsigned p = 0; p < partitions; ++p) {
    const std::uint64_t count = base + (p < rem ? 1 : 0);
    workers.emplace_back([&config, &tallies, p, first, count]() {
      tallies[p] = run_partition(config, first, count, RngStream::substream(config.seed, p),
                                 TranscriptSink{});
    });
    first += count;
  }
  for (std::thread& w : workers) w.join();

  SessionTally merged;
  for (const SessionTally& t : tallies) merged += t;
  return finalize_stats(merged, config.abort_threshold);
}

}  // namespace qss
