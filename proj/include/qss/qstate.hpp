#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

namespace qss {

inline constexpr double k_two_pi = 2.0 * std::numbers::pi;

// Relative phase of the entangled state (|HH> + e^{i theta}|VV>)/sqrt(2),
// canonicalized to [0, 2*pi).
class Phase {
 public:
  Phase() = default;
  explicit Phase(double radians);

  double radians() const { return theta_; }
  Phase shifted(double delta) const { return Phase(theta_ + delta); }

 private:
  double theta_ = 0.0;
};

enum class EncodingBasis { phi, varphi };
enum class MeasBasis { x, y, z };

// Dealer state label: encoding basis and private sign.
// (phi,+1) -> 0, (phi,-1) -> pi, (varphi,+1) -> pi/2, (varphi,-1) -> 3pi/2.
struct StateLabel {
  EncodingBasis basis = EncodingBasis::phi;
  int sign = +1;  // +1 or -1
};

// Joint-detection counters for one basis pair, indexed by outcome pair:
// (+,+), (+,-), (-,+), (-,-).
struct CoincidenceCounts {
  std::uint64_t r_pp = 0;
  std::uint64_t r_pm = 0;
  std::uint64_t r_mp = 0;
  std::uint64_t r_mm = 0;

  std::uint64_t total() const { return r_pp + r_pm + r_mp + r_mm; }
};

// Measured joint visibilities; an absent entry means the basis pair was not
// measured.
struct VisibilitySet {
  std::optional<double> v_xx;
  std::optional<double> v_yy;
  std::optional<double> v_xy;
  std::optional<double> v_yx;
  std::optional<double> v_zz;
};

using DensityMatrix = Eigen::Matrix4cd;   // basis order |HH>, |HV>, |VH>, |VV>
using StateVector = Eigen::Vector4cd;

Phase phase_of(StateLabel label);

// P(a, b) for a joint measurement of |psi(theta)> in bases (basis_a, basis_b)
// with outcomes a, b in {+1, -1}. The oscillating term is scaled by v_eff in
// [0, 1]; the ZZ pair interpolates linearly between perfect correlation and
// uniform outcomes and is independent of theta. Supported pairs: XX, YY, XY,
// YX, ZZ.
double joint_probability(Phase theta, MeasBasis basis_a, MeasBasis basis_b,
                         int a, int b, double v_eff);

// (r_pp - r_pm - r_mp + r_mm) / total. Requires total > 0.
double visibility(const CoincidenceCounts& counts);

// Fidelity against the labelled target from the correlated-basis
// visibilities: 1/4 (1 +- v_xx -+ v_yy + v_zz) for the phi states and
// 1/4 (1 +- v_xy +- v_yx + v_zz) for the varphi states.
double fidelity_from_visibilities(StateLabel target, const VisibilitySet& vis);

StateVector state_vector(Phase theta);
DensityMatrix pure_state_density(Phase theta);

// Tr{rho_exp |psi><psi|} for the labelled target state. rho_exp must be
// Hermitian, unit trace and positive semidefinite within 1e-9.
double fidelity_overlap(const DensityMatrix& rho_exp, StateLabel target);

// 1/2 (V_{c=+} - V_{c=-}).
double correlation_parameter(double v_plus, double v_minus);

// 1/2 (1 - |eps|).
double qber_from_epsilon(double eps);

// Binary entropy with h(0) = h(1) = 0.
double binary_entropy(double x);

// Koashi-Preskill asymptotic key fraction max(0, 1 - 2 h(qber)).
double key_fraction(double qber);

}  // namespace qss
