#include "qss/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qss {

namespace {

void require_sign(int s, const char* what) {
  if (s != +1 && s != -1) {
    throw std::invalid_argument(std::string(what) + " must be +1 or -1, got " +
                                std::to_string(s));
  }
}

double require_visibility(const std::optional<double>& v, const char* name) {
  if (!v.has_value()) {
    throw std::invalid_argument(std::string("fidelity_from_visibilities: required visibility ") +
                                name + " is absent");
  }
  if (!(*v >= -1.0 && *v <= 1.0)) {
    throw std::invalid_argument(std::string("visibility ") + name + " outside [-1, 1]");
  }
  return *v;
}

}  // namespace

Phase::Phase(double radians) {
  if (!std::isfinite(radians)) {
    throw std::invalid_argument("phase must be finite");
  }
  theta_ = std::fmod(radians, k_two_pi);
  if (theta_ < 0.0) theta_ += k_two_pi;
  if (theta_ >= k_two_pi) theta_ = 0.0;
}

Phase phase_of(StateLabel label) {
  require_sign(label.sign, "state label sign");
  const double base = (label.basis == EncodingBasis::phi) ? 0.0 : std::numbers::pi / 2.0;
  return Phase(label.sign > 0 ? base : base + std::numbers::pi);
}

double joint_probability(Phase theta, MeasBasis basis_a, MeasBasis basis_b,
                         int a, int b, double v_eff) {
  require_sign(a, "outcome a");
  require_sign(b, "outcome b");
  if (!(v_eff >= 0.0 && v_eff <= 1.0)) {
    throw std::invalid_argument("v_eff must lie in [0, 1]");
  }
  if (basis_a == MeasBasis::z && basis_b == MeasBasis::z) {
    // Independent of theta: the Z basis is not affected by phase noise.
    return 0.25 * v_eff * (1.0 + a * b) + 0.25 * (1.0 - v_eff);
  }
  if (basis_a == MeasBasis::z || basis_b == MeasBasis::z) {
    throw std::invalid_argument("joint_probability: Z mixed with X/Y has no defined statistics");
  }
  const double t = theta.radians();
  double s = 0.0;
  if (basis_a == MeasBasis::x && basis_b == MeasBasis::x) {
    s = std::cos(t);
  } else if (basis_a == MeasBasis::y && basis_b == MeasBasis::y) {
    s = -std::cos(t);
  } else {
    s = std::sin(t);  // XY and YX
  }
  return 0.25 * (1.0 + a * b * v_eff * s);
}

double visibility(const CoincidenceCounts& counts) {
  const std::uint64_t total = counts.total();
  if (total == 0) {
    throw std::invalid_argument("visibility: no coincidence events recorded");
  }
  const double num = static_cast<double>(counts.r_pp) - static_cast<double>(counts.r_pm) -
                     static_cast<double>(counts.r_mp) + static_cast<double>(counts.r_mm);
  return num / static_cast<double>(total);
}

double fidelity_from_visibilities(StateLabel target, const VisibilitySet& vis) {
  require_sign(target.sign, "state label sign");
  const double s = static_cast<double>(target.sign);
  const double v_zz = require_visibility(vis.v_zz, "v_zz");
  if (target.basis == EncodingBasis::phi) {
    const double v_xx = require_visibility(vis.v_xx, "v_xx");
    const double v_yy = require_visibility(vis.v_yy, "v_yy");
    return 0.25 * (1.0 + s * v_xx - s * v_yy + v_zz);
  }
  const double v_xy = require_visibility(vis.v_xy, "v_xy");
  const double v_yx = require_visibility(vis.v_yx, "v_yx");
  return 0.25 * (1.0 + s * v_xy + s * v_yx + v_zz);
}

StateVector state_vector(Phase theta) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  StateVector psi = StateVector::Zero();
  psi(0) = std::complex<double>(inv_sqrt2, 0.0);
  psi(3) = std::polar(inv_sqrt2, theta.radians());
  return psi;
}

DensityMatrix pure_state_density(Phase theta) {
  const StateVector psi = state_vector(theta);
  return psi * psi.adjoint();
}

double fidelity_overlap(const DensityMatrix& rho_exp, StateLabel target) {
  constexpr double tol = 1e-9;
  const std::complex<double> tr = rho_exp.trace();
  if (std::abs(tr.real() - 1.0) > tol || std::abs(tr.imag()) > tol) {
    throw std::invalid_argument("fidelity_overlap: density operator trace differs from 1");
  }
  if ((rho_exp - rho_exp.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("fidelity_overlap: density operator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<DensityMatrix> solver(rho_exp, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol) {
    throw std::invalid_argument("fidelity_overlap: density operator has a negative eigenvalue");
  }
  const StateVector psi = state_vector(phase_of(target));
  const double f = (psi.adjoint() * rho_exp * psi).value().real();
  return std::clamp(f, 0.0, 1.0);
}

double correlation_parameter(double v_plus, double v_minus) {
  if (!(v_plus >= -1.0 && v_plus <= 1.0) || !(v_minus >= -1.0 && v_minus <= 1.0)) {
    throw std::invalid_argument("correlation_parameter: visibilities must lie in [-1, 1]");
  }
  return 0.5 * (v_plus - v_minus);
}

double qber_from_epsilon(double eps) {
  if (!(eps >= -1.0 && eps <= 1.0)) {
    throw std::invalid_argument("qber_from_epsilon: eps must lie in [-1, 1]");
  }
  return 0.5 * (1.0 - std::abs(eps));
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("binary_entropy: argument must lie in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double key_fraction(double qber) {
  if (!(qber >= 0.0 && qber <= 0.5)) {
    throw std::invalid_argument("key_fraction: QBER must lie in [0, 0.5]");
  }
  const double r = 1.0 - 2.0 * binary_entropy(qber);
  return r > 0.0 ? r : 0.0;
}

}  // namespace qss
