// Full Lindblad master-equation model of the driven three-level system.
// Used as an independent check on the perturbative coherences.

#ifndef WAVEMIX_LIOUVILLE_HPP_
#define WAVEMIX_LIOUVILLE_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavemix/core_model.hpp"

namespace wavemix {

template <typename Scalar> using Matrix3c = Eigen::Matrix<std::complex<Scalar>, 3, 3>;

/// Levels |1>,|2>,|3> map to indices 0,1,2.
template <typename Scalar> using DensityMatrix = Matrix3c<Scalar>;

template <typename Scalar> using Superoperator = Eigen::Matrix<std::complex<Scalar>, 9, 9>;

template <typename Scalar> struct DriveSet {
  using Complex = std::complex<Scalar>;

  Complex omega_p{};
  Complex omega_c{};
  Complex omega_d{};
  Complex omega_f{};
  Complex omega_t{};
  Scalar delta_p = Scalar(0);

  bool operator==(const DriveSet &) const = default;
};

/// No unique steady state (no dissipation channel at all).
class NoSteadyStateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// sigma_ij = |i><j| with 1-based level labels.
template <typename Scalar> Matrix3c<Scalar> sigma(int i, int j) {
  Matrix3c<Scalar> s = Matrix3c<Scalar>::Zero();
  s(i - 1, j - 1) = Scalar(1);
  return s;
}

template <typename Scalar> Matrix3c<Scalar> hamiltonian_interaction(const DriveSet<Scalar> &d) {
  Matrix3c<Scalar> h = Matrix3c<Scalar>::Zero();
  h(1, 1) = d.delta_p;
  h(2, 2) = d.delta_p;
  const Matrix3c<Scalar> raising = (d.omega_p + d.omega_f) * sigma<Scalar>(2, 1) +
                                   (d.omega_c + d.omega_d) * sigma<Scalar>(3, 2) +
                                   d.omega_t * sigma<Scalar>(3, 1);
  h -= Scalar(0.5) * (raising + raising.adjoint());
  return h;
}

template <typename Scalar> struct JumpOperator {
  Scalar rate;
  Matrix3c<Scalar> op;
};

/// Relaxation |j> -> |i> (i < j) via sigma_ij and pure dephasing via sigma_jj.
template <typename Scalar>
std::vector<JumpOperator<Scalar>> jump_operators(const SystemParams<Scalar> &p) {
  return {{p.gamma12, sigma<Scalar>(1, 2)},   {p.gamma13, sigma<Scalar>(1, 3)},
          {p.gamma23, sigma<Scalar>(2, 3)},   {p.gamma_phi2, sigma<Scalar>(2, 2)},
          {p.gamma_phi3, sigma<Scalar>(3, 3)}};
}

template <typename Scalar>
Matrix3c<Scalar> lindblad_rhs(const SystemParams<Scalar> &p, const DriveSet<Scalar> &d,
                              const DensityMatrix<Scalar> &rho) {
  const auto i = detail::imag_unit<Scalar>();
  const Matrix3c<Scalar> h = hamiltonian_interaction(d);
  Matrix3c<Scalar> out = -i * (h * rho - rho * h);
  for (const auto &jump : jump_operators(p)) {
    if (jump.rate == Scalar(0)) {
      continue;
    }
    const Matrix3c<Scalar> &l = jump.op;
    const Matrix3c<Scalar> ldl = l.adjoint() * l;
    out += Scalar(0.5) * jump.rate *
           (Scalar(2) * l * rho * l.adjoint() - ldl * rho - rho * ldl);
  }
  return out;
}

/// Row-major vectorization: index 3*i + j holds rho(i, j).
template <typename Scalar> Eigen::Matrix<std::complex<Scalar>, 9, 1> vectorize(const Matrix3c<Scalar> &m) {
  Eigen::Matrix<std::complex<Scalar>, 9, 1> v;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      v(3 * r + c) = m(r, c);
    }
  }
  return v;
}

template <typename Scalar>
Matrix3c<Scalar> unvectorize(const Eigen::Matrix<std::complex<Scalar>, 9, 1> &v) {
  Matrix3c<Scalar> m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m(r, c) = v(3 * r + c);
    }
  }
  return m;
}

/// The generator is linear, so its columns are its images of the basis |r><c|.
template <typename Scalar>
Superoperator<Scalar> liouvillian(const SystemParams<Scalar> &p, const DriveSet<Scalar> &d) {
  Superoperator<Scalar> l;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      l.col(3 * r + c) = vectorize<Scalar>(lindblad_rhs(p, d, sigma<Scalar>(r + 1, c + 1)));
    }
  }
  return l;
}

template <typename Scalar> struct DensityDiagnostics {
  Scalar hermiticity_residual;
  Scalar trace_error;
  Scalar min_eigenvalue;

  bool valid(Scalar herm_tol = Scalar(1e-12), Scalar trace_tol = Scalar(1e-12),
             Scalar eig_floor = Scalar(-1e-10)) const {
    return hermiticity_residual <= herm_tol && trace_error <= trace_tol &&
           min_eigenvalue >= eig_floor;
  }
};

template <typename Scalar> DensityDiagnostics<Scalar> diagnose(const DensityMatrix<Scalar> &rho) {
  DensityDiagnostics<Scalar> d;
  d.hermiticity_residual = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  d.trace_error = std::abs(rho.trace() - std::complex<Scalar>(1));
  const Matrix3c<Scalar> herm = Scalar(0.5) * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix3c<Scalar>> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

enum class SteadyStateMethod { Auto, LinearSolve, Integration };

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::Auto;
  double residual_tolerance = 1e-12;
  // Upper bound on integrated time, in units of 1/gamma13.
  double max_time = 1e7;
};

namespace detail {

template <typename Scalar> bool has_dissipation(const SystemParams<Scalar> &p) {
  for (const auto &jump : jump_operators(p)) {
    if (jump.rate > Scalar(0)) {
      return true;
    }
  }
  return false;
}

template <typename Scalar>
std::optional<DensityMatrix<Scalar>> steady_state_linear(const Superoperator<Scalar> &l) {
  using Vec9 = Eigen::Matrix<std::complex<Scalar>, 9, 1>;
  // Population rows sum to zero, so any of them can carry the trace condition.
  constexpr int population_rows[] = {0, 4, 8};
  int replace = 0;
  Scalar best = Scalar(-1);
  for (int row : population_rows) {
    const Scalar n = l.row(row).norm();
    if (n > best) {
      best = n;
      replace = row;
    }
  }
  Superoperator<Scalar> a = l;
  a.row(replace).setZero();
  for (int col : population_rows) {
    a(replace, col) = Scalar(1);
  }
  Vec9 b = Vec9::Zero();
  b(replace) = Scalar(1);

  Eigen::FullPivLU<Superoperator<Scalar>> lu(a);
  if (!lu.isInvertible()) {
    return std::nullopt;
  }
  const Vec9 x = lu.solve(b);
  if (!x.allFinite()) {
    return std::nullopt;
  }
  return unvectorize<Scalar>(x);
}

template <typename Scalar>
DensityMatrix<Scalar> steady_state_integration(const Superoperator<Scalar> &l,
                                               const SteadyStateOptions &opt) {
  using Vec9 = Eigen::Matrix<std::complex<Scalar>, 9, 1>;
  const Scalar norm = l.cwiseAbs().rowwise().sum().maxCoeff();
  // |h * eig| stays well inside the RK4 stability region.
  const Scalar h = Scalar(0.5) / std::max(norm, Scalar(1e-12));
  Vec9 v = vectorize<Scalar>(sigma<Scalar>(1, 1));
  const Scalar half = h / Scalar(2);
  const auto max_steps = static_cast<long long>(std::ceil(opt.max_time / static_cast<double>(h)));
  for (long long k = 0; k < max_steps; ++k) {
    const Vec9 k1 = l * v;
    if (k1.cwiseAbs().maxCoeff() < Scalar(opt.residual_tolerance)) {
      return unvectorize<Scalar>(v);
    }
    const Vec9 k2 = l * (v + half * k1);
    const Vec9 k3 = l * (v + half * k2);
    const Vec9 k4 = l * (v + h * k3);
    v += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
  }
  throw NoSteadyStateError("steady_state: integration did not reach the residual tolerance");
}

} // namespace detail

/// Solves L(rho) = 0 with Tr(rho) = 1. The linear solve is tried first; a
/// long-time RK4 integration from |1><1| is the fallback.
template <typename Scalar>
DensityMatrix<Scalar> steady_state(const SystemParams<Scalar> &p, const DriveSet<Scalar> &d,
                                   const SteadyStateOptions &opt = {}) {
  if (!detail::has_dissipation(p)) {
    throw NoSteadyStateError("steady_state: no dissipation, steady state is not unique");
  }
  const Superoperator<Scalar> l = liouvillian(p, d);
  DensityMatrix<Scalar> rho;
  if (opt.method != SteadyStateMethod::Integration) {
    if (auto solved = detail::steady_state_linear(l)) {
      rho = *solved;
    } else if (opt.method == SteadyStateMethod::LinearSolve) {
      throw NoSteadyStateError("steady_state: Liouvillian with trace row is singular");
    } else {
      rho = detail::steady_state_integration(l, opt);
    }
  } else {
    rho = detail::steady_state_integration(l, opt);
  }
  return Scalar(0.5) * (rho + rho.adjoint());
}

enum class CoherenceLabel { Rho21, Rho31, Rho32 };

inline const char *to_string(CoherenceLabel c) {
  switch (c) {
  case CoherenceLabel::Rho21:
    return "rho21";
  case CoherenceLabel::Rho31:
    return "rho31";
  case CoherenceLabel::Rho32:
    return "rho32";
  }
  return "?";
}

template <typename Scalar> struct ValidationEntry {
  CoherenceLabel label;
  std::complex<Scalar> oracle;
  // Empty where the perturbative expansion has no formula (rho32).
  std::optional<std::complex<Scalar>> predicted;
  std::optional<Scalar> abs_error;
  std::optional<Scalar> rel_error;
};

template <typename Scalar> struct ValidationReport {
  DriveSet<Scalar> drives;
  std::vector<ValidationEntry<Scalar>> entries;

  const ValidationEntry<Scalar> &at(CoherenceLabel label) const {
    for (const auto &e : entries) {
      if (e.label == label) {
        return e;
      }
    }
    throw std::out_of_range("ValidationReport: missing coherence");
  }
};

namespace detail {

template <typename Scalar>
ValidationEntry<Scalar> compare(CoherenceLabel label, std::complex<Scalar> oracle,
                                std::complex<Scalar> predicted) {
  const Scalar abs_err = std::abs(oracle - predicted);
  const Scalar scale = std::abs(predicted);
  Scalar rel;
  if (scale > Scalar(0)) {
    rel = abs_err / scale;
  } else {
    rel = abs_err == Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  }
  return {label, oracle, predicted, abs_err, rel};
}

} // namespace detail

/// Compares oracle coherences against the summed perturbative terms.
/// Control and driving fields and the detuning are taken from `d`.
template <typename Scalar>
ValidationReport<Scalar> validate_perturbation(const SystemParams<Scalar> &p,
                                               const DriveSet<Scalar> &d,
                                               const SteadyStateOptions &opt = {}) {
  SystemParams<Scalar> q = p;
  q.omega_c = d.omega_c;
  q.omega_d = d.omega_d;
  q.delta_p = d.delta_p;

  const DensityMatrix<Scalar> rho = steady_state(q, d, opt);
  const auto rates = derive_rates(q);
  const auto fields = make_fields(d.omega_p, d.omega_t, d.omega_f);
  const auto c = coherences(rates, q, fields);

  ValidationReport<Scalar> report;
  report.drives = d;
  report.entries.push_back(
      detail::compare(CoherenceLabel::Rho21, rho(1, 0), c.rho21_1 + c.rho21_2 + c.rho21_3));
  report.entries.push_back(detail::compare(CoherenceLabel::Rho31, rho(2, 0), c.rho31_1 + c.rho31_2));
  report.entries.push_back({CoherenceLabel::Rho32, rho(2, 1), std::nullopt, std::nullopt,
                            std::nullopt});
  return report;
}

} // namespace wavemix

#endif // WAVEMIX_LIOUVILLE_HPP_
