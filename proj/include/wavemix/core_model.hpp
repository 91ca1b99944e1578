// Physical parameters, derived decoherence rates and the perturbative
// steady-state coherences of the driven cyclic three-level system.
//
// Units: every rate and Rabi frequency is measured in units of gamma13,
// distances in units of 1/kappa12.

#ifndef WAVEMIX_CORE_MODEL_HPP_
#define WAVEMIX_CORE_MODEL_HPP_

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace wavemix {

/// Raised when a denominator (lambda or Gamma21) vanishes.
class SingularParameterError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when parameters violate their invariants.
class InvalidParameterError : public std::invalid_argument {
public:
  InvalidParameterError(std::string field, std::string reason)
      : std::invalid_argument(field + ": " + reason), field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string &field() const { return field_; }
  const std::string &reason() const { return reason_; }

private:
  std::string field_;
  std::string reason_;
};

template <typename Scalar> struct SystemParams {
  using Complex = std::complex<Scalar>;

  Scalar gamma12 = Scalar(0.01);
  Scalar gamma13 = Scalar(1);
  Scalar gamma23 = Scalar(0.005);
  Scalar gamma_phi2 = Scalar(0);
  Scalar gamma_phi3 = Scalar(0);
  Complex omega_c = Complex(Scalar(0.1));
  Complex omega_d = Complex(Scalar(0.1));
  Scalar delta_p = Scalar(0);
  Scalar kappa12 = Scalar(1);
  Scalar kappa13 = Scalar(3.3);
  // mu12 / mu13
  Scalar mu_ratio = Scalar(1);
  // omega_t / omega_p
  Scalar freq_ratio = Scalar(3.3);
  Complex probe_rabi0 = Complex(Scalar(1e-3));

  bool operator==(const SystemParams &) const = default;
};

using Params = SystemParams<double>;

/// Weak control-field regime (Omega_c = Omega_d = 0.1, Delta_p = 0).
template <typename Scalar = double> SystemParams<Scalar> weak_field_params() {
  return SystemParams<Scalar>{};
}

/// Strong control-field regime (Omega_c = 8, Omega_d = 0.65, Delta_p = 0.16).
template <typename Scalar = double> SystemParams<Scalar> strong_field_params() {
  SystemParams<Scalar> p;
  p.omega_c = Scalar(8);
  p.omega_d = Scalar(0.65);
  p.delta_p = Scalar(0.16);
  return p;
}

namespace detail {

template <typename Scalar>
void require_finite_nonneg(Scalar value, const char *field) {
  if (!std::isfinite(value)) {
    throw InvalidParameterError(field, "must be finite");
  }
  if (value < Scalar(0)) {
    throw InvalidParameterError(field, "must be non-negative");
  }
}

template <typename Scalar> void require_positive(Scalar value, const char *field) {
  if (!std::isfinite(value) || !(value > Scalar(0))) {
    throw InvalidParameterError(field, "must be finite and positive");
  }
}

template <typename Scalar>
void require_finite(const std::complex<Scalar> &value, const char *field) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw InvalidParameterError(field, "must be finite");
  }
}

} // namespace detail

/// Throws InvalidParameterError naming the first offending field.
template <typename Scalar> void validate(const SystemParams<Scalar> &p) {
  detail::require_finite_nonneg(p.gamma12, "gamma12");
  detail::require_positive(p.gamma13, "gamma13");
  detail::require_finite_nonneg(p.gamma23, "gamma23");
  detail::require_finite_nonneg(p.gamma_phi2, "gamma_phi2");
  detail::require_finite_nonneg(p.gamma_phi3, "gamma_phi3");
  detail::require_finite(p.omega_c, "omega_c");
  detail::require_finite(p.omega_d, "omega_d");
  if (!std::isfinite(p.delta_p)) {
    throw InvalidParameterError("delta_p", "must be finite");
  }
  detail::require_positive(p.kappa12, "kappa12");
  detail::require_positive(p.kappa13, "kappa13");
  detail::require_positive(p.mu_ratio, "mu_ratio");
  detail::require_positive(p.freq_ratio, "freq_ratio");
  detail::require_finite(p.probe_rabi0, "probe_rabi0");
  if (p.probe_rabi0 == std::complex<Scalar>(0)) {
    throw InvalidParameterError("probe_rabi0", "must be non-zero");
  }
}

template <typename Scalar> struct DerivedRates {
  using Complex = std::complex<Scalar>;

  Scalar tau21;
  Scalar tau31;
  Scalar tau32;
  Complex Gamma21;
  Complex Gamma31;
  Complex lambda;
};

/// Complex Rabi amplitudes ordered (probe, TWM signal, FWM signal).
template <typename Scalar> using FieldVector = Eigen::Matrix<std::complex<Scalar>, 3, 1>;

enum FieldIndex : Eigen::Index { kProbe = 0, kTwm = 1, kFwm = 2 };

template <typename Scalar>
FieldVector<Scalar> make_fields(std::complex<Scalar> probe, std::complex<Scalar> twm,
                                std::complex<Scalar> fwm) {
  FieldVector<Scalar> v;
  v << probe, twm, fwm;
  return v;
}

template <typename Scalar> bool all_finite(const FieldVector<Scalar> &v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) {
      return false;
    }
  }
  return true;
}

template <typename Scalar> struct CoherenceSet {
  using Complex = std::complex<Scalar>;

  Complex rho31_1{};
  Complex rho21_1{};
  Complex rho31_2{};
  Complex rho21_2{};
  Complex rho21_3{};
};

/// Decoherence rates and the complex denominators. `delta_p` overrides the
/// detuning stored in `p`, which is how spectra are evaluated.
template <typename Scalar>
DerivedRates<Scalar> derive_rates(const SystemParams<Scalar> &p, Scalar delta_p) {
  using Complex = std::complex<Scalar>;
  detail::require_finite_nonneg(p.gamma12, "gamma12");
  detail::require_positive(p.gamma13, "gamma13");
  detail::require_finite_nonneg(p.gamma23, "gamma23");
  detail::require_finite_nonneg(p.gamma_phi2, "gamma_phi2");
  detail::require_finite_nonneg(p.gamma_phi3, "gamma_phi3");

  const Scalar half(0.5);
  DerivedRates<Scalar> r;
  r.tau21 = half * (p.gamma12 + p.gamma_phi2);
  r.tau31 = half * (p.gamma13 + p.gamma23 + p.gamma_phi3);
  r.tau32 = half * (p.gamma12 + p.gamma13 + p.gamma23 + p.gamma_phi2 + p.gamma_phi3);
  r.Gamma21 = Complex(r.tau21, delta_p);
  r.Gamma31 = Complex(r.tau31, delta_p);
  r.lambda = r.Gamma21 * r.Gamma31 + std::norm(p.omega_c) / Scalar(4);
  return r;
}

template <typename Scalar> DerivedRates<Scalar> derive_rates(const SystemParams<Scalar> &p) {
  return derive_rates(p, p.delta_p);
}

namespace detail {

template <typename Scalar> void require_regular_lambda(const DerivedRates<Scalar> &r) {
  if (r.lambda == std::complex<Scalar>(0)) {
    throw SingularParameterError("lambda = Gamma21*Gamma31 + |Omega_c|^2/4 vanishes");
  }
}

template <typename Scalar> void require_regular_gamma21(const DerivedRates<Scalar> &r) {
  if (r.Gamma21 == std::complex<Scalar>(0)) {
    throw SingularParameterError("Gamma21 vanishes (gamma12 = gamma_phi2 = 0 at zero detuning)");
  }
}

template <typename Scalar> constexpr std::complex<Scalar> imag_unit() {
  return std::complex<Scalar>(Scalar(0), Scalar(1));
}

} // namespace detail

template <typename Scalar> struct FirstOrder {
  std::complex<Scalar> rho31;
  std::complex<Scalar> rho21;
};

template <typename Scalar> struct SecondOrder {
  std::complex<Scalar> rho31;
  std::complex<Scalar> rho21;
};

/// rho31^(1) = i Wt G21 / (2 lambda),  rho21^(1) = i (Wf + Wp) G31 / (2 lambda)
template <typename Scalar>
FirstOrder<Scalar> coherence_first_order(const DerivedRates<Scalar> &r,
                                         const FieldVector<Scalar> &fields) {
  detail::require_regular_lambda(r);
  const auto i = detail::imag_unit<Scalar>();
  const Scalar two(2);
  return {i * fields(kTwm) * r.Gamma21 / (two * r.lambda),
          i * (fields(kFwm) + fields(kProbe)) * r.Gamma31 / (two * r.lambda)};
}

/// rho31^(2) = -(Wp Wc + Wf Wd) / (4 lambda),  rho21^(2) = -Wt (Wc* + Wd*) / (4 lambda)
template <typename Scalar>
SecondOrder<Scalar> coherence_second_order(const DerivedRates<Scalar> &r,
                                           const SystemParams<Scalar> &p,
                                           const FieldVector<Scalar> &fields) {
  detail::require_regular_lambda(r);
  const auto i = detail::imag_unit<Scalar>();
  const auto i2 = i * i;
  const Scalar four(4);
  const auto denom = four * r.lambda;
  return {i2 * fields(kProbe) * p.omega_c / denom + i2 * fields(kFwm) * p.omega_d / denom,
          i2 * fields(kTwm) * std::conj(p.omega_c) / denom +
              i2 * fields(kTwm) * std::conj(p.omega_d) / denom};
}

/// rho21^(3) = -i (Wp Wc Wd* + Wf Wd Wc*) / (8 lambda G21)
template <typename Scalar>
std::complex<Scalar> coherence_third_order(const DerivedRates<Scalar> &r,
                                           const SystemParams<Scalar> &p,
                                           const FieldVector<Scalar> &fields) {
  detail::require_regular_lambda(r);
  detail::require_regular_gamma21(r);
  const auto i = detail::imag_unit<Scalar>();
  const auto i3 = i * i * i;
  const auto denom = Scalar(8) * r.lambda * r.Gamma21;
  return i3 * fields(kProbe) * p.omega_c * std::conj(p.omega_d) / denom +
         i3 * fields(kFwm) * p.omega_d * std::conj(p.omega_c) / denom;
}

template <typename Scalar>
CoherenceSet<Scalar> coherences(const DerivedRates<Scalar> &r, const SystemParams<Scalar> &p,
                                const FieldVector<Scalar> &fields) {
  const auto first = coherence_first_order(r, fields);
  const auto second = coherence_second_order(r, p, fields);
  CoherenceSet<Scalar> c;
  c.rho31_1 = first.rho31;
  c.rho21_1 = first.rho21;
  c.rho31_2 = second.rho31;
  c.rho21_2 = second.rho21;
  c.rho21_3 = coherence_third_order(r, p, fields);
  return c;
}

/// Exponential attenuation rate of the probe amplitude per unit z,
/// alpha = kappa12 Re(Gamma31 / (2 lambda)), evaluated at detuning `delta_p`.
template <typename Scalar>
Scalar probe_absorption(const SystemParams<Scalar> &p, Scalar delta_p) {
  const auto r = derive_rates(p, delta_p);
  detail::require_regular_lambda(r);
  return p.kappa12 * std::real(r.Gamma31 / (Scalar(2) * r.lambda));
}

} // namespace wavemix

#endif // WAVEMIX_CORE_MODEL_HPP_
