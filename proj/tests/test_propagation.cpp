#include <doctest.h>

#include <complex>
#include <random>

#include "wavemix/propagation.hpp"

using namespace wavemix;
using cd = std::complex<double>;

namespace {

constexpr cd I{0.0, 1.0};

// Right-hand sides of the propagation equations written out term by term,
// independent of the factored coupling matrix.
FieldVector<double> direct_rhs(const Params &p, const FieldVector<double> &v) {
  const auto r = derive_rates(p);
  const cd lam = r.lambda;
  const cd wp = v(0), wt = v(1), wf = v(2);
  const cd wc = p.omega_c, wd = p.omega_d;
  const cd i2 = I * I, i3 = I * I * I;
  FieldVector<double> out;
  out(0) = I * p.kappa12 *
           (I * r.Gamma31 * wp / (2.0 * lam) + i2 * wt * std::conj(wc) / (4.0 * lam) +
            i3 * wf * wd * std::conj(wc) / (8.0 * r.Gamma21 * lam));
  out(1) = I * p.kappa13 *
           (I * r.Gamma21 * wt / (2.0 * lam) + i2 * wp * wc / (4.0 * lam) +
            i2 * wf * wd / (4.0 * lam));
  out(2) = I * p.kappa12 *
           (I * r.Gamma31 * wf / (2.0 * lam) + i2 * wt * std::conj(wd) / (4.0 * lam) +
            i3 * wp * wc * std::conj(wd) / (8.0 * r.Gamma21 * lam));
  return out;
}

double max_relative_deviation(const PropagationTrace<double> &trace, const CouplingMatrix<double> &m,
                              const FieldVector<double> &v0) {
  const ClosedFormPropagator<double> exact(m);
  double worst = 0.0;
  for (const auto &s : trace.samples) {
    const auto ref = exact(v0, s.z);
    worst = std::max(worst, (s.fields - ref).norm() / ref.norm());
  }
  return worst;
}

void check_close(cd actual, cd expected, double rel) {
  CHECK(std::abs(actual - expected) <= rel * std::abs(expected));
}

} // namespace

TEST_CASE("build_coupling_matrix: weak-field entries") {
  const auto m = build_coupling_matrix(weak_field_params());
  check_close(m(kProbe, kProbe), cd(-50.124688279301736, 0.0), 1e-12);
  check_close(m(kTwm, kProbe), cd(0.0, -16.458852867830423), 1e-12);
  check_close(m(kProbe, kFwm), cd(49.87531172069826, 0.0), 1e-12);
  check_close(m(kProbe, kTwm), cd(0.0, -4.987531172069826), 1e-12);
  check_close(m(kTwm, kTwm), cd(-1.6458852867830422, 0.0), 1e-12);
  check_close(m(kFwm, kProbe), cd(49.87531172069826, 0.0), 1e-12);
}

TEST_CASE("build_coupling_matrix: strong-field entries") {
  const auto m = build_coupling_matrix(strong_field_params());
  check_close(m(kProbe, kProbe), cd(-0.0157508584052855, -0.004927174151920206), 1e-12);
  check_close(m(kTwm, kProbe), cd(-0.002099437902874357, -0.41308541469713167), 1e-12);
  check_close(m(kProbe, kFwm), cd(0.006647072022863238, -0.25405886948520945), 1e-12);
  check_close(m(kFwm, kTwm), cd(-5.169070594198227e-05, -0.010170663619436955), 1e-12);
}

TEST_CASE("build_coupling_matrix matches the term-by-term right-hand side") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Params p;
    p.omega_c = cd(u(gen), u(gen)) * 8.0;
    p.omega_d = cd(u(gen), u(gen));
    p.delta_p = u(gen);
    p.gamma_phi2 = 0.1 * std::abs(u(gen));
    p.kappa13 = 1.0 + 3.0 * std::abs(u(gen));
    const auto m = build_coupling_matrix(p);
    const auto v = make_fields(cd(u(gen), u(gen)), cd(u(gen), u(gen)), cd(u(gen), u(gen)));
    const FieldVector<double> a = m * v;
    const auto b = direct_rhs(p, v);
    CHECK((a - b).norm() <= 1e-12 * b.norm());
  }
}

TEST_CASE("build_coupling_matrix: no pumps means no coupling") {
  Params p;
  p.omega_c = 0.0;
  p.omega_d = 0.0;
  const auto m = build_coupling_matrix(p);
  const auto r = derive_rates(p);
  CHECK(m.isDiagonal(0.0));
  check_close(m(kProbe, kProbe), -p.kappa12 * r.Gamma31 / (2.0 * r.lambda), 1e-14);
  check_close(m(kTwm, kTwm), -p.kappa13 * r.Gamma21 / (2.0 * r.lambda), 1e-14);
  check_close(m(kFwm, kFwm), -p.kappa12 * r.Gamma31 / (2.0 * r.lambda), 1e-14);

  Params q = strong_field_params();
  q.omega_d = 0.0;
  const auto mq = build_coupling_matrix(q);
  CHECK(mq(kProbe, kFwm) == cd(0.0));
  CHECK(mq(kFwm, kProbe) == cd(0.0));
  CHECK(mq(kTwm, kFwm) == cd(0.0));
  CHECK(mq(kFwm, kTwm) == cd(0.0));
}

TEST_CASE("build_coupling_matrix: singular parameters") {
  Params p;
  p.gamma12 = 0.0;
  p.delta_p = 0.0;
  CHECK_THROWS_AS(build_coupling_matrix(p), SingularParameterError);
}

TEST_CASE("coupling matrix is dissipative for both regimes") {
  for (const auto &p : {weak_field_params(), strong_field_params()}) {
    Eigen::ComplexEigenSolver<CouplingMatrix<double>> es(build_coupling_matrix(p));
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(es.eigenvalues()(k).real() <= 0.0);
    }
  }
}

TEST_CASE("efficiencies") {
  Params p;
  const cd w0 = p.probe_rabi0;
  const auto launch = efficiencies(p, make_fields<double>(w0, 0.0, 0.0));
  CHECK(launch.eta_t == 0.0);
  CHECK(launch.eta_f == 0.0);
  CHECK(launch.eta_total == 0.0);
  CHECK(launch.transmission == doctest::Approx(1.0).epsilon(1e-15));

  const auto twm = efficiencies(p, make_fields<double>(0.0, std::sqrt(3.3) * w0, 0.0));
  CHECK(twm.eta_t == doctest::Approx(1.0).epsilon(1e-14));

  const auto fwm = efficiencies(p, make_fields<double>(0.0, 0.0, w0));
  CHECK(fwm.eta_f == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fwm.eta_total == doctest::Approx(1.0).epsilon(1e-15));

  p.mu_ratio = 2.0;
  const auto scaled = efficiencies(p, make_fields<double>(0.0, std::sqrt(3.3) * w0, 0.0));
  CHECK(scaled.eta_t == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("integrate_rk4: trivial fixed points") {
  const auto p = weak_field_params();
  const auto m = build_coupling_matrix(p);
  const auto zero = integrate_rk4(p, m, make_fields<double>(0.0, 0.0, 0.0), 0.5, 1e-3);
  for (const auto &s : zero.samples) {
    CHECK(s.fields.norm() == 0.0);
  }

  const auto v0 = make_fields<double>(cd(1e-3, 2e-4), cd(0.0, 1e-4), 3e-4);
  const auto still = integrate_rk4(p, CouplingMatrix<double>::Zero().eval(), v0, 1.0, 0.1);
  for (const auto &s : still.samples) {
    CHECK(s.fields == v0);
  }
}

TEST_CASE("integrate_rk4: trace layout") {
  const auto p = strong_field_params();
  const auto m = build_coupling_matrix(p);
  const auto trace = integrate_rk4(p, m, launch_fields(p), 10.0, 0.03);
  // 0.03 does not divide 10, so the step shrinks to land on z_max
  REQUIRE(trace.size() == 335);
  CHECK(trace.samples.front().z == 0.0);
  CHECK(trace.samples.front().eta_t == 0.0);
  CHECK(trace.samples.front().eta_f == 0.0);
  CHECK(trace.samples.front().transmission == doctest::Approx(1.0));
  CHECK(trace.samples.back().z == doctest::Approx(10.0).epsilon(1e-14));
  for (std::size_t k = 1; k < trace.size(); ++k) {
    CHECK(trace.samples[k].z > trace.samples[k - 1].z);
    CHECK(trace.samples[k].eta_t >= 0.0);
    CHECK(trace.samples[k].eta_f >= 0.0);
  }

  SamplingOptions opt;
  opt.max_samples = 50;
  const auto thin = integrate_rk4(p, m, launch_fields(p), 10.0, 0.03, opt);
  CHECK(thin.size() <= 52);
  CHECK(thin.samples.back().z == doctest::Approx(10.0).epsilon(1e-14));

  opt.stride = 100;
  const auto strided = integrate_rk4(p, m, launch_fields(p), 10.0, 0.03, opt);
  CHECK(strided.size() == 5);
}

TEST_CASE("integrate_rk4: invalid arguments and overflow") {
  const auto p = weak_field_params();
  const auto m = build_coupling_matrix(p);
  CHECK_THROWS_AS(integrate_rk4(p, m, launch_fields(p), 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_rk4(p, m, launch_fields(p), -1.0, 0.1), std::invalid_argument);

  const CouplingMatrix<double> growth = CouplingMatrix<double>::Identity() * 1e3;
  try {
    integrate_rk4(p, growth, launch_fields(p), 10.0, 1e-3);
    FAIL("expected NumericError");
  } catch (const NumericError &e) {
    CHECK(e.z_reached() > 0.0);
    CHECK(e.z_reached() < 10.0);
    CHECK(e.spectral_radius() == doctest::Approx(1e3));
    CHECK(e.step() == doctest::Approx(1e-3));
  }
}

TEST_CASE("propagate_closed_form: identity and decoupled decay") {
  const auto m = build_coupling_matrix(strong_field_params());
  const auto v0 = make_fields<double>(1e-3, 0.0, 0.0);
  CHECK(propagate_closed_form(m, v0, 0.0) == v0);
  CHECK_THROWS_AS(propagate_closed_form(m, v0, -1.0), std::invalid_argument);

  CouplingMatrix<double> diag = CouplingMatrix<double>::Zero();
  diag.diagonal() << cd(-0.3, 1.2), cd(-2.0, 0.0), cd(-0.1, -0.5);
  const auto out = propagate_closed_form(diag, make_fields<double>(1.0, 0.0, 0.0), 2.5);
  check_close(out(0), std::exp(diag(0, 0) * 2.5), 1e-14);
  CHECK(out(1) == cd(0.0));
  CHECK(out(2) == cd(0.0));
}

TEST_CASE("propagate_closed_form agrees with the Pade matrix exponential") {
  // frozen from an independent scaling-and-squaring evaluation
  const auto weak = build_coupling_matrix(weak_field_params());
  const auto a = propagate_closed_form(weak, make_fields<double>(1e-3, 0.0, 0.0), 0.117);
  check_close(a(0), cd(5.739473510467561e-05, 0.0), 1e-9);
  check_close(a(1), cd(0.0, -0.0011482858868444256), 1e-9);
  check_close(a(2), cd(5.738644128551481e-05, 0.0), 1e-9);

  const auto strong = build_coupling_matrix(strong_field_params());
  const auto b = propagate_closed_form(strong, make_fields<double>(1e-3, 0.0, 0.0), 4.58);
  check_close(b(0), cd(6.855325699948179e-07, 1.4638463348964258e-05), 1e-9);
  check_close(b(1), cd(-0.00013834990139088973, -0.0011680862951715372), 1e-9);
  check_close(b(2), cd(-2.9670524562766724e-05, -0.0006878751707234099), 1e-9);
}

TEST_CASE("propagate_closed_form: defective matrix takes the fallback path") {
  // Jordan block: exp(J z) = e^{a z} [[1, z], [0, 1]] in the upper 2x2 corner
  CouplingMatrix<double> j = CouplingMatrix<double>::Zero();
  const cd a(-0.5, 0.25);
  j(0, 0) = a;
  j(1, 1) = a;
  j(0, 1) = 1.0;
  j(2, 2) = -1.0;
  const ClosedFormPropagator<double> prop(j);
  CHECK_FALSE(prop.uses_eigendecomposition());
  const double z = 1.7;
  const auto out = prop(make_fields<double>(0.0, 1.0, 1.0), z);
  check_close(out(0), z * std::exp(a * z), 1e-12);
  check_close(out(1), std::exp(a * z), 1e-12);
  check_close(out(2), std::exp(-z), 1e-12);

  const ClosedFormPropagator<double> regular(build_coupling_matrix(weak_field_params()));
  CHECK(regular.uses_eigendecomposition());
  CHECK(regular.eigenvector_condition() < 1e8);
}

TEST_CASE("integrate_rk4 agrees with the closed form") {
  for (const auto &p : {weak_field_params(), strong_field_params()}) {
    const auto m = build_coupling_matrix(p);
    const auto v0 = launch_fields(p);
    const double z_max = default_z_max(m);
    const auto trace = integrate_rk4(p, m, v0, z_max, default_step(m, 1.0));
    CHECK(max_relative_deviation(trace, m, v0) <= 1e-8);
    // the same bound holds for any step at or below kStepFactor / rho
    const auto exact_rho = integrate_rk4(p, m, v0, z_max, kStepFactor / spectral_radius(m));
    CHECK(max_relative_deviation(exact_rho, m, v0) <= 1e-8);
  }
}

TEST_CASE("integrate_rk4 converges at fourth order") {
  for (const auto &p : {weak_field_params(), strong_field_params()}) {
    const auto m = build_coupling_matrix(p);
    const auto v0 = launch_fields(p);
    const double rho = spectral_radius(m);
    const double z_max = default_z_max(m);
    const double coarse = max_relative_deviation(integrate_rk4(p, m, v0, z_max, 0.4 / rho), m, v0);
    const double fine = max_relative_deviation(integrate_rk4(p, m, v0, z_max, 0.2 / rho), m, v0);
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(coarse / fine >= 8.0);
  }
}

TEST_CASE("no pumps: generated signals stay identically zero") {
  Params p;
  p.omega_c = 0.0;
  p.omega_d = 0.0;
  const auto m = build_coupling_matrix(p);
  const auto trace = integrate_rk4(p, m, launch_fields(p), 0.2, 1e-3);
  for (const auto &s : trace.samples) {
    CHECK(s.fields(kTwm) == cd(0.0));
    CHECK(s.fields(kFwm) == cd(0.0));
  }
}

TEST_CASE("efficiencies are invariant under rescaling the launched probe") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto &base : {weak_field_params(), strong_field_params()}) {
    const auto m = build_coupling_matrix(base);
    const double z_max = default_z_max(m);
    const double step = default_step(m, 0.01);
    const auto ref = integrate_rk4(base, m, launch_fields(base), z_max, step);
    for (int k = 0; k < 5; ++k) {
      const cd c(u(gen), u(gen));
      Params scaled = base;
      scaled.probe_rabi0 = base.probe_rabi0 * c;
      const auto trace = integrate_rk4(scaled, m, launch_fields(scaled), z_max, step);
      REQUIRE(trace.size() == ref.size());
      double worst = 0.0;
      for (std::size_t s = 0; s < ref.size(); ++s) {
        worst = std::max({worst, std::abs(trace.samples[s].eta_t - ref.samples[s].eta_t),
                          std::abs(trace.samples[s].eta_f - ref.samples[s].eta_f),
                          std::abs(trace.samples[s].transmission - ref.samples[s].transmission)});
      }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("default_step and default_z_max") {
  const auto m = build_coupling_matrix(weak_field_params());
  const double bound = spectral_radius_bound(m);
  CHECK(bound >= spectral_radius(m));
  CHECK(default_step(m, 1.0) == doctest::Approx(kStepFactor / bound));
  CHECK(default_step(m, 1e-6) == 1e-6);
  CHECK(default_step(CouplingMatrix<double>::Zero().eval(), 0.3) == 0.3);
  // four beat periods of the +-12.79i pair
  CHECK(default_z_max(m) == doctest::Approx(4.0 * 2.0 * M_PI / (2.0 * 12.794159773609985)).epsilon(1e-9));
}
