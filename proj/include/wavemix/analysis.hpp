// Spectra, extrema and the qualitative signatures of the two control-field
// regimes (anti-phase oscillation vs. synchronous conversion).

#ifndef WAVEMIX_ANALYSIS_HPP_
#define WAVEMIX_ANALYSIS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavemix/core_model.hpp"
#include "wavemix/propagation.hpp"

namespace wavemix {

struct SpectrumPoint {
  double delta_p;
  double alpha;
};

/// alpha in units of kappa12, alpha = kappa12 Re(Gamma31 / (2 lambda)).
struct Spectrum {
  std::vector<SpectrumPoint> points;
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// Grid must be nonempty and strictly increasing. Singular points are
/// rethrown as SingularParameterError naming the offending detuning.
Spectrum absorption_spectrum(const Params &params, std::span<const double> delta_grid);

struct Extremum {
  double z;
  double value;
  std::size_t index;
};

struct ExtremaReport {
  std::vector<Extremum> maxima;
  std::vector<Extremum> minima;
  double threshold = 0.0;
};

/// Turning points that swing by at least `threshold` on both sides; the
/// launch value counts as the initial reference and endpoints are never
/// reported. Maxima and minima alternate by construction.
ExtremaReport find_extrema(std::span<const double> z, std::span<const double> values,
                           double threshold);

struct CheckResult {
  bool passed = false;
  std::vector<std::string> diagnostics;

  explicit operator bool() const { return passed; }
};

/// Alignment tolerance for the anti-phase check: the larger of one grid
/// step and `fraction` of the mean spacing between consecutive maxima.
double alignment_tolerance(const ExtremaReport &report, double grid_step,
                           double fraction = 0.05);

/// Anti-phase test between two efficiency series sharing a Z grid.
CheckResult interleaving_check(const ExtremaReport &report_t, const ExtremaReport &report_f,
                               double tolerance_z);

/// `fraction` of the Z position of the first maximum.
double synchrony_tolerance(const ExtremaReport &report_t, double fraction = 0.05);

/// True iff every eta_t maximum has an eta_f maximum within tolerance_z.
CheckResult synchrony_check(const ExtremaReport &report_t, const ExtremaReport &report_f,
                            double tolerance_z);

CheckResult synchrony_check(const PropagationTrace<double> &trace, double tolerance_z,
                            double threshold = 1e-4);

struct EfficiencySeries {
  std::vector<double> z;
  std::vector<double> eta_t;
  std::vector<double> eta_f;
};

EfficiencySeries efficiency_series(const PropagationTrace<double> &trace);

struct RegimeReports {
  ExtremaReport twm;
  ExtremaReport fwm;
  double grid_step;
};

RegimeReports trace_extrema(const PropagationTrace<double> &trace, double threshold = 1e-4);

struct PeakEfficiencies {
  double z_t = 0.0;
  double eta_t_max = 0.0;
  double z_f = 0.0;
  double eta_f_max = 0.0;
  double eta_total_max = 0.0;
};

PeakEfficiencies peak_efficiencies(const PropagationTrace<double> &trace);

struct TransparencyWindow {
  double center;
  double width;
  double floor;
  double peak_alpha;
  double left_peak_delta;
  double right_peak_delta;
};

/// Empty when the spectrum has no interior minimum flanked by two maxima.
std::optional<TransparencyWindow> transparency_window(const Spectrum &spectrum);

} // namespace wavemix

#endif // WAVEMIX_ANALYSIS_HPP_
