#include "wavemix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wavemix {

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count == 0) {
    throw std::invalid_argument("uniform_grid: count must be positive");
  }
  if (count == 1) {
    return {lo};
  }
  if (!(hi > lo)) {
    throw std::invalid_argument("uniform_grid: need hi > lo");
  }
  std::vector<double> grid(count);
  const double span = hi - lo;
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = lo + span * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  grid.back() = hi;
  return grid;
}

Spectrum absorption_spectrum(const Params &params, std::span<const double> delta_grid) {
  if (delta_grid.empty()) {
    throw std::invalid_argument("absorption_spectrum: empty detuning grid");
  }
  for (std::size_t k = 1; k < delta_grid.size(); ++k) {
    if (!(delta_grid[k] > delta_grid[k - 1])) {
      throw std::invalid_argument("absorption_spectrum: detuning grid must be strictly increasing");
    }
  }
  Spectrum spectrum;
  spectrum.points.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    try {
      spectrum.points.push_back({delta, probe_absorption(params, delta)});
    } catch (const SingularParameterError &e) {
      std::ostringstream os;
      os << e.what() << " at delta_p = " << delta;
      throw SingularParameterError(os.str());
    }
  }
  return spectrum;
}

ExtremaReport find_extrema(std::span<const double> z, std::span<const double> values,
                           double threshold) {
  if (z.size() != values.size()) {
    throw std::invalid_argument("find_extrema: z and values differ in length");
  }
  if (threshold < 0.0) {
    throw std::invalid_argument("find_extrema: threshold must be non-negative");
  }
  ExtremaReport report;
  report.threshold = threshold;
  if (values.size() < 3) {
    return report;
  }

  // Hysteresis walk. A candidate turns into an extremum once the series has
  // retraced by at least `threshold` from it; the reference for the first
  // swing is the launch value.
  enum class Trend { Unknown, Rising, Falling };
  Trend trend = Trend::Unknown;
  const double start = values[0];
  std::size_t cand = 0;
  const auto strictly_past = [threshold](double a, double b) {
    return threshold > 0.0 ? a - b >= threshold : a - b > 0.0;
  };

  for (std::size_t i = 1; i < values.size(); ++i) {
    const double v = values[i];
    switch (trend) {
    case Trend::Unknown:
      if (strictly_past(v, start)) {
        trend = Trend::Rising;
        cand = i;
      } else if (strictly_past(start, v)) {
        trend = Trend::Falling;
        cand = i;
      }
      break;
    case Trend::Rising:
      if (v > values[cand]) {
        cand = i;
      } else if (strictly_past(values[cand], v)) {
        report.maxima.push_back({z[cand], values[cand], cand});
        trend = Trend::Falling;
        cand = i;
      }
      break;
    case Trend::Falling:
      if (v < values[cand]) {
        cand = i;
      } else if (strictly_past(v, values[cand])) {
        report.minima.push_back({z[cand], values[cand], cand});
        trend = Trend::Rising;
        cand = i;
      }
      break;
    }
  }
  return report;
}

namespace {

std::optional<double> nearest_distance(double z, const std::vector<Extremum> &pool) {
  std::optional<double> best;
  for (const auto &e : pool) {
    const double d = std::abs(e.z - z);
    if (!best || d < *best) {
      best = d;
    }
  }
  return best;
}

std::size_t count_between(const std::vector<Extremum> &pool, double lo, double hi) {
  return static_cast<std::size_t>(std::count_if(
      pool.begin(), pool.end(), [lo, hi](const Extremum &e) { return e.z > lo && e.z < hi; }));
}

// Each maximum of `a` inside [lo, hi] must sit within tolerance of a minimum of `b`.
void check_alignment(const char *a_name, const std::vector<Extremum> &a_maxima,
                     const char *b_name, const std::vector<Extremum> &b_minima, double lo,
                     double hi, double tolerance, CheckResult &result) {
  for (const auto &e : a_maxima) {
    if (e.z < lo || e.z > hi) {
      continue;
    }
    const auto d = nearest_distance(e.z, b_minima);
    if (!d || *d > tolerance) {
      std::ostringstream os;
      os << a_name << " maximum at Z=" << e.z << " has no " << b_name << " minimum within "
         << tolerance;
      if (d) {
        os << " (nearest " << *d << ")";
      }
      result.diagnostics.push_back(os.str());
      result.passed = false;
    }
  }
}

// Between consecutive maxima of `outer` there must be exactly one maximum of `inner`.
void check_alternation(const char *outer_name, const std::vector<Extremum> &outer,
                       const char *inner_name, const std::vector<Extremum> &inner,
                       CheckResult &result) {
  for (std::size_t k = 1; k < outer.size(); ++k) {
    const std::size_t n = count_between(inner, outer[k - 1].z, outer[k].z);
    if (n != 1) {
      std::ostringstream os;
      os << n << " " << inner_name << " maxima between " << outer_name << " maxima at Z="
         << outer[k - 1].z << " and Z=" << outer[k].z;
      result.diagnostics.push_back(os.str());
      result.passed = false;
    }
  }
}

} // namespace

double alignment_tolerance(const ExtremaReport &report, double grid_step, double fraction) {
  const auto &m = report.maxima;
  if (m.size() < 2) {
    return grid_step;
  }
  const double spacing = (m.back().z - m.front().z) / static_cast<double>(m.size() - 1);
  return std::max(grid_step, fraction * spacing);
}

CheckResult interleaving_check(const ExtremaReport &report_t, const ExtremaReport &report_f,
                               double tolerance_z) {
  CheckResult result;
  result.passed = true;
  if (report_t.maxima.size() < 2) {
    result.passed = false;
    result.diagnostics.push_back("fewer than two eta_t maxima");
    return result;
  }
  if (report_f.maxima.empty()) {
    result.passed = false;
    result.diagnostics.push_back("no eta_f maxima");
    return result;
  }
  const double lo = report_t.maxima.front().z;
  const double hi = report_t.maxima.back().z;

  check_alternation("eta_t", report_t.maxima, "eta_f", report_f.maxima, result);
  check_alignment("eta_t", report_t.maxima, "eta_f", report_f.minima,
                  -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), tolerance_z, result);

  // Mirror conditions, restricted to the span covered by the eta_t maxima.
  std::vector<Extremum> inner_f;
  for (const auto &e : report_f.maxima) {
    if (e.z >= lo && e.z <= hi) {
      inner_f.push_back(e);
    }
  }
  check_alternation("eta_f", inner_f, "eta_t", report_t.maxima, result);
  check_alignment("eta_f", inner_f, "eta_t", report_t.minima, lo, hi, tolerance_z, result);
  return result;
}

double synchrony_tolerance(const ExtremaReport &report_t, double fraction) {
  if (report_t.maxima.empty()) {
    return 0.0;
  }
  return fraction * report_t.maxima.front().z;
}

CheckResult synchrony_check(const ExtremaReport &report_t, const ExtremaReport &report_f,
                            double tolerance_z) {
  CheckResult result;
  if (report_t.maxima.empty()) {
    result.diagnostics.push_back("no eta_t maxima");
    return result;
  }
  result.passed = true;
  for (const auto &e : report_t.maxima) {
    const auto d = nearest_distance(e.z, report_f.maxima);
    if (!d || *d > tolerance_z) {
      std::ostringstream os;
      os << "eta_t maximum at Z=" << e.z << " has no eta_f maximum within " << tolerance_z;
      if (d) {
        os << " (nearest " << *d << ")";
      }
      result.diagnostics.push_back(os.str());
      result.passed = false;
    }
  }
  return result;
}

EfficiencySeries efficiency_series(const PropagationTrace<double> &trace) {
  EfficiencySeries s;
  s.z.reserve(trace.size());
  s.eta_t.reserve(trace.size());
  s.eta_f.reserve(trace.size());
  for (const auto &sample : trace.samples) {
    s.z.push_back(sample.z);
    s.eta_t.push_back(sample.eta_t);
    s.eta_f.push_back(sample.eta_f);
  }
  return s;
}

RegimeReports trace_extrema(const PropagationTrace<double> &trace, double threshold) {
  const auto s = efficiency_series(trace);
  RegimeReports r;
  r.twm = find_extrema(s.z, s.eta_t, threshold);
  r.fwm = find_extrema(s.z, s.eta_f, threshold);
  r.grid_step = 0.0;
  for (std::size_t k = 1; k < s.z.size(); ++k) {
    r.grid_step = std::max(r.grid_step, s.z[k] - s.z[k - 1]);
  }
  return r;
}

CheckResult synchrony_check(const PropagationTrace<double> &trace, double tolerance_z,
                            double threshold) {
  const auto r = trace_extrema(trace, threshold);
  return synchrony_check(r.twm, r.fwm, tolerance_z);
}

PeakEfficiencies peak_efficiencies(const PropagationTrace<double> &trace) {
  PeakEfficiencies peaks;
  bool first = true;
  for (const auto &s : trace.samples) {
    if (first || s.eta_t > peaks.eta_t_max) {
      peaks.eta_t_max = s.eta_t;
      peaks.z_t = s.z;
    }
    if (first || s.eta_f > peaks.eta_f_max) {
      peaks.eta_f_max = s.eta_f;
      peaks.z_f = s.z;
    }
    if (first || s.eta_total > peaks.eta_total_max) {
      peaks.eta_total_max = s.eta_total;
    }
    first = false;
  }
  return peaks;
}

namespace {

// Walks from `center` towards `stop` and returns the interpolated detuning
// where alpha first reaches `level`.
double crossing(const std::vector<SpectrumPoint> &pts, std::size_t center, std::size_t stop,
                double level) {
  const int dir = stop > center ? 1 : -1;
  std::size_t k = center;
  while (k != stop) {
    const std::size_t next = static_cast<std::size_t>(static_cast<long>(k) + dir);
    if (pts[next].alpha >= level) {
      const double a0 = pts[k].alpha;
      const double a1 = pts[next].alpha;
      const double t = a1 == a0 ? 0.0 : (level - a0) / (a1 - a0);
      return pts[k].delta_p + t * (pts[next].delta_p - pts[k].delta_p);
    }
    k = next;
  }
  return pts[stop].delta_p;
}

} // namespace

std::optional<TransparencyWindow> transparency_window(const Spectrum &spectrum) {
  const auto &pts = spectrum.points;
  if (pts.size() < 5) {
    return std::nullopt;
  }
  // Interior local maxima (first index of a plateau).
  std::vector<std::size_t> peaks;
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    if (pts[k].alpha > pts[k - 1].alpha && pts[k].alpha >= pts[k + 1].alpha) {
      peaks.push_back(k);
    }
  }
  if (peaks.size() < 2) {
    return std::nullopt;
  }
  std::partial_sort(peaks.begin(), peaks.begin() + 2, peaks.end(),
                    [&pts](std::size_t a, std::size_t b) { return pts[a].alpha > pts[b].alpha; });
  const std::size_t left = std::min(peaks[0], peaks[1]);
  const std::size_t right = std::max(peaks[0], peaks[1]);

  std::size_t center = left + 1;
  for (std::size_t k = left + 1; k < right; ++k) {
    if (pts[k].alpha < pts[center].alpha) {
      center = k;
    }
  }
  const double floor = pts[center].alpha;
  const double lower_peak = std::min(pts[left].alpha, pts[right].alpha);
  if (!(floor < lower_peak)) {
    return std::nullopt;
  }
  const double level = 0.5 * (floor + lower_peak);

  TransparencyWindow w;
  w.center = pts[center].delta_p;
  w.floor = floor;
  w.peak_alpha = std::max(pts[left].alpha, pts[right].alpha);
  w.left_peak_delta = pts[left].delta_p;
  w.right_peak_delta = pts[right].delta_p;
  w.width = crossing(pts, center, right, level) - crossing(pts, center, left, level);
  return w;
}

} // namespace wavemix
