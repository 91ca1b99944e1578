#include "wavemix/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <type_traits>

namespace wavemix {

using nlohmann::json;

namespace {

std::string join(const std::string &prefix, const std::string &key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json &obj, const std::string &path,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(path, "expected an object");
  }
  for (const auto &item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(join(path, item.key()), "unknown key");
    }
  }
}

double read_real(const json &obj, const std::string &path, const char *key, double fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const auto &v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError(join(path, key), "expected a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ConfigError(join(path, key), "must be finite");
  }
  return x;
}

std::size_t read_count(const json &obj, const std::string &path, const char *key,
                       std::size_t fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const auto &v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(join(path, key), "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

// A complex value is a bare number or {"re": x, "im": y}.
std::complex<double> read_complex(const json &obj, const std::string &path, const char *key,
                                  std::complex<double> fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const auto &v = obj.at(key);
  const std::string here = join(path, key);
  if (v.is_number()) {
    return {read_real(obj, path, key, 0.0), 0.0};
  }
  if (v.is_object()) {
    reject_unknown(v, here, {"re", "im"});
    return {read_real(v, here, "re", 0.0), read_real(v, here, "im", 0.0)};
  }
  throw ConfigError(here, "expected a number or {\"re\", \"im\"} object");
}

json complex_to_json(std::complex<double> z) {
  if (z.imag() == 0.0) {
    return z.real();
  }
  return json{{"re", z.real()}, {"im", z.imag()}};
}

void require(bool ok, const std::string &path, const char *what) {
  if (!ok) {
    throw ConfigError(path, what);
  }
}

Params parse_system(const json &doc) {
  const std::string path = "system";
  Params p;
  if (!doc.contains(path)) {
    return p;
  }
  const auto &s = doc.at(path);
  reject_unknown(s, path,
                 {"gamma12", "gamma13", "gamma23", "gamma_phi2", "gamma_phi3", "omega_c",
                  "omega_d", "delta_p", "kappa12", "kappa13", "mu_ratio", "freq_ratio",
                  "probe_rabi0"});
  p.gamma12 = read_real(s, path, "gamma12", p.gamma12);
  p.gamma13 = read_real(s, path, "gamma13", p.gamma13);
  p.gamma23 = read_real(s, path, "gamma23", p.gamma23);
  p.gamma_phi2 = read_real(s, path, "gamma_phi2", p.gamma_phi2);
  p.gamma_phi3 = read_real(s, path, "gamma_phi3", p.gamma_phi3);
  p.omega_c = read_complex(s, path, "omega_c", p.omega_c);
  p.omega_d = read_complex(s, path, "omega_d", p.omega_d);
  p.delta_p = read_real(s, path, "delta_p", p.delta_p);
  p.kappa12 = read_real(s, path, "kappa12", p.kappa12);
  p.kappa13 = read_real(s, path, "kappa13", p.kappa13);
  p.mu_ratio = read_real(s, path, "mu_ratio", p.mu_ratio);
  p.freq_ratio = read_real(s, path, "freq_ratio", p.freq_ratio);
  p.probe_rabi0 = read_complex(s, path, "probe_rabi0", p.probe_rabi0);
  try {
    validate(p);
  } catch (const InvalidParameterError &e) {
    throw ConfigError(join(path, e.field()), e.reason());
  }
  return p;
}

PropagateRun parse_propagate(const json &b) {
  const std::string path = "propagate";
  reject_unknown(b, path, {"z_max", "step", "stride", "max_samples"});
  PropagateRun r;
  r.z_max = read_real(b, path, "z_max", r.z_max);
  r.step = read_real(b, path, "step", r.step);
  r.stride = read_count(b, path, "stride", r.stride);
  r.max_samples = read_count(b, path, "max_samples", r.max_samples);
  require(r.z_max >= 0.0, path + ".z_max", "must be non-negative (0 selects the default range)");
  require(r.step > 0.0, path + ".step", "must be positive");
  require(r.max_samples >= 2, path + ".max_samples", "must be at least 2");
  return r;
}

SpectrumRun parse_spectrum(const json &b) {
  const std::string path = "spectrum";
  reject_unknown(b, path, {"delta_min", "delta_max", "points"});
  SpectrumRun r;
  r.delta_min = read_real(b, path, "delta_min", r.delta_min);
  r.delta_max = read_real(b, path, "delta_max", r.delta_max);
  r.points = read_count(b, path, "points", r.points);
  require(r.points >= 1, path + ".points", "must be at least 1");
  require(r.points == 1 || r.delta_max > r.delta_min, path + ".delta_max",
          "must exceed delta_min");
  return r;
}

ValidateRun parse_validate(const json &b) {
  const std::string path = "validate";
  reject_unknown(b, path, {"omega_p", "omega_t", "omega_f", "ladder"});
  ValidateRun r;
  r.omega_p = read_complex(b, path, "omega_p", r.omega_p);
  r.omega_t = read_complex(b, path, "omega_t", r.omega_t);
  r.omega_f = read_complex(b, path, "omega_f", r.omega_f);
  if (b.contains("ladder")) {
    const auto &l = b.at("ladder");
    require(l.is_array(), path + ".ladder", "expected an array of numbers");
    for (std::size_t k = 0; k < l.size(); ++k) {
      const std::string here = path + ".ladder[" + std::to_string(k) + "]";
      require(l[k].is_number(), here, "expected a number");
      const double x = l[k].get<double>();
      require(std::isfinite(x), here, "must be finite");
      r.ladder.push_back(x);
    }
  }
  return r;
}

SweepRun parse_sweep(const json &b) {
  const std::string path = "sweep";
  reject_unknown(b, path, {"parameter", "values", "start", "stop", "count", "z_max", "samples"});
  SweepRun r;
  if (b.contains("parameter")) {
    require(b.at("parameter").is_string(), path + ".parameter", "expected a string");
    r.parameter = b.at("parameter").get<std::string>();
  }
  const auto &names = sweepable_parameters();
  require(std::find(names.begin(), names.end(), r.parameter) != names.end(),
          path + ".parameter", "not a sweepable system parameter");

  const bool has_values = b.contains("values");
  const bool has_range = b.contains("start") || b.contains("stop") || b.contains("count");
  require(has_values != has_range, path, "give either `values` or `start`/`stop`/`count`");
  if (has_values) {
    const auto &v = b.at("values");
    require(v.is_array() && !v.empty(), path + ".values", "expected a nonempty array");
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string here = path + ".values[" + std::to_string(k) + "]";
      require(v[k].is_number(), here, "expected a number");
      r.values.push_back(v[k].get<double>());
    }
  } else {
    for (const char *key : {"start", "stop", "count"}) {
      require(b.contains(key), join(path, key), "required with a range sweep");
    }
    const double start = read_real(b, path, "start", 0.0);
    const double stop = read_real(b, path, "stop", 0.0);
    const std::size_t count = read_count(b, path, "count", 0);
    require(count >= 1, path + ".count", "must be at least 1");
    for (std::size_t k = 0; k < count; ++k) {
      r.values.push_back(count == 1 ? start
                                    : start + (stop - start) * static_cast<double>(k) /
                                                  static_cast<double>(count - 1));
    }
  }
  r.z_max = read_real(b, path, "z_max", r.z_max);
  r.samples = read_count(b, path, "samples", r.samples);
  require(r.z_max >= 0.0, path + ".z_max", "must be non-negative (0 selects the default range)");
  require(r.samples >= 2, path + ".samples", "must be at least 2");
  return r;
}

OutputSpec parse_output(const json &doc) {
  OutputSpec out;
  if (!doc.contains("output")) {
    return out;
  }
  const auto &o = doc.at("output");
  reject_unknown(o, "output", {"path", "format"});
  if (o.contains("path")) {
    require(o.at("path").is_string(), "output.path", "expected a string");
    out.path = o.at("path").get<std::string>();
  }
  if (o.contains("format")) {
    require(o.at("format").is_string(), "output.format", "expected \"csv\" or \"json\"");
    try {
      out.format = parse_format(o.at("format").get<std::string>());
    } catch (const ConfigError &) {
      throw ConfigError("output.format", "expected \"csv\" or \"json\"");
    }
  }
  return out;
}

} // namespace

std::string_view workflow_name(const WorkflowBlock &block) {
  switch (block.index()) {
  case 0:
    return "propagate";
  case 1:
    return "spectrum";
  case 2:
    return "validate";
  default:
    return "sweep";
  }
}

std::string_view format_name(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "json";
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") {
    return OutputFormat::Csv;
  }
  if (name == "json") {
    return OutputFormat::Json;
  }
  throw ConfigError("format", "expected \"csv\" or \"json\"");
}

const std::vector<std::string> &sweepable_parameters() {
  static const std::vector<std::string> names = {
      "gamma12", "gamma13", "gamma23",  "gamma_phi2", "gamma_phi3", "omega_c",    "omega_d",
      "delta_p", "kappa12", "kappa13", "mu_ratio",   "freq_ratio", "probe_rabi0"};
  return names;
}

Params with_parameter(Params p, const std::string &name, double value) {
  if (name == "gamma12") p.gamma12 = value;
  else if (name == "gamma13") p.gamma13 = value;
  else if (name == "gamma23") p.gamma23 = value;
  else if (name == "gamma_phi2") p.gamma_phi2 = value;
  else if (name == "gamma_phi3") p.gamma_phi3 = value;
  else if (name == "omega_c") p.omega_c = value;
  else if (name == "omega_d") p.omega_d = value;
  else if (name == "delta_p") p.delta_p = value;
  else if (name == "kappa12") p.kappa12 = value;
  else if (name == "kappa13") p.kappa13 = value;
  else if (name == "mu_ratio") p.mu_ratio = value;
  else if (name == "freq_ratio") p.freq_ratio = value;
  else if (name == "probe_rabi0") p.probe_rabi0 = value;
  else throw ConfigError("sweep.parameter", "not a sweepable system parameter: " + name);
  return p;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config_document(doc);
}

RunConfig parse_config_document(const json &doc) {
  reject_unknown(doc, "", {"system", "propagate", "spectrum", "validate", "sweep", "output"});
  int blocks = 0;
  for (const char *key : {"propagate", "spectrum", "validate", "sweep"}) {
    blocks += doc.contains(key) ? 1 : 0;
  }
  if (blocks != 1) {
    throw ConfigError("", "exactly one of propagate, spectrum, validate, sweep is required");
  }

  RunConfig config;
  config.system = parse_system(doc);
  if (doc.contains("propagate")) {
    config.run = parse_propagate(doc.at("propagate"));
  } else if (doc.contains("spectrum")) {
    config.run = parse_spectrum(doc.at("spectrum"));
  } else if (doc.contains("validate")) {
    config.run = parse_validate(doc.at("validate"));
  } else {
    config.run = parse_sweep(doc.at("sweep"));
  }
  config.output = parse_output(doc);
  return config;
}

json to_json(const Params &p) {
  return json{{"gamma12", p.gamma12},
              {"gamma13", p.gamma13},
              {"gamma23", p.gamma23},
              {"gamma_phi2", p.gamma_phi2},
              {"gamma_phi3", p.gamma_phi3},
              {"omega_c", complex_to_json(p.omega_c)},
              {"omega_d", complex_to_json(p.omega_d)},
              {"delta_p", p.delta_p},
              {"kappa12", p.kappa12},
              {"kappa13", p.kappa13},
              {"mu_ratio", p.mu_ratio},
              {"freq_ratio", p.freq_ratio},
              {"probe_rabi0", complex_to_json(p.probe_rabi0)}};
}

json to_json(const RunConfig &config) {
  json doc;
  doc["system"] = to_json(config.system);
  const std::string name(workflow_name(config.run));
  std::visit(
      [&](const auto &run) {
        using T = std::decay_t<decltype(run)>;
        json block;
        if constexpr (std::is_same_v<T, PropagateRun>) {
          block = {{"z_max", run.z_max},
                   {"step", run.step},
                   {"stride", run.stride},
                   {"max_samples", run.max_samples}};
        } else if constexpr (std::is_same_v<T, SpectrumRun>) {
          block = {{"delta_min", run.delta_min},
                   {"delta_max", run.delta_max},
                   {"points", run.points}};
        } else if constexpr (std::is_same_v<T, ValidateRun>) {
          block = {{"omega_p", complex_to_json(run.omega_p)},
                   {"omega_t", complex_to_json(run.omega_t)},
                   {"omega_f", complex_to_json(run.omega_f)},
                   {"ladder", run.ladder}};
        } else {
          block = {{"parameter", run.parameter},
                   {"values", run.values},
                   {"z_max", run.z_max},
                   {"samples", run.samples}};
        }
        doc[name] = std::move(block);
      },
      config.run);
  doc["output"] = {{"path", config.output.path},
                   {"format", std::string(format_name(config.output.format))}};
  return doc;
}

} // namespace wavemix
