// Run configuration: one JSON document per run, strict schema.

#ifndef WAVEMIX_CONFIG_HPP_
#define WAVEMIX_CONFIG_HPP_

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wavemix/core_model.hpp"

namespace wavemix {

/// Malformed document or a schema/invariant violation at `path`.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string path, const std::string &what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string &path() const { return path_; }

private:
  std::string path_;
};

struct PropagateRun {
  // 0 selects a range covering several oscillation periods.
  double z_max = 0.0;
  double step = 0.01;
  std::size_t stride = 0;
  std::size_t max_samples = 100000;

  bool operator==(const PropagateRun &) const = default;
};

struct SpectrumRun {
  double delta_min = -6.0;
  double delta_max = 6.0;
  std::size_t points = 1201;

  bool operator==(const SpectrumRun &) const = default;
};

struct ValidateRun {
  std::complex<double> omega_p = 1e-3;
  std::complex<double> omega_t = 0.0;
  std::complex<double> omega_f = 0.0;
  // Probe amplitudes substituted for omega_p in turn; empty runs omega_p once.
  std::vector<double> ladder;

  bool operator==(const ValidateRun &) const = default;
};

struct SweepRun {
  std::string parameter = "omega_c";
  std::vector<double> values;
  double z_max = 0.0;
  std::size_t samples = 20000;

  bool operator==(const SweepRun &) const = default;
};

using WorkflowBlock = std::variant<PropagateRun, SpectrumRun, ValidateRun, SweepRun>;

enum class OutputFormat { Csv, Json };

struct OutputSpec {
  std::string path;
  OutputFormat format = OutputFormat::Csv;

  bool operator==(const OutputSpec &) const = default;
};

struct RunConfig {
  Params system;
  WorkflowBlock run;
  OutputSpec output;

  bool operator==(const RunConfig &) const = default;
};

std::string_view workflow_name(const WorkflowBlock &block);
std::string_view format_name(OutputFormat format);
OutputFormat parse_format(std::string_view name);

/// Real-valued system fields a sweep may vary.
const std::vector<std::string> &sweepable_parameters();
Params with_parameter(Params p, const std::string &name, double value);

RunConfig parse_config(std::string_view text);
RunConfig parse_config_document(const nlohmann::json &doc);

/// Canonical echo with every default made explicit; parse_config inverts it.
nlohmann::json to_json(const RunConfig &config);
nlohmann::json to_json(const Params &params);

} // namespace wavemix

#endif // WAVEMIX_CONFIG_HPP_
