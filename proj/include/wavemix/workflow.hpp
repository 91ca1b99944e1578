// Workflow dispatch and result emission for the command-line tool.

#ifndef WAVEMIX_WORKFLOW_HPP_
#define WAVEMIX_WORKFLOW_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wavemix/config.hpp"

namespace wavemix {

inline constexpr const char *kUnitStatement =
    "rates in units of gamma13, distance in units of 1/kappa12";

/// An empty cell is written as an empty CSV field and as JSON null.
using Cell = std::variant<std::monostate, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ResultBundle {
  // Config echo, tool version, timestamp, units and workflow summary.
  nlohmann::json metadata;
  Table payload;
};

/// Dispatches on the workflow block. The payload is a pure function of the
/// config; only metadata["timestamp"] varies between runs.
ResultBundle run_workflow(const RunConfig &config);

Table propagate_table(const Params &params, const PropagateRun &run, nlohmann::json &summary);
Table spectrum_table(const Params &params, const SpectrumRun &run, nlohmann::json &summary);
Table validate_table(const Params &params, const ValidateRun &run, nlohmann::json &summary);
Table sweep_table(const Params &params, const SweepRun &run, nlohmann::json &summary);

class IoError : public std::runtime_error {
public:
  IoError(std::filesystem::path path, const std::string &what)
      : std::runtime_error(path.string() + ": " + what), path_(std::move(path)) {}

  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
};

/// 17 significant digits, `.` as decimal separator regardless of locale.
std::string format_real(double value);

std::string to_csv(const Table &table);
nlohmann::json to_json(const Table &table);

std::filesystem::path sidecar_path(const std::filesystem::path &out);

/// Writes the payload to `out` and the metadata to `<out>.meta.json`.
void emit(const ResultBundle &bundle, OutputFormat format, const std::filesystem::path &out);

} // namespace wavemix

#endif // WAVEMIX_WORKFLOW_HPP_
