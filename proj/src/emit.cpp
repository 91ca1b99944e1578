#include "wavemix/workflow.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

namespace wavemix {

std::string format_real(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const Cell &cell) {
  if (std::holds_alternative<double>(cell)) {
    return format_real(std::get<double>(cell));
  }
  if (std::holds_alternative<std::string>(cell)) {
    const auto &s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) {
      return s;
    }
    std::string quoted = "\"";
    for (char ch : s) {
      if (ch == '"') {
        quoted += '"';
      }
      quoted += ch;
    }
    return quoted + "\"";
  }
  return {};
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(path, "cannot open for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw IoError(path, "write failed");
  }
}

} // namespace

std::string to_csv(const Table &table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out += (c ? "," : "") + table.columns[c];
  }
  out += '\n';
  for (const auto &row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) {
        out += ',';
      }
      out += csv_field(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Table &table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto &cell : row) {
      if (std::holds_alternative<double>(cell)) {
        r.push_back(std::get<double>(cell));
      } else if (std::holds_alternative<std::string>(cell)) {
        r.push_back(std::get<std::string>(cell));
      } else {
        r.push_back(nullptr);
      }
    }
    rows.push_back(std::move(r));
  }
  return {{"columns", table.columns}, {"rows", std::move(rows)}};
}

std::filesystem::path sidecar_path(const std::filesystem::path &out) {
  return std::filesystem::path(out.string() + ".meta.json");
}

void emit(const ResultBundle &bundle, OutputFormat format, const std::filesystem::path &out) {
  if (out.empty()) {
    throw IoError(out, "no output path given");
  }
  const std::string payload =
      format == OutputFormat::Csv ? to_csv(bundle.payload) : to_json(bundle.payload).dump(2) + "\n";
  write_file(out, payload);
  write_file(sidecar_path(out), bundle.metadata.dump(2) + "\n");
}

} // namespace wavemix
