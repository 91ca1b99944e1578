// wavemix: propagate | spectrum | validate | sweep
//
// Exit codes: 0 success, 1 I/O failure, 2 configuration error,
// 3 numeric failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wavemix/liouville.hpp"
#include "wavemix/propagation.hpp"
#include "wavemix/workflow.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw wavemix::IoError(path, "cannot open config");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Three-wave / four-wave mixing simulator for a cyclic three-level system"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_path;
  std::string format;
  bool quiet = false;

  for (const char *name : {"propagate", "spectrum", "validate", "sweep"}) {
    auto *sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_path, "Output file (overrides output.path)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--quiet", quiet, "Suppress the run summary");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  wavemix::RunConfig config;
  try {
    config = wavemix::parse_config(read_file(config_path));
    if (wavemix::workflow_name(config.run) != command) {
      throw wavemix::ConfigError("", "config holds a `" +
                                         std::string(wavemix::workflow_name(config.run)) +
                                         "` block but the subcommand is `" + command + "`");
    }
    if (!out_path.empty()) {
      config.output.path = out_path;
    }
    if (!format.empty()) {
      config.output.format = wavemix::parse_format(format);
    }
    if (config.output.path.empty()) {
      throw wavemix::ConfigError("output.path", "no output path (set it or pass --out)");
    }
  } catch (const wavemix::IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const wavemix::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto bundle = wavemix::run_workflow(config);
    wavemix::emit(bundle, config.output.format, config.output.path);
    if (!quiet) {
      std::cout << command << ": " << bundle.payload.rows.size() << " rows -> "
                << config.output.path << '\n'
                << bundle.metadata["summary"].dump(2) << '\n';
    }
  } catch (const wavemix::IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const wavemix::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wavemix::InvalidParameterError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wavemix::SingularParameterError &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const wavemix::NumericError &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const wavemix::NoSteadyStateError &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
