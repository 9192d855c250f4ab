#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace cuq {

struct CliOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed_override;
  std::filesystem::path out_dir = ".";
  std::vector<Eigen::Index> sizes{30, 100, 500};
};

/// "30,100,500" -> {30, 100, 500}. Throws ConfigError on malformed lists.
std::vector<Eigen::Index> parse_sizes(std::string_view text);

int cmd_run(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_sensitivity_study(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const CliOptions& options, std::ostream& out, std::ostream& err);

/// Entry point shared by the `uq` binary and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cuq
