#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dmalab::cli {

enum ExitCode : int { kOk = 0, kNotCertified = 1, kRegime = 2, kConvergence = 3, kIo = 4 };

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Subcommand bodies. Each returns the exit code and fills `files` with the paths written.
int cmd_verify_barrier(const nlohmann::json& config, const std::string& out_dir, std::vector<std::string>& files);
int cmd_solve(const nlohmann::json& config, const std::string& out_dir, std::vector<std::string>& files);
int cmd_fit_exponent(const nlohmann::json& config, const std::string& out_dir, std::vector<std::string>& files);
int cmd_oracle_radial(const nlohmann::json& config, const std::string& out_dir, std::vector<std::string>& files);
int cmd_certify_domain(const nlohmann::json& config, const std::string& out_dir, std::vector<std::string>& files);

}  // namespace dmalab::cli
