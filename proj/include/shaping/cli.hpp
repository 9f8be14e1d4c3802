#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shaping::cli {

// Exit codes: 0 success, 2 invalid configuration or arguments, 1 runtime
// failure. Commands are also callable directly from tests.

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed,
              bool uncorrected_loss = false);

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& snr_grid, const std::string& out_dir, std::int64_t mc_samples,
             std::optional<std::uint64_t> seed);

int cmd_baseline(const std::string& scheme, int order, const std::string& snr_grid,
                 const std::string& out_dir, std::int64_t mc_samples,
                 std::optional<std::uint64_t> seed, const std::string& channel = "awgn");

int cmd_compare(const std::vector<std::string>& curve_files, const std::string& out_dir);

int cmd_export_constellation(const std::string& config_path, const std::string& checkpoint_path,
                             const std::string& scheme, int order, const std::string& snr_list,
                             const std::string& out_dir);

int cmd_check();

int run(int argc, const char* const* argv);

}  // namespace shaping::cli
