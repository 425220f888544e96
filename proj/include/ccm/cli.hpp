// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccm/config.hpp"

namespace ccm::cli {

/// Relative output paths are resolved under $CCM_OUT_DIR when it is set.
std::filesystem::path resolve_out(const std::filesystem::path& p);

/// Sibling artifact next to `out`: same directory and stem, new suffix.
std::filesystem::path sibling(const std::filesystem::path& out,
                              const std::string& suffix);

void cmd_gen_data(const config::RunConfig& cfg,
                  std::optional<std::uint64_t> seed_override,
                  const std::filesystem::path& out);

void cmd_train_teacher(const config::RunConfig& cfg,
                       std::optional<std::uint64_t> seed_override,
                       const std::filesystem::path& out);

void cmd_distill(const config::RunConfig& cfg,
                 std::optional<std::uint64_t> seed_override,
                 const std::filesystem::path& teacher,
                 const std::filesystem::path& out,
                 const std::filesystem::path& target_out = {});

void cmd_sample(const config::RunConfig& cfg,
                const std::filesystem::path& checkpoint,
                std::optional<std::size_t> n, std::optional<std::size_t> nfe,
                std::optional<std::uint64_t> seed, std::optional<bool> use_ema,
                const std::filesystem::path& out);

void cmd_eval(const config::RunConfig& cfg, const std::filesystem::path& a,
              const std::filesystem::path& b, const std::string& metric,
              const std::filesystem::path& out);

void cmd_profile_kdc(const config::RunConfig& cfg,
                     const std::filesystem::path& teacher,
                     const std::vector<std::filesystem::path>& students,
                     const std::filesystem::path& target, bool vs_step,
                     const std::filesystem::path& out_prefix);

void cmd_ablate(const config::RunConfig& cfg,
                const std::filesystem::path& teacher,
                const std::filesystem::path& out_dir);

/// Exit-code mapping shared by the CLI: 0 ok, 2 config/shape, 3 I/O,
/// 4 numerical divergence.
int run_guarded(const std::function<void()>& fn);

}  // namespace ccm::cli
