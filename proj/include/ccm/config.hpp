// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccm/distill.hpp"
#include "ccm/nnet.hpp"
#include "ccm/rng.hpp"
#include "ccm/synthdata.hpp"

namespace ccm::config {

/// Flat, sectioned key = value document. Grammar:
///   - `[section]` headers, `key = value` lines, `#` starts a comment
///   - surrounding whitespace is trimmed, values run to end of line
///   - unknown sections or keys are rejected with the offending line number
/// Serialization always emits every section and key in a fixed order, so a
/// document round-trips losslessly and diffs stay meaningful.
struct RunConfig {
    // [data]
    synth::DistributionSpec data;
    std::size_t data_n = 10000;        // rows emitted by gen-data
    std::uint64_t data_seed = 0;

    // [net]
    nnet::NetSpec net;

    // [teacher]
    distill::TeacherConfig teacher;

    // [distill]
    distill::DistillConfig distill;

    // [sample]
    std::size_t sample_n = 10000;
    std::size_t sample_nfe = 1;
    std::uint64_t sample_seed = 3;
    bool sample_use_ema = false;

    // [eval]
    std::size_t eval_projections = 256;
    std::size_t eval_n = 10000;
    std::uint64_t eval_seed = 4;
    std::size_t profile_bins = 10;
    std::size_t profile_reps = 8;
    std::size_t profile_batch = 256;
    double profile_l = 0.03;
    double profile_solver_step = 0.03;
    double vs_step_t = 0.3;

    // [ablate]
    std::vector<std::string> ablate_strategies = {"ccm(0.03)", "static(0.03,1)", "gt"};
    std::vector<std::uint64_t> ablate_seeds = {11, 12, 13};
    std::uint64_t ablate_iterations = 0;  // 0 = use distill.iterations

    // [manifest] — written by commands, defaulted in user configs
    double manifest_calibrated_t_kdc = std::nan("");
    bool manifest_warm_start = true;
    std::string manifest_rng = rng::kGeneratorName;
    std::string manifest_teacher;
};

RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Canonical full serialization (includes [manifest]).
std::string serialize(const RunConfig& cfg);

/// Hash of the canonical serialization without the [manifest] section;
/// stored in checkpoints as the creation config hash.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace ccm::config
