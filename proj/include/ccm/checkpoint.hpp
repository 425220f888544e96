// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ccm/nnet.hpp"

namespace ccm::io {

/// Binary checkpoint, little-endian throughout:
///
///   magic "CCM1"
///   u32 version (currently 1)
///   u32 activation id (0 tanh, 1 silu)
///   u32 embedding width
///   u32 layer count, then per layer { u32 in, u32 out }
///   u8 has_optimizer, u8 has_ema
///   u64 seed, u64 iterations, u64 config hash
///   u64 FNV-1a of every preceding byte          <- end of header
///   f32 parameters: per layer, weights row-major (out x in), then biases
///   [optimizer] u64 step; f64 lr, beta1, beta2, eps; f32 m; f32 v
///   [ema]       f32 parameters, same layout
///   u64 FNV-1a of every byte after the header hash
///
/// Loading verifies magic, version, both hashes, the topology-implied
/// payload length, and finiteness. Any single corrupted header byte fails
/// one of these checks.
struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint64_t iterations = 0;
    std::uint64_t config_hash = 0;
};

struct Checkpoint {
    nnet::MlpParams params;
    std::optional<nnet::AdamState> opt;
    std::optional<nnet::MlpParams> ema;
    CheckpointMeta meta;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ccm::io
