// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/consistency.hpp"
#include "ccm/distill.hpp"
#include "ccm/nnet.hpp"
#include "ccm/synthdata.hpp"

namespace ccm::eval {

/// Average over random unit directions of the 1-D 2-Wasserstein distance
/// between the projected empirical distributions (sorted-sample matching).
/// Unequal batch sizes are handled by deterministically subsampling the
/// larger batch. Deterministic per seed; parallel over projections.
double sliced_wasserstein(const Matrix& a, const Matrix& b,
                          std::size_t projections, std::uint64_t seed);

/// 2 E||X-Y|| - E||X-X'|| - E||Y-Y'|| over the empirical samples
/// (V-statistic). Zero iff the empirical distributions coincide.
double energy_distance(const Matrix& a, const Matrix& b);

/// Spearman rank correlation (average ranks on ties).
double spearman(std::span<const double> x, std::span<const double> y);

struct KDCProfile {
    std::vector<double> bin_lo, bin_hi, mean, var;
    std::vector<std::size_t> count;
    std::string student_id, target_id, teacher_id, schedule;
    double l = 0.0;

    void write_csv(std::ostream& os) const;  // bin_lo,bin_hi,mean_kdc,var_kdc,count
};

struct ProfileConfig {
    std::size_t bins = 10;
    std::size_t reps = 8;        // KDC evaluations per bin, one batch each
    std::size_t batch = 256;
    double l = 0.03;             // distillation step spanned by the target
    double solver_step = 0.03;   // teacher Euler step inside the rollout
    std::uint64_t seed = 4;
    double peak = 4.0;
    double kdc_floor = -900.0;
};

/// Per-t-bin mean/variance of the KDC between the student map at the bin
/// center and the target model's map after a teacher rollout of length l.
KDCProfile kdc_profile(const nnet::MlpParams& student,
                       const nnet::MlpParams& target_model,
                       const nnet::MlpParams& teacher,
                       const synth::DistributionSpec& spec,
                       const ProfileConfig& cfg);

/// Mean KDC per distillation step length at fixed t. Steps that would pass
/// u = 1 are clamped.
std::vector<std::pair<double, double>> kdc_vs_step(
    const nnet::MlpParams& student, const nnet::MlpParams& target_model,
    const nnet::MlpParams& teacher, const synth::DistributionSpec& spec,
    double t, std::span<const double> l_grid, const ProfileConfig& cfg);

struct AblationRow {
    std::string strategy;
    double l = 0.0;   // nan when not applicable
    int n = 0;        // 0 when not applicable
    double s = 0.0;   // nan when not applicable
    std::uint64_t seed = 0;
    double metric = 0.0;
    double runtime_ms = 0.0;
    std::string error;  // empty on success
};

struct AblationConfig {
    std::vector<std::string> strategies;  // schedule tokens
    std::vector<std::uint64_t> seeds;
    std::size_t eval_n = 10000;
    std::size_t projections = 256;
    std::uint64_t eval_seed = 4;
};

/// distill + sample(nfe=1) + sliced_wasserstein per (strategy, seed).
/// Individual failures land in the row's error field; rows come back sorted
/// by per-strategy median metric.
std::vector<AblationRow> run_ablation(const synth::DistributionSpec& spec,
                                      const nnet::MlpParams& teacher,
                                      const nnet::NetSpec& net,
                                      const distill::DistillConfig& base,
                                      const AblationConfig& cfg);

/// strategy,l,n,s,seed,metric,runtime_ms,error
void write_ablation_csv(std::ostream& os, std::span<const AblationRow> rows);

}  // namespace ccm::eval

namespace ccm::reference {

/// Serial mirrors of the metric kernels, for parity tests and the bench tool.
double sliced_wasserstein(const Matrix& a, const Matrix& b,
                          std::size_t projections, std::uint64_t seed);
double energy_distance(const Matrix& a, const Matrix& b);

}  // namespace ccm::reference
