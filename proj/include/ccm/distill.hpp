// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ccm/consistency.hpp"
#include "ccm/nnet.hpp"
#include "ccm/synthdata.hpp"

namespace ccm::distill {

enum class Distance { L2, L1 };

struct GanConfig {
    bool enabled = false;
    double lambda = 0.1;
    double disc_lr = 1e-3;
    bool literal_generator_loss = false;  // Eq-style log(1-d) instead of -log d

    void validate() const;
};

struct TeacherConfig {
    std::uint64_t iterations = 20000;
    std::size_t batch = 256;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;
};

struct DistillConfig {
    consistency::CurriculumSchedule schedule;
    Distance distance = Distance::L2;
    std::uint64_t iterations = 10000;
    std::size_t batch = 256;
    std::uint64_t seed = 2;
    double lr = 4e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double target_ema = 0.9;    // mu for the target network
    double student_ema = 0.999; // long-run average kept for evaluation
    GanConfig gan;
    consistency::ConsistencyConfig ccfg;
    // When set, t_kdc is calibrated at distillation start: the median KDC of
    // the freshly warm-started student at t = 0.5 over `calib_batches`
    // batches, plus `t_kdc_offset`. Otherwise ccfg.t_kdc + offset is used.
    bool t_kdc_auto = true;
    double t_kdc_offset = 0.0;
    std::size_t calib_batches = 16;

    void validate() const;
};

/// One row per training iteration. `ms` is wall time and is the only
/// non-reproducible field.
struct RunLogRow {
    std::uint64_t iteration = 0;
    double loss_ccm = 0.0;
    double loss_gan = 0.0;
    double kdc_final = 0.0;
    std::size_t teacher_iters = 0;
    double u = 0.0;
    double t = 0.0;
    double ms = 0.0;
};

struct RunLog {
    std::vector<RunLogRow> rows;

    void write_csv(std::ostream& os) const;
    static constexpr const char* kHeader =
        "iteration,loss_ccm,loss_gan,kdc_final,teacher_iters,u,t,ms";
};

struct TeacherResult {
    nnet::MlpParams params;
    nnet::AdamState opt;
    RunLog log;
    bool diverged = false;
    std::uint64_t completed = 0;
};

/// Flow-matching pretraining: regress v(x_t, t) onto x1 - x0 over
/// independently paired noise/data with per-row t uniform in [0,1).
/// On divergence the last finite parameters are returned.
TeacherResult train_teacher(const synth::DistributionSpec& spec,
                            const nnet::NetSpec& net, const TeacherConfig& cfg);

struct CcmLossResult {
    double loss = 0.0;
    nnet::Gradients grads;
    consistency::TargetResult target;
    Matrix x_t;
    Matrix f_out;               // student consistency output (= x_est)
    nnet::ForwardCache cache;   // student forward cache, reused by the GAN term
};

/// Consistency distillation loss: d(f_student(x_t,t,1), x_target) with the
/// target from the schedule's plan. Gradients flow only through the student;
/// teacher and target model are read-only here.
CcmLossResult ccm_loss(const nnet::MlpParams& student,
                       const nnet::MlpParams& target_model,
                       const nnet::MlpParams& teacher, const Matrix& x0,
                       const Matrix& x1, double t, const DistillConfig& cfg,
                       std::uint64_t iteration);

struct GanLossResult {
    double gen_loss = 0.0;
    double disc_loss = 0.0;
    nnet::Gradients disc_grads;
    Matrix dgen_dfake;  // dGenLoss/dx for the fake batch
};

/// Binary discriminator losses computed in logit space. The generator side
/// defaults to the non-saturating form; `literal` selects log(1 - d).
GanLossResult gan_losses(const nnet::MlpParams& disc, const Matrix& fake,
                         const Matrix& real, bool literal);

struct DistillResult {
    nnet::MlpParams student;
    nnet::MlpParams target_model;
    nnet::MlpParams ema_student;
    std::optional<nnet::MlpParams> disc;
    nnet::AdamState opt;
    RunLog log;
    double calibrated_t_kdc = 0.0;
    bool diverged = false;
    std::uint64_t completed = 0;
};

/// Full distillation loop. The student warm-starts from the teacher weights,
/// so at iteration 0 it equals the teacher's consistency map exactly.
DistillResult distill(const synth::DistributionSpec& spec,
                      const nnet::MlpParams& teacher, const nnet::NetSpec& net,
                      const DistillConfig& cfg);

/// nfe = 1: one consistency map from t = 0. nfe = k: map to 1, re-noise onto
/// the path at t = j/k, map again, for j = 1..k-1.
synth::Batch sample(const nnet::MlpParams& student, std::size_t n,
                    std::size_t nfe, std::uint64_t seed);

}  // namespace ccm::distill
