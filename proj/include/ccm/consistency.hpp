// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/nnet.hpp"

namespace ccm::consistency {

/// Knobs for the KDC metric and the adaptive target loop.
struct ConsistencyConfig {
    double peak = 4.0;        // PSNR dynamic range for 2-D data in [-2,2]
    double t_kdc = 60.0;      // threshold the KDC must exceed to stop extending
    double step = 0.03;       // base teacher timestep size s
    std::size_t max_iters = 0;  // 0 = ceil(1/step) + 1
    double kdc_floor = -900.0;  // value reported when MSE saturates to ~0

    std::size_t resolved_max_iters() const;
    void validate() const;
};

enum class ScheduleKind { Ccm, Iccm, Static, Proportional, GroundTruth, Decaying };

/// Strategy selecting how far the teacher rolls out per training step.
/// Static fixes (l, n, s) with l = n*s; the dynamic ones vary with t, the
/// KDC, or the training iteration.
struct CurriculumSchedule {
    ScheduleKind kind = ScheduleKind::Ccm;
    double t_kdc = 60.0;   // ccm/iccm
    double step = 0.03;    // ccm/iccm base step s
    double l = 0.03;       // static: total distillation step
    int n = 1;             // static: iteration count
    double s = 0.03;       // static: per-iteration step
    double factor = 0.1;   // proportional: l = factor * t
    double l0 = 0.5;       // decaying baseline initial step
    double decay_rate = 5e-4;  // decaying baseline rate

    void validate() const;

    /// Token grammar used in configs: `ccm`, `iccm`, `static(l,n)`,
    /// `static(l,n,s)`, `prop(f)`, `gt`, `decay(l0,rate)`.
    static CurriculumSchedule parse(const std::string& token);
    std::string to_token() const;
};

enum class Termination { KdcAbove, KdcBelow, FixedCount };

/// A resolved per-step plan: either a fixed number of teacher iterations or
/// an adaptive loop gated on the KDC.
struct StepPlan {
    Termination mode = Termination::FixedCount;
    int n = 1;
    double s = 0.03;
};

/// Resolve a schedule at time t (and training iteration, for the decaying
/// baseline). Steps that would leave [0,1] are clamped during execution,
/// never rejected.
StepPlan plan_step(const CurriculumSchedule& sched, double t,
                   std::uint64_t iteration = 0);

/// f(x, t) = x + (1-t) * v(x, t). Satisfies f(x, 1) = x bit-exactly; lets a
/// trained velocity field act as its own one-step extrapolant, which is what
/// makes teacher-weight warm starts exact.
Matrix consistency_map(const nnet::MlpParams& model, const Matrix& x, double t);

/// KDC = 100 - 10 log10(peak^2 / MSE): 100 minus the PSNR between the two
/// batches. Monotone increasing in MSE; returns `floor_value` once
/// MSE < 1e-12 * peak^2 so the metric stays total when the inputs coincide.
double kdc(const Matrix& x_est, const Matrix& x_target, double peak,
           double floor_value);

/// Outcome of a target computation: the target batch, the time u it lives
/// at, and the per-iteration (u, KDC) trace.
struct TargetResult {
    Matrix x_target;
    double u = 0.0;
    std::size_t iters = 0;
    double kdc_final = 0.0;
    std::vector<std::pair<double, double>> kdc_trace;
};

/// Multi-step teacher rollout with per-iteration target refresh.
///
/// x_est = consistency_map(student, x_t, t) is computed once up front. Each
/// iteration advances one clamped step u = min(t_cur + s, 1), solves the
/// teacher ODE over (t_cur, u), maps x_u through the target model, and
/// measures the KDC against x_est. Termination: KdcAbove stops once
/// t_kdc < KDC, KdcBelow stops once KDC <= t_kdc, FixedCount stops after
/// plan.n iterations; reaching u = 1 always stops. Teacher and target-model
/// evaluations carry no gradients.
TargetResult compute_target(const Matrix& x_t, double t, const StepPlan& plan,
                            const ConsistencyConfig& cfg,
                            const nnet::MlpParams& teacher,
                            const nnet::MlpParams& target_model,
                            const nnet::MlpParams& student);

/// Same loop with the student estimate already in hand (the training loop
/// reuses its cached student forward for it).
TargetResult compute_target_given_est(const Matrix& x_t, double t,
                                      const StepPlan& plan,
                                      const ConsistencyConfig& cfg,
                                      const nnet::MlpParams& teacher,
                                      const nnet::MlpParams& target_model,
                                      const Matrix& x_est);

/// The adaptive path: compute_target with Termination::KdcAbove and the
/// config's base step.
TargetResult kdc_adjusted_target(const Matrix& x_t, double t,
                                 const ConsistencyConfig& cfg,
                                 const nnet::MlpParams& teacher,
                                 const nnet::MlpParams& target_model,
                                 const nnet::MlpParams& student);

/// CSV rows `iter,u,kdc`.
void write_trace_csv(std::ostream& os,
                     const std::vector<std::pair<double, double>>& trace);

}  // namespace ccm::consistency
