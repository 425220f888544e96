// SPDX-License-Identifier: Apache-2.0
#include "ccm/distill.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "ccm/flowmatch.hpp"

namespace ccm::distill {

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> uniform_times(std::uint64_t seed, std::uint32_t block,
                                  std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t r = 0; r < n; ++r)
        t[r] = rng::uniform(seed, rng::Stream::Time, block,
                            static_cast<std::uint32_t>(r));
    return t;
}

}  // namespace

void GanConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("gan: lambda must be >= 0");
    if (!(disc_lr > 0.0)) throw ConfigError("gan: disc_lr must be positive");
}

void DistillConfig::validate() const {
    schedule.validate();
    ccfg.validate();
    gan.validate();
    if (target_ema < 0.0 || target_ema > 1.0)
        throw ConfigError("distill: target_ema must be in [0,1]");
    if (student_ema < 0.0 || student_ema > 1.0)
        throw ConfigError("distill: student_ema must be in [0,1]");
    if (batch < 1) throw ConfigError("distill: batch must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("distill: lr must be positive");
    if (calib_batches < 1) throw ConfigError("distill: calib_batches must be >= 1");
}

void RunLog::write_csv(std::ostream& os) const {
    os << kHeader << '\n';
    for (const auto& r : rows) {
        os << r.iteration << ',' << format_double(r.loss_ccm) << ','
           << format_double(r.loss_gan) << ',' << format_double(r.kdc_final)
           << ',' << r.teacher_iters << ',' << format_double(r.u) << ','
           << format_double(r.t) << ',' << format_double(r.ms) << '\n';
    }
}

TeacherResult train_teacher(const synth::DistributionSpec& spec,
                            const nnet::NetSpec& net, const TeacherConfig& cfg) {
    spec.validate();
    if (cfg.batch < 1) throw ConfigError("teacher: batch must be >= 1");
    if (!(cfg.lr > 0.0)) throw ConfigError("teacher: lr must be positive");
    TeacherResult res;
    res.params = nnet::make_mlp(2, 2, net, cfg.seed, rng::Stream::Init);
    res.opt = nnet::make_adam(res.params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    const double nan = std::nan("");
    for (std::uint64_t iter = 0; iter < cfg.iterations; ++iter) {
        const double tic = now_ms();
        const auto block = static_cast<std::uint32_t>(iter);
        const synth::Batch x1 = synth::sample_data(spec, cfg.batch, cfg.seed, block);
        const synth::Batch x0 =
            synth::sample_noise(cfg.batch, 2, cfg.seed, block, rng::Stream::Noise);
        const std::vector<double> t = uniform_times(cfg.seed, block, cfg.batch);
        flow::CfmLossResult loss;
        try {
            loss = flow::cfm_loss(res.params, x0.data, x1.data, t);
        } catch (const TrainingError&) {
            res.diverged = true;
            break;
        }
        if (!std::isfinite(loss.loss) || !loss.grads.all_finite()) {
            res.diverged = true;
            break;
        }
        nnet::opt_step(res.opt, res.params, loss.grads);
        res.completed = iter + 1;
        res.log.rows.push_back(RunLogRow{iter, loss.loss, 0.0, nan, 0, nan, nan,
                                         now_ms() - tic});
    }
    return res;
}

CcmLossResult ccm_loss(const nnet::MlpParams& student,
                       const nnet::MlpParams& target_model,
                       const nnet::MlpParams& teacher, const Matrix& x0,
                       const Matrix& x1, double t, const DistillConfig& cfg,
                       std::uint64_t iteration) {
    if (t < 0.0 || t >= 1.0) throw ConfigError("ccm_loss: t must be in [0,1)");
    CcmLossResult res;
    res.x_t = flow::ot_path(x0, x1, t);

    // Student consistency output with retained activations.
    const double tv[1] = {t};
    const Matrix v =
        nnet::forward_cached(student, res.x_t, std::span<const double>(tv, 1),
                             res.cache);
    if (!v.all_finite()) throw TrainingError("ccm_loss: non-finite student output");
    res.f_out = Matrix(res.x_t.rows, res.x_t.cols);
    const double h = 1.0 - t;
    for (std::size_t i = 0; i < res.f_out.v.size(); ++i)
        res.f_out.v[i] = res.x_t.v[i] + h * v.v[i];

    const consistency::StepPlan plan =
        consistency::plan_step(cfg.schedule, t, iteration);
    res.target = consistency::compute_target_given_est(
        res.x_t, t, plan, cfg.ccfg, teacher, target_model, res.f_out);

    const double inv = 1.0 / static_cast<double>(res.f_out.v.size());
    Matrix upstream(res.f_out.rows, res.f_out.cols);
    double loss = 0.0;
    if (cfg.distance == Distance::L2) {
        for (std::size_t i = 0; i < res.f_out.v.size(); ++i) {
            const double d = res.f_out.v[i] - res.target.x_target.v[i];
            loss += d * d;
            upstream.v[i] = 2.0 * d * inv * h;  // chain through f = x + (1-t) v
        }
    } else {
        for (std::size_t i = 0; i < res.f_out.v.size(); ++i) {
            const double d = res.f_out.v[i] - res.target.x_target.v[i];
            loss += std::abs(d);
            upstream.v[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv * h;
        }
    }
    res.loss = loss * inv;
    res.grads = nnet::zero_gradients(student);
    nnet::backward(student, res.cache, upstream, res.grads);
    return res;
}

GanLossResult gan_losses(const nnet::MlpParams& disc, const Matrix& fake,
                         const Matrix& real, bool literal) {
    if (disc.out_dim() != 1)
        throw StructuralError("gan_losses: discriminator must have a scalar head");
    if (fake.cols != real.cols)
        throw StructuralError("gan_losses: batch dim mismatch");
    // The discriminator sees final samples; its time input is pinned to 1.
    nnet::ForwardCache cache_r, cache_f;
    const double one[1] = {1.0};
    const Matrix z_r =
        nnet::forward_cached(disc, real, std::span<const double>(one, 1), cache_r);
    const Matrix z_f =
        nnet::forward_cached(disc, fake, std::span<const double>(one, 1), cache_f);

    GanLossResult res;
    const double inv_r = 1.0 / static_cast<double>(z_r.rows);
    const double inv_f = 1.0 / static_cast<double>(z_f.rows);
    Matrix up_r(z_r.rows, 1), up_f(z_f.rows, 1), up_gen(z_f.rows, 1);
    for (std::size_t i = 0; i < z_r.rows; ++i) {
        res.disc_loss += softplus(-z_r.v[i]) * inv_r;  // -log d(x1)
        up_r.v[i] = -(1.0 - sigmoid(z_r.v[i])) * inv_r;
    }
    for (std::size_t i = 0; i < z_f.rows; ++i) {
        res.disc_loss += softplus(z_f.v[i]) * inv_f;  // -log(1 - d(x_est))
        up_f.v[i] = sigmoid(z_f.v[i]) * inv_f;
        if (literal) {
            res.gen_loss += -softplus(z_f.v[i]) * inv_f;  // log(1 - d)
            up_gen.v[i] = -sigmoid(z_f.v[i]) * inv_f;
        } else {
            res.gen_loss += softplus(-z_f.v[i]) * inv_f;  // -log d
            up_gen.v[i] = -(1.0 - sigmoid(z_f.v[i])) * inv_f;
        }
    }

    res.disc_grads = nnet::zero_gradients(disc);
    nnet::Gradients fake_grads = nnet::zero_gradients(disc);
    nnet::backward(disc, cache_r, up_r, res.disc_grads);
    nnet::backward(disc, cache_f, up_f, fake_grads);
    res.disc_grads.add_scaled(fake_grads, 1.0);

    nnet::Gradients scratch = nnet::zero_gradients(disc);
    res.dgen_dfake = nnet::backward(disc, cache_f, up_gen, scratch);
    return res;
}

DistillResult distill(const synth::DistributionSpec& spec,
                      const nnet::MlpParams& teacher, const nnet::NetSpec& net,
                      const DistillConfig& cfg_in) {
    spec.validate();
    teacher.validate();
    DistillConfig cfg = cfg_in;
    cfg.validate();

    DistillResult res;
    res.student = teacher;  // warm start
    res.target_model = res.student;
    res.ema_student = res.student;
    res.opt = nnet::make_adam(res.student, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

    nnet::MlpParams disc;
    nnet::AdamState disc_opt;
    if (cfg.gan.enabled) {
        disc = nnet::make_mlp(2, 1, net, cfg.seed, rng::Stream::DiscInit);
        disc_opt = nnet::make_adam(disc, cfg.gan.disc_lr, cfg.beta1, cfg.beta2,
                                   cfg.eps);
    }

    // Threshold calibration: median one-step KDC at t = 0.5 on the freshly
    // warm-started student. Uses dedicated streams so it never shifts the
    // training draws.
    const bool adaptive = cfg.schedule.kind == consistency::ScheduleKind::Ccm ||
                          cfg.schedule.kind == consistency::ScheduleKind::Iccm;
    if (adaptive) cfg.ccfg.step = cfg.schedule.step;
    double resolved = cfg.ccfg.t_kdc;
    if (cfg.t_kdc_auto && adaptive) {
        const flow::Field teacher_field = flow::field_of(teacher);
        std::vector<double> vals(cfg.calib_batches);
        for (std::size_t j = 0; j < cfg.calib_batches; ++j) {
            const auto block = static_cast<std::uint32_t>(j);
            const synth::Batch x1 = synth::sample_data(spec, cfg.batch, cfg.seed,
                                                       block, rng::Stream::CalibData);
            const synth::Batch x0 = synth::sample_noise(cfg.batch, 2, cfg.seed,
                                                        block, rng::Stream::CalibNoise);
            const Matrix x_t = flow::ot_path(x0.data, x1.data, 0.5);
            const Matrix x_est = consistency::consistency_map(res.student, x_t, 0.5);
            const double u = std::min(0.5 + cfg.ccfg.step, 1.0);
            const Matrix x_u =
                flow::euler_solve(teacher_field, x_t, 0.5, u, cfg.ccfg.step);
            const Matrix x_tgt = consistency::consistency_map(res.target_model, x_u, u);
            vals[j] = consistency::kdc(x_est, x_tgt, cfg.ccfg.peak, cfg.ccfg.kdc_floor);
        }
        std::sort(vals.begin(), vals.end());
        resolved = vals[vals.size() / 2];
    }
    resolved += cfg.t_kdc_offset;
    cfg.ccfg.t_kdc = resolved;
    cfg.schedule.t_kdc = resolved;
    res.calibrated_t_kdc = resolved;

    for (std::uint64_t iter = 0; iter < cfg.iterations; ++iter) {
        const double tic = now_ms();
        const auto block = static_cast<std::uint32_t>(iter);
        const double t = rng::uniform(cfg.seed, rng::Stream::Time, block, 0) * 0.999;
        const synth::Batch x1 = synth::sample_data(spec, cfg.batch, cfg.seed, block);
        const synth::Batch x0 =
            synth::sample_noise(cfg.batch, 2, cfg.seed, block, rng::Stream::Noise);

        CcmLossResult loss;
        try {
            loss = ccm_loss(res.student, res.target_model, teacher, x0.data,
                            x1.data, t, cfg, iter);
        } catch (const TrainingError&) {
            res.diverged = true;
            break;
        } catch (const SolverError&) {
            res.diverged = true;
            break;
        }
        if (!std::isfinite(loss.loss) || !loss.grads.all_finite()) {
            res.diverged = true;
            break;
        }

        double gan_loss = 0.0;
        if (cfg.gan.enabled) {
            // Both sides are evaluated against the same discriminator
            // snapshot, then the discriminator steps.
            GanLossResult g = gan_losses(disc, loss.f_out, x1.data,
                                         cfg.gan.literal_generator_loss);
            gan_loss = g.gen_loss;
            nnet::opt_step(disc_opt, disc, g.disc_grads);
            if (cfg.gan.lambda > 0.0) {
                // d(gen)/d(theta_student) through x_est = x_t + (1-t) v.
                Matrix up(g.dgen_dfake.rows, g.dgen_dfake.cols);
                const double h = 1.0 - t;
                for (std::size_t i = 0; i < up.v.size(); ++i)
                    up.v[i] = h * g.dgen_dfake.v[i];
                nnet::Gradients gen_grads = nnet::zero_gradients(res.student);
                nnet::backward(res.student, loss.cache, up, gen_grads);
                if (!gen_grads.all_finite()) {
                    res.diverged = true;
                    break;
                }
                loss.grads.add_scaled(gen_grads, cfg.gan.lambda);
            }
        }

        nnet::opt_step(res.opt, res.student, loss.grads);
        nnet::ema_update(res.target_model, res.student, cfg.target_ema);
        nnet::ema_update(res.ema_student, res.student, cfg.student_ema);
        res.completed = iter + 1;
        res.log.rows.push_back(RunLogRow{iter, loss.loss, gan_loss,
                                         loss.target.kdc_final, loss.target.iters,
                                         loss.target.u, t, now_ms() - tic});
    }
    if (cfg.gan.enabled) res.disc = std::move(disc);
    return res;
}

synth::Batch sample(const nnet::MlpParams& student, std::size_t n,
                    std::size_t nfe, std::uint64_t seed) {
    if (nfe < 1) throw ConfigError("sample: nfe must be >= 1");
    student.validate();
    const std::size_t d = student.data_dim();
    synth::Batch noise =
        synth::sample_noise(n, d, seed, 0, rng::Stream::SampleNoise);
    Matrix x = consistency::consistency_map(student, noise.data, 0.0);
    for (std::size_t k = 1; k < nfe; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(nfe);
        const synth::Batch z = synth::sample_noise(
            n, d, seed, static_cast<std::uint32_t>(k), rng::Stream::Renoise);
        const Matrix x_t = flow::ot_path(z.data, x, t);
        x = consistency::consistency_map(student, x_t, t);
    }
    synth::Batch out;
    out.data = std::move(x);
    out.seed = seed;
    out.source = synth::Source::Generated;
    return out;
}

}  // namespace ccm::distill
