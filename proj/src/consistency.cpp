// SPDX-License-Identifier: Apache-2.0
#include "ccm/consistency.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "ccm/flowmatch.hpp"

namespace ccm::consistency {

std::size_t ConsistencyConfig::resolved_max_iters() const {
    if (max_iters > 0) return max_iters;
    return static_cast<std::size_t>(std::ceil(1.0 / step)) + 1;
}

void ConsistencyConfig::validate() const {
    if (!(peak > 0.0)) throw ConfigError("consistency: peak must be positive");
    if (!(step > 0.0) || step > 1.0)
        throw ConfigError("consistency: step must be in (0,1]");
    if (resolved_max_iters() < static_cast<std::size_t>(std::ceil(1.0 / step)))
        throw ConfigError("consistency: max_iters below ceil(1/step)");
}

void CurriculumSchedule::validate() const {
    auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
    switch (kind) {
        case ScheduleKind::Ccm:
        case ScheduleKind::Iccm:
            if (!in_unit(step)) throw ConfigError("schedule: step must be in (0,1]");
            break;
        case ScheduleKind::Static:
            if (!in_unit(l) || !in_unit(s) || n < 1)
                throw ConfigError("schedule: static needs l,s in (0,1] and n >= 1");
            if (std::abs(l - n * s) > 1e-12)
                throw ConfigError("schedule: static requires l = n*s");
            break;
        case ScheduleKind::Proportional:
            if (!(factor > 0.0)) throw ConfigError("schedule: factor must be positive");
            break;
        case ScheduleKind::GroundTruth:
            break;
        case ScheduleKind::Decaying:
            if (!in_unit(l0) || decay_rate < 0.0)
                throw ConfigError("schedule: decay needs l0 in (0,1], rate >= 0");
            break;
    }
}

namespace {

std::vector<double> parse_args(const std::string& token, std::size_t open) {
    if (token.back() != ')')
        throw ConfigError("schedule token missing ')': '" + token + "'");
    std::vector<double> args;
    std::stringstream ss(token.substr(open + 1, token.size() - open - 2));
    std::string cell;
    while (std::getline(ss, cell, ',')) args.push_back(parse_double(cell));
    return args;
}

}  // namespace

CurriculumSchedule CurriculumSchedule::parse(const std::string& token) {
    CurriculumSchedule sc;
    const auto open = token.find('(');
    const std::string name = token.substr(0, open);
    if (name == "ccm" || name == "iccm") {
        sc.kind = name == "ccm" ? ScheduleKind::Ccm : ScheduleKind::Iccm;
        if (open != std::string::npos) {
            const auto args = parse_args(token, open);
            if (args.size() != 1) throw ConfigError("schedule: " + name + " takes (s)");
            sc.step = args[0];
        }
    } else if (name == "static") {
        sc.kind = ScheduleKind::Static;
        if (open == std::string::npos)
            throw ConfigError("schedule: static needs (l,n) or (l,n,s)");
        const auto args = parse_args(token, open);
        if (args.size() == 2) {
            sc.l = args[0];
            sc.n = static_cast<int>(args[1]);
            sc.s = sc.n > 0 ? sc.l / sc.n : 0.0;
        } else if (args.size() == 3) {
            sc.l = args[0];
            sc.n = static_cast<int>(args[1]);
            sc.s = args[2];
        } else {
            throw ConfigError("schedule: static needs (l,n) or (l,n,s)");
        }
    } else if (name == "prop") {
        sc.kind = ScheduleKind::Proportional;
        if (open == std::string::npos) throw ConfigError("schedule: prop needs (factor)");
        const auto args = parse_args(token, open);
        if (args.size() != 1) throw ConfigError("schedule: prop needs (factor)");
        sc.factor = args[0];
    } else if (name == "gt") {
        sc.kind = ScheduleKind::GroundTruth;
    } else if (name == "decay") {
        sc.kind = ScheduleKind::Decaying;
        if (open == std::string::npos)
            throw ConfigError("schedule: decay needs (l0,rate)");
        const auto args = parse_args(token, open);
        if (args.size() != 2) throw ConfigError("schedule: decay needs (l0,rate)");
        sc.l0 = args[0];
        sc.decay_rate = args[1];
    } else {
        throw ConfigError("unknown schedule: '" + token + "'");
    }
    sc.validate();
    return sc;
}

std::string CurriculumSchedule::to_token() const {
    switch (kind) {
        case ScheduleKind::Ccm: return "ccm(" + format_double(step) + ")";
        case ScheduleKind::Iccm: return "iccm(" + format_double(step) + ")";
        case ScheduleKind::Static:
            return "static(" + format_double(l) + "," + std::to_string(n) + "," +
                   format_double(s) + ")";
        case ScheduleKind::Proportional: return "prop(" + format_double(factor) + ")";
        case ScheduleKind::GroundTruth: return "gt";
        case ScheduleKind::Decaying:
            return "decay(" + format_double(l0) + "," + format_double(decay_rate) + ")";
    }
    throw ConfigError("bad schedule kind");
}

StepPlan plan_step(const CurriculumSchedule& sched, double t,
                   std::uint64_t iteration) {
    if (t < 0.0 || t >= 1.0) throw ConfigError("plan_step: t must be in [0,1)");
    StepPlan plan;
    switch (sched.kind) {
        case ScheduleKind::Ccm:
            plan.mode = Termination::KdcAbove;
            plan.s = sched.step;
            plan.n = 0;  // unbounded; the loop's own termination applies
            break;
        case ScheduleKind::Iccm:
            plan.mode = Termination::KdcBelow;
            plan.s = sched.step;
            plan.n = 0;
            break;
        case ScheduleKind::Static:
            plan.mode = Termination::FixedCount;
            plan.n = sched.n;
            plan.s = sched.s;
            break;
        case ScheduleKind::Proportional:
            plan.mode = Termination::FixedCount;
            plan.n = 1;
            plan.s = sched.factor * t;
            break;
        case ScheduleKind::GroundTruth:
            plan.mode = Termination::FixedCount;
            plan.n = 1;
            plan.s = 1.0 - t;
            break;
        case ScheduleKind::Decaying:
            plan.mode = Termination::FixedCount;
            plan.n = 1;
            plan.s = sched.l0 *
                     std::exp(-sched.decay_rate * static_cast<double>(iteration));
            break;
    }
    return plan;
}

Matrix consistency_map(const nnet::MlpParams& model, const Matrix& x, double t) {
    if (t < 0.0 || t > 1.0) throw ConfigError("consistency_map: t outside [0,1]");
    if (t == 1.0) return x;  // boundary condition, bit-exact
    const Matrix v = nnet::forward(model, x, t);
    Matrix out(x.rows, x.cols);
    const double h = 1.0 - t;
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = x.v[i] + h * v.v[i];
    if (!out.all_finite()) throw TrainingError("consistency_map: non-finite output");
    return out;
}

double kdc(const Matrix& x_est, const Matrix& x_target, double peak,
           double floor_value) {
    if (!(peak > 0.0)) throw ConfigError("kdc: peak must be positive");
    const double m = mse(x_est, x_target);
    if (m < 1e-12 * peak * peak) return floor_value;
    return 100.0 - 10.0 * std::log10(peak * peak / m);
}

TargetResult compute_target(const Matrix& x_t, double t, const StepPlan& plan,
                            const ConsistencyConfig& cfg,
                            const nnet::MlpParams& teacher,
                            const nnet::MlpParams& target_model,
                            const nnet::MlpParams& student) {
    // x_est is computed once, never refreshed inside the loop.
    return compute_target_given_est(x_t, t, plan, cfg, teacher, target_model,
                                    consistency_map(student, x_t, t));
}

TargetResult compute_target_given_est(const Matrix& x_t, double t,
                                      const StepPlan& plan,
                                      const ConsistencyConfig& cfg,
                                      const nnet::MlpParams& teacher,
                                      const nnet::MlpParams& target_model,
                                      const Matrix& x_est) {
    cfg.validate();
    if (t < 0.0 || t >= 1.0) throw ConfigError("compute_target: t must be in [0,1)");
    const flow::Field teacher_field = flow::field_of(teacher);

    TargetResult res;
    double t_cur = t;
    Matrix x_cur = x_t;
    const std::size_t cap = plan.mode == Termination::FixedCount
                                ? static_cast<std::size_t>(plan.n)
                                : cfg.resolved_max_iters();
    while (true) {
        const double u = std::min(t_cur + plan.s, 1.0);
        Matrix x_u = u > t_cur
                         ? flow::euler_solve(teacher_field, x_cur, t_cur, u, plan.s)
                         : x_cur;
        res.x_target = consistency_map(target_model, x_u, u);
        res.kdc_final = kdc(x_est, res.x_target, cfg.peak, cfg.kdc_floor);
        res.iters += 1;
        res.u = u;
        res.kdc_trace.emplace_back(u, res.kdc_final);
        t_cur = u;
        x_cur = std::move(x_u);

        bool stop = u == 1.0;
        switch (plan.mode) {
            case Termination::KdcAbove: stop = stop || cfg.t_kdc < res.kdc_final; break;
            case Termination::KdcBelow: stop = stop || res.kdc_final <= cfg.t_kdc; break;
            case Termination::FixedCount:
                stop = stop || res.iters >= static_cast<std::size_t>(plan.n);
                break;
        }
        if (stop) break;
        if (res.iters >= cap)
            throw TrainingError("compute_target: iteration cap exceeded");
    }
    return res;
}

TargetResult kdc_adjusted_target(const Matrix& x_t, double t,
                                 const ConsistencyConfig& cfg,
                                 const nnet::MlpParams& teacher,
                                 const nnet::MlpParams& target_model,
                                 const nnet::MlpParams& student) {
    StepPlan plan;
    plan.mode = Termination::KdcAbove;
    plan.s = cfg.step;
    plan.n = 0;
    return compute_target(x_t, t, plan, cfg, teacher, target_model, student);
}

void write_trace_csv(std::ostream& os,
                     const std::vector<std::pair<double, double>>& trace) {
    os << "iter,u,kdc\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        os << i + 1 << ',' << format_double(trace[i].first) << ','
           << format_double(trace[i].second) << '\n';
}

}  // namespace ccm::consistency
