// SPDX-License-Identifier: Apache-2.0
#include "ccm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ccm/flowmatch.hpp"
#include "ccm/kernels.hpp"
#include "ccm/reference.hpp"
#include "ccm/rng.hpp"

namespace ccm::eval {

namespace {

// Deterministically pick k row indices out of n (partial Fisher-Yates).
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k,
                                           std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const double u = rng::uniform(seed, rng::Stream::Subsample, 0,
                                      static_cast<std::uint32_t>(i));
        const std::size_t j =
            i + static_cast<std::size_t>(u * static_cast<double>(n - i));
        std::swap(idx[i], idx[std::min(j, n - 1)]);
    }
    idx.resize(k);
    return idx;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m(idx[r], c);
    return out;
}

std::vector<double> unit_direction(std::size_t dim, std::uint64_t seed,
                                   std::uint32_t p) {
    std::vector<double> dir(dim);
    for (std::size_t c = 0; c < dim; c += 2) {
        const auto [z0, z1] = rng::normal_pair(
            seed, rng::Stream::Projection, 0, p, static_cast<std::uint32_t>(c / 2));
        dir[c] = z0;
        if (c + 1 < dim) dir[c + 1] = z1;
    }
    double norm = 0.0;
    for (double x : dir) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : dir) x /= norm;
    return dir;
}

// W2 between the two projected empirical distributions (equal sizes).
double projection_w2(const Matrix& a, const Matrix& b,
                     std::span<const double> dir, std::vector<double>& ua,
                     std::vector<double>& ub) {
    ua.resize(a.rows);
    ub.resize(b.rows);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const double* p = a.row(r);
        double acc = 0.0;
        for (std::size_t d = 0; d < a.cols; ++d) acc += p[d] * dir[d];
        ua[r] = acc;
    }
    for (std::size_t r = 0; r < b.rows; ++r) {
        const double* p = b.row(r);
        double acc = 0.0;
        for (std::size_t d = 0; d < b.cols; ++d) acc += p[d] * dir[d];
        ub[r] = acc;
    }
    std::sort(ua.begin(), ua.end());
    std::sort(ub.begin(), ub.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i) {
        const double d = ua[i] - ub[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(ua.size()));
}

template <bool Parallel>
double sliced_wasserstein_impl(const Matrix& a_in, const Matrix& b_in,
                               std::size_t projections, std::uint64_t seed) {
    if (a_in.cols != b_in.cols)
        throw StructuralError("sliced_wasserstein: dim mismatch");
    if (a_in.rows == 0 || b_in.rows == 0)
        throw StructuralError("sliced_wasserstein: empty batch");
    if (projections < 1)
        throw ConfigError("sliced_wasserstein: projections must be >= 1");
    Matrix a = a_in, b = b_in;
    if (a.rows > b.rows) a = take_rows(a, subsample_indices(a.rows, b.rows, seed));
    if (b.rows > a.rows) b = take_rows(b, subsample_indices(b.rows, a.rows, seed));

    std::vector<double> per(projections);
    const std::int64_t np = static_cast<std::int64_t>(projections);
    if constexpr (Parallel) {
#pragma omp parallel
        {
            std::vector<double> ua, ub;
#pragma omp for schedule(static)
            for (std::int64_t p = 0; p < np; ++p) {
                const auto dir =
                    unit_direction(a.cols, seed, static_cast<std::uint32_t>(p));
                per[p] = projection_w2(a, b, dir, ua, ub);
            }
        }
    } else {
        std::vector<double> ua, ub;
        for (std::int64_t p = 0; p < np; ++p) {
            const auto dir =
                unit_direction(a.cols, seed, static_cast<std::uint32_t>(p));
            per[p] = projection_w2(a, b, dir, ua, ub);
        }
    }
    double acc = 0.0;
    for (std::size_t p = 0; p < projections; ++p) acc += per[p];
    return acc / static_cast<double>(projections);
}

double energy_distance_with(
    double (*pairwise)(const Matrix&, const Matrix&), const Matrix& a,
    const Matrix& b) {
    const double ab = pairwise(a, b);
    const double aa = pairwise(a, a);
    const double bb = pairwise(b, b);
    return 2.0 * ab - aa - bb;
}

}  // namespace

double sliced_wasserstein(const Matrix& a, const Matrix& b,
                          std::size_t projections, std::uint64_t seed) {
    return sliced_wasserstein_impl<true>(a, b, projections, seed);
}

double energy_distance(const Matrix& a, const Matrix& b) {
    return energy_distance_with(&kernels::mean_pairwise_distance, a, b);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw StructuralError("spearman: need two equal-length series");
    auto ranks = [](std::span<const double> v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

void KDCProfile::write_csv(std::ostream& os) const {
    os << "bin_lo,bin_hi,mean_kdc,var_kdc,count\n";
    for (std::size_t i = 0; i < bin_lo.size(); ++i)
        os << format_double(bin_lo[i]) << ',' << format_double(bin_hi[i]) << ','
           << format_double(mean[i]) << ',' << format_double(var[i]) << ','
           << count[i] << '\n';
}

namespace {

// Shared KDC measurement: student map at (x_t, t) vs target-model map at the
// end of a teacher rollout of length l.
double measure_kdc(const nnet::MlpParams& student,
                   const nnet::MlpParams& target_model,
                   const nnet::MlpParams& teacher,
                   const synth::DistributionSpec& spec, double t, double l,
                   const ProfileConfig& cfg, std::uint32_t block) {
    const synth::Batch x1 = synth::sample_data(spec, cfg.batch, cfg.seed, block,
                                               rng::Stream::ProfileData);
    const synth::Batch x0 = synth::sample_noise(cfg.batch, 2, cfg.seed, block,
                                                rng::Stream::ProfileNoise);
    const Matrix x_t = flow::ot_path(x0.data, x1.data, t);
    const Matrix x_est = consistency::consistency_map(student, x_t, t);
    const double u = std::min(t + l, 1.0);
    const Matrix x_u =
        u > t ? flow::euler_solve(flow::field_of(teacher), x_t, t, u, cfg.solver_step)
              : x_t;
    const Matrix x_tgt = consistency::consistency_map(target_model, x_u, u);
    return consistency::kdc(x_est, x_tgt, cfg.peak, cfg.kdc_floor);
}

}  // namespace

KDCProfile kdc_profile(const nnet::MlpParams& student,
                       const nnet::MlpParams& target_model,
                       const nnet::MlpParams& teacher,
                       const synth::DistributionSpec& spec,
                       const ProfileConfig& cfg) {
    if (cfg.bins < 1) throw ConfigError("kdc_profile: bins must be >= 1");
    if (cfg.reps < 1) throw ConfigError("kdc_profile: reps must be >= 1");
    KDCProfile prof;
    prof.l = cfg.l;
    for (std::size_t k = 0; k < cfg.bins; ++k) {
        const double lo = static_cast<double>(k) / static_cast<double>(cfg.bins);
        const double hi = static_cast<double>(k + 1) / static_cast<double>(cfg.bins);
        const double t = (lo + hi) / 2.0;
        double m = 0.0, m2 = 0.0;
        for (std::size_t r = 0; r < cfg.reps; ++r) {
            const auto block = static_cast<std::uint32_t>(k * cfg.reps + r);
            const double v = measure_kdc(student, target_model, teacher, spec, t,
                                         cfg.l, cfg, block);
            m += v;
            m2 += v * v;
        }
        const double n = static_cast<double>(cfg.reps);
        const double mean = m / n;
        const double var =
            cfg.reps > 1 ? std::max(0.0, (m2 - n * mean * mean) / (n - 1.0)) : 0.0;
        prof.bin_lo.push_back(lo);
        prof.bin_hi.push_back(hi);
        prof.mean.push_back(mean);
        prof.var.push_back(var);
        prof.count.push_back(cfg.reps);
    }
    return prof;
}

std::vector<std::pair<double, double>> kdc_vs_step(
    const nnet::MlpParams& student, const nnet::MlpParams& target_model,
    const nnet::MlpParams& teacher, const synth::DistributionSpec& spec,
    double t, std::span<const double> l_grid, const ProfileConfig& cfg) {
    if (t < 0.0 || t >= 1.0) throw ConfigError("kdc_vs_step: t must be in [0,1)");
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k < l_grid.size(); ++k) {
        if (!(l_grid[k] > 0.0)) throw ConfigError("kdc_vs_step: l must be positive");
        double m = 0.0;
        for (std::size_t r = 0; r < cfg.reps; ++r) {
            // Blocks depend on the grid position's value via k only through
            // the data draw; use r alone so each l sees the same batches.
            const auto block = static_cast<std::uint32_t>(r);
            m += measure_kdc(student, target_model, teacher, spec, t, l_grid[k],
                             cfg, block);
        }
        out.emplace_back(l_grid[k], m / static_cast<double>(cfg.reps));
    }
    return out;
}

std::vector<AblationRow> run_ablation(const synth::DistributionSpec& spec,
                                      const nnet::MlpParams& teacher,
                                      const nnet::NetSpec& net,
                                      const distill::DistillConfig& base,
                                      const AblationConfig& cfg) {
    if (cfg.strategies.empty()) throw ConfigError("ablation: no strategies");
    if (cfg.seeds.empty()) throw ConfigError("ablation: no seeds");
    const synth::Batch ref = synth::sample_data(spec, cfg.eval_n, cfg.eval_seed);
    std::vector<AblationRow> rows;
    const double nan = std::nan("");
    for (const auto& token : cfg.strategies) {
        for (const auto seed : cfg.seeds) {
            AblationRow row;
            row.strategy = token;
            row.seed = seed;
            row.l = nan;
            row.n = 0;
            row.s = nan;
            const auto tic = std::chrono::steady_clock::now();
            try {
                const auto sched = consistency::CurriculumSchedule::parse(token);
                if (sched.kind == consistency::ScheduleKind::Static) {
                    row.l = sched.l;
                    row.n = sched.n;
                    row.s = sched.s;
                } else if (sched.kind == consistency::ScheduleKind::Ccm ||
                           sched.kind == consistency::ScheduleKind::Iccm) {
                    row.s = sched.step;
                }
                distill::DistillConfig dc = base;
                dc.schedule = sched;
                dc.seed = seed;
                const auto result = distill::distill(spec, teacher, net, dc);
                if (result.diverged)
                    throw TrainingError("distillation diverged");
                const synth::Batch gen =
                    distill::sample(result.student, cfg.eval_n, 1, cfg.eval_seed);
                row.metric = sliced_wasserstein(gen.data, ref.data,
                                                cfg.projections, cfg.eval_seed);
            } catch (const std::exception& e) {
                row.metric = nan;
                row.error = e.what();
            }
            row.runtime_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - tic)
                                 .count();
            rows.push_back(std::move(row));
        }
    }
    // Sort by per-strategy median metric; failed rows rank last.
    std::vector<std::string> order(cfg.strategies);
    auto median_of = [&](const std::string& token) {
        std::vector<double> vals;
        for (const auto& r : rows)
            if (r.strategy == token && r.error.empty() && std::isfinite(r.metric))
                vals.push_back(r.metric);
        if (vals.empty()) return std::numeric_limits<double>::infinity();
        std::sort(vals.begin(), vals.end());
        return vals[vals.size() / 2];
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& x, const std::string& y) {
                         return median_of(x) < median_of(y);
                     });
    std::vector<AblationRow> sorted;
    for (const auto& token : order)
        for (auto& r : rows)
            if (r.strategy == token) sorted.push_back(std::move(r));
    return sorted;
}

void write_ablation_csv(std::ostream& os, std::span<const AblationRow> rows) {
    os << "strategy,l,n,s,seed,metric,runtime_ms,error\n";
    for (const auto& r : rows) {
        os << r.strategy << ',' << format_double(r.l) << ',' << r.n << ','
           << format_double(r.s) << ',' << r.seed << ',' << format_double(r.metric)
           << ',' << format_double(r.runtime_ms) << ',' << r.error << '\n';
    }
}

}  // namespace ccm::eval

namespace ccm::reference {

double sliced_wasserstein(const Matrix& a, const Matrix& b,
                          std::size_t projections, std::uint64_t seed) {
    return ccm::eval::sliced_wasserstein_impl<false>(a, b, projections, seed);
}

double energy_distance(const Matrix& a, const Matrix& b) {
    return ccm::eval::energy_distance_with(&reference::mean_pairwise_distance, a, b);
}

}  // namespace ccm::reference
