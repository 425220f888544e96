// SPDX-License-Identifier: Apache-2.0
#include "ccm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ccm/checkpoint.hpp"
#include "ccm/distill.hpp"
#include "ccm/eval.hpp"
#include "ccm/svg.hpp"

namespace ccm::cli {

namespace fs = std::filesystem;

fs::path resolve_out(const fs::path& p) {
    if (p.is_absolute()) return p;
    if (const char* base = std::getenv("CCM_OUT_DIR"); base && *base)
        return fs::path(base) / p;
    return p;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension();
    return p.concat(suffix);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + path.string());
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

void write_batch_csv(const fs::path& path, const Matrix& m) {
    std::ostringstream ss;
    synth::write_csv(ss, m);
    write_text(path, ss.str());
}

Matrix read_batch_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open batch csv: " + path.string());
    return synth::read_csv(f);
}

io::Checkpoint load_ckpt(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("checkpoint not found: " + path.string());
    return io::load_checkpoint(path);
}

distill::DistillConfig distill_config_of(const config::RunConfig& cfg) {
    return cfg.distill;
}

}  // namespace

void cmd_gen_data(const config::RunConfig& cfg,
                  std::optional<std::uint64_t> seed_override,
                  const fs::path& out) {
    const std::uint64_t seed = seed_override.value_or(cfg.data_seed);
    const synth::Batch batch = synth::sample_data(cfg.data, cfg.data_n, seed);
    write_batch_csv(resolve_out(out), batch.data);
}

void cmd_train_teacher(const config::RunConfig& cfg,
                       std::optional<std::uint64_t> seed_override,
                       const fs::path& out) {
    config::RunConfig c = cfg;
    if (seed_override) c.teacher.seed = *seed_override;
    const auto res = distill::train_teacher(c.data, c.net, c.teacher);
    const fs::path out_path = resolve_out(out);
    io::Checkpoint ckpt;
    ckpt.params = res.params;
    ckpt.opt = res.opt;
    ckpt.meta.seed = c.teacher.seed;
    ckpt.meta.iterations = res.completed;
    ckpt.meta.config_hash = config::config_hash(c);
    io::save_checkpoint(out_path, ckpt);
    std::ostringstream log;
    res.log.write_csv(log);
    write_text(sibling(out_path, ".runlog.csv"), log.str());
    if (res.diverged)
        throw TrainingError("teacher training diverged at iteration " +
                            std::to_string(res.completed) +
                            "; last good checkpoint written to " +
                            out_path.string());
}

void cmd_distill(const config::RunConfig& cfg,
                 std::optional<std::uint64_t> seed_override,
                 const fs::path& teacher, const fs::path& out,
                 const fs::path& target_out) {
    config::RunConfig c = cfg;
    if (seed_override) c.distill.seed = *seed_override;
    const io::Checkpoint tckpt = load_ckpt(teacher);
    const auto res = distill::distill(c.data, tckpt.params, c.net, c.distill);

    const fs::path out_path = resolve_out(out);
    io::Checkpoint ckpt;
    ckpt.params = res.student;
    ckpt.opt = res.opt;
    ckpt.ema = res.ema_student;
    ckpt.meta.seed = c.distill.seed;
    ckpt.meta.iterations = res.completed;
    ckpt.meta.config_hash = config::config_hash(c);
    io::save_checkpoint(out_path, ckpt);
    if (!target_out.empty()) {
        io::Checkpoint tgt;
        tgt.params = res.target_model;
        tgt.meta = ckpt.meta;
        io::save_checkpoint(resolve_out(target_out), tgt);
    }

    std::ostringstream log;
    res.log.write_csv(log);
    write_text(sibling(out_path, ".runlog.csv"), log.str());

    c.manifest_calibrated_t_kdc = res.calibrated_t_kdc;
    c.manifest_warm_start = true;
    c.manifest_rng = rng::kGeneratorName;
    c.manifest_teacher = teacher.string();
    write_text(sibling(out_path, ".manifest"), config::serialize(c));
    if (res.diverged)
        throw TrainingError("distillation diverged at iteration " +
                            std::to_string(res.completed) +
                            "; last good checkpoint written to " +
                            out_path.string());
}

void cmd_sample(const config::RunConfig& cfg, const fs::path& checkpoint,
                std::optional<std::size_t> n, std::optional<std::size_t> nfe,
                std::optional<std::uint64_t> seed, std::optional<bool> use_ema,
                const fs::path& out) {
    const io::Checkpoint ckpt = load_ckpt(checkpoint);
    const bool ema = use_ema.value_or(cfg.sample_use_ema);
    if (ema && !ckpt.ema)
        throw ConfigError("sample: checkpoint has no EMA section");
    const nnet::MlpParams& params = ema ? *ckpt.ema : ckpt.params;
    const synth::Batch batch =
        distill::sample(params, n.value_or(cfg.sample_n),
                        nfe.value_or(cfg.sample_nfe), seed.value_or(cfg.sample_seed));
    write_batch_csv(resolve_out(out), batch.data);
}

void cmd_eval(const config::RunConfig& cfg, const fs::path& a, const fs::path& b,
              const std::string& metric, const fs::path& out) {
    const Matrix ma = read_batch_csv(a);
    const Matrix mb = read_batch_csv(b);
    if (ma.cols != mb.cols)
        throw StructuralError("eval: batches have different dimensions");
    std::ostringstream ss;
    ss << "metric,value\n";
    const bool all = metric == "all";
    if (all || metric == "sw")
        ss << "sw,"
           << format_double(eval::sliced_wasserstein(ma, mb, cfg.eval_projections,
                                                     cfg.eval_seed))
           << '\n';
    if (all || metric == "energy")
        ss << "energy," << format_double(eval::energy_distance(ma, mb)) << '\n';
    if (!all && metric != "sw" && metric != "energy")
        throw ConfigError("eval: unknown metric '" + metric + "'");
    write_text(resolve_out(out), ss.str());
}

void cmd_profile_kdc(const config::RunConfig& cfg, const fs::path& teacher,
                     const std::vector<fs::path>& students,
                     const fs::path& target, bool vs_step,
                     const fs::path& out_prefix) {
    if (students.empty()) throw ConfigError("profile-kdc: no student checkpoint");
    const io::Checkpoint tckpt = load_ckpt(teacher);
    std::optional<io::Checkpoint> explicit_target;
    if (!target.empty()) explicit_target = load_ckpt(target);

    eval::ProfileConfig pcfg;
    pcfg.bins = cfg.profile_bins;
    pcfg.reps = cfg.profile_reps;
    pcfg.batch = cfg.profile_batch;
    pcfg.l = cfg.profile_l;
    pcfg.solver_step = cfg.profile_solver_step;
    pcfg.seed = cfg.eval_seed;
    pcfg.peak = cfg.distill.ccfg.peak;
    pcfg.kdc_floor = cfg.distill.ccfg.kdc_floor;

    const fs::path prefix = resolve_out(out_prefix);
    std::vector<svg::Series> series;
    for (std::size_t k = 0; k < students.size(); ++k) {
        const io::Checkpoint sckpt = load_ckpt(students[k]);
        const nnet::MlpParams& target_model =
            explicit_target ? explicit_target->params
                            : (sckpt.ema ? *sckpt.ema : sckpt.params);
        svg::Series s;
        s.label = students[k].stem().string();
        std::ostringstream csv;
        if (vs_step) {
            std::vector<double> grid;
            for (int i = 1; i <= 20; ++i) grid.push_back(0.01 * i);
            const auto rows = eval::kdc_vs_step(sckpt.params, target_model,
                                                tckpt.params, cfg.data,
                                                cfg.vs_step_t, grid, pcfg);
            csv << "l,mean_kdc\n";
            for (const auto& [l, m] : rows) {
                csv << format_double(l) << ',' << format_double(m) << '\n';
                s.points.emplace_back(l, m);
            }
        } else {
            const auto prof = eval::kdc_profile(sckpt.params, target_model,
                                                tckpt.params, cfg.data, pcfg);
            std::ostringstream tmp;
            prof.write_csv(tmp);
            csv << tmp.str();
            for (std::size_t i = 0; i < prof.mean.size(); ++i)
                s.points.emplace_back((prof.bin_lo[i] + prof.bin_hi[i]) / 2.0,
                                      prof.mean[i]);
        }
        const fs::path csv_path =
            students.size() == 1
                ? fs::path(prefix).concat(".csv")
                : fs::path(prefix).concat("." + s.label + ".csv");
        write_text(csv_path, csv.str());
        series.push_back(std::move(s));
    }
    const std::string xlabel = vs_step ? "distillation step l" : "t";
    write_text(fs::path(prefix).concat(".svg"),
               svg::line_plot(series, "KDC profile", xlabel, "mean KDC"));
}

void cmd_ablate(const config::RunConfig& cfg, const fs::path& teacher,
                const fs::path& out_dir) {
    const io::Checkpoint tckpt = load_ckpt(teacher);
    distill::DistillConfig base = distill_config_of(cfg);
    if (cfg.ablate_iterations > 0) base.iterations = cfg.ablate_iterations;
    eval::AblationConfig acfg;
    acfg.strategies = cfg.ablate_strategies;
    acfg.seeds = cfg.ablate_seeds;
    acfg.eval_n = cfg.eval_n;
    acfg.projections = cfg.eval_projections;
    acfg.eval_seed = cfg.eval_seed;
    const auto rows =
        eval::run_ablation(cfg.data, tckpt.params, cfg.net, base, acfg);

    const fs::path dir = resolve_out(out_dir);
    fs::create_directories(dir);
    std::ostringstream csv;
    eval::write_ablation_csv(csv, rows);
    write_text(dir / "ablation.csv", csv.str());

    // Bar chart of per-strategy medians in the sorted row order.
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& r : rows) {
        bool seen = false;
        for (const auto& b : bars) seen = seen || b.first == r.strategy;
        if (seen) continue;
        std::vector<double> vals;
        for (const auto& q : rows)
            if (q.strategy == r.strategy && q.error.empty() && std::isfinite(q.metric))
                vals.push_back(q.metric);
        std::sort(vals.begin(), vals.end());
        bars.emplace_back(r.strategy,
                          vals.empty() ? std::nan("") : vals[vals.size() / 2]);
    }
    write_text(dir / "ablation.svg",
               svg::bar_chart(bars, "ablation", "sliced Wasserstein"));

    bool any_ok = false;
    for (const auto& r : rows) any_ok = any_ok || r.error.empty();
    if (!any_ok) throw TrainingError("ablation: every run failed");
}

int run_guarded(const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const StructuralError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << '\n';
        return 4;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace ccm::cli
