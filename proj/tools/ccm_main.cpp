// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: data generation, teacher training, consistency
// distillation, sampling, metrics, KDC profiling, and ablations.

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

#include "ccm/cli.hpp"

namespace {

ccm::config::RunConfig load_or_default(const std::string& path) {
    if (path.empty()) return ccm::config::RunConfig{};
    return ccm::config::load(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curriculum consistency distillation lab"};
    app.require_subcommand(1);

    std::string config_path, out, teacher, checkpoint, target, target_out;
    std::string metric = "all", batch_a, batch_b, out_dir;
    std::vector<std::string> students;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n, nfe;
    std::optional<bool> use_ema;
    bool vs_step = false;

    auto* gen = app.add_subcommand("gen-data", "write a data batch as CSV");
    gen->add_option("--config", config_path, "config file");
    gen->add_option("--out", out, "output CSV")->required();
    gen->add_option("--seed", seed, "seed override");

    auto* tt = app.add_subcommand("train-teacher", "flow-matching pretraining");
    tt->add_option("--config", config_path, "config file");
    tt->add_option("--out", out, "output checkpoint")->required();
    tt->add_option("--seed", seed, "seed override");

    auto* di = app.add_subcommand("distill", "consistency distillation");
    di->add_option("--config", config_path, "config file");
    di->add_option("--teacher", teacher, "teacher checkpoint")->required();
    di->add_option("--out", out, "student checkpoint")->required();
    di->add_option("--target-out", target_out, "also write the target model");
    di->add_option("--seed", seed, "seed override");

    auto* sa = app.add_subcommand("sample", "generate samples from a student");
    sa->add_option("--config", config_path, "config file");
    sa->add_option("--checkpoint", checkpoint, "student checkpoint")->required();
    sa->add_option("--out", out, "output CSV")->required();
    sa->add_option("--n", n, "sample count");
    sa->add_option("--nfe", nfe, "function evaluations");
    sa->add_option("--seed", seed, "seed override");
    sa->add_option("--use-ema", use_ema, "sample from the EMA weights");

    auto* ev = app.add_subcommand("eval", "two-sample metrics between CSV batches");
    ev->add_option("--config", config_path, "config file");
    ev->add_option("--a", batch_a, "first batch CSV")->required();
    ev->add_option("--b", batch_b, "second batch CSV")->required();
    ev->add_option("--metric", metric, "sw | energy | all");
    ev->add_option("--out", out, "metrics CSV")->required();

    auto* pk = app.add_subcommand("profile-kdc", "KDC vs t (or vs l) profiles");
    pk->add_option("--config", config_path, "config file");
    pk->add_option("--teacher", teacher, "teacher checkpoint")->required();
    pk->add_option("--student", students, "student checkpoint (repeatable)")
        ->required();
    pk->add_option("--target", target, "explicit target-model checkpoint");
    pk->add_flag("--vs-step", vs_step, "profile against l at fixed t");
    pk->add_option("--out", out, "output prefix")->required();

    auto* ab = app.add_subcommand("ablate", "run the strategy ablation table");
    ab->add_option("--config", config_path, "config file");
    ab->add_option("--teacher", teacher, "teacher checkpoint")->required();
    ab->add_option("--out-dir", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    return ccm::cli::run_guarded([&] {
        const auto cfg = load_or_default(config_path);
        if (gen->parsed()) ccm::cli::cmd_gen_data(cfg, seed, out);
        if (tt->parsed()) ccm::cli::cmd_train_teacher(cfg, seed, out);
        if (di->parsed()) ccm::cli::cmd_distill(cfg, seed, teacher, out, target_out);
        if (sa->parsed())
            ccm::cli::cmd_sample(cfg, checkpoint, n, nfe, seed, use_ema, out);
        if (ev->parsed()) ccm::cli::cmd_eval(cfg, batch_a, batch_b, metric, out);
        if (pk->parsed()) {
            std::vector<std::filesystem::path> paths(students.begin(), students.end());
            ccm::cli::cmd_profile_kdc(cfg, teacher, paths, target, vs_step, out);
        }
        if (ab->parsed()) ccm::cli::cmd_ablate(cfg, teacher, out_dir);
    });
}
