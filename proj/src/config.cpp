// SPDX-License-Identifier: Apache-2.0
#include "ccm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace ccm::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t out = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("not an unsigned integer: '" + s + "'");
    return out;
}

std::size_t parse_size(const std::string& s) {
    return static_cast<std::size_t>(parse_u64(s));
}

bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("not a bool (true/false): '" + s + "'");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

// Split on commas outside parentheses (strategy tokens carry commas inside).
std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            const auto t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    const auto t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

struct KeyHandler {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string activation_str(nnet::Activation a) {
    return a == nnet::Activation::Silu ? "silu" : "tanh";
}

nnet::Activation activation_parse(const std::string& s) {
    if (s == "silu") return nnet::Activation::Silu;
    if (s == "tanh") return nnet::Activation::Tanh;
    throw ConfigError("unknown activation: '" + s + "'");
}

std::string distance_str(distill::Distance d) {
    return d == distill::Distance::L2 ? "l2" : "l1";
}

distill::Distance distance_parse(const std::string& s) {
    if (s == "l2") return distill::Distance::L2;
    if (s == "l1") return distill::Distance::L1;
    throw ConfigError("unknown distance: '" + s + "'");
}

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> h = [] {
        std::vector<KeyHandler> v;
        auto add = [&v](std::string section, std::string key, auto set, auto get) {
            v.push_back(KeyHandler{std::move(section), std::move(key), set, get});
        };
        // [data]
        add("data", "kind",
            [](RunConfig& c, const std::string& s) { c.data.kind = synth::kind_from_string(s); },
            [](const RunConfig& c) { return synth::kind_to_string(c.data.kind); });
        add("data", "scale",
            [](RunConfig& c, const std::string& s) { c.data.scale = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.data.scale); });
        add("data", "mean_x",
            [](RunConfig& c, const std::string& s) { c.data.mean_x = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.data.mean_x); });
        add("data", "mean_y",
            [](RunConfig& c, const std::string& s) { c.data.mean_y = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.data.mean_y); });
        add("data", "std_factor",
            [](RunConfig& c, const std::string& s) { c.data.std_factor = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.data.std_factor); });
        add("data", "moon_noise",
            [](RunConfig& c, const std::string& s) { c.data.moon_noise = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.data.moon_noise); });
        add("data", "n",
            [](RunConfig& c, const std::string& s) { c.data_n = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.data_n); });
        add("data", "seed",
            [](RunConfig& c, const std::string& s) { c.data_seed = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.data_seed); });
        // [net]
        add("net", "hidden_width",
            [](RunConfig& c, const std::string& s) { c.net.hidden_width = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.net.hidden_width); });
        add("net", "hidden_layers",
            [](RunConfig& c, const std::string& s) { c.net.hidden_layers = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.net.hidden_layers); });
        add("net", "embed_width",
            [](RunConfig& c, const std::string& s) { c.net.embed_width = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.net.embed_width); });
        add("net", "activation",
            [](RunConfig& c, const std::string& s) { c.net.act = activation_parse(s); },
            [](const RunConfig& c) { return activation_str(c.net.act); });
        // [teacher]
        add("teacher", "iterations",
            [](RunConfig& c, const std::string& s) { c.teacher.iterations = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.teacher.iterations); });
        add("teacher", "batch",
            [](RunConfig& c, const std::string& s) { c.teacher.batch = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.teacher.batch); });
        add("teacher", "lr",
            [](RunConfig& c, const std::string& s) { c.teacher.lr = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.teacher.lr); });
        add("teacher", "beta1",
            [](RunConfig& c, const std::string& s) { c.teacher.beta1 = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.teacher.beta1); });
        add("teacher", "beta2",
            [](RunConfig& c, const std::string& s) { c.teacher.beta2 = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.teacher.beta2); });
        add("teacher", "eps",
            [](RunConfig& c, const std::string& s) { c.teacher.eps = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.teacher.eps); });
        add("teacher", "seed",
            [](RunConfig& c, const std::string& s) { c.teacher.seed = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.teacher.seed); });
        // [distill]
        add("distill", "schedule",
            [](RunConfig& c, const std::string& s) {
                c.distill.schedule = consistency::CurriculumSchedule::parse(s);
            },
            [](const RunConfig& c) { return c.distill.schedule.to_token(); });
        add("distill", "distance",
            [](RunConfig& c, const std::string& s) { c.distill.distance = distance_parse(s); },
            [](const RunConfig& c) { return distance_str(c.distill.distance); });
        add("distill", "iterations",
            [](RunConfig& c, const std::string& s) { c.distill.iterations = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.distill.iterations); });
        add("distill", "batch",
            [](RunConfig& c, const std::string& s) { c.distill.batch = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.distill.batch); });
        add("distill", "seed",
            [](RunConfig& c, const std::string& s) { c.distill.seed = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.distill.seed); });
        add("distill", "lr",
            [](RunConfig& c, const std::string& s) { c.distill.lr = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.lr); });
        add("distill", "beta1",
            [](RunConfig& c, const std::string& s) { c.distill.beta1 = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.beta1); });
        add("distill", "beta2",
            [](RunConfig& c, const std::string& s) { c.distill.beta2 = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.beta2); });
        add("distill", "eps",
            [](RunConfig& c, const std::string& s) { c.distill.eps = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.eps); });
        add("distill", "target_ema",
            [](RunConfig& c, const std::string& s) { c.distill.target_ema = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.target_ema); });
        add("distill", "student_ema",
            [](RunConfig& c, const std::string& s) { c.distill.student_ema = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.student_ema); });
        add("distill", "peak",
            [](RunConfig& c, const std::string& s) { c.distill.ccfg.peak = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.ccfg.peak); });
        add("distill", "kdc_floor",
            [](RunConfig& c, const std::string& s) { c.distill.ccfg.kdc_floor = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.ccfg.kdc_floor); });
        add("distill", "max_iters",
            [](RunConfig& c, const std::string& s) { c.distill.ccfg.max_iters = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.distill.ccfg.max_iters); });
        add("distill", "t_kdc",
            [](RunConfig& c, const std::string& s) { c.distill.ccfg.t_kdc = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.ccfg.t_kdc); });
        add("distill", "t_kdc_auto",
            [](RunConfig& c, const std::string& s) { c.distill.t_kdc_auto = parse_bool(s); },
            [](const RunConfig& c) { return bool_str(c.distill.t_kdc_auto); });
        add("distill", "t_kdc_offset",
            [](RunConfig& c, const std::string& s) { c.distill.t_kdc_offset = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.t_kdc_offset); });
        add("distill", "calib_batches",
            [](RunConfig& c, const std::string& s) { c.distill.calib_batches = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.distill.calib_batches); });
        add("distill", "gan_enabled",
            [](RunConfig& c, const std::string& s) { c.distill.gan.enabled = parse_bool(s); },
            [](const RunConfig& c) { return bool_str(c.distill.gan.enabled); });
        add("distill", "gan_lambda",
            [](RunConfig& c, const std::string& s) { c.distill.gan.lambda = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.gan.lambda); });
        add("distill", "gan_lr",
            [](RunConfig& c, const std::string& s) { c.distill.gan.disc_lr = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.distill.gan.disc_lr); });
        add("distill", "gan_literal",
            [](RunConfig& c, const std::string& s) {
                c.distill.gan.literal_generator_loss = parse_bool(s);
            },
            [](const RunConfig& c) { return bool_str(c.distill.gan.literal_generator_loss); });
        // [sample]
        add("sample", "n",
            [](RunConfig& c, const std::string& s) { c.sample_n = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.sample_n); });
        add("sample", "nfe",
            [](RunConfig& c, const std::string& s) { c.sample_nfe = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.sample_nfe); });
        add("sample", "seed",
            [](RunConfig& c, const std::string& s) { c.sample_seed = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.sample_seed); });
        add("sample", "use_ema",
            [](RunConfig& c, const std::string& s) { c.sample_use_ema = parse_bool(s); },
            [](const RunConfig& c) { return bool_str(c.sample_use_ema); });
        // [eval]
        add("eval", "projections",
            [](RunConfig& c, const std::string& s) { c.eval_projections = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.eval_projections); });
        add("eval", "n",
            [](RunConfig& c, const std::string& s) { c.eval_n = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.eval_n); });
        add("eval", "seed",
            [](RunConfig& c, const std::string& s) { c.eval_seed = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.eval_seed); });
        add("eval", "profile_bins",
            [](RunConfig& c, const std::string& s) { c.profile_bins = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.profile_bins); });
        add("eval", "profile_reps",
            [](RunConfig& c, const std::string& s) { c.profile_reps = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.profile_reps); });
        add("eval", "profile_batch",
            [](RunConfig& c, const std::string& s) { c.profile_batch = parse_size(s); },
            [](const RunConfig& c) { return std::to_string(c.profile_batch); });
        add("eval", "profile_l",
            [](RunConfig& c, const std::string& s) { c.profile_l = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.profile_l); });
        add("eval", "profile_solver_step",
            [](RunConfig& c, const std::string& s) { c.profile_solver_step = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.profile_solver_step); });
        add("eval", "vs_step_t",
            [](RunConfig& c, const std::string& s) { c.vs_step_t = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.vs_step_t); });
        // [ablate]
        add("ablate", "strategies",
            [](RunConfig& c, const std::string& s) { c.ablate_strategies = split_list(s); },
            [](const RunConfig& c) { return join_list(c.ablate_strategies); });
        add("ablate", "seeds",
            [](RunConfig& c, const std::string& s) {
                c.ablate_seeds.clear();
                for (const auto& tok : split_list(s)) c.ablate_seeds.push_back(parse_u64(tok));
            },
            [](const RunConfig& c) {
                std::vector<std::string> parts;
                for (auto v : c.ablate_seeds) parts.push_back(std::to_string(v));
                return join_list(parts);
            });
        add("ablate", "iterations",
            [](RunConfig& c, const std::string& s) { c.ablate_iterations = parse_u64(s); },
            [](const RunConfig& c) { return std::to_string(c.ablate_iterations); });
        // [manifest]
        add("manifest", "calibrated_t_kdc",
            [](RunConfig& c, const std::string& s) { c.manifest_calibrated_t_kdc = parse_double(s); },
            [](const RunConfig& c) { return format_double(c.manifest_calibrated_t_kdc); });
        add("manifest", "warm_start",
            [](RunConfig& c, const std::string& s) { c.manifest_warm_start = parse_bool(s); },
            [](const RunConfig& c) { return bool_str(c.manifest_warm_start); });
        add("manifest", "rng",
            [](RunConfig& c, const std::string& s) { c.manifest_rng = s; },
            [](const RunConfig& c) { return c.manifest_rng; });
        add("manifest", "teacher",
            [](RunConfig& c, const std::string& s) { c.manifest_teacher = s; },
            [](const RunConfig& c) { return c.manifest_teacher; });
        return v;
    }();
    return h;
}

}  // namespace

RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& h : handlers())
                if (h.section == section) known = true;
            if (!known)
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) +
                              ": key '" + key + "' outside any section");
        const KeyHandler* found = nullptr;
        for (const auto& h : handlers())
            if (h.section == section && h.key == key) found = &h;
        if (!found)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": unknown key '" + section + "." + key + "'");
        try {
            found->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": key '" +
                              section + "." + key + "': " + e.what());
        }
    }
    return cfg;
}

RunConfig load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

namespace {

std::string serialize_impl(const RunConfig& cfg, bool with_manifest) {
    std::string out;
    std::string section;
    for (const auto& h : handlers()) {
        if (!with_manifest && h.section == "manifest") continue;
        if (h.section != section) {
            if (!out.empty()) out += '\n';
            out += "[" + h.section + "]\n";
            section = h.section;
        }
        out += h.key + " = " + h.get(cfg) + "\n";
    }
    return out;
}

}  // namespace

std::string serialize(const RunConfig& cfg) { return serialize_impl(cfg, true); }

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string s = serialize_impl(cfg, false);
    return fnv1a64(s.data(), s.size());
}

}  // namespace ccm::config
