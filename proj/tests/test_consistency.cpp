// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ccm/consistency.hpp"
#include "ccm/flowmatch.hpp"
#include "ccm/synthdata.hpp"

using namespace ccm;

namespace {

nnet::MlpParams zero_field_net(std::uint64_t seed = 1) {
    nnet::NetSpec spec;
    auto net = nnet::make_mlp(2, 2, spec, seed);
    for (auto& l : net.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return net;
}

consistency::ConsistencyConfig default_cfg() {
    consistency::ConsistencyConfig cfg;
    cfg.peak = 4.0;
    cfg.t_kdc = 60.0;
    cfg.step = 0.03;
    cfg.kdc_floor = -900.0;
    return cfg;
}

}  // namespace

TEST_CASE("consistency_map: t = 1 is the identity, bit-exact, any model") {
    nnet::NetSpec spec;
    const auto net = nnet::make_mlp(2, 2, spec, 5);
    const Matrix x = synth::sample_noise(64, 2, 6).data;
    const Matrix y = consistency::consistency_map(net, x, 1.0);
    CHECK(y.v == x.v);
}

TEST_CASE("consistency_map: zero field returns the input at every t") {
    const auto net = zero_field_net();
    const Matrix x = synth::sample_noise(16, 2, 7).data;
    for (double t : {0.0, 0.3, 0.99}) {
        const Matrix y = consistency::consistency_map(net, x, t);
        for (std::size_t i = 0; i < y.v.size(); ++i)
            CHECK(y.v[i] == doctest::Approx(x.v[i]).epsilon(1e-15));
    }
}

TEST_CASE("consistency_map: a model predicting x1-x0 maps the path onto x1") {
    // On the displacement path, x_t + (1-t)(x1-x0) = x1 exactly.
    nnet::NetSpec spec;
    spec.hidden_layers = 0;
    auto net = nnet::make_mlp(2, 2, spec, 8);
    std::fill(net.layers[0].w.begin(), net.layers[0].w.end(), 0.0);
    const Matrix x0 = synth::sample_noise(32, 2, 9).data;
    Matrix x1 = synth::sample_noise(32, 2, 10).data;
    // constant displacement so a bias-only net can be exact
    for (std::size_t r = 0; r < x1.rows; ++r) {
        x1(r, 0) = x0(r, 0) + 1.3;
        x1(r, 1) = x0(r, 1) - 0.4;
    }
    net.layers[0].b = {1.3, -0.4};
    for (double t : {0.0, 0.25, 0.6, 0.9}) {
        const Matrix x_t = flow::ot_path(x0, x1, t);
        const Matrix y = consistency::consistency_map(net, x_t, t);
        for (std::size_t r = 0; r < y.rows; ++r) {
            CHECK(y(r, 0) == doctest::Approx(x1(r, 0)).epsilon(1e-12));
            CHECK(y(r, 1) == doctest::Approx(x1(r, 1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("kdc: exact reference points") {
    const double peak = 4.0;
    auto with_mse = [&](double target_mse) {
        // two one-point batches at distance sqrt(2 * mse) in 2-D
        Matrix a(1, 2), b(1, 2);
        b(0, 0) = std::sqrt(2.0 * target_mse);
        return consistency::kdc(a, b, peak, -900.0);
    };
    CHECK(std::abs(with_mse(peak * peak) - 100.0) < 1e-9);
    CHECK(std::abs(with_mse(peak * peak / 10.0) - 90.0) < 1e-9);
    const Matrix same = synth::sample_noise(8, 2, 11).data;
    CHECK(consistency::kdc(same, same, peak, -900.0) == -900.0);
}

TEST_CASE("kdc: strictly increasing in MSE on a grid") {
    const double peak = 4.0;
    double prev = -1e9;
    for (int k = 0; k < 20; ++k) {
        const double m = std::pow(10.0, -8.0 + 0.5 * k);  // spans saturation..large
        Matrix a(1, 1), b(1, 1);
        b(0, 0) = std::sqrt(m);
        const double v = consistency::kdc(a, b, peak, -900.0);
        if (m >= 1e-12 * peak * peak) {
            CHECK(v > prev);
            prev = v;
        } else {
            CHECK(v == -900.0);
        }
    }
}

TEST_CASE("kdc: growing noise on the target raises the KDC") {
    const Matrix base = synth::sample_noise(256, 2, 12).data;
    const Matrix noise = synth::sample_noise(256, 2, 13).data;
    double prev = -1e9;
    for (double sigma : {1e-3, 1e-2, 1e-1, 1.0}) {
        Matrix tgt = base;
        for (std::size_t i = 0; i < tgt.v.size(); ++i)
            tgt.v[i] += sigma * noise.v[i];
        const double v = consistency::kdc(base, tgt, 4.0, -900.0);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("adaptive target: clamp case takes one iteration to u = 1") {
    const auto teacher = zero_field_net(2);
    const auto student = zero_field_net(3);
    const auto cfg = default_cfg();
    const Matrix x = synth::sample_noise(8, 2, 14).data;
    const auto res =
        consistency::kdc_adjusted_target(x, 0.98, cfg, teacher, student, student);
    CHECK(res.iters == 1);
    CHECK(res.u == 1.0);
}

TEST_CASE("adaptive target: zero field + identical nets walk the full grid") {
    // KDC stays at the floor (< threshold), so the loop runs until u = 1:
    // from t = 0 with s = 0.03 that is exactly 34 iterations.
    const auto teacher = zero_field_net(2);
    const auto student = zero_field_net(3);
    const auto cfg = default_cfg();
    const Matrix x = synth::sample_noise(8, 2, 15).data;
    const auto res =
        consistency::kdc_adjusted_target(x, 0.0, cfg, teacher, student, student);
    CHECK(res.iters == 34);
    CHECK(res.u == 1.0);
    CHECK(res.kdc_final == cfg.kdc_floor);
    CHECK(res.x_target.v == x.v);
}

TEST_CASE("adaptive target: threshold below the floor forces one iteration") {
    nnet::NetSpec spec;
    const auto teacher = nnet::make_mlp(2, 2, spec, 16);
    const auto target = nnet::make_mlp(2, 2, spec, 17);
    const auto student = nnet::make_mlp(2, 2, spec, 18);
    auto cfg = default_cfg();
    cfg.t_kdc = cfg.kdc_floor - 1.0;
    for (std::uint32_t k = 0; k < 100; ++k) {
        const Matrix x = synth::sample_noise(8, 2, 19, k).data;
        const double t = rng::uniform(20, rng::Stream::Test, 0, k) * 0.99;
        const auto res =
            consistency::kdc_adjusted_target(x, t, cfg, teacher, target, student);
        CHECK(res.iters == 1);
    }
}

TEST_CASE("adaptive target: trace is strictly increasing and ends at u") {
    nnet::NetSpec spec;
    const auto teacher = nnet::make_mlp(2, 2, spec, 21);
    const auto student = zero_field_net(3);
    auto cfg = default_cfg();
    cfg.t_kdc = 1e9;  // never met: walk to u = 1 and record the full trace
    const Matrix x = synth::sample_noise(8, 2, 22).data;
    const auto res =
        consistency::kdc_adjusted_target(x, 0.13, cfg, teacher, student, student);
    REQUIRE(!res.kdc_trace.empty());
    double prev = 0.13;
    for (const auto& [u, kdc] : res.kdc_trace) {
        CHECK(u > prev);
        prev = u;
    }
    CHECK(res.kdc_trace.back().first == res.u);
    CHECK(res.kdc_trace.back().second == res.kdc_final);
    // termination bound: ceil((1-t)/s) iterations
    CHECK(res.iters <= static_cast<std::size_t>(std::ceil((1.0 - 0.13) / cfg.step)));
}

TEST_CASE("iccm inverts the termination test") {
    // identical nets keep the KDC at the floor; the inverted rule
    // (stop once KDC <= threshold) then stops immediately.
    const auto teacher = zero_field_net(2);
    const auto student = zero_field_net(3);
    auto cfg = default_cfg();
    consistency::StepPlan plan;
    plan.mode = consistency::Termination::KdcBelow;
    plan.s = 0.03;
    const Matrix x = synth::sample_noise(8, 2, 23).data;
    const auto res = consistency::compute_target(x, 0.0, plan, cfg, teacher,
                                                 student, student);
    CHECK(res.iters == 1);
}

TEST_CASE("plan_step: table rows resolve to the documented plans") {
    using consistency::CurriculumSchedule;
    using consistency::ScheduleKind;

    CurriculumSchedule st;
    st.kind = ScheduleKind::Static;
    st.l = 0.06;
    st.n = 2;
    st.s = 0.03;
    const auto p1 = consistency::plan_step(st, 0.5);
    CHECK(p1.mode == consistency::Termination::FixedCount);
    CHECK(p1.n == 2);
    CHECK(p1.s == 0.03);
    // executed u sequence is [0.53, 0.56]
    const auto teacher = zero_field_net(2);
    const auto net = zero_field_net(3);
    const auto cfg = default_cfg();
    const Matrix x = synth::sample_noise(4, 2, 24).data;
    const auto res = consistency::compute_target(x, 0.5, p1, cfg, teacher, net, net);
    REQUIRE(res.kdc_trace.size() == 2);
    CHECK(res.kdc_trace[0].first == doctest::Approx(0.53).epsilon(1e-12));
    CHECK(res.kdc_trace[1].first == doctest::Approx(0.56).epsilon(1e-12));

    CurriculumSchedule gt;
    gt.kind = ScheduleKind::GroundTruth;
    const auto p2 = consistency::plan_step(gt, 0.3);
    CHECK(p2.n == 1);
    CHECK(p2.s == doctest::Approx(0.7).epsilon(1e-15));
    const auto res2 = consistency::compute_target(x, 0.3, p2, cfg, teacher, net, net);
    CHECK(res2.u == 1.0);
    CHECK(res2.iters == 1);

    CurriculumSchedule prop;
    prop.kind = ScheduleKind::Proportional;
    prop.factor = 0.1;
    const auto p3 = consistency::plan_step(prop, 0.4);
    CHECK(p3.n == 1);
    const auto res3 = consistency::compute_target(x, 0.4, p3, cfg, teacher, net, net);
    CHECK(res3.u == doctest::Approx(0.44).epsilon(1e-12));

    // proportional at t = 0 degenerates to a zero-length step and still halts
    const auto p4 = consistency::plan_step(prop, 0.0);
    const auto res4 = consistency::compute_target(x, 0.0, p4, cfg, teacher, net, net);
    CHECK(res4.iters == 1);
    CHECK(res4.u == 0.0);

    CurriculumSchedule dec;
    dec.kind = ScheduleKind::Decaying;
    dec.l0 = 0.5;
    dec.decay_rate = 1e-3;
    const auto p5 = consistency::plan_step(dec, 0.2, 1000);
    CHECK(p5.s == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(consistency::plan_step(st, 1.0), ConfigError);
}

TEST_CASE("schedule tokens parse and round trip") {
    using consistency::CurriculumSchedule;
    const auto a = CurriculumSchedule::parse("static(0.06,2)");
    CHECK(a.l == 0.06);
    CHECK(a.n == 2);
    CHECK(a.s == doctest::Approx(0.03).epsilon(1e-15));
    const auto b = CurriculumSchedule::parse(a.to_token());
    CHECK(b.l == a.l);
    CHECK(b.n == a.n);
    const auto c = CurriculumSchedule::parse("ccm(0.05)");
    CHECK(c.step == 0.05);
    CHECK(CurriculumSchedule::parse("gt").kind ==
          consistency::ScheduleKind::GroundTruth);
    CHECK_THROWS_AS(CurriculumSchedule::parse("bogus"), ConfigError);
    CHECK_THROWS_AS(CurriculumSchedule::parse("static(0.06,2,0.05)"), ConfigError);
}

TEST_CASE("teacher and target stay bit-identical across target computations") {
    nnet::NetSpec spec;
    const auto teacher = nnet::make_mlp(2, 2, spec, 25);
    const auto target = nnet::make_mlp(2, 2, spec, 26);
    const auto student = nnet::make_mlp(2, 2, spec, 27);
    const auto teacher_copy = teacher;
    const auto target_copy = target;
    const auto cfg = default_cfg();
    for (std::uint32_t k = 0; k < 5; ++k) {
        const Matrix x = synth::sample_noise(16, 2, 28, k).data;
        (void)consistency::kdc_adjusted_target(x, 0.2, cfg, teacher, target, student);
    }
    for (std::size_t l = 0; l < teacher.layers.size(); ++l) {
        CHECK(teacher.layers[l].w == teacher_copy.layers[l].w);
        CHECK(target.layers[l].w == target_copy.layers[l].w);
    }
}

TEST_CASE("trace csv format") {
    std::vector<std::pair<double, double>> trace = {{0.53, -20.0}, {0.56, 61.5}};
    std::stringstream ss;
    consistency::write_trace_csv(ss, trace);
    CHECK(ss.str() == "iter,u,kdc\n1,0.53,-20\n2,0.56,61.5\n");
}
