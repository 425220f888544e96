// SPDX-License-Identifier: Apache-2.0
//
// Compares the OpenMP kernels against the serial reference and verifies the
// two produce identical bits. Usage: ccm_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ccm/eval.hpp"
#include "ccm/kernels.hpp"
#include "ccm/nnet.hpp"
#include "ccm/reference.hpp"
#include "ccm/rng.hpp"
#include "ccm/synthdata.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
    fn();  // warm up
    const auto t0 = clock_type::now();
    for (int i = 0; i < repeats; ++i) fn();
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0)
               .count() /
           repeats;
}

bool bits_equal(const ccm::Matrix& a, const ccm::Matrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.v.size(); ++i)
        if (a.v[i] != b.v[i]) return false;
    return true;
}

void report(const char* name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms,
                match ? "bits match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    const std::size_t batch = 8192;
    ccm::nnet::NetSpec spec;
    const auto net = ccm::nnet::make_mlp(2, 2, spec, 7);
    const ccm::Matrix x = ccm::synth::sample_noise(batch, 18, 1).data;
    const ccm::Matrix dy = ccm::synth::sample_noise(batch, 64, 2).data;
    const auto& l0 = net.layers[0];

    ccm::Matrix y_ref, y_par;
    report("affine_forward",
           time_ms([&] { ccm::reference::affine_forward(x, l0.w, l0.b, y_ref); }, repeats),
           time_ms([&] { ccm::kernels::affine_forward(x, l0.w, l0.b, y_par); }, repeats),
           bits_equal(y_ref, y_par));

    ccm::Matrix a_ref, a_par;
    report("activation_forward",
           time_ms([&] { ccm::reference::activation_forward(dy, net.act, a_ref); }, repeats),
           time_ms([&] { ccm::kernels::activation_forward(dy, net.act, a_par); }, repeats),
           bits_equal(a_ref, a_par));

    std::vector<double> gw_ref(l0.w.size()), gb_ref(l0.b.size());
    std::vector<double> gw_par(l0.w.size()), gb_par(l0.b.size());
    report("affine_param_grads",
           time_ms([&] { ccm::reference::affine_param_grads(x, dy, gw_ref, gb_ref); }, repeats),
           time_ms([&] { ccm::kernels::affine_param_grads(x, dy, gw_par, gb_par); }, repeats),
           gw_ref == gw_par && gb_ref == gb_par);

    const ccm::Matrix pa = ccm::synth::sample_noise(2000, 2, 3).data;
    const ccm::Matrix pb = ccm::synth::sample_noise(2000, 2, 4).data;
    double e_ref = 0.0, e_par = 0.0;
    report("energy_distance",
           time_ms([&] { e_ref = ccm::reference::energy_distance(pa, pb); }, repeats),
           time_ms([&] { e_par = ccm::eval::energy_distance(pa, pb); }, repeats),
           e_ref == e_par);

    const ccm::Matrix sa = ccm::synth::sample_noise(20000, 2, 5).data;
    const ccm::Matrix sb = ccm::synth::sample_noise(20000, 2, 6).data;
    double s_ref = 0.0, s_par = 0.0;
    report("sliced_wasserstein",
           time_ms([&] { s_ref = ccm::reference::sliced_wasserstein(sa, sb, 128, 1); }, repeats),
           time_ms([&] { s_par = ccm::eval::sliced_wasserstein(sa, sb, 128, 1); }, repeats),
           s_ref == s_par);

    return 0;
}
