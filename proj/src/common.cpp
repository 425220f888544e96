// SPDX-License-Identifier: Apache-2.0
#include "ccm/common.hpp"

namespace ccm {

double mse(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw StructuralError("mse: shape mismatch");
    if (a.size() == 0) throw StructuralError("mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.v.size());
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x00000100000001b3ull;
    }
    return h;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double out = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigError("not a number: '" + s + "'");
    return out;
}

}  // namespace ccm
