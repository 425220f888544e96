// SPDX-License-Identifier: Apache-2.0
#include "ccm/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ccm/common.hpp"

namespace ccm::io {

namespace {

constexpr char kMagic[4] = {'C', 'C', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
  public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>(v >> (8 * i)));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    std::size_t size() const { return buf_.size(); }
    const std::vector<char>& bytes() const { return buf_; }

  private:
    std::vector<char> buf_;
};

class Reader {
  public:
    Reader(const char* p, std::size_t n) : p_(p), n_(n) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() {
        const char* q = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(q[i])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const char* q = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(q[i])) << (8 * i);
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::size_t pos() const { return off_; }
    std::size_t remaining() const { return n_ - off_; }

  private:
    const char* take(std::size_t n) {
        if (off_ + n > n_) throw IoError("checkpoint: truncated file");
        const char* q = p_ + off_;
        off_ += n;
        return q;
    }
    const char* p_;
    std::size_t n_;
    std::size_t off_ = 0;
};

// Parameters serialize as f32 in the contract's row-major (out x in) order;
// in memory they are doubles in input-major order.
void write_params(Writer& w, const std::vector<nnet::Layer>& layers) {
    for (const auto& l : layers) {
        for (std::size_t o = 0; o < l.out; ++o)
            for (std::size_t i = 0; i < l.in; ++i)
                w.f32(static_cast<float>(l.w[i * l.out + o]));
        for (std::size_t o = 0; o < l.out; ++o)
            w.f32(static_cast<float>(l.b[o]));
    }
}

void read_params(Reader& r, std::vector<nnet::Layer>& layers) {
    for (auto& l : layers) {
        for (std::size_t o = 0; o < l.out; ++o)
            for (std::size_t i = 0; i < l.in; ++i)
                l.w[i * l.out + o] = static_cast<double>(r.f32());
        for (std::size_t o = 0; o < l.out; ++o)
            l.b[o] = static_cast<double>(r.f32());
    }
}

std::vector<nnet::Layer> empty_layers_like(const std::vector<nnet::Layer>& shape) {
    std::vector<nnet::Layer> out;
    for (const auto& l : shape) {
        nnet::Layer e;
        e.in = l.in;
        e.out = l.out;
        e.w.assign(l.in * l.out, 0.0);
        e.b.assign(l.out, 0.0);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    ckpt.params.validate();
    if (ckpt.ema && ckpt.ema->layers.size() != ckpt.params.layers.size())
        throw StructuralError("checkpoint: ema topology mismatch");
    Writer w;
    w.raw(kMagic, 4);
    w.u32(kVersion);
    w.u32(ckpt.params.act == nnet::Activation::Tanh ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(ckpt.params.embed.width));
    w.u32(static_cast<std::uint32_t>(ckpt.params.layers.size()));
    for (const auto& l : ckpt.params.layers) {
        w.u32(static_cast<std::uint32_t>(l.in));
        w.u32(static_cast<std::uint32_t>(l.out));
    }
    w.u8(ckpt.opt ? 1 : 0);
    w.u8(ckpt.ema ? 1 : 0);
    w.u64(ckpt.meta.seed);
    w.u64(ckpt.meta.iterations);
    w.u64(ckpt.meta.config_hash);
    w.u64(fnv1a64(w.bytes().data(), w.size()));
    const std::size_t body_start = w.size();

    write_params(w, ckpt.params.layers);
    if (ckpt.opt) {
        w.u64(ckpt.opt->step);
        w.f64(ckpt.opt->lr);
        w.f64(ckpt.opt->beta1);
        w.f64(ckpt.opt->beta2);
        w.f64(ckpt.opt->eps);
        write_params(w, ckpt.opt->m);
        write_params(w, ckpt.opt->v);
    }
    if (ckpt.ema) write_params(w, ckpt.ema->layers);
    w.u64(fnv1a64(w.bytes().data() + body_start, w.size() - body_start));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + path.string());
    f.write(w.bytes().data(), static_cast<std::streamsize>(w.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(f)),
                            std::istreambuf_iterator<char>());
    Reader r(bytes.data(), bytes.size());

    char magic[4];
    std::memcpy(magic, bytes.data(), std::min<std::size_t>(4, bytes.size()));
    if (bytes.size() < 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("checkpoint: bad magic bytes");
    r.u32();  // skip magic (already validated)
    const std::uint32_t version = r.u32();
    if (version == 0 || version > kVersion)
        throw IoError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ckpt;
    const std::uint32_t act_id = r.u32();
    if (act_id > 1) throw IoError("checkpoint: bad activation id");
    ckpt.params.act = act_id == 0 ? nnet::Activation::Tanh : nnet::Activation::Silu;
    ckpt.params.embed.width = r.u32();
    const std::uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 1024) throw IoError("checkpoint: bad layer count");
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        nnet::Layer l;
        l.in = r.u32();
        l.out = r.u32();
        if (l.in == 0 || l.out == 0 || l.in > (1u << 20) || l.out > (1u << 20))
            throw IoError("checkpoint: bad layer dims");
        l.w.assign(l.in * l.out, 0.0);
        l.b.assign(l.out, 0.0);
        ckpt.params.layers.push_back(std::move(l));
    }
    const bool has_opt = r.u8() != 0;
    const bool has_ema = r.u8() != 0;
    ckpt.meta.seed = r.u64();
    ckpt.meta.iterations = r.u64();
    ckpt.meta.config_hash = r.u64();
    const std::size_t header_end = r.pos();
    const std::uint64_t header_hash = r.u64();
    if (fnv1a64(bytes.data(), header_end) != header_hash)
        throw IoError("checkpoint: header hash mismatch");

    const std::size_t body_start = r.pos();
    const std::size_t param_count = ckpt.params.param_count();
    std::size_t expected = param_count * 4;
    if (has_opt) expected += 8 + 4 * 8 + 2 * param_count * 4;
    if (has_ema) expected += param_count * 4;
    expected += 8;  // trailing hash
    if (r.remaining() != expected)
        throw IoError("checkpoint: payload length does not match topology");

    read_params(r, ckpt.params.layers);
    if (has_opt) {
        nnet::AdamState opt;
        opt.step = r.u64();
        opt.lr = r.f64();
        opt.beta1 = r.f64();
        opt.beta2 = r.f64();
        opt.eps = r.f64();
        opt.m = empty_layers_like(ckpt.params.layers);
        opt.v = empty_layers_like(ckpt.params.layers);
        read_params(r, opt.m);
        read_params(r, opt.v);
        ckpt.opt = std::move(opt);
    }
    if (has_ema) {
        nnet::MlpParams ema;
        ema.act = ckpt.params.act;
        ema.embed = ckpt.params.embed;
        ema.layers = empty_layers_like(ckpt.params.layers);
        read_params(r, ema.layers);
        ckpt.ema = std::move(ema);
    }
    const std::size_t body_end = r.pos();
    const std::uint64_t file_hash = r.u64();
    if (fnv1a64(bytes.data() + body_start, body_end - body_start) != file_hash)
        throw IoError("checkpoint: payload hash mismatch");

    ckpt.params.validate();
    if (ckpt.ema) ckpt.ema->validate();
    return ckpt;
}

}  // namespace ccm::io
