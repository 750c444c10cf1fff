#pragma once

#include "surefire/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace surefire {

inline bool all_finite(const Tensor& t) {
    return std::all_of(t.data.begin(), t.data.end(), [](double v) { return std::isfinite(v); });
}

struct Layer {
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& in) = 0;
    virtual Tensor backward(const Tensor& dout) = 0;  // accumulates parameter grads
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    virtual std::string descriptor() const = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;
};

// Valid cross-correlation, stride 1. Kernels k x k x C x F.
struct Conv2d final : Layer {
    std::size_t ksize, in_ch, out_ch;
    Tensor kernels, bias, dkernels, dbias;
    Tensor cached_in;

    Conv2d(std::size_t k, std::size_t cin, std::size_t cout)
        : ksize(k), in_ch(cin), out_ch(cout),
          kernels({k, k, cin, cout}), bias({cout}),
          dkernels({k, k, cin, cout}), dbias({cout}) {}

    double& kval(Tensor& t, std::size_t dy, std::size_t dx, std::size_t c, std::size_t f) {
        return t.data[((dy * ksize + dx) * in_ch + c) * out_ch + f];
    }

    Tensor forward(const Tensor& in) override {
        if (in.shape.size() != 3 || in.shape[2] != in_ch || in.shape[0] < ksize || in.shape[1] < ksize)
            throw std::invalid_argument("conv2d shape mismatch");
        cached_in = in;
        const std::size_t oh = in.shape[0] - ksize + 1, ow = in.shape[1] - ksize + 1;
        Tensor out({oh, ow, out_ch});
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t f = 0; f < out_ch; ++f) {
                    double acc = bias[f];
                    for (std::size_t dy = 0; dy < ksize; ++dy)
                        for (std::size_t dx = 0; dx < ksize; ++dx)
                            for (std::size_t c = 0; c < in_ch; ++c)
                                acc += in.at3(y + dy, x + dx, c) * kval(kernels, dy, dx, c, f);
                    out.at3(y, x, f) = acc;
                }
        return out;
    }

    Tensor backward(const Tensor& dout) override {
        const std::size_t oh = dout.shape[0], ow = dout.shape[1];
        Tensor din(cached_in.shape);
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t f = 0; f < out_ch; ++f) {
                    double g = dout.at3(y, x, f);
                    dbias[f] += g;
                    for (std::size_t dy = 0; dy < ksize; ++dy)
                        for (std::size_t dx = 0; dx < ksize; ++dx)
                            for (std::size_t c = 0; c < in_ch; ++c) {
                                kval(dkernels, dy, dx, c, f) += cached_in.at3(y + dy, x + dx, c) * g;
                                din.at3(y + dy, x + dx, c) += kval(kernels, dy, dx, c, f) * g;
                            }
                }
        return din;
    }

    std::vector<Tensor*> params() override { return {&kernels, &bias}; }
    std::vector<Tensor*> grads() override { return {&dkernels, &dbias}; }
    std::string descriptor() const override {
        return "conv" + std::to_string(ksize) + "x" + std::to_string(ksize) + ":" +
               std::to_string(in_ch) + ">" + std::to_string(out_ch);
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }
};

struct Relu final : Layer {
    Tensor cached_in;
    Tensor forward(const Tensor& in) override {
        cached_in = in;
        Tensor out = in;
        for (double& v : out.data) v = std::max(0.0, v);
        return out;
    }
    Tensor backward(const Tensor& dout) override {
        Tensor din = dout;
        for (std::size_t i = 0; i < din.data.size(); ++i)
            if (cached_in.data[i] <= 0.0) din.data[i] = 0.0;
        return din;
    }
    std::string descriptor() const override { return "relu"; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
};

struct Flatten final : Layer {
    std::vector<std::size_t> cached_shape;
    Tensor forward(const Tensor& in) override {
        cached_shape = in.shape;
        return Tensor({in.count()}, in.data);
    }
    Tensor backward(const Tensor& dout) override { return Tensor(cached_shape, dout.data); }
    std::string descriptor() const override { return "flatten"; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
};

struct Dense final : Layer {
    std::size_t in_n, out_n;
    Tensor weights, bias, dweights, dbias;
    Tensor cached_in;

    Dense(std::size_t n, std::size_t m)
        : in_n(n), out_n(m), weights({n, m}), bias({m}), dweights({n, m}), dbias({m}) {}

    Tensor forward(const Tensor& in) override {
        if (in.count() != in_n) throw std::invalid_argument("dense shape mismatch");
        cached_in = in;
        Tensor out({out_n});
        for (std::size_t m = 0; m < out_n; ++m) out[m] = bias[m];
        for (std::size_t n = 0; n < in_n; ++n) {
            double v = in[n];
            if (v == 0.0) continue;
            const double* w = &weights.data[n * out_n];
            for (std::size_t m = 0; m < out_n; ++m) out[m] += v * w[m];
        }
        return out;
    }

    Tensor backward(const Tensor& dout) override {
        Tensor din({in_n});
        for (std::size_t m = 0; m < out_n; ++m) dbias[m] += dout[m];
        for (std::size_t n = 0; n < in_n; ++n) {
            double acc = 0.0, v = cached_in[n];
            const double* w = &weights.data[n * out_n];
            double* dw = &dweights.data[n * out_n];
            for (std::size_t m = 0; m < out_n; ++m) {
                acc += w[m] * dout[m];
                dw[m] += v * dout[m];
            }
            din[n] = acc;
        }
        return din;
    }

    std::vector<Tensor*> params() override { return {&weights, &bias}; }
    std::vector<Tensor*> grads() override { return {&dweights, &dbias}; }
    std::string descriptor() const override {
        return "dense:" + std::to_string(in_n) + ">" + std::to_string(out_n);
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
};

class Network {
public:
    Network() = default;
    Network(const Network& o) { *this = o; }
    Network& operator=(const Network& o) {
        layers_.clear();
        for (const auto& l : o.layers_) layers_.push_back(l->clone());
        return *this;
    }
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    template <typename L, typename... Args>
    void add(Args&&... args) {
        layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
    }

    Tensor forward(const Tensor& input) {
        Tensor t = input;
        for (auto& l : layers_) t = l->forward(t);
        return t;
    }

    // dout = d(loss)/d(output); parameter grads accumulate into grads().
    Tensor backward(const Tensor& dout) {
        Tensor t = dout;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) t = (*it)->backward(t);
        return t;
    }

    std::vector<Tensor*> params() {
        std::vector<Tensor*> out;
        for (auto& l : layers_)
            for (Tensor* p : l->params()) out.push_back(p);
        return out;
    }
    std::vector<Tensor*> grads() {
        std::vector<Tensor*> out;
        for (auto& l : layers_)
            for (Tensor* g : l->grads()) out.push_back(g);
        return out;
    }
    void zero_grads() {
        for (Tensor* g : grads()) std::fill(g->data.begin(), g->data.end(), 0.0);
    }

    std::string descriptor() const {
        std::string d;
        for (const auto& l : layers_) {
            if (!d.empty()) d += ";";
            d += l->descriptor();
        }
        return d;
    }

    // He-normal weights, zero biases, deterministic per seed.
    void init_he(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        for (auto& l : layers_) {
            auto ps = l->params();
            if (ps.empty()) continue;
            Tensor* w = ps[0];
            std::size_t fan_in = w->count() / w->shape.back();
            std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
            for (double& v : w->data) v = dist(rng);
            for (std::size_t i = 1; i < ps.size(); ++i)
                std::fill(ps[i]->data.begin(), ps[i]->data.end(), 0.0);
        }
    }

    bool params_finite() {
        for (Tensor* p : params())
            if (!all_finite(*p)) return false;
        return true;
    }

    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// conv3x3 4>8, relu, conv3x3 8>16, relu, flatten, dense 64, relu, head.
// heads = 18 for DQN / constant, 19 for PPO (18 logits + 1 value).
inline Network build_default_network(std::size_t heads) {
    Network net;
    net.add<Conv2d>(3, 4, 8);
    net.add<Relu>();
    net.add<Conv2d>(3, 8, 16);
    net.add<Relu>();
    net.add<Flatten>();
    net.add<Dense>(8 * 8 * 16, 64);
    net.add<Relu>();
    net.add<Dense>(64, heads);
    return net;
}

// --- serialization: magic, descriptor, metadata, little-endian doubles ---

constexpr char kNetMagic[8] = {'S', 'F', 'N', 'E', 'T', '0', '0', '1'};

inline void save_network(const Network& net, const std::string& path,
                         const std::string& metadata = "") {
    Network& mut = const_cast<Network&>(net);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(kNetMagic, sizeof kNetMagic);
    auto write_str = [&](const std::string& s) {
        std::uint64_t n = s.size();
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    };
    write_str(net.descriptor());
    write_str(metadata);
    std::uint64_t total = 0;
    for (Tensor* p : mut.params()) total += p->count();
    out.write(reinterpret_cast<const char*>(&total), sizeof total);
    for (Tensor* p : mut.params())
        out.write(reinterpret_cast<const char*>(p->data.data()),
                  static_cast<std::streamsize>(p->data.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Loads parameters into a network of matching architecture; returns metadata.
inline std::string load_network(Network& net, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kNetMagic, sizeof magic) != 0)
        throw std::runtime_error(path + ": not a network parameter file");
    auto read_str = [&]() {
        std::uint64_t n = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof n);
        std::string s(n, '\0');
        in.read(s.data(), static_cast<std::streamsize>(n));
        return s;
    };
    std::string desc = read_str();
    std::string metadata = read_str();
    if (desc != net.descriptor())
        throw std::runtime_error(path + ": architecture mismatch (file: " + desc +
                                 ", expected: " + net.descriptor() + ")");
    std::uint64_t total = 0;
    in.read(reinterpret_cast<char*>(&total), sizeof total);
    std::uint64_t expect = 0;
    for (Tensor* p : net.params()) expect += p->count();
    if (!in || total != expect) throw std::runtime_error(path + ": parameter count mismatch");
    for (Tensor* p : net.params())
        in.read(reinterpret_cast<char*>(p->data.data()),
                static_cast<std::streamsize>(p->data.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated parameter file");
    return metadata;
}

// --- activations ---

inline std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - mx);
    for (double& v : out) v /= sum;
    return out;
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// --- Adam ---

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(Network& net, AdamConfig cfg = {}) : cfg_(cfg) {
        for (Tensor* p : net.params()) {
            m_.emplace_back(p->shape);
            v_.emplace_back(p->shape);
        }
    }

    // One bias-corrected update from the network's accumulated grads.
    void step(Network& net) {
        auto ps = net.params();
        auto gs = net.grads();
        if (ps.size() != m_.size()) throw std::invalid_argument("adam/network mismatch");
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            Tensor& p = *ps[i];
            const Tensor& g = *gs[i];
            for (std::size_t j = 0; j < p.data.size(); ++j) {
                double gj = g.data[j];
                m_[i].data[j] = cfg_.beta1 * m_[i].data[j] + (1.0 - cfg_.beta1) * gj;
                v_[i].data[j] = cfg_.beta2 * v_[i].data[j] + (1.0 - cfg_.beta2) * gj * gj;
                double mhat = m_[i].data[j] / bc1;
                double vhat = v_[i].data[j] / bc2;
                p.data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    std::uint64_t step_count() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<Tensor> m_, v_;
    std::uint64_t t_ = 0;
};

}  // namespace surefire
