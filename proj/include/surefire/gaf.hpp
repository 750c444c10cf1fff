#pragma once

#include "surefire/candle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace surefire {

using RescaledSeries = std::array<double, kWindowSize>;
using GasfMatrix = std::array<double, kWindowSize * kWindowSize>;

// 12x12x4 GASF tensor; channel order (open, high, low, close).
struct GafState {
    static constexpr std::size_t kChannels = 4;
    std::array<GasfMatrix, kChannels> channels;

    double at(std::size_t row, std::size_t col, std::size_t ch) const {
        return channels[ch][row * kWindowSize + col];
    }
    bool operator==(const GafState&) const = default;
};

// Min-max rescale into [-1, 1]; a constant series maps to all zeros.
inline RescaledSeries rescale(const std::array<double, kWindowSize>& values) {
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite input to rescale");
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    RescaledSeries out{};
    if (hi == lo) return out;
    for (std::size_t i = 0; i < kWindowSize; ++i)
        out[i] = 2.0 * (values[i] - lo) / (hi - lo) - 1.0;
    return out;
}

// G_ij = cos(phi_i + phi_j), phi = arccos(clamp(x, -1, 1)).
inline GasfMatrix gasf(const RescaledSeries& x) {
    std::array<double, kWindowSize> phi;
    for (std::size_t i = 0; i < kWindowSize; ++i)
        phi[i] = std::acos(std::clamp(x[i], -1.0, 1.0));
    GasfMatrix g;
    for (std::size_t i = 0; i < kWindowSize; ++i)
        for (std::size_t j = 0; j < kWindowSize; ++j)
            g[i * kWindowSize + j] = std::cos(phi[i] + phi[j]);
    return g;
}

inline GafState encode_window(CandleWindow window) {
    std::array<std::array<double, kWindowSize>, 4> raw;
    for (std::size_t i = 0; i < kWindowSize; ++i) {
        raw[0][i] = static_cast<double>(window[i].open);
        raw[1][i] = static_cast<double>(window[i].high);
        raw[2][i] = static_cast<double>(window[i].low);
        raw[3][i] = static_cast<double>(window[i].close);
    }
    GafState state;
    for (std::size_t c = 0; c < GafState::kChannels; ++c)
        state.channels[c] = gasf(rescale(raw[c]));
    return state;
}

// -1 -> blue, 0 -> white, +1 -> red.
inline std::array<std::uint8_t, 3> heat_color(double v) {
    v = std::clamp(v, -1.0, 1.0);
    auto ch = [](double t) { return static_cast<std::uint8_t>(std::lround(255.0 * t)); };
    if (v < 0.0) return {ch(1.0 + v), ch(1.0 + v), 255};
    return {255, ch(1.0 - v), ch(1.0 - v)};
}

// Binary PPM (P6), 12*zoom square, maxval 255.
inline void export_heatmap(const GafState& state, std::size_t channel, const std::string& path,
                           std::size_t zoom = 16) {
    if (channel >= GafState::kChannels) throw std::invalid_argument("channel out of range");
    if (zoom == 0) throw std::invalid_argument("zoom must be positive");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const std::size_t side = kWindowSize * zoom;
    out << "P6\n" << side << ' ' << side << "\n255\n";
    for (std::size_t py = 0; py < side; ++py) {
        for (std::size_t px = 0; px < side; ++px) {
            auto rgb = heat_color(state.at(py / zoom, px / zoom, channel));
            out.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace surefire
