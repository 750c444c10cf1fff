#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace surefire {

// Dense row-major tensor of doubles.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(count(), 0.0);
    }
    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count()) throw std::invalid_argument("tensor shape/data mismatch");
    }

    std::size_t count() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // h x w x c layout
    double& at3(std::size_t y, std::size_t x, std::size_t c) {
        return data[(y * shape[1] + x) * shape[2] + c];
    }
    double at3(std::size_t y, std::size_t x, std::size_t c) const {
        return data[(y * shape[1] + x) * shape[2] + c];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace surefire
