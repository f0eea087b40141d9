#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vid/rng.hpp"

namespace vid {

// Dense row-major n-dimensional array of 64-bit floats.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> shp);
    Tensor(std::vector<int> shp, std::vector<double> values);

    static Tensor zeros(std::vector<int> shp) { return Tensor(std::move(shp)); }
    static Tensor full(std::vector<int> shp, double value);
    static Tensor scalar(double value) { return Tensor({1}, {value}); }

    // Fan-in scaled uniform draws, U(-bound, bound).
    static Tensor uniform(std::vector<int> shp, double bound, RngStream& rng);

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    double& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;

    void fill(double value);
    void add_scaled(const Tensor& other, double scale);  // *this += scale * other

    std::string shape_str() const;
};

std::int64_t shape_numel(const std::vector<int>& shape);

}  // namespace vid
