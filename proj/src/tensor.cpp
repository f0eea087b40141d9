#include "vid/tensor.hpp"

#include <cmath>
#include <sstream>

#include "vid/errors.hpp"

namespace vid {

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shp) : shape(std::move(shp)) {
    data.assign(static_cast<std::size_t>(shape_numel(shape)), 0.0);
}

Tensor::Tensor(std::vector<int> shp, std::vector<double> values) : shape(std::move(shp)), data(std::move(values)) {
    if (shape_numel(shape) != static_cast<std::int64_t>(data.size()))
        throw ShapeError("tensor data length does not match shape");
}

Tensor Tensor::full(std::vector<int> shp, double value) {
    Tensor t(std::move(shp));
    t.fill(value);
    return t;
}

Tensor Tensor::uniform(std::vector<int> shp, double bound, RngStream& rng) {
    Tensor t(std::move(shp));
    for (double& v : t.data) v = rng.uniform_real(-bound, bound);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(double value) {
    for (double& v : data) v = value;
}

void Tensor::add_scaled(const Tensor& other, double scale) {
    if (!same_shape(other)) throw ShapeError("add_scaled: shape mismatch");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += scale * other.data[i];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

}  // namespace vid
