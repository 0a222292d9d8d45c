#include "tpg/dense_array.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace tpg {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

DenseArray::DenseArray(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

DenseArray::DenseArray(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_product(shape_)) {
        throw std::invalid_argument("DenseArray: " + std::to_string(data_.size()) +
                                    " values do not fill shape " + shape_to_string(shape_));
    }
}

DenseArray DenseArray::scalar(double v) { return DenseArray({1}, {v}); }

DenseArray DenseArray::zeros(std::vector<std::size_t> shape) { return DenseArray(std::move(shape)); }

DenseArray DenseArray::full(std::vector<std::size_t> shape, double v) {
    DenseArray a(std::move(shape));
    a.fill(v);
    return a;
}

std::size_t DenseArray::rows() const {
    if (rank() != 2) throw std::logic_error("rows(): array is not rank-2, shape " + shape_to_string(shape_));
    return shape_[0];
}

std::size_t DenseArray::cols() const {
    if (rank() != 2) throw std::logic_error("cols(): array is not rank-2, shape " + shape_to_string(shape_));
    return shape_[1];
}

double& DenseArray::at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

double DenseArray::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

bool DenseArray::bit_identical(const DenseArray& other) const {
    if (shape_ != other.shape_) return false;
    if (data_.empty()) return true;
    return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

bool DenseArray::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void DenseArray::fill(double v) {
    for (double& x : data_) x = v;
}

}  // namespace tpg
