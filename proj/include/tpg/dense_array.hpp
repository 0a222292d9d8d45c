#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tpg {

// Dense row-major array of doubles. The only tensor type in the project;
// everything desk-scale, so no views or strides.
class DenseArray {
public:
    DenseArray() = default;
    explicit DenseArray(std::vector<std::size_t> shape);
    DenseArray(std::vector<std::size_t> shape, std::vector<double> values);

    static DenseArray scalar(double v);
    static DenseArray zeros(std::vector<std::size_t> shape);
    static DenseArray full(std::vector<std::size_t> shape, double v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // rank-2 helpers
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    bool same_shape(const DenseArray& other) const { return shape_ == other.shape_; }
    bool bit_identical(const DenseArray& other) const;
    bool all_finite() const;
    void fill(double v);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace tpg
