#pragma once

#include <cstddef>
#include <vector>

namespace revlab {

/// Dense cube of doubles indexed [i][j][l], row-major with l fastest.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t n, double fill = 0.0) : n_(n), data_(n * n * n, fill) {}

    std::size_t size() const { return n_; }
    std::size_t count() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t l) { return data_[(i * n_ + j) * n_ + l]; }
    double operator()(std::size_t i, std::size_t j, std::size_t l) const { return data_[(i * n_ + j) * n_ + l]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

}  // namespace revlab
