#include "revlab/isotonic.hpp"

#include "revlab/errors.hpp"

namespace revlab {

std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> w) {
    const std::size_t n = y.size();
    if (!w.empty() && w.size() != n) throw InvalidInput("isotonic regression weights must match the data");

    // blocks kept on a stack: pooled value, total weight, length
    std::vector<double> value, weight;
    std::vector<std::size_t> length;
    value.reserve(n);
    weight.reserve(n);
    length.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = y[i];
        double c = w.empty() ? 1.0 : w[i];
        std::size_t len = 1;
        while (!value.empty() && value.back() > v) {
            const double cw = weight.back() + c;
            v = cw > 0.0 ? (value.back() * weight.back() + v * c) / cw : 0.5 * (value.back() + v);
            c = cw;
            len += length.back();
            value.pop_back();
            weight.pop_back();
            length.pop_back();
        }
        value.push_back(v);
        weight.push_back(c);
        length.push_back(len);
    }

    std::vector<double> out;
    out.reserve(n);
    for (std::size_t b = 0; b < value.size(); ++b) out.insert(out.end(), length[b], value[b]);
    return out;
}

std::size_t count_decreases(std::span<const double> y, double slack) {
    std::size_t bad = 0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i)
        if (y[i] > y[i + 1] + slack) ++bad;
    return bad;
}

}  // namespace revlab
