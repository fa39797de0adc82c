#include "swarm/contract/fixed_point.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace swarm::contract {

FixedPointVector quantize(const Eigen::VectorXd& x, std::int64_t scale) {
    FixedPointVector out;
    out.scale = scale;
    out.values.resize(static_cast<std::size_t>(x.size()));
    if (scale == 0) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out.values[static_cast<std::size_t>(i)] = std::bit_cast<std::int64_t>(x[i]);
        return out;
    }
    constexpr double kLimit = 9.2233720368547e18;  // just under int64 max
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double scaled = x[i] * static_cast<double>(scale);
        if (!std::isfinite(scaled) || std::abs(scaled) >= kLimit) throw Overflow(i);
        // llround rounds half away from zero, the documented rule.
        out.values[static_cast<std::size_t>(i)] = std::llround(scaled);
    }
    return out;
}

Eigen::VectorXd dequantize(const FixedPointVector& v) {
    Eigen::VectorXd out(v.size());
    if (v.scale == 0) {
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out[i] = std::bit_cast<double>(v.values[static_cast<std::size_t>(i)]);
        return out;
    }
    const double inv = 1.0 / static_cast<double>(v.scale);
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = static_cast<double>(v.values[static_cast<std::size_t>(i)]) * inv;
    return out;
}

}  // namespace swarm::contract
