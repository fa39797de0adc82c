#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "swarm/errors.hpp"

namespace swarm::contract {

struct Overflow : Error {
    explicit Overflow(Eigen::Index index)
        : Error("value at index " + std::to_string(index) + " exceeds the fixed-point range"), index(index) {}
    Eigen::Index index;
};

/// Integer encoding of a real parameter vector for on-chain transport.
///
/// `scale` is a power of ten: element i stores round(x_i * scale), rounded
/// half away from zero. `scale == 0` selects the exact passthrough mode:
/// each element stores the IEEE-754 bit pattern of the double, which makes
/// encode/decode lossless (used when runs disable quantization).
struct FixedPointVector {
    std::vector<std::int64_t> values;
    std::int64_t scale = 0;

    bool operator==(const FixedPointVector&) const = default;
    Eigen::Index size() const { return static_cast<Eigen::Index>(values.size()); }
};

FixedPointVector quantize(const Eigen::VectorXd& x, std::int64_t scale);
Eigen::VectorXd dequantize(const FixedPointVector& v);

}  // namespace swarm::contract
