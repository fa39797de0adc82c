#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "swarm/chain/bytes.hpp"

namespace swarm::chain {

/// 32-byte content fingerprint. Every hash pointer, Merkle node and block
/// id in the ledger is one of these.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    bool operator==(const Digest&) const = default;
    auto operator<=>(const Digest&) const = default;

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    std::string hex() const { return to_hex(bytes); }
    static Digest from_hex_string(const std::string& hex);
};

/// SHA-256 of an arbitrary byte sequence.
Digest sha256(std::span<const std::uint8_t> data);
inline Digest sha256(const Bytes& data) { return sha256(std::span<const std::uint8_t>(data)); }
inline Digest sha256(const std::string& s) {
    return sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

/// HMAC-SHA256 keyed digest; backs the simulation's message signatures.
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

}  // namespace swarm::chain
