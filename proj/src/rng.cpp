#include "swarm/rng.hpp"

#include <string>

#include "swarm/chain/digest.hpp"

namespace swarm {

std::uint64_t derive_seed(std::uint64_t parent, const std::string& tag) {
    chain::ByteWriter w;
    w.u64(parent);
    w.str(tag);
    const chain::Digest d = chain::sha256(w.bytes());
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
    return out;
}

}  // namespace swarm
