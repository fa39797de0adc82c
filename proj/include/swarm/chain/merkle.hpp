#pragma once

#include <vector>

#include "swarm/chain/digest.hpp"

namespace swarm::chain {

struct EmptyTree : Error {
    EmptyTree() : Error("merkle root of an empty leaf list") {}
};

/// Merkle root over the leaves' digests. Levels with an odd node count
/// duplicate their last node; a single leaf is its own root.
Digest merkle_root(const std::vector<Bytes>& leaves);

/// Sibling path from one leaf to the root.
struct MerkleProof {
    struct Step {
        Digest sibling;
        bool sibling_on_right = false;
    };
    std::vector<Step> steps;
};

MerkleProof merkle_proof(const std::vector<Bytes>& leaves, std::size_t index);

/// Replays the proof from the leaf bytes and compares against `root`.
bool verify_inclusion(const Bytes& leaf, const MerkleProof& proof, const Digest& root);

}  // namespace swarm::chain
