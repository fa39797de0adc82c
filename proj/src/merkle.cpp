#include "swarm/chain/merkle.hpp"

namespace swarm::chain {

namespace {

Digest combine(const Digest& left, const Digest& right) {
    ByteWriter w;
    w.raw(left.bytes);
    w.raw(right.bytes);
    return sha256(w.bytes());
}

std::vector<Digest> leaf_level(const std::vector<Bytes>& leaves) {
    std::vector<Digest> level;
    level.reserve(leaves.size());
    for (const Bytes& leaf : leaves) level.push_back(sha256(leaf));
    return level;
}

}  // namespace

Digest merkle_root(const std::vector<Bytes>& leaves) {
    if (leaves.empty()) throw EmptyTree{};
    std::vector<Digest> level = leaf_level(leaves);
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<Digest> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) next.push_back(combine(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level.front();
}

MerkleProof merkle_proof(const std::vector<Bytes>& leaves, std::size_t index) {
    if (leaves.empty()) throw EmptyTree{};
    if (index >= leaves.size()) throw Error("merkle proof index out of range");
    MerkleProof proof;
    std::vector<Digest> level = leaf_level(leaves);
    std::size_t pos = index;
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        const std::size_t sibling = (pos % 2 == 0) ? pos + 1 : pos - 1;
        proof.steps.push_back({level[sibling], pos % 2 == 0});
        std::vector<Digest> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) next.push_back(combine(level[i], level[i + 1]));
        level = std::move(next);
        pos /= 2;
    }
    return proof;
}

bool verify_inclusion(const Bytes& leaf, const MerkleProof& proof, const Digest& root) {
    Digest node = sha256(leaf);
    for (const auto& step : proof.steps)
        node = step.sibling_on_right ? combine(node, step.sibling) : combine(step.sibling, node);
    return node == root;
}

}  // namespace swarm::chain
