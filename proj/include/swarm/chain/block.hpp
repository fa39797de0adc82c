#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/chain/merkle.hpp"
#include "swarm/chain/message.hpp"

namespace swarm::chain {

struct InvalidMessage : Error {
    explicit InvalidMessage(std::size_t index)
        : Error("message " + std::to_string(index) + " fails signature verification"), index(index) {}
    std::size_t index;
};

struct EmptyBlock : Error {
    EmptyBlock() : Error("non-genesis block with no messages") {}
};

struct RejectedBlock : Error {
    RejectedBlock() : Error("block fails verification against the chain tip") {}
};

/// Ledger unit. `block_hash` covers the header (prev_hash, tx_root,
/// timestamp, nonce, packager); message bytes are committed through
/// `tx_root`, the Merkle root over their signed encodings.
struct Block {
    Digest prev_hash;
    Digest tx_root;
    std::vector<SignedMessage> messages;
    std::uint64_t timestamp = 0;
    std::int64_t nonce = 0;
    std::string packager;
    Digest block_hash;

    bool operator==(const Block&) const = default;
};

Digest block_header_hash(const Block& b);

/// Genesis: all-zero prev_hash and tx_root, no messages, timestamp 0.
Block genesis_block();

/// Packages verified messages. Throws InvalidMessage for any message whose
/// signature does not check out, EmptyBlock for an empty non-genesis list.
Block build_block(const Digest& prev, std::vector<SignedMessage> msgs, std::uint64_t timestamp,
                  std::int64_t nonce, const std::string& packager, const KeyStore& keys);

/// Full structural check of `b` as the successor of `prev`: hash link,
/// recomputed tx_root and block_hash, and every message signature.
bool verify_block(const Block& b, const Block& prev, const KeyStore& keys);

struct Chain {
    std::vector<Block> blocks;

    Chain() : blocks{genesis_block()} {}

    const Block& tip() const { return blocks.back(); }
    std::size_t height() const { return blocks.size() - 1; }
};

/// Appends after re-verifying against the tip; throws RejectedBlock.
void append_block(Chain& chain, Block b, const KeyStore& keys);

/// Revalidates the genesis shape, every link and every signature.
bool validate_chain(const Chain& chain, const KeyStore& keys);

/// Keystore-free integrity check of a dumped chain: hash links, recomputed
/// Merkle roots and header hashes. Any single-byte edit of a dump breaks
/// one of them; signature checks additionally need the verify keys.
bool validate_chain_structure(const Chain& chain);

/// JSONL dump: one JSON object per block per line, digests lowercase hex.
std::string block_to_json_line(const Block& b);
Block block_from_json_line(const std::string& line);
std::string chain_to_jsonl(const Chain& chain);
Chain chain_from_jsonl(const std::string& text);

}  // namespace swarm::chain
