#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "swarm/chain/digest.hpp"
#include "swarm/contract/fixed_point.hpp"

namespace swarm::chain {

/// Blockchain account of a device, node or contract. The signing scheme is
/// a keyed MAC exposed through a sign/verify API: `verify_key` is the MAC
/// key handed to validators at registration, so in this simulation it holds
/// the same bytes as `signing_key`. Real deployments would swap in an
/// asymmetric scheme behind the same two functions.
struct Account {
    std::string id;
    Bytes signing_key;
    Bytes verify_key;

    /// Deterministically derives an account from an id and a seed.
    static Account derive(const std::string& id, std::uint64_t seed);
};

/// Registry of verify keys, shared by every validating node.
using KeyStore = std::map<std::string, Bytes>;

enum class MsgFunc : std::uint8_t { Upload = 0, Aggregate = 1 };

/// One signed transaction: either a parameter upload (payload + losses) or
/// an aggregation command (neither). `timestamp` is the logical round.
struct SignedMessage {
    Digest prev_hash;
    std::string owner;
    std::string receiver;
    MsgFunc func = MsgFunc::Upload;
    std::optional<contract::FixedPointVector> payload;
    std::optional<std::pair<double, double>> losses;  // (train, validation)
    std::uint64_t timestamp = 0;
    Bytes signature;

    bool operator==(const SignedMessage&) const = default;
};

/// Canonical byte layout of the signed fields (everything but `signature`),
/// in declaration order with u32 length prefixes and little-endian scalars.
/// Signatures and Merkle leaves are computed over these bytes.
Bytes message_signing_bytes(const SignedMessage& m);

/// Full wire encoding: signing bytes followed by the signature blob.
Bytes encode_message(const SignedMessage& m);
SignedMessage decode_message(std::span<const std::uint8_t> data);

/// Signs the message fields with the account's signing key, returning the
/// completed message.
SignedMessage sign_message(SignedMessage m, const Account& account);

/// True iff `m.signature` matches the signed fields under `verify_key`.
bool verify_message(const SignedMessage& m, const Bytes& verify_key);

/// Looks the owner up in the key store; unknown owners fail verification.
bool verify_message(const SignedMessage& m, const KeyStore& keys);

}  // namespace swarm::chain
