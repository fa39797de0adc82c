#include "swarm/chain/message.hpp"

namespace swarm::chain {

Account Account::derive(const std::string& id, std::uint64_t seed) {
    ByteWriter w;
    w.str(id);
    w.u64(seed);
    const Digest key = sha256(w.bytes());
    Account acct;
    acct.id = id;
    acct.signing_key.assign(key.bytes.begin(), key.bytes.end());
    acct.verify_key = acct.signing_key;
    return acct;
}

Bytes message_signing_bytes(const SignedMessage& m) {
    ByteWriter w;
    w.raw(m.prev_hash.bytes);
    w.str(m.owner);
    w.str(m.receiver);
    w.u8(static_cast<std::uint8_t>(m.func));
    w.u8(m.payload.has_value() ? 1 : 0);
    if (m.payload) {
        w.i64(m.payload->scale);
        w.u32(static_cast<std::uint32_t>(m.payload->values.size()));
        for (std::int64_t v : m.payload->values) w.i64(v);
    }
    w.u8(m.losses.has_value() ? 1 : 0);
    if (m.losses) {
        w.f64(m.losses->first);
        w.f64(m.losses->second);
    }
    w.u64(m.timestamp);
    return w.take();
}

Bytes encode_message(const SignedMessage& m) {
    ByteWriter w;
    w.raw(message_signing_bytes(m));
    w.blob(m.signature);
    return w.take();
}

SignedMessage decode_message(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    SignedMessage m;
    for (auto& b : m.prev_hash.bytes) b = r.u8();
    m.owner = r.str();
    m.receiver = r.str();
    const std::uint8_t func = r.u8();
    if (func > 1) throw Error("unknown message function code");
    m.func = static_cast<MsgFunc>(func);
    if (r.u8() != 0) {
        contract::FixedPointVector payload;
        payload.scale = r.i64();
        const std::uint32_t n = r.u32();
        payload.values.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) payload.values.push_back(r.i64());
        m.payload = std::move(payload);
    }
    if (r.u8() != 0) {
        const double train = r.f64();
        const double val = r.f64();
        m.losses = {train, val};
    }
    m.timestamp = r.u64();
    m.signature = r.blob();
    if (!r.exhausted()) throw Error("trailing bytes after message");
    return m;
}

SignedMessage sign_message(SignedMessage m, const Account& account) {
    const Bytes body = message_signing_bytes(m);
    const Digest mac = hmac_sha256(account.signing_key, body);
    m.signature.assign(mac.bytes.begin(), mac.bytes.end());
    return m;
}

bool verify_message(const SignedMessage& m, const Bytes& verify_key) {
    if (m.signature.size() != 32) return false;
    const Digest mac = hmac_sha256(verify_key, message_signing_bytes(m));
    return std::equal(mac.bytes.begin(), mac.bytes.end(), m.signature.begin());
}

bool verify_message(const SignedMessage& m, const KeyStore& keys) {
    const auto it = keys.find(m.owner);
    if (it == keys.end()) return false;
    return verify_message(m, it->second);
}

}  // namespace swarm::chain
