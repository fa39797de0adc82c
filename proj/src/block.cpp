#include "swarm/chain/block.hpp"

#include <json.hpp>
#include <sstream>

namespace swarm::chain {

using nlohmann::json;

Digest block_header_hash(const Block& b) {
    ByteWriter w;
    w.raw(b.prev_hash.bytes);
    w.raw(b.tx_root.bytes);
    w.u64(b.timestamp);
    w.i64(b.nonce);
    w.str(b.packager);
    return sha256(w.bytes());
}

Block genesis_block() {
    Block g;
    g.block_hash = block_header_hash(g);
    return g;
}

static std::vector<Bytes> message_leaves(const std::vector<SignedMessage>& msgs) {
    std::vector<Bytes> leaves;
    leaves.reserve(msgs.size());
    for (const auto& m : msgs) leaves.push_back(encode_message(m));
    return leaves;
}

Block build_block(const Digest& prev, std::vector<SignedMessage> msgs, std::uint64_t timestamp,
                  std::int64_t nonce, const std::string& packager, const KeyStore& keys) {
    if (msgs.empty()) throw EmptyBlock{};
    for (std::size_t i = 0; i < msgs.size(); ++i)
        if (!verify_message(msgs[i], keys)) throw InvalidMessage(i);
    Block b;
    b.prev_hash = prev;
    b.messages = std::move(msgs);
    b.timestamp = timestamp;
    b.nonce = nonce;
    b.packager = packager;
    b.tx_root = merkle_root(message_leaves(b.messages));
    b.block_hash = block_header_hash(b);
    return b;
}

bool verify_block(const Block& b, const Block& prev, const KeyStore& keys) {
    if (b.prev_hash != prev.block_hash) return false;
    if (b.messages.empty()) return false;
    if (b.tx_root != merkle_root(message_leaves(b.messages))) return false;
    if (b.block_hash != block_header_hash(b)) return false;
    for (const auto& m : b.messages)
        if (!verify_message(m, keys)) return false;
    return true;
}

void append_block(Chain& chain, Block b, const KeyStore& keys) {
    if (!verify_block(b, chain.tip(), keys)) throw RejectedBlock{};
    chain.blocks.push_back(std::move(b));
}

bool validate_chain(const Chain& chain, const KeyStore& keys) {
    if (chain.blocks.empty()) return false;
    const Block& g = chain.blocks.front();
    if (!g.prev_hash.is_zero() || !g.tx_root.is_zero() || !g.messages.empty() || g.timestamp != 0)
        return false;
    if (g.block_hash != block_header_hash(g)) return false;
    for (std::size_t i = 1; i < chain.blocks.size(); ++i)
        if (!verify_block(chain.blocks[i], chain.blocks[i - 1], keys)) return false;
    return true;
}

bool validate_chain_structure(const Chain& chain) {
    if (chain.blocks.empty()) return false;
    const Block& g = chain.blocks.front();
    if (!g.prev_hash.is_zero() || !g.tx_root.is_zero() || !g.messages.empty() || g.timestamp != 0)
        return false;
    if (g.block_hash != block_header_hash(g)) return false;
    for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
        const Block& b = chain.blocks[i];
        if (b.prev_hash != chain.blocks[i - 1].block_hash) return false;
        if (b.messages.empty()) return false;
        if (b.tx_root != merkle_root(message_leaves(b.messages))) return false;
        if (b.block_hash != block_header_hash(b)) return false;
    }
    return true;
}

static json message_to_json(const SignedMessage& m) {
    json j;
    j["prev_hash"] = m.prev_hash.hex();
    j["owner"] = m.owner;
    j["receiver"] = m.receiver;
    j["func"] = m.func == MsgFunc::Upload ? "upload" : "aggregate";
    if (m.payload) {
        j["payload"] = {{"scale", m.payload->scale}, {"values", m.payload->values}};
    } else {
        j["payload"] = nullptr;
    }
    if (m.losses) {
        j["losses"] = {m.losses->first, m.losses->second};
    } else {
        j["losses"] = nullptr;
    }
    j["timestamp"] = m.timestamp;
    j["signature"] = to_hex(m.signature);
    return j;
}

static SignedMessage message_from_json(const json& j) {
    SignedMessage m;
    m.prev_hash = Digest::from_hex_string(j.at("prev_hash").get<std::string>());
    m.owner = j.at("owner").get<std::string>();
    m.receiver = j.at("receiver").get<std::string>();
    const std::string func = j.at("func").get<std::string>();
    if (func == "upload") {
        m.func = MsgFunc::Upload;
    } else if (func == "aggregate") {
        m.func = MsgFunc::Aggregate;
    } else {
        throw Error("unknown message func: " + func);
    }
    if (!j.at("payload").is_null()) {
        contract::FixedPointVector payload;
        payload.scale = j.at("payload").at("scale").get<std::int64_t>();
        payload.values = j.at("payload").at("values").get<std::vector<std::int64_t>>();
        m.payload = std::move(payload);
    }
    if (!j.at("losses").is_null()) {
        m.losses = {j.at("losses").at(0).get<double>(), j.at("losses").at(1).get<double>()};
    }
    m.timestamp = j.at("timestamp").get<std::uint64_t>();
    m.signature = from_hex(j.at("signature").get<std::string>());
    return m;
}

std::string block_to_json_line(const Block& b) {
    json j;
    j["prev_hash"] = b.prev_hash.hex();
    j["tx_root"] = b.tx_root.hex();
    json msgs = json::array();
    for (const auto& m : b.messages) msgs.push_back(message_to_json(m));
    j["messages"] = std::move(msgs);
    j["timestamp"] = b.timestamp;
    j["nonce"] = b.nonce;
    j["packager"] = b.packager;
    j["block_hash"] = b.block_hash.hex();
    return j.dump();
}

Block block_from_json_line(const std::string& line) {
    const json j = json::parse(line);
    Block b;
    b.prev_hash = Digest::from_hex_string(j.at("prev_hash").get<std::string>());
    b.tx_root = Digest::from_hex_string(j.at("tx_root").get<std::string>());
    for (const auto& mj : j.at("messages")) b.messages.push_back(message_from_json(mj));
    b.timestamp = j.at("timestamp").get<std::uint64_t>();
    b.nonce = j.at("nonce").get<std::int64_t>();
    b.packager = j.at("packager").get<std::string>();
    b.block_hash = Digest::from_hex_string(j.at("block_hash").get<std::string>());
    return b;
}

std::string chain_to_jsonl(const Chain& chain) {
    std::string out;
    for (const auto& b : chain.blocks) {
        out += block_to_json_line(b);
        out += '\n';
    }
    return out;
}

Chain chain_from_jsonl(const std::string& text) {
    Chain chain;
    chain.blocks.clear();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        chain.blocks.push_back(block_from_json_line(line));
    }
    if (chain.blocks.empty()) throw Error("empty chain dump");
    return chain;
}

}  // namespace swarm::chain
