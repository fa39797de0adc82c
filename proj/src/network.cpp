#include "swarm/consensus/network.hpp"

#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "swarm/rng.hpp"

namespace swarm::consensus {

using nlohmann::json;

BehaviorKind behavior_from_name(const std::string& name) {
    if (name == "honest") return BehaviorKind::Honest;
    if (name == "silent") return BehaviorKind::Silent;
    if (name == "bad_packager") return BehaviorKind::BadPackager;
    if (name == "bad_voter") return BehaviorKind::BadVoter;
    throw Error("unknown behavior: " + name);
}

std::string behavior_name(BehaviorKind kind) {
    switch (kind) {
        case BehaviorKind::Honest: return "honest";
        case BehaviorKind::Silent: return "silent";
        case BehaviorKind::BadPackager: return "bad_packager";
        case BehaviorKind::BadVoter: return "bad_voter";
    }
    throw Error("unknown behavior kind");
}

Vote sign_vote(const chain::Account& account, const chain::Digest& block_hash, bool accept) {
    chain::ByteWriter w;
    w.raw(block_hash.bytes);
    w.u8(accept ? 1 : 0);
    const chain::Digest mac = chain::hmac_sha256(account.signing_key, w.bytes());
    Vote vote;
    vote.node_id = account.id;
    vote.block_hash = block_hash;
    vote.accept = accept;
    vote.signature.assign(mac.bytes.begin(), mac.bytes.end());
    return vote;
}

bool verify_vote(const Vote& vote, const chain::KeyStore& keys) {
    const auto it = keys.find(vote.node_id);
    if (it == keys.end() || vote.signature.size() != 32) return false;
    chain::ByteWriter w;
    w.raw(vote.block_hash.bytes);
    w.u8(vote.accept ? 1 : 0);
    const chain::Digest mac = chain::hmac_sha256(it->second, w.bytes());
    return std::equal(mac.bytes.begin(), mac.bytes.end(), vote.signature.begin());
}

std::vector<FaultEvent> parse_scenario(const std::string& json_text) {
    const json j = json::parse(json_text);
    std::vector<FaultEvent> events;
    for (const auto& e : j.at("faults")) {
        FaultEvent event;
        event.round = e.at("round").get<std::uint64_t>();
        event.node = e.at("node").get<std::string>();
        event.behavior.kind = behavior_from_name(e.at("behavior").get<std::string>());
        events.push_back(std::move(event));
    }
    return events;
}

std::string commit_log_to_csv(const std::vector<CommitLogRow>& rows) {
    std::ostringstream out;
    out << "round,leader,votes_for,votes_against,result\n";
    for (const CommitLogRow& r : rows)
        out << r.round << ',' << r.leader << ',' << r.votes_for << ',' << r.votes_against << ','
            << r.result << '\n';
    return out.str();
}

Network::Network(const NetworkConfig& config, const contract::ContractState& deployed,
                 const std::string& contract_account, chain::KeyStore device_keys)
    : config_(config), contract_account_(contract_account), device_keys_(std::move(device_keys)) {
    if (!(config.quorum_fraction > 0.5 && config.quorum_fraction <= 1.0))
        throw Error("quorum fraction must lie in (1/2, 1]");
    if (config.orgs < 1 || config.nodes_per_org < 1) throw Error("topology needs at least one node");

    for (int o = 0; o < config.orgs; ++o) {
        for (int s = 0; s < config.nodes_per_org; ++s) {
            Node node;
            node.id = "o" + std::to_string(o) + "n" + std::to_string(s);
            node.org = o;
            node.account = chain::Account::derive(node.id, derive_seed(config.leader_seed, node.id));
            node.contract = deployed;
            nodes_.push_back(std::move(node));
        }
    }
    for (const Node& n : nodes_) node_keys_[n.id] = n.account.verify_key;

    schedule_.resize(nodes_.size());
    std::iota(schedule_.begin(), schedule_.end(), 0);
    Rng rng(derive_seed(config.leader_seed, "leader-schedule"));
    rng.shuffle(schedule_);
}

const std::string& Network::select_packager(std::uint64_t round_slot) const {
    return nodes_[schedule_[round_slot % schedule_.size()]].id;
}

void Network::inject_fault(const std::string& node_id, Behavior behavior) {
    for (Node& n : nodes_) {
        if (n.id == node_id) {
            n.behavior = behavior;
            return;
        }
    }
    throw Error("no such node: " + node_id);
}

const Node& Network::first_honest() const {
    // canonical replica: the most advanced honest node (a node healed
    // after a crash may legitimately sit a few blocks behind)
    const Node* best = nullptr;
    for (const Node& n : nodes_) {
        if (n.behavior.kind != BehaviorKind::Honest) continue;
        if (!best || n.chain.blocks.size() > best->chain.blocks.size()) best = &n;
    }
    if (!best) throw Error("network has no honest node");
    return *best;
}

const contract::ContractState& Network::contract_view() const { return first_honest().contract; }
const chain::Chain& Network::chain_view() const { return first_honest().chain; }

bool Network::honest_views_consistent() const {
    // safety: honest chains never conflict at a shared height, and honest
    // replicas at the canonical height agree on the contract state
    const Node& canonical = first_honest();
    for (const Node& n : nodes_) {
        if (n.behavior.kind != BehaviorKind::Honest) continue;
        if (n.chain.blocks.size() > canonical.chain.blocks.size()) return false;
        for (std::size_t h = 0; h < n.chain.blocks.size(); ++h)
            if (!(n.chain.blocks[h] == canonical.chain.blocks[h])) return false;
        if (n.chain.blocks.size() == canonical.chain.blocks.size() &&
            !(n.contract == canonical.contract))
            return false;
    }
    return true;
}

void Network::provision(const std::function<void(contract::ContractState&)>& mutate) {
    for (Node& n : nodes_) mutate(n.contract);
}

/// Dry-runs the block's messages against a copy of the node's replica.
/// SamplingNotMet is a recorded no-op on-chain; every other contract error
/// marks the proposal invalid.
static bool messages_apply_cleanly(const contract::ContractState& state,
                                   const chain::Block& candidate) {
    contract::ContractState scratch = state;
    for (const chain::SignedMessage& m : candidate.messages) {
        try {
            if (m.func == chain::MsgFunc::Upload) {
                if (!m.payload || !m.losses) return false;
                contract::update_parameter(scratch, m.owner, *m.payload, *m.losses);
            } else {
                if (m.payload || m.losses) return false;  // aggregate commands carry neither
                contract::aggregate_parameters(scratch, m.owner);
            }
        } catch (const contract::SamplingNotMet&) {
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

bool Network::validate_proposal(const Node& node, const chain::Block& candidate) const {
    if (!chain::verify_block(candidate, node.chain.tip(), device_keys_)) return false;
    for (const chain::SignedMessage& m : candidate.messages) {
        if (m.receiver != contract_account_) return false;
        if (m.prev_hash != candidate.prev_hash) return false;  // stale or replayed message
    }
    return messages_apply_cleanly(node.contract, candidate);
}

static void apply_block(Node& node, const chain::Block& block, const chain::KeyStore& keys) {
    // a replica that missed earlier commits (crashed and healed) cannot
    // extend its stale tip; it stays behind and keeps voting reject
    if (block.prev_hash != node.chain.tip().block_hash) return;
    chain::append_block(node.chain, block, keys);
    for (const chain::SignedMessage& m : block.messages) {
        try {
            if (m.func == chain::MsgFunc::Upload) {
                contract::update_parameter(node.contract, m.owner, *m.payload, *m.losses);
            } else {
                contract::aggregate_parameters(node.contract, m.owner);
            }
        } catch (const contract::SamplingNotMet&) {
            // recorded on-chain as a rejected aggregation call
        }
    }
}

CommitResult Network::propose_and_commit(std::uint64_t round,
                                         const std::vector<chain::SignedMessage>& pending) {
    if (pending.empty()) throw chain::EmptyBlock{};
    CommitResult result;
    const int quorum =
        static_cast<int>(std::ceil(config_.quorum_fraction * static_cast<double>(nodes_.size())));

    for (std::size_t attempt = 0; attempt < nodes_.size(); ++attempt) {
        Node& leader = nodes_[schedule_[(round + attempt) % schedule_.size()]];
        result.leader = leader.id;
        result.reselections = static_cast<int>(attempt);

        if (leader.behavior.kind == BehaviorKind::Silent) {
            log_.push_back({round, leader.id, 0, 0, "silent"});
            continue;
        }

        chain::Block candidate = chain::build_block(leader.chain.tip().block_hash, pending, round,
                                                    /*nonce=*/0, leader.id, device_keys_);
        if (leader.behavior.kind == BehaviorKind::BadPackager && !candidate.messages.empty()) {
            // tamper with one uploaded value, then re-seal the block so only
            // the signature check can expose the edit
            for (auto& m : candidate.messages) {
                if (m.payload && !m.payload->values.empty()) {
                    m.payload->values.front() ^= 1;
                    break;
                }
            }
            std::vector<chain::Bytes> leaves;
            for (const auto& m : candidate.messages) leaves.push_back(chain::encode_message(m));
            candidate.tx_root = chain::merkle_root(leaves);
            candidate.block_hash = chain::block_header_hash(candidate);
        }

        std::vector<Vote> votes;
        for (const Node& voter : nodes_) {
            if (voter.behavior.kind == BehaviorKind::Silent) continue;
            bool accept;
            if (voter.behavior.kind == BehaviorKind::BadVoter) {
                accept = false;  // rejects everything, its own proposals included
            } else if (voter.id == leader.id) {
                accept = true;  // a leader backs its own proposal
            } else {
                accept = validate_proposal(voter, candidate);
            }
            votes.push_back(sign_vote(voter.account, candidate.block_hash, accept));
        }

        int votes_for = 0, votes_against = 0;
        for (const Vote& v : votes) {
            if (!verify_vote(v, node_keys_)) continue;
            (v.accept ? votes_for : votes_against) += 1;
        }
        result.votes_for = votes_for;
        result.votes_against = votes_against;

        if (votes_for >= quorum) {
            for (Node& node : nodes_) {
                if (node.behavior.kind == BehaviorKind::Silent) continue;
                apply_block(node, candidate, device_keys_);
            }
            result.status = CommitResult::Status::Committed;
            result.block = std::move(candidate);
            log_.push_back({round, leader.id, votes_for, votes_against, "committed"});
            return result;
        }
        log_.push_back({round, leader.id, votes_for, votes_against, "rejected"});
    }

    result.status = CommitResult::Status::Stalled;
    result.block.reset();
    log_.push_back({round, result.leader, result.votes_for, result.votes_against, "stalled"});
    return result;
}

}  // namespace swarm::consensus
