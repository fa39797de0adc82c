#pragma once

#include <functional>
#include <optional>

#include "swarm/chain/block.hpp"
#include "swarm/contract/contract.hpp"

namespace swarm::consensus {

enum class BehaviorKind : std::uint8_t {
    Honest = 0,
    Silent = 1,       // crashed: never proposes, never votes, stops following commits
    BadPackager = 2,  // tampers with one payload byte after signing checks
    BadVoter = 3,     // rejects every proposal
};

struct Behavior {
    BehaviorKind kind = BehaviorKind::Honest;

    bool operator==(const Behavior&) const = default;
};

BehaviorKind behavior_from_name(const std::string& name);
std::string behavior_name(BehaviorKind kind);

/// One consortium node: an org member with its own replica of the ledger
/// and of the contract state.
struct Node {
    std::string id;
    int org = 0;
    Behavior behavior;
    chain::Account account;
    chain::Chain chain;
    contract::ContractState contract;
};

struct NetworkConfig {
    int orgs = 2;
    int nodes_per_org = 2;
    int devices_per_org = 3;
    double quorum_fraction = 2.0 / 3.0;
    std::uint64_t leader_seed = 0;

    int node_count() const { return orgs * nodes_per_org; }
};

/// Signed accept/reject on one proposed block.
struct Vote {
    std::string node_id;
    chain::Digest block_hash;
    bool accept = false;
    chain::Bytes signature;
};

Vote sign_vote(const chain::Account& account, const chain::Digest& block_hash, bool accept);
bool verify_vote(const Vote& vote, const chain::KeyStore& keys);

struct CommitResult {
    enum class Status : std::uint8_t { Committed = 0, Stalled = 1 };
    Status status = Status::Stalled;
    std::optional<chain::Block> block;
    int reselections = 0;
    int votes_for = 0;
    int votes_against = 0;
    std::string leader;
};

struct CommitLogRow {
    std::uint64_t round = 0;
    std::string leader;
    int votes_for = 0;
    int votes_against = 0;
    std::string result;  // committed | rejected | silent | stalled
};

/// Per-round fault injection parsed from a scenario script.
struct FaultEvent {
    std::uint64_t round = 0;
    std::string node;
    Behavior behavior;
};

std::vector<FaultEvent> parse_scenario(const std::string& json_text);
std::string commit_log_to_csv(const std::vector<CommitLogRow>& rows);

/// Deterministic simulation of the consortium: leader rotation, block
/// proposal, one-shot quorum voting and replicated commit. Rounds are
/// synchronous; reproducibility follows from the seeded leader schedule.
class Network {
public:
    Network(const NetworkConfig& config, const contract::ContractState& deployed,
            const std::string& contract_account, chain::KeyStore device_keys);

    const NetworkConfig& config() const { return config_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    /// Round-robin over the seeded node permutation.
    const std::string& select_packager(std::uint64_t round_slot) const;

    /// Replaces a node's behavior before the next round.
    void inject_fault(const std::string& node_id, Behavior behavior);

    /// Runs one consensus round over the gathered messages: the scheduled
    /// leader proposes, every live node validates and votes, and on quorum
    /// the block is appended and applied everywhere. A rejected or missing
    /// proposal reselects the next scheduled node; a full cycle without
    /// quorum stalls with all state unchanged.
    CommitResult propose_and_commit(std::uint64_t round, const std::vector<chain::SignedMessage>& pending);

    /// Replica of the first honest node (they are field-for-field equal).
    const contract::ContractState& contract_view() const;
    const chain::Chain& chain_view() const;

    /// True when every honest node holds the same chain and contract state.
    bool honest_views_consistent() const;

    const std::vector<CommitLogRow>& commit_log() const { return log_; }
    const chain::KeyStore& device_keys() const { return device_keys_; }
    const std::string& contract_account() const { return contract_account_; }

    /// Deployment-time mutation applied to every replica (contract init and
    /// device registration happen before round 1).
    void provision(const std::function<void(contract::ContractState&)>& mutate);

private:
    const Node& first_honest() const;
    bool validate_proposal(const Node& node, const chain::Block& candidate) const;

    NetworkConfig config_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> schedule_;
    std::string contract_account_;
    chain::KeyStore device_keys_;
    chain::KeyStore node_keys_;
    std::vector<CommitLogRow> log_;
};

}  // namespace swarm::consensus
