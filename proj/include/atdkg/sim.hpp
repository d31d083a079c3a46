// Deterministic synchronous-round simulator for the key generation,
// broadcast, and checkpointing protocols. One scheduler drives every node
// round by round with barrier delivery in (round, sender) order, an
// adversary policy scripts the corrupted nodes, and per-node computation
// plus per-channel byte costs accumulate into a reproducible report: the
// same configuration and seed always yield byte-identical output.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "atdkg/bytes.hpp"

namespace atdkg {

// What a corrupted node does. Honest nodes always run the module logic.
enum class Behavior {
    honest,             // placeholder for the empty policy
    honest_but_corrupt, // counted corrupted, follows the protocol
    malform_ciphertext, // as dealer, garble the targets' encrypted shares
    wrong_degree,       // as dealer, commit to a degree-(t+1) polynomial
    withhold_multicast, // multicasts reach only a fraction of the nodes
    double_vote,        // as committee member, post a second conflicting vote
    silent,             // send nothing at all
};

struct AdversaryPolicy {
    std::string name = "honest";
    Behavior behavior = Behavior::honest;
    std::vector<uint32_t> corrupted;                 // controlled from round 1
    std::vector<std::pair<uint32_t, int>> adaptive;  // (node, round) takeovers
    std::vector<uint32_t> targets;     // malform victims; empty means everyone
    int deliver_percent = 60;          // withhold_multicast delivery rate

    // Round from which the adversary controls the node, or 0 if never.
    int corrupted_from(uint32_t node) const;
};

// Builds the named policy for an (n, t) run. Static policies corrupt nodes
// 1..t; "adaptive" starts clean and takes over node 1 at round 2 and, budget
// permitting, node 2 at round 3, silencing them. Unknown names throw.
AdversaryPolicy adversary_policy(const std::string& name, int n, int t,
                                 int deliver_percent);

// Policy names the key generation scenario accepts.
const std::vector<std::string>& adversary_suite();

struct SimConfig {
    std::string scenario = "dkg";  // dkg | broadcast | checkpoint
    int n = 8;
    int t = 3;
    uint64_t seed = 1;
    int s_expected = 0;        // dealer/sender committee size; 0 = default
    int c_expected = 0;        // vote/agreement committee size; 0 = default
    std::string adversary = "honest";
    int deliver_percent = 60;  // withhold-multicast delivery rate
    int epochs = 3;            // checkpoint scenario chain length
    size_t payload = 1024;     // broadcast scenario value size in bytes
    int senders = 0;           // broadcast scenario sender count; 0 = s_expected

    // Committee size used when s_expected or c_expected is 0: half the nodes
    // plus one for small runs, capped at 20.
    int committee_size(int requested) const;
    void validate() const;  // throws std::invalid_argument
};

// Flat key=value lines; '#' starts a comment, blank lines are skipped.
SimConfig parse_config(const std::string& text);

struct Metrics {
    std::map<uint32_t, uint64_t> exp_by_node;  // driven nodes only
    uint64_t exp_extra = 0;       // work not attributed to a single node
    uint64_t pbb_bytes = 0;       // keyword plus value of every post
    uint64_t multicast_bytes = 0; // message size times receivers reached
    uint64_t ddn_bytes = 0;       // blocks served on retrieval
    // Logical sizes of the messages handed to the broadcast channel,
    // independent of how the channel moves them.
    uint64_t broadcast_payload_bytes = 0;
    // Wall clock per phase; shown in the human summary, never in reports.
    std::map<std::string, double> wall_ms;

    uint64_t exp_max() const;
    uint64_t exp_sum() const;
};

struct ReportRecord {
    std::string phase;
    std::string metric;
    std::string value;
};

struct TraceRecord {
    int round = 0;
    uint32_t from = 0;
    std::string to;  // node id, or channel name: pbb, multicast, ddn
    uint64_t bytes = 0;
    std::string type;
};

struct Report {
    SimConfig config;
    Metrics metrics;
    std::vector<ReportRecord> records;
    std::vector<TraceRecord> trace;

    // Value of the (phase, metric) record; throws when absent.
    const std::string& get(const std::string& phase, const std::string& metric) const;
    std::string render() const;        // scenario n t seed phase metric value
    std::string render_trace() const;  // round from to bytes type
    std::string summary() const;       // human-readable, includes wall clock
};

// Executes the configured scenario and returns its report. Any honest-node
// invariant violation (disagreeing outputs, undelivered honest broadcast,
// broken signature chain) throws with the violated invariant named.
Report run(const SimConfig& config);

}  // namespace atdkg
