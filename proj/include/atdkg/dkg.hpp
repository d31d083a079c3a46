// Any-trust distributed key generation: a three-round state machine in which
// a sortition-selected committee deals verifiable secret sharings, every node
// checks its shares and raises publicly verifiable complaints, and a second
// committee aggregates complaints so all honest nodes agree on the qualified
// dealer set and the resulting key.
//
// Node indices are 1-based throughout; roster position i-1 holds node i.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "atdkg/keys.hpp"
#include "atdkg/mre.hpp"
#include "atdkg/sharing.hpp"
#include "atdkg/vrf.hpp"

namespace atdkg {

struct RosterEntry {
    Point ek;      // PKE encryption key
    Point rvk;     // VRF verification key
    Bytes sig_vk;  // forward-secure signature verification key
};

RosterEntry roster_entry(const NodeKeys& keys);

struct SessionParams {
    int n = 0;
    int t = 0;          // corruption bound; requires n >= 2t+1
    Bytes session_id;   // 32 bytes, unique per run
    Bytes rand;         // public beacon, independent of roster keys
    Ratio ratio;        // sortition ratio for both "deal" and "agree"
    std::vector<RosterEntry> roster;  // node i at roster[i-1]
    SortitionMode mode = SortitionMode::vrf;
    std::vector<uint32_t> forced_dealers;  // used only in forced mode
    std::vector<uint32_t> forced_agree;
};

// One dealer's round-1 broadcast: sortition credential, evaluation
// commitments to a degree-<=t polynomial, and the encrypted shares.
//
// Wire: session_id(32) || round=1(1) || dealer(4 BE) || cred(97) ||
//       count(4 BE) || commitments((n+1)*33) || c0(33) || payloads(n*32) ||
//       sig(2144). The signature covers everything before it.
struct DealTranscript {
    uint32_t dealer = 0;
    Bytes cred;         // raw credential bytes (all-zero in forced mode)
    EvalCommitment cm;  // g^{f(0)} .. g^{f(n)}
    MreCiphertext ct;   // shared c0 plus one payload per node
    Bytes sig;

    Bytes signed_body(const Bytes& session_id) const;
    Bytes encode(const Bytes& session_id) const;
    static std::optional<DealTranscript> decode(const Bytes& session_id, int n,
                                                const Bytes& wire);
};

// Accusation that a dealer's encrypted share for `complainer` does not match
// the broadcast commitment, backed by a decryption proof anyone can check
// against the broadcast ciphertext.
struct Complaint {
    uint32_t dealer = 0;
    uint32_t complainer = 0;
    DecryptionProof proof;
};

// Round-2 multicast carrying one node's complaints.
//
// Wire: session_id(32) || round=2(1) || sender(4 BE) || count(4 BE) ||
//       {dealer(4) || complainer(4) || proof(129)}* || sig(2144).
struct ComplaintSet {
    uint32_t sender = 0;
    std::vector<Complaint> complaints;
    Bytes sig;

    Bytes signed_body(const Bytes& session_id) const;
    Bytes encode(const Bytes& session_id) const;
    static std::optional<ComplaintSet> decode(const Bytes& session_id, const Bytes& wire);
};

// Round-3 broadcast from an "agree" committee member: the deduplicated valid
// complaints it collected, at most one per accused dealer.
//
// Wire: session_id(32) || round=3(1) || sender(4 BE) || cred(97) ||
//       count(4 BE) || complaints || sig(2144).
struct ComplaintList {
    uint32_t sender = 0;
    Bytes cred;
    std::vector<Complaint> complaints;
    Bytes sig;

    Bytes signed_body(const Bytes& session_id) const;
    Bytes encode(const Bytes& session_id) const;
    static std::optional<ComplaintList> decode(const Bytes& session_id, const Bytes& wire);
};

struct DkgOutput {
    Point pk;
    std::vector<Point> pk_shares;  // g^{F(i)} for node i at [i-1]
    Scalar sk_share;               // this node's F(self)
    std::vector<uint32_t> qual;    // qualified dealers, ascending
};

// A broadcast deal after the checks whose outcome is identical at every node:
// header recognition, dealer signature, and structural decode. Parsing once
// and sharing the result keeps simulations of hundreds of nodes affordable;
// everything per-node (credential, low-degree test, share decryption) stays
// in NodeState.
struct ParsedDeal {
    uint32_t dealer = 0;
    bool header_ok = false;    // session id, round byte, dealer range, length
    bool sig_ok = false;       // forward-secure signature at round index 1
    bool well_formed = false;  // full structural decode succeeded
    DealTranscript deal;       // populated when well_formed
};

std::shared_ptr<const ParsedDeal> parse_deal(const SessionParams& params, const Bytes& wire);

// True iff the proof opens the dealer's broadcast ciphertext for the
// complainer AND the opened value disagrees with the commitment (a payload
// that opens to no canonical scalar counts as disagreeing). Both conjuncts
// make valid complaints unforgeable against honest dealers.
bool verify_complaint(const Complaint& c, const DealTranscript& deal,
                      const Point& ek_complainer);

// Per-node protocol driver. Methods must be called in round order; each
// returns the message to send, or empty when the node stays silent. Group
// exponentiations performed inside any method accumulate in exp_count().
class NodeState {
public:
    NodeState(SessionParams params, NodeKeys keys, uint32_t self, Drbg rng);

    // Round 1: if selected as dealer, commit to a fresh polynomial, encrypt
    // the shares, sign, and return the broadcast; the dealing secrets are
    // erased before returning. Either way the signing key advances.
    std::optional<Bytes> round1_deal();

    // Round 2: classify every broadcast deal (instantly disqualified / own
    // share mismatched / candidate) and return the signed complaint multicast
    // when there is something to complain about.
    std::optional<Bytes> round2_verify(const std::vector<std::shared_ptr<const ParsedDeal>>& deals);
    std::optional<Bytes> round2_verify(const std::vector<Bytes>& deals);

    // Round 3: if selected for the "agree" committee, collect the first valid
    // complaint per accused dealer from the multicasts and return the signed
    // list for broadcast. Either way the signing key advances.
    std::optional<Bytes> round3_aggregate(const std::vector<Bytes>& multicasts);

    // End of round 3: re-verify the broadcast complaint lists, drop accused
    // dealers from the candidate set, and assemble the key material. Throws
    // when no qualified dealer remains.
    DkgOutput finalize(const std::vector<Bytes>& lists);

    // Serialized dealing secrets this state still holds; empty once the
    // round-1 erase step has run. Erasure is logical: buffers are zeroed
    // and released, which is what the audit inspects.
    Bytes erasure_audit() const;

    const std::vector<uint32_t>& d1() const { return d1_; }  // disqualified on sight
    const std::vector<uint32_t>& d2() const { return d2_; }  // complained against
    const std::vector<uint32_t>& d3() const { return d3_; }  // candidates
    const std::vector<Complaint>& own_complaints() const { return own_complaints_; }
    const NodeKeys& keys() const { return keys_; }
    uint32_t self() const { return self_; }
    uint64_t exp_count() const { return exp_count_; }

private:
    std::optional<Bytes> credential_for(const std::string& event,
                                        const std::vector<uint32_t>& forced);
    bool deal_cred_ok(const ParsedDeal& pd) const;
    bool list_cred_ok(uint32_t sender, const Bytes& cred) const;
    bool complaint_valid(const Complaint& c) const;

    SessionParams params_;
    NodeKeys keys_;
    uint32_t self_ = 0;
    Drbg rng_;
    int round_ = 1;
    uint64_t exp_count_ = 0;

    // Dealing secrets live here between sampling and the erase step so the
    // erasure audit inspects real state, not a copy.
    SharePolynomial dealing_f_;
    std::vector<Scalar> dealing_shares_;
    Scalar dealing_r_;
    bool dealing_live_ = false;

    std::map<uint32_t, std::shared_ptr<const ParsedDeal>> deals_;  // parse-ok, deduped
    std::map<uint32_t, Scalar> shares_;                            // own share per candidate
    std::vector<uint32_t> d1_, d2_, d3_;
    std::vector<Complaint> own_complaints_;
};

}  // namespace atdkg
