// Extended broadcast channel: each sender posts a constant-size digest on the
// bulletin board and multicasts the value itself; a sortition-sampled
// committee votes on which digests arrived intact; every receiver that holds
// a finalized value registers it on the dispersal network so receivers the
// sender skipped can still recover it. On-chain storage stays independent of
// the value length.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atdkg/bulletin.hpp"
#include "atdkg/bytes.hpp"
#include "atdkg/ec.hpp"
#include "atdkg/vrf.hpp"

namespace atdkg {

struct EbcParams {
    int n = 0;                      // receiver count, node ids 1..n
    Bytes sid;                      // 32 bytes, unique per session
    Bytes rand;                     // public beacon for the "check" sortition
    Ratio ratio_hm;                 // per-node committee selection probability
    std::vector<uint32_t> senders;  // sender ids, strictly increasing
    std::vector<Point> rvks;        // rvks[i-1] = VRF key of node i
    SortitionMode mode = SortitionMode::vrf;
    std::vector<uint32_t> forced_committee;  // committee when mode == forced
    uint64_t t0 = 0;  // bulletin counter taken before the first send
};

// Bulletin keyword for one session and phase tag ("send" or "check").
Bytes ebc_keyword(const Bytes& sid, const std::string& tag);

// Round 1, sender side: posts u32be(sender) || sha256(v) under sid||"send"
// and returns the assigned counter. The sender id stands in for the signature
// the channel model assumes on every posted message. Multicasting v to the
// receivers is the caller's transport concern.
uint64_t ebc_send(Pbb& pbb, const Bytes& sid, uint32_t sender, const Bytes& v);

// Wire form of one committee vote record as posted under the check keyword:
// voter(4 BE) || credential(97) || validity bitvector, where bit p of the
// vector lives in byte p >> 3 under mask 1 << (p & 7) and pad bits stay zero.
Bytes ebc_vote_record(uint32_t voter, const Bytes& cred, const std::vector<bool>& valid);

// One receiver's view of a broadcast session.
class BroadcastSession {
  public:
    // `vrf` is this receiver's sortition key pair; its public half must match
    // params.rvks[self-1] for the receiver's own votes to verify.
    BroadcastSession(EbcParams params, uint32_t self, VrfKeyPair vrf);

    // Round 2: reads the send window [t0, t1], marks sender j valid when the
    // multicast value in `received` hashes to the first digest j posted, and,
    // when the "check" sortition selects this receiver, posts
    // u32be(self) || credential || valid-bitvector under sid||"check".
    // Returns the posted counter, or nothing when not selected. `t1` must be
    // a counter taken after every send post and before any vote post.
    std::optional<uint64_t> round2_vote(Pbb& pbb, uint64_t t1,
                                        const std::map<uint32_t, Bytes>& received);

    // Round 3: reads the check window [t1, t2], keeps the first vote with a
    // valid credential from each committee member, sets final_j when strictly
    // more than half of those votes marked j valid, and registers every block
    // this receiver holds with valid_j = final_j = 1 on the dispersal
    // network. `t2` must be a counter taken after every vote post.
    void round3_finalize(Pbb& pbb, uint64_t t2, Ddn& ddn);

    // Per-sender outputs in params.senders order, after round 3. Senders with
    // final_j = 0 yield an empty optional; a finalized value this receiver
    // does not hold is fetched from the dispersal network. Throws
    // std::runtime_error when a finalized value is unavailable there: the
    // honest-majority committee assumption failed and the session cannot
    // terminate consistently.
    std::vector<std::optional<Bytes>> output(
        const Ddn& ddn, const std::function<bool(uint32_t)>& available) const;

    const std::vector<bool>& valid_flags() const { return valid_; }
    const std::vector<bool>& final_flags() const { return final_; }
    // Committee members whose vote was counted in round 3.
    size_t committee_votes() const { return committee_votes_; }

  private:
    std::optional<Bytes> credential() const;
    bool vote_cred_ok(uint32_t voter, const Bytes& cred) const;

    EbcParams params_;
    uint32_t self_ = 0;
    VrfKeyPair vrf_;
    int round_ = 2;
    uint64_t t1_ = 0;
    std::vector<std::optional<Bytes>> bids_;    // first posted digest per sender
    std::vector<std::optional<Bytes>> values_;  // multicast values that matched
    std::vector<bool> valid_;
    std::vector<bool> final_;
    size_t committee_votes_ = 0;
};

}  // namespace atdkg
