#include "atdkg/ebc.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "atdkg/hash.hpp"

namespace atdkg {

namespace {

constexpr size_t kSessionIdSize = 32;
constexpr size_t kDigestSize = 32;
const char kTagSend[] = "send";
const char kTagCheck[] = "check";
const char kEventCheck[] = "check";

uint32_t read_u32be(const Bytes& b, size_t off) {
    return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) |
           (uint32_t(b[off + 2]) << 8) | uint32_t(b[off + 3]);
}

bool contains(const std::vector<uint32_t>& xs, uint32_t x) {
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

}  // namespace

Bytes ebc_keyword(const Bytes& sid, const std::string& tag) {
    Bytes kw = sid;
    kw.insert(kw.end(), tag.begin(), tag.end());
    return kw;
}

// Pad bits past the last sender must stay zero so equal votes are
// byte-identical.
Bytes ebc_vote_record(uint32_t voter, const Bytes& cred, const std::vector<bool>& valid) {
    Bytes payload;
    append_u32be(payload, voter);
    append(payload, cred);
    Bytes flags((valid.size() + 7) / 8, 0);
    for (size_t p = 0; p < valid.size(); ++p) {
        if (valid[p]) flags[p >> 3] |= uint8_t(1u << (p & 7));
    }
    append(payload, flags);
    return payload;
}

uint64_t ebc_send(Pbb& pbb, const Bytes& sid, uint32_t sender, const Bytes& v) {
    if (sid.size() != kSessionIdSize) {
        throw std::invalid_argument("broadcast: session id must be 32 bytes");
    }
    Bytes payload;
    append_u32be(payload, sender);
    append(payload, digest_bytes(sha256(v)));
    return pbb.post(ebc_keyword(sid, kTagSend), payload);
}

BroadcastSession::BroadcastSession(EbcParams params, uint32_t self, VrfKeyPair vrf)
    : params_(std::move(params)), self_(self), vrf_(std::move(vrf)) {
    if (params_.n < 1) {
        throw std::invalid_argument("broadcast: need at least one receiver");
    }
    if (params_.sid.size() != kSessionIdSize) {
        throw std::invalid_argument("broadcast: session id must be 32 bytes");
    }
    if (params_.rvks.size() != size_t(params_.n)) {
        throw std::invalid_argument("broadcast: need one VRF key per receiver");
    }
    if (self_ < 1 || self_ > uint32_t(params_.n)) {
        throw std::invalid_argument("broadcast: receiver index out of range");
    }
    for (size_t p = 0; p < params_.senders.size(); ++p) {
        bool ordered = p == 0 || params_.senders[p - 1] < params_.senders[p];
        if (params_.senders[p] < 1 || !ordered) {
            throw std::invalid_argument("broadcast: sender ids must be positive and strictly increasing");
        }
    }
    bids_.resize(params_.senders.size());
    values_.resize(params_.senders.size());
    valid_.assign(params_.senders.size(), false);
    final_.assign(params_.senders.size(), false);
}

std::optional<Bytes> BroadcastSession::credential() const {
    if (params_.mode == SortitionMode::forced) {
        if (!contains(params_.forced_committee, self_)) return std::nullopt;
        return Bytes(kVrfCredentialSize, 0);
    }
    auto cred = sortition(vrf_, params_.rand, kEventCheck, params_.ratio_hm);
    if (!cred) return std::nullopt;
    return cred->encode();
}

bool BroadcastSession::vote_cred_ok(uint32_t voter, const Bytes& cred) const {
    if (params_.mode == SortitionMode::forced) {
        return cred == Bytes(kVrfCredentialSize, 0) && contains(params_.forced_committee, voter);
    }
    auto parsed = VrfCredential::decode(cred);
    if (!parsed) return false;
    return sortition_verify(params_.rvks[voter - 1], params_.rand, params_.ratio_hm, kEventCheck,
                            *parsed);
}

std::optional<uint64_t> BroadcastSession::round2_vote(Pbb& pbb, uint64_t t1,
                                                      const std::map<uint32_t, Bytes>& received) {
    if (round_ != 2) throw std::logic_error("broadcast: round2_vote called out of order");
    round_ = 3;
    t1_ = t1;
    for (const PbbEntry& entry :
         pbb.retrieve(params_.t0, t1, ebc_keyword(params_.sid, kTagSend))) {
        if (entry.value.size() != 4 + kDigestSize) continue;
        uint32_t sender = read_u32be(entry.value, 0);
        auto it = std::lower_bound(params_.senders.begin(), params_.senders.end(), sender);
        if (it == params_.senders.end() || *it != sender) continue;
        size_t p = size_t(it - params_.senders.begin());
        if (bids_[p]) continue;
        bids_[p] = Bytes(entry.value.begin() + 4, entry.value.end());
    }
    for (size_t p = 0; p < params_.senders.size(); ++p) {
        auto it = received.find(params_.senders[p]);
        if (!bids_[p] || it == received.end()) continue;
        if (digest_bytes(sha256(it->second)) != *bids_[p]) continue;
        valid_[p] = true;
        values_[p] = it->second;
    }
    auto cred = credential();
    if (!cred) return std::nullopt;
    return pbb.post(ebc_keyword(params_.sid, kTagCheck), ebc_vote_record(self_, *cred, valid_));
}

void BroadcastSession::round3_finalize(Pbb& pbb, uint64_t t2, Ddn& ddn) {
    if (round_ != 3) throw std::logic_error("broadcast: round3_finalize called out of order");
    round_ = 4;
    size_t nbits = params_.senders.size();
    size_t vec_len = (nbits + 7) / 8;
    std::set<uint32_t> voted;
    std::vector<size_t> counts(nbits, 0);
    for (const PbbEntry& entry : pbb.retrieve(t1_, t2, ebc_keyword(params_.sid, kTagCheck))) {
        if (entry.value.size() != 4 + kVrfCredentialSize + vec_len) continue;
        uint32_t voter = read_u32be(entry.value, 0);
        if (voter < 1 || voter > uint32_t(params_.n)) continue;
        Bytes cred(entry.value.begin() + 4, entry.value.begin() + 4 + kVrfCredentialSize);
        if (!vote_cred_ok(voter, cred)) continue;
        const uint8_t* bits = entry.value.data() + 4 + kVrfCredentialSize;
        if (nbits % 8 != 0 && (bits[vec_len - 1] & uint8_t(0xffu << (nbits % 8))) != 0) continue;
        if (!voted.insert(voter).second) continue;
        for (size_t p = 0; p < nbits; ++p) {
            if (bits[p >> 3] & (1u << (p & 7))) counts[p]++;
        }
    }
    committee_votes_ = voted.size();
    for (size_t p = 0; p < nbits; ++p) {
        final_[p] = 2 * counts[p] > committee_votes_;
        if (valid_[p] && final_[p]) ddn.register_provider(self_, *bids_[p], *values_[p]);
    }
}

std::vector<std::optional<Bytes>> BroadcastSession::output(
    const Ddn& ddn, const std::function<bool(uint32_t)>& available) const {
    if (round_ != 4) throw std::logic_error("broadcast: output requested before finalize");
    std::vector<std::optional<Bytes>> out(params_.senders.size());
    for (size_t p = 0; p < out.size(); ++p) {
        if (!final_[p]) continue;
        if (valid_[p]) {
            out[p] = values_[p];
            continue;
        }
        std::optional<Bytes> block;
        if (bids_[p]) block = ddn.retrieve(*bids_[p], available);
        if (!block) {
            throw std::runtime_error("broadcast: finalized value unavailable for retrieval");
        }
        out[p] = std::move(*block);
    }
    return out;
}

}  // namespace atdkg
