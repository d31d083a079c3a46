#include "atdkg/dkg.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace atdkg {

namespace {

constexpr uint8_t kRoundDeal = 1;
constexpr uint8_t kRoundComplaintSet = 2;
constexpr uint8_t kRoundComplaintList = 3;
constexpr size_t kSessionIdSize = 32;
constexpr size_t kComplaintWireSize = 8 + kDecryptionProofSize;
const char kEventDeal[] = "deal";
const char kEventAgree[] = "agree";

// Routes exponentiation counts into one node's meter for the current scope.
class CounterScope {
public:
    explicit CounterScope(uint64_t* sink) : prev_(exp_counter_sink) { exp_counter_sink = sink; }
    ~CounterScope() { exp_counter_sink = prev_; }
    CounterScope(const CounterScope&) = delete;
    CounterScope& operator=(const CounterScope&) = delete;

private:
    uint64_t* prev_;
};

uint32_t read_u32be(const Bytes& b, size_t off) {
    return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) |
           (uint32_t(b[off + 2]) << 8) | uint32_t(b[off + 3]);
}

bool header_matches(const Bytes& wire, const Bytes& sid, uint8_t round) {
    return sid.size() == kSessionIdSize && wire.size() > kSessionIdSize &&
           std::equal(sid.begin(), sid.end(), wire.begin()) && wire[kSessionIdSize] == round;
}

void append_complaints(Bytes& out, const std::vector<Complaint>& cs) {
    append_u32be(out, uint32_t(cs.size()));
    for (const auto& c : cs) {
        append_u32be(out, c.dealer);
        append_u32be(out, c.complainer);
        append(out, c.proof.encode());
    }
}

// Complaints whose proof bytes fail structural decode are dropped here: they
// could never verify, and keeping the rest preserves per-complaint filtering.
std::vector<Complaint> read_complaints(const Bytes& b, size_t off, uint32_t count) {
    std::vector<Complaint> out;
    out.reserve(count);
    for (uint32_t k = 0; k < count; ++k) {
        size_t p = off + size_t(k) * kComplaintWireSize;
        Complaint c;
        c.dealer = read_u32be(b, p);
        c.complainer = read_u32be(b, p + 4);
        auto proof = DecryptionProof::decode(
            Bytes(b.begin() + p + 8, b.begin() + p + 8 + kDecryptionProofSize));
        if (!proof) continue;
        c.proof = std::move(*proof);
        out.push_back(std::move(c));
    }
    return out;
}

bool contains(const std::vector<uint32_t>& xs, uint32_t x) {
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

}  // namespace

NodeKeys node_keygen(Drbg& rng, int sig_rounds) {
    NodeKeys keys;
    keys.dk = Scalar::random(rng);
    keys.ek = pt_base_mul(keys.dk);
    keys.vrf = vrf_keygen(rng);
    keys.sig = fs_keygen(sig_rounds, rng);
    return keys;
}

RosterEntry roster_entry(const NodeKeys& keys) {
    return RosterEntry{keys.ek, keys.vrf.rvk, keys.sig.vk};
}

Bytes DealTranscript::signed_body(const Bytes& session_id) const {
    Bytes out;
    append(out, session_id);
    append_u8(out, kRoundDeal);
    append_u32be(out, dealer);
    append(out, cred);
    append(out, cm.encode());
    append(out, pt_compress(ct.c0));
    for (const auto& payload : ct.payloads) append(out, payload);
    return out;
}

Bytes DealTranscript::encode(const Bytes& session_id) const {
    Bytes out = signed_body(session_id);
    append(out, sig);
    return out;
}

std::optional<DealTranscript> DealTranscript::decode(const Bytes& session_id, int n,
                                                     const Bytes& wire) {
    if (n < 1) return std::nullopt;
    const size_t expect = kSessionIdSize + 1 + 4 + kVrfCredentialSize + 4 +
                          size_t(n + 1) * 33 + 33 + size_t(n) * 32 + kFsSignatureSize;
    if (wire.size() != expect || !header_matches(wire, session_id, kRoundDeal))
        return std::nullopt;
    DealTranscript d;
    size_t off = kSessionIdSize + 1;
    d.dealer = read_u32be(wire, off);
    off += 4;
    if (d.dealer < 1 || d.dealer > uint32_t(n)) return std::nullopt;
    d.cred.assign(wire.begin() + off, wire.begin() + off + kVrfCredentialSize);
    off += kVrfCredentialSize;
    if (read_u32be(wire, off) != uint32_t(n) + 1) return std::nullopt;
    off += 4;
    d.cm.cms.reserve(size_t(n) + 1);
    for (int j = 0; j <= n; ++j) {
        auto p = pt_decompress(Bytes(wire.begin() + off, wire.begin() + off + 33));
        if (!p) return std::nullopt;
        d.cm.cms.push_back(*p);
        off += 33;
    }
    auto c0 = pt_decompress(Bytes(wire.begin() + off, wire.begin() + off + 33));
    if (!c0) return std::nullopt;
    d.ct.c0 = *c0;
    off += 33;
    d.ct.payloads.reserve(size_t(n));
    for (int j = 0; j < n; ++j) {
        d.ct.payloads.emplace_back(wire.begin() + off, wire.begin() + off + 32);
        off += 32;
    }
    d.sig.assign(wire.begin() + off, wire.end());
    return d;
}

Bytes ComplaintSet::signed_body(const Bytes& session_id) const {
    Bytes out;
    append(out, session_id);
    append_u8(out, kRoundComplaintSet);
    append_u32be(out, sender);
    append_complaints(out, complaints);
    return out;
}

Bytes ComplaintSet::encode(const Bytes& session_id) const {
    Bytes out = signed_body(session_id);
    append(out, sig);
    return out;
}

std::optional<ComplaintSet> ComplaintSet::decode(const Bytes& session_id, const Bytes& wire) {
    const size_t fixed = kSessionIdSize + 1 + 4 + 4 + kFsSignatureSize;
    if (wire.size() < fixed || !header_matches(wire, session_id, kRoundComplaintSet))
        return std::nullopt;
    ComplaintSet s;
    s.sender = read_u32be(wire, kSessionIdSize + 1);
    uint32_t count = read_u32be(wire, kSessionIdSize + 5);
    if (wire.size() != fixed + size_t(count) * kComplaintWireSize) return std::nullopt;
    s.complaints = read_complaints(wire, kSessionIdSize + 9, count);
    s.sig.assign(wire.end() - ptrdiff_t(kFsSignatureSize), wire.end());
    return s;
}

Bytes ComplaintList::signed_body(const Bytes& session_id) const {
    Bytes out;
    append(out, session_id);
    append_u8(out, kRoundComplaintList);
    append_u32be(out, sender);
    append(out, cred);
    append_complaints(out, complaints);
    return out;
}

Bytes ComplaintList::encode(const Bytes& session_id) const {
    Bytes out = signed_body(session_id);
    append(out, sig);
    return out;
}

std::optional<ComplaintList> ComplaintList::decode(const Bytes& session_id, const Bytes& wire) {
    const size_t fixed = kSessionIdSize + 1 + 4 + kVrfCredentialSize + 4 + kFsSignatureSize;
    if (wire.size() < fixed || !header_matches(wire, session_id, kRoundComplaintList))
        return std::nullopt;
    ComplaintList l;
    l.sender = read_u32be(wire, kSessionIdSize + 1);
    l.cred.assign(wire.begin() + kSessionIdSize + 5,
                  wire.begin() + kSessionIdSize + 5 + kVrfCredentialSize);
    uint32_t count = read_u32be(wire, kSessionIdSize + 5 + kVrfCredentialSize);
    if (wire.size() != fixed + size_t(count) * kComplaintWireSize) return std::nullopt;
    l.complaints = read_complaints(wire, kSessionIdSize + 9 + kVrfCredentialSize, count);
    l.sig.assign(wire.end() - ptrdiff_t(kFsSignatureSize), wire.end());
    return l;
}

std::shared_ptr<const ParsedDeal> parse_deal(const SessionParams& params, const Bytes& wire) {
    auto pd = std::make_shared<ParsedDeal>();
    const size_t min_len = kSessionIdSize + 1 + 4 + kFsSignatureSize;
    if (wire.size() < min_len || !header_matches(wire, params.session_id, kRoundDeal))
        return pd;
    uint32_t dealer = read_u32be(wire, kSessionIdSize + 1);
    if (dealer < 1 || dealer > uint32_t(params.n)) return pd;
    pd->dealer = dealer;
    pd->header_ok = true;
    Bytes body(wire.begin(), wire.end() - ptrdiff_t(kFsSignatureSize));
    Bytes sig(wire.end() - ptrdiff_t(kFsSignatureSize), wire.end());
    pd->sig_ok = fs_verify(params.roster[dealer - 1].sig_vk, 1, sig, body);
    if (!pd->sig_ok) return pd;
    auto deal = DealTranscript::decode(params.session_id, params.n, wire);
    if (deal) {
        pd->deal = std::move(*deal);
        pd->well_formed = true;
    }
    return pd;
}

bool verify_complaint(const Complaint& c, const DealTranscript& deal,
                      const Point& ek_complainer) {
    size_t n = deal.ct.payloads.size();
    if (c.complainer < 1 || size_t(c.complainer) > n) return false;
    if (deal.cm.cms.size() != n + 1) return false;
    if (!verify_decryption(deal.ct.c0, deal.ct.payloads[c.complainer - 1], ek_complainer,
                           c.proof))
        return false;
    auto m = Scalar::from_bytes(c.proof.m);
    if (!m) return true;  // opens to no canonical scalar, so it cannot match the commitment
    return !pt_equal(pt_base_mul(*m), deal.cm.cms[c.complainer]);
}

NodeState::NodeState(SessionParams params, NodeKeys keys, uint32_t self, Drbg rng)
    : params_(std::move(params)), keys_(std::move(keys)), self_(self), rng_(std::move(rng)) {
    if (params_.n < 1 || params_.t < 0 || params_.n < 2 * params_.t + 1)
        throw std::invalid_argument("dkg: requires n >= 2t+1 with t >= 0");
    if (params_.session_id.size() != kSessionIdSize)
        throw std::invalid_argument("dkg: session id must be 32 bytes");
    if (params_.roster.size() != size_t(params_.n))
        throw std::invalid_argument("dkg: roster size must equal n");
    if (self_ < 1 || self_ > uint32_t(params_.n))
        throw std::invalid_argument("dkg: node index out of range");
}

std::optional<Bytes> NodeState::credential_for(const std::string& event,
                                               const std::vector<uint32_t>& forced) {
    if (params_.mode == SortitionMode::forced) {
        if (!contains(forced, self_)) return std::nullopt;
        return Bytes(kVrfCredentialSize, 0);
    }
    auto cred = sortition(keys_.vrf, params_.rand, event, params_.ratio);
    if (!cred) return std::nullopt;
    return cred->encode();
}

bool NodeState::deal_cred_ok(const ParsedDeal& pd) const {
    if (params_.mode == SortitionMode::forced)
        return contains(params_.forced_dealers, pd.dealer);
    auto cred = VrfCredential::decode(pd.deal.cred);
    return cred && sortition_verify(params_.roster[pd.dealer - 1].rvk, params_.rand,
                                    params_.ratio, kEventDeal, *cred);
}

bool NodeState::list_cred_ok(uint32_t sender, const Bytes& cred_bytes) const {
    if (params_.mode == SortitionMode::forced) return contains(params_.forced_agree, sender);
    auto cred = VrfCredential::decode(cred_bytes);
    return cred && sortition_verify(params_.roster[sender - 1].rvk, params_.rand,
                                    params_.ratio, kEventAgree, *cred);
}

bool NodeState::complaint_valid(const Complaint& c) const {
    if (c.complainer < 1 || c.complainer > uint32_t(params_.n)) return false;
    auto it = deals_.find(c.dealer);
    if (it == deals_.end()) return false;
    return verify_complaint(c, it->second->deal, params_.roster[c.complainer - 1].ek);
}

std::optional<Bytes> NodeState::round1_deal() {
    if (round_ != 1) throw std::logic_error("dkg: round1_deal called out of order");
    CounterScope meter(&exp_count_);
    round_ = 2;
    auto cred = credential_for(kEventDeal, params_.forced_dealers);
    if (!cred) {
        fs_update(keys_.sig);
        return std::nullopt;
    }
    const int n = params_.n;
    dealing_f_ = sample_polynomial(params_.t, rng_);
    dealing_shares_ = share_evals(dealing_f_, n);
    dealing_r_ = Scalar::random(rng_);
    dealing_live_ = true;

    DealTranscript deal;
    deal.dealer = self_;
    deal.cred = std::move(*cred);
    deal.cm = commit_evals(dealing_f_, n);
    std::vector<Point> eks;
    eks.reserve(size_t(n));
    for (const auto& entry : params_.roster) eks.push_back(entry.ek);
    deal.ct = mre_encrypt(eks, dealing_shares_, dealing_r_);
    deal.sig = fs_sign(keys_.sig, 1, deal.signed_body(params_.session_id));
    fs_update(keys_.sig);

    for (auto& a : dealing_f_.coeffs) a = Scalar::zero();
    dealing_f_.coeffs.clear();
    for (auto& s : dealing_shares_) s = Scalar::zero();
    dealing_shares_.clear();
    dealing_r_ = Scalar::zero();
    dealing_live_ = false;

    return deal.encode(params_.session_id);
}

std::optional<Bytes> NodeState::round2_verify(
    const std::vector<std::shared_ptr<const ParsedDeal>>& deals) {
    if (round_ != 2) throw std::logic_error("dkg: round2_verify called out of order");
    CounterScope meter(&exp_count_);
    round_ = 3;
    DualCodeVector dual = dual_code_vector(params_.n, params_.t, rng_);
    std::set<uint32_t> seen;
    for (const auto& pd : deals) {
        if (!pd || !pd->header_ok || !pd->sig_ok) continue;
        if (!seen.insert(pd->dealer).second) continue;  // first validly signed deal wins
        if (pd->well_formed) deals_[pd->dealer] = pd;
        if (!pd->well_formed || !deal_cred_ok(*pd) || !check_low_degree(pd->deal.cm, dual)) {
            d1_.push_back(pd->dealer);
            continue;
        }
        auto share = mre_decrypt(pd->deal.ct, self_, keys_.dk);
        if (share && pt_equal(pt_base_mul(*share), pd->deal.cm.cms[self_])) {
            d3_.push_back(pd->dealer);
            shares_[pd->dealer] = *share;
            continue;
        }
        Complaint c;
        c.dealer = pd->dealer;
        c.complainer = self_;
        c.proof = prove_decryption(pd->deal.ct.c0, pd->deal.ct.payloads[self_ - 1], keys_.dk,
                                   keys_.ek);
        own_complaints_.push_back(std::move(c));
        d2_.push_back(pd->dealer);
    }
    std::sort(d1_.begin(), d1_.end());
    std::sort(d2_.begin(), d2_.end());
    std::sort(d3_.begin(), d3_.end());
    std::sort(own_complaints_.begin(), own_complaints_.end(),
              [](const Complaint& a, const Complaint& b) { return a.dealer < b.dealer; });
    if (own_complaints_.empty()) return std::nullopt;
    ComplaintSet set;
    set.sender = self_;
    set.complaints = own_complaints_;
    set.sig = fs_sign(keys_.sig, 2, set.signed_body(params_.session_id));
    return set.encode(params_.session_id);
}

std::optional<Bytes> NodeState::round2_verify(const std::vector<Bytes>& deals) {
    std::vector<std::shared_ptr<const ParsedDeal>> parsed;
    parsed.reserve(deals.size());
    for (const auto& wire : deals) parsed.push_back(parse_deal(params_, wire));
    return round2_verify(parsed);
}

std::optional<Bytes> NodeState::round3_aggregate(const std::vector<Bytes>& multicasts) {
    if (round_ != 3) throw std::logic_error("dkg: round3_aggregate called out of order");
    CounterScope meter(&exp_count_);
    round_ = 4;
    auto cred = credential_for(kEventAgree, params_.forced_agree);
    if (!cred) {
        fs_update(keys_.sig);
        return std::nullopt;
    }
    std::vector<ComplaintSet> sets;
    for (const auto& wire : multicasts) {
        const size_t min_len = kSessionIdSize + 1 + 4 + 4 + kFsSignatureSize;
        if (wire.size() < min_len || !header_matches(wire, params_.session_id, kRoundComplaintSet))
            continue;
        uint32_t sender = read_u32be(wire, kSessionIdSize + 1);
        if (sender < 1 || sender > uint32_t(params_.n)) continue;
        Bytes body(wire.begin(), wire.end() - ptrdiff_t(kFsSignatureSize));
        Bytes sig(wire.end() - ptrdiff_t(kFsSignatureSize), wire.end());
        if (!fs_verify(params_.roster[sender - 1].sig_vk, 2, sig, body)) continue;
        auto set = ComplaintSet::decode(params_.session_id, wire);
        if (set) sets.push_back(std::move(*set));
    }
    std::stable_sort(sets.begin(), sets.end(), [](const ComplaintSet& a, const ComplaintSet& b) {
        return a.sender < b.sender;
    });
    ComplaintList list;
    list.sender = self_;
    list.cred = std::move(*cred);
    std::set<uint32_t> named;
    for (const auto& set : sets) {
        for (const auto& c : set.complaints) {
            if (named.count(c.dealer)) continue;  // first valid complaint per dealer
            if (!complaint_valid(c)) continue;
            named.insert(c.dealer);
            list.complaints.push_back(c);
        }
    }
    list.sig = fs_sign(keys_.sig, 2, list.signed_body(params_.session_id));
    fs_update(keys_.sig);
    if (list.complaints.empty()) return std::nullopt;
    return list.encode(params_.session_id);
}

DkgOutput NodeState::finalize(const std::vector<Bytes>& lists) {
    if (round_ != 4) throw std::logic_error("dkg: finalize called before round 3");
    CounterScope meter(&exp_count_);
    std::set<uint32_t> disqual;
    for (const auto& wire : lists) {
        const size_t min_len = kSessionIdSize + 1 + 4 + kVrfCredentialSize + 4 + kFsSignatureSize;
        if (wire.size() < min_len ||
            !header_matches(wire, params_.session_id, kRoundComplaintList))
            continue;
        uint32_t sender = read_u32be(wire, kSessionIdSize + 1);
        if (sender < 1 || sender > uint32_t(params_.n)) continue;
        Bytes body(wire.begin(), wire.end() - ptrdiff_t(kFsSignatureSize));
        Bytes sig(wire.end() - ptrdiff_t(kFsSignatureSize), wire.end());
        if (!fs_verify(params_.roster[sender - 1].sig_vk, 2, sig, body)) continue;
        auto list = ComplaintList::decode(params_.session_id, wire);
        if (!list || !list_cred_ok(sender, list->cred)) continue;
        for (const auto& c : list->complaints) {
            if (disqual.count(c.dealer)) continue;
            if (complaint_valid(c)) disqual.insert(c.dealer);
        }
    }
    DkgOutput out;
    for (uint32_t j : d3_)
        if (!disqual.count(j)) out.qual.push_back(j);
    if (out.qual.empty()) throw std::runtime_error("dkg: no qualified dealer remains");
    out.pk = Point::infinity();
    out.pk_shares.assign(size_t(params_.n), Point::infinity());
    Scalar sk = Scalar::zero();
    for (uint32_t j : out.qual) {
        const auto& cms = deals_.at(j)->deal.cm.cms;
        out.pk = pt_add(out.pk, cms[0]);
        for (int i = 1; i <= params_.n; ++i)
            out.pk_shares[size_t(i - 1)] = pt_add(out.pk_shares[size_t(i - 1)], cms[size_t(i)]);
        sk = sc_add(sk, shares_.at(j));
    }
    out.sk_share = sk;
    return out;
}

Bytes NodeState::erasure_audit() const {
    Bytes out;
    for (const auto& a : dealing_f_.coeffs) append(out, a.to_bytes());
    for (const auto& s : dealing_shares_) append(out, s.to_bytes());
    if (dealing_live_) append(out, dealing_r_.to_bytes());
    return out;
}

}  // namespace atdkg
