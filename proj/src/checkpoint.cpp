#include "atdkg/checkpoint.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

namespace atdkg {

namespace {

constexpr size_t kInputRefSize = 32;
constexpr size_t kPointSize = 33;
constexpr size_t kScalarSize = 32;
constexpr size_t kTxSize = kInputRefSize + kPointSize + 32 + kPointSize + kScalarSize;

bool all_zero(const uint8_t* p, size_t len) {
    for (size_t i = 0; i < len; ++i)
        if (p[i] != 0) return false;
    return true;
}

}  // namespace

size_t Configuration::total_sub_ids() const {
    uint64_t total = 0;
    for (uint64_t d : allocation.d) total += d;
    return size_t(total);
}

uint32_t Configuration::owner_of(uint32_t sub) const {
    if (allocation.d.size() != validators.size())
        throw std::invalid_argument("checkpoint: allocation does not match the roster");
    uint64_t upto = 0;
    for (size_t j = 0; j < validators.size(); ++j) {
        upto += allocation.d[j];
        if (sub >= 1 && sub <= upto) return validators[j].first;
    }
    throw std::invalid_argument("checkpoint: sub-ID index out of range");
}

std::pair<uint32_t, uint32_t> Configuration::sub_id_range(size_t pos) const {
    if (allocation.d.size() != validators.size())
        throw std::invalid_argument("checkpoint: allocation does not match the roster");
    if (pos >= validators.size())
        throw std::invalid_argument("checkpoint: roster position out of range");
    uint64_t first = 1;
    for (size_t j = 0; j < pos; ++j) first += allocation.d[j];
    return {uint32_t(first), uint32_t(allocation.d[pos])};
}

Scalar schnorr_challenge(const Point& r, const Point& pk, const Bytes& msg) {
    Bytes data = pt_compress(r);
    append(data, pt_compress(pk));
    append(data, msg);
    return hash_to_scalar("SCHNORR", data);
}

PartialSig partial_sign(uint32_t signer, const Scalar& k_i, const Point& r,
                        const Scalar& x_i, const Point& pk, const Bytes& msg) {
    Scalar c = schnorr_challenge(r, pk, msg);
    return PartialSig{signer, r, sc_add(k_i, sc_mul(c, x_i))};
}

bool verify_partial(const PartialSig& ps, const Point& r_i, const Point& pk_i,
                    const Scalar& c) {
    if (ps.signer == 0) return false;
    return pt_equal(pt_base_mul(ps.z), pt_add(r_i, pt_mul(pk_i, c)));
}

SchnorrSig combine_partials(int t, const std::vector<PartialSig>& partials) {
    if (t < 0) throw std::invalid_argument("checkpoint: negative threshold");
    if (partials.size() < size_t(t) + 1)
        throw std::runtime_error("checkpoint: need at least t+1 partial signatures");
    std::set<uint32_t> seen;
    std::vector<std::pair<int64_t, Scalar>> points;
    for (const auto& ps : partials) {
        if (ps.signer == 0 || !seen.insert(ps.signer).second)
            throw std::invalid_argument("checkpoint: duplicate or zero signer index");
        if (!pt_equal(ps.r, partials.front().r))
            throw std::invalid_argument(
                "checkpoint: partial signatures disagree on the nonce commitment");
        points.emplace_back(int64_t(ps.signer), ps.z);
    }
    return SchnorrSig{partials.front().r, interpolate_zero(points)};
}

bool schnorr_verify(const Point& pk, const Bytes& msg, const SchnorrSig& sig) {
    if (sig.r.is_infinity() || pk.is_infinity()) return false;
    Scalar c = schnorr_challenge(sig.r, pk, msg);
    return pt_equal(pt_base_mul(sig.z), pt_add(sig.r, pt_mul(pk, c)));
}

Bytes build_tx_body(const Bytes& prev, const Point& q_next, const Digest& ckp) {
    if (prev.size() != kInputRefSize)
        throw std::invalid_argument("checkpoint: input reference must be 32 bytes");
    Bytes out = prev;
    append(out, pt_compress(q_next));
    append(out, ckp.data(), ckp.size());
    return out;
}

Bytes CheckpointTx::body() const { return build_tx_body(input_ref, output_key, op_return); }

Bytes CheckpointTx::encode() const {
    Bytes out = body();
    if (sig.r.is_infinity())
        out.insert(out.end(), kPointSize, 0);
    else
        append(out, pt_compress(sig.r));
    append(out, sig.z.to_bytes());
    return out;
}

std::optional<CheckpointTx> CheckpointTx::decode(const Bytes& wire) {
    if (wire.size() != kTxSize) return std::nullopt;
    CheckpointTx tx;
    tx.input_ref.assign(wire.begin(), wire.begin() + kInputRefSize);
    auto q = pt_decompress(Bytes(wire.begin() + 32, wire.begin() + 65));
    if (!q) return std::nullopt;
    tx.output_key = *q;
    std::copy(wire.begin() + 65, wire.begin() + 97, tx.op_return.begin());
    if (all_zero(wire.data() + 97, kPointSize)) {
        tx.sig.r = Point::infinity();
    } else {
        auto r = pt_decompress(Bytes(wire.begin() + 97, wire.begin() + 130));
        if (!r) return std::nullopt;
        tx.sig.r = *r;
    }
    auto z = Scalar::from_bytes(Bytes(wire.begin() + 130, wire.end()));
    if (!z) return std::nullopt;
    tx.sig.z = *z;
    return tx;
}

Bytes CheckpointTx::txid() const { return digest_bytes(sha256(encode())); }

CheckpointTx make_genesis(const Point& q1, const Digest& ckp) {
    CheckpointTx tx;
    tx.input_ref = Bytes(kInputRefSize, 0);
    tx.output_key = q1;
    tx.op_return = ckp;
    tx.sig = SchnorrSig{Point::infinity(), Scalar::zero()};
    return tx;
}

Bytes checkpoint_keyword() { return to_bytes("checkpoint"); }

uint64_t post_checkpoint(Pbb& pbb, const CheckpointTx& tx) {
    return pbb.post(checkpoint_keyword(), tx.encode());
}

Digest bootstrap_verify(const Pbb& pbb, const Bytes& genesis_txid) {
    struct Entry {
        CheckpointTx tx;
        Bytes id;
    };
    std::vector<Entry> entries;  // in counter order; undecodable posts skipped
    uint64_t top = pbb.get_counter();
    if (top > 0) {
        for (const auto& e : pbb.retrieve(1, top, checkpoint_keyword())) {
            auto tx = CheckpointTx::decode(e.value);
            if (!tx) continue;
            Bytes id = tx->txid();
            entries.push_back(Entry{std::move(*tx), std::move(id)});
        }
    }

    const Entry* cur = nullptr;
    for (const auto& e : entries)
        if (e.id == genesis_txid) {
            cur = &e;
            break;
        }
    if (!cur) throw std::runtime_error("checkpoint: genesis transaction not found");

    std::set<Bytes> visited{cur->id};
    uint64_t epoch = 1;
    for (;;) {
        // The earliest posted valid spend wins; a later transaction spending
        // the same output again is ignored, its input is already consumed.
        const Entry* next = nullptr;
        bool spend_posted = false;
        for (const auto& e : entries) {
            if (e.tx.input_ref != cur->id) continue;
            spend_posted = true;
            if (schnorr_verify(cur->tx.output_key, e.tx.body(), e.tx.sig)) {
                next = &e;
                break;
            }
        }
        if (!next) {
            if (spend_posted)
                throw std::runtime_error("checkpoint: no valid checkpoint at epoch " +
                                         std::to_string(epoch + 1));
            return cur->tx.op_return;
        }
        if (!visited.insert(next->id).second)
            throw std::runtime_error("checkpoint: spend chain loops");
        cur = next;
        ++epoch;
    }
}

std::vector<DkgOutput> run_dkg(const SessionParams& params,
                               const std::vector<NodeKeys>& keys, Drbg& rng) {
    if (params.n <= 0 || keys.size() != size_t(params.n))
        throw std::invalid_argument("checkpoint: key count does not match participant count");
    std::vector<std::unique_ptr<NodeState>> nodes;
    for (int i = 1; i <= params.n; ++i)
        nodes.push_back(std::make_unique<NodeState>(params, keys[size_t(i) - 1], uint32_t(i),
                                                    Drbg(rng.bytes(32))));
    std::vector<Bytes> deals;
    for (auto& node : nodes) {
        auto d = node->round1_deal();
        if (d) deals.push_back(std::move(*d));
    }
    std::vector<std::shared_ptr<const ParsedDeal>> parsed;
    for (const auto& w : deals) parsed.push_back(parse_deal(params, w));
    std::vector<Bytes> multicasts;
    for (auto& node : nodes) {
        auto m = node->round2_verify(parsed);
        if (m) multicasts.push_back(std::move(*m));
    }
    std::vector<Bytes> lists;
    for (auto& node : nodes) {
        auto l = node->round3_aggregate(multicasts);
        if (l) lists.push_back(std::move(*l));
    }
    std::vector<DkgOutput> outs;
    for (auto& node : nodes) outs.push_back(node->finalize(lists));
    return outs;
}

}  // namespace atdkg
