// Bitcoin-style checkpointing. Each epoch's validator set holds a jointly
// generated Schnorr key; one transaction per epoch spends the previous
// epoch's output to the next epoch's key and carries the digest of the
// checkpointed block. Signing is non-interactive threshold Schnorr: a second
// key generation run supplies the shared nonce, every sub-ID publishes a
// partial signature, and any t+1 verified partials interpolate to the full
// signature. A late-joining client replays the spend chain from the genesis
// transaction and returns the digest carried by the tip.
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "atdkg/bulletin.hpp"
#include "atdkg/dkg.hpp"
#include "atdkg/weights.hpp"

namespace atdkg {

// One epoch's signing roster: validators with weights, the sub-ID allocation
// derived from those weights, and the key material from the epoch's key
// generation over the sub-IDs. A validator with d_j sub-IDs holds d_j
// independent key shares; sub-IDs are assigned contiguously in roster order.
struct Configuration {
    uint64_t epoch = 0;
    std::vector<std::pair<uint32_t, uint64_t>> validators;  // (id, weight)
    Allocation allocation;                                  // aligned with validators
    Point q;                                                // epoch public key
    std::vector<Point> pk_shares;                           // sub-ID i at [i-1]

    size_t total_sub_ids() const;
    // Validator id owning 1-based sub-ID index sub.
    uint32_t owner_of(uint32_t sub) const;
    // First 1-based sub-ID index and count for the validator at roster
    // position pos (0-based).
    std::pair<uint32_t, uint32_t> sub_id_range(size_t pos) const;
};

struct SchnorrSig {
    Point r;   // nonce commitment
    Scalar z;
};

// One sub-ID's share of a threshold signature under the common nonce
// commitment r: z = k_i + c * x_i for that sub-ID's nonce and key shares.
struct PartialSig {
    uint32_t signer = 0;  // 1-based sub-ID index
    Point r;
    Scalar z;
};

// Fiat-Shamir challenge binding the nonce commitment, the public key, and
// the message.
Scalar schnorr_challenge(const Point& r, const Point& pk, const Bytes& msg);

PartialSig partial_sign(uint32_t signer, const Scalar& k_i, const Point& r,
                        const Scalar& x_i, const Point& pk, const Bytes& msg);

// True iff g^z = r_i * pk_i^c, where r_i and pk_i are the signer's public
// shares from the nonce and key generations and c the common challenge.
bool verify_partial(const PartialSig& ps, const Point& r_i, const Point& pk_i,
                    const Scalar& c);

// Interpolates z at index 0 from at least t+1 verified partials with distinct
// signer indices. Any large-enough subset of honest partials yields the same
// signature because the z shares lie on one degree-<=t polynomial.
SchnorrSig combine_partials(int t, const std::vector<PartialSig>& partials);

bool schnorr_verify(const Point& pk, const Bytes& msg, const SchnorrSig& sig);

// Canonical signed portion of a checkpoint transaction:
// prev(32) || q_next(33) || op_return(32).
Bytes build_tx_body(const Bytes& prev, const Point& q_next, const Digest& ckp);

// Wire: input_ref(32) || output_key(33) || op_return(32) || r(33) || z(32).
// The genesis transaction is unsigned: its input_ref and signature slots are
// all zero on the wire, the r slot decodes to the identity element, and no
// verification is ever applied to it.
struct CheckpointTx {
    Bytes input_ref;   // id of the spent transaction, 32 bytes
    Point output_key;  // next epoch's key
    Digest op_return;  // checkpointed block digest
    SchnorrSig sig;    // under the spent output's key

    Bytes body() const;
    Bytes encode() const;
    static std::optional<CheckpointTx> decode(const Bytes& wire);
    Bytes txid() const;  // hash of the full wire encoding
};

CheckpointTx make_genesis(const Point& q1, const Digest& ckp);

// Keyword under which checkpoint transactions are posted.
Bytes checkpoint_keyword();

uint64_t post_checkpoint(Pbb& pbb, const CheckpointTx& tx);

// Walks the spend chain from the given genesis transaction id, verifying
// each link's signature under the predecessor's output key, and returns the
// digest carried by the tip. When several posted transactions spend the same
// output, the earliest valid one wins, so a stale-key signature appearing
// after the output was already spent changes nothing. Throws when the
// genesis transaction is absent or when some epoch's output has spends but
// none with a valid signature, naming the epoch.
Digest bootstrap_verify(const Pbb& pbb, const Bytes& genesis_txid);

// Drives one complete honest key generation over params.n sub-IDs, with
// keys[i-1] held by sub-ID i, and returns every sub-ID's output. The same
// routine produces epoch keys and signing nonces: the nonce run's public key
// is the signature's nonce commitment and its secret shares are the
// per-signer nonces. rng seeds each sub-ID's private randomness. Throws when
// key derivation fails at any sub-ID.
std::vector<DkgOutput> run_dkg(const SessionParams& params,
                               const std::vector<NodeKeys>& keys, Drbg& rng);

}  // namespace atdkg
