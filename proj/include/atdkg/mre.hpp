// Multi-recipient hybrid encryption with shared randomness, and the
// discrete-log-equality proofs that make decryptions publicly checkable.
#pragma once

#include <optional>

#include "atdkg/ec.hpp"

namespace atdkg {

// One ciphertext for n recipients: c0 = g^r is shared, payload i is the
// 32-byte pad for recipient i XORed with that recipient's encoded scalar.
struct MreCiphertext {
    Point c0;
    std::vector<Bytes> payloads;
};

// Pad for one recipient, derived from the Diffie-Hellman share c0^dk = ek^r.
Bytes mre_pad(const Point& shared);

MreCiphertext mre_encrypt(const std::vector<Point>& eks, const std::vector<Scalar>& msgs,
                          const Scalar& r);

// Recipient index i is 1-based. Empty when the unpadded bytes are not a
// canonical scalar (value at or above the group order); such shares are
// invalid rather than reduced.
std::optional<Scalar> mre_decrypt(const MreCiphertext& ct, size_t i, const Scalar& dk);

// Publicly verifiable decryption: m is the claimed 32-byte plaintext (raw, so
// even a non-canonical value can be exposed), shared = c0^dk, and (c, z) is a
// Fiat-Shamir DLEQ transcript proving log_g(ek) = log_c0(shared).
struct DecryptionProof {
    Bytes m;
    Point shared;
    Scalar c;
    Scalar z;

    Bytes encode() const;
    static std::optional<DecryptionProof> decode(const Bytes& b129);
};

inline constexpr size_t kDecryptionProofSize = 129;

DecryptionProof prove_decryption(const Point& c0, const Bytes& payload, const Scalar& dk,
                                 const Point& ek);
bool verify_decryption(const Point& c0, const Bytes& payload, const Point& ek,
                       const DecryptionProof& proof);

}  // namespace atdkg
