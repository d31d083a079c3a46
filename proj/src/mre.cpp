#include "atdkg/mre.hpp"

#include <stdexcept>

namespace atdkg {

Bytes mre_pad(const Point& shared) {
    Bytes input = pt_compress(shared);
    append_u32be(input, 0);  // expansion counter; one block covers a scalar
    return digest_bytes(tagged_hash("MRE-PAD", input));
}

MreCiphertext mre_encrypt(const std::vector<Point>& eks, const std::vector<Scalar>& msgs,
                          const Scalar& r) {
    if (eks.size() != msgs.size())
        throw std::invalid_argument("mre_encrypt: length mismatch");
    MreCiphertext ct;
    ct.c0 = pt_base_mul(r);
    ct.payloads.reserve(eks.size());
    for (size_t i = 0; i < eks.size(); ++i) {
        Bytes pad = mre_pad(pt_mul(eks[i], r));
        Bytes enc = msgs[i].to_bytes();
        for (size_t b = 0; b < 32; ++b) enc[b] ^= pad[b];
        ct.payloads.push_back(std::move(enc));
    }
    return ct;
}

std::optional<Scalar> mre_decrypt(const MreCiphertext& ct, size_t i, const Scalar& dk) {
    if (i < 1 || i > ct.payloads.size())
        throw std::out_of_range("mre_decrypt: recipient index");
    Bytes pad = mre_pad(pt_mul(ct.c0, dk));
    Bytes m = ct.payloads[i - 1];
    for (size_t b = 0; b < 32; ++b) m[b] ^= pad[b];
    return Scalar::from_bytes(m);
}

Bytes DecryptionProof::encode() const {
    Bytes out = m;
    append(out, pt_compress(shared));
    append(out, c.to_bytes());
    append(out, z.to_bytes());
    return out;
}

std::optional<DecryptionProof> DecryptionProof::decode(const Bytes& b129) {
    if (b129.size() != kDecryptionProofSize) return std::nullopt;
    ByteReader r(b129);
    DecryptionProof p;
    p.m = r.take(32);
    auto shared = pt_decompress(r.take(33));
    auto c = Scalar::from_bytes(r.take(32));
    auto z = Scalar::from_bytes(r.take(32));
    if (!shared || !c || !z) return std::nullopt;
    p.shared = *shared;
    p.c = *c;
    p.z = *z;
    return p;
}

namespace {

Scalar dleq_challenge(const Point& ek, const Point& c0, const Point& shared,
                      const Point& a1, const Point& a2) {
    Bytes transcript;
    append(transcript, pt_compress(ek));
    append(transcript, pt_compress(c0));
    append(transcript, pt_compress(shared));
    append(transcript, pt_compress(a1));
    append(transcript, pt_compress(a2));
    return hash_to_scalar("DLEQ", transcript);
}

}  // namespace

DecryptionProof prove_decryption(const Point& c0, const Bytes& payload, const Scalar& dk,
                                 const Point& ek) {
    if (payload.size() != 32) throw std::invalid_argument("prove_decryption: payload size");
    DecryptionProof p;
    p.shared = pt_mul(c0, dk);
    Bytes pad = mre_pad(p.shared);
    p.m = payload;
    for (size_t b = 0; b < 32; ++b) p.m[b] ^= pad[b];

    Bytes nonce_input = dk.to_bytes();
    append(nonce_input, pt_compress(c0));
    append(nonce_input, pt_compress(p.shared));
    Scalar w = hash_to_scalar("DLEQ-NONCE", nonce_input);
    Point a1 = pt_base_mul(w);
    Point a2 = pt_mul(c0, w);
    p.c = dleq_challenge(ek, c0, p.shared, a1, a2);
    p.z = sc_sub(w, sc_mul(p.c, dk));
    return p;
}

bool verify_decryption(const Point& c0, const Bytes& payload, const Point& ek,
                       const DecryptionProof& proof) {
    if (payload.size() != 32 || proof.m.size() != 32) return false;
    if (c0.is_infinity() || ek.is_infinity() || proof.shared.is_infinity()) return false;
    // a1 = g^z * ek^c, a2 = c0^z * shared^c
    Point a1 = pt_multiexp({Point::generator(), ek}, {proof.z, proof.c});
    Point a2 = pt_multiexp({c0, proof.shared}, {proof.z, proof.c});
    if (a1.is_infinity() || a2.is_infinity()) return false;
    if (dleq_challenge(ek, c0, proof.shared, a1, a2) != proof.c) return false;
    Bytes pad = mre_pad(proof.shared);
    for (size_t b = 0; b < 32; ++b)
        if (proof.m[b] != (payload[b] ^ pad[b])) return false;
    return true;
}

}  // namespace atdkg
