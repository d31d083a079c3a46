#include "atdkg/vrf.hpp"

#include <cmath>
#include <stdexcept>

namespace atdkg {

namespace {

// Try-and-increment onto the curve: candidate x = H(data || counter) with even
// y; at most 2^-40 residual failure odds after 40 counters, loop to 255 anyway.
Point hash_to_group(const Bytes& data) {
    for (int counter = 0; counter < 256; ++counter) {
        Bytes attempt = data;
        append_u8(attempt, uint8_t(counter));
        Digest d = tagged_hash("VRF-H", attempt);
        Bytes enc(33);
        enc[0] = 0x02;
        std::copy(d.begin(), d.end(), enc.begin() + 1);
        if (auto p = pt_decompress(enc)) return *p;
    }
    throw std::runtime_error("hash_to_group: no curve point found");
}

Digest vrf_output_digest(const Point& gamma) {
    return tagged_hash("VRF-OUT", pt_compress(gamma));
}

Scalar vrf_challenge(const Point& h, const Point& gamma, const Point& u, const Point& v,
                     const Point& rvk) {
    Bytes transcript;
    append(transcript, pt_compress(h));
    append(transcript, pt_compress(gamma));
    append(transcript, pt_compress(u));
    append(transcript, pt_compress(v));
    append(transcript, pt_compress(rvk));
    return hash_to_scalar("VRF-CH", transcript);
}

}  // namespace

VrfKeyPair vrf_keygen(Drbg& rng) {
    VrfKeyPair kp;
    kp.rsk = Scalar::random(rng);
    kp.rvk = pt_base_mul(kp.rsk);
    return kp;
}

Bytes VrfCredential::encode() const {
    Bytes out = pt_compress(gamma);
    append(out, c.to_bytes());
    append(out, s.to_bytes());
    return out;
}

std::optional<VrfCredential> VrfCredential::decode(const Bytes& b97) {
    if (b97.size() != kVrfCredentialSize) return std::nullopt;
    ByteReader r(b97);
    auto gamma = pt_decompress(r.take(33));
    if (!gamma) return std::nullopt;
    auto c = Scalar::from_bytes(r.take(32));
    auto s = Scalar::from_bytes(r.take(32));
    if (!c || !s) return std::nullopt;
    VrfCredential cred;
    cred.gamma = *gamma;
    cred.c = *c;
    cred.s = *s;
    cred.output = vrf_output_digest(cred.gamma);
    return cred;
}

VrfCredential vrf_eval(const VrfKeyPair& keys, const Bytes& input) {
    Point h = hash_to_group(input);
    Point gamma = pt_mul(h, keys.rsk);

    // deterministic nonce bound to the key and the full input
    Bytes nonce_input = keys.rsk.to_bytes();
    append(nonce_input, pt_compress(h));
    append(nonce_input, input);
    Scalar w = hash_to_scalar("VRF-NONCE", nonce_input);

    Point u = pt_base_mul(w);
    Point v = pt_mul(h, w);
    VrfCredential cred;
    cred.gamma = gamma;
    cred.c = vrf_challenge(h, gamma, u, v, keys.rvk);
    cred.s = sc_sub(w, sc_mul(cred.c, keys.rsk));
    cred.output = vrf_output_digest(gamma);
    return cred;
}

bool vrf_verify(const Point& rvk, const Bytes& input, const VrfCredential& cred) {
    if (cred.gamma.is_infinity() || rvk.is_infinity()) return false;
    Point h = hash_to_group(input);
    // u = g^s * rvk^c, v = h^s * gamma^c; honest transcripts give back g^w, h^w
    Point u = pt_multiexp({Point::generator(), rvk}, {cred.s, cred.c});
    Point v = pt_multiexp({h, cred.gamma}, {cred.s, cred.c});
    if (u.is_infinity() || v.is_infinity()) return false;
    return vrf_challenge(h, cred.gamma, u, v, rvk) == cred.c;
}

bool output_below_ratio(const Digest& output, const Ratio& ratio) {
    if (ratio.den == 0) throw std::invalid_argument("output_below_ratio: zero denominator");
    // y * den <= num * (2^256 - 1), both sides as 320-bit integers
    using u128 = unsigned __int128;
    uint64_t y[4];  // little-endian limbs of the big-endian output digest
    for (int i = 0; i < 4; ++i) {
        uint64_t limb = 0;
        for (int b = 0; b < 8; ++b) limb = limb << 8 | output[(3 - i) * 8 + b];
        y[i] = limb;
    }
    uint64_t lhs[5];
    u128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        u128 prod = (u128)y[i] * ratio.den + carry;
        lhs[i] = (uint64_t)prod;
        carry = prod >> 64;
    }
    lhs[4] = (uint64_t)carry;

    // num * (2^256 - 1) = (num - 1) * 2^256 + (2^256 - num)
    uint64_t rhs[5];
    if (ratio.num == 0) {
        for (auto& limb : rhs) limb = 0;
    } else {
        rhs[0] = ~(ratio.num - 1);  // two's complement of num over 256 bits
        rhs[1] = rhs[2] = rhs[3] = ~uint64_t(0);
        rhs[4] = ratio.num - 1;
    }
    for (int i = 4; i >= 0; --i) {
        if (lhs[i] != rhs[i]) return lhs[i] < rhs[i];
    }
    return true;
}

std::optional<VrfCredential> sortition(const VrfKeyPair& keys, const Bytes& rand,
                                       const std::string& event, const Ratio& ratio) {
    Bytes input = rand;
    append(input, to_bytes(event));
    VrfCredential cred = vrf_eval(keys, input);
    if (!output_below_ratio(cred.output, ratio)) return std::nullopt;
    return cred;
}

bool sortition_verify(const Point& rvk, const Bytes& rand, const Ratio& ratio,
                      const std::string& event, const VrfCredential& cred) {
    Bytes input = rand;
    append(input, to_bytes(event));
    if (!vrf_verify(rvk, input, cred)) return false;
    return output_below_ratio(vrf_output_digest(cred.gamma), ratio);
}

Ratio any_trust_ratio(int n, int t, double failure_bound) {
    if (t < 0 || t >= n) throw std::invalid_argument("any_trust_ratio: need 0 <= t < n");
    if (failure_bound <= 0.0 || failure_bound >= 1.0)
        throw std::invalid_argument("any_trust_ratio: failure_bound must be in (0,1)");
    int honest = n - t;
    // (1-p)^honest <= failure_bound  <=>  p >= 1 - failure_bound^(1/honest)
    double p = 1.0 - std::exp(std::log(failure_bound) / honest);
    const uint64_t den = uint64_t(1) << 32;
    auto tail = [&](uint64_t num) {
        return honest * std::log1p(-double(num) / double(den));
    };
    uint64_t num = uint64_t(std::ceil(p * double(den)));
    while (num < den && tail(num) > std::log(failure_bound)) num++;
    if (num > den) throw std::runtime_error("any_trust_ratio: bound unreachable");
    return Ratio{num, den};
}

}  // namespace atdkg
