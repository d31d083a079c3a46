// Sortition VRF: a DDH-based verifiable random function plus the threshold
// test that turns its output into a committee-membership credential.
#pragma once

#include <optional>

#include "atdkg/ec.hpp"

namespace atdkg {

// num/den with 0 <= num/den <= 1; den > 0.
struct Ratio {
    uint64_t num = 0;
    uint64_t den = 1;
};

struct VrfKeyPair {
    Scalar rsk;
    Point rvk;  // g^rsk
};

VrfKeyPair vrf_keygen(Drbg& rng);

// Credential of committee membership. Wire form is gamma || c || s (97 bytes);
// the output digest is recomputed from gamma on decode.
struct VrfCredential {
    Digest output;
    Point gamma;
    Scalar c;
    Scalar s;

    Bytes encode() const;
    static std::optional<VrfCredential> decode(const Bytes& b97);
};

inline constexpr size_t kVrfCredentialSize = 97;

// VRF output and proof on input; deterministic per (rsk, input).
VrfCredential vrf_eval(const VrfKeyPair& keys, const Bytes& input);
bool vrf_verify(const Point& rvk, const Bytes& input, const VrfCredential& cred);

// Threshold test: output / 2^256 <= ratio, exact integer comparison.
bool output_below_ratio(const Digest& output, const Ratio& ratio);

// How committee membership is decided. `vrf` runs real sortition; `forced`
// pins the committees up front so a harness can reproduce exact scenarios.
// Forced credentials occupy the same 97 wire bytes, zero-filled, keeping
// message sizes identical across modes.
enum class SortitionMode { vrf, forced };

// Committee draw for the named event under the given beacon value. Empty when
// the node's VRF output misses the threshold.
std::optional<VrfCredential> sortition(const VrfKeyPair& keys, const Bytes& rand,
                                       const std::string& event, const Ratio& ratio);
bool sortition_verify(const Point& rvk, const Bytes& rand, const Ratio& ratio,
                      const std::string& event, const VrfCredential& cred);

// Smallest per-node selection probability p with
// Pr[no honest node selected] = (1-p)^(n-t) <= failure_bound.
Ratio any_trust_ratio(int n, int t, double failure_bound);

}  // namespace atdkg
