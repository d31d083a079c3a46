// Forward-secure signing for a fixed number of protocol rounds. One
// Winternitz hash-chain keypair is generated per round under a single
// verification record; advancing a round erases that round's signing seed, so
// a later key compromise cannot forge messages for earlier rounds.
//
// Winternitz parameters: 4-bit digits, 64 message digits plus 3 checksum
// digits, 67 chains of 15 hash steps. Signatures are 67*32 = 2144 bytes and
// involve no group exponentiations.
#pragma once

#include "atdkg/bytes.hpp"
#include "atdkg/hash.hpp"

namespace atdkg {

struct EpochSigKeys {
    Bytes vk;                  // 32 bytes per round, concatenated
    std::vector<Bytes> seeds;  // per-round chain seeds; wiped as rounds pass
    int rounds = 0;
    int current = 1;  // lowest round still signable
};

inline constexpr size_t kFsSignatureSize = 67 * 32;

EpochSigKeys fs_keygen(int rounds, Drbg& rng);

// Deterministic; round must equal keys.current with its seed intact.
Bytes fs_sign(const EpochSigKeys& keys, int round, const Bytes& msg);

// Erases the current round's signing seed and advances.
void fs_update(EpochSigKeys& keys);

bool fs_verify(const Bytes& vk, int round, const Bytes& sig, const Bytes& msg);

}  // namespace atdkg
