// SHA-256 and the domain-tagged hash that every primitive derives from.
// Tagged form: SHA-256(len(tag) || tag || data), tag ASCII, length one byte.
#pragma once

#include <array>

#include "atdkg/bytes.hpp"

namespace atdkg {

using Digest = std::array<uint8_t, 32>;

Digest sha256(const uint8_t* data, size_t len);
Digest sha256(const Bytes& data);

Digest tagged_hash(const std::string& tag, const Bytes& data);

inline Bytes digest_bytes(const Digest& d) {
    return Bytes(d.begin(), d.end());
}

// Deterministic byte stream: block i = SHA-256(key || BE64(i)), key = SHA-256(seed).
// Used for all simulation randomness so runs are platform-stable.
class Drbg {
  public:
    explicit Drbg(const Bytes& seed_material);

    void fill(uint8_t* out, size_t len);
    Bytes bytes(size_t len);
    uint64_t next_u64();
    // Uniform value in [0, bound); bound > 0. Rejection sampling, no modulo bias.
    uint64_t next_below(uint64_t bound);

  private:
    void refill();
    Digest key_;
    uint64_t counter_ = 0;
    Digest block_{};
    size_t pos_ = 32;
};

}  // namespace atdkg
