#include "atdkg/fs_sig.hpp"

#include <array>
#include <stdexcept>

namespace atdkg {

namespace {

constexpr int kChains = 67;
constexpr int kSteps = 15;

Bytes chain_start(const Bytes& seed, int chain) {
    Bytes input = seed;
    append_u32be(input, uint32_t(chain));
    return digest_bytes(tagged_hash("WOTS-SK", input));
}

// position-bound step so partial chains cannot be spliced across digits
Bytes chain_step(int chain, int pos, const Bytes& y) {
    Bytes input;
    append_u32be(input, uint32_t(chain));
    append_u8(input, uint8_t(pos));
    append(input, y);
    return digest_bytes(tagged_hash("WOTS-CH", input));
}

Bytes chain_advance(int chain, Bytes y, int from, int steps) {
    for (int j = from; j < from + steps; ++j) y = chain_step(chain, j, y);
    return y;
}

Bytes round_pk(const Bytes& seed) {
    Bytes ends;
    ends.reserve(size_t(kChains) * 32);
    for (int chain = 0; chain < kChains; ++chain)
        append(ends, chain_advance(chain, chain_start(seed, chain), 0, kSteps));
    return digest_bytes(tagged_hash("WOTS-PK", ends));
}

// 64 message digits from the digest plus 3 checksum digits
std::array<uint8_t, kChains> message_digits(int round, const Bytes& msg) {
    Bytes input;
    append_u32be(input, uint32_t(round));
    append(input, msg);
    Digest d = tagged_hash("WOTS-MSG", input);
    std::array<uint8_t, kChains> digits;
    int checksum = 0;
    for (int i = 0; i < 32; ++i) {
        digits[2 * i] = d[i] >> 4;
        digits[2 * i + 1] = d[i] & 0xF;
    }
    for (int i = 0; i < 64; ++i) checksum += kSteps - digits[i];
    digits[64] = uint8_t(checksum >> 8 & 0xF);  // checksum <= 960 < 16^3
    digits[65] = uint8_t(checksum >> 4 & 0xF);
    digits[66] = uint8_t(checksum & 0xF);
    return digits;
}

}  // namespace

EpochSigKeys fs_keygen(int rounds, Drbg& rng) {
    if (rounds < 1) throw std::invalid_argument("fs_keygen: rounds must be >= 1");
    EpochSigKeys keys;
    keys.rounds = rounds;
    keys.seeds.reserve(size_t(rounds));
    for (int r = 0; r < rounds; ++r) {
        keys.seeds.push_back(rng.bytes(32));
        append(keys.vk, round_pk(keys.seeds.back()));
    }
    return keys;
}

Bytes fs_sign(const EpochSigKeys& keys, int round, const Bytes& msg) {
    if (round != keys.current)
        throw std::logic_error("fs_sign: round key unavailable (erased or not current)");
    if (round < 1 || round > keys.rounds || keys.seeds[size_t(round - 1)].empty())
        throw std::logic_error("fs_sign: round key unavailable (erased or not current)");
    const Bytes& seed = keys.seeds[size_t(round - 1)];
    auto digits = message_digits(round, msg);
    Bytes sig;
    sig.reserve(kFsSignatureSize);
    for (int chain = 0; chain < kChains; ++chain)
        append(sig, chain_advance(chain, chain_start(seed, chain), 0, digits[size_t(chain)]));
    return sig;
}

void fs_update(EpochSigKeys& keys) {
    if (keys.current <= keys.rounds) {
        secure_wipe(keys.seeds[size_t(keys.current - 1)]);
        keys.current++;
    }
}

bool fs_verify(const Bytes& vk, int round, const Bytes& sig, const Bytes& msg) {
    if (vk.size() % 32 != 0) return false;
    int rounds = int(vk.size() / 32);
    if (round < 1 || round > rounds) return false;
    if (sig.size() != kFsSignatureSize) return false;
    auto digits = message_digits(round, msg);
    Bytes ends;
    ends.reserve(size_t(kChains) * 32);
    for (int chain = 0; chain < kChains; ++chain) {
        Bytes y(sig.begin() + chain * 32, sig.begin() + (chain + 1) * 32);
        int d = digits[size_t(chain)];
        append(ends, chain_advance(chain, std::move(y), d, kSteps - d));
    }
    Digest pk = tagged_hash("WOTS-PK", ends);
    return std::equal(pk.begin(), pk.end(), vk.begin() + (round - 1) * 32);
}

}  // namespace atdkg
