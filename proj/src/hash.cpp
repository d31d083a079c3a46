#include "atdkg/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace atdkg {

namespace {

// one fetched algorithm and one context per thread; hashing is hot enough in
// the hash-chain signatures that per-call context setup shows up in profiles
struct Sha256Ctx {
    EVP_MD* md = EVP_MD_fetch(nullptr, "SHA2-256", nullptr);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~Sha256Ctx() {
        EVP_MD_CTX_free(ctx);
        EVP_MD_free(md);
    }
};

}  // namespace

Digest sha256(const uint8_t* data, size_t len) {
    thread_local Sha256Ctx c;
    Digest out;
    unsigned int out_len = 0;
    if (EVP_DigestInit_ex(c.ctx, c.md, nullptr) != 1 ||
        EVP_DigestUpdate(c.ctx, data, len) != 1 ||
        EVP_DigestFinal_ex(c.ctx, out.data(), &out_len) != 1 || out_len != 32)
        throw std::runtime_error("sha256: digest failed");
    return out;
}

Digest sha256(const Bytes& data) {
    return sha256(data.data(), data.size());
}

Digest tagged_hash(const std::string& tag, const Bytes& data) {
    if (tag.empty() || tag.size() > 255)
        throw std::invalid_argument("tagged_hash: tag must be 1..255 bytes");
    Bytes buf;
    buf.reserve(1 + tag.size() + data.size());
    buf.push_back(uint8_t(tag.size()));
    append(buf, to_bytes(tag));
    append(buf, data);
    return sha256(buf);
}

Drbg::Drbg(const Bytes& seed_material) : key_(sha256(seed_material)) {}

void Drbg::refill() {
    Bytes buf(key_.begin(), key_.end());
    append_u64be(buf, counter_++);
    block_ = sha256(buf);
    pos_ = 0;
}

void Drbg::fill(uint8_t* out, size_t len) {
    while (len > 0) {
        if (pos_ == 32) refill();
        size_t n = std::min(len, size_t(32) - pos_);
        std::memcpy(out, block_.data() + pos_, n);
        pos_ += n;
        out += n;
        len -= n;
    }
}

Bytes Drbg::bytes(size_t len) {
    Bytes out(len);
    fill(out.data(), len);
    return out;
}

uint64_t Drbg::next_u64() {
    uint8_t buf[8];
    fill(buf, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | buf[i];
    return v;
}

uint64_t Drbg::next_below(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: zero bound");
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

}  // namespace atdkg
