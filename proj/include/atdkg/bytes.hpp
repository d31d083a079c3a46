// Byte-string helpers shared by all wire formats.
#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace atdkg {

using Bytes = std::vector<uint8_t>;

inline Bytes to_bytes(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

inline void append(Bytes& out, const Bytes& in) {
    out.insert(out.end(), in.begin(), in.end());
}

inline void append(Bytes& out, const uint8_t* p, size_t len) {
    out.insert(out.end(), p, p + len);
}

inline void append_u8(Bytes& out, uint8_t v) {
    out.push_back(v);
}

inline void append_u32be(Bytes& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

inline void append_u64be(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline std::string hex_encode(const Bytes& b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

inline Bytes hex_decode(const std::string& s) {
    if (s.size() % 2 != 0) throw std::invalid_argument("hex_decode: odd length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("hex_decode: bad digit");
    };
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = uint8_t(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
    return out;
}

// Sequential reader with bounds checking; all parse failures throw.
class ByteReader {
  public:
    explicit ByteReader(const Bytes& b) : data_(b.data()), size_(b.size()) {}

    size_t remaining() const { return size_ - pos_; }
    bool done() const { return pos_ == size_; }

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint32_t u32be() {
        need(4);
        uint32_t v = uint32_t(data_[pos_]) << 24 | uint32_t(data_[pos_ + 1]) << 16 |
                     uint32_t(data_[pos_ + 2]) << 8 | uint32_t(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    Bytes take(size_t n) {
        need(n);
        Bytes out(data_ + pos_, data_ + pos_ + n);
        pos_ += n;
        return out;
    }

  private:
    void need(size_t n) const {
        if (size_ - pos_ < n) throw std::runtime_error("parse: truncated message");
    }
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

// Overwrites a buffer before releasing it; used for key erasure.
inline void secure_wipe(Bytes& b) {
    volatile uint8_t* p = b.data();
    for (size_t i = 0; i < b.size(); ++i) p[i] = 0;
    b.clear();
    b.shrink_to_fit();
}

}  // namespace atdkg
