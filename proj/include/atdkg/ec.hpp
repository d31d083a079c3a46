// secp256k1 group and scalar arithmetic.
//
// Wire forms are normative for the whole project: group elements are 33-byte
// compressed points, scalars are 32-byte big-endian integers strictly below the
// group order (values >= order are rejected at parse time, never reduced).
//
// Every exponentiation call site reports to the thread-local meter below;
// multi-exponentiations report one count per constituent term. Point addition,
// doubling and serialization are not metered.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "atdkg/bytes.hpp"
#include "atdkg/hash.hpp"

namespace atdkg {

extern thread_local uint64_t* exp_counter_sink;

inline void count_exps(uint64_t k) {
    if (exp_counter_sink) *exp_counter_sink += k;
}

// Field element mod the curve prime, 4x64 little-endian limbs, fully reduced.
struct Fe {
    uint64_t v[4];
};

// Integer mod the group order, 4x64 little-endian limbs, fully reduced.
struct Scalar {
    uint64_t v[4] = {0, 0, 0, 0};

    static Scalar zero() { return Scalar{}; }
    static Scalar one() { return from_u64(1); }
    static Scalar from_u64(uint64_t x) {
        Scalar s;
        s.v[0] = x;
        return s;
    }
    // x may be negative; reduced into [0, order).
    static Scalar from_i64(int64_t x);
    // Strict decode of 32 big-endian bytes; empty if the value is >= the order.
    static std::optional<Scalar> from_bytes(const Bytes& b32);
    // Decode 32 bytes reducing mod the order (hash-to-scalar outputs only).
    static Scalar reduce_from_bytes(const Bytes& b32);
    static Scalar random(Drbg& rng);

    Bytes to_bytes() const;
    bool is_zero() const;
    bool operator==(const Scalar& o) const;
    bool operator!=(const Scalar& o) const { return !(*this == o); }
};

Scalar sc_add(const Scalar& a, const Scalar& b);
Scalar sc_sub(const Scalar& a, const Scalar& b);
Scalar sc_mul(const Scalar& a, const Scalar& b);
Scalar sc_neg(const Scalar& a);
Scalar sc_inv(const Scalar& a);  // a != 0
// Batch inversion (Montgomery trick); all inputs nonzero.
std::vector<Scalar> sc_inv_batch(const std::vector<Scalar>& xs);

// Curve point in Jacobian coordinates; z = 0 encodes the identity.
struct Point {
    Fe x, y, z;

    static Point infinity();
    static Point generator();
    bool is_infinity() const;
};

Point pt_add(const Point& a, const Point& b);
Point pt_dbl(const Point& a);
Point pt_neg(const Point& a);
bool pt_equal(const Point& a, const Point& b);

// k*P and k*G; each reports one EXP.
Point pt_mul(const Point& p, const Scalar& k);
Point pt_base_mul(const Scalar& k);
// Product of pts[i]^ks[i]; reports pts.size() EXPs. Lengths must match.
Point pt_multiexp(const std::vector<Point>& pts, const std::vector<Scalar>& ks);

Bytes pt_compress(const Point& p);  // identity not encodable -> throws
std::vector<Bytes> pt_compress_batch(const std::vector<Point>& ps);
// Validates prefix, coordinate range and curve membership.
std::optional<Point> pt_decompress(const Bytes& b33);

// Random-oracle instantiation shared by every proof system in the project:
// SHA-256 under the given domain tag, reduced mod the group order.
Scalar hash_to_scalar(const std::string& tag, const Bytes& data);

}  // namespace atdkg
