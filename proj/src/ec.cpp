#include "atdkg/ec.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace atdkg {

thread_local uint64_t* exp_counter_sink = nullptr;

namespace {

using u64 = uint64_t;
using u128 = unsigned __int128;

// curve prime p = 2^256 - 2^32 - 977 and group order, little-endian limbs
constexpr u64 P_LIMBS[4] = {0xFFFFFFFEFFFFFC2FULL, 0xFFFFFFFFFFFFFFFFULL,
                            0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL};
constexpr u64 P_COMP = 0x1000003D1ULL;  // 2^256 - p
constexpr u64 N_LIMBS[4] = {0xBFD25E8CD0364141ULL, 0xBAAEDCE6AF48A03BULL,
                            0xFFFFFFFFFFFFFFFEULL, 0xFFFFFFFFFFFFFFFFULL};
// 2^256 - order (129 bits)
constexpr u64 N_COMP[3] = {0x402DA1732FC9BEBFULL, 0x4551231950B75FC4ULL, 1ULL};
constexpr u64 P_MINUS_2[4] = {0xFFFFFFFEFFFFFC2DULL, 0xFFFFFFFFFFFFFFFFULL,
                              0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL};
constexpr u64 SQRT_EXP[4] = {0xFFFFFFFFBFFFFF0CULL, 0xFFFFFFFFFFFFFFFFULL,
                             0xFFFFFFFFFFFFFFFFULL, 0x3FFFFFFFFFFFFFFFULL};
constexpr u64 N_MINUS_2[4] = {0xBFD25E8CD036413FULL, 0xBAAEDCE6AF48A03BULL,
                              0xFFFFFFFFFFFFFFFEULL, 0xFFFFFFFFFFFFFFFFULL};
constexpr u64 GX_LIMBS[4] = {0x59F2815B16F81798ULL, 0x029BFCDB2DCE28D9ULL,
                             0x55A06295CE870B07ULL, 0x79BE667EF9DCBBACULL};
constexpr u64 GY_LIMBS[4] = {0x9C47D08FFB10D4B8ULL, 0xFD17B448A6855419ULL,
                             0x5DA4FBFC0E1108A8ULL, 0x483ADA7726A3C465ULL};

// ---- generic 4-limb helpers ----

inline int cmp4(const u64 a[4], const u64 b[4]) {
    for (int i = 3; i >= 0; --i) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

inline bool is_zero4(const u64 a[4]) {
    return (a[0] | a[1] | a[2] | a[3]) == 0;
}

// r = a - b, returns borrow
inline u64 sub4(u64 r[4], const u64 a[4], const u64 b[4]) {
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u128 d = (u128)a[i] - b[i] - borrow;
        r[i] = (u64)d;
        borrow = (d >> 64) & 1;
    }
    return (u64)borrow;
}

// r = a + b, returns carry
inline u64 add4(u64 r[4], const u64 a[4], const u64 b[4]) {
    u128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        u128 s = (u128)a[i] + b[i] + carry;
        r[i] = (u64)s;
        carry = s >> 64;
    }
    return (u64)carry;
}

// full 4x4 -> 8 limb product, column by column
inline void mul4x4(u64 r[8], const u64 a[4], const u64 b[4]) {
    u128 carry = 0;
    for (int k = 0; k < 7; ++k) {
        u128 column = carry;
        u64 overflow = 0;
        int lo = k < 4 ? 0 : k - 3;
        int hi = k < 4 ? k : 3;
        for (int i = lo; i <= hi; ++i) {
            u128 p = (u128)a[i] * b[k - i];
            column += p;
            if (column < p) overflow++;  // 128-bit wrap
        }
        r[k] = (u64)column;
        carry = (column >> 64) + ((u128)overflow << 64);
    }
    r[7] = (u64)carry;
}

// ---- field arithmetic mod p ----

inline void fe_reduce_final(Fe& r) {
    while (cmp4(r.v, P_LIMBS) >= 0) sub4(r.v, r.v, P_LIMBS);
}

// r = lo + hi * 2^256 mod p, where the full value may exceed p but hi is small
inline void fe_from_wide5(Fe& r, const u64 lo[4], u64 hi) {
    std::memcpy(r.v, lo, 32);
    while (hi) {
        // hi * 2^256 == hi * P_COMP (mod p)
        u128 acc = (u128)r.v[0] + (u128)hi * P_COMP;
        r.v[0] = (u64)acc;
        u64 carry = (u64)(acc >> 64);
        u64 next_hi = 0;
        for (int i = 1; i < 4 && carry; ++i) {
            u128 s = (u128)r.v[i] + carry;
            r.v[i] = (u64)s;
            carry = (u64)(s >> 64);
        }
        next_hi = carry;
        hi = next_hi;
    }
    fe_reduce_final(r);
}

inline Fe fe_add(const Fe& a, const Fe& b) {
    u64 t[4];
    u64 c = add4(t, a.v, b.v);
    Fe r;
    fe_from_wide5(r, t, c);
    return r;
}

inline Fe fe_sub(const Fe& a, const Fe& b) {
    u64 t[4];
    if (sub4(t, a.v, b.v)) add4(t, t, P_LIMBS);
    Fe r;
    std::memcpy(r.v, t, 32);
    return r;
}

inline void fe_reduce8(Fe& out, const u64 r[8]) {
    // fold high 256 bits: 2^256 == P_COMP (mod p)
    u64 t[4];
    u128 acc;
    u64 carry = 0;
    for (int i = 0; i < 4; ++i) {
        acc = (u128)r[i] + carry + (u128)r[i + 4] * P_COMP;
        t[i] = (u64)acc;
        carry = (u64)(acc >> 64);
    }
    fe_from_wide5(out, t, carry);
}

inline Fe fe_mul(const Fe& a, const Fe& b) {
    u64 r[8];
    mul4x4(r, a.v, b.v);
    Fe out;
    fe_reduce8(out, r);
    return out;
}

inline Fe fe_sqr(const Fe& a) {
    return fe_mul(a, a);
}

inline bool fe_is_zero(const Fe& a) {
    return is_zero4(a.v);
}

inline bool fe_eq(const Fe& a, const Fe& b) {
    return cmp4(a.v, b.v) == 0;
}

inline Fe fe_from_u64(u64 x) {
    return Fe{{x, 0, 0, 0}};
}

inline Fe fe_neg(const Fe& a) {
    if (fe_is_zero(a)) return a;
    Fe r;
    sub4(r.v, P_LIMBS, a.v);
    return r;
}

Fe fe_pow(const Fe& base, const u64 exp[4]) {
    Fe acc = fe_from_u64(1);
    bool started = false;
    for (int limb = 3; limb >= 0; --limb) {
        for (int bit = 63; bit >= 0; --bit) {
            if (started) acc = fe_sqr(acc);
            if ((exp[limb] >> bit) & 1) {
                if (started)
                    acc = fe_mul(acc, base);
                else {
                    acc = base;
                    started = true;
                }
            }
        }
    }
    return started ? acc : fe_from_u64(1);
}

inline Fe fe_inv(const Fe& a) {
    return fe_pow(a, P_MINUS_2);
}

// p = 3 (mod 4): candidate root a^((p+1)/4), verified by squaring
std::optional<Fe> fe_sqrt(const Fe& a) {
    Fe r = fe_pow(a, SQRT_EXP);
    if (!fe_eq(fe_sqr(r), a)) return std::nullopt;
    return r;
}

void fe_to_bytes(uint8_t out[32], const Fe& a) {
    for (int i = 0; i < 4; ++i) {
        u64 limb = a.v[3 - i];
        for (int j = 0; j < 8; ++j) out[8 * i + j] = uint8_t(limb >> (56 - 8 * j));
    }
}

bool fe_from_bytes(Fe& out, const uint8_t in[32]) {
    for (int i = 0; i < 4; ++i) {
        u64 limb = 0;
        for (int j = 0; j < 8; ++j) limb = limb << 8 | in[8 * i + j];
        out.v[3 - i] = limb;
    }
    return cmp4(out.v, P_LIMBS) < 0;
}

// ---- scalar arithmetic mod the group order ----

// reduce an up-to-9-limb value mod the order
void sc_reduce_wide(Scalar& out, const u64 in[], int limbs) {
    u64 w[9] = {0};
    std::memcpy(w, in, size_t(limbs) * 8);
    for (;;) {
        bool high = false;
        for (int i = 4; i < 9; ++i) high = high || w[i] != 0;
        if (!high) break;
        u64 hi[5];
        std::memcpy(hi, w + 4, 40);
        std::memset(w + 4, 0, 40);
        // w += hi * (2^256 - order), product spans limbs 0..7
        u128 carry = 0;
        for (int pos = 0; pos < 9; ++pos) {
            u128 column = (u128)w[pos] + carry;
            u64 spill = 0;
            for (int i = 0; i < 5; ++i) {
                int j = pos - i;
                if (j < 0 || j > 2) continue;
                u128 prod = (u128)hi[i] * N_COMP[j];
                column += prod;
                if (column < prod) spill++;
            }
            w[pos] = (u64)column;
            carry = (column >> 64) | ((u128)spill << 64);
        }
    }
    while (cmp4(w, N_LIMBS) >= 0) sub4(w, w, N_LIMBS);
    std::memcpy(out.v, w, 32);
}

Scalar sc_pow(const Scalar& base, const u64 exp[4]) {
    Scalar acc = Scalar::one();
    bool started = false;
    for (int limb = 3; limb >= 0; --limb) {
        for (int bit = 63; bit >= 0; --bit) {
            if (started) acc = sc_mul(acc, acc);
            if ((exp[limb] >> bit) & 1) {
                if (started)
                    acc = sc_mul(acc, base);
                else {
                    acc = base;
                    started = true;
                }
            }
        }
    }
    return started ? acc : Scalar::one();
}

// ---- wNAF recoding (variable time) ----

// digits in {+-1, +-3, ..., +-(2^w - 1)}, zero for skipped positions
int wnaf_recode(int8_t digits[260], const Scalar& k, int w) {
    // five limbs: subtracting a negative digit can push the value past 2^256
    u64 v[5] = {k.v[0], k.v[1], k.v[2], k.v[3], 0};
    int len = 0;
    const u64 mask = (1ULL << (w + 1)) - 1;
    const int64_t half = 1LL << w;
    while (v[0] | v[1] | v[2] | v[3] | v[4]) {
        int8_t d = 0;
        if (v[0] & 1) {
            int64_t z = int64_t(v[0] & mask);
            if (z >= half) z -= (half << 1);
            d = int8_t(z);
            if (z > 0) {
                u64 borrow = u64(z);
                for (int i = 0; i < 5 && borrow; ++i) {
                    u64 next = v[i] < borrow ? 1 : 0;
                    v[i] -= borrow;
                    borrow = next;
                }
            } else {
                u64 carry = u64(-z);
                for (int i = 0; i < 5 && carry; ++i) {
                    v[i] += carry;
                    carry = v[i] < carry ? 1 : 0;
                }
            }
        }
        digits[len++] = d;
        for (int i = 0; i < 4; ++i) v[i] = (v[i] >> 1) | (v[i + 1] << 63);
        v[4] >>= 1;
    }
    return len;
}

}  // namespace

// ---- Scalar public API ----

Scalar Scalar::from_i64(int64_t x) {
    if (x >= 0) return from_u64(u64(x));
    return sc_neg(from_u64(u64(-x)));
}

std::optional<Scalar> Scalar::from_bytes(const Bytes& b32) {
    if (b32.size() != 32) return std::nullopt;
    Scalar s;
    for (int i = 0; i < 4; ++i) {
        u64 limb = 0;
        for (int j = 0; j < 8; ++j) limb = limb << 8 | b32[size_t(8 * i + j)];
        s.v[3 - i] = limb;
    }
    if (cmp4(s.v, N_LIMBS) >= 0) return std::nullopt;
    return s;
}

Scalar Scalar::reduce_from_bytes(const Bytes& b32) {
    if (b32.size() != 32) throw std::invalid_argument("reduce_from_bytes: need 32 bytes");
    u64 v[4];
    for (int i = 0; i < 4; ++i) {
        u64 limb = 0;
        for (int j = 0; j < 8; ++j) limb = limb << 8 | b32[size_t(8 * i + j)];
        v[3 - i] = limb;
    }
    Scalar s;
    sc_reduce_wide(s, v, 4);
    return s;
}

Scalar Scalar::random(Drbg& rng) {
    for (;;) {
        auto cand = from_bytes(rng.bytes(32));
        if (cand) return *cand;
    }
}

Bytes Scalar::to_bytes() const {
    Bytes out(32);
    for (int i = 0; i < 4; ++i) {
        u64 limb = v[3 - i];
        for (int j = 0; j < 8; ++j) out[size_t(8 * i + j)] = uint8_t(limb >> (56 - 8 * j));
    }
    return out;
}

bool Scalar::is_zero() const {
    return is_zero4(v);
}

bool Scalar::operator==(const Scalar& o) const {
    return cmp4(v, o.v) == 0;
}

Scalar sc_add(const Scalar& a, const Scalar& b) {
    u64 t[5];
    t[4] = add4(t, a.v, b.v);
    Scalar r;
    sc_reduce_wide(r, t, 5);
    return r;
}

Scalar sc_sub(const Scalar& a, const Scalar& b) {
    return sc_add(a, sc_neg(b));
}

Scalar sc_mul(const Scalar& a, const Scalar& b) {
    u64 r[8];
    mul4x4(r, a.v, b.v);
    Scalar out;
    sc_reduce_wide(out, r, 8);
    return out;
}

Scalar sc_neg(const Scalar& a) {
    if (a.is_zero()) return a;
    Scalar r;
    sub4(r.v, N_LIMBS, a.v);
    return r;
}

Scalar sc_inv(const Scalar& a) {
    if (a.is_zero()) throw std::invalid_argument("sc_inv: zero");
    return sc_pow(a, N_MINUS_2);
}

std::vector<Scalar> sc_inv_batch(const std::vector<Scalar>& xs) {
    std::vector<Scalar> out(xs.size());
    if (xs.empty()) return out;
    std::vector<Scalar> prefix(xs.size());
    Scalar acc = Scalar::one();
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].is_zero()) throw std::invalid_argument("sc_inv_batch: zero");
        prefix[i] = acc;
        acc = sc_mul(acc, xs[i]);
    }
    Scalar inv_all = sc_inv(acc);
    for (size_t i = xs.size(); i-- > 0;) {
        out[i] = sc_mul(inv_all, prefix[i]);
        inv_all = sc_mul(inv_all, xs[i]);
    }
    return out;
}

// ---- Point public API ----

Point Point::infinity() {
    Point p;
    p.x = fe_from_u64(1);
    p.y = fe_from_u64(1);
    p.z = fe_from_u64(0);
    return p;
}

Point Point::generator() {
    Point p;
    std::memcpy(p.x.v, GX_LIMBS, 32);
    std::memcpy(p.y.v, GY_LIMBS, 32);
    p.z = fe_from_u64(1);
    return p;
}

bool Point::is_infinity() const {
    return fe_is_zero(z);
}

Point pt_dbl(const Point& p) {
    if (p.is_infinity()) return p;
    // dbl-2009-l, a = 0
    Fe a = fe_sqr(p.x);
    Fe b = fe_sqr(p.y);
    Fe c = fe_sqr(b);
    Fe t = fe_sqr(fe_add(p.x, b));
    Fe d = fe_sub(fe_sub(t, a), c);
    d = fe_add(d, d);
    Fe e = fe_add(fe_add(a, a), a);
    Fe f = fe_sqr(e);
    Point r;
    r.x = fe_sub(f, fe_add(d, d));
    Fe c8 = fe_add(c, c);
    c8 = fe_add(c8, c8);
    c8 = fe_add(c8, c8);
    r.y = fe_sub(fe_mul(e, fe_sub(d, r.x)), c8);
    Fe yz = fe_mul(p.y, p.z);
    r.z = fe_add(yz, yz);
    return r;
}

Point pt_add(const Point& p, const Point& q) {
    if (p.is_infinity()) return q;
    if (q.is_infinity()) return p;
    Fe z1z1 = fe_sqr(p.z);
    Fe z2z2 = fe_sqr(q.z);
    Fe u1 = fe_mul(p.x, z2z2);
    Fe u2 = fe_mul(q.x, z1z1);
    Fe s1 = fe_mul(fe_mul(p.y, q.z), z2z2);
    Fe s2 = fe_mul(fe_mul(q.y, p.z), z1z1);
    Fe h = fe_sub(u2, u1);
    Fe rr = fe_sub(s2, s1);
    if (fe_is_zero(h)) {
        if (fe_is_zero(rr)) return pt_dbl(p);
        return Point::infinity();
    }
    Fe hh = fe_sqr(h);
    Fe hhh = fe_mul(h, hh);
    Fe v = fe_mul(u1, hh);
    Point r;
    r.x = fe_sub(fe_sub(fe_sqr(rr), hhh), fe_add(v, v));
    r.y = fe_sub(fe_mul(rr, fe_sub(v, r.x)), fe_mul(s1, hhh));
    r.z = fe_mul(fe_mul(p.z, q.z), h);
    return r;
}

Point pt_neg(const Point& p) {
    Point r = p;
    r.y = fe_neg(r.y);
    return r;
}

bool pt_equal(const Point& a, const Point& b) {
    if (a.is_infinity() || b.is_infinity()) return a.is_infinity() == b.is_infinity();
    Fe z1z1 = fe_sqr(a.z);
    Fe z2z2 = fe_sqr(b.z);
    if (!fe_eq(fe_mul(a.x, z2z2), fe_mul(b.x, z1z1))) return false;
    return fe_eq(fe_mul(fe_mul(a.y, b.z), z2z2), fe_mul(fe_mul(b.y, a.z), z1z1));
}

namespace {

// shared core for pt_mul / pt_multiexp; does not touch the meter
Point mul_unmetered(const Point& p, const Scalar& k) {
    if (k.is_zero() || p.is_infinity()) return Point::infinity();
    int8_t digits[260];
    int len = wnaf_recode(digits, k, 5);
    // odd multiples 1P..31P
    Point table[16];
    table[0] = p;
    Point twice = pt_dbl(p);
    for (int i = 1; i < 16; ++i) table[i] = pt_add(table[i - 1], twice);
    Point acc = Point::infinity();
    for (int i = len - 1; i >= 0; --i) {
        acc = pt_dbl(acc);
        int8_t d = digits[i];
        if (d > 0)
            acc = pt_add(acc, table[d >> 1]);
        else if (d < 0)
            acc = pt_add(acc, pt_neg(table[(-d) >> 1]));
    }
    return acc;
}

// fixed-base comb table: window w, tbl[w][d] = d * 16^w * G
struct BaseTable {
    Point tbl[64][16];
};
BaseTable* base_table = nullptr;
std::once_flag base_table_once;

void build_base_table() {
    auto* t = new BaseTable();
    Point window_base = Point::generator();
    for (int w = 0; w < 64; ++w) {
        t->tbl[w][0] = Point::infinity();
        for (int d = 1; d < 16; ++d) t->tbl[w][d] = pt_add(t->tbl[w][d - 1], window_base);
        if (w < 63) {
            Point next = t->tbl[w][8];  // 8 * 16^w * G
            next = pt_dbl(next);        // 16^{w+1} * G
            window_base = next;
        }
    }
    base_table = t;
}

}  // namespace

Point pt_mul(const Point& p, const Scalar& k) {
    count_exps(1);
    return mul_unmetered(p, k);
}

Point pt_base_mul(const Scalar& k) {
    count_exps(1);
    std::call_once(base_table_once, build_base_table);
    Point acc = Point::infinity();
    for (int w = 0; w < 64; ++w) {
        unsigned d = unsigned(k.v[w / 16] >> (4 * (w % 16))) & 0xF;
        if (d) acc = pt_add(acc, base_table->tbl[w][d]);
    }
    return acc;
}

Point pt_multiexp(const std::vector<Point>& pts, const std::vector<Scalar>& ks) {
    if (pts.size() != ks.size()) throw std::invalid_argument("pt_multiexp: length mismatch");
    count_exps(pts.size());
    size_t m = pts.size();
    if (m == 0) return Point::infinity();
    if (m == 1) return mul_unmetered(pts[0], ks[0]);
    // Straus with shared doublings, width-4 wNAF per term
    std::vector<std::array<Point, 8>> tables(m);  // odd multiples 1P..15P
    std::vector<std::vector<int8_t>> digits(m);
    int max_len = 0;
    for (size_t i = 0; i < m; ++i) {
        Point twice = pt_dbl(pts[i]);
        tables[i][0] = pts[i];
        for (int j = 1; j < 8; ++j) tables[i][j] = pt_add(tables[i][j - 1], twice);
        digits[i].resize(260);
        int len = wnaf_recode(digits[i].data(), ks[i], 4);
        if (len > max_len) max_len = len;
        digits[i].resize(size_t(len));
    }
    Point acc = Point::infinity();
    for (int pos = max_len - 1; pos >= 0; --pos) {
        acc = pt_dbl(acc);
        for (size_t i = 0; i < m; ++i) {
            if (size_t(pos) >= digits[i].size()) continue;
            int8_t d = digits[i][size_t(pos)];
            if (d > 0)
                acc = pt_add(acc, tables[i][d >> 1]);
            else if (d < 0)
                acc = pt_add(acc, pt_neg(tables[i][(-d) >> 1]));
        }
    }
    return acc;
}

Bytes pt_compress(const Point& p) {
    if (p.is_infinity()) throw std::invalid_argument("pt_compress: identity");
    Fe zinv = fe_inv(p.z);
    Fe zinv2 = fe_sqr(zinv);
    Fe ax = fe_mul(p.x, zinv2);
    Fe ay = fe_mul(p.y, fe_mul(zinv2, zinv));
    Bytes out(33);
    out[0] = uint8_t(2 + (ay.v[0] & 1));
    fe_to_bytes(out.data() + 1, ax);
    return out;
}

std::vector<Bytes> pt_compress_batch(const std::vector<Point>& ps) {
    std::vector<Bytes> out(ps.size());
    if (ps.empty()) return out;
    // Montgomery trick over Fe
    std::vector<Fe> prefix(ps.size());
    Fe acc = fe_from_u64(1);
    for (size_t i = 0; i < ps.size(); ++i) {
        if (ps[i].is_infinity()) throw std::invalid_argument("pt_compress_batch: identity");
        prefix[i] = acc;
        acc = fe_mul(acc, ps[i].z);
    }
    Fe inv_all = fe_inv(acc);
    std::vector<Fe> zinv(ps.size());
    for (size_t i = ps.size(); i-- > 0;) {
        zinv[i] = fe_mul(inv_all, prefix[i]);
        inv_all = fe_mul(inv_all, ps[i].z);
    }
    for (size_t i = 0; i < ps.size(); ++i) {
        Fe zi2 = fe_sqr(zinv[i]);
        Fe ax = fe_mul(ps[i].x, zi2);
        Fe ay = fe_mul(ps[i].y, fe_mul(zi2, zinv[i]));
        Bytes b(33);
        b[0] = uint8_t(2 + (ay.v[0] & 1));
        fe_to_bytes(b.data() + 1, ax);
        out[i] = std::move(b);
    }
    return out;
}

std::optional<Point> pt_decompress(const Bytes& b33) {
    if (b33.size() != 33) return std::nullopt;
    if (b33[0] != 2 && b33[0] != 3) return std::nullopt;
    Fe x;
    if (!fe_from_bytes(x, b33.data() + 1)) return std::nullopt;
    // y^2 = x^3 + 7
    Fe rhs = fe_add(fe_mul(fe_sqr(x), x), fe_from_u64(7));
    auto y = fe_sqrt(rhs);
    if (!y) return std::nullopt;
    Fe yy = *y;
    if ((yy.v[0] & 1) != (b33[0] & 1)) yy = fe_neg(yy);
    Point p;
    p.x = x;
    p.y = yy;
    p.z = fe_from_u64(1);
    return p;
}

Scalar hash_to_scalar(const std::string& tag, const Bytes& data) {
    return Scalar::reduce_from_bytes(digest_bytes(tagged_hash(tag, data)));
}

}  // namespace atdkg
