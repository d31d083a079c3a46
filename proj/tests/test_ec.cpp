#include <doctest.h>

#include "atdkg/ec.hpp"
#include "vectors.hpp"

using namespace atdkg;

namespace {

Scalar sc_from_hex(const std::string& h) {
    auto s = Scalar::from_bytes(hex_decode(h));
    REQUIRE(s.has_value());
    return *s;
}

Point pt_from_hex(const std::string& h) {
    auto p = pt_decompress(hex_decode(h));
    REQUIRE(p.has_value());
    return *p;
}

}  // namespace

TEST_CASE("base point multiplication matches pinned vectors") {
    for (const auto& v : kBaseMulVectors) {
        Scalar k = sc_from_hex(v.k_hex);
        CHECK(hex_encode(pt_compress(pt_base_mul(k))) == v.point_hex);
        CHECK(hex_encode(pt_compress(pt_mul(Point::generator(), k))) == v.point_hex);
    }
}

TEST_CASE("arbitrary point multiplication matches pinned vectors") {
    Point q = pt_from_hex(kPointQHex);
    for (const auto& v : kPointMulVectors) {
        Scalar k = sc_from_hex(v.k_hex);
        CHECK(hex_encode(pt_compress(pt_mul(q, k))) == v.point_hex);
    }
}

TEST_CASE("scalar field operations match pinned vectors") {
    for (const auto& v : kScalarOpVectors) {
        Scalar a = sc_from_hex(v.a);
        Scalar b = sc_from_hex(v.b);
        CHECK(sc_add(a, b) == sc_from_hex(v.sum));
        CHECK(sc_mul(a, b) == sc_from_hex(v.prod));
        CHECK(sc_inv(a) == sc_from_hex(v.a_inv));
        CHECK(sc_sub(sc_from_hex(v.sum), b) == a);
        CHECK(sc_mul(a, sc_inv(a)) == Scalar::one());
        CHECK(sc_add(a, sc_neg(a)).is_zero());
    }
}

TEST_CASE("scalar decode rejects values at or above the order") {
    const std::string order_hex =
        "fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141";
    CHECK_FALSE(Scalar::from_bytes(hex_decode(order_hex)).has_value());
    CHECK_FALSE(Scalar::from_bytes(Bytes(32, 0xff)).has_value());
    // order - 1 is the largest valid scalar
    CHECK(Scalar::from_bytes(
              hex_decode("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364140"))
              .has_value());
    CHECK(Scalar::reduce_from_bytes(hex_decode(order_hex)).is_zero());
}

TEST_CASE("scalar byte round trip and signed construction") {
    Drbg rng(to_bytes("scalar-roundtrip"));
    for (int i = 0; i < 32; ++i) {
        Scalar k = Scalar::random(rng);
        auto back = Scalar::from_bytes(k.to_bytes());
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK(Scalar::from_i64(-3) == sc_neg(Scalar::from_u64(3)));
    CHECK(Scalar::from_i64(42) == Scalar::from_u64(42));
    CHECK(sc_add(Scalar::from_i64(-7), Scalar::from_u64(7)).is_zero());
}

TEST_CASE("group law identities") {
    Point g = Point::generator();
    Point g2 = pt_base_mul(Scalar::from_u64(2));
    Point g3 = pt_base_mul(Scalar::from_u64(3));
    Point g5 = pt_base_mul(Scalar::from_u64(5));

    CHECK(pt_equal(pt_add(g2, g3), g5));
    CHECK(pt_equal(pt_dbl(g), g2));
    CHECK(pt_equal(pt_add(g, Point::infinity()), g));
    CHECK(pt_equal(pt_add(Point::infinity(), g), g));
    CHECK(pt_add(g, pt_neg(g)).is_infinity());
    CHECK(pt_dbl(Point::infinity()).is_infinity());

    // g + (order-1)*g is the identity
    Scalar minus_one = sc_neg(Scalar::one());
    CHECK(pt_add(g, pt_base_mul(minus_one)).is_infinity());
    CHECK(pt_mul(g, Scalar::zero()).is_infinity());
}

TEST_CASE("multiplication is consistent across code paths") {
    Drbg rng(to_bytes("mul-paths"));
    for (int i = 0; i < 16; ++i) {
        Scalar k = Scalar::random(rng);
        Point a = pt_base_mul(k);
        Point b = pt_mul(Point::generator(), k);
        CHECK(pt_equal(a, b));
        Scalar two_k = sc_add(k, k);
        CHECK(pt_equal(pt_dbl(a), pt_base_mul(two_k)));
    }
}

TEST_CASE("multi-exponentiation agrees with the naive product") {
    Drbg rng(to_bytes("multiexp"));
    for (size_t m : {size_t(1), size_t(2), size_t(3), size_t(7), size_t(20)}) {
        std::vector<Point> pts;
        std::vector<Scalar> ks;
        Point expect = Point::infinity();
        for (size_t i = 0; i < m; ++i) {
            Point p = pt_base_mul(Scalar::random(rng));
            Scalar k = Scalar::random(rng);
            pts.push_back(p);
            ks.push_back(k);
            expect = pt_add(expect, pt_mul(p, k));
        }
        CHECK(pt_equal(pt_multiexp(pts, ks), expect));
    }

    // zero scalars and identity inputs are handled
    std::vector<Point> pts = {Point::generator(), Point::infinity(),
                              pt_base_mul(Scalar::from_u64(9))};
    std::vector<Scalar> ks = {Scalar::zero(), Scalar::from_u64(5), Scalar::from_u64(2)};
    CHECK(pt_equal(pt_multiexp(pts, ks), pt_base_mul(Scalar::from_u64(18))));
    CHECK(pt_multiexp({}, {}).is_infinity());
}

TEST_CASE("compression round trips and rejects invalid encodings") {
    Drbg rng(to_bytes("compress"));
    std::vector<Point> pts;
    for (int i = 0; i < 24; ++i) pts.push_back(pt_base_mul(Scalar::random(rng)));

    auto batch = pt_compress_batch(pts);
    REQUIRE(batch.size() == pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        Bytes one = pt_compress(pts[i]);
        CHECK(one == batch[i]);
        auto back = pt_decompress(one);
        REQUIRE(back.has_value());
        CHECK(pt_equal(*back, pts[i]));
    }

    for (const auto& v : kDecompressVectors) {
        Bytes enc = hex_decode(v.compressed);
        auto p = pt_decompress(enc);
        REQUIRE(p.has_value());
        CHECK(pt_compress(*p) == enc);
        // flipping the parity prefix selects the negated point
        Bytes flipped = enc;
        flipped[0] ^= 1;
        auto q = pt_decompress(flipped);
        REQUIRE(q.has_value());
        CHECK(pt_equal(*q, pt_neg(*p)));
    }

    Bytes g = pt_compress(Point::generator());
    Bytes bad = g;
    bad[0] = 0x04;
    CHECK_FALSE(pt_decompress(bad).has_value());
    CHECK_FALSE(pt_decompress(Bytes(32, 0x02)).has_value());
    CHECK_FALSE(pt_decompress(Bytes(34, 0x02)).has_value());
    // x = p is out of range
    Bytes overflow = hex_decode(
        "02fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f");
    CHECK_FALSE(pt_decompress(overflow).has_value());
    CHECK_THROWS(pt_compress(Point::infinity()));

    // roughly half of all x coordinates lie on the curve; the rest must be rejected
    int rejected = 0;
    for (uint64_t x = 1; x <= 40; ++x) {
        Bytes enc(33, 0);
        enc[0] = 0x02;
        enc[32] = uint8_t(x);
        if (!pt_decompress(enc).has_value()) rejected++;
    }
    CHECK(rejected > 0);
    CHECK(rejected < 40);
}

TEST_CASE("batch scalar inversion matches single inversion") {
    Drbg rng(to_bytes("inv-batch"));
    std::vector<Scalar> xs;
    for (int i = 0; i < 17; ++i) xs.push_back(Scalar::random(rng));
    auto inv = sc_inv_batch(xs);
    REQUIRE(inv.size() == xs.size());
    for (size_t i = 0; i < xs.size(); ++i) CHECK(inv[i] == sc_inv(xs[i]));
    CHECK(sc_inv_batch({}).empty());
}

TEST_CASE("exponentiation meter counts multiplications only") {
    uint64_t n = 0;
    exp_counter_sink = &n;

    Point g = Point::generator();
    Scalar k = Scalar::from_u64(1234567);
    pt_base_mul(k);
    CHECK(n == 1);
    pt_mul(g, k);
    CHECK(n == 2);
    pt_multiexp({g, g, g}, {k, k, k});
    CHECK(n == 5);
    pt_multiexp({}, {});
    CHECK(n == 5);

    // untallied operations
    Point p = pt_base_mul(k);
    n = 5;
    pt_add(p, g);
    pt_dbl(p);
    pt_neg(p);
    pt_equal(p, g);
    pt_compress(p);
    pt_decompress(pt_compress(p));
    sc_mul(k, k);
    sc_inv(k);
    CHECK(n == 5);

    exp_counter_sink = nullptr;
    pt_base_mul(k);  // no sink attached, must not crash
    CHECK(n == 5);
}
