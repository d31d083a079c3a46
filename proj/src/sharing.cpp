#include "atdkg/sharing.hpp"

#include <stdexcept>
#include <unordered_set>

namespace atdkg {

Scalar SharePolynomial::eval(int64_t x) const {
    Scalar sx = Scalar::from_i64(x);
    Scalar acc = Scalar::zero();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = sc_add(sc_mul(acc, sx), *it);
    return acc;
}

SharePolynomial sample_polynomial(int t, Drbg& rng) {
    if (t < 0) throw std::invalid_argument("sample_polynomial: negative degree");
    SharePolynomial f;
    f.coeffs.reserve(size_t(t) + 1);
    for (int i = 0; i <= t; ++i) f.coeffs.push_back(Scalar::random(rng));
    return f;
}

EvalCommitment commit_evals(const SharePolynomial& f, int n) {
    if (n < int(f.coeffs.size()))
        throw std::invalid_argument("commit_evals: need n >= t+1");
    EvalCommitment cm;
    cm.cms.reserve(size_t(n) + 1);
    for (int j = 0; j <= n; ++j) cm.cms.push_back(pt_base_mul(f.eval(j)));
    return cm;
}

std::vector<Scalar> share_evals(const SharePolynomial& f, int n) {
    std::vector<Scalar> out;
    out.reserve(size_t(n));
    for (int j = 1; j <= n; ++j) out.push_back(f.eval(j));
    return out;
}

Bytes EvalCommitment::encode() const {
    Bytes out;
    append_u32be(out, uint32_t(cms.size()));
    out.reserve(4 + cms.size() * 33);
    for (const Bytes& enc : pt_compress_batch(cms)) append(out, enc);
    return out;
}

std::optional<EvalCommitment> EvalCommitment::decode(const Bytes& b) {
    if (b.size() < 4) return std::nullopt;
    ByteReader r(b);
    uint32_t count = r.u32be();
    if (r.remaining() != size_t(count) * 33) return std::nullopt;
    EvalCommitment cm;
    cm.cms.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        auto p = pt_decompress(r.take(33));
        if (!p) return std::nullopt;
        cm.cms.push_back(*p);
    }
    return cm;
}

DualCodeVector dual_code_vector(int n, int t, Drbg& rng) {
    if (t < 0 || t >= n) throw std::invalid_argument("dual_code_vector: need 0 <= t < n");
    // q of degree <= n-t-1: its product with any degree-<=t polynomial stays
    // below degree n, so the leading-coefficient functional below vanishes
    SharePolynomial q = sample_polynomial(n - t - 1, rng);

    // prod_{j != tau} (tau - j) = tau! * (n-tau)! * (-1)^(n-tau)
    std::vector<Scalar> fact(size_t(n) + 1);
    fact[0] = Scalar::one();
    for (int i = 1; i <= n; ++i) fact[size_t(i)] = sc_mul(fact[size_t(i - 1)], Scalar::from_u64(uint64_t(i)));
    std::vector<Scalar> dens(size_t(n) + 1);
    for (int tau = 0; tau <= n; ++tau) {
        Scalar d = sc_mul(fact[size_t(tau)], fact[size_t(n - tau)]);
        dens[size_t(tau)] = ((n - tau) % 2 != 0) ? sc_neg(d) : d;
    }
    std::vector<Scalar> inv = sc_inv_batch(dens);

    DualCodeVector perp;
    perp.perp.reserve(size_t(n) + 1);
    for (int tau = 0; tau <= n; ++tau)
        perp.perp.push_back(sc_mul(q.eval(tau), inv[size_t(tau)]));
    return perp;
}

bool check_low_degree(const EvalCommitment& cm, const DualCodeVector& perp) {
    if (cm.cms.size() != perp.perp.size())
        throw std::invalid_argument("check_low_degree: length mismatch");
    return pt_multiexp(cm.cms, perp.perp).is_infinity();
}

std::vector<Scalar> lagrange_coeffs(const std::vector<int64_t>& indices, int64_t target) {
    std::unordered_set<int64_t> seen;
    for (int64_t i : indices) {
        if (!seen.insert(i).second)
            throw std::invalid_argument("lagrange_coeffs: duplicate index");
    }
    size_t k = indices.size();
    // lambda_i = prod_{j != i} (target - x_j) / (x_i - x_j)
    std::vector<Scalar> numer(k, Scalar::one());
    std::vector<Scalar> denom(k, Scalar::one());
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            numer[i] = sc_mul(numer[i], Scalar::from_i64(target - indices[j]));
            denom[i] = sc_mul(denom[i], Scalar::from_i64(indices[i] - indices[j]));
        }
    }
    std::vector<Scalar> inv = sc_inv_batch(denom);
    std::vector<Scalar> out(k);
    for (size_t i = 0; i < k; ++i) out[i] = sc_mul(numer[i], inv[i]);
    return out;
}

Scalar interpolate_zero(const std::vector<std::pair<int64_t, Scalar>>& points) {
    std::vector<int64_t> indices;
    indices.reserve(points.size());
    for (const auto& [x, y] : points) indices.push_back(x);
    std::vector<Scalar> lambda = lagrange_coeffs(indices, 0);
    Scalar acc = Scalar::zero();
    for (size_t i = 0; i < points.size(); ++i)
        acc = sc_add(acc, sc_mul(lambda[i], points[i].second));
    return acc;
}

}  // namespace atdkg
