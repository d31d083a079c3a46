// Polynomial secret sharing over the group order: sampling, evaluation-point
// commitments, the dual-code low-degree test, and Lagrange reconstruction.
#pragma once

#include <optional>

#include "atdkg/ec.hpp"

namespace atdkg {

// Degree <= t; f(0) is the dealt secret.
struct SharePolynomial {
    std::vector<Scalar> coeffs;  // a_0 .. a_t

    Scalar eval(int64_t x) const;
};

SharePolynomial sample_polynomial(int t, Drbg& rng);

// cms[j] = g^{f(j)} for j in [0, n]. Serializes as a 4-byte big-endian count
// followed by n+1 compressed points.
struct EvalCommitment {
    std::vector<Point> cms;

    Bytes encode() const;
    static std::optional<EvalCommitment> decode(const Bytes& b);
};

EvalCommitment commit_evals(const SharePolynomial& f, int n);

// All shares f(1)..f(n) of one polynomial.
std::vector<Scalar> share_evals(const SharePolynomial& f, int n);

// perp[tau] = q(tau) / prod_{j != tau} (tau - j) over evaluation points 0..n,
// with q a fresh random polynomial of degree <= n-t-1. For every evaluation
// vector of a degree-<=t polynomial, sum_tau perp[tau] * v[tau] = 0; a vector
// off that code survives a fresh perp only with probability 1/order.
struct DualCodeVector {
    std::vector<Scalar> perp;  // length n+1
};

DualCodeVector dual_code_vector(int n, int t, Drbg& rng);

// True iff prod_tau cms[tau]^{perp[tau]} is the identity.
bool check_low_degree(const EvalCommitment& cm, const DualCodeVector& perp);

// Coefficients lambda_i (aligned with indices) such that for any polynomial h
// of degree <= |indices|-1, h(target) = sum lambda_i * h(indices[i]).
std::vector<Scalar> lagrange_coeffs(const std::vector<int64_t>& indices, int64_t target);

// Weighted reconstruction of f(0) from (index, share) pairs.
Scalar interpolate_zero(const std::vector<std::pair<int64_t, Scalar>>& points);

}  // namespace atdkg
