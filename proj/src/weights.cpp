#include "atdkg/weights.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "atdkg/hash.hpp"

namespace atdkg {

namespace {

using u128 = unsigned __int128;

void require_positive(const std::vector<uint64_t>& w) {
    if (w.empty()) throw std::invalid_argument("weights: empty weight vector");
    for (uint64_t wi : w) {
        if (wi == 0) throw std::invalid_argument("weights: weights must be positive");
    }
}

u128 sum_u128(const std::vector<uint64_t>& xs) {
    u128 total = 0;
    for (uint64_t x : xs) total += x;
    return total;
}

}  // namespace

uint64_t adjustment_budget(const std::vector<uint64_t>& w) {
    require_positive(w);
    u128 t = (sum_u128(w) - 1) / 3;
    if (t > u128(~uint64_t(0))) throw std::overflow_error("weights: budget exceeds 64 bits");
    return uint64_t(t);
}

std::vector<uint64_t> f_gcd_adjust(const std::vector<uint64_t>& w, uint64_t g) {
    if (g == 0) throw std::invalid_argument("weights: divisor must be at least 1");
    std::vector<uint64_t> adjusted;
    adjusted.reserve(w.size());
    for (uint64_t wi : w) {
        uint64_t r = wi % g;
        if (2 * u128(r) < g) {
            adjusted.push_back(wi - r);
        } else {
            uint64_t up = wi + (g - r);
            if (up < wi) throw std::overflow_error("weights: adjusted weight exceeds 64 bits");
            adjusted.push_back(up);
        }
    }
    return adjusted;
}

bool is_t_bounded(const std::vector<uint64_t>& w, const std::vector<uint64_t>& adjusted,
                  uint64_t t) {
    if (w.size() != adjusted.size()) {
        throw std::invalid_argument("weights: sequence length mismatch");
    }
    u128 total = 0;
    for (size_t i = 0; i < w.size(); ++i) {
        total += w[i] > adjusted[i] ? w[i] - adjusted[i] : adjusted[i] - w[i];
    }
    return total <= t;
}

Allocation allocate_sub_ids(const std::vector<uint64_t>& w) {
    require_positive(w);
    uint64_t t = adjustment_budget(w);
    uint64_t max_w = *std::max_element(w.begin(), w.end());
    auto bounded = [&](uint64_t g) { return is_t_bounded(w, f_gcd_adjust(w, g), t); };

    uint64_t lo = 1;
    uint64_t hi = max_w;
    while (lo < hi) {
        uint64_t mid = lo + (hi - lo + 1) / 2;
        if (bounded(mid)) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    uint64_t probe = uint64_t(2 * u128(t) / w.size());
    if (probe > lo && bounded(probe)) lo = probe;
    while (lo < max_w && bounded(lo + 1)) ++lo;

    Allocation out;
    out.divisor = lo;
    out.adjusted = f_gcd_adjust(w, lo);
    out.d.reserve(w.size());
    for (uint64_t a : out.adjusted) out.d.push_back(a / lo);
    return out;
}

bool check_qualified(const std::vector<uint64_t>& w, const std::vector<uint64_t>& d) {
    if (w.size() != d.size()) throw std::invalid_argument("weights: sequence length mismatch");
    size_t n = w.size();
    if (n == 0) throw std::invalid_argument("weights: empty weight vector");
    u128 total_w = sum_u128(w);
    u128 total_d = sum_u128(d);

    // A group qualifies when 3*sum_w(A) > 2*total_w, and must then hold a
    // strict majority: 2*sum_d(A) > total_d.
    if (n <= 20) {
        size_t m = size_t(1) << n;
        std::vector<u128> sw(m, 0);
        std::vector<u128> sd(m, 0);
        for (size_t mask = 1; mask < m; ++mask) {
            size_t low = size_t(__builtin_ctzll(mask));
            sw[mask] = sw[mask & (mask - 1)] + w[low];
            sd[mask] = sd[mask & (mask - 1)] + d[low];
        }
        for (size_t mask = 0; mask < m; ++mask) {
            if (3 * sw[mask] > 2 * total_w && 2 * sd[mask] <= total_d) return false;
        }
        return true;
    }

    auto holds = [&](const std::vector<bool>& in_a) {
        u128 wa = 0;
        u128 da = 0;
        for (size_t i = 0; i < n; ++i) {
            if (in_a[i]) {
                wa += w[i];
                da += d[i];
            }
        }
        return !(3 * wa > 2 * total_w && 2 * da <= total_d);
    };

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return w[a] > w[b]; });
    std::vector<bool> in_a(n, false);
    for (size_t k = 0; k < n; ++k) {
        in_a[order[k]] = true;
        if (!holds(in_a)) return false;
    }

    Drbg rng(to_bytes("weights-qualified-sample"));
    for (int trial = 0; trial < 20000; ++trial) {
        Bytes coins = rng.bytes((n + 7) / 8);
        for (size_t i = 0; i < n; ++i) in_a[i] = (coins[i >> 3] >> (i & 7)) & 1;
        if (!holds(in_a)) return false;
    }
    return true;
}

std::vector<uint64_t> parse_weights_text(const std::string& text) {
    std::vector<uint64_t> w;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string token = line.substr(begin, end - begin + 1);
        if (token.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("weights: malformed weight line");
        }
        w.push_back(std::stoull(token));
    }
    return w;
}

std::string allocation_report(const std::vector<uint64_t>& w, const Allocation& a) {
    if (w.size() != a.adjusted.size() || w.size() != a.d.size()) {
        throw std::invalid_argument("weights: sequence length mismatch");
    }
    std::ostringstream out;
    for (size_t i = 0; i < w.size(); ++i) {
        out << (i + 1) << '\t' << w[i] << '\t' << a.adjusted[i] << '\t' << a.d[i] << '\n';
    }
    return out.str();
}

}  // namespace atdkg
