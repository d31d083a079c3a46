// Qualified sub-ID allocation for weighted committees. Weights are rounded to
// a large common divisor under a bounded total adjustment, so that any group
// holding more than two thirds of the original weight keeps a strict majority
// of the issued sub-IDs while the total number of sub-IDs stays near 2n.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace atdkg {

struct Allocation {
    std::vector<uint64_t> d;         // sub-IDs per holder, adjusted[i] / divisor
    uint64_t divisor = 1;            // common divisor of the adjusted weights
    std::vector<uint64_t> adjusted;  // weights rounded to the divisor grid
};

// Adjustment budget t = floor((total - 1) / 3); a total of exactly 3t+1
// yields t. Throws std::invalid_argument on an empty or zero-weight vector.
uint64_t adjustment_budget(const std::vector<uint64_t>& w);

// Rounds every weight to the nearest multiple of g; a residue of exactly g/2
// rounds upward. Requires g >= 1.
std::vector<uint64_t> f_gcd_adjust(const std::vector<uint64_t>& w, uint64_t g);

// True iff the total absolute adjustment sum |w_i - adjusted_i| is at most t.
bool is_t_bounded(const std::vector<uint64_t>& w, const std::vector<uint64_t>& adjusted,
                  uint64_t t);

// Issues d_i = adjusted_i / divisor for the largest t-bounded divisor found
// by binary search over [1, max w] plus upward extension of the feasible run,
// never less than floor(2t/n), which is always t-bounded and caps the total
// at (4t+1) / floor(2t/n) when n <= 2t.
Allocation allocate_sub_ids(const std::vector<uint64_t>& w);

// True iff every group A with more than twice the weight of its complement
// holds strictly more sub-IDs than the complement. Exhaustive over all 2^n
// partitions for n <= 20; for larger n, checked over every descending-weight
// prefix plus deterministically sampled random partitions.
bool check_qualified(const std::vector<uint64_t>& w, const std::vector<uint64_t>& d);

// One decimal weight per line; blank lines are skipped. Throws on anything
// that does not parse as an unsigned 64-bit integer.
std::vector<uint64_t> parse_weights_text(const std::string& text);

// Tab-separated rows: index, weight, adjusted weight, sub-ID count.
std::string allocation_report(const std::vector<uint64_t>& w, const Allocation& a);

}  // namespace atdkg
