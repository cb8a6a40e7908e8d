#pragma once

#include <cstdint>
#include <vector>

namespace biflab {

/// Divisors of n in increasing order.
std::vector<int> divisors(int n);

/// Moebius function mu(n).
int moebius(int n);

/// Number of points of exact period n for a generic degree-d rational map:
/// sum over k | n of mu(n/k) * (d^k + 1).
std::int64_t exact_period_count(int degree, int n);

}  // namespace biflab
