#include "biflab/arith.hpp"

namespace biflab {

std::vector<int> divisors(int n) {
  std::vector<int> out;
  for (int k = 1; k <= n; ++k) {
    if (n % k == 0) out.push_back(k);
  }
  return out;
}

int moebius(int n) {
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;  // squared factor
      result = -result;
    }
  }
  if (n > 1) result = -result;
  return result;
}

std::int64_t exact_period_count(int degree, int n) {
  std::int64_t total = 0;
  for (int k : divisors(n)) {
    std::int64_t dk = 1;
    for (int i = 0; i < k; ++i) dk *= degree;
    total += moebius(n / k) * (dk + 1);
  }
  return total;
}

}  // namespace biflab
