#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bsds {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile q outside [0,1]");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo >= n - 1) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

// AS241 (PPND16). Relative accuracy about 1e-16 over (0,1).
double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("norm_ppf requires p in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Counts inversions by y within a buffer already sorted by (x, y).
std::uint64_t merge_count(std::vector<double>& y, std::vector<double>& tmp,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(y, tmp, lo, mid) + merge_count(y, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      swaps += mid - i;
      tmp[k++] = y[j++];
    } else {
      tmp[k++] = y[i++];
    }
  }
  while (i < mid) tmp[k++] = y[i++];
  while (j < hi) tmp[k++] = y[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            y.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::uint64_t tie_pairs(std::span<const double> sorted_keys) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < sorted_keys.size()) {
    std::size_t j = i;
    while (j + 1 < sorted_keys.size() && sorted_keys[j + 1] == sorted_keys[i]) ++j;
    const std::uint64_t t = j - i + 1;
    total += t * (t - 1) / 2;
    i = j + 1;
  }
  return total;
}

}  // namespace

double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("kendall_tau_b: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("kendall_tau_b needs n >= 2");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (a[i] != a[j]) return a[i] < a[j];
    return b[i] < b[j];
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = a[order[k]];
    ys[k] = b[order[k]];
  }

  // Pairs tied on x, and tied on both, from the (x, y)-sorted sequence.
  std::uint64_t xtie = 0, xytie = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && xs[j + 1] == xs[i]) ++j;
      const std::uint64_t t = j - i + 1;
      xtie += t * (t - 1) / 2;
      std::size_t u = i;
      while (u <= j) {
        std::size_t v = u;
        while (v + 1 <= j && ys[v + 1] == ys[u]) ++v;
        const std::uint64_t s = v - u + 1;
        xytie += s * (s - 1) / 2;
        u = v + 1;
      }
      i = j + 1;
    }
  }

  std::vector<double> tmp(n);
  const std::uint64_t discordant = merge_count(ys, tmp, 0, n);

  std::sort(ys.begin(), ys.end());
  const std::uint64_t ytie = tie_pairs(ys);

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const double con_minus_dis =
      static_cast<double>(n0) - static_cast<double>(xtie) -
      static_cast<double>(ytie) + static_cast<double>(xytie) -
      2.0 * static_cast<double>(discordant);
  const double denom_a = static_cast<double>(n0 - xtie);
  const double denom_b = static_cast<double>(n0 - ytie);
  if (denom_a <= 0.0 || denom_b <= 0.0)
    throw std::invalid_argument("kendall_tau_b undefined: a ranking is constant");
  return con_minus_dis / std::sqrt(denom_a * denom_b);
}

double kendall_tau_orderings(std::span<const std::int32_t> order_a,
                             std::span<const std::int32_t> order_b) {
  if (order_a.size() != order_b.size())
    throw std::invalid_argument("kendall_tau_orderings: length mismatch");
  const std::size_t n = order_a.size();
  std::vector<double> pos_a(n, -1.0), pos_b(n, -1.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto ia = static_cast<std::size_t>(order_a[r]);
    const auto ib = static_cast<std::size_t>(order_b[r]);
    if (ia >= n || ib >= n)
      throw std::invalid_argument("kendall_tau_orderings: item out of range");
    pos_a[ia] = static_cast<double>(r);
    pos_b[ib] = static_cast<double>(r);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (pos_a[i] < 0.0 || pos_b[i] < 0.0)
      throw std::invalid_argument("kendall_tau_orderings: not a permutation");
  // Positions are ranks; negate so that "better" sorts the same way as scores.
  for (auto& p : pos_a) p = -p;
  for (auto& p : pos_b) p = -p;
  return kendall_tau_b(pos_a, pos_b);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty list");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

}  // namespace bsds
