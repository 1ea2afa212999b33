#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace bsds {

/// Linear-interpolation quantile between order statistics ("type 7").
/// `sorted` must be ascending; q in [0,1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Convenience: copies, sorts, interpolates.
double quantile(std::vector<double> values, double q);

/// Standard normal CDF.
double norm_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS241, double precision).
/// p must lie in (0,1).
double norm_ppf(double p);

/// Ranks 1..N with tied values sharing the mean of their rank range.
std::vector<double> midranks(std::span<const double> values);

/// Tie-corrected Kendall rank correlation (tau-b) between two equal-length
/// score vectors. Computed via merge-sort inversion counting.
double kendall_tau_b(std::span<const double> a, std::span<const double> b);

/// tau-b between two rankings given as item orderings (best first) over the
/// same item set 0..n-1.
double kendall_tau_orderings(std::span<const std::int32_t> order_a,
                             std::span<const std::int32_t> order_b);

double mean(std::span<const double> values);

}  // namespace bsds
