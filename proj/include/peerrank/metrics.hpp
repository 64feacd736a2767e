#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/ranking.hpp"

namespace peerrank {

enum class CorrKind { pearson, kendall, spearman };

struct CorrelationValue {
  double value = 0.0;
  CorrKind kind = CorrKind::pearson;
};

namespace detail {

/// Shared candidate universe of two rankings; throws unless identical.
inline std::vector<ModelId> common_candidates(const Ranking& a,
                                              const Ranking& b) {
  auto ca = a.candidates();
  auto cb = b.candidates();
  if (ca != cb)
    fail(Errc::candidate_mismatch,
         "rankings cover different candidate sets");
  if (ca.size() < 2)
    fail(Errc::candidate_mismatch,
         "rank correlation needs at least two candidates");
  return ca;
}

/// Pearson correlation of two equal-length vectors.
inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(Errc::degenerate_variance,
         "correlation undefined: an input has zero variance");
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> midrank_vector(const Ranking& r,
                                          const std::vector<ModelId>& cands) {
  auto dbl = r.doubled_positions_over(cands);
  std::vector<double> out(dbl.size());
  for (std::size_t i = 0; i < dbl.size(); ++i)
    out[i] = static_cast<double>(dbl[i]) / 2.0;
  return out;
}

}  // namespace detail

/// Number of candidate pairs ordered strictly oppositely by `a` and `b`.
/// Pairs tied in either ranking are not discordant. Symmetric, and zero
/// iff the two rankings express no conflicting strict preference.
inline std::int64_t kendall_distance(const Ranking& a, const Ranking& b) {
  auto cands = detail::common_candidates(a, b);
  auto ga = a.group_index_over(cands);
  auto gb = b.group_index_over(cands);
  std::int64_t d = 0;
  for (std::size_t i = 0; i < cands.size(); ++i)
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      const int ra = ga[i] - ga[j];
      const int rb = gb[i] - gb[j];
      if ((ra < 0 && rb > 0) || (ra > 0 && rb < 0)) ++d;
    }
  return d;
}

/// Kendall rank correlation. For tie-free inputs this is (C - D) / (m(m-1)/2);
/// with ties the tie-adjusted (tau-b) denominator
/// sqrt((n0 - n1)(n0 - n2)) is used, where n1 and n2 count the pairs tied in
/// each input. Throws DegenerateVariance when an input ties all candidates.
inline CorrelationValue kendall_tau(const Ranking& a, const Ranking& b) {
  auto cands = detail::common_candidates(a, b);
  auto ga = a.group_index_over(cands);
  auto gb = b.group_index_over(cands);
  std::int64_t concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  const std::size_t m = cands.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const int ra = ga[i] - ga[j];
      const int rb = gb[i] - gb[j];
      if (ra == 0) ++ties_a;
      if (rb == 0) ++ties_b;
      if (ra == 0 || rb == 0) continue;
      if ((ra < 0) == (rb < 0))
        ++concordant;
      else
        ++discordant;
    }
  const std::int64_t n0 = static_cast<std::int64_t>(m * (m - 1) / 2);
  if (ties_a == n0 || ties_b == n0)
    fail(Errc::degenerate_variance,
         "kendall tau undefined: an input ties every candidate pair");
  const double denom = std::sqrt(static_cast<double>(n0 - ties_a) *
                                 static_cast<double>(n0 - ties_b));
  return {static_cast<double>(concordant - discordant) / denom,
          CorrKind::kendall};
}

/// Pearson correlation of the two mid-rank position vectors. Tie groups get
/// mid-rank positions, so this is Spearman's rho with standard tie handling.
inline CorrelationValue pearson_ranks(const Ranking& a, const Ranking& b) {
  auto cands = detail::common_candidates(a, b);
  auto va = detail::midrank_vector(a, cands);
  auto vb = detail::midrank_vector(b, cands);
  return {detail::pearson(va, vb), CorrKind::pearson};
}

/// Spearman rank correlation: identical computation to pearson_ranks but
/// reported under its own kind tag.
inline CorrelationValue spearman(const Ranking& a, const Ranking& b) {
  CorrelationValue v = pearson_ranks(a, b);
  return {v.value, CorrKind::spearman};
}

}  // namespace peerrank
