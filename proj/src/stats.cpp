#include "actionscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "actionscore/common.hpp"

namespace actionscore {

double log_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) {
    throw Error("log_choose: require 0 <= k <= n, got n=" + std::to_string(n) +
                " k=" + std::to_string(k));
  }
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double hypergeom_upper_tail(std::int64_t population, std::int64_t marked,
                            std::int64_t draws, std::int64_t observed) {
  if (population < 0 || marked < 0 || marked > population || draws < 0 ||
      draws > population) {
    throw Error("hypergeom_upper_tail: invalid parameters N=" +
                std::to_string(population) + " m=" + std::to_string(marked) +
                " k=" + std::to_string(draws));
  }
  const std::int64_t lo = std::max<std::int64_t>(0, draws - (population - marked));
  const std::int64_t hi = std::min(marked, draws);
  if (observed <= lo) return 1.0;
  if (observed > hi) return 0.0;

  const double log_denom = log_choose(population, draws);
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(hi - observed + 1));
  double log_max = -HUGE_VAL;
  for (std::int64_t j = observed; j <= hi; ++j) {
    const double lt = log_choose(marked, j) +
                      log_choose(population - marked, draws - j) - log_denom;
    log_terms.push_back(lt);
    log_max = std::max(log_max, lt);
  }
  double scaled = 0.0;
  for (double lt : log_terms) scaled += std::exp(lt - log_max);
  return std::min(1.0, std::exp(log_max) * scaled);
}

}  // namespace actionscore
