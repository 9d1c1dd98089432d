#pragma once

#include <cstdint>

namespace actionscore {

// ln C(n, k); requires 0 <= k <= n.
double log_choose(std::int64_t n, std::int64_t k);

// Upper tail P[X >= observed] for X ~ Hypergeometric(population, marked,
// draws): draws items taken without replacement from a population containing
// `marked` marked items. Computed in log space (lgamma) and summed via
// log-sum-exp. Returns exactly 1.0 when `observed` is at or below the
// smallest attainable count.
double hypergeom_upper_tail(std::int64_t population, std::int64_t marked,
                            std::int64_t draws, std::int64_t observed);

}  // namespace actionscore
