#pragma once

#include <cstdint>

#include "tspn/geometry.hpp"
#include "tspn/instance.hpp"
#include "tspn/oracle.hpp"

namespace tspn {

enum class BaselineKind { CoverlineStitch, NnTwoOpt };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::NnTwoOpt;
  std::uint64_t seed = 0;
  /// Full 2-opt passes; the search stops earlier at a local optimum.
  int two_opt_rounds = 1000;
};

/// Boustrophedon over cover-lines: each line is run end to end, consecutive
/// lines are joined at alternating ends.
Tour coverline_stitch(const Instance& inst);

/// Nearest neighbour on segment midpoints, 2-opt on midpoints, then touch
/// point optimisation of the resulting order.
Tour nn_2opt(const Instance& inst, const BaselineConfig& config = {});

Tour run_baseline(const Instance& inst, const BaselineConfig& config);

/// Segment ids in the order their bound points appear.
VisitOrder order_of(const Tour& tour);

/// 2-opt and or-opt moves on a visiting order, each evaluated with optimal
/// touch points. Returns the improved tour (never worse than the input order).
Tour local_search(const Instance& inst, const VisitOrder& start, int max_rounds = 50);

}  // namespace tspn
