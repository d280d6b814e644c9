#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tspn/geometry.hpp"
#include "tspn/ptas.hpp"

namespace tspn {

class AxisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Horizontal or vertical segment from a to b.
struct AxisSegment {
  int id = 0;
  Point a;
  Point b;

  bool vertical() const { return a.x == b.x; }
  double length() const { return distance(a, b); }
  friend bool operator==(const AxisSegment&, const AxisSegment&) = default;
};

struct AxisInstance {
  std::vector<AxisSegment> segments;
  friend bool operator==(const AxisInstance&, const AxisInstance&) = default;
};

/// Throws AxisError unless every segment is axis-parallel with unit length.
void validate(const AxisInstance& inst);

/// Random unit segments in [0, width] x [0, height], orientation by coin flip
/// unless counts are given.
AxisInstance generate_axis(int n_vertical, int n_horizontal, double width, double height,
                           std::uint64_t seed);

/// Text format: `TSPN-AXIS 1`, `n=<int>`, then `<id> <x1> <y1> <x2> <y2>` lines.
std::string format_axis_instance(const AxisInstance& inst);
AxisInstance parse_axis_instance(std::string_view text);
AxisInstance read_axis_instance(const std::filesystem::path& path);

std::vector<int> missed_segments(const AxisInstance& inst, const Tour& tour);
bool is_feasible(const AxisInstance& inst, const Tour& tour);

/// ceil(8 / epsilon).
int axis_candidate_count(double epsilon);

struct AxisResult {
  Tour tour;
  double cost = 0.0;
  /// Splice points tried (one entry when a boundary point is forced).
  std::vector<Point> candidates;
  int chosen = -1;
  bool forced = false;
  /// Some sub-solve fell back to its baseline.
  bool fallback = false;
};

/// Candidate splice points on a horizontal segment.
std::vector<Point> axis_candidates(const AxisInstance& inst, double epsilon, bool* forced = nullptr);

/// Vertical class and horizontal class (rotated onto the vertical solver) are
/// solved separately through a common splice point; the cheapest splice wins.
AxisResult solve_axis_parallel(const AxisInstance& inst, const PtasConfig& config = {});

/// Exact TSP over k evenly spaced sample points per segment.
double axis_discretized_oracle(const AxisInstance& inst, int k);

}  // namespace tspn
