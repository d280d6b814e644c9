#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tspn/geometry.hpp"
#include "tspn/instance.hpp"

namespace tspn {

inline constexpr double kEpsAngle = 1e-7;

enum class PointKind { Straight, Break, ReflectionLeft, ReflectionRight };
enum class VerticalSense { Ascending, Descending };

std::string_view to_string(PointKind k);

struct PointClass {
  PointKind kind = PointKind::Straight;
  /// Reflections only: ascending when the outgoing leg is the upper one.
  std::optional<VerticalSense> vertical_sense;
  bool pure = false;
  bool at_tip = false;
  int segment = -1;

  bool is_reflection() const {
    return kind == PointKind::ReflectionLeft || kind == PointKind::ReflectionRight;
  }
};

/// One entry per tour point; unbound points (and the two ends of an open
/// tour) get nullopt. Throws InstanceError on a vertical leg at a bound point.
std::vector<std::optional<PointClass>> classify_points(const Tour& tour, const Instance& inst);

struct CoverLineSet {
  double y0 = 0.0;
  double spacing = 1.0;
  int count = 0;
  /// segment id -> cover-line index (line k sits at y0 - k * spacing)
  std::map<int, int> assignment;

  double line_y(int k) const { return y0 - spacing * k; }
};

/// Spacing defaults to 1 for raw/snapped instances and rho for scaled ones.
CoverLineSet build_cover_lines(const Instance& inst, std::optional<double> spacing = std::nullopt);

enum class StripPathKind { Loop, Ladder, CoverLineLoop };
std::string_view to_string(StripPathKind k);

struct StripPath {
  StripPathKind kind = StripPathKind::Loop;
  Point entry;
  Point exit;
  std::vector<TourPoint> points;
  /// Index of each point in the source tour, -1 for clipping points.
  std::vector<int> source;
  /// The whole tour lies inside the strip.
  bool closed = false;
};

/// Pieces of the tour inside the band between lines strip_index and
/// strip_index + 1 (both lines included).
std::vector<StripPath> restrict_to_strip(const Tour& tour, int strip_index,
                                         const CoverLineSet& cover_lines);

struct IndexRange {
  int first = 0;
  int last = 0;  // inclusive
  int size() const { return last - first + 1; }
};

struct ZigZagSinkPart {
  std::optional<IndexRange> sink_before;
  std::optional<IndexRange> zigzag;
  std::optional<IndexRange> sink_after;
};

struct ZigZagSinkPartition {
  /// Positions (within the strip path) of its reflection points, in order.
  std::vector<int> reflections;
  /// true when the reflection lies on a segment stabbing the strip's top line
  std::vector<bool> on_top;
  /// Ranges index into `reflections`.
  std::vector<ZigZagSinkPart> parts;
};

/// classes are indexed by source tour position (output of classify_points).
ZigZagSinkPartition partition_zigzag_sink(const StripPath& path,
                                          const std::vector<std::optional<PointClass>>& classes,
                                          const Instance& inst, const CoverLineSet& cover_lines,
                                          int strip_index);

struct ReflectionSequence {
  /// Tour indices of the bounding reflections; the range may wrap.
  int first = 0;
  int last = 0;
  /// Number of reflections in the sequence.
  int length = 0;
};

std::vector<ReflectionSequence> pure_reflection_sequences(
    const Tour& tour, const std::vector<std::optional<PointClass>>& classes);

struct StructureCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct StructureReport {
  std::vector<StructureCheck> checks;

  bool all_passed() const;
  const StructureCheck* find(std::string_view name) const;
  /// One "CHECK <name> PASS|FAIL <detail>" line per check.
  std::string format() const;
};

/// Structural lemmas for optimal tours. On other tours the report is advisory.
StructureReport check_optimal_structure(const Tour& tour, const Instance& inst);

}  // namespace tspn
