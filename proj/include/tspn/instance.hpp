#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tspn/geometry.hpp"

namespace tspn {

struct Segment {
  int id = 0;
  double x = 0.0;
  double y_bot = 0.0;
  double y_top = 0.0;

  double length() const { return y_top - y_bot; }
  Point bottom() const { return {x, y_bot}; }
  Point top() const { return {x, y_top}; }
  /// True if (x, y) lies on the segment within tol.
  bool contains(const Point& p, double tol) const {
    return std::abs(p.x - x) <= tol && p.y >= y_bot - tol && p.y <= y_top + tol;
  }

  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class Stage { Raw, Snapped, Scaled };

std::string_view to_string(Stage s);

struct BoundingBox {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

struct Instance {
  std::vector<Segment> segments;
  double lambda = 1.0;
  Stage stage = Stage::Raw;
  /// Scale factor applied by scale().
  std::optional<double> rho;
  /// Side of the scaled bounding box.
  std::optional<double> N;
  /// Grid pitch used by perturb_snap.
  std::optional<double> pitch;

  std::size_t size() const { return segments.size(); }
  const Segment& by_id(int id) const;
  /// Index of the segment with this id.
  std::size_t index_of(int id) const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

BoundingBox bounding_box(const Instance& inst);

/// max{L, H - 2} with H - 2 clamped at 0.
double size_parameter(const Instance& inst);

/// Checks segment lengths against [1, lambda] (Raw stage only) and finite
/// coordinates.
void validate(const Instance& inst);

/// Moves every lower tip to the grid of pitch eps*B/n^2 with pairwise
/// distinct columns.
Instance perturb_snap(const Instance& inst, double epsilon);

/// Multiplies coordinates by rho = 4 n^2 / (eps B) so grid cells have size 4.
Instance scale(const Instance& inst, double epsilon);

/// Inverse of scale() applied to a tour.
Tour descale(const Tour& tour, double rho);

enum class GeneratorKind { Uniform, CombZigzag, FarApart, PackedBox };

std::optional<GeneratorKind> parse_generator_kind(std::string_view s);
std::string_view to_string(GeneratorKind k);

struct GeneratorParams {
  double width = 10.0;
  double height = 10.0;
  double lambda = 1.0;
  double epsilon = 0.5;
};

Instance generate(GeneratorKind kind, int n, const GeneratorParams& params, std::uint64_t seed);

/// Minimum distance between two vertical segments.
double segment_distance(const Segment& a, const Segment& b);

std::string format_instance(const Instance& inst);
Instance parse_instance(std::string_view text);
Instance read_instance(const std::filesystem::path& path);
void write_instance(const Instance& inst, const std::filesystem::path& path);

std::string format_tour(const Tour& tour);
Tour parse_tour(std::string_view text);
Tour read_tour(const std::filesystem::path& path);
void write_tour(const Tour& tour, const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Segments not touched by the tour (tolerance scaled by the instance size).
std::vector<int> missed_segments(const Instance& inst, const Tour& tour);
bool is_feasible(const Instance& inst, const Tour& tour);

}  // namespace tspn
