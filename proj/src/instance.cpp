#include "tspn/instance.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "tspn/rng.hpp"

namespace tspn {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Raw: return "raw";
    case Stage::Snapped: return "snapped";
    case Stage::Scaled: return "scaled";
  }
  return "?";
}

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + msg),
      line_(line),
      column_(column) {}

const Segment& Instance::by_id(int id) const { return segments[index_of(id)]; }

std::size_t Instance::index_of(int id) const {
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (segments[i].id == id) return i;
  throw InstanceError("unknown segment id " + std::to_string(id));
}

BoundingBox bounding_box(const Instance& inst) {
  if (inst.segments.empty()) throw InstanceError("bounding box of an empty instance");
  BoundingBox b{inst.segments[0].x, inst.segments[0].x, inst.segments[0].y_bot,
                inst.segments[0].y_top};
  for (const auto& s : inst.segments) {
    b.x_min = std::min(b.x_min, s.x);
    b.x_max = std::max(b.x_max, s.x);
    b.y_min = std::min(b.y_min, s.y_bot);
    b.y_max = std::max(b.y_max, s.y_top);
  }
  return b;
}

double size_parameter(const Instance& inst) {
  const auto box = bounding_box(inst);
  return std::max(box.width(), std::max(0.0, box.height() - 2.0));
}

void validate(const Instance& inst) {
  if (!(inst.lambda >= 1.0)) throw InstanceError("lambda must be >= 1");
  std::set<int> ids;
  for (const auto& s : inst.segments) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y_bot) || !std::isfinite(s.y_top))
      throw InstanceError("segment " + std::to_string(s.id) + " has a non-finite coordinate");
    if (!ids.insert(s.id).second)
      throw InstanceError("duplicate segment id " + std::to_string(s.id));
    if (s.y_top < s.y_bot)
      throw InstanceError("segment " + std::to_string(s.id) + " has y_top < y_bot");
    if (inst.stage != Stage::Scaled) {
      const double tol = kEpsGeom * std::max(1.0, inst.lambda);
      if (s.length() < 1.0 - tol || s.length() > inst.lambda + tol)
        throw InstanceError("segment " + std::to_string(s.id) + " length " +
                            format_double(s.length()) + " outside [1, lambda]");
    }
  }
}

Instance perturb_snap(const Instance& inst, double epsilon) {
  if (inst.stage != Stage::Raw) throw InstanceError("perturb_snap expects a raw instance");
  if (inst.segments.empty()) throw InstanceError("perturb_snap of an empty instance");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InstanceError("epsilon must lie in (0, 1]");
  const double n = static_cast<double>(inst.size());
  double B = size_parameter(inst);
  if (B <= 0.0) B = 1.0;  // every segment on one column and H <= 2
  const double pitch = epsilon * B / (n * n);

  std::vector<std::size_t> order(inst.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = inst.segments[a];
    const auto& sb = inst.segments[b];
    if (sa.x != sb.x) return sa.x < sb.x;
    return sa.id < sb.id;
  });

  Instance out = inst;
  out.stage = Stage::Snapped;
  out.pitch = pitch;
  std::set<long long> used;
  for (std::size_t idx : order) {
    const auto& s = inst.segments[idx];
    const long long c0 = std::llround(s.x / pitch);
    long long col = c0;
    for (long long d = 0;; ++d) {
      if (!used.count(c0 - d)) {
        col = c0 - d;
        break;
      }
      if (!used.count(c0 + d)) {
        col = c0 + d;
        break;
      }
    }
    used.insert(col);
    const long long row = std::llround(s.y_bot / pitch);
    auto& o = out.segments[idx];
    o.x = static_cast<double>(col) * pitch;
    o.y_bot = static_cast<double>(row) * pitch;
    o.y_top = o.y_bot + s.length();
  }
  return out;
}

Instance scale(const Instance& inst, double epsilon) {
  if (inst.stage != Stage::Snapped || !inst.pitch)
    throw InstanceError("scale expects a snapped instance");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InstanceError("epsilon must lie in (0, 1]");
  if (size_parameter(inst) <= 0.0) throw InstanceError("B = 0: degenerate instance");
  const double pitch = *inst.pitch;
  const double rho = 4.0 / pitch;
  Instance out = inst;
  out.stage = Stage::Scaled;
  out.rho = rho;
  for (auto& s : out.segments) {
    const double len = s.length();
    s.x = 4.0 * static_cast<double>(std::llround(s.x / pitch));
    s.y_bot = 4.0 * static_cast<double>(std::llround(s.y_bot / pitch));
    s.y_top = s.y_bot + len * rho;
  }
  const auto box = bounding_box(out);
  out.N = std::max(box.width(), box.height());
  return out;
}

Tour descale(const Tour& tour, double rho) {
  Tour out = tour;
  for (auto& p : out.points) {
    p.position.x /= rho;
    p.position.y /= rho;
  }
  return out;
}

// ---- generators -------------------------------------------------------------

std::optional<GeneratorKind> parse_generator_kind(std::string_view s) {
  if (s == "uniform") return GeneratorKind::Uniform;
  if (s == "comb_zigzag") return GeneratorKind::CombZigzag;
  if (s == "far_apart") return GeneratorKind::FarApart;
  if (s == "packed_box") return GeneratorKind::PackedBox;
  return std::nullopt;
}

std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Uniform: return "uniform";
    case GeneratorKind::CombZigzag: return "comb_zigzag";
    case GeneratorKind::FarApart: return "far_apart";
    case GeneratorKind::PackedBox: return "packed_box";
  }
  return "?";
}

Instance generate(GeneratorKind kind, int n, const GeneratorParams& params, std::uint64_t seed) {
  if (n < 1) throw InstanceError("generate: n must be >= 1");
  if (!(params.lambda >= 1.0)) throw InstanceError("generate: lambda must be >= 1");
  if (!(params.width > 0.0) || !(params.height >= 0.0))
    throw InstanceError("generate: width must be > 0 and height >= 0");
  if (!(params.epsilon > 0.0 && params.epsilon <= 1.0))
    throw InstanceError("generate: epsilon must lie in (0, 1]");
  if (kind == GeneratorKind::PackedBox && params.height < params.lambda)
    throw InstanceError("generate: packed_box height must be >= lambda");

  Rng rng(seed);
  Instance inst;
  inst.lambda = params.lambda;
  auto draw_length = [&] {
    return params.lambda > 1.0 ? rng.uniform(1.0, params.lambda) : 1.0;
  };
  double cursor = 0.0;
  for (int i = 0; i < n; ++i) {
    Segment s;
    s.id = i;
    const double len = draw_length();
    switch (kind) {
      case GeneratorKind::Uniform:
        s.x = rng.uniform(0.0, params.width);
        s.y_bot = rng.uniform(0.0, params.height);
        break;
      case GeneratorKind::CombZigzag: {
        // interleaved combs: even ids hang from the top, odd ids stand on the bottom
        const double pitch = params.width / static_cast<double>(n);
        s.x = (i + 0.25 + 0.5 * rng.uniform()) * pitch;
        const double top = std::max(params.height, len + 1.0);
        s.y_bot = (i % 2 == 0) ? top - len : 0.0;
        break;
      }
      case GeneratorKind::FarApart: {
        const double gap = 1.0 / params.epsilon;
        if (i > 0) cursor += gap * (1.0 + rng.uniform());
        s.x = cursor;
        s.y_bot = rng.uniform(0.0, params.height);
        break;
      }
      case GeneratorKind::PackedBox:
        s.x = rng.uniform(0.0, params.width);
        s.y_bot = rng.uniform(0.0, params.height - len);
        break;
    }
    s.y_top = s.y_bot + len;
    inst.segments.push_back(s);
  }
  return inst;
}

double segment_distance(const Segment& a, const Segment& b) {
  const double dx = std::abs(a.x - b.x);
  double dy = 0.0;
  if (a.y_top < b.y_bot) dy = b.y_bot - a.y_top;
  else if (b.y_top < a.y_bot) dy = a.y_bot - b.y_top;
  return std::hypot(dx, dy);
}

// ---- text formats -----------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_instance(const Instance& inst) {
  std::string out = "TSPN-SEG 1\n";
  out += "n=" + std::to_string(inst.size()) + " lambda=" + format_double(inst.lambda) + "\n";
  for (const auto& s : inst.segments) {
    out += std::to_string(s.id) + " " + format_double(s.x) + " " + format_double(s.y_bot) + " " +
           format_double(s.y_top) + "\n";
  }
  return out;
}

namespace {

struct Token {
  std::string_view text;
  int column = 1;
};

std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

double parse_real(const Token& t, int line) {
  double v = 0.0;
  auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size() || !std::isfinite(v))
    throw ParseError("expected a decimal number, got '" + std::string(t.text) + "'", line,
                     t.column);
  return v;
}

long long parse_int(std::string_view s, int line, int column) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("expected an integer, got '" + std::string(s) + "'", line, column);
  return v;
}

}  // namespace

Instance parse_instance(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || split_tokens(lines[0]).size() != 2 ||
      split_tokens(lines[0])[0].text != "TSPN-SEG" || split_tokens(lines[0])[1].text != "1")
    throw ParseError("missing header 'TSPN-SEG 1'", 1, 1);
  if (lines.size() < 2) throw ParseError("missing 'n=<int> lambda=<decimal>' line", 2, 1);
  const auto hdr = split_tokens(lines[1]);
  if (hdr.size() != 2 || !hdr[0].text.starts_with("n=") || !hdr[1].text.starts_with("lambda="))
    throw ParseError("expected 'n=<int> lambda=<decimal>'", 2, 1);
  const long long n = parse_int(hdr[0].text.substr(2), 2, hdr[0].column + 2);
  if (n < 0) throw ParseError("n must be non-negative", 2, hdr[0].column + 2);
  Token lam{hdr[1].text.substr(7), hdr[1].column + 7};
  Instance inst;
  inst.lambda = parse_real(lam, 2);
  if (inst.lambda < 1.0) throw ParseError("lambda must be >= 1", 2, lam.column);

  std::size_t li = 2;
  for (long long k = 0; k < n; ++k, ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (li >= lines.size())
      throw ParseError("expected " + std::to_string(n) + " segment lines, found " +
                           std::to_string(k),
                       line_no, 1);
    const auto tok = split_tokens(lines[li]);
    if (tok.size() != 4)
      throw ParseError("expected '<id> <x> <y_bot> <y_top>'", line_no,
                       tok.size() > 4 ? tok[4].column : 1);
    Segment s;
    s.id = static_cast<int>(parse_int(tok[0].text, line_no, tok[0].column));
    s.x = parse_real(tok[1], line_no);
    s.y_bot = parse_real(tok[2], line_no);
    s.y_top = parse_real(tok[3], line_no);
    inst.segments.push_back(s);
  }
  for (; li < lines.size(); ++li)
    if (!split_tokens(lines[li]).empty())
      throw ParseError("unexpected trailing content", static_cast<int>(li) + 1, 1);
  try {
    validate(inst);
  } catch (const InstanceError& e) {
    throw ParseError(std::string("validation: ") + e.what(), 2, 1);
  }
  return inst;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

Instance read_instance(const std::filesystem::path& path) { return parse_instance(read_file(path)); }

void write_instance(const Instance& inst, const std::filesystem::path& path) {
  write_file(path, format_instance(inst));
}

std::string format_tour(const Tour& tour) {
  std::string out = "TSPN-TOUR 1\n";
  for (const auto& p : tour.points) {
    out += format_double(p.position.x) + " " + format_double(p.position.y) + " ";
    if (auto* s = std::get_if<SegmentId>(&p.binding)) out += "s" + std::to_string(s->value);
    else if (auto* q = std::get_if<PortalId>(&p.binding)) out += "portal" + std::to_string(q->value);
    else out += "-";
    out += "\n";
  }
  return out;
}

Tour parse_tour(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || split_tokens(lines[0]).size() != 2 ||
      split_tokens(lines[0])[0].text != "TSPN-TOUR" || split_tokens(lines[0])[1].text != "1")
    throw ParseError("missing header 'TSPN-TOUR 1'", 1, 1);
  Tour tour;
  tour.closed = true;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const auto tok = split_tokens(lines[li]);
    if (tok.empty()) continue;
    if (tok.size() != 3) throw ParseError("expected '<x> <y> <binding>'", line_no, 1);
    TourPoint p;
    p.position = {parse_real(tok[0], line_no), parse_real(tok[1], line_no)};
    const auto b = tok[2].text;
    if (b == "-") p.binding = Dummy{};
    else if (b.starts_with("portal"))
      p.binding = PortalId{static_cast<int>(parse_int(b.substr(6), line_no, tok[2].column + 6))};
    else if (b.starts_with("s"))
      p.binding = SegmentId{static_cast<int>(parse_int(b.substr(1), line_no, tok[2].column + 1))};
    else throw ParseError("unknown binding '" + std::string(b) + "'", line_no, tok[2].column);
    tour.points.push_back(p);
  }
  return tour;
}

Tour read_tour(const std::filesystem::path& path) { return parse_tour(read_file(path)); }

void write_tour(const Tour& tour, const std::filesystem::path& path) {
  write_file(path, format_tour(tour));
}

// ---- feasibility ------------------------------------------------------------

std::vector<int> missed_segments(const Instance& inst, const Tour& tour) {
  std::vector<int> missed;
  if (inst.segments.empty()) return missed;
  const auto box = bounding_box(inst);
  const double tol = kEpsGeom * std::max(1.0, std::hypot(box.width(), box.height()));
  for (const auto& s : inst.segments) {
    bool hit = false;
    if (tour.size() == 1) hit = s.contains(tour.points[0].position, tol);
    for (std::size_t i = 0; i < tour.leg_count() && !hit; ++i) {
      auto [a, b] = tour.leg(i);
      if (std::max(a.x, b.x) < s.x - tol || std::min(a.x, b.x) > s.x + tol) continue;
      if (std::abs(a.x - b.x) <= tol) {
        const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
        hit = hi >= s.y_bot - tol && lo <= s.y_top + tol;
      } else {
        const double t = std::clamp((s.x - a.x) / (b.x - a.x), 0.0, 1.0);
        const double y = a.y + t * (b.y - a.y);
        hit = y >= s.y_bot - tol && y <= s.y_top + tol;
      }
    }
    if (!hit) missed.push_back(s.id);
  }
  return missed;
}

bool is_feasible(const Instance& inst, const Tour& tour) {
  return !tour.points.empty() && missed_segments(inst, tour).empty();
}

}  // namespace tspn
