#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnlg/mr.hpp"
#include "crowdnlg/schema.hpp"

namespace crowdnlg::render {

struct Point {
  double x = 0;
  double y = 0;
};

double distance(Point a, Point b);

struct Rect {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  bool contains(Point p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }
  bool intersects(const Rect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  Point centre() const { return {x + w / 2, y + h / 2}; }
};

/// City map geometry. `area` values are expressed by where the venue sits.
struct MapLayout {
  double width = 800;
  double height = 600;
  Rect river_band{0, 470, 800, 70};
  Rect centre_region{300, 130, 220, 170};
  // Venue anchor when the MR says nothing about the area.
  Point outskirts{130, 330};
  // Landmark offset from the venue when `near` is present.
  Point landmark_offset{120, -70};
  double adjacency_radius = 150;
  std::string river_value = "riverside";
  std::string centre_value = "city centre";
};

/// Throws std::invalid_argument when regions overlap or anchors fall off
/// the canvas.
void check_layout(const MapLayout& layout);

struct Placement {
  Point venue;
  std::optional<Point> landmark;
};

/// Venue anchor as a pure function of (area, near presence).
Placement layout_position(const std::optional<std::string>& area_value, bool has_near,
                          const MapLayout& layout);

struct IconSpec {
  std::string attribute;
  std::string value_match;  // exact legal value, or "*" for any value
  std::string glyph_id;
  bool negated_style = false;
};

/// Vector glyph fragments, each drawn in a 48x48 box.
class GlyphLibrary {
 public:
  static GlyphLibrary builtin();
  /// Reads every `<glyph_id>.svg` in `dir`. A wrapping <svg> element, if
  /// present, is stripped so only the inner fragment is kept.
  static GlyphLibrary load_directory(const std::filesystem::path& dir);
  void write_directory(const std::filesystem::path& dir) const;

  void set(std::string id, std::string fragment) { glyphs_[std::move(id)] = std::move(fragment); }
  const std::string* find(const std::string& id) const;
  const std::map<std::string, std::string>& all() const { return glyphs_; }

 private:
  std::map<std::string, std::string> glyphs_;
};

class MissingIcon : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RenderConfig {
  MapLayout layout;
  std::vector<IconSpec> icons;
  GlyphLibrary glyphs;
  double label_font_size = 16;

  /// Exact match wins over a "*" entry.
  const IconSpec* icon_for(const std::string& attribute, const std::string& value) const;
};

/// Icon set for the default schema plus the builtin glyphs.
RenderConfig default_render_config();

/// Throws MissingIcon if some (attribute, legal value) of `schema` has no
/// icon, or maps ambiguously, or references an unknown glyph.
void check_coverage(const RenderConfig& config, const DomainSchema& schema);

/// Machine-readable value class used in `val:` markers.
std::string value_class(const AttributeSpec* spec, const std::string& value);

/// Parses "k of n" (a trailing parenthetical is ignored).
std::optional<std::pair<int, int>> parse_rating(const std::string& value);

/// Standalone SVG 1.1 document. Every pair becomes one element with
/// id="attr:<attribute>" and class="val:<value-class>".
std::string render_svg(const MeaningRepresentation& mr, const DomainSchema& schema,
                       const RenderConfig& config, std::uint64_t seed);

}  // namespace crowdnlg::render
