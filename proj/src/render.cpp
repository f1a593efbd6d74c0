#include "crowdnlg/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crowdnlg/rng.hpp"
#include "crowdnlg/text.hpp"

namespace crowdnlg::render {

namespace {

constexpr double kIcon = 48;
constexpr double kIconGap = 8;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

const std::map<std::string, std::string>& builtin_glyphs() {
  static const std::map<std::string, std::string> glyphs = {
      {"venue-pin",
       R"(<path d="M24 46 L10 24 A16 16 0 1 1 38 24 Z" fill="#c0392b" stroke="#7b241c" stroke-width="2"/><circle cx="24" cy="16" r="6" fill="#fff"/>)"},
      {"landmark",
       R"(<rect x="10" y="18" width="28" height="26" fill="#95a5a6" stroke="#2c3e50" stroke-width="2"/><path d="M6 20 L24 4 L42 20 Z" fill="#7f8c8d" stroke="#2c3e50" stroke-width="2"/><rect x="20" y="30" width="8" height="14" fill="#2c3e50"/>)"},
      {"area-highlight",
       R"(<circle cx="24" cy="24" r="20" fill="none" stroke="#f39c12" stroke-width="4" stroke-dasharray="6 4"/>)"},
      {"eat-restaurant",
       R"(<circle cx="24" cy="26" r="14" fill="#fff" stroke="#333" stroke-width="2"/><path d="M6 8 V24 M3 8 V16 M9 8 V16 M3 16 H9" stroke="#333" stroke-width="2" fill="none"/><path d="M42 8 C36 12 36 20 42 24 V42" stroke="#333" stroke-width="2" fill="none"/>)"},
      {"eat-pub",
       R"(<rect x="10" y="12" width="22" height="32" rx="3" fill="#f5b041" stroke="#333" stroke-width="2"/><rect x="10" y="8" width="22" height="8" rx="3" fill="#fff" stroke="#333" stroke-width="2"/><path d="M32 18 H38 V34 H32" fill="none" stroke="#333" stroke-width="3"/>)"},
      {"eat-coffee-shop",
       R"(<path d="M8 18 H34 V34 A10 10 0 0 1 24 44 H18 A10 10 0 0 1 8 34 Z" fill="#a0522d" stroke="#333" stroke-width="2"/><path d="M34 22 H40 A5 5 0 0 1 40 32 H34" fill="none" stroke="#333" stroke-width="3"/><path d="M16 6 C14 10 18 12 16 16 M24 6 C22 10 26 12 24 16" stroke="#999" stroke-width="2" fill="none"/>)"},
      {"food-japanese",
       R"(<rect x="6" y="16" width="36" height="18" rx="8" fill="#fdfefe" stroke="#333" stroke-width="2"/><rect x="18" y="14" width="12" height="22" fill="#1e8449"/><ellipse cx="24" cy="15" rx="12" ry="4" fill="#e74c3c"/>)"},
      {"food-italian",
       R"(<ellipse cx="24" cy="30" rx="20" ry="10" fill="#fff" stroke="#333" stroke-width="2"/><path d="M10 28 C16 20 20 34 26 26 C30 20 34 32 38 26 M12 32 C18 24 22 38 28 30" stroke="#f4d03f" stroke-width="3" fill="none"/><path d="M34 4 V22" stroke="#555" stroke-width="2"/>)"},
      {"food-chinese",
       R"(<path d="M6 24 H42 A18 18 0 0 1 6 24 Z" fill="#e74c3c" stroke="#333" stroke-width="2"/><path d="M18 4 L26 22 M26 4 L30 22" stroke="#8b4513" stroke-width="2"/>)"},
      {"food-french",
       R"(<path d="M6 38 C4 30 36 6 42 10 C46 14 22 44 6 38 Z" fill="#e59866" stroke="#333" stroke-width="2"/><path d="M16 30 L20 26 M22 26 L26 22 M28 20 L32 16" stroke="#873600" stroke-width="2"/>)"},
      {"food-english",
       R"(<path d="M10 20 H32 V36 A8 8 0 0 1 24 44 H18 A8 8 0 0 1 10 36 Z" fill="#5dade2" stroke="#333" stroke-width="2"/><path d="M32 24 C40 22 40 32 32 34" fill="none" stroke="#333" stroke-width="2"/><path d="M10 22 L2 14" stroke="#333" stroke-width="3"/><rect x="16" y="14" width="10" height="6" fill="#333"/>)"},
      {"food-indian",
       R"(<path d="M4 22 H44 L38 40 H10 Z" fill="#d35400" stroke="#333" stroke-width="2"/><path d="M14 18 C16 12 20 16 22 10 M26 18 C28 12 32 16 34 10" stroke="#999" stroke-width="2" fill="none"/>)"},
      {"food-fast-food",
       R"(<path d="M6 22 A18 14 0 0 1 42 22 Z" fill="#f0b27a" stroke="#333" stroke-width="2"/><rect x="6" y="24" width="36" height="6" fill="#6e2c00"/><rect x="6" y="30" width="36" height="4" fill="#58d68d"/><path d="M6 36 H42 V40 A4 4 0 0 1 38 44 H10 A4 4 0 0 1 6 40 Z" fill="#f0b27a" stroke="#333" stroke-width="2"/>)"},
      {"food-generic",
       R"(<circle cx="24" cy="26" r="18" fill="#fff" stroke="#333" stroke-width="2"/><circle cx="24" cy="26" r="10" fill="#f7dc6f"/>)"},
      {"child",
       R"(<circle cx="24" cy="10" r="7" fill="#f5cba7" stroke="#333" stroke-width="2"/><path d="M24 17 V32 M12 22 H36 M24 32 L16 44 M24 32 L32 44" stroke="#2874a6" stroke-width="4" fill="none" stroke-linecap="round"/>)"},
      {"negation",
       R"(<circle cx="24" cy="24" r="21" fill="none" stroke="#e60000" stroke-width="4"/><path d="M9 9 L39 39" stroke="#e60000" stroke-width="4"/>)"},
      {"coin",
       R"(<circle cx="24" cy="24" r="16" fill="#f4d03f" stroke="#9a7d0a" stroke-width="3"/><text x="24" y="31" font-family="sans-serif" font-size="20" text-anchor="middle" fill="#7d6608">&#163;</text>)"},
      {"star",
       R"(<path d="M24 4 L29.9 16.9 L44 18.5 L33.5 28.1 L36.4 42 L24 35 L11.6 42 L14.5 28.1 L4 18.5 L18.1 16.9 Z" stroke="#b7950b" stroke-width="2"/>)"},
  };
  return glyphs;
}

std::string strip_svg_wrapper(std::string s) {
  if (auto decl = s.find("<?xml"); decl != std::string::npos) {
    const auto end = s.find("?>", decl);
    if (end != std::string::npos) s.erase(decl, end + 2 - decl);
  }
  const auto open = s.find("<svg");
  if (open != std::string::npos) {
    const auto open_end = s.find('>', open);
    const auto close = s.rfind("</svg>");
    if (open_end != std::string::npos && close != std::string::npos && close > open_end) {
      s = s.substr(open_end + 1, close - open_end - 1);
    }
  }
  return text::trim(s);
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void check_layout(const MapLayout& layout) {
  const Rect canvas{0, 0, layout.width, layout.height};
  if (layout.river_band.intersects(layout.centre_region)) {
    throw std::invalid_argument("river band and centre region overlap");
  }
  if (layout.river_band.contains(layout.outskirts) || layout.centre_region.contains(layout.outskirts)) {
    throw std::invalid_argument("outskirts anchor lies inside a semantic region");
  }
  if (std::hypot(layout.landmark_offset.x, layout.landmark_offset.y) > layout.adjacency_radius) {
    throw std::invalid_argument("landmark offset exceeds the adjacency radius");
  }
  for (Point p : {layout.river_band.centre(), layout.centre_region.centre(), layout.outskirts}) {
    const Point lm{p.x + layout.landmark_offset.x, p.y + layout.landmark_offset.y};
    if (!canvas.contains(p) || !canvas.contains(lm)) {
      throw std::invalid_argument("anchor or landmark falls off the canvas");
    }
  }
}

Placement layout_position(const std::optional<std::string>& area_value, bool has_near,
                          const MapLayout& layout) {
  Placement placement;
  if (area_value && *area_value == layout.river_value) {
    placement.venue = layout.river_band.centre();
  } else if (area_value && *area_value == layout.centre_value) {
    placement.venue = layout.centre_region.centre();
  } else {
    placement.venue = layout.outskirts;
  }
  if (has_near) {
    placement.landmark = Point{placement.venue.x + layout.landmark_offset.x,
                               placement.venue.y + layout.landmark_offset.y};
  }
  return placement;
}

GlyphLibrary GlyphLibrary::builtin() {
  GlyphLibrary lib;
  lib.glyphs_ = builtin_glyphs();
  return lib;
}

GlyphLibrary GlyphLibrary::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("glyph directory " + dir.string() + " does not exist");
  }
  GlyphLibrary lib;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".svg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    lib.glyphs_[path.stem().string()] = strip_svg_wrapper(buf.str());
  }
  return lib;
}

void GlyphLibrary::write_directory(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [id, fragment] : glyphs_) {
    std::ofstream out(dir / (id + ".svg"));
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"48\" height=\"48\" "
           "viewBox=\"0 0 48 48\">\n"
        << fragment << "\n</svg>\n";
  }
}

const std::string* GlyphLibrary::find(const std::string& id) const {
  const auto it = glyphs_.find(id);
  return it == glyphs_.end() ? nullptr : &it->second;
}

const IconSpec* RenderConfig::icon_for(const std::string& attribute, const std::string& value) const {
  const IconSpec* wildcard = nullptr;
  for (const auto& icon : icons) {
    if (icon.attribute != attribute) continue;
    if (icon.value_match == value) return &icon;
    if (icon.value_match == "*" && wildcard == nullptr) wildcard = &icon;
  }
  return wildcard;
}

RenderConfig default_render_config() {
  RenderConfig config;
  config.glyphs = GlyphLibrary::builtin();
  auto add = [&](std::string attr, std::string value, std::string glyph, bool negated = false) {
    config.icons.push_back({std::move(attr), std::move(value), std::move(glyph), negated});
  };
  add("name", "*", "venue-pin");
  add("near", "*", "landmark");
  add("area", "*", "area-highlight");
  add("eatType", "restaurant", "eat-restaurant");
  add("eatType", "pub", "eat-pub");
  add("eatType", "coffee shop", "eat-coffee-shop");
  add("familyFriendly", "Yes", "child");
  add("familyFriendly", "No", "child", true);
  add("priceRange", "*", "coin");
  add("customerRating", "*", "star");
  add("food", "Japanese", "food-japanese");
  add("food", "Italian", "food-italian");
  add("food", "Chinese", "food-chinese");
  add("food", "French", "food-french");
  add("food", "English", "food-english");
  add("food", "Indian", "food-indian");
  add("food", "Fast food", "food-fast-food");
  return config;
}

void check_coverage(const RenderConfig& config, const DomainSchema& schema) {
  for (const auto& icon : config.icons) {
    if (config.glyphs.find(icon.glyph_id) == nullptr) {
      throw MissingIcon("icon for " + icon.attribute + "[" + icon.value_match +
                        "] references unknown glyph '" + icon.glyph_id + "'");
    }
    if (icon.negated_style && config.glyphs.find("negation") == nullptr) {
      throw MissingIcon("negated icons need a 'negation' glyph");
    }
  }
  for (const auto& spec : schema.attributes()) {
    std::vector<std::string> values = spec.legal_values;
    if (spec.kind == AttributeKind::VerbatimString) values = {"*"};
    for (const auto& value : values) {
      int exact = 0;
      int wildcard = 0;
      for (const auto& icon : config.icons) {
        if (icon.attribute != spec.name) continue;
        if (icon.value_match == value && value != "*") ++exact;
        if (icon.value_match == "*") ++wildcard;
      }
      if (exact > 1 || (exact == 0 && wildcard != 1)) {
        throw MissingIcon("no unique icon for " + spec.name + "[" + value + "]");
      }
      if (spec.kind == AttributeKind::Boolean && value == "No") {
        const auto* icon = config.icon_for(spec.name, value);
        if (!icon->negated_style) {
          throw MissingIcon("icon for " + spec.name + "[No] must use the negated style");
        }
      }
    }
  }
}

std::string value_class(const AttributeSpec* spec, const std::string& value) {
  if (spec != nullptr && spec->kind == AttributeKind::VerbatimString) return "verbatim";
  std::string out;
  bool dash = false;
  for (char c : text::fold_case(value)) {
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (alnum) {
      if (dash && !out.empty()) out += '-';
      out += c;
      dash = false;
    } else {
      dash = true;
    }
  }
  return out;
}

std::optional<std::pair<int, int>> parse_rating(const std::string& value) {
  int k = 0;
  int n = 0;
  char tail = 0;
  const int got = std::sscanf(value.c_str(), "%d of %d%c", &k, &n, &tail);
  if (got < 2 || n <= 0 || k < 0 || k > n || n > 10) return std::nullopt;
  if (got == 3 && tail != ' ') return std::nullopt;
  return std::make_pair(k, n);
}

namespace {

class SvgWriter {
 public:
  SvgWriter(const DomainSchema& schema, const RenderConfig& config)
      : schema_(schema), config_(config) {}

  std::string document(const MeaningRepresentation& mr, std::uint64_t seed) {
    const auto& layout = config_.layout;
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(layout.width)
         << "\" height=\"" << num(layout.height) << "\" viewBox=\"0 0 " << num(layout.width) << ' '
         << num(layout.height) << "\">\n";
    out_ << "  <title>" << xml_escape(mr.id.empty() ? "MR" : mr.id) << "</title>\n";
    background(seed);

    std::optional<std::string> area;
    if (const auto* v = mr.value_of("area")) area = *v;
    const auto placement = layout_position(area, mr.has("near"), layout);

    out_ << "  <g id=\"venue\" data-x=\"" << num(placement.venue.x) << "\" data-y=\""
         << num(placement.venue.y) << "\">\n";
    glyph_at("venue-pin", {placement.venue.x - kIcon / 2, placement.venue.y - kIcon}, 1.0);
    out_ << "  </g>\n";

    // Pairs in schema order; the card row is laid out left to right.
    std::vector<AttributeValue> pairs = mr.pairs;
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
      return schema_.index_of(a.first).value_or(schema_.size()) <
             schema_.index_of(b.first).value_or(schema_.size());
    });

    std::vector<AttributeValue> card;
    for (const auto& pair : pairs) {
      if (pair.first != "name" && pair.first != "near" && pair.first != "area") card.push_back(pair);
    }
    double card_width = 0;
    for (const auto& pair : card) card_width += slot_width(pair) + kIconGap;
    if (card_width > 0) card_width -= kIconGap;
    double cx = std::clamp(placement.venue.x - card_width / 2, 8.0,
                           std::max(8.0, layout.width - 8 - card_width));
    const double cy = std::clamp(placement.venue.y - kIcon - 12 - kIcon, 8.0, layout.height - kIcon - 8);
    if (!card.empty()) {
      out_ << "  <rect class=\"card\" x=\"" << num(cx - 6) << "\" y=\"" << num(cy - 6)
           << "\" width=\"" << num(card_width + 12) << "\" height=\"" << num(kIcon + 12)
           << "\" rx=\"8\" fill=\"#ffffff\" fill-opacity=\"0.9\" stroke=\"#555\"/>\n";
    }

    for (const auto& pair : pairs) {
      const auto& [attr, value] = pair;
      const auto* spec = schema_.find(attr);
      const auto* icon = config_.icon_for(attr, value);
      if (icon == nullptr || config_.glyphs.find(icon->glyph_id) == nullptr) {
        throw MissingIcon("no icon for " + attr + "[" + value + "]");
      }
      out_ << "  <g id=\"attr:" << xml_escape(attr) << "\" class=\"val:"
           << xml_escape(value_class(spec, value)) << "\">\n";
      if (attr == "name") {
        label(value, placement.venue.x, placement.venue.y + config_.label_font_size + 4);
      } else if (attr == "near") {
        const Point lm = *placement.landmark;
        out_ << "    <g class=\"landmark\" data-x=\"" << num(lm.x) << "\" data-y=\"" << num(lm.y)
             << "\">\n";
        glyph_at(icon->glyph_id, {lm.x - kIcon / 2, lm.y - kIcon / 2}, 1.0);
        out_ << "    </g>\n";
        label(value, lm.x, lm.y + kIcon / 2 + config_.label_font_size);
      } else if (attr == "area") {
        glyph_at(icon->glyph_id, {placement.venue.x - kIcon / 2, placement.venue.y - kIcon / 2 - 8}, 1.0);
      } else {
        card_item(pair, *icon, cx, cy);
        cx += slot_width(pair) + kIconGap;
      }
      out_ << "  </g>\n";
    }
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double slot_width(const AttributeValue& pair) const {
    if (pair.first == "customerRating") {
      if (auto r = parse_rating(pair.second)) return r->second * kIcon * 0.5;
    }
    if (pair.first == "priceRange") return coin_count(pair.second) * kIcon * 0.5 + kIcon * 0.5;
    return kIcon;
  }

  int coin_count(const std::string& value) const {
    const auto* spec = schema_.find("priceRange");
    if (spec == nullptr) return 1;
    const auto it = std::find(spec->legal_values.begin(), spec->legal_values.end(), value);
    if (it == spec->legal_values.end()) return 1;
    const auto idx = static_cast<int>(it - spec->legal_values.begin());
    return idx + 1;
  }

  void background(std::uint64_t seed) {
    const auto& layout = config_.layout;
    Rng rng(seed);
    out_ << "  <g id=\"map\">\n";
    out_ << "    <rect x=\"0\" y=\"0\" width=\"" << num(layout.width) << "\" height=\""
         << num(layout.height) << "\" fill=\"#eef2e6\"/>\n";
    // Streets: jittered grid, deterministic in the seed.
    for (int i = 1; i < 6; ++i) {
      const double x = layout.width * i / 6 + static_cast<double>(rng.below(41)) - 20;
      out_ << "    <line class=\"street\" x1=\"" << num(x) << "\" y1=\"0\" x2=\"" << num(x)
           << "\" y2=\"" << num(layout.river_band.y) << "\" stroke=\"#d5d8dc\" stroke-width=\"6\"/>\n";
    }
    for (int i = 1; i < 4; ++i) {
      const double y = layout.river_band.y * i / 4 + static_cast<double>(rng.below(31)) - 15;
      out_ << "    <line class=\"street\" x1=\"0\" y1=\"" << num(y) << "\" x2=\"" << num(layout.width)
           << "\" y2=\"" << num(y) << "\" stroke=\"#d5d8dc\" stroke-width=\"6\"/>\n";
    }
    const auto& c = layout.centre_region;
    out_ << "    <rect id=\"centre-region\" x=\"" << num(c.x) << "\" y=\"" << num(c.y) << "\" width=\""
         << num(c.w) << "\" height=\"" << num(c.h)
         << "\" fill=\"#f6ddcc\" stroke=\"#a04000\" stroke-width=\"2\"/>\n";
    for (int i = 0; i < 6; ++i) {
      const double bx = c.x + 10 + (c.w - 40) * static_cast<double>(rng.below(1000)) / 1000.0;
      const double by = c.y + 10 + (c.h - 40) * static_cast<double>(rng.below(1000)) / 1000.0;
      out_ << "    <rect class=\"building\" x=\"" << num(bx) << "\" y=\"" << num(by)
           << "\" width=\"24\" height=\"24\" fill=\"#dc7633\" fill-opacity=\"0.5\"/>\n";
    }
    const auto& r = layout.river_band;
    out_ << "    <rect id=\"river-band\" x=\"" << num(r.x) << "\" y=\"" << num(r.y) << "\" width=\""
         << num(r.w) << "\" height=\"" << num(r.h) << "\" fill=\"#85c1e9\"/>\n";
    out_ << "    <path class=\"wave\" d=\"M" << num(r.x) << ' ' << num(r.y + r.h / 2);
    for (double x = r.x; x < r.x + r.w; x += 40) {
      out_ << " Q" << num(x + 10) << ' ' << num(r.y + r.h / 2 - 8) << ' ' << num(x + 20) << ' '
           << num(r.y + r.h / 2) << " T" << num(x + 40) << ' ' << num(r.y + r.h / 2);
    }
    out_ << "\" fill=\"none\" stroke=\"#2e86c1\" stroke-width=\"2\"/>\n";
    out_ << "  </g>\n";
  }

  void glyph_at(const std::string& glyph_id, Point origin, double scale) {
    const auto* fragment = config_.glyphs.find(glyph_id);
    if (fragment == nullptr) throw MissingIcon("unknown glyph '" + glyph_id + "'");
    out_ << "    <g class=\"glyph-" << xml_escape(glyph_id) << "\" transform=\"translate("
         << num(origin.x) << ' ' << num(origin.y);
    if (scale != 1.0) out_ << ") scale(" << num(scale);
    out_ << ")\">" << *fragment << "</g>\n";
  }

  void label(const std::string& value, double x, double y) {
    out_ << "    <text x=\"" << num(x) << "\" y=\"" << num(y)
         << "\" font-family=\"sans-serif\" font-size=\"" << num(config_.label_font_size)
         << "\" text-anchor=\"middle\" fill=\"#1b2631\">" << xml_escape(value) << "</text>\n";
  }

  void card_item(const AttributeValue& pair, const IconSpec& icon, double x, double y) {
    const auto& [attr, value] = pair;
    if (attr == "customerRating") {
      if (const auto rating = parse_rating(value)) {
        for (int i = 0; i < rating->second; ++i) {
          const bool filled = i < rating->first;
          out_ << "    <g class=\"" << (filled ? "star-filled" : "star-outline") << "\" fill=\""
               << (filled ? "#f1c40f" : "none") << "\">\n  ";
          glyph_at(icon.glyph_id, {x + i * kIcon * 0.5, y + kIcon * 0.25}, 0.5);
          out_ << "    </g>\n";
        }
        return;
      }
    }
    if (attr == "priceRange") {
      const int coins = coin_count(value);
      for (int i = 0; i < coins; ++i) {
        glyph_at(icon.glyph_id, {x + i * kIcon * 0.5, y + kIcon * 0.25}, 0.5);
      }
      return;
    }
    glyph_at(icon.glyph_id, {x, y}, 1.0);
    if (icon.negated_style) {
      out_ << "    <g class=\"negated\">\n  ";
      glyph_at("negation", {x, y}, 1.0);
      out_ << "    </g>\n";
    }
  }

  const DomainSchema& schema_;
  const RenderConfig& config_;
  std::ostringstream out_;
};

}  // namespace

std::string render_svg(const MeaningRepresentation& mr, const DomainSchema& schema,
                       const RenderConfig& config, std::uint64_t seed) {
  for (const auto& [attr, value] : mr.pairs) {
    const auto* icon = config.icon_for(attr, value);
    if (icon == nullptr) throw MissingIcon("no icon for " + attr + "[" + value + "]");
  }
  SvgWriter writer(schema, config);
  return writer.document(mr, seed);
}

}  // namespace crowdnlg::render
