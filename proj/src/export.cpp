#include "edr/export.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "edr/error.hpp"
#include "edr/io.hpp"
#include "edr/json.hpp"

namespace edr::exchange {

namespace {

namespace pt = boost::property_tree;

std::string escape(const std::string& s) {
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

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void check_symbol(const DrawingDescription& d, const Symbol& s, std::size_t k) {
  const std::string where = "symbol " + std::to_string(k);
  const Box& b = s.box;
  if (b.w < 1 || b.h < 1) throw SchemaError(where + ": box width and height must be >= 1");
  if (b.x < 0 || b.y < 0 || b.x + b.w > d.width || b.y + b.h > d.height) {
    throw SchemaError(where + ": box lies outside the " + std::to_string(d.width) + "x" +
                      std::to_string(d.height) + " drawing");
  }
  if (!(s.score >= 0.0 && s.score <= 1.0)) throw SchemaError(where + ": score must lie in [0, 1]");
}

void check_header(const DrawingDescription& d) {
  if (d.width < 1 || d.height < 1) throw SchemaError("drawing dimensions must be positive");
  if (d.scale < 1) throw SchemaError("drawing scale must be >= 1");
}

std::string attr(const pt::ptree& node, const std::string& name) {
  auto v = node.get_optional<std::string>("<xmlattr>." + name);
  if (!v) throw SchemaError("missing attribute '" + name + "'");
  return *v;
}

int int_attr(const pt::ptree& node, const std::string& name) {
  const std::string v = attr(node, name);
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw SchemaError("attribute '" + name + "' is not an integer: " + v);
  return out;
}

double real_attr(const pt::ptree& node, const std::string& name) {
  const std::string v = attr(node, name);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw SchemaError("attribute '" + name + "' is not a number: " + v);
  return out;
}

// Line on which each top-level array element starts, for error messages.
std::vector<int> element_lines(const std::string& text) {
  std::vector<int> lines;
  int line = 1;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  bool expect_element = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (depth == 1 && expect_element && !std::isspace(static_cast<unsigned char>(c))) {
      lines.push_back(line);
      expect_element = false;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '[':
      case '{':
        if (++depth == 1) expect_element = true;
        break;
      case ']':
      case '}': --depth; break;
      case ',':
        if (depth == 1) expect_element = true;
        break;
      default: break;
    }
  }
  return lines;
}

}  // namespace

DrawingDescription describe(const std::string& name, int width, int height, int scale,
                            const std::vector<Detection>& dets) {
  DrawingDescription d{name, width, height, scale, {}};
  d.symbols.reserve(dets.size());
  for (const Detection& det : dets) {
    if (det.frame != Frame::Global) throw FrameError("only Global-frame detections can be exported");
    d.symbols.push_back({det.class_label, det.box, det.score});
  }
  return d;
}

std::string export_xml(const DrawingDescription& desc, const std::vector<std::string>& classes) {
  check_header(desc);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<drawing name=\"" << escape(desc.name) << "\" width=\"" << desc.width << "\" height=\"" << desc.height
      << "\" scale=\"" << desc.scale << "\" schema=\"1\">\n";
  for (std::size_t k = 0; k < desc.symbols.size(); ++k) {
    const Symbol& s = desc.symbols[k];
    if (std::find(classes.begin(), classes.end(), s.class_label) == classes.end()) {
      throw SchemaError("symbol " + std::to_string(k) + ": class '" + s.class_label + "' is not in the class set");
    }
    check_symbol(desc, s, k);
    out << "  <symbol class=\"" << escape(s.class_label) << "\" x=\"" << s.box.x << "\" y=\"" << s.box.y
        << "\" w=\"" << s.box.w << "\" h=\"" << s.box.h << "\" score=\"" << fixed4(s.score) << "\"/>\n";
  }
  out << "</drawing>\n";
  return out.str();
}

DrawingDescription parse_xml(const std::string& xml) {
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }
  if (tree.size() != 1 || tree.front().first != "drawing") throw SchemaError("root element must be <drawing>");
  const pt::ptree& root = tree.front().second;
  if (attr(root, "schema") != "1") throw SchemaError("unsupported schema version " + attr(root, "schema"));

  DrawingDescription d;
  d.name = attr(root, "name");
  d.width = int_attr(root, "width");
  d.height = int_attr(root, "height");
  d.scale = int_attr(root, "scale");
  check_header(d);
  for (const auto& [tag, node] : root) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (tag != "symbol") throw SchemaError("unexpected element <" + tag + ">");
    Symbol s;
    s.class_label = attr(node, "class");
    s.box = {int_attr(node, "x"), int_attr(node, "y"), int_attr(node, "w"), int_attr(node, "h")};
    s.score = real_attr(node, "score");
    check_symbol(d, s, d.symbols.size());
    d.symbols.push_back(std::move(s));
  }
  return d;
}

std::vector<Detection> parse_annotations(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError(origin + ": expected a JSON list of annotations");
  const std::vector<int> lines = element_lines(text);

  std::vector<Detection> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    std::string where = origin + ": entry " + std::to_string(k);
    if (k < lines.size()) where += " (line " + std::to_string(lines[k]) + ")";
    const json& e = j[k];
    if (!e.is_object()) throw ParseError(where + ": expected an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      static const char* known[] = {"class", "x", "y", "w", "h", "score"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* n) { return it.key() == n; })) {
        throw ParseError(where + ": unknown field '" + it.key() + "'");
      }
    }
    auto integer = [&](const char* field) {
      auto it = e.find(field);
      if (it == e.end()) throw ParseError(where + ": missing field '" + field + "'");
      if (!it->is_number_integer()) throw ParseError(where + ": field '" + field + "' must be an integer");
      return it->get<int>();
    };
    Detection d;
    auto cls = e.find("class");
    if (cls == e.end() || !cls->is_string()) throw ParseError(where + ": field 'class' must be a string");
    d.class_label = cls->get<std::string>();
    d.box = {integer("x"), integer("y"), integer("w"), integer("h")};
    if (d.box.x < 0) throw ParseError(where + ": field 'x' must be >= 0");
    if (d.box.y < 0) throw ParseError(where + ": field 'y' must be >= 0");
    if (d.box.w < 1) throw ParseError(where + ": field 'w' must be >= 1");
    if (d.box.h < 1) throw ParseError(where + ": field 'h' must be >= 1");
    if (auto s = e.find("score"); s != e.end()) {
      if (!s->is_number()) throw ParseError(where + ": field 'score' must be a number");
      d.score = s->get<double>();
      if (!(d.score >= 0.0 && d.score <= 1.0)) throw ParseError(where + ": field 'score' must lie in [0, 1]");
    }
    d.frame = Frame::Global;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(io::read_text(path), path.string());
}

std::string detections_to_json(const std::vector<Detection>& dets) { return json(dets).dump(2) + "\n"; }

}  // namespace edr::exchange
