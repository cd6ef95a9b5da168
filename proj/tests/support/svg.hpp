#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace svg {

struct Element {
  std::string tag;
  std::map<std::string, std::string> attr;
  double num(const std::string& key) const { return std::stod(attr.at(key)); }
};

inline void collect(const boost::property_tree::ptree& node, std::vector<Element>& out) {
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    Element e{tag, {}};
    if (auto attrs = child.get_child_optional("<xmlattr>")) {
      for (const auto& [k, v] : *attrs) e.attr[k] = v.data();
    }
    out.push_back(e);
    collect(child, out);
  }
}

/// Every element of the document in document order; throws on malformed XML.
inline std::vector<Element> parse(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  std::vector<Element> out;
  collect(tree, out);
  return out;
}

inline std::vector<Element> with_class(const std::vector<Element>& all, const std::string& cls) {
  std::vector<Element> out;
  for (const auto& e : all) {
    auto it = e.attr.find("class");
    if (it != e.attr.end() && it->second == cls) out.push_back(e);
  }
  return out;
}

/// Distance from a circle centre to an axis-aligned rectangle.
inline double rect_distance(const Element& rect, double cx, double cy) {
  const double x0 = rect.num("x"), y0 = rect.num("y");
  const double x1 = x0 + rect.num("width"), y1 = y0 + rect.num("height");
  const double dx = cx < x0 ? x0 - cx : (cx > x1 ? cx - x1 : 0.0);
  const double dy = cy < y0 ? y0 - cy : (cy > y1 ? cy - y1 : 0.0);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace svg
