#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

using boost::property_tree::ptree;

/// Parses an SVG document; throws on malformed XML.
inline ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

/// Visits every element named `name` anywhere below `tree`.
inline void for_each_element(const ptree& tree, const std::string& name,
                             const std::function<void(const ptree&)>& visit) {
  for (const auto& [key, child] : tree) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    if (key == name) visit(child);
    for_each_element(child, name, visit);
  }
}

inline std::size_t count_elements(const ptree& tree, const std::string& name) {
  std::size_t n = 0;
  for_each_element(tree, name, [&](const ptree&) { ++n; });
  return n;
}

inline std::string attr(const ptree& element, const std::string& name) {
  return element.get<std::string>("<xmlattr>." + name, "");
}

/// True when the document references nothing outside itself.
inline bool self_contained(const std::string& text) {
  return text.find("href") == std::string::npos && text.find("url(") == std::string::npos &&
         text.find("@import") == std::string::npos;
}

}  // namespace testutil
