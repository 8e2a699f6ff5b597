#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sharetrack/error.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(XmlError);

// Minimal non-validating XML tree, enough for syndication feeds. Namespaces
// are not resolved; lookups match on the local part of a qualified name.
struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlElement> children;
  std::string text;  // direct character data, entities decoded

  std::string_view local_name() const;
  const XmlElement* child(std::string_view local) const;
  std::vector<const XmlElement*> children_named(std::string_view local) const;
  std::optional<std::string> attribute(std::string_view local) const;
};

XmlElement parse_xml(std::string_view document);

// Decodes the five predefined entities and numeric references. Unknown
// named entities are kept verbatim.
std::string decode_entities(std::string_view s);

}  // namespace sharetrack
