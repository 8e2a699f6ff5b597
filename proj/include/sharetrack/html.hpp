#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sharetrack {

// What the crawler needs from one HTML page. Parsing is tolerant: tag soup
// and binary garbage produce an empty result, never an error.
struct PageLinks {
  std::vector<std::string> links;  // absolute http(s), first occurrence order
  std::optional<std::string> canonical_hint;
  std::vector<std::string> feed_urls;  // RSS/Atom alternates, document order
  std::optional<std::string> title;
};

PageLinks extract_links(std::string_view body, std::string_view base_url);

// RFC 3986 reference resolution (section 5.2, strict mode).
std::string resolve_url(std::string_view base, std::string_view reference);

}  // namespace sharetrack
