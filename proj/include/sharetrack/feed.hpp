#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sharetrack/error.hpp"
#include "sharetrack/time.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(FeedParseError);

struct FeedItem {
  std::string title;
  std::string link;
  std::optional<Timestamp> published_at;
  std::optional<Timestamp> updated_at;
  std::optional<std::string> guid;
};

// RSS 2.0 (also 0.9x and 1.0/RDF) and Atom 1.0. Items come back in document
// order; entries without a usable link are skipped. An updated_at earlier
// than published_at is discarded.
std::vector<FeedItem> parse_feed(std::string_view body);

}  // namespace sharetrack
