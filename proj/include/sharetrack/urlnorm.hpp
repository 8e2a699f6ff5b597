#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>

#include "sharetrack/error.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(MalformedUrl);
SHARETRACK_DEFINE_ERROR(EmptyKeywordList);

// Identity of a shared page. `full` is host + path with no scheme, query or
// fragment, all lowercase; it is the key used everywhere a URL is stored.
struct CanonicalUrl {
  std::string full;
  std::string host;
  std::string path;

  friend bool operator==(const CanonicalUrl&, const CanonicalUrl&) = default;
  friend auto operator<=>(const CanonicalUrl&, const CanonicalUrl&) = default;
};

// Lowercase, strip the scheme, strip leading "www." / "m." (repeatedly),
// drop query and fragment, collapse repeated slashes in the path and drop
// the trailing slash. Throws MalformedUrl when no host remains.
CanonicalUrl canonicalize(std::string_view url);

// True iff the host is `site_domain` or one of its subdomains. A ":port"
// suffix on either side is ignored for the comparison.
bool matches_site(const CanonicalUrl& u, std::string_view site_domain);

// AND semantics: every keyword must be a substring of u.full.
bool keyword_match(const CanonicalUrl& u, std::span<const std::string> keywords);

std::string ascii_lower(std::string_view s);

}  // namespace sharetrack
