#include "sharetrack/urlnorm.hpp"

#include <algorithm>
#include <cctype>

namespace sharetrack {
namespace {

bool is_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '+' || c == '-' || c == '.';
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

CanonicalUrl canonicalize(std::string_view url) {
  const std::string lowered = ascii_lower(trim(url));
  std::string_view rest = lowered;

  if (auto sep = rest.find("://"); sep != std::string_view::npos && is_scheme(rest.substr(0, sep))) {
    rest.remove_prefix(sep + 3);
  } else if (rest.starts_with("//")) {
    rest.remove_prefix(2);
  }

  if (auto cut = rest.find_first_of("?#"); cut != std::string_view::npos) rest = rest.substr(0, cut);

  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  std::string_view raw_path = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  for (;;) {
    if (authority.starts_with("www.")) {
      authority.remove_prefix(4);
    } else if (authority.starts_with("m.")) {
      authority.remove_prefix(2);
    } else {
      break;
    }
  }
  if (authority.empty()) throw MalformedUrl("no host in URL: " + std::string(url));

  CanonicalUrl out;
  out.host = std::string(authority);
  out.path.reserve(raw_path.size());
  for (char c : raw_path) {
    if (c == '/' && !out.path.empty() && out.path.back() == '/') continue;
    out.path.push_back(c);
  }
  if (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  out.full = out.host + out.path;
  return out;
}

bool matches_site(const CanonicalUrl& u, std::string_view site_domain) {
  std::string_view host = u.host;
  if (auto colon = host.rfind(':'); colon != std::string_view::npos) host = host.substr(0, colon);
  if (auto colon = site_domain.rfind(':'); colon != std::string_view::npos) site_domain = site_domain.substr(0, colon);
  if (site_domain.empty()) return false;
  if (host == site_domain) return true;
  return host.size() > site_domain.size() && host.ends_with(site_domain) &&
         host[host.size() - site_domain.size() - 1] == '.';
}

bool keyword_match(const CanonicalUrl& u, std::span<const std::string> keywords) {
  if (keywords.empty()) throw EmptyKeywordList("keyword list is empty");
  return std::all_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
    return u.full.find(ascii_lower(k)) != std::string::npos;
  });
}

}  // namespace sharetrack
