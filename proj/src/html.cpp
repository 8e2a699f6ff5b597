#include "sharetrack/html.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>
#include <utility>

#include "sharetrack/urlnorm.hpp"
#include "sharetrack/xml.hpp"

namespace sharetrack {
namespace {

struct UriParts {
  std::string scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

UriParts split_uri(std::string_view s) {
  UriParts u;
  if (auto colon = s.find(':'); colon != std::string_view::npos && colon > 0 &&
                                std::isalpha(static_cast<unsigned char>(s[0]))) {
    const auto candidate = s.substr(0, colon);
    const bool ok = std::all_of(candidate.begin(), candidate.end(), [](unsigned char c) {
      return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
    if (ok) {
      u.scheme = ascii_lower(candidate);
      s.remove_prefix(colon + 1);
    }
  }
  if (auto hash = s.find('#'); hash != std::string_view::npos) {
    u.fragment = std::string(s.substr(hash + 1));
    s = s.substr(0, hash);
  }
  if (auto q = s.find('?'); q != std::string_view::npos) {
    u.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  if (s.starts_with("//")) {
    s.remove_prefix(2);
    const auto slash = s.find('/');
    u.authority = std::string(s.substr(0, slash));
    s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);
  }
  u.path = std::string(s);
  return u;
}

std::string remove_dot_segments(std::string_view in) {
  std::string out;
  while (!in.empty()) {
    if (in.starts_with("../")) {
      in.remove_prefix(3);
    } else if (in.starts_with("./")) {
      in.remove_prefix(2);
    } else if (in.starts_with("/./")) {
      in.remove_prefix(2);
    } else if (in == "/.") {
      in = "/";
    } else if (in.starts_with("/../") || in == "/..") {
      in = in.size() == 3 ? std::string_view("/") : in.substr(3);
      const auto last = out.rfind('/');
      out.erase(last == std::string::npos ? 0 : last);
    } else if (in == "." || in == "..") {
      in = {};
    } else {
      const auto next = in.find('/', in.front() == '/' ? 1 : 0);
      out.append(in.substr(0, next));
      in = next == std::string_view::npos ? std::string_view{} : in.substr(next);
    }
  }
  return out;
}

std::string merge_paths(const UriParts& base, std::string_view ref_path) {
  if (base.authority && base.path.empty()) return "/" + std::string(ref_path);
  const auto slash = base.path.rfind('/');
  if (slash == std::string::npos) return std::string(ref_path);
  return base.path.substr(0, slash + 1) + std::string(ref_path);
}

std::string join(const UriParts& u) {
  std::string out;
  if (!u.scheme.empty()) out += u.scheme + ":";
  if (u.authority) out += "//" + *u.authority;
  out += u.path;
  if (u.query) out += "?" + *u.query;
  if (u.fragment) out += "#" + *u.fragment;
  return out;
}

// --- tolerant tag scanner ---------------------------------------------------

struct Tag {
  std::string name;  // lowercased
  std::vector<std::pair<std::string, std::string>> attrs;

  std::optional<std::string> attr(std::string_view key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return v;
    return std::nullopt;
  }
};

bool has_token(std::string_view list, std::string_view token) {
  const std::string lowered = ascii_lower(list);
  std::string_view rest = lowered;
  while (!rest.empty()) {
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
    auto end = rest.find_first_of(" \t\r\n");
    if (rest.substr(0, end) == token) return true;
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  }
  return false;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      out.push_back(c);
      space = false;
    }
  }
  return out;
}

class TagScanner {
 public:
  explicit TagScanner(std::string_view s) : s_(s) {}

  // Advances to the next start tag; false at end of input.
  bool next(Tag& tag) {
    while (pos_ < s_.size()) {
      const auto lt = s_.find('<', pos_);
      if (lt == std::string_view::npos) break;
      pos_ = lt + 1;
      if (s_.substr(lt).starts_with("<!--")) {
        skip_past("-->");
        continue;
      }
      if (pos_ >= s_.size()) break;
      const char c = s_[pos_];
      if (c == '!' || c == '?' || c == '/') {
        skip_past(">");
        continue;
      }
      if (!std::isalpha(static_cast<unsigned char>(c))) continue;
      read_tag(tag);
      return true;
    }
    pos_ = s_.size();
    return false;
  }

  // Raw text up to the matching end tag (case-insensitive); moves past it.
  std::string_view raw_text_until_end(std::string_view name) {
    const std::string needle = "</" + std::string(name);
    const std::string lowered = ascii_lower(s_.substr(pos_));
    const auto hit = lowered.find(needle);
    const auto start = pos_;
    if (hit == std::string::npos) {
      pos_ = s_.size();
      return s_.substr(start);
    }
    pos_ += hit;
    auto text = s_.substr(start, hit);
    skip_past(">");
    return text;
  }

 private:
  void skip_past(std::string_view token) {
    const auto end = s_.find(token, pos_);
    pos_ = end == std::string_view::npos ? s_.size() : end + token.size();
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void read_tag(Tag& tag) {
    tag.attrs.clear();
    const auto start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '>' && s_[pos_] != '/')
      ++pos_;
    tag.name = ascii_lower(s_.substr(start, pos_ - start));
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) return;
      if (s_[pos_] == '>') {
        ++pos_;
        return;
      }
      if (s_[pos_] == '/') {
        ++pos_;
        continue;
      }
      const auto key_start = pos_;
      while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
             s_[pos_] != '=' && s_[pos_] != '>' && s_[pos_] != '/')
        ++pos_;
      std::string key = ascii_lower(s_.substr(key_start, pos_ - key_start));
      if (key.empty()) {
        ++pos_;
        continue;
      }
      skip_ws();
      std::string value;
      if (pos_ < s_.size() && s_[pos_] == '=') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
          const char quote = s_[pos_++];
          const auto end = s_.find(quote, pos_);
          const auto stop = end == std::string_view::npos ? s_.size() : end;
          value = decode_entities(s_.substr(pos_, stop - pos_));
          pos_ = end == std::string_view::npos ? s_.size() : end + 1;
        } else {
          const auto vstart = pos_;
          while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
                 s_[pos_] != '>')
            ++pos_;
          value = decode_entities(s_.substr(vstart, pos_ - vstart));
        }
      }
      tag.attrs.emplace_back(std::move(key), std::move(value));
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool is_http(std::string_view url) {
  const std::string lowered = ascii_lower(url.substr(0, 8));
  return lowered.starts_with("http://") || lowered.starts_with("https://");
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::string resolve_url(std::string_view base_text, std::string_view reference) {
  const UriParts ref = split_uri(reference);
  if (!ref.scheme.empty()) {
    UriParts t = ref;
    t.path = remove_dot_segments(ref.path);
    return join(t);
  }
  const UriParts base = split_uri(base_text);
  if (base.scheme.empty()) return std::string(reference);
  UriParts t;
  t.scheme = base.scheme;
  t.fragment = ref.fragment;
  if (ref.authority) {
    t.authority = ref.authority;
    t.path = remove_dot_segments(ref.path);
    t.query = ref.query;
    return join(t);
  }
  t.authority = base.authority;
  if (ref.path.empty()) {
    t.path = base.path;
    t.query = ref.query ? ref.query : base.query;
  } else {
    t.path = ref.path.front() == '/' ? remove_dot_segments(ref.path)
                                     : remove_dot_segments(merge_paths(base, ref.path));
    t.query = ref.query;
  }
  return join(t);
}

PageLinks extract_links(std::string_view body, std::string_view base_url) {
  PageLinks out;
  std::vector<std::string> raw_links;
  std::optional<std::string> raw_canonical;
  std::vector<std::string> raw_feeds;
  std::optional<std::string> base_href;

  TagScanner scanner(body);
  Tag tag;
  while (scanner.next(tag)) {
    if (tag.name == "a" || tag.name == "area") {
      if (auto href = tag.attr("href")) raw_links.push_back(trim_copy(*href));
    } else if (tag.name == "link") {
      const auto rel = tag.attr("rel").value_or("");
      const auto href = tag.attr("href");
      if (!href) continue;
      if (!raw_canonical && has_token(rel, "canonical")) raw_canonical = trim_copy(*href);
      if (has_token(rel, "alternate")) {
        const auto type = ascii_lower(tag.attr("type").value_or(""));
        if (type == "application/rss+xml" || type == "application/atom+xml")
          raw_feeds.push_back(trim_copy(*href));
      }
    } else if (tag.name == "base") {
      if (auto href = tag.attr("href"); href && !base_href) base_href = trim_copy(*href);
    } else if (tag.name == "title") {
      auto text = collapse_ws(decode_entities(scanner.raw_text_until_end("title")));
      if (!out.title && !text.empty()) out.title = std::move(text);
    } else if (tag.name == "script" || tag.name == "style" || tag.name == "textarea") {
      scanner.raw_text_until_end(tag.name);
    }
  }

  const std::string base = base_href ? resolve_url(base_url, *base_href) : std::string(base_url);
  std::unordered_set<std::string> seen;
  for (const auto& raw : raw_links) {
    if (raw.empty()) continue;
    std::string abs = resolve_url(base, raw);
    if (!is_http(abs)) continue;
    if (seen.insert(abs).second) out.links.push_back(std::move(abs));
  }
  if (raw_canonical && !raw_canonical->empty()) out.canonical_hint = resolve_url(base, *raw_canonical);
  for (const auto& raw : raw_feeds) {
    if (!raw.empty()) out.feed_urls.push_back(resolve_url(base, raw));
  }
  return out;
}

}  // namespace sharetrack
