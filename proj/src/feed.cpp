#include "sharetrack/feed.hpp"

#include <cctype>

#include "sharetrack/xml.hpp"

namespace sharetrack {
namespace {

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string child_text(const XmlElement& el, std::string_view local) {
  const XmlElement* c = el.child(local);
  return c ? trimmed(c->text) : std::string{};
}

std::optional<Timestamp> any_date(const XmlElement& el, std::string_view local) {
  const XmlElement* c = el.child(local);
  if (!c) return std::nullopt;
  const std::string t = trimmed(c->text);
  if (auto iso = parse_iso8601(t)) return iso;
  return parse_rfc822(t);
}

void finish(std::vector<FeedItem>& out, FeedItem item) {
  if (item.link.empty()) return;
  if (item.published_at && item.updated_at && *item.updated_at < *item.published_at)
    item.updated_at.reset();
  out.push_back(std::move(item));
}

FeedItem rss_item(const XmlElement& item) {
  FeedItem out;
  out.title = child_text(item, "title");
  out.link = child_text(item, "link");
  if (const XmlElement* g = item.child("guid")) {
    std::string guid = trimmed(g->text);
    if (!guid.empty()) {
      const auto permalink = g->attribute("isPermaLink");
      if (out.link.empty() && permalink.value_or("true") != "false") out.link = guid;
      out.guid = std::move(guid);
    }
  }
  out.published_at = any_date(item, "pubDate");
  if (!out.published_at) out.published_at = any_date(item, "date");  // dc:date
  out.updated_at = any_date(item, "updated");                          // atom:updated
  if (!out.updated_at) out.updated_at = any_date(item, "modified");
  return out;
}

FeedItem atom_entry(const XmlElement& entry) {
  FeedItem out;
  out.title = child_text(entry, "title");
  for (const XmlElement* link : entry.children_named("link")) {
    const auto href = link->attribute("href");
    if (!href || href->empty()) continue;
    const auto rel = link->attribute("rel").value_or("alternate");
    if (rel == "alternate") {
      out.link = trimmed(*href);
      break;
    }
    if (out.link.empty()) out.link = trimmed(*href);
  }
  if (auto id = child_text(entry, "id"); !id.empty()) out.guid = std::move(id);
  out.published_at = any_date(entry, "published");
  out.updated_at = any_date(entry, "updated");
  return out;
}

}  // namespace

std::vector<FeedItem> parse_feed(std::string_view body) {
  XmlElement root;
  try {
    root = parse_xml(body);
  } catch (const XmlError& e) {
    throw FeedParseError(std::string("malformed feed XML: ") + e.what());
  }
  std::vector<FeedItem> items;
  const auto root_name = root.local_name();
  if (root_name == "rss") {
    const XmlElement* channel = root.child("channel");
    if (!channel) throw FeedParseError("RSS document without <channel>");
    for (const XmlElement* it : channel->children_named("item")) finish(items, rss_item(*it));
  } else if (root_name == "RDF") {
    for (const XmlElement* it : root.children_named("item")) finish(items, rss_item(*it));
  } else if (root_name == "feed") {
    for (const XmlElement* e : root.children_named("entry")) finish(items, atom_entry(*e));
  } else {
    throw FeedParseError("unrecognized feed root element <" + root.name + ">");
  }
  return items;
}

}  // namespace sharetrack
