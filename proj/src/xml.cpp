#include "sharetrack/xml.hpp"

#include <cctype>
#include <charconv>

namespace sharetrack {
namespace {

constexpr int kMaxDepth = 256;

std::string_view local_part(std::string_view qname) {
  auto colon = qname.rfind(':');
  return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_name_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == ':' || c == '-' || c == '.' || u >= 0x80;
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : s_(doc) {}

  XmlElement parse_document() {
    if (s_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
    skip_misc();
    if (eof() || peek() != '<') fail("expected root element");
    XmlElement root = parse_element(0);
    skip_misc();
    if (!eof()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw XmlError(what + " at offset " + std::to_string(pos_));
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  bool at(std::string_view tok) const { return s_.substr(pos_).starts_with(tok); }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void skip_until(std::string_view terminator) {
    auto end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct");
    pos_ = end + terminator.size();
  }

  void skip_doctype() {
    int bracket = 0;
    while (!eof()) {
      const char c = s_[pos_++];
      if (c == '[') ++bracket;
      if (c == ']') --bracket;
      if (c == '>' && bracket <= 0) return;
    }
    fail("unterminated DOCTYPE");
  }

  // prolog / epilog: whitespace, comments, processing instructions, doctype
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (at("<?")) {
        skip_until("?>");
      } else if (at("<!--")) {
        skip_until("-->");
      } else if (at("<!DOCTYPE") || at("<!doctype")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    const auto start = pos_;
    while (!eof() && is_name_char(peek())) ++pos_;
    if (pos_ == start) fail("expected name");
    return std::string(s_.substr(start, pos_ - start));
  }

  XmlElement parse_element(int depth) {
    if (depth > kMaxDepth) fail("nesting too deep");
    ++pos_;  // '<'
    XmlElement el;
    el.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag");
      if (at("/>")) {
        pos_ += 2;
        return el;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      std::string key = parse_name();
      skip_ws();
      if (eof() || peek() != '=') fail("expected '=' after attribute name");
      ++pos_;
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
      const char quote = s_[pos_++];
      const auto end = s_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      el.attributes.emplace_back(std::move(key), decode_entities(s_.substr(pos_, end - pos_)));
      pos_ = end + 1;
    }
    parse_content(el, depth);
    return el;
  }

  void parse_content(XmlElement& el, int depth) {
    for (;;) {
      if (eof()) fail("unclosed element <" + el.name + ">");
      if (at("</")) {
        pos_ += 2;
        const std::string closing = parse_name();
        if (closing != el.name) fail("mismatched </" + closing + ">, expected </" + el.name + ">");
        skip_ws();
        if (eof() || peek() != '>') fail("malformed end tag");
        ++pos_;
        return;
      }
      if (at("<![CDATA[")) {
        pos_ += 9;
        const auto end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        el.text.append(s_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (at("<!--")) {
        skip_until("-->");
      } else if (at("<?")) {
        skip_until("?>");
      } else if (peek() == '<') {
        el.children.push_back(parse_element(depth + 1));
      } else {
        const auto end = s_.find('<', pos_);
        if (end == std::string_view::npos) fail("unclosed element <" + el.name + ">");
        el.text += decode_entities(s_.substr(pos_, end - pos_));
        pos_ = end;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    const std::string_view ent = s.substr(i + 1, semi - i - 1);
    bool ok = true;
    if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (ent == "nbsp") {
      append_utf8(out, 0xA0);
    } else if (ent.size() > 1 && ent[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ent[1] == 'x' || ent[1] == 'X';
      const auto digits = ent.substr(hex ? 2 : 1);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      ok = ec == std::errc{} && p == digits.data() + digits.size() && !digits.empty() && cp <= 0x10FFFF;
      if (ok) append_utf8(out, cp);
    } else {
      ok = false;
    }
    if (ok) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::string_view XmlElement::local_name() const { return local_part(name); }

const XmlElement* XmlElement::child(std::string_view local) const {
  for (const auto& c : children)
    if (c.local_name() == local) return &c;
  return nullptr;
}

std::vector<const XmlElement*> XmlElement::children_named(std::string_view local) const {
  std::vector<const XmlElement*> out;
  for (const auto& c : children)
    if (c.local_name() == local) out.push_back(&c);
  return out;
}

std::optional<std::string> XmlElement::attribute(std::string_view local) const {
  for (const auto& [k, v] : attributes)
    if (local_part(k) == local) return v;
  return std::nullopt;
}

XmlElement parse_xml(std::string_view document) { return Parser(document).parse_document(); }

}  // namespace sharetrack
