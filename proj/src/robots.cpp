#include "sharetrack/robots.hpp"

#include <cctype>
#include <optional>

#include "sharetrack/urlnorm.hpp"

namespace sharetrack {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

RobotsRules RobotsRules::parse(std::string_view text, std::string_view user_agent) {
  struct Group {
    std::vector<std::string> agents;
    std::vector<Rule> rules;
  };
  std::vector<Group> groups;
  bool collecting_agents = false;

  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key = ascii_lower(trim(line.substr(0, colon)));
    const std::string_view value = trim(line.substr(colon + 1));
    if (key == "user-agent") {
      if (!collecting_agents || groups.empty()) groups.emplace_back();
      groups.back().agents.push_back(ascii_lower(value));
      collecting_agents = true;
    } else if (key == "allow" || key == "disallow") {
      collecting_agents = false;
      if (groups.empty()) continue;
      // an empty Disallow means "allow everything" and adds no rule
      if (value.empty()) continue;
      groups.back().rules.push_back({std::string(value), key == "allow"});
    } else {
      collecting_agents = false;
    }
  }

  const std::string ua = ascii_lower(user_agent);
  const Group* chosen = nullptr;
  const Group* wildcard = nullptr;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a == "*") {
        if (!wildcard) wildcard = &g;
      } else if (!ua.empty() && !chosen && ua.find(a) != std::string::npos) {
        chosen = &g;
      }
    }
  }
  RobotsRules out;
  if (!chosen) chosen = wildcard;
  if (chosen) out.rules_ = chosen->rules;
  return out;
}

bool RobotsRules::allowed(std::string_view path) const {
  if (path.empty()) path = "/";
  std::optional<Rule> best;
  for (const auto& r : rules_) {
    if (!path.starts_with(r.prefix)) continue;
    if (!best || r.prefix.size() > best->prefix.size() ||
        (r.prefix.size() == best->prefix.size() && r.allow)) {
      best = r;
    }
  }
  return !best || best->allow;
}

}  // namespace sharetrack
