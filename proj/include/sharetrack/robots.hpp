#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sharetrack {

// robots.txt reduced to prefix rules for one user agent. The longest
// matching prefix decides; Allow wins a tie. No rules means allow all.
class RobotsRules {
 public:
  RobotsRules() = default;

  // Picks the group naming `user_agent` (case-insensitive substring), else
  // the "*" group.
  static RobotsRules parse(std::string_view robots_txt, std::string_view user_agent);

  bool allowed(std::string_view path) const;

 private:
  struct Rule {
    std::string prefix;
    bool allow;
  };
  std::vector<Rule> rules_;
};

}  // namespace sharetrack
