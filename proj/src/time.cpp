#include "sharetrack/time.hpp"

#include <array>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace sharetrack {
namespace {

using namespace std::chrono;

bool read_int(std::string_view& s, std::size_t digits, int& out) {
  if (s.size() < digits) return false;
  int v = 0;
  for (std::size_t i = 0; i < digits; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  s.remove_prefix(digits);
  return true;
}

bool read_var_int(std::string_view& s, int& out) {
  std::size_t n = 0;
  while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
  if (n == 0 || n > 9) return false;
  std::from_chars(s.data(), s.data() + n, out);
  s.remove_prefix(n);
  return true;
}

void skip_spaces(std::string_view& s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
}

std::optional<Timestamp> make_time(int y, int mo, int d, int h, int mi, int sec) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  // a leap second folds onto the next second
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  skip_spaces(s);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!read_int(s, 4, y) || s.empty() || s.front() != '-') return std::nullopt;
  s.remove_prefix(1);
  if (!read_int(s, 2, mo) || s.empty() || s.front() != '-') return std::nullopt;
  s.remove_prefix(1);
  if (!read_int(s, 2, d)) return std::nullopt;
  if (s.empty()) return make_time(y, mo, d, 0, 0, 0);
  if (s.front() != 'T' && s.front() != 't' && s.front() != ' ') return std::nullopt;
  s.remove_prefix(1);
  if (!read_int(s, 2, h) || s.empty() || s.front() != ':') return std::nullopt;
  s.remove_prefix(1);
  if (!read_int(s, 2, mi)) return std::nullopt;
  if (!s.empty() && s.front() == ':') {
    s.remove_prefix(1);
    if (!read_int(s, 2, sec)) return std::nullopt;
    if (!s.empty() && (s.front() == '.' || s.front() == ',')) {
      s.remove_prefix(1);
      std::size_t n = 0;
      while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
      if (n == 0) return std::nullopt;
      s.remove_prefix(n);  // sub-second precision is truncated
    }
  }
  auto t = make_time(y, mo, d, h, mi, sec);
  if (!t) return std::nullopt;
  if (s.empty()) return t;  // no designator: assume UTC
  if (s == "Z" || s == "z") return t;
  const char sign = s.front();
  if (sign != '+' && sign != '-') return std::nullopt;
  s.remove_prefix(1);
  int oh, om = 0;
  if (!read_int(s, 2, oh)) return std::nullopt;
  if (!s.empty() && s.front() == ':') s.remove_prefix(1);
  if (!s.empty() && !read_int(s, 2, om)) return std::nullopt;
  if (!s.empty() || oh > 23 || om > 59) return std::nullopt;
  const auto offset = hours{oh} + minutes{om};
  return sign == '+' ? *t - offset : *t + offset;
}

std::optional<Timestamp> parse_rfc822(std::string_view s) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  skip_spaces(s);
  // optional day-of-week
  if (auto comma = s.find(','); comma != std::string_view::npos && comma <= 10) {
    s.remove_prefix(comma + 1);
    skip_spaces(s);
  }
  int d, y, h, mi, sec = 0;
  if (!read_var_int(s, d)) return std::nullopt;
  skip_spaces(s);
  if (s.size() < 3) return std::nullopt;
  int mo = 0;
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    bool eq = true;
    for (std::size_t k = 0; k < 3; ++k)
      if (std::tolower(static_cast<unsigned char>(s[k])) != kMonths[i][k]) eq = false;
    if (eq) mo = static_cast<int>(i) + 1;
  }
  if (mo == 0) return std::nullopt;
  while (!s.empty() && std::isalpha(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  skip_spaces(s);
  const std::size_t before = s.size();
  if (!read_var_int(s, y)) return std::nullopt;
  if (before - s.size() <= 2) y += (y < 50 ? 2000 : 1900);
  skip_spaces(s);
  if (!read_int(s, 2, h) || s.empty() || s.front() != ':') return std::nullopt;
  s.remove_prefix(1);
  if (!read_int(s, 2, mi)) return std::nullopt;
  if (!s.empty() && s.front() == ':') {
    s.remove_prefix(1);
    if (!read_int(s, 2, sec)) return std::nullopt;
  }
  auto t = make_time(y, mo, d, h, mi, sec);
  if (!t) return std::nullopt;
  skip_spaces(s);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return t;
  if (s.front() == '+' || s.front() == '-') {
    const char sign = s.front();
    s.remove_prefix(1);
    int oh, om;
    if (!read_int(s, 2, oh) || !read_int(s, 2, om)) return std::nullopt;
    const auto offset = hours{oh} + minutes{om};
    return sign == '+' ? *t - offset : *t + offset;
  }
  struct Zone {
    std::string_view name;
    int hours;
  };
  static constexpr std::array<Zone, 10> kZones = {{{"UT", 0}, {"UTC", 0}, {"GMT", 0}, {"Z", 0},
                                                   {"EST", -5}, {"EDT", -4}, {"CST", -6},
                                                   {"CDT", -5}, {"MST", -7}, {"PST", -8}}};
  for (const auto& z : kZones) {
    if (s.size() != z.name.size()) continue;
    bool eq = true;
    for (std::size_t k = 0; k < s.size(); ++k)
      if (std::toupper(static_cast<unsigned char>(s[k])) != z.name[k]) eq = false;
    if (eq) return *t - hours{z.hours};
  }
  if (s == "MDT" || s == "mdt") return *t + hours{6};
  if (s == "PDT" || s == "pdt") return *t + hours{7};
  // unknown zone names are read as UTC
  return t;
}

std::string format_iso8601(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

}  // namespace sharetrack
