#include "edusim/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace edusim {

double truncate_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double guard = value >= 0.0 ? 1e-9 : -1e-9;
  return std::trunc(value * scale + guard) / scale;
}

std::string format_truncated(double value, int decimals) {
  return format_fixed(truncate_to(value, decimals), decimals);
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(value)))) + 1;
  const double scale = std::pow(10.0, digits - magnitude);
  return std::round(value * scale) / scale;
}

std::string format_display(double value, int decimals) {
  return format_truncated(round_significant(value, kDisplaySignificantDigits), decimals);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_exact(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

}  // namespace edusim
