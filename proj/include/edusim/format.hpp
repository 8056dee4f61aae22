#pragma once

#include <string>

namespace edusim {

// Truncation toward zero at `decimals` places. A 1e-9 guard absorbs binary
// representation error so that e.g. 0.29 * 100 does not truncate to 28.
double truncate_to(double value, int decimals);

// truncate_to, printed with exactly `decimals` places.
std::string format_truncated(double value, int decimals);

// Rounds to `digits` significant digits (0 stays 0).
double round_significant(double value, int digits);

// Display rule for published-style summary values: round to 5 significant
// digits, then truncate to `decimals` places. 265.3155 -> 265.32 and
// 32.4667 -> 32.46 under the same rule.
inline constexpr int kDisplaySignificantDigits = 5;
std::string format_display(double value, int decimals);

// Fixed-point with rounding (used for simulated scores, which are rounded).
std::string format_fixed(double value, int decimals);

// Shortest string that parses back to the same double.
std::string format_exact(double value);

}  // namespace edusim
