// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

namespace adagpr {

/// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

/// printf("%.17g"), the CSV convention.
std::string format_g17(double value);

/// Comma-joined %.17g values.
std::string join_g17(std::span<const double> values);

/// Parses a full decimal token; throws kInput with `what` on failure.
double parse_double(std::string_view token, std::string_view what);
long long parse_integer(std::string_view token, std::string_view what);

}  // namespace adagpr
