// SPDX-License-Identifier: Apache-2.0

#include "adagpr/format.hpp"

#include <charconv>
#include <cstdio>
#include <string_view>

#include "adagpr/error.hpp"

namespace adagpr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string format_shortest(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) fail(ErrorCode::kNumeric, "cannot format double");
  return {buf, end};
}

std::string format_g17(double value) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  return {buf, static_cast<std::size_t>(n)};
}

std::string join_g17(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_g17(values[i]);
  }
  return out;
}

double parse_double(std::string_view token, std::string_view what) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  require(ec == std::errc{} && ptr == token.data() + token.size() && !token.empty(),
          ErrorCode::kInput, std::string(what) + ": not a number: '" + std::string(token) + "'");
  return value;
}

long long parse_integer(std::string_view token, std::string_view what) {
  token = trim(token);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  require(ec == std::errc{} && ptr == token.data() + token.size() && !token.empty(),
          ErrorCode::kInput, std::string(what) + ": not an integer: '" + std::string(token) + "'");
  return value;
}

}  // namespace adagpr
