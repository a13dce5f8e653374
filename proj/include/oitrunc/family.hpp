#pragma once

#include <string>
#include <string_view>

namespace oitrunc {

/// The four zero-truncated count models.
enum class Family { PP, ZTNB, OIPP, OIZTNB };

constexpr bool is_one_inflated(Family f) {
  return f == Family::OIPP || f == Family::OIZTNB;
}

constexpr bool is_negbin(Family f) {
  return f == Family::ZTNB || f == Family::OIZTNB;
}

/// Non-inflated model nested inside `f` (PP for OIPP, ZTNB for OIZTNB).
constexpr Family base_family(Family f) {
  return is_negbin(f) ? Family::ZTNB : Family::PP;
}

constexpr Family inflated_family(Family f) {
  return is_negbin(f) ? Family::OIZTNB : Family::OIPP;
}

std::string_view to_string(Family f);

/// Case-insensitive; throws std::invalid_argument on unknown names.
Family parse_family(std::string_view name);

}  // namespace oitrunc
