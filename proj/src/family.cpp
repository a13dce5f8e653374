#include "oitrunc/family.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace oitrunc {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::PP: return "PP";
    case Family::ZTNB: return "ZTNB";
    case Family::OIPP: return "OIPP";
    case Family::OIZTNB: return "OIZTNB";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "pp") return Family::PP;
  if (lower == "ztnb") return Family::ZTNB;
  if (lower == "oipp") return Family::OIPP;
  if (lower == "oiztnb") return Family::OIZTNB;
  throw std::invalid_argument("unknown family '" + std::string(name) +
                              "' (expected pp, ztnb, oipp or oiztnb)");
}

}  // namespace oitrunc
