#include "afferentsim/types.hpp"

namespace afferentsim {

std::string_view to_string(AfferentType type) {
  switch (type) {
    case AfferentType::SA: return "SA";
    case AfferentType::RA: return "RA";
    case AfferentType::PC: return "PC";
  }
  return "?";
}

AfferentType parse_afferent(std::string_view name) {
  if (name == "SA" || name == "sa") return AfferentType::SA;
  if (name == "RA" || name == "ra") return AfferentType::RA;
  if (name == "PC" || name == "pc") return AfferentType::PC;
  throw ValidationError("afferent", "unknown afferent type '" + std::string(name) + "'");
}

}  // namespace afferentsim
