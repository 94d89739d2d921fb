#ifndef AFFERENTSIM_TYPES_HPP
#define AFFERENTSIM_TYPES_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace afferentsim {

inline constexpr const char* kVersion = "0.1.0";

/// Sampling step shared by the mechanical and neural stages (ms).
inline constexpr double kDefaultDtMs = 0.5;

enum class AfferentType { SA, RA, PC };

inline constexpr std::array<AfferentType, 3> kAllAfferents = {
    AfferentType::SA, AfferentType::RA, AfferentType::PC};

std::string_view to_string(AfferentType type);
AfferentType parse_afferent(std::string_view name);

/// Time series sampled at a fixed step.
using Signal = Eigen::ArrayXd;

/// Invalid user input: a spec, config field or file record. `field()` names
/// the offending path (e.g. `geometry.domain_width_mm`).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Numerical failure: singular system, inverted element, non-finite data.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace afferentsim

#endif  // AFFERENTSIM_TYPES_HPP
