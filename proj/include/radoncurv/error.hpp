#ifndef RADONCURV_ERROR_HPP
#define RADONCURV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace radoncurv {

/// Chart point where the tangent frame of an embedding loses rank.
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Test function whose transform has a non-vanishing differential at the
/// chart point, so it cannot be paired with the quotient-valued curvature.
class AnnihilatorViolation : public std::runtime_error {
 public:
  AnnihilatorViolation(const std::string& what, double measured)
      : std::runtime_error(what), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

}  // namespace radoncurv

#endif  // RADONCURV_ERROR_HPP
