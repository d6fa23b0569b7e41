#pragma once

#include <string>

#include "core/errors.hpp"

namespace rnnmemo {

enum class PolicyKind { Disabled, Oracle, Bnn };

const char* policy_kind_name(PolicyKind k);
PolicyKind policy_kind_from_name(const std::string& s);

// theta < 0 keeps the predictor running but makes reuse impossible, which is
// the "threshold disabled" mode used by the exactness checks.
struct MemoPolicy {
  PolicyKind kind = PolicyKind::Disabled;
  double theta = 0.0;
  bool throttle = true;

  void validate() const {
    if (kind != PolicyKind::Disabled && theta > 1e9) {
      throw ValidationError("memo policy: theta out of range");
    }
  }
};

}  // namespace rnnmemo
