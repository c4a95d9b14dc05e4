#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pisa {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick oracle-equivalence checks over every module, seeded.
std::vector<SelfCheck> run_selftest(unsigned seed = 7);

}  // namespace pisa
