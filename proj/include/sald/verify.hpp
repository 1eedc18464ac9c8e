#pragma once

// Self-checks run by `sald verify`: the unit-vector inequality sweep, the
// curve-family minimality sweep, and finite-difference checks of every
// derivative the trainer relies on.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sald/loss.hpp"

namespace sald {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Distance to the threshold; negative when the check fails.
  double margin = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t unit_pairs = 100000;
  std::size_t gradient_cases = 100;
  /// Similarity used by the sign-symmetry checks; swapped out to confirm
  /// that a broken similarity is caught.
  ScalarSimilarity tau = tau_scalar;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

CheckResult check_unit_vector_bound(const VerifyOptions& options);
CheckResult check_unit_vector_closed_form(const VerifyOptions& options);
std::vector<CheckResult> check_curve_family(const VerifyOptions& options);
CheckResult check_spatial_gradient(int dim, const VerifyOptions& options);
CheckResult check_loss_gradient(double lambda, const VerifyOptions& options);
CheckResult check_sign_symmetry(const VerifyOptions& options);

VerifyReport run_verification(const VerifyOptions& options = {});
void print_report(const VerifyReport& report, std::ostream& out);

}  // namespace sald
