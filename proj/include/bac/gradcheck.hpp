#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bac {

// Central finite differences against the analytic backward passes. Errors
// are norm-wise: |g - fd| / max(|g|, |fd|, 1e-12) per configuration.
struct GradcheckResult {
  std::string suite;
  std::size_t configurations = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return configurations > 0 && max_rel_error < tolerance; }
};

GradcheckResult check_weight_gradients(std::uint64_t seed, std::size_t configs);
GradcheckResult check_input_gradients(std::uint64_t seed, std::size_t configs);
GradcheckResult check_indirect_chain(std::uint64_t seed, std::size_t configs);
GradcheckResult check_direct_gradient(std::uint64_t seed, std::size_t configs);
GradcheckResult check_plan_sensitivity(std::uint64_t seed, std::size_t configs);

std::vector<GradcheckResult> run_all_gradchecks(std::uint64_t seed = 1,
                                                std::size_t configs = 50);

}  // namespace bac
