#pragma once

#include <stdexcept>
#include <string>

namespace chppi {

// Every failure the library raises deliberately carries one of these codes.
// Conditions that are tolerated (degenerate polygons, unreachable blocks,
// empty cells, ...) are reported through flags on results instead.
enum class Errc {
  duplicate_site,
  empty_sites,
  invalid_geometry,
  empty_index,
  missing_quartile,
  rank_deficient,
  unseen_category,
  too_few_antennas,
  out_of_range_category,
  non_finite_loss,
  zero_variance,
  degenerate_matrix,
  domain_error,
  fit_failure,
  all_zero_affinity,
  zero_area,
  scale_too_small,
  validation,
  stage_failure,
  parse,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

}  // namespace chppi
