#include "chppi/error.hpp"

namespace chppi {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::duplicate_site: return "duplicate_site";
    case Errc::empty_sites: return "empty_sites";
    case Errc::invalid_geometry: return "invalid_geometry";
    case Errc::empty_index: return "empty_index";
    case Errc::missing_quartile: return "missing_quartile";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::unseen_category: return "unseen_category";
    case Errc::too_few_antennas: return "too_few_antennas";
    case Errc::out_of_range_category: return "out_of_range_category";
    case Errc::non_finite_loss: return "non_finite_loss";
    case Errc::zero_variance: return "zero_variance";
    case Errc::degenerate_matrix: return "degenerate_matrix";
    case Errc::domain_error: return "domain_error";
    case Errc::fit_failure: return "fit_failure";
    case Errc::all_zero_affinity: return "all_zero_affinity";
    case Errc::zero_area: return "zero_area";
    case Errc::scale_too_small: return "scale_too_small";
    case Errc::validation: return "validation";
    case Errc::stage_failure: return "stage_failure";
    case Errc::parse: return "parse";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void raise(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace chppi
