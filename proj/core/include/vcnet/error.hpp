#pragma once

#include <stdexcept>
#include <string>

namespace vcnet {

enum class Errc {
  malformed_row,
  missing_amount,
  bad_date,
  bad_field,
  duplicate_deal_id,
  duplicate_id,
  non_bipartite_id,
  no_convergence,
  component_too_large,
  too_few_curves,
  constant_column,
  singular_design,
  too_many_features,
  unknown_community,
  missing_input,
  bad_config,
  internal,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace vcnet
