#pragma once

#include <string>
#include <utility>
#include <vector>

#include "levyspde/config.hpp"

namespace levyspde {

/// Result of one `verify` check: verdict, a one-line summary and the CSV
/// tables it produced, keyed by file stem.
struct CheckOutcome {
    bool pass = false;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> tables;
};

/// Names accepted by run_check, in usage order.
const std::vector<std::string>& check_names();

/// Runs one check with parameters from `config`. Throws ConfigError for an
/// unknown check or when the configuration is outside the check's regime.
CheckOutcome run_check(const std::string& name, const RunConfig& config);

}  // namespace levyspde
