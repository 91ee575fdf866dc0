#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robustglm/dataset.hpp"

namespace robustglm {

struct LabeledDataset {
  Dataset data;
  /// One name per column of data.X; "(Intercept)" for the added column.
  std::vector<std::string> names;
};

/// Reads a comma-separated table with a header row. The `response` column
/// must hold nonnegative integers; every other column becomes a covariate.
/// Blank lines are skipped and a trailing CR is ignored. Throws InputError
/// with the offending line number on malformed input.
LabeledDataset read_csv(std::istream& in, const std::string& response, bool intercept = true);
LabeledDataset read_csv_file(const std::string& path, const std::string& response,
                             bool intercept = true);

}  // namespace robustglm
