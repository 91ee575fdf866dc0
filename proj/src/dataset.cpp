#include "robustglm/dataset.hpp"

#include <sstream>

#include "robustglm/errors.hpp"

namespace robustglm {

void Dataset::validate() const {
  if (X.rows() != y.size()) {
    throw InputError("design has " + std::to_string(X.rows()) + " rows but " +
                     std::to_string(y.size()) + " responses");
  }
  if (n() <= p()) {
    std::ostringstream msg;
    msg << "need more observations than coefficients (n=" << n() << ", p=" << p() << ")";
    throw InputError(msg.str());
  }
  for (Index i = 0; i < n(); ++i) {
    if (y[i] < 0) throw InputError("negative response at row " + std::to_string(i));
  }
  if (!X.allFinite()) throw InputError("design matrix contains non-finite entries");
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.X.resize(static_cast<Index>(rows.size()), p());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Index>(r);
    out.X.row(i) = X.row(rows[r]);
    out.y[i] = y[rows[r]];
  }
  return out;
}

Eigen::VectorXd Dataset::transformed() const {
  Eigen::VectorXd t(n());
  for (Index i = 0; i < n(); ++i) t[i] = t_transform(y[i]);
  return t;
}

std::vector<Index> all_but(Index n, Index drop) {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (i != drop) rows.push_back(i);
  }
  return rows;
}

}  // namespace robustglm
