#include "zimed/data.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zimed/error.hpp"

namespace zimed {

Dataset::Dataset(std::vector<Record> records) : records_(std::move(records)) {
  if (!records_.empty()) n_confounders_ = records_.front().z.size();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    const std::string where = "record " + std::to_string(i + 1) + ": ";
    if (!std::isfinite(r.y) || !std::isfinite(r.x) || !std::isfinite(r.m_star)) {
      throw IngestionError(where + "non-finite value");
    }
    if (r.m_star < 0.0) throw IngestionError(where + "mediator negative");
    if (r.z.size() != n_confounders_) throw IngestionError(where + "confounder count mismatch");
    for (double z : r.z) {
      if (!std::isfinite(z)) throw IngestionError(where + "non-finite confounder");
    }
    if (std::floor(r.m_star) != r.m_star) integer_mediator_ = false;
    if (r.m_star == 0.0) ++n_zero_;
  }
}

double Dataset::median_positive_mediator() const {
  std::vector<double> pos;
  for (const auto& r : records_) {
    if (r.m_star > 0.0) pos.push_back(r.m_star);
  }
  if (pos.empty()) return 0.0;
  std::sort(pos.begin(), pos.end());
  const std::size_t n = pos.size();
  return n % 2 == 1 ? pos[n / 2] : 0.5 * (pos[n / 2 - 1] + pos[n / 2]);
}

}  // namespace zimed
