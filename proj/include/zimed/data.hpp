#pragma once

#include <cstddef>
#include <vector>

namespace zimed {

struct Record {
  double y = 0.0;
  double m_star = 0.0;  // observed mediator, >= 0
  double x = 0.0;
  std::vector<double> z;  // confounders

  bool observed_positive() const { return m_star > 0.0; }  // R
};

class Dataset {
 public:
  Dataset() = default;
  // Validates m* >= 0, finite values and a consistent confounder width.
  explicit Dataset(std::vector<Record> records);

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Record& operator[](std::size_t i) const { return records_[i]; }

  std::size_t n_confounders() const { return n_confounders_; }
  // True when every m* is a whole number, so the count families apply.
  bool integer_mediator() const { return integer_mediator_; }
  std::size_t n_zero() const { return n_zero_; }
  std::size_t n_positive() const { return records_.size() - n_zero_; }

  // Median of the positive m* values (0 if there are none).
  double median_positive_mediator() const;

 private:
  std::vector<Record> records_;
  std::size_t n_confounders_ = 0;
  bool integer_mediator_ = true;
  std::size_t n_zero_ = 0;
};

}  // namespace zimed
