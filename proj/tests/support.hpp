#pragma once

#include <vector>

#include "zimed/data.hpp"
#include "zimed/theta.hpp"

namespace testing_support {

using zimed::MediatorFamily;

// A generic interior parameter point for each family.
inline zimed::Theta generic_theta(MediatorFamily f) {
  zimed::Theta t;
  t.family = f;
  t.outcome.beta = {0.4, 0.15, 1.2, 0.3, -0.2, 0.05};
  t.outcome.delta = 0.9;
  t.link.alpha0 = f == MediatorFamily::zilon ? 0.8 : 1.3;
  t.link.alpha1 = 0.25;
  t.link.gamma0 = -0.6;
  t.link.gamma1 = 0.4;
  t.link.sigma = 0.7;
  t.link.r = 2.5;
  t.eta = 0.6;
  return t;
}

// Five records: positives below and above the cap, two zeros.
inline zimed::Dataset five_records() {
  std::vector<zimed::Record> r = {
      {1.9, 3.0, 0.5, {}},
      {0.2, 0.0, -0.3, {}},
      {2.6, 25.0, 1.1, {}},
      {1.1, 0.0, 0.8, {}},
      {1.4, 1.0, -1.2, {}},
  };
  return zimed::Dataset(std::move(r));
}

}  // namespace testing_support
