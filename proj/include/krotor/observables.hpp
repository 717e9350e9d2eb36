#pragma once

#include "krotor/common.hpp"

namespace krotor {

/// Per-step time series of momentum moments plus whichever bookkeeping the
/// producing engine has: norm factors and boundary leak for quantum runs,
/// branch counts and total weight for pseudoclassical runs.
struct ObservableSeries {
  std::vector<int> times;
  std::vector<double> mean_p;
  std::vector<double> var_p;

  std::vector<double> norm_factor;    // pre-normalization norm per step (quantum)
  std::vector<double> boundary_leak;  // quantum
  std::vector<double> total_weight;   // pseudoclassical
  std::vector<std::int64_t> branch_count;  // pseudoclassical

  std::size_t size() const { return times.size(); }
};

}  // namespace krotor
