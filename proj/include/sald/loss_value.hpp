#pragma once

namespace sald {

/// total = value_term + lambda * grad_term + reg_term
struct LossValue {
  double total = 0.0;
  double value_term = 0.0;
  double grad_term = 0.0;
  double reg_term = 0.0;
};

}  // namespace sald
