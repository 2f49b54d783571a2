#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "t2t/tape.hpp"
#include "t2t/tensor.hpp"

namespace t2t {

struct LstmState {
  Var h;
  Var c;
};

/// Single LSTM cell. `weight` is [4H x (I + H)] over the concatenation
/// [x; h], `bias` is [4H]; gate blocks are ordered input, forget,
/// candidate, output.
struct LstmCell {
  Var weight;
  Var bias;
  std::size_t hidden = 0;
};

LstmState lstm_step(const LstmCell& cell, Var x, const LstmState& state);

struct AdamOptions {
  Real learning_rate = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.98;
  Real epsilon = 1e-9;
};

/// Adam with bias correction. Moment buffers are created zeroed for the
/// store the optimizer is constructed with.
class Adam {
 public:
  Adam(const ParamStore& params, AdamOptions options);

  /// Applies one update. Throws NumericError naming the first parameter
  /// with a non-finite gradient, before touching any parameter.
  void step(ParamStore& params, const Gradients& grads);

  std::size_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  Gradients first_;
  Gradients second_;
  std::size_t step_ = 0;
};

/// Rescales `grads` so that their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
Real clip_global_norm(Gradients& grads, Real max_norm);

struct GradCheckEntry {
  std::string param;
  std::size_t element = 0;
  Real analytic = 0;
  Real numeric = 0;
  Real rel_error = 0;
};

struct GradCheckReport {
  Real max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t total = 0;
  std::vector<GradCheckEntry> worst;  ///< sorted, largest error first

  bool passed(Real tolerance) const { return max_rel_error < tolerance; }
};

struct GradCheckOptions {
  /// Balances truncation error against cancellation in the loss; at 1e-5
  /// the cancellation term alone reaches 1e-4 relative on small entries.
  Real step = 3e-4;
  std::size_t max_elements = 10000;  ///< above this, a seeded random subsample
  std::uint64_t seed = 0;
  std::size_t report_worst = 5;
  Real denominator_floor = 1e-6;
};

/// Builds the scalar loss on a fresh tape.
using LossBuilder = std::function<Var(Tape&, const ParamStore&)>;

/// |a - n| / max(|a|, |n|, floor).
Real relative_error(Real analytic, Real numeric, Real floor);

/// Compares reverse-mode gradients of `loss` with central differences.
/// Parameters are perturbed in place and restored bit-exactly.
GradCheckReport grad_check(const LossBuilder& loss, ParamStore& params,
                           const GradCheckOptions& options = {});

}  // namespace t2t
