#include "t2t/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "t2t/error.hpp"

namespace t2t {

LstmState lstm_step(const LstmCell& cell, Var x, const LstmState& state) {
  const std::size_t h = cell.hidden;
  Tape& t = *x.tape;
  if (t.shape(state.h) != Shape{h} || t.shape(state.c) != Shape{h}) {
    throw ShapeError("lstm_step: state " + shape_string(t.shape(state.h)) + " does not match hidden size " +
                     std::to_string(h));
  }
  const Var z = add(matvec(cell.weight, concat({x, state.h})), cell.bias);
  const Var in_gate = sigmoid(slice(z, 0, h));
  const Var forget_gate = sigmoid(slice(z, h, h));
  const Var candidate = tanh(slice(z, 2 * h, h));
  const Var out_gate = sigmoid(slice(z, 3 * h, h));
  const Var c = add(mul(forget_gate, state.c), mul(in_gate, candidate));
  return {mul(out_gate, tanh(c)), c};
}

Adam::Adam(const ParamStore& params, AdamOptions options)
    : options_(options), first_(params), second_(params) {}

void Adam::step(ParamStore& params, const Gradients& grads) {
  if (grads.size() != params.size()) throw ShapeError("adam: gradient count does not match parameters");
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (auto g : grads.at(p).data()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient for parameter " + params.name(p));
    }
  }
  ++step_;
  const Real b1 = options_.beta1, b2 = options_.beta2;
  const Real c1 = 1.0 - std::pow(b1, static_cast<Real>(step_));
  const Real c2 = 1.0 - std::pow(b2, static_cast<Real>(step_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params.at(p).data();
    auto g = grads.at(p).data();
    auto m = first_.at(p).data();
    auto v = second_.at(p).data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const Real m_hat = m[i] / c1;
      const Real v_hat = v[i] / c2;
      w[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

Real clip_global_norm(Gradients& grads, Real max_norm) {
  const Real norm = grads.global_norm();
  if (max_norm > 0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

Real relative_error(Real analytic, Real numeric, Real floor) {
  const Real denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const LossBuilder& loss, ParamStore& params, const GradCheckOptions& options) {
  Gradients analytic(params);
  {
    Tape tape;
    const Var l = loss(tape, params);
    tape.backward(l);
    tape.accumulate_param_grads(analytic);
  }

  auto evaluate = [&]() {
    Tape tape(false);
    return tape.scalar(loss(tape, params));
  };

  struct Coord {
    std::size_t param;
    std::size_t element;
  };
  std::vector<Coord> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params.at(p).size(); ++i) coords.push_back({p, i});
  }

  GradCheckReport report;
  report.total = coords.size();
  if (coords.size() > options.max_elements) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_elements);
  }

  std::vector<GradCheckEntry> entries;
  entries.reserve(coords.size());
  for (const auto& c : coords) {
    Real& w = params.at(c.param)[c.element];
    const Real saved = w;
    w = saved + options.step;
    const Real plus = evaluate();
    w = saved - options.step;
    const Real minus = evaluate();
    w = saved;
    const Real numeric = (plus - minus) / (2.0 * options.step);
    const Real a = analytic.at(c.param)[c.element];
    entries.push_back({params.name(c.param), c.element, a, numeric,
                       relative_error(a, numeric, options.denominator_floor)});
  }
  report.checked = entries.size();
  std::sort(entries.begin(), entries.end(),
            [](const GradCheckEntry& x, const GradCheckEntry& y) { return x.rel_error > y.rel_error; });
  if (!entries.empty()) report.max_rel_error = entries.front().rel_error;
  entries.resize(std::min(entries.size(), options.report_worst));
  report.worst = std::move(entries);
  return report;
}

}  // namespace t2t
