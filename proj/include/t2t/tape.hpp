#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "t2t/tensor.hpp"

namespace t2t {

class Tape;

/// Handle to a node on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  bool valid() const { return tape != nullptr; }
};

/// Reverse-mode computation record.
///
/// Nodes are appended in evaluation order, so reverse creation order is a
/// valid topological order for backpropagation. A tape reads parameters from
/// a single ParamStore without copying them; the store must outlive the tape
/// and stay unmodified while the tape is in use. A tape is not thread-safe,
/// but independent tapes over the same read-only store are.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::uint32_t)>;

  /// With `record == false` no backward closures are kept (inference).
  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Tensor value);
  Var param(const ParamStore& store, std::size_t index);
  Var param(const ParamStore& store, const std::string& name);

  /// Appends an op result. `backward` is dropped when no input needs a
  /// gradient or the tape is not recording.
  Var push(Shape shape, std::vector<Real> value, std::initializer_list<Var> inputs,
           Backward backward);
  Var push(Shape shape, std::vector<Real> value, std::span<const Var> inputs, Backward backward);

  std::span<const Real> value(Var v) const { return value(v.id); }
  std::span<const Real> value(std::uint32_t id) const;
  const Shape& shape(Var v) const { return nodes_[v.id].shape; }
  const Shape& shape(std::uint32_t id) const { return nodes_[id].shape; }
  Real scalar(Var v) const { return value(v)[0]; }
  Tensor tensor(Var v) const;

  bool needs_grad(std::uint32_t id) const { return nodes_[id].needs_grad; }
  /// Gradient accumulator of a node, zero-initialised on first access.
  std::span<Real> grad(std::uint32_t id);
  std::span<const Real> grad_of(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 and propagates to every node.
  void backward(Var loss);

  /// Adds parameter gradients into `out` (indexed like the bound store).
  void accumulate_param_grads(Gradients& out) const;

  std::size_t size() const { return nodes_.size(); }
  std::size_t mark() const { return nodes_.size(); }
  /// Drops every node created after `mark`.
  void truncate(std::size_t mark);

 private:
  struct Node {
    Shape shape;
    std::vector<Real> own;
    const Real* external = nullptr;
    std::size_t length = 0;
    std::vector<Real> grad;
    Backward backward;
    bool needs_grad = false;
    int param_index = -1;
  };

  bool record_;
  std::vector<Node> nodes_;
  const ParamStore* store_ = nullptr;
  std::vector<std::int64_t> param_nodes_;
};

// Op suite. Vectors are rank-1 tensors; scalars are shape [1].

Var matvec(Var w, Var x);    ///< W[m x n] * x[n] -> [m]
Var matvec_t(Var w, Var x);  ///< W[m x n]^T * x[m] -> [n]
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);                 ///< elementwise
Var scale(Var a, Var s);               ///< vector times scalar node
Var scale(Var a, Real s);              ///< vector times constant
Var one_minus(Var a);                  ///< 1 - a
Var dot(Var a, Var b);                 ///< -> [1]
Var sum(Var a);                        ///< -> [1]
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var slice(Var a, std::size_t offset, std::size_t length);
Var sigmoid(Var a);
Var tanh(Var a);
Var softmax(Var a);
Var embedding_lookup(Var table, std::size_t row);
Var stack_rows(std::span<const Var> rows);  ///< n vectors of size d -> [n x d]
Var mean(std::span<const Var> parts);
/// Per-dimension maximum over a sequence of equally sized vectors.
Var max_pool_over_time(std::span<const Var> states);
Var pick(Var a, std::size_t index);                       ///< -> [1]
Var sum_at(Var a, std::span<const std::size_t> indices);  ///< -> [1]
/// out[g] = sum of a[i] with group[i] == g; entries with group < 0 are skipped.
Var segment_sum(Var a, std::span<const int> group, std::size_t groups);
/// Inverted dropout: zeroes entries with probability `rate`, rescales the rest.
Var dropout(Var a, Real rate, std::mt19937_64& rng);
/// -log(max(p[index], floor)).
Var cross_entropy_from_probs(Var probs, std::size_t index, Real floor = 1e-12);

}  // namespace t2t
