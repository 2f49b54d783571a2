#include "t2t/tape.hpp"

#include <algorithm>
#include <cmath>

#include "t2t/error.hpp"

namespace t2t {

namespace {

void require_same(const Tape& t, Var a, Var b, const char* op) {
  if (t.shape(a) != t.shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(t.shape(a)) + " vs " +
                     shape_string(t.shape(b)));
  }
}

void require_rank(const Tape& t, Var a, std::size_t rank, const char* op) {
  if (t.shape(a).size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape(a)));
  }
}

Tape& tape_of(Var a) {
  if (!a.tape) throw ShapeError("operation on an unbound variable");
  return *a.tape;
}

}  // namespace

Var Tape::constant(Tensor value) {
  Node n;
  n.shape = value.shape();
  n.own.assign(value.data().begin(), value.data().end());
  n.length = n.own.size();
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::param(const ParamStore& store, std::size_t index) {
  if (store_ && store_ != &store) throw ConfigError("tape is bound to a different parameter store");
  if (!store_) {
    store_ = &store;
    param_nodes_.assign(store.size(), -1);
  }
  if (param_nodes_.size() < store.size()) param_nodes_.resize(store.size(), -1);
  if (param_nodes_[index] >= 0) return {this, static_cast<std::uint32_t>(param_nodes_[index])};
  const Tensor& t = store.at(index);
  Node n;
  n.shape = t.shape();
  n.external = t.data().data();
  n.length = t.size();
  n.needs_grad = record_;
  n.param_index = static_cast<int>(index);
  nodes_.push_back(std::move(n));
  param_nodes_[index] = static_cast<std::int64_t>(nodes_.size() - 1);
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::param(const ParamStore& store, const std::string& name) {
  return param(store, store.index_of(name));
}

Var Tape::push(Shape shape, std::vector<Real> value, std::initializer_list<Var> inputs,
               Backward backward) {
  return push(std::move(shape), std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(backward));
}

Var Tape::push(Shape shape, std::vector<Real> value, std::span<const Var> inputs,
               Backward backward) {
  Node n;
  n.shape = std::move(shape);
  n.own = std::move(value);
  n.length = n.own.size();
  if (record_) {
    for (const auto& in : inputs) {
      if (nodes_[in.id].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
    if (n.needs_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::span<const Real> Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.external) return {n.external, n.length};
  return n.own;
}

Tensor Tape::tensor(Var v) const {
  auto data = value(v);
  return Tensor(shape(v), std::vector<Real>(data.begin(), data.end()));
}

std::span<Real> Tape::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.length, 0.0);
  return n.grad;
}

std::span<const Real> Tape::grad_of(Var v) const { return nodes_[v.id].grad; }

void Tape::backward(Var loss) {
  if (shape(loss) != Shape{1}) throw ShapeError("backward requires a scalar loss");
  for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  grad(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, static_cast<std::uint32_t>(i));
  }
}

void Tape::accumulate_param_grads(Gradients& out) const {
  for (const auto& n : nodes_) {
    if (n.param_index < 0 || n.grad.empty()) continue;
    auto dst = out.at(static_cast<std::size_t>(n.param_index)).data();
    for (std::size_t k = 0; k < n.grad.size(); ++k) dst[k] += n.grad[k];
  }
}

void Tape::truncate(std::size_t mark) {
  if (mark >= nodes_.size()) return;
  nodes_.resize(mark);
  for (auto& p : param_nodes_) {
    if (p >= static_cast<std::int64_t>(mark)) p = -1;
  }
}

// ---------------------------------------------------------------------------

Var matvec(Var w, Var x) {
  Tape& t = tape_of(w);
  require_rank(t, w, 2, "matvec");
  require_rank(t, x, 1, "matvec");
  const std::size_t m = t.shape(w)[0], n = t.shape(w)[1];
  if (t.shape(x)[0] != n) {
    throw ShapeError("matvec: shape mismatch " + shape_string(t.shape(w)) + " vs " +
                     shape_string(t.shape(x)));
  }
  auto wv = t.value(w);
  auto xv = t.value(x);
  std::vector<Real> y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Real* row = wv.data() + i * n;
    Real acc = 0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xv[j];
    y[i] = acc;
  }
  return t.push({m}, std::move(y), {w, x}, [w = w.id, x = x.id, m, n](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    if (t.needs_grad(w)) {
      auto gw = t.grad(w);
      auto xv = t.value(x);
      for (std::size_t i = 0; i < m; ++i) {
        const Real g = gy[i];
        if (g == 0) continue;
        Real* row = gw.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += g * xv[j];
      }
    }
    if (t.needs_grad(x)) {
      auto gx = t.grad(x);
      auto wv = t.value(w);
      for (std::size_t i = 0; i < m; ++i) {
        const Real g = gy[i];
        if (g == 0) continue;
        const Real* row = wv.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) gx[j] += row[j] * g;
      }
    }
  });
}

Var matvec_t(Var w, Var x) {
  Tape& t = tape_of(w);
  require_rank(t, w, 2, "matvec_t");
  require_rank(t, x, 1, "matvec_t");
  const std::size_t m = t.shape(w)[0], n = t.shape(w)[1];
  if (t.shape(x)[0] != m) {
    throw ShapeError("matvec_t: shape mismatch " + shape_string(t.shape(w)) + " vs " +
                     shape_string(t.shape(x)));
  }
  auto wv = t.value(w);
  auto xv = t.value(x);
  std::vector<Real> y(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Real xi = xv[i];
    const Real* row = wv.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * xi;
  }
  return t.push({n}, std::move(y), {w, x}, [w = w.id, x = x.id, m, n](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    if (t.needs_grad(w)) {
      auto gw = t.grad(w);
      auto xv = t.value(x);
      for (std::size_t i = 0; i < m; ++i) {
        const Real xi = xv[i];
        Real* row = gw.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += xi * gy[j];
      }
    }
    if (t.needs_grad(x)) {
      auto gx = t.grad(x);
      auto wv = t.value(w);
      for (std::size_t i = 0; i < m; ++i) {
        const Real* row = wv.data() + i * n;
        Real acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * gy[j];
        gx[i] += acc;
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same(t, a, b, "add");
  auto av = t.value(a);
  auto bv = t.value(b);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return t.push(t.shape(a), std::move(y), {a, b}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    for (auto in : {a, b}) {
      if (!t.needs_grad(in)) continue;
      auto g = t.grad(in);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same(t, a, b, "sub");
  auto av = t.value(a);
  auto bv = t.value(b);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  return t.push(t.shape(a), std::move(y), {a, b}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    if (t.needs_grad(a)) {
      auto g = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
    if (t.needs_grad(b)) {
      auto g = t.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same(t, a, b, "mul");
  auto av = t.value(a);
  auto bv = t.value(b);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  return t.push(t.shape(a), std::move(y), {a, b}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    if (t.needs_grad(a)) {
      auto g = t.grad(a);
      auto bv = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * bv[i];
    }
    if (t.needs_grad(b)) {
      auto g = t.grad(b);
      auto av = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * av[i];
    }
  });
}

Var scale(Var a, Var s) {
  Tape& t = tape_of(a);
  if (t.shape(s) != Shape{1}) throw ShapeError("scale: factor must be [1], got " + shape_string(t.shape(s)));
  auto av = t.value(a);
  const Real k = t.value(s)[0];
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * k;
  return t.push(t.shape(a), std::move(y), {a, s}, [a = a.id, s = s.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    if (t.needs_grad(a)) {
      auto g = t.grad(a);
      const Real k = t.value(s)[0];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * k;
    }
    if (t.needs_grad(s)) {
      auto av = t.value(a);
      Real acc = 0;
      for (std::size_t i = 0; i < av.size(); ++i) acc += gy[i] * av[i];
      t.grad(s)[0] += acc;
    }
  });
}

Var scale(Var a, Real k) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * k;
  return t.push(t.shape(a), std::move(y), {a}, [a = a.id, k](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto g = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * k;
  });
}

Var one_minus(Var a) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 - av[i];
  return t.push(t.shape(a), std::move(y), {a}, [a = a.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto g = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
  });
}

Var dot(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same(t, a, b, "dot");
  auto av = t.value(a);
  auto bv = t.value(b);
  Real acc = 0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return t.push({1}, {acc}, {a, b}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    const Real gy = t.grad(self)[0];
    if (t.needs_grad(a)) {
      auto g = t.grad(a);
      auto bv = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy * bv[i];
    }
    if (t.needs_grad(b)) {
      auto g = t.grad(b);
      auto av = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy * av[i];
    }
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  Real acc = 0;
  for (auto v : t.value(a)) acc += v;
  return t.push({1}, {acc}, {a}, [a = a.id](Tape& t, std::uint32_t self) {
    const Real gy = t.grad(self)[0];
    for (auto& g : t.grad(a)) g += gy;
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape& t = tape_of(parts.front());
  std::vector<Real> y;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    require_rank(t, p, 1, "concat");
    offsets.push_back(y.size());
    ids.push_back(p.id);
    auto v = t.value(p);
    y.insert(y.end(), v.begin(), v.end());
  }
  const std::size_t total = y.size();
  return t.push({total}, std::move(y), parts,
                [ids = std::move(ids), offsets = std::move(offsets)](Tape& t, std::uint32_t self) {
                  auto gy = t.grad(self);
                  for (std::size_t k = 0; k < ids.size(); ++k) {
                    if (!t.needs_grad(ids[k])) continue;
                    auto g = t.grad(ids[k]);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[offsets[k] + i];
                  }
                });
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  Tape& t = tape_of(a);
  require_rank(t, a, 1, "slice");
  auto av = t.value(a);
  if (offset + length > av.size()) {
    throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                     std::to_string(offset + length) + ") outside " + shape_string(t.shape(a)));
  }
  std::vector<Real> y(av.begin() + offset, av.begin() + offset + length);
  return t.push({length}, std::move(y), {a}, [a = a.id, offset](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto g = t.grad(a);
    for (std::size_t i = 0; i < gy.size(); ++i) g[offset + i] += gy[i];
  });
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Real x = av[i];
    y[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return t.push(t.shape(a), std::move(y), {a}, [a = a.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto yv = t.value(self);
    auto g = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * yv[i] * (1.0 - yv[i]);
  });
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(av[i]);
  return t.push(t.shape(a), std::move(y), {a}, [a = a.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto yv = t.value(self);
    auto g = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * (1.0 - yv[i] * yv[i]);
  });
}

Var softmax(Var a) {
  Tape& t = tape_of(a);
  require_rank(t, a, 1, "softmax");
  auto av = t.value(a);
  if (av.empty()) throw ShapeError("softmax: empty input");
  const Real mx = *std::max_element(av.begin(), av.end());
  std::vector<Real> y(av.size());
  Real z = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::exp(av[i] - mx);
    z += y[i];
  }
  for (auto& v : y) v /= z;
  return t.push(t.shape(a), std::move(y), {a}, [a = a.id](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto yv = t.value(self);
    Real inner = 0;
    for (std::size_t i = 0; i < yv.size(); ++i) inner += gy[i] * yv[i];
    auto g = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += yv[i] * (gy[i] - inner);
  });
}

Var embedding_lookup(Var table, std::size_t row) {
  Tape& t = tape_of(table);
  require_rank(t, table, 2, "embedding_lookup");
  const std::size_t rows = t.shape(table)[0], d = t.shape(table)[1];
  if (row >= rows) {
    throw ShapeError("embedding_lookup: row " + std::to_string(row) + " outside " +
                     shape_string(t.shape(table)));
  }
  auto tv = t.value(table);
  std::vector<Real> y(tv.begin() + row * d, tv.begin() + (row + 1) * d);
  return t.push({d}, std::move(y), {table}, [table = table.id, row, d](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto g = t.grad(table);
    for (std::size_t i = 0; i < d; ++i) g[row * d + i] += gy[i];
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  Tape& t = tape_of(rows.front());
  const Shape& first = t.shape(rows.front());
  if (first.size() != 1) throw ShapeError("stack_rows: rows must be vectors, got " + shape_string(first));
  const std::size_t d = first[0];
  std::vector<Real> y;
  y.reserve(rows.size() * d);
  std::vector<std::uint32_t> ids;
  for (const auto& r : rows) {
    if (t.shape(r) != first) {
      throw ShapeError("stack_rows: shape mismatch " + shape_string(first) + " vs " +
                       shape_string(t.shape(r)));
    }
    auto v = t.value(r);
    y.insert(y.end(), v.begin(), v.end());
    ids.push_back(r.id);
  }
  return t.push({rows.size(), d}, std::move(y), rows, [ids = std::move(ids), d](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.needs_grad(ids[k])) continue;
      auto g = t.grad(ids[k]);
      for (std::size_t i = 0; i < d; ++i) g[i] += gy[k * d + i];
    }
  });
}

Var mean(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("mean: no inputs");
  if (parts.size() == 1) return parts.front();
  Var acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return scale(acc, 1.0 / static_cast<Real>(parts.size()));
}

Var max_pool_over_time(std::span<const Var> states) {
  if (states.empty()) throw ShapeError("max_pool_over_time: empty sequence");
  Tape& t = tape_of(states.front());
  const Shape& first = t.shape(states.front());
  if (first.size() != 1) {
    throw ShapeError("max_pool_over_time: states must be vectors, got " + shape_string(first));
  }
  const std::size_t d = first[0];
  std::vector<Real> y(t.value(states.front()).begin(), t.value(states.front()).end());
  std::vector<std::uint32_t> winner(d, states.front().id);
  for (std::size_t k = 1; k < states.size(); ++k) {
    if (t.shape(states[k]) != first) {
      throw ShapeError("max_pool_over_time: shape mismatch " + shape_string(first) + " vs " +
                       shape_string(t.shape(states[k])));
    }
    auto v = t.value(states[k]);
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i] > y[i]) {
        y[i] = v[i];
        winner[i] = states[k].id;
      }
    }
  }
  return t.push({d}, std::move(y), states, [winner = std::move(winner)](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    for (std::size_t i = 0; i < winner.size(); ++i) {
      if (t.needs_grad(winner[i])) t.grad(winner[i])[i] += gy[i];
    }
  });
}

Var pick(Var a, std::size_t index) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  if (index >= av.size()) {
    throw ShapeError("pick: index " + std::to_string(index) + " outside " + shape_string(t.shape(a)));
  }
  return t.push({1}, {av[index]}, {a}, [a = a.id, index](Tape& t, std::uint32_t self) {
    t.grad(a)[index] += t.grad(self)[0];
  });
}

Var sum_at(Var a, std::span<const std::size_t> indices) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  Real acc = 0;
  for (auto i : indices) {
    if (i >= av.size()) {
      throw ShapeError("sum_at: index " + std::to_string(i) + " outside " + shape_string(t.shape(a)));
    }
    acc += av[i];
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return t.push({1}, {acc}, {a}, [a = a.id, idx = std::move(idx)](Tape& t, std::uint32_t self) {
    const Real gy = t.grad(self)[0];
    auto g = t.grad(a);
    for (auto i : idx) g[i] += gy;
  });
}

Var segment_sum(Var a, std::span<const int> group, std::size_t groups) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  if (group.size() != av.size()) {
    throw ShapeError("segment_sum: " + std::to_string(group.size()) + " group ids for " +
                     shape_string(t.shape(a)));
  }
  std::vector<Real> y(groups, 0.0);
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (group[i] < 0) continue;
    if (static_cast<std::size_t>(group[i]) >= groups) throw ShapeError("segment_sum: group id out of range");
    y[static_cast<std::size_t>(group[i])] += av[i];
  }
  std::vector<int> g(group.begin(), group.end());
  return t.push({groups}, std::move(y), {a}, [a = a.id, g = std::move(g)](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] >= 0) ga[i] += gy[static_cast<std::size_t>(g[i])];
    }
  });
}

Var dropout(Var a, Real rate, std::mt19937_64& rng) {
  if (rate <= 0) return a;
  if (rate >= 1) throw ConfigError("dropout rate must be in [0, 1)");
  Tape& t = tape_of(a);
  auto av = t.value(a);
  const Real keep = 1.0 - rate;
  std::bernoulli_distribution coin(keep);
  std::vector<Real> mask(av.size());
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    mask[i] = coin(rng) ? 1.0 / keep : 0.0;
    y[i] = av[i] * mask[i];
  }
  return t.push(t.shape(a), std::move(y), {a}, [a = a.id, mask = std::move(mask)](Tape& t, std::uint32_t self) {
    auto gy = t.grad(self);
    auto g = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * mask[i];
  });
}

Var cross_entropy_from_probs(Var probs, std::size_t index, Real floor) {
  Tape& t = tape_of(probs);
  auto pv = t.value(probs);
  if (index >= pv.size()) {
    throw ShapeError("cross_entropy_from_probs: index " + std::to_string(index) + " outside " +
                     shape_string(t.shape(probs)));
  }
  const Real p = pv[index];
  // NaN is not clamped, so divergence still surfaces as a non-finite loss.
  const bool clamped = p <= floor;
  const Real y = -std::log(clamped ? floor : p);
  return t.push({1}, {y}, {probs}, [probs = probs.id, index, clamped](Tape& t, std::uint32_t self) {
    if (clamped) return;
    const Real p = t.value(probs)[index];
    t.grad(probs)[index] += -t.grad(self)[0] / p;
  });
}

}  // namespace t2t
