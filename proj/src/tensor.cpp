#include "t2t/tensor.hpp"

#include <cmath>
#include <sstream>

#include "t2t/error.hpp"

namespace t2t {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  if (shape_.empty() || shape_.size() > 2) {
    throw ShapeError("tensor rank must be 1 or 2, got " + shape_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty() || shape_.size() > 2) {
    throw ShapeError("tensor rank must be 1 or 2, got " + shape_string(shape_));
  }
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<Real> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::scalar(Real value) { return Tensor({1}, std::vector<Real>{value}); }

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back({name, std::move(value)});
  return entries_.back().value;
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) != 0; }

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) { return entries_[index_of(name)].value; }

const Tensor& ParamStore::at(const std::string& name) const {
  return entries_[index_of(name)].value;
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

void ParamStore::round_to_storage() {
  for (auto& e : entries_) {
    for (auto& v : e.value.data()) v = static_cast<Real>(static_cast<float>(v));
  }
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (!(entries_[i].value == other.entries_[i].value)) return false;
  }
  return true;
}

Gradients::Gradients(const ParamStore& params) {
  grads_.reserve(params.size());
  for (const auto& e : params.entries()) grads_.emplace_back(e.value.shape(), 0.0);
}

void Gradients::zero() {
  for (auto& g : grads_) {
    for (auto& v : g.data()) v = 0;
  }
}

void Gradients::scale(Real factor) {
  for (auto& g : grads_) {
    for (auto& v : g.data()) v *= factor;
  }
}

Real Gradients::global_norm() const {
  Real sum = 0;
  for (const auto& g : grads_) {
    for (auto v : g.data()) sum += v * v;
  }
  return std::sqrt(sum);
}

}  // namespace t2t
