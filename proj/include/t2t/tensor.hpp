#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace t2t {

/// Compute type. Parameters are kept float-representable (see
/// ParamStore::round_to_storage) so checkpoints round-trip exactly.
using Real = double;

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of rank 1 or 2.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0);
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor vector(std::vector<Real> values);
  static Tensor scalar(Real value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  Real at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

/// Named trainable parameters in insertion order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  Tensor& add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  Tensor& at(std::size_t index) { return entries_[index].value; }
  const Tensor& at(std::size_t index) const { return entries_[index].value; }
  const std::string& name(std::size_t index) const { return entries_[index].name; }

  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// Round every value to the nearest 32-bit float.
  void round_to_storage();

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One gradient tensor per ParamStore entry, same order and shapes.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore& params);

  Tensor& at(std::size_t index) { return grads_[index]; }
  const Tensor& at(std::size_t index) const { return grads_[index]; }
  std::size_t size() const { return grads_.size(); }

  void zero();
  void scale(Real factor);
  Real global_norm() const;

 private:
  std::vector<Tensor> grads_;
};

}  // namespace t2t
