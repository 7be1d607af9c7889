#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cganseg {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major float64 array (NCHW for images) with an optional
/// gradient buffer.
///
/// Tensor is a handle: copies share storage, like a shared_ptr. Values are
/// treated as immutable once an operation has produced them; parameters are
/// the exception and are updated in place by the optimizer. The gradient
/// buffer exists exactly when requires_grad() is true and always has the
/// same shape as the data.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor.
  explicit Tensor(Shape shape, bool requires_grad = false);
  // Throws ShapeError on a size mismatch and NumericError on non-finite values.
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // In-place access, meant for parameters and freshly created outputs.
  std::span<double> data_mut();
  double item() const;
  double at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  // Turning gradients off releases the buffer; turning them on allocates zeros.
  void set_requires_grad(bool on);
  bool has_grad() const { return requires_grad(); }
  std::span<const double> grad() const;
  // Gradient buffers are the mutable part of a tensor, so this is const on the handle.
  std::span<double> grad_mut() const;
  void zero_grad();

  // Deep copy of the values, detached from any gradient bookkeeping.
  Tensor clone() const;
  Tensor reshaped(Shape shape) const;  // deep copy with a new shape
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  // Throws NumericError naming `what` if any value is NaN or Inf.
  void check_finite(std::string_view what) const;

 private:
  struct Storage {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> impl_;
};

bool all_finite(std::span<const double> values);

}  // namespace cganseg
