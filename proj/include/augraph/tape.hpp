#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace augraph {

using Scalar = double;

/// Row-major storage so the flat buffer order matches the serialized layout.
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// Pushes a gradient contribution into a parent node during backpropagation.
using PushFn = std::function<void(Tensor*, const Mat&)>;

/// One node of the dynamic computation tape: a dense matrix value plus, for
/// gradient-requiring nodes, an accumulated gradient of the same shape.
///
/// Everything in the pipeline is rank <= 2: matrices are RxC, vectors are 1xC
/// rows, scalars 1x1. Nodes hold strong references to their parents, so a
/// recorded graph lives exactly as long as its outputs and is freed when the
/// last result (typically the loss) goes out of scope.
class Tensor {
public:
  Mat value;
  Mat grad;  // allocated on first use; shape always equals value's
  bool requires_grad = false;

  std::vector<TensorPtr> parents;
  /// Distributes this node's adjoint to its parents. Receives the per-call
  /// adjoint (not `grad`, which accumulates across backward calls).
  std::function<void(const Mat& adjoint, const PushFn& push)> backprop;

  Tensor() = default;
  explicit Tensor(Mat v, bool req = false) : value(std::move(v)), requires_grad(req) {}

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  Eigen::Index size() const { return value.size(); }
  std::vector<Eigen::Index> shape() const { return {value.rows(), value.cols()}; }
  bool is_scalar() const { return value.rows() == 1 && value.cols() == 1; }

  /// Value of a 1x1 tensor.
  Scalar item() const;

  void ensure_grad();
  void zero_grad();
  void accumulate(const Mat& g);
};

TensorPtr constant(Mat v);
TensorPtr constant(Scalar v);
TensorPtr variable(Mat v);  // requires_grad = true

// --- recorded operations -------------------------------------------------

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
TensorPtr transpose(const TensorPtr& a);

/// Same-shape elementwise sum, or (m x n) + (1 x n) bias-row broadcast.
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
TensorPtr neg(const TensorPtr& a);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);  // elementwise
TensorPtr div(const TensorPtr& a, const TensorPtr& b);  // elementwise
TensorPtr add_scalar(const TensorPtr& a, Scalar c);
TensorPtr mul_scalar(const TensorPtr& a, Scalar c);

TensorPtr relu(const TensorPtr& a);  // subgradient at 0 is 0
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr log(const TensorPtr& a);
TensorPtr exp(const TensorPtr& a);
TensorPtr sqrt(const TensorPtr& a);  // subgradient at 0 is 0

/// Clamp into [lo, hi]; gradient passes exactly where lo <= x <= hi.
TensorPtr clamp(const TensorPtr& a, Scalar lo, Scalar hi);

/// Row-wise softmax, stabilized by subtracting each row's maximum.
TensorPtr softmax_rows(const TensorPtr& a);

TensorPtr sum(const TensorPtr& a);   // 1x1
TensorPtr mean(const TensorPtr& a);  // 1x1

/// Column means of a D x C map: the 1 x C global-average-pooled descriptor.
TensorPtr global_average_pool(const TensorPtr& a);

TensorPtr row(const TensorPtr& a, Eigen::Index i);  // 1 x C slice
TensorPtr concat_rows(const std::vector<TensorPtr>& parts);
TensorPtr concat_cols(const std::vector<TensorPtr>& parts);

// --- reverse pass ---------------------------------------------------------

/// Reverse-mode sweep from a scalar loss. Adds this call's adjoint into the
/// `grad` of every reachable gradient-requiring node; repeated calls without
/// zeroing accumulate. Deterministic: the traversal order is fixed by graph
/// construction order.
void backward(const TensorPtr& loss);

void zero_grad(const std::vector<TensorPtr>& tensors);

/// Central-difference check of the tape gradients of `f` (a deterministic
/// scalar function of the current values of `wrt`). Returns the maximum over
/// sampled coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
/// `max_coords_per_tensor` = 0 checks every coordinate.
Scalar grad_check(const std::function<TensorPtr()>& f,
                  const std::vector<TensorPtr>& wrt,
                  Scalar h = 1e-6,
                  int max_coords_per_tensor = 0,
                  std::uint64_t seed = 0x5eed);

// --- named parameters -----------------------------------------------------

struct Parameter {
  std::string name;
  TensorPtr tensor;
};

/// Ordered list of uniquely named parameters; the unit of checkpointing.
class ParameterStore {
public:
  void add(std::string name, TensorPtr tensor);
  const std::vector<Parameter>& items() const { return items_; }
  TensorPtr find(const std::string& name) const;
  std::size_t size() const { return items_.size(); }

private:
  std::vector<Parameter> items_;
};

std::string shape_str(const Tensor& t);

}  // namespace augraph
