#include "augraph/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "augraph/errors.hpp"
#include "augraph/rng.hpp"

namespace augraph {

namespace {

TensorPtr make_node(Mat value, std::vector<TensorPtr> parents) {
  auto out = std::make_shared<Tensor>(std::move(value));
  for (const auto& p : parents) {
    if (p->requires_grad) {
      out->requires_grad = true;
      break;
    }
  }
  out->parents = std::move(parents);
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

}  // namespace

std::string shape_str(const Tensor& t) {
  return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

Scalar Tensor::item() const {
  if (!is_scalar()) {
    throw ShapeError("item: tensor is " + shape_str(*this) + ", expected 1x1");
  }
  return value(0, 0);
}

void Tensor::ensure_grad() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = Mat::Zero(value.rows(), value.cols());
  }
}

void Tensor::zero_grad() {
  grad = Mat::Zero(value.rows(), value.cols());
}

void Tensor::accumulate(const Mat& g) {
  ensure_grad();
  if (g.rows() != grad.rows() || g.cols() != grad.cols()) {
    throw ShapeError("accumulate: gradient shape mismatch");
  }
  grad += g;
}

TensorPtr constant(Mat v) { return std::make_shared<Tensor>(std::move(v), false); }

TensorPtr constant(Scalar v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

TensorPtr variable(Mat v) { return std::make_shared<Tensor>(std::move(v), true); }

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
  if (a->cols() != b->rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(*a) + " * " + shape_str(*b));
  }
  auto out = make_node(a->value * b->value, {a, b});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Tensor* pb = b.get();
    Mat av = a->value;
    Mat bv = b->value;
    out->backprop = [pa, pb, av = std::move(av), bv = std::move(bv)](const Mat& g, const PushFn& push) {
      if (pa->requires_grad) push(pa, g * bv.transpose());
      if (pb->requires_grad) push(pb, av.transpose() * g);
    };
  }
  return out;
}

TensorPtr transpose(const TensorPtr& a) {
  auto out = make_node(a->value.transpose(), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    out->backprop = [pa](const Mat& g, const PushFn& push) { push(pa, g.transpose()); };
  }
  return out;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
  const bool bias_row = a->rows() > 1 && b->rows() == 1 && a->cols() == b->cols();
  if (!bias_row) {
    require_same_shape(*a, *b, "add");
    auto out = make_node(a->value + b->value, {a, b});
    if (out->requires_grad) {
      Tensor* pa = a.get();
      Tensor* pb = b.get();
      out->backprop = [pa, pb](const Mat& g, const PushFn& push) {
        if (pa->requires_grad) push(pa, g);
        if (pb->requires_grad) push(pb, g);
      };
    }
    return out;
  }
  // (m x n) + (1 x n): broadcast the row over every row of a.
  Mat v = a->value;
  v.rowwise() += Eigen::RowVectorXd(b->value.row(0));
  auto out = make_node(std::move(v), {a, b});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Tensor* pb = b.get();
    out->backprop = [pa, pb](const Mat& g, const PushFn& push) {
      if (pa->requires_grad) push(pa, g);
      if (pb->requires_grad) push(pb, Mat(g.colwise().sum()));
    };
  }
  return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(*a, *b, "sub");
  auto out = make_node(a->value - b->value, {a, b});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Tensor* pb = b.get();
    out->backprop = [pa, pb](const Mat& g, const PushFn& push) {
      if (pa->requires_grad) push(pa, g);
      if (pb->requires_grad) push(pb, Mat(-g));
    };
  }
  return out;
}

TensorPtr neg(const TensorPtr& a) { return mul_scalar(a, -1.0); }

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(*a, *b, "mul");
  auto out = make_node(a->value.cwiseProduct(b->value), {a, b});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Tensor* pb = b.get();
    Mat av = a->value;
    Mat bv = b->value;
    out->backprop = [pa, pb, av = std::move(av), bv = std::move(bv)](const Mat& g, const PushFn& push) {
      if (pa->requires_grad) push(pa, g.cwiseProduct(bv));
      if (pb->requires_grad) push(pb, g.cwiseProduct(av));
    };
  }
  return out;
}

TensorPtr div(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(*a, *b, "div");
  auto out = make_node(a->value.cwiseQuotient(b->value), {a, b});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Tensor* pb = b.get();
    Mat av = a->value;
    Mat bv = b->value;
    out->backprop = [pa, pb, av = std::move(av), bv = std::move(bv)](const Mat& g, const PushFn& push) {
      if (pa->requires_grad) push(pa, g.cwiseQuotient(bv));
      if (pb->requires_grad) push(pb, Mat(-g.cwiseProduct(av).cwiseQuotient(bv.cwiseProduct(bv))));
    };
  }
  return out;
}

TensorPtr add_scalar(const TensorPtr& a, Scalar c) {
  auto out = make_node((a->value.array() + c).matrix(), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    out->backprop = [pa](const Mat& g, const PushFn& push) { push(pa, g); };
  }
  return out;
}

TensorPtr mul_scalar(const TensorPtr& a, Scalar c) {
  auto out = make_node(a->value * c, {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    out->backprop = [pa, c](const Mat& g, const PushFn& push) { push(pa, Mat(g * c)); };
  }
  return out;
}

TensorPtr relu(const TensorPtr& a) {
  auto out = make_node(a->value.cwiseMax(0.0), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Mat mask = (a->value.array() > 0.0).cast<Scalar>().matrix();
    out->backprop = [pa, mask = std::move(mask)](const Mat& g, const PushFn& push) {
      push(pa, g.cwiseProduct(mask));
    };
  }
  return out;
}

TensorPtr sigmoid(const TensorPtr& a) {
  Mat y = (1.0 / (1.0 + (-a->value.array()).exp())).matrix();
  auto out = make_node(y, {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    out->backprop = [pa, y = std::move(y)](const Mat& g, const PushFn& push) {
      push(pa, g.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
    };
  }
  return out;
}

TensorPtr log(const TensorPtr& a) {
  auto out = make_node(a->value.array().log().matrix(), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Mat av = a->value;
    out->backprop = [pa, av = std::move(av)](const Mat& g, const PushFn& push) {
      push(pa, g.cwiseQuotient(av));
    };
  }
  return out;
}

TensorPtr exp(const TensorPtr& a) {
  Mat y = a->value.array().exp().matrix();
  auto out = make_node(y, {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    out->backprop = [pa, y = std::move(y)](const Mat& g, const PushFn& push) {
      push(pa, g.cwiseProduct(y));
    };
  }
  return out;
}

TensorPtr sqrt(const TensorPtr& a) {
  Mat y = a->value.array().sqrt().matrix();
  auto out = make_node(y, {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Mat av = a->value;
    out->backprop = [pa, av = std::move(av), y = std::move(y)](const Mat& g, const PushFn& push) {
      Mat gx = Mat::Zero(av.rows(), av.cols());
      for (Eigen::Index i = 0; i < av.rows(); ++i) {
        for (Eigen::Index j = 0; j < av.cols(); ++j) {
          if (av(i, j) > 0.0) gx(i, j) = g(i, j) * 0.5 / y(i, j);
        }
      }
      push(pa, gx);
    };
  }
  return out;
}

TensorPtr clamp(const TensorPtr& a, Scalar lo, Scalar hi) {
  if (lo > hi) throw ConfigError("clamp: lo > hi");
  auto out = make_node(a->value.cwiseMax(lo).cwiseMin(hi), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    Mat mask = ((a->value.array() >= lo) && (a->value.array() <= hi)).cast<Scalar>().matrix();
    out->backprop = [pa, mask = std::move(mask)](const Mat& g, const PushFn& push) {
      push(pa, g.cwiseProduct(mask));
    };
  }
  return out;
}

TensorPtr softmax_rows(const TensorPtr& a) {
  if (a->cols() < 1) throw ShapeError("softmax_rows: needs at least one column");
  if (!a->value.allFinite()) throw NumericError("softmax_rows: non-finite input");
  Mat y(a->rows(), a->cols());
  for (Eigen::Index i = 0; i < a->rows(); ++i) {
    const Scalar m = a->value.row(i).maxCoeff();
    Mat e = (a->value.row(i).array() - m).exp().matrix();
    y.row(i) = e / e.sum();
  }
  auto out = make_node(y, {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    out->backprop = [pa, y = std::move(y)](const Mat& g, const PushFn& push) {
      Mat gx(y.rows(), y.cols());
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const Scalar dot = g.row(i).dot(y.row(i));
        gx.row(i) = y.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
      }
      push(pa, gx);
    };
  }
  return out;
}

TensorPtr sum(const TensorPtr& a) {
  Mat v(1, 1);
  v(0, 0) = a->value.sum();
  auto out = make_node(std::move(v), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    const Eigen::Index r = a->rows(), c = a->cols();
    out->backprop = [pa, r, c](const Mat& g, const PushFn& push) {
      push(pa, Mat(Mat::Constant(r, c, g(0, 0))));
    };
  }
  return out;
}

TensorPtr mean(const TensorPtr& a) {
  if (a->size() == 0) throw ShapeError("mean: empty tensor");
  return mul_scalar(sum(a), 1.0 / static_cast<Scalar>(a->size()));
}

TensorPtr global_average_pool(const TensorPtr& a) {
  if (a->rows() < 1) throw ShapeError("global_average_pool: empty input");
  Mat v = a->value.colwise().mean();
  auto out = make_node(std::move(v), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    const Eigen::Index d = a->rows();
    out->backprop = [pa, d](const Mat& g, const PushFn& push) {
      Mat gx(d, g.cols());
      gx.rowwise() = Eigen::RowVectorXd(g.row(0) / static_cast<Scalar>(d));
      push(pa, gx);
    };
  }
  return out;
}

TensorPtr row(const TensorPtr& a, Eigen::Index i) {
  if (i < 0 || i >= a->rows()) {
    throw ShapeError("row: index " + std::to_string(i) + " out of range for " + shape_str(*a));
  }
  auto out = make_node(a->value.row(i), {a});
  if (out->requires_grad) {
    Tensor* pa = a.get();
    const Eigen::Index r = a->rows();
    out->backprop = [pa, i, r](const Mat& g, const PushFn& push) {
      Mat gx = Mat::Zero(r, g.cols());
      gx.row(i) = g.row(0);
      push(pa, gx);
    };
  }
  return out;
}

TensorPtr concat_rows(const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Eigen::Index c = parts.front()->cols();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p->cols() != c) throw ShapeError("concat_rows: column counts disagree");
    total += p->rows();
  }
  Mat v(total, c);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleRows(at, p->rows()) = p->value;
    at += p->rows();
  }
  auto out = make_node(std::move(v), parts);
  if (out->requires_grad) {
    std::vector<Tensor*> raw;
    std::vector<Eigen::Index> rows_of;
    for (const auto& p : parts) {
      raw.push_back(p.get());
      rows_of.push_back(p->rows());
    }
    out->backprop = [raw = std::move(raw), rows_of = std::move(rows_of)](const Mat& g, const PushFn& push) {
      Eigen::Index at = 0;
      for (std::size_t k = 0; k < raw.size(); ++k) {
        if (raw[k]->requires_grad) push(raw[k], Mat(g.middleRows(at, rows_of[k])));
        at += rows_of[k];
      }
    };
  }
  return out;
}

TensorPtr concat_cols(const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Eigen::Index r = parts.front()->rows();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p->rows() != r) throw ShapeError("concat_cols: row counts disagree");
    total += p->cols();
  }
  Mat v(r, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p->cols()) = p->value;
    at += p->cols();
  }
  auto out = make_node(std::move(v), parts);
  if (out->requires_grad) {
    std::vector<Tensor*> raw;
    std::vector<Eigen::Index> cols_of;
    for (const auto& p : parts) {
      raw.push_back(p.get());
      cols_of.push_back(p->cols());
    }
    out->backprop = [raw = std::move(raw), cols_of = std::move(cols_of)](const Mat& g, const PushFn& push) {
      Eigen::Index at = 0;
      for (std::size_t k = 0; k < raw.size(); ++k) {
        if (raw[k]->requires_grad) push(raw[k], Mat(g.middleCols(at, cols_of[k])));
        at += cols_of[k];
      }
    };
  }
  return out;
}

void backward(const TensorPtr& loss) {
  if (!loss) throw ConfigError("backward: null tensor");
  if (!loss->is_scalar()) {
    throw ShapeError("backward: loss must be 1x1, got " + shape_str(*loss));
  }
  if (!loss->requires_grad) return;

  // Iterative post-order DFS over the gradient-requiring subgraph. The order
  // is a function of graph construction only, so adjoint summation order is
  // reproducible run to run.
  std::vector<Tensor*> order;
  std::unordered_set<Tensor*> visited;
  struct Frame {
    Tensor* node;
    std::size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.get(), 0});
  visited.insert(loss.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.node->parents.size()) {
      Tensor* p = f.node->parents[f.next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  // Per-call adjoints, kept separate from `grad` so repeated backward calls
  // accumulate correctly.
  std::unordered_map<Tensor*, Mat> adjoint;
  adjoint.reserve(order.size());
  adjoint[loss.get()] = Mat::Constant(1, 1, 1.0);

  const PushFn push = [&adjoint](Tensor* node, const Mat& g) {
    if (!node->requires_grad) return;
    auto it = adjoint.find(node);
    if (it == adjoint.end()) {
      adjoint.emplace(node, g);
    } else {
      it->second += g;
    }
  };

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Tensor* node = *it;
    auto found = adjoint.find(node);
    if (found == adjoint.end()) continue;  // unreachable from the loss
    if (node->backprop) node->backprop(found->second, push);
    node->accumulate(found->second);
  }
}

void zero_grad(const std::vector<TensorPtr>& tensors) {
  for (const auto& t : tensors) t->zero_grad();
}

Scalar grad_check(const std::function<TensorPtr()>& f,
                  const std::vector<TensorPtr>& wrt,
                  Scalar h,
                  int max_coords_per_tensor,
                  std::uint64_t seed) {
  if (h <= 0.0) throw ConfigError("grad_check: step must be positive");

  const Scalar l0 = f()->item();
  const Scalar l1 = f()->item();
  if (std::memcmp(&l0, &l1, sizeof(Scalar)) != 0) {
    throw NumericError("grad_check: function is not deterministic");
  }

  zero_grad(wrt);
  backward(f());
  std::vector<Mat> analytic;
  analytic.reserve(wrt.size());
  for (const auto& t : wrt) {
    t->ensure_grad();
    analytic.push_back(t->grad);
  }

  Rng rng(seed);
  Scalar worst = 0.0;
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    Tensor& t = *wrt[k];
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(t.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = static_cast<Eigen::Index>(i);
    if (max_coords_per_tensor > 0 && t.size() > max_coords_per_tensor) {
      rng.shuffle(coords);
      coords.resize(static_cast<std::size_t>(max_coords_per_tensor));
    }
    for (const Eigen::Index flat : coords) {
      const Eigen::Index i = flat / t.cols();
      const Eigen::Index j = flat % t.cols();
      const Scalar orig = t.value(i, j);
      t.value(i, j) = orig + h;
      const Scalar fp = f()->item();
      t.value(i, j) = orig - h;
      const Scalar fm = f()->item();
      t.value(i, j) = orig;
      const Scalar numeric = (fp - fm) / (2.0 * h);
      const Scalar a = analytic[k](i, j);
      const Scalar scale = std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(a - numeric) / scale);
    }
  }
  return worst;
}

void ParameterStore::add(std::string name, TensorPtr tensor) {
  if (!tensor) throw ConfigError("ParameterStore: null tensor for '" + name + "'");
  for (const auto& p : items_) {
    if (p.name == name) throw ConfigError("ParameterStore: duplicate name '" + name + "'");
  }
  items_.push_back({std::move(name), std::move(tensor)});
}

TensorPtr ParameterStore::find(const std::string& name) const {
  for (const auto& p : items_) {
    if (p.name == name) return p.tensor;
  }
  return nullptr;
}

}  // namespace augraph
