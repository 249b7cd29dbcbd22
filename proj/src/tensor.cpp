#include "purs/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "purs/error.hpp"
#include "purs/kernels.hpp"

namespace purs {

namespace {

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_to_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void check_finite(const char* op, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error::numeric(std::string(op) + ": non-finite value produced");
    }
  }
}

void check_positive_dims(const char* op, const std::vector<int>& shape) {
  if (shape.empty()) throw Error::dimension(std::string(op) + ": empty shape");
  for (int d : shape) {
    if (d <= 0) throw Error::dimension(std::string(op) + ": non-positive dimension in " + shape_to_str(shape));
  }
}

std::shared_ptr<detail::TensorData> make_leaf(std::vector<int> shape, std::vector<double> value,
                                              bool requires_grad, const char* op) {
  check_positive_dims(op, shape);
  if (shape_product(shape) != value.size()) {
    throw Error::dimension(std::string(op) + ": shape " + shape_to_str(shape) + " does not match " +
                           std::to_string(value.size()) + " values");
  }
  check_finite(op, value);
  auto d = std::make_shared<detail::TensorData>();
  d->shape = std::move(shape);
  d->value = std::move(value);
  d->requires_grad = requires_grad;
  d->leaf = true;
  if (requires_grad) d->grad.assign(d->value.size(), 0.0);
  return d;
}

}  // namespace

// --- Tensor basics -----------------------------------------------------------

Tensor Tensor::scalar(double v, bool requires_grad) {
  return Tensor(make_leaf({1}, {v}, requires_grad, "scalar"));
}

Tensor Tensor::vector(std::vector<double> v, bool requires_grad) {
  const int n = static_cast<int>(v.size());
  return Tensor(make_leaf({n}, std::move(v), requires_grad, "vector"));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v, bool requires_grad) {
  return Tensor(make_leaf({rows, cols}, std::move(v), requires_grad, "matrix"));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  std::vector<double> v(shape_product(shape), 0.0);
  return Tensor(make_leaf(std::move(shape), std::move(v), requires_grad, "zeros"));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  std::vector<double> v(shape_product(shape), value);
  return Tensor(make_leaf(std::move(shape), std::move(v), requires_grad, "full"));
}

Tensor Tensor::uniform_init(std::vector<int> shape, double scale, Rng& rng, bool requires_grad) {
  std::vector<double> v(shape_product(shape));
  for (double& x : v) x = rng.uniform(-scale, scale);
  return Tensor(make_leaf(std::move(shape), std::move(v), requires_grad, "uniform_init"));
}

const std::vector<int>& Tensor::shape() const {
  if (!d_) throw Error::contract("tensor: use of undefined tensor");
  return d_->shape;
}

int Tensor::rank() const { return static_cast<int>(shape().size()); }

int Tensor::rows() const {
  if (rank() != 2) throw Error::dimension("rows: tensor is not rank 2: " + shape_str());
  return d_->shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw Error::dimension("cols: tensor is not rank 2: " + shape_str());
  return d_->shape[1];
}

std::size_t Tensor::size() const {
  if (!d_) throw Error::contract("tensor: use of undefined tensor");
  return d_->value.size();
}

bool Tensor::same_shape(const Tensor& other) const { return shape() == other.shape(); }

std::string Tensor::shape_str() const { return shape_to_str(shape()); }

const std::vector<double>& Tensor::value() const {
  if (!d_) throw Error::contract("tensor: use of undefined tensor");
  return d_->value;
}

double Tensor::scalar_value() const {
  if (size() != 1) throw Error::contract("scalar_value: tensor has shape " + shape_str());
  return d_->value[0];
}

bool Tensor::requires_grad() const { return d_ && d_->requires_grad; }

bool Tensor::has_grad() const { return d_ && !d_->grad.empty(); }

const std::vector<double>& Tensor::grad() const {
  if (!d_ || d_->grad.empty()) throw Error::contract("grad: no gradient buffer present");
  return d_->grad;
}

void Tensor::zero_grad() {
  if (!d_) throw Error::contract("zero_grad: undefined tensor");
  if (!d_->grad.empty()) std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
}

std::vector<double>& Tensor::raw_value() {
  if (!d_) throw Error::contract("raw_value: undefined tensor");
  return d_->value;
}

std::vector<double>& Tensor::raw_grad() {
  if (!d_) throw Error::contract("raw_grad: undefined tensor");
  if (d_->grad.empty()) d_->grad.assign(d_->value.size(), 0.0);
  return d_->grad;
}

// --- op construction ---------------------------------------------------------

Tensor make_op(std::vector<int> shape, std::vector<double> value, std::vector<Tensor> parents,
               std::function<void(detail::TensorData&)> backprop, const char* op_name) {
  check_finite(op_name, value);
  auto d = std::make_shared<detail::TensorData>();
  d->shape = std::move(shape);
  d->value = std::move(value);
  bool tracked = false;
  for (const Tensor& p : parents) tracked = tracked || p.requires_grad();
  if (tracked) {
    d->requires_grad = true;
    d->leaf = false;
    d->parents = std::move(parents);
    d->backprop = std::move(backprop);
  }
  return Tensor(std::move(d));
}

namespace {

std::vector<double>& grad_of(const Tensor& t) { return t.node()->grad; }

// a and b must have equal shapes, or one of them must be a scalar.
void check_broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (a.same_shape(b) || a.size() == 1 || b.size() == 1) return;
  throw Error::dimension(std::string(op) + ": incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
}

const std::vector<int>& broadcast_shape(const Tensor& a, const Tensor& b) {
  return a.size() == 1 ? b.shape() : a.shape();
}

}  // namespace

// --- elementwise -------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  check_broadcast("add", a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  const std::size_t n = std::max(av.size(), bv.size());
  std::vector<double> out(n);
  const bool sa = av.size() == 1, sb = bv.size() == 1;
  for (std::size_t i = 0; i < n; ++i) out[i] = av[sa ? 0 : i] + bv[sb ? 0 : i];
  return make_op(broadcast_shape(a, b), std::move(out), {a, b},
                 [a, b, sa, sb](detail::TensorData& self) {
                   if (a.requires_grad()) {
                     auto& ga = grad_of(a);
                     if (sa && self.grad.size() > 1) {
                       for (double g : self.grad) ga[0] += g;
                     } else {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
                     }
                   }
                   if (b.requires_grad()) {
                     auto& gb = grad_of(b);
                     if (sb && self.grad.size() > 1) {
                       for (double g : self.grad) gb[0] += g;
                     } else {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i];
                     }
                   }
                 },
                 "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_broadcast("sub", a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  const std::size_t n = std::max(av.size(), bv.size());
  std::vector<double> out(n);
  const bool sa = av.size() == 1, sb = bv.size() == 1;
  for (std::size_t i = 0; i < n; ++i) out[i] = av[sa ? 0 : i] - bv[sb ? 0 : i];
  return make_op(broadcast_shape(a, b), std::move(out), {a, b},
                 [a, b, sa, sb](detail::TensorData& self) {
                   if (a.requires_grad()) {
                     auto& ga = grad_of(a);
                     if (sa && self.grad.size() > 1) {
                       for (double g : self.grad) ga[0] += g;
                     } else {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
                     }
                   }
                   if (b.requires_grad()) {
                     auto& gb = grad_of(b);
                     if (sb && self.grad.size() > 1) {
                       for (double g : self.grad) gb[0] -= g;
                     } else {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] -= self.grad[i];
                     }
                   }
                 },
                 "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_broadcast("mul", a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  const std::size_t n = std::max(av.size(), bv.size());
  std::vector<double> out(n);
  const bool sa = av.size() == 1, sb = bv.size() == 1;
  for (std::size_t i = 0; i < n; ++i) out[i] = av[sa ? 0 : i] * bv[sb ? 0 : i];
  return make_op(broadcast_shape(a, b), std::move(out), {a, b},
                 [a, b, sa, sb](detail::TensorData& self) {
                   const auto& av2 = a.value();
                   const auto& bv2 = b.value();
                   if (a.requires_grad()) {
                     auto& ga = grad_of(a);
                     for (std::size_t i = 0; i < self.grad.size(); ++i) {
                       ga[sa ? 0 : i] += self.grad[i] * bv2[sb ? 0 : i];
                     }
                   }
                   if (b.requires_grad()) {
                     auto& gb = grad_of(b);
                     for (std::size_t i = 0; i < self.grad.size(); ++i) {
                       gb[sb ? 0 : i] += self.grad[i] * av2[sa ? 0 : i];
                     }
                   }
                 },
                 "mul");
}

Tensor affine(const Tensor& a, double s, double shift) {
  const auto& av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = s * av[i] + shift;
  return make_op(a.shape(), std::move(out), {a},
                 [a, s](detail::TensorData& self) {
                   if (!a.requires_grad()) return;
                   auto& ga = grad_of(a);
                   for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += s * self.grad[i];
                 },
                 "affine");
}

Tensor scale(const Tensor& a, double s) { return affine(a, s, 0.0); }

namespace {

template <typename Fwd, typename Dfm>
Tensor unary_op(const char* name, const Tensor& a, Fwd fwd, Dfm dval) {
  const auto& av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return make_op(a.shape(), std::move(out), {a},
                 [a, dval](detail::TensorData& self) {
                   if (!a.requires_grad()) return;
                   auto& ga = grad_of(a);
                   const auto& xv = a.value();
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     ga[i] += self.grad[i] * dval(xv[i], self.value[i]);
                   }
                 },
                 name);
}

}  // namespace

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      "sigmoid", a,
      [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_op(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary_op(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor sqrt(const Tensor& a) {
  for (double x : a.value()) {
    if (x < 0.0) throw Error::numeric("sqrt: negative input");
  }
  // subgradient 0 at the origin keeps distance gradients finite at coincidence
  return unary_op(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y == 0.0 ? 0.0 : 0.5 / y; });
}

// --- linear algebra ----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw Error::dimension("matmul: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
  }
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  kernels::gemm(a.value().data(), b.value().data(), out.data(), m, k, n);
  return make_op({m, n}, std::move(out), {a, b},
                 [a, b, m, k, n](detail::TensorData& self) {
                   if (a.requires_grad()) {
                     kernels::gemm_acc_nt(self.grad.data(), b.value().data(), grad_of(a).data(), m, n, k);
                   }
                   if (b.requires_grad()) {
                     kernels::gemm_acc_tn(a.value().data(), self.grad.data(), grad_of(b).data(), m, k, n);
                   }
                 },
                 "matmul");
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1 || w.cols() != static_cast<int>(x.size())) {
    throw Error::dimension("matvec: incompatible shapes " + w.shape_str() + " vs " + x.shape_str());
  }
  const int m = w.rows(), n = w.cols();
  std::vector<double> out(static_cast<std::size_t>(m));
  kernels::gemm(w.value().data(), x.value().data(), out.data(), m, n, 1);
  return make_op({m}, std::move(out), {w, x},
                 [w, x, m, n](detail::TensorData& self) {
                   if (w.requires_grad()) {
                     kernels::gemm_acc_nt(self.grad.data(), x.value().data(), grad_of(w).data(), m, 1, n);
                   }
                   if (x.requires_grad()) {
                     kernels::gemm_acc_tn(w.value().data(), self.grad.data(), grad_of(x).data(), m, n, 1);
                   }
                 },
                 "matvec");
}

Tensor dot(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size()) {
    throw Error::dimension("dot: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.value()[i] * b.value()[i];
  return make_op({1}, {acc}, {a, b},
                 [a, b](detail::TensorData& self) {
                   const double g = self.grad[0];
                   if (a.requires_grad()) {
                     auto& ga = grad_of(a);
                     const auto& bv = b.value();
                     for (std::size_t i = 0; i < bv.size(); ++i) ga[i] += g * bv[i];
                   }
                   if (b.requires_grad()) {
                     auto& gb = grad_of(b);
                     const auto& av = a.value();
                     for (std::size_t i = 0; i < av.size(); ++i) gb[i] += g * av[i];
                   }
                 },
                 "dot");
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double x : a.value()) acc += x;
  return make_op({1}, {acc}, {a},
                 [a](detail::TensorData& self) {
                   if (!a.requires_grad()) return;
                   auto& ga = grad_of(a);
                   for (double& g : ga) g += self.grad[0];
                 },
                 "sum");
}

Tensor mean(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.size());
  double acc = 0.0;
  for (double x : a.value()) acc += x;
  return make_op({1}, {acc * inv}, {a},
                 [a, inv](detail::TensorData& self) {
                   if (!a.requires_grad()) return;
                   auto& ga = grad_of(a);
                   for (double& g : ga) g += self.grad[0] * inv;
                 },
                 "mean");
}

Tensor softmax(const Tensor& v) {
  if (v.rank() != 1 || v.size() == 0) {
    throw Error::dimension("softmax: expected nonempty vector, got " + v.shape_str());
  }
  const auto& x = v.value();
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    denom += out[i];
  }
  for (double& o : out) o /= denom;
  return make_op(v.shape(), std::move(out), {v},
                 [v](detail::TensorData& self) {
                   if (!v.requires_grad()) return;
                   auto& gv = grad_of(v);
                   double inner = 0.0;
                   for (std::size_t j = 0; j < self.grad.size(); ++j) inner += self.grad[j] * self.value[j];
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     gv[i] += self.value[i] * (self.grad[i] - inner);
                   }
                 },
                 "softmax");
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error::dimension("concat: no inputs");
  std::vector<double> out;
  std::vector<Tensor> parents;
  parents.reserve(parts.size());
  for (const Tensor& p : parts) {
    if (p.rank() != 1) throw Error::dimension("concat: expected vectors, got " + p.shape_str());
    out.insert(out.end(), p.value().begin(), p.value().end());
    parents.push_back(p);
  }
  const int n = static_cast<int>(out.size());
  std::vector<Tensor> captured = parents;
  return make_op({n}, std::move(out), std::move(parents),
                 [captured](detail::TensorData& self) {
                   std::size_t off = 0;
                   for (const Tensor& p : captured) {
                     if (p.requires_grad()) {
                       auto& gp = grad_of(p);
                       for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += self.grad[off + i];
                     }
                     off += p.size();
                   }
                 },
                 "concat");
}

Tensor stack_scalars(std::span<const Tensor> scalars) {
  if (scalars.empty()) throw Error::dimension("stack_scalars: no inputs");
  std::vector<double> out;
  std::vector<Tensor> parents;
  out.reserve(scalars.size());
  for (const Tensor& s : scalars) {
    if (s.size() != 1) throw Error::dimension("stack_scalars: expected scalars, got " + s.shape_str());
    out.push_back(s.value()[0]);
    parents.push_back(s);
  }
  const int n = static_cast<int>(out.size());
  std::vector<Tensor> captured = parents;
  return make_op({n}, std::move(out), std::move(parents),
                 [captured](detail::TensorData& self) {
                   for (std::size_t i = 0; i < captured.size(); ++i) {
                     if (captured[i].requires_grad()) grad_of(captured[i])[0] += self.grad[i];
                   }
                 },
                 "stack_scalars");
}

Tensor weighted_sum(const Tensor& weights, std::span<const Tensor> values) {
  if (weights.rank() != 1 || weights.size() != values.size()) {
    throw Error::dimension("weighted_sum: " + std::to_string(values.size()) + " values vs weights " +
                           weights.shape_str());
  }
  if (values.empty()) throw Error::dimension("weighted_sum: no values");
  const std::size_t dim = values[0].size();
  std::vector<double> out(dim, 0.0);
  std::vector<Tensor> parents;
  parents.reserve(values.size() + 1);
  parents.push_back(weights);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(values[0])) {
      throw Error::dimension("weighted_sum: mixed value shapes " + values[i].shape_str() + " vs " +
                             values[0].shape_str());
    }
    const double w = weights.value()[i];
    const auto& vv = values[i].value();
    for (std::size_t d = 0; d < dim; ++d) out[d] += w * vv[d];
    parents.push_back(values[i]);
  }
  std::vector<Tensor> captured = parents;
  return make_op(values[0].shape(), std::move(out), std::move(parents),
                 [captured](detail::TensorData& self) {
                   const Tensor& w = captured[0];
                   for (std::size_t i = 1; i < captured.size(); ++i) {
                     const Tensor& v = captured[i];
                     const double wi = w.value()[i - 1];
                     if (w.requires_grad()) {
                       double acc = 0.0;
                       for (std::size_t d = 0; d < self.grad.size(); ++d) acc += self.grad[d] * v.value()[d];
                       grad_of(w)[i - 1] += acc;
                     }
                     if (v.requires_grad()) {
                       auto& gv = grad_of(v);
                       for (std::size_t d = 0; d < self.grad.size(); ++d) gv[d] += wi * self.grad[d];
                     }
                   }
                 },
                 "weighted_sum");
}

Tensor distance(const Tensor& a, const Tensor& b) {
  Tensor d = sub(a, b);
  return sqrt(sum(mul(d, d)));
}

Tensor bce_with_logits(const Tensor& logit, double label) {
  if (logit.size() != 1) throw Error::contract("bce_with_logits: logit must be scalar, got " + logit.shape_str());
  if (label != 0.0 && label != 1.0) throw Error::contract("bce_with_logits: label must be 0 or 1");
  const double z = logit.value()[0];
  const double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
  return make_op({1}, {loss}, {logit},
                 [logit, label](detail::TensorData& self) {
                   if (!logit.requires_grad()) return;
                   const double z2 = logit.value()[0];
                   const double s = z2 >= 0.0 ? 1.0 / (1.0 + std::exp(-z2)) : std::exp(z2) / (1.0 + std::exp(z2));
                   grad_of(logit)[0] += self.grad[0] * (s - label);
                 },
                 "bce_with_logits");
}

// --- backward ----------------------------------------------------------------

std::vector<Tensor> backward(const Tensor& loss) {
  if (!loss.defined()) throw Error::contract("backward: undefined loss");
  if (!loss.is_scalar()) throw Error::contract("backward: loss must be scalar, got " + loss.shape_str());
  if (!loss.requires_grad()) {
    throw Error::contract("backward: loss was not produced by tracked operations");
  }

  // iterative post-order over the tape
  std::vector<Tensor> topo;
  std::unordered_set<detail::TensorData*> visited;
  struct Frame {
    Tensor t;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss, 0});
  visited.insert(loss.node());
  while (!stack.empty()) {
    Frame& f = stack.back();
    auto& parents = f.t.node()->parents;
    if (f.next_parent < parents.size()) {
      Tensor p = parents[f.next_parent++];
      if (p.requires_grad() && !visited.count(p.node())) {
        visited.insert(p.node());
        stack.push_back({p, 0});
      }
    } else {
      topo.push_back(f.t);
      stack.pop_back();
    }
  }

  std::vector<Tensor> leaves;
  for (Tensor& t : topo) {
    detail::TensorData* n = t.node();
    if (n->leaf) {
      if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
      leaves.push_back(t);
    } else {
      n->grad.assign(n->value.size(), 0.0);
    }
  }

  loss.node()->grad[0] += 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    detail::TensorData* n = it->node();
    if (n->backprop) n->backprop(*n);
  }
  return leaves;
}

// --- optimizer ---------------------------------------------------------------

double SgdConfig::rate_at(int epoch) const {
  if (learning_rate <= 0.0) throw Error::contract("sgd: learning_rate must be positive");
  if (decay_factor <= 0.0 || decay_factor > 1.0) throw Error::contract("sgd: decay_factor must be in (0,1]");
  const double rate = learning_rate * std::pow(decay_factor, epoch);
  if (rate <= 0.0) throw Error::contract("sgd: effective learning rate is not positive");
  return rate;
}

void sgd_step(std::span<Tensor> params, const SgdConfig& config, int epoch) {
  const double lr = config.rate_at(epoch);
  for (Tensor& p : params) {
    if (!p.defined() || !p.requires_grad() || !p.has_grad()) {
      throw Error::contract("sgd_step: parameter without gradient buffer");
    }
    auto& v = p.raw_value();
    auto& g = p.raw_grad();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    std::fill(g.begin(), g.end(), 0.0);
  }
}

// --- gradient checking ---------------------------------------------------------

double grad_check(const std::function<Tensor(std::span<Tensor>)>& f, std::span<Tensor> params,
                  double eps) {
  if (!(eps > 0.0 && eps <= 1e-3)) throw Error::contract("grad_check: eps must be in (0, 1e-3]");
  for (Tensor& p : params) p.zero_grad();

  Tensor loss = f(params);
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) {
    analytic.push_back(p.has_grad() ? p.grad() : std::vector<double>(p.size(), 0.0));
    p.zero_grad();
  }

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& v = params[pi].raw_value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + eps;
      const double up = f(params).scalar_value();
      v[i] = saved - eps;
      const double down = f(params).scalar_value();
      v[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double ad = analytic[pi][i];
      const double rel = std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace purs
