#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "purs/rng.hpp"

namespace purs {

class Tensor;

namespace detail {

struct TensorData {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad (leaves) or during backward
  bool requires_grad = false;
  bool leaf = true;
  std::vector<Tensor> parents;
  std::function<void(TensorData&)> backprop;
};

}  // namespace detail

// Dense row-major tensor (rank 1 or 2; scalars are shape {1}) with a dynamic
// tape for reverse-mode differentiation. Values are immutable after
// construction except through the optimizer; grad buffers are the only other
// mutable state.
class Tensor {
 public:
  Tensor() = default;

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor vector(std::vector<double> v, bool requires_grad = false);
  static Tensor matrix(int rows, int cols, std::vector<double> v, bool requires_grad = false);
  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double v, bool requires_grad = false);
  // uniform(-scale, scale) entries; the standard small symmetric weight init
  static Tensor uniform_init(std::vector<int> shape, double scale, Rng& rng,
                             bool requires_grad = true);

  bool defined() const { return static_cast<bool>(d_); }
  const std::vector<int>& shape() const;
  int rank() const;
  int rows() const;
  int cols() const;
  std::size_t size() const;
  bool is_scalar() const { return size() == 1; }
  bool same_shape(const Tensor& other) const;
  std::string shape_str() const;

  const std::vector<double>& value() const;
  double scalar_value() const;  // contract: size()==1
  bool requires_grad() const;
  bool has_grad() const;
  const std::vector<double>& grad() const;
  void zero_grad();

  // Mutable access for the optimizer, the checkpoint loader, and grad_check.
  std::vector<double>& raw_value();
  std::vector<double>& raw_grad();

  detail::TensorData* node() const { return d_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
  std::shared_ptr<detail::TensorData> d_;

  friend Tensor make_op(std::vector<int> shape, std::vector<double> value,
                        std::vector<Tensor> parents,
                        std::function<void(detail::TensorData&)> backprop,
                        const char* op_name);
};

// --- elementwise and structural ops -----------------------------------------

Tensor add(const Tensor& a, const Tensor& b);   // exact shape or scalar broadcast
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor affine(const Tensor& a, double scale, double shift);  // scale * a + shift
Tensor scale(const Tensor& a, double s);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sqrt(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n]
Tensor matvec(const Tensor& w, const Tensor& x);  // [m,n] x [n] -> [m]
Tensor dot(const Tensor& a, const Tensor& b);     // vectors -> scalar
Tensor sum(const Tensor& a);                      // -> scalar
Tensor mean(const Tensor& a);                     // -> scalar
Tensor softmax(const Tensor& v);                  // vector -> vector
Tensor concat(std::span<const Tensor> parts);     // vectors -> vector
Tensor stack_scalars(std::span<const Tensor> scalars);  // n scalars -> [n]

// sum_i weights[i] * values[i]; values are same-shape vectors
Tensor weighted_sum(const Tensor& weights, std::span<const Tensor> values);

// Euclidean distance ||a - b||
Tensor distance(const Tensor& a, const Tensor& b);

// Numerically stable binary cross-entropy of sigmoid(logit) against label.
Tensor bce_with_logits(const Tensor& logit, double label);

// --- autodiff ----------------------------------------------------------------

// Propagates d loss / d tensor into every reachable grad buffer. Leaf grads
// accumulate across calls; interior grads are per-call. Returns the tracked
// leaves the pass reached (useful for sparse optimizer updates).
std::vector<Tensor> backward(const Tensor& loss);

struct SgdConfig {
  double learning_rate = 1.0;
  double decay_factor = 0.1;  // lr at epoch e is learning_rate * decay_factor^e

  double rate_at(int epoch) const;
};

// p <- p - lr_e * grad(p), then zeroes the gradients.
void sgd_step(std::span<Tensor> params, const SgdConfig& config, int epoch);

// Max over coordinates of |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|), with
// central differences of width eps.
double grad_check(const std::function<Tensor(std::span<Tensor>)>& f,
                  std::span<Tensor> params, double eps);

}  // namespace purs
