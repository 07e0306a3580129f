#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stylenorm/tensor.hpp"

namespace stylenorm::ad {

struct Node;
using Var = std::shared_ptr<Node>;

// One tape entry. Values are written once at construction; backward() only
// ever touches grad. The graph is acyclic by construction (parents are
// created before children and ids increase monotonically).
struct Node {
  TensorD value;
  TensorD grad;
  std::vector<Var> parents;
  std::function<void(Node&)> pull;  // distribute this->grad to parents
  const char* op = "leaf";
  int64_t id = 0;
  bool requiresGrad = false;
};

// Names of all operations with registered backward rules. The gradient
// checker's manifest must coincide with this list (suite-enforced), so an op
// cannot be added to the tape without a certifying check.
const std::vector<std::string>& registeredOps();
bool isRegisteredOp(const std::string& name);

Var leaf(TensorD v, bool requiresGrad = true);
inline Var constant(TensorD v) { return leaf(std::move(v), false); }

// elementwise / linear algebra
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var sum(const Var& a);  // -> shape {1}
Var matmul(const Var& a, const Var& b);
Var affine(const Var& w, const Var& x, const Var& b);  // W x + b, rank-1 x
Var reshape(const Var& a, std::vector<int64_t> shape);
Var concatChannels(const Var& a, const Var& b);

// feature-map structure ops
Var unfold(const Var& x, int kH, int kW);  // value (N,H,W,C,kH,kW)
Var standardizeLocal(const Var& x, int kH, int kW, double eps);
Var standardizeInstance(const Var& x, double eps);
Var injectAdaIN(const Var& cbar, const Var& s, double eps);
Var adaptiveConv(const Var& patches, const Var& weights, const Var& bias);
Var conv2d(const Var& x, const Var& weights, const Var& bias);
Var relu(const Var& x);
Var leakyRelu(const Var& x, double slope);
Var tanh(const Var& x);
Var upsample2x(const Var& x);     // nearest neighbor
Var downsample2x(const Var& x);   // keep even-indexed rows/columns
Var globalAvgPool(const Var& x);  // (N,C,H,W) -> (N,C)

// losses (shape {1})
Var l1Loss(const Var& a, const Var& b);             // mean |a - b|
Var squaredErrorMean(const Var& x, double target);  // mean (x - target)^2

// Reverse accumulation from a scalar root. Grads of every reachable node are
// zeroed first, so repeated calls on the same graph give identical results.
// Traversal order is by descending node id, which is deterministic.
void backward(const Var& root);

}  // namespace stylenorm::ad
