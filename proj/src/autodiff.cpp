#include "stylenorm/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "stylenorm/normalizers.hpp"
#include "stylenorm/style_injectors.hpp"

namespace stylenorm::ad {

namespace {

std::vector<std::string>& registryMutable() {
  static std::vector<std::string> ops;
  return ops;
}

bool registerOp(const char* name) {
  registryMutable().push_back(name);
  return true;
}

std::atomic<int64_t> nextId{1};

Var makeNode(const char* op, TensorD value, std::vector<Var> parents,
             std::function<void(Node&)> pull) {
  if (!isRegisteredOp(op))
    throw std::logic_error(std::string("autodiff: unregistered op ") + op);
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->pull = std::move(pull);
  n->op = op;
  n->id = nextId.fetch_add(1);
  for (const auto& p : n->parents)
    if (p->requiresGrad) n->requiresGrad = true;
  return n;
}

// registration block: every op with a backward rule appears here
const bool kReg = [] {
  for (const char* name :
       {"add", "sub", "mul", "scale", "sum", "matmul", "affine", "reshape",
        "concatChannels", "unfold", "standardizeLocal", "standardizeInstance",
        "injectAdaIN", "adaptiveConv", "conv2d", "relu", "leakyRelu", "tanh",
        "upsample2x", "downsample2x", "globalAvgPool", "l1Loss",
        "squaredErrorMean"})
    registerOp(name);
  return true;
}();

void accumulate(TensorD& dst, const TensorD& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (int64_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

// scatter-add of patch-layout gradients back onto the (N,C,H,W) source
void scatterPatches(const TensorD& gp, TensorD& gx, int kH, int kW) {
  const int64_t n = gx.dim(0), c = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const int pH = (kH - 1) / 2, pW = (kW - 1) / 2;
  const double* src = gp.data();
  for (int64_t in = 0; in < n; ++in)
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j < w; ++j)
        for (int64_t ic = 0; ic < c; ++ic) {
          double* dst = gx.data() + ((in * c + ic) * h) * w;
          for (int k = 0; k < kH; ++k) {
            int64_t sy = i + k - pH;
            for (int l = 0; l < kW; ++l) {
              int64_t sx = j + l - pW;
              double v = *src++;
              if (sy >= 0 && sy < h && sx >= 0 && sx < w)
                dst[sy * w + sx] += v;
            }
          }
        }
}

// backward of a row-wise standardization y = (x - mu)/s given cached s:
// gx = (g - mean(g))/s - y * mean(g .* y)/s
void standardizeRowBackward(const double* g, const double* y, double s,
                            int64_t m, double* gx) {
  double gmean = 0, gymean = 0;
  for (int64_t q = 0; q < m; ++q) {
    gmean += g[q];
    gymean += g[q] * y[q];
  }
  gmean /= static_cast<double>(m);
  gymean /= static_cast<double>(m);
  for (int64_t q = 0; q < m; ++q)
    gx[q] += (g[q] - gmean) / s - y[q] * gymean / s;
}

}  // namespace

const std::vector<std::string>& registeredOps() { return registryMutable(); }

bool isRegisteredOp(const std::string& name) {
  const auto& ops = registryMutable();
  return std::find(ops.begin(), ops.end(), name) != ops.end();
}

Var leaf(TensorD v, bool requiresGrad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->op = "leaf";
  n->id = nextId.fetch_add(1);
  n->requiresGrad = requiresGrad;
  return n;
}

Var add(const Var& a, const Var& b) {
  return makeNode("add", stylenorm::add(a->value, b->value), {a, b},
                  [](Node& n) {
                    if (n.parents[0]->requiresGrad)
                      accumulate(n.parents[0]->grad, n.grad);
                    if (n.parents[1]->requiresGrad)
                      accumulate(n.parents[1]->grad, n.grad);
                  });
}

Var sub(const Var& a, const Var& b) {
  return makeNode("sub", stylenorm::sub(a->value, b->value), {a, b},
                  [](Node& n) {
                    if (n.parents[0]->requiresGrad)
                      accumulate(n.parents[0]->grad, n.grad);
                    if (n.parents[1]->requiresGrad) {
                      double* d = n.parents[1]->grad.data();
                      const double* g = n.grad.data();
                      for (int64_t i = 0; i < n.grad.numel(); ++i)
                        d[i] -= g[i];
                    }
                  });
}

Var mul(const Var& a, const Var& b) {
  return makeNode("mul", stylenorm::mul(a->value, b->value), {a, b},
                  [](Node& n) {
                    const double* g = n.grad.data();
                    if (n.parents[0]->requiresGrad) {
                      double* d = n.parents[0]->grad.data();
                      const double* o = n.parents[1]->value.data();
                      for (int64_t i = 0; i < n.grad.numel(); ++i)
                        d[i] += g[i] * o[i];
                    }
                    if (n.parents[1]->requiresGrad) {
                      double* d = n.parents[1]->grad.data();
                      const double* o = n.parents[0]->value.data();
                      for (int64_t i = 0; i < n.grad.numel(); ++i)
                        d[i] += g[i] * o[i];
                    }
                  });
}

Var scale(const Var& a, double s) {
  return makeNode("scale", mulScalar(a->value, s), {a}, [s](Node& n) {
    if (!n.parents[0]->requiresGrad) return;
    double* d = n.parents[0]->grad.data();
    const double* g = n.grad.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) d[i] += s * g[i];
  });
}

Var sum(const Var& a) {
  TensorD v({1});
  v[0] = sumAll(a->value);
  return makeNode("sum", std::move(v), {a}, [](Node& n) {
    if (!n.parents[0]->requiresGrad) return;
    double g = n.grad[0];
    double* d = n.parents[0]->grad.data();
    for (int64_t i = 0; i < n.parents[0]->grad.numel(); ++i) d[i] += g;
  });
}

Var matmul(const Var& a, const Var& b) {
  return makeNode(
      "matmul", stylenorm::matmul(a->value, b->value), {a, b}, [](Node& n) {
        const TensorD& av = n.parents[0]->value;
        const TensorD& bv = n.parents[1]->value;
        const int64_t m = av.dim(0), k = av.dim(1), c = bv.dim(1);
        if (n.parents[0]->requiresGrad)
          detail::gemm(false, true, m, k, c, n.grad.data(), bv.data(),
                       n.parents[0]->grad.data(), true);
        if (n.parents[1]->requiresGrad)
          detail::gemm(true, false, k, c, m, av.data(), n.grad.data(),
                       n.parents[1]->grad.data(), true);
      });
}

Var affine(const Var& w, const Var& x, const Var& b) {
  TensorD y = stylenorm::add(matvec(w->value, x->value), b->value);
  return makeNode("affine", std::move(y), {w, x, b}, [](Node& n) {
    const TensorD& wv = n.parents[0]->value;
    const TensorD& xv = n.parents[1]->value;
    const int64_t o = wv.dim(0), d = wv.dim(1);
    if (n.parents[0]->requiresGrad)  // dW += g x^T
      detail::gemm(false, false, o, d, 1, n.grad.data(), xv.data(),
                   n.parents[0]->grad.data(), true);
    if (n.parents[1]->requiresGrad)  // dx += W^T g
      detail::gemm(true, false, d, 1, o, wv.data(), n.grad.data(),
                   n.parents[1]->grad.data(), true);
    if (n.parents[2]->requiresGrad) accumulate(n.parents[2]->grad, n.grad);
  });
}

Var reshape(const Var& a, std::vector<int64_t> shape) {
  return makeNode("reshape", a->value.reshaped(std::move(shape)), {a},
                  [](Node& n) {
                    if (!n.parents[0]->requiresGrad) return;
                    accumulate(n.parents[0]->grad, n.grad);
                  });
}

Var concatChannels(const Var& a, const Var& b) {
  const int64_t ca = a->value.dim(1);
  return makeNode(
      "concatChannels", stylenorm::concatChannels(a->value, b->value), {a, b},
      [ca](Node& n) {
        const int64_t nn = n.grad.dim(0), ct = n.grad.dim(1),
                      plane = n.grad.dim(2) * n.grad.dim(3);
        const double* g = n.grad.data();
        if (n.parents[0]->requiresGrad) {
          double* d = n.parents[0]->grad.data();
          for (int64_t i = 0; i < nn; ++i)
            for (int64_t q = 0; q < ca * plane; ++q)
              d[i * ca * plane + q] += g[i * ct * plane + q];
        }
        if (n.parents[1]->requiresGrad) {
          const int64_t cb = ct - ca;
          double* d = n.parents[1]->grad.data();
          for (int64_t i = 0; i < nn; ++i)
            for (int64_t q = 0; q < cb * plane; ++q)
              d[i * cb * plane + q] += g[(i * ct + ca) * plane + q];
        }
      });
}

Var unfold(const Var& x, int kH, int kW) {
  return makeNode("unfold", stylenorm::unfold(x->value, kH, kW).patches, {x},
                  [kH, kW](Node& n) {
                    if (!n.parents[0]->requiresGrad) return;
                    scatterPatches(n.grad, n.parents[0]->grad, kH, kW);
                  });
}

Var standardizeLocal(const Var& x, int kH, int kW, double eps) {
  // cache per-patch std from a raw unfold; node value holds normalized rows
  PatchTensor<double> raw = stylenorm::unfold(x->value, kH, kW);
  const int64_t m = static_cast<int64_t>(kH) * kW;
  const int64_t rows = raw.patches.numel() / m;
  auto stds = std::make_shared<std::vector<double>>(rows);
  TensorD out = raw.patches;
  double* d = out.data();
  for (int64_t r = 0; r < rows; ++r, d += m) {
    double mu = 0;
    for (int64_t q = 0; q < m; ++q) mu += d[q];
    mu /= static_cast<double>(m);
    double acc = 0;
    for (int64_t q = 0; q < m; ++q) acc += (d[q] - mu) * (d[q] - mu);
    double s = std::sqrt(acc / static_cast<double>(m) + eps);
    (*stds)[r] = s;
    for (int64_t q = 0; q < m; ++q) d[q] = (d[q] - mu) / s;
  }
  return makeNode("standardizeLocal", std::move(out), {x},
                  [kH, kW, m, rows, stds](Node& n) {
                    if (!n.parents[0]->requiresGrad) return;
                    TensorD gp(n.grad.shape());
                    for (int64_t r = 0; r < rows; ++r)
                      standardizeRowBackward(n.grad.data() + r * m,
                                             n.value.data() + r * m,
                                             (*stds)[r], m,
                                             gp.data() + r * m);
                    scatterPatches(gp, n.parents[0]->grad, kH, kW);
                  });
}

Var standardizeInstance(const Var& x, double eps) {
  const int64_t nc = x->value.dim(0) * x->value.dim(1);
  const int64_t hw = x->value.dim(2) * x->value.dim(3);
  auto stds = std::make_shared<std::vector<double>>(nc);
  TensorD out = x->value;
  double* d = out.data();
  for (int64_t r = 0; r < nc; ++r, d += hw) {
    double mu = 0;
    for (int64_t q = 0; q < hw; ++q) mu += d[q];
    mu /= static_cast<double>(hw);
    double acc = 0;
    for (int64_t q = 0; q < hw; ++q) acc += (d[q] - mu) * (d[q] - mu);
    double s = std::sqrt(acc / static_cast<double>(hw) + eps);
    (*stds)[r] = s;
    for (int64_t q = 0; q < hw; ++q) d[q] = (d[q] - mu) / s;
  }
  return makeNode("standardizeInstance", std::move(out), {x},
                  [nc, hw, stds](Node& n) {
                    if (!n.parents[0]->requiresGrad) return;
                    for (int64_t r = 0; r < nc; ++r)
                      standardizeRowBackward(
                          n.grad.data() + r * hw, n.value.data() + r * hw,
                          (*stds)[r], hw, n.parents[0]->grad.data() + r * hw);
                  });
}

Var injectAdaIN(const Var& cbar, const Var& s, double eps) {
  TensorD y = stylenorm::injectAdaIN(cbar->value, s->value, eps);
  return makeNode("injectAdaIN", std::move(y), {cbar, s}, [eps](Node& n) {
    const TensorD& cv = n.parents[0]->value;
    const TensorD& sv = n.parents[1]->value;
    const int64_t nc = cv.dim(0) * cv.dim(1);
    const int64_t hw = cv.dim(2) * cv.dim(3);
    const int64_t shw = sv.dim(2) * sv.dim(3);
    for (int64_t r = 0; r < nc; ++r) {
      const double* srow = sv.data() + r * shw;
      double mu = 0;
      for (int64_t q = 0; q < shw; ++q) mu += srow[q];
      mu /= static_cast<double>(shw);
      double var = 0;
      for (int64_t q = 0; q < shw; ++q) var += (srow[q] - mu) * (srow[q] - mu);
      var /= static_cast<double>(shw);
      double sigma = std::sqrt(var + eps);

      const double* g = n.grad.data() + r * hw;
      const double* crow = cv.data() + r * hw;
      double gsum = 0, gcsum = 0;
      for (int64_t q = 0; q < hw; ++q) {
        gsum += g[q];
        gcsum += g[q] * crow[q];
      }
      if (n.parents[0]->requiresGrad) {
        double* d = n.parents[0]->grad.data() + r * hw;
        for (int64_t q = 0; q < hw; ++q) d[q] += sigma * g[q];
      }
      if (n.parents[1]->requiresGrad) {
        // through mu: gsum/shw; through sigma: gcsum * (s-mu)/(sigma*shw)
        double* d = n.parents[1]->grad.data() + r * shw;
        double dvar = gcsum / (2.0 * sigma);
        for (int64_t q = 0; q < shw; ++q)
          d[q] += gsum / static_cast<double>(shw) +
                  dvar * 2.0 * (srow[q] - mu) / static_cast<double>(shw);
      }
    }
  });
}

namespace {

TensorD adaptiveConvValue(const TensorD& patches, const TensorD& weights,
                          const TensorD& bias) {
  const int64_t n = patches.dim(0), h = patches.dim(1), w = patches.dim(2);
  const int64_t o = weights.dim(0);
  const int64_t ckk = weights.numel() / o;
  checkArg(patches.dim(3) == weights.dim(1) &&
               patches.dim(4) == weights.dim(2) &&
               patches.dim(5) == weights.dim(3),
           "adaptiveConv: patch inner dims do not match kernel");
  checkArg(bias.numel() == o, "adaptiveConv: bias length != O");
  const int64_t hw = h * w;
  TensorD out({n, o, h, w});
  for (int64_t in = 0; in < n; ++in)
    detail::gemm(false, true, o, hw, ckk, weights.data(),
                 patches.data() + in * hw * ckk, out.data() + in * o * hw,
                 false);
  for (int64_t in = 0; in < n; ++in)
    for (int64_t io = 0; io < o; ++io) {
      double bv = bias[io];
      double* row = out.data() + (in * o + io) * hw;
      for (int64_t q = 0; q < hw; ++q) row[q] += bv;
    }
  return out;
}

// shared pull for the patches->(weights,bias) contraction; gradients land in
// gp (patch layout), and directly in the weight/bias parents
void adaptiveConvBackward(Node& n, const TensorD& patches, Node& wNode,
                          Node& bNode, TensorD* gp) {
  const TensorD& wv = wNode.value;
  const int64_t nn = n.grad.dim(0), o = n.grad.dim(1),
                hw = n.grad.dim(2) * n.grad.dim(3);
  const int64_t ckk = wv.numel() / o;
  for (int64_t in = 0; in < nn; ++in) {
    const double* g = n.grad.data() + in * o * hw;
    if (gp != nullptr)  // dP += g^T W
      detail::gemm(true, false, hw, ckk, o, g, wv.data(),
                   gp->data() + in * hw * ckk, true);
    if (wNode.requiresGrad)  // dW += g P
      detail::gemm(false, false, o, ckk, hw, g,
                   patches.data() + in * hw * ckk, wNode.grad.data(), true);
  }
  if (bNode.requiresGrad) {
    double* db = bNode.grad.data();
    for (int64_t in = 0; in < nn; ++in)
      for (int64_t io = 0; io < o; ++io) {
        const double* g = n.grad.data() + (in * o + io) * hw;
        double acc = 0;
        for (int64_t q = 0; q < hw; ++q) acc += g[q];
        db[io] += acc;
      }
  }
}

}  // namespace

Var adaptiveConv(const Var& patches, const Var& weights, const Var& bias) {
  TensorD y = adaptiveConvValue(patches->value, weights->value, bias->value);
  return makeNode("adaptiveConv", std::move(y), {patches, weights, bias},
                  [](Node& n) {
                    Node& p = *n.parents[0];
                    TensorD* gp = p.requiresGrad ? &p.grad : nullptr;
                    adaptiveConvBackward(n, p.value, *n.parents[1],
                                         *n.parents[2], gp);
                  });
}

Var conv2d(const Var& x, const Var& weights, const Var& bias) {
  const int kH = static_cast<int>(weights->value.dim(2));
  const int kW = static_cast<int>(weights->value.dim(3));
  TensorD patches = stylenorm::unfold(x->value, kH, kW).patches;
  TensorD y = adaptiveConvValue(patches, weights->value, bias->value);
  return makeNode(
      "conv2d", std::move(y), {x, weights, bias}, [kH, kW](Node& n) {
        Node& xNode = *n.parents[0];
        // patches are recomputed here instead of being cached in the closure
        TensorD patches =
            stylenorm::unfold(xNode.value, kH, kW).patches;
        TensorD gp;
        TensorD* gpPtr = nullptr;
        if (xNode.requiresGrad) {
          gp = TensorD(patches.shape());
          gpPtr = &gp;
        }
        adaptiveConvBackward(n, patches, *n.parents[1], *n.parents[2], gpPtr);
        if (gpPtr != nullptr) scatterPatches(gp, xNode.grad, kH, kW);
      });
}

Var relu(const Var& x) {
  TensorD y = x->value;
  for (int64_t i = 0; i < y.numel(); ++i) y[i] = std::max(y[i], 0.0);
  return makeNode("relu", std::move(y), {x}, [](Node& n) {
    if (!n.parents[0]->requiresGrad) return;
    const double* xv = n.parents[0]->value.data();
    const double* g = n.grad.data();
    double* d = n.parents[0]->grad.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      if (xv[i] > 0) d[i] += g[i];
  });
}

Var leakyRelu(const Var& x, double slope) {
  TensorD y = x->value;
  for (int64_t i = 0; i < y.numel(); ++i)
    if (y[i] < 0) y[i] *= slope;
  return makeNode("leakyRelu", std::move(y), {x}, [slope](Node& n) {
    if (!n.parents[0]->requiresGrad) return;
    const double* xv = n.parents[0]->value.data();
    const double* g = n.grad.data();
    double* d = n.parents[0]->grad.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      d[i] += (xv[i] > 0 ? 1.0 : slope) * g[i];
  });
}

Var tanh(const Var& x) {
  TensorD y = x->value;
  for (int64_t i = 0; i < y.numel(); ++i) y[i] = std::tanh(y[i]);
  return makeNode("tanh", std::move(y), {x}, [](Node& n) {
    if (!n.parents[0]->requiresGrad) return;
    const double* yv = n.value.data();
    const double* g = n.grad.data();
    double* d = n.parents[0]->grad.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      d[i] += (1.0 - yv[i] * yv[i]) * g[i];
  });
}

Var upsample2x(const Var& x) {
  const TensorD& v = x->value;
  checkArg(v.rank() == 4, "upsample2x: rank-4 input required");
  const int64_t n = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  TensorD y({n, c, 2 * h, 2 * w});
  for (int64_t i = 0; i < n * c; ++i) {
    const double* src = v.data() + i * h * w;
    double* dst = y.data() + i * 4 * h * w;
    for (int64_t r = 0; r < 2 * h; ++r)
      for (int64_t q = 0; q < 2 * w; ++q)
        dst[r * 2 * w + q] = src[(r / 2) * w + q / 2];
  }
  return makeNode("upsample2x", std::move(y), {x}, [](Node& n_) {
    if (!n_.parents[0]->requiresGrad) return;
    const TensorD& gv = n_.grad;
    TensorD& d = n_.parents[0]->grad;
    const int64_t nc = d.dim(0) * d.dim(1), h = d.dim(2), w = d.dim(3);
    for (int64_t i = 0; i < nc; ++i) {
      const double* g = gv.data() + i * 4 * h * w;
      double* dd = d.data() + i * h * w;
      for (int64_t r = 0; r < 2 * h; ++r)
        for (int64_t q = 0; q < 2 * w; ++q)
          dd[(r / 2) * w + q / 2] += g[r * 2 * w + q];
    }
  });
}

Var downsample2x(const Var& x) {
  const TensorD& v = x->value;
  checkArg(v.rank() == 4, "downsample2x: rank-4 input required");
  const int64_t n = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  TensorD y({n, c, oh, ow});
  for (int64_t i = 0; i < n * c; ++i) {
    const double* src = v.data() + i * h * w;
    double* dst = y.data() + i * oh * ow;
    for (int64_t r = 0; r < oh; ++r)
      for (int64_t q = 0; q < ow; ++q) dst[r * ow + q] = src[2 * r * w + 2 * q];
  }
  return makeNode("downsample2x", std::move(y), {x}, [](Node& n_) {
    if (!n_.parents[0]->requiresGrad) return;
    TensorD& d = n_.parents[0]->grad;
    const int64_t nc = d.dim(0) * d.dim(1), h = d.dim(2), w = d.dim(3);
    const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
    for (int64_t i = 0; i < nc; ++i) {
      const double* g = n_.grad.data() + i * oh * ow;
      double* dd = d.data() + i * h * w;
      for (int64_t r = 0; r < oh; ++r)
        for (int64_t q = 0; q < ow; ++q)
          dd[2 * r * w + 2 * q] += g[r * ow + q];
    }
  });
}

Var globalAvgPool(const Var& x) {
  const TensorD& v = x->value;
  checkArg(v.rank() == 4, "globalAvgPool: rank-4 input required");
  const int64_t n = v.dim(0), c = v.dim(1), hw = v.dim(2) * v.dim(3);
  TensorD y({n, c});
  for (int64_t i = 0; i < n * c; ++i) {
    const double* src = v.data() + i * hw;
    double acc = 0;
    for (int64_t q = 0; q < hw; ++q) acc += src[q];
    y[i] = acc / static_cast<double>(hw);
  }
  return makeNode("globalAvgPool", std::move(y), {x}, [hw](Node& n_) {
    if (!n_.parents[0]->requiresGrad) return;
    double* d = n_.parents[0]->grad.data();
    const double* g = n_.grad.data();
    const int64_t nc = n_.grad.numel();
    for (int64_t i = 0; i < nc; ++i) {
      double gi = g[i] / static_cast<double>(hw);
      double* row = d + i * hw;
      for (int64_t q = 0; q < hw; ++q) row[q] += gi;
    }
  });
}

Var l1Loss(const Var& a, const Var& b) {
  checkArg(a->value.sameShape(b->value), "l1Loss: shape mismatch");
  const int64_t m = a->value.numel();
  TensorD y({1});
  double acc = 0;
  for (int64_t i = 0; i < m; ++i)
    acc += std::abs(a->value[i] - b->value[i]);
  y[0] = acc / static_cast<double>(m);
  return makeNode("l1Loss", std::move(y), {a, b}, [m](Node& n) {
    const double g = n.grad[0] / static_cast<double>(m);
    const double* av = n.parents[0]->value.data();
    const double* bv = n.parents[1]->value.data();
    for (int64_t i = 0; i < m; ++i) {
      double diff = av[i] - bv[i];
      double s = diff > 0 ? g : (diff < 0 ? -g : 0.0);
      if (n.parents[0]->requiresGrad) n.parents[0]->grad[i] += s;
      if (n.parents[1]->requiresGrad) n.parents[1]->grad[i] -= s;
    }
  });
}

Var squaredErrorMean(const Var& x, double target) {
  const int64_t m = x->value.numel();
  TensorD y({1});
  double acc = 0;
  for (int64_t i = 0; i < m; ++i) {
    double d = x->value[i] - target;
    acc += d * d;
  }
  y[0] = acc / static_cast<double>(m);
  return makeNode("squaredErrorMean", std::move(y), {x}, [m, target](Node& n) {
    if (!n.parents[0]->requiresGrad) return;
    const double g = n.grad[0];
    const double* xv = n.parents[0]->value.data();
    double* d = n.parents[0]->grad.data();
    for (int64_t i = 0; i < m; ++i)
      d[i] += g * 2.0 * (xv[i] - target) / static_cast<double>(m);
  });
}

void backward(const Var& root) {
  checkArg(root->value.numel() == 1, "backward: root must be scalar");

  // gather reachable nodes
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents)
      if (seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });

  for (Node* n : order) n->grad = TensorD(n->value.shape());
  root->grad[0] = 1.0;

  for (Node* n : order)
    if (n->requiresGrad && n->pull) n->pull(*n);
}

}  // namespace stylenorm::ad
