#include "stylenorm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "stylenorm/rng.hpp"

namespace stylenorm {

namespace {

constexpr int kMaxCoords = 200;

double evalScalar(const GraphBuilder& f, const std::vector<TensorD>& inputs) {
  std::vector<ad::Var> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(ad::constant(t));
  ad::Var y = f(leaves);
  return sumAll(y->value);
}

// uniform values bounded away from zero, for ops with kinks at the origin
TensorD awayFromZero(std::vector<int64_t> shape, Rng& rng) {
  TensorD t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) {
    double v = rng.uniform(0.5, 1.5);
    t[i] = rng.uniform() < 0.5 ? -v : v;
  }
  return t;
}

}  // namespace

GradReport gradCheck(const std::string& opName, const GraphBuilder& f,
                     const std::vector<TensorD>& inputs, double h, double tol,
                     uint64_t seed) {
  GradReport report;
  report.opName = opName;
  report.h = h;

  // analytic gradients
  std::vector<ad::Var> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(ad::leaf(t, true));
  ad::Var y = f(leaves);
  ad::Var s = y->value.numel() == 1 ? y : ad::sum(y);
  ad::backward(s);

  // coordinate subsample across the concatenated input index space
  int64_t total = 0;
  for (const auto& t : inputs) total += t.numel();
  std::vector<int64_t> coords(static_cast<size_t>(total));
  for (int64_t i = 0; i < total; ++i) coords[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  for (int64_t i = total - 1; i > 0; --i)
    std::swap(coords[static_cast<size_t>(i)],
              coords[static_cast<size_t>(rng.below(
                  static_cast<uint64_t>(i + 1)))]);
  const int64_t nCheck = std::min<int64_t>(total, kMaxCoords);

  for (int64_t ci = 0; ci < nCheck; ++ci) {
    int64_t flat = coords[static_cast<size_t>(ci)];
    size_t which = 0;
    while (flat >= inputs[which].numel()) {
      flat -= inputs[which].numel();
      ++which;
    }
    std::vector<TensorD> plus = inputs, minus = inputs;
    plus[which][flat] += h;
    minus[which][flat] -= h;
    double fPlus = evalScalar(f, plus);
    double fMinus = evalScalar(f, minus);
    if (std::isnan(fPlus) || std::isnan(fMinus)) {
      report.note = "NaN during finite differencing";
      report.passed = false;
      report.maxRelError = std::numeric_limits<double>::infinity();
      return report;
    }
    double numeric = (fPlus - fMinus) / (2.0 * h);
    double analytic = leaves[which]->grad[flat];
    if (std::isnan(analytic)) {
      report.note = "NaN analytic gradient";
      report.passed = false;
      report.maxRelError = std::numeric_limits<double>::infinity();
      return report;
    }
    double abs = std::abs(analytic - numeric);
    double rel =
        abs / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    report.maxAbsError = std::max(report.maxAbsError, abs);
    report.maxRelError = std::max(report.maxRelError, rel);
  }
  report.passed = report.maxRelError < tol;
  return report;
}

namespace {

struct Case {
  GraphBuilder build;
  std::vector<TensorD> inputs;
};

// One canonical case per registered op, seeded so reports are reproducible.
std::map<std::string, Case> makeCases() {
  Rng rng(20240811);
  std::map<std::string, Case> cases;

  auto rt = [&rng](std::vector<int64_t> shape) {
    return randUniform<double>(std::move(shape), rng, -1.0, 1.0);
  };

  cases["add"] = {[](const std::vector<ad::Var>& v) {
                    return ad::add(v[0], v[1]);
                  },
                  {rt({3, 4}), rt({3, 4})}};
  cases["sub"] = {[](const std::vector<ad::Var>& v) {
                    return ad::sub(v[0], v[1]);
                  },
                  {rt({3, 4}), rt({3, 4})}};
  cases["mul"] = {[](const std::vector<ad::Var>& v) {
                    return ad::mul(v[0], v[1]);
                  },
                  {rt({3, 4}), rt({3, 4})}};
  cases["scale"] = {[](const std::vector<ad::Var>& v) {
                      return ad::scale(v[0], -1.7);
                    },
                    {rt({5})}};
  cases["sum"] = {[](const std::vector<ad::Var>& v) { return ad::sum(v[0]); },
                  {rt({2, 3, 2})}};
  cases["matmul"] = {[](const std::vector<ad::Var>& v) {
                       return ad::matmul(v[0], v[1]);
                     },
                     {rt({4, 3}), rt({3, 5})}};
  cases["affine"] = {[](const std::vector<ad::Var>& v) {
                       return ad::affine(v[0], v[1], v[2]);
                     },
                     {rt({4, 6}), rt({6}), rt({4})}};
  cases["reshape"] = {[](const std::vector<ad::Var>& v) {
                        // compose with mul so the check is not a no-op
                        return ad::mul(ad::reshape(v[0], {6, 2}),
                                       ad::reshape(v[0], {6, 2}));
                      },
                      {rt({3, 4})}};
  cases["concatChannels"] = {[](const std::vector<ad::Var>& v) {
                               auto c = ad::concatChannels(v[0], v[1]);
                               return ad::mul(c, c);
                             },
                             {rt({1, 2, 3, 3}), rt({1, 3, 3, 3})}};
  cases["unfold"] = {[](const std::vector<ad::Var>& v) {
                       auto u = ad::unfold(v[0], 3, 3);
                       return ad::mul(u, u);
                     },
                     {rt({1, 2, 4, 4})}};
  cases["standardizeLocal"] = {
      [](const std::vector<ad::Var>& v) {
        auto s = ad::standardizeLocal(v[0], 3, 3, 1e-5);
        return ad::mul(s, ad::scale(s, 0.5));
      },
      {rt({1, 2, 5, 5})}};
  cases["standardizeInstance"] = {
      [](const std::vector<ad::Var>& v) {
        auto s = ad::standardizeInstance(v[0], 1e-5);
        return ad::mul(s, ad::scale(s, 0.5));
      },
      {rt({1, 3, 4, 4})}};
  cases["injectAdaIN"] = {[](const std::vector<ad::Var>& v) {
                            auto y = ad::injectAdaIN(v[0], v[1], 1e-5);
                            return ad::mul(y, ad::scale(y, 0.5));
                          },
                          {rt({1, 3, 4, 4}), rt({1, 3, 5, 5})}};
  cases["adaptiveConv"] = {[](const std::vector<ad::Var>& v) {
                             auto y = ad::adaptiveConv(v[0], v[1], v[2]);
                             return ad::mul(y, ad::scale(y, 0.5));
                           },
                           {rt({1, 3, 3, 2, 3, 3}), rt({4, 2, 3, 3}),
                            rt({4})}};
  cases["conv2d"] = {[](const std::vector<ad::Var>& v) {
                       auto y = ad::conv2d(v[0], v[1], v[2]);
                       return ad::mul(y, ad::scale(y, 0.5));
                     },
                     {rt({1, 2, 5, 5}), rt({3, 2, 3, 3}), rt({3})}};

  // kinked activations get inputs bounded away from the origin
  cases["relu"] = {[](const std::vector<ad::Var>& v) {
                     auto y = ad::relu(v[0]);
                     return ad::mul(y, ad::scale(y, 0.5));
                   },
                   {awayFromZero({2, 3, 2, 2}, rng)}};
  cases["leakyRelu"] = {[](const std::vector<ad::Var>& v) {
                          auto y = ad::leakyRelu(v[0], 0.2);
                          return ad::mul(y, ad::scale(y, 0.5));
                        },
                        {awayFromZero({2, 3, 2, 2}, rng)}};
  cases["tanh"] = {[](const std::vector<ad::Var>& v) {
                     auto y = ad::tanh(v[0]);
                     return ad::mul(y, ad::scale(y, 0.5));
                   },
                   {rt({2, 8})}};
  cases["upsample2x"] = {[](const std::vector<ad::Var>& v) {
                           auto y = ad::upsample2x(v[0]);
                           return ad::mul(y, ad::scale(y, 0.5));
                         },
                         {rt({1, 2, 3, 3})}};
  cases["downsample2x"] = {[](const std::vector<ad::Var>& v) {
                             auto y = ad::downsample2x(v[0]);
                             return ad::mul(y, ad::scale(y, 0.5));
                           },
                           {rt({1, 2, 4, 4})}};
  cases["globalAvgPool"] = {[](const std::vector<ad::Var>& v) {
                              auto y = ad::globalAvgPool(v[0]);
                              return ad::mul(y, ad::scale(y, 0.5));
                            },
                            {rt({2, 3, 4, 4})}};

  // keep |a - b| away from the kink by separating operand ranges
  {
    TensorD a({3, 4}), b({3, 4});
    for (int64_t i = 0; i < a.numel(); ++i) {
      a[i] = rng.uniform(1.0, 2.0);
      b[i] = rng.uniform(-2.0, -1.0);
      if (i % 2 == 0) std::swap(a[i], b[i]);
    }
    cases["l1Loss"] = {[](const std::vector<ad::Var>& v) {
                         return ad::l1Loss(v[0], v[1]);
                       },
                       {a, b}};
  }
  cases["squaredErrorMean"] = {[](const std::vector<ad::Var>& v) {
                                 return ad::squaredErrorMean(v[0], 1.0);
                               },
                               {rt({3, 5})}};
  return cases;
}

const std::map<std::string, Case>& cases() {
  static const std::map<std::string, Case> c = makeCases();
  return c;
}

}  // namespace

std::vector<std::string> gradCheckManifest() {
  std::vector<std::string> names;
  for (const auto& [name, c] : cases()) names.push_back(name);
  return names;
}

GradReport runGradCheckFor(const std::string& opName, double h, double tol) {
  auto it = cases().find(opName);
  if (it == cases().end())
    throw std::invalid_argument("gradcheck: no case for op " + opName);
  return gradCheck(opName, it->second.build, it->second.inputs, h, tol,
                   0x5eedULL + std::hash<std::string>{}(opName));
}

std::vector<GradReport> runAllGradChecks(double h, double tol) {
  std::vector<GradReport> reports;
  for (const auto& name : gradCheckManifest())
    reports.push_back(runGradCheckFor(name, h, tol));
  return reports;
}

bool manifestMatchesRegistry(std::string* diff) {
  std::set<std::string> registry(ad::registeredOps().begin(),
                                 ad::registeredOps().end());
  std::set<std::string> manifest;
  for (const auto& n : gradCheckManifest()) manifest.insert(n);
  if (registry == manifest) return true;
  if (diff != nullptr) {
    *diff = "";
    for (const auto& n : registry)
      if (!manifest.count(n)) *diff += "unchecked op: " + n + "; ";
    for (const auto& n : manifest)
      if (!registry.count(n)) *diff += "orphan check: " + n + "; ";
  }
  return false;
}

}  // namespace stylenorm
