#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stylenorm/autodiff.hpp"

namespace stylenorm {

struct GradReport {
  std::string opName;
  double maxRelError = 0;
  double maxAbsError = 0;
  bool passed = false;
  double h = 0;
  std::string note;  // set on NaN or other diagnostic failures
};

// Builds a graph from leaf variables; the output need not be scalar (it is
// reduced with sum() before differentiation).
using GraphBuilder =
    std::function<ad::Var(const std::vector<ad::Var>&)>;

// Central-difference certification of one backward rule: analytic gradients
// from backward() against (f(x+h) - f(x-h)) / 2h on a seeded subsample of at
// most 200 coordinates. rel err = |a - n| / max(|a|, |n|, 1e-8).
GradReport gradCheck(const std::string& opName, const GraphBuilder& f,
                     const std::vector<TensorD>& inputs, double h, double tol,
                     uint64_t seed);

// Canonical check cases, one per registered autodiff op.
std::vector<std::string> gradCheckManifest();
GradReport runGradCheckFor(const std::string& opName, double h = 1e-5,
                           double tol = 1e-5);
std::vector<GradReport> runAllGradChecks(double h = 1e-5, double tol = 1e-5);

// True iff the autodiff op registry and the check manifest cover exactly the
// same op names; mismatches are described in *diff.
bool manifestMatchesRegistry(std::string* diff);

}  // namespace stylenorm
