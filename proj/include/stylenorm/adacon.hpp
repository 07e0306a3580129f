#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stylenorm/style_injectors.hpp"

namespace stylenorm {

// Configuration of one adaptive-convolution normalization layer. O controls
// how many style-branch channels reach the joining step and with it the
// amount of style injected.
struct AdaConConfig {
  int C = 64;        // content channels
  int O = 128;       // style-branch output channels
  int kH = 3;        // kernel height
  int kW = 3;        // kernel width
  int ds = 128;      // style code dimension
  int fuseOut = 64;  // channels after the joining convolution
  double eps = 1e-5;

  void validate() const {
    checkArg(C > 0 && O > 0 && ds > 0 && fuseOut > 0 && eps > 0,
             "AdaConConfig: all fields must be positive");
    checkArg(kH >= 1 && kW >= 1 && kH % 2 == 1 && kW % 2 == 1,
             "AdaConConfig: kernel sizes must be odd");
  }
};

// The complete layer: a style branch (local standardization followed by
// adaptive convolution), a content branch (one plain 3x3 convolution), and a
// joining 1x1 convolution over the concatenated branch outputs.
struct AdaConBlock {
  AdaConConfig config;
  PsiEncoder<double> psi;
  AdaptiveKernel<double> contentConv;  // (C, C, 3, 3)
  AdaptiveKernel<double> fuseConv;     // (fuseOut, O + C, 1, 1)
};

AdaConBlock makeAdaConBlock(const AdaConConfig& cfg, Rng& rng);

// style branch: adaptiveConv(standardizeLocal(zc), psi(zs))
TensorD adaconStyleBranch(const AdaConBlock& b, const TensorD& zc,
                          const StyleCode<double>& zs);

// content branch: plain convolution of zc, independent of the style code
TensorD adaconContentBranch(const AdaConBlock& b, const TensorD& zc);

// fuseConv(concat(styleBranch, contentBranch)); spatial size preserved
TensorD adaconForward(const AdaConBlock& b, const TensorD& zc,
                      const StyleCode<double>& zs);

// ||f(zc,zs1) - f(zc,zs2)||_2 / ||f(zc,zs1)||_2: how strongly the block
// output responds to swapping the style code.
double styleSensitivity(const AdaConBlock& b, const TensorD& zc,
                        const StyleCode<double>& zs1,
                        const StyleCode<double>& zs2);

// Parameter tensors in fixed traversal order, named by role.
std::vector<std::pair<std::string, TensorD*>> blockParams(AdaConBlock& b);

// ATNS directory serialization: one file per parameter plus a JSON manifest
// listing tensors by role.
void saveBlock(const AdaConBlock& b, const std::string& dir);
AdaConBlock loadBlock(const std::string& dir);

}  // namespace stylenorm
