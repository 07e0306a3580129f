#pragma once

#include <string>

#include "stylenorm/adacon.hpp"
#include "stylenorm/synth.hpp"

namespace stylenorm {

struct LossWeights {
  double lambdaLatent = 1.0;
  double lambdaPixel = 10.0;

  void validate() const {
    checkArg(lambdaLatent >= 0 && lambdaPixel >= 0,
             "LossWeights: weights must be nonnegative");
  }
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch = 1;
  int64_t decayStart = 200000;  // first halving applied at this step
  int64_t decayEvery = 50000;
  uint64_t seed = 1;
  int64_t steps = 2000;
  int imageSize = 32;

  void validate() const {
    checkArg(lr > 0 && beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1,
             "TrainConfig: invalid optimizer constants");
    checkArg(batch == 1, "TrainConfig: only batch size 1 is supported");
    checkArg(decayStart >= 0 && decayEvery > 0 && steps > 0,
             "TrainConfig: invalid schedule");
    checkArg(imageSize >= 8 && imageSize % 4 == 0,
             "TrainConfig: image size must be a positive multiple of 4");
  }
};

// Constant before decayStart; halved at decayStart and at every decayEvery
// interval after it.
double lrAt(const TrainConfig& cfg, int64_t step);

// One training run's full configuration, as stored in the JSON config file.
struct RunConfig {
  TrainConfig train;
  LossWeights weights;
  AdaConConfig adacon;
  SyntheticDomainSpec synth;
};

// Desk defaults: 32x32 images, 2000 steps, AdaCoN at C=64 with O=64.
RunConfig defaultRunConfig();

RunConfig loadRunConfig(const std::string& path);
void saveRunConfig(const RunConfig& cfg, const std::string& path);

std::string runConfigToJson(const RunConfig& cfg);
RunConfig runConfigFromJson(const std::string& text);

SyntheticDomainSpec synthSpecFromJsonFile(const std::string& path);
std::string synthSpecToJson(const SyntheticDomainSpec& spec);

}  // namespace stylenorm
