#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stylenorm/autodiff.hpp"
#include "stylenorm/config.hpp"
#include "stylenorm/optim.hpp"

namespace stylenorm {

// Desk-scale two-domain translation stack: content/style encoders, decoders
// with one embedded AdaCoN block each, patch discriminators, the bidirectional
// loss graph, and the seeded training loop.

struct ConvLayer {
  AdaptiveKernel<double> k;
};

struct AffineLayer {
  TensorD w;  // (out, in)
  TensorD b;  // (out)
};

// 3 conv layers, strides {1,2,2}, ReLU after each: (3,S,S) -> (64,S/4,S/4)
struct ContentEncoder {
  ConvLayer c1, c2, c3;
};

// 4 stride-2 conv layers + global average + affine head to d_s
struct StyleEncoder {
  ConvLayer c1, c2, c3, c4;
  AffineLayer head;
};

// AdaCoN block, then two upsample-conv layers, tanh output head
struct Decoder {
  AdaConBlock block;
  ConvLayer up1, up2;
};

// 3 stride-2 conv layers (leaky ReLU) + 1 plain conv to a 1-channel patch map
struct Discriminator {
  ConvLayer c1, c2, c3, c4;
};

struct TranslationModel {
  ContentEncoder ecA, ecB;
  StyleEncoder esA, esB;
  Decoder gA, gB;
  Discriminator dA, dB;
  AdaConConfig adacon;
  int imageSize = 32;
};

TranslationModel makeTranslationModel(const AdaConConfig& adacon,
                                      int imageSize, uint64_t seed);

// Parameter tensors in fixed traversal order; generator and discriminator
// partitions are disjoint and together cover every trainable tensor.
std::vector<std::pair<std::string, TensorD*>> generatorParams(
    TranslationModel& m);
std::vector<std::pair<std::string, TensorD*>> discriminatorParams(
    TranslationModel& m);
std::vector<std::pair<std::string, TensorD*>> allParams(TranslationModel& m);

// checkpoint directory: ATNS tensor files + manifest.json with the config
void saveCheckpoint(TranslationModel& m, const RunConfig& cfg,
                    const std::string& dir);
TranslationModel loadCheckpoint(const std::string& dir,
                                RunConfig* cfgOut = nullptr);

// ---------------------------------------------------------------------------
// graph building

// Wraps model parameters as graph leaves exactly once, in allParams order,
// so node ids (and with them backward order) are deterministic.
class ModelGraph {
 public:
  ModelGraph(TranslationModel& m, bool trainGenerator,
             bool trainDiscriminator);

  ad::Var contentEncode(const ContentEncoder& e, const ad::Var& img);
  ad::Var styleEncode(const StyleEncoder& e, const ad::Var& img);
  ad::Var decode(const Decoder& d, const ad::Var& zc, const ad::Var& zs);
  ad::Var discriminate(const Discriminator& d, const ad::Var& img);

  // gradient of the last backward() pass for a parameter tensor
  const TensorD& gradOf(const TensorD& param) const;

 private:
  ad::Var wrapped(const TensorD& t) const;
  ad::Var convDown(const ConvLayer& c, const ad::Var& x);  // stride-2 conv

  std::unordered_map<const TensorD*, ad::Var> leaves_;
};

// All scalar loss terms of one bidirectional pass, plus the fake images.
struct BidirGraph {
  ad::Var xAB, xBA;
  ad::Var cycA, cycB;            // pixel cycle terms
  ad::Var idA, idB;              // pixel identity terms
  ad::Var styleRecAB, styleRecBA;
  ad::Var contentRecAB, contentRecBA;
  ad::Var gAdvA, gAdvB;

  // Full generator objective: gAdv terms + lambdaLatent*(styleRec +
  // contentRec) + lambdaPixel*(cyc + idA + idB), both directions.
  ad::Var totalG(const LossWeights& w) const;
};

BidirGraph buildGeneratorGraph(ModelGraph& g, TranslationModel& m,
                               const ad::Var& xA, const ad::Var& xB);

// LSGAN scalar forms on raw discriminator maps
double lsganDLoss(const TensorD& dReal, const TensorD& dFake);
double lsganGLoss(const TensorD& dFake);

// ---------------------------------------------------------------------------
// spec-level operations (evaluation; no parameter updates)

std::pair<TensorD, TensorD> translate(TranslationModel& m, const TensorD& xA,
                                      const TensorD& xB);

struct PixelLosses {
  double cyc;  // both directions summed
  double idA;
  double idB;
};
PixelLosses lossPixel(TranslationModel& m, const TensorD& xA,
                      const TensorD& xB);

struct LatentLosses {
  double styleRec;    // both directions summed
  double contentRec;  // both directions summed
};
LatentLosses lossLatent(TranslationModel& m, const TensorD& xA,
                        const TensorD& xB);

struct AdvLosses {
  double dLoss;
  double gLoss;
};
AdvLosses lossAdversarial(TranslationModel& m, const TensorD& xA,
                          const TensorD& xB);

// ---------------------------------------------------------------------------
// training

struct StepMetrics {
  int64_t step = 0;
  double lD = 0, lG = 0, lCyc = 0, lId = 0, lS = 0, lC = 0, lr = 0;
};

// Thrown when a loss goes NaN; the diagnostic dump is in .dump.
struct TrainDivergence : std::runtime_error {
  explicit TrainDivergence(const std::string& msg, std::string dumpText)
      : std::runtime_error(msg), dump(std::move(dumpText)) {}
  std::string dump;
};

// One discriminator update on L_D, then one generator update on L_G.
StepMetrics trainStep(TranslationModel& m, Adam& optD, Adam& optG,
                      const TensorD& xA, const TensorD& xB,
                      const TrainConfig& cfg, const LossWeights& w,
                      int64_t step);

struct TrainResult {
  std::vector<StepMetrics> metrics;
};

// Full seeded run on the synthetic set. When outDir is nonempty, writes
// outDir/metrics.csv (timestamp confined to the first header line) and
// outDir/checkpoint/.
TrainResult trainRun(const RunConfig& cfg, const std::string& outDir);

void writeMetricsCsv(const std::vector<StepMetrics>& metrics,
                     const std::string& path);

}  // namespace stylenorm
