#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "stylenorm/tensor.hpp"

namespace stylenorm {

// Style attributes of one synthetic domain: a foreground palette plus a
// whole-image texture. Content identity is carried by the shape mask, which
// is drawn from the same distribution in both domains.
struct DomainStyle {
  std::vector<std::array<double, 3>> palette;  // RGB in [-1, 1]
  std::string texture = "plain";               // plain | hstripes | vstripes
  double textureAmp = 0.25;
  std::array<double, 3> background = {-0.75, -0.75, -0.75};
};

struct SyntheticDomainSpec {
  int imageSize = 32;
  int count = 64;
  uint64_t seed = 7;
  DomainStyle domainA;
  DomainStyle domainB;
};

// Desk defaults: warm palette + horizontal stripes vs cool palette +
// vertical stripes. The palettes occupy disjoint color regions.
SyntheticDomainSpec defaultSynthSpec();

struct SyntheticSample {
  TensorD image;  // (1, 3, S, S) in [-1, 1]
  int shapeClass; // 0 disk, 1 square, 2 triangle
};

// One sample under a fixed seed; the shape class draw comes first so the
// class distribution is identical across domains.
SyntheticSample synthesizeSample(const DomainStyle& style, int imageSize,
                                 uint64_t seed);

// Unpaired two-domain set. Per-sample seeds are derived from the master seed
// by a fixed splitting rule, so sample i is reproducible in isolation.
std::pair<std::vector<TensorD>, std::vector<TensorD>> makeSyntheticDataset(
    const SyntheticDomainSpec& spec);

}  // namespace stylenorm
