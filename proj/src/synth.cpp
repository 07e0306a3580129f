#include "stylenorm/synth.hpp"

#include <cmath>

#include "stylenorm/rng.hpp"

namespace stylenorm {

SyntheticDomainSpec defaultSynthSpec() {
  SyntheticDomainSpec spec;
  spec.domainA.palette = {{0.90, 0.10, -0.80},
                          {0.80, 0.45, -0.70},
                          {0.95, -0.20, -0.90}};
  spec.domainA.texture = "hstripes";
  spec.domainA.textureAmp = 0.25;
  spec.domainB.palette = {{-0.80, 0.10, 0.90},
                          {-0.70, 0.50, 0.80},
                          {-0.90, -0.15, 0.95}};
  spec.domainB.texture = "vstripes";
  spec.domainB.textureAmp = 0.25;
  return spec;
}

SyntheticSample synthesizeSample(const DomainStyle& style, int imageSize,
                                 uint64_t seed) {
  checkArg(imageSize >= 8, "synthesizeSample: image size too small");
  checkArg(!style.palette.empty(), "synthesizeSample: empty palette");
  Rng rng(seed);
  const int s = imageSize;

  // content: shape class, position, size
  const int shapeClass = static_cast<int>(rng.below(3));
  const double cx = rng.uniform(0.30, 0.70) * s;
  const double cy = rng.uniform(0.30, 0.70) * s;
  const double r = rng.uniform(0.15, 0.32) * s;

  const auto& fg =
      style.palette[rng.below(style.palette.size())];

  auto inside = [&](double x, double y) {
    switch (shapeClass) {
      case 0:  // disk
        return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
      case 1:  // square
        return std::abs(x - cx) <= r && std::abs(y - cy) <= r;
      default:  // triangle, apex up
        return y >= cy - r && y <= cy + r &&
               std::abs(x - cx) <= 0.5 * (y - (cy - r));
    }
  };

  auto stripe = [&](int64_t i, int64_t j) {
    if (style.texture == "hstripes") return (i / 2) % 2 == 1;
    if (style.texture == "vstripes") return (j / 2) % 2 == 1;
    return false;
  };

  SyntheticSample out;
  out.shapeClass = shapeClass;
  out.image = TensorD({1, 3, s, s});
  for (int64_t i = 0; i < s; ++i)
    for (int64_t j = 0; j < s; ++j) {
      bool fgPix = inside(static_cast<double>(j) + 0.5,
                          static_cast<double>(i) + 0.5);
      double f = stripe(i, j) ? 1.0 - style.textureAmp : 1.0;
      for (int ch = 0; ch < 3; ++ch)
        out.image.at4(0, ch, i, j) =
            (fgPix ? fg[static_cast<size_t>(ch)]
                   : style.background[static_cast<size_t>(ch)]) *
            f;
    }
  return out;
}

std::pair<std::vector<TensorD>, std::vector<TensorD>> makeSyntheticDataset(
    const SyntheticDomainSpec& spec) {
  checkArg(spec.count > 0, "makeSyntheticDataset: count must be positive");
  std::vector<TensorD> a, b;
  a.reserve(static_cast<size_t>(spec.count));
  b.reserve(static_cast<size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    a.push_back(synthesizeSample(spec.domainA, spec.imageSize,
                                 deriveSeed(spec.seed ^ 0x41, i))
                    .image);
    b.push_back(synthesizeSample(spec.domainB, spec.imageSize,
                                 deriveSeed(spec.seed ^ 0x42, i))
                    .image);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace stylenorm
