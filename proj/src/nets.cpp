#include "stylenorm/nets.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stylenorm/rng.hpp"
#include "stylenorm/tensor_io.hpp"

namespace stylenorm {

namespace {

constexpr int kWidth1 = 32;   // first conv width
constexpr int kWidth2 = 64;   // content feature channels
constexpr double kLReluSlope = 0.2;

ConvLayer makeConvLayer(int outCh, int inCh, int k, Rng& rng) {
  double stddev = std::sqrt(2.0 / (static_cast<double>(inCh) * k * k));
  ConvLayer c;
  c.k.weights = randNormal<double>({outCh, inCh, k, k}, rng, 0.0, stddev);
  c.k.bias = TensorD({outCh});
  return c;
}

AffineLayer makeAffineLayer(int outDim, int inDim, Rng& rng) {
  double stddev = std::sqrt(2.0 / static_cast<double>(inDim));
  AffineLayer a;
  a.w = randNormal<double>({outDim, inDim}, rng, 0.0, stddev);
  a.b = TensorD({outDim});
  return a;
}

void appendParams(std::vector<std::pair<std::string, TensorD*>>& out,
                  const std::string& prefix, ConvLayer& c) {
  out.emplace_back(prefix + ".weights", &c.k.weights);
  out.emplace_back(prefix + ".bias", &c.k.bias);
}

void appendParams(std::vector<std::pair<std::string, TensorD*>>& out,
                  const std::string& prefix, ContentEncoder& e) {
  appendParams(out, prefix + ".c1", e.c1);
  appendParams(out, prefix + ".c2", e.c2);
  appendParams(out, prefix + ".c3", e.c3);
}

void appendParams(std::vector<std::pair<std::string, TensorD*>>& out,
                  const std::string& prefix, StyleEncoder& e) {
  appendParams(out, prefix + ".c1", e.c1);
  appendParams(out, prefix + ".c2", e.c2);
  appendParams(out, prefix + ".c3", e.c3);
  appendParams(out, prefix + ".c4", e.c4);
  out.emplace_back(prefix + ".head.w", &e.head.w);
  out.emplace_back(prefix + ".head.b", &e.head.b);
}

void appendParams(std::vector<std::pair<std::string, TensorD*>>& out,
                  const std::string& prefix, Decoder& d) {
  for (auto& [name, t] : blockParams(d.block))
    out.emplace_back(prefix + ".block." + name, t);
  appendParams(out, prefix + ".up1", d.up1);
  appendParams(out, prefix + ".up2", d.up2);
}

void appendParams(std::vector<std::pair<std::string, TensorD*>>& out,
                  const std::string& prefix, Discriminator& d) {
  appendParams(out, prefix + ".c1", d.c1);
  appendParams(out, prefix + ".c2", d.c2);
  appendParams(out, prefix + ".c3", d.c3);
  appendParams(out, prefix + ".c4", d.c4);
}

void validateImage(const TensorD& x, int imageSize, const char* who) {
  checkArg(x.rank() == 4 && x.dim(0) == 1 && x.dim(1) == 3 &&
               x.dim(2) == imageSize && x.dim(3) == imageSize,
           std::string(who) + ": expected (1,3,S,S) image");
  for (int64_t i = 0; i < x.numel(); ++i)
    checkArg(x[i] >= -1.0 - 1e-9 && x[i] <= 1.0 + 1e-9,
             std::string(who) + ": image values must lie in [-1, 1]");
}

}  // namespace

TranslationModel makeTranslationModel(const AdaConConfig& adacon,
                                      int imageSize, uint64_t seed) {
  adacon.validate();
  checkArg(adacon.C == kWidth2,
           "makeTranslationModel: adacon.C must equal the content feature "
           "width (64)");
  checkArg(imageSize >= 8 && imageSize % 4 == 0,
           "makeTranslationModel: image size must be a multiple of 4");
  Rng rng(deriveSeed(seed, 0x0D0D));

  TranslationModel m;
  m.adacon = adacon;
  m.imageSize = imageSize;

  auto makeContent = [&] {
    ContentEncoder e;
    e.c1 = makeConvLayer(kWidth1, 3, 3, rng);
    e.c2 = makeConvLayer(kWidth2, kWidth1, 3, rng);
    e.c3 = makeConvLayer(kWidth2, kWidth2, 3, rng);
    return e;
  };
  auto makeStyle = [&] {
    StyleEncoder e;
    e.c1 = makeConvLayer(kWidth1, 3, 3, rng);
    e.c2 = makeConvLayer(kWidth2, kWidth1, 3, rng);
    e.c3 = makeConvLayer(kWidth2, kWidth2, 3, rng);
    e.c4 = makeConvLayer(kWidth2, kWidth2, 3, rng);
    e.head = makeAffineLayer(adacon.ds, kWidth2, rng);
    return e;
  };
  auto makeDecoder = [&] {
    Decoder d;
    d.block = makeAdaConBlock(adacon, rng);
    d.up1 = makeConvLayer(kWidth1, adacon.fuseOut, 3, rng);
    d.up2 = makeConvLayer(3, kWidth1, 3, rng);
    return d;
  };
  auto makeDisc = [&] {
    Discriminator d;
    d.c1 = makeConvLayer(kWidth1, 3, 3, rng);
    d.c2 = makeConvLayer(kWidth2, kWidth1, 3, rng);
    d.c3 = makeConvLayer(kWidth2, kWidth2, 3, rng);
    d.c4 = makeConvLayer(1, kWidth2, 3, rng);
    return d;
  };

  m.ecA = makeContent();
  m.ecB = makeContent();
  m.esA = makeStyle();
  m.esB = makeStyle();
  m.gA = makeDecoder();
  m.gB = makeDecoder();
  m.dA = makeDisc();
  m.dB = makeDisc();
  return m;
}

std::vector<std::pair<std::string, TensorD*>> generatorParams(
    TranslationModel& m) {
  std::vector<std::pair<std::string, TensorD*>> out;
  appendParams(out, "ecA", m.ecA);
  appendParams(out, "ecB", m.ecB);
  appendParams(out, "esA", m.esA);
  appendParams(out, "esB", m.esB);
  appendParams(out, "gA", m.gA);
  appendParams(out, "gB", m.gB);
  return out;
}

std::vector<std::pair<std::string, TensorD*>> discriminatorParams(
    TranslationModel& m) {
  std::vector<std::pair<std::string, TensorD*>> out;
  appendParams(out, "dA", m.dA);
  appendParams(out, "dB", m.dB);
  return out;
}

std::vector<std::pair<std::string, TensorD*>> allParams(TranslationModel& m) {
  auto out = generatorParams(m);
  auto disc = discriminatorParams(m);
  out.insert(out.end(), disc.begin(), disc.end());
  return out;
}

void saveCheckpoint(TranslationModel& m, const RunConfig& cfg,
                    const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "stylenorm-checkpoint";
  manifest["version"] = 1;
  manifest["config"] = nlohmann::json::parse(runConfigToJson(cfg));
  nlohmann::json tensors;
  for (auto& [name, t] : allParams(m)) {
    std::string file = name + ".atns";
    saveAtns((fs::path(dir) / file).string(), *t);
    tensors[name] = file;
  }
  manifest["tensors"] = tensors;
  std::ofstream os(fs::path(dir) / "manifest.json");
  os << manifest.dump(2) << "\n";
}

TranslationModel loadCheckpoint(const std::string& dir, RunConfig* cfgOut) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "manifest.json");
  checkArg(static_cast<bool>(is),
           "loadCheckpoint: missing manifest in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(is);
  checkArg(manifest.value("format", "") == "stylenorm-checkpoint",
           "loadCheckpoint: unexpected manifest format");
  RunConfig cfg = runConfigFromJson(manifest.at("config").dump());
  if (cfgOut != nullptr) *cfgOut = cfg;

  TranslationModel m =
      makeTranslationModel(cfg.adacon, cfg.train.imageSize, 0);
  const auto& tensors = manifest.at("tensors");
  for (auto& [name, t] : allParams(m)) {
    std::string file = tensors.at(name);
    *t = loadAtns<double>((fs::path(dir) / file).string());
  }
  return m;
}

// ---------------------------------------------------------------------------
// graph building

ModelGraph::ModelGraph(TranslationModel& m, bool trainGenerator,
                       bool trainDiscriminator) {
  for (auto& [name, t] : generatorParams(m))
    leaves_.emplace(t, ad::leaf(*t, trainGenerator));
  for (auto& [name, t] : discriminatorParams(m))
    leaves_.emplace(t, ad::leaf(*t, trainDiscriminator));
}

ad::Var ModelGraph::wrapped(const TensorD& t) const {
  auto it = leaves_.find(&t);
  checkArg(it != leaves_.end(), "ModelGraph: tensor is not a model parameter");
  return it->second;
}

const TensorD& ModelGraph::gradOf(const TensorD& param) const {
  return wrapped(param)->grad;
}

ad::Var ModelGraph::convDown(const ConvLayer& c, const ad::Var& x) {
  return ad::downsample2x(
      ad::conv2d(x, wrapped(c.k.weights), wrapped(c.k.bias)));
}

ad::Var ModelGraph::contentEncode(const ContentEncoder& e,
                                  const ad::Var& img) {
  auto h1 = ad::relu(
      ad::conv2d(img, wrapped(e.c1.k.weights), wrapped(e.c1.k.bias)));
  auto h2 = ad::relu(convDown(e.c2, h1));
  return ad::relu(convDown(e.c3, h2));
}

ad::Var ModelGraph::styleEncode(const StyleEncoder& e, const ad::Var& img) {
  auto h = img;
  for (const ConvLayer* c : {&e.c1, &e.c2, &e.c3, &e.c4})
    h = ad::relu(convDown(*c, h));
  auto pooled = ad::reshape(ad::globalAvgPool(h), {h->value.dim(1)});
  return ad::affine(wrapped(e.head.w), pooled, wrapped(e.head.b));
}

ad::Var ModelGraph::decode(const Decoder& d, const ad::Var& zc,
                           const ad::Var& zs) {
  const AdaConConfig& c = d.block.config;

  // style branch: local standardization -> adaptive convolution with
  // style-derived weights and bias
  auto patches = ad::standardizeLocal(zc, c.kH, c.kW, c.eps);
  auto kernelFlat = ad::affine(wrapped(d.block.psi.kernelWeight), zs,
                               wrapped(d.block.psi.kernelBias));
  auto kernel = ad::reshape(kernelFlat, {c.O, c.C, c.kH, c.kW});
  auto kernelBias = ad::affine(wrapped(d.block.psi.biasWeight), zs,
                               wrapped(d.block.psi.biasBias));
  auto styleOut = ad::adaptiveConv(patches, kernel, kernelBias);

  // content branch: plain convolution, independent of the style code
  auto contentOut = ad::conv2d(zc, wrapped(d.block.contentConv.weights),
                               wrapped(d.block.contentConv.bias));

  // joining step: concatenate and fuse with a 1x1 convolution
  auto fused = ad::conv2d(ad::concatChannels(styleOut, contentOut),
                          wrapped(d.block.fuseConv.weights),
                          wrapped(d.block.fuseConv.bias));

  auto h = ad::relu(fused);
  h = ad::relu(ad::conv2d(ad::upsample2x(h), wrapped(d.up1.k.weights),
                          wrapped(d.up1.k.bias)));
  return ad::tanh(ad::conv2d(ad::upsample2x(h), wrapped(d.up2.k.weights),
                             wrapped(d.up2.k.bias)));
}

ad::Var ModelGraph::discriminate(const Discriminator& d, const ad::Var& img) {
  auto h1 = ad::leakyRelu(convDown(d.c1, img), kLReluSlope);
  auto h2 = ad::leakyRelu(convDown(d.c2, h1), kLReluSlope);
  auto h3 = ad::leakyRelu(convDown(d.c3, h2), kLReluSlope);
  return ad::conv2d(h3, wrapped(d.c4.k.weights), wrapped(d.c4.k.bias));
}

ad::Var BidirGraph::totalG(const LossWeights& w) const {
  auto latent = ad::add(ad::add(styleRecAB, styleRecBA),
                        ad::add(contentRecAB, contentRecBA));
  auto pixel =
      ad::add(ad::add(cycA, cycB), ad::add(idA, idB));
  return ad::add(ad::add(gAdvA, gAdvB),
                 ad::add(ad::scale(latent, w.lambdaLatent),
                         ad::scale(pixel, w.lambdaPixel)));
}

BidirGraph buildGeneratorGraph(ModelGraph& g, TranslationModel& m,
                               const ad::Var& xA, const ad::Var& xB) {
  BidirGraph out;

  auto zcA = g.contentEncode(m.ecA, xA);
  auto zsA = g.styleEncode(m.esA, xA);
  auto zcB = g.contentEncode(m.ecB, xB);
  auto zsB = g.styleEncode(m.esB, xB);

  out.xAB = g.decode(m.gB, zcA, zsB);
  out.xBA = g.decode(m.gA, zcB, zsA);

  // cycle: re-encode the fake in its new domain, decode back with the
  // original style
  auto zcAB = g.contentEncode(m.ecB, out.xAB);
  auto zsAB = g.styleEncode(m.esB, out.xAB);
  auto zcBA = g.contentEncode(m.ecA, out.xBA);
  auto zsBA = g.styleEncode(m.esA, out.xBA);
  auto xABA = g.decode(m.gA, zcAB, zsA);
  auto xBAB = g.decode(m.gB, zcBA, zsB);

  // identity: decode an image from its own content and style
  auto xAA = g.decode(m.gA, zcA, zsA);
  auto xBB = g.decode(m.gB, zcB, zsB);

  out.cycA = ad::l1Loss(xABA, xA);
  out.cycB = ad::l1Loss(xBAB, xB);
  out.idA = ad::l1Loss(xAA, xA);
  out.idB = ad::l1Loss(xBB, xB);
  out.styleRecAB = ad::l1Loss(zsAB, zsB);
  out.styleRecBA = ad::l1Loss(zsBA, zsA);
  out.contentRecAB = ad::l1Loss(zcAB, zcA);
  out.contentRecBA = ad::l1Loss(zcBA, zcB);

  out.gAdvA =
      ad::scale(ad::squaredErrorMean(g.discriminate(m.dA, out.xBA), 1.0), 0.5);
  out.gAdvB =
      ad::scale(ad::squaredErrorMean(g.discriminate(m.dB, out.xAB), 1.0), 0.5);
  return out;
}

double lsganDLoss(const TensorD& dReal, const TensorD& dFake) {
  double lossReal = 0, lossFake = 0;
  for (int64_t i = 0; i < dReal.numel(); ++i)
    lossReal += (dReal[i] - 1.0) * (dReal[i] - 1.0);
  for (int64_t i = 0; i < dFake.numel(); ++i) lossFake += dFake[i] * dFake[i];
  return 0.5 * lossReal / static_cast<double>(dReal.numel()) +
         0.5 * lossFake / static_cast<double>(dFake.numel());
}

double lsganGLoss(const TensorD& dFake) {
  double loss = 0;
  for (int64_t i = 0; i < dFake.numel(); ++i)
    loss += (dFake[i] - 1.0) * (dFake[i] - 1.0);
  return 0.5 * loss / static_cast<double>(dFake.numel());
}

// ---------------------------------------------------------------------------
// evaluation-only operations

namespace {

// generator forward without gradients; returns the two fake images
std::pair<TensorD, TensorD> translateValues(TranslationModel& m,
                                            const TensorD& xA,
                                            const TensorD& xB) {
  ModelGraph g(m, false, false);
  auto vxA = ad::constant(xA), vxB = ad::constant(xB);
  auto zcA = g.contentEncode(m.ecA, vxA);
  auto zsA = g.styleEncode(m.esA, vxA);
  auto zcB = g.contentEncode(m.ecB, vxB);
  auto zsB = g.styleEncode(m.esB, vxB);
  auto xAB = g.decode(m.gB, zcA, zsB);
  auto xBA = g.decode(m.gA, zcB, zsA);
  return {xAB->value, xBA->value};
}

}  // namespace

std::pair<TensorD, TensorD> translate(TranslationModel& m, const TensorD& xA,
                                      const TensorD& xB) {
  validateImage(xA, m.imageSize, "translate");
  validateImage(xB, m.imageSize, "translate");
  return translateValues(m, xA, xB);
}

PixelLosses lossPixel(TranslationModel& m, const TensorD& xA,
                      const TensorD& xB) {
  ModelGraph g(m, false, false);
  BidirGraph bg =
      buildGeneratorGraph(g, m, ad::constant(xA), ad::constant(xB));
  return {bg.cycA->value[0] + bg.cycB->value[0], bg.idA->value[0],
          bg.idB->value[0]};
}

LatentLosses lossLatent(TranslationModel& m, const TensorD& xA,
                        const TensorD& xB) {
  ModelGraph g(m, false, false);
  BidirGraph bg =
      buildGeneratorGraph(g, m, ad::constant(xA), ad::constant(xB));
  return {bg.styleRecAB->value[0] + bg.styleRecBA->value[0],
          bg.contentRecAB->value[0] + bg.contentRecBA->value[0]};
}

AdvLosses lossAdversarial(TranslationModel& m, const TensorD& xA,
                          const TensorD& xB) {
  auto [xAB, xBA] = translateValues(m, xA, xB);
  ModelGraph g(m, false, false);
  TensorD dRealA = g.discriminate(m.dA, ad::constant(xA))->value;
  TensorD dRealB = g.discriminate(m.dB, ad::constant(xB))->value;
  TensorD dFakeA = g.discriminate(m.dA, ad::constant(xBA))->value;
  TensorD dFakeB = g.discriminate(m.dB, ad::constant(xAB))->value;
  return {lsganDLoss(dRealA, dFakeA) + lsganDLoss(dRealB, dFakeB),
          lsganGLoss(dFakeA) + lsganGLoss(dFakeB)};
}

// ---------------------------------------------------------------------------
// training

namespace {

std::string diagnosticDump(TranslationModel& m, const StepMetrics& metrics) {
  std::ostringstream ss;
  ss << "step=" << metrics.step << " lD=" << metrics.lD
     << " lG=" << metrics.lG << " lCyc=" << metrics.lCyc
     << " lId=" << metrics.lId << " lS=" << metrics.lS
     << " lC=" << metrics.lC << " lr=" << metrics.lr << "\n";
  for (auto& [name, t] : allParams(m))
    ss << name << " l2=" << normL2(*t) << "\n";
  return ss.str();
}

}  // namespace

StepMetrics trainStep(TranslationModel& m, Adam& optD, Adam& optG,
                      const TensorD& xA, const TensorD& xB,
                      const TrainConfig& cfg, const LossWeights& w,
                      int64_t step) {
  StepMetrics metrics;
  metrics.step = step;
  metrics.lr = lrAt(cfg, step);

  // discriminator phase: fakes from the current generator, detached
  auto [xAB, xBA] = translateValues(m, xA, xB);
  {
    ModelGraph g(m, false, true);
    auto dAdvA = ad::add(
        ad::scale(
            ad::squaredErrorMean(g.discriminate(m.dA, ad::constant(xA)), 1.0),
            0.5),
        ad::scale(
            ad::squaredErrorMean(g.discriminate(m.dA, ad::constant(xBA)), 0.0),
            0.5));
    auto dAdvB = ad::add(
        ad::scale(
            ad::squaredErrorMean(g.discriminate(m.dB, ad::constant(xB)), 1.0),
            0.5),
        ad::scale(
            ad::squaredErrorMean(g.discriminate(m.dB, ad::constant(xAB)), 0.0),
            0.5));
    auto lD = ad::add(dAdvA, dAdvB);
    ad::backward(lD);
    metrics.lD = lD->value[0];

    std::vector<TensorD*> params;
    std::vector<const TensorD*> grads;
    for (auto& [name, t] : discriminatorParams(m)) {
      params.push_back(t);
      grads.push_back(&g.gradOf(*t));
    }
    optD.step(params, grads, metrics.lr);
  }

  // generator phase against the updated discriminator
  {
    ModelGraph g(m, true, false);
    BidirGraph bg =
        buildGeneratorGraph(g, m, ad::constant(xA), ad::constant(xB));
    auto lG = bg.totalG(w);
    ad::backward(lG);
    metrics.lG = lG->value[0];
    metrics.lCyc = bg.cycA->value[0] + bg.cycB->value[0];
    metrics.lId = bg.idA->value[0] + bg.idB->value[0];
    metrics.lS = bg.styleRecAB->value[0] + bg.styleRecBA->value[0];
    metrics.lC = bg.contentRecAB->value[0] + bg.contentRecBA->value[0];

    std::vector<TensorD*> params;
    std::vector<const TensorD*> grads;
    for (auto& [name, t] : generatorParams(m)) {
      params.push_back(t);
      grads.push_back(&g.gradOf(*t));
    }
    optG.step(params, grads, metrics.lr);
  }

  for (double v : {metrics.lD, metrics.lG, metrics.lCyc, metrics.lId,
                   metrics.lS, metrics.lC})
    if (std::isnan(v))
      throw TrainDivergence("trainStep: NaN loss at step " +
                                std::to_string(step),
                            diagnosticDump(m, metrics));
  return metrics;
}

void writeMetricsCsv(const std::vector<StepMetrics>& metrics,
                     const std::string& path) {
  std::ofstream os(path);
  checkArg(static_cast<bool>(os), "metrics: cannot write " + path);
  // the only timestamped line in any output file
  std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ",
                std::gmtime(&now));
  os << "# stylenorm metrics " << stamp << "\n";
  os << "step,lD,lG,lCyc,lId,lS,lC,lr\n";
  char line[512];
  for (const auto& s : metrics) {
    std::snprintf(line, sizeof line,
                  "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(s.step), s.lD, s.lG, s.lCyc, s.lId,
                  s.lS, s.lC, s.lr);
    os << line;
  }
}

TrainResult trainRun(const RunConfig& cfg, const std::string& outDir) {
  namespace fs = std::filesystem;
  cfg.train.validate();
  cfg.weights.validate();
  cfg.adacon.validate();
  checkArg(cfg.synth.imageSize == cfg.train.imageSize,
           "trainRun: synth and train image sizes differ");

  SyntheticDomainSpec synth = cfg.synth;
  synth.seed = deriveSeed(cfg.train.seed, 0xDA7A);
  auto [dataA, dataB] = makeSyntheticDataset(synth);

  TranslationModel model = makeTranslationModel(
      cfg.adacon, cfg.train.imageSize, cfg.train.seed);
  Adam optD(cfg.train.beta1, cfg.train.beta2);
  Adam optG(cfg.train.beta1, cfg.train.beta2);
  Rng sampler(deriveSeed(cfg.train.seed, 0x5A3Bu));

  TrainResult result;
  result.metrics.reserve(static_cast<size_t>(cfg.train.steps));
  for (int64_t step = 0; step < cfg.train.steps; ++step) {
    const TensorD& xA = dataA[sampler.below(dataA.size())];
    const TensorD& xB = dataB[sampler.below(dataB.size())];
    try {
      result.metrics.push_back(
          trainStep(model, optD, optG, xA, xB, cfg.train, cfg.weights, step));
    } catch (const TrainDivergence& e) {
      if (!outDir.empty()) {
        fs::create_directories(outDir);
        std::ofstream os(fs::path(outDir) / "diagnostic.txt");
        os << e.what() << "\n" << e.dump;
      }
      throw;
    }
  }

  if (!outDir.empty()) {
    fs::create_directories(outDir);
    writeMetricsCsv(result.metrics,
                    (fs::path(outDir) / "metrics.csv").string());
    saveCheckpoint(model, cfg, (fs::path(outDir) / "checkpoint").string());
  }
  return result;
}

}  // namespace stylenorm
