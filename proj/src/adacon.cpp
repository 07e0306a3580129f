#include "stylenorm/adacon.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "stylenorm/tensor_io.hpp"

namespace stylenorm {

namespace {

AdaptiveKernel<double> makeConv(int outCh, int inCh, int kH, int kW,
                                Rng& rng) {
  // He-normal fan-in init, zero bias
  double stddev = std::sqrt(2.0 / (static_cast<double>(inCh) * kH * kW));
  AdaptiveKernel<double> k;
  k.weights = randNormal<double>({outCh, inCh, kH, kW}, rng, 0.0, stddev);
  k.bias = TensorD({outCh});
  return k;
}

}  // namespace

AdaConBlock makeAdaConBlock(const AdaConConfig& cfg, Rng& rng) {
  cfg.validate();
  AdaConBlock b;
  b.config = cfg;
  b.psi =
      makePsiEncoder<double>(cfg.C, cfg.O, cfg.kH, cfg.kW, cfg.ds, rng);
  b.contentConv = makeConv(cfg.C, cfg.C, 3, 3, rng);
  b.fuseConv = makeConv(cfg.fuseOut, cfg.O + cfg.C, 1, 1, rng);
  return b;
}

TensorD adaconStyleBranch(const AdaConBlock& b, const TensorD& zc,
                          const StyleCode<double>& zs) {
  const auto& c = b.config;
  checkArg(zc.rank() == 4 && zc.dim(1) == c.C,
           "adacon: content channel mismatch");
  checkArg(zs.code.numel() == c.ds, "adacon: style code length mismatch");
  auto k = psiForward(b.psi, zs, c.C, c.O, c.kH, c.kW);
  return adaptiveConv(standardizeLocal(zc, c.kH, c.kW, c.eps), k);
}

TensorD adaconContentBranch(const AdaConBlock& b, const TensorD& zc) {
  checkArg(zc.rank() == 4 && zc.dim(1) == b.config.C,
           "adacon: content channel mismatch");
  return conv2d(zc, b.contentConv);
}

TensorD adaconForward(const AdaConBlock& b, const TensorD& zc,
                      const StyleCode<double>& zs) {
  return conv2d(concatChannels(adaconStyleBranch(b, zc, zs),
                               adaconContentBranch(b, zc)),
                b.fuseConv);
}

double styleSensitivity(const AdaConBlock& b, const TensorD& zc,
                        const StyleCode<double>& zs1,
                        const StyleCode<double>& zs2) {
  TensorD y1 = adaconForward(b, zc, zs1);
  TensorD y2 = adaconForward(b, zc, zs2);
  double ref = normL2(y1);
  if (ref == 0.0) return 0.0;
  return normL2(sub(y1, y2)) / ref;
}

std::vector<std::pair<std::string, TensorD*>> blockParams(AdaConBlock& b) {
  return {
      {"psi.kernelWeight", &b.psi.kernelWeight},
      {"psi.kernelBias", &b.psi.kernelBias},
      {"psi.biasWeight", &b.psi.biasWeight},
      {"psi.biasBias", &b.psi.biasBias},
      {"contentConv.weights", &b.contentConv.weights},
      {"contentConv.bias", &b.contentConv.bias},
      {"fuseConv.weights", &b.fuseConv.weights},
      {"fuseConv.bias", &b.fuseConv.bias},
  };
}

void saveBlock(const AdaConBlock& b, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "stylenorm-adacon-block";
  manifest["version"] = 1;
  manifest["config"] = {{"C", b.config.C},     {"O", b.config.O},
                        {"kH", b.config.kH},   {"kW", b.config.kW},
                        {"ds", b.config.ds},   {"fuseOut", b.config.fuseOut},
                        {"eps", b.config.eps}};
  nlohmann::json tensors;
  auto params = blockParams(const_cast<AdaConBlock&>(b));
  for (auto& [name, t] : params) {
    std::string file = name + ".atns";
    saveAtns((fs::path(dir) / file).string(), *t);
    tensors[name] = file;
  }
  manifest["tensors"] = tensors;
  std::ofstream os(fs::path(dir) / "manifest.json");
  os << manifest.dump(2) << "\n";
}

AdaConBlock loadBlock(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "manifest.json");
  checkArg(static_cast<bool>(is), "loadBlock: missing manifest in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(is);
  checkArg(manifest.value("format", "") == "stylenorm-adacon-block",
           "loadBlock: unexpected manifest format");

  AdaConBlock b;
  const auto& c = manifest.at("config");
  b.config.C = c.at("C");
  b.config.O = c.at("O");
  b.config.kH = c.at("kH");
  b.config.kW = c.at("kW");
  b.config.ds = c.at("ds");
  b.config.fuseOut = c.at("fuseOut");
  b.config.eps = c.at("eps");
  b.config.validate();

  const auto& tensors = manifest.at("tensors");
  for (auto& [name, t] : blockParams(b)) {
    std::string file = tensors.at(name);
    *t = loadAtns<double>((fs::path(dir) / file).string());
  }
  return b;
}

}  // namespace stylenorm
