#include "stylenorm/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stylenorm {

using nlohmann::json;

double lrAt(const TrainConfig& cfg, int64_t step) {
  if (step < cfg.decayStart) return cfg.lr;
  int64_t halvings = 1 + (step - cfg.decayStart) / cfg.decayEvery;
  return cfg.lr * std::pow(0.5, static_cast<double>(halvings));
}

RunConfig defaultRunConfig() {
  RunConfig cfg;
  cfg.adacon.C = 64;
  cfg.adacon.O = 64;
  cfg.adacon.fuseOut = 64;
  cfg.synth = defaultSynthSpec();
  return cfg;
}

namespace {

json styleToJson(const DomainStyle& s) {
  json j;
  j["palette"] = s.palette;
  j["texture"] = s.texture;
  j["textureAmp"] = s.textureAmp;
  j["background"] = s.background;
  return j;
}

DomainStyle styleFromJson(const json& j, const DomainStyle& defaults) {
  DomainStyle s = defaults;
  if (j.contains("palette"))
    s.palette = j.at("palette").get<std::vector<std::array<double, 3>>>();
  s.texture = j.value("texture", defaults.texture);
  s.textureAmp = j.value("textureAmp", defaults.textureAmp);
  if (j.contains("background"))
    s.background = j.at("background").get<std::array<double, 3>>();
  return s;
}

json synthToJson(const SyntheticDomainSpec& s) {
  json j;
  j["imageSize"] = s.imageSize;
  j["count"] = s.count;
  j["seed"] = s.seed;
  j["domainA"] = styleToJson(s.domainA);
  j["domainB"] = styleToJson(s.domainB);
  return j;
}

SyntheticDomainSpec synthFromJson(const json& j,
                                  const SyntheticDomainSpec& defaults) {
  SyntheticDomainSpec s = defaults;
  s.imageSize = j.value("imageSize", defaults.imageSize);
  s.count = j.value("count", defaults.count);
  s.seed = j.value("seed", defaults.seed);
  if (j.contains("domainA"))
    s.domainA = styleFromJson(j.at("domainA"), defaults.domainA);
  if (j.contains("domainB"))
    s.domainB = styleFromJson(j.at("domainB"), defaults.domainB);
  return s;
}

}  // namespace

std::string runConfigToJson(const RunConfig& cfg) {
  json j;
  j["train"] = {{"lr", cfg.train.lr},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"batch", cfg.train.batch},
                {"decayStart", cfg.train.decayStart},
                {"decayEvery", cfg.train.decayEvery},
                {"seed", cfg.train.seed},
                {"steps", cfg.train.steps},
                {"imageSize", cfg.train.imageSize}};
  j["weights"] = {{"lambdaLatent", cfg.weights.lambdaLatent},
                  {"lambdaPixel", cfg.weights.lambdaPixel}};
  j["adacon"] = {{"C", cfg.adacon.C},     {"O", cfg.adacon.O},
                 {"kH", cfg.adacon.kH},   {"kW", cfg.adacon.kW},
                 {"ds", cfg.adacon.ds},   {"fuseOut", cfg.adacon.fuseOut},
                 {"eps", cfg.adacon.eps}};
  j["synth"] = synthToJson(cfg.synth);
  return j.dump(2);
}

RunConfig runConfigFromJson(const std::string& text) {
  json j = json::parse(text);
  RunConfig defaults = defaultRunConfig();
  RunConfig cfg = defaults;
  if (j.contains("train")) {
    const json& t = j.at("train");
    cfg.train.lr = t.value("lr", defaults.train.lr);
    cfg.train.beta1 = t.value("beta1", defaults.train.beta1);
    cfg.train.beta2 = t.value("beta2", defaults.train.beta2);
    cfg.train.batch = t.value("batch", defaults.train.batch);
    cfg.train.decayStart = t.value("decayStart", defaults.train.decayStart);
    cfg.train.decayEvery = t.value("decayEvery", defaults.train.decayEvery);
    cfg.train.seed = t.value("seed", defaults.train.seed);
    cfg.train.steps = t.value("steps", defaults.train.steps);
    cfg.train.imageSize = t.value("imageSize", defaults.train.imageSize);
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    cfg.weights.lambdaLatent =
        w.value("lambdaLatent", defaults.weights.lambdaLatent);
    cfg.weights.lambdaPixel =
        w.value("lambdaPixel", defaults.weights.lambdaPixel);
  }
  if (j.contains("adacon")) {
    const json& a = j.at("adacon");
    cfg.adacon.C = a.value("C", defaults.adacon.C);
    cfg.adacon.O = a.value("O", defaults.adacon.O);
    cfg.adacon.kH = a.value("kH", defaults.adacon.kH);
    cfg.adacon.kW = a.value("kW", defaults.adacon.kW);
    cfg.adacon.ds = a.value("ds", defaults.adacon.ds);
    cfg.adacon.fuseOut = a.value("fuseOut", defaults.adacon.fuseOut);
    cfg.adacon.eps = a.value("eps", defaults.adacon.eps);
  }
  if (j.contains("synth")) cfg.synth = synthFromJson(j.at("synth"), defaults.synth);
  cfg.train.validate();
  cfg.weights.validate();
  cfg.adacon.validate();
  return cfg;
}

RunConfig loadRunConfig(const std::string& path) {
  std::ifstream is(path);
  checkArg(static_cast<bool>(is), "config: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return runConfigFromJson(ss.str());
}

void saveRunConfig(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  checkArg(static_cast<bool>(os), "config: cannot write " + path);
  os << runConfigToJson(cfg) << "\n";
}

SyntheticDomainSpec synthSpecFromJsonFile(const std::string& path) {
  std::ifstream is(path);
  checkArg(static_cast<bool>(is), "synth spec: cannot open " + path);
  json j = json::parse(is);
  return synthFromJson(j, defaultSynthSpec());
}

std::string synthSpecToJson(const SyntheticDomainSpec& spec) {
  return synthToJson(spec).dump(2);
}

}  // namespace stylenorm
