#include "nmlsdr/config.hpp"

#include <set>

#include "nmlsdr/error.hpp"

namespace nmlsdr {
namespace {

void RejectUnknownKeys(const nlohmann::json& json,
                       const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [key, value] : json.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void Read(const nlohmann::json& json, const char* key, T& out) {
  if (!json.contains(key)) return;
  try {
    out = json.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

}  // namespace

const char* MethodName(Method method) {
  switch (method) {
    case Method::kNmlsdr:
      return "nmlsdr";
    case Method::kMddmp:
      return "mddmp";
    case Method::kPca:
      return "pca";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  if (name == "nmlsdr") return Method::kNmlsdr;
  if (name == "mddmp") return Method::kMddmp;
  if (name == "pca") return Method::kPca;
  throw ConfigError("unknown method '" + name + "' (nmlsdr|mddmp|pca)");
}

const char* GraphKindName(GraphKind kind) {
  return kind == GraphKind::kKnn ? "knn" : "rbf";
}

const char* EvalProtocolName(EvalProtocol eval) {
  return eval == EvalProtocol::kSemi ? "semi" : "supervised";
}

void PipelineConfig::Validate(long num_classes) const {
  if (graph.k < 1) throw ConfigError("graph.k must be >= 1");
  if (graph.kind == GraphKind::kRbf && !(graph.sigma > 0.0)) {
    throw ConfigError("graph.sigma must be > 0");
  }
  for (double a : {alpha_labeled, alpha_unlabeled}) {
    if (!(a >= 0.0 && a < 1.0)) throw ConfigError("alpha must lie in [0, 1)");
  }
  if (d < 0) throw ConfigError("d must be >= 0 (0 selects C)");
  if (num_classes > 0 && d > num_classes) {
    throw ConfigError("d=" + std::to_string(d) + " exceeds the number of classes " +
                      std::to_string(num_classes));
  }
  if (mlknn_k < 1) throw ConfigError("mlknn_k must be >= 1");
  if (!(mlknn_smoothing > 0.0)) throw ConfigError("mlknn_smoothing must be > 0");
  if (!(noise.flip_fraction >= 0.0 && noise.flip_fraction < 1.0)) {
    throw ConfigError("noise.flip_fraction must lie in [0, 1)");
  }
  if (!(noise.labeled_fraction > 0.0 && noise.labeled_fraction <= 1.0)) {
    throw ConfigError("noise.labeled_fraction must lie in (0, 1]");
  }
}

nlohmann::json ToJson(const PipelineConfig& config) {
  return {
      {"graph",
       {{"kind", GraphKindName(config.graph.kind)},
        {"k", config.graph.k},
        {"sigma", config.graph.sigma}}},
      {"alpha_labeled", config.alpha_labeled},
      {"alpha_unlabeled", config.alpha_unlabeled},
      {"d", config.d},
      {"mlknn_k", config.mlknn_k},
      {"mlknn_smoothing", config.mlknn_smoothing},
      {"noise",
       {{"flip_fraction", config.noise.flip_fraction},
        {"labeled_fraction", config.noise.labeled_fraction}}},
      {"seed", config.seed},
      {"method", MethodName(config.method)},
      {"eval", EvalProtocolName(config.eval)},
  };
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& json) {
  if (!json.is_object()) throw ConfigError("pipeline config must be an object");
  RejectUnknownKeys(json,
                    {"graph", "alpha_labeled", "alpha_unlabeled", "d",
                     "mlknn_k", "mlknn_smoothing", "noise", "seed", "method",
                     "eval"},
                    "pipeline config");
  PipelineConfig config;
  if (json.contains("graph")) {
    const auto& g = json["graph"];
    if (!g.is_object()) throw ConfigError("'graph' must be an object");
    RejectUnknownKeys(g, {"kind", "k", "sigma"}, "graph");
    std::string kind = GraphKindName(config.graph.kind);
    Read(g, "kind", kind);
    if (kind == "knn") {
      config.graph.kind = GraphKind::kKnn;
    } else if (kind == "rbf") {
      config.graph.kind = GraphKind::kRbf;
    } else {
      throw ConfigError("graph.kind must be knn or rbf");
    }
    Read(g, "k", config.graph.k);
    Read(g, "sigma", config.graph.sigma);
  }
  Read(json, "alpha_labeled", config.alpha_labeled);
  Read(json, "alpha_unlabeled", config.alpha_unlabeled);
  Read(json, "d", config.d);
  Read(json, "mlknn_k", config.mlknn_k);
  Read(json, "mlknn_smoothing", config.mlknn_smoothing);
  if (json.contains("noise")) {
    const auto& n = json["noise"];
    if (!n.is_object()) throw ConfigError("'noise' must be an object");
    RejectUnknownKeys(n, {"flip_fraction", "labeled_fraction"}, "noise");
    Read(n, "flip_fraction", config.noise.flip_fraction);
    Read(n, "labeled_fraction", config.noise.labeled_fraction);
  }
  Read(json, "seed", config.seed);
  std::string method = MethodName(config.method);
  Read(json, "method", method);
  config.method = ParseMethod(method);
  std::string eval = EvalProtocolName(config.eval);
  Read(json, "eval", eval);
  if (eval == "semi") {
    config.eval = EvalProtocol::kSemi;
  } else if (eval == "supervised") {
    config.eval = EvalProtocol::kSupervised;
  } else {
    throw ConfigError("eval must be semi or supervised");
  }
  config.Validate();
  return config;
}

}  // namespace nmlsdr
