#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace nmlsdr {

enum class GraphKind { kKnn, kRbf };
enum class Method { kNmlsdr, kMddmp, kPca };

// semi: propagate again on the embedding and train ML-kNN on the hardened
// result. supervised: train ML-kNN on the embedding with the true labels.
enum class EvalProtocol { kSemi, kSupervised };

struct GraphConfig {
  GraphKind kind = GraphKind::kKnn;
  int k = 10;
  double sigma = 1.0;
};

struct NoiseConfig {
  double flip_fraction = 0.1;
  double labeled_fraction = 0.5;
};

struct PipelineConfig {
  GraphConfig graph;
  double alpha_labeled = 0.6;
  double alpha_unlabeled = 0.999;
  int d = 0;  // 0 means the number of classes C
  int mlknn_k = 10;
  double mlknn_smoothing = 1.0;
  NoiseConfig noise;
  std::uint64_t seed = 0;
  Method method = Method::kNmlsdr;
  EvalProtocol eval = EvalProtocol::kSemi;

  // Throws ConfigError when a hyper-parameter is outside its domain.
  // `num_classes` (when > 0) also bounds d.
  void Validate(long num_classes = 0) const;

  int ResolvedDim(long num_classes) const {
    return d > 0 ? d : static_cast<int>(num_classes);
  }
};

const char* MethodName(Method method);
Method ParseMethod(const std::string& name);
const char* GraphKindName(GraphKind kind);
const char* EvalProtocolName(EvalProtocol eval);

nlohmann::json ToJson(const PipelineConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& json);

}  // namespace nmlsdr
