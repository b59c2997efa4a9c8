#include "holmes/model.hpp"

#include <string>

#include "holmes/error.hpp"

namespace holmes {

double ModelSpec::derived_layer_mem_gb() const {
  const double h = hidden;
  const double weights = 12.0 * h * h * bytes_per_param;
  const double activations = static_cast<double>(micro_batch) * seq_len * h * 34.0;
  return (weights + activations) / 1e9;
}

int ModelSpec::micro_batches(const ParallelConfig& cfg) const {
  if (cfg.d < 1 || micro_batch < 1 || global_batch % (micro_batch * cfg.d) != 0) {
    throw Error(ErrorCode::kInvalidModel,
                "global batch " + std::to_string(global_batch) +
                    " does not split into micro-batches of " +
                    std::to_string(micro_batch) + " over " +
                    std::to_string(cfg.d) + " data-parallel replicas");
  }
  return global_batch / (micro_batch * cfg.d);
}

std::vector<Diagnostic> validate_model(const ModelSpec& model,
                                       const ParallelConfig& cfg) {
  std::vector<Diagnostic> out;
  if (model.layers < 1 || model.hidden < 1 || model.heads < 1 ||
      model.seq_len < 1 || model.vocab < 0 || model.global_batch < 1 ||
      model.micro_batch < 1 || model.bytes_per_param < 1) {
    out.push_back({"MODEL_NONPOSITIVE", "model dimensions must be positive"});
    return out;
  }
  if (model.layers < cfg.p) {
    out.push_back({"LAYERS_LT_STAGES",
                   std::to_string(model.layers) + " layers cannot fill " +
                       std::to_string(cfg.p) + " pipeline stages"});
  }
  if (cfg.d >= 1 && model.global_batch % (model.micro_batch * cfg.d) != 0) {
    out.push_back({"BATCH_SPLIT",
                   "micro-batch " + std::to_string(model.micro_batch) +
                       " does not divide the per-replica batch " +
                       std::to_string(model.global_batch) + "/" +
                       std::to_string(cfg.d)});
  }
  if (model.per_layer_mem_gb && !(*model.per_layer_mem_gb > 0.0)) {
    out.push_back({"MODEL_NONPOSITIVE", "per_layer_mem_gb must be positive"});
  }
  return out;
}

double flops_per_iteration(const ModelSpec& model) {
  const double batch = model.global_batch;
  const double s = model.seq_len;
  const double layers = model.layers;
  const double h = model.hidden;
  const double v = model.vocab;
  return 96.0 * batch * s * layers * h * h *
         (1.0 + s / (6.0 * h) + v / (16.0 * layers * h));
}

}  // namespace holmes
