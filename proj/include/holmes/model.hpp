#pragma once

#include <optional>
#include <vector>

#include "holmes/groups.hpp"

namespace holmes {

// Sequence length and vocabulary are not part of the published parameter
// groups; these defaults are flagged wherever they are used.
inline constexpr int kDefaultSeqLen = 2048;
inline constexpr int kDefaultVocab = 51200;

struct ModelSpec {
  int layers = 0;
  int hidden = 0;
  int heads = 0;
  int seq_len = kDefaultSeqLen;
  int vocab = kDefaultVocab;
  int global_batch = 0;
  int micro_batch = 1;
  int bytes_per_param = 2;
  // Per-replica memory for one layer; derived when unset.
  std::optional<double> per_layer_mem_gb;

  // 12 h^2 parameters at bytes_per_param plus b*s*h*34 bytes of activations.
  double derived_layer_mem_gb() const;
  double layer_mem_gb() const {
    return per_layer_mem_gb ? *per_layer_mem_gb : derived_layer_mem_gb();
  }
  // Micro-batches each pipeline runs per iteration: B / (b * d).
  int micro_batches(const ParallelConfig& cfg) const;
};

// Model-level feasibility against a parallel config (L >= p, b | B/d, ...).
std::vector<Diagnostic> validate_model(const ModelSpec& model,
                                       const ParallelConfig& cfg);

// Training FLOPs of one iteration:
// 96 B s L h^2 (1 + s/(6h) + V/(16 L h)).
double flops_per_iteration(const ModelSpec& model);

}  // namespace holmes
