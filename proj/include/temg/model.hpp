#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "temg/graph.hpp"
#include "temg/matrix.hpp"
#include "temg/motifs.hpp"
#include "temg/taxonomy.hpp"

namespace temg {

enum class Backbone : uint8_t { gcn = 0, sage_mean = 1 };

struct ModelConfig {
  Backbone backbone = Backbone::gcn;
  int layers = 2;          // message-passing layers
  int hidden = 64;         // d_h: motif embedding and layer width
  int input_dim = kBaseFeatureDim;
  int head_hidden = 32;    // width of the scoring head's hidden layer
  int fusion_depth = 2;    // 0 = identity, 1 = one affine+relu, 2 = two layers
  double dropout = 0.1;    // feature dropout in train mode
  bool log1p_counts = false;  // squash motif counts before projection
  uint64_t seed = 1;
};

void validate(const ModelConfig& cfg);

// All learnable tensors. Biases and weights alike are initialized uniformly
// in +-1/sqrt(hidden) from per-tensor seed streams.
struct ModelParams {
  ModelConfig cfg;

  Matrix prototypes;  // 36 x d_h, one embedding per motif class
  Matrix roles;       // 108 x d_h, one embedding per (class, role)
  Matrix omega;       // 1 x d_h, frequency of the edge-ordinal sinusoid
  Matrix theta;       // 1 x d_h, phase of the edge-ordinal sinusoid
  Matrix edge_w;      // 2 x d_h, affine on (is_src, is_dst), tanh-squashed
  Matrix edge_b;      // 1 x d_h

  Matrix fuse_w;      // d_in x d_h
  Matrix fuse_b;      // 1 x d_h
  Matrix fuse_w1;     // d_h x d_h   (fusion_depth >= 1)
  Matrix fuse_b1;     // 1 x d_h
  Matrix fuse_w2;     // d_h x d_h   (fusion_depth == 2)
  Matrix fuse_b2;     // 1 x d_h

  std::vector<Matrix> gnn_w;  // per layer: gcn d_h x d_h, sage 2*d_h x d_h
  std::vector<Matrix> gnn_b;  // per layer: 1 x d_h

  Matrix head_w1;     // d_h x head_hidden
  Matrix head_b1;     // 1 x head_hidden
  Matrix head_w2;     // head_hidden x 1
  Matrix head_b2;     // 1 x 1

  static ModelParams init(const ModelConfig& cfg);
  static ModelParams zeros_like(const ModelParams& p);

  // Stable name -> tensor listing (same order every call); the unit of
  // optimizer state, serialization, EMA and gradient checks.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
};

enum class Mode { train, eval };

struct ForwardCache {
  Matrix cs;                      // N x 108 counts as double
  Matrix varg;                    // 3 x d_h sinusoid arguments per edge ordinal
  Matrix es, ed;                  // 1 x d_h tanh outputs for src/dst indicator
  Matrix a0;                      // N x d_h fused affine input to the MLP
  Matrix fuse_mask1;              // relu mask of fusion layer 1
  Matrix fuse_r1;                 // relu output of fusion layer 1
  Matrix drop0;                   // dropout mask on fused features (may be empty)
  std::vector<Matrix> z_in;       // input of every message-passing layer
  std::vector<Matrix> agg;        // gcn: A_hat * Z; sage: [Z | nbr_mean(Z)]
  std::vector<Matrix> mask;       // relu masks of non-final layers
  std::vector<Matrix> drop;       // dropout masks of non-final layers
  Matrix hidden;                  // N x d_h final embeddings
  Matrix head_mask, head_r;       // head relu intermediates
};

struct ForwardResult {
  std::vector<double> logits;  // N
  Matrix hidden;               // N x d_h
  Matrix x_motif;              // N x d_h motif features before fusion
};

// Full differentiable pipeline: motif embedding table -> count projection ->
// feature fusion -> message passing -> scoring head. Aborts with the failing
// stage on non-finite activations.
ForwardResult forward(const ModelParams& p, const MessageGraph& mg,
                      const Matrix& x_orig, const CountMatrix& counts,
                      const MotifTaxonomy& tax, Mode mode, uint64_t drop_seed,
                      ForwardCache* cache = nullptr);

// Reverse pass over the cache. dlogits has one entry per node; dhidden_extra
// (optional, N x d_h) injects gradients that act directly on the final
// embeddings, as the adaptation losses do.
ModelParams backward(const ModelParams& p, const MessageGraph& mg,
                     const Matrix& x_orig, const MotifTaxonomy& tax,
                     const ForwardCache& cache, const std::vector<double>& dlogits,
                     const Matrix* dhidden_extra = nullptr);

// Numerically stable binary cross-entropy over a node subset.
double bce_loss(const std::vector<double>& logits, const std::vector<int8_t>& labels,
                const std::vector<uint32_t>& nodes);
std::vector<double> bce_grad(const std::vector<double>& logits,
                             const std::vector<int8_t>& labels,
                             const std::vector<uint32_t>& nodes);

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Adam with bias correction (0.9 / 0.999 / 1e-8).
class Adam {
 public:
  Adam(const ModelParams& like, double lr);
  void step(ModelParams& params, const ModelParams& grads);
  double lr() const { return lr_; }

 private:
  double lr_;
  int64_t t_ = 0;
  ModelParams m_, v_;
};

// Binary checkpoint, magic TEMGMDL. provenance: 0 = pre-trained, 1 = adapted.
void save_checkpoint(const ModelParams& p, const std::string& path,
                     uint8_t provenance);
struct LoadedCheckpoint {
  ModelParams params;
  uint8_t provenance = 0;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace temg
