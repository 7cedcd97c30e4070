#include "temg/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "temg/common.hpp"
#include "temg/rng.hpp"

namespace temg {

void validate(const ModelConfig& cfg) {
  if (cfg.layers < 1) throw ConfigError("model needs at least one layer");
  if (cfg.hidden < 1) throw ConfigError("hidden width must be positive");
  if (cfg.input_dim < 1) throw ConfigError("input dim must be positive");
  if (cfg.head_hidden < 1) throw ConfigError("head width must be positive");
  if (cfg.fusion_depth < 0 || cfg.fusion_depth > 2)
    throw ConfigError("fusion depth must be 0, 1 or 2");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw ConfigError("dropout must be in [0,1)");
}

namespace {

// inc[class*3+role][edge] = 0 absent, 1 source, 2 destination
std::vector<std::array<uint8_t, 3>> role_incidence(const MotifTaxonomy& tax) {
  std::vector<std::array<uint8_t, 3>> inc(kMotifColumns, {0, 0, 0});
  for (int k = 0; k < kMotifClasses; ++k) {
    const MotifSignature& sig = tax.classes()[static_cast<size_t>(k)];
    for (int j = 0; j < 3; ++j) {
      inc[static_cast<size_t>(k * 3 + sig.edges[j][0])][j] = 1;
      inc[static_cast<size_t>(k * 3 + sig.edges[j][1])][j] = 2;
    }
  }
  return inc;
}

void check_finite(const Matrix& m, const std::string& stage) {
  if (!all_finite(m))
    throw std::runtime_error("non-finite activations at stage: " + stage);
}

Matrix dropout_mask(size_t rows, size_t cols, double p, uint64_t seed) {
  Matrix mask(rows, cols);
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& v : mask.raw()) v = rng.uniform() < p ? 0.0 : keep_scale;
  return mask;
}

// A_hat * Z over the CSR rows; column order is fixed, so the accumulation
// order per output element never depends on threading.
Matrix spmm(const MessageGraph& mg, const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  const size_t C = z.cols();
#pragma omp parallel for schedule(static)
  for (int64_t vi = 0; vi < static_cast<int64_t>(mg.n); ++vi) {
    const size_t v = static_cast<size_t>(vi);
    double* ov = out.row(v);
    for (size_t e = mg.row_ptr[v]; e < mg.row_ptr[v + 1]; ++e) {
      const double w = mg.weight[e];
      const double* zr = z.row(mg.col[e]);
      for (size_t c = 0; c < C; ++c) ov[c] += w * zr[c];
    }
  }
  return out;
}

Matrix neighbor_mean(const MessageGraph& mg, const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  const size_t C = z.cols();
#pragma omp parallel for schedule(static)
  for (int64_t vi = 0; vi < static_cast<int64_t>(mg.n); ++vi) {
    const size_t v = static_cast<size_t>(vi);
    const size_t deg = mg.nbr_ptr[v + 1] - mg.nbr_ptr[v];
    if (deg == 0) continue;  // isolated: zero vector
    double* ov = out.row(v);
    for (size_t e = mg.nbr_ptr[v]; e < mg.nbr_ptr[v + 1]; ++e) {
      const double* zr = z.row(mg.nbr[e]);
      for (size_t c = 0; c < C; ++c) ov[c] += zr[c];
    }
    const double inv = 1.0 / static_cast<double>(deg);
    for (size_t c = 0; c < C; ++c) ov[c] *= inv;
  }
  return out;
}

// adjoint of neighbor_mean: out[u] = sum_{v in N(u)} g[v] / deg(v)
Matrix neighbor_mean_backward(const MessageGraph& mg, const Matrix& g) {
  Matrix out(g.rows(), g.cols());
  const size_t C = g.cols();
  std::vector<double> inv_deg(mg.n, 0.0);
  for (size_t v = 0; v < mg.n; ++v) {
    size_t deg = mg.nbr_ptr[v + 1] - mg.nbr_ptr[v];
    if (deg > 0) inv_deg[v] = 1.0 / static_cast<double>(deg);
  }
#pragma omp parallel for schedule(static)
  for (int64_t ui = 0; ui < static_cast<int64_t>(mg.n); ++ui) {
    const size_t u = static_cast<size_t>(ui);
    double* ou = out.row(u);
    for (size_t e = mg.nbr_ptr[u]; e < mg.nbr_ptr[u + 1]; ++e) {
      const uint32_t v = mg.nbr[e];
      const double w = inv_deg[v];
      const double* gr = g.row(v);
      for (size_t c = 0; c < C; ++c) ou[c] += w * gr[c];
    }
  }
  return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    std::memcpy(out.row(i), a.row(i), a.cols() * sizeof(double));
    std::memcpy(out.row(i) + a.cols(), b.row(i), b.cols() * sizeof(double));
  }
  return out;
}

ModelParams allocate(const ModelConfig& cfg) {
  validate(cfg);
  const size_t dh = static_cast<size_t>(cfg.hidden);
  ModelParams p;
  p.cfg = cfg;
  p.prototypes = Matrix(kMotifClasses, dh);
  p.roles = Matrix(kMotifColumns, dh);
  p.omega = Matrix(1, dh);
  p.theta = Matrix(1, dh);
  p.edge_w = Matrix(2, dh);
  p.edge_b = Matrix(1, dh);
  p.fuse_w = Matrix(static_cast<size_t>(cfg.input_dim), dh);
  p.fuse_b = Matrix(1, dh);
  p.fuse_w1 = Matrix(dh, dh);
  p.fuse_b1 = Matrix(1, dh);
  p.fuse_w2 = Matrix(dh, dh);
  p.fuse_b2 = Matrix(1, dh);
  const size_t in_w = cfg.backbone == Backbone::sage_mean ? 2 * dh : dh;
  for (int l = 0; l < cfg.layers; ++l) {
    p.gnn_w.emplace_back(in_w, dh);
    p.gnn_b.emplace_back(1, dh);
  }
  p.head_w1 = Matrix(dh, static_cast<size_t>(cfg.head_hidden));
  p.head_b1 = Matrix(1, static_cast<size_t>(cfg.head_hidden));
  p.head_w2 = Matrix(static_cast<size_t>(cfg.head_hidden), 1);
  p.head_b2 = Matrix(1, 1);
  return p;
}

}  // namespace

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out = {
      {"prototypes", &prototypes}, {"roles", &roles},   {"omega", &omega},
      {"theta", &theta},           {"edge_w", &edge_w}, {"edge_b", &edge_b},
      {"fuse_w", &fuse_w},         {"fuse_b", &fuse_b}, {"fuse_w1", &fuse_w1},
      {"fuse_b1", &fuse_b1},       {"fuse_w2", &fuse_w2}, {"fuse_b2", &fuse_b2},
  };
  for (size_t l = 0; l < gnn_w.size(); ++l) {
    out.emplace_back("gnn_w" + std::to_string(l), &gnn_w[l]);
    out.emplace_back("gnn_b" + std::to_string(l), &gnn_b[l]);
  }
  out.emplace_back("head_w1", &head_w1);
  out.emplace_back("head_b1", &head_b1);
  out.emplace_back("head_w2", &head_w2);
  out.emplace_back("head_b2", &head_b2);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mut.size());
  for (auto& [name, m] : mut) out.emplace_back(name, m);
  return out;
}

ModelParams ModelParams::init(const ModelConfig& cfg) {
  ModelParams p = allocate(cfg);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  uint64_t ordinal = 0;
  for (auto& [name, t] : p.tensors()) {
    Rng rng(mix64(cfg.seed, 0x1417ULL, ordinal++));
    for (double& v : t->raw()) v = rng.uniform(-bound, bound);
  }
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& p) {
  ModelParams z = allocate(p.cfg);
  return z;
}

ForwardResult forward(const ModelParams& p, const MessageGraph& mg,
                      const Matrix& x_orig, const CountMatrix& counts,
                      const MotifTaxonomy& tax, Mode mode, uint64_t drop_seed,
                      ForwardCache* cache) {
  validate(p.cfg);
  const size_t n = mg.n;
  const size_t dh = static_cast<size_t>(p.cfg.hidden);
  if (x_orig.rows() != n || counts.n != n)
    throw ConfigError("forward: graph, features and counts disagree on node count");
  if (x_orig.cols() != static_cast<size_t>(p.cfg.input_dim))
    throw ConfigError("forward: feature dim " + std::to_string(x_orig.cols()) +
                      " does not match model input dim " +
                      std::to_string(p.cfg.input_dim));

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;

  // --- motif embedding table ---------------------------------------------
  // per-ordinal sinusoid + squashed endpoint-kind term, shared across classes
  c.varg = Matrix(3, dh);
  Matrix tj(3, dh);
  for (int j = 0; j < 3; ++j)
    for (size_t d = 0; d < dh; ++d) {
      double arg = p.omega(0, d) * static_cast<double>(j + 1) + p.theta(0, d);
      c.varg(static_cast<size_t>(j), d) = arg;
      tj(static_cast<size_t>(j), d) = std::sin(arg);
    }
  c.es = Matrix(1, dh);
  c.ed = Matrix(1, dh);
  for (size_t d = 0; d < dh; ++d) {
    c.es(0, d) = std::tanh(p.edge_w(0, d) + p.edge_b(0, d));
    c.ed(0, d) = std::tanh(p.edge_w(1, d) + p.edge_b(0, d));
  }
  auto inc = role_incidence(tax);
  Matrix hm(kMotifColumns, dh);
  for (int row = 0; row < kMotifColumns; ++row) {
    const int k = row / 3;
    double* hr = hm.row(static_cast<size_t>(row));
    const double* proto = p.prototypes.row(static_cast<size_t>(k));
    const double* role = p.roles.row(static_cast<size_t>(row));
    for (size_t d = 0; d < dh; ++d) hr[d] = proto[d] + role[d];
    for (int j = 0; j < 3; ++j) {
      uint8_t kind = inc[static_cast<size_t>(row)][j];
      if (kind == 0) continue;
      const double* t = tj.row(static_cast<size_t>(j));
      const double* e = kind == 1 ? c.es.row(0) : c.ed.row(0);
      for (size_t d = 0; d < dh; ++d) hr[d] += t[d] + e[d];
    }
  }
  check_finite(hm, "embedding-table");

  // --- count projection ----------------------------------------------------
  c.cs = Matrix(n, kMotifColumns);
  for (size_t v = 0; v < n; ++v) {
    const uint64_t* cr = counts.row(v);
    double* dr = c.cs.row(v);
    for (int col = 0; col < kMotifColumns; ++col) {
      double val = static_cast<double>(cr[col]);
      dr[col] = p.cfg.log1p_counts ? std::log1p(val) : val;
    }
  }
  Matrix xm = matmul(c.cs, hm);
  check_finite(xm, "count-projection");

  // --- fusion ---------------------------------------------------------------
  c.a0 = matmul(x_orig, p.fuse_w);
  add_row_vector_inplace(c.a0, p.fuse_b);
  add_inplace(c.a0, xm);
  Matrix x;
  if (p.cfg.fusion_depth == 0) {
    x = c.a0;
  } else {
    Matrix u1 = matmul(c.a0, p.fuse_w1);
    add_row_vector_inplace(u1, p.fuse_b1);
    c.fuse_mask1 = relu_mask(u1);
    c.fuse_r1 = relu(u1);
    if (p.cfg.fusion_depth == 1) {
      x = c.fuse_r1;
    } else {
      x = matmul(c.fuse_r1, p.fuse_w2);
      add_row_vector_inplace(x, p.fuse_b2);
    }
  }
  check_finite(x, "fusion");

  const bool use_dropout = mode == Mode::train && p.cfg.dropout > 0.0;
  if (use_dropout) {
    c.drop0 = dropout_mask(n, dh, p.cfg.dropout, mix64(drop_seed, 0xD0ULL));
    hadamard_inplace(x, c.drop0);
  } else {
    c.drop0 = Matrix();
  }

  // --- message passing -------------------------------------------------------
  c.z_in.clear();
  c.agg.clear();
  c.mask.clear();
  c.drop.clear();
  Matrix z = std::move(x);
  for (int l = 0; l < p.cfg.layers; ++l) {
    c.z_in.push_back(z);
    Matrix a;
    if (p.cfg.backbone == Backbone::gcn) {
      a = spmm(mg, z);
    } else {
      a = concat_cols(z, neighbor_mean(mg, z));
    }
    c.agg.push_back(a);
    Matrix u = matmul(a, p.gnn_w[static_cast<size_t>(l)]);
    add_row_vector_inplace(u, p.gnn_b[static_cast<size_t>(l)]);
    check_finite(u, "layer " + std::to_string(l));
    if (l + 1 < p.cfg.layers) {
      c.mask.push_back(relu_mask(u));
      Matrix r = relu(u);
      if (use_dropout) {
        Matrix dm = dropout_mask(n, dh, p.cfg.dropout,
                                 mix64(drop_seed, 0xD1ULL, static_cast<uint64_t>(l)));
        hadamard_inplace(r, dm);
        c.drop.push_back(std::move(dm));
      } else {
        c.drop.push_back(Matrix());
      }
      z = std::move(r);
    } else {
      z = std::move(u);  // final embeddings stay linear
    }
  }
  c.hidden = z;

  // --- scoring head -----------------------------------------------------------
  Matrix uh = matmul(c.hidden, p.head_w1);
  add_row_vector_inplace(uh, p.head_b1);
  c.head_mask = relu_mask(uh);
  c.head_r = relu(uh);
  Matrix lg = matmul(c.head_r, p.head_w2);
  add_row_vector_inplace(lg, p.head_b2);
  check_finite(lg, "head");

  ForwardResult out;
  out.logits.resize(n);
  for (size_t v = 0; v < n; ++v) out.logits[v] = lg(v, 0);
  out.hidden = c.hidden;
  out.x_motif = std::move(xm);
  return out;
}

ModelParams backward(const ModelParams& p, const MessageGraph& mg,
                     const Matrix& x_orig, const MotifTaxonomy& tax,
                     const ForwardCache& c, const std::vector<double>& dlogits,
                     const Matrix* dhidden_extra) {
  const size_t n = mg.n;
  const size_t dh = static_cast<size_t>(p.cfg.hidden);
  if (dlogits.size() != n) throw ConfigError("backward: dlogits size mismatch");
  ModelParams g = ModelParams::zeros_like(p);

  // head
  Matrix dlg(n, 1);
  for (size_t v = 0; v < n; ++v) dlg(v, 0) = dlogits[v];
  g.head_w2 = matmul_tn(c.head_r, dlg);
  g.head_b2 = column_sums(dlg);
  Matrix dhr = matmul_nt(dlg, p.head_w2);
  hadamard_inplace(dhr, c.head_mask);
  g.head_w1 = matmul_tn(c.hidden, dhr);
  g.head_b1 = column_sums(dhr);
  Matrix dhidden = matmul_nt(dhr, p.head_w1);
  if (dhidden_extra) {
    if (dhidden_extra->rows() != n || dhidden_extra->cols() != dh)
      throw ConfigError("backward: dhidden_extra shape mismatch");
    add_inplace(dhidden, *dhidden_extra);
  }

  // message passing, last layer first
  Matrix carry = std::move(dhidden);
  for (int l = p.cfg.layers - 1; l >= 0; --l) {
    const size_t ls = static_cast<size_t>(l);
    Matrix du = std::move(carry);
    if (l + 1 < p.cfg.layers) {
      if (!c.drop[ls].empty()) hadamard_inplace(du, c.drop[ls]);
      hadamard_inplace(du, c.mask[ls]);
    }
    g.gnn_w[ls] = matmul_tn(c.agg[ls], du);
    g.gnn_b[ls] = column_sums(du);
    Matrix da = matmul_nt(du, p.gnn_w[ls]);
    if (p.cfg.backbone == Backbone::gcn) {
      carry = spmm(mg, da);  // A_hat is symmetric
    } else {
      Matrix dz(n, dh);
      Matrix dnb(n, dh);
      for (size_t v = 0; v < n; ++v) {
        std::memcpy(dz.row(v), da.row(v), dh * sizeof(double));
        std::memcpy(dnb.row(v), da.row(v) + dh, dh * sizeof(double));
      }
      add_inplace(dz, neighbor_mean_backward(mg, dnb));
      carry = std::move(dz);
    }
  }

  // fused features
  Matrix dx = std::move(carry);
  if (!c.drop0.empty()) hadamard_inplace(dx, c.drop0);
  Matrix da0;
  if (p.cfg.fusion_depth == 0) {
    da0 = std::move(dx);
  } else if (p.cfg.fusion_depth == 1) {
    hadamard_inplace(dx, c.fuse_mask1);
    g.fuse_w1 = matmul_tn(c.a0, dx);
    g.fuse_b1 = column_sums(dx);
    da0 = matmul_nt(dx, p.fuse_w1);
  } else {
    g.fuse_w2 = matmul_tn(c.fuse_r1, dx);
    g.fuse_b2 = column_sums(dx);
    Matrix dr1 = matmul_nt(dx, p.fuse_w2);
    hadamard_inplace(dr1, c.fuse_mask1);
    g.fuse_w1 = matmul_tn(c.a0, dr1);
    g.fuse_b1 = column_sums(dr1);
    da0 = matmul_nt(dr1, p.fuse_w1);
  }
  g.fuse_w = matmul_tn(x_orig, da0);
  g.fuse_b = column_sums(da0);

  // count projection: Xm = Cs * Hm
  Matrix dhm = matmul_tn(c.cs, da0);

  // embedding table: Hm[row] = proto[row/3] + roles[row] + positional(row)
  g.roles = dhm;
  for (int k = 0; k < kMotifClasses; ++k) {
    double* gp = g.prototypes.row(static_cast<size_t>(k));
    for (int q = 0; q < 3; ++q) {
      const double* dr = dhm.row(static_cast<size_t>(k * 3 + q));
      for (size_t d = 0; d < dh; ++d) gp[d] += dr[d];
    }
  }
  auto inc = role_incidence(tax);
  Matrix dtj(3, dh);
  Matrix des(1, dh), ded(1, dh);
  for (int row = 0; row < kMotifColumns; ++row) {
    const double* dr = dhm.row(static_cast<size_t>(row));
    for (int j = 0; j < 3; ++j) {
      uint8_t kind = inc[static_cast<size_t>(row)][j];
      if (kind == 0) continue;
      double* t = dtj.row(static_cast<size_t>(j));
      double* e = kind == 1 ? des.row(0) : ded.row(0);
      for (size_t d = 0; d < dh; ++d) {
        t[d] += dr[d];
        e[d] += dr[d];
      }
    }
  }
  for (int j = 0; j < 3; ++j)
    for (size_t d = 0; d < dh; ++d) {
      double cosv = std::cos(c.varg(static_cast<size_t>(j), d));
      double gd = dtj(static_cast<size_t>(j), d) * cosv;
      g.omega(0, d) += gd * static_cast<double>(j + 1);
      g.theta(0, d) += gd;
    }
  for (size_t d = 0; d < dh; ++d) {
    double gs = des(0, d) * (1.0 - c.es(0, d) * c.es(0, d));
    double gd2 = ded(0, d) * (1.0 - c.ed(0, d) * c.ed(0, d));
    g.edge_w(0, d) += gs;
    g.edge_w(1, d) += gd2;
    g.edge_b(0, d) += gs + gd2;
  }
  return g;
}

double bce_loss(const std::vector<double>& logits, const std::vector<int8_t>& labels,
                const std::vector<uint32_t>& nodes) {
  if (nodes.empty()) throw ConfigError("bce over empty node set");
  double total = 0.0;
  for (uint32_t v : nodes) {
    if (labels[v] < 0)
      throw ConfigError("bce over unlabeled node " + std::to_string(v));
    double z = logits[v];
    double y = static_cast<double>(labels[v]);
    // softplus(z) - z*y, computed stably
    double sp = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    total += sp - z * y;
  }
  return total / static_cast<double>(nodes.size());
}

std::vector<double> bce_grad(const std::vector<double>& logits,
                             const std::vector<int8_t>& labels,
                             const std::vector<uint32_t>& nodes) {
  if (nodes.empty()) throw ConfigError("bce over empty node set");
  std::vector<double> d(logits.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(nodes.size());
  for (uint32_t v : nodes) {
    if (labels[v] < 0)
      throw ConfigError("bce over unlabeled node " + std::to_string(v));
    d[v] = (sigmoid(logits[v]) - static_cast<double>(labels[v])) * inv;
  }
  return d;
}

Adam::Adam(const ModelParams& like, double lr)
    : lr_(lr), m_(ModelParams::zeros_like(like)), v_(ModelParams::zeros_like(like)) {
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
}

void Adam::step(ModelParams& params, const ModelParams& grads) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto pt = params.tensors();
  auto gt = grads.tensors();
  auto mt = m_.tensors();
  auto vt = v_.tensors();
  for (size_t i = 0; i < pt.size(); ++i) {
    auto& pv = pt[i].second->raw();
    const auto& gv = gt[i].second->raw();
    auto& mv = mt[i].second->raw();
    auto& vv = vt[i].second->raw();
    for (size_t j = 0; j < pv.size(); ++j) {
      mv[j] = b1 * mv[j] + (1.0 - b1) * gv[j];
      vv[j] = b2 * vv[j] + (1.0 - b2) * gv[j] * gv[j];
      const double mhat = mv[j] / bc1;
      const double vhat = vv[j] / bc2;
      pv[j] -= lr_ * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

constexpr char kModelMagic[7] = {'T', 'E', 'M', 'G', 'M', 'D', 'L'};
constexpr uint16_t kModelVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& p, const std::string& path,
                     uint8_t provenance) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  os.write(kModelMagic, sizeof(kModelMagic));
  put<uint16_t>(os, kModelVersion);
  put<uint8_t>(os, provenance);
  put<uint8_t>(os, static_cast<uint8_t>(p.cfg.backbone));
  put<int32_t>(os, p.cfg.layers);
  put<int32_t>(os, p.cfg.hidden);
  put<int32_t>(os, p.cfg.input_dim);
  put<int32_t>(os, p.cfg.head_hidden);
  put<int32_t>(os, p.cfg.fusion_depth);
  put<double>(os, p.cfg.dropout);
  put<uint8_t>(os, p.cfg.log1p_counts ? 1 : 0);
  put<uint64_t>(os, p.cfg.seed);
  auto ts = p.tensors();
  put<uint32_t>(os, static_cast<uint32_t>(ts.size()));
  for (auto& [name, t] : ts) {
    put<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<uint64_t>(os, t->rows());
    put<uint64_t>(os, t->cols());
    os.write(reinterpret_cast<const char*>(t->data()),
             static_cast<std::streamsize>(t->size() * sizeof(double)));
  }
  if (!os) throw IoError("write failure on checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[7];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw IoError("bad magic in checkpoint: " + path);
  uint16_t version = get<uint16_t>(is);
  if (version != kModelVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  LoadedCheckpoint out;
  out.provenance = get<uint8_t>(is);
  ModelConfig cfg;
  cfg.backbone = static_cast<Backbone>(get<uint8_t>(is));
  cfg.layers = get<int32_t>(is);
  cfg.hidden = get<int32_t>(is);
  cfg.input_dim = get<int32_t>(is);
  cfg.head_hidden = get<int32_t>(is);
  cfg.fusion_depth = get<int32_t>(is);
  cfg.dropout = get<double>(is);
  cfg.log1p_counts = get<uint8_t>(is) != 0;
  cfg.seed = get<uint64_t>(is);
  out.params = allocate(cfg);
  uint32_t count = get<uint32_t>(is);
  auto ts = out.params.tensors();
  if (count != ts.size())
    throw IoError("checkpoint tensor count mismatch in " + path);
  for (auto& [name, t] : ts) {
    uint32_t len = get<uint32_t>(is);
    std::string stored(len, '\0');
    is.read(stored.data(), len);
    if (!is || stored != name)
      throw IoError("checkpoint tensor order mismatch: expected " + name);
    uint64_t r = get<uint64_t>(is);
    uint64_t cdim = get<uint64_t>(is);
    if (r != t->rows() || cdim != t->cols())
      throw IoError("checkpoint tensor shape mismatch for " + name);
    is.read(reinterpret_cast<char*>(t->data()),
            static_cast<std::streamsize>(t->size() * sizeof(double)));
    if (!is) throw IoError("truncated checkpoint: " + path);
  }
  return out;
}

}  // namespace temg
