#include "tkgf/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tkgf/rng.hpp"

namespace tkgf {

void ModelConfig::validate() const {
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || max_seq_len == 0)
    throw std::invalid_argument("model dimensions must be positive");
  if (d_model % n_heads != 0) throw std::invalid_argument("d_model must be divisible by n_heads");
  if (vocab_size < 4) throw std::invalid_argument("token vocabulary is too small");
  if (entity_count == 0) throw std::invalid_argument("entity_count must be positive");
}

std::vector<TensorSpec> parameter_manifest(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<TensorSpec> out;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    out.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  const std::size_t d = cfg.d_model;
  add("tok_emb", cfg.vocab_size, d);
  add("pos_emb", cfg.max_seq_len, d);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    add(p + "ln1.g", 1, d);
    add(p + "ln1.b", 1, d);
    add(p + "attn.wq", d, d);
    add(p + "attn.bq", 1, d);
    add(p + "attn.wk", d, d);
    add(p + "attn.bk", 1, d);
    add(p + "attn.wv", d, d);
    add(p + "attn.bv", 1, d);
    add(p + "attn.wo", d, d);
    add(p + "attn.bo", 1, d);
    add(p + "ln2.g", 1, d);
    add(p + "ln2.b", 1, d);
    add(p + "mlp.w1", d, cfg.d_ff());
    add(p + "mlp.b1", 1, cfg.d_ff());
    add(p + "mlp.w2", cfg.d_ff(), d);
    add(p + "mlp.b2", 1, d);
  }
  add("lnf.g", 1, d);
  add("lnf.b", 1, d);
  add("head.w", d, cfg.entity_count);
  add("head.b", 1, cfg.entity_count);
  return out;
}

template <class T>
ModelParams<T> ModelParams<T>::zeros(const ModelConfig& cfg) {
  ModelParams p;
  p.config = cfg;
  p.manifest = parameter_manifest(cfg);
  const auto& last = p.manifest.back();
  p.values.assign(last.offset + last.size(), T(0));
  return p;
}

template <class T>
ModelParams<T> ModelParams<T>::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p = zeros(cfg);
  Rng rng(seed);
  const double residual_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(cfg.n_layers));
  for (const auto& s : p.manifest) {
    const std::string_view name = s.name;
    auto fill = [&](double stddev) {
      for (std::size_t i = 0; i < s.size(); ++i) p.values[s.offset + i] = static_cast<T>(rng.normal() * stddev);
    };
    const bool gain = name.ends_with(".g");
    const bool bias = name.ends_with(".b") || name.ends_with(".bq") || name.ends_with(".bk") ||
                      name.ends_with(".bv") || name.ends_with(".bo") || name.ends_with(".b1") ||
                      name.ends_with(".b2");
    if (gain) {
      std::fill_n(p.values.begin() + static_cast<std::ptrdiff_t>(s.offset), s.size(), T(1));
    } else if (bias) {
      continue;
    } else if (name == "tok_emb" || name == "pos_emb") {
      fill(0.1);
    } else {
      double stddev = 1.0 / std::sqrt(static_cast<double>(s.rows));
      if (name.ends_with("attn.wo") || name.ends_with("mlp.w2")) stddev *= residual_scale;
      fill(stddev);
    }
  }
  return p;
}

template <class T>
const TensorSpec& ModelParams<T>::spec(std::string_view name) const {
  for (const auto& s : manifest)
    if (s.name == name) return s;
  throw std::out_of_range("no parameter tensor '" + std::string(name) + "'");
}

template <class T>
std::span<T> ModelParams<T>::tensor(std::string_view name) {
  const auto& s = spec(name);
  return std::span<T>(values).subspan(s.offset, s.size());
}

template <class T>
std::span<const T> ModelParams<T>::tensor(std::string_view name) const {
  const auto& s = spec(name);
  return std::span<const T>(values).subspan(s.offset, s.size());
}

template <class T>
const std::string& ModelParams<T>::owner(std::size_t i) const {
  for (const auto& s : manifest)
    if (i >= s.offset && i < s.offset + s.size()) return s.name;
  throw std::out_of_range("parameter index out of range");
}

namespace {

constexpr double kLnEps = 1e-5;

// Offsets of every tensor, in manifest order.
struct Layout {
  struct LayerOff {
    std::size_t ln1g, ln1b, wq, bq, wk, bk, wv, bv, wo, bo, ln2g, ln2b, w1, b1, w2, b2;
  };
  std::size_t tok, pos, lnfg, lnfb, hw, hb;
  std::vector<LayerOff> layers;

  explicit Layout(const std::vector<TensorSpec>& m) {
    std::size_t i = 0;
    tok = m[i++].offset;
    pos = m[i++].offset;
    while (i + 4 < m.size()) {
      LayerOff l{};
      for (std::size_t* f : {&l.ln1g, &l.ln1b, &l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.ln2g,
                             &l.ln2b, &l.w1, &l.b1, &l.w2, &l.b2})
        *f = m[i++].offset;
      layers.push_back(l);
    }
    lnfg = m[i++].offset;
    lnfb = m[i++].offset;
    hw = m[i++].offset;
    hb = m[i++].offset;
  }
};

// y[n x out] = x[n x in] W[in x out] + b
template <class T>
void linear(const T* x, std::size_t n, std::size_t in, const T* w, const T* b, std::size_t out, T* y) {
  for (std::size_t i = 0; i < n; ++i) {
    T* yi = y + i * out;
    for (std::size_t j = 0; j < out; ++j) yi[j] = b[j];
    const T* xi = x + i * in;
    for (std::size_t k = 0; k < in; ++k) {
      const T a = xi[k];
      const T* wk = w + k * out;
      for (std::size_t j = 0; j < out; ++j) yi[j] += a * wk[j];
    }
  }
}

// Given dy, accumulates dW, db and writes dx (if non-null, added).
template <class T>
void linear_backward(const T* x, std::size_t n, std::size_t in, const T* w, std::size_t out, const T* dy, T* dw,
                     T* db, T* dx) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* dyi = dy + i * out;
    const T* xi = x + i * in;
    for (std::size_t j = 0; j < out; ++j) db[j] += dyi[j];
    for (std::size_t k = 0; k < in; ++k) {
      const T a = xi[k];
      T* dwk = dw + k * out;
      for (std::size_t j = 0; j < out; ++j) dwk[j] += a * dyi[j];
    }
    if (dx) {
      T* dxi = dx + i * in;
      for (std::size_t k = 0; k < in; ++k) {
        const T* wk = w + k * out;
        T acc = 0;
        for (std::size_t j = 0; j < out; ++j) acc += wk[j] * dyi[j];
        dxi[k] += acc;
      }
    }
  }
}

template <class T>
void layer_norm(const T* x, std::size_t n, std::size_t d, const T* g, const T* b, T* y, T* xhat, T* rstd) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* xi = x + i * d;
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += xi[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<T>(d);
    const T r = T(1) / std::sqrt(var + static_cast<T>(kLnEps));
    rstd[i] = r;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (xi[j] - mean) * r;
      xhat[i * d + j] = h;
      y[i * d + j] = g[j] * h + b[j];
    }
  }
}

template <class T>
void layer_norm_backward(const T* xhat, const T* rstd, std::size_t n, std::size_t d, const T* g, const T* dy, T* dg,
                         T* db, T* dx) {
  std::vector<T> dh(d);
  for (std::size_t i = 0; i < n; ++i) {
    const T* hi = xhat + i * d;
    const T* dyi = dy + i * d;
    T mean_dh = 0, mean_dh_h = 0;
    for (std::size_t j = 0; j < d; ++j) {
      dg[j] += dyi[j] * hi[j];
      db[j] += dyi[j];
      dh[j] = dyi[j] * g[j];
      mean_dh += dh[j];
      mean_dh_h += dh[j] * hi[j];
    }
    mean_dh /= static_cast<T>(d);
    mean_dh_h /= static_cast<T>(d);
    for (std::size_t j = 0; j < d; ++j) dx[i * d + j] += rstd[i] * (dh[j] - mean_dh - hi[j] * mean_dh_h);
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

template <class T>
T gelu(T u) {
  const T th = std::tanh(static_cast<T>(kGeluC) * (u + static_cast<T>(kGeluA) * u * u * u));
  return T(0.5) * u * (T(1) + th);
}

template <class T>
T gelu_grad(T u) {
  const T th = std::tanh(static_cast<T>(kGeluC) * (u + static_cast<T>(kGeluA) * u * u * u));
  return T(0.5) * (T(1) + th) +
         T(0.5) * u * (T(1) - th * th) * static_cast<T>(kGeluC) * (T(1) + T(3) * static_cast<T>(kGeluA) * u * u);
}

template <class T>
struct LayerCache {
  std::vector<T> x_in, a, a_hat, a_rstd, q, k, v, p, ctx, x_mid, c, c_hat, c_rstd, u, gl;
};

template <class T>
struct Cache {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> positions;
  std::vector<LayerCache<T>> layers;
  std::vector<T> x_out, f, f_hat, f_rstd, pooled;
};

template <class T>
std::vector<T> run(const ModelParams<T>& params, const Layout& L, std::span<const TokenId> ids, Cache<T>& c) {
  const ModelConfig& cfg = params.config;
  if (ids.size() > cfg.max_seq_len)
    throw std::invalid_argument("sequence of " + std::to_string(ids.size()) + " tokens exceeds max_seq_len " +
                                std::to_string(cfg.max_seq_len));
  const T* P = params.values.data();
  const std::size_t d = cfg.d_model, H = cfg.n_heads, dh = d / H, F = cfg.d_ff(), E = cfg.entity_count;
  c.tokens.clear();
  c.positions.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= cfg.vocab_size) throw std::invalid_argument("token id out of range");
    if (ids[i] == TokenVocab::kPad) continue;
    c.tokens.push_back(ids[i]);
    c.positions.push_back(i);
  }
  const std::size_t n = c.tokens.size();
  std::vector<T> x(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      x[i * d + j] = P[L.tok + c.tokens[i] * d + j] + P[L.pos + c.positions[i] * d + j];

  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  c.layers.resize(cfg.n_layers);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const auto& o = L.layers[l];
    auto& lc = c.layers[l];
    lc.x_in = x;
    lc.a.resize(n * d);
    lc.a_hat.resize(n * d);
    lc.a_rstd.resize(n);
    layer_norm(x.data(), n, d, P + o.ln1g, P + o.ln1b, lc.a.data(), lc.a_hat.data(), lc.a_rstd.data());
    lc.q.resize(n * d);
    lc.k.resize(n * d);
    lc.v.resize(n * d);
    linear(lc.a.data(), n, d, P + o.wq, P + o.bq, d, lc.q.data());
    linear(lc.a.data(), n, d, P + o.wk, P + o.bk, d, lc.k.data());
    linear(lc.a.data(), n, d, P + o.wv, P + o.bv, d, lc.v.data());
    lc.p.assign(H * n * n, T(0));
    lc.ctx.assign(n * d, T(0));
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        T* pi = lc.p.data() + (h * n + i) * n;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
          T s = 0;
          for (std::size_t e = 0; e < dh; ++e) s += lc.q[i * d + h * dh + e] * lc.k[j * d + h * dh + e];
          pi[j] = s * scale;
          mx = std::max(mx, pi[j]);
        }
        T sum = 0;
        for (std::size_t j = 0; j < n; ++j) {
          pi[j] = std::exp(pi[j] - mx);
          sum += pi[j];
        }
        for (std::size_t j = 0; j < n; ++j) pi[j] /= sum;
        T* ci = lc.ctx.data() + i * d + h * dh;
        for (std::size_t j = 0; j < n; ++j) {
          const T w = pi[j];
          const T* vj = lc.v.data() + j * d + h * dh;
          for (std::size_t e = 0; e < dh; ++e) ci[e] += w * vj[e];
        }
      }
    }
    std::vector<T> attn(n * d);
    linear(lc.ctx.data(), n, d, P + o.wo, P + o.bo, d, attn.data());
    for (std::size_t i = 0; i < n * d; ++i) x[i] += attn[i];
    lc.x_mid = x;
    lc.c.resize(n * d);
    lc.c_hat.resize(n * d);
    lc.c_rstd.resize(n);
    layer_norm(x.data(), n, d, P + o.ln2g, P + o.ln2b, lc.c.data(), lc.c_hat.data(), lc.c_rstd.data());
    lc.u.resize(n * F);
    linear(lc.c.data(), n, d, P + o.w1, P + o.b1, F, lc.u.data());
    lc.gl.resize(n * F);
    for (std::size_t i = 0; i < n * F; ++i) lc.gl[i] = gelu(lc.u[i]);
    std::vector<T> mlp(n * d);
    linear(lc.gl.data(), n, F, P + o.w2, P + o.b2, d, mlp.data());
    for (std::size_t i = 0; i < n * d; ++i) x[i] += mlp[i];
  }
  c.x_out = x;
  c.f.resize(n * d);
  c.f_hat.resize(n * d);
  c.f_rstd.resize(n);
  layer_norm(x.data(), n, d, P + L.lnfg, P + L.lnfb, c.f.data(), c.f_hat.data(), c.f_rstd.data());
  c.pooled.assign(d, T(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) c.pooled[j] += c.f[i * d + j];
  if (n > 0)
    for (auto& v : c.pooled) v /= static_cast<T>(n);
  std::vector<T> scores(E);
  linear(c.pooled.data(), 1, d, P + L.hw, P + L.hb, E, scores.data());
  return scores;
}

template <class T>
void backward(const ModelParams<T>& params, const Layout& L, const Cache<T>& c, const std::vector<T>& dscores,
              T* G) {
  const ModelConfig& cfg = params.config;
  const T* P = params.values.data();
  const std::size_t d = cfg.d_model, H = cfg.n_heads, dh = d / H, F = cfg.d_ff(), E = cfg.entity_count;
  const std::size_t n = c.tokens.size();
  std::vector<T> dpooled(d, T(0));
  linear_backward(c.pooled.data(), 1, d, P + L.hw, E, dscores.data(), G + L.hw, G + L.hb, dpooled.data());
  if (n == 0) return;
  std::vector<T> df(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) df[i * d + j] = dpooled[j] / static_cast<T>(n);
  std::vector<T> dx(n * d, T(0));
  layer_norm_backward(c.f_hat.data(), c.f_rstd.data(), n, d, P + L.lnfg, df.data(), G + L.lnfg, G + L.lnfb,
                      dx.data());

  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  for (std::size_t l = cfg.n_layers; l-- > 0;) {
    const auto& o = L.layers[l];
    const auto& lc = c.layers[l];
    // MLP branch; dx flows through the residual unchanged.
    std::vector<T> dgl(n * F, T(0));
    linear_backward(lc.gl.data(), n, F, P + o.w2, d, dx.data(), G + o.w2, G + o.b2, dgl.data());
    for (std::size_t i = 0; i < n * F; ++i) dgl[i] *= gelu_grad(lc.u[i]);
    std::vector<T> dc(n * d, T(0));
    linear_backward(lc.c.data(), n, d, P + o.w1, F, dgl.data(), G + o.w1, G + o.b1, dc.data());
    layer_norm_backward(lc.c_hat.data(), lc.c_rstd.data(), n, d, P + o.ln2g, dc.data(), G + o.ln2g, G + o.ln2b,
                        dx.data());
    // Attention branch.
    std::vector<T> dctx(n * d, T(0));
    linear_backward(lc.ctx.data(), n, d, P + o.wo, d, dx.data(), G + o.wo, G + o.bo, dctx.data());
    std::vector<T> dq(n * d, T(0)), dk(n * d, T(0)), dv(n * d, T(0)), ds(n);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        const T* pi = lc.p.data() + (h * n + i) * n;
        const T* dci = dctx.data() + i * d + h * dh;
        T dot = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const T* vj = lc.v.data() + j * d + h * dh;
          T* dvj = dv.data() + j * d + h * dh;
          T dp = 0;
          for (std::size_t e = 0; e < dh; ++e) {
            dp += dci[e] * vj[e];
            dvj[e] += pi[j] * dci[e];
          }
          ds[j] = dp;
          dot += dp * pi[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
          const T g = pi[j] * (ds[j] - dot) * scale;
          const T* qi = lc.q.data() + i * d + h * dh;
          const T* kj = lc.k.data() + j * d + h * dh;
          T* dqi = dq.data() + i * d + h * dh;
          T* dkj = dk.data() + j * d + h * dh;
          for (std::size_t e = 0; e < dh; ++e) {
            dqi[e] += g * kj[e];
            dkj[e] += g * qi[e];
          }
        }
      }
    }
    std::vector<T> da(n * d, T(0));
    linear_backward(lc.a.data(), n, d, P + o.wq, d, dq.data(), G + o.wq, G + o.bq, da.data());
    linear_backward(lc.a.data(), n, d, P + o.wk, d, dk.data(), G + o.wk, G + o.bk, da.data());
    linear_backward(lc.a.data(), n, d, P + o.wv, d, dv.data(), G + o.wv, G + o.bv, da.data());
    layer_norm_backward(lc.a_hat.data(), lc.a_rstd.data(), n, d, P + o.ln1g, da.data(), G + o.ln1g, G + o.ln1b,
                        dx.data());
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      G[L.tok + c.tokens[i] * d + j] += dx[i * d + j];
      G[L.pos + c.positions[i] * d + j] += dx[i * d + j];
    }
}

// Fixed number of reduction groups, independent of the thread count.
constexpr std::size_t kGroups = 8;

}  // namespace

template <class T>
std::vector<T> forward(const ModelParams<T>& params, std::span<const TokenId> ids) {
  const Layout L(params.manifest);
  Cache<T> c;
  return run(params, L, ids, c);
}

template <class T>
std::vector<double> softmax(std::span<const T> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  double mx = -std::numeric_limits<double>::infinity();
  for (T s : scores) mx = std::max(mx, static_cast<double>(s));
  double sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += out[i] = std::exp(static_cast<double>(scores[i]) - mx);
  for (auto& v : out) v /= sum;
  return out;
}

template <class T>
double cross_entropy(std::span<const T> scores, std::size_t target) {
  if (target >= scores.size()) throw std::invalid_argument("target outside score vector");
  double mx = -std::numeric_limits<double>::infinity();
  for (T s : scores) mx = std::max(mx, static_cast<double>(s));
  double sum = 0;
  for (T s : scores) sum += std::exp(static_cast<double>(s) - mx);
  return mx + std::log(sum) - static_cast<double>(scores[target]);
}

template <class T>
double gradients(const ModelParams<T>& params, std::span<const Sample> batch, std::vector<T>& grad, unsigned jobs) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const Layout L(params.manifest);
  const std::size_t np = params.values.size();
  const std::size_t B = batch.size();
  const std::size_t groups = std::min(kGroups, B);
  std::vector<std::vector<T>> partial(groups);
  std::vector<double> losses(B);
  std::vector<std::exception_ptr> errors(groups);

  auto work = [&](std::size_t g) {
    try {
      auto& acc = partial[g];
      acc.assign(np, T(0));
      Cache<T> cache;
      for (std::size_t b = g * B / groups; b < (g + 1) * B / groups; ++b) {
        const Sample& s = batch[b];
        if (s.target >= params.config.entity_count) throw std::invalid_argument("target entity out of range");
        const std::vector<T> scores = run(params, L, std::span<const TokenId>(s.ids), cache);
        losses[b] = cross_entropy(std::span<const T>(scores), s.target);
        const std::vector<double> p = softmax(std::span<const T>(scores));
        std::vector<T> ds(scores.size());
        for (std::size_t e = 0; e < ds.size(); ++e) ds[e] = static_cast<T>(p[e] - (e == s.target ? 1.0 : 0.0));
        backward(params, L, cache, ds, acc.data());
      }
    } catch (...) {
      errors[g] = std::current_exception();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(groups)));
  if (threads == 1) {
    for (std::size_t g = 0; g < groups; ++g) work(g);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t g = t; g < groups; g += threads) work(g);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  grad.assign(np, T(0));
  for (const auto& acc : partial)
    for (std::size_t i = 0; i < np; ++i) grad[i] += acc[i];
  const T inv = T(1) / static_cast<T>(B);
  for (std::size_t i = 0; i < np; ++i) {
    grad[i] *= inv;
    if (!std::isfinite(grad[i])) throw std::runtime_error("non-finite gradient in parameter " + params.owner(i));
  }
  double loss = 0;
  for (double l : losses) loss += l;
  return loss / static_cast<double>(B);
}

template <class T>
double mean_loss(const ModelParams<T>& params, std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const Layout L(params.manifest);
  Cache<T> cache;
  double loss = 0;
  for (const auto& s : batch) {
    const auto scores = run(params, L, std::span<const TokenId>(s.ids), cache);
    loss += cross_entropy(std::span<const T>(scores), s.target);
  }
  return loss / static_cast<double>(batch.size());
}

template <class T>
Ranking rank_entities(std::span<const T> scores) {
  Ranking r;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), 0u);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });
  r.rank.resize(scores.size());
  for (std::size_t i = 0; i < r.order.size(); ++i) r.rank[r.order[i]] = i + 1;
  return r;
}

template <class T>
std::size_t rank_of(std::span<const T> scores, std::size_t entity) {
  if (entity >= scores.size()) throw std::invalid_argument("entity outside score vector");
  std::size_t rank = 1;
  const T target = scores[entity];
  for (std::size_t e = 0; e < scores.size(); ++e)
    if (scores[e] > target || (scores[e] == target && e < entity)) ++rank;
  return rank;
}

#define TKGF_INSTANTIATE(T)                                                                              \
  template struct ModelParams<T>;                                                                        \
  template std::vector<T> forward(const ModelParams<T>&, std::span<const TokenId>);                      \
  template double cross_entropy(std::span<const T>, std::size_t);                                        \
  template std::vector<double> softmax(std::span<const T>);                                              \
  template double gradients(const ModelParams<T>&, std::span<const Sample>, std::vector<T>&, unsigned); \
  template double mean_loss(const ModelParams<T>&, std::span<const Sample>);                             \
  template Ranking rank_entities(std::span<const T>);                                                    \
  template std::size_t rank_of(std::span<const T>, std::size_t);

TKGF_INSTANTIATE(float)
TKGF_INSTANTIATE(double)

}  // namespace tkgf
