#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "foildiff/common.hpp"

namespace foildiff::nn {

using Vec = std::vector<double>;

// Reference to one learnable tensor; the registration order is the
// canonical order for optimizers and checkpoints.
struct ParamRef {
  std::string path;
  Vec* value = nullptr;
  Vec* grad = nullptr;
};

inline void init_uniform(Vec& w, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(fan_in > 0 ? fan_in : 1));
  for (double& v : w) v = round_to_f32(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------

struct Linear {
  int in = 0, out = 0;
  Vec w, b, gw, gb;
  Vec x_cache;

  void init(int in_, int out_, Rng& rng) {
    in = in_;
    out = out_;
    w.assign(std::size_t(out) * in, 0.0);
    b.assign(std::size_t(out), 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    init_uniform(w, in, rng);
    init_uniform(b, in, rng);
  }

  Vec forward(const Vec& x) {
    x_cache = x;
    Vec y(std::size_t(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = &w[std::size_t(o) * in];
      for (int i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
    return y;
  }

  Vec backward(const Vec& gy) {
    Vec gx(std::size_t(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double g = gy[o];
      gb[o] += g;
      double* grow = &gw[std::size_t(o) * in];
      const double* row = &w[std::size_t(o) * in];
      for (int i = 0; i < in; ++i) {
        grow[i] += g * x_cache[i];
        gx[i] += g * row[i];
      }
    }
    return gx;
  }

  void register_params(const std::string& prefix, std::vector<ParamRef>& refs) {
    refs.push_back({prefix + ".w", &w, &gw});
    refs.push_back({prefix + ".b", &b, &gb});
  }
};

// out_i = t^T W_i c + b_i; bilinear in both inputs.
struct Bilinear {
  int t_dim = 0, c_dim = 0, out = 0;
  Vec w, b, gw, gb;
  Vec t_cache, c_cache;

  void init(int t_dim_, int c_dim_, int out_, Rng& rng) {
    t_dim = t_dim_;
    c_dim = c_dim_;
    out = out_;
    w.assign(std::size_t(out) * t_dim * c_dim, 0.0);
    b.assign(std::size_t(out), 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    init_uniform(w, t_dim * c_dim, rng);
    init_uniform(b, t_dim * c_dim, rng);
  }

  Vec forward(const Vec& tv, const Vec& cv) {
    if (int(tv.size()) != t_dim || int(cv.size()) != c_dim) {
      fail(ErrorCode::WidthMismatch, "bilinear inputs must be " + std::to_string(t_dim) + " and " +
                                         std::to_string(c_dim) + " wide");
    }
    t_cache = tv;
    c_cache = cv;
    Vec y(std::size_t(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* wo = &w[std::size_t(o) * t_dim * c_dim];
      for (int i = 0; i < t_dim; ++i) {
        const double ti = tv[i];
        if (ti == 0.0) continue;
        const double* wrow = wo + std::size_t(i) * c_dim;
        double inner = 0.0;
        for (int j = 0; j < c_dim; ++j) inner += wrow[j] * cv[j];
        acc += ti * inner;
      }
      y[o] = acc;
    }
    return y;
  }

  void backward(const Vec& gy, Vec& gt, Vec& gc) {
    gt.assign(std::size_t(t_dim), 0.0);
    gc.assign(std::size_t(c_dim), 0.0);
    for (int o = 0; o < out; ++o) {
      const double g = gy[o];
      gb[o] += g;
      const double* wo = &w[std::size_t(o) * t_dim * c_dim];
      double* gwo = &gw[std::size_t(o) * t_dim * c_dim];
      for (int i = 0; i < t_dim; ++i) {
        const double* wrow = wo + std::size_t(i) * c_dim;
        double* gwrow = gwo + std::size_t(i) * c_dim;
        double inner = 0.0;
        for (int j = 0; j < c_dim; ++j) {
          inner += wrow[j] * c_cache[j];
          gwrow[j] += g * t_cache[i] * c_cache[j];
          gc[j] += g * t_cache[i] * wrow[j];
        }
        gt[i] += g * inner;
      }
    }
  }

  void register_params(const std::string& prefix, std::vector<ParamRef>& refs) {
    refs.push_back({prefix + ".w", &w, &gw});
    refs.push_back({prefix + ".b", &b, &gb});
  }
};

struct Conv1d {
  int in_ch = 0, out_ch = 0, k = 3, stride = 1, pad = 1;
  Vec w, b, gw, gb;  // w laid out [out][in][k]
  Signal x_cache;

  void init(int in_ch_, int out_ch_, int k_, int stride_, int pad_, Rng& rng) {
    in_ch = in_ch_;
    out_ch = out_ch_;
    k = k_;
    stride = stride_;
    pad = pad_;
    w.assign(std::size_t(out_ch) * in_ch * k, 0.0);
    b.assign(std::size_t(out_ch), 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    init_uniform(w, in_ch * k, rng);
    init_uniform(b, in_ch * k, rng);
  }

  int out_len(int in_len) const { return (in_len + 2 * pad - k) / stride + 1; }

  Signal forward(const Signal& x) {
    x_cache = x;
    const int lo = out_len(x.length);
    Signal y(out_ch, lo);
    for (int o = 0; o < out_ch; ++o) {
      for (int j = 0; j < lo; ++j) {
        double acc = b[o];
        const int base = j * stride - pad;
        for (int c = 0; c < in_ch; ++c) {
          const double* wrow = &w[(std::size_t(o) * in_ch + c) * k];
          for (int t = 0; t < k; ++t) {
            const int i = base + t;
            if (i < 0 || i >= x.length) continue;
            acc += wrow[t] * x(c, i);
          }
        }
        y(o, j) = acc;
      }
    }
    return y;
  }

  Signal backward(const Signal& gy) {
    Signal gx(x_cache.channels, x_cache.length);
    for (int o = 0; o < out_ch; ++o) {
      for (int j = 0; j < gy.length; ++j) {
        const double g = gy(o, j);
        if (g == 0.0) continue;
        gb[o] += g;
        const int base = j * stride - pad;
        for (int c = 0; c < in_ch; ++c) {
          const double* wrow = &w[(std::size_t(o) * in_ch + c) * k];
          double* gwrow = &gw[(std::size_t(o) * in_ch + c) * k];
          for (int t = 0; t < k; ++t) {
            const int i = base + t;
            if (i < 0 || i >= x_cache.length) continue;
            gwrow[t] += g * x_cache(c, i);
            gx(c, i) += g * wrow[t];
          }
        }
      }
    }
    return gx;
  }

  void register_params(const std::string& prefix, std::vector<ParamRef>& refs) {
    refs.push_back({prefix + ".w", &w, &gw});
    refs.push_back({prefix + ".b", &b, &gb});
  }
};

// Largest divisor of ch not exceeding 8.
inline int group_count(int ch) {
  for (int g = std::min(8, ch); g >= 1; --g) {
    if (ch % g == 0) return g;
  }
  return 1;
}

struct GroupNorm {
  int ch = 0, groups = 1;
  double eps = 1e-5;
  Vec gamma, beta, ggamma, gbeta;
  Signal xhat_cache;
  Vec invstd_cache;

  void init(int ch_) {
    ch = ch_;
    groups = group_count(ch);
    gamma.assign(std::size_t(ch), 1.0);
    beta.assign(std::size_t(ch), 0.0);
    ggamma.assign(gamma.size(), 0.0);
    gbeta.assign(beta.size(), 0.0);
  }

  Signal forward(const Signal& x) {
    const int cs = ch / groups;
    Signal y(x.channels, x.length);
    xhat_cache = Signal(x.channels, x.length);
    invstd_cache.assign(std::size_t(groups), 0.0);
    for (int g = 0; g < groups; ++g) {
      const int c0 = g * cs;
      const double n = double(cs) * x.length;
      double mean = 0.0;
      for (int c = c0; c < c0 + cs; ++c) {
        for (int i = 0; i < x.length; ++i) mean += x(c, i);
      }
      mean /= n;
      double var = 0.0;
      for (int c = c0; c < c0 + cs; ++c) {
        for (int i = 0; i < x.length; ++i) {
          const double d = x(c, i) - mean;
          var += d * d;
        }
      }
      var /= n;
      const double invstd = 1.0 / std::sqrt(var + eps);
      invstd_cache[g] = invstd;
      for (int c = c0; c < c0 + cs; ++c) {
        for (int i = 0; i < x.length; ++i) {
          const double xhat = (x(c, i) - mean) * invstd;
          xhat_cache(c, i) = xhat;
          y(c, i) = gamma[c] * xhat + beta[c];
        }
      }
    }
    return y;
  }

  Signal backward(const Signal& gy) {
    const int cs = ch / groups;
    Signal gx(gy.channels, gy.length);
    for (int g = 0; g < groups; ++g) {
      const int c0 = g * cs;
      const double n = double(cs) * gy.length;
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (int c = c0; c < c0 + cs; ++c) {
        for (int i = 0; i < gy.length; ++i) {
          const double dxhat = gy(c, i) * gamma[c];
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * xhat_cache(c, i);
          ggamma[c] += gy(c, i) * xhat_cache(c, i);
          gbeta[c] += gy(c, i);
        }
      }
      const double invstd = invstd_cache[g];
      for (int c = c0; c < c0 + cs; ++c) {
        for (int i = 0; i < gy.length; ++i) {
          const double dxhat = gy(c, i) * gamma[c];
          gx(c, i) = invstd * (dxhat - (sum_dxhat + xhat_cache(c, i) * sum_dxhat_xhat) / n);
        }
      }
    }
    return gx;
  }

  void register_params(const std::string& prefix, std::vector<ParamRef>& refs) {
    refs.push_back({prefix + ".gamma", &gamma, &ggamma});
    refs.push_back({prefix + ".beta", &beta, &gbeta});
  }
};

struct SiLU {
  Signal x_cache;

  Signal forward(const Signal& x) {
    x_cache = x;
    Signal y = x;
    for (double& v : y.v) v = v / (1.0 + std::exp(-v));
    return y;
  }

  Signal backward(const Signal& gy) {
    Signal gx = gy;
    for (std::size_t i = 0; i < gx.v.size(); ++i) {
      const double x = x_cache.v[i];
      const double s = 1.0 / (1.0 + std::exp(-x));
      gx.v[i] = gy.v[i] * s * (1.0 + x * (1.0 - s));
    }
    return gx;
  }
};

inline Vec relu(const Vec& x) {
  Vec y = x;
  for (double& v : y) v = v > 0.0 ? v : 0.0;
  return y;
}

inline Vec relu_backward(const Vec& x, const Vec& gy) {
  Vec gx = gy;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (x[i] <= 0.0) gx[i] = 0.0;
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Stateless shape helpers with explicit adjoints

inline Signal pad_right(const Signal& x, int target_len) {
  Signal y(x.channels, target_len);
  for (int c = 0; c < x.channels; ++c) {
    for (int i = 0; i < x.length; ++i) y(c, i) = x(c, i);
  }
  return y;
}

inline Signal crop(const Signal& x, int target_len) {
  Signal y(x.channels, target_len);
  for (int c = 0; c < x.channels; ++c) {
    for (int i = 0; i < target_len; ++i) y(c, i) = x(c, i);
  }
  return y;
}

inline Signal upsample2(const Signal& x) {
  Signal y(x.channels, 2 * x.length);
  for (int c = 0; c < x.channels; ++c) {
    for (int i = 0; i < x.length; ++i) {
      y(c, 2 * i) = x(c, i);
      y(c, 2 * i + 1) = x(c, i);
    }
  }
  return y;
}

inline Signal upsample2_backward(const Signal& gy) {
  Signal gx(gy.channels, gy.length / 2);
  for (int c = 0; c < gy.channels; ++c) {
    for (int i = 0; i < gx.length; ++i) {
      gx(c, i) = gy(c, 2 * i) + gy(c, 2 * i + 1);
    }
  }
  return gx;
}

inline Signal concat_channels(const Signal& a, const Signal& b) {
  Signal y(a.channels + b.channels, a.length);
  for (int c = 0; c < a.channels; ++c) {
    for (int i = 0; i < a.length; ++i) y(c, i) = a(c, i);
  }
  for (int c = 0; c < b.channels; ++c) {
    for (int i = 0; i < a.length; ++i) y(a.channels + c, i) = b(c, i);
  }
  return y;
}

inline void split_channels(const Signal& gy, Signal& ga, Signal& gb, int a_ch) {
  ga = Signal(a_ch, gy.length);
  gb = Signal(gy.channels - a_ch, gy.length);
  for (int c = 0; c < a_ch; ++c) {
    for (int i = 0; i < gy.length; ++i) ga(c, i) = gy(c, i);
  }
  for (int c = a_ch; c < gy.channels; ++c) {
    for (int i = 0; i < gy.length; ++i) gb(c - a_ch, i) = gy(c, i);
  }
}

// ---------------------------------------------------------------------------

// Residual convolution block with additive context injection after the
// first normalization.
struct ResBlock {
  int in_ch = 0, out_ch = 0;
  Conv1d conv1, conv2, skip;
  GroupNorm gn1, gn2;
  Linear ctx_proj;
  SiLU act1, act2;
  bool projected_skip = false;
  Signal x_cache;
  Vec ctx_gate_cache;

  void init(int in_ch_, int out_ch_, int ctx_dim, Rng& rng) {
    in_ch = in_ch_;
    out_ch = out_ch_;
    conv1.init(in_ch, out_ch, 3, 1, 1, rng);
    gn1.init(out_ch);
    ctx_proj.init(ctx_dim, out_ch, rng);
    conv2.init(out_ch, out_ch, 3, 1, 1, rng);
    gn2.init(out_ch);
    projected_skip = in_ch != out_ch;
    if (projected_skip) skip.init(in_ch, out_ch, 1, 1, 0, rng);
  }

  Signal forward(const Signal& x, const Vec& ctx) {
    x_cache = x;
    Signal h = conv1.forward(x);
    h = gn1.forward(h);
    const Vec ctx_add = ctx_proj.forward(ctx);
    for (int c = 0; c < out_ch; ++c) {
      for (int i = 0; i < h.length; ++i) h(c, i) += ctx_add[c];
    }
    h = act1.forward(h);
    h = conv2.forward(h);
    h = gn2.forward(h);
    h = act2.forward(h);
    const Signal s = projected_skip ? skip.forward(x) : x;
    for (std::size_t i = 0; i < h.v.size(); ++i) h.v[i] += s.v[i];
    return h;
  }

  Signal backward(const Signal& gy, Vec& gctx) {
    Signal gh = act2.backward(gy);
    gh = gn2.backward(gh);
    gh = conv2.backward(gh);
    gh = act1.backward(gh);
    Vec gctx_add(std::size_t(out_ch), 0.0);
    for (int c = 0; c < out_ch; ++c) {
      for (int i = 0; i < gh.length; ++i) gctx_add[c] += gh(c, i);
    }
    const Vec gctx_local = ctx_proj.backward(gctx_add);
    for (std::size_t i = 0; i < gctx.size(); ++i) gctx[i] += gctx_local[i];
    gh = gn1.backward(gh);
    Signal gx = conv1.backward(gh);
    const Signal gskip = projected_skip ? skip.backward(gy) : gy;
    for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += gskip.v[i];
    return gx;
  }

  void register_params(const std::string& prefix, std::vector<ParamRef>& refs) {
    conv1.register_params(prefix + ".conv1", refs);
    gn1.register_params(prefix + ".gn1", refs);
    ctx_proj.register_params(prefix + ".ctx", refs);
    conv2.register_params(prefix + ".conv2", refs);
    gn2.register_params(prefix + ".gn2", refs);
    if (projected_skip) skip.register_params(prefix + ".skip", refs);
  }
};

}  // namespace foildiff::nn
