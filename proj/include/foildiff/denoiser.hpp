#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "foildiff/common.hpp"
#include "foildiff/conditioning.hpp"
#include "foildiff/diffusion.hpp"
#include "foildiff/geometry.hpp"
#include "foildiff/nn.hpp"

namespace foildiff {

struct DenoiserConfig {
  int base_width = 64;
  int depth = 3;
  int time_embed_dim = 64;
  int cond_embed_dim = 64;

  void validate() const {
    if (depth < 1) fail(ErrorCode::InvalidRange, "depth must be >= 1");
    if (base_width < 1 || time_embed_dim < 2 || cond_embed_dim < 1) {
      fail(ErrorCode::InvalidRange, "denoiser widths must be positive");
    }
  }

  bool operator==(const DenoiserConfig& o) const {
    return base_width == o.base_width && depth == o.depth &&
           time_embed_dim == o.time_embed_dim && cond_embed_dim == o.cond_embed_dim;
  }
};

struct TrainingMeta {
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
};

// Raw sinusoidal position code, interleaved [sin w0 t, cos w0 t, sin w1 t,
// ...], frequencies geometrically spaced.
inline nn::Vec sinusoidal_embedding(int t, int dim) {
  if (dim < 2 || dim % 2 != 0) fail(ErrorCode::InvalidRange, "embedding dim must be even and >= 2");
  nn::Vec code(std::size_t(dim), 0.0);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * double(i) / half);
    code[std::size_t(2 * i)] = std::sin(t * freq);
    code[std::size_t(2 * i) + 1] = std::cos(t * freq);
  }
  return code;
}

// Conditional 1D U-Net noise predictor. Signals of length 100 are padded so
// `depth` halvings are exact, and cropped back on output. The fused
// time/conditioning context is injected additively into every block.
class Denoiser {
 public:
  Denoiser(const DenoiserConfig& config, const ScheduleParams& schedule,
           ConditioningKind kind, const NormalizationStats& stats, std::uint64_t init_seed)
      : config_(config), schedule_(schedule), kind_(kind), stats_(stats) {
    config_.validate();
    Rng rng(derive_seed(init_seed, 0xD15ull));

    const int ctx_dim = config_.time_embed_dim;
    cond_mlp1_.init(1, config_.cond_embed_dim, rng);
    cond_mlp2_.init(config_.cond_embed_dim, config_.cond_embed_dim, rng);
    null_embed_.assign(std::size_t(config_.cond_embed_dim), 0.0);
    nn::init_uniform(null_embed_, config_.cond_embed_dim, rng);
    gnull_embed_.assign(null_embed_.size(), 0.0);
    time_mlp_.init(config_.time_embed_dim, config_.time_embed_dim, rng);
    fuse_.init(config_.time_embed_dim, config_.cond_embed_dim, ctx_dim, rng);

    const int depth = config_.depth;
    stem_.init(2, width(0), rng);
    enc_.resize(depth);
    down_.resize(depth);
    for (int d = 0; d < depth; ++d) {
      enc_[d].init(width(d), width(d), ctx_dim, rng);
      down_[d].init(width(d), width(d + 1), 3, 2, 1, rng);
    }
    mid_.init(width(depth), width(depth), ctx_dim, rng);
    up_.resize(depth);
    dec_.resize(depth);
    for (int d = depth - 1; d >= 0; --d) {
      up_[d].init(width(d + 1), width(d), 3, 1, 1, rng);
      dec_[d].init(2 * width(d), width(d), ctx_dim, rng);
    }
    out_conv_.init(width(0), 2, 3, 1, 1, rng);

    skips_.resize(depth);
  }

  const DenoiserConfig& config() const { return config_; }
  const ScheduleParams& schedule_params() const { return schedule_; }
  ConditioningKind conditioning_kind() const { return kind_; }
  const NormalizationStats& normalization_stats() const { return stats_; }
  TrainingMeta& training_meta() { return meta_; }
  const TrainingMeta& training_meta() const { return meta_; }
  void set_normalization_stats(const NormalizationStats& stats) { stats_ = stats; }

  int padded_length() const {
    const int unit = 1 << config_.depth;
    return (kPointsPerSurface + unit - 1) / unit * unit;
  }

  // --- embeddings --------------------------------------------------------

  nn::Vec embed_condition(const ConditioningSpec& spec) {
    if (spec.kind == ConditioningKind::none) return null_embed_;
    if (!std::isfinite(spec.normalized_value)) {
      fail(ErrorCode::NonFiniteInput, "conditioning value is not finite");
    }
    cond_in_cache_ = {spec.normalized_value};
    cond_h1_cache_ = cond_mlp1_.forward(cond_in_cache_);
    cond_h1_relu_cache_ = nn::relu(cond_h1_cache_);
    return cond_mlp2_.forward(cond_h1_relu_cache_);
  }

  nn::Vec embed_timestep(int t) {
    if (t < 0 || t > schedule_.total_steps) {
      fail(ErrorCode::InvalidRange, "timestep outside [0, T]");
    }
    time_code_cache_ = sinusoidal_embedding(t, config_.time_embed_dim);
    time_pre_cache_ = time_mlp_.forward(time_code_cache_);
    return nn::relu(time_pre_cache_);
  }

  nn::Vec fuse_embeddings(const nn::Vec& time_vec, const nn::Vec& cond_vec) {
    return fuse_.forward(time_vec, cond_vec);
  }

  // --- forward -----------------------------------------------------------

  Signal predict_noise(const Signal& y_t, int t, const ConditioningSpec& spec) {
    if (y_t.channels != 2 || y_t.length != kPointsPerSurface) {
      fail(ErrorCode::ShapeMismatch, "denoiser expects a 2x" + std::to_string(kPointsPerSurface) +
                                         " signal, got " + std::to_string(y_t.channels) + "x" +
                                         std::to_string(y_t.length));
    }
    if (t < 1 || t > schedule_.total_steps) {
      fail(ErrorCode::InvalidRange, "timestep outside [1, T]");
    }
    if (spec.kind != ConditioningKind::none && spec.kind != kind_) {
      fail(ErrorCode::ConfigMismatch,
           std::string("model conditions on ") + to_string(kind_) + ", got " +
               to_string(spec.kind));
    }
    cond_is_null_ = spec.kind == ConditioningKind::none;
    const nn::Vec cond_vec = embed_condition(spec);
    const nn::Vec time_vec = embed_timestep(t);
    ctx_cache_ = fuse_.forward(time_vec, cond_vec);

    Signal h = nn::pad_right(y_t, padded_length());
    h = stem_.forward(h);
    for (int d = 0; d < config_.depth; ++d) {
      h = enc_[d].forward(h, ctx_cache_);
      skips_[d] = h;
      h = down_[d].forward(h);
    }
    h = mid_.forward(h, ctx_cache_);
    for (int d = config_.depth - 1; d >= 0; --d) {
      h = nn::upsample2(h);
      h = up_[d].forward(h);
      h = dec_[d].forward(nn::concat_channels(h, skips_[d]), ctx_cache_);
    }
    h = out_conv_.forward(h);
    return nn::crop(h, kPointsPerSurface);
  }

  // Accumulates parameter gradients for the last predict_noise call.
  void backward(const Signal& grad_out) {
    Signal gh = nn::pad_right(grad_out, padded_length());
    gh = out_conv_.backward(gh);
    nn::Vec gctx(ctx_cache_.size(), 0.0);
    std::vector<Signal> gskips(std::size_t(config_.depth));
    for (int d = 0; d < config_.depth; ++d) {
      Signal gcat = dec_[d].backward(gh, gctx);
      Signal gup, gskip;
      nn::split_channels(gcat, gup, gskip, width(d));
      gskips[std::size_t(d)] = std::move(gskip);
      gh = up_[d].backward(gup);
      gh = nn::upsample2_backward(gh);
    }
    gh = mid_.backward(gh, gctx);
    for (int d = config_.depth - 1; d >= 0; --d) {
      gh = down_[d].backward(gh);
      for (std::size_t i = 0; i < gh.v.size(); ++i) gh.v[i] += gskips[std::size_t(d)].v[i];
      gh = enc_[d].backward(gh, gctx);
    }
    stem_.backward(gh);

    nn::Vec gtime, gcond;
    fuse_.backward(gctx, gtime, gcond);
    gtime = nn::relu_backward(time_pre_cache_, gtime);
    time_mlp_.backward(gtime);
    if (cond_is_null_) {
      for (std::size_t i = 0; i < gcond.size(); ++i) gnull_embed_[i] += gcond[i];
    } else {
      nn::Vec g1 = cond_mlp2_.backward(gcond);
      g1 = nn::relu_backward(cond_h1_cache_, g1);
      cond_mlp1_.backward(g1);
    }
  }

  // --- parameters --------------------------------------------------------

  // Built fresh on each call; pointers stay valid for this object's lifetime
  // at its current address, so the refs are not cached across moves.
  std::vector<nn::ParamRef> params() {
    std::vector<nn::ParamRef> refs;
    stem_.register_params("stem", refs);
    for (int d = 0; d < config_.depth; ++d) {
      enc_[d].register_params("enc" + std::to_string(d), refs);
      down_[d].register_params("down" + std::to_string(d), refs);
    }
    mid_.register_params("mid", refs);
    for (int d = config_.depth - 1; d >= 0; --d) {
      up_[d].register_params("up" + std::to_string(d), refs);
      dec_[d].register_params("dec" + std::to_string(d), refs);
    }
    out_conv_.register_params("out", refs);
    time_mlp_.register_params("time_mlp", refs);
    cond_mlp1_.register_params("cond_mlp1", refs);
    cond_mlp2_.register_params("cond_mlp2", refs);
    refs.push_back({"null_embed", &null_embed_, &gnull_embed_});
    fuse_.register_params("fuse", refs);
    return refs;
  }

  void zero_grads() {
    for (const nn::ParamRef& p : params()) {
      std::fill(p.grad->begin(), p.grad->end(), 0.0);
    }
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (const nn::ParamRef& p : params()) n += p.value->size();
    return n;
  }

  // --- checkpoint io ------------------------------------------------------

  void save_checkpoint(const std::string& path);
  static Denoiser load_checkpoint(const std::string& path);

 private:
  int width(int stage) const { return config_.base_width << stage; }

  DenoiserConfig config_;
  ScheduleParams schedule_;
  ConditioningKind kind_ = ConditioningKind::none;
  NormalizationStats stats_;
  TrainingMeta meta_;

  nn::Conv1d stem_, out_conv_;
  std::vector<nn::ResBlock> enc_, dec_;
  std::vector<nn::Conv1d> down_, up_;
  nn::ResBlock mid_;
  nn::Linear time_mlp_, cond_mlp1_, cond_mlp2_;
  nn::Vec null_embed_, gnull_embed_;
  nn::Bilinear fuse_;

  // forward caches
  std::vector<Signal> skips_;
  nn::Vec ctx_cache_, time_code_cache_, time_pre_cache_;
  nn::Vec cond_in_cache_, cond_h1_cache_, cond_h1_relu_cache_;
  bool cond_is_null_ = true;
};

// ---------------------------------------------------------------------------
// Checkpoint format: magic + version, a JSON header describing config,
// schedule, conditioning stats, training metadata and the tensor table,
// followed by raw little-endian float32 arrays in table order.

namespace detail {
inline constexpr char kCheckpointMagic[4] = {'F', 'D', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace detail

inline void Denoiser::save_checkpoint(const std::string& path) {
  nlohmann::json header;
  header["config"] = {{"base_width", config_.base_width},
                      {"depth", config_.depth},
                      {"time_embed_dim", config_.time_embed_dim},
                      {"cond_embed_dim", config_.cond_embed_dim}};
  header["schedule"] = {{"total_steps", schedule_.total_steps},
                        {"beta_start", schedule_.beta_start},
                        {"beta_end", schedule_.beta_end}};
  header["conditioning"] = {{"kind", to_string(kind_)},
                            {"mean", stats_.mean},
                            {"std", stats_.stddev}};
  header["training"] = {{"steps", meta_.steps},
                        {"seed", meta_.seed},
                        {"dataset_fingerprint", meta_.dataset_fingerprint}};
  const std::vector<nn::ParamRef> refs = params();
  nlohmann::json tensors = nlohmann::json::array();
  for (const nn::ParamRef& p : refs) {
    tensors.push_back({{"path", p.path}, {"size", p.value->size()}});
  }
  header["tensors"] = tensors;

  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write(detail::kCheckpointMagic, 4);
  const std::uint32_t version = detail::kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t header_len = header_str.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_str.data(), std::streamsize(header_str.size()));
  for (const nn::ParamRef& p : refs) {
    std::vector<float> data(p.value->size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = float((*p.value)[i]);
    out.write(reinterpret_cast<const char*>(data.data()),
              std::streamsize(data.size() * sizeof(float)));
  }
  if (!out) fail(ErrorCode::IoError, "failed writing " + path);
}

inline Denoiser Denoiser::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, 4) != 0) {
    fail(ErrorCode::CheckpointFormat, path + " is not a checkpoint file");
  }
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != detail::kCheckpointVersion) {
    fail(ErrorCode::CheckpointFormat, "unsupported checkpoint version");
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), std::streamsize(header_len));
  if (!in) fail(ErrorCode::CheckpointFormat, "truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CheckpointFormat, std::string("bad checkpoint header: ") + e.what());
  }

  DenoiserConfig config;
  config.base_width = header.at("config").at("base_width").get<int>();
  config.depth = header.at("config").at("depth").get<int>();
  config.time_embed_dim = header.at("config").at("time_embed_dim").get<int>();
  config.cond_embed_dim = header.at("config").at("cond_embed_dim").get<int>();
  ScheduleParams schedule;
  schedule.total_steps = header.at("schedule").at("total_steps").get<int>();
  schedule.beta_start = header.at("schedule").at("beta_start").get<double>();
  schedule.beta_end = header.at("schedule").at("beta_end").get<double>();
  const ConditioningKind kind =
      conditioning_kind_from_string(header.at("conditioning").at("kind").get<std::string>());
  NormalizationStats stats;
  stats.mean = header.at("conditioning").at("mean").get<double>();
  stats.stddev = header.at("conditioning").at("std").get<double>();

  Denoiser model(config, schedule, kind, stats, /*init_seed=*/0);
  model.meta_.steps = header.at("training").at("steps").get<std::uint64_t>();
  model.meta_.seed = header.at("training").at("seed").get<std::uint64_t>();
  model.meta_.dataset_fingerprint =
      header.at("training").at("dataset_fingerprint").get<std::string>();

  const nlohmann::json& tensors = header.at("tensors");
  const std::vector<nn::ParamRef> params = model.params();
  if (tensors.size() != params.size()) {
    fail(ErrorCode::CheckpointFormat, "tensor table does not match the architecture");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string tpath = tensors[i].at("path").get<std::string>();
    const std::size_t tsize = tensors[i].at("size").get<std::size_t>();
    if (tpath != params[i].path || tsize != params[i].value->size()) {
      fail(ErrorCode::CheckpointFormat,
           "tensor " + tpath + " does not match layer " + params[i].path);
    }
    std::vector<float> data(tsize);
    in.read(reinterpret_cast<char*>(data.data()), std::streamsize(tsize * sizeof(float)));
    if (!in) fail(ErrorCode::CheckpointFormat, "truncated tensor data for " + tpath);
    for (std::size_t j = 0; j < tsize; ++j) (*params[i].value)[j] = double(data[j]);
  }
  return model;
}

}  // namespace foildiff
