#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace foildiff {

enum class ErrorCode {
  // parsing / geometry
  MalformedLine,
  TooFewPoints,
  EmptyInput,
  DegenerateProfile,
  NoLeadingEdge,
  ZeroChord,
  YOutOfRange,
  WrongPointCount,
  // aerodynamics
  SingularSystem,
  EnvelopeExceeded,
  // diffusion / model
  InvalidRange,
  ShapeMismatch,
  ScheduleMismatch,
  NonFiniteInput,
  WidthMismatch,
  ConfigMismatch,
  // training
  EmptyBatch,
  NonFiniteLoss,
  DatasetTooSmall,
  // evaluation
  EmptySet,
  EmptyCohort,
  LengthMismatch,
  DegenerateFit,
  // pipeline
  NoValidProfiles,
  CheckpointScheduleMismatch,
  CheckpointFormat,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::NoLeadingEdge: return "NoLeadingEdge";
    case ErrorCode::ZeroChord: return "ZeroChord";
    case ErrorCode::YOutOfRange: return "YOutOfRange";
    case ErrorCode::WrongPointCount: return "WrongPointCount";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EnvelopeExceeded: return "EnvelopeExceeded";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ScheduleMismatch: return "ScheduleMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptyCohort: return "EmptyCohort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NoValidProfiles: return "NoValidProfiles";
    case ErrorCode::CheckpointScheduleMismatch: return "CheckpointScheduleMismatch";
    case ErrorCode::CheckpointFormat: return "CheckpointFormat";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// splitmix64; used to derive independent sub-seeds from (seed, salt) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(splitmix64(seed) ^ splitmix64(salt + 0x517cc1b727220a95ull));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

// Deterministic RNG: mt19937_64 stream with explicit uniform/Gaussian
// transforms so draws do not depend on library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi]
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = std::uint64_t(hi - lo) + 1;
    return lo + std::int64_t(gen_() % span);
  }

  // standard normal via Box-Muller, one spare cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Keeps a double exactly representable as an IEEE-754 binary32 value.
inline double round_to_f32(double x) { return double(float(x)); }

// FNV-1a over raw bytes; used for dataset fingerprints.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ull;
    }
  }
  void update(double x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof(bits));
    update(&bits, sizeof(bits));
  }
  void update(const std::string& s) { update(s.data(), s.size()); }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

// A channels-by-length block of values; the shape every diffusion and
// denoiser operation works on.
struct Signal {
  int channels = 0;
  int length = 0;
  std::vector<double> v;

  Signal() = default;
  Signal(int c, int l) : channels(c), length(l), v(std::size_t(c) * std::size_t(l), 0.0) {}

  double& operator()(int c, int i) { return v[std::size_t(c) * length + i]; }
  double operator()(int c, int i) const { return v[std::size_t(c) * length + i]; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Signal& o) const { return channels == o.channels && length == o.length; }
};

inline void require_same_shape(const Signal& a, const Signal& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::ShapeMismatch,
         std::string(what) + ": " + std::to_string(a.channels) + "x" + std::to_string(a.length) +
             " vs " + std::to_string(b.channels) + "x" + std::to_string(b.length));
  }
}

}  // namespace foildiff
