#pragma once

// The standard fixture: a small convnet (conv, conv, max-pool, reshape,
// dense, softmax) over 16x16 single-channel inputs, with deterministic
// pseudo-random weights. Everything derived from it is reproducible.

#include <json.hpp>
#include <vector>

#include "mico/model.hpp"

namespace mico::test {

/// Graph spec for the 6-op fixture convnet (F32).
nlohmann::json fixture_graph_json();

/// Graph spec for a conv-heavy model: `layers` SAME convolutions over
/// 32x32x8 activations followed by reshape + softmax.
nlohmann::json conv_heavy_graph_json(int layers = 8);

Model fixture_f32_model();

/// Deterministic calibration samples (values in [0, 1]).
std::vector<std::vector<float>> fixture_calibration(size_t count);

/// The quantized fixture: F32 fixture + post-training quantization over
/// 8 calibration samples.
Model fixture_i8_model();

/// Deterministic input tensor for a given seed, matching the fixture input
/// shape, values in [0, 1].
std::vector<float> fixture_input(uint32_t seed);

/// Tiny deterministic PRNG used for fixture data.
class SplitMix {
 public:
  explicit SplitMix(uint64_t seed) : state_(seed) {}
  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }

 private:
  uint64_t state_;
};

}  // namespace mico::test
