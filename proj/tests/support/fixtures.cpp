#include "support/fixtures.hpp"

#include <cstdio>
#include <cstdlib>

#include "mico/converter.hpp"

namespace mico::test {

namespace {

nlohmann::json weights_json(SplitMix& rng, std::initializer_list<uint32_t> shape, double amp) {
  size_t n = 1;
  for (uint32_t d : shape) n *= d;
  nlohmann::json data = nlohmann::json::array();
  for (size_t i = 0; i < n; ++i) data.push_back(rng.uniform(-amp, amp));
  return data;
}

nlohmann::json tensor_json(const std::string& name, std::initializer_list<uint32_t> shape,
                           nlohmann::json data = {}) {
  nlohmann::json t{{"name", name}, {"dtype", "f32"}, {"shape", shape}};
  if (!data.is_null()) t["data"] = std::move(data);
  return t;
}

}  // namespace

nlohmann::json fixture_graph_json() {
  SplitMix rng(0xF1C5EEDull);
  nlohmann::json spec;
  spec["tensors"] = nlohmann::json::array(
      {tensor_json("image", {1, 16, 16, 1}),
       tensor_json("conv1_w", {8, 3, 3, 1}, weights_json(rng, {8, 3, 3, 1}, 0.4)),
       tensor_json("conv1_b", {8}, weights_json(rng, {8}, 0.1)),
       tensor_json("conv2_w", {16, 3, 3, 8}, weights_json(rng, {16, 3, 3, 8}, 0.15)),
       tensor_json("conv2_b", {16}, weights_json(rng, {16}, 0.1)),
       tensor_json("dense_w", {10, 256}, weights_json(rng, {10, 256}, 0.3)),
       tensor_json("dense_b", {10}, weights_json(rng, {10}, 0.2))});
  spec["ops"] = nlohmann::json::array(
      {{{"op", "conv_2d"},
        {"inputs", {"image", "conv1_w", "conv1_b"}},
        {"outputs", {"conv1"}},
        {"params", {{"stride", {1, 1}}, {"padding", "same"}, {"activation", "relu"}}}},
       {{"op", "conv_2d"},
        {"inputs", {"conv1", "conv2_w", "conv2_b"}},
        {"outputs", {"conv2"}},
        {"params", {{"stride", {2, 2}}, {"padding", "same"}, {"activation", "relu"}}}},
       {{"op", "max_pool_2d"},
        {"inputs", {"conv2"}},
        {"outputs", {"pool"}},
        {"params", {{"window", {2, 2}}, {"stride", {2, 2}}, {"padding", "valid"}}}},
       {{"op", "reshape"},
        {"inputs", {"pool"}},
        {"outputs", {"flat"}},
        {"params", {{"new_shape", {1, 256}}}}},
       {{"op", "fully_connected"},
        {"inputs", {"flat", "dense_w", "dense_b"}},
        {"outputs", {"logits"}}},
       {{"op", "softmax"}, {"inputs", {"logits"}}, {"outputs", {"prob"}}}});
  spec["inputs"] = {"image"};
  spec["outputs"] = {"prob"};
  return spec;
}

nlohmann::json conv_heavy_graph_json(int layers) {
  SplitMix rng(0xBEEFCAFEull);
  nlohmann::json spec;
  nlohmann::json tensors = nlohmann::json::array({tensor_json("image", {1, 32, 32, 8})});
  nlohmann::json ops = nlohmann::json::array();
  std::string prev = "image";
  for (int i = 0; i < layers; ++i) {
    const std::string w = "w" + std::to_string(i);
    const std::string b = "b" + std::to_string(i);
    const std::string out = "act" + std::to_string(i);
    tensors.push_back(tensor_json(w, {8, 3, 3, 8}, weights_json(rng, {8, 3, 3, 8}, 0.12)));
    tensors.push_back(tensor_json(b, {8}, weights_json(rng, {8}, 0.05)));
    ops.push_back({{"op", "conv_2d"},
                   {"inputs", {prev, w, b}},
                   {"outputs", {out}},
                   {"params", {{"stride", {1, 1}}, {"padding", "same"}, {"activation", "relu"}}}});
    prev = out;
  }
  ops.push_back({{"op", "reshape"},
                 {"inputs", {prev}},
                 {"outputs", {"flat"}},
                 {"params", {{"new_shape", {1, 8192}}}}});
  ops.push_back({{"op", "softmax"}, {"inputs", {"flat"}}, {"outputs", {"prob"}}});
  spec["tensors"] = std::move(tensors);
  spec["ops"] = std::move(ops);
  spec["inputs"] = {"image"};
  spec["outputs"] = {"prob"};
  return spec;
}

Model fixture_f32_model() {
  auto model = graph_build(fixture_graph_json());
  if (!model.ok()) {
    std::fprintf(stderr, "fixture build failed: %s\n", model.error().message.c_str());
    std::abort();
  }
  return model.take();
}

std::vector<std::vector<float>> fixture_calibration(size_t count) {
  std::vector<std::vector<float>> samples;
  for (size_t i = 0; i < count; ++i) samples.push_back(fixture_input(1000 + i));
  return samples;
}

Model fixture_i8_model() {
  const Model f32 = fixture_f32_model();
  auto i8 = quantize_post_training(f32, fixture_calibration(8));
  if (!i8.ok()) {
    std::fprintf(stderr, "fixture quantization failed: %s\n", i8.error().message.c_str());
    std::abort();
  }
  return i8.take();
}

std::vector<float> fixture_input(uint32_t seed) {
  SplitMix rng(seed);
  std::vector<float> input(16 * 16);
  for (float& v : input) v = static_cast<float>(rng.uniform(0.0, 1.0));
  return input;
}

}  // namespace mico::test
