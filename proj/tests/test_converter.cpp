#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "mico/converter.hpp"
#include "mico/interpreter.hpp"
#include "mico/model_json.hpp"
#include "mico/serialize.hpp"
#include "support/fixtures.hpp"
#include "support/random_models.hpp"

using namespace mico;
using namespace mico::test;

namespace {

nlohmann::json two_op_spec() {
  nlohmann::json spec;
  spec["tensors"] = nlohmann::json::array(
      {{{"name", "in"}, {"dtype", "f32"}, {"shape", {1, 4, 4, 1}}},
       {{"name", "w"},
        {"dtype", "f32"},
        {"shape", {2, 3, 3, 1}},
        {"data", std::vector<float>(18, 0.1f)}},
       {{"name", "b"}, {"dtype", "f32"}, {"shape", {2}}, {"data", {0.0f, 0.0f}}}});
  spec["ops"] = nlohmann::json::array(
      {{{"op", "conv_2d"},
        {"inputs", {"in", "w", "b"}},
        {"outputs", {"c"}},
        {"params", {{"padding", "same"}}}},
       {{"op", "softmax"}, {"inputs", {"c"}}, {"outputs", {"p"}}}});
  spec["inputs"] = {"in"};
  spec["outputs"] = {"p"};
  return spec;
}

std::vector<float> run_f32(const Model& model, const std::vector<float>& input) {
  std::vector<uint8_t> memory(1 << 20);
  Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
  const Registry registry = Registry::with_reference_kernels();
  Interpreter interp = Interpreter::create(model, registry, arena).take();
  REQUIRE(interp.allocate().ok());
  auto in = interp.input_view(0).take();
  std::memcpy(in.data.data(), input.data(), in.data.size());
  REQUIRE(interp.invoke().ok());
  auto out = interp.output_view(0).take();
  return {out.f32(), out.f32() + out.elem_count()};
}

std::vector<float> run_i8_dequant(const Model& model, const std::vector<float>& input) {
  std::vector<uint8_t> memory(1 << 20);
  Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
  const Registry registry = Registry::with_reference_kernels();
  Interpreter interp = Interpreter::create(model, registry, arena).take();
  REQUIRE(interp.allocate().ok());
  auto in = interp.input_view(0).take();
  const QuantParams in_q = *model.tensors[model.inputs[0]].quant;
  for (size_t i = 0; i < input.size(); ++i)
    in.i8()[i] = kernels::quantize_value(input[i], in_q);
  REQUIRE(interp.invoke().ok());
  auto out = interp.output_view(0).take();
  const QuantParams out_q = *model.tensors[model.outputs[0]].quant;
  std::vector<float> values(out.elem_count());
  for (size_t i = 0; i < values.size(); ++i)
    values[i] = out_q.scale * static_cast<float>(out.i8()[i] - out_q.zero_point);
  return values;
}

}  // namespace

TEST_CASE("graph_build wires a two-op chain") {
  auto model = graph_build(two_op_spec());
  REQUIRE(model.ok());
  CHECK(model.value().ops.size() == 2);
  CHECK(validate_model(model.value()).ok());
  // implicit intermediate got its shape inferred
  CHECK(model.value().tensors[3].shape == Shape{1, 4, 4, 2});
}

TEST_CASE("graph_build rejects non-topological op order") {
  auto spec = two_op_spec();
  std::swap(spec["ops"][0], spec["ops"][1]);
  CHECK(graph_build(spec).error().code == ErrCode::CycleOrOrderError);
}

TEST_CASE("graph_build error taxonomy") {
  SUBCASE("unknown opcode") {
    auto spec = two_op_spec();
    spec["ops"][0]["op"] = "transpose";
    CHECK(graph_build(spec).error().code == ErrCode::UnknownOpcode);
  }
  SUBCASE("unknown tensor") {
    auto spec = two_op_spec();
    spec["ops"][0]["inputs"][0] = "ghost";
    CHECK(graph_build(spec).error().code == ErrCode::ParseError);
  }
  SUBCASE("declared shape conflicts with inference") {
    auto spec = two_op_spec();
    spec["tensors"].push_back({{"name", "c"}, {"dtype", "f32"}, {"shape", {1, 9, 9, 9}}});
    CHECK(graph_build(spec).error().code == ErrCode::ShapeInferenceError);
  }
  SUBCASE("const data length mismatch") {
    auto spec = two_op_spec();
    spec["tensors"][1]["data"] = {0.1f, 0.2f};
    CHECK(graph_build(spec).error().code == ErrCode::ParseError);
  }
  SUBCASE("not json at all") {
    CHECK(graph_build_text("{oops").error().code == ErrCode::ParseError);
  }
}

TEST_CASE("the fixture builds into the standard 6-op model") {
  const Model m = fixture_f32_model();
  CHECK(m.ops.size() == 6);
  CHECK(m.ops[0].opcode == Opcode::CONV_2D);
  CHECK(m.ops[1].opcode == Opcode::CONV_2D);
  CHECK(m.ops[2].opcode == Opcode::MAX_POOL_2D);
  CHECK(m.ops[3].opcode == Opcode::RESHAPE);
  CHECK(m.ops[4].opcode == Opcode::FULLY_CONNECTED);
  CHECK(m.ops[5].opcode == Opcode::SOFTMAX);
  CHECK(validate_model(m).ok());
  CHECK(m.tensors[m.outputs[0]].shape == Shape{1, 10});
}

TEST_CASE("calibration ranges set the affine params") {
  // relu passthrough model: input range is observed directly
  nlohmann::json spec;
  spec["tensors"] = nlohmann::json::array({{{"name", "x"}, {"dtype", "f32"}, {"shape", {1, 4}}}});
  spec["ops"] =
      nlohmann::json::array({{{"op", "relu"}, {"inputs", {"x"}}, {"outputs", {"y"}}}});
  spec["inputs"] = {"x"};
  spec["outputs"] = {"y"};
  Model model = graph_build(spec).take();

  SUBCASE("range [0, 2.55] gives scale 0.01, zp -128") {
    std::vector<std::vector<float>> calibration = {{0.0f, 1.0f, 2.0f, 2.55f}};
    Model q = quantize_post_training(model, calibration).take();
    const QuantParams in_q = *q.tensors[q.inputs[0]].quant;
    CHECK(in_q.scale == doctest::Approx(0.01f));
    CHECK(in_q.zero_point == -128);
    // relu output inherits its input's params
    CHECK(*q.tensors[q.outputs[0]].quant == in_q);
  }
  SUBCASE("constant zero falls back to scale 1, zp 0") {
    std::vector<std::vector<float>> calibration = {{0.0f, 0.0f, 0.0f, 0.0f}};
    Model q = quantize_post_training(model, calibration).take();
    const QuantParams in_q = *q.tensors[q.inputs[0]].quant;
    CHECK(in_q.scale == 1.0f);
    CHECK(in_q.zero_point == 0);
  }
}

TEST_CASE("quantization error taxonomy") {
  Model model = fixture_f32_model();
  SUBCASE("empty calibration") {
    CHECK(quantize_post_training(model, {}).error().code == ErrCode::EmptyCalibration);
  }
  SUBCASE("already-quantized ops are unsupported") {
    nlohmann::json spec;
    spec["tensors"] = nlohmann::json::array(
        {{{"name", "x"}, {"dtype", "f32"}, {"shape", {1, 4}}},
         {{"name", "y"},
          {"dtype", "i8"},
          {"shape", {1, 4}},
          {"quant", {{"scale", 0.1}, {"zero_point", 0}}}}});
    spec["ops"] =
        nlohmann::json::array({{{"op", "quantize"}, {"inputs", {"x"}}, {"outputs", {"y"}}}});
    spec["inputs"] = {"x"};
    spec["outputs"] = {"y"};
    Model qmodel = graph_build(spec).take();
    std::vector<std::vector<float>> calibration = {{0, 0, 0, 0}};
    CHECK(quantize_post_training(qmodel, calibration).error().code == ErrCode::UnsupportedOp);
  }
  SUBCASE("calibration size mismatch") {
    std::vector<std::vector<float>> short_calib = {{1.0f, 2.0f}};
    CHECK(quantize_post_training(model, short_calib).error().code == ErrCode::ShapeMismatch);
  }
}

TEST_CASE("softmax outputs are pinned to scale 1/256, zp -128") {
  const Model q = fixture_i8_model();
  const QuantParams out_q = *q.tensors[q.outputs[0]].quant;
  CHECK(out_q.scale == doctest::Approx(1.0f / 256.0f));
  CHECK(out_q.zero_point == -128);
  // biases are I32 with scale = s_in * s_w, zp 0
  for (size_t i = 0; i < q.tensors.size(); ++i) {
    const TensorSpec& t = q.tensors[i];
    if (t.dtype != DType::I32) continue;
    CHECK(t.quant->zero_point == 0);
  }
  CHECK(validate_model(q).ok());
}

TEST_CASE("quantized fixture tracks the float fixture") {
  const Model f32 = fixture_f32_model();
  const Model i8 = fixture_i8_model();
  const QuantParams out_q = *i8.tensors[i8.outputs[0]].quant;

  // on the calibration inputs: outputs within 2 quanta, argmax preserved
  for (const auto& sample : fixture_calibration(8)) {
    const auto f = run_f32(f32, sample);
    const auto qd = run_i8_dequant(i8, sample);
    REQUIRE(f.size() == qd.size());
    for (size_t i = 0; i < f.size(); ++i)
      CHECK(std::abs(f[i] - qd[i]) <= 2.0f * out_q.scale + 1e-6f);
    const size_t f_arg = std::max_element(f.begin(), f.end()) - f.begin();
    const size_t q_arg = std::max_element(qd.begin(), qd.end()) - qd.begin();
    CHECK(f_arg == q_arg);
  }

  // argmax agreement on fresh random inputs
  int agree = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const auto input = fixture_input(5000 + t);
    const auto f = run_f32(f32, input);
    const auto qd = run_i8_dequant(i8, input);
    const size_t f_arg = std::max_element(f.begin(), f.end()) - f.begin();
    const size_t q_arg = std::max_element(qd.begin(), qd.end()) - qd.begin();
    agree += f_arg == q_arg;
  }
  CHECK(agree >= trials * 9 / 10);
}

TEST_CASE("attach_offline_plan stores a decodable blob") {
  const Model model = fixture_i8_model();
  Model planned = attach_offline_plan(model).take();
  auto blob = get_metadata(planned, kOfflinePlanKey);
  REQUIRE(blob.has_value());
  REQUIRE(blob->size() >= 4);
  uint32_t count = 0;
  std::memcpy(&count, blob->data(), 4);
  CHECK(blob->size() == 4 + size_t{count} * 4);

  SUBCASE("attaching twice replaces the blob") {
    Model twice = attach_offline_plan(planned).take();
    size_t plan_keys = 0;
    for (const auto& [key, value] : twice.metadata) plan_keys += key == kOfflinePlanKey;
    CHECK(plan_keys == 1);
    CHECK(get_metadata(twice, kOfflinePlanKey)->size() == blob->size());
  }
  SUBCASE("the planned model serializes and reloads") {
    auto bytes = serialize_model(planned);
    REQUIRE(bytes.ok());
    auto reparsed = parse_model(bytes.value());
    REQUIRE(reparsed.ok());
    CHECK(reparsed.value() == planned);
  }
}

TEST_CASE("model json form round-trips") {
  std::mt19937 rng(17);
  for (int i = 0; i < 50; ++i) {
    const Model m = random_valid_model(rng);
    auto back = model_from_json(model_to_json(m));
    REQUIRE(back.ok());
    CHECK(back.value() == m);
  }
  const Model fixture = fixture_i8_model();
  auto back = model_from_json(model_to_json(fixture));
  REQUIRE(back.ok());
  CHECK(back.value() == fixture);
}

TEST_CASE("base64 corner cases") {
  CHECK(base64_encode({}) == "");
  const std::vector<uint8_t> one = {0xFF};
  CHECK(base64_encode(one) == "/w==");
  auto decoded = base64_decode("/w==");
  REQUIRE(decoded.ok());
  CHECK(decoded.value() == one);
  CHECK(!base64_decode("abc").ok());     // bad length
  CHECK(!base64_decode("a=bc").ok());    // interior padding
  CHECK(!base64_decode("a!cd").ok());    // bad character
}
