// Acceptance suite: one check per shipping criterion, one PASS/FAIL line
// each, exercising the library and the CLI binary end to end.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mico/converter.hpp"
#include "mico/interpreter.hpp"
#include "mico/serialize.hpp"
#include "mico/tensor_file.hpp"
#include "support/fixtures.hpp"
#include "support/host_tensor.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

using namespace mico;
using namespace mico::test;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail = "") {
  std::printf("[%2d] %-44s %s%s%s%s\n", index, name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : "  (", detail.c_str(), detail.empty() ? "" : ")");
  if (!pass) ++failures;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "mico_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Cmd {
  int code;
  std::string out;
};

Cmd run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const std::string command =
      std::string("\"") + MICO_CLI_PATH + "\" " + args + " > " + out.string() + " 2>/dev/null";
  const int raw = std::system(command.c_str());
  std::ifstream f(out, std::ios::binary);
  return Cmd{WEXITSTATUS(raw),
             std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>())};
}

std::string write_model_file(const Model& model, const char* name) {
  const std::string path = (work_dir() / name).string();
  auto bytes = serialize_model(model);
  if (!bytes.ok() || !write_file(path, bytes.value()).ok()) {
    std::fprintf(stderr, "cannot write %s\n", path.c_str());
    std::exit(1);
  }
  return path;
}

// ---------------------------------------------------------------- criterion 1

void criterion_overhead() {
  const std::string fixture = write_model_file(fixture_i8_model(), "fixture_i8.mico");
  Cmd fix = run_cli("bench --model " + fixture + " --arena-bytes 65536 --runs 100 --json");
  double fixture_overhead = 1.0;
  if (fix.code == 0)
    fixture_overhead = nlohmann::json::parse(fix.out).at("overhead_ratio").get<double>();

  auto heavy_model = graph_build(conv_heavy_graph_json(8));
  double heavy_overhead = 1.0;
  if (heavy_model.ok()) {
    const std::string heavy = write_model_file(heavy_model.value(), "conv_heavy.mico");
    Cmd hv = run_cli("bench --model " + heavy + " --arena-bytes 1048576 --runs 10 --json");
    if (hv.code == 0)
      heavy_overhead = nlohmann::json::parse(hv.out).at("overhead_ratio").get<double>();
  }

  char detail[128];
  std::snprintf(detail, sizeof(detail), "fixture %.3f%% < 10%%, conv-heavy %.4f%% < 1%%",
                fixture_overhead * 100.0, heavy_overhead * 100.0);
  report(1, "interpreter overhead shape", fixture_overhead < 0.10 && heavy_overhead < 0.01,
         detail);
}

// ---------------------------------------------------------------- criterion 2

void criterion_planner_safety() {
  std::mt19937 rng(20260808);
  bool pass = true;
  for (int i = 0; i < 10000 && pass; ++i) {
    const auto requests = random_requests(rng, 100, 512, 40);
    const MemoryPlan greedy = plan_greedy(requests, 1);
    pass = validate_plan(requests, greedy).empty() &&
           greedy.arena_size <= plan_naive(requests, 1).arena_size;
  }
  report(2, "planner safety and dominance, 1e4 instances", pass);
}

// ---------------------------------------------------------------- criterion 3

void criterion_optimality_sandwich() {
  std::mt19937 rng(31337);
  bool pass = true;
  for (int i = 0; i < 1000 && pass; ++i) {
    const auto requests = random_requests(rng, 6, 64, 8);
    auto optimal = optimal_plan_bruteforce(requests);
    pass = optimal.ok() && optimal.value() <= plan_greedy(requests, 1).arena_size;
  }
  const std::vector<AllocationRequest> xyz = {{0, 8, 0, 1}, {1, 4, 1, 2}, {2, 8, 2, 3}};
  const std::vector<AllocationRequest> clique = {{0, 10, 0, 2}, {1, 20, 1, 3}, {2, 15, 2, 4}};
  pass = pass && plan_greedy(xyz, 1).arena_size == 12 &&
         optimal_plan_bruteforce(xyz).value() == 12 &&
         plan_greedy(clique, 1).arena_size == 45 &&
         optimal_plan_bruteforce(clique).value() == 45;
  report(3, "planner optimality sandwich, 1e3 instances", pass);
}

// ---------------------------------------------------------------- criterion 4

void criterion_compaction() {
  // eight staggered buffers; only consecutive lifetimes overlap
  std::vector<AllocationRequest> staggered;
  for (uint32_t i = 0; i < 8; ++i)
    staggered.push_back({i, 64 + 8 * i, static_cast<int32_t>(i), static_cast<int32_t>(i) + 1});
  const size_t greedy = plan_greedy(staggered, 1).arena_size;
  const size_t naive = plan_naive(staggered, 1).arena_size;
  char detail[96];
  std::snprintf(detail, sizeof(detail), "greedy %zu vs naive %zu, ratio %.2f", greedy, naive,
                static_cast<double>(greedy) / naive);
  report(4, "staggered-lifetime compaction >= 40%", greedy * 10 <= naive * 6, detail);
}

// ---------------------------------------------------------------- criterion 5

void criterion_zero_alloc_invoke() {
  const Model model = fixture_i8_model();
  std::vector<uint8_t> memory(1 << 20);
  Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
  const Registry registry = Registry::with_reference_kernels();
  auto interp = Interpreter::create(model, registry, arena);
  bool pass = interp.ok() && interp.value().allocate().ok();
  if (pass) {
    auto in = interp.value().input_view(0).take();
    const auto values = fixture_input(1);
    const QuantParams q = *model.tensors[model.inputs[0]].quant;
    for (size_t i = 0; i < values.size(); ++i)
      in.i8()[i] = kernels::quantize_value(values[i], q);
    const uint64_t mutations = arena.mutation_count();
    for (int i = 0; i < 1000 && pass; ++i) pass = interp.value().invoke().ok();
    pass = pass && arena.mutation_count() == mutations;
  }
  report(5, "zero-allocation invoke, 1000 runs", pass);
}

// ---------------------------------------------------------------- criterion 6

// Plain reimplementation of the two-stack rules, maintained independently of
// the Arena class.
struct ShadowArena {
  size_t cap, head = 0, tail, cursor = 0;
  int temps = 0;

  explicit ShadowArena(size_t capacity) : cap(capacity), tail(capacity) {}

  static size_t up(size_t v, size_t a) { return (v + a - 1) / a * a; }
  static size_t down(size_t v, size_t a) { return v / a * a; }

  // each op returns the offset, or nullopt for the expected error
  std::optional<size_t> alloc_head(size_t size, size_t align, bool& temp_err) {
    temp_err = temps > 0;
    if (temp_err) return std::nullopt;
    const size_t offset = up(head, align);
    if (offset + size > tail) return std::nullopt;
    head = offset + size;
    cursor = head;
    return offset;
  }
  std::optional<size_t> alloc_tail(size_t size, size_t align, bool& temp_err) {
    temp_err = temps > 0;
    if (temp_err) return std::nullopt;
    if (size > tail) return std::nullopt;
    const size_t new_tail = down(tail - size, align);
    if (new_tail < head) return std::nullopt;
    tail = new_tail;
    return new_tail;
  }
  std::optional<size_t> alloc_temp(size_t size, size_t align) {
    const size_t offset = up(cursor, align);
    if (offset + size > tail) return std::nullopt;
    cursor = offset + size;
    ++temps;
    return offset;
  }
  void reset_temps() {
    temps = 0;
    cursor = head;
  }
  bool reset_head_to_zero(bool& temp_err) {
    temp_err = temps > 0;
    if (temp_err) return false;
    head = 0;
    cursor = 0;
    return true;
  }
};

bool enumerate_sequences(Arena arena, ShadowArena shadow, int depth, long& checked) {
  if (depth == 0) return true;
  static const size_t sizes[] = {1, 16, 100, 240};
  static const size_t aligns[] = {1, 16};

  for (int op = 0; op < 5; ++op) {
    if (op >= 3) {  // reset_temps / reset_head take no parameters
      Arena a2 = arena;
      ShadowArena s2 = shadow;
      if (op == 3) {
        a2.reset_temps();
        s2.reset_temps();
      } else {
        bool temp_err = false;
        const bool shadow_ok = s2.reset_head_to_zero(temp_err);
        Status st = a2.reset_head(0);
        if (st.ok() != shadow_ok) return false;
        if (!st.ok() && temp_err != (st.code() == ErrCode::TempOutstanding)) return false;
      }
      ++checked;
      if (!enumerate_sequences(a2, s2, depth - 1, checked)) return false;
      continue;
    }
    for (size_t size : sizes)
      for (size_t align : aligns) {
        Arena a2 = arena;
        ShadowArena s2 = shadow;
        bool temp_err = false;
        std::optional<size_t> expected;
        ErrCode expected_code = ErrCode::ArenaExhausted;
        if (op == 0) {
          expected = s2.alloc_head(size, align, temp_err);
          if (temp_err) expected_code = ErrCode::TempOutstanding;
          auto got = a2.alloc_head(size, align);
          if (got.ok() != expected.has_value()) return false;
          if (got.ok() && got.value() != *expected) return false;
          if (!got.ok() && got.error().code != expected_code) return false;
        } else if (op == 1) {
          expected = s2.alloc_tail(size, align, temp_err);
          if (temp_err) expected_code = ErrCode::TempOutstanding;
          auto got = a2.alloc_tail(size, align);
          if (got.ok() != expected.has_value()) return false;
          if (got.ok() && got.value() != *expected) return false;
          if (!got.ok() && got.error().code != expected_code) return false;
        } else {
          expected = s2.alloc_temp(size, align);
          auto got = a2.alloc_temp(size, align);
          if (got.ok() != expected.has_value()) return false;
          if (got.ok() && got.value().offset != *expected) return false;
          if (!got.ok() && got.error().code != ErrCode::ArenaExhausted) return false;
        }
        if (a2.head() > a2.tail()) return false;
        ++checked;
        if (!enumerate_sequences(a2, s2, depth - 1, checked)) return false;
      }
  }
  return true;
}

void criterion_two_stack_exhaustion() {
  Arena arena = Arena::create(size_t{256}).take();
  ShadowArena shadow(256);
  long checked = 0;
  const bool pass = enumerate_sequences(arena, shadow, 4, checked);
  char detail[64];
  std::snprintf(detail, sizeof(detail), "%ld operations checked", checked);
  report(6, "two-stack exhaustion, exhaustive enumeration", pass, detail);
}

// ---------------------------------------------------------------- criterion 7

void criterion_kernel_oracles() {
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> dim_d(1, 8), ch_d(1, 4), k_d(1, 3), stride_d(1, 2);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<float> f_d(-2.0f, 2.0f);
  std::uniform_int_distribution<int> q_d(-128, 127);
  std::uniform_real_distribution<float> scale_d(0.01f, 0.3f);
  std::uniform_int_distribution<int32_t> zp_d(-20, 20);

  auto floats = [&](size_t n, float amp = 2.0f) {
    std::vector<float> v(n);
    for (auto& x : v) x = f_d(rng) * amp / 2.0f;
    return v;
  };
  auto i8s = [&](size_t n) {
    std::vector<int8_t> v(n);
    for (auto& x : v) x = static_cast<int8_t>(q_d(rng));
    return v;
  };
  auto quant = [&]() { return QuantParams{scale_d(rng), zp_d(rng)}; };

  bool pass = true;
  int f32_cases = 0, i8_cases = 0;
  for (int round = 0; round < 3000 && pass; ++round) {
    const uint32_t h = dim_d(rng), w = dim_d(rng), c = ch_d(rng), oc = ch_d(rng);
    const uint32_t kh = std::min<uint32_t>(k_d(rng), h), kw = std::min<uint32_t>(k_d(rng), w);
    OpParams p;
    p.stride_h = p.stride_w = stride_d(rng);
    p.padding = coin(rng) ? Padding::SAME : Padding::VALID;
    p.activation = coin(rng) ? Activation::RELU : Activation::NONE;

    switch (round % 3) {
      case 0: {  // conv f32 + i8
        HostTensor x = HostTensor::f32({1, h, w, c}, floats(size_t{h} * w * c));
        HostTensor wt = HostTensor::f32({oc, kh, kw, c}, floats(size_t{oc} * kh * kw * c));
        HostTensor b = HostTensor::f32({oc}, floats(oc, 1.0f));
        HostTensor expected = oracle_conv_2d_f32(x, wt, b, p);
        HostTensor got = HostTensor::zeros(DType::F32, expected.shape);
        auto view = got.mview();
        pass = kernels::conv_2d(x.cview(), wt.cview(), b.cview(), p, view).ok() &&
               std::memcmp(got.bytes.data(), expected.bytes.data(), got.bytes.size()) == 0;
        ++f32_cases;

        if (pass) {
          const QuantParams in_q = quant(), w_q = quant(), out_q = quant();
          HostTensor xq = HostTensor::i8({1, h, w, c}, i8s(size_t{h} * w * c), in_q);
          HostTensor wq = HostTensor::i8({oc, kh, kw, c}, i8s(size_t{oc} * kh * kw * c), w_q);
          std::vector<int32_t> bias(oc);
          for (auto& v : bias) v = q_d(rng) * 4;
          HostTensor bq =
              HostTensor::i32({oc}, bias, QuantParams{in_q.scale * w_q.scale, 0});
          HostTensor oracle = oracle_float_then_quantize_conv(xq, wq, bq, p, out_q, false);
          HostTensor gotq = HostTensor::zeros(DType::I8, oracle.shape, out_q);
          auto viewq = gotq.mview();
          pass = kernels::conv_2d(xq.cview(), wq.cview(), bq.cview(), p, viewq).ok();
          for (size_t i = 0; pass && i < oracle.elem_count(); ++i)
            pass = std::abs(static_cast<int>(gotq.i8s()[i]) - oracle.i8s()[i]) <= 1;
          ++i8_cases;
        }
        break;
      }
      case 1: {  // depthwise f32 + i8
        const int mult = coin(rng) + 1;
        p.depth_multiplier = mult;
        HostTensor x = HostTensor::f32({1, h, w, c}, floats(size_t{h} * w * c));
        HostTensor wt =
            HostTensor::f32({1, kh, kw, c * mult}, floats(size_t{kh} * kw * c * mult));
        HostTensor b = HostTensor::f32({c * mult}, floats(size_t{c} * mult, 1.0f));
        HostTensor expected = oracle_depthwise_f32(x, wt, b, p);
        HostTensor got = HostTensor::zeros(DType::F32, expected.shape);
        auto view = got.mview();
        pass = kernels::depthwise_conv_2d(x.cview(), wt.cview(), b.cview(), p, view).ok() &&
               std::memcmp(got.bytes.data(), expected.bytes.data(), got.bytes.size()) == 0;
        ++f32_cases;

        if (pass) {
          const QuantParams in_q = quant(), w_q = quant(), out_q = quant();
          HostTensor xq = HostTensor::i8({1, h, w, c}, i8s(size_t{h} * w * c), in_q);
          HostTensor wq = HostTensor::i8({1, kh, kw, c * mult}, i8s(size_t{kh} * kw * c * mult), w_q);
          std::vector<int32_t> bias(size_t{c} * mult);
          for (auto& v : bias) v = q_d(rng) * 4;
          HostTensor bq = HostTensor::i32({c * mult}, bias, QuantParams{in_q.scale * w_q.scale, 0});
          HostTensor oracle = oracle_float_then_quantize_conv(xq, wq, bq, p, out_q, true);
          HostTensor gotq = HostTensor::zeros(DType::I8, oracle.shape, out_q);
          auto viewq = gotq.mview();
          pass = kernels::depthwise_conv_2d(xq.cview(), wq.cview(), bq.cview(), p, viewq).ok();
          for (size_t i = 0; pass && i < oracle.elem_count(); ++i)
            pass = std::abs(static_cast<int>(gotq.i8s()[i]) - oracle.i8s()[i]) <= 1;
          ++i8_cases;
        }
        break;
      }
      default: {  // fully connected f32 + i8
        const uint32_t batch = 1 + coin(rng), in_n = 1 + dim_d(rng), out_n = ch_d(rng);
        OpParams fp;
        fp.activation = p.activation;
        HostTensor x = HostTensor::f32({batch, in_n}, floats(size_t{batch} * in_n));
        HostTensor wt = HostTensor::f32({out_n, in_n}, floats(size_t{out_n} * in_n));
        HostTensor b = HostTensor::f32({out_n}, floats(out_n, 1.0f));
        HostTensor expected = oracle_fully_connected_f32(x, wt, b, fp);
        HostTensor got = HostTensor::zeros(DType::F32, expected.shape);
        auto view = got.mview();
        pass = kernels::fully_connected(x.cview(), wt.cview(), b.cview(), fp, view).ok() &&
               std::memcmp(got.bytes.data(), expected.bytes.data(), got.bytes.size()) == 0;
        ++f32_cases;

        if (pass) {
          const QuantParams in_q = quant(), w_q = quant(), out_q = quant();
          HostTensor xq = HostTensor::i8({batch, in_n}, i8s(size_t{batch} * in_n), in_q);
          HostTensor wq = HostTensor::i8({out_n, in_n}, i8s(size_t{out_n} * in_n), w_q);
          std::vector<int32_t> bias(out_n);
          for (auto& v : bias) v = q_d(rng) * 4;
          HostTensor bq = HostTensor::i32({out_n}, bias, QuantParams{in_q.scale * w_q.scale, 0});
          HostTensor oracle = oracle_float_then_quantize_fc(xq, wq, bq, fp, out_q);
          HostTensor gotq = HostTensor::zeros(DType::I8, oracle.shape, out_q);
          auto viewq = gotq.mview();
          pass = kernels::fully_connected(xq.cview(), wq.cview(), bq.cview(), fp, viewq).ok();
          for (size_t i = 0; pass && i < oracle.elem_count(); ++i)
            pass = std::abs(static_cast<int>(gotq.i8s()[i]) - oracle.i8s()[i]) <= 1;
          ++i8_cases;
        }
        break;
      }
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "%d f32 bit-exact, %d i8 within 1 quantum", f32_cases,
                i8_cases);
  report(7, "kernel oracle equivalence, 1e3 shapes per kernel", pass, detail);
}

// ---------------------------------------------------------------- criterion 8

std::vector<uint8_t> oracle_fixture_output(const Model& model,
                                           const std::vector<float>& input_values) {
  auto t = [&](const char* name) -> const TensorSpec& {
    for (const auto& spec : model.tensors)
      if (spec.name == name) return spec;
    std::abort();
  };
  auto const_tensor = [&](const char* name) {
    const TensorSpec& spec = t(name);
    const auto bytes = model.buffers[spec.buffer_index].bytes();
    return HostTensor{spec.dtype, spec.shape, spec.quant, {bytes.begin(), bytes.end()}};
  };
  const TensorSpec& in_spec = t("image");
  HostTensor image = HostTensor::zeros(DType::I8, in_spec.shape, in_spec.quant);
  for (size_t i = 0; i < input_values.size(); ++i)
    image.i8s()[i] = kernels::quantize_value(input_values[i], *in_spec.quant);

  OpParams conv1_p;
  conv1_p.padding = Padding::SAME;
  conv1_p.activation = Activation::RELU;
  HostTensor conv1 = oracle_conv_2d_i8(image, const_tensor("conv1_w"), const_tensor("conv1_b"),
                                       conv1_p, *t("conv1").quant);
  OpParams conv2_p = conv1_p;
  conv2_p.stride_h = conv2_p.stride_w = 2;
  HostTensor conv2 = oracle_conv_2d_i8(conv1, const_tensor("conv2_w"), const_tensor("conv2_b"),
                                       conv2_p, *t("conv2").quant);
  OpParams pool_p;
  pool_p.filter_h = pool_p.filter_w = 2;
  pool_p.stride_h = pool_p.stride_w = 2;
  HostTensor pool = oracle_max_pool_i8(conv2, pool_p);
  pool.shape = Shape{1, 256};
  HostTensor logits = oracle_fully_connected_i8(pool, const_tensor("dense_w"),
                                                const_tensor("dense_b"), OpParams{},
                                                *t("logits").quant);
  HostTensor prob = oracle_softmax_i8(logits, *t("prob").quant);
  return prob.bytes;
}

void criterion_end_to_end_golden() {
  const Model model = fixture_i8_model();
  const auto input_values = fixture_input(42);
  const std::vector<uint8_t> expected = oracle_fixture_output(model, input_values);

  const std::string model_path = write_model_file(model, "golden_fixture.mico");
  const std::string planned_path =
      write_model_file(attach_offline_plan(model).take(), "golden_fixture_planned.mico");
  const std::string input_path = (work_dir() / "golden_input.mten").string();
  const QuantParams in_q = *model.tensors[model.inputs[0]].quant;
  std::vector<uint8_t> q(input_values.size());
  for (size_t i = 0; i < input_values.size(); ++i)
    q[i] = static_cast<uint8_t>(kernels::quantize_value(input_values[i], in_q));
  (void)write_tensor_file(input_path, DType::I8, Shape{1, 16, 16, 1}, q);

  auto run_path = [&](const std::string& m, const char* out_name) -> std::vector<uint8_t> {
    const std::string out = (work_dir() / out_name).string();
    Cmd cmd = run_cli("run --model " + m + " --arena-bytes 65536 --input " + input_path +
                      " --output " + out);
    if (cmd.code != 0) return {};
    auto tf = read_tensor_file(out);
    if (!tf.ok()) return {};
    return tf.value().data;
  };

  const auto greedy_out = run_path(model_path, "golden_out.mten");
  const auto offline_out = run_path(planned_path, "golden_out_planned.mten");

  // frozen from the first verified oracle composition of this fixture
  static const int8_t kFrozen[10] = {-117, -110, -90, -79, -113, -86, -118, -111, -90, -109};
  const bool frozen_match =
      expected.size() == 10 &&
      std::memcmp(expected.data(), kFrozen, sizeof(kFrozen)) == 0;

  const bool pass = !greedy_out.empty() && greedy_out == expected && offline_out == expected &&
                    frozen_match;
  report(8, "end-to-end golden via cmd_run", pass);
}

// ---------------------------------------------------------------- criterion 9

void criterion_multitenancy() {
  const Model model_a = fixture_i8_model();
  const Model model_b = fixture_f32_model();
  const Registry registry = Registry::with_reference_kernels();

  auto solo = [&](const Model& model, uint32_t seed, MemoryReport& rep) {
    std::vector<uint8_t> memory(1 << 20);
    Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
    Interpreter interp = Interpreter::create(model, registry, arena).take();
    if (!interp.allocate().ok()) std::exit(1);
    rep = interp.memory_report().take();
    auto in = interp.input_view(0).take();
    const auto values = fixture_input(seed);
    if (in.dtype == DType::F32) {
      std::memcpy(in.data.data(), values.data(), in.data.size());
    } else {
      const QuantParams q = *model.tensors[model.inputs[0]].quant;
      for (size_t i = 0; i < values.size(); ++i)
        in.i8()[i] = kernels::quantize_value(values[i], q);
    }
    if (!interp.invoke().ok()) std::exit(1);
    auto out = interp.output_view(0).take();
    return std::vector<uint8_t>(out.data.begin(), out.data.end());
  };

  MemoryReport rep_a, rep_b;
  const auto out_a = solo(model_a, 7, rep_a);
  const auto out_b = solo(model_b, 8, rep_b);

  std::vector<uint8_t> memory(1 << 20);
  Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
  Interpreter a = Interpreter::create(model_a, registry, arena).take();
  Interpreter b = Interpreter::create(model_b, registry, arena).take();
  bool pass = a.allocate().ok() && b.allocate().ok();
  if (pass) {
    const ArenaUsage usage = arena.usage();
    pass = usage.persistent_bytes == rep_a.persistent_bytes + rep_b.persistent_bytes &&
           usage.nonpersistent_bytes ==
               std::max(rep_a.nonpersistent_bytes, rep_b.nonpersistent_bytes);
  }
  if (pass) {
    auto write_and_invoke = [&](Interpreter& interp, const Model& model, uint32_t seed) {
      auto in = interp.input_view(0).take();
      const auto values = fixture_input(seed);
      if (in.dtype == DType::F32) {
        std::memcpy(in.data.data(), values.data(), in.data.size());
      } else {
        const QuantParams q = *model.tensors[model.inputs[0]].quant;
        for (size_t i = 0; i < values.size(); ++i)
          in.i8()[i] = kernels::quantize_value(values[i], q);
      }
      if (!interp.invoke().ok()) return std::vector<uint8_t>{};
      auto out = interp.output_view(0).take();
      return std::vector<uint8_t>(out.data.begin(), out.data.end());
    };
    pass = write_and_invoke(a, model_a, 7) == out_a && write_and_invoke(b, model_b, 8) == out_b &&
           write_and_invoke(a, model_a, 7) == out_a;
  }
  report(9, "multitenancy accounting and isolation", pass);
}

// --------------------------------------------------------------- criterion 10

void criterion_serialization() {
  std::mt19937 rng(90210);
  bool pass = true;
  for (int i = 0; i < 1000 && pass; ++i) {
    const Model m = random_valid_model(rng);
    auto bytes = serialize_model(m);
    pass = bytes.ok();
    if (pass) {
      auto parsed = parse_model(bytes.value());
      pass = parsed.ok() && parsed.value() == m;
    }
  }

  int errors_seen = 0;
  if (pass) {
    const Model base = random_valid_model(rng);
    auto bytes = serialize_model(base).take();
    std::uniform_int_distribution<size_t> pos_d(0, bytes.size() - 1);
    std::uniform_int_distribution<int> byte_d(0, 255), mode_d(0, 2);
    for (int i = 0; i < 10000; ++i) {
      std::vector<uint8_t> mutated = bytes;
      switch (mode_d(rng)) {
        case 0: mutated[pos_d(rng)] = static_cast<uint8_t>(byte_d(rng)); break;
        case 1: mutated.resize(pos_d(rng)); break;
        default:
          mutated[pos_d(rng)] = static_cast<uint8_t>(byte_d(rng));
          mutated[pos_d(rng)] = static_cast<uint8_t>(byte_d(rng));
          break;
      }
      auto r = parse_model(mutated);  // must categorize or succeed, never crash
      errors_seen += !r.ok();
    }
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "%d of 10000 mutations rejected", errors_seen);
  report(10, "serialization round-trip and fuzz", pass, detail);
}

// --------------------------------------------------------------- criterion 11

void criterion_memory_sanity() {
  const Model model = fixture_i8_model();
  std::vector<uint8_t> memory(1 << 20);
  Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
  const Registry registry = Registry::with_reference_kernels();
  auto interp = Interpreter::create(model, registry, arena);
  bool pass = interp.ok() && interp.value().allocate().ok();
  size_t total = 0;
  if (pass) {
    const MemoryReport rep = interp.value().memory_report().take();
    total = rep.total_bytes;
    pass = total > 0 && total < 64 * 1024;
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "total %zu bytes < 65536", total);
  report(11, "memory report sanity", pass, detail);
}

}  // namespace

int main() {
  std::printf("=== acceptance ===\n");
  criterion_overhead();
  criterion_planner_safety();
  criterion_optimality_sandwich();
  criterion_compaction();
  criterion_zero_alloc_invoke();
  criterion_two_stack_exhaustion();
  criterion_kernel_oracles();
  criterion_end_to_end_golden();
  criterion_multitenancy();
  criterion_serialization();
  criterion_memory_sanity();
  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", failures);
  return 1;
}
