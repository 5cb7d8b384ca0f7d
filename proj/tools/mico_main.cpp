// mico command-line front end: run inference, benchmark with an overhead
// breakdown, inspect memory plans, and convert/quantize models.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mico/converter.hpp"
#include "mico/interpreter.hpp"
#include "mico/model_json.hpp"
#include "mico/planner.hpp"
#include "mico/registry.hpp"
#include "mico/serialize.hpp"
#include "mico/tensor_file.hpp"

namespace {

using namespace mico;

// Exit taxonomy: 0 success, 2 invalid model / IO / converter failure,
// 3 arena exhausted, 4 eval failed, 5 invalid memory plan.
int exit_code_for(ErrCode code) {
  switch (code) {
    case ErrCode::ArenaExhausted: return 3;
    case ErrCode::EvalFailed: return 4;
    case ErrCode::PlanInvalid:
    case ErrCode::CountMismatch:
    case ErrCode::BlobMalformed: return 5;
    default: return 2;
  }
}

int fail(const Error& err) {
  std::fprintf(stderr, "error: %s: %s\n", err_code_name(err.code), err.message.c_str());
  return exit_code_for(err.code);
}

struct LoadedModel {
  std::vector<uint8_t> bytes;  // keeps the in-place const data alive
  Model model;
};

int load_model(const std::string& path, LoadedModel& out) {
  auto bytes = read_file(path);
  if (!bytes.ok()) return fail(bytes.error());
  out.bytes = bytes.take();
  auto model = parse_model(out.bytes);
  if (!model.ok()) return fail(model.error());
  out.model = model.take();
  auto report = validate_model(out.model);
  if (!report.ok())
    return fail({ErrCode::InvalidModel, "model failed validation: " +
                                            report.violations.front().code + " (" +
                                            report.violations.front().detail + ")"});
  return 0;
}

void print_memory_report(const MemoryReport& r, bool as_json) {
  if (as_json) {
    nlohmann::json j{{"persistent_bytes", r.persistent_bytes},
                     {"nonpersistent_bytes", r.nonpersistent_bytes},
                     {"total_bytes", r.total_bytes}};
    std::printf("%s\n", j.dump().c_str());
    return;
  }
  std::printf("persistent_bytes:    %zu\n", r.persistent_bytes);
  std::printf("nonpersistent_bytes: %zu\n", r.nonpersistent_bytes);
  std::printf("total_bytes:         %zu\n", r.total_bytes);
}

int cmd_run(const std::string& model_path, size_t arena_bytes,
            const std::vector<std::string>& input_paths,
            const std::vector<std::string>& output_paths, bool as_json) {
  LoadedModel loaded;
  if (int rc = load_model(model_path, loaded)) return rc;

  std::vector<uint8_t> memory(arena_bytes);
  auto arena = Arena::create(std::span<uint8_t>(memory));
  if (!arena.ok()) return fail(arena.error());
  const Registry registry = Registry::with_reference_kernels();
  auto interp = Interpreter::create(loaded.model, registry, arena.value());
  if (!interp.ok()) return fail(interp.error());
  Interpreter& it = interp.value();
  if (Status s = it.allocate(); !s.ok()) return fail(s.error());

  if (input_paths.size() != loaded.model.inputs.size())
    return fail({ErrCode::IoError,
                 "model has " + std::to_string(loaded.model.inputs.size()) + " inputs, got " +
                     std::to_string(input_paths.size()) + " --input files"});
  for (size_t i = 0; i < input_paths.size(); ++i) {
    auto tf = read_tensor_file(input_paths[i]);
    if (!tf.ok()) return fail(tf.error());
    auto view = it.input_view(i);
    if (!view.ok()) return fail(view.error());
    if (tf.value().dtype != view.value().dtype || !(tf.value().shape == view.value().shape))
      return fail({ErrCode::ShapeMismatch,
                   input_paths[i] + " is " + dtype_name(tf.value().dtype) +
                       tf.value().shape.to_string() + ", model input " + std::to_string(i) +
                       " is " + dtype_name(view.value().dtype) + view.value().shape.to_string()});
    std::copy(tf.value().data.begin(), tf.value().data.end(), view.value().data.begin());
  }

  if (Status s = it.invoke(); !s.ok()) return fail(s.error());

  if (output_paths.size() != loaded.model.outputs.size())
    return fail({ErrCode::IoError,
                 "model has " + std::to_string(loaded.model.outputs.size()) + " outputs, got " +
                     std::to_string(output_paths.size()) + " --output files"});
  for (size_t i = 0; i < output_paths.size(); ++i) {
    auto view = it.output_view(i);
    if (!view.ok()) return fail(view.error());
    Status s = write_tensor_file(output_paths[i], view.value().dtype, view.value().shape,
                                 view.value().data);
    if (!s.ok()) return fail(s.error());
  }

  auto report = it.memory_report();
  if (!report.ok()) return fail(report.error());
  print_memory_report(report.value(), as_json);
  return 0;
}

struct BenchSink : ProfileSink {
  std::vector<std::vector<uint64_t>> op_ticks;  // per op, per run
  std::vector<uint64_t> invoke_ticks;

  void op_event(const ProfileEvent& e) override {
    if (op_ticks.size() <= static_cast<size_t>(e.op_index))
      op_ticks.resize(e.op_index + 1);
    op_ticks[e.op_index].push_back(e.duration_ticks);
  }
  void invoke_event(uint64_t total) override { invoke_ticks.push_back(total); }
};

struct BenchResult {
  uint32_t runs = 0;
  uint64_t invoke_min = 0;
  uint64_t invoke_max = 0;
  double invoke_mean = 0.0;
  std::vector<std::pair<Opcode, double>> op_means;  // per-op duration table
  double calculation_mean = 0.0;
  double overhead_ratio = 0.0;  // (invoke mean - calculation mean) / invoke mean
};

BenchResult summarize(const BenchSink& sink, const Model& model, uint32_t runs) {
  const auto mean = [](const std::vector<uint64_t>& v) {
    uint64_t sum = 0;
    for (uint64_t x : v) sum += x;
    return v.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(v.size());
  };
  BenchResult r;
  r.runs = runs;
  r.invoke_min = *std::min_element(sink.invoke_ticks.begin(), sink.invoke_ticks.end());
  r.invoke_max = *std::max_element(sink.invoke_ticks.begin(), sink.invoke_ticks.end());
  r.invoke_mean = mean(sink.invoke_ticks);
  for (size_t i = 0; i < sink.op_ticks.size(); ++i) {
    const double m = mean(sink.op_ticks[i]);
    r.op_means.emplace_back(model.ops[i].opcode, m);
    r.calculation_mean += m;
  }
  if (r.invoke_mean > 0.0)
    r.overhead_ratio = (r.invoke_mean - r.calculation_mean) / r.invoke_mean;
  return r;
}

int cmd_bench(const std::string& model_path, size_t arena_bytes, uint32_t runs, bool fake_clock,
              bool as_json) {
  LoadedModel loaded;
  if (int rc = load_model(model_path, loaded)) return rc;

  std::vector<uint8_t> memory(arena_bytes);
  auto arena = Arena::create(std::span<uint8_t>(memory));
  if (!arena.ok()) return fail(arena.error());
  const Registry registry = Registry::with_reference_kernels();
  auto interp = Interpreter::create(loaded.model, registry, arena.value());
  if (!interp.ok()) return fail(interp.error());
  Interpreter& it = interp.value();
  if (Status s = it.allocate(); !s.ok()) return fail(s.error());  // setup is not measured

  BenchSink sink;
  it.attach_profiler(&sink);
  uint64_t fake_counter = 0;
  if (fake_clock) it.set_tick_source([&fake_counter]() { return fake_counter++; });

  for (uint32_t r = 0; r < runs; ++r)
    if (Status s = it.invoke(); !s.ok()) return fail(s.error());

  const BenchResult result = summarize(sink, loaded.model, runs);

  if (as_json) {
    nlohmann::json ops = nlohmann::json::array();
    for (size_t i = 0; i < result.op_means.size(); ++i)
      ops.push_back({{"index", i},
                     {"opcode", opcode_name(result.op_means[i].first)},
                     {"mean_ticks", result.op_means[i].second}});
    nlohmann::json j{
        {"runs", result.runs},
        {"invoke_ticks",
         {{"min", result.invoke_min}, {"mean", result.invoke_mean}, {"max", result.invoke_max}}},
        {"ops", ops},
        {"calculation_mean_ticks", result.calculation_mean},
        {"overhead_ratio", result.overhead_ratio}};
    std::printf("%s\n", j.dump().c_str());
    return 0;
  }

  std::printf("runs: %u\n", result.runs);
  std::printf("invoke_ticks: min %" PRIu64 "  mean %.1f  max %" PRIu64 "\n", result.invoke_min,
              result.invoke_mean, result.invoke_max);
  std::printf("%-4s %-20s %12s %8s\n", "op", "opcode", "mean_ticks", "share");
  for (size_t i = 0; i < result.op_means.size(); ++i)
    std::printf("%-4zu %-20s %12.1f %7.2f%%\n", i, opcode_name(result.op_means[i].first),
                result.op_means[i].second,
                result.invoke_mean > 0 ? 100.0 * result.op_means[i].second / result.invoke_mean
                                       : 0.0);
  std::printf("calculation_ticks: mean %.1f\n", result.calculation_mean);
  std::printf("overhead: %.3f%%\n", result.overhead_ratio * 100.0);
  return 0;
}

int cmd_plan(const std::string& model_path, bool offline) {
  LoadedModel loaded;
  if (int rc = load_model(model_path, loaded)) return rc;

  const Registry registry = Registry::with_reference_kernels();
  auto prepared = prepare_model(loaded.model, registry);
  if (!prepared.ok()) return fail(prepared.error());
  const RequestSet rs = build_requests(loaded.model, prepared.value());

  const auto band_for = [](size_t arena_size) { return std::max<size_t>(1, arena_size / 48); };

  if (offline) {
    auto blob = get_metadata(loaded.model, kOfflinePlanKey);
    if (!blob) return fail({ErrCode::InvalidModel, "model carries no offline memory plan"});
    auto plan = plan_offline(rs.requests, *blob, kArenaAlign);
    if (!plan.ok()) return fail(plan.error());
    std::printf("requests: %zu\n", rs.requests.size());
    std::printf("offline_arena: %zu\n", plan.value().arena_size);
    std::printf("%s", render_plan(rs.requests, plan.value(), band_for(plan.value().arena_size)).c_str());
    return 0;
  }

  const MemoryPlan naive = plan_naive(rs.requests, kArenaAlign);
  const MemoryPlan greedy = plan_greedy(rs.requests, kArenaAlign);
  const double savings =
      naive.arena_size > 0
          ? 100.0 * (1.0 - static_cast<double>(greedy.arena_size) / naive.arena_size)
          : 0.0;
  std::printf("requests: %zu\n", rs.requests.size());
  std::printf("naive_arena:  %zu\n", naive.arena_size);
  std::printf("greedy_arena: %zu  (savings: %.1f%%)\n", greedy.arena_size, savings);
  std::printf("%s", render_plan(rs.requests, greedy, band_for(greedy.arena_size)).c_str());
  return 0;
}

int cmd_convert(const std::string& graph_path, const std::string& out_path,
                const std::string& quantize_mode, const std::string& calib_dir, bool offline_plan,
                const std::string& dump_json_path) {
  auto text = read_file(graph_path);
  if (!text.ok()) return fail(text.error());
  auto model = graph_build_text(std::string(text.value().begin(), text.value().end()));
  if (!model.ok()) {
    std::fprintf(stderr, "graph build failed\n");
    return fail(model.error());
  }
  Model m = model.take();

  if (!quantize_mode.empty()) {
    if (quantize_mode != "i8")
      return fail({ErrCode::ParseError, "unknown quantization mode \"" + quantize_mode + "\""});
    if (calib_dir.empty())
      return fail({ErrCode::EmptyCalibration, "calibration required: pass --calib <dir>"});
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(calib_dir, ec))
      if (entry.is_regular_file()) files.push_back(entry.path().string());
    if (ec) return fail({ErrCode::IoError, "cannot read calibration dir: " + calib_dir});
    std::sort(files.begin(), files.end());
    std::vector<std::vector<float>> samples;
    for (const auto& f : files) {
      auto tf = read_calibration_file(f);
      if (!tf.ok()) return fail(tf.error());
      if (tf.value().dtype != DType::F32)
        return fail({ErrCode::ParseError, "calibration file " + f + " is not f32"});
      const auto* p = reinterpret_cast<const float*>(tf.value().data.data());
      samples.emplace_back(p, p + tf.value().shape.elem_count());
    }
    auto quantized = quantize_post_training(m, samples);
    if (!quantized.ok()) {
      std::fprintf(stderr, "quantization failed\n");
      return fail(quantized.error());
    }
    m = quantized.take();
  }

  if (offline_plan) {
    auto planned = attach_offline_plan(m);
    if (!planned.ok()) {
      std::fprintf(stderr, "offline planning failed\n");
      return fail(planned.error());
    }
    m = planned.take();
  }

  auto bytes = serialize_model(m);
  if (!bytes.ok()) return fail(bytes.error());
  if (Status s = write_file(out_path, bytes.value()); !s.ok()) return fail(s.error());
  if (!dump_json_path.empty()) {
    const std::string text = model_to_json(m).dump(2) + "\n";
    std::span<const uint8_t> json_bytes(reinterpret_cast<const uint8_t*>(text.data()),
                                        text.size());
    if (Status s = write_file(dump_json_path, json_bytes); !s.ok()) return fail(s.error());
  }
  std::printf("wrote %s: %zu tensors, %zu ops, %zu buffers, %zu bytes\n", out_path.c_str(),
              m.tensors.size(), m.ops.size(), m.buffers.size(), bytes.value().size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mico: tiny interpreter-based neural network inference runtime"};
  app.require_subcommand(1);

  std::string model_path, graph_path, out_path, quantize_mode, calib_dir, dump_json_path;
  std::vector<std::string> input_paths, output_paths;
  size_t arena_bytes = 1 << 20;
  uint32_t runs = 10;
  bool fake_clock = false, as_json = false, offline = false, offline_plan = false;

  auto* run = app.add_subcommand("run", "run inference on tensor files");
  run->add_option("--model", model_path, ".mico model file")->required();
  run->add_option("--arena-bytes", arena_bytes, "arena capacity in bytes");
  run->add_option("--input", input_paths, "input .mten file (one per model input)");
  run->add_option("--output", output_paths, "output .mten file (one per model output)");
  run->add_flag("--json", as_json, "machine-readable memory report");

  auto* bench = app.add_subcommand("bench", "measure invoke time and interpreter overhead");
  bench->add_option("--model", model_path, ".mico model file")->required();
  bench->add_option("--arena-bytes", arena_bytes, "arena capacity in bytes");
  bench->add_option("--runs", runs, "number of measured invokes")->check(CLI::PositiveNumber);
  bench->add_flag("--fake-clock", fake_clock, "deterministic tick source");
  bench->add_flag("--json", as_json, "machine-readable results");

  auto* plan = app.add_subcommand("plan", "show naive vs greedy memory plans");
  plan->add_option("--model", model_path, ".mico model file")->required();
  plan->add_flag("--offline", offline, "show the model's offline plan instead");

  auto* convert = app.add_subcommand("convert", "build a .mico model from a graph spec");
  convert->add_option("--graph", graph_path, "graph spec JSON file")->required();
  convert->add_option("--out", out_path, "output .mico path")->required();
  convert->add_option("--quantize", quantize_mode, "quantization mode (i8)");
  convert->add_option("--calib", calib_dir, "directory of calibration tensor files");
  convert->add_flag("--offline-plan", offline_plan, "attach an offline memory plan");
  convert->add_option("--dump-json", dump_json_path, "also write the model's JSON form here");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(model_path, arena_bytes, input_paths, output_paths, as_json);
  if (bench->parsed()) return cmd_bench(model_path, arena_bytes, runs, fake_clock, as_json);
  if (plan->parsed()) return cmd_plan(model_path, offline);
  if (convert->parsed())
    return cmd_convert(graph_path, out_path, quantize_mode, calib_dir, offline_plan,
                       dump_json_path);
  return 2;
}
