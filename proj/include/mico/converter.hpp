#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mico/arena.hpp"
#include "mico/model.hpp"
#include "mico/status.hpp"

namespace mico {

// Host-side model construction. The graph spec is a JSON document:
//
//   {
//     "tensors": [
//       {"name": "in",  "dtype": "f32", "shape": [1,16,16,1]},
//       {"name": "w1",  "dtype": "f32", "shape": [8,3,3,1], "data": [0.5, ...]},
//       {"name": "b1",  "dtype": "f32", "shape": [8], "data_b64": "..."}
//     ],
//     "ops": [
//       {"op": "conv_2d", "inputs": ["in","w1","b1"], "outputs": ["c1"],
//        "params": {"stride": [1,1], "padding": "same", "activation": "relu"}}
//     ],
//     "inputs": ["in"],
//     "outputs": ["c1"]
//   }
//
// Tensors referenced only as op outputs are declared implicitly; their
// shape is inferred and their dtype follows the op's first input. Roles are
// derived: const data present -> const, listed in inputs/outputs -> model
// input/output, otherwise intermediate. Op order must already be
// topological; the builder fails rather than re-sorting.

Result<Model> graph_build(const nlohmann::json& spec);
Result<Model> graph_build_text(const std::string& json_text);

/// Post-training per-tensor quantization of an all-F32 model. Runs the
/// model on each calibration input recording per-tensor ranges (always
/// anchored at 0), derives affine params with scale = (max-min)/255 and
/// zp = round(-128 - min/scale), converts weights to I8 and biases to I32
/// with scale = input_scale * weight_scale, forces softmax outputs to
/// scale 1/256 zp -128, and emits an I8 model. Pooling, relu, and reshape
/// outputs inherit their input's params.
Result<Model> quantize_post_training(const Model& model,
                                     std::span<const std::vector<float>> calibration);

/// Reconstructs the interpreter's allocation requests (reference kernel
/// set, identical lifetime rules), plans them greedily, and stores the
/// offsets under the "OFFLINE_MEMORY_PLAN" metadata key, replacing any
/// previous plan. An interpreter consuming the result reports the same
/// nonpersistent size the greedy path would.
Result<Model> attach_offline_plan(const Model& model, size_t alignment = kArenaAlign);

}  // namespace mico
