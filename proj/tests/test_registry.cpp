#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "mico/interpreter.hpp"
#include "mico/registry.hpp"
#include "support/fixtures.hpp"

using namespace mico;
using namespace mico::test;

TEST_CASE("register and resolve") {
  Registry registry;
  CHECK(registry.size() == 0);
  CHECK(registry.find(Opcode::CONV_2D) == nullptr);

  REQUIRE(registry.add(reference_registration(Opcode::CONV_2D)).ok());
  CHECK(registry.size() == 1);
  const OpRegistration* reg = registry.find(Opcode::CONV_2D);
  REQUIRE(reg != nullptr);
  CHECK(reg->opcode == Opcode::CONV_2D);
}

TEST_CASE("duplicate registrations are rejected") {
  Registry registry;
  REQUIRE(registry.add(reference_registration(Opcode::CONV_2D)).ok());
  CHECK(registry.add(reference_registration(Opcode::CONV_2D)).code() ==
        ErrCode::DuplicateOpcode);
  CHECK(registry.size() == 1);
}

TEST_CASE("the full registry covers every opcode") {
  const Registry registry = Registry::with_reference_kernels();
  CHECK(registry.size() == kOpcodeCount);
  CHECK(registry.find(Opcode::SOFTMAX) != nullptr);
  CHECK(registry.find(Opcode::DEQUANTIZE) != nullptr);
}

TEST_CASE("resolution failures surface at allocate time, before any eval") {
  const Model model = fixture_f32_model();
  Registry no_softmax;
  for (uint8_t i = 0; i < kOpcodeCount; ++i)
    if (static_cast<Opcode>(i) != Opcode::SOFTMAX)
      REQUIRE(no_softmax.add(reference_registration(static_cast<Opcode>(i))).ok());

  std::vector<uint8_t> memory(1 << 20);
  Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
  auto interp = Interpreter::create(model, no_softmax, arena);
  REQUIRE(interp.ok());
  Status s = interp.value().allocate();
  REQUIRE(!s.ok());
  CHECK(s.code() == ErrCode::UnsupportedOperator);
  CHECK(s.error().message.find("SOFTMAX") != std::string::npos);
  // invoke can never run: the interpreter never reached Allocated
  CHECK(interp.value().invoke().code() == ErrCode::PhaseError);
}

namespace {

// Alternate conv kernel: output-channel-major loop order with a double
// accumulator. Contract-equivalent to the reference kernel, numerically
// distinct in rounding.
Status alt_conv_eval(EvalContext& ctx) {
  const ConstTensor& in = ctx.input(0);
  const ConstTensor& w = ctx.input(1);
  const ConstTensor& b = ctx.input(2);
  MutTensor& out = ctx.output(0);
  if (in.dtype != DType::F32) {
    // fall back to the reference path for quantized graphs
    return reference_registration(Opcode::CONV_2D).eval(ctx);
  }
  const OpParams& p = ctx.params();
  const int32_t h = in.shape.dim(1), wdt = in.shape.dim(2), c = in.shape.dim(3);
  const int32_t kh = w.shape.dim(1), kw = w.shape.dim(2);
  const int32_t oh = out.shape.dim(1), ow = out.shape.dim(2), oc_n = out.shape.dim(3);
  const int32_t pad_top = kernels::pad_before(h, kh, p.stride_h, p.padding);
  const int32_t pad_left = kernels::pad_before(wdt, kw, p.stride_w, p.padding);
  for (int32_t oc = 0; oc < oc_n; ++oc)
    for (int32_t oy = 0; oy < oh; ++oy)
      for (int32_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int32_t ic = 0; ic < c; ++ic)
          for (int32_t ky = 0; ky < kh; ++ky)
            for (int32_t kx = 0; kx < kw; ++kx) {
              const int32_t iy = oy * p.stride_h - pad_top + ky;
              const int32_t ix = ox * p.stride_w - pad_left + kx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= wdt) continue;
              acc += static_cast<double>(in.f32()[((iy)*wdt + ix) * c + ic]) *
                     w.f32()[((oc * kh + ky) * kw + kx) * c + ic];
            }
        acc += b.f32()[oc];
        if (p.activation == Activation::RELU) acc = std::max(acc, 0.0);
        out.f32()[(oy * ow + ox) * oc_n + oc] = static_cast<float>(acc);
      }
  return Status{};
}

}  // namespace

TEST_CASE("an alternate conv registration yields equivalent interpreters") {
  const Model model = fixture_f32_model();

  Registry alt;
  for (uint8_t i = 0; i < kOpcodeCount; ++i) {
    OpRegistration reg = reference_registration(static_cast<Opcode>(i));
    if (reg.opcode == Opcode::CONV_2D) reg.eval = alt_conv_eval;
    REQUIRE(alt.add(std::move(reg)).ok());
  }
  const Registry reference = Registry::with_reference_kernels();

  auto run = [&model](const Registry& registry) {
    std::vector<uint8_t> memory(1 << 20);
    Arena arena = Arena::create(std::span<uint8_t>(memory)).take();
    Interpreter interp = Interpreter::create(model, registry, arena).take();
    REQUIRE(interp.allocate().ok());
    auto in = interp.input_view(0).take();
    const auto values = fixture_input(1);
    std::memcpy(in.data.data(), values.data(), in.data.size());
    REQUIRE(interp.invoke().ok());
    auto out = interp.output_view(0).take();
    return std::vector<float>(out.f32(), out.f32() + out.elem_count());
  };

  const auto ref_out = run(reference);
  const auto alt_out = run(alt);
  REQUIRE(ref_out.size() == alt_out.size());
  for (size_t i = 0; i < ref_out.size(); ++i)
    CHECK(ref_out[i] == doctest::Approx(alt_out[i]).epsilon(1e-4));
}

TEST_CASE("eval context exposes only views, params, and scratch") {
  // The context is constructible from spans alone and holds no path back to
  // the interpreter. Kernels compiled against it cannot reach lifecycle
  // state by construction.
  static_assert(!std::is_constructible_v<EvalContext, Interpreter&>);
  static_assert(std::is_constructible_v<EvalContext, std::span<const ConstTensor>,
                                        std::span<MutTensor>, const OpParams&,
                                        std::span<const std::span<uint8_t>>>);
  CHECK(true);
}
