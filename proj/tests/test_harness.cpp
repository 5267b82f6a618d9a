// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "tsep/harness/checkpoint.hpp"
#include "tsep/harness/config.hpp"
#include "tsep/harness/run.hpp"
#include "tsep/harness/synth.hpp"
#include "tsep/harness/wav.hpp"
#include "tsep/metrics.hpp"
#include "tsep/ops.hpp"

using namespace tsep;
using namespace tsep::harness;
namespace fs = std::filesystem;

namespace {

const char* kSmoke = R"(
# comment line
model.filters = 16
model.kernel = 4
model.stride = 2
model.chunk = 8
model.blocks = 1
model.intra_repeats = 1
model.inter_repeats = 1
model.intra.conv_channels = 8
model.intra.attn_channels = 8
model.intra.heads = 2
model.intra.kernel = 5
model.intra.ffn = 32
model.inter.conv_channels = 8
model.inter.attn_channels = 8
model.inter.heads = 2
model.inter.kernel = 3
model.inter.ffn = 32
data.length = 128   # trailing comment
data.count = 4
train.steps = 20
train.batch = 2
)";

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tsep_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<char> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void patch(const fs::path& p, std::size_t offset, std::vector<unsigned char> b) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

std::string format_error(const fs::path& p) {
  try {
    read_wav(p.string());
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config") {
  RunConfig c = parse_config(kSmoke);
  CHECK(c.model.width() == 16);
  CHECK(c.model.intra.width == 16);
  CHECK(c.model.inter.kernel == 3);
  CHECK(c.data.length == 128);
  CHECK(c.train.batch == 2);
  CHECK(c.train.adam.lr == 1e-3);

  SUBCASE("canonical text round trip") {
    const std::string text = to_text(c);
    CHECK(to_text(parse_config(text)) == text);
    CHECK(config_hash(parse_config(text)) == config_hash(c));
  }
  SUBCASE("hash follows content") {
    RunConfig d = c;
    d.train.adam.lr = 2e-3;
    CHECK(config_hash(d) != config_hash(c));
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  }
  SUBCASE("errors name the line") {
    try {
      parse_config("model.filters = 16\nmodel.bogus = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("model.bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("train.steps = 1\ntrain.steps = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("train.steps = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("train.lr = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("train.steps\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.shared = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kSmoke) + "model.intra.heads = 3\n"), ConfigError);
  }
}

TEST_CASE("wav") {
  const fs::path dir = scratch("wav");
  Waveform w;
  w.sample_rate = 16000;
  for (int v : {0, 1, -1, 32767, -32768, 1234, -4321}) w.samples.push_back(v / 32768.0);

  SUBCASE("bit-exact round trip") {
    write_wav((dir / "a.wav").string(), w);
    Waveform r = read_wav((dir / "a.wav").string());
    CHECK(r.sample_rate == 16000);
    CHECK(r.samples == w.samples);
    write_wav((dir / "b.wav").string(), r);
    CHECK(bytes_of(dir / "a.wav") == bytes_of(dir / "b.wav"));
  }
  SUBCASE("clipping on write") {
    write_wav((dir / "c.wav").string(), Waveform{{2.0, -2.0}, 8000});
    auto r = read_wav((dir / "c.wav").string());
    CHECK(r.samples[0] == 32767 / 32768.0);
    CHECK(r.samples[1] == -1.0);
  }
  SUBCASE("unsupported formats name the field") {
    write_wav((dir / "d.wav").string(), w);
    patch(dir / "d.wav", 22, {2, 0});
    CHECK(format_error(dir / "d.wav").find("num_channels") != std::string::npos);
    write_wav((dir / "e.wav").string(), w);
    patch(dir / "e.wav", 34, {8, 0});
    CHECK(format_error(dir / "e.wav").find("bits_per_sample") != std::string::npos);
    write_wav((dir / "f.wav").string(), w);
    patch(dir / "f.wav", 20, {3, 0});
    CHECK(format_error(dir / "f.wav").find("audio_format") != std::string::npos);
    write_wav((dir / "g.wav").string(), w);
    patch(dir / "g.wav", 0, {'R', 'I', 'F', 'X'});
    CHECK(format_error(dir / "g.wav").find("RIFF") != std::string::npos);
  }
}

TEST_CASE("synthetic mixtures") {
  DataSpec spec;
  SUBCASE("two sinusoids sum exactly") {
    auto a = sinusoid(256, 200, 8000), b = sinusoid(256, 800, 8000);
    auto m = mix({a, b});
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == a[i] + b[i]);
  }
  SUBCASE("deterministic per seed and index") {
    auto x = gen_mixture(spec, 2, 8000, 5, 3), y = gen_mixture(spec, 2, 8000, 5, 3);
    auto z = gen_mixture(spec, 2, 8000, 6, 3);
    CHECK(x.mixture == y.mixture);
    CHECK(x.sources == y.sources);
    CHECK(x.mixture != z.mixture);
  }
  SUBCASE("equal power, unit RMS, disjoint bands") {
    for (auto kind : {SourceKind::kSinusoid, SourceKind::kNoiseBand}) {
      spec.kind = kind;
      auto m = gen_mixture(spec, 2, 8000, 1, 0);
      for (const auto& s : m.sources) {
        double e = 0;
        for (double v : s) e += v * v;
        CHECK(std::sqrt(e / static_cast<double>(s.size())) == doctest::Approx(1.0).epsilon(1e-12));
      }
      auto sum = mix(m.sources);
      CHECK(sum == m.mixture);
      CHECK(std::abs(si_snr(m.mixture, m.sources[0])) < 0.5);
    }
    for (std::size_t k = 0; k + 1 < 3; ++k) CHECK(band(spec, 3, k).second <= band(spec, 3, k + 1).first);
  }
  SUBCASE("level draw") {
    spec.snr_min_db = 6;
    spec.snr_max_db = 6;
    auto m = gen_mixture(spec, 2, 8000, 1, 0);
    double e0 = 0, e1 = 0;
    for (std::size_t i = 0; i < m.mixture.size(); ++i) {
      e0 += m.sources[0][i] * m.sources[0][i];
      e1 += m.sources[1][i] * m.sources[1][i];
    }
    CHECK(10 * std::log10(e0 / e1) == doctest::Approx(6.0).epsilon(1e-9));
  }
  SUBCASE("length cap") {
    spec.max_length = 100;
    CHECK(gen_mixture(spec, 2, 8000, 1, 0).mixture.size() == 100);
  }
}

TEST_CASE("checkpoint") {
  const fs::path dir = scratch("ckpt");
  RunConfig c = parse_config(kSmoke);
  Model<float> m(c.model, 3);
  Adam<float> adam(m.params(), {});
  const std::string path = (dir / "m.tsep").string();
  write_checkpoint(path, snapshot(m, &adam));

  SUBCASE("bit-exact round trip") {
    auto ck = read_checkpoint(path);
    CHECK(model_to_text(ck.config) == model_to_text(c.model));
    auto r = restore_model<float>(ck);
    REQUIRE(r.params().items().size() == m.params().items().size());
    for (std::size_t i = 0; i < r.params().items().size(); ++i) {
      const auto& a = m.params().items()[i].tensor;
      const auto& b = r.params().items()[i].tensor;
      CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    }
    write_checkpoint((dir / "again.tsep").string(), snapshot(r, &adam));
    CHECK(bytes_of(path) == bytes_of(dir / "again.tsep"));
    CHECK(has_optimizer_state(ck));
  }
  SUBCASE("double payloads are exact") {
    Model<double> d(c.model, 3);
    write_checkpoint((dir / "d.tsep").string(), snapshot(d));
    auto ck = read_checkpoint((dir / "d.tsep").string());
    CHECK(ck.tensors.front().dtype == Dtype::kFloat64);
    auto r = restore_model<double>(ck);
    for (std::size_t i = 0; i < r.params().items().size(); ++i) {
      const auto& a = d.params().items()[i].tensor;
      const auto& b = r.params().items()[i].tensor;
      CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    }
  }
  SUBCASE("corrupt files") {
    auto good = bytes_of(path);
    {
      std::ofstream out(dir / "bad.tsep", std::ios::binary);
      out.write("XSEP", 4);
      out.write(good.data() + 4, static_cast<std::streamsize>(good.size() - 4));
    }
    CHECK_THROWS_AS(read_checkpoint((dir / "bad.tsep").string()), FormatError);
    {
      std::ofstream out(dir / "short.tsep", std::ios::binary);
      out.write(good.data(), static_cast<std::streamsize>(good.size() - 3));
    }
    CHECK_THROWS_AS(read_checkpoint((dir / "short.tsep").string()), FormatError);
  }
}

TEST_CASE("training") {
  const fs::path dir = scratch("train");
  RunConfig c = parse_config(kSmoke);

  SUBCASE("zero steps leave the initialization") {
    c.train.steps = 0;
    c.train.output_dir = (dir / "zero").string();
    auto r = train(c);
    CHECK(r.losses.empty());
    auto restored = restore_model<float>(read_checkpoint(r.checkpoint));
    Model<float> init(c.model, c.train.seed);
    for (std::size_t i = 0; i < init.params().items().size(); ++i) {
      const auto& a = init.params().items()[i].tensor;
      const auto& b = restored.params().items()[i].tensor;
      CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    }
    CHECK(fs::exists(dir / "zero" / "train_report.txt"));
    CHECK(fs::exists(dir / "zero" / "train_report.kv"));
  }
  SUBCASE("identical seeds give identical curves") {
    c.train.output_dir = (dir / "a").string();
    auto a = train(c);
    c.train.output_dir = (dir / "b").string();
    auto b = train(c);
    CHECK(a.losses == b.losses);
    CHECK(a.loss_hash == b.loss_hash);
    CHECK(a.config_hash == b.config_hash);
    for (double l : a.losses) CHECK(std::isfinite(l));
  }
  SUBCASE("resume matches an uninterrupted run") {
    for (auto precision : {Precision::kDouble, Precision::kFloat}) {
      c.train.precision = precision;
      c.train.steps = 16;
      c.train.output_dir = (dir / "full").string();
      auto full = train(c);
      c.train.steps = 8;
      c.train.output_dir = (dir / "half").string();
      auto half = train(c);
      c.train.steps = 16;
      c.train.resume = half.checkpoint;
      c.train.output_dir = (dir / "resumed").string();
      auto rest = train(c);
      c.train.resume.clear();
      REQUIRE(rest.start_step == 8);
      REQUIRE(rest.losses.size() == 8);
      for (std::size_t i = 0; i < 8; ++i) {
        CHECK(rest.losses[i] == full.losses[8 + i]);
      }
    }
  }
  SUBCASE("non-finite loss aborts naming the step") {
    c.train.adam.lr = 1e30;
    c.train.output_dir = (dir / "nan").string();
    try {
      train(c);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
  }
}

TEST_CASE("evaluation") {
  RunConfig c = parse_config(kSmoke);
  const std::size_t k = 2;
  SUBCASE("targets as estimates clear the ceiling check") {
    DataSpec spec = c.data;
    Separator oracle = [&](const std::vector<double>& mixture) {
      for (std::size_t i = 0; i < 8; ++i) {
        auto m = gen_mixture(spec, k, 8000, 77, i);
        if (m.mixture == mixture) return m.sources;
      }
      throw ContractError("unknown mixture");
    };
    auto r = evaluate(oracle, spec, k, 8000, 77, 8);
    CHECK(r.si_snri_mean >= 40.0);
    CHECK(r.sdri_mean >= 40.0);
  }
  SUBCASE("untrained model is deterministic") {
    Model<float> m(c.model, 1);
    auto a = evaluate(m, c.data, 1001, 8), b = evaluate(m, c.data, 1001, 8);
    CHECK(a.si_snri_mean == b.si_snri_mean);
    CHECK(a.sdri_std == b.sdri_std);
    CHECK(std::isfinite(a.si_snri_mean));
  }
  SUBCASE("held-out seed must differ") {
    c.eval.seed = c.data.seed;
    CHECK_THROWS_AS(evaluate_checkpoint("unused", c), ConfigError);
  }
}

TEST_CASE("gradient check") {
  RunConfig c = parse_config(kSmoke);
  for (bool shared : {false, true}) {
    c.model.shared = shared;
    c.model.intra_repeats = shared ? 2 : 1;
    auto r = grad_check(c);
    INFO(report_text(r));
    CHECK(r.passed);
    CHECK(r.checked >= 200);
    CHECK(r.groups_covered == r.groups_total);
  }
  SUBCASE("linear-only micro-model") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    ParameterSet<double> params;
    Initializer init(4);
    auto w = params.add("w", init.uniform<double>({5, 3}, 1.0));
    auto b = params.add("b", init.uniform<double>({3}, 1.0));
    Tensor<double> x(Shape{4, 5}), r(Shape{4, 3});
    for (auto& v : x.mutable_data()) v = u(rng);
    for (auto& v : r.mutable_data()) v = u(rng);
    auto loss = [&] { return ops::sum(ops::mul(ops::linear(x, w, b), r)); };
    GradCheckSpec spec;
    spec.coordinates = 18;
    auto rep = check_gradients(loss, params, spec);
    CHECK(rep.checked == 18);
    CHECK(rep.max_error < 1e-8);
  }
  SUBCASE("a wrong gradient is caught and named") {
    ParameterSet<double> params;
    Initializer init(4);
    auto w = params.add("w", init.uniform<double>({4}, 1.0));
    // forward w^2 but backward claims 3w
    auto loss = [&] {
      double s = 0;
      for (double v : w.data()) s += v * v;
      return Tensor<double>::make_result("bad_square", Shape{1}, {s}, {w}, [w](TensorNode<double>& self) mutable {
        auto g = w.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 3 * w.data()[i] * self.grad[0];
      });
    };
    GradCheckSpec spec;
    spec.coordinates = 4;
    auto rep = check_gradients(loss, params, spec);
    CHECK_FALSE(rep.passed);
    CHECK(rep.worst.rfind("w[", 0) == 0);
  }
}

TEST_CASE("attention dumps and file separation") {
  const fs::path dir = scratch("attn");
  RunConfig c = parse_config(kSmoke);
  c.model.blocks = 2;
  c.model.inter_repeats = 2;
  Model<float> m(c.model, 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> wave(256);
  for (auto& v : wave) v = u(rng);
  const std::size_t t_lat = c.model.encoder.latent_length(256);
  const auto layout = ChunkLayout::plan(t_lat, c.model.chunk);

  SUBCASE("row-stochastic maps with the expected shapes") {
    for (const char* text : {"0:intra:0:0", "1:intra:0:1", "0:inter:1:0", "1:inter:0:1"}) {
      auto sel = parse_selector(text);
      CHECK(selector_text(sel) == text);
      auto d = extract_attention(m, wave, sel);
      const std::size_t side = sel.inter ? layout.num_chunks : c.model.chunk;
      const std::size_t count = sel.inter ? c.model.chunk : layout.num_chunks;
      CHECK(d.rows == side);
      CHECK(d.cols == side);
      CHECK(d.maps.size() == count);
      for (const auto& map : d.maps) {
        for (std::size_t r = 0; r < d.rows; ++r) {
          double s = 0;
          for (std::size_t k = 0; k < d.cols; ++k) s += map[r * d.cols + k];
          CHECK(std::abs(s - 1.0) <= 1e-5);
        }
      }
      CHECK(fs::exists(write_attention(dir.string(), sel, d)));
    }
  }
  SUBCASE("selectors out of range") {
    CHECK_THROWS_AS(extract_attention(m, wave, parse_selector("0:intra:0:2")), ContractError);
    CHECK_THROWS_AS(extract_attention(m, wave, parse_selector("2:intra:0:0")), ContractError);
    CHECK_THROWS_AS(extract_attention(m, wave, parse_selector("0:intra:1:0")), ContractError);
    CHECK_THROWS_AS(parse_selector("0:cross:0:0"), ConfigError);
    CHECK_THROWS_AS(parse_selector("0:intra:0"), ConfigError);
    CHECK_THROWS_AS(parse_selector("a:intra:0:0"), ConfigError);
  }
  SUBCASE("separate_files") {
    const std::string ckpt = (dir / "m.tsep").string();
    write_checkpoint(ckpt, snapshot(m));
    const std::string in = (dir / "mix.wav").string();
    write_wav(in, Waveform{wave, 8000});
    auto paths = separate_files(ckpt, in, (dir / "out").string());
    REQUIRE(paths.size() == 2);
    for (const auto& p : paths) {
      auto w = read_wav(p);
      CHECK(w.samples.size() == wave.size());
      CHECK(w.sample_rate == 8000);
    }
    const std::string silent = (dir / "silence.wav").string();
    write_wav(silent, Waveform{std::vector<double>(256, 0.0), 8000});
    for (const auto& p : separate_files(ckpt, silent, (dir / "out").string())) {
      double e = 0;
      for (double v : read_wav(p).samples) e += v * v;
      const double dbfs = 10 * std::log10(e / 256.0 + 1e-300);
      CHECK(dbfs < -40.0);
    }
    write_wav((dir / "fast.wav").string(), Waveform{wave, 16000});
    CHECK_THROWS_AS(separate_files(ckpt, (dir / "fast.wav").string(), (dir / "out").string()), FormatError);
  }
}

TEST_CASE("smoke config: untrained band and windowed loss decrease") {
  RunConfig c = load_config(TSEP_SOURCE_DIR "/configs/smoke.cfg");
  SUBCASE("untrained evaluation band") {
    // Recorded for train.seed 1 and eval.seed 1001: -13.38 +- 2.95 dB.
    Model<float> m(c.model, c.train.seed);
    auto r = evaluate(m, c.data, c.eval.seed, c.eval.count);
    CHECK(r.si_snri_mean == doctest::Approx(-13.38).epsilon(0.01));
    CHECK(r.si_snri_std == doctest::Approx(2.95).epsilon(0.01));
  }
  SUBCASE("every 100-step window mean falls below the previous one") {
    c.train.output_dir = scratch("smoke").string();
    auto r = train(c);
    REQUIRE(r.losses.size() == 500);
    std::vector<double> prefix{0};
    for (double l : r.losses) prefix.push_back(prefix.back() + l);
    for (std::size_t i = 0; i + 200 <= r.losses.size(); ++i) {
      INFO("window start " << i);
      CHECK(prefix[i + 200] - prefix[i + 100] < prefix[i + 100] - prefix[i]);
    }
    CHECK(r.final_si_snri > 10.0);
  }
}
