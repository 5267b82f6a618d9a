// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include "tsep/harness/config.hpp"

namespace tsep::harness {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void bytes(const std::string& s) { raw(s.data(), s.size()); }
  void raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}
  std::uint32_t u32(const char* field) {
    std::uint32_t v;
    raw(&v, 4, field);
    return v;
  }
  std::uint64_t u64(const char* field) {
    std::uint64_t v;
    raw(&v, 8, field);
    return v;
  }
  std::string bytes(std::size_t n, const char* field) {
    need(n, field);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void raw(void* p, std::size_t n, const char* field) {
    need(n, field);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n, const char* field) {
    if (buf_.size() - pos_ < n) throw FormatError(path_ + ": truncated while reading " + field);
  }
  std::vector<char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

template <typename T>
StoredTensor store(const std::string& name, const Tensor<T>& t) {
  const Dtype dtype = std::is_same_v<T, double> ? Dtype::kFloat64 : Dtype::kFloat32;
  return StoredTensor{name, t.shape(), dtype, std::vector<double>(t.data().begin(), t.data().end())};
}

template <typename T>
void load_into(const StoredTensor& s, Tensor<T> t) {
  if (s.shape != t.shape()) {
    throw FormatError("checkpoint tensor " + s.name + " has shape " + shape_str(s.shape) + ", model expects " +
                      shape_str(t.shape()));
  }
  auto d = t.mutable_data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<T>(s.values[i]);
}

const StoredTensor& require(const Checkpoint& c, const std::string& name) {
  const StoredTensor* s = c.find(name);
  if (!s) throw FormatError("checkpoint is missing tensor " + name);
  return *s;
}

}  // namespace

const StoredTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes("TSEP");
  w.u32(kCheckpointVersion);
  const std::string cfg = model_to_text(ckpt.config);
  w.u32(static_cast<std::uint32_t>(cfg.size()));
  w.bytes(cfg);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (numel(t.shape) != t.values.size()) throw ContractError("checkpoint tensor " + t.name + ": shape and payload disagree");
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto e : t.shape) w.u64(e);
    w.u32(static_cast<std::uint32_t>(t.dtype));
    if (t.dtype == Dtype::kFloat64) {
      w.raw(t.values.data(), t.values.size() * sizeof(double));
    } else {
      const std::vector<float> narrow(t.values.begin(), t.values.end());
      w.raw(narrow.data(), narrow.size() * sizeof(float));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw Error(path + ": write failed");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  Reader r(std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()), path);
  if (r.bytes(4, "magic") != "TSEP") throw FormatError(path + ": bad magic, expected TSEP");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) throw FormatError(path + ": unsupported version " + std::to_string(version));
  Checkpoint c;
  const auto cfg_len = r.u32("config length");
  c.config = parse_model(r.bytes(cfg_len, "config"));
  const auto count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = r.bytes(r.u32("name length"), "name");
    const auto rank = r.u32("rank");
    for (std::uint32_t k = 0; k < rank; ++k) t.shape.push_back(r.u64("extent"));
    const auto dtype = r.u32("dtype");
    t.values.resize(numel(t.shape));
    if (dtype == static_cast<std::uint32_t>(Dtype::kFloat64)) {
      t.dtype = Dtype::kFloat64;
      r.raw(t.values.data(), t.values.size() * sizeof(double), "payload");
    } else if (dtype == static_cast<std::uint32_t>(Dtype::kFloat32)) {
      std::vector<float> narrow(t.values.size());
      r.raw(narrow.data(), narrow.size() * sizeof(float), "payload");
      t.values.assign(narrow.begin(), narrow.end());
    } else {
      throw FormatError(path + ": tensor " + t.name + " has unknown dtype " + std::to_string(dtype));
    }
    c.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError(path + ": trailing bytes after last tensor");
  return c;
}

template <typename T>
Checkpoint snapshot(const Model<T>& model, const Adam<T>* optim) {
  Checkpoint c;
  c.config = model.config();
  const auto& items = model.params().items();
  for (const auto& p : items) c.tensors.push_back(store(p.name, p.tensor));
  if (optim) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      c.tensors.push_back(store("optim.m." + items[i].name, optim->first_moments()[i]));
      c.tensors.push_back(store("optim.v." + items[i].name, optim->second_moments()[i]));
    }
    c.tensors.push_back(StoredTensor{"optim.step", {1}, Dtype::kFloat64, {static_cast<double>(optim->steps())}});
  }
  return c;
}

template <typename T>
Model<T> restore_model(const Checkpoint& ckpt) {
  Model<T> m(ckpt.config, 0);
  for (auto& p : m.params().items()) load_into(require(ckpt, p.name), p.tensor);
  return m;
}

bool has_optimizer_state(const Checkpoint& ckpt) { return ckpt.find("optim.step") != nullptr; }

template <typename T>
void restore_optimizer(const Checkpoint& ckpt, Adam<T>& optim, const ParameterSet<T>& params) {
  const auto& items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    load_into(require(ckpt, "optim.m." + items[i].name), optim.first_moments()[i]);
    load_into(require(ckpt, "optim.v." + items[i].name), optim.second_moments()[i]);
  }
  optim.set_steps(static_cast<std::uint64_t>(require(ckpt, "optim.step").values.at(0)));
}

template Checkpoint snapshot(const Model<float>&, const Adam<float>*);
template Checkpoint snapshot(const Model<double>&, const Adam<double>*);
template Model<float> restore_model(const Checkpoint&);
template Model<double> restore_model(const Checkpoint&);
template void restore_optimizer(const Checkpoint&, Adam<float>&, const ParameterSet<float>&);
template void restore_optimizer(const Checkpoint&, Adam<double>&, const ParameterSet<double>&);

}  // namespace tsep::harness
