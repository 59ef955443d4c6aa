// Copyright 2026 The cerl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cerl/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cerl/random.h"

namespace cerl {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <class T>
  void Put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
  }
  void Bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out.insert(out.end(), p, p + n);
  }
  void Floats(const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) Put(static_cast<float>(v[i]));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t n) : data_(data), n_(n) {}
  template <class T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string String(std::size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  void Floats(double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = Get<float>();
  }
  bool done() const { return pos_ == n_; }

 private:
  void Need(std::size_t k) const {
    if (pos_ + k > n_) throw CheckpointError("checkpoint truncated");
  }
  const std::uint8_t* data_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

struct Extra {
  const char* name;
  std::size_t size;
};

std::vector<Extra> ExtraTensors(const Policy& p) {
  const std::size_t obs = p.arch().obs_size;
  const std::size_t n = p.params().size();
  return {{"obs_norm.mean", obs}, {"obs_norm.var", obs}, {"adam.m", n}, {"adam.v", n}};
}

}  // namespace

std::vector<std::uint8_t> SerializeCheckpoint(const Checkpoint& ck) {
  const Policy& p = ck.policy;
  if (ck.adam.m.size() != p.params().size() || ck.adam.v.size() != p.params().size()) {
    throw CheckpointError("optimizer state does not match the parameter count");
  }
  Writer w;
  w.Bytes(kCheckpointMagic, 4);
  w.Put(kCheckpointVersion);
  w.Put(p.arch().layout_hash);
  w.Put(ck.config_digest);
  w.Put(static_cast<std::int64_t>(ck.step));
  w.Put(static_cast<std::int64_t>(ck.adam.t));
  w.Put(static_cast<std::uint64_t>(p.normalizer().count));
  const std::string arch = nlohmann::json(p.arch()).dump();
  w.Put(static_cast<std::uint32_t>(arch.size()));
  w.Bytes(arch.data(), arch.size());

  const auto extras = ExtraTensors(p);
  w.Put(static_cast<std::uint32_t>(p.tensors().size() + extras.size()));
  for (const auto& t : p.tensors()) {
    w.Put(static_cast<std::uint16_t>(t.name.size()));
    w.Bytes(t.name.data(), t.name.size());
    w.Put(static_cast<std::uint32_t>(t.rows));
    w.Put(static_cast<std::uint32_t>(t.cols));
  }
  for (const auto& e : extras) {
    const std::size_t len = std::strlen(e.name);
    w.Put(static_cast<std::uint16_t>(len));
    w.Bytes(e.name, len);
    w.Put(static_cast<std::uint32_t>(e.size));
    w.Put(static_cast<std::uint32_t>(1));
  }
  w.Floats(p.params().data(), p.params().size());
  w.Floats(p.normalizer().mean.data(), p.normalizer().mean.size());
  w.Floats(p.normalizer().var.data(), p.normalizer().var.size());
  w.Floats(ck.adam.m.data(), ck.adam.m.size());
  w.Floats(ck.adam.v.data(), ck.adam.v.size());
  w.Put(Fnv1a(w.out.data(), w.out.size()));
  return std::move(w.out);
}

Checkpoint DeserializeCheckpoint(const std::vector<std::uint8_t>& bytes,
                                 std::optional<std::uint64_t> layout_hash,
                                 std::optional<std::uint64_t> config_digest) {
  if (bytes.size() < 4 + sizeof(std::uint64_t)) throw CheckpointError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof(stored));
  if (Fnv1a(bytes.data(), body) != stored) {
    throw CheckpointError("checkpoint integrity check failed (truncated or corrupted)");
  }
  Reader r(bytes.data() + 4, body - 4);
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto hash = r.Get<std::uint64_t>();
  const auto digest = r.Get<std::uint64_t>();
  if (layout_hash && *layout_hash != hash) {
    throw CheckpointError("observation layout mismatch: checkpoint has " +
                          std::to_string(hash) + ", environment has " +
                          std::to_string(*layout_hash));
  }
  if (config_digest && *config_digest != digest) {
    throw CheckpointError("config digest mismatch");
  }
  Checkpoint ck;
  ck.config_digest = digest;
  ck.step = r.Get<std::int64_t>();
  ck.adam.t = r.Get<std::int64_t>();
  const auto count = r.Get<std::uint64_t>();
  const auto arch_len = r.Get<std::uint32_t>();
  PolicyArch arch;
  try {
    arch = nlohmann::json::parse(r.String(arch_len)).get<PolicyArch>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad architecture record: ") + e.what());
  }
  if (arch.layout_hash != hash) throw CheckpointError("architecture hash disagrees with header");
  ck.policy = Policy(arch, 0);
  Policy& p = ck.policy;
  const auto extras = ExtraTensors(p);
  const auto n_tensors = r.Get<std::uint32_t>();
  if (n_tensors != p.tensors().size() + extras.size()) {
    throw CheckpointError("tensor table does not match the architecture");
  }
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const std::string name = r.String(r.Get<std::uint16_t>());
    const auto rows = r.Get<std::uint32_t>();
    const auto cols = r.Get<std::uint32_t>();
    bool ok;
    if (i < p.tensors().size()) {
      const auto& t = p.tensors()[i];
      ok = name == t.name && rows == static_cast<std::uint32_t>(t.rows) &&
           cols == static_cast<std::uint32_t>(t.cols);
    } else {
      const auto& e = extras[i - p.tensors().size()];
      ok = name == e.name && rows == e.size && cols == 1;
    }
    if (!ok) throw CheckpointError("tensor table entry '" + name + "' does not match");
  }
  r.Floats(p.params().data(), p.params().size());
  p.normalizer().count = count;
  r.Floats(p.normalizer().mean.data(), p.normalizer().mean.size());
  r.Floats(p.normalizer().var.data(), p.normalizer().var.size());
  ck.adam.m.resize(p.params().size());
  ck.adam.v.resize(p.params().size());
  r.Floats(ck.adam.m.data(), ck.adam.m.size());
  r.Floats(ck.adam.v.data(), ck.adam.v.size());
  if (!r.done()) throw CheckpointError("trailing bytes in checkpoint");
  return ck;
}

void SaveCheckpoint(const Checkpoint& ck, const std::string& path) {
  const auto bytes = SerializeCheckpoint(ck);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw CheckpointError("write to " + path + " failed");
}

Checkpoint LoadCheckpoint(const std::string& path, std::optional<std::uint64_t> layout_hash,
                          std::optional<std::uint64_t> config_digest) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return DeserializeCheckpoint(bytes, layout_hash, config_digest);
}

}  // namespace cerl
