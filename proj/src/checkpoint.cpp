/* Copyright 2026 The IFA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ifa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "ifa/errors.hpp"

namespace ifa {
namespace {

constexpr char kMagic[4] = {'I', 'F', 'A', 'K'};

static_assert(std::numeric_limits<double>::is_iec559);

template <typename T>
void put(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("checkpoint truncated");
  }

  std::string data_;
  std::size_t pos_ = 0;
};

std::vector<CheckpointEntry> model_entries(const Model& model) {
  std::vector<CheckpointEntry> out;
  for (const auto& e : model.parameters().entries()) {
    const auto v = e.tensor.values();
    out.push_back({e.name, e.tensor.shape(), std::vector<double>(v.begin(), v.end())});
  }
  return out;
}

}  // namespace

void write_checkpoint_file(const std::filesystem::path& path, const std::vector<CheckpointEntry>& entries) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.name.size() > std::numeric_limits<std::uint16_t>::max()) throw InputError("entry name too long");
    if (e.shape.size() > std::numeric_limits<std::uint8_t>::max()) throw InputError("entry rank too large");
    if (numel(e.shape) != static_cast<Index>(e.values.size())) throw DimensionError("entry " + e.name + " size mismatch");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(e.name.size()));
    out += e.name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.shape.size()));
    for (Index d : e.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : e.values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write " + tmp.string());
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CheckpointEntry> read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(is), {}));

  if (r.bytes(4) != std::string(kMagic, 4)) throw FormatError("not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<CheckpointEntry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = r.bytes(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    for (int d = 0; d < rank; ++d) e.shape.push_back(static_cast<Index>(r.get<std::uint32_t>()));
    const Index n = numel(e.shape);
    e.values.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) e.values.push_back(std::bit_cast<double>(r.get<std::uint64_t>()));
    entries.push_back(std::move(e));
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint entries");
  return entries;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& config, int epoch) {
  auto entries = model_entries(model);
  const std::string text = format_train_config(config);
  entries.push_back({"meta.config", Shape{static_cast<Index>(text.size())},
                     std::vector<double>(text.begin(), text.end())});
  entries.push_back({"meta.epoch", Shape{1}, {static_cast<double>(epoch)}});
  write_checkpoint_file(path, entries);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ck;
  bool have_config = false, have_epoch = false;
  for (auto& e : read_checkpoint_file(path)) {
    if (e.name == "meta.config") {
      std::string text;
      for (double v : e.values) text.push_back(static_cast<char>(v));
      try {
        ck.config = parse_train_config(text);
      } catch (const InputError& err) {
        throw FormatError(std::string("bad checkpoint config: ") + err.what());
      }
      have_config = true;
    } else if (e.name == "meta.epoch") {
      if (e.values.size() != 1) throw FormatError("bad meta.epoch entry");
      ck.epoch = static_cast<int>(e.values[0]);
      have_epoch = true;
    } else {
      ck.parameters.push_back(std::move(e));
    }
  }
  if (!have_config || !have_epoch) throw FormatError("checkpoint lacks metadata entries");
  return ck;
}

Model restore_model(const Checkpoint& checkpoint) {
  Model model(checkpoint.config.model);
  const auto& entries = model.parameters().entries();
  if (entries.size() != checkpoint.parameters.size()) throw FormatError("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& src = checkpoint.parameters[i];
    Tensor dst = entries[i].tensor;
    if (src.name != entries[i].name || src.shape != dst.shape()) {
      throw FormatError("checkpoint entry " + src.name + " does not match the architecture");
    }
    std::memcpy(dst.mutable_values().data(), src.values.data(), src.values.size() * sizeof(double));
  }
  return model;
}

}  // namespace ifa
