#include "cforge/io.hpp"

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cforge {

u32 crc32(const void* data, size_t len) {
  static const auto table = [] {
    std::array<u32, 256> t{};
    for (u32 i = 0; i < 256; ++i) {
      u32 c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  u32 crc = 0xFFFFFFFFu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "cannot open " + path);
  f.seekg(0, std::ios::end);
  const auto n = static_cast<size_t>(f.tellg());
  f.seekg(0);
  std::vector<unsigned char> buf(n);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  require(f.good(), "short read on " + path);
  return buf;
}

void write_file(const std::string& path, const void* data, size_t len) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), "cannot write " + path);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  require(f.good(), "short write on " + path);
}

namespace {

// blobs are float32 on disk regardless of the in-memory real type
std::vector<float> to_f32(const Tensor& t) {
  std::vector<float> v(t.data.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(t.data[i]);
  return v;
}

Tensor blob_to_tensor(const std::vector<unsigned char>& raw, std::vector<int> shape) {
  require(raw.size() % 4 == 0, "blob size not a multiple of 4");
  const size_t n = raw.size() / 4;
  require(static_cast<i64>(n) == Tensor::numel_of(shape), "blob size does not match shape");
  Tensor t(std::move(shape));
  std::vector<float> f(n);
  std::memcpy(f.data(), raw.data(), raw.size());
  for (size_t i = 0; i < n; ++i) t.data[i] = static_cast<real>(f[i]);
  return t;
}

std::string kind_name(LayerKind k) { return k == LayerKind::conv ? "conv" : "fc"; }

LayerKind kind_from(const std::string& s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "fc") return LayerKind::fc;
  throw std::runtime_error("unknown layer kind: " + s);
}

}  // namespace

void save_model(const std::string& dir, const ModelGraph& model) {
  model.validate();
  fs::create_directories(dir);
  json man;
  man["format"] = "cforge-model-v1";
  man["head_classes"] = model.head_classes;
  man["transition"] = model.transition == FcTransition::flatten ? "flatten" : "gap";
  man["junctions"] = json::array();
  for (const auto& j : model.junctions) man["junctions"].push_back({j.producer, j.consumer});
  man["layers"] = json::array();
  for (int t = 0; t < model.layer_count(); ++t) {
    const auto& d = model.layers[t];
    const std::string wname = "layer" + std::to_string(t) + ".w.bin";
    const std::string bname = "layer" + std::to_string(t) + ".b.bin";
    const auto wf = to_f32(model.weights[t]);
    const auto bf = to_f32(model.biases[t]);
    write_file(dir + "/" + wname, wf.data(), wf.size() * 4);
    write_file(dir + "/" + bname, bf.data(), bf.size() * 4);
    json jl = {{"index", d.index},
               {"kind", kind_name(d.kind)},
               {"c_in", d.c_in},
               {"c_out", d.c_out},
               {"h_in", d.h_in},
               {"w_in", d.w_in},
               {"k", d.k},
               {"stride", d.stride},
               {"pad", d.pad},
               {"n", d.n_out},
               {"m", d.m_in},
               {"weight_blob", wname},
               {"bias_blob", bname},
               {"weight_crc32", crc32(wf.data(), wf.size() * 4)},
               {"bias_crc32", crc32(bf.data(), bf.size() * 4)}};
    man["layers"].push_back(jl);
  }
  const std::string text = man.dump(2) + "\n";
  write_file(dir + "/manifest.json", text.data(), text.size());
}

ModelGraph load_model(const std::string& dir) {
  json man;
  {
    auto raw = read_file(dir + "/manifest.json");
    man = json::parse(raw.begin(), raw.end());
  }
  require(man.value("format", "") == "cforge-model-v1", "model manifest: bad format tag");
  ModelGraph model;
  model.head_classes = man.at("head_classes").get<int>();
  model.transition =
      man.value("transition", "flatten") == "gap" ? FcTransition::global_avg_pool : FcTransition::flatten;
  for (const auto& j : man.at("junctions")) {
    require(j.is_array() && j.size() == 2, "model manifest: bad junction entry");
    model.junctions.push_back({j[0].get<int>(), j[1].get<int>()});
  }
  for (const auto& jl : man.at("layers")) {
    LayerDescriptor d;
    d.index = jl.at("index").get<int>();
    d.kind = kind_from(jl.at("kind").get<std::string>());
    d.c_in = jl.value("c_in", 0);
    d.c_out = jl.value("c_out", 0);
    d.h_in = jl.value("h_in", 0);
    d.w_in = jl.value("w_in", 0);
    d.k = jl.value("k", 1);
    d.stride = jl.value("stride", 1);
    d.pad = jl.value("pad", 0);
    d.n_out = jl.value("n", 0);
    d.m_in = jl.value("m", 0);

    auto wraw = read_file(dir + "/" + jl.at("weight_blob").get<std::string>());
    auto braw = read_file(dir + "/" + jl.at("bias_blob").get<std::string>());
    require(crc32(wraw.data(), wraw.size()) == jl.at("weight_crc32").get<u32>(),
            "model blob checksum mismatch (weights, layer " + std::to_string(d.index) + ")");
    require(crc32(braw.data(), braw.size()) == jl.at("bias_crc32").get<u32>(),
            "model blob checksum mismatch (bias, layer " + std::to_string(d.index) + ")");
    model.weights.push_back(blob_to_tensor(wraw, d.weight_shape()));
    model.biases.push_back(blob_to_tensor(braw, {d.output_units()}));
    model.layers.push_back(d);
  }
  model.validate();
  return model;
}

namespace {
constexpr char kDatasetMagic[4] = {'C', 'F', 'D', 'S'};

const char* split_name(Split s) {
  switch (s) {
    case Split::train_calib: return "train-calib";
    case Split::validation: return "validation";
    default: return "test";
  }
}

Split split_from(const std::string& s) {
  if (s == "train-calib") return Split::train_calib;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw std::runtime_error("unknown split tag: " + s);
}
}  // namespace

void save_dataset(const std::string& dir, const Dataset& data) {
  fs::create_directories(dir);
  std::vector<unsigned char> buf;
  auto push_u32 = [&buf](u32 v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
  };
  buf.insert(buf.end(), kDatasetMagic, kDatasetMagic + 4);
  push_u32(static_cast<u32>(data.size()));
  push_u32(static_cast<u32>(data.sample_shape.size()));
  for (int d : data.sample_shape) push_u32(static_cast<u32>(d));
  for (const auto& t : data.inputs) {
    for (real v : t.data) {
      float f = static_cast<float>(v);
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      buf.insert(buf.end(), b, b + 4);
    }
  }
  write_file(dir + "/data.bin", buf.data(), buf.size());

  std::vector<u32> ids(data.labels.begin(), data.labels.end());
  write_file(dir + "/labels.bin", ids.data(), ids.size() * 4);

  json sp;
  sp["num_classes"] = data.num_classes;
  sp["tags"] = json::array();
  for (Split s : data.splits) sp["tags"].push_back(split_name(s));
  const std::string text = sp.dump() + "\n";
  write_file(dir + "/splits.json", text.data(), text.size());
}

Dataset load_dataset(const std::string& dir) {
  auto raw = read_file(dir + "/data.bin");
  require(raw.size() >= 12 && std::memcmp(raw.data(), kDatasetMagic, 4) == 0,
          "dataset: bad magic in data.bin");
  size_t off = 4;
  auto read_u32 = [&raw, &off]() {
    require(off + 4 <= raw.size(), "dataset: truncated header");
    u32 v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<u32>(raw[off + i]) << (8 * i);
    off += 4;
    return v;
  };
  const u32 count = read_u32();
  const u32 ndim = read_u32();
  require(ndim >= 1 && ndim <= 4, "dataset: unsupported sample rank");
  Dataset data;
  i64 numel = 1;
  for (u32 i = 0; i < ndim; ++i) {
    data.sample_shape.push_back(static_cast<int>(read_u32()));
    numel *= data.sample_shape.back();
  }
  require(raw.size() == off + static_cast<size_t>(count) * numel * 4,
          "dataset: data.bin size mismatch");
  data.inputs.reserve(count);
  for (u32 s = 0; s < count; ++s) {
    Tensor t(data.sample_shape);
    for (i64 i = 0; i < numel; ++i) {
      float f;
      std::memcpy(&f, raw.data() + off, 4);
      off += 4;
      t.data[static_cast<size_t>(i)] = static_cast<real>(f);
    }
    data.inputs.push_back(std::move(t));
  }

  auto lraw = read_file(dir + "/labels.bin");
  require(lraw.size() == static_cast<size_t>(count) * 4, "dataset: labels.bin size mismatch");
  data.labels.resize(count);
  int max_label = 0;
  for (u32 s = 0; s < count; ++s) {
    u32 v;
    std::memcpy(&v, lraw.data() + s * 4, 4);
    data.labels[s] = static_cast<int>(v);
    max_label = std::max(max_label, data.labels[s]);
  }

  data.splits.assign(count, Split::validation);
  data.num_classes = max_label + 1;
  if (fs::exists(dir + "/splits.json")) {
    auto sraw = read_file(dir + "/splits.json");
    json sp = json::parse(sraw.begin(), sraw.end());
    data.num_classes = sp.value("num_classes", data.num_classes);
    const auto& tags = sp.at("tags");
    require(tags.size() == count, "dataset: splits.json tag count mismatch");
    for (u32 s = 0; s < count; ++s) data.splits[s] = split_from(tags[s].get<std::string>());
  }
  for (int l : data.labels)
    require(l >= 0 && l < data.num_classes, "dataset: label out of range");
  return data;
}

}  // namespace cforge
