#include "facedit/param_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "facedit/errors.hpp"
#include "facedit/hashing.hpp"

namespace facedit {

namespace {

std::vector<std::pair<std::string, torch::Tensor>> entries(const torch::nn::Module& module) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& p : module.named_parameters()) out.emplace_back(p.key(), p.value());
  for (const auto& b : module.named_buffers()) out.emplace_back(b.key(), b.value());
  return out;
}

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    auto out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  [[nodiscard]] bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw CheckpointError("parameter blob truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_parameters(const torch::nn::Module& module) {
  const auto items = entries(module);
  std::string out = "FDPB";
  put<std::uint32_t>(out, kParamBlobVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(items.size()));
  for (const auto& [name, t] : items) {
    const auto c = t.detach().contiguous().cpu();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(c.scalar_type()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.dim()));
    for (auto d : c.sizes()) put<std::int64_t>(out, d);
    const auto nbytes = static_cast<std::uint64_t>(c.nbytes());
    put<std::uint64_t>(out, nbytes);
    out.append(static_cast<const char*>(c.data_ptr()), nbytes);
  }
  return out;
}

void deserialize_parameters(torch::nn::Module& module, const std::string& blob) {
  Reader r(blob);
  if (r.bytes(4) != "FDPB") throw CheckpointError("not a parameter blob");
  if (const auto v = r.get<std::uint32_t>(); v != kParamBlobVersion) {
    throw CheckpointError("parameter blob version " + std::to_string(v) + " unsupported");
  }
  auto items = entries(module);
  const auto count = r.get<std::uint32_t>();
  if (count != items.size()) {
    throw CheckpointError("parameter blob has " + std::to_string(count) + " entries, module " +
                          std::to_string(items.size()));
  }
  std::vector<torch::Tensor> staged;
  for (auto& [name, t] : items) {
    const auto stored = r.bytes(r.get<std::uint32_t>());
    if (stored != name) throw CheckpointError("expected '" + name + "', blob has '" + stored + "'");
    const auto dtype = static_cast<c10::ScalarType>(r.get<std::uint8_t>());
    std::vector<std::int64_t> dims(r.get<std::uint32_t>());
    for (auto& d : dims) d = r.get<std::int64_t>();
    if (dtype != t.scalar_type() || !t.sizes().equals(dims)) {
      throw CheckpointError("dtype or shape mismatch for '" + name + "'");
    }
    const auto data = r.bytes(r.get<std::uint64_t>());
    auto src = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    if (static_cast<std::size_t>(src.nbytes()) != data.size()) {
      throw CheckpointError("byte count mismatch for '" + name + "'");
    }
    std::memcpy(src.data_ptr(), data.data(), data.size());
    staged.push_back(src);
  }
  if (!r.done()) throw CheckpointError("trailing bytes in parameter blob");
  torch::NoGradGuard no_grad;
  for (std::size_t i = 0; i < items.size(); ++i) items[i].second.copy_(staged[i]);
}

std::uint64_t save_parameters(const torch::nn::Module& module, const std::filesystem::path& path) {
  const auto blob = serialize_parameters(module);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw CheckpointError("cannot write " + path.string());
  Fnv1a h;
  h.update(blob);
  return h.digest();
}

void load_parameters(torch::nn::Module& module, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("missing parameter file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    deserialize_parameters(module, ss.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

std::uint64_t parameter_hash(const torch::nn::Module& module) {
  Fnv1a h;
  h.update(serialize_parameters(module));
  return h.digest();
}

void set_trainable(torch::nn::Module& module, bool trainable) {
  for (auto& p : module.parameters()) p.set_requires_grad(trainable);
}

}  // namespace facedit
