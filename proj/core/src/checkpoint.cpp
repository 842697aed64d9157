#include "openmix/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <type_traits>

#include "openmix/error.hpp"
#include "openmix/io.hpp"

namespace openmix {

namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what);
    }
    char bytes[sizeof(T)];
    std::memcpy(bytes, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::size_t> read_header(Reader& in) {
  char magic[4];
  for (char& c : magic) c = in.get<char>("magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("bad checkpoint magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>("layer count");
  if (count < 2) throw FormatError("checkpoint needs at least two layer dims");
  if (count > in.remaining() / sizeof(std::uint32_t)) throw FormatError("checkpoint truncated in dims");
  std::vector<std::size_t> dims(count);
  for (auto& d : dims) {
    d = in.get<std::uint32_t>("layer dim");
    if (d == 0) throw FormatError("checkpoint has a zero layer dim");
  }
  return dims;
}

}  // namespace

std::string encode_checkpoint(const MlpModel& model) {
  std::string out(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.layer_dims().size()));
  for (std::size_t d : model.layer_dims()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (const auto& layer : model.layers()) {
    for (double w : layer.weights.data()) put<double>(out, w);
    for (double b : layer.bias) put<double>(out, b);
  }
  return out;
}

std::vector<std::size_t> decode_checkpoint_dims(std::string_view bytes) {
  Reader in(bytes);
  return read_header(in);
}

MlpModel decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  const auto dims = read_header(in);
  std::size_t expected = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) expected += (dims[l] + 1) * dims[l + 1];
  if (in.remaining() != expected * sizeof(double)) {
    throw FormatError(in.remaining() < expected * sizeof(double) ? "checkpoint truncated in weights"
                                                                 : "trailing bytes after checkpoint");
  }
  MlpModel model(dims);
  for (auto& layer : model.layers()) {
    for (double& w : layer.weights.data()) w = in.get<double>("weight");
    for (double& b : layer.bias) b = in.get<double>("bias");
  }
  return model;
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(model));
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace openmix
