#include "ahcr/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "ahcr/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container i/o assumes a little-endian host");

namespace ahcr {

namespace {

constexpr char kMagic[5] = {'A', 'H', 'C', 'R', '1'};

const std::array<std::uint32_t, 256>& crc_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int bit = 0; bit < 8; ++bit)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw FormatError(path + ": truncated container");
  return value;
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t size) {
  const auto& table = crc_table();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i)
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

void ModelContainer::add(std::string name, Shape shape,
                         std::vector<float> data) {
  check_shape_valid(shape);
  if (static_cast<Index>(data.size()) != shape_numel(shape))
    throw ShapeError("tensor " + name + " data does not match shape " +
                     shape_to_string(shape));
  for (auto& entry : entries_) {
    if (entry.name == name) {
      entry.shape = std::move(shape);
      entry.data = std::move(data);
      return;
    }
  }
  entries_.push_back({std::move(name), std::move(shape), std::move(data)});
}

bool ModelContainer::has(const std::string& name) const {
  for (const auto& entry : entries_)
    if (entry.name == name) return true;
  return false;
}

const TensorEntry& ModelContainer::get(const std::string& name) const {
  for (const auto& entry : entries_)
    if (entry.name == name) return entry;
  throw FormatError("container has no tensor named '" + name + "'");
}

void save_container(const ModelContainer& container, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  write_pod(out, ModelContainer::kVersion);
  write_pod(out, static_cast<std::uint32_t>(container.entries().size()));
  for (const auto& entry : container.entries()) {
    write_pod(out, static_cast<std::uint32_t>(entry.name.size()));
    out.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
    write_pod(out, static_cast<std::uint32_t>(entry.shape.size()));
    for (Index d : entry.shape)
      write_pod(out, static_cast<std::uint64_t>(d));
  }
  std::uint32_t crc = 0xFFFFFFFFu;
  const auto& table = crc_table();
  for (const auto& entry : container.entries()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(entry.data.data());
    const std::size_t size = entry.data.size() * sizeof(float);
    out.write(reinterpret_cast<const char*>(bytes),
              static_cast<std::streamsize>(size));
    for (std::size_t i = 0; i < size; ++i)
      crc = table[(crc ^ bytes[i]) & 0xFFu] ^ (crc >> 8);
  }
  write_pod(out, crc ^ 0xFFFFFFFFu);
  if (!out) throw FormatError("write failure on " + path);
}

ModelContainer load_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  char magic[5] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw FormatError(path + ": not a model container (bad magic)");
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != ModelContainer::kVersion)
    throw FormatError(path + ": unsupported container version " +
                      std::to_string(version));
  const auto count = read_pod<std::uint32_t>(in, path);

  ModelContainer container;
  std::vector<std::pair<std::string, Shape>> catalog;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in, path);
    if (name_len > 4096) throw FormatError(path + ": oversized tensor name");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError(path + ": truncated container");
    const auto rank = read_pod<std::uint32_t>(in, path);
    if (rank > 8) throw FormatError(path + ": oversized tensor rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d)
      shape.push_back(static_cast<Index>(read_pod<std::uint64_t>(in, path)));
    check_shape_valid(shape);
    catalog.emplace_back(std::move(name), std::move(shape));
  }

  std::uint32_t crc = 0xFFFFFFFFu;
  const auto& table = crc_table();
  for (auto& [name, shape] : catalog) {
    std::vector<float> data(static_cast<std::size_t>(shape_numel(shape)));
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!in) throw FormatError(path + ": truncated payload");
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t i = 0; i < data.size() * sizeof(float); ++i)
      crc = table[(crc ^ bytes[i]) & 0xFFu] ^ (crc >> 8);
    container.add(std::move(name), std::move(shape), std::move(data));
  }
  const auto stored = read_pod<std::uint32_t>(in, path);
  if (stored != (crc ^ 0xFFFFFFFFu))
    throw FormatError(path + ": checksum mismatch, container corrupted");
  return container;
}

}  // namespace ahcr
