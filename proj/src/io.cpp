#include "pwc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace pwc {

namespace {

constexpr char kContainerMagic[4] = {'P', 'W', 'C', '1'};
constexpr char kBundleMagic[4] = {'P', 'W', 'C', 'B'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<unsigned char>& out, uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const unsigned char* p;
  size_t n;
  size_t pos = 0;

  void need(size_t k) const {
    if (pos + k > n) throw FormatError("container: truncated data");
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(p[pos] | (p[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(size_t k) {
    need(k);
    std::string s(reinterpret_cast<const char*>(p + pos), k);
    pos += k;
    return s;
  }
};

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FileError("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  auto len = f.tellg();
  f.seekg(0);
  std::vector<unsigned char> buf(static_cast<size_t>(len));
  if (len > 0) f.read(reinterpret_cast<char*>(buf.data()), len);
  if (!f) throw FileError("cannot read file: " + path);
  return buf;
}

void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FileError("cannot open file for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FileError("write failed: " + path);
}

}  // namespace

std::vector<unsigned char> container_bytes(const Tensor& t) {
  std::vector<unsigned char> out;
  out.reserve(12 + 4 * t.dims().size() + 8 * t.size());
  out.insert(out.end(), kContainerMagic, kContainerMagic + 4);
  put_u16(out, kVersion);
  put_u16(out, static_cast<uint16_t>(t.rank()));
  for (int d : t.dims()) put_u32(out, static_cast<uint32_t>(d));
  for (size_t i = 0; i < t.size(); ++i) put_f64(out, t[i]);
  return out;
}

Tensor container_from_bytes(const unsigned char* data, size_t size, size_t* consumed) {
  Reader r{data, size};
  if (r.str(4) != std::string(kContainerMagic, 4)) throw FormatError("container: bad magic");
  if (r.u16() != kVersion) throw FormatError("container: unsupported version");
  const uint16_t ndim = r.u16();
  if (ndim < 1 || ndim > 4) throw FormatError("container: rank must be 1..4");
  std::vector<int> dims(ndim);
  size_t n = 1;
  for (auto& d : dims) {
    d = static_cast<int>(r.u32());
    if (d <= 0) throw FormatError("container: nonpositive dim");
    n *= static_cast<size_t>(d);
  }
  Tensor t(dims);
  for (size_t i = 0; i < n; ++i) t[i] = r.f64();
  if (consumed) *consumed = r.pos;
  return t;
}

void write_container(const std::string& path, const Tensor& t) {
  write_file(path, container_bytes(t));
}

Tensor read_container(const std::string& path) {
  auto buf = read_file(path);
  size_t consumed = 0;
  Tensor t = container_from_bytes(buf.data(), buf.size(), &consumed);
  if (consumed != buf.size()) throw FormatError("container: trailing bytes in " + path);
  return t;
}

Tensor image_to_tensor(const Image& img) {
  Tensor t({img.height, img.width});
  for (size_t i = 0; i < img.size(); ++i) t[i] = img.data[i];
  return t;
}

Image tensor_to_image(const Tensor& t) {
  if (t.rank() != 2) throw FormatError("tensor_to_image: rank-2 tensor required");
  Image img(t.dim(0), t.dim(1));
  for (size_t i = 0; i < img.size(); ++i) img.data[i] = t[i];
  return img;
}

const Tensor& Bundle::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw FormatError("bundle: missing tensor " + name);
}

bool Bundle::has_tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

std::string Bundle::meta_at(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("bundle: missing meta key " + key);
  return it->second;
}

void write_bundle(const std::string& path, const Bundle& b) {
  std::vector<unsigned char> out;
  out.insert(out.end(), kBundleMagic, kBundleMagic + 4);
  put_u16(out, kVersion);
  put_u16(out, static_cast<uint16_t>(b.meta.size()));
  for (const auto& [k, v] : b.meta) {
    put_u16(out, static_cast<uint16_t>(k.size()));
    out.insert(out.end(), k.begin(), k.end());
    put_u32(out, static_cast<uint32_t>(v.size()));
    out.insert(out.end(), v.begin(), v.end());
  }
  put_u32(out, static_cast<uint32_t>(b.tensors.size()));
  for (const auto& [name, t] : b.tensors) {
    put_u16(out, static_cast<uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    auto payload = container_bytes(t);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  write_file(path, out);
}

Bundle read_bundle(const std::string& path) {
  auto buf = read_file(path);
  Reader r{buf.data(), buf.size()};
  if (r.str(4) != std::string(kBundleMagic, 4)) throw FormatError("bundle: bad magic");
  if (r.u16() != kVersion) throw FormatError("bundle: unsupported version");
  Bundle b;
  const uint16_t nmeta = r.u16();
  for (uint16_t i = 0; i < nmeta; ++i) {
    std::string k = r.str(r.u16());
    std::string v = r.str(r.u32());
    b.meta[k] = v;
  }
  const uint32_t nt = r.u32();
  for (uint32_t i = 0; i < nt; ++i) {
    std::string name = r.str(r.u16());
    size_t consumed = 0;
    Tensor t = container_from_bytes(buf.data() + r.pos, buf.size() - r.pos, &consumed);
    r.pos += consumed;
    b.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (r.pos != buf.size()) throw FormatError("bundle: trailing bytes in " + path);
  return b;
}

void export_pgm(const Image& q_img, const std::string& path, double floor_db, double ceil_db) {
  const double range = ceil_db - floor_db;
  std::vector<unsigned char> bytes;
  char header[64];
  int hlen = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", q_img.width, q_img.height);
  bytes.insert(bytes.end(), header, header + hlen);
  for (double v : q_img.data) {
    if (v < floor_db || v > ceil_db)
      throw FormatError("export_pgm: value outside dB display range");
    bytes.push_back(static_cast<unsigned char>(std::floor((v - floor_db) / range * 255.0 + 0.5)));
  }
  write_file(path, bytes);
}

PgmImage read_pgm(const std::string& path) {
  auto buf = read_file(path);
  Reader r{buf.data(), buf.size()};
  // minimal P5 parser, enough for round-trip checks
  auto token = [&]() {
    std::string t;
    while (r.pos < r.n && std::isspace(buf[r.pos])) ++r.pos;
    while (r.pos < r.n && !std::isspace(buf[r.pos])) t.push_back(static_cast<char>(buf[r.pos++]));
    return t;
  };
  if (token() != "P5") throw FormatError("read_pgm: not a P5 file");
  PgmImage img;
  img.width = std::stoi(token());
  img.height = std::stoi(token());
  if (token() != "255") throw FormatError("read_pgm: unsupported maxval");
  ++r.pos;  // single whitespace after maxval
  const size_t n = static_cast<size_t>(img.width) * img.height;
  r.need(n);
  img.bytes.assign(buf.begin() + static_cast<long>(r.pos), buf.begin() + static_cast<long>(r.pos + n));
  return img;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FileError("cannot open file for writing: " + path);
  for (size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  if (!f) throw FileError("write failed: " + path);
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace pwc
