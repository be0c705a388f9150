#pragma once

#include <map>
#include <string>
#include <vector>

#include "pwc/image.hpp"
#include "pwc/tensor.hpp"

namespace pwc {

// Raised for missing/unreadable files; the CLI maps it to exit code 3.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for malformed payloads (bad magic, truncated data, schema mismatch).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary tensor container: magic "PWC1", version u16, ndim u16, dims u32 each,
// then the payload as 64-bit little-endian reals, row-major. Round-trips are
// bit-exact. Byte-level layout documented in FORMATS.md.
void write_container(const std::string& path, const Tensor& t);
Tensor read_container(const std::string& path);

std::vector<unsigned char> container_bytes(const Tensor& t);
Tensor container_from_bytes(const unsigned char* data, size_t size, size_t* consumed = nullptr);

Tensor image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor& t);  // rank-2 tensors only

// Checkpoint bundle: magic "PWCB", a string-keyed metadata section (the
// manifest: model kind, architecture echo, counts) followed by named tensors,
// each stored as an embedded container.
struct Bundle {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  std::string meta_at(const std::string& key) const;
};

void write_bundle(const std::string& path, const Bundle& b);
Bundle read_bundle(const std::string& path);

// Binary PGM (P5, maxval 255) of a dB image: byte = round((v - floor) /
// (ceil - floor) * 255), round half up. Values outside [floor, ceil] are an
// error; q_transform output is in range by construction.
void export_pgm(const Image& q_img, const std::string& path, double floor_db = -60.0,
                double ceil_db = 0.0);

struct PgmImage {
  int height = 0, width = 0;
  std::vector<unsigned char> bytes;
};
PgmImage read_pgm(const std::string& path);

// Minimal CSV writer; all experiment outputs go through this.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::string csv_num(double v);

}  // namespace pwc
