#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "pwc/config.hpp"
#include "pwc/io.hpp"
#include "pwc/rng.hpp"

using namespace pwc;

namespace {

std::string temp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "pwc_io_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("container round-trip is bit-exact for ranks 1..4") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int rank = 1 + trial % 4;
    std::vector<int> dims;
    for (int i = 0; i < rank; ++i) dims.push_back(1 + rng.uniform_int(6));
    Tensor t(dims);
    for (size_t i = 0; i < t.size(); ++i) t[i] = rng.gaussian() * std::pow(10.0, rng.uniform(-30, 30));
    const std::string path = temp_path("roundtrip.pwc");
    write_container(path, t);
    Tensor u = read_container(path);
    REQUIRE(u.dims() == t.dims());
    for (size_t i = 0; i < t.size(); ++i) CHECK(u[i] == t[i]);
  }
}

TEST_CASE("container rejects surgery") {
  Tensor t({2, 3});
  auto bytes = container_bytes(t);
  bytes[0] = 'X';
  CHECK_THROWS_AS((void)container_from_bytes(bytes.data(), bytes.size()), FormatError);
  auto ok = container_bytes(t);
  CHECK_THROWS_AS((void)container_from_bytes(ok.data(), ok.size() - 3), FormatError);
}

TEST_CASE("missing files raise FileError") {
  CHECK_THROWS_AS((void)read_container("/nonexistent/nowhere.pwc"), FileError);
}

TEST_CASE("bundle round-trip preserves metadata and tensors") {
  Bundle b;
  b.meta["kind"] = "unfolded";
  b.meta["folds"] = "3";
  Rng rng(42);
  Tensor w({2, 1, 3, 3});
  for (size_t i = 0; i < w.size(); ++i) w[i] = rng.gaussian();
  b.tensors.emplace_back("fold0.w", w);
  b.tensors.emplace_back("final.b", Tensor({1}, 0.25));
  const std::string path = temp_path("ckpt.pwcb");
  write_bundle(path, b);
  Bundle r = read_bundle(path);
  CHECK(r.meta_at("kind") == "unfolded");
  CHECK(r.meta_at("folds") == "3");
  REQUIRE(r.tensors.size() == 2);
  CHECK(r.tensors[0].first == "fold0.w");
  for (size_t i = 0; i < w.size(); ++i) CHECK(r.tensor("fold0.w")[i] == w[i]);
  CHECK(r.tensor("final.b")[0] == 0.25);
  CHECK_THROWS_AS((void)r.tensor("nope"), FormatError);
}

TEST_CASE("pgm export maps the dB range linearly") {
  Image q(2, 2);
  q.data = {-60.0, 0.0, -30.0, -60.0};
  const std::string path = temp_path("img.pgm");
  export_pgm(q, path);
  PgmImage img = read_pgm(path);
  REQUIRE(img.bytes.size() == 4);
  CHECK(img.bytes[0] == 0);
  CHECK(img.bytes[1] == 255);
  CHECK(img.bytes[2] == 128);  // round half up
  CHECK(img.bytes[3] == 0);

  Image uniform_floor(3, 3, -60.0);
  export_pgm(uniform_floor, path);
  for (unsigned char byte : read_pgm(path).bytes) CHECK(byte == 0);
  Image uniform_ceil(3, 3, 0.0);
  export_pgm(uniform_ceil, path);
  for (unsigned char byte : read_pgm(path).bytes) CHECK(byte == 255);

  Image bad(1, 1, 3.0);
  CHECK_THROWS_AS(export_pgm(bad, path), FormatError);
}

TEST_CASE("config parse applies defaults, comments and overrides") {
  RunConfig cfg = parse_config_text(
      "# comment\n"
      "sim.n_points = 10   # trailing comment\n"
      "train.lambda3 = 0.5\n"
      "model.folds=4\n");
  CHECK(cfg.sim.n_points == 10);
  CHECK(cfg.lambda3 == 0.5);
  CHECK(cfg.folds == 4);
  CHECK(cfg.sim.height == 256);  // untouched default
  CHECK(cfg.lambda1 == 1.0);
  CHECK(cfg.lambda2 == 1.0);
  CHECK(cfg.epochs_per_stage == 60);
  CHECK(cfg.lr == 1e-4);
  CHECK(cfg.beta1 == 0.5);
}

TEST_CASE("config rejects unknown keys naming the key") {
  try {
    (void)parse_config_text("train.warp_speed = 9\n");
    FAIL("expected ConfigKeyError");
  } catch (const ConfigKeyError& e) {
    CHECK(e.key == "train.warp_speed");
  }
}

TEST_CASE("config epsilon tracks the floor unless overridden") {
  RunConfig a = parse_config_text("q.floor_db = -80\n");
  CHECK(a.q.epsilon == doctest::Approx(1e-4).epsilon(1e-12));
  RunConfig b = parse_config_text("q.floor_db = -80\nq.epsilon = 0.01\n");
  CHECK(b.q.epsilon == 0.01);
  // order independence
  RunConfig c = parse_config_text("q.epsilon = 0.01\nq.floor_db = -80\n");
  CHECK(c.q.epsilon == 0.01);
}

TEST_CASE("config serialization is idempotent") {
  RunConfig cfg = parse_config_text("sim.n_points = 3\ntrain.lr = 0.001\nsim.angles = -5,0,5\n");
  std::string s1 = serialize_config(cfg);
  RunConfig cfg2 = parse_config_text(s1);
  std::string s2 = serialize_config(cfg2);
  CHECK(s1 == s2);
  CHECK(cfg2.sim.angles_deg == std::vector<double>{-5.0, 0.0, 5.0});
}

TEST_CASE("every config key carries documentation") {
  for (const auto& [key, doc] : config_key_docs()) {
    CHECK_FALSE(key.empty());
    CHECK_FALSE(doc.empty());
  }
}
