#include "support.hpp"

#include "geomimu/gcb1.hpp"
#include "geomimu/giw1.hpp"
#include "geomimu/gmc1.hpp"
#include "geomimu/gmx1.hpp"
#include "geomimu/gpw1.hpp"
#include "geomimu/verify/fixtures.hpp"

#include <filesystem>

#include <unistd.h>

using namespace geomimu;
using namespace geomimu::test;

namespace {

Bytes truncated(const Bytes& b, std::size_t keep) { return Bytes(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(keep)); }

template <class Read>
void check_damage(const Bytes& good, Read read) {
  Bytes bad = good;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(read(bad), doctest::Contains("bad magic"), IoError);
  for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{6}, good.size() / 2, good.size() - 1})
    CHECK_THROWS_AS(read(truncated(good, keep)), IoError);
  Bytes longer = good;
  longer.push_back(0);
  CHECK_THROWS_AS(read(longer), IoError);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("geomimu_unit_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_SUITE("formats") {

TEST_CASE("GMC1") {
  const BodyModel body = fixtures::tube_chain_body();
  MotionSequence motion = fixtures::fixture_motion(3, 1.0, 60.0);
  fixtures::attach_posed_vertices(body, motion);
  const Bytes bytes = write_motion_container(body, &motion);
  const MotionContainer c = load_motion_container(bytes);
  CHECK(write_motion_container(c.body, &*c.motion) == bytes);
  CHECK(c.motion->frames == 60);
  CHECK(c.motion->vertex_count() == body.vertex_count());
  check_damage(bytes, [](const Bytes& b) { return load_motion_container(b); });
}

TEST_CASE("GIW1") {
  const WindowArchive a = fixtures::fixture_archive(1);
  const Bytes bytes = write_window_archive(a);
  const WindowArchive back = read_window_archive(bytes);
  CHECK(write_window_archive(back) == bytes);
  CHECK(back.windows.size() == a.windows.size());
  CHECK(back.windows[0].window_id == a.windows[0].window_id);
  check_damage(bytes, [](const Bytes& b) { return read_window_archive(b); });

  WindowArchive empty;
  empty.rate = 60.0;
  empty.segment_names = {"a", "b"};
  CHECK(read_window_archive(write_window_archive(empty)).windows.empty());
}

TEST_CASE("GPW1") {
  const PretrainingShard shard = fixtures::fixture_shard(2, 8, 30);
  const Bytes bytes = write_pretraining_shard(shard);
  const PretrainingShard back = read_pretraining_shard(bytes);
  CHECK(write_pretraining_shard(back) == bytes);
  REQUIRE(back.pairs.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(back.pairs[i].visible_a == shard.pairs[i].visible_a);
    CHECK(back.pairs[i].a.signal.size() == shard.pairs[i].a.signal.size());
    for (std::size_t k = 0; k < shard.pairs[i].a.signal.size(); ++k)
      CHECK(back.pairs[i].a.signal[k] == static_cast<double>(static_cast<float>(shard.pairs[i].a.signal[k])));
  }
  check_damage(bytes, [](const Bytes& b) { return read_pretraining_shard(b); });

  PretrainingShard empty;
  empty.frames = 300;
  empty.segments = 3;
  empty.segment_names = {"a", "b", "c"};
  const PretrainingShard e = read_pretraining_shard(write_pretraining_shard(empty));
  CHECK(e.pairs.empty());
  CHECK(e.frames == 300);
}

TEST_CASE("GPW1 export refuses to overwrite") {
  const auto path = temp_path("shard.gpw1");
  std::filesystem::remove(path);
  const PretrainingShard shard = fixtures::fixture_shard(3, 2, 20);
  CHECK(export_pretraining_shard(shard, path, false) == 2);
  CHECK_THROWS_WITH_AS(export_pretraining_shard(shard, path, false), doctest::Contains("use --force"), IoError);
  CHECK(export_pretraining_shard(shard, path, true) == 2);
  std::filesystem::remove(path);
}

TEST_CASE("GCB1") {
  const Codebooks books = fixtures::fixture_codebooks(4);
  const Bytes bytes = write_codebooks(books);
  const Codebooks back = read_codebooks(bytes);
  CHECK(write_codebooks(back) == bytes);
  CHECK(back.P == 2);
  CHECK(back.K == 16);
  CHECK(back.dim == 4);
  CHECK(back.ema_counts[0].isZero(0));
  check_damage(bytes, [](const Bytes& b) { return read_codebooks(b); });
}

TEST_CASE("GMX1") {
  MatrixBundle bundle;
  bundle.names = {"x", "y:0", "empty"};
  bundle.matrices = {Eigen::MatrixXd::Constant(2, 3, 0.5), Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd(0, 5)};
  const Bytes bytes = write_matrix_bundle(bundle);
  const MatrixBundle back = read_matrix_bundle(bytes);
  CHECK(back.names == bundle.names);
  CHECK(back.matrices[1] == bundle.matrices[1]);
  CHECK(back.matrices[2].cols() == 5);
  CHECK(write_matrix_bundle(back) == bytes);
  check_damage(bytes, [](const Bytes& b) { return read_matrix_bundle(b); });

  MatrixBundle bad;
  bad.names = {"only"};
  bad.matrices = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  CHECK_THROWS_AS(write_matrix_bundle(bad), ValidationError);
}

TEST_CASE("unknown versions are rejected") {
  ByteWriter w;
  w.magic("GCB1");
  w.json_block({{"format", "GCB1"}, {"version", 99}, {"P", 1}, {"K", 1}, {"dim", 1}});
  CHECK_THROWS_WITH_AS(read_codebooks(w.bytes()), "unsupported GCB1 version", IoError);
}

TEST_CASE("missing files are I/O errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/geomimu.bin"), IoError);
}

}
