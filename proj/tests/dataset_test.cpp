#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <random>

#include "common/test_util.hpp"
#include "core/dataset.hpp"
#include "core/io.hpp"
#include "core/model_io.hpp"
#include "core/task.hpp"

using namespace rnnmemo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rnnmemo-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

std::string file_bytes(const fs::path& p) { return read_text_file(p.string()); }

}  // namespace

TEST_CASE("synthetic tasks are deterministic under a fixed seed") {
  ToyTask task;
  task.kind = TaskKind::AddingProblem;
  task.seed = 42;
  task.steps = 20;
  task.n_train = 3;
  task.n_cal = 2;
  task.n_test = 2;
  const Dataset a = generate_task_dataset(task);
  const Dataset b = generate_task_dataset(task);
  REQUIRE(a.sequences.size() == b.sequences.size());
  for (std::size_t i = 0; i < a.sequences.size(); ++i) {
    CHECK(a.sequences[i].data == b.sequences[i].data);
    CHECK(*a.sequences[i].label == *b.sequences[i].label);
    CHECK(a.sequences[i].split == b.sequences[i].split);
  }
  CHECK(a.kind == "regression");
  CHECK(a.split_indices("train").size() == 3);
  CHECK(a.split_indices("cal").size() == 2);
  CHECK(a.split_indices("test").size() == 2);
}

TEST_CASE("adding problem: label equals the sum of the two marked values") {
  ToyTask task;
  task.kind = TaskKind::AddingProblem;
  task.seed = 7;
  task.steps = 16;
  task.n_test = 20;
  const Dataset ds = generate_task_dataset(task);
  for (const Sequence& s : ds.sequences) {
    float sum = 0.0f;
    int marks = 0;
    for (std::size_t t = 0; t < s.steps; ++t) {
      if (s.step(t)[1] > 0.0f) {
        sum += s.step(t)[0];
        ++marks;
      }
    }
    CHECK(marks == 2);
    CHECK(*s.label == doctest::Approx(sum));
  }
}

TEST_CASE("classification task is balanced-ish and labeled 0/1") {
  ToyTask task;
  task.kind = TaskKind::SeqClassification;
  task.seed = 9;
  task.steps = 12;
  task.n_test = 200;
  const Dataset ds = generate_task_dataset(task);
  std::size_t ones = 0;
  for (const Sequence& s : ds.sequences) {
    CHECK((*s.label == 0.0f || *s.label == 1.0f));
    ones += *s.label == 1.0f;
  }
  CHECK(ones > 50);
  CHECK(ones < 150);
}

TEST_CASE("dataset save/load round trip") {
  TempDir dir;
  ToyTask task;
  task.kind = TaskKind::SeqClassification;
  task.seed = 3;
  task.steps = 8;
  task.n_train = 2;
  task.n_test = 3;
  const Dataset ds = generate_task_dataset(task);
  save_dataset(ds, dir.str());
  const Dataset back = load_dataset(dir.str());
  REQUIRE(back.sequences.size() == ds.sequences.size());
  CHECK(back.kind == ds.kind);
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    CHECK(back.sequences[i].data == ds.sequences[i].data);
    CHECK(back.sequences[i].split == ds.sequences[i].split);
    CHECK(*back.sequences[i].label == *ds.sequences[i].label);
  }
}

TEST_CASE("model bundle: save -> load -> save produces byte-identical blobs") {
  TempDir dir1, dir2;
  const RnnModel model = testutil::random_model(1234, 10, 2, true, true, true);
  save_model(model, dir1.str());
  const RnnModel back = load_model(dir1.str());
  save_model(back, dir2.str());

  std::size_t blob_count = 0;
  for (const auto& entry : fs::directory_iterator(dir1.path)) {
    const std::string name = entry.path().filename().string();
    CHECK(file_bytes(dir1.path / name) == file_bytes(dir2.path / name));
    if (name.ends_with(".bin")) ++blob_count;
  }
  CHECK(blob_count > 0);
}

TEST_CASE("model load rejects corrupt bundles") {
  TempDir dir;
  const RnnModel model = testutil::random_model(55, 6, 1, false, false);
  save_model(model, dir.str());

  SUBCASE("missing manifest") {
    fs::remove(dir.path / "manifest.json");
    CHECK_THROWS_AS((void)load_model(dir.str()), IoError);
  }
  SUBCASE("truncated blob") {
    // find one blob and truncate it
    for (const auto& entry : fs::directory_iterator(dir.path)) {
      if (entry.path().extension() == ".bin") {
        const std::string content = file_bytes(entry.path());
        write_file_atomic(entry.path().string(), content.substr(0, content.size() / 2));
        break;
      }
    }
    CHECK_THROWS_AS((void)load_model(dir.str()), ValidationError);
  }
  SUBCASE("bad json") {
    write_file_atomic((dir.path / "manifest.json").string(), "{not json");
    CHECK_THROWS_AS((void)load_model(dir.str()), ValidationError);
  }
}

TEST_CASE("atomic writes leave no temp files behind") {
  TempDir dir;
  write_file_atomic((dir.path / "x.txt").string(), "hello");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    ++files;
    CHECK(entry.path().filename() == "x.txt");
  }
  CHECK(files == 1);
  CHECK(read_text_file((dir.path / "x.txt").string()) == "hello");
}
