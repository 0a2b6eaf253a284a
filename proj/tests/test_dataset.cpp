#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enose/dataset.hpp"
#include "enose/simgen.hpp"
#include "test_data.hpp"

#include <filesystem>
#include <map>
#include <random>
#include <fstream>
#include <set>

using namespace enose;
using testutil::make_dataset;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("enose_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

GenConfig small_gen(int h2 = 4, int co = 4, int mix = 6) {
  GenConfig cfg;
  cfg.n_pure_h2 = h2;
  cfg.n_pure_co = co;
  cfg.n_mix = mix;
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("write/load round-trips bit-exactly") {
  TempDir dir;
  const Dataset ds = generate_dataset(small_gen());
  write_dataset(ds, dir.path);
  const Dataset back = load_dataset(dir.path);
  REQUIRE(back.size() == ds.size());
  CHECK(back.channel_names == ds.channel_names);
  for (int i = 0; i < ds.size(); ++i) {
    const auto& a = ds.samples[static_cast<std::size_t>(i)];
    const auto& b = back.samples[static_cast<std::size_t>(i)];
    CHECK(a.id == b.id);
    CHECK(a.label == b.label);
    CHECK(a.h2_ppm == b.h2_ppm);
    CHECK(a.co_ppm == b.co_ppm);
    CHECK(a.dt == b.dt);
    REQUIRE(a.readings.rows() == b.readings.rows());
    CHECK((a.readings.array() == b.readings.array()).all());
  }
}

TEST_CASE("loader error paths point at the offending file") {
  TempDir dir;
  SUBCASE("missing manifest") {
    CHECK_THROWS_WITH_AS((void)load_dataset(dir.path), doctest::Contains("manifest.csv"),
                         std::runtime_error);
  }
  SUBCASE("empty dataset") {
    std::ofstream(dir.path / "manifest.csv") << "id,label,h2_ppm,co_ppm,path\n";
    CHECK_THROWS_WITH_AS((void)load_dataset(dir.path), doctest::Contains("empty dataset"),
                         std::runtime_error);
  }
  SUBCASE("wrong node count names the file and the expected 2000") {
    const Dataset ds = generate_dataset(small_gen(2, 2, 2));
    write_dataset(ds, dir.path);
    // drop the last line of one sample file
    const fs::path victim = dir.path / "samples" / (ds.samples[0].id + ".csv");
    std::ifstream in(victim);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    text.erase(text.find_last_of('\n', text.size() - 2) + 1);
    std::ofstream(victim, std::ios::trunc) << text;
    try {
      (void)load_dataset(dir.path);
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("2000") != std::string::npos);
      CHECK(msg.find(ds.samples[0].id) != std::string::npos);
    }
  }
  SUBCASE("non-finite reading is rejected with file and line") {
    const Dataset ds = generate_dataset(small_gen(2, 2, 2));
    write_dataset(ds, dir.path);
    const fs::path victim = dir.path / "samples" / (ds.samples[1].id + ".csv");
    std::ifstream in(victim);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find(',', text.find('\n') + 1);
    text.replace(pos + 1, text.find(',', pos + 1) - pos - 1, "nan");
    std::ofstream(victim, std::ios::trunc) << text;
    try {
      (void)load_dataset(dir.path);
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find(ds.samples[1].id) != std::string::npos);
      CHECK(msg.find(":2") != std::string::npos);  // first data line
    }
  }
}

TEST_CASE("stratified split hits the default campaign counts") {
  const Dataset ds = make_dataset({150, 150, 300});
  const SplitPlan plan = stratified_split(ds, 0.2, 5);
  CHECK(plan.test_ids.size() == 120);
  CHECK(plan.trainval_ids.size() == 480);
  std::array<int, 3> test_counts{};
  std::set<std::string> test_set(plan.test_ids.begin(), plan.test_ids.end());
  for (const auto& s : ds.samples) {
    if (test_set.count(s.id)) test_counts[static_cast<std::size_t>(class_index(s.label))] += 1;
  }
  CHECK(test_counts[0] == 30);
  CHECK(test_counts[1] == 30);
  CHECK(test_counts[2] == 60);
}

TEST_CASE("split is deterministic and respects tiny classes") {
  const Dataset ds = make_dataset({5, 5, 5});
  const SplitPlan a = stratified_split(ds, 0.2, 9);
  const SplitPlan b = stratified_split(ds, 0.2, 9);
  CHECK(a.trainval_ids == b.trainval_ids);
  CHECK(a.test_ids == b.test_ids);
  CHECK(a.test_ids.size() == 3);  // one per class of five
}

TEST_CASE("split rejects bad inputs") {
  const Dataset ds = make_dataset({4, 4, 4});
  CHECK_THROWS_AS((void)stratified_split(ds, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)stratified_split(ds, 1.0, 1), std::invalid_argument);
  const Dataset tiny = make_dataset({1, 4, 4});
  CHECK_THROWS_AS((void)stratified_split(tiny, 0.2, 1), std::runtime_error);
  // 4 samples at fraction 0.1 -> zero test share
  CHECK_THROWS_WITH_AS((void)stratified_split(ds, 0.05, 1), doctest::Contains("nonempty"),
                       std::runtime_error);
}

TEST_CASE("five folds of 480 trainval come out 96 each, 24/24/48") {
  const Dataset ds = make_dataset({150, 150, 300});
  const SplitPlan split = stratified_split(ds, 0.2, 11);
  const FoldPlan folds = make_folds(split, ds, 5, 11);
  REQUIRE(folds.folds.size() == 5);
  std::map<std::string, GasLabel> label_of;
  for (const auto& s : ds.samples) label_of[s.id] = s.label;
  for (const auto& fold : folds.folds) {
    CHECK(fold.size() == 96);
    std::array<int, 3> counts{};
    for (const auto& id : fold) counts[static_cast<std::size_t>(class_index(label_of[id]))] += 1;
    CHECK(counts[0] == 24);
    CHECK(counts[1] == 24);
    CHECK(counts[2] == 48);
  }
}

TEST_CASE("fold plan errors and determinism") {
  const Dataset ds = make_dataset({8, 8, 8});
  const SplitPlan split = stratified_split(ds, 0.25, 3);
  CHECK_THROWS_AS((void)make_folds(split, ds, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS((void)make_folds(split, ds, 7, 3), std::runtime_error);  // class of 6 < 7
  const FoldPlan a = make_folds(split, ds, 3, 4);
  const FoldPlan b = make_folds(split, ds, 3, 4);
  CHECK(a.folds == b.folds);
}

TEST_CASE("split + folds form a partition with per-class balance, any seed") {
  const Dataset ds = make_dataset({23, 17, 40});
  std::map<std::string, GasLabel> label_of;
  for (const auto& s : ds.samples) label_of[s.id] = s.label;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitPlan split = stratified_split(ds, 0.2, seed);
    const FoldPlan folds = make_folds(split, ds, 5, seed);
    std::set<std::string> test(split.test_ids.begin(), split.test_ids.end());
    std::set<std::string> seen;
    std::array<std::array<int, 3>, 5> counts{};
    for (std::size_t f = 0; f < 5; ++f) {
      for (const auto& id : folds.folds[f]) {
        CHECK(test.count(id) == 0);
        CHECK(seen.insert(id).second);  // pairwise disjoint
        counts[f][static_cast<std::size_t>(class_index(label_of[id]))] += 1;
      }
    }
    CHECK(seen.size() == split.trainval_ids.size());
    for (int c = 0; c < 3; ++c) {
      int lo = counts[0][static_cast<std::size_t>(c)], hi = lo;
      for (std::size_t f = 1; f < 5; ++f) {
        lo = std::min(lo, counts[f][static_cast<std::size_t>(c)]);
        hi = std::max(hi, counts[f][static_cast<std::size_t>(c)]);
      }
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("select_channels") {
  const Dataset ds = make_dataset({3, 3, 3});
  SUBCASE("identity when both names in original order") {
    const Dataset same = select_channels(ds, {"TGS813", "TGS2611"});
    CHECK(same.channel_names == ds.channel_names);
    for (int i = 0; i < ds.size(); ++i) {
      CHECK((same.samples[static_cast<std::size_t>(i)].readings.array() ==
             ds.samples[static_cast<std::size_t>(i)].readings.array())
                .all());
    }
  }
  SUBCASE("single channel keeps labels, order, dt and T") {
    const Dataset one = select_channels(ds, {"TGS2611"});
    CHECK(one.channels() == 1);
    for (int i = 0; i < ds.size(); ++i) {
      const auto& a = ds.samples[static_cast<std::size_t>(i)];
      const auto& b = one.samples[static_cast<std::size_t>(i)];
      CHECK(a.id == b.id);
      CHECK(a.label == b.label);
      CHECK(a.dt == b.dt);
      CHECK(b.readings.rows() == a.readings.rows());
      CHECK((b.readings.col(0).array() == a.readings.col(1).array()).all());
    }
  }
  SUBCASE("unknown channel lists what exists") {
    CHECK_THROWS_WITH_AS((void)select_channels(ds, {"TGS9999"}),
                         doctest::Contains("TGS813, TGS2611"), std::runtime_error);
  }
}

TEST_CASE("split.json round trip") {
  TempDir dir;
  const Dataset ds = make_dataset({10, 10, 10});
  const SplitPlan split = stratified_split(ds, 0.2, 21);
  const FoldPlan folds = make_folds(split, ds, 4, 21);
  const auto path = dir.path / "split.json";
  write_split_json(path, split, folds);
  const auto [split2, folds2] = read_split_json(path);
  CHECK(split2.trainval_ids == split.trainval_ids);
  CHECK(split2.test_ids == split.test_ids);
  CHECK(split2.seed == split.seed);
  CHECK(folds2.folds == folds.folds);
  CHECK_THROWS_WITH_AS((void)read_split_json(dir.path / "nope.json"),
                       doctest::Contains("run train first"), std::runtime_error);
}
