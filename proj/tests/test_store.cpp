#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "rdgauge/error.hpp"
#include "rdgauge/store.hpp"
#include "support.hpp"

using namespace rdgauge;
using testing_support::record;
using testing_support::TempDir;

TEST(StoreRecord, JsonRoundTrip) {
  auto r = record("clipA", "SVT_AV1", "10 --enable-tf 0", 1, 4000, 3574.181, 92.187, 12.5);
  r.psnr_y = 50.728;
  r.output_bytes = 123456;
  const auto line = to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  for (const char* key : {"\"clip\"", "\"family\"", "\"preset\"", "\"passes\"", "\"tbr_kbps\"", "\"kbps\"",
                          "\"vmaf\"", "\"psnr_y\"", "\"enc_s\"", "\"bytes\"", "\"tool\"", "\"ts\""})
    EXPECT_NE(line.find(key), std::string::npos) << key;
  EXPECT_EQ(parse_json_line(line), r);

  r.vmaf.reset();
  r.encode_seconds.reset();
  const auto sparse = to_json_line(r);
  EXPECT_EQ(sparse.find("\"vmaf\""), std::string::npos);
  EXPECT_EQ(parse_json_line(sparse), r);
}

TEST(StoreRecord, Validation) {
  auto r = record("c", "X264", "fast", 1, 1000, 900, 80);
  EXPECT_NO_THROW(validate(r));
  r.vmaf = 100.5;
  EXPECT_THROW(validate(r), ValidationError);
  r.vmaf = 50;
  r.measured_kbps = 0;
  EXPECT_THROW(validate(r), ValidationError);
  EXPECT_THROW(parse_json_line("{\"clip\": 3}"), StoreError);
}

TEST(StoreRecord, TimestampsIncrease) {
  auto prev = now_timestamp();
  for (int i = 0; i < 1000; ++i) {
    auto next = now_timestamp();
    ASSERT_LT(prev, next);
    prev = next;
  }
}

TEST(Store, AppendLoadDedupeKeepsLatest) {
  TempDir dir;
  ResultsStore store(dir / "r.jsonl");
  EXPECT_TRUE(store.load().empty());
  store.append(record("b", "X264", "fast", 1, 1000, 900, 80));
  store.append(record("a", "X264", "fast", 1, 1000, 950, 81));
  store.append(record("b", "X264", "fast", 1, 1000, 990, 82));
  const auto rows = store.load();
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].clip_id, "a");
  EXPECT_EQ(rows[1].clip_id, "b");
  EXPECT_EQ(rows[1].vmaf, 82);
  EXPECT_EQ(store.load_raw().size(), 3u);
  EXPECT_THROW(store.append(record("x", "X264", "fast", 1, 1000, -1, 50)), ValidationError);
}

TEST(Store, DedupeTieBreaksOnFilePosition) {
  auto a = record("c", "X265", "slow", 2, 500, 500, 70);
  auto b = a;
  b.vmaf = 71;
  b.created_at = a.created_at;
  const auto out = dedupe({a, b});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].vmaf, 71);
}

TEST(Store, FilterSlice) {
  TempDir dir;
  ResultsStore store(dir / "r.jsonl");
  std::vector<MetricRecord> all;
  for (int c = 0; c < 62; ++c)
    for (int tbr : {500, 1000, 2000, 3000, 4000, 6000, 8000, 10000, 12000, 14000, 16000, 20000})
      for (const char* preset : {"2", "6"})
        for (int passes : {1, 2}) all.push_back(record("clip" + std::to_string(c), "SVT_AV1", preset, passes, tbr, tbr, 90));
  {
    std::ofstream out(store.path());
    for (const auto& r : all) out << to_json_line(r) << "\n";
  }
  const RecordFilter f{.family = "SVT_AV1", .preset = "2", .passes = 1};
  EXPECT_EQ(store.load(f).size(), 744u);
  EXPECT_EQ(store.load(RecordFilter{.target_kbps = 4000}).size(), 62u * 4);
}

TEST(Store, PartialTrailingLineIsIgnoredThenRepaired) {
  TempDir dir;
  ResultsStore store(dir / "r.jsonl");
  store.append(record("a", "X264", "fast", 1, 1000, 900, 80));
  {
    std::ofstream out(store.path(), std::ios::app);
    out << "{\"clip\":\"half";
  }
  EXPECT_EQ(store.load().size(), 1u);
  ASSERT_EQ(store.warnings().size(), 1u);
  store.append(record("b", "X264", "fast", 1, 1000, 900, 80));
  EXPECT_EQ(store.load().size(), 2u);
  EXPECT_TRUE(store.warnings().empty());
}

TEST(Store, CorruptInteriorLineNamesTheLine) {
  TempDir dir;
  ResultsStore store(dir / "r.jsonl");
  store.append(record("a", "X264", "fast", 1, 1000, 900, 80));
  {
    std::ofstream out(store.path(), std::ios::app);
    out << "garbage\n";
  }
  store.append(record("b", "X264", "fast", 1, 1000, 900, 80));
  try {
    store.load();
    FAIL() << "expected StoreError";
  } catch (const StoreError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Store, ConcurrentAppendsStayWhole) {
  TempDir dir;
  ResultsStore store(dir / "r.jsonl");
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t)
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i)
          store.append(record("c" + std::to_string(t), "X264", "fast", 1, 100 + i, 90, 80));
      });
  }
  const auto raw = store.load_raw();
  EXPECT_EQ(raw.size(), 400u);
  EXPECT_TRUE(store.warnings().empty());
}

TEST(Import, ToolOffTable) {
  std::ifstream in(testing_support::fixture("toolsweep_4000kbps.csv"));
  ImportDefaults d;
  d.clip_id = "stem2";
  d.family = "SVT_AV1";
  d.preset_prefix = "10";
  const auto rows = parse_import_table(in, d);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0].preset, "10");
  EXPECT_DOUBLE_EQ(rows[0].measured_kbps, 3479.402);
  EXPECT_EQ(rows[0].vmaf, 91.495);
  EXPECT_EQ(rows[0].psnr_y, 50.606);
  EXPECT_EQ(rows[8].preset, "10 --enable-tf 0");
  EXPECT_EQ(rows[8].vmaf, 92.187);
  EXPECT_EQ(rows[8].target_kbps, 4000);
  EXPECT_FALSE(rows[8].encode_seconds);
}

TEST(Import, RejectsWholeTableOnBadRow) {
  TempDir dir;
  ResultsStore store(dir / "r.jsonl");
  std::istringstream csv("label,kbps,vmaf\nDefault,3000,90\nbad,abc,91\n");
  ImportDefaults d;
  EXPECT_THROW(import_table(csv, d, store), ImportError);
  EXPECT_TRUE(store.load().empty());

  std::istringstream ok("label,kbps,vmaf\nDefault,3000,90\nfast,2500,88\n");
  EXPECT_EQ(import_table(ok, d, store), 2u);
  EXPECT_EQ(store.load().size(), 2u);
}

TEST(Csv, QuotedFields) {
  EXPECT_EQ(split_csv_line("a,\"b,c\",\"d \"\"e\"\"\""), (std::vector<std::string>{"a", "b,c", "d \"e\""}));
  EXPECT_EQ(split_csv_line("x,,y"), (std::vector<std::string>{"x", "", "y"}));
}
