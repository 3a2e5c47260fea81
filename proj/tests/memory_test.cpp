#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "econlab/error.hpp"
#include "econlab/memory/store.hpp"
#include "econlab/util.hpp"

using namespace econlab;
using namespace econlab::memory;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("econlab_memory_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

MemoryStore make_store(const std::filesystem::path& dir) {
  static const std::set<std::string> known{"job-1", "abc123", "m1"};
  return MemoryStore(dir, [](const std::string&, const Ref& ref) { return known.count(ref.id) > 0; });
}

MemoryRecord rec(Stage stage, RecordKind kind, std::string text, std::vector<Ref> refs = {}) {
  MemoryRecord r;
  r.stage = stage;
  r.kind = kind;
  r.text = std::move(text);
  r.refs = std::move(refs);
  return r;
}

}  // namespace

TEST(Memory, IdsStartAtOneAndIncrease) {
  auto store = make_store(fresh_dir("ids"));
  EXPECT_EQ(store.append("s", rec(Stage::idea, RecordKind::theoretical_context, "a")), 1u);
  EXPECT_EQ(store.append("s", rec(Stage::design, RecordKind::experiment_spec, "b")), 2u);
  EXPECT_EQ(store.append("t", rec(Stage::idea, RecordKind::theoretical_context, "c")), 1u);
}

TEST(Memory, DanglingRefNamed) {
  auto store = make_store(fresh_dir("dangling"));
  try {
    store.append("s", rec(Stage::execution, RecordKind::execution_trace, "x", {{RefKind::job_id, "job-404"}}));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("job-404"), std::string::npos);
  }
  EXPECT_TRUE(store.query("s").empty());
  EXPECT_EQ(store.append("s", rec(Stage::execution, RecordKind::execution_trace, "x", {{RefKind::job_id, "job-1"}})), 1u);
}

TEST(Memory, QueryFilters) {
  auto store = make_store(fresh_dir("query"));
  store.append("s", rec(Stage::design, RecordKind::experiment_spec, "spec1"));
  for (int i = 0; i < 3; ++i) store.append("s", rec(Stage::execution, RecordKind::execution_trace, "trace"));
  store.append("s", rec(Stage::design, RecordKind::experiment_spec, "spec2"));
  const auto specs = store.query("s", RecordKind::experiment_spec);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].text, "spec1");
  EXPECT_EQ(specs[1].text, "spec2");
  EXPECT_LT(specs[0].record_id, specs[1].record_id);
  EXPECT_EQ(store.query("s", std::nullopt, Stage::execution).size(), 3u);
  EXPECT_EQ(store.query("s").size(), 5u);
  EXPECT_TRUE(store.query("nobody").empty());
}

TEST(Memory, RoundTripsBodyAndRefs) {
  const auto dir = fresh_dir("roundtrip");
  {
    auto store = make_store(dir);
    MemoryRecord r = rec(Stage::idea, RecordKind::theoretical_context, "free text", {{RefKind::manifest, "m1"}});
    r.body = {{"z", "last"}, {"a", "first"}};
    store.append("s", r);
  }
  auto reopened = make_store(dir);
  const auto got = reopened.query("s");
  ASSERT_EQ(got.size(), 1u);
  ASSERT_EQ(got[0].body.size(), 2u);
  EXPECT_EQ(got[0].body[0].first, "z");
  EXPECT_EQ(*got[0].field("a"), "first");
  EXPECT_EQ(got[0].refs[0], (Ref{RefKind::manifest, "m1"}));
  EXPECT_FALSE(got[0].timestamp.empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "sessions" / "s" / "memory.jsonl"));
}

TEST(Memory, RenderContextBudget) {
  auto store = make_store(fresh_dir("render"));
  store.append("s", rec(Stage::idea, RecordKind::theoretical_context, std::string(200, 'a')));
  store.append("s", rec(Stage::design, RecordKind::experiment_spec, std::string(200, 'b')));
  store.append("s", rec(Stage::analysis, RecordKind::outcome_synthesis, "final words"));
  const auto records = store.query("s");

  const std::string full = store.render_context("s", 100000);
  EXPECT_EQ(full, render_record(records[0]) + "\n\n" + render_record(records[1]) + "\n\n" + render_record(records[2]));
  EXPECT_EQ(full.rfind("[idea/theoretical_context #1]", 0), 0u);

  const std::string last = render_record(records[2]);
  EXPECT_EQ(store.render_context("s", last.size()), last);

  // Room for the newest two plus a fragment of the oldest: the fragment keeps its header.
  const std::size_t two = render_record(records[1]).size() + 2 + last.size();
  const std::string partial = store.render_context("s", two + 60);
  EXPECT_LE(partial.size(), two + 60);
  EXPECT_EQ(partial.rfind("[idea/theoretical_context #1]...", 0), 0u);
  EXPECT_NE(partial.find(render_record(records[1])), std::string::npos);
  EXPECT_EQ(partial.substr(partial.size() - last.size()), last);

  EXPECT_EQ(store.render_context("s", 77), store.render_context("s", 77));
  EXPECT_LE(store.render_context("s", 10).size(), 10u);
}

TEST(Memory, QueriesDoNotChangeTheStore) {
  const auto dir = fresh_dir("immutable");
  auto store = make_store(dir);
  for (int i = 0; i < 4; ++i) store.append("s", rec(Stage::idea, RecordKind::theoretical_context, std::to_string(i)));
  const auto before = util::sha256_hex(util::read_file(store.file("s")));
  store.query("s");
  store.query("s", RecordKind::experiment_spec);
  store.render_context("s", 50);
  EXPECT_EQ(util::sha256_hex(util::read_file(store.file("s"))), before);
}

TEST(Memory, ConcurrentAppendsStayDense) {
  auto store = make_store(fresh_dir("concurrent"));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i) store.append("s", rec(Stage::execution, RecordKind::execution_trace, "x"));
    });
  }
  for (auto& t : threads) t.join();
  const auto all = store.query("s");
  ASSERT_EQ(all.size(), 100u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].record_id, i + 1);
}
