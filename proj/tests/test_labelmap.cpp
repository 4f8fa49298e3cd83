#include <doctest.h>

#include "triage/labelmap.hpp"

#include <algorithm>
#include <random>

using namespace triage;
using namespace triage::labels;

TEST_SUITE("labelmap") {

TEST_CASE("canonical form") {
  CHECK(canonicalize_label("  Type:Bug ") == "type bug");
  CHECK(canonicalize_label("status=will-not-fix") == "status will not fix");
  CHECK(canonicalize_label("kind/bug") == "kind bug");
  CHECK(canonicalize_label("priority - high") == "priority high");
}

TEST_CASE("builtin tables have the expected shape") {
  const auto &t = LabelTables::builtin();
  CHECK(t.clusters.clusters().size() == kClusterCount);
  CHECK(t.checksum.size() == 64);
  CHECK(t.clusters.index_of_representative("duplicate").has_value());
  CHECK(t.clusters.index_of_representative("won't fix").has_value());
}

TEST_CASE("no priority label appears in a cluster") {
  const auto &t = LabelTables::builtin();
  for (auto c : kPriorityClasses)
    for (const auto &raw : t.priority.raw_labels(c)) {
      INFO(raw);
      CHECK_FALSE(t.clusters.cluster_of(raw).has_value());
    }
}

TEST_CASE("objective mono-label rule") {
  std::vector<std::string> one = {"bug", "kind/bug", "stale"};
  CHECK(objective_of(one) == ObjectiveClass::Bug);
  std::vector<std::string> two = {"bug", "enhancement"};
  CHECK_FALSE(objective_of(two).has_value());
  std::vector<std::string> none = {"stale"};
  CHECK_FALSE(objective_of(none).has_value());
}

TEST_CASE("priority: High wins over Low") {
  std::vector<std::string> both = {"low priority", "critical"};
  CHECK(priority_of(both) == PriorityClass::High);
  std::vector<std::string> low = {"P3"};
  CHECK(priority_of(low) == PriorityClass::Low);
  std::vector<std::string> none = {"bug"};
  CHECK_FALSE(priority_of(none).has_value());
}

TEST_CASE("label features are binary and order free") {
  std::vector<std::string> labels = {"bug", "wontfix", "Status: Duplicate", "unheard of"};
  auto v = label_features(labels);
  CHECK(std::count(v.begin(), v.end(), 1) == 3);
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(labels.begin(), labels.end(), rng);
    CHECK(label_features(labels) == v);
  }
  std::vector<std::string> dup = {"duplicate", "status: duplicate"};
  auto d = label_features(dup);
  CHECK(std::count(d.begin(), d.end(), 1) == 1);
}

TEST_CASE("table parsing rejects bad input") {
  CHECK_THROWS(ClusterTable::parse("[cluster] a\nx\n[cluster] b\nx\n"));
  CHECK_THROWS(ObjectiveLabelMap::parse("[objective] Nonsense\nfoo\n"));
  CHECK_THROWS(PriorityLabelMap::parse("orphan line\n"));
}

}
