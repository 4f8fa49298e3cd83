#include "triage/labelmap.hpp"

#include "triage/embedded_data.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace triage::labels {

std::string canonicalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c == ':' || c == '/' || c == '-' || c == '=' || std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty())
      out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace {

struct Section {
  std::string name;
  std::vector<std::string> entries;
};

// "[kind] Name" headers followed by one raw entry per line.
std::vector<Section> parse_sections(std::string_view text, std::string_view kind) {
  std::vector<Section> sections;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  const std::string header = "[" + std::string(kind) + "]";
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    if (t.starts_with(header)) {
      sections.push_back({trim(t.substr(header.size())), {}});
      continue;
    }
    if (t[0] == '[' || sections.empty())
      fail(ErrorCode::Parse, "label table line " + std::to_string(lineno) + ": expected " +
                                 header + " header");
    sections.back().entries.push_back(t);
  }
  return sections;
}

} // namespace

ClusterTable ClusterTable::parse(std::string_view text) {
  ClusterTable table;
  for (auto &s : parse_sections(text, "cluster")) {
    std::size_t index = table.clusters_.size();
    for (auto &m : s.entries) {
      auto key = canonicalize_label(m);
      auto [it, inserted] = table.lookup_.emplace(key, index);
      if (!inserted && it->second != index)
        fail(ErrorCode::Parse, "label '" + m + "' belongs to clusters '" +
                                   table.clusters_.at(it->second).representative + "' and '" +
                                   s.name + "'");
    }
    table.clusters_.push_back({s.name, std::move(s.entries)});
  }
  if (table.clusters_.size() != kClusterCount)
    fail(ErrorCode::Parse, "cluster table must have " + std::to_string(kClusterCount) +
                               " clusters, found " + std::to_string(table.clusters_.size()));
  return table;
}

const ClusterTable &ClusterTable::builtin() { return LabelTables::builtin().clusters; }

std::optional<std::size_t> ClusterTable::cluster_of(std::string_view raw_label) const {
  auto it = lookup_.find(canonicalize_label(raw_label));
  if (it == lookup_.end())
    return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ClusterTable::index_of_representative(std::string_view name) const {
  auto key = canonicalize_label(name);
  for (std::size_t i = 0; i < clusters_.size(); ++i)
    if (canonicalize_label(clusters_[i].representative) == key)
      return i;
  return std::nullopt;
}

ObjectiveLabelMap ObjectiveLabelMap::parse(std::string_view text) {
  ObjectiveLabelMap map;
  for (auto &s : parse_sections(text, "objective")) {
    auto cls = parse_objective(s.name);
    if (!cls)
      fail(ErrorCode::Parse, "unknown objective class '" + s.name + "'");
    for (auto &label : s.entries) {
      auto [it, inserted] = map.lookup_.emplace(canonicalize_label(label), *cls);
      if (!inserted && it->second != *cls)
        fail(ErrorCode::Parse, "objective label '" + label + "' is mapped to two classes");
      map.raw_[static_cast<std::size_t>(*cls)].push_back(label);
    }
  }
  return map;
}

const ObjectiveLabelMap &ObjectiveLabelMap::builtin() { return LabelTables::builtin().objective; }

std::optional<ObjectiveClass> ObjectiveLabelMap::class_of(std::string_view raw_label) const {
  auto it = lookup_.find(canonicalize_label(raw_label));
  if (it == lookup_.end())
    return std::nullopt;
  return it->second;
}

PriorityLabelMap PriorityLabelMap::parse(std::string_view text) {
  PriorityLabelMap map;
  for (auto &s : parse_sections(text, "priority")) {
    auto cls = parse_priority(s.name);
    if (!cls)
      fail(ErrorCode::Parse, "unknown priority class '" + s.name + "'");
    for (auto &label : s.entries) {
      auto [it, inserted] = map.lookup_.emplace(canonicalize_label(label), *cls);
      if (!inserted && it->second != *cls)
        fail(ErrorCode::Parse, "priority label '" + label + "' is mapped to two classes");
      map.raw_[static_cast<std::size_t>(*cls)].push_back(label);
    }
  }
  return map;
}

const PriorityLabelMap &PriorityLabelMap::builtin() { return LabelTables::builtin().priority; }

std::optional<PriorityClass> PriorityLabelMap::class_of(std::string_view raw_label) const {
  auto it = lookup_.find(canonicalize_label(raw_label));
  if (it == lookup_.end())
    return std::nullopt;
  return it->second;
}

LabelTables LabelTables::parse(std::string_view clusters, std::string_view objective,
                               std::string_view priority) {
  LabelTables t{ClusterTable::parse(clusters), ObjectiveLabelMap::parse(objective),
                PriorityLabelMap::parse(priority), {}};
  std::string all;
  for (auto part : {clusters, objective, priority}) {
    all += sha256_hex(part);
    all += '\n';
  }
  t.checksum = sha256_hex(all);
  return t;
}

const LabelTables &LabelTables::builtin() {
  static const LabelTables t =
      parse(data::label_clusters(), data::objective_labels(), data::priority_labels());
  return t;
}

std::optional<ObjectiveClass> objective_of(std::span<const std::string> labels,
                                           const ObjectiveLabelMap &map) {
  std::optional<ObjectiveClass> found;
  for (const auto &l : labels) {
    auto c = map.class_of(l);
    if (!c)
      continue;
    if (found && *found != *c)
      return std::nullopt;
    found = c;
  }
  return found;
}

std::optional<PriorityClass> priority_of(std::span<const std::string> labels,
                                         const PriorityLabelMap &map) {
  bool low = false;
  for (const auto &l : labels) {
    auto c = map.class_of(l);
    if (c == PriorityClass::High)
      return PriorityClass::High;
    if (c == PriorityClass::Low)
      low = true;
  }
  if (low)
    return PriorityClass::Low;
  return std::nullopt;
}

LabelVector label_features(std::span<const std::string> labels, const ClusterTable &table) {
  LabelVector v{};
  for (const auto &l : labels)
    if (auto idx = table.cluster_of(l))
      v[*idx] = 1;
  return v;
}

} // namespace triage::labels
