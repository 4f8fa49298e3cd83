#pragma once

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage::agreement {

inline constexpr int kMissing = -1;

/// Rows are items, columns raters; cells hold a category index or kMissing.
struct RatingMatrix {
  std::vector<std::string> raters;
  std::vector<std::string> items;
  std::vector<std::string> groups; // empty, or one group name per item
  std::vector<std::string> categories = {"High", "Low"};
  std::vector<std::vector<int>> cells;

  std::size_t k() const { return categories.size(); }
  /// Throws Error{InvalidArgument}: k < 2, ragged rows, bad cells, or an item
  /// with fewer than two ratings.
  void validate() const;
  RatingMatrix subset(const std::vector<std::size_t> &rows) const;
};

/// Header row: rater ids, plus optional `issue`/`id` and `project`/`group`
/// columns. Cells are H, L, High, Low (any case) or empty.
RatingMatrix parse_ratings_csv(std::string_view text);

enum class ItemAgreement { Pairwise, Majority };

/// Pairwise: agreeing pairs over all pairs of ratings. Majority: share of
/// ratings equal to the most frequent category.
double item_agreement(const std::vector<int> &row, std::size_t k, ItemAgreement mode = ItemAgreement::Pairwise);
double percent_agreement(const RatingMatrix &m, ItemAgreement mode = ItemAgreement::Pairwise);

double randolph_kappa(double observed, std::size_t k);
double randolph_kappa(const RatingMatrix &m);

struct FleissResult {
  double kappa = 0.0;
  double p_bar = 0.0;
  double p_e = 0.0;
  bool degenerate_marginals = false;
  std::vector<std::string> excluded_items; // rows with missing ratings
};

/// Uses only fully rated rows. Throws when none remain.
FleissResult fleiss_kappa(const RatingMatrix &m);

struct MajorityLabel {
  std::optional<int> label;
  bool tie = false;
};

std::vector<MajorityLabel> majority_labels(const RatingMatrix &m);

/// Raters whose label differs from the others' majority on more than half of
/// the items they rated; ties among the others count as agreement.
std::vector<std::string> outlier_raters(const RatingMatrix &m);

enum class Band { Poor, Slight, Fair, Moderate, Substantial, AlmostPerfect };
/// Lower bounds 0, 0.21, 0.41, 0.61, 0.81 are inclusive.
Band band_of(double kappa);
std::string_view to_string(Band b);

struct AgreementReport {
  std::size_t items = 0;
  std::size_t raters = 0;
  double percent_agreement = 0.0;
  double randolph_kappa = 0.0;
  Band band = Band::Poor;
  std::optional<FleissResult> fleiss;
  std::string fleiss_error;
  std::vector<double> per_item;
  std::vector<MajorityLabel> majority;
  std::vector<std::string> outliers;
};

AgreementReport analyze(const RatingMatrix &m, ItemAgreement mode = ItemAgreement::Pairwise);

struct FullReport {
  AgreementReport overall;
  std::map<std::string, AgreementReport> by_group;
  ItemAgreement mode = ItemAgreement::Pairwise;

  nlohmann::json to_json(const RatingMatrix &m) const;
  std::string to_table() const;
};

FullReport analyze_all(const RatingMatrix &m, ItemAgreement mode = ItemAgreement::Pairwise);

} // namespace triage::agreement
