#pragma once

#include <string_view>

// Data tables bundled from data/ at build time.
namespace triage::data {

std::string_view label_clusters();
std::string_view objective_labels();
std::string_view priority_labels();
std::string_view sentiment_lexicon();
std::string_view stopwords();
std::string_view lemma_exceptions();
std::string_view keyword_rules();

} // namespace triage::data
