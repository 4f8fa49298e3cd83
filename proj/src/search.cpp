#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <cmath>

namespace triage::learn {

void SearchSpace::validate() const {
  if (ranges.empty())
    fail(ErrorCode::InvalidArgument, "search space is empty");
  for (const auto &r : ranges) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
      fail(ErrorCode::InvalidArgument, "search range '" + r.name + "' is not a finite interval");
    if (r.log_scale && r.lo <= 0.0)
      fail(ErrorCode::InvalidArgument, "log-scale range '" + r.name + "' must be positive");
    if (r.integer && std::ceil(r.lo) > std::floor(r.hi))
      fail(ErrorCode::InvalidArgument, "integer range '" + r.name + "' holds no integer");
  }
}

Hyperparams SearchSpace::sample(std::mt19937_64 &rng) const {
  Hyperparams hp;
  for (const auto &r : ranges) {
    double v;
    if (r.integer) {
      std::uniform_int_distribution<long long> d(static_cast<long long>(std::ceil(r.lo)),
                                                 static_cast<long long>(std::floor(r.hi)));
      v = static_cast<double>(d(rng));
    } else if (r.log_scale) {
      std::uniform_real_distribution<double> d(std::log(r.lo), std::log(r.hi));
      v = std::exp(d(rng));
    } else {
      std::uniform_real_distribution<double> d(r.lo, r.hi);
      v = d(rng);
    }
    hp[r.name] = v;
  }
  return hp;
}

SearchSpace SearchSpace::forest_default() {
  return {{{"n_trees", 50, 200, true, false},
           {"max_depth", 4, 32, true, false},
           {"min_leaf", 1, 5, true, false},
           {"mtry_factor", 0.5, 3.0, false, true}}};
}

SearchSpace SearchSpace::logreg_default() {
  return {{{"learning_rate", 0.05, 2.0, false, true},
           {"l2", 1e-6, 1e-1, false, true},
           {"epochs", 50, 400, true, false}}};
}

SearchSpace SearchSpace::nb_default() { return {{{"alpha", 0.01, 2.0, false, true}}}; }

SearchSpace SearchSpace::knn_default() { return {{{"k", 1, 25, true, false}}}; }

SearchResult random_search(const SearchSpace &space, std::size_t budget, std::uint64_t seed,
                           const Evaluator &evaluate) {
  if (budget == 0)
    fail(ErrorCode::InvalidArgument, "search budget must be at least 1");
  space.validate();
  std::mt19937_64 rng(seed);
  SearchResult out;
  for (std::size_t t = 0; t < budget; ++t) {
    auto hp = space.sample(rng);
    double score = evaluate(hp);
    out.trace.push_back({hp, score});
    if (t == 0 || score > out.best_score) {
      out.best = hp;
      out.best_score = score;
    }
  }
  return out;
}

} // namespace triage::learn
