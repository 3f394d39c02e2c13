#include "ramcp/baselines.hpp"

#include "ramcp/errors.hpp"

namespace ramcp {

SearchResult exponential_utility_search(std::shared_ptr<const BamdpProblem> problem, double gamma,
                                        UpdateMode mode, std::uint64_t budget, Rng& rng,
                                        SearchObserver* observer) {
  if (!(gamma > 0.0)) throw InvalidArgument("exponential utility needs gamma > 0");
  if (!problem) throw InvalidArgument("search needs a problem");
  const auto envelope = RiskEnvelope::expectation(problem->prior());
  return search(problem, envelope, {.mode = mode, .budget = budget, .utility_gamma = gamma}, rng, observer);
}

SearchResult rmcp_search(std::shared_ptr<const BamdpProblem> problem, const RiskEnvelope& envelope,
                         UpdateMode mode, std::uint64_t budget, Rng& rng, SearchObserver* observer) {
  return search(std::move(problem), envelope, {.mode = mode, .budget = budget, .keying = NodeKeying::StateDepth}, rng, observer);
}

}  // namespace ramcp
