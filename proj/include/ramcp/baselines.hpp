#pragma once

#include "ramcp/ramcp.hpp"

namespace ramcp {

/// Risk-neutral search (expectation envelope) of E[-exp(-gamma J)]: the
/// utility is applied to the trajectory return, not stage-wise. The returned
/// state's v_hat is in utility units shifted by +1; evaluate the policy with
/// evaluate_policy to get raw returns.
SearchResult exponential_utility_search(std::shared_ptr<const BamdpProblem> problem, double gamma,
                                        UpdateMode mode, std::uint64_t budget, Rng& rng,
                                        SearchObserver* observer = nullptr);

/// Same game as `search`, with tree nodes keyed by (state, depth): all
/// histories reaching a state at a given depth share statistics, so the
/// resulting policy is state dependent.
SearchResult rmcp_search(std::shared_ptr<const BamdpProblem> problem, const RiskEnvelope& envelope,
                         UpdateMode mode, std::uint64_t budget, Rng& rng, SearchObserver* observer = nullptr);

}  // namespace ramcp
