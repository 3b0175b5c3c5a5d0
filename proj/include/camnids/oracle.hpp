#ifndef CAMNIDS_ORACLE_HPP
#define CAMNIDS_ORACLE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "camnids/rulespec.hpp"

namespace camnids {

/// Ground-truth occurrence found by position-by-position scanning.
struct Occurrence {
    std::uint32_t id = 0;  // pattern or sub-pattern id
    std::uint64_t start = 0;
    std::uint64_t end = 0;  // inclusive

    auto operator<=>(const Occurrence&) const = default;
};

/// A matcher input: id plus wildcard-aware bytes. Built from Patterns or
/// SubPatterns without referencing any compiled table.
struct OraclePattern {
    std::uint32_t id = 0;
    WildBytes bytes;
};

std::vector<OraclePattern> oracle_patterns(const RuleSet& rs);

/// Brute-force multi-pattern scan: every offset, every pattern, wildcard-
/// aware byte equality. Sorted by (end, id).
std::vector<Occurrence> oracle_match(const std::vector<OraclePattern>& patterns,
                                     std::span<const std::uint8_t> stream);

/// Executable definition of the clock-gating skip semantics: replays the
/// single-lane issue/arbiter timing (prefix matches enqueue a two-cycle
/// Phase-2 search; a reported match flushes pipeline and FIFO and skips the
/// remainder of the matched suffix span) over brute-force scan results.
/// depth/w are the Phase-1/Phase-2 geometry the sub-patterns were split for.
std::vector<Occurrence> oracle_skip(const std::vector<OraclePattern>& patterns,
                                    std::span<const std::uint8_t> stream,
                                    int depth, int w, int phase2_latency,
                                    int queue_depth = 4);

struct OracleRuleHit {
    std::uint32_t rule_id = 0;
    std::uint64_t end = 0;

    auto operator<=>(const OracleRuleHit&) const = default;
};

/// Reference rule-completion semantics: dynamic programming over full-
/// pattern occurrences honoring the gap constraints. One hit per rule per
/// satisfying final occurrence.
std::vector<OracleRuleHit> oracle_rules(const RuleSet& rs,
                                        std::span<const std::uint8_t> stream);

std::string occurrences_to_csv(const std::vector<Occurrence>& occs);

}  // namespace camnids

#endif
