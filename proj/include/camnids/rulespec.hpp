#ifndef CAMNIDS_RULESPEC_HPP
#define CAMNIDS_RULESPEC_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camnids/error.hpp"

namespace camnids {

/// One pattern byte: a literal value or the "don't care" wildcard.
struct WildByte {
    bool any = false;
    std::uint8_t value = 0;

    static WildByte literal(std::uint8_t v) { return {false, v}; }
    static WildByte wildcard() { return {true, 0}; }

    auto operator<=>(const WildByte&) const = default;
};

using WildBytes = std::vector<WildByte>;

struct Pattern {
    std::uint32_t id = 0;
    WildBytes bytes;

    bool operator==(const Pattern&) const = default;
};

/// Allowed byte distance between consecutive rule steps. For occurrences
/// p then q the gap is start(q) - end(p) - 1; nullopt max means unbounded.
struct GapConstraint {
    std::uint32_t min_gap = 0;
    std::optional<std::uint32_t> max_gap;

    bool operator==(const GapConstraint&) const = default;
};

struct RuleStep {
    std::uint32_t pattern_id = 0;
    GapConstraint gap;  // ignored on the first step

    bool operator==(const RuleStep&) const = default;
};

struct Rule {
    std::uint32_t id = 0;
    std::vector<RuleStep> steps;

    bool operator==(const Rule&) const = default;
};

struct RuleSet {
    std::map<std::uint32_t, Pattern> patterns;
    std::vector<Rule> rules;

    bool operator==(const RuleSet&) const = default;

    const Pattern& pattern(std::uint32_t id) const;
    /// Sum of pattern lengths, the "Char" denominator of the efficiency metrics.
    std::uint64_t total_pattern_bytes() const;
    /// Throws Error{Data} when referential integrity or distinctness fails.
    void validate() const;
};

/// Parses the rule-file grammar:
///   rule <decimal-id> = "<pattern>" ( -> [<min>,<max>] "<pattern>" )*
/// with '#' comments, \xHH / \? / \\ / \" escapes, and '*' for an
/// unbounded max gap. Identical pattern byte sequences share one id.
RuleSet parse_rules(const std::string& text);

/// Canonical text form; parse_rules(print_rules(rs)) == normalize_ruleset(rs).
std::string print_rules(const RuleSet& rs);

/// Merges patterns with identical byte sequences and re-points rule steps.
RuleSet normalize_ruleset(const RuleSet& rs);

struct TrafficSpec {
    std::uint64_t length = 0;
    double hit_rate = 0.0;  // fraction of stream bytes covered by insertions
    std::uint64_t seed = 0;
};

/// One ground-truth occurrence in generated traffic.
struct TruthEntry {
    std::uint32_t pattern_id = 0;
    std::uint64_t start = 0;
    std::uint64_t end = 0;  // inclusive

    auto operator<=>(const TruthEntry&) const = default;
};

struct Traffic {
    std::vector<std::uint8_t> stream;
    std::vector<TruthEntry> truth;
    double covered_fraction = 0.0;
};

/// Generates a stream whose covered-byte fraction is within +/-2% of
/// spec.hit_rate. Inserted occurrences are separated by at least one filler
/// byte; filler is re-randomized until no occurrence exists outside the
/// truth list. Occurrences induced inside an insertion (embedded patterns,
/// wildcard fills) are added to the truth list rather than repaired.
Traffic gen_traffic(const TrafficSpec& spec, const RuleSet& rs);

/// CSV with header "pattern_id,start,end".
std::string truth_to_csv(const std::vector<TruthEntry>& truth);
std::vector<TruthEntry> truth_from_csv(const std::string& csv);

struct HwConfig;  // compiler.hpp

struct GenRulesParams {
    std::uint64_t seed = 0;
    std::uint32_t n_patterns = 0;
    std::uint32_t len_min = 1;
    std::uint32_t len_max = 1;
    double wildcard_frac = 0.0;
    double multi_rule_frac = 0.0;
};

/// Deterministic ruleset generator. Prefix sharing is biased so that the
/// result compiles within `capacity` (verified by running the compiler;
/// lengths are trimmed and sharing increased over bounded retries).
RuleSet gen_ruleset(const GenRulesParams& params, const HwConfig& capacity);

}  // namespace camnids

#endif
