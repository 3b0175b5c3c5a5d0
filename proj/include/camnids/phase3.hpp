#ifndef CAMNIDS_PHASE3_HPP
#define CAMNIDS_PHASE3_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camnids/compiler.hpp"
#include "camnids/engine.hpp"
#include "camnids/rulespec.hpp"

namespace camnids {

/// One expanded rule step over sub-pattern ids. Chained long patterns
/// contribute steps with an exact-adjacency gap (0,0).
struct ExpandedStep {
    std::uint32_t sub_id = 0;
    GapConstraint gap;  // ignored on step 0

    bool operator==(const ExpandedStep&) const = default;
};

struct ExpandedRule {
    std::uint32_t rule_id = 0;
    std::vector<ExpandedStep> steps;

    bool operator==(const ExpandedRule&) const = default;
};

/// Rule Table: expanded rules plus the sub-pattern -> (rule, step) index.
struct RuleTable {
    std::vector<ExpandedRule> rules;
    std::map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_sub;
    std::uint32_t max_sub_len = 0;

    bool operator==(const RuleTable&) const = default;
};

RuleTable build_rule_table(const RuleSet& rs, const ChainPlan& plan,
                           const std::vector<SubPattern>& subs);

struct RuleHit {
    std::uint32_t rule_id = 0;
    std::uint64_t end = 0;

    auto operator<=>(const RuleHit&) const = default;
};

/// Partial Hit Table for one flow. Events must arrive in nondecreasing end
/// order; ties are processed in ascending sub-pattern id.
class PartialHitTable {
public:
    explicit PartialHitTable(const RuleTable& table) : table_(&table) {}

    /// Feeds one match event; returns completions it triggers.
    std::vector<RuleHit> on_match(const MatchEvent& ev);

    /// Drops all partial-hit state (per-packet / per-flow isolation).
    void reset_flow();

    std::size_t partial_count() const { return partials_.size(); }

private:
    struct Partial {
        std::uint32_t rule_idx = 0;
        std::uint32_t next_step = 0;
        std::uint64_t min_start = 0;
        std::optional<std::uint64_t> max_start;

        bool operator==(const Partial&) const = default;
    };

    const RuleTable* table_;
    std::vector<Partial> partials_;
    std::uint64_t last_end_ = 0;
    bool saw_event_ = false;
};

/// Sorts engine events into Phase-3 order and runs them through one flow.
std::vector<RuleHit> run_phase3(const RuleTable& table,
                                std::vector<MatchEvent> events);

std::string rule_hits_to_csv(const std::vector<RuleHit>& hits);

}  // namespace camnids

#endif
