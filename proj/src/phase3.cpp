#include "camnids/phase3.hpp"

#include <algorithm>
#include <set>

namespace camnids {

RuleTable build_rule_table(const RuleSet& rs, const ChainPlan& plan,
                           const std::vector<SubPattern>& subs) {
    RuleTable table;
    for (const Rule& r : rs.rules) {
        ExpandedRule er;
        er.rule_id = r.id;
        for (const RuleStep& step : r.steps) {
            auto it = plan.chains.find(step.pattern_id);
            if (it == plan.chains.end() || it->second.empty())
                fail(ErrorKind::Data, "rule " + std::to_string(r.id) +
                                          " references a pattern with no chain");
            const std::vector<std::uint32_t>& chain = it->second;
            for (std::size_t k = 0; k < chain.size(); ++k) {
                ExpandedStep es;
                es.sub_id = chain[k];
                // Chain elements must sit back to back; the rule's own gap
                // applies only between pattern boundaries.
                es.gap = k == 0 ? step.gap : GapConstraint{0, 0};
                er.steps.push_back(es);
            }
        }
        table.rules.push_back(std::move(er));
    }
    for (std::uint32_t i = 0; i < table.rules.size(); ++i)
        for (std::uint32_t k = 0; k < table.rules[i].steps.size(); ++k)
            table.by_sub[table.rules[i].steps[k].sub_id].emplace_back(i, k);
    for (const SubPattern& s : subs)
        table.max_sub_len = std::max(table.max_sub_len, s.total_len);
    return table;
}

std::vector<RuleHit> PartialHitTable::on_match(const MatchEvent& ev) {
    if (saw_event_ && ev.end < last_end_)
        fail(ErrorKind::Data, "phase3: events arrived out of end-offset order");
    saw_event_ = true;
    last_end_ = ev.end;

    // A bounded window is dead once no future event can start inside it.
    std::erase_if(partials_, [&](const Partial& p) {
        return p.max_start && *p.max_start + table_->max_sub_len <= ev.end;
    });

    std::vector<RuleHit> hits;
    auto it = table_->by_sub.find(ev.sub_id);
    if (it == table_->by_sub.end()) return hits;

    std::vector<Partial> created;
    std::set<std::uint32_t> completed_rules;
    for (const auto& [rule_idx, step] : it->second) {
        const ExpandedRule& rule = table_->rules[rule_idx];
        const bool last = step + 1 == rule.steps.size();

        auto advance = [&](std::uint64_t anchor_end) {
            if (last) {
                if (completed_rules.insert(rule_idx).second)
                    hits.push_back({rule.rule_id, anchor_end});
                return;
            }
            const GapConstraint& gap = rule.steps[step + 1].gap;
            Partial p;
            p.rule_idx = rule_idx;
            p.next_step = step + 1;
            p.min_start = anchor_end + 1 + gap.min_gap;
            if (gap.max_gap) p.max_start = anchor_end + 1 + *gap.max_gap;
            if (std::find(created.begin(), created.end(), p) == created.end() &&
                std::find(partials_.begin(), partials_.end(), p) == partials_.end())
                created.push_back(p);
        };

        if (step == 0) {
            advance(ev.end);
        } else {
            for (const Partial& p : partials_) {
                if (p.rule_idx != rule_idx || p.next_step != step) continue;
                if (ev.start < p.min_start) continue;
                if (p.max_start && ev.start > *p.max_start) continue;
                advance(ev.end);
            }
        }
    }
    partials_.insert(partials_.end(), created.begin(), created.end());
    return hits;
}

void PartialHitTable::reset_flow() {
    partials_.clear();
    saw_event_ = false;
    last_end_ = 0;
}

std::vector<RuleHit> run_phase3(const RuleTable& table,
                                std::vector<MatchEvent> events) {
    // Phase-3 consumes matches in end order; simultaneous ends are fed in
    // ascending sub-pattern id.
    std::sort(events.begin(), events.end(),
              [](const MatchEvent& a, const MatchEvent& b) {
                  return std::tie(a.end, a.sub_id, a.start) <
                         std::tie(b.end, b.sub_id, b.start);
              });
    PartialHitTable pht(table);
    std::vector<RuleHit> hits;
    for (const MatchEvent& ev : events) {
        std::vector<RuleHit> h = pht.on_match(ev);
        hits.insert(hits.end(), h.begin(), h.end());
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

std::string rule_hits_to_csv(const std::vector<RuleHit>& hits) {
    std::string out = "rule_id,end_offset\n";
    for (const RuleHit& h : hits)
        out += std::to_string(h.rule_id) + "," + std::to_string(h.end) + "\n";
    return out;
}

}  // namespace camnids
