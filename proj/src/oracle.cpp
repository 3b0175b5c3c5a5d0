#include "camnids/oracle.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>

namespace camnids {

std::vector<OraclePattern> oracle_patterns(const RuleSet& rs) {
    std::vector<OraclePattern> out;
    out.reserve(rs.patterns.size());
    for (const auto& [id, p] : rs.patterns) out.push_back({id, p.bytes});
    return out;
}

namespace {

bool matches_at(const WildBytes& pat, std::span<const std::uint8_t> stream,
                std::uint64_t off) {
    if (off + pat.size() > stream.size()) return false;
    for (std::size_t i = 0; i < pat.size(); ++i) {
        const WildByte& b = pat[i];
        if (!b.any && b.value != stream[off + i]) return false;
    }
    return true;
}

}  // namespace

std::vector<Occurrence> oracle_match(const std::vector<OraclePattern>& patterns,
                                     std::span<const std::uint8_t> stream) {
    // Bucket patterns by first byte so the scan skips most candidates; the
    // comparison itself stays a plain position-by-position check.
    std::array<std::vector<const OraclePattern*>, 256> by_first{};
    std::vector<const OraclePattern*> wild_first;
    for (const OraclePattern& p : patterns) {
        if (p.bytes.empty()) continue;
        if (p.bytes.front().any)
            wild_first.push_back(&p);
        else
            by_first[p.bytes.front().value].push_back(&p);
    }

    std::vector<Occurrence> out;
    for (std::uint64_t off = 0; off < stream.size(); ++off) {
        for (const OraclePattern* p : by_first[stream[off]])
            if (matches_at(p->bytes, stream, off))
                out.push_back({p->id, off, off + p->bytes.size() - 1});
        for (const OraclePattern* p : wild_first)
            if (matches_at(p->bytes, stream, off))
                out.push_back({p->id, off, off + p->bytes.size() - 1});
    }
    std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
        return std::tie(a.end, a.id, a.start) < std::tie(b.end, b.id, b.start);
    });
    return out;
}

std::vector<Occurrence> oracle_skip(const std::vector<OraclePattern>& patterns,
                                    std::span<const std::uint8_t> stream,
                                    int depth, int w, int phase2_latency,
                                    int queue_depth) {
    const std::uint64_t d = static_cast<std::uint64_t>(depth);
    const std::uint64_t n = stream.size();
    (void)w;

    // Brute-force ground truth, indexed for the replay below.
    std::vector<Occurrence> all = oracle_match(patterns, stream);
    // Terminal occurrences (length <= depth) keyed by end offset; suffixed
    // occurrences keyed by start offset.
    std::map<std::uint64_t, std::vector<Occurrence>> term_by_end;
    std::map<std::uint64_t, std::vector<Occurrence>> long_by_start;
    for (const Occurrence& o : all) {
        if (o.end - o.start + 1 <= d)
            term_by_end[o.end].push_back(o);
        else
            long_by_start[o.start].push_back(o);
    }
    // A Phase-2 request fires whenever the first `depth` bytes of any
    // suffixed sub-pattern match, whether or not the suffix later matches.
    std::vector<const OraclePattern*> prefixes;
    for (const OraclePattern& p : patterns)
        if (p.bytes.size() > d) prefixes.push_back(&p);
    auto prefix_match_at = [&](std::uint64_t off) {
        if (off + d > n) return false;
        for (const OraclePattern* p : prefixes) {
            bool ok = true;
            for (std::uint64_t i = 0; i < d && ok; ++i) {
                const WildByte& b = p->bytes[i];
                if (!b.any && b.value != stream[off + i]) ok = false;
            }
            if (ok) return true;
        }
        return false;
    };

    // Single-lane replay of the engine's issue/arbiter/gating procedure.
    struct Req {
        std::uint64_t start;
        std::uint64_t enqueue_cycle;
    };
    std::deque<Req> fifo;
    bool busy = false;
    Req inflight{};
    std::uint64_t busy_last = 0;
    std::uint64_t next_off = 0;
    std::uint64_t frontier = 0;  // candidates must start at or after this
    std::uint64_t gate_resume = 0;
    std::vector<Occurrence> events;

    for (std::uint64_t cycle = 0;; ++cycle) {
        bool port_free = !busy || cycle > busy_last;
        if (port_free && !fifo.empty() && fifo.front().enqueue_cycle < cycle) {
            inflight = fifo.front();
            fifo.pop_front();
            busy = true;
            busy_last = cycle + static_cast<std::uint64_t>(phase2_latency) - 1;
            port_free = false;
        }

        bool stalled = static_cast<int>(fifo.size()) >= queue_depth;
        if (next_off < n && !stalled) {
            std::uint64_t p = next_off++;
            if (p < gate_resume) {
                // clock-gated: byte skipped unprocessed
            } else {
                for (const Occurrence& o : term_by_end[p])
                    if (o.start >= frontier) events.push_back(o);
                if (p + 1 >= d && p + 1 - d >= frontier &&
                    prefix_match_at(p + 1 - d)) {
                    fifo.push_back({p + 1 - d, cycle});
                }
            }
        }

        if (busy && cycle == busy_last) {
            busy = false;
            std::uint64_t max_suffix = 0;
            for (const Occurrence& o : long_by_start[inflight.start]) {
                events.push_back(o);
                max_suffix = std::max(max_suffix, o.end - o.start + 1 - d);
            }
            if (max_suffix > 0) {
                // Gating: flush the pipeline registers and FIFO, then skip
                // what remains of the matched suffix span. The register
                // flush also kills candidates that started after the skip
                // span, so the frontier advances to the next unconsumed
                // byte at minimum.
                std::uint64_t resume = inflight.start + d + max_suffix;
                frontier = std::max({frontier, resume, next_off});
                gate_resume = std::max(gate_resume, resume);
                fifo.clear();
            }
        }

        if (next_off >= n && fifo.empty() && !busy) break;
    }

    std::sort(events.begin(), events.end(),
              [](const Occurrence& a, const Occurrence& b) {
                  return std::tie(a.end, a.id, a.start) <
                         std::tie(b.end, b.id, b.start);
              });
    return events;
}

std::vector<OracleRuleHit> oracle_rules(const RuleSet& rs,
                                        std::span<const std::uint8_t> stream) {
    std::vector<Occurrence> occs = oracle_match(oracle_patterns(rs), stream);
    std::map<std::uint32_t, std::vector<Occurrence>> by_pat;
    for (const Occurrence& o : occs) by_pat[o.id].push_back(o);
    for (auto& [id, v] : by_pat)
        std::sort(v.begin(), v.end(), [](const Occurrence& a, const Occurrence& b) {
            return a.start < b.start;
        });

    std::vector<OracleRuleHit> hits;
    for (const Rule& r : rs.rules) {
        // reachable_ends[k]: end offsets at which steps 0..k have matched
        // under the gap constraints.
        std::vector<std::uint64_t> ends;
        for (const Occurrence& o : by_pat[r.steps[0].pattern_id])
            ends.push_back(o.end);
        for (std::size_t k = 1; k < r.steps.size(); ++k) {
            const RuleStep& s = r.steps[k];
            std::vector<std::uint64_t> next;
            for (const Occurrence& o : by_pat[s.pattern_id]) {
                for (std::uint64_t prev_end : ends) {
                    if (o.start <= prev_end) continue;
                    std::uint64_t gap = o.start - prev_end - 1;
                    if (gap < s.gap.min_gap) continue;
                    if (s.gap.max_gap && gap > *s.gap.max_gap) continue;
                    next.push_back(o.end);
                    break;
                }
            }
            ends = std::move(next);
        }
        for (std::uint64_t e : ends) hits.push_back({r.id, e});
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

std::string occurrences_to_csv(const std::vector<Occurrence>& occs) {
    std::string out = "id,start,end\n";
    for (const Occurrence& o : occs)
        out += std::to_string(o.id) + "," + std::to_string(o.start) + "," +
               std::to_string(o.end) + "\n";
    return out;
}

}  // namespace camnids
