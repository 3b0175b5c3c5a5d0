#include "camnids/rulespec.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "camnids/compiler.hpp"
#include "camnids/oracle.hpp"
#include "rng.hpp"

namespace camnids {

const Pattern& RuleSet::pattern(std::uint32_t id) const {
    auto it = patterns.find(id);
    if (it == patterns.end())
        fail(ErrorKind::Data, "unknown pattern id " + std::to_string(id));
    return it->second;
}

std::uint64_t RuleSet::total_pattern_bytes() const {
    std::uint64_t n = 0;
    for (const auto& [id, p] : patterns) n += p.bytes.size();
    return n;
}

void RuleSet::validate() const {
    std::set<WildBytes> seen;
    for (const auto& [id, p] : patterns) {
        if (p.id != id) fail(ErrorKind::Data, "pattern table id mismatch");
        if (p.bytes.empty())
            fail(ErrorKind::Data, "pattern " + std::to_string(id) + " is empty");
        if (!seen.insert(p.bytes).second)
            fail(ErrorKind::Data,
                 "pattern " + std::to_string(id) + " duplicates another byte sequence");
    }
    std::set<std::uint32_t> rule_ids;
    for (const Rule& r : rules) {
        if (!rule_ids.insert(r.id).second)
            fail(ErrorKind::Data, "duplicate rule id " + std::to_string(r.id));
        if (r.steps.empty())
            fail(ErrorKind::Data, "rule " + std::to_string(r.id) + " has no steps");
        for (const RuleStep& s : r.steps) {
            if (!patterns.count(s.pattern_id))
                fail(ErrorKind::Data, "rule " + std::to_string(r.id) +
                                          " references unknown pattern " +
                                          std::to_string(s.pattern_id));
            if (s.gap.max_gap && *s.gap.max_gap < s.gap.min_gap)
                fail(ErrorKind::Data,
                     "rule " + std::to_string(r.id) + " has max gap below min gap");
        }
    }
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    char take() {
        char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::Parse, "line " + std::to_string(line) + ", col " +
                                   std::to_string(col) + ": " + what);
    }

    void skip_space() {
        while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) take();
    }

    void skip_blank_and_comments() {
        while (!done()) {
            skip_space();
            if (done()) return;
            char c = peek();
            if (c == '#') {
                while (!done() && peek() != '\n') take();
            } else if (c == '\n') {
                take();
            } else {
                return;
            }
        }
    }

    void expect_word(const std::string& word) {
        for (char c : word) {
            if (done() || peek() != c) error("expected '" + word + "'");
            take();
        }
    }

    std::uint32_t decimal() {
        if (done() || !isdigit(static_cast<unsigned char>(peek())))
            error("expected a decimal number");
        std::uint64_t v = 0;
        while (!done() && isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + static_cast<std::uint64_t>(take() - '0');
            if (v > 0xFFFFFFFFull) error("number out of range");
        }
        return static_cast<std::uint32_t>(v);
    }
};

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

WildBytes parse_pattern(Cursor& cur) {
    cur.skip_space();
    if (cur.done() || cur.peek() != '"') cur.error("expected a quoted pattern");
    int open_line = cur.line, open_col = cur.col;
    cur.take();
    WildBytes bytes;
    for (;;) {
        if (cur.done() || cur.peek() == '\n')
            fail(ErrorKind::Parse, "line " + std::to_string(open_line) + ", col " +
                                       std::to_string(open_col) +
                                       ": unterminated string");
        char c = cur.take();
        if (c == '"') break;
        if (c == '\\') {
            if (cur.done() || cur.peek() == '\n') cur.error("dangling escape");
            char e = cur.take();
            switch (e) {
                case '?': bytes.push_back(WildByte::wildcard()); break;
                case '\\': bytes.push_back(WildByte::literal('\\')); break;
                case '"': bytes.push_back(WildByte::literal('"')); break;
                case 'x': {
                    if (cur.done()) cur.error("truncated \\x escape");
                    int hi = hex_digit(cur.take());
                    if (hi < 0 || cur.done()) cur.error("bad \\x escape");
                    int lo = hex_digit(cur.take());
                    if (lo < 0) cur.error("bad \\x escape");
                    bytes.push_back(WildByte::literal(
                        static_cast<std::uint8_t>(hi * 16 + lo)));
                    break;
                }
                default: cur.error(std::string("unknown escape '\\") + e + "'");
            }
        } else {
            bytes.push_back(WildByte::literal(static_cast<std::uint8_t>(c)));
        }
    }
    if (bytes.empty())
        fail(ErrorKind::Parse, "line " + std::to_string(open_line) + ", col " +
                                   std::to_string(open_col) + ": empty pattern");
    return bytes;
}

GapConstraint parse_gap(Cursor& cur) {
    cur.skip_space();
    if (cur.done() || cur.peek() != '[') cur.error("expected '[min,max]'");
    cur.take();
    cur.skip_space();
    GapConstraint gap;
    gap.min_gap = cur.decimal();
    cur.skip_space();
    if (cur.done() || cur.peek() != ',') cur.error("expected ',' in gap");
    cur.take();
    cur.skip_space();
    if (!cur.done() && cur.peek() == '*') {
        cur.take();
        gap.max_gap.reset();
    } else {
        gap.max_gap = cur.decimal();
        if (*gap.max_gap < gap.min_gap) cur.error("max gap below min gap");
    }
    cur.skip_space();
    if (cur.done() || cur.peek() != ']') cur.error("expected ']'");
    cur.take();
    return gap;
}

}  // namespace

RuleSet parse_rules(const std::string& text) {
    RuleSet rs;
    std::map<WildBytes, std::uint32_t> by_bytes;
    std::set<std::uint32_t> rule_ids;
    Cursor cur{text};

    auto intern = [&](WildBytes bytes) {
        auto it = by_bytes.find(bytes);
        if (it != by_bytes.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(rs.patterns.size());
        by_bytes.emplace(bytes, id);
        rs.patterns.emplace(id, Pattern{id, std::move(bytes)});
        return id;
    };

    for (;;) {
        cur.skip_blank_and_comments();
        if (cur.done()) break;
        int rule_line = cur.line;
        cur.expect_word("rule");
        cur.skip_space();
        std::uint32_t rid = cur.decimal();
        if (!rule_ids.insert(rid).second)
            fail(ErrorKind::Parse, "line " + std::to_string(rule_line) +
                                       ": duplicate rule id " + std::to_string(rid));
        cur.skip_space();
        if (cur.done() || cur.peek() != '=') cur.error("expected '='");
        cur.take();

        Rule rule;
        rule.id = rid;
        rule.steps.push_back({intern(parse_pattern(cur)), GapConstraint{}});
        for (;;) {
            cur.skip_space();
            if (cur.done() || cur.peek() == '\n' || cur.peek() == '#') break;
            cur.expect_word("->");
            GapConstraint gap = parse_gap(cur);
            rule.steps.push_back({intern(parse_pattern(cur)), gap});
        }
        rs.rules.push_back(std::move(rule));
    }
    rs.validate();
    return rs;
}

namespace {

std::string pattern_to_text(const WildBytes& bytes) {
    std::string out = "\"";
    char buf[8];
    for (const WildByte& b : bytes) {
        if (b.any) {
            out += "\\?";
        } else if (b.value == '"') {
            out += "\\\"";
        } else if (b.value == '\\') {
            out += "\\\\";
        } else if (b.value >= 0x20 && b.value <= 0x7E) {
            out += static_cast<char>(b.value);
        } else {
            std::snprintf(buf, sizeof buf, "\\x%02X", b.value);
            out += buf;
        }
    }
    out += '"';
    return out;
}

}  // namespace

std::string print_rules(const RuleSet& rs) {
    std::string out;
    for (const Rule& r : rs.rules) {
        out += "rule " + std::to_string(r.id) + " = ";
        for (std::size_t i = 0; i < r.steps.size(); ++i) {
            const RuleStep& s = r.steps[i];
            if (i > 0) {
                out += " -> [" + std::to_string(s.gap.min_gap) + ",";
                out += s.gap.max_gap ? std::to_string(*s.gap.max_gap) : std::string("*");
                out += "] ";
            }
            out += pattern_to_text(rs.pattern(s.pattern_id).bytes);
        }
        out += '\n';
    }
    return out;
}

RuleSet normalize_ruleset(const RuleSet& rs) {
    RuleSet out;
    std::map<WildBytes, std::uint32_t> by_bytes;
    auto intern = [&](const WildBytes& bytes) {
        auto it = by_bytes.find(bytes);
        if (it != by_bytes.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(out.patterns.size());
        by_bytes.emplace(bytes, id);
        out.patterns.emplace(id, Pattern{id, bytes});
        return id;
    };

    for (const Rule& r : rs.rules) {
        Rule nr;
        nr.id = r.id;
        for (const RuleStep& s : r.steps)
            nr.steps.push_back({intern(rs.pattern(s.pattern_id).bytes), s.gap});
        out.rules.push_back(std::move(nr));
    }
    // Unreferenced patterns survive normalization, after the referenced ones.
    std::vector<std::uint32_t> rest;
    for (const auto& [id, p] : rs.patterns)
        if (!by_bytes.count(p.bytes)) rest.push_back(id);
    for (std::uint32_t id : rest) intern(rs.patterns.at(id).bytes);
    out.validate();
    return out;
}

std::string truth_to_csv(const std::vector<TruthEntry>& truth) {
    std::string out = "pattern_id,start,end\n";
    for (const TruthEntry& t : truth)
        out += std::to_string(t.pattern_id) + "," + std::to_string(t.start) + "," +
               std::to_string(t.end) + "\n";
    return out;
}

std::vector<TruthEntry> truth_from_csv(const std::string& csv) {
    std::vector<TruthEntry> out;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("pattern_id,start,end", 0) != 0)
        fail(ErrorKind::Parse, "truth csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TruthEntry t;
        unsigned long long s = 0, e = 0;
        if (std::sscanf(line.c_str(), "%u,%llu,%llu", &t.pattern_id, &s, &e) != 3)
            fail(ErrorKind::Parse, "truth csv: bad row '" + line + "'");
        t.start = s;
        t.end = e;
        out.push_back(t);
    }
    return out;
}

// --- generators -----------------------------------------------------------

namespace {

// Wildcard-aware containment: true when a occurs inside b no matter how
// wildcards are later filled (every a-literal faces an equal b-literal).
bool forced_embedding(const WildBytes& a, const WildBytes& b) {
    if (a.size() > b.size()) return false;
    for (std::size_t k = 0; k + a.size() <= b.size(); ++k) {
        bool all = true;
        for (std::size_t i = 0; i < a.size() && all; ++i) {
            const WildByte& x = a[i];
            const WildByte& y = b[k + i];
            if (x.any) continue;
            if (y.any || y.value != x.value) all = false;
        }
        if (all) return true;
    }
    return false;
}

}  // namespace

RuleSet gen_ruleset(const GenRulesParams& params, const HwConfig& capacity) {
    capacity.validate();
    if (params.n_patterns == 0 || params.len_min == 0 ||
        params.len_min > params.len_max)
        fail(ErrorKind::Invalid, "gen_ruleset: bad size parameters");
    const std::uint32_t d = static_cast<std::uint32_t>(capacity.depth);
    const std::uint32_t chunk = d + static_cast<std::uint32_t>(capacity.w);

    for (int attempt = 0; attempt < 24; ++attempt) {
        Rng rng(params.seed * 1000003ull + static_cast<std::uint64_t>(attempt));
        // Tighter sharing and shorter patterns on every retry.
        double shrink = 1.0 - 0.08 * attempt;
        std::uint32_t len_max =
            std::max(params.len_min,
                     static_cast<std::uint32_t>(params.len_max * std::max(0.3, shrink)));

        // Hierarchical prefix pools give the prefix sharing real rulesets
        // have; pool sizes scale with the pattern count under the Phase-1
        // row budget.
        std::uint64_t p1_budget =
            static_cast<std::uint64_t>(capacity.n_pes) * capacity.pe_rows;
        std::size_t k2 = std::clamp<std::size_t>(params.n_patterns / 2, 1, 200);
        std::size_t k_last = std::clamp<std::size_t>((params.n_patterns * 2) / 3,
                                                     k2, 256);
        // Rough per-depth row estimate: k2 + ... + k_last for depths 2..d.
        auto rows_est = [&] {
            std::uint64_t rows = 0;
            for (std::uint32_t dep = 2; dep <= d; ++dep) {
                double f = d == 2 ? 1.0
                                  : static_cast<double>(dep - 2) / (d - 2);
                rows += k2 + static_cast<std::uint64_t>((k_last - k2) * f);
            }
            return rows;
        };
        while (rows_est() > p1_budget * 7 / 10 && k_last > 2) {
            k2 = std::max<std::size_t>(1, k2 * 3 / 4);
            k_last = std::max(k2, k_last * 3 / 4);
        }

        // Draw the pools: depth-2 strings, then extend one byte at a time.
        std::vector<std::vector<std::uint8_t>> pool;
        {
            std::set<std::vector<std::uint8_t>> seen;
            while (pool.size() < k2) {
                std::vector<std::uint8_t> p{rng.byte(), rng.byte()};
                if (seen.insert(p).second) pool.push_back(std::move(p));
            }
            for (std::uint32_t dep = 3; dep <= d; ++dep) {
                double f = d == 2 ? 1.0 : static_cast<double>(dep - 2) / (d - 2);
                std::size_t want = k2 + static_cast<std::size_t>((k_last - k2) * f);
                std::vector<std::vector<std::uint8_t>> next;
                std::set<std::vector<std::uint8_t>> ns;
                while (next.size() < want) {
                    auto p = pool[rng.below(pool.size())];
                    p.push_back(rng.byte());
                    if (ns.insert(p).second) next.push_back(std::move(p));
                }
                pool = std::move(next);
            }
        }

        std::vector<WildBytes> pats;
        std::set<WildBytes> seen;
        bool gave_up = false;
        for (std::uint32_t i = 0; i < params.n_patterns && !gave_up; ++i) {
            bool ok = false;
            for (int tries = 0; tries < 200 && !ok; ++tries) {
                std::uint32_t len = static_cast<std::uint32_t>(
                    rng.range(params.len_min, len_max));
                WildBytes p;
                p.reserve(len);
                if (len <= d) {
                    for (std::uint32_t j = 0; j < len; ++j)
                        p.push_back(WildByte::literal(rng.byte()));
                } else {
                    for (std::uint32_t j = 0; j < len; ++j) {
                        bool chain_prefix = (j % chunk) < d;
                        if (chain_prefix && j % chunk == 0 && j + d <= len) {
                            // Chunk prefixes come from the pool so chained
                            // pieces also share Phase-1 rows.
                            const auto& pre = pool[rng.below(pool.size())];
                            for (std::uint8_t b : pre) p.push_back(WildByte::literal(b));
                            j += d - 1;
                        } else if (chain_prefix || !rng.chance(params.wildcard_frac)) {
                            p.push_back(WildByte::literal(rng.byte()));
                        } else {
                            p.push_back(WildByte::wildcard());
                        }
                    }
                }
                if (seen.count(p)) continue;
                bool embedded = false;
                for (const WildBytes& q : pats)
                    if (forced_embedding(p, q) || forced_embedding(q, p)) {
                        embedded = true;
                        break;
                    }
                // Forced embeddings are allowed in principle but make traffic
                // generation label everything twice; prefer distinct shapes.
                if (embedded && tries < 150) continue;
                seen.insert(p);
                pats.push_back(std::move(p));
                ok = true;
            }
            if (!ok) gave_up = true;
        }
        if (gave_up) continue;

        RuleSet rs;
        for (std::uint32_t i = 0; i < pats.size(); ++i)
            rs.patterns.emplace(i, Pattern{i, pats[i]});
        std::uint32_t rid = 1;
        for (std::uint32_t i = 0; i < pats.size(); ++i) {
            Rule r;
            r.id = rid++;
            r.steps.push_back({i, GapConstraint{}});
            if (pats.size() >= 2 && rng.chance(params.multi_rule_frac)) {
                std::uint32_t extra = 1 + static_cast<std::uint32_t>(rng.below(2));
                for (std::uint32_t k = 0; k < extra; ++k) {
                    GapConstraint gap;
                    gap.min_gap = static_cast<std::uint32_t>(rng.below(9));
                    if (rng.chance(0.8))
                        gap.max_gap = gap.min_gap + static_cast<std::uint32_t>(rng.below(9));
                    r.steps.push_back(
                        {static_cast<std::uint32_t>(rng.below(pats.size())), gap});
                }
            }
            rs.rules.push_back(std::move(r));
        }
        rs.validate();

        try {
            compile(rs, capacity);
            return rs;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Capacity) throw;
            // retry with tighter parameters
        }
    }
    fail(ErrorKind::Capacity,
         "gen_ruleset: no feasible ruleset for this capacity after bounded retries");
}

Traffic gen_traffic(const TrafficSpec& spec, const RuleSet& rs) {
    if (spec.hit_rate < 0.0 || spec.hit_rate > 1.0)
        fail(ErrorKind::Invalid, "gen_traffic: hit_rate outside [0,1]");
    if (spec.hit_rate > 0.0 && rs.patterns.empty())
        fail(ErrorKind::Invalid, "gen_traffic: hit_rate > 0 needs patterns");
    Rng rng(spec.seed);

    std::vector<const Pattern*> pats;
    for (const auto& [id, p] : rs.patterns) pats.push_back(&p);
    std::uint64_t min_len = UINT64_MAX;
    for (const Pattern* p : pats) min_len = std::min<std::uint64_t>(min_len, p->bytes.size());
    if (spec.hit_rate > 0.0 && (pats.empty() || min_len > spec.length))
        fail(ErrorKind::Data, "gen_traffic: patterns do not fit the stream");

    const std::uint64_t n = spec.length;
    const std::uint64_t target =
        static_cast<std::uint64_t>(spec.hit_rate * static_cast<double>(n) + 0.5);
    const double band = 0.02 * static_cast<double>(n);

    // Placement bookkeeping: owner[i] < 0 for filler, otherwise index of the
    // placement covering byte i. Wildcard positions stay re-randomizable.
    struct Placement {
        const Pattern* pat;
        std::uint64_t start;
    };
    std::vector<Placement> placements;

    // Free intervals as a sorted map start -> length.
    std::map<std::uint64_t, std::uint64_t> free_iv;
    if (n > 0) free_iv[0] = n;
    std::uint64_t covered = 0;

    auto place_one = [&]() -> bool {
        // Pick an interval that can hold the shortest pattern plus its
        // separators, weighted by length.
        std::uint64_t total_free = 0;
        for (auto& [s, l] : free_iv)
            if (l >= min_len + 2) total_free += l;
        if (total_free == 0) return false;
        std::uint64_t pick = rng.below(total_free);
        auto it = free_iv.begin();
        for (;; ++it) {
            if (it->second < min_len + 2) continue;
            if (pick < it->second) break;
            pick -= it->second;
        }
        std::uint64_t iv_start = it->first, iv_len = it->second;
        // Separator bytes: one on each side unless flush with a stream edge.
        std::uint64_t lead = iv_start == 0 ? 0 : 1;
        std::uint64_t tail = iv_start + iv_len == n ? 0 : 1;
        if (iv_len < lead + tail + min_len) return false;
        std::uint64_t cap = iv_len - lead - tail;

        // Patterns are drawn uniformly so the workload mix does not shift
        // with the hit rate. Never overshoot the target by more than half
        // the allowed band.
        std::uint64_t deficit = target > covered ? target - covered : 0;
        std::uint64_t limit =
            std::min(cap, deficit + static_cast<std::uint64_t>(band * 0.5));
        const Pattern* best = nullptr;
        for (int tries = 0; tries < 48 && !best; ++tries) {
            const Pattern* cand = pats[rng.below(pats.size())];
            if (cand->bytes.size() <= limit) best = cand;
        }
        if (!best) {
            // Fragmented tail: fall back to the longest pattern that fits.
            for (const Pattern* cand : pats) {
                std::uint64_t len = cand->bytes.size();
                if (len > limit) continue;
                if (!best || len > best->bytes.size()) best = cand;
            }
        }
        if (!best) return false;
        std::uint64_t len = best->bytes.size();
        std::uint64_t slack = cap - len;
        std::uint64_t off = iv_start + lead + rng.below(slack + 1);

        placements.push_back({best, off});
        covered += len;
        // Split the interval around [off-lead, off+len+tail).
        std::uint64_t cut_lo = off - lead, cut_hi = off + len + tail;
        free_iv.erase(it);
        if (cut_lo > iv_start) free_iv[iv_start] = cut_lo - iv_start;
        if (iv_start + iv_len > cut_hi) free_iv[cut_hi] = iv_start + iv_len - cut_hi;
        return true;
    };

    if (spec.hit_rate > 0.0) {
        int misses = 0;
        while (covered + min_len / 2 < target && misses < 4096) {
            if (!place_one()) ++misses;
        }
    }
    double frac = n ? static_cast<double>(covered) / static_cast<double>(n) : 0.0;
    if (std::abs(frac - spec.hit_rate) > 0.02)
        fail(ErrorKind::Data,
             "gen_traffic: hit rate " + std::to_string(spec.hit_rate) +
                 " unreachable (got " + std::to_string(frac) + ")");

    // Lay the bytes down.
    std::vector<std::uint8_t> stream(n);
    std::vector<std::int32_t> owner(n, -1);
    for (std::size_t pi = 0; pi < placements.size(); ++pi) {
        const auto& pl = placements[pi];
        for (std::size_t j = 0; j < pl.pat->bytes.size(); ++j)
            owner[pl.start + j] = static_cast<std::int32_t>(pi);
    }
    auto rerandomize = [&](std::uint64_t i) { stream[i] = rng.byte(); };
    for (std::uint64_t i = 0; i < n; ++i) {
        if (owner[i] < 0) {
            rerandomize(i);
        } else {
            const auto& pl = placements[owner[i]];
            const WildByte& wb = pl.pat->bytes[i - pl.start];
            stream[i] = wb.any ? rng.byte() : wb.value;
        }
    }

    // A byte is free when changing it cannot break a placed occurrence.
    auto is_free = [&](std::uint64_t i) {
        if (owner[i] < 0) return true;
        const auto& pl = placements[owner[i]];
        return pl.pat->bytes[i - pl.start].any;
    };

    std::vector<OraclePattern> opats = oracle_patterns(rs);

    // Truth: the placements plus everything induced inside them (embedded
    // patterns, occurrences created by a wildcard fill). Recomputed from the
    // current bytes so it never holds stale entries.
    auto build_truth = [&] {
        std::set<Occurrence> t;
        for (const auto& pl : placements)
            t.insert({pl.pat->id, pl.start, pl.start + pl.pat->bytes.size() - 1});
        for (const auto& o : oracle_match(opats, stream))
            if (owner[o.start] >= 0 && owner[o.end] == owner[o.start])
                t.insert(o);
        return t;
    };
    std::set<Occurrence> truth = build_truth();

    // Repair loop: any occurrence outside the truth set covers at least one
    // free byte (placements are separated by filler), so re-randomizing free
    // bytes under a pattern literal eventually breaks it.
    for (int round = 0;; ++round) {
        std::vector<Occurrence> extra;
        for (const auto& o : oracle_match(opats, stream))
            if (!truth.count(o)) extra.push_back(o);
        if (extra.empty()) break;
        if (round >= 2000)
            fail(ErrorKind::Data, "gen_traffic: repair did not converge");
        for (const auto& o : extra) {
            const WildBytes& pb = rs.pattern(o.id).bytes;
            bool fixed = false;
            for (std::uint64_t i = o.start; i <= o.end; ++i) {
                if (!is_free(i)) continue;
                if (pb[i - o.start].any) continue;  // changing it cannot help
                rerandomize(i);
                fixed = true;
            }
            if (!fixed) {
                // Forced by placement literals alone: drop one involved
                // placement and let its bytes become filler.
                std::int32_t pi = owner[o.start] >= 0 ? owner[o.start] : owner[o.end];
                if (pi < 0)
                    fail(ErrorKind::Data, "gen_traffic: unrepairable collision");
                Placement pl = placements[pi];
                placements.erase(placements.begin() + pi);
                covered -= pl.pat->bytes.size();
                for (std::uint64_t j = 0; j < n; ++j)
                    if (owner[j] > pi) --owner[j];
                for (std::uint64_t j = pl.start;
                     j < pl.start + pl.pat->bytes.size(); ++j) {
                    owner[j] = -1;
                    rerandomize(j);
                }
            }
        }
        truth = build_truth();
    }

    frac = n ? static_cast<double>(covered) / static_cast<double>(n) : 0.0;
    if (std::abs(frac - spec.hit_rate) > 0.02)
        fail(ErrorKind::Data, "gen_traffic: repair pushed hit rate out of band");

    Traffic out;
    out.stream = std::move(stream);
    for (const auto& o : truth) out.truth.push_back({o.id, o.start, o.end});
    std::sort(out.truth.begin(), out.truth.end());
    out.covered_fraction = frac;
    return out;
}

}  // namespace camnids
