#include "camnids/compiler.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace camnids {

void HwConfig::validate() const {
    if (depth < 2) fail(ErrorKind::Invalid, "config: depth must be at least 2");
    if (n_pes < 1 || pe_rows < 1 || n_banks < 1 || bank_rows < 1 || w < 1)
        fail(ErrorKind::Invalid, "config: array dimensions must be positive");
    std::set<int> used;
    for (const auto& [stage, pes] : stage_assignment) {
        if (stage < 2 || stage > depth)
            fail(ErrorKind::Invalid,
                 "config: stage " + std::to_string(stage) + " outside 2..depth");
        for (int pe : pes) {
            if (pe < 0 || pe >= n_pes)
                fail(ErrorKind::Invalid, "config: PE id " + std::to_string(pe) +
                                             " out of range");
            if (!used.insert(pe).second)
                fail(ErrorKind::Invalid, "config: PE " + std::to_string(pe) +
                                             " assigned to two stages");
        }
    }
}

WildBytes SubPattern::full_bytes() const {
    WildBytes out;
    out.reserve(prefix.size() + suffix.size());
    for (std::uint8_t b : prefix) out.push_back(WildByte::literal(b));
    for (const WildByte& b : suffix) out.push_back(b);
    return out;
}

SplitResult split_patterns(const RuleSet& rs, const HwConfig& cfg) {
    cfg.validate();
    const std::size_t d = static_cast<std::size_t>(cfg.depth);
    const std::size_t chunk_max = d + static_cast<std::size_t>(cfg.w);

    SplitResult res;
    std::map<WildBytes, std::uint32_t> interned;
    for (const auto& [pid, pat] : rs.patterns) {
        const WildBytes& bytes = pat.bytes;
        std::vector<std::uint32_t>& chain = res.plan.chains[pid];
        for (std::size_t off = 0; off < bytes.size(); off += chunk_max) {
            std::size_t len = std::min(chunk_max, bytes.size() - off);
            std::size_t plen = std::min(d, len);
            SubPattern sub;
            for (std::size_t i = 0; i < plen; ++i) {
                const WildByte& b = bytes[off + i];
                if (b.any)
                    fail(ErrorKind::Data,
                         "pattern " + std::to_string(pid) + ": wildcard at byte " +
                             std::to_string(off + i) +
                             " falls in an exact-match prefix region");
                sub.prefix.push_back(b.value);
            }
            sub.suffix.assign(bytes.begin() + static_cast<std::ptrdiff_t>(off + plen),
                              bytes.begin() + static_cast<std::ptrdiff_t>(off + len));
            sub.total_len = static_cast<std::uint32_t>(len);

            WildBytes key = sub.full_bytes();
            auto it = interned.find(key);
            std::uint32_t sid;
            if (it != interned.end()) {
                sid = it->second;
            } else {
                sid = static_cast<std::uint32_t>(res.subs.size());
                sub.id = sid;
                interned.emplace(std::move(key), sid);
                res.subs.push_back(std::move(sub));
            }
            chain.push_back(sid);
        }
    }
    return res;
}

std::optional<std::uint32_t> Trie::child(std::uint32_t state, std::uint8_t c) const {
    for (std::uint32_t cid : states[state].children)
        if (states[cid].in_char == c) return cid;
    return std::nullopt;
}

std::pair<Trie, AcStats> build_trie(const std::vector<SubPattern>& subs, int depth) {
    Trie trie;
    trie.states.push_back(TrieState{});  // root
    for (const SubPattern& sub : subs) {
        if (static_cast<int>(sub.prefix.size()) > depth)
            fail(ErrorKind::Data, "sub-pattern prefix deeper than the pipeline");
        std::uint32_t cur = 0;
        for (std::uint8_t b : sub.prefix) {
            auto next = trie.child(cur, b);
            if (!next) {
                std::uint32_t nid = static_cast<std::uint32_t>(trie.states.size());
                TrieState st;
                st.depth = trie.states[cur].depth + 1;
                st.parent = cur;
                st.in_char = b;
                trie.states.push_back(st);
                trie.states[cur].children.push_back(nid);
                next = nid;
            }
            cur = *next;
        }
        if (sub.suffix.empty()) {
            if (trie.states[cur].terminal_sub &&
                *trie.states[cur].terminal_sub != sub.id)
                fail(ErrorKind::Data, "two distinct terminal subs on one state");
            trie.states[cur].terminal_sub = sub.id;
        } else {
            trie.states[cur].suffix_subs.push_back(sub.id);
        }
    }

    AcStats stats;
    stats.n_states = trie.states.size();
    stats.n_forward = trie.states.size() - 1;
    stats.n_backward = 0;
    stats.states_per_depth.assign(static_cast<std::size_t>(depth) + 1, 0);
    for (const TrieState& st : trie.states)
        ++stats.states_per_depth[static_cast<std::size_t>(st.depth)];
    return {std::move(trie), stats};
}

AcStats build_conventional_ac(const RuleSet& rs) {
    // Full-pattern trie over the literal patterns.
    struct Node {
        std::map<std::uint8_t, std::uint32_t> next;
        std::uint32_t fail = 0;
        int depth = 0;
    };
    std::vector<Node> nodes(1);
    AcStats stats;
    for (const auto& [pid, pat] : rs.patterns) {
        bool has_wild = false;
        for (const WildByte& b : pat.bytes) has_wild |= b.any;
        if (has_wild) {
            ++stats.skipped_wildcard_patterns;
            continue;
        }
        std::uint32_t cur = 0;
        for (const WildByte& b : pat.bytes) {
            auto it = nodes[cur].next.find(b.value);
            if (it == nodes[cur].next.end()) {
                std::uint32_t nid = static_cast<std::uint32_t>(nodes.size());
                int depth = nodes[cur].depth + 1;
                nodes[cur].next.emplace(b.value, nid);
                nodes.push_back(Node{});
                nodes[nid].depth = depth;
                cur = nid;
            } else {
                cur = it->second;
            }
        }
    }

    // Failure links, breadth first.
    std::queue<std::uint32_t> bfs;
    for (auto& [c, nid] : nodes[0].next) {
        nodes[nid].fail = 0;
        bfs.push(nid);
    }
    while (!bfs.empty()) {
        std::uint32_t u = bfs.front();
        bfs.pop();
        for (auto& [c, v] : nodes[u].next) {
            std::uint32_t f = nodes[u].fail;
            while (f != 0 && !nodes[f].next.count(c)) f = nodes[f].fail;
            auto it = nodes[f].next.find(c);
            nodes[v].fail = (it != nodes[f].next.end() && it->second != v)
                                ? it->second
                                : 0;
            bfs.push(v);
        }
    }

    stats.n_states = nodes.size();
    stats.n_forward = nodes.size() - 1;
    int max_depth = 0;
    for (const Node& n : nodes) max_depth = std::max(max_depth, n.depth);
    stats.states_per_depth.assign(static_cast<std::size_t>(max_depth) + 1, 0);
    for (const Node& n : nodes)
        ++stats.states_per_depth[static_cast<std::size_t>(n.depth)];

    // Backward transitions: distinct DFA moves delta(s, c) that are neither
    // trie edges nor falls to the root.
    std::uint64_t backward = 0;
    for (std::uint32_t s = 0; s < nodes.size(); ++s) {
        for (int c = 0; c < 256; ++c) {
            std::uint8_t ch = static_cast<std::uint8_t>(c);
            if (nodes[s].next.count(ch)) continue;  // forward edge
            std::uint32_t f = s;
            while (f != 0 && !nodes[f].next.count(ch)) f = nodes[f].fail;
            auto it = nodes[f].next.find(ch);
            std::uint32_t target = it == nodes[f].next.end() ? 0 : it->second;
            if (target != 0) ++backward;
        }
    }
    stats.n_backward = backward;
    return stats;
}

namespace {

// Apportions PEs to stages proportionally to per-depth row demand. Every
// stage with rows gets at least one PE; remainders go to shallower stages.
std::map<int, std::vector<int>> default_assignment(const HwConfig& cfg,
                                                   const AcStats& stats) {
    std::vector<std::pair<int, std::uint64_t>> demand;  // stage, rows
    std::uint64_t total = 0;
    for (int d = 2; d <= cfg.depth; ++d) {
        std::uint64_t rows = d < static_cast<int>(stats.states_per_depth.size())
                                 ? stats.states_per_depth[static_cast<std::size_t>(d)]
                                 : 0;
        if (rows > 0) demand.emplace_back(d, rows);
        total += rows;
    }
    std::map<int, std::vector<int>> assign;
    if (demand.empty()) return assign;
    if (static_cast<int>(demand.size()) > cfg.n_pes)
        fail(ErrorKind::Capacity,
             "not enough PEs: " + std::to_string(demand.size()) +
                 " populated stages, " + std::to_string(cfg.n_pes) + " PEs");

    int n = static_cast<int>(demand.size());
    std::vector<int> count(demand.size(), 1);
    int left = cfg.n_pes - n;
    // Largest remainder on the leftover PEs, ties to shallower stages.
    std::vector<double> quota(demand.size());
    std::vector<int> extra(demand.size(), 0);
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        quota[i] = static_cast<double>(demand[i].second) / static_cast<double>(total) *
                   left;
        extra[i] = static_cast<int>(quota[i]);
        assigned += extra[i];
    }
    std::vector<int> order(demand.size());
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double fa = quota[a] - extra[a], fb = quota[b] - extra[b];
        if (fa != fb) return fa > fb;
        return demand[a].first < demand[b].first;
    });
    for (int k = 0; assigned < left; ++k) {
        ++extra[order[static_cast<std::size_t>(k) % order.size()]];
        ++assigned;
    }
    for (int i = 0; i < n; ++i) count[i] += extra[i];

    // Steal PEs for stages whose demand exceeds their share.
    for (int guard = 0; guard < cfg.n_pes; ++guard) {
        int needy = -1;
        for (int i = 0; i < n; ++i)
            if (demand[i].second > static_cast<std::uint64_t>(count[i]) * cfg.pe_rows)
                needy = i;
        if (needy < 0) break;
        int donor = -1;
        std::uint64_t best_slack = 0;
        for (int i = 0; i < n; ++i) {
            if (i == needy || count[i] <= 1) continue;
            std::uint64_t cap = static_cast<std::uint64_t>(count[i] - 1) * cfg.pe_rows;
            if (cap >= demand[i].second) {
                std::uint64_t slack = cap - demand[i].second;
                if (donor < 0 || slack > best_slack) {
                    donor = i;
                    best_slack = slack;
                }
            }
        }
        if (donor < 0) break;  // let packing report the capacity error
        --count[donor];
        ++count[needy];
    }

    int next_pe = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<int>& pes = assign[demand[i].first];
        for (int k = 0; k < count[i]; ++k) pes.push_back(next_pe++);
    }
    return assign;
}

struct GroupAlloc {
    int target = 0;  // PE or bank
    int dn = 0;
    int up = 0;
};

// First-fit-decreasing of sibling groups into the arrays of one stage.
// Groups never split; rows inside one array are allocated bottom-up.
std::map<std::uint32_t, GroupAlloc> pack_groups(
    const std::vector<std::pair<std::uint32_t, int>>& groups,  // key, size
    const std::vector<int>& arrays, int rows_per_array, const std::string& what) {
    std::vector<std::pair<std::uint32_t, int>> sorted = groups;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::map<int, int> next_free;
    for (int a : arrays) next_free[a] = 0;
    std::map<std::uint32_t, GroupAlloc> out;
    for (const auto& [key, size] : sorted) {
        bool placed = false;
        for (int a : arrays) {
            if (next_free[a] + size <= rows_per_array) {
                out[key] = {a, next_free[a], next_free[a] + size - 1};
                next_free[a] += size;
                placed = true;
                break;
            }
        }
        if (!placed)
            fail(ErrorKind::Capacity,
                 what + ": group of " + std::to_string(size) +
                     " rows does not fit (arrays " + std::to_string(arrays.size()) +
                     " x " + std::to_string(rows_per_array) + " rows)");
    }
    return out;
}

}  // namespace

std::pair<Trie, AcStats> trie_of_image_inputs(const RuleSet& rs, const HwConfig& cfg) {
    SplitResult split = split_patterns(rs, cfg);
    return build_trie(split.subs, cfg.depth);
}

TableImage compile(const RuleSet& rs, const HwConfig& cfg) {
    cfg.validate();
    rs.validate();
    SplitResult split = split_patterns(rs, cfg);
    auto [trie, stats] = build_trie(split.subs, cfg.depth);

    TableImage img;
    img.config = cfg;
    if (img.config.stage_assignment.empty())
        img.config.stage_assignment = default_assignment(cfg, stats);
    img.codebook = Codebook::canonical();
    img.ruleset = rs;
    img.subs = split.subs;
    img.plan = split.plan;
    img.pes.assign(static_cast<std::size_t>(cfg.n_pes), {});
    img.banks.assign(static_cast<std::size_t>(cfg.n_banks), {});

    // Sibling groups per depth: parent state id -> children.
    std::map<int, std::vector<std::pair<std::uint32_t, int>>> stage_groups;
    for (std::uint32_t sid = 0; sid < trie.states.size(); ++sid) {
        const TrieState& st = trie.states[sid];
        if (st.children.empty()) continue;
        int child_depth = st.depth + 1;
        if (child_depth >= 2)
            stage_groups[child_depth].emplace_back(
                sid, static_cast<int>(st.children.size()));
    }

    std::map<std::uint32_t, GroupAlloc> pe_alloc;  // parent state -> rows
    for (auto& [stage, groups] : stage_groups) {
        auto it = img.config.stage_assignment.find(stage);
        if (it == img.config.stage_assignment.end() || it->second.empty())
            fail(ErrorKind::Capacity,
                 "stage " + std::to_string(stage) + " has rows but no PEs assigned");
        std::vector<int> pes = it->second;
        std::sort(pes.begin(), pes.end());
        auto alloc = pack_groups(groups, pes, cfg.pe_rows,
                                 "stage " + std::to_string(stage));
        pe_alloc.insert(alloc.begin(), alloc.end());
    }

    // Phase-2 suffix groups, one per owning state.
    std::vector<std::pair<std::uint32_t, int>> suffix_groups;
    for (std::uint32_t sid = 0; sid < trie.states.size(); ++sid) {
        const TrieState& st = trie.states[sid];
        if (!st.suffix_subs.empty())
            suffix_groups.emplace_back(sid, static_cast<int>(st.suffix_subs.size()));
    }
    std::vector<int> bank_ids(static_cast<std::size_t>(cfg.n_banks));
    for (int i = 0; i < cfg.n_banks; ++i) bank_ids[static_cast<std::size_t>(i)] = i;
    auto bank_alloc = pack_groups(suffix_groups, bank_ids, cfg.bank_rows, "phase-2");

    // Materialize rows. Children of one parent occupy their range in
    // ascending in_char order; suffix groups in ascending sub id.
    auto entry_of = [&](std::uint32_t sid) {
        const TrieState& st = trie.states[sid];
        SramEntry e;
        if (!st.children.empty()) {
            const GroupAlloc& a = pe_alloc.at(sid);
            e.to_pe = RowRange{a.target, a.dn, a.up};
        }
        if (!st.suffix_subs.empty()) {
            const GroupAlloc& a = bank_alloc.at(sid);
            e.to_phase2 = RowRange{a.target, a.dn, a.up};
        }
        e.terminal_sub = st.terminal_sub;
        return e;
    };

    // Rows must exist before being indexed; size each PE to its high water.
    std::vector<int> pe_used(static_cast<std::size_t>(cfg.n_pes), 0);
    for (const auto& [sid, a] : pe_alloc)
        pe_used[static_cast<std::size_t>(a.target)] =
            std::max(pe_used[static_cast<std::size_t>(a.target)], a.up + 1);
    for (int pe = 0; pe < cfg.n_pes; ++pe)
        img.pes[static_cast<std::size_t>(pe)].assign(
            static_cast<std::size_t>(pe_used[static_cast<std::size_t>(pe)]), PeRow{});

    for (const auto& [sid, a] : pe_alloc) {
        std::vector<std::uint32_t> kids = trie.states[sid].children;
        std::sort(kids.begin(), kids.end(), [&](std::uint32_t x, std::uint32_t y) {
            return trie.states[x].in_char < trie.states[y].in_char;
        });
        for (std::size_t i = 0; i < kids.size(); ++i) {
            PeRow row;
            row.cam = img.codebook.code(trie.states[kids[i]].in_char);
            row.sram = entry_of(kids[i]);
            img.pes[static_cast<std::size_t>(a.target)]
                   [static_cast<std::size_t>(a.dn) + i] = row;
        }
    }

    std::vector<int> bank_used(static_cast<std::size_t>(cfg.n_banks), 0);
    for (const auto& [sid, a] : bank_alloc)
        bank_used[static_cast<std::size_t>(a.target)] =
            std::max(bank_used[static_cast<std::size_t>(a.target)], a.up + 1);
    for (int b = 0; b < cfg.n_banks; ++b)
        img.banks[static_cast<std::size_t>(b)].assign(
            static_cast<std::size_t>(bank_used[static_cast<std::size_t>(b)]),
            BankRow{});
    for (const auto& [sid, a] : bank_alloc) {
        std::vector<std::uint32_t> subs = trie.states[sid].suffix_subs;
        std::sort(subs.begin(), subs.end());
        for (std::size_t i = 0; i < subs.size(); ++i) {
            const SubPattern& sub = img.subs[subs[i]];
            BankRow row;
            row.cam = encode_suffix(sub.suffix, cfg.w, img.codebook);
            row.sub_id = sub.id;
            row.suffix_len = static_cast<std::uint32_t>(sub.suffix.size());
            img.banks[static_cast<std::size_t>(a.target)]
                     [static_cast<std::size_t>(a.dn) + i] = row;
        }
    }

    // Stage 1: direct-indexed entries for the depth-1 states.
    for (std::uint32_t cid : trie.states[0].children)
        img.stage1[trie.states[cid].in_char] = entry_of(cid);

    img.validate();
    return img;
}

std::uint64_t TableImage::phase1_rows_used() const {
    std::uint64_t n = 0;
    for (const auto& rows : pes) n += rows.size();
    return n;
}

std::uint64_t TableImage::phase2_rows_used() const {
    std::uint64_t n = 0;
    for (const auto& rows : banks) n += rows.size();
    return n;
}

int TableImage::stage_of_pe(int pe) const {
    for (const auto& [stage, pes_] : config.stage_assignment)
        for (int p : pes_)
            if (p == pe) return stage;
    return -1;
}

void TableImage::validate() const {
    config.validate();
    ruleset.validate();
    Codebook::from_table(codebook.table());
    if (static_cast<int>(pes.size()) != config.n_pes)
        fail(ErrorKind::Data, "image: PE count mismatch");
    if (static_cast<int>(banks.size()) != config.n_banks)
        fail(ErrorKind::Data, "image: bank count mismatch");
    for (const auto& rows : pes)
        if (static_cast<int>(rows.size()) > config.pe_rows)
            fail(ErrorKind::Data, "image: PE overflows its rows");
    for (const auto& rows : banks)
        if (static_cast<int>(rows.size()) > config.bank_rows)
            fail(ErrorKind::Data, "image: bank overflows its rows");

    auto check_entry = [&](const SramEntry& e, int source_stage) {
        if (e.to_pe) {
            const RowRange& r = *e.to_pe;
            if (r.dn > r.up) fail(ErrorKind::Data, "image: range with DN > UP");
            if (r.target < 0 || r.target >= config.n_pes)
                fail(ErrorKind::Data, "image: range targets a missing PE");
            int stage = stage_of_pe(r.target);
            if (stage != source_stage + 1)
                fail(ErrorKind::Data, "image: PE range skips a stage");
            if (r.up >= static_cast<int>(pes[static_cast<std::size_t>(r.target)].size()))
                fail(ErrorKind::Data, "image: PE range past the used rows");
        }
        if (e.to_phase2) {
            const RowRange& r = *e.to_phase2;
            if (r.dn > r.up) fail(ErrorKind::Data, "image: range with DN > UP");
            if (r.target < 0 || r.target >= config.n_banks)
                fail(ErrorKind::Data, "image: range targets a missing bank");
            if (r.up >=
                static_cast<int>(banks[static_cast<std::size_t>(r.target)].size()))
                fail(ErrorKind::Data, "image: bank range past the used rows");
        }
        if (e.terminal_sub && *e.terminal_sub >= subs.size())
            fail(ErrorKind::Data, "image: terminal references a missing sub");
        if (!e.to_pe && !e.to_phase2 && !e.terminal_sub)
            fail(ErrorKind::Data, "image: entry with no action");
    };

    for (int b = 0; b < 256; ++b)
        if (stage1[static_cast<std::size_t>(b)]) {
            const SramEntry& e = *stage1[static_cast<std::size_t>(b)];
            if (e.to_phase2)
                fail(ErrorKind::Data, "image: stage-1 entry cannot reach Phase-2");
            check_entry(e, 1);
        }
    for (int pe = 0; pe < config.n_pes; ++pe) {
        int stage = stage_of_pe(pe);
        const auto& rows = pes[static_cast<std::size_t>(pe)];
        if (!rows.empty() && stage < 0)
            fail(ErrorKind::Data, "image: populated PE not assigned to a stage");
        for (const PeRow& row : rows) {
            if (row.sram.to_pe || row.sram.to_phase2 || row.sram.terminal_sub) {
                if (!is_char_code(row.cam))
                    fail(ErrorKind::Data, "image: PE row stores a non-character code");
                check_entry(row.sram, stage);
            }
        }
    }
    for (const auto& rows : banks)
        for (const BankRow& row : rows) {
            if (row.sub_id >= subs.size() && !(row.sub_id == 0 && row.suffix_len == 0))
                fail(ErrorKind::Data, "image: bank row references a missing sub");
            if (static_cast<int>(row.cam.slots.size()) != config.w &&
                !row.cam.slots.empty())
                fail(ErrorKind::Data, "image: bank row width mismatch");
        }

    // Ranges from distinct parents never overlap.
    auto overlap_check = [&](std::vector<std::vector<std::pair<int, int>>>& per) {
        for (auto& v : per) {
            std::sort(v.begin(), v.end());
            for (std::size_t i = 1; i < v.size(); ++i)
                if (v[i].first <= v[i - 1].second)
                    fail(ErrorKind::Data, "image: sibling ranges overlap");
        }
    };
    std::vector<std::vector<std::pair<int, int>>> pe_ranges(
        static_cast<std::size_t>(config.n_pes));
    std::vector<std::vector<std::pair<int, int>>> bank_ranges(
        static_cast<std::size_t>(config.n_banks));
    auto collect = [&](const SramEntry& e) {
        if (e.to_pe)
            pe_ranges[static_cast<std::size_t>(e.to_pe->target)].emplace_back(
                e.to_pe->dn, e.to_pe->up);
        if (e.to_phase2)
            bank_ranges[static_cast<std::size_t>(e.to_phase2->target)].emplace_back(
                e.to_phase2->dn, e.to_phase2->up);
    };
    for (const auto& e : stage1)
        if (e) collect(*e);
    for (const auto& rows : pes)
        for (const PeRow& row : rows) collect(row.sram);
    overlap_check(pe_ranges);
    overlap_check(bank_ranges);

    // Distinct characters within every sibling range.
    for (int pe = 0; pe < config.n_pes; ++pe) {
        for (const auto& [dn, up] : pe_ranges[static_cast<std::size_t>(pe)]) {
            std::set<Code11> chars;
            for (int r = dn; r <= up; ++r)
                if (!chars.insert(pes[static_cast<std::size_t>(pe)]
                                      [static_cast<std::size_t>(r)].cam).second)
                    fail(ErrorKind::Data,
                         "image: duplicate character inside a sibling range");
        }
    }
}

}  // namespace camnids
