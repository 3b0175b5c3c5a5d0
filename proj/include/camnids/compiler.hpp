#ifndef CAMNIDS_COMPILER_HPP
#define CAMNIDS_COMPILER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camnids/fixed1s.hpp"
#include "camnids/rulespec.hpp"

namespace camnids {

/// Hardware geometry. Stage 1 is a direct-indexed two-port SRAM and uses no
/// PE; stages 2..D are PE clusters. stage_assignment maps each stage to the
/// PE ids serving it; empty means "apportion PEs by per-depth row demand".
struct HwConfig {
    int depth = 4;  // Phase-1 prefix depth D
    int n_pes = 8;
    int pe_rows = 64;
    int n_banks = 4;
    int bank_rows = 64;
    int w = 20;  // Phase-2 slots per row
    std::map<int, std::vector<int>> stage_assignment;

    bool operator==(const HwConfig&) const = default;

    void validate() const;  // throws Error{Invalid}
};

/// A pattern piece after the Phase-1/Phase-2 split. Long patterns are cut
/// into chained sub-patterns of at most depth+w bytes; identical byte
/// sequences share one sub-pattern id.
struct SubPattern {
    std::uint32_t id = 0;
    std::vector<std::uint8_t> prefix;  // all-literal, length <= depth
    WildBytes suffix;                  // length <= w, empty => Phase-1 terminal
    std::uint32_t total_len = 0;

    WildBytes full_bytes() const;

    bool operator==(const SubPattern&) const = default;
};

/// Per original pattern: its chain of sub-pattern ids, in order. Consecutive
/// chain elements must match back-to-back (gap exactly 0), enforced by
/// Phase-3.
struct ChainPlan {
    std::map<std::uint32_t, std::vector<std::uint32_t>> chains;

    bool operator==(const ChainPlan&) const = default;
};

struct SplitResult {
    std::vector<SubPattern> subs;
    ChainPlan plan;
};

SplitResult split_patterns(const RuleSet& rs, const HwConfig& cfg);

/// Forward-only prefix trie over sub-pattern prefixes. State 0 is the root.
struct TrieState {
    int depth = 0;
    std::uint32_t parent = 0;
    std::uint8_t in_char = 0;
    std::vector<std::uint32_t> children;               // state ids
    std::optional<std::uint32_t> terminal_sub;         // empty-suffix sub ending here
    std::vector<std::uint32_t> suffix_subs;            // Phase-2 group owned here
};

struct Trie {
    std::vector<TrieState> states;

    std::optional<std::uint32_t> child(std::uint32_t state, std::uint8_t c) const;
};

struct AcStats {
    std::uint64_t n_states = 0;
    std::uint64_t n_forward = 0;
    std::uint64_t n_backward = 0;
    std::vector<std::uint64_t> states_per_depth;  // index = depth
    std::uint32_t skipped_wildcard_patterns = 0;  // conventional baseline only
};

/// Builds the pipelined trie; n_backward is 0 by construction.
std::pair<Trie, AcStats> build_trie(const std::vector<SubPattern>& subs, int depth);

/// Conventional full-pattern Aho-Corasick baseline. Forward = trie edges;
/// backward = distinct DFA transitions that are neither trie edges nor moves
/// to the root. Patterns containing wildcards are skipped and counted.
AcStats build_conventional_ac(const RuleSet& rs);

/// Rows of one physical array addressed as an inclusive [dn, up] interval.
struct RowRange {
    int target = 0;  // PE id or bank id
    int dn = 0;
    int up = 0;

    int rows() const { return up - dn + 1; }
    bool operator==(const RowRange&) const = default;
};

/// SRAM payload of one transition row (or stage-1 entry). A state that both
/// continues deeper and completes a sub-pattern carries both actions.
struct SramEntry {
    std::optional<RowRange> to_pe;
    std::optional<RowRange> to_phase2;
    std::optional<std::uint32_t> terminal_sub;

    bool operator==(const SramEntry&) const = default;
};

struct PeRow {
    Code11 cam = 0;
    SramEntry sram;

    bool operator==(const PeRow&) const = default;
};

struct BankRow {
    WideRow cam;
    std::uint32_t sub_id = 0;
    std::uint32_t suffix_len = 0;

    bool operator==(const BankRow&) const = default;
};

/// Compiled hardware contents plus the metadata Phase-3 and the oracles
/// need (source ruleset, sub-pattern table, chain plan).
struct TableImage {
    HwConfig config;  // stage_assignment resolved, never empty here
    Codebook codebook = Codebook::canonical();
    std::array<std::optional<SramEntry>, 256> stage1;
    std::vector<std::vector<PeRow>> pes;      // per PE
    std::vector<std::vector<BankRow>> banks;  // per Phase-2 bank
    RuleSet ruleset;
    std::vector<SubPattern> subs;
    ChainPlan plan;

    bool operator==(const TableImage&) const = default;

    std::uint64_t phase1_rows_used() const;
    std::uint64_t phase2_rows_used() const;
    int stage_of_pe(int pe) const;  // -1 if unassigned
    void validate() const;          // throws Error{Data} on invariant violation
};

/// split + trie + pack. Deterministic; throws Error{Capacity} when the
/// ruleset does not fit the configured arrays.
TableImage compile(const RuleSet& rs, const HwConfig& cfg);

std::pair<Trie, AcStats> trie_of_image_inputs(const RuleSet& rs, const HwConfig& cfg);

/// Lossless JSON round-trip; read validates all image invariants.
void write_image(const TableImage& img, const std::string& path);
TableImage read_image(const std::string& path);
std::string image_to_json(const TableImage& img);
TableImage image_from_json(const std::string& text);

/// Human-oriented summary of an image (geometry, occupancy, row listings).
std::string dump_image(const TableImage& img);

HwConfig hwconfig_from_json(const std::string& text);
std::string hwconfig_to_json(const HwConfig& cfg);

}  // namespace camnids

#endif
