#ifndef CAMNIDS_ENGINE_HPP
#define CAMNIDS_ENGINE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camnids/camcore.hpp"
#include "camnids/compiler.hpp"

namespace camnids {

enum class CongestionPolicy { Stall, DropCount };

struct RunOptions {
    bool dual_port = false;       // lane B active
    bool clock_gating = true;
    CongestionPolicy congestion = CongestionPolicy::Stall;
    int queue_depth = 4;          // per-lane Phase-2 FIFO depth
    int phase2_latency = 2;       // cycles per Phase-2 search
    bool energy_full_rows = false;  // charge full arrays (no-row-enable model)

    void validate() const;
};

struct MatchEvent {
    int lane = 0;
    std::uint32_t sub_id = 0;
    std::uint64_t start = 0;
    std::uint64_t end = 0;  // inclusive
    std::uint64_t cycle = 0;

    auto operator<=>(const MatchEvent&) const = default;
};

struct BlockActivity {
    std::uint64_t searches = 0;
    std::uint64_t enabled_rows = 0;
    std::uint64_t searched_bits = 0;
    std::uint64_t l1_segments = 0;
    std::uint64_t sram_bits_read = 0;

    void add(const Activity& a) {
        ++searches;
        enabled_rows += a.enabled_rows;
        searched_bits += a.searched_bits;
        l1_segments += a.l1_segments;
        sram_bits_read += a.sram_bits_read;
    }
};

struct CycleStats {
    std::uint64_t cycles = 0;
    std::uint64_t input_cycles = 0;  // cycles with input offered (feed phase)
    std::uint64_t bytes_consumed = 0;
    std::uint64_t stage1_lookups = 0;
    std::uint64_t stage1_sram_bits = 0;
    std::vector<BlockActivity> pe;  // per PE, both ports combined
    std::uint64_t phase1_searches_port[2] = {0, 0};
    BlockActivity phase2;
    std::uint64_t phase2_searches = 0;
    std::uint64_t phase2_busy_cycles = 0;
    std::uint64_t sl_bits_driven = 0;  // search-line bits over all searches
    std::uint64_t router_routes = 0;
    std::uint64_t gated_cycles = 0;
    std::uint64_t gated_bytes = 0;
    std::uint64_t dropped_requests = 0;
    std::uint64_t flushed_requests = 0;
    std::uint64_t stall_cycles = 0;
    std::uint64_t active_block_cycles = 0;
    std::uint64_t gated_row_cycles = 0;  // retention: rows idle per cycle

    std::uint64_t phase1_searches() const {
        return phase1_searches_port[0] + phase1_searches_port[1];
    }
    /// Counter-wise sum, used when several packet runs report as one.
    void merge(const CycleStats& other);
    std::string to_json() const;
};

struct IssueRecord {
    std::uint64_t cycle = 0;
    int lane = 0;
};

struct RunResult {
    std::vector<MatchEvent> events;  // nondecreasing cycle order
    CycleStats stats;
    std::vector<IssueRecord> issue_log;  // Phase-2 arbiter decisions
};

/// Cycle-level model of the datapath: per lane a stage-1 direct lookup and
/// D-1 pipelined PE stages, per-lane Phase-2 FIFOs, a single-ported Phase-2
/// unit behind an arbiter that prefers lane A, and optional clock gating
/// that skips the suffix span of a matched pattern on both lanes.
class Engine {
public:
    Engine(const TableImage& image, const RunOptions& opt);

    void attach(std::span<const std::uint8_t> stream_a,
                std::span<const std::uint8_t> stream_b = {});

    /// Advances one cycle; returns false once attached streams are fully
    /// consumed and the pipeline, FIFOs and Phase-2 port have drained.
    bool step();

    /// attach + step to completion.
    RunResult run(std::span<const std::uint8_t> stream_a,
                  std::span<const std::uint8_t> stream_b = {});

    const std::vector<MatchEvent>& events() const { return events_; }
    const CycleStats& stats() const { return stats_; }
    const std::vector<IssueRecord>& issue_log() const { return issue_log_; }
    std::uint64_t cycle() const { return cycle_; }

private:
    struct StageReg {
        bool valid = false;
        RowRange range;           // PE rows to search this cycle
        std::uint64_t start = 0;  // stream offset where the candidate began
    };

    struct Phase2Request {
        RowRange range;                  // bank rows
        std::uint64_t start = 0;         // candidate start offset
        std::uint64_t window_start = 0;  // first suffix byte offset
        std::uint64_t enqueue_cycle = 0;
    };

    struct Lane {
        std::vector<StageReg> regs;  // index d-2 holds the stage-d candidate
        std::deque<Phase2Request> fifo;
        std::uint64_t next_off = 0;
        std::uint64_t gate_resume = 0;  // skip input below this offset
        std::span<const std::uint8_t> stream;
        bool active = false;
    };

    struct InFlight {
        Phase2Request req;
        int lane = 0;
        std::uint64_t last_busy_cycle = 0;
    };

    void arbitrate();
    void process_lane(int lane_idx);
    void dispatch(Lane& lane, int lane_idx, const SramEntry& entry,
                  std::uint64_t start, std::uint64_t now_off);
    void complete_search();
    void apply_gating(int source_lane, std::uint64_t resume_off);
    Code11 code_at(const Lane& lane, std::uint64_t off) const;
    Activity charge(const Activity& real, const CamArray& arr) const;

    const TableImage& image_;
    RunOptions opt_;
    Codebook book_;
    std::vector<CamArray> pe_cam_;
    std::vector<SramArray<SramEntry>> pe_sram_;
    std::vector<CamArray> bank_cam_;
    std::vector<SramArray<BankRow>> bank_sram_;
    SramArray<SramEntry> stage1_sram_;
    std::vector<int> pe_stage_;  // stage id per PE, -1 unassigned
    std::uint64_t total_rows_ = 0;

    Lane lanes_[2];
    std::optional<InFlight> inflight_;
    std::uint64_t cycle_ = 0;
    std::vector<MatchEvent> events_;
    std::vector<IssueRecord> issue_log_;
    CycleStats stats_;
};

/// Cycles from the first byte of a full-depth pattern to its match report.
int latency_cycles(const HwConfig& cfg, int phase2_latency = 2);

std::string events_to_csv(const std::vector<MatchEvent>& events);

}  // namespace camnids

#endif
