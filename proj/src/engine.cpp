#include "camnids/engine.hpp"

#include <algorithm>

#include "json.hpp"

namespace camnids {

namespace {

int ceil_log2(std::uint64_t n) {
    int bits = 0;
    while ((1ull << bits) < n) ++bits;
    return bits;
}

struct PayloadBits {
    int stage1 = 0;
    int pe_entry = 0;
    int phase2 = 0;
};

PayloadBits payload_bits(const TableImage& img) {
    const HwConfig& c = img.config;
    int pe_bits = ceil_log2(static_cast<std::uint64_t>(c.n_pes));
    int row_bits = ceil_log2(static_cast<std::uint64_t>(c.pe_rows));
    int bank_bits = ceil_log2(static_cast<std::uint64_t>(c.n_banks));
    int brow_bits = ceil_log2(static_cast<std::uint64_t>(c.bank_rows));
    int sub_bits = ceil_log2(std::max<std::uint64_t>(2, img.subs.size()));
    int len_bits = ceil_log2(static_cast<std::uint64_t>(c.w) + 1);
    PayloadBits out;
    out.stage1 = 2 + pe_bits + 2 * row_bits + sub_bits;
    out.pe_entry = 3 + pe_bits + 2 * row_bits + bank_bits + 2 * brow_bits + sub_bits;
    out.phase2 = sub_bits + len_bits;
    return out;
}

}  // namespace

void RunOptions::validate() const {
    if (queue_depth < 1)
        fail(ErrorKind::Invalid, "engine: queue_depth must be at least 1");
    if (phase2_latency < 1)
        fail(ErrorKind::Invalid, "engine: phase2_latency must be at least 1");
}

int latency_cycles(const HwConfig& cfg, int phase2_latency) {
    return cfg.depth + phase2_latency;
}

Engine::Engine(const TableImage& image, const RunOptions& opt)
    : image_(image),
      opt_(opt),
      book_(image.codebook),
      stage1_sram_(256, payload_bits(image).stage1) {
    opt_.validate();
    image_.validate();
    PayloadBits bits = payload_bits(image_);
    const HwConfig& cfg = image_.config;

    pe_stage_.assign(static_cast<std::size_t>(cfg.n_pes), -1);
    for (int pe = 0; pe < cfg.n_pes; ++pe)
        pe_stage_[static_cast<std::size_t>(pe)] = image_.stage_of_pe(pe);

    for (int pe = 0; pe < cfg.n_pes; ++pe) {
        pe_cam_.emplace_back(cfg.pe_rows, 1);
        pe_sram_.emplace_back(cfg.pe_rows, bits.pe_entry);
        const auto& rows = image_.pes[static_cast<std::size_t>(pe)];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            pe_cam_.back().store(static_cast<int>(r),
                                 WideRow{{rows[r].cam}});
            pe_sram_.back().store(static_cast<int>(r), rows[r].sram);
        }
    }
    for (int b = 0; b < cfg.n_banks; ++b) {
        bank_cam_.emplace_back(cfg.bank_rows, cfg.w);
        bank_sram_.emplace_back(cfg.bank_rows, bits.phase2);
        const auto& rows = image_.banks[static_cast<std::size_t>(b)];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            bank_cam_.back().store(static_cast<int>(r), rows[r].cam);
            bank_sram_.back().store(static_cast<int>(r), rows[r]);
        }
    }
    for (int b = 0; b < 256; ++b) {
        SramEntry e;
        if (image_.stage1[static_cast<std::size_t>(b)])
            e = *image_.stage1[static_cast<std::size_t>(b)];
        stage1_sram_.store(b, e);
    }
    total_rows_ = static_cast<std::uint64_t>(cfg.n_pes) * cfg.pe_rows +
                  static_cast<std::uint64_t>(cfg.n_banks) * cfg.bank_rows;
    attach({}, {});
}

void Engine::attach(std::span<const std::uint8_t> stream_a,
                    std::span<const std::uint8_t> stream_b) {
    if (!opt_.dual_port && !stream_b.empty())
        fail(ErrorKind::Invalid, "engine: lane B stream without dual_port");
    for (int l = 0; l < 2; ++l) {
        Lane& lane = lanes_[l];
        lane.regs.assign(static_cast<std::size_t>(image_.config.depth - 1),
                         StageReg{});
        lane.fifo.clear();
        lane.next_off = 0;
        lane.gate_resume = 0;
        lane.stream = l == 0 ? stream_a : stream_b;
        lane.active = l == 0 || opt_.dual_port;
    }
    inflight_.reset();
    cycle_ = 0;
    events_.clear();
    issue_log_.clear();
    stats_ = CycleStats{};
    stats_.pe.assign(static_cast<std::size_t>(image_.config.n_pes), BlockActivity{});
}

Code11 Engine::code_at(const Lane& lane, std::uint64_t off) const {
    return off < lane.stream.size() ? book_.code(lane.stream[off]) : kWildcardCode;
}

Activity Engine::charge(const Activity& real, const CamArray& arr) const {
    if (!opt_.energy_full_rows) return real;
    Activity full = real;
    full.enabled_rows = static_cast<std::uint64_t>(arr.capacity());
    full.searched_bits = full.enabled_rows *
                         static_cast<std::uint64_t>(arr.slot_count()) * kCode11Bits;
    full.l1_segments = static_cast<std::uint64_t>((arr.capacity() - 1) / 8 + 1);
    return full;
}

void Engine::dispatch(Lane& lane, int lane_idx, const SramEntry& entry,
                      std::uint64_t start, std::uint64_t now_off) {
    if (entry.terminal_sub) {
        events_.push_back({lane_idx, *entry.terminal_sub, start, now_off, cycle_});
    }
    if (entry.to_pe) {
        int stage = pe_stage_[static_cast<std::size_t>(entry.to_pe->target)];
        StageReg& reg = lane.regs[static_cast<std::size_t>(stage - 2)];
        reg.valid = true;
        reg.range = *entry.to_pe;
        reg.start = start;
        ++stats_.router_routes;
    }
    if (entry.to_phase2) {
        if (static_cast<int>(lane.fifo.size()) >= opt_.queue_depth) {
            // Stall policy never reaches here: input halts while a FIFO is
            // full, so only DropCount can overflow.
            ++stats_.dropped_requests;
        } else {
            lane.fifo.push_back(
                Phase2Request{*entry.to_phase2, start, now_off + 1, cycle_});
            ++stats_.router_routes;
        }
    }
}

void Engine::arbitrate() {
    bool port_free = !inflight_ || cycle_ > inflight_->last_busy_cycle;
    if (!port_free) return;
    for (int l = 0; l < 2; ++l) {
        Lane& lane = lanes_[l];
        if (!lane.active || lane.fifo.empty()) continue;
        if (lane.fifo.front().enqueue_cycle >= cycle_) continue;
        InFlight inf;
        inf.req = lane.fifo.front();
        inf.lane = l;
        inf.last_busy_cycle =
            cycle_ + static_cast<std::uint64_t>(opt_.phase2_latency) - 1;
        lane.fifo.pop_front();
        inflight_ = inf;
        issue_log_.push_back({cycle_, l});
        return;  // at most one issue per cycle; lane A has priority
    }
}

void Engine::apply_gating(int source_lane, std::uint64_t resume_off) {
    const Lane& src = lanes_[source_lane];
    std::uint64_t skip =
        resume_off > src.next_off ? resume_off - src.next_off : 0;
    for (Lane& lane : lanes_) {
        if (!lane.active) continue;
        for (StageReg& reg : lane.regs) reg.valid = false;
        stats_.flushed_requests += lane.fifo.size();
        lane.fifo.clear();
        lane.gate_resume = std::max(lane.gate_resume, lane.next_off + skip);
    }
}

void Engine::complete_search() {
    const Phase2Request& req = inflight_->req;
    Lane& lane = lanes_[inflight_->lane];
    const int w = image_.config.w;
    std::vector<Code11> window(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i)
        window[static_cast<std::size_t>(i)] =
            code_at(lane, req.window_start + static_cast<std::uint64_t>(i));

    const CamArray& cam = bank_cam_[static_cast<std::size_t>(req.range.target)];
    auto [matched, act] =
        cam.search(EnableRange{req.range.dn, req.range.up}, window, Port::A);
    Activity charged = charge(act, cam);
    ++stats_.phase2_searches;
    stats_.sl_bits_driven += static_cast<std::uint64_t>(w) * kCode11Bits;

    std::uint64_t max_suffix = 0;
    for (int row : matched) {
        const BankRow& payload =
            bank_sram_[static_cast<std::size_t>(req.range.target)].read(row, charged);
        // A row whose stored suffix ends in trailing wildcards can match a
        // window that runs past the packet; the stored length rejects it.
        if (req.window_start + payload.suffix_len > lane.stream.size()) continue;
        events_.push_back({inflight_->lane, payload.sub_id, req.start,
                           req.window_start + payload.suffix_len - 1, cycle_});
        max_suffix = std::max<std::uint64_t>(max_suffix, payload.suffix_len);
    }
    stats_.phase2.add(charged);

    if (opt_.clock_gating && max_suffix > 0)
        apply_gating(inflight_->lane, req.window_start + max_suffix);
    inflight_.reset();
}

bool Engine::step() {
    bool have_input = false;
    bool have_state = inflight_.has_value();
    for (const Lane& lane : lanes_) {
        if (!lane.active) continue;
        if (lane.next_off < lane.stream.size()) have_input = true;
        if (!lane.fifo.empty()) have_state = true;
        for (const StageReg& reg : lane.regs) have_state |= reg.valid;
    }
    if (!have_input && !have_state) return false;

    arbitrate();
    bool phase2_busy_now = inflight_.has_value();
    if (phase2_busy_now) ++stats_.phase2_busy_cycles;

    bool stalled = false;
    for (const Lane& lane : lanes_)
        if (lane.active &&
            static_cast<int>(lane.fifo.size()) >= opt_.queue_depth &&
            opt_.congestion == CongestionPolicy::Stall)
            stalled = true;

    if (have_input) {
        ++stats_.input_cycles;
        if (stalled) ++stats_.stall_cycles;
    }

    std::uint64_t enabled_this_cycle = 0;
    bool stage1_active = false;
    std::vector<int> pes_active;
    bool gated_this_cycle = false;

    for (int l = 0; l < 2; ++l) {
        Lane& lane = lanes_[l];
        if (!lane.active) continue;
        if (lane.next_off >= lane.stream.size()) {
            // No byte to extend a prefix with: in-flight candidates die.
            for (StageReg& reg : lane.regs) reg.valid = false;
            continue;
        }
        if (stalled) continue;
        std::uint64_t p = lane.next_off++;
        ++stats_.bytes_consumed;
        if (p < lane.gate_resume) {
            ++stats_.gated_bytes;
            gated_this_cycle = true;
            continue;
        }
        std::uint8_t byte = lane.stream[p];
        Code11 code = book_.code(byte);

        // Deeper stages first so a hit installs into a register that was
        // already consumed this cycle.
        for (int idx = image_.config.depth - 2; idx >= 0; --idx) {
            StageReg reg = lane.regs[static_cast<std::size_t>(idx)];
            lane.regs[static_cast<std::size_t>(idx)].valid = false;
            if (!reg.valid) continue;
            int pe = reg.range.target;
            const CamArray& cam = pe_cam_[static_cast<std::size_t>(pe)];
            auto [matched, act] = cam.search(EnableRange{reg.range.dn, reg.range.up},
                                             {code}, l == 0 ? Port::A : Port::B);
            Activity charged = charge(act, cam);
            ++stats_.phase1_searches_port[l];
            stats_.sl_bits_driven += kCode11Bits;
            enabled_this_cycle += charged.enabled_rows;
            pes_active.push_back(pe);
            if (!matched.empty()) {
                const SramEntry& entry =
                    pe_sram_[static_cast<std::size_t>(pe)].read(matched[0], charged);
                dispatch(lane, l, entry, reg.start, p);
            }
            stats_.pe[static_cast<std::size_t>(pe)].add(charged);
        }

        // Stage 1: direct index, a new candidate at every offset.
        Activity s1;
        const SramEntry& entry = stage1_sram_.read(byte, s1);
        ++stats_.stage1_lookups;
        stats_.stage1_sram_bits += s1.sram_bits_read;
        stage1_active = true;
        if (entry.to_pe || entry.terminal_sub) dispatch(lane, l, entry, p, p);
    }
    if (gated_this_cycle) ++stats_.gated_cycles;

    if (inflight_ && cycle_ == inflight_->last_busy_cycle) {
        enabled_this_cycle += opt_.energy_full_rows
                                  ? static_cast<std::uint64_t>(image_.config.bank_rows)
                                  : static_cast<std::uint64_t>(
                                        inflight_->req.range.rows());
        complete_search();
    }

    std::sort(pes_active.begin(), pes_active.end());
    pes_active.erase(std::unique(pes_active.begin(), pes_active.end()),
                     pes_active.end());
    stats_.active_block_cycles += (stage1_active ? 1 : 0) + pes_active.size() +
                                  (phase2_busy_now ? 1 : 0);
    stats_.gated_row_cycles +=
        total_rows_ > enabled_this_cycle ? total_rows_ - enabled_this_cycle : 0;

    ++cycle_;
    ++stats_.cycles;
    return true;
}

RunResult Engine::run(std::span<const std::uint8_t> stream_a,
                      std::span<const std::uint8_t> stream_b) {
    attach(stream_a, stream_b);
    while (step()) {
    }
    RunResult out;
    out.events = events_;
    out.stats = stats_;
    out.issue_log = issue_log_;
    return out;
}

std::string events_to_csv(const std::vector<MatchEvent>& events) {
    std::string out = "cycle,lane,sub_pattern_id,start,end\n";
    for (const MatchEvent& e : events) {
        out += std::to_string(e.cycle);
        out += e.lane == 0 ? ",A," : ",B,";
        out += std::to_string(e.sub_id) + "," + std::to_string(e.start) + "," +
               std::to_string(e.end) + "\n";
    }
    return out;
}

void CycleStats::merge(const CycleStats& other) {
    cycles += other.cycles;
    input_cycles += other.input_cycles;
    bytes_consumed += other.bytes_consumed;
    stage1_lookups += other.stage1_lookups;
    stage1_sram_bits += other.stage1_sram_bits;
    if (pe.size() < other.pe.size()) pe.resize(other.pe.size());
    for (std::size_t i = 0; i < other.pe.size(); ++i) {
        pe[i].searches += other.pe[i].searches;
        pe[i].enabled_rows += other.pe[i].enabled_rows;
        pe[i].searched_bits += other.pe[i].searched_bits;
        pe[i].l1_segments += other.pe[i].l1_segments;
        pe[i].sram_bits_read += other.pe[i].sram_bits_read;
    }
    phase1_searches_port[0] += other.phase1_searches_port[0];
    phase1_searches_port[1] += other.phase1_searches_port[1];
    phase2.searches += other.phase2.searches;
    phase2.enabled_rows += other.phase2.enabled_rows;
    phase2.searched_bits += other.phase2.searched_bits;
    phase2.l1_segments += other.phase2.l1_segments;
    phase2.sram_bits_read += other.phase2.sram_bits_read;
    phase2_searches += other.phase2_searches;
    phase2_busy_cycles += other.phase2_busy_cycles;
    sl_bits_driven += other.sl_bits_driven;
    router_routes += other.router_routes;
    gated_cycles += other.gated_cycles;
    gated_bytes += other.gated_bytes;
    dropped_requests += other.dropped_requests;
    flushed_requests += other.flushed_requests;
    stall_cycles += other.stall_cycles;
    active_block_cycles += other.active_block_cycles;
    gated_row_cycles += other.gated_row_cycles;
}

std::string CycleStats::to_json() const {
    nlohmann::json j;
    j["cycles"] = cycles;
    j["input_cycles"] = input_cycles;
    j["bytes_consumed"] = bytes_consumed;
    j["stage1_lookups"] = stage1_lookups;
    j["stage1_sram_bits"] = stage1_sram_bits;
    j["phase1_searches_port_a"] = phase1_searches_port[0];
    j["phase1_searches_port_b"] = phase1_searches_port[1];
    nlohmann::json jpe = nlohmann::json::array();
    for (const BlockActivity& b : pe)
        jpe.push_back({{"searches", b.searches},
                       {"enabled_rows", b.enabled_rows},
                       {"searched_bits", b.searched_bits},
                       {"l1_segments", b.l1_segments},
                       {"sram_bits_read", b.sram_bits_read}});
    j["pes"] = std::move(jpe);
    j["phase2"] = {{"searches", phase2.searches},
                   {"enabled_rows", phase2.enabled_rows},
                   {"searched_bits", phase2.searched_bits},
                   {"l1_segments", phase2.l1_segments},
                   {"sram_bits_read", phase2.sram_bits_read}};
    j["phase2_searches"] = phase2_searches;
    j["phase2_busy_cycles"] = phase2_busy_cycles;
    j["sl_bits_driven"] = sl_bits_driven;
    j["router_routes"] = router_routes;
    j["gated_cycles"] = gated_cycles;
    j["gated_bytes"] = gated_bytes;
    j["dropped_requests"] = dropped_requests;
    j["flushed_requests"] = flushed_requests;
    j["stall_cycles"] = stall_cycles;
    j["active_block_cycles"] = active_block_cycles;
    j["gated_row_cycles"] = gated_row_cycles;
    return j.dump(2);
}

}  // namespace camnids
