#ifndef CAMNIDS_METRICS_HPP
#define CAMNIDS_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>

#include "camnids/compiler.hpp"
#include "camnids/engine.hpp"

namespace camnids {

/// Relative energy weights for the activation-count model. These are model
/// assumptions, not measured values; every report embeds the table it used.
struct CoefficientTable {
    double e_ml_per_bit = 1.0;    // match-line precharge per enabled row-bit
    double e_sl_per_bit = 0.5;    // search-line drive per driven bit
    double e_sram_per_bit = 0.8;
    double e_decoder_per_segment = 2.0;
    double e_router_per_route = 1.0;
    double e_clock_per_active_block_cycle = 0.2;
    double e_retention_per_gated_row_cycle = 0.001;

    void validate() const;  // all >= 0
    static CoefficientTable from_json(const std::string& text);
    std::string to_json() const;

    bool operator==(const CoefficientTable&) const = default;
};

struct EnergyReport {
    double ml = 0.0;
    double sl = 0.0;
    double sram = 0.0;
    double decoder = 0.0;
    double router = 0.0;
    double clock = 0.0;
    double retention = 0.0;
    double total = 0.0;
    double energy_per_byte = 0.0;
    double energy_per_char_per_search = 0.0;
    CoefficientTable coeffs;

    std::string to_json() const;
};

/// Linear combination of the run's activity counters and the coefficients.
/// pattern_bytes is the ruleset "Char" count used by the per-char metric.
EnergyReport accumulate(const CycleStats& stats, const CoefficientTable& coeffs,
                        std::uint64_t pattern_bytes);

/// Conventional CAM-AC baseline: one full-array search over every stored
/// transition per input byte; entry width = state-index bits + 11.
double model_conventional(const AcStats& stats, std::uint64_t stream_len,
                          const CoefficientTable& coeffs);

/// Replays the stream charging each search the full array (row enabling
/// disabled in the energy accounting only). Returns energy per byte.
double model_no_row_enable(const TableImage& image,
                           std::span<const std::uint8_t> stream,
                           const CoefficientTable& coeffs);

struct MemoryReport {
    double cam_bytes_per_char = 0.0;   // used rows
    double sram_bytes_per_char = 0.0;  // used rows
    double cam_bytes_per_char_provisioned = 0.0;
    double sram_bytes_per_char_provisioned = 0.0;
    std::uint64_t phase1_rows_used = 0;
    std::uint64_t phase2_rows_used = 0;
    std::uint64_t pattern_bytes = 0;
    bool defined = false;  // false for an empty ruleset

    std::string to_json() const;
};

MemoryReport memory_report(const TableImage& image);

}  // namespace camnids

#endif
