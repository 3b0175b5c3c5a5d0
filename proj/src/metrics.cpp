#include "camnids/metrics.hpp"

#include <cmath>

#include "json.hpp"

namespace camnids {

using nlohmann::json;

void CoefficientTable::validate() const {
    const double v[] = {e_ml_per_bit,          e_sl_per_bit,
                        e_sram_per_bit,        e_decoder_per_segment,
                        e_router_per_route,    e_clock_per_active_block_cycle,
                        e_retention_per_gated_row_cycle};
    for (double x : v)
        if (!(x >= 0.0)) fail(ErrorKind::Invalid, "coefficients must be >= 0");
}

CoefficientTable CoefficientTable::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("coefficients: ") + e.what());
    }
    CoefficientTable c;
    auto get = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    get("e_ml_per_bit", c.e_ml_per_bit);
    get("e_sl_per_bit", c.e_sl_per_bit);
    get("e_sram_per_bit", c.e_sram_per_bit);
    get("e_decoder_per_segment", c.e_decoder_per_segment);
    get("e_router_per_route", c.e_router_per_route);
    get("e_clock_per_active_block_cycle", c.e_clock_per_active_block_cycle);
    get("e_retention_per_gated_row_cycle", c.e_retention_per_gated_row_cycle);
    c.validate();
    return c;
}

std::string CoefficientTable::to_json() const {
    json j{{"e_ml_per_bit", e_ml_per_bit},
           {"e_sl_per_bit", e_sl_per_bit},
           {"e_sram_per_bit", e_sram_per_bit},
           {"e_decoder_per_segment", e_decoder_per_segment},
           {"e_router_per_route", e_router_per_route},
           {"e_clock_per_active_block_cycle", e_clock_per_active_block_cycle},
           {"e_retention_per_gated_row_cycle", e_retention_per_gated_row_cycle}};
    return j.dump(2);
}

EnergyReport accumulate(const CycleStats& stats, const CoefficientTable& coeffs,
                        std::uint64_t pattern_bytes) {
    coeffs.validate();
    EnergyReport r;
    r.coeffs = coeffs;

    std::uint64_t ml_bits = stats.phase2.searched_bits;
    std::uint64_t sram_bits = stats.stage1_sram_bits + stats.phase2.sram_bits_read;
    std::uint64_t segments = stats.phase2.l1_segments;
    for (const BlockActivity& b : stats.pe) {
        ml_bits += b.searched_bits;
        sram_bits += b.sram_bits_read;
        segments += b.l1_segments;
    }
    r.ml = static_cast<double>(ml_bits) * coeffs.e_ml_per_bit;
    r.sl = static_cast<double>(stats.sl_bits_driven) * coeffs.e_sl_per_bit;
    r.sram = static_cast<double>(sram_bits) * coeffs.e_sram_per_bit;
    r.decoder = static_cast<double>(segments) * coeffs.e_decoder_per_segment;
    r.router = static_cast<double>(stats.router_routes) * coeffs.e_router_per_route;
    r.clock = static_cast<double>(stats.active_block_cycles) *
              coeffs.e_clock_per_active_block_cycle;
    r.retention = static_cast<double>(stats.gated_row_cycles) *
                  coeffs.e_retention_per_gated_row_cycle;
    r.total = r.ml + r.sl + r.sram + r.decoder + r.router + r.clock + r.retention;
    r.energy_per_byte = stats.bytes_consumed
                            ? r.total / static_cast<double>(stats.bytes_consumed)
                            : 0.0;
    double per_search = stats.cycles ? r.total / static_cast<double>(stats.cycles) : 0.0;
    r.energy_per_char_per_search =
        pattern_bytes ? per_search / static_cast<double>(pattern_bytes) : 0.0;
    return r;
}

std::string EnergyReport::to_json() const {
    json j{{"ml", ml},
           {"sl", sl},
           {"sram", sram},
           {"decoder", decoder},
           {"router", router},
           {"clock", clock},
           {"retention", retention},
           {"total", total},
           {"energy_per_byte", energy_per_byte},
           {"energy_per_char_per_search", energy_per_char_per_search},
           {"coefficients", json::parse(coeffs.to_json())}};
    return j.dump(2);
}

double model_conventional(const AcStats& stats, std::uint64_t stream_len,
                          const CoefficientTable& coeffs) {
    coeffs.validate();
    if (stream_len == 0) return 0.0;
    std::uint64_t rows = stats.n_forward + stats.n_backward;
    int state_bits = 1;
    while ((1ull << state_bits) < std::max<std::uint64_t>(2, stats.n_states))
        ++state_bits;
    std::uint64_t width = static_cast<std::uint64_t>(state_bits) + kCode11Bits;

    // Every byte searches the whole transition table and reads one entry.
    double per_byte = static_cast<double>(rows * width) * coeffs.e_ml_per_bit +
                      static_cast<double>(width) * coeffs.e_sl_per_bit +
                      static_cast<double>(state_bits) * coeffs.e_sram_per_bit +
                      coeffs.e_clock_per_active_block_cycle;
    return per_byte;
}

double model_no_row_enable(const TableImage& image,
                           std::span<const std::uint8_t> stream,
                           const CoefficientTable& coeffs) {
    RunOptions opt;
    opt.clock_gating = false;
    opt.energy_full_rows = true;
    Engine engine(image, opt);
    RunResult res = engine.run(stream);
    EnergyReport rep =
        accumulate(res.stats, coeffs, image.ruleset.total_pattern_bytes());
    return rep.energy_per_byte;
}

MemoryReport memory_report(const TableImage& image) {
    MemoryReport r;
    r.phase1_rows_used = image.phase1_rows_used();
    r.phase2_rows_used = image.phase2_rows_used();
    r.pattern_bytes = image.ruleset.total_pattern_bytes();
    const HwConfig& c = image.config;
    const double wide_bits = static_cast<double>(c.w) * kCode11Bits;

    double cam_bits_used = static_cast<double>(r.phase1_rows_used) * kCode11Bits +
                           static_cast<double>(r.phase2_rows_used) * wide_bits;
    double cam_bits_cap =
        static_cast<double>(c.n_pes) * c.pe_rows * kCode11Bits +
        static_cast<double>(c.n_banks) * c.bank_rows * wide_bits;

    // SRAM payload widths mirror the engine's accounting.
    auto log2up = [](std::uint64_t n) {
        int b = 0;
        while ((1ull << b) < n) ++b;
        return b;
    };
    int pe_bits = log2up(static_cast<std::uint64_t>(c.n_pes));
    int row_bits = log2up(static_cast<std::uint64_t>(c.pe_rows));
    int bank_bits = log2up(static_cast<std::uint64_t>(c.n_banks));
    int brow_bits = log2up(static_cast<std::uint64_t>(c.bank_rows));
    int sub_bits = log2up(std::max<std::uint64_t>(2, image.subs.size()));
    int len_bits = log2up(static_cast<std::uint64_t>(c.w) + 1);
    double stage1_entry = 2.0 + pe_bits + 2 * row_bits + sub_bits;
    double pe_entry = 3.0 + pe_bits + 2 * row_bits + bank_bits + 2 * brow_bits + sub_bits;
    double p2_entry = static_cast<double>(sub_bits + len_bits);

    double sram_bits_used = 256.0 * stage1_entry +
                            static_cast<double>(r.phase1_rows_used) * pe_entry +
                            static_cast<double>(r.phase2_rows_used) * p2_entry;
    double sram_bits_cap = 256.0 * stage1_entry +
                           static_cast<double>(c.n_pes) * c.pe_rows * pe_entry +
                           static_cast<double>(c.n_banks) * c.bank_rows * p2_entry;

    if (r.pattern_bytes == 0) {
        r.defined = false;
        return r;
    }
    r.defined = true;
    double chars = static_cast<double>(r.pattern_bytes);
    r.cam_bytes_per_char = cam_bits_used / 8.0 / chars;
    r.sram_bytes_per_char = sram_bits_used / 8.0 / chars;
    r.cam_bytes_per_char_provisioned = cam_bits_cap / 8.0 / chars;
    r.sram_bytes_per_char_provisioned = sram_bits_cap / 8.0 / chars;
    return r;
}

std::string MemoryReport::to_json() const {
    json j{{"defined", defined},
           {"cam_bytes_per_char", cam_bytes_per_char},
           {"sram_bytes_per_char", sram_bytes_per_char},
           {"cam_bytes_per_char_provisioned", cam_bytes_per_char_provisioned},
           {"sram_bytes_per_char_provisioned", sram_bytes_per_char_provisioned},
           {"phase1_rows_used", phase1_rows_used},
           {"phase2_rows_used", phase2_rows_used},
           {"pattern_bytes", pattern_bytes}};
    return j.dump(2);
}

}  // namespace camnids
