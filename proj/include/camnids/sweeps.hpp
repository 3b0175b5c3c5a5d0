#ifndef CAMNIDS_SWEEPS_HPP
#define CAMNIDS_SWEEPS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "camnids/metrics.hpp"
#include "camnids/oracle.hpp"
#include "camnids/phase3.hpp"

namespace camnids {

/// Full toolchain run over one or two raw streams: engine, Phase-3, energy.
struct PipelineResult {
    RunResult run;
    std::vector<RuleHit> rule_hits;
    EnergyReport energy;
};

PipelineResult run_pipeline(const TableImage& image, const RunOptions& opt,
                            std::span<const std::uint8_t> stream_a,
                            std::span<const std::uint8_t> stream_b,
                            const CoefficientTable& coeffs);

/// Compares a run against the brute-force oracles (oracle_match or
/// oracle_skip per gating flag, plus oracle_rules). Returns a description
/// of the first difference, or nullopt when everything agrees.
std::optional<std::string> oracle_check(const TableImage& image,
                                        const RunOptions& opt,
                                        std::span<const std::uint8_t> stream_a,
                                        std::span<const std::uint8_t> stream_b,
                                        const PipelineResult& result);

/// Energy scaling versus ruleset size for the three designs. CSV columns:
/// size,design,energy_per_byte,energy_per_char_per_search.
std::string sweep_rulesize(std::uint64_t seed, const std::vector<int>& sizes,
                           const HwConfig& cfg, const CoefficientTable& coeffs);

/// Gating ON/OFF energy versus traffic hit rate. CSV columns:
/// hit_rate,gating,energy_per_byte,gated_fraction.
std::string sweep_hitrate(std::uint64_t seed, const std::vector<double>& rates,
                          const HwConfig& cfg, const CoefficientTable& coeffs);

/// Energy versus Phase-1 depth at several hit rates. CSV columns:
/// depth,hit_rate,energy_per_byte.
std::string sweep_stages(std::uint64_t seed, const std::vector<int>& depths,
                         const std::vector<double>& rates, const HwConfig& cfg,
                         const CoefficientTable& coeffs);

}  // namespace camnids

#endif
