#include "camnids.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "camnids/compiler.hpp"
#include "camnids/metrics.hpp"
#include "camnids/oracle.hpp"
#include "camnids/phase3.hpp"
#include "camnids/rulespec.hpp"
#include "camnids/sweeps.hpp"

using namespace camnids;

struct camnids_ruleset {
    RuleSet rs;
};

struct camnids_image {
    TableImage img;
};

struct camnids_result {
    std::vector<MatchEvent> events;
    std::vector<RuleHit> rule_hits;
    CycleStats stats;
    EnergyReport energy;
};

namespace {

thread_local std::string g_last_error;

camnids_status set_error(camnids_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

camnids_status status_of(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Parse:
        case ErrorKind::Data:
            return CAMNIDS_ERR_DATA;
        case ErrorKind::Capacity:
            return CAMNIDS_ERR_CAPACITY;
        case ErrorKind::Io:
            return CAMNIDS_ERR_IO;
        case ErrorKind::Invalid:
            return CAMNIDS_ERR_USAGE;
    }
    return CAMNIDS_ERR_DATA;
}

template <typename Fn>
camnids_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return set_error(status_of(e), e.what());
    } catch (const std::exception& e) {
        return set_error(CAMNIDS_ERR_DATA, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

camnids_status need(bool ok, const char* what) {
    if (ok) return CAMNIDS_OK;
    return set_error(CAMNIDS_ERR_USAGE, std::string("missing argument: ") + what);
}

HwConfig config_of(const char* config_json) {
    return config_json && *config_json ? hwconfig_from_json(config_json)
                                       : HwConfig{};
}

CoefficientTable coeffs_of(const char* coeffs_json) {
    return coeffs_json && *coeffs_json ? CoefficientTable::from_json(coeffs_json)
                                       : CoefficientTable{};
}

RunOptions native_options(const camnids_run_options* opt) {
    RunOptions o;
    if (!opt) return o;
    if (opt->lanes != 1 && opt->lanes != 2)
        fail(ErrorKind::Invalid, "run options: lanes must be 1 or 2");
    o.dual_port = opt->lanes == 2;
    o.clock_gating = opt->clock_gating != 0;
    o.congestion = opt->congestion_drop ? CongestionPolicy::DropCount
                                        : CongestionPolicy::Stall;
    o.queue_depth = opt->queue_depth;
    o.phase2_latency = opt->phase2_latency;
    return o;
}

camnids_status run_impl(const camnids_image* img, const uint8_t* stream_a,
                        size_t len_a, const uint8_t* stream_b, size_t len_b,
                        const camnids_run_options* opt, const char* coeffs_json,
                        camnids_result** out) {
    RunOptions o = native_options(opt);
    CoefficientTable coeffs = coeffs_of(coeffs_json);
    std::span<const std::uint8_t> a{stream_a, len_a};
    std::span<const std::uint8_t> b;
    if (o.dual_port)
        b = stream_b ? std::span<const std::uint8_t>{stream_b, len_b} : a;
    PipelineResult res = run_pipeline(img->img, o, a, b, coeffs);
    auto* handle = new camnids_result{res.run.events, res.rule_hits,
                                      res.run.stats, res.energy};
    *out = handle;
    if (opt && opt->oracle_check) {
        if (auto diff = oracle_check(img->img, o, a, b, res))
            return set_error(CAMNIDS_ERR_ORACLE_MISMATCH, *diff);
    }
    return CAMNIDS_OK;
}

}  // namespace

extern "C" {

const char* camnids_last_error(void) { return g_last_error.c_str(); }

const char* camnids_version(void) { return "0.1.0"; }

void camnids_string_free(char* s) { std::free(s); }

void camnids_buffer_free(uint8_t* p) { std::free(p); }

camnids_status camnids_ruleset_parse(const char* text, camnids_ruleset** out) {
    if (auto s = need(text && out, "text/out")) return s;
    return guarded([&] {
        *out = new camnids_ruleset{parse_rules(text)};
        return CAMNIDS_OK;
    });
}

camnids_status camnids_ruleset_load(const char* path, camnids_ruleset** out) {
    if (auto s = need(path && out, "path/out")) return s;
    return guarded([&] {
        std::ifstream f(path, std::ios::binary);
        if (!f) fail(ErrorKind::Io, std::string("cannot open ") + path);
        std::ostringstream buf;
        buf << f.rdbuf();
        *out = new camnids_ruleset{parse_rules(buf.str())};
        return CAMNIDS_OK;
    });
}

camnids_status camnids_ruleset_generate(uint64_t seed, uint32_t n_patterns,
                                        uint32_t len_min, uint32_t len_max,
                                        double wildcard_frac,
                                        double multi_rule_frac,
                                        const char* config_json,
                                        camnids_ruleset** out) {
    if (auto s = need(out != nullptr, "out")) return s;
    return guarded([&] {
        GenRulesParams p;
        p.seed = seed;
        p.n_patterns = n_patterns;
        p.len_min = len_min;
        p.len_max = len_max;
        p.wildcard_frac = wildcard_frac;
        p.multi_rule_frac = multi_rule_frac;
        *out = new camnids_ruleset{gen_ruleset(p, config_of(config_json))};
        return CAMNIDS_OK;
    });
}

camnids_status camnids_ruleset_print(const camnids_ruleset* rs, char** out_text) {
    if (auto s = need(rs && out_text, "rs/out_text")) return s;
    return guarded([&] {
        *out_text = dup_string(print_rules(rs->rs));
        return CAMNIDS_OK;
    });
}

size_t camnids_ruleset_pattern_count(const camnids_ruleset* rs) {
    return rs ? rs->rs.patterns.size() : 0;
}

size_t camnids_ruleset_rule_count(const camnids_ruleset* rs) {
    return rs ? rs->rs.rules.size() : 0;
}

void camnids_ruleset_free(camnids_ruleset* rs) { delete rs; }

camnids_status camnids_gen_traffic(const camnids_ruleset* rs, uint64_t length,
                                   double hit_rate, uint64_t seed,
                                   uint8_t** out_stream, size_t* out_len,
                                   char** out_truth_csv) {
    if (auto s = need(rs && out_stream && out_len && out_truth_csv, "arguments"))
        return s;
    return guarded([&] {
        Traffic t = gen_traffic(TrafficSpec{length, hit_rate, seed}, rs->rs);
        *out_len = t.stream.size();
        *out_stream = static_cast<uint8_t*>(std::malloc(std::max<size_t>(1, *out_len)));
        std::memcpy(*out_stream, t.stream.data(), t.stream.size());
        *out_truth_csv = dup_string(truth_to_csv(t.truth));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_compile(const camnids_ruleset* rs, const char* config_json,
                               camnids_image** out) {
    if (auto s = need(rs && out, "rs/out")) return s;
    return guarded([&] {
        *out = new camnids_image{compile(rs->rs, config_of(config_json))};
        return CAMNIDS_OK;
    });
}

camnids_status camnids_image_write(const camnids_image* img, const char* path) {
    if (auto s = need(img && path, "img/path")) return s;
    return guarded([&] {
        write_image(img->img, path);
        return CAMNIDS_OK;
    });
}

camnids_status camnids_image_read(const char* path, camnids_image** out) {
    if (auto s = need(path && out, "path/out")) return s;
    return guarded([&] {
        *out = new camnids_image{read_image(path)};
        return CAMNIDS_OK;
    });
}

camnids_status camnids_image_dump(const camnids_image* img, char** out_text) {
    if (auto s = need(img && out_text, "img/out_text")) return s;
    return guarded([&] {
        *out_text = dup_string(dump_image(img->img));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_image_memory_report(const camnids_image* img,
                                           char** out_json) {
    if (auto s = need(img && out_json, "img/out_json")) return s;
    return guarded([&] {
        *out_json = dup_string(memory_report(img->img).to_json());
        return CAMNIDS_OK;
    });
}

void camnids_image_free(camnids_image* img) { delete img; }

camnids_status camnids_conventional_stats(const camnids_ruleset* rs,
                                          camnids_ac_stats* out) {
    if (auto s = need(rs && out, "rs/out")) return s;
    return guarded([&] {
        AcStats st = build_conventional_ac(rs->rs);
        *out = {st.n_states, st.n_forward, st.n_backward,
                st.skipped_wildcard_patterns};
        return CAMNIDS_OK;
    });
}

camnids_status camnids_pipelined_stats(const camnids_ruleset* rs,
                                       const char* config_json,
                                       camnids_ac_stats* out) {
    if (auto s = need(rs && out, "rs/out")) return s;
    return guarded([&] {
        auto [trie, st] = trie_of_image_inputs(rs->rs, config_of(config_json));
        *out = {st.n_states, st.n_forward, st.n_backward,
                st.skipped_wildcard_patterns};
        return CAMNIDS_OK;
    });
}

void camnids_run_options_init(camnids_run_options* opt) {
    if (!opt) return;
    opt->lanes = 1;
    opt->clock_gating = 1;
    opt->congestion_drop = 0;
    opt->queue_depth = 4;
    opt->phase2_latency = 2;
    opt->oracle_check = 0;
}

camnids_status camnids_run(const camnids_image* img, const uint8_t* stream_a,
                           size_t len_a, const uint8_t* stream_b, size_t len_b,
                           const camnids_run_options* opt,
                           const char* coeffs_json, camnids_result** out) {
    if (auto s = need(img && stream_a && out, "img/stream/out")) return s;
    if (len_a == 0) return set_error(CAMNIDS_ERR_USAGE, "empty stream");
    return guarded([&] {
        return run_impl(img, stream_a, len_a, stream_b, len_b, opt, coeffs_json,
                        out);
    });
}

camnids_status camnids_run_packets(const camnids_image* img, const uint8_t* data,
                                   size_t len, const camnids_run_options* opt,
                                   const char* coeffs_json,
                                   camnids_result** out) {
    if (auto s = need(img && data && out, "img/data/out")) return s;
    return guarded([&] {
        RunOptions o = native_options(opt);
        CoefficientTable coeffs = coeffs_of(coeffs_json);
        auto total = std::make_unique<camnids_result>();
        std::uint64_t cycle_base = 0;
        size_t pos = 0;
        bool any = false;
        while (pos < len) {
            if (pos + 4 > len)
                fail(ErrorKind::Data, "packet container: truncated length field");
            std::uint32_t plen = static_cast<std::uint32_t>(data[pos]) |
                                 static_cast<std::uint32_t>(data[pos + 1]) << 8 |
                                 static_cast<std::uint32_t>(data[pos + 2]) << 16 |
                                 static_cast<std::uint32_t>(data[pos + 3]) << 24;
            pos += 4;
            if (pos + plen > len)
                fail(ErrorKind::Data, "packet container: truncated packet");
            if (plen == 0) continue;
            any = true;
            std::span<const std::uint8_t> pkt{data + pos, plen};
            pos += plen;
            // Engine and Phase-3 state reset between packets; only the
            // counters and the cycle base carry across.
            PipelineResult res = run_pipeline(
                img->img, o, pkt, o.dual_port ? pkt : std::span<const std::uint8_t>{},
                coeffs);
            for (MatchEvent e : res.run.events) {
                e.cycle += cycle_base;
                total->events.push_back(e);
            }
            total->rule_hits.insert(total->rule_hits.end(), res.rule_hits.begin(),
                                    res.rule_hits.end());
            total->stats.merge(res.run.stats);
            cycle_base += res.run.stats.cycles;
        }
        if (!any) fail(ErrorKind::Data, "packet container: no packets");
        total->energy =
            accumulate(total->stats, coeffs, img->img.ruleset.total_pattern_bytes());
        *out = total.release();
        return CAMNIDS_OK;
    });
}

camnids_status camnids_result_events_csv(const camnids_result* res, char** out) {
    if (auto s = need(res && out, "res/out")) return s;
    return guarded([&] {
        *out = dup_string(events_to_csv(res->events));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_result_rule_hits_csv(const camnids_result* res, char** out) {
    if (auto s = need(res && out, "res/out")) return s;
    return guarded([&] {
        *out = dup_string(rule_hits_to_csv(res->rule_hits));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_result_stats_json(const camnids_result* res, char** out) {
    if (auto s = need(res && out, "res/out")) return s;
    return guarded([&] {
        *out = dup_string(res->stats.to_json());
        return CAMNIDS_OK;
    });
}

camnids_status camnids_result_energy_json(const camnids_result* res, char** out) {
    if (auto s = need(res && out, "res/out")) return s;
    return guarded([&] {
        *out = dup_string(res->energy.to_json());
        return CAMNIDS_OK;
    });
}

void camnids_result_free(camnids_result* res) { delete res; }

camnids_status camnids_sweep_rulesize(uint64_t seed, const int* sizes,
                                      size_t n_sizes, const char* config_json,
                                      const char* coeffs_json, char** out_csv) {
    if (auto s = need(sizes && n_sizes && out_csv, "sizes/out")) return s;
    return guarded([&] {
        *out_csv = dup_string(sweep_rulesize(seed, {sizes, sizes + n_sizes},
                                             config_of(config_json),
                                             coeffs_of(coeffs_json)));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_sweep_hitrate(uint64_t seed, const double* rates,
                                     size_t n_rates, const char* config_json,
                                     const char* coeffs_json, char** out_csv) {
    if (auto s = need(rates && n_rates && out_csv, "rates/out")) return s;
    return guarded([&] {
        *out_csv = dup_string(sweep_hitrate(seed, {rates, rates + n_rates},
                                            config_of(config_json),
                                            coeffs_of(coeffs_json)));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_sweep_stages(uint64_t seed, const int* depths,
                                    size_t n_depths, const double* rates,
                                    size_t n_rates, const char* config_json,
                                    const char* coeffs_json, char** out_csv) {
    if (auto s = need(depths && n_depths && rates && n_rates && out_csv,
                      "depths/rates/out"))
        return s;
    return guarded([&] {
        *out_csv = dup_string(sweep_stages(
            seed, {depths, depths + n_depths}, {rates, rates + n_rates},
            config_of(config_json), coeffs_of(coeffs_json)));
        return CAMNIDS_OK;
    });
}

camnids_status camnids_codebook_csv(char** out) {
    if (auto s = need(out != nullptr, "out")) return s;
    return guarded([&] {
        *out = dup_string(Codebook::canonical().to_csv());
        return CAMNIDS_OK;
    });
}

int camnids_latency_cycles(int depth, int phase2_latency) {
    return depth + phase2_latency;
}

}  // extern "C"
