#include "camnids/sweeps.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace camnids {

namespace {

std::vector<OraclePattern> sub_oracle_patterns(const TableImage& image) {
    std::vector<OraclePattern> out;
    out.reserve(image.subs.size());
    for (const SubPattern& s : image.subs) out.push_back({s.id, s.full_bytes()});
    return out;
}

std::vector<RuleHit> phase3_for_lane(const TableImage& image,
                                     const std::vector<MatchEvent>& events,
                                     int lane) {
    RuleTable table = build_rule_table(image.ruleset, image.plan, image.subs);
    std::vector<MatchEvent> mine;
    for (const MatchEvent& e : events)
        if (e.lane == lane) mine.push_back(e);
    return run_phase3(table, std::move(mine));
}

}  // namespace

PipelineResult run_pipeline(const TableImage& image, const RunOptions& opt,
                            std::span<const std::uint8_t> stream_a,
                            std::span<const std::uint8_t> stream_b,
                            const CoefficientTable& coeffs) {
    PipelineResult out;
    Engine engine(image, opt);
    out.run = engine.run(stream_a, stream_b);
    out.rule_hits = phase3_for_lane(image, out.run.events, 0);
    if (opt.dual_port) {
        std::vector<RuleHit> b = phase3_for_lane(image, out.run.events, 1);
        out.rule_hits.insert(out.rule_hits.end(), b.begin(), b.end());
    }
    out.energy = accumulate(out.run.stats, coeffs,
                            image.ruleset.total_pattern_bytes());
    return out;
}

std::optional<std::string> oracle_check(const TableImage& image,
                                        const RunOptions& opt,
                                        std::span<const std::uint8_t> stream_a,
                                        std::span<const std::uint8_t> stream_b,
                                        const PipelineResult& result) {
    if (opt.clock_gating && opt.dual_port)
        fail(ErrorKind::Invalid,
             "oracle check: gating couples the lanes (a match on one lane "
             "flushes both), and the skip oracle is defined for a single "
             "stream; rerun with one lane or gating off");
    std::vector<OraclePattern> subs = sub_oracle_patterns(image);
    auto key = [](const Occurrence& o) { return std::tie(o.end, o.id, o.start); };

    for (int lane = 0; lane < (opt.dual_port ? 2 : 1); ++lane) {
        std::span<const std::uint8_t> stream = lane == 0 ? stream_a : stream_b;
        std::vector<Occurrence> expected =
            opt.clock_gating
                ? oracle_skip(subs, stream, image.config.depth, image.config.w,
                              opt.phase2_latency, opt.queue_depth)
                : oracle_match(subs, stream);
        std::vector<Occurrence> got;
        for (const MatchEvent& e : result.run.events)
            if (e.lane == lane) got.push_back({e.sub_id, e.start, e.end});
        std::sort(got.begin(), got.end(),
                  [&](const Occurrence& a, const Occurrence& b) {
                      return key(a) < key(b);
                  });
        std::sort(expected.begin(), expected.end(),
                  [&](const Occurrence& a, const Occurrence& b) {
                      return key(a) < key(b);
                  });
        if (got != expected) {
            std::size_t i = 0;
            while (i < got.size() && i < expected.size() && got[i] == expected[i]) ++i;
            std::ostringstream msg;
            msg << "lane " << (lane == 0 ? 'A' : 'B') << ": event sets differ at #"
                << i << ": engine ";
            if (i < got.size())
                msg << "(sub " << got[i].id << " @" << got[i].start << ".."
                    << got[i].end << ")";
            else
                msg << "(none)";
            msg << " vs oracle ";
            if (i < expected.size())
                msg << "(sub " << expected[i].id << " @" << expected[i].start << ".."
                    << expected[i].end << ")";
            else
                msg << "(none)";
            return msg.str();
        }

        if (!opt.clock_gating) {
            std::vector<OracleRuleHit> want = oracle_rules(image.ruleset, stream);
            std::vector<RuleHit> have = phase3_for_lane(image, result.run.events, lane);
            bool same = want.size() == have.size();
            for (std::size_t i = 0; same && i < want.size(); ++i)
                same = want[i].rule_id == have[i].rule_id && want[i].end == have[i].end;
            if (!same) {
                std::ostringstream msg;
                msg << "lane " << (lane == 0 ? 'A' : 'B') << ": rule hits differ ("
                    << have.size() << " vs oracle " << want.size() << ")";
                return msg.str();
            }
        }
    }
    return std::nullopt;
}

namespace {

struct DeskParams {
    GenRulesParams rules;
    TrafficSpec traffic;
};

DeskParams desk_params(std::uint64_t seed, int n_patterns, double hit_rate) {
    DeskParams p;
    p.rules.seed = seed;
    p.rules.n_patterns = static_cast<std::uint32_t>(n_patterns);
    p.rules.len_min = 4;
    p.rules.len_max = 24;
    p.rules.wildcard_frac = 0.1;
    p.rules.multi_rule_frac = 0.2;
    p.traffic.length = 1 << 16;
    p.traffic.hit_rate = hit_rate;
    p.traffic.seed = seed * 7919 + 17;
    return p;
}

}  // namespace

std::string sweep_rulesize(std::uint64_t seed, const std::vector<int>& sizes,
                           const HwConfig& cfg, const CoefficientTable& coeffs) {
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            fail(ErrorKind::Invalid, "sweep rulesize: sizes must ascend");

    struct Row {
        int size;
        double conv, conv_cps, nre, nre_cps, full, full_cps;
    };
    auto point = [&](int size) {
        DeskParams p = desk_params(seed, size, 0.1);
        RuleSet rs = gen_ruleset(p.rules, cfg);
        TableImage image = compile(rs, cfg);
        Traffic traffic = gen_traffic(p.traffic, rs);
        std::uint64_t chars = rs.total_pattern_bytes();

        AcStats conv = build_conventional_ac(rs);
        double conv_pb = model_conventional(conv, traffic.stream.size(), coeffs);
        double nre_pb = model_no_row_enable(image, traffic.stream, coeffs);

        RunOptions opt;  // gating on, stall: the complete design
        Engine engine(image, opt);
        RunResult run = engine.run(traffic.stream);
        EnergyReport full = accumulate(run.stats, coeffs, chars);

        Row row;
        row.size = size;
        row.conv = conv_pb;
        row.conv_cps = chars ? conv_pb / static_cast<double>(chars) : 0.0;
        row.nre = nre_pb;
        row.nre_cps = chars ? nre_pb / static_cast<double>(chars) : 0.0;
        row.full = full.energy_per_byte;
        row.full_cps = full.energy_per_char_per_search;
        return row;
    };

    std::vector<std::future<Row>> jobs;
    for (int size : sizes)
        jobs.push_back(std::async(std::launch::async, point, size));
    std::ostringstream csv;
    csv << "size,design,energy_per_byte,energy_per_char_per_search\n";
    for (auto& job : jobs) {
        Row r = job.get();
        csv << r.size << ",conventional," << r.conv << "," << r.conv_cps << "\n";
        csv << r.size << ",no_row_enable," << r.nre << "," << r.nre_cps << "\n";
        csv << r.size << ",full," << r.full << "," << r.full_cps << "\n";
    }
    return csv.str();
}

std::string sweep_hitrate(std::uint64_t seed, const std::vector<double>& rates,
                          const HwConfig& cfg, const CoefficientTable& coeffs) {
    DeskParams base = desk_params(seed, 240, 0.0);
    RuleSet rs = gen_ruleset(base.rules, cfg);
    TableImage image = compile(rs, cfg);
    std::uint64_t chars = rs.total_pattern_bytes();

    struct Row {
        double rate, on_pb, off_pb, gated_frac;
    };
    auto point = [&](double rate) {
        TrafficSpec spec = base.traffic;
        spec.hit_rate = rate;
        Traffic traffic = gen_traffic(spec, rs);
        RunOptions on;
        RunOptions off;
        off.clock_gating = false;
        Engine e_on(image, on);
        RunResult r_on = e_on.run(traffic.stream);
        Engine e_off(image, off);
        RunResult r_off = e_off.run(traffic.stream);
        Row row;
        row.rate = rate;
        row.on_pb = accumulate(r_on.stats, coeffs, chars).energy_per_byte;
        row.off_pb = accumulate(r_off.stats, coeffs, chars).energy_per_byte;
        row.gated_frac = static_cast<double>(r_on.stats.gated_bytes) /
                         static_cast<double>(traffic.stream.size());
        return row;
    };

    std::vector<std::future<Row>> jobs;
    for (double rate : rates)
        jobs.push_back(std::async(std::launch::async, point, rate));
    std::ostringstream csv;
    csv << "hit_rate,gating,energy_per_byte,gated_fraction\n";
    for (auto& job : jobs) {
        Row r = job.get();
        csv << r.rate << ",on," << r.on_pb << "," << r.gated_frac << "\n";
        csv << r.rate << ",off," << r.off_pb << ",0\n";
    }
    return csv.str();
}

std::string sweep_stages(std::uint64_t seed, const std::vector<int>& depths,
                         const std::vector<double>& rates, const HwConfig& cfg,
                         const CoefficientTable& coeffs) {
    if (depths.empty()) fail(ErrorKind::Invalid, "sweep stages: no depths");
    // One literal ruleset shared by all depths keeps the points comparable;
    // wildcards would pin patterns to one split geometry.
    GenRulesParams params;
    params.seed = seed;
    params.n_patterns = 120;
    params.len_min = 4;
    params.len_max = 20;
    params.wildcard_frac = 0.0;
    params.multi_rule_frac = 0.1;
    HwConfig gen_cfg = cfg;
    gen_cfg.depth = *std::max_element(depths.begin(), depths.end());
    gen_cfg.stage_assignment.clear();
    RuleSet rs = gen_ruleset(params, gen_cfg);
    std::uint64_t chars = rs.total_pattern_bytes();

    struct Row {
        int depth;
        double rate, pb;
    };
    auto point = [&](int depth, double rate) {
        HwConfig c = cfg;
        c.depth = depth;
        c.stage_assignment.clear();
        TableImage image;
        try {
            image = compile(rs, c);
        } catch (const Error& e) {
            fail(e.kind(), "sweep stages: depth " + std::to_string(depth) + ": " +
                               e.what());
        }
        TrafficSpec spec;
        spec.length = 1 << 16;
        spec.hit_rate = rate;
        spec.seed = seed * 7919 + 17;
        Traffic traffic = gen_traffic(spec, rs);
        RunOptions opt;
        Engine engine(image, opt);
        RunResult run = engine.run(traffic.stream);
        Row row;
        row.depth = depth;
        row.rate = rate;
        row.pb = accumulate(run.stats, coeffs, chars).energy_per_byte;
        return row;
    };

    std::vector<std::future<Row>> jobs;
    for (int depth : depths)
        for (double rate : rates)
            jobs.push_back(std::async(std::launch::async, point, depth, rate));
    std::ostringstream csv;
    csv << "depth,hit_rate,energy_per_byte\n";
    for (auto& job : jobs) {
        Row r = job.get();
        csv << r.depth << "," << r.rate << "," << r.pb << "\n";
    }
    return csv.str();
}

}  // namespace camnids
