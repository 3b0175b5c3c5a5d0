// camnids command-line front end. All functionality lives behind the C API
// in camnids.h; this file only parses flags, moves bytes between files and
// the library, and maps camnids_status to exit codes.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "camnids.h"
#include "json.hpp"

namespace {

int exit_code(camnids_status s) {
    switch (s) {
        case CAMNIDS_OK:
            return 0;
        case CAMNIDS_ERR_USAGE:
            return 1;
        case CAMNIDS_ERR_ORACLE_MISMATCH:
            return 3;
        default:
            return 2;  // data, io, capacity
    }
}

[[noreturn]] void die(camnids_status s) {
    std::cerr << "error: " << camnids_last_error() << "\n";
    std::exit(exit_code(s));
}

void check(camnids_status s) {
    if (s != CAMNIDS_OK) die(s);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot open " << path << "\n";
        std::exit(2);
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::string s = read_file(path);
    return {s.begin(), s.end()};
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << data)) {
        std::cerr << "error: cannot write " << path << "\n";
        std::exit(2);
    }
}

struct StringOut {
    char* s = nullptr;
    ~StringOut() { camnids_string_free(s); }
    char** slot() { return &s; }
    std::string str() const { return s ? s : ""; }
};

// "2:0-2,3:3-5,4:6-7" -> stage_assignment JSON
nlohmann::json parse_stages(const std::string& spec) {
    nlohmann::json out = nlohmann::json::object();
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) {
            std::cerr << "error: bad --stages item '" << item << "'\n";
            std::exit(1);
        }
        std::string stage = item.substr(0, colon);
        std::string range = item.substr(colon + 1);
        std::vector<int> pes;
        auto dash = range.find('-');
        try {
            if (dash == std::string::npos) {
                pes.push_back(std::stoi(range));
            } else {
                int lo = std::stoi(range.substr(0, dash));
                int hi = std::stoi(range.substr(dash + 1));
                for (int p = lo; p <= hi; ++p) pes.push_back(p);
            }
            out[std::to_string(std::stoi(stage))] = pes;
        } catch (const std::exception&) {
            std::cerr << "error: bad --stages item '" << item << "'\n";
            std::exit(1);
        }
    }
    return out;
}

// Config JSON assembled from --config / --depth / --stages.
std::string make_config(const std::string& config_path, int depth,
                        const std::string& stages) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        try {
            j = nlohmann::json::parse(read_file(config_path));
        } catch (const std::exception& e) {
            std::cerr << "error: config: " << e.what() << "\n";
            std::exit(2);
        }
    }
    if (depth > 0) j["depth"] = depth;
    if (!stages.empty()) j["stage_assignment"] = parse_stages(stages);
    return j.empty() ? std::string() : j.dump();
}

std::string load_coeffs(const std::string& path) {
    return path.empty() ? std::string() : read_file(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CAM-based NIDS pattern-matching toolchain"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, stages, coeffs_path, out_dir = ".";
    std::uint64_t seed = 1;
    int depth = 0;
    app.add_option("--config", config_path, "hardware config JSON file")
        ->expected(1);
    app.add_option("--depth", depth, "Phase-1 prefix depth override");
    app.add_option("--stages", stages, "stage assignment, e.g. 2:0-2,3:3-5,4:6-7");
    app.add_option("--coeffs", coeffs_path, "energy coefficient JSON file");
    app.add_option("--seed", seed, "PRNG seed");
    app.add_option("--out", out_dir, "output directory");

    // compile
    auto* c_compile = app.add_subcommand("compile", "compile rules to a table image");
    std::string rules_path, image_path = "image.json";
    c_compile->add_option("rules", rules_path, "rule file")->required();
    c_compile->add_option("--image", image_path, "output image path");

    // run
    auto* c_run = app.add_subcommand("run", "run streams through the engine");
    std::string run_image, stream_path, stream_b_path, packets_path;
    int lanes = 1, queue_depth = 4, phase2_latency = 2;
    bool no_gating = false, oracle = false;
    std::string congestion = "stall";
    c_run->add_option("--image", run_image, "table image")->required();
    c_run->add_option("--stream", stream_path, "raw payload stream (lane A)");
    c_run->add_option("--stream-b", stream_b_path, "raw payload stream (lane B)");
    c_run->add_option("--packets", packets_path,
                      "u32-LE length-framed multi-packet container");
    c_run->add_option("--lanes", lanes, "1 or 2")->check(CLI::Range(1, 2));
    c_run->add_flag("--no-gating", no_gating, "disable clock gating");
    c_run->add_option("--congestion", congestion, "stall|drop")
        ->check(CLI::IsMember({"stall", "drop"}));
    c_run->add_option("--queue-depth", queue_depth, "per-lane Phase-2 FIFO depth");
    c_run->add_option("--phase2-latency", phase2_latency, "Phase-2 search cycles");
    c_run->add_flag("--oracle-check", oracle,
                    "verify against the brute-force oracles");

    // gen
    auto* c_gen = app.add_subcommand("gen", "generate rules or traffic");
    auto* g_rules = c_gen->add_subcommand("rules", "generate a ruleset");
    std::uint32_t n_patterns = 240, len_min = 4, len_max = 24;
    double wildcard_frac = 0.1, multi_frac = 0.2;
    std::string gen_out = "rules.txt";
    g_rules->add_option("--n", n_patterns, "pattern count");
    g_rules->add_option("--len-min", len_min, "minimum pattern length");
    g_rules->add_option("--len-max", len_max, "maximum pattern length");
    g_rules->add_option("--wildcard-frac", wildcard_frac, "wildcard probability");
    g_rules->add_option("--multi-frac", multi_frac, "multi-pattern rule fraction");
    g_rules->add_option("--rules-out", gen_out, "output rule file");

    auto* g_traffic = c_gen->add_subcommand("traffic", "generate a stream");
    std::string traffic_rules, stream_out = "stream.bin", truth_out = "truth.csv";
    std::uint64_t length = 65536;
    double hit_rate = 0.5;
    g_traffic->add_option("--rules", traffic_rules, "rule file")->required();
    g_traffic->add_option("--len", length, "stream length in bytes");
    g_traffic->add_option("--hit-rate", hit_rate, "covered-byte fraction");
    g_traffic->add_option("--stream-out", stream_out, "output stream path");
    g_traffic->add_option("--truth-out", truth_out, "output truth CSV path");

    // sweep
    auto* c_sweep = app.add_subcommand("sweep", "parameter sweeps");
    auto* s_rulesize = c_sweep->add_subcommand("rulesize", "energy vs ruleset size");
    std::vector<int> sizes{30, 60, 120, 240};
    s_rulesize->add_option("--sizes", sizes, "ascending ruleset sizes");
    auto* s_hitrate = c_sweep->add_subcommand("hitrate", "energy vs hit rate");
    std::vector<double> rates{0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
    s_hitrate->add_option("--rates", rates, "hit rates");
    auto* s_stages = c_sweep->add_subcommand("stages", "energy vs Phase-1 depth");
    std::vector<int> depths{2, 3, 4};
    std::vector<double> stage_rates{0.1, 0.9};
    s_stages->add_option("--depths", depths, "Phase-1 depths");
    s_stages->add_option("--rates", stage_rates, "hit rates");
    std::string sweep_out;
    c_sweep->add_option("--csv", sweep_out, "write CSV here (default stdout)");

    // dump
    auto* c_dump = app.add_subcommand("dump", "pretty-print a table image");
    std::string dump_image_path;
    c_dump->add_option("--image", dump_image_path, "table image")->required();

    // codebook
    auto* c_book = app.add_subcommand("codebook", "dump the fixed-1s codebook CSV");
    std::string book_out;
    c_book->add_option("--csv", book_out, "write CSV here (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::string config_json = make_config(config_path, depth, stages);
    std::string coeffs_json = load_coeffs(coeffs_path);
    std::filesystem::create_directories(out_dir);

    if (*c_compile) {
        camnids_ruleset* rs = nullptr;
        check(camnids_ruleset_load(rules_path.c_str(), &rs));
        camnids_image* img = nullptr;
        camnids_status s = camnids_compile(
            rs, config_json.empty() ? nullptr : config_json.c_str(), &img);
        if (s != CAMNIDS_OK) {
            camnids_ruleset_free(rs);
            die(s);
        }
        std::string image_out =
            (std::filesystem::path(out_dir) / image_path).string();
        check(camnids_image_write(img, image_out.c_str()));

        camnids_ac_stats conv{}, pipe{};
        check(camnids_conventional_stats(rs, &conv));
        check(camnids_pipelined_stats(
            rs, config_json.empty() ? nullptr : config_json.c_str(), &pipe));
        StringOut mem;
        check(camnids_image_memory_report(img, mem.slot()));
        std::cout << "image: " << image_out << "\n"
                  << "patterns: " << camnids_ruleset_pattern_count(rs)
                  << " rules: " << camnids_ruleset_rule_count(rs) << "\n"
                  << "pipelined trie: states " << pipe.n_states << ", forward "
                  << pipe.n_forward << ", backward " << pipe.n_backward << "\n"
                  << "conventional automaton: states " << conv.n_states
                  << ", forward " << conv.n_forward << ", backward "
                  << conv.n_backward;
        if (conv.skipped_wildcard_patterns)
            std::cout << " (skipped " << conv.skipped_wildcard_patterns
                      << " wildcard patterns)";
        std::cout << "\nmemory report: " << mem.str() << "\n";
        camnids_image_free(img);
        camnids_ruleset_free(rs);
        return 0;
    }

    if (*c_run) {
        if (stream_path.empty() == packets_path.empty()) {
            std::cerr << "error: run needs exactly one of --stream / --packets\n";
            return 1;
        }
        camnids_image* img = nullptr;
        check(camnids_image_read(run_image.c_str(), &img));
        camnids_run_options opt;
        camnids_run_options_init(&opt);
        opt.lanes = lanes;
        opt.clock_gating = no_gating ? 0 : 1;
        opt.congestion_drop = congestion == "drop" ? 1 : 0;
        opt.queue_depth = queue_depth;
        opt.phase2_latency = phase2_latency;
        opt.oracle_check = oracle ? 1 : 0;

        camnids_result* res = nullptr;
        camnids_status s;
        if (!packets_path.empty()) {
            std::vector<std::uint8_t> data = read_bytes(packets_path);
            s = camnids_run_packets(img, data.data(), data.size(), &opt,
                                    coeffs_json.empty() ? nullptr
                                                        : coeffs_json.c_str(),
                                    &res);
        } else {
            std::vector<std::uint8_t> a = read_bytes(stream_path);
            std::vector<std::uint8_t> b;
            if (!stream_b_path.empty()) b = read_bytes(stream_b_path);
            s = camnids_run(img, a.data(), a.size(),
                            b.empty() ? nullptr : b.data(), b.size(), &opt,
                            coeffs_json.empty() ? nullptr : coeffs_json.c_str(),
                            &res);
        }
        if (res) {
            StringOut events, hits, stats, energy;
            check(camnids_result_events_csv(res, events.slot()));
            check(camnids_result_rule_hits_csv(res, hits.slot()));
            check(camnids_result_stats_json(res, stats.slot()));
            check(camnids_result_energy_json(res, energy.slot()));
            auto dir = std::filesystem::path(out_dir);
            write_file((dir / "events.csv").string(), events.str());
            write_file((dir / "rule_hits.csv").string(), hits.str());
            write_file((dir / "stats.json").string(), stats.str());
            write_file((dir / "energy.json").string(), energy.str());
            std::cout << "events: " << (dir / "events.csv").string()
                      << "\nrule hits: " << (dir / "rule_hits.csv").string()
                      << "\nstats: " << (dir / "stats.json").string()
                      << "\nenergy: " << (dir / "energy.json").string() << "\n";
            camnids_result_free(res);
        }
        camnids_image_free(img);
        if (s != CAMNIDS_OK) die(s);
        if (oracle) std::cout << "oracle check: ok\n";
        return 0;
    }

    if (*c_gen) {
        if (*g_rules) {
            camnids_ruleset* rs = nullptr;
            check(camnids_ruleset_generate(
                seed, n_patterns, len_min, len_max, wildcard_frac, multi_frac,
                config_json.empty() ? nullptr : config_json.c_str(), &rs));
            StringOut text;
            check(camnids_ruleset_print(rs, text.slot()));
            std::string path = (std::filesystem::path(out_dir) / gen_out).string();
            write_file(path, text.str());
            std::cout << "rules: " << path << " ("
                      << camnids_ruleset_pattern_count(rs) << " patterns)\n";
            camnids_ruleset_free(rs);
            return 0;
        }
        if (*g_traffic) {
            camnids_ruleset* rs = nullptr;
            check(camnids_ruleset_load(traffic_rules.c_str(), &rs));
            uint8_t* stream = nullptr;
            size_t stream_len = 0;
            StringOut truth;
            camnids_status s = camnids_gen_traffic(rs, length, hit_rate, seed,
                                                   &stream, &stream_len,
                                                   truth.slot());
            camnids_ruleset_free(rs);
            if (s != CAMNIDS_OK) die(s);
            auto dir = std::filesystem::path(out_dir);
            std::string spath = (dir / stream_out).string();
            std::ofstream f(spath, std::ios::binary);
            f.write(reinterpret_cast<const char*>(stream),
                    static_cast<std::streamsize>(stream_len));
            camnids_buffer_free(stream);
            if (!f) {
                std::cerr << "error: cannot write " << spath << "\n";
                return 2;
            }
            write_file((dir / truth_out).string(), truth.str());
            std::cout << "stream: " << spath << " (" << stream_len
                      << " bytes)\ntruth: " << (dir / truth_out).string() << "\n";
            return 0;
        }
        std::cerr << "error: gen needs a subcommand (rules|traffic)\n";
        return 1;
    }

    if (*c_sweep) {
        StringOut csv;
        const char* cfg = config_json.empty() ? nullptr : config_json.c_str();
        const char* cfs = coeffs_json.empty() ? nullptr : coeffs_json.c_str();
        if (*s_rulesize) {
            check(camnids_sweep_rulesize(seed, sizes.data(), sizes.size(), cfg,
                                         cfs, csv.slot()));
        } else if (*s_hitrate) {
            check(camnids_sweep_hitrate(seed, rates.data(), rates.size(), cfg,
                                        cfs, csv.slot()));
        } else if (*s_stages) {
            check(camnids_sweep_stages(seed, depths.data(), depths.size(),
                                       stage_rates.data(), stage_rates.size(),
                                       cfg, cfs, csv.slot()));
        } else {
            std::cerr << "error: sweep needs a subcommand "
                         "(rulesize|hitrate|stages)\n";
            return 1;
        }
        if (sweep_out.empty())
            std::cout << csv.str();
        else
            write_file((std::filesystem::path(out_dir) / sweep_out).string(),
                       csv.str());
        return 0;
    }

    if (*c_dump) {
        camnids_image* img = nullptr;
        check(camnids_image_read(dump_image_path.c_str(), &img));
        StringOut text;
        check(camnids_image_dump(img, text.slot()));
        std::cout << text.str();
        camnids_image_free(img);
        return 0;
    }

    if (*c_book) {
        StringOut csv;
        check(camnids_codebook_csv(csv.slot()));
        if (book_out.empty())
            std::cout << csv.str();
        else
            write_file((std::filesystem::path(out_dir) / book_out).string(),
                       csv.str());
        return 0;
    }

    return 1;
}
