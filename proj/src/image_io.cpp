#include <fstream>
#include <sstream>

#include "camnids/compiler.hpp"
#include "json.hpp"

namespace camnids {

using nlohmann::json;

namespace {

std::string hex_code(Code11 w) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%03X", w);
    return buf;
}

Code11 parse_code(const json& j) {
    if (!j.is_string()) fail(ErrorKind::Parse, "image: code word must be a string");
    const std::string& s = j.get_ref<const std::string&>();
    if (s.size() != 5 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
        fail(ErrorKind::Parse, "image: bad code word '" + s + "'");
    unsigned v = 0;
    for (std::size_t i = 2; i < s.size(); ++i) {
        char c = s[i];
        int d = c >= '0' && c <= '9'   ? c - '0'
                : c >= 'a' && c <= 'f' ? c - 'a' + 10
                : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                       : -1;
        if (d < 0) fail(ErrorKind::Parse, "image: bad code word '" + s + "'");
        v = v * 16 + static_cast<unsigned>(d);
    }
    if (v > kCode11Mask) fail(ErrorKind::Parse, "image: code word out of range");
    return static_cast<Code11>(v);
}

json range_to_json(const RowRange& r) {
    return json{{"t", r.target}, {"dn", r.dn}, {"up", r.up}};
}

RowRange range_from_json(const json& j) {
    RowRange r;
    r.target = j.at("t").get<int>();
    r.dn = j.at("dn").get<int>();
    r.up = j.at("up").get<int>();
    return r;
}

json entry_to_json(const SramEntry& e) {
    json j = json::object();
    if (e.to_pe) j["pe"] = range_to_json(*e.to_pe);
    if (e.to_phase2) j["p2"] = range_to_json(*e.to_phase2);
    if (e.terminal_sub) j["term"] = *e.terminal_sub;
    return j;
}

SramEntry entry_from_json(const json& j) {
    SramEntry e;
    if (j.contains("pe")) e.to_pe = range_from_json(j.at("pe"));
    if (j.contains("p2")) e.to_phase2 = range_from_json(j.at("p2"));
    if (j.contains("term")) e.terminal_sub = j.at("term").get<std::uint32_t>();
    return e;
}

json wildbytes_to_json(const WildBytes& bytes) {
    json vals = json::array();
    json wild = json::array();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        vals.push_back(bytes[i].any ? 0 : bytes[i].value);
        if (bytes[i].any) wild.push_back(i);
    }
    json j{{"bytes", std::move(vals)}};
    if (!wild.empty()) j["wild"] = std::move(wild);
    return j;
}

WildBytes wildbytes_from_json(const json& j) {
    WildBytes out;
    for (const json& v : j.at("bytes"))
        out.push_back(WildByte::literal(static_cast<std::uint8_t>(v.get<int>())));
    if (j.contains("wild"))
        for (const json& i : j.at("wild")) {
            std::size_t idx = i.get<std::size_t>();
            if (idx >= out.size()) fail(ErrorKind::Parse, "image: wild index range");
            out[idx] = WildByte::wildcard();
        }
    return out;
}

json gap_to_json(const GapConstraint& g) {
    json j{{"min", g.min_gap}};
    if (g.max_gap)
        j["max"] = *g.max_gap;
    else
        j["max"] = nullptr;
    return j;
}

GapConstraint gap_from_json(const json& j) {
    GapConstraint g;
    g.min_gap = j.at("min").get<std::uint32_t>();
    if (!j.at("max").is_null()) g.max_gap = j.at("max").get<std::uint32_t>();
    return g;
}

}  // namespace

std::string hwconfig_to_json(const HwConfig& cfg) {
    json stages = json::object();
    for (const auto& [stage, pes] : cfg.stage_assignment)
        stages[std::to_string(stage)] = pes;
    json j{{"depth", cfg.depth},       {"n_pes", cfg.n_pes},
           {"pe_rows", cfg.pe_rows},   {"n_banks", cfg.n_banks},
           {"bank_rows", cfg.bank_rows}, {"w", cfg.w},
           {"stage_assignment", std::move(stages)}};
    return j.dump(2);
}

HwConfig hwconfig_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("config: ") + e.what());
    }
    HwConfig cfg;
    try {
        if (j.contains("depth")) cfg.depth = j.at("depth").get<int>();
        if (j.contains("n_pes")) cfg.n_pes = j.at("n_pes").get<int>();
        if (j.contains("pe_rows")) cfg.pe_rows = j.at("pe_rows").get<int>();
        if (j.contains("n_banks")) cfg.n_banks = j.at("n_banks").get<int>();
        if (j.contains("bank_rows")) cfg.bank_rows = j.at("bank_rows").get<int>();
        if (j.contains("w")) cfg.w = j.at("w").get<int>();
        if (j.contains("stage_assignment"))
            for (const auto& [k, v] : j.at("stage_assignment").items())
                cfg.stage_assignment[std::stoi(k)] = v.get<std::vector<int>>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string image_to_json(const TableImage& img) {
    json j;
    j["v"] = 1;
    j["config"] = json::parse(hwconfig_to_json(img.config));

    json book = json::array();
    for (int b = 0; b < 256; ++b)
        book.push_back(hex_code(img.codebook.code(static_cast<std::uint8_t>(b))));
    j["codebook"] = std::move(book);

    json stage1 = json::array();
    for (const auto& e : img.stage1)
        stage1.push_back(e ? entry_to_json(*e) : json(nullptr));
    j["stage1"] = std::move(stage1);

    json pes = json::array();
    for (const auto& rows : img.pes) {
        json jrows = json::array();
        for (const PeRow& r : rows)
            jrows.push_back(json{{"cam", hex_code(r.cam)},
                                 {"sram", entry_to_json(r.sram)}});
        pes.push_back(std::move(jrows));
    }
    j["pes"] = std::move(pes);

    json banks = json::array();
    for (const auto& rows : img.banks) {
        json jrows = json::array();
        for (const BankRow& r : rows) {
            json cam = json::array();
            for (Code11 c : r.cam.slots) cam.push_back(hex_code(c));
            jrows.push_back(json{{"cam", std::move(cam)},
                                 {"sub", r.sub_id},
                                 {"len", r.suffix_len}});
        }
        banks.push_back(std::move(jrows));
    }
    j["phase2"] = std::move(banks);

    json pats = json::array();
    for (const auto& [id, p] : img.ruleset.patterns) {
        json jp = wildbytes_to_json(p.bytes);
        jp["id"] = id;
        pats.push_back(std::move(jp));
    }
    json rules = json::array();
    for (const Rule& r : img.ruleset.rules) {
        json steps = json::array();
        for (const RuleStep& s : r.steps) {
            json js = gap_to_json(s.gap);
            js["pat"] = s.pattern_id;
            steps.push_back(std::move(js));
        }
        rules.push_back(json{{"id", r.id}, {"steps", std::move(steps)}});
    }
    json subs = json::array();
    for (const SubPattern& s : img.subs) {
        json js = wildbytes_to_json(s.full_bytes());
        js["id"] = s.id;
        js["prefix_len"] = s.prefix.size();
        subs.push_back(std::move(js));
    }
    json chains = json::object();
    for (const auto& [pid, chain] : img.plan.chains)
        chains[std::to_string(pid)] = chain;

    j["meta"] = json{{"patterns", std::move(pats)},
                     {"rules", std::move(rules)},
                     {"subs", std::move(subs)},
                     {"chains", std::move(chains)}};
    return j.dump();
}

TableImage image_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("image: ") + e.what());
    }
    TableImage img;
    try {
        if (j.at("v").get<int>() != 1)
            fail(ErrorKind::Parse, "image: unsupported version");
        img.config = hwconfig_from_json(j.at("config").dump());

        std::array<Code11, 256> table{};
        const json& book = j.at("codebook");
        if (book.size() != 256) fail(ErrorKind::Parse, "image: codebook size");
        for (int b = 0; b < 256; ++b)
            table[static_cast<std::size_t>(b)] =
                parse_code(book[static_cast<std::size_t>(b)]);
        img.codebook = Codebook::from_table(table);

        const json& stage1 = j.at("stage1");
        if (stage1.size() != 256) fail(ErrorKind::Parse, "image: stage1 size");
        for (int b = 0; b < 256; ++b) {
            const json& e = stage1[static_cast<std::size_t>(b)];
            if (!e.is_null())
                img.stage1[static_cast<std::size_t>(b)] = entry_from_json(e);
        }

        for (const json& jrows : j.at("pes")) {
            std::vector<PeRow> rows;
            for (const json& jr : jrows) {
                PeRow r;
                r.cam = parse_code(jr.at("cam"));
                r.sram = entry_from_json(jr.at("sram"));
                rows.push_back(std::move(r));
            }
            img.pes.push_back(std::move(rows));
        }
        for (const json& jrows : j.at("phase2")) {
            std::vector<BankRow> rows;
            for (const json& jr : jrows) {
                BankRow r;
                for (const json& c : jr.at("cam")) r.cam.slots.push_back(parse_code(c));
                r.sub_id = jr.at("sub").get<std::uint32_t>();
                r.suffix_len = jr.at("len").get<std::uint32_t>();
                rows.push_back(std::move(r));
            }
            img.banks.push_back(std::move(rows));
        }

        const json& meta = j.at("meta");
        for (const json& jp : meta.at("patterns")) {
            Pattern p;
            p.id = jp.at("id").get<std::uint32_t>();
            p.bytes = wildbytes_from_json(jp);
            img.ruleset.patterns.emplace(p.id, std::move(p));
        }
        for (const json& jr : meta.at("rules")) {
            Rule r;
            r.id = jr.at("id").get<std::uint32_t>();
            for (const json& js : jr.at("steps"))
                r.steps.push_back(
                    {js.at("pat").get<std::uint32_t>(), gap_from_json(js)});
            img.ruleset.rules.push_back(std::move(r));
        }
        for (const json& js : meta.at("subs")) {
            SubPattern s;
            s.id = js.at("id").get<std::uint32_t>();
            WildBytes all = wildbytes_from_json(js);
            std::size_t plen = js.at("prefix_len").get<std::size_t>();
            if (plen > all.size()) fail(ErrorKind::Parse, "image: bad prefix_len");
            for (std::size_t i = 0; i < plen; ++i) {
                if (all[i].any) fail(ErrorKind::Parse, "image: wildcard prefix");
                s.prefix.push_back(all[i].value);
            }
            s.suffix.assign(all.begin() + static_cast<std::ptrdiff_t>(plen), all.end());
            s.total_len = static_cast<std::uint32_t>(all.size());
            if (s.id != img.subs.size())
                fail(ErrorKind::Parse, "image: sub ids must be dense");
            img.subs.push_back(std::move(s));
        }
        for (const auto& [k, v] : meta.at("chains").items())
            img.plan.chains[static_cast<std::uint32_t>(std::stoul(k))] =
                v.get<std::vector<std::uint32_t>>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("image: ") + e.what());
    }
    img.validate();
    return img;
}

void write_image(const TableImage& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    f << image_to_json(img) << '\n';
    if (!f) fail(ErrorKind::Io, "write to " + path + " failed");
}

TableImage read_image(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return image_from_json(buf.str());
}

std::string dump_image(const TableImage& img) {
    std::ostringstream out;
    out << "config: depth=" << img.config.depth << " n_pes=" << img.config.n_pes
        << " pe_rows=" << img.config.pe_rows << " n_banks=" << img.config.n_banks
        << " bank_rows=" << img.config.bank_rows << " w=" << img.config.w << "\n";
    out << "stages:";
    for (const auto& [stage, pes] : img.config.stage_assignment) {
        out << " " << stage << ":[";
        for (std::size_t i = 0; i < pes.size(); ++i)
            out << (i ? "," : "") << pes[i];
        out << "]";
    }
    out << "\n";
    out << "patterns=" << img.ruleset.patterns.size()
        << " rules=" << img.ruleset.rules.size() << " subs=" << img.subs.size()
        << "\n";
    out << "phase1 rows used=" << img.phase1_rows_used() << "/"
        << img.config.n_pes * img.config.pe_rows
        << " phase2 rows used=" << img.phase2_rows_used() << "/"
        << img.config.n_banks * img.config.bank_rows << "\n";

    int populated = 0;
    for (int b = 0; b < 256; ++b)
        if (img.stage1[static_cast<std::size_t>(b)]) ++populated;
    out << "stage1 entries=" << populated << "\n";

    auto print_entry = [&](const SramEntry& e) {
        if (e.to_pe)
            out << " ->pe" << e.to_pe->target << "[" << e.to_pe->dn << ".."
                << e.to_pe->up << "]";
        if (e.to_phase2)
            out << " ->bank" << e.to_phase2->target << "[" << e.to_phase2->dn << ".."
                << e.to_phase2->up << "]";
        if (e.terminal_sub) out << " terminal sub" << *e.terminal_sub;
    };
    for (int b = 0; b < 256; ++b) {
        if (!img.stage1[static_cast<std::size_t>(b)]) continue;
        out << "  stage1[0x" << std::hex << b << std::dec << "]";
        print_entry(*img.stage1[static_cast<std::size_t>(b)]);
        out << "\n";
    }
    for (int pe = 0; pe < img.config.n_pes; ++pe) {
        const auto& rows = img.pes[static_cast<std::size_t>(pe)];
        if (rows.empty()) continue;
        out << "pe " << pe << " (stage " << img.stage_of_pe(pe) << ", "
            << rows.size() << " rows)\n";
        for (std::size_t r = 0; r < rows.size(); ++r) {
            int byte = img.codebook.byte_of(rows[r].cam);
            out << "  row " << r << " char=0x" << std::hex << byte << std::dec;
            print_entry(rows[r].sram);
            out << "\n";
        }
    }
    for (int bank = 0; bank < img.config.n_banks; ++bank) {
        const auto& rows = img.banks[static_cast<std::size_t>(bank)];
        if (rows.empty()) continue;
        out << "bank " << bank << " (" << rows.size() << " rows)\n";
        for (std::size_t r = 0; r < rows.size(); ++r)
            out << "  row " << r << " sub" << rows[r].sub_id
                << " suffix_len=" << rows[r].suffix_len << "\n";
    }
    return out.str();
}

}  // namespace camnids
