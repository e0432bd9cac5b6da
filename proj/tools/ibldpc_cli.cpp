// ibldpc: table design, FER campaigns and result reports.
//
//   ibldpc design   --family F --rates 1/3,1/2 --bits 4 --iters 100 --seed 0 --out tables.bin
//   ibldpc simulate --config campaign.json [--out fer.csv] [--plot fer.json]
//   ibldpc report   --csv fer.csv [--out plot.json]
//   ibldpc family   --out family.json
//
// Exit codes: 0 success, 2 configuration error, 3 design failure.

#include "ibldpc/errors.hpp"
#include "ibldpc/ldpc_code.hpp"
#include "ibldpc/simulation.hpp"
#include "ibldpc/table_designer.hpp"
#include "ibldpc/text.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace ibldpc;

constexpr int kExitConfig = 2;
constexpr int kExitDesign = 3;

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

PbrlFamily family_from_arg(const std::string& arg)
{
    if (arg.empty() || arg == "stand-in") {
        return stand_in_family();
    }
    return load_family(arg);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw ConfigError("cannot write " + path);
    }
}

struct DesignArgs {
    std::string family;
    std::string rates;
    int bits = 4;
    int iters = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string design_ebn0;
    std::string report;
    bool unconditioned = false;
};

int run_design(const DesignArgs& a)
{
    const PbrlFamily family = family_from_arg(a.family);
    std::vector<RatePoint> rates;
    if (a.rates.empty()) {
        rates = family_rate_points(family);
    } else {
        for (const auto& r : split_list(a.rates)) {
            rates.push_back(find_rate_point(family, parse_rate(r)));
        }
    }
    DesignConfig cfg;
    cfg.bit_width = a.bits;
    cfg.max_iters = a.iters;
    cfg.seed = a.seed;
    cfg.condition_on_puncturing = !a.unconditioned;
    if (!a.design_ebn0.empty()) {
        for (const auto& v : split_list(a.design_ebn0)) {
            cfg.design_ebn0_db.push_back(v == "auto" ? DesignConfig::kAuto : std::stod(v));
        }
        if (cfg.design_ebn0_db.size() != rates.size()) {
            throw ConfigError("--design-ebn0 needs one value per rate");
        }
    }
    const DecoderTables tables = design_tables(family, rates, cfg);
    save_tables(tables, a.out);
    for (const auto& r : tables.rates) {
        std::cerr << "rate " << format_double(r.code_rate) << ": design Eb/N0 " << format_double(r.design_ebn0_db)
                  << " dB, final I(X;app) " << format_double(r.iterations.back().mi_app)
                  << (r.converged ? "" : " (not converged)") << "\n";
    }
    if (!a.report.empty()) {
        write_text(a.report, design_report_csv(tables));
    }
    return 0;
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::string plot;
    int threads = -1;
};

int run_simulate(const SimulateArgs& a)
{
    CampaignConfig cfg = load_campaign_config(a.config);
    if (a.threads >= 0) {
        cfg.threads = static_cast<unsigned>(a.threads);
    }
    const auto records = run_campaign(cfg, [](const FerRecord& r) {
        std::cerr << r.decoder << " R=" << format_double(r.rate) << " Eb/N0=" << format_double(r.ebn0_db)
                  << " dB: " << r.frame_errors << "/" << r.frames << " FER " << format_double(r.fer) << "\n";
    });
    if (a.out.empty()) {
        std::cout << emit_csv(records);
    } else {
        emit_csv(records, a.out);
    }
    if (!a.plot.empty()) {
        emit_plot_data(records, a.plot);
    }
    return 0;
}

int run_report(const std::string& csv, const std::string& out)
{
    std::vector<FerRecord> records;
    try {
        records = parse_csv(read_text(csv));
    } catch (const ParseError& e) {
        throw ConfigError(csv + ": " + e.what());
    }
    if (!out.empty()) {
        emit_plot_data(records, out);
    }
    std::map<std::pair<double, std::string>, std::vector<FerRecord>> series;
    for (const auto& r : records) {
        series[{r.rate, r.decoder}].push_back(r);
    }
    std::cout << "rate,decoder,ebn0_at_fer_1e-2\n";
    for (const auto& [key, pts] : series) {
        const auto x = fer_crossing(pts, 1e-2);
        std::cout << format_double(key.first) << ',' << key.second << ',' << (x ? format_double(*x) : "none") << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lookup-table LDPC decoder design and simulation"};
    app.require_subcommand(1);

    DesignArgs design;
    auto* dcmd = app.add_subcommand("design", "Design lookup tables for a code family");
    dcmd->add_option("--family", design.family, "Family JSON file (default: built-in stand-in)");
    dcmd->add_option("--rates", design.rates, "Comma-separated rates, e.g. 1/3,1/2,2/3 (default: all)");
    dcmd->add_option("--bits", design.bits, "Message bit width")->check(CLI::Range(1, 7));
    dcmd->add_option("--iters", design.iters, "Decoding iterations to design")->check(CLI::Range(1, 100000));
    dcmd->add_option("--seed", design.seed, "Design seed");
    dcmd->add_option("--out", design.out, "Output table artifact")->required();
    dcmd->add_option("--design-ebn0", design.design_ebn0, "Per-rate design Eb/N0 in dB or 'auto'");
    dcmd->add_option("--report", design.report, "Write the per-iteration information trace as CSV");
    dcmd->add_flag("--unconditioned", design.unconditioned, "Ignore the puncturing state in the node tables");

    SimulateArgs sim;
    auto* scmd = app.add_subcommand("simulate", "Run a FER campaign");
    scmd->add_option("--config", sim.config, "Campaign JSON")->required();
    scmd->add_option("--out", sim.out, "CSV output (default: stdout)");
    scmd->add_option("--plot", sim.plot, "Plot-data JSON output");
    scmd->add_option("--threads", sim.threads, "Worker threads (0: all cores)");

    std::string report_csv, report_out;
    auto* rcmd = app.add_subcommand("report", "Summarize a FER CSV");
    rcmd->add_option("--csv", report_csv, "FER CSV")->required();
    rcmd->add_option("--out", report_out, "Plot-data JSON output");

    std::string family_out;
    auto* fcmd = app.add_subcommand("family", "Write the built-in stand-in family as JSON");
    fcmd->add_option("--out", family_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*dcmd) {
            return run_design(design);
        }
        if (*scmd) {
            return run_simulate(sim);
        }
        if (*rcmd) {
            return run_report(report_csv, report_out);
        }
        const std::string text = write_family_json(stand_in_family());
        if (family_out.empty()) {
            std::cout << text;
        } else {
            write_text(family_out, text);
        }
        return 0;
    } catch (const DesignError& e) {
        std::cerr << "design failure: " << e.what() << "\n";
        return kExitDesign;
    } catch (const std::exception& e) {
        // bad files, unknown rates, invalid parameters
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
