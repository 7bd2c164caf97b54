// activetrace: run scenarios, compare traceback schemes, inspect the spoof database.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "activetrace/arm/spoof_db.hpp"
#include "activetrace/sim/compare.hpp"
#include "activetrace/sim/engine.hpp"
#include "activetrace/sim/report.hpp"
#include "activetrace/sim/scenario.hpp"

namespace fs = std::filesystem;
using namespace activetrace;

namespace {

constexpr int kBadInput = 2;

/// A path, or a bare name looked up as <dir>/<name>.json in
/// $ACTIVETRACE_SCENARIOS, ./scenarios and the source tree's scenarios/.
fs::path resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    if (arg.find('/') == std::string::npos) {
        std::vector<fs::path> dirs;
        if (const char* env = std::getenv("ACTIVETRACE_SCENARIOS")) dirs.emplace_back(env);
        dirs.emplace_back("scenarios");
        dirs.emplace_back(ACTIVETRACE_SCENARIO_DIR);
        for (const auto& d : dirs)
            if (auto p = d / (arg + ".json"); fs::exists(p)) return p;
    }
    throw Error(fmt::format("no scenario '{}'", arg));
}

/// --db wins, then $ACTIVETRACE_DB; otherwise the run gets a fresh in-memory database.
std::optional<fs::path> db_path(const std::string& flag) {
    if (!flag.empty()) return fs::path(flag);
    if (const char* env = std::getenv("ACTIVETRACE_DB"); env && *env) return fs::path(env);
    return std::nullopt;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read '{}'", p.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path));
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traceback and active response simulator"};
    app.require_subcommand(1);

    std::string scenario_arg, report_path, format = "text", db_flag;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run a scenario end to end");
    run->add_option("scenario", scenario_arg, "Scenario file or bare name")->required();
    run->add_option("--seed", seed, "Override the scenario's seed");
    run->add_option("--report", report_path, "Write the report here instead of stdout");
    run->add_option("--format", format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
    run->add_option("--db", db_flag, "Spoof database file (default: $ACTIVETRACE_DB, else in-memory)");

    std::vector<std::string> strategies;
    auto* compare = app.add_subcommand("compare", "Compare traceback schemes on one scenario");
    compare->add_option("scenario", scenario_arg, "Scenario file or bare name")->required();
    compare->add_option("--strategies", strategies, "Comma-separated: marking,logging,input-debugging,"
                                                    "controlled-flooding,ingress")
        ->delimiter(',')
        ->required();
    compare->add_option("--seed", seed, "Override the scenario's seed");
    compare->add_option("--report", report_path, "Write the table here instead of stdout");
    compare->add_option("--format", format, "text or machine")->check(CLI::IsMember({"text", "machine"}));

    std::string db_file;
    auto* db = app.add_subcommand("db", "Inspect or clear a spoof database");
    db->require_subcommand(1);
    auto* show = db->add_subcommand("show", "List records");
    show->add_option("dbpath", db_file)->required();
    auto* purge = db->add_subcommand("purge", "Delete every record");
    purge->add_option("dbpath", db_file)->required();

    std::string report_in;
    auto* replay = app.add_subcommand("replay", "Re-run a report's scenario and check it matches byte for byte");
    replay->add_option("report", report_in)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto s = sim::load_scenario(resolve_scenario(scenario_arg));
            if (seed) s.seed = *seed;
            const auto path = db_path(db_flag);
            auto spoof = path ? arm::SpoofDb::open(*path) : arm::SpoofDb{};
            for (const auto& w : spoof.warnings()) std::cerr << "warning: " << w << "\n";
            const auto report = sim::run_scenario(s, spoof);
            emit(sim::render(report, *sim::parse_format(format)), report_path);
            return 0;
        }
        if (*compare) {
            auto s = sim::load_scenario(resolve_scenario(scenario_arg));
            if (seed) s.seed = *seed;
            std::vector<baseline::Scheme> schemes;
            for (const auto& name : strategies) {
                auto scheme = baseline::parse_scheme(name);
                if (!scheme) {
                    std::cerr << "unknown strategy '" << name << "'\n";
                    return kBadInput;
                }
                schemes.push_back(*scheme);
            }
            const auto cmp = sim::compare_strategies(s, schemes);
            emit(format == "text" ? cmp.render_text() : cmp.to_json() + "\n", report_path);
            return 0;
        }
        if (*show) {
            auto spoof = arm::SpoofDb::open(db_file);
            for (const auto& w : spoof.warnings()) std::cerr << "warning: " << w << "\n";
            for (const auto& r : spoof.records()) std::cout << arm::SpoofDb::to_line(r) << "\n";
            return 0;
        }
        if (*purge) {
            auto spoof = arm::SpoofDb::open(db_file);
            const auto n = spoof.size();
            spoof.clear();
            spoof.save(db_file);
            std::cout << fmt::format("purged {} records\n", n);
            return 0;
        }
        if (*replay) {
            const auto original = read_file(report_in);
            auto rec = sim::parse_replay(original);
            auto spoof = arm::SpoofDb::parse(rec.db);
            const auto again = sim::render(sim::run_scenario(rec.scenario, spoof), rec.format);
            if (again == original) {
                std::cout << fmt::format("replay identical ({} bytes)\n", original.size());
                return 0;
            }
            std::istringstream a(original), b(again);
            std::string la, lb;
            std::size_t line = 1;
            while (std::getline(a, la) && std::getline(b, lb) && la == lb) ++line;
            std::cout << fmt::format("replay differs at line {}\n  report: {}\n  replay: {}\n", line, la, lb);
            return 1;
        }
    } catch (const sim::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kBadInput;
    } catch (const sim::ValidationError& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
