// revlab: command-line driver for the revelation experiments.
//
//   revlab <subcommand> [flags]
//
// Every flag may also be given in a flat JSON file passed with --config; flags on the command line
// win over the file. Output goes to --output, else to $REVLAB_OUT_DIR/<name>.<ext>, else stdout.
// Exit status: 0 ok or fallback, 1 divergence or solver failure, 2 usage error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "revlab/errors.hpp"
#include "table.hpp"

namespace {

using namespace revlab::cli;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

/// Flat key/value JSON: {"gamma": [1, 3, 10], "grid": 20, "preference": "crra"}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool defaults, bool, std::string) const override {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string& name = opt->get_lnames().front();
            if (opt->count() > 0)
                doc[name] = opt->as<std::vector<std::string>>();
            else if (defaults && !opt->get_default_str().empty())
                doc[name] = opt->get_default_str();
        }
        return doc.dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError("config", e.what());
        }
        if (!doc.is_object()) throw CLI::ConversionError("config", "config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : doc.items()) {
            CLI::ConfigItem item;
            item.name = key;
            std::replace(item.name.begin(), item.name.end(), '_', '-');
            auto text = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
            if (value.is_array())
                for (const auto& v : value) item.inputs.push_back(text(v));
            else
                item.inputs.push_back(text(value));
            items.push_back(std::move(item));
        }
        return items;
    }
};

void add_options(CLI::App& app, Options& o, std::string& output, std::string& format) {
    auto positive = CLI::PositiveNumber;
    app.add_option("--preference", o.preference, "crra or cara")->check(CLI::IsMember({"crra", "cara"}));
    app.add_option("--gamma", o.gamma, "CRRA risk aversion, one value or one per group")
        ->delimiter(',')
        ->check(positive);
    app.add_option("--tau", o.tau, "signal precision, one value or one per group")->delimiter(',')->check(positive);
    app.add_option("--alpha", o.alpha, "CARA risk aversion, one value or one per group")
        ->delimiter(',')
        ->check(positive);
    app.add_option("--wealth", o.wealth, "initial wealth, one value or one per group")->delimiter(',')->check(positive);
    app.add_option("--grid", o.grid, "signal grid points G")->check(CLI::Range(2, 200));
    app.add_option("--k", o.k, "number of agent groups")->check(CLI::Range(1, 8));
    app.add_option("--supply", o.supply, "net asset supply")->check(CLI::NonNegativeNumber);
    app.add_option("--damping", o.damping, "Picard damping")->check(CLI::Range(1e-6, 1.0));
    app.add_option("--anderson", o.anderson, "Anderson memory");
    app.add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::Range(1, 1000000));
    app.add_option("--tol", o.tol, "strict convergence tolerance on the residual")->check(positive);
    app.add_option("--lambda", o.lambda, "informed shares")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    app.add_option("--cost", o.cost, "information costs")->delimiter(',')->check(CLI::NonNegativeNumber);
    app.add_option("--seed-posterior", o.seed_posterior, "no-learning, full-revelation or a checkpoint path");
    app.add_option("--continuation", o.continuation, "continuation stages for mixed risk aversion, 0 to disable");
    app.add_option("--checkpoint", o.checkpoint, "write the solved beliefs here (ree)");
    app.add_option("--threads", o.threads, "worker cap")->check(CLI::Range(1u, 1024u));
    app.add_option("--output", output, "output file");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

Format pick_format(const std::string& flag, const std::string& output, const std::string& command) {
    if (!flag.empty()) return flag == "json" ? Format::Json : Format::Csv;
    if (output.size() > 5 && output.substr(output.size() - 5) == ".json") return Format::Json;
    return command == "ree" ? Format::Json : Format::Csv;
}

int emit(const Table& table, Format format, const std::string& output) {
    std::filesystem::path path = output;
    if (path.empty()) {
        if (const char* dir = std::getenv("REVLAB_OUT_DIR"); dir && *dir)
            path = std::filesystem::path(dir) / (table.name + (format == Format::Json ? ".json" : ".csv"));
    }
    if (path.empty()) {
        write(std::cout, table, format);
        return std::cout ? kExitOk : kExitFailed;
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) {
        std::cerr << "revlab: cannot write " << path.string() << '\n';
        return kExitFailed;
    }
    write(out, table, format);
    return out ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Revelation experiments on the signal lattice", "revlab"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "flat JSON file of flag values");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Options options;
    std::string output, format;
    add_options(app, options, output, format);

    std::string chosen;
    for (const auto& spec : revlab::cli::commands()) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.summary)->fallthrough();
        sub->callback([&chosen, name = spec.name] { chosen = name; });
        if (spec.name == "figure")
            sub->add_option("id", options.figure, "figure id")->required()->check(CLI::IsMember(figure_ids()));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Command command = nullptr;
    for (const auto& spec : revlab::cli::commands())
        if (spec.name == chosen) command = spec.run;

    try {
        const CommandResult result = command(options);
        const int written = emit(result.table, pick_format(format, output, chosen), output);
        if (written != kExitOk) return written;
        return result.diverged ? kExitFailed : kExitOk;
    } catch (const revlab::InvalidConfig& e) {
        std::cerr << "revlab: " << e.what() << '\n';
        return kExitUsage;
    } catch (const revlab::InvalidInput& e) {
        std::cerr << "revlab: " << e.what() << '\n';
        return kExitUsage;
    } catch (const revlab::Error& e) {
        std::cerr << "revlab: " << e.what() << '\n';
        return kExitFailed;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "revlab: " << e.what() << '\n';
        return kExitFailed;
    }
}
