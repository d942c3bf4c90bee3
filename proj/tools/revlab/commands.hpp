#pragma once

#include <string>
#include <vector>

#include "table.hpp"

namespace revlab::cli {

struct Options {
    std::string preference = "crra";
    std::vector<double> gamma{0.5};
    std::vector<double> tau{2.0};
    std::vector<double> alpha{1.0};
    std::vector<double> wealth{1.0};
    std::size_t grid = 20;
    std::size_t k = 3;
    double supply = 0.0;

    double damping = 0.2;
    std::size_t anderson = 6;
    std::size_t max_iter = 400;
    double tol = 1e-12;
    unsigned threads = 1;
    std::string seed_posterior = "no-learning";
    std::size_t continuation = 4;  // stages from the mean risk aversion when groups differ; 0 iterates directly
    std::string checkpoint;  // written after an ree solve when set

    std::vector<double> lambda;
    std::vector<double> cost;

    std::string figure;
};

struct CommandResult {
    Table table;
    bool diverged = false;
};

using Command = CommandResult (*)(const Options&);

struct CommandSpec {
    std::string name;
    std::string summary;
    Command run;
};

/// Subcommands in help order.
const std::vector<CommandSpec>& commands();

/// Figure ids accepted by the figure subcommand.
const std::vector<std::string>& figure_ids();

}  // namespace revlab::cli
