#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "wkbsq/pipeline.hpp"

using namespace wkbsq;

namespace {

int log_level() {
    const char* env = std::getenv("WKBSQ_LOG");
    if (!env) return 1;
    std::string v = env;
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

ProblemSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem file " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("problem file is not valid JSON: ") + e.what());
    }
    return ProblemSpec::from_json(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wkbsq: Novikov-ring and exact-WKB pipeline"};
    app.require_subcommand(1);

    std::string problem_path;
    std::string out_dir;
    std::string format;
    double theta = std::nan("");
    double cutoff = std::nan("");
    double c_max = std::nan("");
    int order = -1;
    int depth = -1;
    bool use_exact = false, use_float = false;
    uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("problem", problem_path, "problem file (JSON)")->required();
        cmd->add_option("--theta", theta, "phase of hbar in radians");
        cmd->add_option("--cutoff", cutoff, "Novikov cutoff E");
        cmd->add_option("--order", order, "hbar truncation order N");
        cmd->add_option("--c-max", c_max, "weight cutoff for tracing/scattering");
        cmd->add_option("--depth", depth, "maximal scattering generation");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--format", format, "json|svg|both");
        cmd->add_flag("--exact", use_exact, "exact rational coefficient mode");
        cmd->add_flag("--float", use_float, "floating point coefficient mode");
        cmd->add_option("--seed", seed, "run seed (recorded in artifacts)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    const char* verbs[] = {"wkb", "trace", "scatter", "regions", "sq", "verify",
                           "solve", "all"};
    for (const char* v : verbs) add_common(app.add_subcommand(v));

    CLI11_PARSE(app, argc, argv);

    std::string verb = app.get_subcommands().front()->get_name();
    try {
        ProblemSpec spec = load_spec(problem_path);
        if (!std::isnan(theta)) spec.theta = theta;
        if (!std::isnan(cutoff)) spec.cutoff = cutoff;
        if (!std::isnan(c_max)) spec.c_max = c_max;
        if (order >= 0) spec.hbar_order = order;
        if (depth >= 0) spec.max_depth = depth;
        if (!out_dir.empty()) spec.out_dir = out_dir;
        if (!format.empty()) spec.format = format;
        if (use_exact) spec.exact = true;
        if (use_float) spec.exact = false;
        if (seed_given) spec.seed = seed;

        int rc = run_pipeline(spec, {verb});
        if (log_level() >= 1 && rc == 0)
            std::cout << "wkbsq " << verb << ": artifacts written to " << spec.out_dir
                      << "\n";
        return rc;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
