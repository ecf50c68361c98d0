// Reference external simulator: reads a hemtfit netlist, evaluates the
// built-in model at the requested points, prints the result table to
// stdout. Useful as a drop-in for the external-evaluator contract and
// for differential-testing external setups.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "hemtfit/hemtfit.h"

int main(int argc, char** argv) {
    CLI::App app{"hemtfit-sim - reference simulator for hemtfit netlists"};
    std::string netlist, points, kind = "auto";
    app.add_option("--netlist", netlist, "Netlist file (.cir)")->required();
    app.add_option("--points", points, "Points CSV (vgs,vds rows or freq_hz rows)")->required();
    app.add_option("--kind", kind, "iv, sparams or auto")
        ->check(CLI::IsMember({"iv", "sparams", "auto"}));
    CLI11_PARSE(app, argc, argv);

    char* table = nullptr;
    if (hemtfit_simulate_netlist(netlist.c_str(), points.c_str(), kind.c_str(), &table) !=
        HEMTFIT_OK) {
        std::fprintf(stderr, "error: %s\n", hemtfit_last_error());
        return 1;
    }
    std::fputs(table, stdout);
    hemtfit_string_free(table);
    return 0;
}
